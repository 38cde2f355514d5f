"""Problem instances for signed, pseudometric-weighted and chromatic correlation clustering.

Three flavors share one vertex model (dense ids ``0..n-1``) and one text format::

    cc n m          # then m lines   "u v +|-"
    wcc n           # then n(n-1)/2  "u v +|- weight"
    ccc n L m       # then m lines   "u v color|gamma"

Pairs missing from a ``cc`` file are neutral; ``wcc`` files must list every pair.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Union

import numpy as np

GAMMA = -1
NO_EDGE = 0


class EdgeSign(enum.IntEnum):
    NEGATIVE = -1
    NEUTRAL = 0
    POSITIVE = 1

    @property
    def symbol(self) -> str:
        return {1: "+", -1: "-", 0: "o"}[int(self)]

    @classmethod
    def parse(cls, token: str) -> "EdgeSign":
        try:
            return _SIGN_TOKENS[token]
        except KeyError:
            raise ValueError(f"unknown edge sign {token!r}") from None


_SIGN_TOKENS = {
    "+": EdgeSign.POSITIVE,
    "-": EdgeSign.NEGATIVE,
    "o": EdgeSign.NEUTRAL,
    "0": EdgeSign.NEUTRAL,
    "∘": EdgeSign.NEUTRAL,
}


class InstanceError(ValueError):
    pass


class ParseError(InstanceError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class PseudometricError(InstanceError):
    def __init__(self, triple: tuple[int, int, int], message: str):
        self.triple = triple
        super().__init__(message)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column indices of the pairs ``u < v`` in lexicographic order."""
    return np.triu_indices(n, k=1)


# --------------------------------------------------------------------------
# clusterings


@dataclass(frozen=True)
class Clustering:
    """A partition of ``0..n-1`` stored as a restricted-growth label string."""

    labels: tuple[int, ...]

    def __post_init__(self):
        seen = -1
        for lab in self.labels:
            if lab > seen + 1 or lab < 0:
                raise ValueError("cluster labels must form a restricted growth string")
            seen = max(seen, lab)

    @classmethod
    def from_labels(cls, labels) -> "Clustering":
        """Canonicalize arbitrary hashable labels to first-occurrence order."""
        remap: dict = {}
        out = []
        for lab in labels:
            if lab not in remap:
                remap[lab] = len(remap)
            out.append(remap[lab])
        return cls(tuple(out))

    @classmethod
    def from_clusters(cls, clusters, n: int) -> "Clustering":
        labels = [-1] * n
        for cid, members in enumerate(clusters):
            for v in members:
                if labels[v] != -1:
                    raise ValueError(f"vertex {v} appears in two clusters")
                labels[v] = cid
        if -1 in labels:
            raise ValueError(f"vertex {labels.index(-1)} is not covered")
        return cls.from_labels(labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def n_clusters(self) -> int:
        return max(self.labels) + 1 if self.labels else 0

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_clusters)]
        for v, lab in enumerate(self.labels):
            out[lab].append(v)
        return out

    def as_array(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=np.int64)


@dataclass(frozen=True)
class ChromaticClustering:
    clustering: Clustering
    colors: tuple[int, ...]  # colors[cluster id] in 1..L

    def __post_init__(self):
        if len(self.colors) != self.clustering.n_clusters:
            raise ValueError("every cluster needs exactly one color")

    @classmethod
    def from_labeled(cls, labels, colors_by_label: dict) -> "ChromaticClustering":
        """Build from arbitrary cluster labels and a color per label."""
        c = Clustering.from_labels(labels)
        first = {}
        for v, lab in enumerate(labels):
            first.setdefault(lab, c.labels[v])
        colors = [0] * c.n_clusters
        for lab, cid in first.items():
            colors[cid] = int(colors_by_label[lab])
        return cls(c, tuple(colors))

    @property
    def n(self) -> int:
        return self.clustering.n


# --------------------------------------------------------------------------
# instances


@dataclass(frozen=True, eq=False)
class CCInstance:
    n: int
    sign: np.ndarray  # int8 matrix, symmetric, zero diagonal
    names: tuple[str, ...] | None = None

    flavor = "cc"

    def __post_init__(self):
        s = np.asarray(self.sign, dtype=np.int8)
        _check_square(s, self.n, "sign")
        if not np.array_equal(s, s.T):
            raise InstanceError("sign matrix must be symmetric")
        if np.any(np.diag(s) != 0):
            raise InstanceError("self-pairs are not allowed")
        if not np.all(np.isin(s, (-1, 0, 1))):
            raise InstanceError("signs must be in {-1, 0, +1}")
        object.__setattr__(self, "sign", _frozen(s))

    @classmethod
    def from_edges(cls, n: int, edges) -> "CCInstance":
        s = np.zeros((n, n), dtype=np.int8)
        for u, v, sg in edges:
            s[u, v] = s[v, u] = int(sg)
        return cls(n, s)

    def sign_of(self, u: int, v: int) -> EdgeSign:
        return EdgeSign(int(self.sign[u, v]))

    def weight_matrix(self) -> np.ndarray:
        return (self.sign != 0).astype(float)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.sign, 1)))

    def __eq__(self, other):
        return isinstance(other, CCInstance) and self.n == other.n and np.array_equal(self.sign, other.sign)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class WCCInstance:
    """Complete signed graph whose violation weights form a pseudometric."""

    n: int
    sign: np.ndarray
    weight: np.ndarray  # object array of Fractions (exact) or float64
    names: tuple[str, ...] | None = None

    flavor = "wcc"

    def __post_init__(self):
        s = np.asarray(self.sign, dtype=np.int8)
        _check_square(s, self.n, "sign")
        iu = pair_index(self.n)
        if not np.array_equal(s, s.T) or np.any(np.diag(s) != 0):
            raise InstanceError("sign matrix must be symmetric with zero diagonal")
        if not np.all(np.isin(s[iu], (-1, 1))):
            raise InstanceError("every pair of a wcc instance needs a + or - sign")
        w = _as_weight_array(self.weight)
        _check_square(w, self.n, "weight")
        if not all(w[i, j] == w[j, i] for i, j in zip(*iu)):
            raise InstanceError("weight matrix must be symmetric")
        if any(w[i, j] < 0 for i, j in zip(*iu)):
            raise InstanceError("weights must be nonnegative")
        check_pseudometric(w)
        object.__setattr__(self, "sign", _frozen(s))
        object.__setattr__(self, "weight", _frozen(w))

    @property
    def is_exact(self) -> bool:
        return self.weight.dtype == object

    def sign_of(self, u: int, v: int) -> EdgeSign:
        return EdgeSign(int(self.sign[u, v]))

    def weight_matrix(self) -> np.ndarray:
        return self.weight.astype(float)

    def __eq__(self, other):
        return (
            isinstance(other, WCCInstance)
            and self.n == other.n
            and np.array_equal(self.sign, other.sign)
            and all(a == b for a, b in zip(self.weight.ravel().tolist(), other.weight.ravel().tolist()))
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CCCInstance:
    """Edge-colored graph; ``color[u, v]`` is 1..L, GAMMA (-1) or NO_EDGE (0)."""

    n: int
    L: int
    color: np.ndarray
    names: tuple[str, ...] | None = None

    flavor = "ccc"

    def __post_init__(self):
        if self.L < 1:
            raise InstanceError("need at least one color")
        c = np.asarray(self.color, dtype=np.int64)
        _check_square(c, self.n, "color")
        if not np.array_equal(c, c.T) or np.any(np.diag(c) != NO_EDGE):
            raise InstanceError("color matrix must be symmetric with zero diagonal")
        if np.any((c < GAMMA) | (c > self.L)):
            raise InstanceError(f"colors must lie in 1..{self.L} or be gamma")
        object.__setattr__(self, "color", _frozen(c))

    @classmethod
    def from_edges(cls, n: int, L: int, edges) -> "CCCInstance":
        c = np.zeros((n, n), dtype=np.int64)
        for u, v, col in edges:
            c[u, v] = c[v, u] = GAMMA if col in ("gamma", GAMMA) else int(col)
        return cls(n, L, c)

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.color, 1)))

    def __eq__(self, other):
        return (
            isinstance(other, CCCInstance)
            and (self.n, self.L) == (other.n, other.L)
            and np.array_equal(self.color, other.color)
        )

    __hash__ = None


Instance = Union[CCInstance, WCCInstance, CCCInstance]


def _check_square(a: np.ndarray, n: int, what: str):
    if n < 1:
        raise InstanceError("an instance needs at least one vertex")
    if a.shape != (n, n):
        raise InstanceError(f"{what} matrix has shape {a.shape}, expected {(n, n)}")


def _as_weight_array(w) -> np.ndarray:
    w = np.asarray(w)
    if w.dtype == object or np.issubdtype(w.dtype, np.integer):
        flat = [Fraction(v) if isinstance(v, Rational) else v for v in w.ravel().tolist()]
        if all(isinstance(v, Fraction) for v in flat):
            out = np.empty(w.shape, dtype=object)
            out.ravel()[:] = flat
            return out
        return np.asarray([float(v) for v in flat], dtype=float).reshape(w.shape)
    return np.asarray(w, dtype=float)


# --------------------------------------------------------------------------
# pseudometric weights


def find_triangle_violation(weight: np.ndarray, tol: float = 0.0):
    """First ``(u, k, v)`` with ``w[u,v] > w[u,k] + w[k,v] + tol``, or None."""
    w = np.asarray(weight)
    n = w.shape[0]
    if w.dtype != object:
        bad = w[:, None, :] > w[:, :, None] + w[None, :, :] + tol
        hits = np.argwhere(bad)
        if len(hits) == 0:
            return None
        u, v, k = (int(t) for t in hits[0])
        return u, k, v
    for u, v in itertools.combinations(range(n), 2):
        for k in range(n):
            if k != u and k != v and w[u, v] > w[u, k] + w[k, v]:
                return u, k, v
    return None


def check_pseudometric(weight: np.ndarray) -> None:
    w = np.asarray(weight)
    tol = 0.0 if w.dtype == object else 1e-12 * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    hit = find_triangle_violation(w, tol)
    if hit is not None:
        u, k, v = hit
        triple = tuple(sorted((u, k, v)))
        raise PseudometricError(
            triple,
            f"weights violate the triangle inequality on {triple}: "
            f"w({u},{v})={w[u, v]} > w({u},{k})+w({k},{v})={w[u, k] + w[k, v]}",
        )


def shortest_path_closure(weight: np.ndarray) -> np.ndarray:
    """Floyd-Warshall min-plus closure; preserves the dtype (exact stays exact)."""
    d = np.array(weight, copy=True)
    n = d.shape[0]
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


# --------------------------------------------------------------------------
# costs


def _check_size(inst: Instance, n: int):
    if n != inst.n:
        raise InstanceError(f"clustering covers {n} vertices, instance has {inst.n}")


def cc_cost(inst: CCInstance | WCCInstance, c: Clustering):
    """Disagreements: separated positive pairs plus co-clustered negative pairs."""
    _check_size(inst, c.n)
    lab = c.as_array()
    iu = pair_index(inst.n)
    together = (lab[:, None] == lab[None, :])[iu]
    s = inst.sign[iu]
    bad = ((s == 1) & ~together) | ((s == -1) & together)
    if isinstance(inst, CCInstance):
        return int(np.count_nonzero(bad))
    w = inst.weight[iu][bad]
    if inst.is_exact:
        return sum(w.tolist(), Fraction(0))
    return float(np.sum(w))


def ccc_cost(inst: CCCInstance, cc: ChromaticClustering) -> int:
    _check_size(inst, cc.n)
    lab = cc.clustering.as_array()
    phi = np.asarray(cc.colors, dtype=np.int64)
    if len(phi) != cc.clustering.n_clusters:
        raise InstanceError("coloring must cover every cluster")
    iu = pair_index(inst.n)
    col = inst.color[iu]
    together = (lab[:, None] == lab[None, :])[iu]
    cluster_color = phi[lab[iu[0]]]
    chromatic = col > 0
    agree = together & (cluster_color == col)
    cost = np.count_nonzero(chromatic & ~agree) + np.count_nonzero((col == GAMMA) & together)
    return int(cost)


def instance_cost(inst: Instance, clustering) -> float:
    if isinstance(inst, CCCInstance):
        return ccc_cost(inst, clustering)
    return cc_cost(inst, clustering)


# --------------------------------------------------------------------------
# text format


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected integer {what}, got {tok!r}", lineno) from None


class _VertexMap:
    """Integer ids, or names numbered by first appearance; never mixed."""

    def __init__(self, n: int):
        self.n = n
        self.mode: str | None = None
        self.names: dict[str, int] = {}

    def __call__(self, tok: str, lineno: int) -> int:
        is_int = tok.lstrip("-").isdigit()
        mode = "id" if is_int else "name"
        if self.mode is None:
            self.mode = mode
        elif self.mode != mode:
            raise ParseError("cannot mix integer vertex ids and vertex names", lineno)
        if is_int:
            v = int(tok)
            if not 0 <= v < self.n:
                raise ParseError(f"vertex {v} out of range [0, {self.n})", lineno)
            return v
        if tok not in self.names:
            if len(self.names) == self.n:
                raise ParseError(f"more than {self.n} distinct vertex names", lineno)
            self.names[tok] = len(self.names)
        return self.names[tok]

    def name_tuple(self):
        if self.mode != "name":
            return None
        return tuple(sorted(self.names, key=self.names.get))


def parse_instance(text: str) -> Instance:
    lines = list(_tokens(text))
    if not lines:
        raise ParseError("empty instance")
    lineno, head = lines[0]
    kind = head[0].lower()
    body = lines[1:]
    if kind == "cc":
        if len(head) != 3:
            raise ParseError("header must be 'cc n m'", lineno)
        n, m = _int(head[1], lineno, "n"), _int(head[2], lineno, "m")
        _check_n(n, lineno)
        return _parse_cc(n, m, body, lineno)
    if kind == "wcc":
        if len(head) != 2:
            raise ParseError("header must be 'wcc n'", lineno)
        n = _int(head[1], lineno, "n")
        _check_n(n, lineno)
        return _parse_wcc(n, body, lineno)
    if kind == "ccc":
        if len(head) != 4:
            raise ParseError("header must be 'ccc n L m'", lineno)
        n, L, m = (_int(t, lineno, w) for t, w in zip(head[1:], ("n", "L", "m")))
        _check_n(n, lineno)
        if L < 1:
            raise ParseError("L must be at least 1", lineno)
        return _parse_ccc(n, L, m, body, lineno)
    raise ParseError(f"unknown instance kind {head[0]!r}", lineno)


def _check_n(n: int, lineno: int):
    if n < 1:
        raise ParseError("n must be at least 1", lineno)


def _pair(vmap, toks, lineno, seen):
    u, v = vmap(toks[0], lineno), vmap(toks[1], lineno)
    if u == v:
        raise ParseError(f"self-pair ({u}, {v})", lineno)
    key = (min(u, v), max(u, v))
    if key in seen:
        raise ParseError(f"duplicate pair {key} (first on line {seen[key]})", lineno)
    seen[key] = lineno
    return u, v


def _edge_sign(tok: str, lineno: int) -> int:
    if tok not in ("+", "-"):
        raise ParseError(f"sign must be '+' or '-', got {tok!r}", lineno)
    return 1 if tok == "+" else -1


def _parse_cc(n, m, body, head_line):
    if len(body) != m:
        raise ParseError(f"header announces {m} edges, found {len(body)}", head_line)
    vmap, seen = _VertexMap(n), {}
    s = np.zeros((n, n), dtype=np.int8)
    for lineno, toks in body:
        if len(toks) != 3:
            raise ParseError("edge line must be 'u v sign'", lineno)
        u, v = _pair(vmap, toks, lineno, seen)
        s[u, v] = s[v, u] = _edge_sign(toks[2], lineno)
    return CCInstance(n, s, names=vmap.name_tuple())


def _parse_wcc(n, body, head_line):
    need = n * (n - 1) // 2
    if len(body) != need:
        raise ParseError(f"wcc with n={n} needs exactly {need} pair lines, found {len(body)}", head_line)
    vmap, seen = _VertexMap(n), {}
    s = np.zeros((n, n), dtype=np.int8)
    w = np.empty((n, n), dtype=object)
    w[...] = Fraction(0)
    for lineno, toks in body:
        if len(toks) != 4:
            raise ParseError("pair line must be 'u v sign weight'", lineno)
        u, v = _pair(vmap, toks, lineno, seen)
        s[u, v] = s[v, u] = _edge_sign(toks[2], lineno)
        try:
            wt = Fraction(toks[3])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad weight {toks[3]!r}", lineno) from None
        if wt < 0:
            raise ParseError(f"negative weight {toks[3]}", lineno)
        w[u, v] = w[v, u] = wt
    return WCCInstance(n, s, w, names=vmap.name_tuple())


def _parse_ccc(n, L, m, body, head_line):
    if len(body) != m:
        raise ParseError(f"header announces {m} edges, found {len(body)}", head_line)
    vmap, seen = _VertexMap(n), {}
    c = np.zeros((n, n), dtype=np.int64)
    for lineno, toks in body:
        if len(toks) != 3:
            raise ParseError("edge line must be 'u v color'", lineno)
        u, v = _pair(vmap, toks, lineno, seen)
        if toks[2].lower() == "gamma":
            col = GAMMA
        else:
            col = _int(toks[2], lineno, "color")
            if not 1 <= col <= L:
                raise ParseError(f"color {col} out of range 1..{L}", lineno)
        c[u, v] = c[v, u] = col
    return CCCInstance(n, L, c, names=vmap.name_tuple())


def _fmt_weight(w) -> str:
    if isinstance(w, Fraction):
        return str(w)
    return repr(float(w))


def serialize_instance(inst: Instance) -> str:
    iu = pair_index(inst.n)
    out = []
    if isinstance(inst, CCInstance):
        rows = [(u, v, inst.sign[u, v]) for u, v in zip(*iu) if inst.sign[u, v] != 0]
        out.append(f"cc {inst.n} {len(rows)}")
        out += [f"{u} {v} {'+' if s > 0 else '-'}" for u, v, s in rows]
    elif isinstance(inst, WCCInstance):
        out.append(f"wcc {inst.n}")
        for u, v in zip(*iu):
            out.append(f"{u} {v} {'+' if inst.sign[u, v] > 0 else '-'} {_fmt_weight(inst.weight[u, v])}")
    elif isinstance(inst, CCCInstance):
        rows = [(u, v, inst.color[u, v]) for u, v in zip(*iu) if inst.color[u, v] != NO_EDGE]
        out.append(f"ccc {inst.n} {inst.L} {len(rows)}")
        out += [f"{u} {v} {'gamma' if c == GAMMA else c}" for u, v, c in rows]
    else:
        raise TypeError(f"not an instance: {type(inst).__name__}")
    return "\n".join(out) + "\n"


def load_instance(path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(serialize_instance(inst), encoding="utf-8", newline="\n")


def instance_hash(inst: Instance) -> str:
    return hashlib.sha256(serialize_instance(inst).encode()).hexdigest()


# --------------------------------------------------------------------------
# synthetic instances


def generate_planted(
    n: int,
    k: int,
    noise: float,
    seed: int,
    flavor: str = "cc",
    L: int = 1,
    max_weight: int = 10,
) -> tuple[Instance, Clustering | ChromaticClustering]:
    """Complete instance around a planted k-clustering, each label corrupted w.p. ``noise``.

    wcc weights are integers in ``1..max_weight`` repaired to a pseudometric by
    shortest-path closure. ccc clusters get uniform random colors and noisy pairs
    take a uniformly chosen different label from ``{1..L, gamma}``.
    """
    if n < 1 or not 1 <= k <= n:
        raise InstanceError(f"need 1 <= k <= n, got n={n}, k={k}")
    if not 0.0 <= noise <= 1.0:
        raise InstanceError(f"noise must lie in [0, 1], got {noise}")
    if flavor not in ("cc", "wcc", "ccc"):
        raise InstanceError(f"unknown flavor {flavor!r}")
    if flavor == "ccc" and L < 1:
        raise InstanceError("ccc needs L >= 1")
    rng = np.random.default_rng(seed)
    raw = rng.permutation(n) % k
    planted = Clustering.from_labels(raw.tolist())
    lab = planted.as_array()
    iu = pair_index(n)
    together = (lab[:, None] == lab[None, :])[iu]
    npairs = len(iu[0])

    if flavor in ("cc", "wcc"):
        weights = rng.integers(1, max_weight + 1, size=npairs) if flavor == "wcc" else None
        flips = rng.random(npairs) < noise
        s_pairs = np.where(together, 1, -1) * np.where(flips, -1, 1)
        s = np.zeros((n, n), dtype=np.int8)
        s[iu] = s_pairs
        s = s + s.T
        if flavor == "cc":
            return CCInstance(n, s), planted
        w = np.zeros((n, n), dtype=np.int64)
        w[iu] = weights
        w = shortest_path_closure(w + w.T)
        wf = np.empty((n, n), dtype=object)
        wf.ravel()[:] = [Fraction(int(v)) for v in w.ravel()]
        return WCCInstance(n, s, wf), planted

    cluster_colors = rng.integers(1, L + 1, size=planted.n_clusters)
    flips = rng.random(npairs) < noise
    picks = rng.integers(0, L, size=npairs)
    pair_col = np.where(together, cluster_colors[lab[iu[0]]], GAMMA)
    labels_all = np.array(list(range(1, L + 1)) + [GAMMA])
    for i in np.flatnonzero(flips):
        others = labels_all[labels_all != pair_col[i]]
        pair_col[i] = others[picks[i]]
    c = np.zeros((n, n), dtype=np.int64)
    c[iu] = pair_col
    c = c + c.T
    return CCCInstance(n, L, c), ChromaticClustering(planted, tuple(int(x) for x in cluster_colors))

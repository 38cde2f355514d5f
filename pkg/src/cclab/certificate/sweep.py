"""Grid certification of alpha * LP - ALG >= 0 over triangle configurations.

Configurations live on an integer lattice with denominator ``D`` (a common
multiple of the grid step and every breakpoint), so triangle tightness and
breakpoint membership are decided exactly. By symmetry only sorted
``x <= y <= z`` are visited, with every sign pattern.

Where a coordinate sits on a jump of a rounding function, the one-sided
limits are evaluated too, but only for approach directions that some nearby
valid configuration actually realizes.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import linprog

from ..pivot import resolve_workers
from ..rounding import RoundingScheme, SchemeError, check_pivot_shape, validate_rounding
from .triple import (
    MODES,
    NEG,
    NEU,
    POS,
    ROLE_PAIRS,
    SIGN_ORDER,
    WEIGHT_GENERATORS,
    TripleConfig,
    role_gap_v,
    role_gaps,
    sign_symbol,
    triple_gap,
)

VIOLATION_TOL = 1e-9
TIE_TOL = 1e-12
SIDE_NAMES = {-1: "left", 0: "at", 1: "right"}
NOTE = (
    "numerical certificate on a finite set of configurations (grid, tight triangles, "
    "breakpoint tuples with one-sided limits); not a symbolic proof"
)


@dataclass
class CertificateReport:
    mode: str
    alpha: float
    grid_step: float
    scheme: str
    min_gap: float
    argmin: dict
    configs_checked: int
    violations: list
    n_violations: int
    note: str = NOTE
    heatmap: dict | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.n_violations == 0

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "alpha": self.alpha,
            "grid_step": self.grid_step,
            "scheme": self.scheme,
            "min_gap": self.min_gap,
            "argmin": self.argmin,
            "configs_checked": self.configs_checked,
            "n_violations": self.n_violations,
            "violations": self.violations,
            "note": self.note,
        }

    def heatmap_csv(self) -> str:
        rows = sorted((self.heatmap or {}).items())
        return "x,y,gap\n" + "".join(f"{x:.6g},{y:.6g},{g:.12g}\n" for (x, y), g in rows)

    def violations_csv(self) -> str:
        head = "x,y,z,signs,weights,sides,gap\n"
        body = ""
        for v in self.violations:
            c = v["config"]
            w = "" if c["weights"] is None else " ".join(c["weights"])
            body += f"{c['x']},{c['y']},{c['z']},{c['signs']},{w},{' '.join(c['sides'])},{v['gap']:.12g}\n"
        return head + body


# --------------------------------------------------------------------------
# lattice and configuration sets


def _frac(v) -> Fraction:
    return Fraction(str(v)) if isinstance(v, float) else Fraction(v)


def lattice(scheme: RoundingScheme, step) -> tuple[int, list[int], list[int], list[int]]:
    """(D, grid, breakpoints, jumps) with every value scaled by D."""
    step = _frac(step)
    if step <= 0:
        raise ValueError("grid step must be positive")
    bps = [b for b in scheme.breakpoints() if 0 < b < 1]
    D = math.lcm(step.denominator, 2, *(b.denominator for b in bps))
    k = step * D
    if k.denominator != 1:
        raise ValueError("grid step does not fit the lattice")
    grid = set(range(0, D + 1, int(k))) | {D} | {int(b * D) for b in bps} | {D // 2}
    jumps = [int(b * D) for b in scheme.jump_points()]
    return D, sorted(grid), sorted(int(b * D) for b in bps), jumps


def tight_configs(D: int, grid, bps) -> set:
    """Sorted (x, y, x + y) with x, y from the grid, plus y = b - x so that z hits a breakpoint."""
    out = set()
    grid_set = sorted(set(grid))
    for x in grid_set:
        ys = set(grid_set) | {b - x for b in bps}
        for y in ys:
            if x <= y and x + y <= D:
                out.add((x, y, x + y))
    return out


def endpoint_configs(D: int, bps) -> set:
    pts = sorted({0, D, *bps})
    return {(x, y, z) for x, y, z in itertools.combinations_with_replacement(pts, 3) if z <= x + y}


def full_grid_rows(D: int, grid, i: int) -> np.ndarray:
    """All sorted triangles on the grid whose smallest coordinate is grid[i]."""
    g = np.asarray(grid, dtype=np.int64)
    x = g[i]
    rest = g[i:]
    yy, zz = np.meshgrid(rest, rest, indexing="ij")
    keep = (zz >= yy) & (zz <= x + yy)
    ys, zs = yy[keep], zz[keep]
    return np.stack([np.full(len(ys), x), ys, zs], axis=1)


# --------------------------------------------------------------------------
# one-sided directions


@lru_cache(maxsize=None)
def _direction_feasible(tight: tuple, lo: tuple, hi: tuple, dirs: tuple) -> bool:
    """Is there a perturbation d with sign pattern ``dirs`` (None = free) keeping the triangle valid?"""
    bounds = []
    for i in range(3):
        a, b = -1.0, 1.0
        if lo[i]:
            a = 0.0
        if hi[i]:
            b = 0.0
        if dirs[i] == -1:
            b = min(b, -1e-3)
        elif dirs[i] == 1:
            a = max(a, 1e-3)
        elif dirs[i] == 0:
            a, b = 0.0, 0.0
        if a > b:
            return False
        bounds.append((a, b))
    rows = []
    for i, is_tight in enumerate(tight):
        if is_tight:
            r = [-1.0, -1.0, -1.0]
            r[i] = 1.0
            rows.append(r)
    if not rows:
        return True
    res = linprog(np.zeros(3), A_ub=np.array(rows), b_ub=np.zeros(len(rows)), bounds=bounds, method="highs")
    return res.status == 0


def direction_variants(cfg, D: int, jumps) -> list[tuple[int, int, int]]:
    """Side codes (-1 left, 0 at, +1 right) to evaluate for one lattice configuration."""
    jset = set(jumps)
    on_jump = [v in jset for v in cfg]
    if not any(on_jump):
        return [(0, 0, 0)]
    x, y, z = cfg
    tight = (x == y + z, y == x + z, z == x + y)
    lo = tuple(v == 0 for v in cfg)
    hi = tuple(v == D for v in cfg)
    options = [(-1, 0, 1) if j else (None,) for j in on_jump]
    out = []
    for dirs in itertools.product(*options):
        if _direction_feasible(tight, lo, hi, dirs):
            out.append(tuple(0 if d is None else d for d in dirs))
    return out


def expand_sides(cfgs: np.ndarray, D: int, jumps):
    """Rows (x, y, z, sx, sy, sz) covering every feasible approach direction."""
    if len(cfgs) == 0:
        return np.zeros((0, 6), dtype=np.int64)
    if not jumps:
        return np.concatenate([cfgs, np.zeros_like(cfgs)], axis=1)
    hit = np.isin(cfgs, jumps).any(axis=1)
    plain = cfgs[~hit]
    rows = [np.concatenate([plain, np.zeros_like(plain)], axis=1)]
    extra = []
    for cfg in cfgs[hit]:
        c = tuple(int(v) for v in cfg)
        for sides in direction_variants(c, D, jumps):
            extra.append(c + sides)
    if extra:
        rows.append(np.asarray(extra, dtype=np.int64))
    return np.concatenate(rows, axis=0)


# --------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class _Job:
    mode: str
    scheme: RoundingScheme
    alpha: float
    alpha_exact: Fraction
    D: int
    jumps: tuple
    sign_triples: tuple
    weights: tuple  # weight generators, or ((1, 1, 1),) for ccc
    max_violations: int
    heatmap: bool


def _evaluate(job: _Job, rows: np.ndarray):
    """Scan one block of configurations; return partial results for merging."""
    n = len(rows)
    empty = {"n": 0, "min": math.inf, "front": [], "viol": [], "n_viol": 0, "heat": {}}
    if n == 0:
        return empty
    vals = rows[:, :3].astype(float) / job.D
    sides = rows[:, 3:]
    needed = sorted({s for t in job.sign_triples for s in t})
    P = {s: [job.scheme.for_sign(s).eval_array(vals[:, i], sides[:, i]) for i in range(3)] for s in needed}

    gaps, lps, keys_sign, keys_w, idx = [], [], [], [], []
    for t_i, signs in enumerate(job.sign_triples):
        p = [P[signs[i]][i] for i in range(3)]
        g, lp = [], []
        for i, (a, b) in enumerate(ROLE_PAIRS):
            o1, o2 = [vals[:, j] for j in range(3) if j != i]
            g.append(role_gap_v(signs[i], job.alpha, vals[:, i], o1, o2, p[a], p[b], job.mode))
            lp.append((g[-1] + _cost(signs[i], p[a], p[b])) / job.alpha)
        for w_i, w in enumerate(job.weights):
            gaps.append(sum(wi * gi for wi, gi in zip(w, g) if wi))
            lps.append(sum(wi * li for wi, li in zip(w, lp) if wi))
            keys_sign.append(np.full(n, t_i))
            keys_w.append(np.full(n, w_i))
            idx.append(np.arange(n))
    gap = np.concatenate(gaps)
    lp = np.concatenate(lps)
    t_idx = np.concatenate(keys_sign)
    w_idx = np.concatenate(keys_w)
    r_idx = np.concatenate(idx)

    m = float(gap.min())
    band = np.flatnonzero(gap <= m + TIE_TOL)
    front = _frontier(job, rows, gap, lp, t_idx, w_idx, r_idx, band)

    bad = np.flatnonzero(gap < -VIOLATION_TOL)
    viol = []
    if len(bad):
        order = bad[np.lexsort(_key_columns(job, rows, lp, t_idx, w_idx, r_idx, bad)[::-1] + [gap[bad]])]
        for k in order[: job.max_violations]:
            viol.append(_record(job, rows, gap, lp, t_idx, w_idx, r_idx, k))

    heat = {}
    if job.heatmap:
        code = rows[r_idx, 0] * (job.D + 1) + rows[r_idx, 1]
        order = np.argsort(code, kind="stable")
        uc, start = np.unique(code[order], return_index=True)
        mins = np.minimum.reduceat(gap[order], start)
        heat = {(int(c) // (job.D + 1), int(c) % (job.D + 1)): float(v) for c, v in zip(uc, mins)}
    return {"n": len(gap), "min": m, "front": front, "viol": viol, "n_viol": len(bad), "heat": heat}


def _cost(sign, pa, pb):
    if sign == POS:
        return pa + pb - 2 * pa * pb
    if sign == NEG:
        return (1 - pa) * (1 - pb)
    return 1 - pa * pb


def _key_columns(job, rows, lp, t_idx, w_idx, r_idx, sel):
    """Primary-first sort columns: degenerate flag, x, y, z, signs, weight, sides."""
    r = rows[r_idx[sel]]
    order = np.array([[SIGN_ORDER[s] for s in t] for t in job.sign_triples])[t_idx[sel]]
    return [
        (lp[sel] <= TIE_TOL).astype(np.int64),
        r[:, 0],
        r[:, 1],
        r[:, 2],
        order[:, 0],
        order[:, 1],
        order[:, 2],
        w_idx[sel],
        r[:, 3],
        r[:, 4],
        r[:, 5],
    ]


def _frontier(job, rows, gap, lp, t_idx, w_idx, r_idx, band):
    """Records of the band not beaten by an earlier-keyed record with a gap at least as small."""
    cols = _key_columns(job, rows, lp, t_idx, w_idx, r_idx, band)
    order = band[np.lexsort(cols[::-1])]
    out, best = [], math.inf
    for k in order:
        if gap[k] < best:
            out.append(_record(job, rows, gap, lp, t_idx, w_idx, r_idx, k))
            best = gap[k]
    return out


def _record(job, rows, gap, lp, t_idx, w_idx, r_idx, k):
    r = rows[r_idx[k]]
    signs = job.sign_triples[t_idx[k]]
    return {
        "lattice": tuple(int(v) for v in r),
        "signs": signs,
        "w": int(w_idx[k]),
        "gap": float(gap[k]),
        "lp": float(lp[k]),
        "key": (
            int(lp[k] <= TIE_TOL),
            int(r[0]),
            int(r[1]),
            int(r[2]),
            tuple(SIGN_ORDER[s] for s in signs),
            int(w_idx[k]),
            tuple(int(v) for v in r[3:]),
        ),
    }


def _run_block(args):
    job, block = args
    return _evaluate(job, block)


def _merge(job: _Job, parts, configs_checked):
    m = min((p["min"] for p in parts), default=math.inf)
    cands = [c for p in parts for c in p["front"] if c["gap"] <= m + TIE_TOL]
    best = min(cands, key=lambda c: c["key"])
    viol = sorted((v for p in parts for v in p["viol"]), key=lambda v: (v["gap"], v["key"]))
    heat = {}
    if job.heatmap:
        for p in parts:
            for k, v in p["heat"].items():
                heat[k] = min(v, heat.get(k, math.inf))
    return m, best, viol[: job.max_violations], sum(p["n_viol"] for p in parts), heat


def _describe(job: _Job, rec) -> dict:
    x, y, z, sx, sy, sz = rec["lattice"]
    D = job.D
    vals = (Fraction(x, D), Fraction(y, D), Fraction(z, D))
    sides = tuple(SIDE_NAMES[s] for s in (sx, sy, sz))
    weights = job.weights[rec["w"]] if job.mode == "wcc" else None
    cfg = TripleConfig(*vals, rec["signs"], weights=weights, sides=sides)
    alpha = job.alpha_exact
    exact = triple_gap(cfg, job.scheme, alpha, job.mode)
    return {
        "config": cfg.to_dict(),
        "gap": rec["gap"],
        "exact_gap": str(exact),
        "role_gaps": [str(g) for g in role_gaps(cfg, job.scheme, alpha, job.mode)],
        "lp": rec["lp"],
    }


def _blocks(rows: np.ndarray, size: int = 20000):
    return [rows[i : i + size] for i in range(0, len(rows), size)]


def _run(job: _Job, blocks, workers):
    workers = resolve_workers(workers)
    if workers == 1 or len(blocks) <= 1:
        return [_evaluate(job, b) for b in blocks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_block, [(job, b) for b in blocks], chunksize=max(1, len(blocks) // (4 * workers))))


def _report(job, parts, grid_step) -> CertificateReport:
    checked = sum(p["n"] for p in parts)
    m, best, viol, n_viol, heat = _merge(job, parts, checked)
    heat_f = {(x / job.D, y / job.D): g for (x, y), g in heat.items()} if job.heatmap else None
    return CertificateReport(
        mode=job.mode,
        alpha=float(job.alpha),
        grid_step=float(grid_step),
        scheme=job.scheme.name,
        min_gap=m,
        argmin=_describe(job, best),
        configs_checked=checked,
        violations=[_describe(job, v) for v in viol],
        n_violations=n_viol,
        heatmap=heat_f,
    )


def _check_scheme(scheme: RoundingScheme, need_shape: bool):
    problems = [f"{v.function}: {v.condition} at {v.witness}" for v in validate_rounding(scheme)]
    if need_shape:
        problems += check_pivot_shape(scheme)
    if problems:
        raise SchemeError("scheme cannot be certified: " + "; ".join(problems))


def certify_wcc(
    scheme: RoundingScheme,
    alpha,
    grid_step=0.01,
    workers: int | None = None,
    max_violations: int = 20,
    heatmap: bool = False,
) -> CertificateReport:
    """Tight triangles on the refined grid and breakpoint tuples, under the three weight generators."""
    _check_scheme(scheme, need_shape=True)
    D, grid, bps, jumps = lattice(scheme, grid_step)
    cfgs = tight_configs(D, grid, bps) | endpoint_configs(D, bps)
    rows = np.asarray(sorted(cfgs), dtype=np.int64)
    rows = expand_sides(rows, D, jumps)
    signs = tuple(itertools.product((POS, NEG), repeat=3))
    job = _Job("wcc", scheme, float(alpha), _frac(alpha), D, tuple(jumps), signs, WEIGHT_GENERATORS, max_violations, heatmap)
    parts = _run(job, _blocks(rows), workers)
    return _report(job, parts, grid_step)


def _ccc_block(args):
    job, grid, rows_i, extra = args
    D = job.D
    parts = [full_grid_rows(D, grid, i) for i in rows_i]
    if extra is not None and len(extra):
        parts.append(extra)
    block = np.concatenate(parts, axis=0) if parts else np.zeros((0, 3), dtype=np.int64)
    return _evaluate(job, expand_sides(block, D, list(job.jumps)))


def certify_ccc(
    scheme: RoundingScheme,
    alpha,
    grid_step=0.005,
    workers: int | None = None,
    max_violations: int = 20,
    heatmap: bool = False,
    sign_triples=None,
) -> CertificateReport:
    """Every sorted grid triangle (grid refined by breakpoints and 1/2) and tight combinations, all 27 sign triples."""
    _check_scheme(scheme, need_shape=False)
    D, grid, bps, jumps = lattice(scheme, grid_step)
    grid_set = set(grid)
    extra = sorted(c for c in tight_configs(D, grid, bps) if c[2] not in grid_set)
    extra = np.asarray(extra, dtype=np.int64).reshape(-1, 3)
    signs = tuple(sign_triples) if sign_triples is not None else tuple(itertools.product((POS, NEG, NEU), repeat=3))
    job = _Job("ccc", scheme, float(alpha), _frac(alpha), D, tuple(jumps), signs, ((1, 1, 1),), max_violations, heatmap)
    # one block per group of smallest coordinates; the off-grid tight rows ride with the first block
    groups = np.array_split(np.arange(len(grid)), max(1, len(grid) // 4))
    tasks = [(job, grid, g, extra if k == 0 else None) for k, g in enumerate(groups)]
    workers = resolve_workers(workers)
    if workers == 1:
        parts = [_ccc_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_ccc_block, tasks))
    return _report(job, parts, grid_step)


def certify(mode: str, scheme: RoundingScheme, alpha, grid_step=None, **kw) -> CertificateReport:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "wcc":
        return certify_wcc(scheme, alpha, 0.01 if grid_step is None else grid_step, **kw)
    return certify_ccc(scheme, alpha, 0.005 if grid_step is None else grid_step, **kw)


__all__ = [
    "CertificateReport",
    "certify",
    "certify_ccc",
    "certify_wcc",
    "direction_variants",
    "endpoint_configs",
    "lattice",
    "tight_configs",
    "sign_symbol",
]

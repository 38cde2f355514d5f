"""Exhaustive optimal clustering for small instances.

Partitions are enumerated as restricted growth strings in lexicographic order
with the cost maintained incrementally; only a strictly smaller cost replaces
the incumbent, so ties resolve to the lexicographically first string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .instance import (
    GAMMA,
    CCCInstance,
    CCInstance,
    ChromaticClustering,
    Clustering,
    Instance,
    WCCInstance,
    cc_cost,
    ccc_cost,
)

MAX_N_CC = 12
MAX_N_CCC = 10


class ExactTooLarge(ValueError):
    pass


@lru_cache(maxsize=None)
def bell(n: int) -> int:
    """Bell numbers by the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def restricted_growth_strings(n: int):
    """All set partitions of ``range(n)`` as label tuples, in lexicographic order."""
    if n == 0:
        yield ()
        return
    a = [0] * n

    def rec(i, m):
        if i == n:
            yield tuple(a)
            return
        for j in range(m + 2):
            a[i] = j
            yield from rec(i + 1, max(m, j))

    a[0] = 0
    yield from rec(1, 0)


@dataclass(frozen=True)
class ExactResult:
    best: Clustering | ChromaticClustering
    cost: int | float | Fraction
    partitions_examined: int

    def to_dict(self) -> dict:
        if isinstance(self.best, ChromaticClustering):
            labels, coloring = self.best.clustering.labels, list(self.best.colors)
        else:
            labels, coloring = self.best.labels, None
        cost = self.cost
        return {
            "clustering": list(labels),
            "coloring": coloring,
            "cost": str(cost) if isinstance(cost, Fraction) else cost,
            "partitions_examined": self.partitions_examined,
        }


def _integer_weights(inst: CCInstance | WCCInstance):
    """Pair weights as integers plus the common scale, or floats with scale None."""
    if isinstance(inst, CCInstance):
        return (inst.sign != 0).astype(np.int64), 1
    if inst.is_exact:
        den = 1
        for v in inst.weight.ravel():
            den = math.lcm(den, v.denominator)
        w = np.array([[int(v * den) for v in row] for row in inst.weight], dtype=object)
        return w, den
    return inst.weight.astype(float), None


def exact_cc(inst: CCInstance | WCCInstance) -> ExactResult:
    n = inst.n
    if n > MAX_N_CC:
        raise ExactTooLarge(f"exact search is limited to n <= {MAX_N_CC} (Bell({n}) = {bell(n)})")
    w, scale = _integer_weights(inst)
    s = inst.sign
    pos = [[w[u][v] if s[u, v] > 0 else 0 for v in range(n)] for u in range(n)]
    neg = [[w[u][v] if s[u, v] < 0 else 0 for v in range(n)] for u in range(n)]
    zero = 0 if scale is not None else 0.0

    labels = [0] * n
    # per cluster: sum of positive / negative weight from vertex v to members
    best = [None, None]
    examined = 0

    def rec(v, m, cost, members):
        nonlocal examined
        if v == n:
            examined += 1
            if best[0] is None or cost < best[0]:
                best[0], best[1] = cost, tuple(labels)
            return
        pos_prev = sum((pos[v][u] for u in range(v)), zero)
        for j in range(m + 1):
            group = members[j] if j < len(members) else ()
            inside_pos = sum((pos[v][u] for u in group), zero)
            inside_neg = sum((neg[v][u] for u in group), zero)
            labels[v] = j
            delta = pos_prev - inside_pos + inside_neg
            if j < len(members):
                members[j].append(v)
                rec(v + 1, m, cost + delta, members)
                members[j].pop()
            else:
                members.append([v])
                rec(v + 1, m + 1, cost + delta, members)
                members.pop()

    rec(0, 0, zero, [])
    clustering = Clustering(best[1])
    cost = cc_cost(inst, clustering)
    return ExactResult(clustering, cost, examined)


def best_color(counts, L: int) -> int:
    """Color 1..L with the most internal edges; ties go to the smallest color."""
    return max(range(1, L + 1), key=lambda c: (counts[c], -c))


def exact_ccc(inst: CCCInstance) -> ExactResult:
    """Minimum over partitions of (#chromatic edges) - sum_C max_c count_c(C) + sum_C gamma(C)."""
    n, L = inst.n, inst.L
    if n > MAX_N_CCC:
        raise ExactTooLarge(f"exact search is limited to n <= {MAX_N_CCC} (Bell({n}) = {bell(n)})")
    col = inst.color.tolist()
    chromatic = sum(1 for u in range(n) for v in range(u + 1, n) if col[u][v] > 0)

    labels = [0] * n
    counts: list[list[int]] = []  # counts[j][c] internal edges of color c (index 0 holds gamma)
    score: list[int] = []  # gamma_j - max_c counts[j][c]
    best = [None, None]
    examined = 0

    def cluster_score(cnt):
        return cnt[0] - max(cnt[1:])

    def rec(v, total, members):
        nonlocal examined
        if v == n:
            examined += 1
            cost = chromatic + total
            if best[0] is None or cost < best[0]:
                best[0], best[1] = cost, tuple(labels)
            return
        for j in range(len(members) + 1):
            labels[v] = j
            if j < len(members):
                cnt = counts[j]
                old = score[j]
                touched = []
                for u in members[j]:
                    k = col[v][u]
                    if k != 0:
                        idx = 0 if k == GAMMA else k
                        cnt[idx] += 1
                        touched.append(idx)
                new = cluster_score(cnt)
                score[j] = new
                members[j].append(v)
                rec(v + 1, total + new - old, members)
                members[j].pop()
                score[j] = old
                for idx in touched:
                    cnt[idx] -= 1
            else:
                counts.append([0] * (L + 1))
                score.append(0)
                members.append([v])
                rec(v + 1, total, members)
                members.pop()
                score.pop()
                counts.pop()

    rec(0, 0, [])
    clustering = Clustering(best[1])
    colors = []
    for group in clustering.clusters():
        cnt = [0] * (L + 1)
        for i, u in enumerate(group):
            for v in group[i + 1 :]:
                k = col[u][v]
                if k > 0:
                    cnt[k] += 1
        colors.append(best_color(cnt, L))
    cc = ChromaticClustering(clustering, tuple(colors))
    cost = ccc_cost(inst, cc)
    assert cost == best[0]
    return ExactResult(cc, cost, examined)


def exact(inst: Instance) -> ExactResult:
    return exact_ccc(inst) if isinstance(inst, CCCInstance) else exact_cc(inst)

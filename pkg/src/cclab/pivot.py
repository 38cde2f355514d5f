"""Randomized pivot clustering driven by rounded LP distances, plus Monte-Carlo estimation."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .instance import (
    GAMMA,
    CCCInstance,
    ChromaticClustering,
    Clustering,
    Instance,
    cc_cost,
    ccc_cost,
)
from .lp import TOL, CCCLpSolution, LpSolution
from .rounding import RoundingScheme

ALGORITHMS = ("lp_pivot", "lp_ccc")


class PivotError(ValueError):
    pass


def probability_matrix(sign: np.ndarray, x: np.ndarray, scheme: RoundingScheme) -> np.ndarray:
    """p[u, v] = f^{sign(uv)}(x[u, v]); the diagonal is 0."""
    sign = np.asarray(sign)
    x = np.asarray(x, dtype=float)
    if x.shape != sign.shape:
        raise PivotError(f"LP values have shape {x.shape}, signs have {sign.shape}")
    if np.isnan(x).any():
        raise PivotError("LP values missing for some pairs")
    xc = np.clip(x, 0.0, 1.0)
    p = np.zeros_like(xc)
    for s in (-1, 0, 1):
        mask = sign == s
        if mask.any():
            p[mask] = scheme.for_sign(s).eval_array(xc[mask])
    np.fill_diagonal(p, 0.0)
    return p


def pivot_on(vertices, p: np.ndarray, rng: np.random.Generator):
    """Core loop: returns (clusters, pivots) over the given vertex list.

    Each round takes one draw for the pivot, then one draw per remaining
    vertex in index order; a vertex joins when its draw is below 1 - p.
    """
    remaining = sorted(int(v) for v in vertices)
    clusters, pivots = [], []
    while remaining:
        k = min(int(rng.random() * len(remaining)), len(remaining) - 1)
        piv = remaining[k]
        pivots.append(piv)
        cluster, rest = [piv], []
        for u in remaining:
            if u == piv:
                continue
            if rng.random() < 1.0 - p[piv, u]:
                cluster.append(u)
            else:
                rest.append(u)
        clusters.append(sorted(cluster))
        remaining = rest
    return clusters, pivots


def lp_pivot(vertices, sign, x, scheme: RoundingScheme, rng: np.random.Generator):
    """One run of the pivot algorithm on ``vertices``; returns (clusters, pivots)."""
    return pivot_on(vertices, probability_matrix(sign, x, scheme), rng)


def color_signs(inst: CCCInstance, c: int) -> np.ndarray:
    """Color ``c`` edges positive, gamma edges negative, everything else neutral."""
    s = np.zeros((inst.n, inst.n), dtype=np.int8)
    s[inst.color == c] = 1
    s[inst.color == GAMMA] = -1
    np.fill_diagonal(s, 0)
    return s


def color_classes(sol: CCCLpSolution) -> list[int]:
    """Color (1..L) each vertex is drawn to, or 0 when every x_u^c is at least 1/2.

    The cut is 1/2 - TOL so that a solution feasible to TOL can never put a
    vertex below the cut for two colors.
    """
    below = sol.xv < 0.5 - TOL
    counts = below.sum(axis=1)
    if np.any(counts > 1):
        u = int(np.flatnonzero(counts > 1)[0])
        raise PivotError(f"vertex {u} is below 1/2 for several colors; the solution is infeasible")
    return [int(np.argmax(row)) + 1 if row.any() else 0 for row in below]


class CCCProbabilities:
    """Per-color probability matrices, computed once and reused across runs."""

    def __init__(self, inst: CCCInstance, sol: CCCLpSolution, scheme: RoundingScheme):
        self.classes = color_classes(sol)
        self.members = {c: [u for u, k in enumerate(self.classes) if k == c] for c in range(1, inst.L + 1)}
        self.p = {
            c: probability_matrix(color_signs(inst, c), sol.xe[c - 1], scheme)
            for c in range(1, inst.L + 1)
            if self.members[c]
        }
        self.n = inst.n


def lp_ccc(inst: CCCInstance, sol: CCCLpSolution, scheme: RoundingScheme, rng, probs: CCCProbabilities | None = None):
    """One run of the chromatic algorithm; returns (ChromaticClustering, pivots as (color, vertex))."""
    probs = probs or CCCProbabilities(inst, sol, scheme)
    labels = [None] * inst.n
    colors = {}
    trace = []
    for c in sorted(probs.p):
        clusters, pivots = pivot_on(probs.members[c], probs.p[c], rng)
        trace += [(c, v) for v in pivots]
        for members in clusters:
            key = ("c", c, members[0])
            colors[key] = c
            for v in members:
                labels[v] = key
    for u, k in enumerate(probs.classes):
        if k == 0:
            key = ("s", u)
            labels[u] = key
            colors[key] = 1
    return ChromaticClustering.from_labeled(labels, colors), trace


# --------------------------------------------------------------------------
# single runs and Monte-Carlo


@dataclass(frozen=True)
class PivotRun:
    clustering: Clustering | ChromaticClustering
    cost: float
    seed: int
    pivots: tuple

    def to_dict(self) -> dict:
        if isinstance(self.clustering, ChromaticClustering):
            labels, coloring = self.clustering.clustering.labels, list(self.clustering.colors)
        else:
            labels, coloring = self.clustering.labels, None
        return {
            "clustering": list(labels),
            "coloring": coloring,
            "cost": _num(self.cost),
            "seed": self.seed,
            "pivots": [list(p) if isinstance(p, tuple) else p for p in self.pivots],
        }


def _num(v):
    return float(v) if isinstance(v, Fraction) else v


@dataclass(frozen=True)
class MonteCarloStats:
    trials: int
    mean: float
    stddev: float
    ci95: tuple[float, float]
    best: PivotRun
    seed: int

    @property
    def stderr(self) -> float:
        return self.stddev / math.sqrt(self.trials)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "mean": self.mean,
            "stddev": self.stddev,
            "stderr": self.stderr,
            "ci95": list(self.ci95),
            "seed": self.seed,
            "best": self.best.to_dict(),
        }


def default_algorithm(inst: Instance) -> str:
    return "lp_ccc" if isinstance(inst, CCCInstance) else "lp_pivot"


def trial_generators(seed: int, trials: int, lo: int = 0, hi: int | None = None) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(trials)[lo:hi]
    return [np.random.Generator(np.random.Philox(s)) for s in children]


class _Runner:
    """Holds the precomputed probabilities so every trial only samples."""

    def __init__(self, inst, sol, scheme, algorithm):
        self.inst = inst
        self.algorithm = algorithm
        if algorithm == "lp_ccc":
            if not isinstance(inst, CCCInstance) or not isinstance(sol, CCCLpSolution):
                raise PivotError("lp_ccc needs a ccc instance and its LP solution")
            self.probs = CCCProbabilities(inst, sol, scheme)
        elif algorithm == "lp_pivot":
            if isinstance(inst, CCCInstance) or not isinstance(sol, LpSolution):
                raise PivotError("lp_pivot needs a cc or wcc instance and its LP solution")
            self.p = probability_matrix(inst.sign, sol.x, scheme)
        else:
            raise PivotError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")

    def run(self, rng, seed=None) -> PivotRun:
        if self.algorithm == "lp_ccc":
            cc, trace = lp_ccc(self.inst, None, None, rng, self.probs)
            return PivotRun(cc, ccc_cost(self.inst, cc), seed, tuple(trace))
        clusters, pivots = pivot_on(range(self.inst.n), self.p, rng)
        c = Clustering.from_clusters(clusters, self.inst.n)
        return PivotRun(c, cc_cost(self.inst, c), seed, tuple(pivots))

    def run_range(self, seed: int, trials: int, lo: int, hi: int):
        gens = trial_generators(seed, trials, lo, hi)
        costs, best = [], None
        for i, g in enumerate(gens, start=lo):
            r = self.run(g, seed)
            costs.append(r.cost)
            if best is None or r.cost < best[1].cost:
                best = (i, r)
        return costs, best


def run_once(inst, sol, scheme, seed: int, algorithm: str | None = None) -> PivotRun:
    runner = _Runner(inst, sol, scheme, algorithm or default_algorithm(inst))
    return runner.run(trial_generators(seed, 1)[0], seed)


def _run_chunk(args):
    inst, sol, scheme, algorithm, seed, trials, lo, hi = args
    return _Runner(inst, sol, scheme, algorithm).run_range(seed, trials, lo, hi)


def resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get("CCLAB_WORKERS", "1") or 1)
    return max(1, int(workers))


def summarize(costs, best: PivotRun, seed: int) -> MonteCarloStats:
    vals = [float(c) for c in costs]
    n = len(vals)
    mean = math.fsum(vals) / n
    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1) if n > 1 else 0.0
    sd = math.sqrt(var)
    half = 1.96 * sd / math.sqrt(n)
    return MonteCarloStats(n, mean, sd, (mean - half, mean + half), best, seed)


def monte_carlo(
    inst: Instance,
    sol,
    scheme: RoundingScheme,
    trials: int,
    seed: int,
    algorithm: str | None = None,
    workers: int | None = None,
) -> MonteCarloStats:
    """Independent runs, trial ``i`` seeded by the ``i``-th child of ``seed``.

    Costs are gathered in trial order, so the result does not depend on ``workers``.
    """
    if trials < 1:
        raise PivotError("trials must be at least 1")
    algorithm = algorithm or default_algorithm(inst)
    workers = min(resolve_workers(workers), trials)
    if workers == 1:
        costs, (_, best) = _Runner(inst, sol, scheme, algorithm).run_range(seed, trials, 0, trials)
        return summarize(costs, best, seed)
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    jobs = [(inst, sol, scheme, algorithm, seed, trials, int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, jobs))
    costs, best = [], None
    for part_costs, part_best in parts:
        costs += part_costs
        if best is None or part_best[1].cost < best[1].cost:
            best = part_best
    return summarize(costs, best[1], seed)

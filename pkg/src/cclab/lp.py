"""LP relaxations over pair distances with triangle inequalities, solved with HiGHS."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .instance import GAMMA, CCCInstance, CCInstance, Instance, WCCInstance, pair_index

TOL = 1e-7


class LpError(RuntimeError):
    """The LP solver did not return an optimal solution."""


@dataclass(frozen=True)
class LpSolution:
    x: np.ndarray  # symmetric n x n, zero diagonal
    objective: float
    status: str
    max_residual: float

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def to_dict(self) -> dict:
        iu = pair_index(self.n)
        return {
            "kind": "cc",
            "n": self.n,
            "objective": self.objective,
            "status": self.status,
            "max_residual": self.max_residual,
            "x": [[int(u), int(v), float(self.x[u, v])] for u, v in zip(*iu)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LpSolution":
        n = d["n"]
        x = np.zeros((n, n))
        for u, v, val in d["x"]:
            x[u, v] = x[v, u] = val
        return cls(x, d["objective"], d["status"], d["max_residual"])


@dataclass(frozen=True)
class CCCLpSolution:
    xv: np.ndarray  # n x L, column c-1 is color c
    xe: np.ndarray  # L x n x n, each slice symmetric
    objective: float
    status: str
    max_residual: float

    @property
    def n(self) -> int:
        return self.xv.shape[0]

    @property
    def L(self) -> int:
        return self.xv.shape[1]

    def to_dict(self) -> dict:
        iu = pair_index(self.n)
        return {
            "kind": "ccc",
            "n": self.n,
            "L": self.L,
            "objective": self.objective,
            "status": self.status,
            "max_residual": self.max_residual,
            "xv": self.xv.tolist(),
            "xe": [[[int(u), int(v), float(self.xe[c, u, v])] for u, v in zip(*iu)] for c in range(self.L)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CCCLpSolution":
        n, L = d["n"], d["L"]
        xe = np.zeros((L, n, n))
        for c, rows in enumerate(d["xe"]):
            for u, v, val in rows:
                xe[c, u, v] = xe[c, v, u] = val
        return cls(np.asarray(d["xv"], dtype=float).reshape(n, L), xe, d["objective"], d["status"], d["max_residual"])


def solution_from_dict(d: dict):
    return CCCLpSolution.from_dict(d) if d.get("kind") == "ccc" else LpSolution.from_dict(d)


# --------------------------------------------------------------------------
# constraint construction


@lru_cache(maxsize=64)
def _triangle_rows(n: int):
    """(rows, cols, vals) of x_ab - x_ac - x_bc <= 0 over pair-variable indices."""
    idx = np.full((n, n), -1, dtype=np.int64)
    iu = pair_index(n)
    idx[iu] = np.arange(len(iu[0]))
    idx[iu[1], iu[0]] = idx[iu]
    trip = np.array(list(itertools.combinations(range(n), 3)), dtype=np.int64).reshape(-1, 3)
    if len(trip) == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0), 0
    a, b, c = trip.T
    ab, ac, bc = idx[a, b], idx[a, c], idx[b, c]
    # each triple gives three rows: the long side is ab, ac and bc in turn
    longs = np.stack([ab, ac, bc], axis=1).ravel()
    s1 = np.stack([ac, ab, ab], axis=1).ravel()
    s2 = np.stack([bc, bc, ac], axis=1).ravel()
    m = len(longs)
    r = np.arange(m)
    rows = np.concatenate([r, r, r])
    cols = np.concatenate([longs, s1, s2])
    vals = np.concatenate([np.ones(m), -np.ones(m), -np.ones(m)])
    return rows, cols, vals, m


def _triangle_matrix(n: int, n_cols: int, offset: int = 0):
    rows, cols, vals, m = _triangle_rows(n)
    return sp.csr_matrix((vals, (rows, cols + offset)), shape=(m, n_cols))


def _solve(c, A_ub, b_ub, A_eq=None, b_eq=None):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, 1), method="highs")
    if res.status != 0:
        raise LpError(f"LP solver failed with status {res.status}: {res.message}")
    return np.clip(res.x, 0.0, 1.0) + 0.0  # drop negative zeros


def _pairs_to_matrix(n: int, vals: np.ndarray) -> np.ndarray:
    x = np.zeros((n, n))
    iu = pair_index(n)
    x[iu] = vals
    return x + x.T


# --------------------------------------------------------------------------
# CC and weighted CC


def _solve_pairwise(n: int, sign_pairs: np.ndarray, w_pairs: np.ndarray, inst) -> LpSolution:
    """min sum_{+} w x + sum_{-} w (1 - x) over the metric polytope."""
    coef = np.where(sign_pairs > 0, w_pairs, np.where(sign_pairs < 0, -w_pairs, 0.0))
    const = float(np.sum(w_pairs[sign_pairs < 0]))
    npairs = len(sign_pairs)
    if npairs == 0:
        x = np.zeros((n, n))
    else:
        A = _triangle_matrix(n, npairs)
        vals = _solve(coef, A if A.shape[0] else None, np.zeros(A.shape[0]) if A.shape[0] else None)
        x = _pairs_to_matrix(n, vals)
    objective = float(coef @ x[pair_index(n)]) + const if npairs else 0.0
    sol = LpSolution(x, objective, "optimal", 0.0)
    resid = max_residual(sol, inst)
    sol = LpSolution(x, objective, "optimal", resid)
    if resid > TOL:
        raise LpError(f"solution violates constraints by {resid:.3g} after clamping")
    return sol


def solve_cc_lp(inst: CCInstance) -> LpSolution:
    iu = pair_index(inst.n)
    s = inst.sign[iu].astype(np.int64)
    return _solve_pairwise(inst.n, s, (s != 0).astype(float), inst)


def solve_wcc_lp(inst: WCCInstance) -> LpSolution:
    iu = pair_index(inst.n)
    return _solve_pairwise(inst.n, inst.sign[iu].astype(np.int64), inst.weight_matrix()[iu], inst)


# --------------------------------------------------------------------------
# chromatic CC


def solve_ccc_lp(inst: CCCInstance) -> CCCLpSolution:
    """Variables: x_u^c (n*L), then x_uv^c for each color (L blocks of pairs)."""
    n, L = inst.n, inst.L
    iu = pair_index(n)
    npairs = len(iu[0])
    nv = n * L
    nvar = nv + L * npairs
    col = inst.color[iu]

    def vvar(u, c):  # c is 0-based
        return u * L + c

    def evar(p, c):
        return nv + c * npairs + p

    c_obj = np.zeros(nvar)
    const = 0.0
    for p in range(npairs):
        if col[p] > 0:
            c_obj[evar(p, col[p] - 1)] += 1.0
        elif col[p] == GAMMA:
            for c in range(L):
                c_obj[evar(p, c)] -= 1.0
            const += L

    blocks = []
    if npairs:
        # x_u^c - x_uv^c <= 0 and x_v^c - x_uv^c <= 0
        r = np.arange(2 * L * npairs)
        pp = np.tile(np.arange(npairs), L)
        cc = np.repeat(np.arange(L), npairs)
        ends = np.concatenate([iu[0][pp], iu[1][pp]])
        cc2 = np.concatenate([cc, cc])
        pp2 = np.concatenate([pp, pp])
        rows = np.concatenate([r, r])
        cols = np.concatenate([vvar(ends, cc2), evar(pp2, cc2)])
        vals = np.concatenate([np.ones(len(r)), -np.ones(len(r))])
        blocks.append(sp.csr_matrix((vals, (rows, cols)), shape=(len(r), nvar)))
        for c in range(L):
            T = _triangle_matrix(n, nvar, offset=nv + c * npairs)
            if T.shape[0]:
                blocks.append(T)
    A_ub = sp.vstack(blocks).tocsr() if blocks else None
    b_ub = np.zeros(A_ub.shape[0]) if blocks else None
    A_eq = sp.csr_matrix(
        (np.ones(nv), (np.repeat(np.arange(n), L), np.arange(nv))),
        shape=(n, nvar),
    )
    b_eq = np.full(n, L - 1.0)
    vals = _solve(c_obj, A_ub, b_ub, A_eq, b_eq)
    xv = vals[:nv].reshape(n, L)
    xe = np.zeros((L, n, n))
    for c in range(L):
        xe[c] = _pairs_to_matrix(n, vals[nv + c * npairs : nv + (c + 1) * npairs])
    objective = float(c_obj @ vals) + const
    sol = CCCLpSolution(xv, xe, objective, "optimal", 0.0)
    resid = max_residual(sol, inst)
    sol = CCCLpSolution(xv, xe, objective, "optimal", resid)
    if resid > TOL:
        raise LpError(f"solution violates constraints by {resid:.3g} after clamping")
    return sol


def solve_lp(inst: Instance):
    if isinstance(inst, CCCInstance):
        return solve_ccc_lp(inst)
    if isinstance(inst, WCCInstance):
        return solve_wcc_lp(inst)
    return solve_cc_lp(inst)


# --------------------------------------------------------------------------
# feasibility


@dataclass(frozen=True)
class ConstraintViolation:
    family: str  # "bounds", "symmetry", "triangle", "vertex-edge", "color-sum", "shape"
    witness: tuple
    amount: float

    def __str__(self):
        return f"{self.family} violated at {self.witness} by {self.amount:.3g}"


def _metric_violations(x: np.ndarray, tol: float, color=None) -> list[ConstraintViolation]:
    out = []
    tag = () if color is None else (color,)
    n = x.shape[0]
    lo = np.argwhere(x < -tol)
    hi = np.argwhere(x > 1 + tol)
    for u, v in np.concatenate([lo, hi]):
        if u < v:
            out.append(ConstraintViolation("bounds", (int(u), int(v)) + tag, float(max(-x[u, v], x[u, v] - 1))))
    asym = np.argwhere(np.abs(x - x.T) > tol)
    for u, v in asym:
        if u < v:
            out.append(ConstraintViolation("symmetry", (int(u), int(v)) + tag, float(abs(x[u, v] - x[v, u]))))
    # x[u,v] - x[u,k] - x[k,v] > tol
    excess = x[:, None, :] - x[:, :, None] - x[None, :, :]
    idx = np.arange(n)
    excess[idx, idx, :] = -np.inf
    excess[:, idx, idx] = -np.inf
    for u, k, v in np.argwhere(excess > tol):
        if u < v:
            out.append(ConstraintViolation("triangle", (int(u), int(v), int(k)) + tag, float(excess[u, k, v])))
    return out


def check_feasibility(sol, inst: Instance | None = None, tol: float = TOL) -> list[ConstraintViolation]:
    """All constraint violations above ``tol``; an empty list means feasible."""
    if isinstance(sol, CCCLpSolution):
        return _ccc_violations(sol, inst, tol)
    x = np.asarray(sol.x if isinstance(sol, LpSolution) else sol, dtype=float)
    if inst is not None and x.shape != (inst.n, inst.n):
        return [ConstraintViolation("shape", x.shape, float("inf"))]
    return _metric_violations(x, tol)


def _ccc_violations(sol: CCCLpSolution, inst, tol) -> list[ConstraintViolation]:
    out = []
    n, L = sol.n, sol.L
    if inst is not None and (inst.n, inst.L) != (n, L):
        return [ConstraintViolation("shape", (n, L), float("inf"))]
    for u, c in np.argwhere((sol.xv < -tol) | (sol.xv > 1 + tol)):
        v = sol.xv[u, c]
        out.append(ConstraintViolation("bounds", (int(u), int(c) + 1), float(max(-v, v - 1))))
    for c in range(L):
        xe = sol.xe[c]
        out.extend(_metric_violations(xe, tol, color=c + 1))
        need = np.maximum(sol.xv[:, c][:, None], sol.xv[:, c][None, :])
        gap = need - xe
        np.fill_diagonal(gap, -np.inf)
        for u, v in np.argwhere(gap > tol):
            if u < v:
                out.append(ConstraintViolation("vertex-edge", (int(u), int(v), c + 1), float(gap[u, v])))
    sums = sol.xv.sum(axis=1) - (L - 1)
    for u in np.flatnonzero(np.abs(sums) > tol):
        out.append(ConstraintViolation("color-sum", (int(u),), float(abs(sums[u]))))
    return out


def max_residual(sol, inst: Instance | None = None) -> float:
    v = check_feasibility(sol, inst, tol=0.0)
    return max((c.amount for c in v), default=0.0)


def lp_objective(inst: Instance, sol) -> float:
    """Objective of an arbitrary (possibly hand-built) solution."""
    iu = pair_index(inst.n)
    if isinstance(inst, CCCInstance):
        total = 0.0
        col = inst.color[iu]
        for p, (u, v) in enumerate(zip(*iu)):
            if col[p] > 0:
                total += sol.xe[col[p] - 1, u, v]
            elif col[p] == GAMMA:
                total += float(np.sum(1 - sol.xe[:, u, v]))
        return total
    s = inst.sign[iu]
    w = inst.weight_matrix()[iu]
    x = sol.x[iu]
    return float(np.sum(w[s > 0] * x[s > 0]) + np.sum(w[s < 0] * (1 - x[s < 0])))

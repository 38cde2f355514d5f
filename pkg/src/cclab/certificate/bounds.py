"""Closed-form lower bounds on achievable factors and the neutral-function violation region."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from ..rounding import PiecewiseFn, ccc_fplus


@dataclass(frozen=True)
class LowerBoundReport:
    mode: str
    alpha: float
    feasible: bool
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "alpha": float(self.alpha), "feasible": self.feasible, "witness": self.witness}


def lb_wcc(alpha) -> LowerBoundReport:
    """Necessary condition for any rounding on pseudometric weights.

    f+(x) <= alpha x near 0 gives f+(2x) <= alpha x, hence f+(t) < 1 for
    t < 2/alpha, while the pair (4/(3 alpha)) forces f+(1 - 4/(3 alpha)) = 1.
    The two clash exactly when 2/alpha > 1 - 4/(3 alpha).
    """
    a = Fraction(alpha) if not isinstance(alpha, float) else Fraction(str(alpha))
    if a <= 0:
        raise ValueError("alpha must be positive")
    below_one_until = 2 / a
    forced_one_at = 1 - Fraction(4, 3) / a
    feasible = not below_one_until > forced_one_at
    witness = {
        "x": str(Fraction(4, 3) / a),
        "fplus_below_one_until": float(below_one_until),
        "fplus_forced_one_at": float(forced_one_at),
        "inequality": "2/alpha <= 1 - 4/(3 alpha)",
        "holds": feasible,
    }
    return LowerBoundReport("wcc", float(alpha), feasible, witness)


def h_poly(t: float) -> float:
    return 8 * t**4 - 11 * t**3 + 12 * t**2 + 6 * t - 8


def lb_ccc(alpha) -> LowerBoundReport:
    """Compare the two bounds on f-circ(1/2) at t = sqrt(1 - alpha/4).

    The largest value f-circ(1/2) may take is (3t^3 - 6t^2 - 4t + 6) / (2(t^2 - t + 1))
    and the smallest is 3 - alpha = 4t^2 - 1. They clash iff
    h(t) = 8t^4 - 11t^3 + 12t^2 + 6t - 8 > 0.
    """
    a = float(alpha)
    if not 2 <= a < 4:
        raise ValueError("alpha must lie in [2, 4)")
    t = math.sqrt(1 - a / 4)
    upper = (3 * t**3 - 6 * t**2 - 4 * t + 6) / (2 * (t**2 - t + 1))
    lower = 4 * t**2 - 1
    h = h_poly(t)
    feasible = not h > 0
    witness = {"t": t, "upper": upper, "lower": lower, "h": h, "holds": feasible}
    return LowerBoundReport("ccc", a, feasible, witness)


def bisect_threshold(check, lo: float, hi: float, tol: float = 1e-9, max_iter: int = 200) -> float:
    """Smallest alpha in [lo, hi] where ``check(alpha).feasible`` switches to True."""
    flo, fhi = check(lo).feasible, check(hi).feasible
    if flo or not fhi:
        raise ValueError(f"need an infeasible lower end and a feasible upper end, got {flo} at {lo}, {fhi} at {hi}")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = (lo + hi) / 2
        if check(mid).feasible:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2


# --------------------------------------------------------------------------
# region where a neutral probability breaks the factor on (2t, t, t)


def _coefficients(py, t, alpha):
    A = alpha * (1 - py**2) * (1 - t) + 2 * alpha * t - 1 - 2 * py + py**2
    B = 2 * alpha * py * t + 2 - 4 * py
    return A, B


def violation_interval(fplus: PiecewiseFn, alpha: float, t: float):
    """Set of p in [0, 1] with A - B p < 0, as (lo, hi, lo_open, hi_open) or None if empty."""
    py = fplus.eval(float(t))
    A, B = _coefficients(py, t, alpha)
    if B == 0:
        return (0.0, 1.0, False, False) if A < 0 else None
    r = A / B
    if B > 0:  # p > A/B
        if r >= 1:
            return None
        return (max(r, 0.0), 1.0, r >= 0, False)
    if r <= 0:  # p < A/B
        return None
    return (0.0, min(r, 1.0), False, r <= 1)


def is_violating(fplus: PiecewiseFn, alpha: float, t: float, p: float) -> bool:
    py = fplus.eval(float(t))
    A, B = _coefficients(py, t, alpha)
    return A - B * p < 0


def violation_region(fplus: PiecewiseFn | None = None, alpha: float = 2.15, resolution: float = 1e-3):
    """Grid points (2t, p) with t in [0, 1/2] and p in [0, 1] where the gap on (2t, t, t) is negative."""
    fplus = fplus or ccc_fplus()
    ts = np.linspace(0.0, 0.5, int(round(0.5 / resolution)) + 1)
    ps = np.linspace(0.0, 1.0, int(round(1.0 / resolution)) + 1)
    py = fplus.eval_array(ts)
    A, B = _coefficients(py, ts, alpha)
    bad = A[:, None] - B[:, None] * ps[None, :] < 0
    ti, pi = np.nonzero(bad)
    return [(float(2 * ts[i]), float(ps[j])) for i, j in zip(ti, pi)]


def region_csv(points) -> str:
    return "x,p\n" + "".join(f"{x:.6g},{p:.6g}\n" for x, p in points)


def curve_clear_of_region(fcirc: PiecewiseFn, fplus: PiecewiseFn, alpha: float, resolution: float = 1e-3):
    """First t where (2t, fcirc(2t)) falls in the region, or None."""
    for t in np.linspace(0.0, 0.5, int(round(0.5 / resolution)) + 1):
        if is_violating(fplus, alpha, float(t), fcirc.eval(float(min(2 * t, 1.0)))):
            return float(t)
    return None


# --------------------------------------------------------------------------
# interior minimum of one neutral sub-case


def ccc_case_value(y: float, alpha: float = 2.15, fplus: PiecewiseFn | None = None) -> float:
    """Gap on (1 - y, y, 1) with p_x = 1 - 3y/10 and p_y = f+(y)."""
    fplus = fplus or ccc_fplus()
    py = fplus.eval(float(y))
    return alpha * ((1 - py) * (1 - y) + 0.3 * y * y) - (1 + 0.3 * y) * (2 - py) + 1


def ccc_case_small_y(y) -> Fraction:
    """Same gap for y below the f+ threshold, where it reduces to (129y^2 - 550y + 230)/200."""
    y = Fraction(y)
    return (129 * y * y - 550 * y + 230) / 200


def ccc_case_minimum(alpha: float = 2.15, lo: float = 0.19, hi: float = 0.5, xtol: float = 1e-9):
    """(min value, argmin y) of the gap over [lo, hi) by bounded Brent search."""
    res = minimize_scalar(
        lambda y: ccc_case_value(y, alpha),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xtol},
    )
    return float(res.fun), float(res.x)

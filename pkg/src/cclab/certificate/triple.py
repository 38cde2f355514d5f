"""Expected cost and LP charge of one triangle, conditioned on which vertex is the pivot.

A configuration assigns LP values ``(x, y, z)`` to the pairs ``(uv, vw, wu)``.
Edge ``x`` is decided when ``w`` pivots, ``y`` when ``u`` pivots and ``z``
when ``v`` pivots. The pivot joins each endpoint independently, with
non-selection probabilities read off the other two pairs: ``x`` uses
``(p_z, p_y)``, ``y`` uses ``(p_x, p_z)`` and ``z`` uses ``(p_x, p_y)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..instance import EdgeSign
from ..rounding import RoundingScheme

POS, NEG, NEU = int(EdgeSign.POSITIVE), int(EdgeSign.NEGATIVE), int(EdgeSign.NEUTRAL)
ROLE_PAIRS = ((2, 1), (0, 2), (0, 1))  # probability indices feeding each edge's role
SIGN_ORDER = {POS: 0, NEG: 1, NEU: 2}
WEIGHT_GENERATORS = ((1, 1, 0), (1, 0, 1), (0, 1, 1))
MODES = ("wcc", "ccc")


class ConfigError(ValueError):
    pass


def sign_symbol(s) -> str:
    return EdgeSign(int(s)).symbol


@dataclass(frozen=True)
class TripleConfig:
    x: object
    y: object
    z: object
    signs: tuple[int, int, int]
    weights: tuple | None = None
    sides: tuple[str, str, str] = ("at", "at", "at")
    tol: float = field(default=1e-12, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        vals = self.values
        if any(not -self.tol <= float(v) <= 1 + self.tol for v in vals):
            raise ConfigError(f"LP values {vals} must lie in [0, 1]")
        if not _is_metric(vals, self.tol):
            raise ConfigError(f"LP values {vals} violate the triangle inequality")
        if self.weights is not None:
            w = tuple(self.weights)
            if len(w) != 3 or any(v < 0 for v in w):
                raise ConfigError("weights must be three nonnegative numbers")
            if not _is_metric(w, self.tol):
                raise ConfigError(f"weights {w} violate the triangle inequality")

    @property
    def values(self) -> tuple:
        return (self.x, self.y, self.z)

    def to_dict(self) -> dict:
        return {
            "x": _str(self.x),
            "y": _str(self.y),
            "z": _str(self.z),
            "signs": "".join(sign_symbol(s) for s in self.signs),
            "weights": None if self.weights is None else [_str(w) for w in self.weights],
            "sides": list(self.sides),
        }


def _str(v):
    return str(v) if isinstance(v, Fraction) else float(v) if isinstance(v, (float, np.floating)) else v


def _is_metric(v, tol) -> bool:
    a, b, c = (float(t) for t in v)
    return a <= b + c + tol and b <= a + c + tol and c <= a + b + tol


# --------------------------------------------------------------------------
# scalar formulas


def e_cost(sign, p_a, p_b):
    """Expected violation of the pair decided by this pivot."""
    s = int(sign)
    if s == POS:
        return p_a * (1 - p_b) + (1 - p_a) * p_b
    if s == NEG:
        return (1 - p_a) * (1 - p_b)
    return 1 - p_a * p_b


def e_lp_cc(sign, x_edge, p_a, p_b):
    """Expected LP charge; neutral pairs carry no charge in the pairwise LP and are rejected."""
    s = int(sign)
    if s == POS:
        return (1 - p_a * p_b) * x_edge
    if s == NEG:
        return (1 - p_a * p_b) * (1 - x_edge)
    raise ConfigError("neutral pairs have no LP charge in the pairwise relaxation")


def e_lp_ccc_lower(sign, x_edge, x_other1, x_other2, p_a, p_b):
    """Lower bound on the chromatic LP charge; neutral pairs use max{1/2, 1 - x} over the triangle."""
    s = int(sign)
    if s != NEU:
        return e_lp_cc(s, x_edge, p_a, p_b)
    half = Fraction(1, 2) if isinstance(x_edge, Fraction) else 0.5
    return (1 - p_a * p_b) * max(half, 1 - x_edge, 1 - x_other1, 1 - x_other2)


def probabilities(config: TripleConfig, scheme: RoundingScheme) -> tuple:
    return tuple(
        scheme.for_sign(s).eval(v, side) for s, v, side in zip(config.signs, config.values, config.sides)
    )


def role_terms(config: TripleConfig, scheme: RoundingScheme, mode: str = "wcc"):
    """Per edge (x, y, z): (e.cost, e.lp) of the role that decides it."""
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    p = probabilities(config, scheme)
    vals = config.values
    out = []
    for i, (a, b) in enumerate(ROLE_PAIRS):
        s = config.signs[i]
        cost = e_cost(s, p[a], p[b])
        if mode == "wcc":
            lp = e_lp_cc(s, vals[i], p[a], p[b])
        else:
            others = [vals[j] for j in range(3) if j != i]
            lp = e_lp_ccc_lower(s, vals[i], others[0], others[1], p[a], p[b])
        out.append((cost, lp))
    return out


def role_gaps(config: TripleConfig, scheme: RoundingScheme, alpha, mode: str = "wcc") -> tuple:
    """alpha * e.lp - e.cost for the roles deciding x, y and z (unweighted)."""
    return tuple(alpha * lp - cost for cost, lp in role_terms(config, scheme, mode))


def triple_gap(config: TripleConfig, scheme: RoundingScheme, alpha, mode: str = "wcc"):
    """alpha * LP - ALG over the three pivot roles, each scaled by its edge weight."""
    g = role_gaps(config, scheme, alpha, mode)
    w = config.weights if config.weights is not None else (1, 1, 1)
    return sum((wi * gi for wi, gi in zip(w, g)), 0 * g[0])


# --------------------------------------------------------------------------
# vectorized float formulas, used by the sweeps


def e_cost_v(sign: int, pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    if sign == POS:
        return pa + pb - 2 * pa * pb
    if sign == NEG:
        return (1 - pa) * (1 - pb)
    return 1 - pa * pb


def role_gap_v(sign: int, alpha: float, x_edge, x1, x2, pa, pb, mode: str) -> np.ndarray:
    keep = 1 - pa * pb
    if sign == POS:
        lp = keep * x_edge
    elif sign == NEG:
        lp = keep * (1 - x_edge)
    elif mode == "ccc":
        lp = keep * np.maximum(np.maximum(0.5, 1 - x_edge), np.maximum(1 - x1, 1 - x2))
    else:
        raise ConfigError("neutral pairs have no LP charge in the pairwise relaxation")
    return alpha * lp - e_cost_v(sign, pa, pb)

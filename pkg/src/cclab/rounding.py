"""Piecewise rounding functions mapping an LP distance to a non-selection probability.

Every piece is a polynomial of degree at most two in the normalized coordinate
``s = (x - shift) / scale``, with exact rational coefficients. A breakpoint is
owned by the piece on its left or on its right, which fixes the value *at* the
breakpoint; the one-sided limits are always available through ``side``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Literal

import numpy as np

from .instance import EdgeSign

Side = Literal["left", "at", "right"]
SIDE_CODE = {"left": -1, "at": 0, "right": 1}

Q = Fraction


class DomainError(ValueError):
    pass


class SchemeError(ValueError):
    pass


def _q(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (Rational, str)):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(str(v))
    raise TypeError(f"cannot make a rational out of {v!r}")


@dataclass(frozen=True)
class Piece:
    coeffs: tuple[Fraction, Fraction, Fraction]
    shift: Fraction = Q(0)
    scale: Fraction = Q(1)

    def __post_init__(self):
        c = tuple(_q(v) for v in self.coeffs)
        c = c + (Q(0),) * (3 - len(c))
        if len(c) != 3:
            raise SchemeError("pieces have degree at most 2")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "shift", _q(self.shift))
        object.__setattr__(self, "scale", _q(self.scale))
        if self.scale <= 0:
            raise SchemeError("piece scale must be positive")

    @classmethod
    def const(cls, c) -> "Piece":
        return cls((c, 0, 0))

    @classmethod
    def linear(cls, slope, intercept=0) -> "Piece":
        return cls((intercept, slope, 0))

    def __call__(self, x):
        c0, c1, c2 = self.coeffs
        if isinstance(x, (Fraction, int)):
            s = (x - self.shift) / self.scale
            return c0 + c1 * s + c2 * s * s
        s = (x - float(self.shift)) / float(self.scale)
        return float(c0) + float(c1) * s + float(c2) * s * s

    def slope(self, x: Fraction) -> Fraction:
        _, c1, c2 = self.coeffs
        s = (x - self.shift) / self.scale
        return (c1 + 2 * c2 * s) / self.scale

    def critical_point(self) -> Fraction | None:
        _, c1, c2 = self.coeffs
        if c2 == 0:
            return None
        return self.shift - self.scale * c1 / (2 * c2)

    @property
    def curvature(self) -> Fraction:
        return self.coeffs[2]

    def to_dict(self) -> dict:
        return {"coeffs": [str(c) for c in self.coeffs], "shift": str(self.shift), "scale": str(self.scale)}

    @classmethod
    def from_dict(cls, d: dict) -> "Piece":
        return cls(tuple(d["coeffs"]), d.get("shift", "0"), d.get("scale", "1"))


@dataclass(frozen=True)
class PiecewiseFn:
    """f: [0, 1] -> R given by pieces between ``breakpoints`` (which include 0 and 1)."""

    breakpoints: tuple[Fraction, ...]
    pieces: tuple[Piece, ...]
    owners: tuple[str, ...] = ()  # "left"/"right" per interior breakpoint
    name: str = field(default="", compare=False)

    def __post_init__(self):
        bps = tuple(_q(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "pieces", tuple(self.pieces))
        owners = tuple(self.owners) if self.owners else ("right",) * (len(bps) - 2)
        object.__setattr__(self, "owners", owners)
        if len(bps) < 2 or bps[0] != 0 or bps[-1] != 1:
            raise SchemeError("breakpoints must start at 0 and end at 1")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise SchemeError("breakpoints must be strictly increasing")
        if len(self.pieces) != len(bps) - 1:
            raise SchemeError(f"{len(bps)} breakpoints need {len(bps) - 1} pieces, got {len(self.pieces)}")
        if len(owners) != len(bps) - 2 or any(o not in ("left", "right") for o in owners):
            raise SchemeError("each interior breakpoint needs an owner 'left' or 'right'")

    @classmethod
    def single(cls, piece: Piece, name: str = "") -> "PiecewiseFn":
        return cls((Q(0), Q(1)), (piece,), (), name)

    @property
    def interior(self) -> tuple[Fraction, ...]:
        return self.breakpoints[1:-1]

    # -- exact / scalar evaluation -------------------------------------------

    def _index(self, x, side: str) -> int:
        k = 0
        for i, b in enumerate(self.interior):
            if isinstance(x, float):
                b = float(b)  # same comparison as eval_array
            if x > b or (x == b and (side == "right" or (side == "at" and self.owners[i] == "right"))):
                k = i + 1
        return k

    def eval(self, x, side: Side = "at"):
        """Value, or one-sided limit, at ``x``.

        Rational inputs give an exact Fraction, floats give a float.
        """
        if side not in SIDE_CODE:
            raise DomainError(f"side must be left/at/right, got {side!r}")
        if isinstance(x, float):
            xv = x
        else:
            x = _q(x)
            xv = x
        if not 0 <= xv <= 1:
            raise DomainError(f"x={x} outside [0, 1]")
        if side == "left" and xv <= 0:
            raise DomainError("left limit needs x > 0")
        if side == "right" and xv >= 1:
            raise DomainError("right limit needs x < 1")
        return self.pieces[self._index(x, side)](x)

    __call__ = eval

    def left_limit(self, x):
        return self.eval(x, "left")

    def right_limit(self, x):
        return self.eval(x, "right")

    def jumps(self) -> tuple[Fraction, ...]:
        return tuple(b for b in self.interior if self.eval(b, "left") != self.eval(b, "right"))

    @property
    def is_continuous(self) -> bool:
        return not self.jumps()

    # -- vectorized float evaluation -----------------------------------------

    @cached_property
    def _float_tables(self):
        interior = np.array([float(b) for b in self.interior], dtype=float)
        c = np.array([[float(v) for v in p.coeffs] for p in self.pieces], dtype=float)
        shift = np.array([float(p.shift) for p in self.pieces], dtype=float)
        scale = np.array([float(p.scale) for p in self.pieces], dtype=float)
        own_left = np.array([o == "left" for o in self.owners], dtype=bool)
        return interior, c, shift, scale, own_left

    def eval_array(self, xs, sides=None) -> np.ndarray:
        """Float evaluation on arrays; ``sides`` holds -1 (left), 0 (at), +1 (right)."""
        xs = np.asarray(xs, dtype=float)
        interior, c, shift, scale, own_left = self._float_tables
        idx_l = np.searchsorted(interior, xs, side="left")
        idx_r = np.searchsorted(interior, xs, side="right")
        if len(interior):
            hit = idx_r > idx_l
            at_left_owned = np.zeros(xs.shape, dtype=bool)
            at_left_owned[hit] = own_left[idx_l[hit]]
            idx_at = np.where(at_left_owned, idx_l, idx_r)
        else:
            idx_at = idx_r
        if sides is None:
            idx = idx_at
        else:
            sides = np.broadcast_to(np.asarray(sides), xs.shape)
            idx = np.where(sides < 0, idx_l, np.where(sides > 0, idx_r, idx_at))
        s = (xs - shift[idx]) / scale[idx]
        return c[idx, 0] + s * (c[idx, 1] + s * c[idx, 2])

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "breakpoints": [str(b) for b in self.breakpoints],
            "owners": list(self.owners),
            "pieces": [p.to_dict() for p in self.pieces],
        }

    @classmethod
    def from_dict(cls, d: dict, name: str = "") -> "PiecewiseFn":
        return cls(
            tuple(_q(b) for b in d["breakpoints"]),
            tuple(Piece.from_dict(p) for p in d["pieces"]),
            tuple(d.get("owners", ())),
            name,
        )


def identity_fn() -> PiecewiseFn:
    return PiecewiseFn.single(Piece.linear(1), "identity")


def step_linear_fn(lo, hi, piece: Piece, lo_owner="right", hi_owner="right", name="") -> PiecewiseFn:
    """0 below ``lo``, ``piece`` between, 1 above ``hi``; degenerate ends are dropped."""
    lo, hi = _q(lo), _q(hi)
    bps = [Q(0)]
    pieces = []
    owners = []
    if lo > 0:
        pieces.append(Piece.const(0))
        bps.append(lo)
        owners.append(lo_owner)
    pieces.append(piece)
    if hi < 1:
        bps.append(hi)
        owners.append(hi_owner)
        pieces.append(Piece.const(1))
    bps.append(Q(1))
    return PiecewiseFn(tuple(bps), tuple(pieces), tuple(owners), name)


@dataclass(frozen=True)
class RoundingScheme:
    fplus: PiecewiseFn
    fminus: PiecewiseFn
    fcirc: PiecewiseFn
    name: str = "custom"
    params: tuple[tuple[str, Fraction], ...] = ()

    def for_sign(self, sign) -> PiecewiseFn:
        s = int(sign)
        if s > 0:
            return self.fplus
        if s < 0:
            return self.fminus
        return self.fcirc

    def functions(self) -> dict[str, PiecewiseFn]:
        return {"fplus": self.fplus, "fminus": self.fminus, "fcirc": self.fcirc}

    def probability(self, sign: EdgeSign, x, side: Side = "at"):
        return self.for_sign(sign).eval(x, side)

    def breakpoints(self) -> tuple[Fraction, ...]:
        pts = set()
        for f in self.functions().values():
            pts.update(f.breakpoints)
        return tuple(sorted(pts))

    def jump_points(self) -> tuple[Fraction, ...]:
        pts = set()
        for f in self.functions().values():
            pts.update(f.jumps())
        return tuple(sorted(pts))

    @property
    def is_rational(self) -> bool:
        return True  # coefficients are stored as Fractions by construction

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": {k: str(v) for k, v in self.params},
            **{k: f.to_dict() for k, f in self.functions().items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "RoundingScheme":
        try:
            fns = {k: PiecewiseFn.from_dict(d[k], k) for k in ("fplus", "fminus", "fcirc")}
        except KeyError as e:
            raise SchemeError(f"scheme description lacks {e.args[0]!r}") from None
        params = tuple((k, _q(v)) for k, v in d.get("params", {}).items())
        return cls(name=d.get("name", "custom"), params=params, **fns)

    @classmethod
    def from_json(cls, text: str) -> "RoundingScheme":
        return cls.from_dict(json.loads(text))


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class RoundingViolation:
    function: str
    condition: str  # "endpoint", "nondecreasing" or "range"
    witness: tuple
    detail: str = ""


def validate_fn(fn: PiecewiseFn, label: str) -> list[RoundingViolation]:
    out = []
    f0, f1 = fn.eval(Q(0)), fn.eval(Q(1))
    if f0 != 0:
        out.append(RoundingViolation(label, "endpoint", (Q(0),), f"f(0) = {f0}, expected 0"))
    if f1 != 1:
        out.append(RoundingViolation(label, "endpoint", (Q(1),), f"f(1) = {f1}, expected 1"))

    bps = fn.breakpoints
    for i, piece in enumerate(fn.pieces):
        lo, hi = bps[i], bps[i + 1]
        v_lo, v_hi = piece(lo), piece(hi)
        crit = piece.critical_point()
        probe = [lo, hi] + ([crit] if crit is not None and lo < crit < hi else [])
        for t in probe:
            v = piece(t)
            if not 0 <= v <= 1:
                out.append(RoundingViolation(label, "range", (t,), f"value {v} at {t} outside [0, 1]"))
                break
        if v_lo > v_hi:
            out.append(RoundingViolation(label, "nondecreasing", (lo, hi), f"f({lo}) = {v_lo} > f({hi}) = {v_hi}"))
        elif piece.slope(lo) < 0 or piece.slope(hi) < 0:
            if piece(lo) > piece(crit):
                pair = (lo, crit)
            else:
                pair = (crit, hi)
            out.append(
                RoundingViolation(label, "nondecreasing", pair, f"f({pair[0]}) > f({pair[1]}) inside piece {i}")
            )
    for b in fn.interior:
        left, at, right = fn.eval(b, "left"), fn.eval(b, "at"), fn.eval(b, "right")
        if not left <= at <= right:
            out.append(
                RoundingViolation(label, "nondecreasing", (b, b), f"jump at {b}: left {left}, at {at}, right {right}")
            )
    return out


def validate_rounding(scheme: RoundingScheme) -> list[RoundingViolation]:
    out = []
    for label, fn in scheme.functions().items():
        out.extend(validate_fn(fn, label))
    return out


def check_pivot_shape(scheme: RoundingScheme) -> list[str]:
    """Problems with the convex-positive / concave-negative piece shape the extremal reduction needs."""
    issues = []
    for i, p in enumerate(scheme.fplus.pieces):
        if p.curvature < 0:
            issues.append(f"fplus piece {i} is concave")
    for i, p in enumerate(scheme.fminus.pieces):
        if p.curvature > 0:
            issues.append(f"fminus piece {i} is convex")
    return issues


# --------------------------------------------------------------------------
# presets


def wcc_tight() -> RoundingScheme:
    f = step_linear_fn(Q(2, 5), Q(3, 5), Piece.linear(Q(5, 3)), "right", "right", "wcc_tight")
    return RoundingScheme(f, f, identity_fn(), "wcc_tight")


def wcc_charikar_gao(alpha=Q(1, 3), beta=Q(0)) -> RoundingScheme:
    """Threshold family: 0 below ``alpha``, affine on [alpha, 1-alpha], 1 above."""
    a, b = _q(alpha), _q(beta)
    if not 0 < a < Q(1, 2):
        raise SchemeError("alpha must lie in (0, 1/2)")
    if not 0 <= b <= 1:
        raise SchemeError("beta must lie in [0, 1]")
    ab = a * b
    mid = Piece((Q(0), Q(1), Q(0)), shift=ab, scale=1 - ab)
    f = step_linear_fn(a, 1 - a, mid, "right", "left", "charikar_gao")
    g = step_linear_fn(ab, 1 - ab, Piece.linear(1), "right", "left", "charikar_gao_circ")
    return RoundingScheme(f, f, g, "wcc_charikar_gao", (("alpha", a), ("beta", b)))


CCC_LO = Q(19, 100)
CCC_HI = Q(5095, 10000)


def ccc_fplus() -> PiecewiseFn:
    quad = Piece((Q(0), Q(0), Q(1)), shift=CCC_LO, scale=CCC_HI - CCC_LO)
    return step_linear_fn(CCC_LO, CCC_HI, quad, "right", "right", "ccc_fplus")


def ccc_fcirc() -> PiecewiseFn:
    return PiecewiseFn(
        (Q(0), Q(1, 2), Q(1)),
        (Piece.linear(Q(17, 10)), Piece.linear(Q(3, 10), Q(7, 10))),
        ("right",),
        "ccc_fcirc",
    )


def ccc_plus_minus() -> RoundingScheme:
    """Quadratic-threshold f+ with f- = x; neutral pairs fall back to the identity."""
    return RoundingScheme(ccc_fplus(), identity_fn(), identity_fn(), "ccc_plus_minus")


def ccc_neutral_scheme() -> RoundingScheme:
    return RoundingScheme(ccc_fplus(), identity_fn(), ccc_fcirc(), "ccc_neutral_scheme")


def identity_scheme() -> RoundingScheme:
    f = identity_fn()
    return RoundingScheme(f, f, f, "identity")


_PRESETS = {
    "wcc_tight": wcc_tight,
    "wcc_charikar_gao": wcc_charikar_gao,
    "charikar_gao": wcc_charikar_gao,
    "ccc_plus_minus": ccc_plus_minus,
    "ccc_neutral_scheme": ccc_neutral_scheme,
    "ccc_neutral": ccc_neutral_scheme,
    "ccc": ccc_neutral_scheme,
    "paper": ccc_neutral_scheme,
    "identity": identity_scheme,
}

PRESET_NAMES = ("wcc_tight", "wcc_charikar_gao", "ccc_plus_minus", "ccc_neutral_scheme", "identity")


def preset(name: str, **params) -> RoundingScheme:
    """Look up a named scheme; ``wcc_charikar_gao`` also accepts ``alpha``/``beta``
    keywords or the inline form ``wcc_charikar_gao(1/3,0)``."""
    key = name.strip()
    if "(" in key and key.endswith(")"):
        key, args = key[:-1].split("(", 1)
        vals = [a.strip() for a in args.split(",") if a.strip()]
        params = dict(zip(("alpha", "beta"), vals), **params)
    try:
        factory = _PRESETS[key]
    except KeyError:
        raise SchemeError(f"unknown scheme {name!r}; known: {', '.join(PRESET_NAMES)}") from None
    if params and factory is not wcc_charikar_gao:
        raise SchemeError(f"scheme {key!r} takes no parameters")
    return factory(**params)

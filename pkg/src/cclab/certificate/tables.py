"""Exact per-role gaps at the extremal points of the tight-triangle regions.

On a tight triangle ``z = x + y`` with ``x <= y`` the rounding probabilities
are fixed polynomials inside each region cut out by the breakpoints. A region
is identified by an interior point; at a vertex of the region, a coordinate
sitting on a breakpoint is evaluated as the limit from the region's side.
Boundary rows give one-sided limits directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..rounding import RoundingScheme, SchemeError
from .triple import NEG, POS, TripleConfig, role_gaps, role_terms, sign_symbol

Q = Fraction


@dataclass(frozen=True)
class Region:
    name: str
    interior: tuple[Fraction, Fraction]
    points: tuple[tuple[Fraction, Fraction], ...]


@dataclass(frozen=True)
class Layout:
    name: str
    regions: tuple[Region, ...]
    boundary: tuple[tuple[tuple[Fraction, str], ...], ...]  # ((value, side) per coordinate)


def _r(name, interior, *points):
    return Region(name, tuple(Q(v) for v in interior), tuple(tuple(Q(v) for v in p) for p in points))


def _b(*coords):
    return tuple((Q(v), side) for v, side in coords)


THRESHOLD_LAYOUT = Layout(
    "charikar_gao",
    (
        _r("I", ("1/20", "1/10"), (0, 0), (0, "1/3"), ("1/6", "1/6")),
        _r("II", ("1/10", "3/10"), (0, "1/3"), ("1/6", "1/6"), ("1/3", "1/3")),
        _r("V", ("1/10", "7/10"), (0, "2/3"), (0, 1), ("1/3", "2/3")),
    ),
    (
        _b(("2/3", "left"), ("2/3", "left"), (1, "at")),
        _b(("2/3", "left"), ("2/3", "right"), (1, "at")),
        _b(("2/3", "right"), ("2/3", "right"), (1, "at")),
        _b(("1/3", "left"), (1, "at"), (1, "at")),
        _b(("1/3", "right"), (1, "at"), (1, "at")),
        _b(("2/3", "left"), (1, "at"), (1, "at")),
        _b(("2/3", "right"), (1, "at"), (1, "at")),
        _b((1, "at"), (1, "at"), (1, "at")),
    ),
)

TIGHT_LAYOUT = Layout(
    "wcc_tight",
    (
        _r("I", ("1/20", "1/10"), (0, 0), (0, "2/5"), ("1/5", "1/5")),
        _r("II", ("1/10", "7/20"), (0, "2/5"), ("1/5", "1/5"), ("1/5", "2/5"), ("3/10", "3/10")),
        _r("III", ("3/10", "7/20"), ("1/5", "2/5"), ("3/10", "3/10"), ("2/5", "2/5")),
        _r("VI", ("1/10", "7/10"), (0, "3/5"), (0, 1), ("2/5", "3/5")),
    ),
    (
        _b(("3/5", "at"), ("3/5", "at"), (1, "at")),
        _b(("2/5", "left"), (1, "at"), (1, "at")),
        _b(("2/5", "right"), (1, "at"), (1, "at")),
        _b(("3/5", "at"), (1, "at"), (1, "at")),
        _b((1, "at"), (1, "at"), (1, "at")),
    ),
)

LAYOUTS = {
    "charikar_gao": THRESHOLD_LAYOUT,
    "wcc_charikar_gao": THRESHOLD_LAYOUT,
    "A": THRESHOLD_LAYOUT,
    "wcc_tight": TIGHT_LAYOUT,
    "B": TIGHT_LAYOUT,
}


@dataclass(frozen=True)
class TableRow:
    region: str  # region name, or "boundary"
    point: tuple[Fraction, Fraction, Fraction]
    sides: tuple[str, str, str]
    sign: int
    values: tuple[Fraction, Fraction, Fraction]  # alpha*e.lp - e.cost for the x, y, z roles

    @property
    def label(self) -> str:
        marks = {"left": "-d", "right": "+d", "at": ""}
        coords = ", ".join(f"{v}{marks[s]}" for v, s in zip(self.point, self.sides))
        return f"({coords})"

    def to_dict(self) -> dict:
        return {
            "region": self.region,
            "point": [str(v) for v in self.point],
            "sides": list(self.sides),
            "sign": sign_symbol(self.sign),
            "values": [str(v) for v in self.values],
        }


def _side_toward(value: Fraction, target: Fraction, breakpoints) -> str:
    if value not in breakpoints or value == target:
        return "at"
    return "left" if target < value else "right"


def region_sides(region: Region, point, scheme: RoundingScheme):
    """One-sided directives for a region vertex, approached from the region's interior."""
    bps = set(scheme.breakpoints()) - {Q(0), Q(1)}
    ix, iy = region.interior
    interior = (ix, iy, ix + iy)
    return tuple(_side_toward(v, t, bps) for v, t in zip(point, interior))


def _layout(scheme: RoundingScheme, layout):
    if isinstance(layout, Layout):
        return layout
    key = layout if layout is not None else scheme.name
    try:
        return LAYOUTS[key]
    except KeyError:
        raise SchemeError(f"no region layout for {key!r}; choose from {sorted(LAYOUTS)}") from None


def extremal_tables(scheme: RoundingScheme, alpha, layout=None) -> list[TableRow]:
    """Exact ``alpha * e.lp - e.cost`` per role for each region vertex and each boundary tuple.

    ``layout`` names the region decomposition (``wcc_tight`` or ``charikar_gao``);
    by default it is looked up from the scheme name. Every row uses one sign
    for all three pairs, which is enough because f+ = f- in both schemes, so
    each role depends only on the sign of its own pair.
    """
    lay = _layout(scheme, layout)
    a = Fraction(alpha)
    rows = []
    for region in lay.regions:
        for x, y in region.points:
            point = (x, y, x + y)
            sides = region_sides(region, point, scheme)
            for sign in (POS, NEG):
                cfg = TripleConfig(*point, (sign,) * 3, sides=sides)
                rows.append(TableRow(region.name, point, sides, sign, role_gaps(cfg, scheme, a)))
    for coords in lay.boundary:
        point = tuple(v for v, _ in coords)
        sides = tuple(s for _, s in coords)
        for sign in (POS, NEG):
            cfg = TripleConfig(*point, (sign,) * 3, sides=sides)
            rows.append(TableRow("boundary", point, sides, sign, role_gaps(cfg, scheme, a)))
    return rows


def pairwise_sums_nonnegative(rows: list[TableRow]) -> bool:
    """Any two values from different columns of the same row add up to at least 0."""
    for r in rows:
        v = r.values
        if min(v[0] + v[1], v[0] + v[2], v[1] + v[2]) < 0:
            return False
    return True


def formula_table(scheme: RoundingScheme, layout=None):
    """Symbolic (e.cost, e.lp) per region, sign and role, as sympy expressions in x and y.

    Inside a region each probability is the polynomial of the piece selected at
    the interior point, so the formulas follow by substitution with z = x + y.
    Rows whose z-column formula is repaired from the region definition are
    flagged ``reconstructed``.
    """
    import sympy

    lay = _layout(scheme, layout)
    x, y = sympy.symbols("x y")
    z = x + y
    out = []
    regions = _all_regions(lay)
    for region in regions:
        ix, iy = region.interior
        interior = (ix, iy, ix + iy)
        syms = (x, y, z)
        probs = []
        for sign_val in (POS, NEG):
            fn = scheme.for_sign(sign_val)
            ps = []
            for v, t in zip(syms, interior):
                piece = fn.pieces[fn._index(t, "at")]
                c0, c1, c2 = (sympy.Rational(c.numerator, c.denominator) for c in piece.coeffs)
                sh = sympy.Rational(piece.shift.numerator, piece.shift.denominator)
                sc = sympy.Rational(piece.scale.numerator, piece.scale.denominator)
                s = (v - sh) / sc
                ps.append(sympy.expand(c0 + c1 * s + c2 * s**2))
            probs.append(ps)
        for k, sign_val in enumerate((POS, NEG)):
            p = probs[k]
            cells = []
            for i, (ia, ib) in enumerate(((2, 1), (0, 2), (0, 1))):
                pa, pb = p[ia], p[ib]
                if sign_val == POS:
                    cost = pa + pb - 2 * pa * pb
                    lp = (1 - pa * pb) * syms[i]
                else:
                    cost = (1 - pa) * (1 - pb)
                    lp = (1 - pa * pb) * (1 - syms[i])
                cells.append((sympy.factor(cost), sympy.factor(lp)))
            reconstructed = lay is TIGHT_LAYOUT and region.name == "V" and sign_val == NEG
            out.append(
                {
                    "region": region.name,
                    "sign": sign_symbol(sign_val),
                    "cells": cells,
                    "reconstructed": reconstructed,
                }
            )
    return out


_TIGHT_ALL = (
    _r("I", ("1/20", "1/10")),
    _r("II", ("1/10", "7/20")),
    _r("III", ("3/10", "7/20")),
    _r("IV", ("1/10", "9/20")),
    _r("V", ("1/10", "11/20")),
    _r("VI", ("1/10", "7/10")),
    _r("VII", ("9/20", "1/2")),
)

_THRESHOLD_ALL = (
    _r("I", ("1/20", "1/10")),
    _r("II", ("1/10", "3/10")),
    _r("III", ("1/10", "2/5")),
    _r("IV", ("1/10", "3/5")),
    _r("V", ("1/10", "7/10")),
    _r("VI", ("2/5", "1/2")),
)


def _all_regions(lay: Layout):
    return _TIGHT_ALL if lay is TIGHT_LAYOUT else _THRESHOLD_ALL


def role_terms_exact(point, sides, sign, scheme):
    """(e.cost, e.lp) per role at one configuration; handy for spot checks."""
    return role_terms(TripleConfig(*point, (sign,) * 3, sides=sides), scheme)

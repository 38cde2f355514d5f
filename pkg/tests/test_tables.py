"""Extremal and boundary values of alpha * e.lp - e.cost, expected row by row."""

import time
from fractions import Fraction as F

import pytest

from cclab.certificate.tables import (
    THRESHOLD_LAYOUT,
    TIGHT_LAYOUT,
    extremal_tables,
    formula_table,
    pairwise_sums_nonnegative,
)
from cclab.certificate.triple import NEG, POS
from cclab.rounding import SchemeError, preset


def q(s):
    return F(s)


# (region, (x, y)) -> {sign: (w, u, v)}
THRESHOLD_ROWS = {
    ("I", (0, 0)): {POS: (0, 0, 0), NEG: (5, 5, 5)},
    ("I", (0, "1/3")): {POS: (0, 2, 2), NEG: (5, 3, 3)},
    ("I", ("1/6", "1/6")): {POS: (1, 1, 2), NEG: (4, 4, 3)},
    ("II", (0, "1/3")): {POS: ("-1/3", "5/3", 2), NEG: ("16/3", "10/3", 3)},
    # middle entry of the '-' row: 6(1 - y) - (1 - z) = 13/3 at y = 1/6, z = 1/3
    ("II", ("1/6", "1/6")): {POS: ("2/3", "2/3", 2), NEG: ("13/3", "13/3", 3)},
    ("II", ("1/3", "1/3")): {POS: ("4/3", "4/3", 4), NEG: ("11/3", "11/3", 1)},
    ("V", (0, "2/3")): {POS: (0, 3, 3), NEG: (0, 2, 2)},
    ("V", (0, 1)): {POS: (0, 5, 5), NEG: (0, 0, 0)},
    ("V", ("1/3", "2/3")): {POS: (0, 3, 5), NEG: (0, 2, 0)},
}

# ((x, side), (y, side), (z, side)) -> {sign: (w, u, v)}
THRESHOLD_BOUNDARY = {
    (("2/3", "left"), ("2/3", "left"), (1, "at")): {POS: (1, 1, "26/9"), NEG: ("2/3", "2/3", "-1/9")},
    (("2/3", "left"), ("2/3", "right"), (1, "at")): {POS: (0, 1, "5/3"), NEG: (0, "2/3", 0)},
    (("2/3", "right"), ("2/3", "right"), (1, "at")): {POS: (0, 0, 0), NEG: (0, 0, 0)},
    (("1/3", "left"), (1, "at"), (1, "at")): {POS: (0, 5, 5), NEG: (0, 0, 0)},
    (("1/3", "right"), (1, "at"), (1, "at")): {POS: (0, "10/3", "10/3"), NEG: (0, 0, 0)},
    (("2/3", "left"), (1, "at"), (1, "at")): {POS: (0, "5/3", "5/3"), NEG: (0, 0, 0)},
    (("2/3", "right"), (1, "at"), (1, "at")): {POS: (0, 0, 0), NEG: (0, 0, 0)},
    ((1, "at"), (1, "at"), (1, "at")): {POS: (0, 0, 0), NEG: (0, 0, 0)},
}

TIGHT_ROWS = {
    ("I", (0, 0)): {POS: (0, 0, 0), NEG: ("7/3", "7/3", "7/3")},
    ("I", (0, "2/5")): {POS: (0, "4/3", "4/3"), NEG: ("7/3", 1, 1)},
    ("I", ("1/5", "1/5")): {POS: ("2/3", "2/3", "4/3"), NEG: ("5/3", "5/3", 1)},
    ("II", (0, "2/5")): {POS: ("-2/3", "2/3", "4/3"), NEG: (3, "5/3", 1)},
    ("II", ("1/5", "1/5")): {POS: (0, 0, "4/3"), NEG: ("7/3", "7/3", 1)},
    ("II", ("1/5", "2/5")): {POS: ("-1/3", "1/3", 2), NEG: ("8/3", 2, "1/3")},
    ("II", ("3/10", "3/10")): {POS: (0, 0, 2), NEG: ("7/3", "7/3", "1/3")},
    ("III", ("1/5", "2/5")): {POS: ("-1/3", "1/3", 2), NEG: ("8/3", 2, "1/3")},
    ("III", ("3/10", "3/10")): {POS: (0, 0, 2), NEG: ("7/3", "7/3", "1/3")},
    ("III", ("2/5", "2/5")): {POS: ("1/3", "1/3", "8/3"), NEG: (2, 2, "-1/3")},
    ("VI", (0, "3/5")): {POS: (0, 1, 1), NEG: (0, "4/3", "4/3")},
    ("VI", (0, 1)): {POS: (0, "7/3", "7/3"), NEG: (0, 0, 0)},
    ("VI", ("2/5", "3/5")): {POS: (0, 1, "7/3"), NEG: (0, "4/3", 0)},
}

TIGHT_BOUNDARY = {
    (("3/5", "at"), ("3/5", "at"), (1, "at")): {POS: (0, 0, 0), NEG: (0, 0, 0)},
    (("2/5", "left"), (1, "at"), (1, "at")): {POS: (0, "7/3", "7/3"), NEG: (0, 0, 0)},
    (("2/5", "right"), (1, "at"), (1, "at")): {POS: (0, "7/9", "7/9"), NEG: (0, 0, 0)},
    (("3/5", "at"), (1, "at"), (1, "at")): {POS: (0, 0, 0), NEG: (0, 0, 0)},
    ((1, "at"), (1, "at"), (1, "at")): {POS: (0, 0, 0), NEG: (0, 0, 0)},
}


def expected_rows(regions, boundary):
    out = {}
    for (name, (x, y)), by_sign in regions.items():
        x, y = q(x), q(y)
        for sign, vals in by_sign.items():
            out[(name, (x, y, x + y), sign)] = tuple(q(v) for v in vals)
    for coords, by_sign in boundary.items():
        key = tuple((q(v), s) for v, s in coords)
        for sign, vals in by_sign.items():
            out[("boundary", key, sign)] = tuple(q(v) for v in vals)
    return out


def actual_rows(rows):
    out = {}
    for r in rows:
        if r.region == "boundary":
            key = ("boundary", tuple(zip(r.point, r.sides)), r.sign)
        else:
            key = (r.region, r.point, r.sign)
        assert key not in out
        out[key] = r.values
    return out


def test_tight_layout_matches_reference_values():
    t = time.perf_counter()
    rows = extremal_tables(preset("wcc_tight"), F(10, 3), "B")
    assert time.perf_counter() - t < 1
    assert actual_rows(rows) == expected_rows(TIGHT_ROWS, TIGHT_BOUNDARY)


def test_threshold_layout_matches_reference_values():
    t = time.perf_counter()
    rows = extremal_tables(preset("wcc_charikar_gao(1/3,0)"), 6, "A")
    assert time.perf_counter() - t < 1
    assert actual_rows(rows) == expected_rows(THRESHOLD_ROWS, THRESHOLD_BOUNDARY)


@pytest.mark.parametrize(
    "scheme, alpha, layout, region, point, sign, values",
    [
        ("wcc_tight", F(10, 3), "B", "I", ("0", "2/5"), POS, ("0", "4/3", "4/3")),
        ("wcc_tight", F(10, 3), "B", "III", ("2/5", "2/5"), NEG, ("2", "2", "-1/3")),
        ("wcc_tight", F(10, 3), "B", "I", ("0", "0"), NEG, ("7/3", "7/3", "7/3")),
        ("wcc_charikar_gao", 6, "A", "II", ("0", "1/3"), POS, ("-1/3", "5/3", "2")),
    ],
)
def test_named_rows(scheme, alpha, layout, region, point, sign, values):
    x, y = map(F, point)
    rows = extremal_tables(preset(scheme), alpha, layout)
    hit = [r for r in rows if r.region == region and r.point == (x, y, x + y) and r.sign == sign]
    assert len(hit) == 1 and hit[0].values == tuple(map(F, values))


def test_boundary_rows_named():
    rows = extremal_tables(preset("wcc_charikar_gao"), 6, "A")
    r = [r for r in rows if r.region == "boundary" and r.label == "(2/3-d, 2/3-d, 1)" and r.sign == NEG]
    assert r[0].values == (F(2, 3), F(2, 3), F(-1, 9))
    rows = extremal_tables(preset("wcc_tight"), F(10, 3), "B")
    r = [r for r in rows if r.region == "boundary" and r.label == "(2/5-d, 1, 1)" and r.sign == POS]
    assert r[0].values == (0, F(7, 3), F(7, 3))


def test_region_pairwise_sums_nonnegative():
    for name, alpha, lay in (("wcc_tight", F(10, 3), "B"), ("wcc_charikar_gao", 6, "A")):
        rows = [r for r in extremal_tables(preset(name), alpha, lay) if r.region != "boundary"]
        assert pairwise_sums_nonnegative(rows)


def test_layout_from_scheme_name():
    assert extremal_tables(preset("wcc_tight"), F(10, 3)) == extremal_tables(preset("wcc_tight"), F(10, 3), TIGHT_LAYOUT)
    assert extremal_tables(preset("wcc_charikar_gao"), 6) == extremal_tables(preset("wcc_charikar_gao"), 6, THRESHOLD_LAYOUT)


def test_unknown_layout():
    with pytest.raises(SchemeError):
        extremal_tables(preset("identity"), 3)


def test_formula_table_agrees_with_point_values():
    import sympy

    sch = preset("wcc_tight")
    formulas = formula_table(sch, "B")
    x, y = sympy.symbols("x y")
    by_key = {(f["region"], f["sign"]): f for f in formulas}
    for r in extremal_tables(sch, F(10, 3), "B"):
        if r.region == "boundary":
            continue
        cells = by_key[(r.region, "+" if r.sign == POS else "-")]["cells"]
        subs = {x: sympy.Rational(r.point[0]), y: sympy.Rational(r.point[1])}
        got = tuple(F(str(sympy.nsimplify(sympy.Rational(10, 3) * lp - cost).subs(subs))) for cost, lp in cells)
        assert got == r.values


def test_reconstructed_row_flagged():
    flagged = [f for f in formula_table(preset("wcc_tight"), "B") if f["reconstructed"]]
    assert [(f["region"], f["sign"]) for f in flagged] == [("V", "-")]


def test_equal_distances_give_equal_first_two_roles():
    """x = y makes the w and u roles mirror images."""
    for name, alpha, lay in (("wcc_tight", F(10, 3), "B"), ("wcc_charikar_gao", 6, "A")):
        for r in extremal_tables(preset(name), alpha, lay):
            if r.point[0] == r.point[1] and r.sides[0] == r.sides[1]:
                assert r.values[0] == r.values[1]


# per region and sign: ((cost_w, lp_w), (cost_u, lp_u), (cost_v, lp_v)) in x, y with z = x + y
TIGHT_FORMULAS = {
    ("I", "+"): (("0", "x"), ("0", "y"), ("0", "z")),
    ("I", "-"): (("1", "1-x"), ("1", "1-y"), ("1", "1-z")),
    ("II", "+"): (("5/3*z", "x"), ("5/3*z", "y"), ("0", "z")),
    ("II", "-"): (("1-5/3*z", "1-x"), ("1-5/3*z", "1-y"), ("1", "1-z")),
    ("III", "+"): (("1", "x"), ("1", "y"), ("0", "z")),
    ("III", "-"): (("0", "1-x"), ("0", "1-y"), ("1", "1-z")),
    ("IV", "+"): (("5/3*y+5/3*z-50/9*y*z", "(1-25/9*y*z)*x"), ("5/3*z", "y"), ("5/3*y", "z")),
    ("IV", "-"): (("(1-5/3*y)*(1-5/3*z)", "(1-25/9*y*z)*(1-x)"), ("1-5/3*z", "1-y"), ("1-5/3*y", "1-z")),
    ("V", "+"): (("1-5/3*y", "(1-5/3*y)*x"), ("1", "y"), ("5/3*y", "z")),
    # last pair split from the run-together cell "1-5/3 y  1-z"
    ("V", "-"): (("0", "(1-5/3*y)*(1-x)"), ("0", "1-y"), ("1-5/3*y", "1-z")),
    ("VI", "+"): (("0", "0"), ("1", "y"), ("1", "z")),
    ("VI", "-"): (("0", "0"), ("0", "1-y"), ("0", "1-z")),
    ("VII", "+"): (("1-5/3*y", "(1-5/3*y)*x"), ("1-5/3*x", "(1-5/3*x)*y"), ("5/3*x+5/3*y-50/9*x*y", "(1-25/9*x*y)*z")),
    ("VII", "-"): (("0", "(1-5/3*y)*(1-x)"), ("0", "(1-5/3*x)*(1-y)"), ("(1-5/3*x)*(1-5/3*y)", "(1-25/9*x*y)*(1-z)")),
}


def test_tight_formula_table_matches_reference_formulas():
    import sympy

    x, y = sympy.symbols("x y")
    env = {"x": x, "y": y, "z": x + y}
    got = {(f["region"], f["sign"]): f["cells"] for f in formula_table(preset("wcc_tight"), "B")}
    assert set(got) == set(TIGHT_FORMULAS)
    for key, cells in TIGHT_FORMULAS.items():
        for (cost, lp), (gc, gl) in zip(cells, got[key]):
            assert sympy.simplify(sympy.sympify(cost, locals=env) - gc) == 0, key
            assert sympy.simplify(sympy.sympify(lp, locals=env) - gl) == 0, key


THRESHOLD_FORMULAS = {
    ("I", "+"): (("0", "x"), ("0", "y"), ("0", "z")),
    ("I", "-"): (("1", "1-x"), ("1", "1-y"), ("1", "1-z")),
    ("II", "+"): (("z", "x"), ("z", "y"), ("0", "z")),
    ("II", "-"): (("1-z", "1-x"), ("1-z", "1-y"), ("1", "1-z")),
    ("III", "+"): (("y+z-2*y*z", "(1-y*z)*x"), ("z", "y"), ("y", "z")),
    ("III", "-"): (("(1-y)*(1-z)", "(1-y*z)*(1-x)"), ("1-z", "1-y"), ("1-y", "1-z")),
    ("IV", "+"): (("1-y", "(1-y)*x"), ("1", "y"), ("y", "z")),
    ("IV", "-"): (("0", "(1-y)*(1-x)"), ("0", "1-y"), ("1-y", "1-z")),
    ("V", "+"): (("0", "0"), ("1", "y"), ("1", "z")),
    ("V", "-"): (("0", "0"), ("0", "1-y"), ("0", "1-z")),
    ("VI", "+"): (("1-y", "(1-y)*x"), ("1-x", "(1-x)*y"), ("x+y-2*x*y", "(1-x*y)*z")),
    ("VI", "-"): (("0", "(1-y)*(1-x)"), ("0", "(1-x)*(1-y)"), ("(1-x)*(1-y)", "(1-x*y)*(1-z)")),
}


def test_threshold_formula_table_matches_reference_formulas():
    import sympy

    x, y = sympy.symbols("x y")
    env = {"x": x, "y": y, "z": x + y}
    got = {(f["region"], f["sign"]): f["cells"] for f in formula_table(preset("wcc_charikar_gao"), "A")}
    assert set(got) == set(THRESHOLD_FORMULAS)
    for key, cells in THRESHOLD_FORMULAS.items():
        for (cost, lp), (gc, gl) in zip(cells, got[key]):
            assert sympy.simplify(sympy.sympify(cost, locals=env) - gc) == 0, key
            assert sympy.simplify(sympy.sympify(lp, locals=env) - gl) == 0, key

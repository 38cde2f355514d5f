import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cclab.exact import restricted_growth_strings
from cclab.instance import (
    GAMMA,
    CCCInstance,
    CCInstance,
    ChromaticClustering,
    Clustering,
    InstanceError,
    ParseError,
    PseudometricError,
    WCCInstance,
    cc_cost,
    ccc_cost,
    check_pseudometric,
    find_triangle_violation,
    generate_planted,
    instance_cost,
    instance_hash,
    parse_instance,
    serialize_instance,
    shortest_path_closure,
)


def triangle():
    return CCInstance.from_edges(3, [(0, 1, 1), (1, 2, 1), (0, 2, -1)])


def wcc_triangle():
    return parse_instance("wcc 3\n0 1 + 1\n1 2 + 1\n0 2 - 2\n")


def rrb():
    # pairs 01 and 12 red (1), pair 02 blue (2)
    return parse_instance("ccc 3 2 3\n0 1 1\n1 2 1\n0 2 2\n")


class TestParse:
    def test_absent_pair_is_neutral(self):
        inst = parse_instance("cc 3 2\n0 1 +\n1 2 -")
        assert isinstance(inst, CCInstance)
        assert inst.sign[0, 2] == 0
        assert inst.sign[0, 1] == 1 and inst.sign[1, 2] == -1

    def test_wcc_triangle_violation_names_triple(self):
        with pytest.raises(PseudometricError) as err:
            parse_instance("wcc 3\n0 1 + 1\n1 2 + 1\n0 2 - 3")
        assert sorted(err.value.triple) == [0, 1, 2]

    def test_ccc_gamma(self):
        inst = parse_instance("ccc 3 2 3\n0 1 1\n1 2 1\n0 2 gamma")
        assert isinstance(inst, CCCInstance)
        assert inst.L == 2
        assert int(np.sum(np.triu(inst.color == GAMMA))) == 1

    def test_comments_and_blank_lines(self):
        inst = parse_instance("# header next\ncc 2 1\n\n0 1 +  # trailing\n")
        assert inst.sign[0, 1] == 1

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ("cc 3 2\n0 1 +\n0 1 -", "duplicate"),
            ("cc 3 1\n0 5 +", "vertex"),
            ("ccc 2 2 1\n0 1 3", "out of range"),
            ("cc 3 2\n0 1 +", "announces"),
            ("wcc 3\n0 1 + 1\n1 2 + 1", "needs exactly 3"),
            ("xx 3", "unknown instance kind"),
            ("cc 3 1\n0 1 *", "sign"),
            ("", "empty"),
        ],
    )
    def test_errors(self, text, fragment):
        with pytest.raises(ParseError, match=fragment):
            parse_instance(text)

    def test_syntax_error_carries_line(self):
        with pytest.raises(ParseError) as err:
            parse_instance("cc 3 2\n0 1 +\n1 2 ?\n")
        assert err.value.line == 3

    @pytest.mark.parametrize("flavor", ["cc", "wcc", "ccc"])
    def test_roundtrip(self, flavor):
        inst, _ = generate_planted(7, 3, 0.3, 5, flavor, L=3)
        text = serialize_instance(inst)
        again = parse_instance(text)
        assert again == inst
        assert serialize_instance(again) == text


class TestCosts:
    def test_triangle_one_cluster(self):
        assert cc_cost(triangle(), Clustering((0, 0, 0))) == 1

    def test_triangle_singletons(self):
        assert cc_cost(triangle(), Clustering((0, 1, 2))) == 2

    def test_wcc_one_cluster_pays_negative_weight(self):
        assert cc_cost(wcc_triangle(), Clustering((0, 0, 0))) == 2

    def test_neutral_pairs_free(self):
        inst = parse_instance("cc 3 1\n0 1 +")
        assert cc_cost(inst, Clustering((0, 0, 0))) == 0
        assert cc_cost(inst, Clustering((0, 0, 1))) == 0

    def test_ccc_one_red_cluster(self):
        cc = ChromaticClustering(Clustering((0, 0, 0)), (1,))
        assert ccc_cost(rrb(), cc) == 1

    def test_ccc_singletons(self):
        cc = ChromaticClustering(Clustering((0, 1, 2)), (1, 1, 1))
        assert ccc_cost(rrb(), cc) == 3

    def test_ccc_minimum_over_all_colorings_is_one(self):
        inst = rrb()
        best = min(
            ccc_cost(inst, ChromaticClustering(Clustering(lab), cols))
            for lab in restricted_growth_strings(3)
            for cols in itertools.product((1, 2), repeat=max(lab) + 1)
        )
        assert best == 1

    def test_gamma_costs_only_when_together(self):
        inst = CCCInstance.from_edges(2, 1, [(0, 1, "gamma")])
        assert ccc_cost(inst, ChromaticClustering(Clustering((0, 0)), (1,))) == 1
        assert ccc_cost(inst, ChromaticClustering(Clustering((0, 1)), (1, 1))) == 0

    def test_size_mismatch(self):
        with pytest.raises(InstanceError):
            cc_cost(triangle(), Clustering((0, 0)))

    def test_missing_cluster_color(self):
        with pytest.raises(ValueError):
            ChromaticClustering(Clustering((0, 1, 1)), (1,))


class TestPlanted:
    @pytest.mark.parametrize("flavor", ["cc", "wcc", "ccc"])
    def test_noiseless_planted_cost_zero(self, flavor):
        inst, planted = generate_planted(6, 2, 0.0, 3, flavor, L=3)
        assert instance_cost(inst, planted) == 0

    def test_noiseless_cc_structure(self):
        inst, planted = generate_planted(6, 2, 0.0, 0, "cc")
        lab = planted.as_array()
        same = lab[:, None] == lab[None, :]
        off = ~np.eye(6, dtype=bool)
        assert np.all(inst.sign[same & off] == 1)
        assert np.all(inst.sign[~same] == -1)

    def test_noiseless_ccc_structure(self):
        inst, planted = generate_planted(6, 2, 0.0, 0, "ccc", L=3)
        lab = planted.clustering.as_array()
        for u in range(6):
            for v in range(u + 1, 6):
                if lab[u] == lab[v]:
                    assert inst.color[u, v] == planted.colors[lab[u]]
                else:
                    assert inst.color[u, v] == GAMMA

    def test_deterministic(self):
        a, pa = generate_planted(8, 3, 0.2, 7, "wcc")
        b, pb = generate_planted(8, 3, 0.2, 7, "wcc")
        assert a == b and pa == pb
        assert instance_hash(a) == instance_hash(b)

    def test_wcc_weights_pseudometric(self):
        inst, _ = generate_planted(8, 3, 0.4, 11, "wcc")
        check_pseudometric(inst.weight)

    @pytest.mark.parametrize("kw", [dict(n=3, k=4), dict(n=3, k=0), dict(n=3, k=1, noise=1.5), dict(n=3, k=1, flavor="x")])
    def test_bad_params(self, kw):
        args = dict(noise=0.0, seed=0, flavor="cc") | kw
        with pytest.raises(InstanceError):
            generate_planted(**args)


class TestPseudometric:
    def test_closure_fixes_violation(self):
        w = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
        assert find_triangle_violation(w) is not None
        closed = shortest_path_closure(w)
        assert closed[0, 2] == 2
        assert find_triangle_violation(closed) is None

    def test_exact_weights_kept_rational(self):
        inst = parse_instance("wcc 3\n0 1 + 1/3\n1 2 + 1/3\n0 2 - 2/3\n")
        assert inst.is_exact
        assert cc_cost(inst, Clustering((0, 0, 0))) == Fraction(2, 3)


@st.composite
def weight_matrices(draw):
    n = draw(st.integers(2, 6))
    vals = draw(st.lists(st.integers(0, 20), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    w = np.zeros((n, n), dtype=np.int64)
    w[np.triu_indices(n, 1)] = vals
    return w + w.T


@given(weight_matrices())
@settings(max_examples=100, deadline=None)
def test_closure_always_accepted(w):
    check_pseudometric(shortest_path_closure(w))


@given(weight_matrices())
@settings(max_examples=100, deadline=None)
def test_strict_violation_always_rejected(w):
    bad = find_triangle_violation(w)
    if bad is None:
        check_pseudometric(w)
    else:
        with pytest.raises(PseudometricError):
            check_pseudometric(w)


@given(st.integers(1, 7), st.integers(0, 10**6), st.sampled_from(["cc", "wcc", "ccc"]), st.data())
@settings(max_examples=60, deadline=None)
def test_cost_bounds(n, seed, flavor, data):
    inst, _ = generate_planted(n, 1, 0.5, seed, flavor, L=2)
    labels = data.draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    c = Clustering.from_labels(labels)
    if flavor == "ccc":
        cols = data.draw(st.lists(st.integers(1, 2), min_size=c.n_clusters, max_size=c.n_clusters))
        cost = ccc_cost(inst, ChromaticClustering(c, tuple(cols)))
        assert 0 <= cost <= inst.n_edges
    else:
        cost = cc_cost(inst, c)
        total = sum(inst.weight_matrix()[np.triu_indices(n, 1)])
        assert 0 <= cost <= total + 1e-9


def test_wcc_requires_complete_signs():
    with pytest.raises(InstanceError):
        WCCInstance(2, np.zeros((2, 2), dtype=int), np.zeros((2, 2)))

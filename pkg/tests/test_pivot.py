
import numpy as np
import pytest

from cclab.instance import CCCInstance, cc_cost, generate_planted, parse_instance
from cclab.lp import CCCLpSolution, solve_cc_lp, solve_ccc_lp, solve_lp
from cclab.pivot import (
    PivotError,
    color_classes,
    color_signs,
    lp_ccc,
    lp_pivot,
    monte_carlo,
    probability_matrix,
    run_once,
    trial_generators,
)
from cclab.rounding import PRESET_NAMES, identity_scheme, preset


def rng(seed=0):
    return trial_generators(seed, 1)[0]


def complete_signs(n, s):
    a = np.full((n, n), s, dtype=np.int8)
    np.fill_diagonal(a, 0)
    return a


def is_partition(clusters, vertices):
    flat = [v for c in clusters for v in c]
    return sorted(flat) == sorted(vertices)


class TestLpPivot:
    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_zero_lp_all_positive_single_cluster(self, name):
        for seed in range(20):
            clusters, _ = lp_pivot(range(6), complete_signs(6, 1), np.zeros((6, 6)), preset(name), rng(seed))
            assert clusters == [list(range(6))]

    @pytest.mark.parametrize("name", PRESET_NAMES)
    def test_one_lp_all_negative_singletons(self, name):
        x = np.ones((6, 6))
        np.fill_diagonal(x, 0)
        for seed in range(20):
            clusters, pivots = lp_pivot(range(6), complete_signs(6, -1), x, preset(name), rng(seed))
            assert len(clusters) == 6 and len(pivots) == 6

    def test_single_vertex(self):
        clusters, pivots = lp_pivot([3], np.zeros((4, 4)), np.zeros((4, 4)), identity_scheme(), rng())
        assert clusters == [[3]] and pivots == [3]

    def test_missing_lp_value(self):
        x = np.zeros((3, 3))
        x[0, 1] = np.nan
        with pytest.raises(PivotError):
            lp_pivot(range(3), complete_signs(3, 1), x, identity_scheme(), rng())

    def test_integral_lp_reproduces_clustering(self):
        inst, planted = generate_planted(8, 3, 0.0, 4, "cc")
        sol = solve_cc_lp(inst)
        for seed in range(10):
            r = run_once(inst, sol, preset("wcc_tight"), seed)
            assert r.clustering == planted and r.cost == 0

    def test_output_is_partition(self):
        inst, _ = generate_planted(9, 3, 0.4, 1, "cc")
        sol = solve_cc_lp(inst)
        for seed in range(30):
            clusters, _ = lp_pivot(range(9), inst.sign, sol.x, preset("wcc_tight"), rng(seed))
            assert is_partition(clusters, range(9))

    def test_probability_matrix(self):
        sign = np.array([[0, 1, -1], [1, 0, 0], [-1, 0, 0]])
        x = np.array([[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
        p = probability_matrix(sign, x, preset("ccc_neutral_scheme"))
        assert p[1, 2] == pytest.approx(0.85)
        assert p[0, 2] == pytest.approx(0.5)
        assert np.all(np.diag(p) == 0)


class TestLpCcc:
    def test_color_signs(self):
        inst = parse_instance("ccc 4 2 3\n0 1 1\n1 2 2\n2 3 gamma\n")
        s = color_signs(inst, 1)
        assert s[0, 1] == 1 and s[1, 2] == 0 and s[2, 3] == -1 and s[0, 3] == 0

    def test_integral_planted(self):
        inst, planted = generate_planted(8, 3, 0.0, 6, "ccc", L=3)
        sol = solve_ccc_lp(inst)
        for seed in range(10):
            r = run_once(inst, sol, preset("ccc_neutral_scheme"), seed)
            assert r.cost == 0
            assert r.clustering.clustering == planted.clustering

    def test_half_everywhere_gives_singleton(self):
        inst = CCCInstance.from_edges(2, 2, [(0, 1, 1)])
        xv = np.full((2, 2), 0.5)
        xe = np.full((2, 2, 2), 0.5)
        sol = CCCLpSolution(xv, xe, 0.0, "hand", 0.0)
        assert color_classes(sol) == [0, 0]
        cc, trace = lp_ccc(inst, sol, identity_scheme(), rng())
        assert cc.clustering.labels == (0, 1) and cc.colors == (1, 1) and trace == []

    def test_two_colors_below_half_rejected(self):
        sol = CCCLpSolution(np.array([[0.2, 0.3]]), np.zeros((2, 1, 1)), 0.0, "hand", 0.0)
        with pytest.raises(PivotError):
            color_classes(sol)

    def test_total_coloring(self):
        inst, _ = generate_planted(8, 3, 0.4, 2, "ccc", L=3)
        sol = solve_ccc_lp(inst)
        for seed in range(20):
            cc, _ = lp_ccc(inst, sol, preset("ccc_neutral_scheme"), rng(seed))
            assert len(cc.colors) == cc.clustering.n_clusters
            assert all(1 <= c <= 3 for c in cc.colors)

    def test_red_red_blue_identity(self):
        inst = parse_instance("ccc 3 2 3\n0 1 1\n1 2 1\n0 2 2\n")
        sol = solve_ccc_lp(inst)
        st = monte_carlo(inst, sol, identity_scheme(), 10_000, 3)
        assert st.mean <= 2.5 * sol.objective + 3 * st.stderr


class TestMonteCarlo:
    def setup_method(self):
        self.inst, _ = generate_planted(8, 3, 0.3, 5, "wcc")
        self.sol = solve_lp(self.inst)
        self.scheme = preset("wcc_tight")

    def test_single_trial(self):
        st = monte_carlo(self.inst, self.sol, self.scheme, 1, 9)
        assert st.stddev == 0 and st.mean == st.best.cost

    def test_deterministic(self):
        a = monte_carlo(self.inst, self.sol, self.scheme, 300, 4)
        b = monte_carlo(self.inst, self.sol, self.scheme, 300, 4)
        assert a.to_dict() == b.to_dict()

    def test_workers_do_not_change_result(self):
        a = monte_carlo(self.inst, self.sol, self.scheme, 200, 4, workers=1)
        b = monte_carlo(self.inst, self.sol, self.scheme, 200, 4, workers=3)
        assert a.to_dict() == b.to_dict()

    def test_env_workers(self, monkeypatch):
        monkeypatch.setenv("CCLAB_WORKERS", "2")
        a = monte_carlo(self.inst, self.sol, self.scheme, 50, 1)
        assert a.to_dict() == monte_carlo(self.inst, self.sol, self.scheme, 50, 1, workers=1).to_dict()

    def test_trials_positive(self):
        with pytest.raises(PivotError):
            monte_carlo(self.inst, self.sol, self.scheme, 0, 1)

    def test_wrong_algorithm(self):
        with pytest.raises(PivotError):
            monte_carlo(self.inst, self.sol, self.scheme, 5, 1, algorithm="lp_ccc")

    def test_ten_thirds_bound(self):
        st = monte_carlo(self.inst, self.sol, self.scheme, 10_000, 0)
        assert st.mean <= 10 / 3 * self.sol.objective + 3 * st.stderr

    def test_best_cost_consistent(self):
        st = monte_carlo(self.inst, self.sol, self.scheme, 100, 2)
        assert cc_cost(self.inst, st.best.clustering) == st.best.cost

    def test_ci_contains_mean(self):
        st = monte_carlo(self.inst, self.sol, self.scheme, 100, 2)
        assert st.ci95[0] <= st.mean <= st.ci95[1]


def test_generators_slice_consistently():
    full = [g.random() for g in trial_generators(11, 10)]
    part = [g.random() for g in trial_generators(11, 10, 4, 7)]
    assert part == full[4:7]


def test_run_json_shape():
    inst, _ = generate_planted(5, 2, 0.3, 0, "ccc", L=2)
    r = run_once(inst, solve_ccc_lp(inst), preset("ccc_neutral_scheme"), 3)
    d = r.to_dict()
    assert set(d) == {"clustering", "coloring", "cost", "seed", "pivots"}
    assert all(len(p) == 2 for p in d["pivots"])

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from centricae import deform, metrics
from centricae.deform import AscentConfig, BasinHopConfig, GreedyConfig, RadialScorer
from centricae.geometry import Dataset


def axis_two_toy(seed=0):
    """200 points; anomalies differ from normals only in the spread of axis 2."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((200, 2))
    y = np.zeros(200, np.int8)
    y[:20] = 1
    x[:20, 1] = 2.5 * rng.standard_normal(20)
    return Dataset(x, y)


@pytest.fixture(scope="module")
def toy():
    return axis_two_toy()


@pytest.fixture(scope="module")
def grid_oracle(toy):
    """Brute force over the factor direction; scale does not matter."""
    scorer = RadialScorer.from_dataset(toy, np.zeros(2))
    theta = np.linspace(0, np.pi / 2, 20_001)[1:]
    dirs = [(max(math.cos(t), 1e-300), math.sin(t)) for t in theta]
    aurocs = np.array([scorer.auroc(f) for f in dirs])
    ranks = np.array([scorer.rank_sum(f) for f in dirs])
    return {"auroc": aurocs.max(), "rank_sum": ranks.min(),
            "axis2": metrics.auroc(np.abs(toy.features[:, 1]), toy.labels)}


class TestScorer:
    def test_axis_function_matches_full(self, toy_data):
        s = RadialScorer.from_dataset(toy_data, np.zeros(4))
        f = np.array([0.5, 2.0, 1.5, 0.1])
        fn = s.axis_function(f, 2)
        for v in (0.01, 1.5, 30.0):
            g = f.copy()
            g[2] = v
            assert fn(v) == pytest.approx(s.auroc(g), abs=1e-12)

    def test_tpr_score_tag(self, toy_data):
        s = RadialScorer.from_dataset(toy_data, np.zeros(4), "tpr@0.1")
        neg, pos = s.split_scores(np.ones(4))
        expect = metrics.tpr_at_fpr_scores(np.r_[neg, pos], np.r_[np.zeros(neg.size), np.ones(pos.size)], 0.1)
        assert s(np.ones(4)) == expect
        assert s.axis_function(np.ones(4), 1)(1.0) == expect

    @pytest.mark.parametrize("tag", ["auc", "tpr@0", "tpr@1.5"])
    def test_bad_tag(self, tag):
        with pytest.raises(ValueError):
            deform.parse_score(tag)

    def test_rank_sum_matches_metrics(self, toy_data):
        s = RadialScorer.from_dataset(toy_data, np.zeros(4))
        f = np.array([1.0, 0.3, 2.0, 1.0])
        neg, pos = s.split_scores(f)
        labels = np.r_[np.zeros(neg.size), np.ones(pos.size)]
        assert s.rank_sum(f) == metrics.fraud_rank_sum(np.r_[neg, pos], labels)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, 4, elements=st.floats(0.01, 100)), st.floats(1e-3, 1e3))
    def test_scale_invariance(self, f, c):
        s = RadialScorer.from_dataset(_small_data(), np.zeros(4))
        assert s.auroc(c * f) == pytest.approx(s.auroc(f), abs=1e-12)


def _small_data():
    rng = np.random.default_rng(12)
    x = rng.standard_normal((120, 4))
    y = np.zeros(120, np.int8)
    y[:15] = 1
    x[:15] *= [2.0, 0.5, 1.0, 1.5]
    return Dataset(x, y)


class TestGreedy:
    def test_axis_two_toy(self, toy, grid_oracle):
        res = deform.greedy_factor_search(toy, np.zeros(2), GreedyConfig(passes=1))
        assert res.factors[0] / res.factors[1] < 0.05
        assert res.score == pytest.approx(grid_oracle["axis2"], abs=1e-6)
        assert res.score >= grid_oracle["auroc"] - 1e-12

    def test_trace_strictly_increasing(self, toy_data):
        res = deform.greedy_factor_search(toy_data, np.zeros(4), GreedyConfig(passes=3))
        assert np.all(np.diff(res.trace) > 0)
        assert res.score == res.trace[-1]
        assert res.score == RadialScorer.from_dataset(toy_data, np.zeros(4)).auroc(res.factors)

    def test_optimal_start_unchanged(self):
        x = np.array([[0.1, 0.1], [-0.2, 0.1], [0.0, -0.1], [3.0, 3.0], [-4.0, 2.0]])
        d = Dataset(x, [0, 0, 0, 1, 1])
        res = deform.greedy_factor_search(d, np.zeros(2), initial=[1.0, 1.0])
        assert np.array_equal(res.factors, [1.0, 1.0]) and res.score == 1.0 and res.trace == [1.0]

    def test_passes_continue_from_previous(self, toy_data):
        one = deform.greedy_factor_search(toy_data, np.zeros(4), GreedyConfig(passes=1))
        two = deform.greedy_factor_search(toy_data, np.zeros(4), GreedyConfig(passes=1), initial=one.factors)
        both = deform.greedy_factor_search(toy_data, np.zeros(4), GreedyConfig(passes=2))
        assert np.array_equal(two.factors, both.factors) and two.score == both.score

    def test_rejects_bad_input(self, toy_data):
        with pytest.raises(ValueError):
            deform.greedy_factor_search(toy_data, np.zeros(4), initial=[1, 0, 1, 1])
        with pytest.raises(ValueError):
            deform.greedy_factor_search(toy_data.select_rows(np.arange(40)), np.zeros(4))
        with pytest.raises(ValueError):
            GreedyConfig(digits=0)


class TestAngles:
    def test_diagonal(self):
        st_ = deform.factors_to_angles([1.0, 1.0])
        assert st_.angles[0] == pytest.approx(math.pi / 4)
        assert st_.radius == pytest.approx(math.sqrt(2))

    def test_ones_map_to_themselves(self):
        for d in (2, 5, 15):
            f = deform.angles_to_factors(deform.factors_to_angles(np.ones(d)))
            np.testing.assert_allclose(f, np.ones(d), rtol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.integers(2, 16), elements=st.floats(1e-3, 1e3)))
    def test_round_trip_on_sphere(self, f):
        g = deform.angles_to_factors(deform.factors_to_angles(f))
        assert abs(np.linalg.norm(g) - math.sqrt(f.size)) < 1e-9
        np.testing.assert_allclose(g, f * math.sqrt(f.size) / np.linalg.norm(f), rtol=1e-9, atol=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.integers(1, 10), elements=st.floats(-3, 3)))
    def test_projection_stays_positive(self, a):
        f = deform.angles_to_factors(deform._project(a))
        assert f.min() >= deform.FACTOR_FLOOR
        assert abs(np.linalg.norm(f) - math.sqrt(a.size + 1)) < 1e-9

    def test_zero_norm(self):
        with pytest.raises(ValueError):
            deform.factors_to_angles([0.0, 0.0])


class TestAscent:
    def test_axis_two_toy(self, toy, grid_oracle):
        res = deform.angular_ascent(toy, np.zeros(2))
        assert res.factors[0] / res.factors[1] < 0.05
        assert res.score >= grid_oracle["auroc"] - 1e-12

    def test_all_tied_leaves_factors(self):
        d = Dataset(np.ones((10, 3)), [0] * 7 + [1] * 3)
        res = deform.angular_ascent(d, np.zeros(3), initial=[1.0, 2.0, 3.0])
        assert np.array_equal(res.factors, [1.0, 2.0, 3.0]) and res.score == 0.5

    def test_best_state_and_monotone_trace(self, toy_data):
        g = deform.greedy_factor_search(toy_data, np.zeros(4), GreedyConfig(passes=1))
        res = deform.angular_ascent(toy_data, np.zeros(4), AscentConfig(epochs=10), initial=g.factors)
        assert res.score >= g.score
        assert np.all(np.diff(res.trace) >= 0)
        assert res.score == pytest.approx(RadialScorer.from_dataset(toy_data, np.zeros(4)).auroc(res.factors), abs=1e-15)

    def test_full_sample_ignores_seed(self, toy_data):
        a = deform.angular_ascent(toy_data, np.zeros(4), AscentConfig(seed=1))
        b = deform.angular_ascent(toy_data, np.zeros(4), AscentConfig(seed=2))
        assert np.array_equal(a.factors, b.factors) and a.trace == b.trace

    def test_subsampled_variant(self, toy_data):
        cfg = AscentConfig(epochs=8, subsample=0.5, seed=3)
        a = deform.angular_ascent(toy_data, np.zeros(4), cfg)
        b = deform.angular_ascent(toy_data, np.zeros(4), cfg)
        assert np.array_equal(a.factors, b.factors)
        full = RadialScorer.from_dataset(toy_data, np.zeros(4))
        assert a.score == full.auroc(a.factors) >= full.auroc(np.ones(4))

    @pytest.mark.parametrize("kw", [{"subsample": 0.0}, {"subsample": 1.5}, {"epochs": -1}, {"step_size": 0}])
    def test_config_validation(self, kw):
        with pytest.raises(ValueError):
            AscentConfig(**kw)


class TestBasinHopping:
    def test_zero_scale_never_moves(self, toy_data):
        res = deform.basin_hopping(toy_data, np.zeros(4), BasinHopConfig(iterations=30, perturbation_scale=0.0))
        assert np.array_equal(res.factors, np.ones(4))
        assert len(set(res.rank_sums)) == 1

    def test_zero_temperature_monotone(self, toy_data):
        res = deform.basin_hopping(toy_data, np.zeros(4), BasinHopConfig(iterations=200, temperature=0.0))
        assert np.all(np.diff(res.rank_sums) <= 0)
        assert res.best_rank_sum == res.rank_sums[-1]

    def test_reaches_grid_optimum(self, toy, grid_oracle):
        res = deform.basin_hopping(toy, np.zeros(2), BasinHopConfig(iterations=2000, seed=1))
        assert res.best_rank_sum == grid_oracle["rank_sum"]

    def test_traces_and_determinism(self, toy_data):
        cfg = BasinHopConfig(iterations=50, seed=4)
        a = deform.basin_hopping(toy_data, np.zeros(4), cfg)
        b = deform.basin_hopping(toy_data, np.zeros(4), cfg)
        assert a.rank_sums == b.rank_sums and a.tpr == b.tpr
        assert len(a.rank_sums) == len(a.wall_clock) == len(a.tpr) == 50
        assert np.all(np.diff(a.wall_clock) >= 0)

    def test_time_budget(self, toy_data):
        res = deform.basin_hopping(toy_data, np.zeros(4), BasinHopConfig(iterations=10**9, max_seconds=0.0))
        assert res.rank_sums == [] and np.array_equal(res.factors, np.ones(4))


class TestRadialDeformation:
    def test_stages(self, toy_data):
        res = deform.radial_deformation(toy_data, np.zeros(4), GreedyConfig(passes=2), AscentConfig(epochs=5))
        names = [s[0] for s in res.stages]
        assert names == ["start", "greedy_pass_1", "greedy_pass_2", "angular_ascent"]
        scores = [s[2] for s in res.stages]
        assert scores == sorted(scores) and res.score == scores[-1]
        assert res.score >= res.greedy.score

    def test_no_budget(self, toy_data):
        res = deform.radial_deformation(toy_data, np.zeros(4), max_seconds=0.0)
        assert [s[0] for s in res.stages] == ["start"]
        assert np.array_equal(res.factors, np.ones(4))

    def test_initial(self, toy_data):
        first = deform.radial_deformation(toy_data, np.zeros(4))
        again = deform.radial_deformation(toy_data, np.zeros(4), initial=first.factors)
        assert again.stages[0][2] == first.score and again.score >= first.score

import numpy as np
import pytest

from centricae import autoencoder as ae, cae, deform
from centricae.cae import CaeModel, SearchBudget
from centricae.geometry import SplitSpec, expand_inputs, generate_artificial, radii, split
from centricae.metrics import auroc

CFG = ae.TrainConfig(epochs=3, batch_size=64, seed=1)


@pytest.fixture(scope="module")
def data_split():
    return split(generate_artificial(3000, 0.02, seed=8), SplitSpec(0.8, seed=2))


@pytest.fixture(scope="module")
def base(data_split):
    train, test = data_split
    return cae.train_cae(train, test, cfg=CFG, init_seed=5)


class TestModel:
    def test_scores_are_output_radii(self, base, data_split):
        _, test = data_split
        expect = radii(base.net.forward(test.features), base.center)
        np.testing.assert_array_equal(cae.classify(base, test), expect)

    def test_center_coincident_zero_output(self):
        spec = ae.NetworkSpec((2, 2, 2), hidden_activation="identity", use_bias=False)
        net = ae.Network(spec, [np.zeros((2, 2)), np.zeros((2, 2))])
        m = CaeModel(net, np.zeros(2))
        assert cae.classify(m, np.array([[0.0, 0.0], [3.0, 1.0], [3.0, 1.0]])).tolist() == [0.0, 0.0, 0.0]

    def test_variants(self, base):
        assert base.variant == "cae"
        assert CaeModel(base.net, base.center, compression=0.5).variant == "cpae"
        assert CaeModel(base.net, base.center, expansion=3.0).variant == "eicae"
        assert CaeModel(base.net, base.center, factors=np.ones(15)).variant == "docae"
        assert CaeModel(base.net, base.center, 0.5, factors=np.ones(15)).variant == "docpae"
        with pytest.raises(ValueError):
            CaeModel(base.net, base.center, expansion=2.0, factors=np.ones(15))
        with pytest.raises(ValueError):
            CaeModel(base.net, base.center, expansion=0.5)
        with pytest.raises(ValueError):
            CaeModel(base.net, np.zeros(3))

    def test_identity_factors_score_equals_base(self, base, data_split):
        _, test = data_split
        m = CaeModel(base.net, base.center, factors=np.ones(15))
        np.testing.assert_array_equal(cae.classify(m, test), cae.classify(base, test))

    def test_round_trip(self, tmp_path, base, data_split):
        _, test = data_split
        m = CaeModel(base.net, base.center, compression=0.3, factors=np.linspace(0.5, 2, 15),
                     test_auroc=0.5, provenance={"note": "x"})
        m.save(tmp_path / "m.json")
        back = CaeModel.load(tmp_path / "m.json")
        assert np.array_equal(cae.classify(back, test), cae.classify(m, test))
        assert back.variant == "docpae" and back.provenance == {"note": "x"}


class TestCae:
    def test_reports_best_checkpoint(self, base, data_split):
        _, test = data_split
        assert base.test_auroc == max(base.provenance["test_auroc_trace"])
        assert cae.model_auroc(base, test) == base.test_auroc
        assert base.provenance["selection"].startswith("test-set")

    def test_zero_epochs_is_untrained(self, data_split):
        train, test = data_split
        m = cae.train_cae(train, test, cfg=ae.TrainConfig(epochs=0), init_seed=5)
        init = ae.init_network(ae.NetworkSpec.default(15), 5)
        assert np.array_equal(m.net.weights[0], init.weights[0])
        assert m.test_auroc == cae.model_auroc(m, test)

    def test_deterministic(self, base, data_split):
        train, test = data_split
        again = cae.train_cae(train, test, cfg=CFG, init_seed=5)
        assert again.provenance["test_auroc_trace"] == base.provenance["test_auroc_trace"]
        assert np.array_equal(cae.classify(again, test), cae.classify(base, test))


class TestCpae:
    def test_rejects_vector_compression(self, data_split):
        train, test = data_split
        with pytest.raises(ValueError, match="scalar"):
            cae.train_cpae(train, test, cfg=CFG, c_values=[np.full(15, 0.5)])

    def test_best_trial_dominates(self, data_split):
        train, test = data_split
        m = cae.train_cpae(train, test, cfg=CFG, budget=SearchBudget(trials=4, seed=3), init_seed=5)
        trials = m.provenance["search"]["trials"]
        assert len(trials) == 4
        assert all(m.test_auroc >= t["test_auroc"] for t in trials)
        assert m.compression in [t["c"] for t in trials]

    def test_tie_prefers_smaller_c(self, data_split):
        train, test = data_split
        zero = ae.TrainConfig(epochs=0)
        m = cae.train_cpae(train, test, cfg=zero, c_values=[0.7, 0.2, 0.5], init_seed=5)
        assert m.compression == 0.2

    def test_near_one_reproduces_cae(self, data_split):
        train, test = data_split
        plain = cae.train_cae(train, test, cfg=CFG, init_seed=5)
        near = cae.train_cpae(train, test, cfg=CFG, c_values=[1 - 1e-12], init_seed=5)
        for p, q in zip(plain.net.parameters(), near.net.parameters()):
            np.testing.assert_allclose(p, q, rtol=1e-6, atol=1e-9)
        assert near.provenance["test_auroc_trace"] == pytest.approx(plain.provenance["test_auroc_trace"], abs=1e-9)

    def test_zero_bias_compression_equals_expansion(self, data_split):
        train, test = data_split
        spec = ae.NetworkSpec.default(15, use_bias=False)
        c = 0.25
        center = np.zeros(15)
        compressed = cae.train_cpae(train, test, spec, CFG, c_values=[c], center=center, init_seed=5)
        plain = cae.train_cae(train, test, spec, CFG, center=center, init_seed=5)
        on_expanded = auroc(cae.classify(plain, expand_inputs(test, center, 1 / c)), test.labels)
        assert cae.model_auroc(compressed, test) == pytest.approx(on_expanded, abs=1e-3)

    def test_budget(self):
        b = SearchBudget(trials=5, seed=1)
        assert b.c_values() == SearchBudget(trials=5, seed=1).c_values()
        assert all(0.01 <= c <= 0.99 for c in b.c_values())
        g = SearchBudget(trials=3, c_range=(0.1, 0.4), method="grid").c_values()
        assert g == pytest.approx([0.1, 0.2, 0.4])
        for kw in ({"c_range": (0.0, 0.5)}, {"c_range": (0.5, 1.0)}, {"method": "tpe"}, {"e_range": (0.5, 2)}):
            with pytest.raises(ValueError):
                SearchBudget(**kw)


class TestExpansion:
    def test_sweep_dominates_base(self, base, data_split):
        _, test = data_split
        ei = cae.eicae_sweep(base, test, trials=20)
        sweep = ei.provenance["expansion_sweep"]
        assert sweep[0] == {"e": 1.0, "auroc": cae.model_auroc(base, test)}
        assert ei.test_auroc >= cae.model_auroc(base, test)
        assert ei.test_auroc == max(s["auroc"] for s in sweep)
        assert cae.model_auroc(ei, test) == ei.test_auroc

    def test_unit_expansion_is_base(self, base, data_split):
        _, test = data_split
        m = CaeModel(base.net, base.center, expansion=1.0)
        assert cae.model_auroc(m, test) == cae.model_auroc(base, test)

    def test_invalid(self, base, data_split):
        _, test = data_split
        with pytest.raises(ValueError):
            cae.eicae_sweep(base, test, e_range=(0.5, 2.0))


class TestOutputDeformation:
    def test_dominates_base(self, base, data_split):
        _, test = data_split
        do = cae.docae(base, test, ascent_cfg=deform.AscentConfig(epochs=3))
        assert do.variant == "docae"
        assert do.test_auroc >= cae.model_auroc(base, test)
        assert cae.model_auroc(do, test) == pytest.approx(do.test_auroc, abs=1e-12)
        assert do.provenance["output_deformation"]["supervised"] is True

    def test_rejects_expanded_model(self, base, data_split):
        _, test = data_split
        with pytest.raises(ValueError):
            cae.docae(CaeModel(base.net, base.center, expansion=2.0), test)


def test_vanilla_ae(data_split):
    train, test = data_split
    net, trace = cae.train_vanilla_ae(train, test, cfg=CFG)
    assert len(trace.train_loss) == 3 and trace.best_auroc == max(trace.test_auroc)

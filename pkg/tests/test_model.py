import math

import numpy as np
import pytest

from mcdre import tensor as tz
from mcdre.config import RunConfig
from mcdre.encoder import sinusoidal_encoding
from mcdre.errors import ConfigError, DataError
from mcdre.model import MultiAspectModel, substream
from mcdre.tensor import Tensor
from oracles import finite_difference
from reference import encoder_layer_np, softmax_np

LABELS3 = {"se": ["O", "B-Drug", "I-Drug"], "sy": ["NOUN", "VERB"], "do": ["O", "B-C"]}


def tiny_config(**kw):
    base = dict(
        d_model=8, n_heads=2, n_layers=2, dropout=0.0, cross_mode="none",
        active_aspects=("se", "sy", "do"), seed=11,
    )
    base.update(kw)
    return RunConfig(**base)


def frozen_model(cfg, vocab_size=9, labels=LABELS3, seed=0):
    rng = np.random.default_rng(seed)
    weights = rng.standard_normal((vocab_size, cfg.d_model)).astype(np.float32)
    labels = {a: labels[a] for a in cfg.active_aspects}
    return MultiAspectModel(cfg, vocab_size, labels, external_weights=weights)


class TestForward:
    def test_zero_heads_give_uniform_rows(self):
        model = frozen_model(tiny_config())
        for a in model.aspects:
            model.heads[a][0].data[...] = 0.0
            model.heads[a][1].data[...] = 0.0
        dists = model.forward([1, 2, 3])
        for a in model.aspects:
            np.testing.assert_allclose(dists[a].data, 1.0 / len(model.label_vocabs[a]), atol=1e-6)

    def test_rows_sum_to_one_random_inputs(self):
        model = frozen_model(tiny_config(cross_mode="kv"))
        rng = np.random.default_rng(0)
        for _ in range(20):
            ids = rng.integers(0, 9, size=rng.integers(1, 8))
            dists = model.forward(list(ids))
            for a in model.aspects:
                np.testing.assert_allclose(dists[a].data.sum(axis=1), 1.0, atol=1e-5)

    def test_empty_sequence_gives_empty_distributions(self):
        model = frozen_model(tiny_config())
        dists = model.forward([])
        for a in model.aspects:
            assert dists[a].shape == (0, len(model.label_vocabs[a]))

    def test_composed_pipeline_matches_reference(self):
        cfg = tiny_config(d_model=4, n_heads=1, n_layers=1, active_aspects=("se",),
                          embedding="external:mem")
        model = frozen_model(cfg, vocab_size=6, labels={"se": LABELS3["se"]})
        ids = [1, 3, 2]
        got = model.forward(ids)["se"].data

        p = {k: v.data.astype(np.float64) for k, v in model.params.items()}
        table = model.embedding.weights.data.astype(np.float64)
        x = table[ids] + sinusoidal_encoding(3, 4, np.float64)
        y = encoder_layer_np(
            x,
            [(p["se.layer0.head0.wq"], p["se.layer0.head0.wk"], p["se.layer0.head0.wv"])],
            p["se.layer0.attn_out.w"], p["se.layer0.attn_out.b"],
            p["se.layer0.ffn.w1"], p["se.layer0.ffn.b1"],
            p["se.layer0.ffn.w2"], p["se.layer0.ffn.b2"],
            (p["se.layer0.ln1.gain"], p["se.layer0.ln1.bias"]),
            (p["se.layer0.ln2.gain"], p["se.layer0.ln2.bias"]),
        )
        expect = softmax_np(y @ p["se.head.w"] + p["se.head.b"])
        np.testing.assert_allclose(got, expect, atol=1e-5)


class TestJointLoss:
    def test_perfect_one_hot_is_zero(self):
        model = frozen_model(tiny_config())
        dists = {
            "se": Tensor(np.eye(3, dtype=np.float32)),
            "sy": Tensor(np.array([[1, 0], [0, 1], [1, 0]], dtype=np.float32)),
            "do": Tensor(np.array([[1, 0], [0, 1], [1, 0]], dtype=np.float32)),
        }
        golds = {"se": np.array([0, 1, 2]), "sy": np.array([0, 1, 0]), "do": np.array([0, 1, 0])}
        assert model.joint_loss(dists, golds).item() == 0.0

    def test_uniform_heads_sum_to_three_log_c(self):
        labels = {a: [f"L{i}" for i in range(4)] for a in ("se", "sy", "do")}
        model = frozen_model(tiny_config(), labels=labels)
        for a in model.aspects:
            model.heads[a][0].data[...] = 0.0
            model.heads[a][1].data[...] = 0.0
        dists = model.forward([1, 2])
        golds = {a: np.array([0, 3]) for a in model.aspects}
        assert model.joint_loss(dists, golds).item() == pytest.approx(3 * math.log(4), abs=1e-5)

    def test_matches_per_task_oracle(self):
        model = frozen_model(tiny_config(cross_mode="attention"))
        rng = np.random.default_rng(5)
        ids = [2, 4, 1, 7]
        dists = model.forward(ids)
        golds = {a: rng.integers(0, len(model.label_vocabs[a]), size=4) for a in model.aspects}
        got = model.joint_loss(dists, golds).item()
        expect = 0.0
        for a in model.aspects:
            probs = dists[a].data
            expect += np.mean([-math.log(max(probs[r, g], 1e-12)) for r, g in enumerate(golds[a])])
        assert got == pytest.approx(expect, rel=1e-5)

    def test_missing_gold_for_active_aspect(self):
        model = frozen_model(tiny_config())
        dists = model.forward([1, 2])
        with pytest.raises(ConfigError):
            model.joint_loss(dists, {"se": np.array([0, 1])})

    def test_out_of_vocab_label_is_data_error(self):
        model = frozen_model(tiny_config())
        dists = model.forward([1])
        golds = {"se": np.array([99]), "sy": np.array([0]), "do": np.array([0])}
        with pytest.raises(DataError):
            model.joint_loss(dists, golds)


class TestPredict:
    def test_tie_break_picks_lowest_index(self):
        model = frozen_model(tiny_config())
        model.heads["se"][0].data[...] = 0.0
        model.heads["se"][1].data[...] = 0.0
        tags = model.predict_entity_tags([1, 2, 3])
        assert tags == ["O", "O", "O"]  # label index 0 everywhere

    def test_output_length_matches_input(self):
        model = frozen_model(tiny_config(cross_mode="ffn"))
        for L in (1, 4, 9):
            assert len(model.predict_entity_tags(list(range(1, L + 1)))) == L


class TestIndependenceAndCoupling:
    def test_no_exchange_keeps_encoders_independent(self):
        model = frozen_model(tiny_config(cross_mode="none"))
        ids = [1, 5, 3]
        before = model.forward(ids)["se"].data.copy()
        model.params["sy.layer0.head0.wq"].data += 1.0
        model.params["do.layer1.ffn.w1"].data -= 0.5
        after = model.forward(ids)["se"].data
        np.testing.assert_array_equal(before, after)

    @pytest.mark.parametrize("mode", ["kv", "attention", "ffn"])
    def test_cross_modes_couple_encoders(self, mode):
        model = frozen_model(tiny_config(cross_mode=mode))
        ids = [1, 5, 3]
        before = model.forward(ids)["se"].data.copy()
        model.params["sy.layer0.head0.wq"].data += 0.5
        after = model.forward(ids)["se"].data
        assert not np.array_equal(before, after)

    @pytest.mark.parametrize("mode", ["kv", "attention", "ffn"])
    def test_gradients_flow_across_encoders(self, mode):
        model = frozen_model(tiny_config(cross_mode=mode))
        ids = [1, 5, 3]
        dists = model.forward(ids)
        loss = tz.cross_entropy(dists["se"], [0, 1, 2])
        tz.backward(loss)
        sy_norm = float(np.abs(model.params["sy.layer0.head0.wq"].grad).sum())
        assert sy_norm > 0.0


class TestStructure:
    def test_deactivating_aspects_removes_parameters(self):
        model = frozen_model(tiny_config(active_aspects=("se", "sy")),
                             labels={"se": LABELS3["se"], "sy": LABELS3["sy"]})
        assert not any(name.startswith("do.") for name in model.params)
        assert any(name.startswith("sy.") for name in model.params)

    def test_kv_projection_width_tracks_active_aspects(self):
        three = frozen_model(tiny_config(cross_mode="kv"))
        assert three.params["se.layer0.head0.wk"].data.shape[0] == 2 * three.config.d_model
        two = frozen_model(tiny_config(cross_mode="kv", active_aspects=("se", "sy")),
                           labels={"se": LABELS3["se"], "sy": LABELS3["sy"]})
        assert two.params["se.layer0.head0.wk"].data.shape[0] == two.config.d_model

    def test_include_own_widens_kv_blocks(self):
        model = frozen_model(tiny_config(cross_mode="kv", include_own=True))
        assert model.params["se.layer0.head0.wk"].data.shape[0] == 3 * model.config.d_model

    def test_cross_layers_last_only(self):
        model = frozen_model(tiny_config(cross_mode="attention", cross_layers="last"))
        assert "se.layer0.cross.w" not in model.params
        assert "se.layer1.cross.w" in model.params

    def test_taps_exported_per_layer(self):
        model = frozen_model(tiny_config(cross_mode="attention"))
        model.forward([1, 2, 3])
        assert len(model.last_taps) == 2
        for taps in model.last_taps:
            assert set(taps) == {"se", "sy", "do"}
            for tap in taps.values():
                assert tap.attn_output is not None and tap.ffn_output is not None

    def test_same_seed_same_init(self):
        a = frozen_model(tiny_config(cross_mode="kv"))
        b = frozen_model(tiny_config(cross_mode="kv"))
        for name in a.params:
            np.testing.assert_array_equal(a.params[name].data, b.params[name].data)

    def test_se_init_independent_of_other_aspects(self):
        joint = frozen_model(tiny_config())
        solo = frozen_model(tiny_config(active_aspects=("se",)), labels={"se": LABELS3["se"]})
        for name, p in solo.params.items():
            np.testing.assert_array_equal(p.data, joint.params[name].data)


class TestGradientsSampled:
    @pytest.mark.parametrize("mode", ["none", "kv", "attention", "ffn"])
    def test_sampled_params_match_finite_differences(self, mode):
        cfg = tiny_config(d_model=4, n_heads=1, n_layers=2, cross_mode=mode, seed=2)
        model = frozen_model(cfg, vocab_size=6).astype(np.float64)
        ids = [1, 4, 2]
        golds = {a: np.array([0, 1, 0]) for a in model.aspects}

        def loss_value():
            return model.joint_loss(model.forward(ids), golds).item()

        model.zero_grad()
        loss = model.joint_loss(model.forward(ids), golds)
        tz.backward(loss)

        sampled = ["se.layer0.head0.wq", "sy.layer1.ffn.w1", "se.head.w", "do.layer0.ln1.gain"]
        if mode in ("attention", "ffn"):
            sampled.append("se.layer0.cross.w")
        for name in sampled:
            p = model.params[name]
            (fd,) = finite_difference(loss_value, [p], eps=1e-5)
            np.testing.assert_allclose(p.grad, fd, rtol=1e-3, atol=1e-7)


class TestStackDepth:
    @pytest.mark.parametrize("n_layers", [1, 2, 3])
    def test_output_shape_for_any_depth(self, n_layers):
        model = frozen_model(tiny_config(n_layers=n_layers, cross_mode="attention"))
        for L in (1, 5):
            dists = model.forward(list(range(1, L + 1)))
            assert dists["se"].shape == (L, len(model.label_vocabs["se"]))
        assert len(model.last_taps) == n_layers

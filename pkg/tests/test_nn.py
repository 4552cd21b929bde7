"""Tests for the MLP: losses, gradients, optimizers, training loop, I/O.

Gradient correctness is checked against a central finite-difference
oracle; optimizer single steps against hand-computed update formulas.
"""

import math

import numpy as np
import pytest

from entdetect.nn import (
    Adam,
    MlpModel,
    RMSProp,
    TrainConfig,
    asr,
    backward,
    bce,
    cce,
    fit,
    forward,
    glorot_uniform_init,
    load_model,
    make_optimizer,
    parse_topology,
    save_model,
    sigmoid,
    softmax,
)
from entdetect.nn import _mean_loss


def finite_difference_grads(model, inputs, targets, h=1e-6):
    """Central-difference gradient of the mean batch loss."""
    gw, gb = [], []
    for store in (model.weights, model.biases):
        for t in store:
            g = np.zeros_like(t)
            it = np.nditer(t, flags=["multi_index"])
            for _ in it:
                i = it.multi_index
                orig = t[i]
                t[i] = orig + h
                up = _mean_loss(model, inputs, targets)
                t[i] = orig - h
                dn = _mean_loss(model, inputs, targets)
                t[i] = orig
                g[i] = (up - dn) / (2 * h)
            (gw if store is model.weights else gb).append(g)
    return gw, gb


def max_rel_err(analytic, numeric):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


class TestInitAndForward:
    def test_glorot_shapes(self):
        m = glorot_uniform_init([16, 8, 1], seed=0)
        assert m.weights[0].shape == (8, 16)
        assert m.weights[1].shape == (1, 8)
        assert all(np.all(b == 0) for b in m.biases)

    def test_glorot_support_and_determinism(self):
        m1 = glorot_uniform_init([16, 8, 1], seed=5)
        m2 = glorot_uniform_init([16, 8, 1], seed=5)
        for w1, w2, (n_in, n_out) in zip(m1.weights, m2.weights, [(16, 8), (8, 1)]):
            bound = np.sqrt(6.0 / (n_in + n_out))
            assert np.max(np.abs(w1)) <= bound
            np.testing.assert_array_equal(w1, w2)

    @pytest.mark.parametrize(
        "topo",
        ["16:8:1", "16:256:128:16:1", "16:512:128:32:1", "16:512:128:32:4", "16:1"],
    )
    def test_parameter_count_formula(self, topo):
        sizes = parse_topology(topo)
        m = glorot_uniform_init(sizes, seed=1)
        assert m.num_parameters == sum(
            n * (sizes[i] + 1) for i, n in enumerate(sizes[1:])
        )

    def test_zero_weights_sigmoid_half(self):
        m = glorot_uniform_init([4, 1], seed=0)
        m.weights[0][:] = 0
        assert forward(m, np.zeros(4)) == pytest.approx(0.5)

    def test_single_linear_identity_passthrough(self):
        m = MlpModel([3, 3], [np.eye(3)], [np.zeros(3)], "softmax")
        x = np.array([0.3, -1.2, 2.0])
        np.testing.assert_allclose(forward(m, x), x)

    def test_relu_elementwise(self):
        m = MlpModel(
            [2, 2, 1],
            [np.eye(2), np.ones((1, 2))],
            [np.zeros(2), np.zeros(1)],
            "sigmoid",
        )
        # hidden activations relu([-3, 2]) = [0, 2] -> sigmoid(2)
        assert forward(m, np.array([-3.0, 2.0])) == pytest.approx(
            float(sigmoid(np.array([2.0]))[0])
        )


class TestLosses:
    def test_bce_analytic_values(self):
        assert bce(1.0, 0.5) == pytest.approx(math.log(2), abs=1e-12)
        assert bce(1.0, 1.0 - 1e-13) == pytest.approx(0.0, abs=1e-11)
        assert bce(0.0, 0.9) == pytest.approx(-math.log(0.1), abs=1e-12)

    def test_bce_nonnegative_and_clamped(self):
        rng = np.random.default_rng(0)
        vals = bce(rng.integers(0, 2, 100).astype(float), rng.random(100))
        assert np.all(vals >= 0)
        assert np.isfinite(bce(1.0, 0.0)) and np.isfinite(bce(0.0, 1.0))

    def test_softmax_uniform_cases(self):
        np.testing.assert_allclose(softmax(np.zeros(4)), 0.25, atol=1e-15)
        np.testing.assert_allclose(softmax(np.full(4, 3.7)), 0.25, atol=1e-15)

    def test_softmax_analytic(self):
        s = softmax(np.array([1.0, 0.0, 0.0, 0.0]))
        e = math.e
        np.testing.assert_allclose(
            s, [e / (e + 3), 1 / (e + 3), 1 / (e + 3), 1 / (e + 3)], atol=1e-12
        )

    def test_softmax_shift_invariance_and_sum(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            a = rng.standard_normal(4) * 10
            c = rng.standard_normal() * 50
            assert abs(softmax(a).sum() - 1.0) <= 1e-12
            np.testing.assert_allclose(softmax(a), softmax(a + c), atol=1e-12)

    def test_cce_analytic_values(self):
        assert cce(np.zeros(4), 0) == pytest.approx(math.log(4), abs=1e-12)
        assert cce(np.array([1.0, 0, 0, 0]), 0) == pytest.approx(
            math.log((math.e + 3) / math.e), abs=1e-12
        )
        assert cce(np.array([50.0, 0, 0, 0]), 0) == pytest.approx(0.0, abs=1e-9)

    def test_cce_batch_form(self):
        acts = np.array([[1.0, 0, 0, 0], [0, 0, 0, 0]])
        np.testing.assert_allclose(
            cce(acts, [0, 2]),
            [math.log((math.e + 3) / math.e), math.log(4)],
            atol=1e-12,
        )


class TestBackward:
    def test_fd_check_sigmoid_4_3_1(self):
        rng = np.random.default_rng(2)
        for trial in range(10):
            m = glorot_uniform_init([4, 3, 1], seed=trial)
            x = rng.standard_normal((8, 4))
            y = rng.integers(0, 2, 8).astype(float)
            assert max_rel_err(
                sum(backward(m, x, y), []), sum(finite_difference_grads(m, x, y), [])
            ) <= 1e-5

    def test_fd_check_softmax_16_8_4(self):
        rng = np.random.default_rng(3)
        for trial in range(3):
            m = glorot_uniform_init([16, 8, 4], seed=trial, output_kind="softmax")
            x = rng.standard_normal((6, 16))
            y = np.eye(4)[rng.integers(0, 4, 6)]
            assert max_rel_err(
                sum(backward(m, x, y), []), sum(finite_difference_grads(m, x, y), [])
            ) <= 1e-5

    def test_fd_check_deep_reduced_width(self):
        # reduced-width stand-in for the 4-hidden-layer experiment nets
        rng = np.random.default_rng(5)
        m = glorot_uniform_init([5, 7, 6, 4, 3, 1], seed=2)
        x = rng.standard_normal((5, 5))
        y = rng.integers(0, 2, 5).astype(float)
        assert max_rel_err(
            sum(backward(m, x, y), []), sum(finite_difference_grads(m, x, y), [])
        ) <= 1e-5

    def test_softmax_head_gradient_is_softmax_minus_onehot(self):
        m = MlpModel([4, 4], [np.eye(4)], [np.zeros(4)], "softmax")
        x = np.array([[0.5, -0.2, 1.0, 0.0]])
        y = np.array([[0.0, 1.0, 0.0, 0.0]])
        _, gb = backward(m, x, y)
        np.testing.assert_allclose(gb[0], softmax(x[0]) - y[0], atol=1e-12)

    def test_zero_gradient_on_saturated_correct_batch(self):
        m = MlpModel([2, 1], [np.full((1, 2), 50.0)], [np.zeros(1)], "sigmoid")
        x = np.ones((4, 2))
        y = np.ones(4)
        gw, gb = backward(m, x, y)
        assert np.all(gw[0] == 0) and np.all(gb[0] == 0)


class TestOptimizers:
    def test_adam_zero_gradient_fixpoint(self):
        opt = Adam()
        p = [np.array([1.0, -2.0])]
        out = opt.step(p, [np.zeros(2)])
        np.testing.assert_array_equal(out[0], p[0])

    def test_adam_first_step_hand_computed(self):
        opt = Adam()
        g = np.array([0.3, -4.0])
        out = opt.step([np.zeros(2)], [g])
        expected = -opt.lr * g / (np.abs(g) + opt.eps)
        np.testing.assert_allclose(out[0], expected, atol=1e-15)
        assert np.max(np.abs(out[0])) == pytest.approx(opt.lr, rel=1e-6)

    def test_rmsprop_first_step_hand_computed(self):
        opt = RMSProp()
        g = np.array([0.3, -4.0])
        out = opt.step([np.zeros(2)], [g])
        expected = -opt.lr * g / np.sqrt((1 - opt.decay) * g**2 + opt.eps)
        np.testing.assert_allclose(out[0], expected, atol=1e-15)

    def test_rmsprop_zero_gradient_fixpoint(self):
        opt = RMSProp()
        p = [np.array([1.0, -2.0])]
        out = opt.step(p, [np.zeros(2)])
        np.testing.assert_array_equal(out[0], p[0])

    def test_steps_deterministic(self):
        g = [np.array([0.5])]
        a1 = Adam().step([np.array([0.0])], g)
        a2 = Adam().step([np.array([0.0])], g)
        np.testing.assert_array_equal(a1[0], a2[0])
        with pytest.raises(ValueError):
            make_optimizer("sgd")


def toy_problem(n=100, seed=0):
    # separable blobs: label is sign of the first coordinate
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 4))
    y = (x[:, 0] > 0).astype(float)
    k = int(0.8 * n)
    return (x[:k], y[:k]), (x[k:], y[k:])


class TestFit:
    def test_updates_per_epoch(self):
        train, test = toy_problem()
        opt = Adam()
        cfg = TrainConfig(batch_size=30, max_epochs=2, patience=100, seed=1)
        fit(glorot_uniform_init([4, 3, 1], 0), train, test, cfg, opt)
        # ceil(80/30) = 3 updates per epoch, 2 epochs
        assert opt.t == 6

    def test_single_epoch_returns_epoch_one(self):
        train, test = toy_problem()
        cfg = TrainConfig(batch_size=40, max_epochs=1, patience=0, seed=1)
        _, metrics = fit(glorot_uniform_init([4, 3, 1], 0), train, test, cfg)
        assert metrics.best_epoch == 1
        assert metrics.epochs_run == 1

    def test_best_epoch_bookkeeping(self):
        train, test = toy_problem()
        cfg = TrainConfig(batch_size=20, max_epochs=40, patience=5, seed=2)
        best, metrics = fit(glorot_uniform_init([4, 6, 1], 3), train, test, cfg)
        assert metrics.best_epoch <= metrics.epochs_run
        assert metrics.final_asr == metrics.test_asrs[metrics.best_epoch - 1]
        # restored weights reproduce the recorded minimum test loss
        assert _mean_loss(best, test[0], test[1]) == pytest.approx(
            min(metrics.test_losses), abs=1e-12
        )

    def test_fit_deterministic(self):
        train, test = toy_problem()
        cfg = TrainConfig(batch_size=20, max_epochs=5, patience=10, seed=9)
        b1, m1 = fit(glorot_uniform_init([4, 3, 1], 7), train, test, cfg)
        b2, m2 = fit(glorot_uniform_init([4, 3, 1], 7), train, test, cfg)
        assert m1.train_losses == m2.train_losses
        assert m1.test_losses == m2.test_losses
        for w1, w2 in zip(b1.weights, b2.weights):
            np.testing.assert_array_equal(w1, w2)

    def test_batch_size_validation(self):
        train, test = toy_problem()
        with pytest.raises(ValueError):
            fit(
                glorot_uniform_init([4, 3, 1], 0),
                train,
                test,
                TrainConfig(batch_size=81, max_epochs=1),
            )
        with pytest.raises(ValueError):
            TrainConfig(max_epochs=0)

    def test_learns_toy_problem(self):
        train, test = toy_problem(400, seed=4)
        cfg = TrainConfig(batch_size=40, max_epochs=120, patience=20, seed=3)
        best, _ = fit(glorot_uniform_init([4, 8, 1], 11), train, test, cfg, "rmsprop")
        assert asr(best, test) >= 0.9


class TestAsr:
    def test_constant_output_on_balanced_set(self):
        m = MlpModel([2, 1], [np.zeros((1, 2))], [np.array([5.0])], "sigmoid")
        x = np.zeros((10, 2))
        y = np.array([1, 1, 1, 1, 1, 0, 0, 0, 0, 0], dtype=float)
        assert asr(m, (x, y)) == 0.5

    def test_confident_model_on_all_entangled(self):
        m = MlpModel([2, 1], [np.zeros((1, 2))], [np.array([5.0])], "sigmoid")
        x = np.zeros((10, 2))
        assert asr(m, (x, np.ones(10))) == 1.0

    def test_categorical_constant_ties_to_lowest(self):
        m = MlpModel([2, 4], [np.zeros((4, 2))], [np.zeros(4)], "softmax")
        x = np.zeros((8, 2))
        y = np.eye(4)[[0, 0, 1, 1, 2, 2, 3, 3]]
        assert asr(m, (x, y)) == 0.25


class TestCheckpointIO:
    def test_roundtrip_bit_exact(self, tmp_path):
        m = glorot_uniform_init([16, 8, 4], seed=13, output_kind="softmax")
        m.biases[0][:] = np.pi  # non-trivial bias payload
        p1, p2 = tmp_path / "m1.ckpt", tmp_path / "m2.ckpt"
        save_model(m, p1)
        back = load_model(p1)
        assert back.topology == m.topology and back.output_kind == "softmax"
        for a, b in zip(m.weights + m.biases, back.weights + back.biases):
            np.testing.assert_array_equal(a, b)
        save_model(back, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_rejects_malformed(self, tmp_path):
        from entdetect.stategen import FormatError

        p = tmp_path / "bad.ckpt"
        p.write_text("junk\n")
        with pytest.raises(FormatError):
            load_model(p)

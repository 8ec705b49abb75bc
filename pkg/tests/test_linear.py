import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rejectron import _kernels, losses
from rejectron.linear import (
    Branch,
    LinearModel,
    Prediction,
    StepSchedule,
    Variant,
    dral_step,
    dsal_step,
    dsol_step,
    init_model,
    predict,
)
from rejectron.losses import HyperParams
from rejectron.query import SeededRng


def test_init_and_predict():
    m = init_model(3, Variant.DSAL)
    assert np.array_equal(m.w, np.zeros(3)) and m.rho == 1.0
    assert predict(m, [1, 2, 3]) is Prediction.REJECT
    m = LinearModel(np.array([2.0, 0.0]), 1.0)
    assert predict(m, [1, 0]) is Prediction.POSITIVE
    assert predict(m, [-1, 0]) is Prediction.NEGATIVE
    assert predict(m, [0.5, 0]) is Prediction.REJECT  # |f| = rho counts as reject


def test_dral_first_step_hand_trace():
    m, out = dral_step(init_model(2), [1.0, 0.0], 1, 0.25, 0.1)
    assert np.allclose(m.w, [0.025, 0.0]) and m.rho == pytest.approx(0.975)
    assert out.queried and out.updated and out.branch is Branch.UPPER_RAMP
    assert out.loss_d == 0.25


def test_dral_overlap_takes_upper_branch():
    m, out = dral_step(init_model(2), [1.0, 0.0], -1, 0.25, 0.1)
    assert np.allclose(m.w, [-0.025, 0.0])
    assert out.branch is Branch.UPPER_RAMP


def test_dral_lower_branch():
    model = LinearModel(np.array([-1.5, 0.0]), 1.0)
    m, out = dral_step(model, [1.0, 0.0], 1, 0.25, 0.1)
    assert out.branch is Branch.LOWER_RAMP
    assert np.allclose(m.w, [-1.5 + 0.075, 0.0]) and m.rho == pytest.approx(1.075)


def test_dral_outside_band_returns_same_object():
    model = LinearModel(np.array([5.0]), 1.0)
    m, out = dral_step(model, [1.0], 1, 0.25, 0.1)
    assert m is model and not out.queried and not out.updated


def test_dral_projection():
    model = LinearModel(np.array([0.0]), 0.01)
    m, out = dral_step(model, [0.5], 1, 0.25, 0.1)
    assert m.rho == 0.0 and out.projected


def test_dsal_forced_step():
    hp = HyperParams(0.25, 2.0)
    m, out = dsal_step(init_model(1), [1.0], 1, hp, 0.1, SeededRng(0), force_query=True)
    assert m.w[0] == pytest.approx(0.0419974, abs=1e-7)
    assert m.rho == pytest.approx(1.0209987, abs=1e-7)
    assert out.branch is Branch.GRADIENT
    assert out.probability == pytest.approx(0.4199743, abs=1e-7)


def test_dsal_unqueried_keeps_model_and_consumes_one_draw():
    hp = HyperParams(0.25, 2.0)
    rng = SeededRng(5)
    model = init_model(2)
    m, out = dsal_step(model, [1.0, 1.0], 1, hp, 0.1, rng, force_query=False)
    assert m is model and not out.updated and out.grad_norm_sq > 0
    ref = SeededRng(5)
    ref.uniform()
    assert rng.uniform() == ref.uniform()


def test_dsol_always_updates():
    hp = HyperParams(0.1, 2.0)
    m = init_model(2)
    for x, y in [([1, 0], 1), ([0, 1], -1), ([10, 10], 1)]:
        m2, out = dsol_step(m, x, y, hp, 0.1)
        assert out.queried and out.updated and out.probability == 1.0
        m = m2


def test_label_and_shape_validation():
    with pytest.raises(ValueError):
        dral_step(init_model(2), [1.0, 0.0], 0, 0.25, 0.1)
    with pytest.raises(ValueError):
        dral_step(init_model(2), [1.0], 1, 0.25, 0.1)
    with pytest.raises(ValueError):
        LinearModel(np.array([np.nan]))


def test_schedule():
    s = StepSchedule()
    assert s.eta(0) == 0.1 and s.eta(10**7) == 1e-3
    assert np.allclose(s.etas(3), [0.1, 0.09999, 0.09998])
    with pytest.raises(ValueError):
        StepSchedule(0.1, 1e-3, 0.0).etas(200)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    st.lists(st.floats(-1, 1), min_size=3, max_size=3),
    st.floats(0, 2),
    st.sampled_from([-1, 1]),
    st.sampled_from([0.1, 0.25, 0.4]),
    st.floats(0.5, 4),
)
def test_small_gradient_step_does_not_increase_loss(w, x, rho, y, d, gamma):
    """With eta <= 1/beta a descent step cannot raise the loss on its own example."""
    hp = HyperParams(d, gamma)
    x = np.array(x)
    R = max(np.linalg.norm(x), 1e-12)
    eta = 1.0 / losses.smoothness_constant(gamma, R)
    model = LinearModel(np.array(w), rho)
    before = losses.double_sigmoid_loss(y * model.decision_value(x), model.rho, hp)
    m2, out = dsol_step(model, x, y, hp, eta)
    after = losses.double_sigmoid_loss(y * m2.decision_value(x), m2.rho, hp)
    assert after <= before + 1e-12


@pytest.mark.parametrize("variant,name", [(_kernels.DRAL, "dral"), (_kernels.DSAL, "dsal"), (_kernels.DSOL, "dsol")])
def test_step_api_replays_run_loop(variant, name):
    rng = SeededRng(11)
    X = rng.normal((40, 4))
    y = np.where(X[:, 0] + 0.3 * X[:, 1] > 0, 1.0, -1.0)
    idx = SeededRng(12).integers(40, 300)
    u = SeededRng(13).uniforms(300)
    etas = StepSchedule().etas(300)
    hp = HyperParams(0.25, 2.0)
    f, rho, prob, queried, branch, w, final_rho, _ = _kernels.run_linear(X, y, idx, u, etas, 0.25, 2.0, variant, 1.0)

    class Replay:
        """Feeds the pre-drawn uniforms back one at a time."""

        def __init__(self, values):
            self.values = iter(values)

        def uniform(self):
            return float(next(self.values))

    model, replay = init_model(4), Replay(u)
    for t in range(300):
        x, label = X[idx[t]], int(y[idx[t]])
        assert model.decision_value(x) == pytest.approx(f[t], abs=1e-12)
        if name == "dral":
            model, out = dral_step(model, x, label, 0.25, etas[t])
        elif name == "dsal":
            model, out = dsal_step(model, x, label, hp, etas[t], replay)
        else:
            model, out = dsol_step(model, x, label, hp, etas[t])
        assert out.queried == queried[t]
    assert np.allclose(model.w, w, atol=1e-12) and model.rho == pytest.approx(final_rho, abs=1e-12)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rejectron.kernel import (
    KernelModel,
    KernelSpec,
    kernel_dral_step,
    kernel_dsal_step,
    kernel_eval,
    kernel_predict_value,
)
from rejectron.linear import Branch, LinearModel, dral_step, dsal_step
from rejectron.losses import HyperParams
from rejectron.query import SeededRng

vectors = st.lists(st.floats(-3, 3), min_size=3, max_size=3).map(np.array)


def test_kernel_examples():
    x, z = np.array([1.0, 2.0]), np.array([3.0, -1.0])
    assert kernel_eval(KernelSpec("linear"), x, z) == 1.0
    assert kernel_eval(KernelSpec("polynomial", degree=3, coef0=1.0), x, z) == 8.0
    assert kernel_eval(KernelSpec("rbf", width=0.5), x, z) == pytest.approx(np.exp(-0.5 * 13))
    assert kernel_eval(KernelSpec("rbf"), x, x) == 1.0


@given(vectors, vectors, st.sampled_from(["linear", "polynomial", "rbf"]))
def test_kernel_symmetry(x, z, kind):
    spec = KernelSpec(kind)
    assert kernel_eval(spec, x, z) == pytest.approx(kernel_eval(spec, z, x), rel=1e-12, abs=1e-12)
    if kind == "rbf":
        assert 0.0 <= kernel_eval(spec, x, z) <= 1.0


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("polynomial", degree=0)
    with pytest.raises(ValueError):
        KernelSpec("rbf", width=0.0)
    with pytest.raises(ValueError):
        KernelSpec("sigmoid")
    with pytest.raises(ValueError):
        kernel_eval(KernelSpec(), [1.0], [1.0, 2.0])


def test_predict_value_sums_supports():
    spec = KernelSpec("linear")
    m = KernelModel(spec, 1.0, ((np.array([1.0, 0.0]), 0.5), (np.array([0.0, 1.0]), -2.0)))
    assert kernel_predict_value(m, [2.0, 3.0]) == pytest.approx(1.0 - 6.0)
    assert kernel_predict_value(KernelModel(), [1.0]) == 0.0
    with pytest.raises(ValueError):
        KernelModel(spec, 1.0, ((np.array([1.0]), 0.0),))


def test_kernel_dral_hand_trace():
    m, out = kernel_dral_step(KernelModel(KernelSpec("linear")), [1.0, 0.0], 1, 0.25, 0.1)
    assert out.branch is Branch.UPPER_RAMP and m.rho == pytest.approx(0.975)
    assert len(m.supports) == 1 and m.supports[0][1] == pytest.approx(0.025)
    assert kernel_predict_value(m, [1.0, 0.0]) == pytest.approx(0.025)


def test_kernel_dsal_skips_zero_coefficients():
    model = KernelModel(KernelSpec("rbf"))
    m, out = kernel_dsal_step(model, [1.0], 1, HyperParams(0.25), 0.1, SeededRng(0), force_query=False)
    assert m is model and not out.updated
    # a tiny gradient that underflows to zero coefficient only moves rho
    far = KernelModel(KernelSpec("linear"), 0.0, ((np.array([1.0]), 1e6),))
    m, out = kernel_dsal_step(far, [1.0], 1, HyperParams(0.25, 8.0), 0.1, SeededRng(0), force_query=True)
    assert out.updated and len(m.supports) == 1


def test_linear_kernel_replays_primal_steps():
    rng = SeededRng(3)
    X = rng.normal((60, 3))
    y = np.where(X @ np.array([1.0, -0.5, 0.2]) > 0, 1, -1)
    hp = HyperParams(0.25, 2.0)
    lin, ker = LinearModel(np.zeros(3)), KernelModel(KernelSpec("linear"))
    lin_s, ker_s = LinearModel(np.zeros(3)), KernelModel(KernelSpec("linear"))
    r1, r2 = SeededRng(9), SeededRng(9)
    for x, label in zip(X, y):
        lin, _ = dral_step(lin, x, int(label), 0.25, 0.1)
        ker, _ = kernel_dral_step(ker, x, int(label), 0.25, 0.1)
        lin_s, a = dsal_step(lin_s, x, int(label), hp, 0.1, r1)
        ker_s, b = kernel_dsal_step(ker_s, x, int(label), hp, 0.1, r2)
        assert a.queried == b.queried
        assert lin.decision_value(x) == pytest.approx(kernel_predict_value(ker, x), abs=1e-9)
        assert lin_s.decision_value(x) == pytest.approx(kernel_predict_value(ker_s, x), abs=1e-9)
    assert lin.rho == pytest.approx(ker.rho) and lin_s.rho == pytest.approx(ker_s.rho)

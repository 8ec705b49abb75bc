"""Linear online learners with a reject option.

Three learners share one model type:

* DRAL queries deterministically inside the band ``rho - 1 <= |f| <= rho + 1``
  and takes a subgradient step on the double ramp loss.
* DSAL queries with probability ``4 sigma(u)(1 - sigma(u))`` and takes a
  gradient step on the double sigmoid loss.
* DSOL is DSAL without the query rule: it asks for every label.

All step functions are pure: they return a new model and leave the input
untouched. When nothing changes, the input model object itself is returned.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import losses
from .losses import HyperParams
from .query import dral_query, dsal_query_probability, sample_query


class Prediction(Enum):
    POSITIVE = 1
    NEGATIVE = -1
    REJECT = 0


class Branch(Enum):
    NONE = "none"
    UPPER_RAMP = "upper-ramp"
    LOWER_RAMP = "lower-ramp"
    GRADIENT = "gradient"


class Variant(Enum):
    DRAL = "dral"
    DSAL = "dsal"
    DSOL = "dsol"


@dataclass(frozen=True)
class LinearModel:
    w: np.ndarray
    rho: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1:
            raise ValueError("w must be a vector")
        if not np.all(np.isfinite(w)):
            raise ValueError("w must be finite")
        if self.rho < 0:
            raise ValueError("rho must be non-negative")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def dim(self):
        return self.w.shape[0]

    def decision_value(self, x):
        x = _as_vector(x, self.dim)
        return float(np.dot(self.w, x))


@dataclass(frozen=True)
class StepSchedule:
    """Linearly decaying step size ``max(floor, eta0 - decrement * t)``, t from 0."""

    eta0: float = 0.1
    decrement: float = 1e-5
    floor: float = 1e-3

    def __post_init__(self):
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if self.decrement < 0 or self.floor < 0:
            raise ValueError("decrement and floor must be non-negative")

    @classmethod
    def constant(cls, eta):
        return cls(eta0=eta, decrement=0.0, floor=0.0)

    def eta(self, t):
        return max(self.floor, self.eta0 - self.decrement * t)

    def etas(self, T):
        out = np.maximum(self.floor, self.eta0 - self.decrement * np.arange(T, dtype=float))
        if np.any(out <= 0):
            raise ValueError(f"step size reaches zero before trial {T}; raise eta floor")
        return out


@dataclass(frozen=True)
class StepOutcome:
    queried: bool
    updated: bool
    branch: Branch
    loss_d: float
    loss_surrogate: float
    grad_norm_sq: float = 0.0
    probability: float = 1.0
    projected: bool = False

    def __post_init__(self):
        if self.updated and not self.queried:
            raise ValueError("an update requires a query")


def _as_vector(x, dim):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != dim:
        raise ValueError(f"expected a feature vector of length {dim}, got shape {x.shape}")
    return x


def _check_label(y):
    if y not in (-1, 1):
        raise ValueError(f"label must be -1 or +1, got {y!r}")


def init_model(dim, variant=Variant.DRAL):
    """Zero weights and unit rejection width, for every variant."""
    Variant(variant)
    if int(dim) < 1:
        raise ValueError("dimension must be at least 1")
    return LinearModel(np.zeros(int(dim)), 1.0)


def predict(model, x):
    f = model.decision_value(x)
    if f > model.rho:
        return Prediction.POSITIVE
    if f < -model.rho:
        return Prediction.NEGATIVE
    return Prediction.REJECT


def _project(rho):
    if rho < 0.0:
        return 0.0, True
    return rho, False


def dral_step(model, x, y, d, eta, rng=None):
    """One DRAL trial. ``rng`` is accepted for signature parity and unused."""
    x = _as_vector(x, model.dim)
    _check_label(y)
    f = float(np.dot(model.w, x))
    yf = y * f
    loss_d = float(losses.zero_d_one_loss(yf, model.rho, d))
    surrogate = float(losses.double_ramp_loss(yf, model.rho, d))
    if not dral_query(f, model.rho):
        return model, StepOutcome(False, False, Branch.NONE, loss_d, surrogate, probability=0.0)

    rho = model.rho
    if rho - 1.0 <= yf <= rho + 1.0:
        w = model.w + (eta * d * y) * x
        rho = rho - eta * d
        branch = Branch.UPPER_RAMP
    elif -rho - 1.0 <= yf <= -rho + 1.0:
        w = model.w + (eta * (1.0 - d) * y) * x
        rho = rho + eta * (1.0 - d)
        branch = Branch.LOWER_RAMP
    else:
        return model, StepOutcome(True, False, Branch.NONE, loss_d, surrogate)
    rho, projected = _project(rho)
    return LinearModel(w, rho), StepOutcome(True, True, branch, loss_d, surrogate, projected=projected)


def _gradient_step(model, x, y, hp, eta, queried, probability):
    f = float(np.dot(model.w, x))
    yf = y * f
    g_margin, g_rho = losses.ds_gradient(yf, model.rho, hp)
    grad_norm_sq = g_margin**2 * float(np.dot(x, x)) + g_rho**2
    loss_d = float(losses.zero_d_one_loss(yf, model.rho, hp.d))
    surrogate = float(losses.double_sigmoid_loss(yf, model.rho, hp))
    if not queried:
        return model, StepOutcome(False, False, Branch.NONE, loss_d, surrogate, grad_norm_sq, probability)
    w = model.w - (eta * y * g_margin) * x
    rho, projected = _project(model.rho - eta * g_rho)
    outcome = StepOutcome(True, True, Branch.GRADIENT, loss_d, surrogate, grad_norm_sq, probability, projected)
    return LinearModel(w, rho), outcome


def dsal_step(model, x, y, hp, eta, rng, force_query=None):
    """One DSAL trial.

    One uniform is always drawn from ``rng`` so that streams stay aligned.
    ``force_query`` overrides the Bernoulli outcome (the draw still happens).
    """
    x = _as_vector(x, model.dim)
    _check_label(y)
    f = float(np.dot(model.w, x))
    p = float(dsal_query_probability(f, model.rho, hp.gamma))
    z = sample_query(p, rng)
    if force_query is not None:
        z = bool(force_query)
    return _gradient_step(model, x, y, hp, eta, z, p)


def dsol_step(model, x, y, hp, eta):
    """One DSOL trial: always query, always take the gradient step."""
    x = _as_vector(x, model.dim)
    _check_label(y)
    return _gradient_step(model, x, y, hp, eta, True, 1.0)


__all__ = [
    "Branch",
    "HyperParams",
    "LinearModel",
    "Prediction",
    "StepOutcome",
    "StepSchedule",
    "Variant",
    "dral_step",
    "dsal_step",
    "dsol_step",
    "init_model",
    "predict",
]

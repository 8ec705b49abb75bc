"""Kernelized DRAL and DSAL over a growing support set.

The classifier is ``f(x) = sum_i a_i K(x_i, x)``. A trial that does not
update the model contributes a zero coefficient, and zero coefficients are
never stored, so the support set only grows on updates. There is no budget
or pruning: memory is linear in the number of updates.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import losses
from .linear import Branch, StepOutcome, _check_label
from .query import dral_query, dsal_query_probability, sample_query


class KernelKind(Enum):
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"
    RBF = "rbf"


@dataclass(frozen=True)
class KernelSpec:
    """``linear``: x.x'; ``polynomial``: (x.x' + coef0)^degree; ``rbf``: exp(-width ||x - x'||^2)."""

    kind: KernelKind = KernelKind.LINEAR
    degree: int = 2
    coef0: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if self.kind is KernelKind.POLYNOMIAL and (int(self.degree) != self.degree or self.degree < 1):
            raise ValueError("polynomial degree must be an integer >= 1")
        if self.kind is KernelKind.RBF and not self.width > 0:
            raise ValueError("rbf width must be positive")
        object.__setattr__(self, "degree", int(self.degree))

    @property
    def code(self):
        return {KernelKind.LINEAR: 0, KernelKind.POLYNOMIAL: 1, KernelKind.RBF: 2}[self.kind]


@dataclass(frozen=True)
class KernelModel:
    kernel: KernelSpec = field(default_factory=KernelSpec)
    rho: float = 1.0
    supports: tuple = ()

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be non-negative")
        if any(a == 0 for _, a in self.supports):
            raise ValueError("zero coefficients are not stored")

    def append(self, x, a, rho):
        return KernelModel(self.kernel, rho, self.supports + ((x, float(a)),))

    def with_rho(self, rho):
        return KernelModel(self.kernel, rho, self.supports)


def kernel_eval(spec, x, x_prime):
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    if x.shape != x_prime.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {x_prime.shape}")
    if spec.kind is KernelKind.LINEAR:
        return float(np.dot(x, x_prime))
    if spec.kind is KernelKind.POLYNOMIAL:
        return float((np.dot(x, x_prime) + spec.coef0) ** spec.degree)
    diff = x - x_prime
    return float(np.exp(-spec.width * np.dot(diff, diff)))


def kernel_predict_value(model, x):
    x = np.asarray(x, dtype=float)
    return float(sum(a * kernel_eval(model.kernel, xi, x) for xi, a in model.supports))


def _project(rho):
    return (0.0, True) if rho < 0.0 else (rho, False)


def kernel_dral_step(model, x, y, d, eta):
    x = np.asarray(x, dtype=float)
    _check_label(y)
    f = kernel_predict_value(model, x)
    yf = y * f
    loss_d = float(losses.zero_d_one_loss(yf, model.rho, d))
    surrogate = float(losses.double_ramp_loss(yf, model.rho, d))
    if not dral_query(f, model.rho):
        return model, StepOutcome(False, False, Branch.NONE, loss_d, surrogate, probability=0.0)
    rho = model.rho
    if rho - 1.0 <= yf <= rho + 1.0:
        a, rho, branch = eta * d * y, rho - eta * d, Branch.UPPER_RAMP
    elif -rho - 1.0 <= yf <= -rho + 1.0:
        a, rho, branch = eta * (1.0 - d) * y, rho + eta * (1.0 - d), Branch.LOWER_RAMP
    else:
        return model, StepOutcome(True, False, Branch.NONE, loss_d, surrogate)
    rho, projected = _project(rho)
    return model.append(x, a, rho), StepOutcome(True, True, branch, loss_d, surrogate, projected=projected)


def kernel_dsal_step(model, x, y, hp, eta, rng, force_query=None):
    """Kernel DSAL trial; the gradient norm uses K(x, x) in place of ||x||^2."""
    x = np.asarray(x, dtype=float)
    _check_label(y)
    f = kernel_predict_value(model, x)
    p = float(dsal_query_probability(f, model.rho, hp.gamma))
    z = sample_query(p, rng)
    if force_query is not None:
        z = bool(force_query)
    yf = y * f
    g_margin, g_rho = losses.ds_gradient(yf, model.rho, hp)
    grad_norm_sq = g_margin**2 * kernel_eval(model.kernel, x, x) + g_rho**2
    loss_d = float(losses.zero_d_one_loss(yf, model.rho, hp.d))
    surrogate = float(losses.double_sigmoid_loss(yf, model.rho, hp))
    if not z:
        return model, StepOutcome(False, False, Branch.NONE, loss_d, surrogate, grad_norm_sq, p)
    a = -(eta * y * g_margin)
    rho, projected = _project(model.rho - eta * g_rho)
    new = model.append(x, a, rho) if a != 0.0 else model.with_rho(rho)
    return new, StepOutcome(True, True, Branch.GRADIENT, loss_d, surrogate, grad_norm_sq, p, projected)

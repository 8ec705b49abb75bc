"""Closed-form constants and right-hand sides of the DRAL/DSAL guarantees.

Notation follows the usual mistake-bound setup: a comparator ``(w*, rho*)``
with ``||w*|| <= W``, instances with ``||x|| <= R``, a fixed step size
``eta`` and rejection cost ``d``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .losses import smoothness_constant


class Outcome(Enum):
    NONE = 0
    C = 1
    R1 = 2
    R2 = 3
    M = 4


class BoundPreconditionError(ValueError):
    """Raised when an input tuple violates the hypothesis of a bound."""


@dataclass(frozen=True)
class BoundInputs:
    W: float
    R: float
    rho_star: float
    d: float
    eta: float
    gamma: float = None

    def __post_init__(self):
        if not (self.W > 0 and self.R > 0):
            raise BoundPreconditionError("W and R must be positive")
        if self.rho_star < 0:
            raise BoundPreconditionError("rho_star must be non-negative")
        if not 0 < self.d < 0.5:
            raise BoundPreconditionError("d must lie in (0, 0.5)")
        if not self.eta > 0:
            raise BoundPreconditionError("eta must be positive")


@dataclass(frozen=True)
class BoundConstants:
    m1: float
    m21: float
    m22: float
    m: float
    alpha_reject: float
    alpha_mistake: float
    beta: float = None


def lemma8_m1(rho, d, W, R):
    """``min(1/rho, 2 / (d (1 + rho + W R)))``; undefined for ``rho <= 0``."""
    if rho <= 0:
        raise BoundPreconditionError("m1 needs rho > 0 (it contains 1/rho)")
    return min(1.0 / rho, 2.0 / (d * (1.0 + rho + W * R)))


def lemma9_m21_m22(rho, d, W, R):
    """The pair ``(m21, m22)``; requires ``W R > rho``."""
    WR = W * R
    if not WR > rho:
        raise BoundPreconditionError(f"need W*R > rho, got W*R={WR!r}, rho={rho!r}")
    gap = WR - rho
    m21 = min(
        2.0 * (2.0 * rho + 1.0) / ((1.0 + d) * (WR + rho + 1.0)),
        (1.0 + d * gap) / ((1.0 + d) * (gap + 1.0)),
    )
    m22 = max(
        2.0 / ((WR + rho + 1.0) * (1.0 - d)),
        ((2.0 - d) * gap + 1.0) / ((gap + 1.0) * gap * (1.0 - d)),
    )
    return m21, m22


def _alphas(inp, m21, m22):
    eta, d, R2 = inp.eta, inp.d, inp.R**2
    lower_term = m22 * (1.0 + eta**2 * (1.0 - d) ** 2 * (R2 + 1.0) + 2.0 * eta * (1.0 - d)) / (
        2.0 * m21 * eta * (1.0 + d)
    )
    reject_term = (1.0 + eta**2 * d**2 * (R2 + 1.0) + 2.0 * eta * d) / (2.0 * eta * d)
    mistake_term = (eta * d * (R2 + 1.0) + 2.0) / 2.0
    return max(reject_term, lower_term), max(mistake_term, lower_term)


def bound_constants(inp):
    m1 = lemma8_m1(inp.rho_star, inp.d, inp.W, inp.R)
    m21, m22 = lemma9_m21_m22(inp.rho_star, inp.d, inp.W, inp.R)
    alpha_reject, alpha_mistake = _alphas(inp, m21, m22)
    beta = smoothness_constant(inp.gamma, inp.R) if inp.gamma is not None else None
    return BoundConstants(m1, m21, m22, min(m1, m22), alpha_reject, alpha_mistake, beta)


def _complexity(alpha, W, rho):
    return alpha**2 * W**2 + (1.0 - alpha * rho) ** 2


def theorem2_bounds(inp):
    """Separable case: ``(reject_rhs, mistake_rhs)`` on queried trials."""
    m21, m22 = lemma9_m21_m22(inp.rho_star, inp.d, inp.W, inp.R)
    a_rej, a_mis = _alphas(inp, m21, m22)
    return _complexity(a_rej, inp.W, inp.rho_star), _complexity(a_mis, inp.W, inp.rho_star)


def theorem3_bounds(inp, comparator_loss_sum):
    """Agnostic case: the separable-case terms plus ``(2 eta alpha / m) * sum L_dr(comparator)``."""
    if comparator_loss_sum < 0:
        raise BoundPreconditionError("comparator loss sum must be non-negative")
    c = bound_constants(inp)
    out = []
    for alpha in (c.alpha_reject, c.alpha_mistake):
        out.append(_complexity(alpha, inp.W, inp.rho_star) + 2.0 * inp.eta * alpha / c.m * comparator_loss_sum)
    return tuple(out)


def classify_outcome(yf, rho):
    """Region of ``yf`` relative to ``rho``; shared endpoints resolve C > R1 > R2 > M."""
    if rho <= yf <= rho + 1.0:
        return Outcome.C
    if rho - 1.0 <= yf < rho:
        return Outcome.R1
    if -rho <= yf <= -rho + 1.0:
        return Outcome.R2
    if -rho - 1.0 <= yf < -rho:
        return Outcome.M
    return Outcome.NONE


def classify_outcomes(yf, rho):
    """Vectorized :func:`classify_outcome` returning ``Outcome`` values as int8 codes."""
    yf = np.asarray(yf, dtype=float)
    rho = np.asarray(rho, dtype=float)
    conds = [
        (rho <= yf) & (yf <= rho + 1.0),
        (rho - 1.0 <= yf) & (yf < rho),
        (-rho <= yf) & (yf <= -rho + 1.0),
        (-rho - 1.0 <= yf) & (yf < -rho),
    ]
    codes = [Outcome.C.value, Outcome.R1.value, Outcome.R2.value, Outcome.M.value]
    return np.select(conds, codes, default=Outcome.NONE.value).astype(np.int8)


@dataclass
class OutcomeCounters:
    C: int = 0
    R1: int = 0
    R2: int = 0
    M: int = 0
    queried: int = 0

    @classmethod
    def from_codes(cls, codes, queried):
        codes = np.asarray(codes)[np.asarray(queried, dtype=bool)]
        counts = np.bincount(codes, minlength=5)
        return cls(int(counts[1]), int(counts[2]), int(counts[3]), int(counts[4]), int(np.sum(queried)))

    @property
    def rejected(self):
        return self.R1 + self.R2


def local_regret(grad_norm_sq_series):
    """Sum of squared gradient norms over every trial, queried or not."""
    g = np.asarray(grad_norm_sq_series, dtype=float)
    if np.any(g < 0):
        raise ValueError("squared norms must be non-negative")
    return float(np.sum(g))


def theorem6_step_size(gamma, R):
    """The step size ``5 / (gamma^2 (R^2 + 1))`` under which the regret bound holds."""
    return 5.0 / (gamma**2 * (R**2 + 1.0))


def theorem6_rhs(gamma, R, T):
    """Local regret bound ``(4 gamma^2 / 5)(R^2 + 1)(T + 1)``."""
    if gamma <= 0 or R < 0 or T < 1:
        raise ValueError("need gamma > 0, R >= 0, T >= 1")
    return 4.0 * gamma**2 / 5.0 * (R**2 + 1.0) * (T + 1)


def corollary7_rhs(gamma, R, T):
    """Bound on the expected squared gradient norm of a uniformly chosen trial."""
    return 4.0 * gamma**2 / 5.0 * (R**2 + 1.0) * (1.0 + 1.0 / T)

"""Reject-option losses and their gradients.

Every function here accepts scalars or numpy arrays and broadcasts. The
margin argument is always ``y * f(x)``; because ``y`` is +-1 the magnitude
``|f(x)|`` equals ``|margin|``.

The sigmoid used throughout is the *decreasing* one,
``sigma(a) = 1 / (1 + exp(gamma * a))``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit


@dataclass(frozen=True)
class HyperParams:
    """Rejection cost ``d`` in (0, 0.5) and sigmoid sharpness ``gamma`` > 0."""

    d: float
    gamma: float = 2.0

    def __post_init__(self):
        if not (0.0 < self.d < 0.5):
            raise ValueError(f"rejection cost d must lie in (0, 0.5), got {self.d!r}")
        if not (self.gamma > 0.0 and np.isfinite(self.gamma)):
            raise ValueError(f"gamma must be a positive finite number, got {self.gamma!r}")


def _check_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} must be finite")


def sigmoid(a, gamma):
    """Decreasing sigmoid ``1 / (1 + exp(gamma * a))``.

    Evaluated through :func:`scipy.special.expit`, which never overflows.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return expit(-gamma * np.asarray(a, dtype=float))


def _sigmoid_bump(a, gamma):
    # sigma(a) * (1 - sigma(a)), written as sigma(a) * sigma(-a) so neither
    # factor suffers cancellation in the tails.
    a = np.asarray(a, dtype=float)
    return expit(-gamma * a) * expit(gamma * a)


def zero_d_one_loss(margin, rho, d):
    """The 0-d-1 loss: 1 for a confident mistake, ``d`` for a rejection, else 0.

    At ``margin == -rho`` both the mistake and reject conditions hold in the
    textbook form; the point is charged as a rejection so the loss stays <= 1.
    """
    margin = np.asarray(margin, dtype=float)
    rho = np.asarray(rho, dtype=float)
    _check_finite("margin", margin)
    out = np.where(np.abs(margin) <= rho, d, np.where(margin < -rho, 1.0, 0.0))
    return out[()] if out.ndim == 0 else out


def double_ramp_loss(margin, rho, d):
    """Piecewise-linear double ramp surrogate, bounded in [0, 2]."""
    m = np.asarray(margin, dtype=float)
    _check_finite("margin", m)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    pos = np.maximum
    upper = pos(0.0, 1.0 - m + rho) - pos(0.0, -1.0 - m + rho)
    lower = pos(0.0, 1.0 - m - rho) - pos(0.0, -1.0 - m - rho)
    out = d * upper + (1.0 - d) * lower
    return out[()] if out.ndim == 0 else out


def double_sigmoid_loss(margin, rho, hp):
    """Smooth surrogate ``2d sigma(m - rho) + 2(1-d) sigma(m + rho)``."""
    m = np.asarray(margin, dtype=float)
    _check_finite("margin", m)
    out = 2.0 * hp.d * sigmoid(m - rho, hp.gamma) + 2.0 * (1.0 - hp.d) * sigmoid(m + rho, hp.gamma)
    return out[()] if np.ndim(out) == 0 else out


def ds_gradient(margin, rho, hp):
    """Partial derivatives of the double sigmoid loss.

    Returns ``(g_margin, g_rho)``: the derivative with respect to the margin
    value ``y f(x)`` and with respect to ``rho``. The weight gradient of a
    linear model is ``y * g_margin * x``.
    """
    m = np.asarray(margin, dtype=float)
    _check_finite("margin", m)
    g = hp.gamma
    b1 = _sigmoid_bump(m - rho, g)
    b2 = _sigmoid_bump(m + rho, g)
    g_margin = -2.0 * g * (hp.d * b1 + (1.0 - hp.d) * b2)
    g_rho = 2.0 * g * (hp.d * b1 - (1.0 - hp.d) * b2)
    if np.ndim(g_margin) == 0:
        return float(g_margin), float(g_rho)
    return g_margin, g_rho


def smoothness_constant(gamma, R):
    """Lipschitz constant of the double sigmoid gradient over ``||x|| <= R``."""
    if gamma <= 0 or R < 0:
        raise ValueError("need gamma > 0 and R >= 0")
    return gamma**2 * (R**2 + 1.0) / 5.0

"""Independent reference implementations used only by the tests.

Bound constants are recomputed in exact rational arithmetic from the
closed forms; sigmoid values use 50-digit decimals. Neither path shares
code with the package.
"""

from decimal import Decimal, getcontext
from fractions import Fraction as Q

getcontext().prec = 50


def q(x):
    return Q(x) if not isinstance(x, Q) else x


def m1(rho, d, W, R):
    rho, d, W, R = map(q, (rho, d, W, R))
    return min(1 / rho, 2 / (d * (1 + rho + W * R)))


def m21_m22(rho, d, W, R):
    rho, d, W, R = map(q, (rho, d, W, R))
    WR = W * R
    assert WR > rho
    a = min(2 * (2 * rho + 1) / ((1 + d) * (WR + rho + 1)), (1 + d * (WR - rho)) / ((1 + d) * (WR - rho + 1)))
    b = max(2 / ((WR + rho + 1) * (1 - d)), ((2 - d) * (WR - rho) + 1) / ((WR - rho + 1) * (WR - rho) * (1 - d)))
    return a, b


def alphas(W, R, rho, d, eta):
    W, R, rho, d, eta = map(q, (W, R, rho, d, eta))
    a, b = m21_m22(rho, d, W, R)
    shared = b * (1 + eta**2 * (1 - d) ** 2 * (R**2 + 1) + 2 * eta * (1 - d)) / (2 * a * eta * (1 + d))
    rej = max((1 + eta**2 * d**2 * (R**2 + 1) + 2 * eta * d) / (2 * eta * d), shared)
    mis = max((eta * d * (R**2 + 1) + 2) / 2, shared)
    return rej, mis


def theorem2(W, R, rho, d, eta):
    W, rho = q(W), q(rho)
    return tuple(al**2 * W**2 + (1 - al * rho) ** 2 for al in alphas(W, R, rho, d, eta))


def theorem3(W, R, rho, d, eta, loss_sum):
    W, R, rho, d, eta, loss_sum = map(q, (W, R, rho, d, eta, loss_sum))
    m = min(m1(rho, d, W, R), m21_m22(rho, d, W, R)[1])
    return tuple(
        al**2 * W**2 + (1 - al * rho) ** 2 + 2 * eta * al / m * loss_sum for al in alphas(W, R, rho, d, eta)
    )


def sigmoid(a, gamma):
    """Decreasing sigmoid to 50 significant digits."""
    z = Decimal(repr(gamma)) * Decimal(repr(a))
    return 1 / (1 + z.exp())


def ds_loss(m, rho, d, gamma):
    d = Decimal(repr(d))
    return 2 * d * sigmoid(m - rho, gamma) + 2 * (1 - d) * sigmoid(m + rho, gamma)


def double_ramp(m, rho, d):
    m, rho, d = map(q, (m, rho, d))

    def pos(v):
        return max(v, Q(0))

    return d * (pos(1 - m + rho) - pos(-1 - m + rho)) + (1 - d) * (pos(1 - m - rho) - pos(-1 - m - rho))

"""Hot per-trial loops for the online learners.

Each ``run_*`` function replays one full stream and returns per-trial
arrays. They only touch ``labels[i]`` on trials where the label was
queried; the harness reads the true labels separately for measurement.

Variant codes: 0 = DRAL, 1 = DSAL, 2 = DSOL.
Branch codes:  0 = no update, 1 = upper ramp, 2 = lower ramp, 3 = gradient.
Kernel codes:  0 = linear, 1 = polynomial, 2 = rbf.
"""

import math

import numpy as np

from ._accel import njit

DRAL, DSAL, DSOL = 0, 1, 2
NO_UPDATE, UPPER_RAMP, LOWER_RAMP, GRADIENT = 0, 1, 2, 3
LINEAR, POLYNOMIAL, RBF = 0, 1, 2


@njit
def sigma(a, gamma):
    z = gamma * a
    if z >= 0.0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


@njit
def bump(a, gamma):
    return sigma(a, gamma) * sigma(-a, gamma)


@njit
def ds_partials(margin, rho, d, gamma):
    b1 = bump(margin - rho, gamma)
    b2 = bump(margin + rho, gamma)
    g_margin = -2.0 * gamma * (d * b1 + (1.0 - d) * b2)
    g_rho = 2.0 * gamma * (d * b1 - (1.0 - d) * b2)
    return g_margin, g_rho


@njit
def query_probability(f, rho, gamma):
    return 4.0 * bump(abs(f) - rho, gamma)


@njit
def _decide(variant, f, rho, gamma, u):
    if variant == DRAL:
        a = abs(f)
        if rho - 1.0 <= a and a <= rho + 1.0:
            return True, 1.0
        return False, 0.0
    if variant == DSAL:
        p = query_probability(f, rho, gamma)
        return u < p, p
    return True, 1.0


@njit
def run_linear(X, labels, idx, u, etas, d, gamma, variant, rho0):
    T = idx.shape[0]
    w = np.zeros(X.shape[1])
    rho = rho0
    f_out = np.empty(T)
    rho_out = np.empty(T)
    prob = np.empty(T)
    queried = np.zeros(T, dtype=np.bool_)
    branch = np.zeros(T, dtype=np.int8)
    projections = 0
    for t in range(T):
        x = X[idx[t]]
        f = np.dot(w, x)
        f_out[t] = f
        rho_out[t] = rho
        q, p = _decide(variant, f, rho, gamma, u[t])
        prob[t] = p
        if not q:
            continue
        queried[t] = True
        y = labels[idx[t]]
        yf = y * f
        eta = etas[t]
        if variant == DRAL:
            if rho - 1.0 <= yf and yf <= rho + 1.0:
                w = w + (eta * d * y) * x
                rho = rho - eta * d
                branch[t] = UPPER_RAMP
            elif -rho - 1.0 <= yf and yf <= -rho + 1.0:
                w = w + (eta * (1.0 - d) * y) * x
                rho = rho + eta * (1.0 - d)
                branch[t] = LOWER_RAMP
        else:
            g_margin, g_rho = ds_partials(yf, rho, d, gamma)
            w = w - (eta * y * g_margin) * x
            rho = rho - eta * g_rho
            branch[t] = GRADIENT
        if rho < 0.0:
            rho = 0.0
            projections += 1
    return f_out, rho_out, prob, queried, branch, w, rho, projections


@njit
def kernel_values(kind, G, sq_support, sq_x, degree, coef0, width):
    # G holds the inner products <x_i, x>.
    if kind == LINEAR:
        return G
    if kind == POLYNOMIAL:
        return (G + coef0) ** degree
    dist = sq_support + sq_x - 2.0 * G
    return np.exp(-width * np.maximum(dist, 0.0))


@njit
def run_kernel(X, sq_norms, labels, idx, u, etas, d, gamma, variant, rho0, kind, degree, coef0, width):
    T = idx.shape[0]
    dim = X.shape[1]
    support_x = np.empty((T, dim))
    support_sq = np.empty(T)
    coef = np.empty(T)
    k = 0
    rho = rho0
    f_out = np.empty(T)
    rho_out = np.empty(T)
    prob = np.empty(T)
    queried = np.zeros(T, dtype=np.bool_)
    branch = np.zeros(T, dtype=np.int8)
    projections = 0
    for t in range(T):
        i = idx[t]
        x = X[i]
        if k > 0:
            G = np.dot(support_x[:k], x)
            kv = kernel_values(kind, G, support_sq[:k], sq_norms[i], degree, coef0, width)
            f = np.dot(coef[:k], kv)
        else:
            f = 0.0
        f_out[t] = f
        rho_out[t] = rho
        q, p = _decide(variant, f, rho, gamma, u[t])
        prob[t] = p
        if not q:
            continue
        queried[t] = True
        y = labels[i]
        yf = y * f
        eta = etas[t]
        a = 0.0
        if variant == DRAL:
            if rho - 1.0 <= yf and yf <= rho + 1.0:
                a = eta * d * y
                rho = rho - eta * d
                branch[t] = UPPER_RAMP
            elif -rho - 1.0 <= yf and yf <= -rho + 1.0:
                a = eta * (1.0 - d) * y
                rho = rho + eta * (1.0 - d)
                branch[t] = LOWER_RAMP
        else:
            g_margin, g_rho = ds_partials(yf, rho, d, gamma)
            a = -(eta * y * g_margin)
            rho = rho - eta * g_rho
            branch[t] = GRADIENT
        if a != 0.0:
            support_x[k] = x
            support_sq[k] = sq_norms[i]
            coef[k] = a
            k += 1
        if rho < 0.0:
            rho = 0.0
            projections += 1
    return f_out, rho_out, prob, queried, branch, coef[:k].copy(), rho, projections

"""One-dimensional overlap integrals int z^k phi_p(z) phi_q(z) dz.

Closed form: phi_p phi_q is a difference of two cosines (product-to-sum),
and int z^k cos(w z + t) over [-a, a] reduces to the moments

    C_k(w) = int z^k cos(w z) dz,   S_k(w) = int z^k sin(w z) dz.

For |w| a large the moments follow from integration by parts; for small
|w| a that recursion cancels catastrophically, so a Taylor series in w is
used instead. A Gauss-Legendre route is kept alongside as the check.
"""

import math

import numpy as np

SERIES_TERMS = 60


def _series_threshold(kmax):
    return max(4.0, kmax + 1.0)


def power_integral(m, a):
    """int_{-a}^{a} z^m dz."""
    return 0.0 if m % 2 else 2.0 * a ** (m + 1) / (m + 1)


def trig_moments(omega, a, kmax):
    """Return C, S with shape (kmax + 1,) + omega.shape."""
    omega = np.asarray(omega, dtype=float)
    w = np.abs(omega)
    sign = np.sign(omega)
    C = np.zeros((kmax + 1,) + w.shape)
    S = np.zeros((kmax + 1,) + w.shape)
    small = w * a < _series_threshold(kmax)

    if np.any(small):
        ws = w[small]
        for k in range(kmax + 1):
            c = np.zeros(ws.shape)
            s = np.zeros(ws.shape)
            # sum small terms last
            for j in reversed(range(SERIES_TERMS)):
                c += (-1) ** j * ws ** (2 * j) / math.factorial(2 * j) * power_integral(k + 2 * j, a)
                s += (-1) ** j * ws ** (2 * j + 1) / math.factorial(2 * j + 1) * power_integral(k + 2 * j + 1, a)
            C[k][small] = c
            S[k][small] = s

    big = ~small
    if np.any(big):
        wb = w[big]
        sa, ca = np.sin(wb * a), np.cos(wb * a)
        Ck = 2 * sa / wb
        Sk = np.zeros_like(wb)
        C[0][big], S[0][big] = Ck, Sk
        for k in range(1, kmax + 1):
            even = k % 2 == 0
            bc = 2 * a**k * sa / wb if even else 0.0
            bs = 0.0 if even else -2 * a**k * ca / wb
            Ck, Sk = bc - k / wb * Sk, bs + k / wb * Ck
            C[k][big], S[k][big] = Ck, Sk

    S = S * sign  # S_k is odd in omega
    return C, S


def cos_shift_integral(k, omega, theta, a):
    """int_{-a}^{a} z^k cos(omega z + theta) dz, elementwise."""
    C, S = trig_moments(omega, a, k)
    return np.cos(theta) * C[k] - np.sin(theta) * S[k]


def monomial_mode_matrix(basis, k):
    """Closed-form matrix I[p, q] = int z^k phi_p phi_q dz (cm^k)."""
    a = basis.L / 2
    kp, kq = basis.kappa[:, None], basis.kappa[None, :]
    dp, dq = basis.delta[:, None], basis.delta[None, :]
    Cm, Sm = trig_moments(kp - kq, a, k)
    Cp, Sp = trig_moments(kp + kq, a, k)
    minus = np.cos(dp - dq) * Cm[k] - np.sin(dp - dq) * Sm[k]
    plus = np.cos(dp + dq) * Cp[k] - np.sin(dp + dq) * Sp[k]
    out = (minus - plus) / (2 * np.outer(basis.norm, basis.norm))
    out = 0.5 * (out + out.T)
    # exact parity zeros: phi_p phi_q z^k is odd when p + q + k is odd
    idx = np.arange(basis.N)
    out[(idx[:, None] + idx[None, :] + k) % 2 == 1] = 0.0
    return out


def monomial_mode_vector(basis, k):
    """Closed-form v[p] = int z^k phi_p(z) dz."""
    C, S = trig_moments(basis.kappa, basis.L / 2, k)
    v = (np.cos(basis.delta) * S[k] + np.sin(basis.delta) * C[k]) / basis.norm
    v[(np.arange(basis.N) + k) % 2 == 1] = 0.0
    return v


def gauss_legendre(order, a):
    x, w = np.polynomial.legendre.leggauss(order)
    return a * x, a * w


def quadrature_order(basis, extra=0):
    return max(4 * basis.N, 64) + extra


def quadrature_mode_matrix(basis, func, order=None):
    """I[p, q] = int f(z) phi_p phi_q dz by Gauss-Legendre quadrature."""
    order = order or quadrature_order(basis)
    z, w = gauss_legendre(order, basis.L / 2)
    tab = basis.phi_table(z)
    fz = np.asarray(func(z), dtype=float) * np.ones_like(z)
    return (tab * (w * fz)) @ tab.T


def quadrature_mode_vector(basis, func, order=None):
    """v[p] = int f(z) phi_p(z) dz."""
    order = order or quadrature_order(basis)
    z, w = gauss_legendre(order, basis.L / 2)
    return basis.phi_table(z) @ (w * np.asarray(func(z), dtype=float))


def moment_matrices(basis, kmax, method="analytic"):
    """Cached list [I_0, ..., I_kmax] for a basis."""
    cache = basis.__dict__.setdefault("_moment_cache", {})
    out = []
    for k in range(kmax + 1):
        key = (method, k)
        if key not in cache:
            if method == "analytic":
                cache[key] = monomial_mode_matrix(basis, k)
            elif method == "quadrature":
                cache[key] = quadrature_mode_matrix(basis, lambda z, k=k: z**k,
                                                    order=quadrature_order(basis, extra=k))
            else:
                raise ValueError(f"unknown integration method {method!r}")
        out.append(cache[key])
    return out

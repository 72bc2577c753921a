"""Scalar and tabulated special functions.

Legendre polynomials, associated Legendre functions (Condon-Shortley phase),
spherical harmonics normalized w.r.t. the surface measure of the unit sphere,
Wigner d/D functions, the principal branch of Lambert's W on [0, inf) and
double factorials.

Tabulating routines work with three-term recurrences so that band-limits of a
few hundred stay finite; the explicit derivative formulas are only used as
test oracles.
"""

import math

import numpy as np

__all__ = [
    "legendre_p",
    "assoc_legendre",
    "sph_harmonic",
    "sph_legendre_table",
    "wigner_d",
    "wigner_d_table",
    "wigner_D",
    "lambert_w",
    "lambert_w_exp",
    "double_factorial",
    "log_double_factorial",
]

_T_SLACK = 1e-12


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + _T_SLACK):
        raise ValueError("argument t must lie in [-1, 1]")
    return np.clip(t, -1.0, 1.0)


def _check_order(n, *orders):
    if n < 0:
        raise ValueError(f"degree n={n} must be nonnegative")
    for k in orders:
        if abs(k) > n:
            raise ValueError(f"order {k} exceeds degree {n}")


def legendre_p(n, t):
    """Legendre polynomial P_n(t) by the Bonnet recurrence."""
    if n < 0:
        raise ValueError(f"degree n={n} must be nonnegative")
    t = _check_t(t)
    p_prev = np.ones_like(t)
    if n == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = t.copy()
    for m in range(1, n):
        p_prev, p = p, ((2 * m + 1) * t * p - m * p_prev) / (m + 1)
    return p if p.ndim else float(p)


def sph_legendre_table(N, t):
    """Normalized associated Legendre functions for all degrees up to ``N``.

    Returns an array ``P`` of shape ``(N + 1, 2N + 1) + t.shape`` with
    ``P[n, k + N] = sqrt((2n+1)/(4pi) (n-k)!/(n+k)!) P_n^k(t)``, so that
    ``Y_n^k(sph(phi, theta)) = P[n, k + N](cos theta) exp(i k phi)``.
    Entries with ``|k| > n`` are zero.
    """
    t = _check_t(t)
    u = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    out = np.zeros((N + 1, 2 * N + 1) + t.shape)
    diag = np.full(t.shape, 1.0 / math.sqrt(4.0 * math.pi))
    for k in range(N + 1):
        if k > 0:
            diag = -math.sqrt((2 * k + 1) / (2 * k)) * u * diag
        out[k, N + k] = diag
        if k + 1 <= N:
            out[k + 1, N + k] = math.sqrt(2 * k + 3) * t * diag
        for n in range(k + 2, N + 1):
            a_n = math.sqrt((4 * n * n - 1) / (n * n - k * k))
            a_prev = math.sqrt((4 * (n - 1) ** 2 - 1) / ((n - 1) ** 2 - k * k))
            out[n, N + k] = a_n * (t * out[n - 1, N + k] - out[n - 2, N + k] / a_prev)
    for k in range(1, N + 1):
        out[:, N - k] = (-1) ** k * out[:, N + k]
    return out


def assoc_legendre(n, k, t):
    """Associated Legendre function P_n^k(t) including the (-1)^k phase.

    Negative orders follow P_n^{-k} = (-1)^k (n-k)!/(n+k)! P_n^k.
    """
    _check_order(n, k)
    t = _check_t(t)
    normalized = sph_legendre_table(n, t)[n, n + k]
    # undo the spherical-harmonic normalization
    log_ratio = math.lgamma(n - k + 1) - math.lgamma(n + k + 1)
    scale = math.sqrt(4.0 * math.pi / (2 * n + 1)) * math.exp(-0.5 * log_ratio)
    val = normalized * scale
    return val if np.ndim(val) else float(val)


def sph_harmonic(n, k, phi, theta):
    """Spherical harmonic Y_n^k at ``sph(phi, theta)``; unit L2 norm on the sphere."""
    _check_order(n, k)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    p = sph_legendre_table(n, np.cos(theta))[n, n + k]
    val = p * np.exp(1j * k * phi)
    return val if np.ndim(val) else complex(val)


def wigner_d_table(N, t):
    """Wigner d-functions ``d_n^{k,j}(t)`` for all ``n <= N``, ``|k|, |j| <= n``.

    Returns an array of shape ``(N + 1, 2N + 1, 2N + 1) + t.shape`` indexed as
    ``[n, k + N, j + N]``.  The recurrence is seeded at ``n = max(|k|, |j|)``
    with half-angle products, which are regular at ``t = +-1``.
    """
    t = _check_t(t)
    c = np.sqrt((1.0 + t) / 2.0)
    s = np.sqrt((1.0 - t) / 2.0)
    orders = np.arange(-N, N + 1)
    K, J = np.meshgrid(orders, orders, indexing="ij")
    n0 = np.maximum(np.abs(K), np.abs(J))
    extra = (1,) * t.ndim
    out = np.zeros((N + 1, 2 * N + 1, 2 * N + 1) + t.shape)

    # seed values at the lowest admissible degree
    seed = np.zeros((2 * N + 1, 2 * N + 1) + t.shape)
    for a in range(2 * N + 1):
        for b in range(2 * N + 1):
            k, j, n = int(K[a, b]), int(J[a, b]), int(n0[a, b])
            if j == n:
                sgn, m, ps, pc = 1, n + k, n - k, n + k
            elif j == -n:
                sgn, m, ps, pc = (-1) ** (n - k), n + k, n + k, n - k
            elif k == n:
                sgn, m, ps, pc = (-1) ** (n - j), n + j, n - j, n + j
            else:
                sgn, m, ps, pc = 1, n + j, n + j, n - j
            binom = math.exp(0.5 * (math.lgamma(2 * n + 1) - math.lgamma(m + 1) - math.lgamma(2 * n - m + 1)))
            seed[a, b] = sgn * binom * s**ps * c**pc

    kk = K.reshape(K.shape + extra).astype(float)
    jj = J.reshape(J.shape + extra).astype(float)
    n0e = n0.reshape(n0.shape + extra)
    for n in range(N + 1):
        at_seed = n0e == n
        if n == 0:
            out[0] = np.where(at_seed, seed, 0.0)
            continue
        m = n - 1
        if m > 0:
            shift = kk * jj / (n * m)
            back = np.sqrt(np.clip((m * m - kk * kk) * (m * m - jj * jj), 0.0, None)) / (m * (2 * n - 1))
            prev2 = out[n - 2] if n >= 2 else 0.0
        else:
            shift, back, prev2 = 0.0, 0.0, 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            lead = n * (2 * n - 1) / np.sqrt((n * n - kk * kk) * (n * n - jj * jj))
            rec = lead * ((t - shift) * out[n - 1] - back * prev2)
        out[n] = np.where(at_seed, seed, np.where(n0e < n, rec, 0.0))
    return out


def wigner_d(n, k, j, t):
    """Wigner d-function d_n^{k,j}(t), t = cos(beta)."""
    _check_order(n, k, j)
    val = wigner_d_table(n, t)[n, n + k, n + j]
    return val if np.ndim(val) else float(val)


def wigner_D(n, k, j, alpha, beta, gamma):
    """Rotational harmonic D_n^{k,j} at the Euler angles (alpha, beta, gamma)."""
    d = wigner_d(n, k, j, np.cos(beta))
    val = np.exp(-1j * k * np.asarray(alpha)) * d * np.exp(-1j * j * np.asarray(gamma))
    return val if np.ndim(val) else complex(val)


def _halley(z, y, iters=60):
    for _ in range(iters):
        ey = np.exp(y)
        f = y * ey - z
        denom = ey * (y + 1.0) - (y + 2.0) * f / (2.0 * y + 2.0)
        step = f / denom
        y = y - step
        if np.all(np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(y))):
            break
    return y


def lambert_w(z):
    """Principal branch of Lambert's W for ``z >= 0``.

    Halley iteration from ``y0 = z`` (z < 1), ``log1p(z)`` (1 <= z < e) or
    ``log z - log log z`` (z >= e).
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise ValueError("lambert_w is only defined here for z >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(np.maximum(z, np.e))
        y0 = np.where(z < 1.0, z, np.where(z < np.e, np.log1p(z), lz - np.log(lz)))
    y = _halley(z, y0)
    y = np.where(z == 0.0, 0.0, y)
    return y if y.ndim else float(y)


def lambert_w_exp(u):
    """``W(exp(u))`` without forming ``exp(u)``.

    For ``u > 1`` the equation ``y + log y = u`` is solved by Newton's method,
    starting from the asymptotic ``u - log u``; this keeps the map finite and
    monotone for arguments far beyond the float exponent range.
    """
    u = np.asarray(u, dtype=float)
    small = u <= 1.0
    out = np.empty_like(u)
    if np.any(small):
        out[small] = lambert_w(np.exp(u[small]))
    if np.any(~small):
        v = u[~small]
        y = v - np.log(v)
        for _ in range(50):
            step = (y + np.log(y) - v) / (1.0 + 1.0 / y)
            y = y - step
            if np.all(np.abs(step) <= 4e-16 * y):
                break
        out[~small] = y
    return out if out.ndim else float(out)


def double_factorial(m):
    """m!! with (-1)!! = 0!! = 1, exact integer arithmetic."""
    if m < -1:
        raise ValueError(f"double factorial undefined for m={m}")
    out = 1
    for i in range(m, 0, -2):
        out *= i
    return out


def log_double_factorial(m):
    """log(m!!) through the Gamma function; valid for m >= -1."""
    if m < -1:
        raise ValueError(f"double factorial undefined for m={m}")
    if m <= 0:
        return 0.0
    if m % 2 == 0:
        h = m // 2
        return h * math.log(2.0) + math.lgamma(h + 1)
    h = (m + 1) // 2
    return math.lgamma(2 * h + 1) - h * math.log(2.0) - math.lgamma(h + 1)

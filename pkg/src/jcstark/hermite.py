"""Hermite polynomials, oscillator eigenfunctions and their roots.

All evaluations run the three-term recurrence on *normalized* Hermite
polynomials ``h_k = H_k / sqrt(2**k k!)`` and carry a base-2 exponent per
sample, so nothing overflows for degrees up to :data:`MAX_DEGREE` and
arguments far outside the classically allowed region.  Roots come from the
symmetric tridiagonal Jacobi matrix, diagonalized by the implicit QL solver
in this module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, NumericalError

__all__ = [
    "MAX_DEGREE",
    "RootList",
    "IdentityReport",
    "tridiagonal_eigenvalues",
    "hermite_scaled",
    "hermite_eval",
    "hermite_pair",
    "hermite_table",
    "oscillator_eval",
    "hermite_roots",
    "gauss_hermite",
    "turan_value",
    "check_identities",
]

MAX_DEGREE = 400

_RESCALE_AT = 2.0**256
_RESCALE_BITS = 256
_PI_QUARTER = math.pi**-0.25
# headroom (in bits) allowed to accumulate between overflow checks
_HEADROOM_BITS = 600


def _check_interval(x: np.ndarray) -> int:
    """Recurrence steps that may run between overflow checks.

    One step of the normalized recurrence grows magnitudes by at most
    ``sqrt(2)|x| + 1``; the interval keeps the growth below ``2**600`` so a
    value rescaled at ``2**256`` stays finite until the next check.
    """
    if x.size == 0:
        return 1
    xm = float(np.max(np.abs(x)))
    if not math.isfinite(xm):
        return 1
    return max(1, int(_HEADROOM_BITS / math.log2(math.sqrt(2.0) * xm + 2.0)))


@lru_cache(maxsize=None)
def _recurrence_coefficients(n: int):
    k = np.arange(max(n, 1), dtype=float)
    return tuple(np.sqrt(2.0 / (k + 1))), tuple(np.sqrt(k / (k + 1)))


def tridiagonal_eigenvalues(diagonal, offdiagonal, max_iter: int = 60) -> np.ndarray:
    """Eigenvalues of a real symmetric tridiagonal matrix, ascending.

    Implicit QL iteration with Wilkinson-type shifts.  ``offdiagonal[i]``
    couples rows ``i`` and ``i + 1``.
    """
    d = [float(v) for v in diagonal]
    n = len(d)
    if len(offdiagonal) != max(n - 1, 0):
        raise ValueError("offdiagonal must have len(diagonal) - 1 entries")
    e = [float(v) for v in offdiagonal] + [0.0]
    eps = np.finfo(float).eps

    for l in range(n):
        iterations = 0
        while True:
            m = l
            while m < n - 1:
                if abs(e[m]) <= eps * (abs(d[m]) + abs(d[m + 1])):
                    break
                m += 1
            if m == l:
                break
            if iterations == max_iter:
                raise NumericalError(f"QL iteration did not converge for eigenvalue {l}")
            iterations += 1

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    return np.sort(np.array(d))


def _check_degree(n: int) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"degree must be a non-negative integer, got {n!r}")
    return int(n)


def hermite_scaled(n: int, x):
    """Physicists' ``H_n(x)`` as ``(mantissa, exponent)`` with ``H = m * 2**e``."""
    n = _check_degree(n)
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    exp2 = np.zeros(x.shape, dtype=np.int64)
    for k in range(n):
        prev, cur = cur, 2.0 * x * cur - 2.0 * k * prev
        big = np.abs(cur) > _RESCALE_AT
        if np.any(big):
            cur = np.where(big, np.ldexp(cur, -_RESCALE_BITS), cur)
            prev = np.where(big, np.ldexp(prev, -_RESCALE_BITS), prev)
            exp2 = exp2 + _RESCALE_BITS * big
    return cur, exp2


def hermite_eval(n: int, x):
    """``H_n(x)``; overflows to ``inf`` only where the true value does."""
    m, e = hermite_scaled(n, x)
    with np.errstate(over="ignore"):
        out = np.ldexp(m, e)
    return out if out.ndim else float(out)


def hermite_pair(n: int, x):
    """Normalized ``(h_{n-1}, h_n)`` sharing one exponent: ``h = m * 2**e``.

    ``h_k = H_k / sqrt(2**k k!)`` obeys
    ``h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}``, the same
    recurrence as the oscillator functions without the Gaussian factor.
    For ``n = 0`` the first entry is zero.
    """
    n = _check_degree(n)
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    exp2 = np.zeros(x.shape, dtype=np.int64)
    a, b = _recurrence_coefficients(n)
    every = _check_interval(x)
    for k in range(n):
        prev, cur = cur, a[k] * x * cur - b[k] * prev
        if (k + 1) % every == 0 or k == n - 1:
            peak = np.maximum(np.abs(cur), np.abs(prev))
            big = peak > _RESCALE_AT
            if np.any(big):
                shift = np.where(big, np.frexp(peak)[1], 0)
                cur = np.ldexp(cur, -shift)
                prev = np.ldexp(prev, -shift)
                exp2 = exp2 + shift
    return prev, cur, exp2


def hermite_table(kmax: int, x):
    """Normalized ``h_0 .. h_kmax`` at every ``x`` with a shared per-x exponent.

    Returns ``(table, exp2)`` with ``table.shape == (kmax + 1,) + x.shape``.
    """
    kmax = _check_degree(kmax)
    x = np.asarray(x, dtype=float)
    table = np.empty((kmax + 1,) + x.shape)
    table[0] = 1.0
    exp2 = np.zeros(x.shape, dtype=np.int64)
    if kmax >= 1:
        table[1] = math.sqrt(2.0) * x
    a, b = _recurrence_coefficients(kmax)
    every = _check_interval(x)
    for k in range(1, kmax):
        table[k + 1] = a[k] * x * table[k] - b[k] * table[k - 1]
        if k % every == 0 or k == kmax - 1:
            peak = np.maximum(np.abs(table[k + 1]), np.abs(table[k]))
            big = peak > _RESCALE_AT
            if np.any(big):
                shift = np.where(big, np.frexp(peak)[1], 0)
                table[: k + 2] = np.ldexp(table[: k + 2], -shift)
                exp2 = exp2 + shift
    return table, exp2


def oscillator_eval(n: int, x):
    """Harmonic-oscillator eigenfunction ``phi_n(x)``, normalized on the line."""
    x_arr = np.asarray(x, dtype=float)
    _, h, e = hermite_pair(n, x_arr)
    with np.errstate(under="ignore"):
        out = _PI_QUARTER * h * np.exp(e * math.log(2.0) - 0.5 * x_arr**2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class RootList:
    """Ascending real roots of ``H_n``."""

    n: int
    roots: np.ndarray

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)


@lru_cache(maxsize=512)
def _roots_cached(n: int) -> tuple:
    k = np.arange(1, n)
    nodes = tridiagonal_eigenvalues(np.zeros(n), np.sqrt(k / 2.0))
    # one Newton step on h_n, using h_n' = sqrt(2n) h_{n-1}
    prev, cur, _ = hermite_pair(n, nodes)
    nodes = nodes - cur / (math.sqrt(2.0 * n) * prev)
    nodes = 0.5 * (nodes - nodes[::-1])
    if n % 2:
        nodes[n // 2] = 0.0
    return tuple(float(v) for v in nodes)


def hermite_roots(n: int) -> RootList:
    """All ``n`` real roots of ``H_n`` via the Golub-Welsch Jacobi matrix.

    The Jacobi matrix has zero diagonal and off-diagonal ``sqrt(k/2)``; its
    eigenvalues are polished by one Newton step and symmetrized.
    """
    n = _check_degree(n)
    if n < 1:
        raise ValueError("H_0 has no roots; n must be >= 1")
    if n > MAX_DEGREE:
        raise CapacityError(f"degree {n} exceeds the supported maximum {MAX_DEGREE}")
    roots = np.array(_roots_cached(n))
    roots.setflags(write=False)
    return RootList(n, roots)


def gauss_hermite(n: int):
    """Gauss-Hermite nodes and weights for the weight ``exp(-x**2)``."""
    nodes = hermite_roots(n).roots
    prev, _, e = hermite_pair(n, nodes)
    h_prev = np.ldexp(prev, e)
    weights = math.sqrt(math.pi) / (n * h_prev**2)
    return nodes.copy(), weights


def turan_value(n: int, x):
    """Raw Turan expression ``H_n(x)**2 - H_{n-1}(x) H_{n+1}(x)``."""
    if n < 1:
        raise ValueError("Turan expression needs n >= 1")
    return hermite_eval(n, x) ** 2 - hermite_eval(n - 1, x) * hermite_eval(n + 1, x)


def _turan_normalized(n: int, x) -> np.ndarray:
    # H_n^2 - H_{n-1}H_{n+1} = 2^n n! [h_n^2 - sqrt((n+1)/n) h_{n-1} h_{n+1}],
    # further divided here by the common positive scale 4**e.
    prev, cur, _ = hermite_pair(n, x)
    nxt = math.sqrt(2.0 / (n + 1)) * np.asarray(x) * cur - math.sqrt(n / (n + 1)) * prev
    return cur**2 - math.sqrt((n + 1) / n) * prev * nxt


def _normalized_values(n: int, x, ref_exp) -> np.ndarray:
    _, cur, e = hermite_pair(n, x)
    return np.ldexp(cur, e - ref_exp)


@dataclass
class IdentityReport:
    """Pass/fail summary of the Hermite identities at a set of samples."""

    n: int
    derivative_ok: bool
    turan_ok: bool
    alternation_ok: bool
    max_derivative_error: float
    min_turan: float
    alternation_signs: np.ndarray

    @property
    def all_ok(self) -> bool:
        return self.derivative_ok and self.turan_ok and self.alternation_ok


def check_identities(n: int, samples, rel_tol: float = 1e-6) -> IdentityReport:
    """Verify the derivative identity, Turan positivity and sign alternation.

    (a) a five-point finite difference of ``H_n`` matches ``2n H_{n-1}``;
    the error is measured relative to the local derivative amplitude
    ``2n * sqrt(H_{n-1}^2 + H_n^2 / 2n)`` so it stays meaningful at roots.
    (b) ``H_n^2 - H_{n-1} H_{n+1} > 0`` at every sample.
    (c) at each root ``z`` of ``H_{n-1}``, ``sign H_n(z) = -sign H'_{n-1}(z)``
    (derivative by finite difference), hence ``H_n`` alternates in sign
    along consecutive roots of ``H_{n-1}``.
    """
    n = _check_degree(n)
    if n < 1:
        raise ValueError("identities need n >= 1")
    x = np.atleast_1d(np.asarray(samples, dtype=float))

    # (a) in normalized form: h_n' = sqrt(2n) h_{n-1}
    prev, cur, e = hermite_pair(n, x)
    step = 1e-3 / math.sqrt(2 * n + 1) * np.maximum(1.0, np.abs(x) / math.sqrt(2 * n + 1))
    f = [_normalized_values(n, x + k * step, e) for k in (-2, -1, 1, 2)]
    fd = (f[0] - 8.0 * f[1] + 8.0 * f[2] - f[3]) / (12.0 * step)
    exact = math.sqrt(2.0 * n) * prev
    amplitude = math.sqrt(2.0 * n) * np.sqrt(prev**2 + cur**2 / (2.0 * n))
    deriv_err = np.abs(fd - exact) / np.maximum(np.abs(exact), amplitude)
    max_deriv_err = float(np.max(deriv_err))

    # (b)
    turan = _turan_normalized(n, x)
    min_turan = float(np.min(turan))

    # (c)
    if n >= 2:
        z = hermite_roots(n - 1).roots
        _, h_n, ez = hermite_pair(n, z)
        hstep = 1e-6
        dp = (_normalized_values(n - 1, z + hstep, ez)
              - _normalized_values(n - 1, z - hstep, ez)) / (2 * hstep)
        signs = np.sign(h_n)
        sign_rule = bool(np.all(signs == -np.sign(dp)) and np.all(signs != 0))
        alternates = bool(np.all(signs[1:] * signs[:-1] < 0))
        alternation_ok = sign_rule and alternates
    else:
        signs = np.array([])
        alternation_ok = True

    return IdentityReport(
        n=n,
        derivative_ok=max_deriv_err < rel_tol,
        turan_ok=min_turan > 0.0,
        alternation_ok=alternation_ok,
        max_derivative_error=max_deriv_err,
        min_turan=min_turan,
        alternation_signs=signs,
    )

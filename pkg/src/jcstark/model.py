"""Exact eigenstates of the Jaynes-Cummings model with Stark coupling.

Conventions: spin states are eigenstates of sigma_x, ``UP`` (sigma_x = +1)
and ``DN`` (sigma_x = -1).  With the anisotropy ``lam = 0`` the excitation
number ``a^dag a + (1 + sigma_x)/2`` is conserved and every eigenstate other
than ``|0, DN>`` lives in a two-dimensional block ``{|n-1, UP>, |n, DN>}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import CapacityError, ModelDomainError, ParameterError

__all__ = [
    "ModelParams",
    "EigenState",
    "Level",
    "e_plus",
    "e_minus",
    "stark_detuning",
    "eigenstate",
    "eigenenergy",
    "spectrum",
    "ground_state",
    "monotone_bound",
    "block_matrix",
]

# excitation-number search is refused beyond this
N_SEARCH_CAP = 5_000_000
# ground-state search: full table up to this n, convexity bisection beyond
FULL_SCAN_LIMIT = 2_000
BISECTION_LIMIT = 10**15
TIE_RTOL = 1e-13


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters, all energies in the same unit.

    ``omega`` boson frequency, ``Omega`` qubit splitting, ``g`` rotating
    coupling, ``chi`` Stark ratio, ``lam`` counter-rotating anisotropy ratio.
    """

    omega: float
    Omega: float = 1.0
    g: float = 0.0
    chi: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        for name in ("omega", "Omega", "g", "chi", "lam"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, float(value))
        if self.omega <= 0:
            raise ParameterError(f"omega must be > 0, got {self.omega}")
        if self.Omega < 0:
            raise ParameterError(f"Omega must be >= 0, got {self.Omega}")
        if self.g < 0:
            raise ParameterError(f"g must be >= 0, got {self.g}")
        if not -1.0 <= self.chi <= 1.0:
            raise ParameterError(f"chi must lie in [-1, 1], got {self.chi}")
        if self.lam < 0:
            raise ParameterError(f"lambda must be >= 0, got {self.lam}")

    @property
    def g_s(self) -> float:
        """Coupling scale ``sqrt(omega * Omega) / 2``."""
        return 0.5 * math.sqrt(self.omega * self.Omega)

    @classmethod
    def from_ratios(cls, omega_ratio: float, g_ratio: float = 0.0, chi: float = 0.0,
                    lam: float = 0.0, Omega: float = 1.0) -> "ModelParams":
        """Build from ``omega / Omega`` and ``g / g_s``."""
        omega = omega_ratio * Omega
        if not (omega > 0 and Omega >= 0):
            raise ParameterError(f"need omega/Omega > 0 and Omega >= 0, got {omega_ratio}, {Omega}")
        return cls(omega=omega, Omega=Omega, g=g_ratio * 0.5 * math.sqrt(omega * Omega),
                   chi=chi, lam=lam)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {"omega": self.omega, "Omega": self.Omega, "g": self.g,
                "chi": self.chi, "lambda": self.lam}


@dataclass(frozen=True)
class EigenState:
    """Closed-form eigenstate ``(c_up |n-1,UP> + c_dn |n,DN>) / sqrt(norm)``.

    ``eta`` is the branch label (+1 / -1), stored as 0 for ``n = 0``.
    ``degenerate`` is set by :func:`ground_state` when another level ties.
    """

    params: ModelParams
    n: int
    eta: int
    c_up: float
    c_dn: float
    norm: float
    energy: float
    parity: int
    degenerate: bool = False

    @property
    def weight_up(self) -> float:
        return self.c_up**2 / self.norm

    @property
    def weight_dn(self) -> float:
        return self.c_dn**2 / self.norm

    @property
    def sigma_x(self) -> float:
        """Global expectation of sigma_x."""
        return (self.c_up**2 - self.c_dn**2) / self.norm

    @property
    def photon_number(self) -> float:
        """Global expectation of a^dag a."""
        if self.n == 0:
            return 0.0
        return (self.n - 1) * self.weight_up + self.n * self.weight_dn

    def fock_vector(self, n_max: int) -> np.ndarray:
        """Normalized amplitudes in the interleaved basis ``|k,UP>, |k,DN>``."""
        if n_max < self.n:
            raise ValueError(f"truncation {n_max} too small for n = {self.n}")
        v = np.zeros(2 * (n_max + 1))
        scale = 1.0 / math.sqrt(self.norm)
        if self.n >= 1:
            v[2 * (self.n - 1)] = self.c_up * scale
        v[2 * self.n + 1] = self.c_dn * scale
        return v


class Level(NamedTuple):
    energy: float
    n: int
    eta: int
    parity: int


def _require_jc(params: ModelParams) -> None:
    if params.lam != 0.0:
        raise ModelDomainError("closed-form solution requires lambda = 0; use the ed module")


def e_plus(params: ModelParams, n):
    """Block mean energy ``(n - (1 + chi)/2) omega``."""
    return (np.asarray(n) - 0.5 * (1.0 + params.chi)) * params.omega


def e_minus(params: ModelParams, n):
    """Block half-splitting ``(Omega - omega)/2 + (n - 1/2) chi omega``."""
    return 0.5 * (params.Omega - params.omega) + (np.asarray(n) - 0.5) * params.chi * params.omega


def stark_detuning(params: ModelParams, n):
    """``Omega - omega + (2n - 1) chi omega``, i.e. ``2 e_minus``."""
    return 2.0 * e_minus(params, n)


def block_matrix(params: ModelParams, n: int) -> np.ndarray:
    """Hamiltonian restricted to ``{|n-1,UP>, |n,DN>}``, built term by term."""
    w, W, chi, g = params.omega, params.Omega, params.chi, params.g
    up = w * (n - 1) + 0.5 * W + chi * w * (n - 1)
    dn = w * n - 0.5 * W - chi * w * n
    off = g * math.sqrt(n)
    return np.array([[up, off], [off, dn]])


def _parity(n: int) -> int:
    return -1 if n == 0 else (1 if (n - 1) % 2 == 0 else -1)


def _check_branch(n: int, eta: int) -> None:
    if int(n) != n or n < 0:
        raise ValueError(f"excitation number must be a non-negative integer, got {n!r}")
    if n >= 1 and eta not in (1, -1):
        raise ValueError(f"branch eta must be +1 or -1, got {eta!r}")


def eigenenergy(params: ModelParams, n: int, eta: int = -1) -> float:
    """``E = e_+ + eta sqrt(e_-^2 + n g^2)``; ``-Omega/2`` for ``n = 0``."""
    _require_jc(params)
    _check_branch(n, eta)
    if n == 0:
        return -0.5 * params.Omega
    return float(_branch_energies(params, np.array([n]), eta)[0])


def _coefficients(params: ModelParams, n: int, eta: int):
    em = float(e_minus(params, n))
    gn = params.g * math.sqrt(n)
    if gn == 0.0:
        # g -> 0+ limit of the normalized closed form
        if em == 0.0:
            return float(eta), 1.0, 2.0
        return (float(eta), 0.0, 1.0) if eta * em > 0 else (0.0, 1.0, 1.0)
    root = math.hypot(em, gn)
    if em == 0.0 or (em > 0) == (eta > 0):
        c_up = em + eta * root
    else:
        # e_- + eta r suffers cancellation here; use (e_-^2 - r^2) / (e_- - eta r)
        c_up = -gn * gn / (em - eta * root)
    big = max(abs(c_up), gn)
    if big < 1e-100:
        # keep the norm representable; only the ratio c_up : c_dn is physical
        c_up, gn = c_up / big, gn / big
    return c_up, gn, c_up * c_up + gn * gn


def eigenstate(params: ModelParams, n: int, eta: int = -1) -> EigenState:
    """Closed-form eigenstate ``psi_n^(eta)`` (or ``|0,DN>`` when ``n = 0``)."""
    _require_jc(params)
    _check_branch(n, eta)
    if n == 0:
        return EigenState(params, 0, 0, 0.0, 1.0, 1.0, -0.5 * params.Omega, -1)
    c_up, c_dn, norm = _coefficients(params, n, eta)
    return EigenState(params, int(n), int(eta), c_up, c_dn, norm,
                      eigenenergy(params, n, eta), _parity(n))


def monotone_bound(params: ModelParams) -> float:
    """Excitation number beyond which both branches increase strictly with n.

    From ``dE/dn >= omega (1 - |chi|) - g / (2 sqrt(n))``.
    Returns ``inf`` when no finite bound exists (``|chi| = 1`` with ``g > 0``).
    """
    slack = params.omega * (1.0 - abs(params.chi))
    if params.g == 0.0:
        return 0.0
    if slack <= 0.0:
        return math.inf
    return (params.g / (2.0 * slack)) ** 2


def _branch_energies(params: ModelParams, ns: np.ndarray, eta: int) -> np.ndarray:
    ns = np.asarray(ns, dtype=float)
    ep = e_plus(params, ns)
    root = np.hypot(e_minus(params, ns), params.g * np.sqrt(ns))
    if eta > 0:
        return ep + root
    # e_+ - root cancels badly at large n; use (e_+^2 - root^2) / (e_+ + root)
    # with the numerator expanded in powers of n (its n^2 terms cancel exactly)
    w, chi = params.omega, params.chi
    p0 = -0.5 * w * (1.0 + chi)
    c0 = 0.5 * (params.Omega - w) - 0.5 * chi * w
    num = (w * w * (1.0 - chi) * (1.0 + chi) * ns * ns
           + (2.0 * w * p0 - 2.0 * chi * w * c0 - params.g**2) * ns + (p0 - c0) * (p0 + c0))
    with np.errstate(divide="ignore", invalid="ignore"):
        stable = num / (ep + root)
    return np.where(ep > 0.0, stable, ep - root)


def _search_limit(params: ModelParams, extra: int) -> int:
    bound = monotone_bound(params)
    if not math.isfinite(bound):
        raise ModelDomainError(
            "|chi| = 1 with g > 0: the lower branch never turns upward, no ground state")
    limit = int(math.ceil(bound)) + extra + 1
    if limit > N_SEARCH_CAP:
        raise CapacityError(f"excitation-number search up to {limit} exceeds {N_SEARCH_CAP}")
    return limit


def spectrum(params: ModelParams, count: int) -> list[Level]:
    """Lowest ``count`` levels, ascending; ties by (n ascending, eta = -1 first)."""
    _require_jc(params)
    if count < 1:
        raise ValueError("count must be >= 1")
    limit = _search_limit(params, count)
    ns = np.arange(1, limit + 1)
    levels = [Level(-0.5 * params.Omega, 0, 0, -1)]
    for eta in (-1, 1):
        energies = _branch_energies(params, ns, eta)
        levels.extend(Level(float(E), int(n), eta, _parity(int(n)))
                      for n, E in zip(ns, energies))
    levels.sort(key=lambda lv: (lv.energy, lv.n, lv.eta))
    return levels[:count]


def _lower_branch_minimum(params: ModelParams, limit: int) -> int:
    """Integer minimizer of ``E^(n,-)`` over ``1 <= n <= limit`` without a table.

    ``E^(n,-) = e_+(n) - sqrt(Q(n))`` with ``Q = e_-^2 + n g^2`` quadratic in
    ``n``.  ``sqrt(Q)`` is concave when ``Q`` has a non-negative
    discriminant, making the branch convex (forward differences increase,
    so bisect on their sign); otherwise the branch is concave and, being
    increasing beyond the bound, increasing throughout: the minimum is n = 1.
    """
    def E(n):
        return float(_branch_energies(params, np.array([float(n)]), -1)[0])

    a = (params.chi * params.omega) ** 2
    c0 = 0.5 * (params.Omega - params.omega) - 0.5 * params.chi * params.omega
    b = 2.0 * params.chi * params.omega * c0 + params.g**2
    if b * b - 4.0 * a * c0 * c0 < 0.0:
        return 1
    lo, hi = 1, limit
    while lo < hi:
        mid = (lo + hi) // 2
        if E(mid + 1) - E(mid) >= 0.0:
            hi = mid
        else:
            lo = mid + 1
    return lo


def ground_state(params: ModelParams) -> EigenState:
    """Lowest of ``|0,DN>`` and the ``eta = -1`` states.

    The search runs up to :func:`monotone_bound`, past which the lower branch
    is strictly increasing; very large bounds (``|chi|`` close to 1) switch
    from a full scan to a convexity-based bisection.  On an exact tie the
    smaller ``n`` wins and the returned state has ``degenerate=True``.
    """
    _require_jc(params)
    bound = monotone_bound(params)
    if not math.isfinite(bound):
        raise ModelDomainError(
            "|chi| = 1 with g > 0: the lower branch never turns upward, no ground state")
    limit = int(math.ceil(bound)) + 2
    if limit <= FULL_SCAN_LIMIT:
        ns = np.arange(0, limit + 1)
    else:
        if limit > BISECTION_LIMIT:
            raise CapacityError(f"excitation-number search up to {limit} exceeds {BISECTION_LIMIT}")
        best = _lower_branch_minimum(params, limit)
        ns = np.unique(np.clip([0, 1, best - 1, best, best + 1], 0, limit))
    energies = np.empty(len(ns))
    energies[ns == 0] = -0.5 * params.Omega
    energies[ns > 0] = _branch_energies(params, ns[ns > 0], -1)
    best = int(np.argmin(energies))
    tol = TIE_RTOL * (abs(energies[best]) + params.Omega + params.omega)
    ties = np.flatnonzero(energies <= energies[best] + tol)
    n0 = int(ns[ties[0]])
    state = eigenstate(params, n0, -1)
    if len(ties) > 1:
        state = replace(state, degenerate=True)
    return state

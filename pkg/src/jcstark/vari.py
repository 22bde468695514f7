"""Variational energy of the two-state ansatz and the order-parameter picture.

The ansatz ``sqrt(1 - w^2) |n-1,UP> + w |n,DN>`` gives

    eps(w) = eps_0 - A_w w^2 + 2 sqrt(n) g w sqrt(1 - w^2),

with ``eps_0 = (1 + chi) omega (n - 1) + Omega/2`` and
``A_w = [(2n - 1) chi - 1] omega + Omega``.  Its minimum and maximum over
``w`` are the exact ``eta = -1`` and ``eta = +1`` energies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelDomainError
from .model import ModelParams, ground_state

__all__ = [
    "VariationalCurve",
    "TransitionReport",
    "bare_energy",
    "stark_offset",
    "variational_energy",
    "stationary_weights",
    "order_parameters",
    "energy_functional",
    "variational_curve",
    "ground_order_parameters",
    "transition_diagnostic",
]


def _require(params: ModelParams, n: int) -> None:
    if params.lam != 0.0:
        raise ModelDomainError("the variational ansatz is defined for lambda = 0")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n!r}")


def bare_energy(params: ModelParams, n: int) -> float:
    """``eps_0``: energy of the bare ``|n-1,UP>`` state."""
    return (1.0 + params.chi) * params.omega * (n - 1) + 0.5 * params.Omega


def stark_offset(params: ModelParams, n: int) -> float:
    """``A_w = [(2n-1) chi - 1] omega + Omega`` (bare ``UP`` minus ``DN`` energy)."""
    return ((2 * n - 1) * params.chi - 1.0) * params.omega + params.Omega


def variational_energy(params: ModelParams, n: int, w):
    """``eps(w)`` for weight ``w`` in ``[-1, 1]`` on ``|n,DN>``."""
    _require(params, n)
    w = np.asarray(w, dtype=float)
    if np.any(np.abs(w) > 1.0):
        raise ModelDomainError("w must lie in [-1, 1]")
    eps = (bare_energy(params, n) - stark_offset(params, n) * w**2
           + 2.0 * math.sqrt(n) * params.g * w * np.sqrt(1.0 - w**2))
    return eps if eps.ndim else float(eps)


def stationary_weights(params: ModelParams, n: int) -> tuple[float, float]:
    """``(w_plus, w_minus)``: maximizer and minimizer of ``eps(w)``.

    With ``R = sqrt(4 g^2 n + A_w^2)``: ``w_minus = -sqrt((R + A_w) / 2R)``
    gives the ``eta = -1`` energy and ``w_plus = +sqrt((R - A_w) / 2R)`` the
    ``eta = +1`` energy.  At ``g = 0`` (``R = |A_w|``) these reduce to the
    bare states; for ``A_w = 0`` as well both weights are ``-+1/sqrt(2)``.
    """
    _require(params, n)
    A = stark_offset(params, n)
    R = math.hypot(2.0 * params.g * math.sqrt(n), A)
    if R == 0.0:
        return math.sqrt(0.5), -math.sqrt(0.5)
    return math.sqrt(max(0.0, (R - A) / (2.0 * R))), -math.sqrt(max(0.0, (R + A) / (2.0 * R)))


def order_parameters(n: int, w):
    """``(<sigma_x>, <n>) = (1 - 2 w^2, n - 1 + w^2)`` of the ansatz."""
    w = np.asarray(w, dtype=float)
    sx, nm = 1.0 - 2.0 * w**2, n - 1.0 + w**2
    return (sx, nm) if sx.ndim else (float(sx), float(nm))


def energy_functional(params: ModelParams, n: int, eta: int, *, sx_value=None, n_value=None):
    """``eps`` as a function of ``<sigma_x>`` or ``<n>`` on branch ``eta``.

    ``eps = eps_0 - C_eps (1 - <sigma_x>) + eta sqrt(n) g sqrt(1 - <sigma_x>^2)``
    with ``C_eps = (Omega - omega)/2 + (n - 1/2) chi omega``; the ``<n>``
    form substitutes ``<sigma_x> = 1 - 2 (<n> - n + 1)``.
    """
    _require(params, n)
    if eta not in (1, -1):
        raise ValueError("eta must be +1 or -1")
    if (sx_value is None) == (n_value is None):
        raise ValueError("give exactly one of sx_value, n_value")
    if n_value is not None:
        m = np.asarray(n_value, dtype=float)
        if np.any(m < n - 1) or np.any(m > n):
            raise ModelDomainError(f"<n> must lie in [{n - 1}, {n}]")
        s = 1.0 - 2.0 * (m - (n - 1))
    else:
        s = np.asarray(sx_value, dtype=float)
        if np.any(np.abs(s) > 1.0):
            raise ModelDomainError("<sigma_x> must lie in [-1, 1]")
    c_eps = 0.5 * (params.Omega - params.omega) + (n - 0.5) * params.chi * params.omega
    eps = (bare_energy(params, n) - c_eps * (1.0 - s)
           + eta * math.sqrt(n) * params.g * np.sqrt(np.clip(1.0 - s**2, 0.0, None)))
    return eps if eps.ndim else float(eps)


@dataclass
class VariationalCurve:
    """Sampled variational energies for one ``n``.

    ``kind`` is ``"w"`` (parameter ``|w|`` in [0, 1]; ``eps_minus`` at
    ``-|w|`` and ``eps_plus`` at ``+|w|``), ``"sigma_x"`` or ``"n"`` (the two
    order-parameter branches ``eta = -1`` / ``+1``).
    """

    n: int
    kind: str
    param: np.ndarray
    eps_minus: np.ndarray
    eps_plus: np.ndarray


def variational_curve(params: ModelParams, n: int, kind: str = "w", samples: int = 201) -> VariationalCurve:
    if kind == "w":
        w = np.linspace(0.0, 1.0, samples)
        return VariationalCurve(n, kind, w, variational_energy(params, n, -w),
                                variational_energy(params, n, w))
    if kind == "sigma_x":
        s = np.linspace(-1.0, 1.0, samples)
        return VariationalCurve(n, kind, s, energy_functional(params, n, -1, sx_value=s),
                                energy_functional(params, n, 1, sx_value=s))
    if kind == "n":
        m = np.linspace(n - 1.0, float(n), samples)
        return VariationalCurve(n, kind, m, energy_functional(params, n, -1, n_value=m),
                                energy_functional(params, n, 1, n_value=m))
    raise ValueError(f"unknown curve kind {kind!r}")


def ground_order_parameters(params: ModelParams, g_values) -> dict[str, np.ndarray]:
    """Ground-state ``<sigma_x>``, ``<n>`` and energy along a ``g`` sweep."""
    g_values = np.asarray(g_values, dtype=float)
    out = {"g": g_values, "sigma_x": np.empty(len(g_values)), "n_mean": np.empty(len(g_values)),
           "energy": np.empty(len(g_values)), "n": np.empty(len(g_values), dtype=int)}
    for i, g in enumerate(g_values):
        s = ground_state(params.with_(g=float(g)))
        out["sigma_x"][i], out["n_mean"][i] = s.sigma_x, s.photon_number
        out["energy"][i], out["n"][i] = s.energy, s.n
    return out


@dataclass
class TransitionReport:
    """First transition out of ``psi_0`` located on the variational energy."""

    g_cross: float
    order: str
    sigma_x_before: float
    sigma_x_after: float
    n_mean_before: float
    n_mean_after: float
    window: float

    @property
    def sigma_x_jump(self) -> float:
        return self.sigma_x_after - self.sigma_x_before

    @property
    def n_mean_jump(self) -> float:
        return self.n_mean_after - self.n_mean_before


def _min_eps_gap(params: ModelParams, g: float) -> float:
    p = params.with_(g=g)
    _, w_min = stationary_weights(p, 1)
    return variational_energy(p, 1, w_min) - (-0.5 * params.Omega)


def transition_diagnostic(params: ModelParams, window: float = 1e-6,
                          xtol: float = 1e-15) -> TransitionReport:
    """Bisect ``min_w eps(n=1) = E^0`` in ``g`` and measure the order-parameter jump.

    The ground state is evaluated at ``g_cross -+ window/2``; a finite jump
    in ``<sigma_x>`` and ``<n>`` over an arbitrarily small window marks the
    transition as first order.
    """
    _require(params, 1)
    lo = 0.0
    if _min_eps_gap(params, lo) <= 0.0:
        raise ModelDomainError("psi_0 is not the ground state at g = 0")
    hi = max(params.g_s, 1e-3)
    while _min_eps_gap(params, hi) > 0.0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise ModelDomainError("no transition out of psi_0 (chi = 1?)")
    while hi - lo > xtol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _min_eps_gap(params, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    g_cross = 0.5 * (lo + hi)
    before = ground_state(params.with_(g=max(0.0, g_cross - 0.5 * window)))
    after = ground_state(params.with_(g=g_cross + 0.5 * window))
    jump = abs(after.sigma_x - before.sigma_x)
    return TransitionReport(g_cross, "first" if jump > 0.0 else "continuous",
                            before.sigma_x, after.sigma_x,
                            before.photon_number, after.photon_number, window)

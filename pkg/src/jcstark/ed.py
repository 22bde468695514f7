"""Exact diagonalization of the truncated anisotropic model.

Basis: photon number ``k = 0..n_max`` times the sigma_x eigenstates,
interleaved as ``|k,UP>`` at index ``2k`` and ``|k,DN>`` at ``2k + 1``.  In
this basis both the rotating (``g``) and counter-rotating (``lam g``)
couplings are real off-diagonal entries, and at ``lam = 0`` the matrix
splits into excitation-number blocks ``{|n-1,UP>, |n,DN>}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import CapacityError, NumericalError, ParameterError
from .model import ModelParams, eigenenergy, eigenstate
from .texture import SampledTexture
from .winding import winding_integral

__all__ = [
    "MAX_DIMENSION",
    "TruncatedHamiltonian",
    "SpectrumResult",
    "Crossing",
    "GapMinimum",
    "TrackedLevel",
    "build_hamiltonian",
    "counter_rotating_matrix",
    "parity_diagonal",
    "photon_parity_diagonal",
    "spin_parity_diagonal",
    "commutator_norm",
    "default_truncation",
    "diagonalize",
    "excitation_weights",
    "perturbative_d",
    "perturbative_gap",
    "crossing_coupling",
    "find_crossings",
    "level_gap",
    "minimum_gap",
    "track_level",
    "numeric_texture",
    "numeric_winding",
    "sweep",
]

MAX_DIMENSION = 20000
DEGENERACY_TOL = 1e-10
OVERLAP_MIN = 0.9


@dataclass(frozen=True)
class TruncatedHamiltonian:
    params: ModelParams
    n_max: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _check_truncation(n_max: int) -> int:
    if int(n_max) != n_max or n_max < 2:
        raise ParameterError(f"n_max must be an integer >= 2, got {n_max!r}")
    if 2 * (int(n_max) + 1) > MAX_DIMENSION:
        raise CapacityError(f"dimension {2 * (n_max + 1)} exceeds {MAX_DIMENSION}")
    return int(n_max)


def default_truncation(n_interest: int) -> int:
    """Four times the largest excitation number of interest, at least 60."""
    return max(60, 4 * int(n_interest))


def counter_rotating_matrix(params: ModelParams, n_max: int) -> np.ndarray:
    """``lam g (|k+1,UP><k,DN| + h.c.)`` with amplitude ``lam g sqrt(k+1)``."""
    n_max = _check_truncation(n_max)
    dim = 2 * (n_max + 1)
    out = np.zeros((dim, dim))
    k = np.arange(n_max)
    amp = params.lam * params.g * np.sqrt(k + 1.0)
    out[2 * (k + 1), 2 * k + 1] = amp
    out[2 * k + 1, 2 * (k + 1)] = amp
    return out


def build_hamiltonian(params: ModelParams, n_max: int) -> TruncatedHamiltonian:
    """Dense real symmetric Hamiltonian on photon numbers ``0..n_max``."""
    n_max = _check_truncation(n_max)
    w, W, chi, g = params.omega, params.Omega, params.chi, params.g
    k = np.arange(n_max + 1, dtype=float)
    dim = 2 * (n_max + 1)
    h = np.zeros((dim, dim))
    idx = np.arange(n_max + 1)
    h[2 * idx, 2 * idx] = w * k + 0.5 * W + chi * w * k
    h[2 * idx + 1, 2 * idx + 1] = w * k - 0.5 * W - chi * w * k
    # rotating coupling |n-1,UP> <-> |n,DN>, amplitude g sqrt(n)
    n = np.arange(1, n_max + 1)
    h[2 * (n - 1), 2 * n + 1] = g * np.sqrt(n)
    h[2 * n + 1, 2 * (n - 1)] = g * np.sqrt(n)
    h += counter_rotating_matrix(params, n_max)
    return TruncatedHamiltonian(params, n_max, h)


def photon_parity_diagonal(n_max: int) -> np.ndarray:
    """Diagonal of ``(-1)^{a^dag a}`` in the interleaved basis."""
    k = np.repeat(np.arange(n_max + 1), 2)
    return np.where(k % 2 == 0, 1.0, -1.0)


def spin_parity_diagonal(n_max: int) -> np.ndarray:
    """Diagonal of ``sigma_x`` (UP = +1, DN = -1) in the interleaved basis."""
    return np.tile([1.0, -1.0], n_max + 1)


def parity_diagonal(n_max: int) -> np.ndarray:
    """Diagonal of ``P = sigma_x (-1)^{a^dag a}``."""
    return photon_parity_diagonal(n_max) * spin_parity_diagonal(n_max)


def commutator_norm(h: TruncatedHamiltonian) -> float:
    """``||[H, P]||_F / ||H||_F``."""
    p = parity_diagonal(h.n_max)
    comm = h.matrix * p[None, :] - p[:, None] * h.matrix
    return float(np.linalg.norm(comm) / np.linalg.norm(h.matrix))


@dataclass
class SpectrumResult:
    """Lowest eigenpairs; ``vectors[:, i]`` belongs to ``energies[i]``."""

    params: ModelParams
    n_max: int
    energies: np.ndarray
    vectors: np.ndarray
    parities: np.ndarray
    residuals: np.ndarray = field(default_factory=lambda: np.array([]))

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.energies)

    def __len__(self) -> int:
        return len(self.energies)


def _rotate_degenerate(energies, vectors, p_diag, scale):
    """Rotate each degenerate cluster so that its vectors diagonalize P."""
    i = 0
    while i < len(energies):
        j = i + 1
        while j < len(energies) and energies[j] - energies[j - 1] < DEGENERACY_TOL * scale:
            j += 1
        if j - i > 1:
            block = vectors[:, i:j]
            _, rot = np.linalg.eigh(block.T @ (p_diag[:, None] * block))
            vectors[:, i:j] = block @ rot
        i = j
    return vectors


def diagonalize(h: TruncatedHamiltonian, levels: int | None = None) -> SpectrumResult:
    """Full symmetric eigendecomposition, keeping the lowest ``levels``.

    Degenerate clusters are rotated into parity eigenstates, each vector is
    signed so its largest-magnitude entry is positive, and parities are
    ``v . P v``.
    """
    levels = h.dim if levels is None else int(levels)
    if not 1 <= levels <= h.dim:
        raise ValueError(f"levels must lie in [1, {h.dim}]")
    try:
        energies, vectors = np.linalg.eigh(h.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    p_diag = parity_diagonal(h.n_max)
    scale = max(1.0, float(np.max(np.abs(energies))))
    vectors = _rotate_degenerate(energies, vectors, p_diag, scale)
    energies, vectors = energies[:levels], vectors[:, :levels]
    peak = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[peak, np.arange(levels)])
    vectors = vectors * signs
    parities = np.einsum("ij,i,ij->j", vectors, p_diag, vectors)
    residuals = np.linalg.norm(h.matrix @ vectors - vectors * energies, axis=0)
    return SpectrumResult(h.params, h.n_max, energies, vectors, parities, residuals)


def excitation_weights(vector: np.ndarray) -> np.ndarray:
    """Weight in each excitation block: entry ``n`` for ``{|n-1,UP>, |n,DN>}``.

    The top photon state ``|n_max,UP>`` belongs to block ``n_max + 1``.
    """
    v2 = np.asarray(vector, dtype=float) ** 2
    n_max = len(v2) // 2 - 1
    w = np.zeros(n_max + 2)
    w[: n_max + 1] += v2[1::2]
    w[1:] += v2[0::2]
    return w


def _jc_params(params: ModelParams) -> ModelParams:
    return params.with_(lam=0.0)


def perturbative_d(params: ModelParams, n: int, eta: int, n_prime: int, eta_prime: int) -> float:
    """Counter-rotating matrix element between two exact JC-Stark states.

    ``lam g sqrt(n'+1) C_{n,UP} C_{n',DN} / sqrt(N_n N_n')`` for ``n = n' + 2``
    and ``lam g sqrt(n'-1) C_{n,DN} C_{n',UP} / sqrt(N_n N_n')`` for
    ``n = n' - 2``; zero otherwise.
    """
    if params.lam == 0.0 or params.g == 0.0:
        return 0.0
    jc = _jc_params(params)
    a = eigenstate(jc, n, eta)
    b = eigenstate(jc, n_prime, eta_prime)
    pre = params.lam * params.g / math.sqrt(a.norm * b.norm)
    if n == n_prime + 2:
        return pre * math.sqrt(n_prime + 1) * a.c_up * b.c_dn
    if n == n_prime - 2:
        return pre * math.sqrt(n_prime - 1) * a.c_dn * b.c_up
    return 0.0


def perturbative_gap(params: ModelParams, n: int, eta: int, n_prime: int, eta_prime: int) -> float:
    """Two-level splitting ``sqrt((E - E')^2 + 4 d^2)`` from the lam = 0 energies."""
    jc = _jc_params(params)
    diff = eigenenergy(jc, n, eta) - eigenenergy(jc, n_prime, eta_prime)
    d = perturbative_d(params, n, eta, n_prime, eta_prime)
    return math.hypot(diff, 2.0 * d)


def _level_energy(params: ModelParams, label: tuple[int, int]) -> float:
    n, eta = label
    return eigenenergy(params, n, eta if n > 0 else -1)


def crossing_coupling(params: ModelParams, a: tuple[int, int], b: tuple[int, int],
                      g_lo: float, g_hi: float) -> float:
    """Coupling in ``[g_lo, g_hi]`` where the lam = 0 levels ``a`` and ``b`` cross."""
    jc = _jc_params(params)

    def diff(g):
        p = jc.with_(g=g)
        return _level_energy(p, a) - _level_energy(p, b)

    return brentq(diff, g_lo, g_hi, xtol=1e-15, rtol=1e-15)


@dataclass(frozen=True)
class Crossing:
    """A lam = 0 crossing between levels ``index`` and ``index + 1``.

    ``below`` / ``above`` are the ``(n, eta)`` labels of the lower level on
    the weak- / strong-coupling side of the crossing.
    """

    g: float
    index: int
    below: tuple[int, int]
    above: tuple[int, int]

    @property
    def same_parity(self) -> bool:
        return (self.below[0] - self.above[0]) % 2 == 0


def _lowest_labels(params: ModelParams, count: int) -> list[tuple[int, int]]:
    from .model import spectrum

    return [(lv.n, lv.eta) for lv in spectrum(params, count)]


def find_crossings(params: ModelParams, g_lo: float, g_hi: float, levels: int = 3,
                   samples: int = 400) -> list[Crossing]:
    """Crossings between neighbouring levels among the lowest ``levels`` (lam = 0).

    Label pairs taken from the lowest ``levels + 1`` levels on a uniform
    ``g`` grid are tested for a sign change of their energy difference;
    each change is polished with Brent's method and kept when, at the
    crossing, the pair occupies positions ``index, index + 1 < levels``.
    """
    jc = _jc_params(params)
    gs = np.linspace(g_lo, g_hi, samples)
    found = {}
    prev = _lowest_labels(jc.with_(g=gs[0]), levels + 1)
    for g0, g1 in zip(gs[:-1], gs[1:]):
        cur = _lowest_labels(jc.with_(g=g1), levels + 1)
        if cur == prev:
            continue
        labels = sorted(set(prev) | set(cur))
        for ia, la in enumerate(labels):
            for lb in labels[ia + 1:]:
                d0 = _level_energy(jc.with_(g=g0), la) - _level_energy(jc.with_(g=g0), lb)
                d1 = _level_energy(jc.with_(g=g1), la) - _level_energy(jc.with_(g=g1), lb)
                if d0 * d1 >= 0.0:
                    continue
                gc = crossing_coupling(jc, la, lb, g0, g1)
                below, above = (la, lb) if d0 < 0 else (lb, la)
                ordered = _lowest_labels(jc.with_(g=gc), levels + 2)
                positions = [ordered.index(x) for x in (la, lb) if x in ordered]
                if len(positions) == 2 and max(positions) < levels and abs(positions[0] - positions[1]) == 1:
                    found[(below, above)] = Crossing(gc, min(positions), below, above)
        prev = cur
    return sorted(found.values(), key=lambda c: (c.g, c.index))


def level_gap(params: ModelParams, g: float, index: int, n_max: int) -> float:
    """ED gap ``E_{index+1} - E_index`` at coupling ``g``."""
    spec = diagonalize(build_hamiltonian(params.with_(g=g), n_max), index + 2)
    return float(spec.energies[index + 1] - spec.energies[index])


@dataclass(frozen=True)
class GapMinimum:
    g: float
    gap: float


def minimum_gap(params: ModelParams, index: int, g_lo: float, g_hi: float,
                n_max: int, xatol: float | None = None) -> GapMinimum:
    """Minimum of the ED gap ``E_{index+1} - E_index`` over ``[g_lo, g_hi]``.

    Bounded Brent/golden-section search.  If the minimum sits on the edge of
    the window the window is widened (up to four times) before giving up.
    """
    for _ in range(5):
        tol = xatol if xatol is not None else 1e-9 * max(1.0, g_hi)
        res = minimize_scalar(lambda g: level_gap(params, g, index, n_max),
                              bounds=(g_lo, g_hi), method="bounded",
                              options={"xatol": tol, "maxiter": 500})
        width = g_hi - g_lo
        if res.x - g_lo > 0.01 * width and g_hi - res.x > 0.01 * width:
            return GapMinimum(float(res.x), float(res.fun))
        g_lo, g_hi = max(0.0, g_lo - width), g_hi + width
    raise NumericalError("gap minimum not bracketed inside the search window")


def numeric_texture(spectrum: SpectrumResult, index: int, cutoff: float = 1e-10) -> SampledTexture:
    """Spin texture of ED level ``index`` (sigma_z-basis Fock expansion)."""
    return SampledTexture.from_sigma_x_vector(spectrum.vectors[:, index], cutoff=cutoff)


def numeric_winding(spectrum: SpectrumResult, index: int, cutoff: float = 1e-10) -> int:
    return winding_integral(numeric_texture(spectrum, index, cutoff)).n_w


@dataclass
class TrackedLevel:
    """A level followed across ``g`` by maximal eigenvector overlap."""

    g: np.ndarray
    index: np.ndarray
    energy: np.ndarray
    parity: np.ndarray
    overlap: np.ndarray
    vectors: list = field(default_factory=list, repr=False)


def track_level(params: ModelParams, g_values, start_index: int, n_max: int,
                levels: int | None = None, max_depth: int = 12) -> TrackedLevel:
    """Follow one level through a ``g`` sweep by eigenvector overlap.

    Between consecutive sweep points the step is halved until the best
    overlap with the previous vector exceeds 0.9; ties are broken by the
    smaller energy change.  Only the requested ``g_values`` are reported.
    """
    g_values = np.asarray(g_values, dtype=float)
    levels = levels or start_index + 6

    def solve(g):
        return diagonalize(build_hamiltonian(params.with_(g=g), n_max), levels)

    def step(spec_prev, j_prev, g_prev, g_next, depth):
        spec = solve(g_next)
        ov = np.abs(spec.vectors.T @ spec_prev.vectors[:, j_prev])
        best = float(np.max(ov))
        if best < OVERLAP_MIN and depth < max_depth:
            g_mid = 0.5 * (g_prev + g_next)
            spec_mid, j_mid, _ = step(spec_prev, j_prev, g_prev, g_mid, depth + 1)
            return step(spec_mid, j_mid, g_mid, g_next, depth + 1)
        candidates = np.flatnonzero(ov >= best - 1e-9)
        e_prev = spec_prev.energies[j_prev]
        j = int(candidates[np.argmin(np.abs(spec.energies[candidates] - e_prev))])
        return spec, j, best

    spec = solve(g_values[0])
    j = int(start_index)
    out = TrackedLevel(g_values, np.empty(len(g_values), int), np.empty(len(g_values)),
                       np.empty(len(g_values), int), np.empty(len(g_values)))
    out.index[0], out.energy[0], out.overlap[0] = j, spec.energies[j], 1.0
    out.parity[0] = int(round(spec.parities[j]))
    out.vectors.append(spec.vectors[:, j].copy())
    for k in range(1, len(g_values)):
        spec, j, best = step(spec, j, g_values[k - 1], g_values[k], 0)
        out.index[k], out.energy[k], out.overlap[k] = j, spec.energies[j], best
        out.parity[k] = int(round(spec.parities[j]))
        out.vectors.append(spec.vectors[:, j].copy())
    return out


def sweep(params: ModelParams, g_values, levels: int, n_max: int,
          winding: bool = True, cutoff: float = 1e-10) -> list[dict]:
    """Records ``{g, level, energy, parity, n_w}`` for the lowest levels at each ``g``.

    ``level`` is the 1-based energy index ``j_E``.
    """
    records = []
    for g in np.asarray(g_values, dtype=float):
        spec = diagonalize(build_hamiltonian(params.with_(g=float(g)), n_max), levels)
        for i in range(levels):
            n_w = numeric_winding(spec, i, cutoff) if winding else None
            records.append({"g": float(g), "level": i + 1, "energy": float(spec.energies[i]),
                            "parity": int(round(spec.parities[i])), "n_w": n_w})
    return records

"""Bloch-mode (DFT) view of circulant Laplacians: dispersion relations,
eigenvalues, spectral synthesis, the infinite-chain contour integral and
group velocities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain_model import (
    ChainConfig,
    CharacteristicSpec,
    CirculantLaplacian,
    ExplicitTerms,
    require_admissible,
)
from .errors import InputError, QuadratureError, SynthesisError

SYNTHESIS_IMAG_TOLERANCE = 1e-10
QUADRATURE_TOLERANCE = 1e-10
# below this |kappa| the group velocity uses its kappa -> 0 limit
_SMALL_KAPPA = 1e-8


def mode_wavenumbers(n: int) -> np.ndarray:
    """Dimensionless wave numbers ``2*pi*s/N`` folded into ``(-pi, pi]``, ordered by s."""
    s = np.arange(n)
    folded = np.where(s <= n // 2, s, s - n)
    return 2.0 * np.pi * folded / n


def _lambda(kappa) -> np.ndarray:
    return 4.0 * np.sin(np.asarray(kappa, dtype=float) / 2.0) ** 2


@dataclass(frozen=True)
class BlochBasis:
    """Orthonormal Bloch vectors ``v_p(kappa_s) = exp(i kappa_s p) / sqrt(N)``."""

    n: int

    @property
    def kappa(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n) / self.n

    def vector(self, s: int) -> np.ndarray:
        p = np.arange(self.n)
        return np.exp(1j * self.kappa[s % self.n] * p) / np.sqrt(self.n)

    def matrix(self) -> np.ndarray:
        """Columns are the Bloch vectors, s = 0..N-1."""
        p = np.arange(self.n)
        return np.exp(1j * np.outer(p, self.kappa)) / np.sqrt(self.n)

    def modal_amplitudes(self, u) -> np.ndarray:
        """``u_hat(kappa_s) = u . conj(v(kappa_s))``."""
        return np.fft.fft(np.asarray(u)) / np.sqrt(self.n)

    def from_modal(self, u_hat) -> np.ndarray:
        return np.fft.ifft(np.asarray(u_hat)) * np.sqrt(self.n)


@dataclass(frozen=True, eq=False)
class DispersionTable:
    s: np.ndarray
    kappa: np.ndarray
    omega_sq: np.ndarray
    group_velocity: np.ndarray

    def __len__(self):
        return self.s.size

    def rows(self):
        for row in zip(self.s, self.kappa, self.omega_sq, self.group_velocity):
            yield int(row[0]), float(row[1]), float(row[2]), float(row[3])


def omega_sq(spec: CharacteristicSpec, kappa, spacing: float = 1.0) -> np.ndarray:
    """``f(4 sin^2(kappa/2))``."""
    return spec.evaluate(_lambda(kappa), spacing)


def dispersion(spec: CharacteristicSpec, config: ChainConfig) -> DispersionTable:
    """Dispersion relation sampled at every Bloch mode of the chain."""
    require_admissible(spec, config.spacing)
    kappa = mode_wavenumbers(config.n_particles)
    return DispersionTable(
        s=np.arange(config.n_particles),
        kappa=kappa,
        omega_sq=omega_sq(spec, kappa, config.spacing),
        group_velocity=group_velocity(spec, config, kappa),
    )


def eigenvalues(lap: CirculantLaplacian) -> np.ndarray:
    """Eigenvalues ``-mu * omega_s^2`` ordered by mode index s (not by size)."""
    return np.fft.fft(lap.first_row).real


def synthesize_laplacian(spec: CharacteristicSpec, config: ChainConfig) -> CirculantLaplacian:
    """Build the Laplacian from its spectrum by an inverse DFT.

    Uses the closed form of ``f`` where one exists (Gaussian family), so this
    route is independent of the series truncation used by ``build_laplacian``.
    """
    require_admissible(spec, config.spacing)
    n = config.n_particles
    spectrum = -config.mu * omega_sq(spec, mode_wavenumbers(n), config.spacing)
    row = np.fft.ifft(spectrum)
    scale = float(np.max(np.abs(row.real))) or 1.0
    imag = float(np.max(np.abs(row.imag)))
    if imag > SYNTHESIS_IMAG_TOLERANCE * scale:
        raise SynthesisError(f"synthesized row has imaginary part {imag:.3e}")
    real = row.real
    # project onto real-even sequences
    real = 0.5 * (real + np.roll(real[::-1], 1))
    return CirculantLaplacian(real, config).check_invariants()


# --------------------------------------------------------------------------
# Infinite chain (N -> infinity): contour integral on |xi| = 1
# --------------------------------------------------------------------------


def _contour_elements(spec, points: int, mass: float, spacing: float) -> tuple[np.ndarray, float]:
    """Trapezoidal rule on the unit circle for all offsets at once.

    Element r is ``(1/M) sum_j g(kappa_j) exp(i kappa_j r)`` with
    ``g(kappa) = -mu f(2 - xi - 1/xi)``, ``xi = exp(i kappa)``.
    """
    kappa = 2.0 * np.pi * np.arange(points) / points
    g = -mass * spec.evaluate(2.0 - 2.0 * np.cos(kappa), spacing)
    return np.fft.ifft(g).real, float(np.max(np.abs(g)))


def infinite_chain_elements(
    spec: CharacteristicSpec,
    max_offset: int,
    quadrature_points: int = 256,
    *,
    mass: float = 1.0,
    spacing: float = 1.0,
    tolerance: float = QUADRATURE_TOLERANCE,
) -> np.ndarray:
    """Infinite-chain Laplacian elements for offsets ``0..max_offset``.

    Evaluated at M, 2M and 4M quadrature points; both doublings must agree
    to ``tolerance`` relative to ``max |mu f|`` (the bound on any element),
    otherwise ``QuadratureError``. The 4M values are returned.
    """
    if quadrature_points < 64:
        raise InputError(f"quadrature_points must be >= 64, got {quadrature_points}")
    if max_offset < 0:
        raise InputError(f"offset must be >= 0, got {max_offset}")
    points = int(quadrature_points)
    while points <= 2 * max_offset:
        points *= 2
    results = []
    scale = 0.0
    for k in range(3):
        elements, g_max = _contour_elements(spec, points << k, mass, spacing)
        results.append(elements[: max_offset + 1])
        scale = max(scale, g_max)
    scale = scale or 1.0
    for coarse, fine in zip(results, results[1:]):
        change = float(np.max(np.abs(fine - coarse)))
        if change > tolerance * scale:
            raise QuadratureError(
                f"contour quadrature not converged: doubling from {points} points "
                f"changes elements by {change:.3e} (scale {scale:.3e})"
            )
    return results[-1]


def infinite_chain_element(
    spec: CharacteristicSpec,
    r: int,
    quadrature_points: int = 256,
    *,
    mass: float = 1.0,
    spacing: float = 1.0,
) -> float:
    """Laplacian element at offset ``|p - q| = r`` of the infinite chain.

    >>> from nonlocal_chain.chain_model import ExplicitTerms, Term
    >>> round(infinite_chain_element(ExplicitTerms((Term(1, 1, 1.0),)), 1), 12)
    1.0
    """
    r = abs(int(r))
    return float(
        infinite_chain_elements(spec, r, quadrature_points, mass=mass, spacing=spacing)[r]
    )


def periodized_first_row(
    spec: CharacteristicSpec,
    config: ChainConfig,
    quadrature_points: int = 256,
    support: int | None = None,
) -> np.ndarray:
    """Finite-N first row as the aliasing sum ``sum_j I(r + jN)`` of infinite-chain elements.

    ``support`` bounds the offsets kept; it defaults to the polynomial degree
    for explicit terms and to half the quadrature grid otherwise.
    """
    if support is None:
        if isinstance(spec, ExplicitTerms):
            support = spec.max_order
        else:
            support = quadrature_points // 2 - 1
    elements = infinite_chain_elements(
        spec, support, quadrature_points, mass=config.mu, spacing=config.spacing
    )
    n = config.n_particles
    row = np.zeros(n)
    for r in range(-support, support + 1):
        row[r % n] += elements[abs(r)]
    return row


# --------------------------------------------------------------------------
# Group velocity
# --------------------------------------------------------------------------


def group_velocity(spec: CharacteristicSpec, config: ChainConfig, kappa) -> np.ndarray:
    """``v = h d(omega)/d(kappa) = h f'(lam) sin(kappa) / omega`` with ``lam = 4 sin^2(kappa/2)``.

    At ``kappa = 0`` the long-wave sound speed ``h sqrt(a_1 Omega_1^2)`` is
    returned (0 when the chain has no first-order term).
    """
    h = config.spacing
    kappa = np.asarray(kappa, dtype=float)
    if np.any(np.abs(kappa) > np.pi * (1 + 1e-12)):
        raise InputError("kappa must lie in the first Brillouin zone [-pi, pi]")
    lam = _lambda(kappa)
    w_sq = spec.evaluate(lam, h)
    dfdl = spec.derivative(lam, h)
    small = np.abs(kappa) < _SMALL_KAPPA
    slope0 = float(spec.derivative(0.0, h))  # a_1 * Omega_1^2
    limit = h * np.sqrt(max(slope0, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        v = h * dfdl * np.sin(kappa) / np.sqrt(w_sq)
    v = np.where(small, np.where(kappa < 0, -limit, limit), v)
    return v if v.ndim else float(v)

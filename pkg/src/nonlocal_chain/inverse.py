"""Reconstruction of the discrete chain from long-wave coefficients, and the
Gaussian-kernel benchmark.

Given ``A_m`` (and signs ``a_m``) from the long-wave dispersion
``omega~^2(k) = sum a_m A_m k^(2m)``, the lattice constants are
``Omega_m^2 = A_m / h^(2m)`` and the whole Brillouin zone follows from
``omega^2(kappa) = f(4 sin^2(kappa/2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain_model import (
    ChainConfig,
    Density,
    ExplicitTerms,
    GaussianFamily,
    Term,
    require_admissible,
)
from .continuum import ContinuumKernelSpec
from .errors import InputError
from .spectral import omega_sq


@dataclass(frozen=True)
class LongWaveData:
    """Long-wave coefficients; each term's ``magnitude`` is ``A_m``."""

    rho0: float
    spacing: float
    n_particles: int
    terms: tuple[Term, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise InputError("long-wave data needs at least one term")
        # validates n, h, rho0
        self.chain_config()

    @classmethod
    def from_gaussian(cls, c0: float, a: float, rho0: float, spacing: float,
                      n_particles: int, order: int = 40) -> "LongWaveData":
        """Coefficients ``a_m A_m = (-1)^(m-1) (c0/rho0) a^(m-1) / (m-1)!``."""
        family = GaussianFamily(c0, a, rho0, order)
        terms = tuple(
            Term(m, int(np.sign(c)), abs(c)) for m, c in family.long_wave_coefficients().items()
        )
        return cls(rho0, spacing, n_particles, terms)

    @classmethod
    def from_continuum(cls, ck: ContinuumKernelSpec, spacing: float, n_particles: int) -> "LongWaveData":
        """Use the surviving terms of a continuum spec (the non-truncated case)."""
        terms = tuple(Term(t.order, t.sign, t.magnitude) for t in ck.terms if t.survives)
        return cls(ck.rho0, spacing, n_particles, terms)

    def chain_config(self) -> ChainConfig:
        return ChainConfig(self.n_particles, self.spacing, Density(self.rho0))

    def chain_spec(self) -> ExplicitTerms:
        """Lattice characteristic function with ``Omega_m^2 = A_m / h^(2m)``."""
        h = self.spacing
        return ExplicitTerms(
            tuple(Term(t.order, t.sign, t.magnitude / h ** (2 * t.order)) for t in self.terms)
        )


def reconstruct_dispersion(data: LongWaveData, s) -> np.ndarray:
    """``omega^2(kappa_s)`` over the full zone, ``kappa_s = 2 pi s / N``.

    Raises ``AdmissibilityError`` if the reconstructed ``f`` is not positive on (0, 4].
    """
    spec = data.chain_spec()
    require_admissible(spec, data.spacing)
    kappa = 2.0 * np.pi * np.asarray(s, dtype=float) / data.n_particles
    out = omega_sq(spec, kappa, data.spacing)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PotentialCoefficient:
    order: int
    prefactor: float


def reconstruct_potential_coefficients(data: LongWaveData) -> list[PotentialCoefficient]:
    """Per-order prefactors ``a_m mu A_m / (4 h^(2m))`` of the difference-form potential.

    The energy is ``sum_m P_m sum_p ([(D-1)^m u]^2 + [(D^-1 - 1)^m u]^2)``
    with ``mu = rho0 h``.
    """
    require_admissible(data.chain_spec(), data.spacing)
    h = data.spacing
    mu = data.rho0 * h
    merged: dict[int, float] = {}
    for t in data.terms:
        merged[t.order] = merged.get(t.order, 0.0) + t.sign * mu * t.magnitude / (4.0 * h ** (2 * t.order))
    return [PotentialCoefficient(m, p) for m, p in sorted(merged.items())]


# --------------------------------------------------------------------------
# Gaussian benchmark
# --------------------------------------------------------------------------

CRITICAL_GAMMA = 0.25


@dataclass(frozen=True)
class GaussianBenchmark:
    """Gaussian reconstruction in dimensionless form.

    ``omega0_sq = 4 c0 / (h^2 rho0)`` and ``gamma = a / h^2``.
    """

    omega0_sq: float
    gamma: float
    spacing: float = 1.0

    def __post_init__(self):
        for name in ("omega0_sq", "gamma", "spacing"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InputError(f"{name} must be positive, got {value}")

    @classmethod
    def from_material(cls, c0: float, a: float, rho0: float, spacing: float = 1.0) -> "GaussianBenchmark":
        return cls(4.0 * c0 / (spacing**2 * rho0), a / spacing**2, spacing)

    @property
    def v0_sq(self) -> float:
        return self.omega0_sq * self.spacing**2 / 4.0

    @property
    def v0(self) -> float:
        return math.sqrt(self.v0_sq)

    @property
    def a(self) -> float:
        return self.gamma * self.spacing**2


def gaussian_dispersion(b: GaussianBenchmark, kappa):
    """``omega0^2 sin^2(kappa/2) exp(-4 gamma sin^2(kappa/2))``."""
    s2 = np.sin(np.asarray(kappa, dtype=float) / 2.0) ** 2
    out = b.omega0_sq * s2 * np.exp(-4.0 * b.gamma * s2)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class CriticalPoints:
    has_interior_max: bool
    kappa_star: float | None
    omega_sq_max: float | None


def gaussian_critical_points(b: GaussianBenchmark) -> CriticalPoints:
    """Location and height of the dispersion maximum (present for gamma >= 1/4).

    ``kappa_star`` is the nonnegative representative; the maximum sits at
    ``+-kappa_star``.
    """
    if b.gamma < CRITICAL_GAMMA:
        return CriticalPoints(False, None, None)
    kappa_star = 2.0 * math.asin(min(1.0, 1.0 / (2.0 * math.sqrt(b.gamma))))
    return CriticalPoints(True, kappa_star, b.v0_sq / (b.a * math.e))


@dataclass(frozen=True)
class RegimeDiagnostics:
    gamma: float
    max_rel_deviation_from_sine_square: float
    kappa_star: float | None
    kappa_star_asymptotic: float
    omega_sq_max: float | None
    omega_sq_max_asymptotic: float
    localized_fraction: float | None


def gaussian_limit_regimes(b: GaussianBenchmark, samples: int = 4097) -> RegimeDiagnostics:
    """Diagnostics for the local (gamma << 1) and extreme nonlocal (gamma >> 1) limits.

    ``localized_fraction`` is the share of ``kappa in [0, pi]`` where
    ``omega^2 < 0.01 * omega_sq_max``.
    """
    kappa = np.linspace(0.0, np.pi, samples)
    w2 = gaussian_dispersion(b, kappa)
    sine = b.omega0_sq * np.sin(kappa[1:] / 2.0) ** 2
    deviation = float(np.max(np.abs(w2[1:] - sine) / sine))
    crit = gaussian_critical_points(b)
    fraction = None
    if crit.has_interior_max:
        fraction = float(np.mean(w2 < 0.01 * crit.omega_sq_max))
    return RegimeDiagnostics(
        gamma=b.gamma,
        max_rel_deviation_from_sine_square=deviation,
        kappa_star=crit.kappa_star,
        kappa_star_asymptotic=1.0 / math.sqrt(b.gamma),
        omega_sq_max=crit.omega_sq_max,
        omega_sq_max_asymptotic=b.v0_sq / (b.a * math.e),
        localized_fraction=fraction,
    )

"""Periodic harmonic chain: configuration, characteristic functions and the
real-space construction of the nonlocal Laplacian matrix.

The Laplacian of a chain with characteristic function
``f(lam) = sum_m a_m * Omega_m^2 * lam^m`` is the circulant matrix
``-mu * f(2 - D - D^-1)`` where ``D`` is the cyclic shift. Here it is built
directly from cyclic convolution powers of the next-neighbour stencil
``[2, -1, 0, ..., 0, -1]``.

Units are conventions only: lengths for ``spacing``, masses for ``mu``,
frequency^2 for ``Omega_m^2``; Laplacian entries carry ``mu * Omega^2``
(force per length).
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    AdmissibilityError,
    InputError,
    TranslationalInvarianceViolation,
    TruncationError,
)

DEFAULT_GRID_POINTS = 4096
TAIL_TOLERANCE = 1e-12
# Largest accepted round-off amplification of an alternating series at lam=4,
# expressed as sum|terms| * eps / f(4).
CONDITIONING_TOLERANCE = 1e-8
NSD_TOLERANCE = 1e-12


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PerParticle:
    """Particle mass ``mu``."""

    mu: float


@dataclass(frozen=True)
class Density:
    """Linear mass density ``rho0``; the particle mass is ``rho0 * h``."""

    rho0: float


MassSpec = Union[PerParticle, Density]


@dataclass(frozen=True)
class ChainConfig:
    n_particles: int
    spacing: float = 1.0
    mass: MassSpec = field(default_factory=lambda: PerParticle(1.0))

    def __post_init__(self):
        if int(self.n_particles) != self.n_particles or self.n_particles < 3:
            raise InputError(f"n_particles must be an integer >= 3, got {self.n_particles}")
        object.__setattr__(self, "n_particles", int(self.n_particles))
        if not (math.isfinite(self.spacing) and self.spacing > 0):
            raise InputError(f"spacing must be positive, got {self.spacing}")
        value = self.mass.mu if isinstance(self.mass, PerParticle) else self.mass.rho0
        if not (math.isfinite(value) and value > 0):
            raise InputError(f"mass must be positive, got {self.mass}")

    @property
    def mu(self) -> float:
        if isinstance(self.mass, PerParticle):
            return float(self.mass.mu)
        return float(self.mass.rho0) * self.spacing

    @property
    def rho0(self) -> float:
        if isinstance(self.mass, Density):
            return float(self.mass.rho0)
        return float(self.mass.mu) / self.spacing

    @property
    def length(self) -> float:
        return self.n_particles * self.spacing


# --------------------------------------------------------------------------
# Characteristic functions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """One order of the characteristic function: ``sign * magnitude * lam**order``.

    ``magnitude`` is ``Omega_m^2`` for chain specs and ``A_m`` for long-wave
    data; the sign is kept separately as in ``a_m in {-1, 0, +1}``.
    """

    order: int
    sign: int
    magnitude: float

    def __post_init__(self):
        if int(self.order) != self.order:
            raise InputError(f"term order must be an integer, got {self.order}")
        object.__setattr__(self, "order", int(self.order))
        if self.order == 0:
            raise TranslationalInvarianceViolation(
                "a term of order m = 0 breaks translational invariance (f(0) must vanish)"
            )
        if self.order < 0:
            raise InputError(f"term order must be positive, got {self.order}")
        if self.sign not in (-1, 0, 1):
            raise InputError(f"term sign must be -1, 0 or +1, got {self.sign}")
        object.__setattr__(self, "sign", int(self.sign))
        if not (math.isfinite(self.magnitude) and self.magnitude >= 0):
            raise InputError(f"term magnitude must be finite and >= 0, got {self.magnitude}")
        object.__setattr__(self, "magnitude", float(self.magnitude))

    @property
    def coefficient(self) -> float:
        return self.sign * self.magnitude


def _polyval(coefficients: np.ndarray, lam) -> np.ndarray:
    """Horner evaluation of ``sum_k coefficients[k] * lam**k``."""
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    for c in coefficients[::-1]:
        out = out * lam + c
    return out


@dataclass(frozen=True)
class ExplicitTerms:
    """Characteristic function given as a finite list of signed terms."""

    terms: tuple[Term, ...]

    def __post_init__(self):
        terms = tuple(self.terms)
        for t in terms:
            if not isinstance(t, Term):
                raise InputError(f"expected Term, got {t!r}")
        if not terms:
            raise InputError("at least one term is required")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_coefficients(cls, coefficients: Mapping[int, float]) -> "ExplicitTerms":
        """Build from signed coefficients ``{m: a_m * Omega_m^2}``."""
        return cls(
            tuple(
                Term(m, int(np.sign(c)), abs(float(c)))
                for m, c in sorted(coefficients.items())
            )
        )

    @property
    def max_order(self) -> int:
        return max(t.order for t in self.terms)

    def coefficients(self, spacing: float = 1.0) -> dict[int, float]:
        """Signed coefficients ``{m: a_m * Omega_m^2}``; repeated orders are summed."""
        out: dict[int, float] = {}
        for t in self.terms:
            out[t.order] = out.get(t.order, 0.0) + t.coefficient
        return dict(sorted(out.items()))

    def coefficient_array(self, spacing: float = 1.0) -> np.ndarray:
        coeffs = self.coefficients(spacing)
        arr = np.zeros(max(coeffs) + 1)
        for m, c in coeffs.items():
            arr[m] = c
        return arr

    def evaluate(self, lam, spacing: float = 1.0) -> np.ndarray:
        return _polyval(self.coefficient_array(spacing), lam)

    def derivative(self, lam, spacing: float = 1.0) -> np.ndarray:
        arr = self.coefficient_array(spacing)
        return _polyval(arr[1:] * np.arange(1, arr.size), lam)

    def expand(self, spacing: float = 1.0) -> "ExplicitTerms":
        return self


@dataclass(frozen=True)
class GaussianFamily:
    """Characteristic function generated by a Gaussian elastic modulus kernel.

    Closed form ``f(lam) = (c0/rho0) * (lam/h^2) * exp(-a*lam/h^2)``, with the
    series coefficients ``a_m*Omega_m^2 = (-1)^(m-1) (c0/rho0) a^(m-1) / ((m-1)! h^(2m))``.
    """

    c0: float
    a: float
    rho0: float
    truncation_order: int = 40

    def __post_init__(self):
        for name in ("c0", "a", "rho0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InputError(f"{name} must be positive, got {value}")
        if int(self.truncation_order) != self.truncation_order or self.truncation_order < 1:
            raise InputError(f"truncation_order must be a positive integer, got {self.truncation_order}")
        object.__setattr__(self, "truncation_order", int(self.truncation_order))

    @property
    def v0_sq(self) -> float:
        return self.c0 / self.rho0

    def gamma(self, spacing: float) -> float:
        return self.a / spacing**2

    def long_wave_coefficients(self, order: int | None = None) -> dict[int, float]:
        """Signed renormalized coefficients ``{m: a_m * A_m}`` (independent of h)."""
        order = self.truncation_order if order is None else order
        out = {}
        value = self.v0_sq
        for m in range(1, order + 1):
            if m > 1:
                value *= self.a / (m - 1)
            out[m] = (-1) ** (m - 1) * value
        return out

    def coefficients(self, spacing: float = 1.0) -> dict[int, float]:
        return {
            m: c / spacing ** (2 * m)
            for m, c in self.long_wave_coefficients().items()
        }

    def evaluate(self, lam, spacing: float = 1.0) -> np.ndarray:
        x = np.asarray(lam, dtype=float) / spacing**2
        return self.v0_sq * x * np.exp(-self.a * x)

    def derivative(self, lam, spacing: float = 1.0) -> np.ndarray:
        x = np.asarray(lam, dtype=float) / spacing**2
        return self.v0_sq / spacing**2 * np.exp(-self.a * x) * (1.0 - self.a * x)

    def tail_bound(self, spacing: float = 1.0) -> float:
        """Bound on the omitted series tail at ``lam = 4``.

        The first omitted term ``(c0/rho0) (4/h^2) (4 gamma)^M / M!`` times
        the geometric factor ``1 / (1 - 4 gamma / (M+1))``.
        """
        M = self.truncation_order
        x = 4.0 * self.gamma(spacing)
        if x >= M + 1:
            return math.inf
        log_first = math.log(self.v0_sq * 4.0 / spacing**2) + M * math.log(x) - math.lgamma(M + 1)
        return math.exp(log_first) / (1.0 - x / (M + 1))

    def check_truncation(self, spacing: float = 1.0, tolerance: float = TAIL_TOLERANCE) -> None:
        """Raise ``TruncationError`` when the order-M series cannot represent f on (0, 4]."""
        f4 = float(self.evaluate(4.0, spacing))
        bound = self.tail_bound(spacing)
        if not bound < tolerance * f4:
            raise TruncationError(
                f"Gaussian series tail bound {bound:.3e} exceeds {tolerance:g} * f(4) = "
                f"{tolerance * f4:.3e} at order M={self.truncation_order}, "
                f"gamma={self.gamma(spacing):g}; increase truncation_order"
            )
        # alternating series: sum|terms| measures round-off amplification
        x = 4.0 * self.gamma(spacing)
        abs_sum = self.v0_sq * 4.0 / spacing**2 * math.exp(x)
        if abs_sum * np.finfo(float).eps > CONDITIONING_TOLERANCE * f4:
            raise TruncationError(
                f"Gaussian series at gamma={self.gamma(spacing):g} loses more than "
                f"{-math.log10(CONDITIONING_TOLERANCE):.0f} digits to cancellation; "
                "use the closed form (spectral synthesis) instead"
            )

    def expand(self, spacing: float = 1.0) -> ExplicitTerms:
        """Truncated series as explicit terms (after the truncation check)."""
        self.check_truncation(spacing)
        return ExplicitTerms.from_coefficients(self.coefficients(spacing))


CharacteristicSpec = Union[ExplicitTerms, GaussianFamily]


# --------------------------------------------------------------------------
# Admissibility
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    min_value: float
    argmin: float


def validate_admissibility(
    spec: CharacteristicSpec,
    grid_points: int = DEFAULT_GRID_POINTS,
    spacing: float = 1.0,
) -> AdmissibilityReport:
    """Check ``f(lam) > 0`` on a uniform grid over ``(0, 4]``.

    ``spacing`` only matters for the Gaussian family, whose coefficients
    depend on the lattice spacing.
    """
    if grid_points < 16:
        raise InputError(f"grid_points must be >= 16, got {grid_points}")
    if isinstance(spec, ExplicitTerms) and any(t.order == 0 for t in spec.terms):
        raise TranslationalInvarianceViolation("a term of order m = 0 is not admissible")
    lam = 4.0 * np.arange(1, grid_points + 1) / grid_points
    values = spec.evaluate(lam, spacing)
    i = int(np.argmin(values))
    return AdmissibilityReport(ok=bool(values[i] > 0), min_value=float(values[i]), argmin=float(lam[i]))


def require_admissible(spec: CharacteristicSpec, spacing: float = 1.0) -> None:
    report = validate_admissibility(spec, spacing=spacing)
    if not report.ok:
        raise AdmissibilityError(
            f"characteristic function not positive on (0,4]: "
            f"f({report.argmin:.6g}) = {report.min_value:.6g}"
        )


# --------------------------------------------------------------------------
# Stencils and the circulant Laplacian
# --------------------------------------------------------------------------


def _stencil_powers(n: int, max_order: int) -> Iterator[np.ndarray]:
    """Yield first rows of ``(2 - D - D^-1)^m`` for m = 1..max_order as exact integers."""
    base = np.zeros(n, dtype=object)
    base[:] = 0
    base[0] += 2
    base[1] -= 1
    base[-1] -= 1
    row = base
    for m in range(1, max_order + 1):
        if m > 1:
            row = 2 * row - np.roll(row, 1) - np.roll(row, -1)
        yield row


def stencil_power(m: int, n: int) -> list[float]:
    """First row of ``(2 - D - D^-1)^m`` on an ``n``-periodic chain.

    Computed as the ``m``-fold cyclic convolution of ``[2, -1, 0, ..., 0, -1]``,
    so coefficients beyond ``n/2`` wrap around.

    >>> stencil_power(2, 8)
    [6.0, -4.0, 1.0, 0.0, 0.0, 0.0, 1.0, -4.0]
    """
    if m < 1:
        raise InputError(f"order must be >= 1, got {m}")
    if n < 3:
        raise InputError(f"n must be >= 3, got {n}")
    for row in _stencil_powers(n, m):
        pass
    return [float(c) for c in row]


@dataclass(frozen=True, eq=False)
class CirculantLaplacian:
    """Symmetric circulant Laplacian stored by its first row.

    Entry ``(p, q)`` equals ``first_row[(q - p) % N]``.
    """

    first_row: np.ndarray
    config: ChainConfig

    def __post_init__(self):
        row = np.array(self.first_row, dtype=float)
        if row.ndim != 1 or row.size != self.config.n_particles:
            raise InputError(
                f"first_row must have length {self.config.n_particles}, got shape {row.shape}"
            )
        row.setflags(write=False)
        object.__setattr__(self, "first_row", row)

    @property
    def n(self) -> int:
        return self.first_row.size

    def matrix(self) -> np.ndarray:
        idx = (np.arange(self.n)[None, :] - np.arange(self.n)[:, None]) % self.n
        return self.first_row[idx]

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Matrix-vector product by cyclic convolution."""
        return _convolver(self.first_row)(np.asarray(u, dtype=float))

    def invariant_violations(self, tolerance: float = NSD_TOLERANCE) -> list[str]:
        row = self.first_row
        scale = float(np.max(np.abs(row))) or 1.0
        problems = []
        asym = float(np.max(np.abs(row[1:] - row[:0:-1]))) if self.n > 1 else 0.0
        if asym > tolerance * scale:
            problems.append(f"first row not symmetric (max |c[j]-c[N-j]| = {asym:.3e})")
        total = float(np.sum(row))
        if abs(total) > tolerance * scale * self.n:
            problems.append(f"row sum {total:.3e} is not zero")
        top = float(np.max(np.fft.fft(row).real))
        if top > tolerance * scale:
            problems.append(f"largest eigenvalue {top:.3e} is positive")
        return problems

    def check_invariants(self, tolerance: float = NSD_TOLERANCE) -> "CirculantLaplacian":
        problems = self.invariant_violations(tolerance)
        if problems:
            raise AdmissibilityError("; ".join(problems))
        return self


_FFT_CROSSOVER = 64


def _convolver(first_row: np.ndarray):
    """Return ``u -> L @ u`` for the circulant with the given first row."""
    n = first_row.size
    support = np.flatnonzero(first_row)
    if n > _FFT_CROSSOVER and support.size > 8:
        spectrum = np.conj(np.fft.rfft(first_row))

        def apply(u):
            return np.fft.irfft(spectrum * np.fft.rfft(u), n)

        return apply
    weights = first_row[support][:, None]
    gather = (np.arange(n)[None, :] + support[:, None]) % n

    def apply(u):
        return (weights * u[gather]).sum(axis=0)

    return apply


def build_laplacian(spec: CharacteristicSpec, config: ChainConfig) -> CirculantLaplacian:
    """Real-space construction ``-mu * sum_m a_m Omega_m^2 * stencil_power(m, N)``.

    Raises ``AdmissibilityError`` for non-positive ``f`` and ``TruncationError``
    when a Gaussian family cannot be represented by its truncated series.
    """
    require_admissible(spec, config.spacing)
    coeffs = spec.expand(config.spacing).coefficients(config.spacing)
    row = np.zeros(config.n_particles)
    for m, stencil in enumerate(_stencil_powers(config.n_particles, max(coeffs)), start=1):
        c = coeffs.get(m, 0.0)
        if c:
            row += c * stencil.astype(float)
    lap = CirculantLaplacian(-config.mu * row + 0.0, config)
    return lap.check_invariants()


# --------------------------------------------------------------------------
# Elastic energy in difference form
# --------------------------------------------------------------------------


def difference_form_energy(prefactors: Mapping[int, float], u: Sequence[float]) -> float:
    """``sum_m P_m sum_p ([(D-1)^m u]_p^2 + [(D^-1 - 1)^m u]_p^2)``."""
    u = np.asarray(u, dtype=float)
    if not prefactors:
        return 0.0
    top = max(prefactors)
    forward = u.copy()
    backward = u.copy()
    energy = 0.0
    for m in range(1, top + 1):
        forward = np.roll(forward, -1) - forward
        backward = np.roll(backward, 1) - backward
        p = prefactors.get(m, 0.0)
        if p:
            energy += p * (float(forward @ forward) + float(backward @ backward))
    return energy


def elastic_energy_difference_form(
    spec: CharacteristicSpec, config: ChainConfig, u: Sequence[float]
) -> float:
    """Symmetrized difference-form elastic energy of displacement ``u``.

    ``(mu/4) sum_m a_m Omega_m^2 sum_p ([(D-1)^m u]^2 + [(D^-1 - 1)^m u]^2)``
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (config.n_particles,):
        raise InputError(f"displacement must have length {config.n_particles}, got shape {u.shape}")
    require_admissible(spec, config.spacing)
    coeffs = spec.expand(config.spacing).coefficients(config.spacing)
    return difference_form_energy({m: config.mu * c / 4.0 for m, c in coeffs.items()}, u)

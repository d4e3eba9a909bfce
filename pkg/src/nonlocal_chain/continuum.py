"""Long-wave (continuum) limit of the chain.

With ``mu = rho0 * h`` and ``Omega_m^2 = A_m / h^(2m)`` the chain tends to a
nonlocal continuum whose dispersion is ``f~(k^2) = sum a_m b_m A_m k^(2m)``,
where ``b_m`` flags which orders survive the limit. Kernels are handled
spectrally; a real-space form is only provided for the Gaussian family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .chain_model import (
    ChainConfig,
    CharacteristicSpec,
    GaussianFamily,
    require_admissible,
)
from .errors import InputError, QuadratureError, StabilityError

STABILITY_GRID_POINTS = 4096


@dataclass(frozen=True)
class Periodic:
    length: float


@dataclass(frozen=True)
class InfiniteLine:
    pass


Boundary = Union[Periodic, InfiniteLine]


@dataclass(frozen=True)
class KernelTerm:
    """``sign * magnitude * lam**order`` with survival flag ``survives`` (b_m)."""

    order: int
    sign: int
    magnitude: float
    survives: bool = True

    def __post_init__(self):
        if self.order < 1:
            raise InputError(f"continuum term order must be >= 1, got {self.order}")
        if self.sign not in (-1, 0, 1):
            raise InputError(f"sign must be -1, 0 or +1, got {self.sign}")
        if not (math.isfinite(self.magnitude) and self.magnitude >= 0):
            raise InputError(f"magnitude A_m must be finite and >= 0, got {self.magnitude}")

    @property
    def coefficient(self) -> float:
        return self.sign * self.magnitude if self.survives else 0.0


@dataclass(frozen=True)
class GaussianKernel:
    """Closed-form tail of a Gaussian modulus kernel ``C0 exp(-a k^2)``."""

    c0: float
    a: float


@dataclass(frozen=True)
class ContinuumKernelSpec:
    """Renormalized continuum constitutive data.

    ``gaussian`` is set when the spec stands for the full (untruncated)
    Gaussian series; ``f~`` then uses the closed form and ``terms`` only lists
    the leading orders.
    """

    rho0: float
    terms: tuple[KernelTerm, ...]
    boundary: Boundary = field(default_factory=InfiniteLine)
    gaussian: GaussianKernel | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not (math.isfinite(self.rho0) and self.rho0 > 0):
            raise InputError(f"rho0 must be positive, got {self.rho0}")
        if not self.terms and self.gaussian is None:
            raise InputError("continuum spec needs at least one term")
        if self.gaussian is not None and not all(t.survives for t in self.terms):
            raise InputError("a closed-form Gaussian tail requires every order to survive")
        check_stability(self)

    def coefficient_array(self) -> np.ndarray:
        """Signed ``a_m b_m A_m`` indexed by m (index 0 is zero)."""
        top = max((t.order for t in self.terms), default=0)
        arr = np.zeros(top + 1)
        for t in self.terms:
            arr[t.order] += t.coefficient
        return arr

    def truncated_characteristic(self, lam) -> np.ndarray:
        """``f~(lam)``."""
        lam = np.asarray(lam, dtype=float)
        if self.gaussian is not None:
            g = self.gaussian
            return g.c0 / self.rho0 * lam * np.exp(-g.a * lam)
        out = np.zeros_like(lam)
        for c in self.coefficient_array()[::-1]:
            out = out * lam + c
        return out

    def coefficient(self, order: int) -> float:
        """``a_m b_m A_m`` for any order, using the closed form beyond the listed terms."""
        for t in self.terms:
            if t.order == order:
                return t.coefficient
        if self.gaussian is not None and order >= 1:
            g = self.gaussian
            return (-1) ** (order - 1) * g.c0 / self.rho0 * g.a ** (order - 1) / math.factorial(order - 1)
        return 0.0


def check_stability(ck: ContinuumKernelSpec, grid_points: int = STABILITY_GRID_POINTS) -> None:
    """Raise ``StabilityError`` unless ``f~(lam) > 0`` for every ``lam > 0``.

    For a polynomial the lowest and highest surviving coefficients must be
    positive, and ``f~ / lam`` is sampled on a log grid spanning the Cauchy
    bounds of its positive roots; outside that range no sign change exists.
    """
    if ck.gaussian is not None:
        return
    coeffs = ck.coefficient_array()
    nonzero = np.flatnonzero(coeffs)
    if nonzero.size == 0:
        raise StabilityError("truncated characteristic function vanishes identically")
    low, high = coeffs[nonzero[0]], coeffs[nonzero[-1]]
    if low <= 0 or high <= 0:
        raise StabilityError(
            "truncated characteristic function not positive for all lam > 0 "
            f"(lowest coefficient {low:g}, highest {high:g})"
        )
    if nonzero.size == 1:
        return
    g = coeffs[nonzero[0]: nonzero[-1] + 1]
    upper = 1.0 + float(np.max(np.abs(g[:-1]))) / g[-1]
    lower = 1.0 / (1.0 + float(np.max(np.abs(g[1:]))) / g[0])
    lam = np.geomspace(lower, upper, grid_points)
    values = ck.truncated_characteristic(lam)
    i = int(np.argmin(values / lam))
    if not values[i] > 0:
        raise StabilityError(
            f"truncated characteristic function not positive: f~({lam[i]:.6g}) = {values[i]:.6g}"
        )


def renormalize(
    spec: CharacteristicSpec,
    config: ChainConfig,
    survival=None,
    boundary: Boundary | None = None,
) -> ContinuumKernelSpec:
    """Continuum data ``A_m = Omega_m^2 h^(2m)``, ``rho0 = mu / h`` for a chain.

    ``survival`` lists the b_m flags for the spec's terms in order of
    increasing m (default: every order survives). The boundary defaults to a
    periodic string of length ``N h``.
    """
    require_admissible(spec, config.spacing)
    h = config.spacing
    rho0 = config.mu / h
    boundary = Periodic(config.length) if boundary is None else boundary
    if isinstance(spec, GaussianFamily):
        if not math.isclose(spec.rho0, rho0, rel_tol=1e-12):
            raise InputError(
                f"chain density mu/h = {rho0:g} does not match the Gaussian family rho0 = {spec.rho0:g}"
            )
        signed = spec.long_wave_coefficients()
    else:
        signed = {m: c * h ** (2 * m) for m, c in spec.coefficients(h).items()}
    flags = [True] * len(signed) if survival is None else [bool(b) for b in survival]
    if len(flags) != len(signed):
        raise InputError(f"expected {len(signed)} survival flags, got {len(flags)}")
    terms = tuple(
        KernelTerm(m, int(np.sign(c)), abs(c), b) for (m, c), b in zip(signed.items(), flags)
    )
    gaussian = None
    if isinstance(spec, GaussianFamily) and all(flags):
        gaussian = GaussianKernel(spec.c0, spec.a)
    return ContinuumKernelSpec(rho0=rho0, terms=terms, boundary=boundary, gaussian=gaussian)


def _check_periodic_wavenumber(ck: ContinuumKernelSpec, k) -> None:
    if isinstance(ck.boundary, Periodic):
        s = np.asarray(k, dtype=float) * ck.boundary.length / (2.0 * np.pi)
        if np.any(np.abs(s - np.round(s)) > 1e-9 * np.maximum(1.0, np.abs(s))):
            raise InputError(
                f"wave number not of the form 2 pi s / L for L = {ck.boundary.length:g}"
            )


def continuum_dispersion(ck: ContinuumKernelSpec, k) -> np.ndarray:
    """``omega~^2(k) = f~(k^2)``."""
    _check_periodic_wavenumber(ck, k)
    k = np.asarray(k, dtype=float)
    out = ck.truncated_characteristic(k * k)
    return out if out.ndim else float(out)


def modulus_transform(ck: ContinuumKernelSpec, k) -> np.ndarray:
    """Fourier-space elastic modulus ``C~(k) = rho0 sum a_m b_m A_m k^(2m-2)``."""
    k = np.asarray(k, dtype=float)
    lam = k * k
    if ck.gaussian is not None:
        g = ck.gaussian
        out = ck.rho0 * (g.c0 / ck.rho0) * np.exp(-g.a * lam)
    else:
        coeffs = ck.coefficient_array()[1:]
        out = np.zeros_like(lam)
        for c in coeffs[::-1]:
            out = out * lam + c
        out = ck.rho0 * out
    return out if out.ndim else float(out)


def gaussian_kernel_realspace(c0: float, a: float, x, *, laplacian: bool = False, period: float | None = None):
    """Gaussian modulus kernel ``C0 exp(-x^2/4a) / sqrt(4 pi a)``.

    With ``laplacian=True`` the second derivative (the Laplacian kernel) is
    returned instead. ``period`` sums periodic images for the ring.
    """
    if not a > 0:
        raise InputError(f"a must be positive, got {a}")
    x = np.asarray(x, dtype=float)

    def kernel(y):
        g = c0 * np.exp(-y * y / (4.0 * a)) / math.sqrt(4.0 * math.pi * a)
        if laplacian:
            g = g * (y * y / (4.0 * a * a) - 1.0 / (2.0 * a))
        return g

    if period is None:
        out = kernel(x)
    else:
        # images beyond ~40 sqrt(a) contribute below double precision
        reach = int(math.ceil(40.0 * math.sqrt(a) / period)) + 1
        out = sum(kernel(x + j * period) for j in range(-reach, reach + 1))
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class MomentQuadrature:
    half_range: float = 12.0  # in units of sqrt(a)
    nodes: int = 2048
    rel_tol: float = 1e-8


@dataclass(frozen=True)
class MomentCheck:
    order: int
    lhs: float
    rhs: float


def _moment(c0, a, m, half_range, nodes) -> tuple[float, float]:
    xi = np.linspace(-half_range, half_range, nodes)
    step = xi[1] - xi[0]
    integrand = gaussian_kernel_realspace(c0, a, xi, laplacian=True) * xi ** (2 * m) / math.factorial(2 * m)
    return float(step * np.sum(integrand)), float(step * np.sum(np.abs(integrand)))


def moment_check(ck: ContinuumKernelSpec, m: int, quadrature: MomentQuadrature = MomentQuadrature()) -> MomentCheck:
    """Compare ``int Laplacian-kernel(xi) xi^(2m)/(2m)! dxi`` with ``(-1)^(m+1) rho0 a_m b_m A_m``.

    The integral uses the trapezoidal rule on ``[-R, R]``; doubling R (at
    fixed spacing) or the node count must not move it by more than
    ``rel_tol``, else ``QuadratureError``. The wider-range value is reported.
    """
    if ck.gaussian is None:
        raise InputError("moment check needs a kernel with a closed real-space form (Gaussian family)")
    if m < 0:
        raise InputError(f"moment order must be >= 0, got {m}")
    c0, a = ck.gaussian.c0, ck.gaussian.a
    R = quadrature.half_range * math.sqrt(a)
    n = quadrature.nodes
    base, scale = _moment(c0, a, m, R, n)
    wide, _ = _moment(c0, a, m, 2 * R, 2 * n - 1)
    fine, _ = _moment(c0, a, m, R, 2 * n - 1)
    ref = max(abs(wide), scale)
    for label, value in (("range", wide), ("node", fine)):
        if abs(value - base) > quadrature.rel_tol * ref:
            raise QuadratureError(
                f"moment {m}: {label} doubling moved the integral by {abs(value - base):.3e}"
            )
    rhs = 0.0 if m == 0 else (-1) ** (m + 1) * ck.rho0 * ck.coefficient(m)
    return MomentCheck(order=m, lhs=wide, rhs=rhs)


@dataclass(frozen=True)
class Weak:
    """Finite-order (gradient-type) nonlocality up to ``max_order``."""

    max_order: int


@dataclass(frozen=True)
class Strong:
    """Infinitely many orders survive the continuum limit."""


NonlocalityClass = Union[Weak, Strong]


def classify_nonlocality(ck: ContinuumKernelSpec) -> NonlocalityClass:
    if ck.gaussian is not None:
        return Strong()
    surviving = [t.order for t in ck.terms if t.survives and t.sign != 0 and t.magnitude > 0]
    return Weak(max(surviving, default=0))

"""Physical configuration: spin densities, probe beam, and coupling profile.

Lengths are SI metres throughout.  The two central radial functions are

* ``regularizer(density, x)``: the smooth cutoff F(x) that replaces the bare
  dipole singularity; it rises monotonically from 0 to 1 over the density's
  characteristic width,
* ``interaction_profile(density, r)``: the dimensionless phase-modulation
  shape g(r) obtained by integrating F along the beam axis,

and the dimensionless phase imprinted per electron is
``phase_parameter = r_e * (mu/mu_B) / width``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .specfun import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    integrate,
    integrate_with_breakpoints,
)

__all__ = [
    "Constants",
    "CONSTANTS",
    "SpinDensity",
    "GaussianDensity",
    "UniformBallDensity",
    "Hydrogen1sDensity",
    "CustomRadialDensity",
    "Probe",
    "Sample",
    "regularizer",
    "regularizer_from_density",
    "interaction_profile",
    "interaction_profile_quadrature",
    "phase_parameter",
]

_PROFILE_SERIES_CUT = 1e-4  # r/width below which series branches are used


@dataclass(frozen=True)
class Constants:
    """CODATA values used by the phase parameter and momentum conversions."""

    r_e: float = 2.8179403262e-15        # classical electron radius [m]
    mu_B: float = 9.2740100783e-24       # Bohr magneton [J/T]
    hbar: float = 1.054571817e-34        # reduced Planck constant [J s]
    mu0: float = 1.25663706212e-6        # vacuum permeability [N/A^2]
    e_charge: float = 1.602176634e-19    # elementary charge [C]
    m_e: float = 9.1093837015e-31        # electron mass [kg]

    def __post_init__(self):
        derived = self.mu0 * self.e_charge**2 / (4 * math.pi * self.m_e)
        if abs(derived - self.r_e) > 1e-3 * self.r_e:
            raise ValueError("r_e inconsistent with mu0 e^2 / (4 pi m_e)")


CONSTANTS = Constants()


class SpinDensity:
    """Radially symmetric, normalized spatial distribution of the spin.

    Subclasses expose ``width`` (the characteristic length used to make the
    phase parameter dimensionless) and the density itself; closed forms for
    F and g are provided where they exist and quadrature fills in the rest.
    """

    width: float

    def radial_density(self, r: float) -> float:
        raise NotImplementedError

    # Closed-form hooks; None means "use quadrature".
    def regularizer_closed(self, x: float) -> Optional[float]:
        return None

    def profile_closed(self, r: float) -> Optional[float]:
        return None

    def support_radius(self) -> float:
        """Radius beyond which the density is negligible (quadrature cutoff)."""
        raise NotImplementedError

    def check_normalization(self, tol: float = 1e-6) -> None:
        total, _ = integrate(
            lambda r: 4 * math.pi * r * r * self.radial_density(r),
            0.0, self.support_radius(),
        )
        if abs(total - 1.0) > tol:
            raise ValueError(f"spin density not normalized: integral = {total!r}")


@dataclass(frozen=True)
class GaussianDensity(SpinDensity):
    width: float  # standard deviation [m]

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    def radial_density(self, r):
        w = self.width
        return math.exp(-r * r / (2 * w * w)) / (2 * math.pi * w * w) ** 1.5

    def regularizer_closed(self, x):
        s = x / self.width
        return math.erf(s / math.sqrt(2)) - math.sqrt(2 / math.pi) * s * math.exp(-s * s / 2)

    def profile_closed(self, r):
        s = r / self.width
        if s < _PROFILE_SERIES_CUT:
            # (1 - exp(-s^2/2))/s = s/2 - s^3/8 + s^5/48
            return s / 2 - s**3 / 8 + s**5 / 48
        return -math.expm1(-s * s / 2) / s

    def support_radius(self):
        return 12.0 * self.width


@dataclass(frozen=True)
class UniformBallDensity(SpinDensity):
    width: float  # ball radius R [m]

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    def radial_density(self, r):
        if r > self.width:
            return 0.0
        return 3.0 / (4 * math.pi * self.width**3)

    def regularizer_closed(self, x):
        return min(1.0, (x / self.width) ** 3)

    def profile_closed(self, r):
        # The axial integral over min(1/R^3, x^-3) is elementary: the
        # in-ball stretch contributes z0/R^3 and the dipole tail the rest.
        s = r / self.width
        if s >= 1.0:
            return 1.0 / s
        if s < _PROFILE_SERIES_CUT:
            return 1.5 * s * (1.0 - 0.25 * s * s)
        return (1.0 - (1.0 - s * s) ** 1.5) / s

    def support_radius(self):
        return self.width


@dataclass(frozen=True)
class Hydrogen1sDensity(SpinDensity):
    width: float  # Bohr radius a0 [m]

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")

    def radial_density(self, r):
        a = self.width
        return math.exp(-2 * r / a) / (math.pi * a**3)

    def regularizer_closed(self, x):
        # Enclosed-mass reduction of the smearing integral for exp(-2r/a0).
        s = 2 * x / self.width
        return -math.expm1(-s) - math.exp(-s) * (s + s * s / 2)

    def profile_closed(self, r):
        from .specfun import bessel_k

        rho = r / self.width
        if rho < 1e-3:
            # rho + rho^3 (ln rho + gamma - 3/4) + O(rho^5 ln rho)
            return rho + rho**3 * (math.log(rho) + np.euler_gamma - 0.75)
        return 1 / rho - 2 * rho * bessel_k(0, 2 * rho) - 2 * bessel_k(1, 2 * rho)

    def support_radius(self):
        return 25.0 * self.width


@dataclass(frozen=True)
class CustomRadialDensity(SpinDensity):
    """User-supplied radial density [m^-3] with an explicit truncation hint.

    ``support_hint`` is the radius beyond which the density is treated as
    zero; it bounds the otherwise semi-infinite smearing integrals.
    """

    density: Callable[[float], float] = field(compare=False)
    width: float = 0.0
    support_hint: float = 0.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")
        if self.support_hint <= 0:
            raise ValueError("support_hint must be positive")

    def radial_density(self, r):
        return self.density(r)

    def support_radius(self):
        return self.support_hint


def regularizer_from_density(
    density: SpinDensity, x: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Smearing-integral route to F(x), independent of any closed form.

    The angular integral is recast as a finite radial one: with
    s^2 = u^2 + x^2 - 2 u x tau,

        F(x) = pi * int_0^U du u^-2 int_|u-x|^{u+x} ds s (u^2 + x^2 - s^2) P(s),

    truncated where the density's support ends.
    """
    if x == 0.0:
        return 0.0
    rs = density.support_radius()

    def inner(u):
        lo, hi = abs(u - x), u + x
        if lo >= rs:
            return 0.0
        hi = min(hi, rs)

        def h(s):
            return s * (u * u + x * x - s * s) * density.radial_density(s)

        v, _ = integrate(h, lo, hi, spec)
        return v / (u * u)

    v, _ = integrate_with_breakpoints(inner, [0.0, x, x + rs], spec)
    return math.pi * v


def regularizer(
    density: SpinDensity, x: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Regularized-dipole cutoff F(x); monotone from 0 at x=0 to 1 far out."""
    if x < 0:
        raise ValueError("x must be non-negative")
    closed = density.regularizer_closed(x)
    if closed is not None:
        return closed
    return regularizer_from_density(density, x, spec)


def _profile_quadrature(density, r, spec):
    """Axial integral of F over the beam path.

    g(r) = (width * r / 2) * int dz F(sqrt(r^2+z^2)) / (r^2+z^2)^(3/2),
    evaluated on z >= 0 and doubled; for the ball, the integrand has a kink
    where the path crosses the surface, so the interval is split there.
    """
    def f(z):
        x2 = r * r + z * z
        return regularizer(density, math.sqrt(x2), spec) / x2**1.5

    points = [0.0]
    rs = density.support_radius()
    if isinstance(density, UniformBallDensity) and r < rs:
        points.append(math.sqrt(rs * rs - r * r))
    points.append(math.inf)
    v, _ = integrate_with_breakpoints(f, points, spec, scale=max(r, density.width))
    return density.width * r * v


def interaction_profile(
    density: SpinDensity, r: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Dimensionless coupling profile g(r); vanishes at r=0, ~ width/r far out."""
    if r < 0:
        raise ValueError("r must be non-negative")
    if r == 0.0:
        return 0.0
    closed = density.profile_closed(r)
    if closed is not None:
        return closed
    return interaction_profile_quadrature(density, r, spec)


def interaction_profile_quadrature(
    density: SpinDensity, r: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
) -> float:
    """Axial-integral route to g(r), independent of any closed form.

    Serves CustomRadial densities and doubles as the oracle the closed
    profiles are validated against.
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if r == 0.0:
        return 0.0
    if r / density.width < _PROFILE_SERIES_CUT:
        # All regularized profiles vanish linearly at the origin; below the
        # series cut the quadrature would divide 0 by 0.
        eps = _PROFILE_SERIES_CUT * density.width
        return _profile_quadrature(density, eps, spec) * (r / eps)
    return _profile_quadrature(density, r, spec)


@dataclass(frozen=True)
class Probe:
    """Gaussian transverse electron beam."""

    delta_e: float               # transverse standard deviation [m]
    lambda0: float = 2.5e-12     # de Broglie wavelength [m]
    energy_keV: Optional[float] = None  # informational only

    def __post_init__(self):
        if self.delta_e <= 0:
            raise ValueError("delta_e must be positive")
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")

    @property
    def k0(self) -> float:
        return 2 * math.pi / self.lambda0

    @property
    def paraxial_valid(self) -> bool:
        # Paraxial treatment degrades below picometre foci.
        return self.delta_e >= 1e-12

    def chi(self, density: SpinDensity) -> float:
        return self.delta_e / density.width

    def weight(self, r):
        """Radial probability weight 2 pi r |psi0(r)|^2 of the probe."""
        de2 = self.delta_e**2
        return (r / de2) * np.exp(-(r * r) / (2 * de2))


@dataclass(frozen=True)
class Sample:
    """Magnetic moment magnitude plus its orientation or spin state.

    ``mode`` is "nb" for a fixed classical moment with unit direction
    ``orientation``, or "ba" for a single quantum spin with Bloch vector
    ``bloch`` (|bloch| <= 1).
    """

    moment_in_bohr_magnetons: float
    mode: str = "nb"
    orientation: tuple[float, float, float] = (1.0, 0.0, 0.0)
    bloch: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if self.moment_in_bohr_magnetons <= 0:
            raise ValueError("moment must be positive")
        if self.mode not in ("nb", "ba"):
            raise ValueError("mode must be 'nb' or 'ba'")
        if self.mode == "nb":
            n = np.linalg.norm(self.orientation)
            if abs(n - 1.0) > 1e-9:
                raise ValueError("orientation must be a unit vector")
        else:
            c = np.linalg.norm(self.bloch)
            if c > 1.0 + 1e-9:
                raise ValueError("Bloch vector must satisfy |c| <= 1")

    @property
    def transverse(self) -> float:
        """In-plane magnitude |n_perp| (nb) or |c_perp| (ba)."""
        v = self.orientation if self.mode == "nb" else self.bloch
        return math.hypot(v[0], v[1])

    @property
    def axial(self) -> float:
        v = self.orientation if self.mode == "nb" else self.bloch
        return v[2]


def phase_parameter(
    sample: Sample, density: SpinDensity, constants: Constants = CONSTANTS
) -> float:
    """Dimensionless phase per electron: r_e * (mu/mu_B) / width."""
    return constants.r_e * sample.moment_in_bohr_magnetons / density.width

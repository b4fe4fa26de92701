"""Estimation-task sensitivities.

Coupling moments over the probe, quantum and classical Fisher information
for position / momentum / binary zero-OAM measurements (with and without
backaction on the sample spin), detector-constrained momentum information,
and the electron counts required to reach a target signal-to-noise ratio.

Conventions: ``coupling_g2`` is twice the probe average of g^2 and equals
the transverse-moment QFI per unit |n_perp|^2; ``coupling_g4`` is twice the
root of the probe average of g^4 and always dominates ``coupling_g2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special as _sp

from .model import (
    CONSTANTS,
    Constants,
    GaussianDensity,
    Hydrogen1sDensity,
    Probe,
    Sample,
    SpinDensity,
    UniformBallDensity,
    interaction_profile,
    phase_parameter,
)
from .scatter import _xi_f_gaussian, momentum_scatter_amplitude
from .specfun import McSpec, integrate_with_breakpoints, mc_integrate

__all__ = [
    "Measurement",
    "PositionMeasurement",
    "MomentumMeasurement",
    "OamMeasurement",
    "DefocusMeasurement",
    "EstimationConfig",
    "FisherReport",
    "coupling_g2",
    "coupling_g4",
    "mixing_parameter",
    "ball_g2_mc",
    "qfi",
    "cfi",
    "zero_oam_likelihood",
    "cfi_oam",
    "cfi_momentum_restricted",
    "cfi_momentum_pixelated",
    "electrons_for_snr",
    "optimal_focus",
    "fisher_report",
]


# ---------------------------------------------------------------------------
# measurement descriptors


class Measurement:
    kind = "abstract"


@dataclass(frozen=True)
class PositionMeasurement(Measurement):
    kind = "position"


@dataclass(frozen=True)
class MomentumMeasurement(Measurement):
    """Diffraction-mode detection; optional extent and square pixel size.

    ``p_max`` and ``pixel`` are SI momenta (kg m/s); None means unrestricted
    and perfectly resolved, respectively.
    """

    kind = "momentum"
    p_max: Optional[float] = None
    pixel: Optional[float] = None

    def __post_init__(self):
        if self.p_max is not None and self.p_max <= 0:
            raise ValueError("p_max must be positive")
        if self.pixel is not None and self.pixel <= 0:
            raise ValueError("pixel must be positive")


@dataclass(frozen=True)
class OamMeasurement(Measurement):
    """Binary test of whether the electron stayed in the zero-OAM sector."""

    kind = "oam"


@dataclass(frozen=True)
class DefocusMeasurement(Measurement):
    kind = "defocus"
    z: float = 0.0
    f: float = 2e-3

    def __post_init__(self):
        if self.f <= 0:
            raise ValueError("f must be positive")
        if not 0.0 <= self.z <= self.f:
            raise ValueError("z must lie in [0, f]")


@dataclass(frozen=True)
class EstimationConfig:
    sample: Sample
    probe: Probe
    density: SpinDensity
    measurement: Measurement
    constants: Constants = CONSTANTS

    @property
    def theta(self) -> float:
        return phase_parameter(self.sample, self.density, self.constants)

    @property
    def chi(self) -> float:
        return self.probe.chi(self.density)


# ---------------------------------------------------------------------------
# probe-averaged coupling moments


def _probe_average(fn, probe: Probe, density: SpinDensity) -> float:
    """Average fn(r) over the radial probability of the probe beam."""
    de = probe.delta_e

    def h(r):
        return float(probe.weight(r)) * fn(r)

    points = [0.0]
    if isinstance(density, UniformBallDensity) and density.width < 14 * de:
        points.append(density.width)
    points.append(math.inf)
    v, _ = integrate_with_breakpoints(h, sorted(points), scale=de)
    return v


def _g2_gaussian(chi: float) -> float:
    # log1p keeps the chi^4-order difference alive at small chi
    c2 = chi * chi
    return (2 / c2) * (math.log1p(c2) - 0.5 * math.log1p(2 * c2))


def _g4_gaussian(chi: float) -> float:
    c2 = chi * chi
    l1, l2, l3, l4 = (
        math.log1p(c2),
        math.log1p(2 * c2),
        math.log1p(3 * c2),
        math.log1p(4 * c2),
    )
    t1 = 3 * l2 - 3 * l1 - l3
    t2 = (4 * c2 + 1) * (l4 + 3 * l2 - l1 - 3 * l3)
    return (t1 + t2) / (4 * c2 * c2)


_BUILTIN_KINDS = {
    GaussianDensity: "gaussian",
    UniformBallDensity: "ball",
    Hydrogen1sDensity: "hydrogen",
}


def _unit_density(kind: str) -> SpinDensity:
    return {
        "gaussian": GaussianDensity(1.0),
        "ball": UniformBallDensity(1.0),
        "hydrogen": Hydrogen1sDensity(1.0),
    }[kind]


@lru_cache(maxsize=8192)
def _moment_builtin(kind: str, chi: float, power: int) -> float:
    density = _unit_density(kind)
    probe = Probe(delta_e=chi)
    return _probe_average(
        lambda r: interaction_profile(density, r) ** power, probe, density
    )


def _moment(density: SpinDensity, probe: Probe, power: int) -> float:
    kind = _BUILTIN_KINDS.get(type(density))
    if kind is not None:
        # built-in moments depend only on chi; cache in dimensionless form
        return _moment_builtin(kind, probe.chi(density), power)
    return _probe_average(
        lambda r: interaction_profile(density, r) ** power, probe, density
    )


def coupling_g2(density: SpinDensity, probe: Probe) -> float:
    """Twice the probe-averaged g^2; the transverse-moment QFI scale."""
    if isinstance(density, GaussianDensity):
        return _g2_gaussian(probe.chi(density))
    return 2.0 * _moment(density, probe, 2)


def coupling_g4(density: SpinDensity, probe: Probe) -> float:
    """Twice the root of the probe-averaged g^4; bounds coupling_g2 from above."""
    if isinstance(density, GaussianDensity):
        return 2.0 * math.sqrt(_g4_gaussian(probe.chi(density)))
    return 2.0 * math.sqrt(_moment(density, probe, 4))


def mixing_parameter(density: SpinDensity, probe: Probe) -> float:
    """Zero-OAM mixing weight 0.5 sqrt(g4^2/g2^2 - 1) of the scattered state."""
    ratio = coupling_g4(density, probe) / coupling_g2(density, probe)
    return 0.5 * math.sqrt(max(ratio * ratio - 1.0, 0.0))


# ---------------------------------------------------------------------------
# Monte Carlo route for the uniform ball


def _ball_integrand(chi: float):
    """Vectorized integrand over the unit hypercube [0,1]^6.

    Coordinates: (a, b) feed an importance-sampled radius with density
    proportional to r^3 exp(-r^2 / 2 chi^2) (a Gamma(2) draw via -log(a b));
    (s, h) and (s', h') are two independent copies of the smearing
    integral's axial and radial coordinates.  The axial coordinate is
    compactified by z = T/(1 - T^2) with T = 2s - 1, and the smearing radius
    is windowed around the only shell that can intersect the ball,
    u = x + (2h - 1).  The polar average over the smearing direction is done
    in closed form: it equals (1 - tau0^2)/2 on the window where the
    sampled shell cuts the ball and vanishes elsewhere.
    """

    def inner(r, s, h):
        t = 2.0 * s - 1.0
        omt = 1.0 - t * t
        safe = omt > 1e-12
        omt = np.where(safe, omt, 1.0)
        z = t / omt
        jac_z = 2.0 * (1.0 + t * t) / (omt * omt)
        x = np.hypot(r, z)
        u = x + (2.0 * h - 1.0)
        valid = safe & (u > 0.0) & (u + x > 1.0) & (np.abs(u - x) < 1.0)
        ux = np.where(valid, u * x, 1.0)
        tau0 = (u * u + x * x - 1.0) / (2.0 * ux)
        window = np.where(valid, (1.0 - tau0 * tau0) / 2.0, 0.0)
        return np.where(valid, jac_z * 2.0 * (3.0 / (4 * math.pi)) * window / x, 0.0)

    def f(pts):
        a, b, s1, h1, s2, h2 = pts.T
        gam = -np.log(np.clip(a * b, 1e-300, None))
        r = chi * np.sqrt(2.0 * gam)
        weight = 2.0 * chi**4
        return (2 * math.pi**2 / chi**2) * weight * inner(r, s1, h1) * inner(r, s2, h2)

    return f


def ball_g2_mc(
    radius: float, probe: Probe, spec: McSpec
) -> tuple[float, float]:
    """Monte Carlo estimate of coupling_g2 for a uniform ball.

    Estimates the nested smeared-dipole integral directly, with two
    independent copies of the inner integral so the square is unbiased.
    Dimensionless in chi = delta_e / radius, hence independent of the
    radius at fixed chi.  Returns (value, std_error).
    """
    if spec.samples < 10_000:
        raise ValueError("ball_g2_mc requires at least 1e4 samples")
    chi = probe.delta_e / radius
    f = _ball_integrand(chi)
    return mc_integrate(f, [(0.0, 1.0)] * 6, spec)


# ---------------------------------------------------------------------------
# Fisher information


def qfi(config: EstimationConfig) -> float:
    """Quantum Fisher information per electron.

    Fixed moment: |n_perp|^2 * coupling_g2, exact at any phase.  Quantum
    spin: 2 * coupling_g2 to leading order regardless of the spin state
    (see ``qfi_leading_order_valid`` for the validity flag).
    """
    g2 = coupling_g2(config.density, config.probe)
    if config.sample.mode == "nb":
        return config.sample.transverse**2 * g2
    return 2.0 * g2


def qfi_leading_order_valid(config: EstimationConfig) -> bool:
    return config.sample.mode == "nb" or config.theta < 0.1


def _j0_sq_deficit_over_x2(x):
    """(1 - J0(x)^2) / x^2, finite and relatively accurate at x -> 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    x2 = np.where(small, x * x, 1.0)
    series = 0.5 - 3 * x2 / 32 + 5 * x2 * x2 / 576
    xl = np.where(small, 1.0, x)
    j0 = _sp.j0(xl)
    direct = (1.0 - j0) * (1.0 + j0) / (xl * xl)
    return np.where(small, series, direct)


def _j0_deficit_over_x2(x):
    """(1 - J0(x)) / x^2, finite and relatively accurate at x -> 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    x2 = np.where(small, x * x, 1.0)
    series = 0.25 - x2 / 64 + x2 * x2 / 2304
    xl = np.where(small, 1.0, x)
    direct = (1.0 - _sp.j0(xl)) / (xl * xl)
    return np.where(small, series, direct)


def _j0j1_over_x(x):
    """J0(x) J1(x) / x, finite and relatively accurate at x -> 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-2
    x2 = np.where(small, x * x, 1.0)
    series = 0.5 - 3 * x2 / 16 + 5 * x2 * x2 / 192
    xl = np.where(small, 1.0, x)
    direct = _sp.j0(xl) * _sp.j1(xl) / xl
    return np.where(small, series, direct)


def _sinc(x):
    return np.sinc(np.asarray(x, dtype=float) / math.pi)


def _oam_deficit(
    mode: str, theta: float, transverse: float, density: SpinDensity, probe: Probe
) -> float:
    """Probability of leaving the zero-OAM sector, exact in theta.

    The quadratic phase scaling is factored out analytically, so the result
    keeps full relative accuracy arbitrarily deep in the weak-sample limit.
    """
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if mode == "nb":
        tt = theta * transverse
        scaled = _probe_average(
            lambda r: float(
                _j0_sq_deficit_over_x2(tt * interaction_profile(density, r))
            )
            * interaction_profile(density, r) ** 2,
            probe,
            density,
        )
        return tt * tt * scaled
    if mode == "ba":
        scaled = _probe_average(
            lambda r: float(_sinc(theta * interaction_profile(density, r))) ** 2
            * interaction_profile(density, r) ** 2,
            probe,
            density,
        )
        return theta * theta * scaled
    raise ValueError("mode must be 'nb' or 'ba'")


def zero_oam_likelihood(
    mode: str,
    theta: float,
    transverse: float,
    density: SpinDensity,
    probe: Probe,
) -> float:
    """Probability that the electron is found with zero OAM after scattering."""
    return 1.0 - _oam_deficit(mode, theta, transverse, density, probe)


def cfi_oam(
    mode: str,
    theta: float,
    transverse: float,
    density: SpinDensity,
    probe: Probe,
) -> float:
    """CFI of the binary zero-OAM test, exact at any phase.

    The likelihood derivative is taken under the integral and the quadratic
    phase scaling cancels analytically, so the weak-sample limit
    (|n_perp|^2 g2 without backaction, 2 g2 with) is reached continuously;
    theta = 0 returns it directly.
    """
    g2 = coupling_g2(density, probe)
    if theta == 0.0:
        return transverse**2 * g2 if mode == "nb" else 2.0 * g2
    if mode == "nb":
        tt = theta * transverse

        def slope_fn(r):
            g = interaction_profile(density, r)
            return 2.0 * float(_j0j1_over_x(tt * g)) * g * g

        def deficit_fn(r):
            g = interaction_profile(density, r)
            return float(_j0_sq_deficit_over_x2(tt * g)) * g * g

        slope = _probe_average(slope_fn, probe, density)       # P0' = -theta t^2 slope
        scaled = _probe_average(deficit_fn, probe, density)    # 1 - P0 = (theta t)^2 scaled
        deficit = tt * tt * scaled
        if scaled <= 0.0:
            return transverse**2 * g2
        return transverse**2 * slope * slope / ((1.0 - deficit) * scaled)
    if mode == "ba":
        def slope_fn(r):
            g = interaction_profile(density, r)
            return float(_sinc(2 * theta * g)) * g * g

        def deficit_fn(r):
            g = interaction_profile(density, r)
            return float(_sinc(theta * g)) ** 2 * g * g

        slope = _probe_average(slope_fn, probe, density)       # P0' = -2 theta slope
        scaled = _probe_average(deficit_fn, probe, density)    # 1 - P0 = theta^2 scaled
        deficit = theta * theta * scaled
        if scaled <= 0.0:
            return 2.0 * g2
        return 4.0 * slope * slope / ((1.0 - deficit) * scaled)
    raise ValueError("mode must be 'nb' or 'ba'")


def cfi_momentum_restricted(
    p_max: float,
    component: float,
    probe: Probe,
    density: SpinDensity,
    constants: Constants = CONSTANTS,
) -> float:
    """Momentum CFI restricted to |p| <= p_max.

    4 pi component^2 * int_0^pmax p Xi^2 dp; nondecreasing in p_max and
    converging to component^2 * coupling_g2.
    """
    if p_max < 0:
        raise ValueError("p_max must be non-negative")
    if p_max == 0.0:
        return 0.0
    hb = constants.hbar
    if isinstance(density, GaussianDensity):
        def f(p):
            return p * float(_xi_f_gaussian(p, probe.delta_e, density.width, hb)) ** 2
    else:
        def f(p):
            return p * momentum_scatter_amplitude(p, probe, density, constants) ** 2
    v, _ = integrate_with_breakpoints(f, [0.0, p_max])
    return 4 * math.pi * component**2 * v


_GAUSS8_NODES, _GAUSS8_WEIGHTS = np.polynomial.legendre.leggauss(8)


def cfi_momentum_pixelated(
    pixel: float,
    p_max: float,
    component: float,
    probe: Probe,
    density: SpinDensity,
    constants: Constants = CONSTANTS,
) -> float:
    """Momentum CFI with square pixels of the given side, disk |p| <= p_max.

    The grid is centred on the optical axis (one pixel centred at the
    origin, symmetric about both axes).  Per-pixel probabilities and their
    phase derivatives are integrated with a tensor Gauss rule of order 8.

    Bins whose probability underflows to zero are skipped; the floor is the
    smallest positive double rather than anything larger, because the deep
    tail of the unscattered beam (tiny probability, huge likelihood ratio)
    carries a finite share of the information.
    """
    if pixel <= 0 or p_max <= 0:
        raise ValueError("pixel and p_max must be positive")
    hb = constants.hbar
    ds = density.width
    de = probe.delta_e
    chi = de / ds
    # dimensionless momentum q = p * width / hbar
    px = pixel * ds / hb
    qmax = p_max * ds / hb

    if isinstance(density, GaussianDensity):
        def xi_tilde(q):
            return _xi_f_gaussian(q * hb / ds, de, ds, hb) * hb / ds
    else:
        def xi_tilde(q):
            flat = np.asarray(q, dtype=float).ravel()
            out = np.array(
                [
                    momentum_scatter_amplitude(qi * hb / ds, probe, density, constants)
                    for qi in flat
                ]
            )
            return (out * hb / ds).reshape(np.shape(q))

    def prob_density(qx, qy):
        q2 = qx * qx + qy * qy
        inside = q2 <= qmax * qmax
        return np.where(inside, (2 / math.pi) * chi**2 * np.exp(-2 * q2 * chi**2), 0.0)

    def deriv_density(qx, qy):
        q = np.hypot(qx, qy)
        q2 = q * q
        inside = (q2 <= qmax * qmax) & (q > 0)
        sinphi = np.where(q > 0, qy / np.where(q > 0, q, 1.0), 0.0)
        amp = chi * math.sqrt(2 / math.pi) * np.exp(-q2 * chi**2)
        return np.where(inside, 2 * component * sinphi * xi_tilde(q) * amp, 0.0)

    half = 0.5 * _GAUSS8_NODES  # nodes on [-1/2, 1/2]
    wx = 0.5 * _GAUSS8_WEIGHTS
    nx, ny = np.meshgrid(half, half)
    wxy = np.outer(wx, wx).ravel()
    nxf, nyf = nx.ravel(), ny.ravel()

    # Beyond q_live the unscattered probability underflows even in double
    # precision, so those bins cannot contribute to the sum.
    q_live = min(qmax, math.sqrt(709.0 / (2 * chi * chi)) + px)
    n_half = int(math.ceil((q_live + px) / px)) + 1
    total = 0.0
    # Enumerate pixel centres (i*px, j*px) row by row in the upper half
    # plane j >= 1 (weight 2 by mirror symmetry in q_y; the j = 0 row has
    # zero derivative by that same symmetry) and fold the q_x mirror
    # symmetry into a per-pixel weight.
    for j in range(1, n_half + 1):
        cy = j * px
        near_y = max(0.0, cy - px / 2)
        if near_y > q_live:
            break
        i_hi = int(math.floor(math.sqrt(q_live**2 - near_y**2) / px)) + 1
        centers = np.arange(0, i_hi + 1) * px
        qxs = centers[:, None] + px * nxf[None, :]
        qys = cy + px * nyf[None, :] + np.zeros_like(centers)[:, None]
        pbin = (wxy[None, :] * prob_density(qxs, qys)).sum(axis=1) * px * px
        live = pbin >= 1e-300
        if not np.any(live):
            continue
        dbin = (wxy[None, :] * deriv_density(qxs[live], qys[live])).sum(axis=1) * px * px
        weights = np.where(centers[live] > 0, 4.0, 2.0)
        total += float(np.sum(weights * dbin * dbin / pbin[live]))
    return total


def cfi(config: EstimationConfig) -> float:
    """Classical Fisher information of the configured measurement."""
    m = config.measurement
    if isinstance(m, PositionMeasurement):
        return 0.0
    if isinstance(m, MomentumMeasurement):
        comp = config.sample.transverse
        if m.pixel is not None:
            p_max = m.p_max
            if p_max is None:
                # cover the scattered amplitude's support
                dtil = 1.0 / math.sqrt(
                    1.0 / config.probe.delta_e**2 + 2.0 / config.density.width**2
                )
                p_max = 8.0 * config.constants.hbar / dtil
            return cfi_momentum_pixelated(
                m.pixel, p_max, comp, config.probe, config.density, config.constants
            )
        if m.p_max is not None:
            return cfi_momentum_restricted(
                m.p_max, comp, config.probe, config.density, config.constants
            )
        return comp**2 * coupling_g2(config.density, config.probe)
    if isinstance(m, OamMeasurement):
        return cfi_oam(
            config.sample.mode,
            config.theta,
            config.sample.transverse,
            config.density,
            config.probe,
        )
    if isinstance(m, DefocusMeasurement):
        raise ValueError(
            "defocus-plane CFI is not modeled; it interpolates between the "
            "position (0) and momentum values"
        )
    raise TypeError(f"unknown measurement {m!r}")


def electrons_for_snr(snr: float, theta: float, info: float) -> int:
    """Electron count needed for a target SNR at phase theta."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    if info <= 0:
        raise ValueError("insensitive configuration: Fisher information is zero")
    return math.ceil(snr * snr / (theta * theta * info))


def optimal_focus(
    density: SpinDensity, bounds: tuple[float, float] = (0.05, 20.0)
) -> tuple[float, float]:
    """Maximize coupling_g2 over the focus ratio chi by golden section.

    A coarse grid scan first asserts the bracket is unimodal; the returned
    chi* is accurate to 1e-4.
    """
    lo, hi = bounds
    if not lo < hi:
        raise ValueError("bounds must satisfy lo < hi")

    def g2(chi):
        return coupling_g2(density, Probe(delta_e=chi * density.width))

    grid = np.geomspace(lo, hi, 33)
    vals = np.array([g2(c) for c in grid])
    imax = int(np.argmax(vals))
    rising = np.all(np.diff(vals[: imax + 1]) > -1e-12)
    falling = np.all(np.diff(vals[imax:]) < 1e-12)
    if not (rising and falling):
        raise ValueError("coupling_g2 is not unimodal on the given bracket")
    a = grid[max(imax - 1, 0)]
    b = grid[min(imax + 1, len(grid) - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = g2(c), g2(d)
    while b - a > 1e-4:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = g2(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = g2(d)
    chi_star = (a + b) / 2
    return chi_star, g2(chi_star)


@dataclass(frozen=True)
class FisherReport:
    coupling_g2: float
    coupling_g4: float
    qfi_nb: float
    qfi_ba: float
    cfi: Optional[float]
    measurement: Measurement
    theta: float
    chi: float
    qfi_ba_leading_order_valid: bool
    cfi_leading_order_valid: bool


def fisher_report(config: EstimationConfig) -> FisherReport:
    g2 = coupling_g2(config.density, config.probe)
    g4 = coupling_g4(config.density, config.probe)
    try:
        cfi_value = cfi(config)
    except ValueError:
        cfi_value = None
    # only the backaction momentum CFI is a leading-order value; position,
    # OAM, and fixed-moment momentum are exact at any phase
    cfi_valid = not (
        config.sample.mode == "ba"
        and isinstance(config.measurement, MomentumMeasurement)
        and config.theta >= 0.1
    )
    return FisherReport(
        coupling_g2=g2,
        coupling_g4=g4,
        qfi_nb=config.sample.transverse**2 * g2,
        qfi_ba=2.0 * g2,
        cfi=cfi_value,
        measurement=config.measurement,
        theta=config.theta,
        chi=config.chi,
        qfi_ba_leading_order_valid=config.theta < 0.1,
        cfi_leading_order_valid=cfi_valid,
    )

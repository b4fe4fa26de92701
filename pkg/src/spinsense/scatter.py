"""Scattered-state amplitudes and reduced-state structure.

Momentum-space first-order amplitudes, defocus-plane amplitudes of the
imaged electron (closed forms for Gaussian beams and spin densities, plus a
mode-expansion oracle with a rigorous geometric tail bound), the 4x4
second-order difference matrix of the backaction-scattered state, and the
optimal binary POVM for state discrimination.

Defocus-plane geometry: a thin lens of focal length f at distance z from
the sample, detector at distance 2z.  The imaged basis is labelled by
alpha(z) = arccos(1 - z/f) and the scale kappa^2 = k0 / sqrt(z(2f - z));
z -> 0 is image mode (identity optics) and z = f is diffraction mode with
p = hbar kappa^2 r.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import (
    CONSTANTS,
    Constants,
    GaussianDensity,
    Probe,
    SpinDensity,
    interaction_profile,
)
from .specfun import (
    DEFAULT_QUADRATURE,
    integrate_with_breakpoints,
)

__all__ = [
    "DefocusPlane",
    "BackactionState",
    "momentum_amplitude",
    "momentum_scatter_amplitude",
    "defocus_amplitude",
    "defocus_scatter_amplitude",
    "defocus_series",
    "backaction_difference_matrix",
    "optimal_povm_coefficients",
]


@dataclass(frozen=True)
class DefocusPlane:
    """Detection plane between image mode (z=0) and diffraction mode (z=f)."""

    z: float
    f: float
    k0: float

    def __post_init__(self):
        if self.f <= 0 or self.k0 <= 0:
            raise ValueError("f and k0 must be positive")
        if not 0.0 <= self.z <= self.f:
            raise ValueError("z must lie in [0, f]")

    @property
    def alpha(self) -> float:
        return math.acos(1.0 - self.z / self.f)

    @property
    def kappa_sq(self) -> float:
        if self.z <= 0.0 or self.z >= 2 * self.f:
            raise ValueError("kappa diverges at z = 0 and z = 2f")
        return self.k0 / math.sqrt(self.z * (2 * self.f - self.z))


def momentum_amplitude(
    p: float, probe: Probe, constants: Constants = CONSTANTS
) -> float:
    """Transverse-momentum amplitude of the unscattered Gaussian beam.

    Normalized so that the integral of the squared amplitude over the
    momentum plane is one.
    """
    if p < 0:
        raise ValueError("p must be non-negative")
    de = probe.delta_e
    hb = constants.hbar
    return (de / hb) * math.sqrt(2 / math.pi) * math.exp(-(p * de / hb) ** 2)


def _xi_f_gaussian(p, delta_e, delta_s, hbar):
    """Closed-form first-order scattered radial amplitude, Gaussian density.

    Vectorized in p; the p -> 0 limit is taken through expm1 so the 1/p
    prefactor never meets a raw difference of exponentials.
    """
    p = np.asarray(p, dtype=float)
    dtil2 = 1.0 / (1.0 / delta_e**2 + 2.0 / delta_s**2)
    a = dtil2 / hbar**2
    b = delta_e**2 / hbar**2
    pref = delta_s / (math.sqrt(2 * math.pi) * delta_e)
    with np.errstate(invalid="ignore"):
        out = np.where(
            p > 0,
            -pref * np.exp(-a * p * p) * np.expm1(-(b - a) * p * p)
            / np.where(p > 0, p, 1.0),
            0.0,
        )
    return out


def momentum_scatter_amplitude(
    p: float,
    probe: Probe,
    density: SpinDensity,
    constants: Constants = CONSTANTS,
) -> float:
    """Radial part of the first-order scattered momentum amplitude.

    For a Gaussian spin density this is the closed form; otherwise the
    Hankel transform of g against the beam profile is integrated piecewise
    between Bessel-J1 zeros.
    """
    if p < 0:
        raise ValueError("p must be non-negative")
    hb = constants.hbar
    if isinstance(density, GaussianDensity):
        return float(_xi_f_gaussian(p, probe.delta_e, density.width, hb))
    if p == 0.0:
        return 0.0
    from scipy import special as _sp

    de = probe.delta_e
    r_max = 16.0 * de

    def f(r):
        psi0 = math.exp(-r * r / (4 * de * de)) / math.sqrt(2 * math.pi * de * de)
        return r * _sp.j1(p * r / hb) * interaction_profile(density, r) * psi0

    n_zero = int(p * r_max / (math.pi * hb)) + 1
    zeros = _sp.jn_zeros(1, n_zero) * hb / p
    points = [0.0] + [z for z in zeros if z < r_max] + [r_max]
    v, _ = integrate_with_breakpoints(f, points, DEFAULT_QUADRATURE)
    return v / hb


_GL20_NODES, _GL20_WEIGHTS = np.polynomial.legendre.leggauss(20)


def scatter_amplitude_sampler(
    probe: Probe, density: SpinDensity, constants: Constants = CONSTANTS
):
    """Vectorized evaluator of the scattered momentum amplitude.

    Precomputes a composite Gauss-Legendre radial rule against g(r) psi0(r)
    once, so the returned callable evaluates the Hankel transform for whole
    momentum arrays at the cost of one Bessel call per node.  Gaussian
    densities shortcut to the closed form.
    """
    hb = constants.hbar
    if isinstance(density, GaussianDensity):
        de, ds = probe.delta_e, density.width

        def closed(p):
            return _xi_f_gaussian(p, de, ds, hb)

        return closed
    from scipy import special as _sp

    de = probe.delta_e
    r_max = 16.0 * de
    inner = min(density.width, de)
    breaks = np.unique(np.concatenate([[0.0], np.geomspace(inner / 32, r_max, 56)]))
    mids = 0.5 * (breaks[:-1] + breaks[1:])
    halfw = 0.5 * (breaks[1:] - breaks[:-1])
    nodes = (mids[:, None] + halfw[:, None] * _GL20_NODES[None, :]).ravel()
    weights = (halfw[:, None] * _GL20_WEIGHTS[None, :]).ravel()
    psi0 = np.exp(-nodes**2 / (4 * de * de)) / math.sqrt(2 * math.pi * de * de)
    gvals = np.array([interaction_profile(density, r) for r in nodes])
    base = weights * nodes * gvals * psi0 / hb

    def sampled(p):
        p = np.asarray(p, dtype=float)
        return (base[None, :] * _sp.j1(np.outer(p.ravel(), nodes) / hb)).sum(
            axis=1
        ).reshape(p.shape)

    return sampled


def _moebius(b: float, alpha: float) -> complex:
    """w = b e^{-2i alpha} / (1 - b e^{-2i alpha}); Re w > -1/2 for |b| < 1."""
    zc = b * cmath.exp(-2j * alpha)
    return zc / (1.0 - zc)


def _plane_params(plane: DefocusPlane, probe: Probe, delta_s: float):
    k2 = plane.kappa_sq
    a = plane.alpha
    kp2 = k2 + 1.0 / (2 * probe.delta_e**2)
    kb2 = kp2 + 1.0 / delta_s**2
    bp = 1.0 - 2 * k2 / kp2
    bb = 1.0 - 2 * k2 / kb2
    wp = _moebius(bp, a)
    wb = _moebius(bb, a)
    return k2, a, kp2, kb2, bp, bb, wp, wb


def defocus_amplitude(r: float, plane: DefocusPlane, probe: Probe) -> complex:
    """Unscattered amplitude in the defocus-plane basis (Gaussian beam)."""
    if r < 0:
        raise ValueError("r must be non-negative")
    k2, a, kp2, _, bp, _, wp, _ = _plane_params(plane, probe, probe.delta_e)
    pref = (
        cmath.exp(-1j * a)
        * math.sqrt(2 / math.pi)
        * k2
        / (kp2 * probe.delta_e)
        / (1.0 - bp * cmath.exp(-2j * a))
    )
    # Exponents are combined before exponentiating: Re(1/2 + w) > 0 always,
    # so the product can never overflow even where either factor would.
    return pref * cmath.exp(-k2 * r * r * (0.5 + wp))


def defocus_scatter_amplitude(
    r: float, plane: DefocusPlane, probe: Probe, density: SpinDensity
) -> complex:
    """First-order scattered radial amplitude on a defocus plane.

    Closed form; requires a Gaussian spin density.
    """
    if not isinstance(density, GaussianDensity):
        raise TypeError("defocus closed form requires a Gaussian spin density")
    if r < 0:
        raise ValueError("r must be non-negative")
    ds = density.width
    k2, a, _, _, _, _, wp, wb = _plane_params(plane, probe, ds)
    x = k2 * r * r
    pref = -1j * ds / (math.sqrt(2 * math.pi) * probe.delta_e)
    if r == 0.0:
        return 0.0 + 0.0j
    # e^{-x(1/2+wp)} - e^{-x(1/2+wb)} without cancellation at small x
    bracket = -cmath.exp(-x * (0.5 + wp)) * (cmath.exp(-x * (wb - wp)) - 1.0)
    return pref * bracket / r


def defocus_series(
    r: float,
    plane: DefocusPlane,
    probe: Probe,
    density: SpinDensity,
    n_max: int = 2000,
) -> tuple[complex, complex, float]:
    """Laguerre-mode partial sums of both defocus amplitudes.

    Returns (unscattered, scattered, tail_bound) where tail_bound bounds the
    combined truncation error of the two partial sums.  The bound is
    geometric: the mode coefficients decay as powers of
    b' = 1 - 2 kappa^2 / kappa'^2 (and its primed analogue), both of
    magnitude < 1, while |L_n(x)| e^{-x/2} <= 1 and
    |L_n^1(x)| e^{-x/2} <= n + 1 on x >= 0.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not isinstance(density, GaussianDensity):
        raise TypeError("series oracle requires a Gaussian spin density")
    ds = density.width
    de = probe.delta_e
    k2, a, kp2, _, bp, bb, _, _ = _plane_params(plane, probe, ds)
    x = k2 * r * r
    expx = math.exp(-x / 2)
    phase2 = cmath.exp(-2j * a)

    c0_pref = math.sqrt(k2 / math.pi) * expx * math.sqrt(2) / de * k2**0.5 / kp2
    xi_pref = -1j * k2 * r * ds / (math.sqrt(2 * math.pi) * de) * expx

    s0 = 0.0 + 0.0j
    s1 = 0.0 + 0.0j
    l0_m1, l0_n = 0.0, 1.0               # L_{-1} := 0, L_0 = 1
    l1_m1, l1_n = 0.0, 1.0               # L_{-1}^1 := 0, L_0^1 = 1
    bp_n = 1.0                           # bp^n
    bbe = bb * phase2
    bpe = bp * phase2
    bbe_n1 = bbe                         # (bb e^{-2i alpha})^{n+1}
    bpe_n1 = bpe
    ph0 = cmath.exp(-1j * a)             # e^{-i alpha (2n+1)}
    for n in range(n_max + 1):
        s0 += ph0 * l0_n * c0_pref * bp_n
        s1 += (l1_n / (n + 1)) * (bbe_n1 - bpe_n1)
        # advance
        ph0 *= phase2
        bp_n *= bp
        bbe_n1 *= bbe
        bpe_n1 *= bpe
        l0_m1, l0_n = l0_n, ((2 * n + 1 - x) * l0_n - n * l0_m1) / (n + 1)
        l1_m1, l1_n = l1_n, ((2 * n + 2 - x) * l1_n - (n + 1) * l1_m1) / (n + 1)
    s1 *= xi_pref

    abp, abb = abs(bp), abs(bb)
    n1 = n_max + 1
    tail0 = abs(c0_pref) * abp**n1 / (1.0 - abp)
    c1 = abs(xi_pref)
    tail1 = c1 * (abb ** (n1 + 1) / (1.0 - abb) + abp ** (n1 + 1) / (1.0 - abp))
    return s0, s1, tail0 + tail1


@dataclass(frozen=True)
class BackactionState:
    """Second-order structure of the backaction-scattered electron state.

    ``matrix`` is the 4x4 difference (scattered minus incident projector) in
    the rotated basis {incident, orthogonal zero-OAM, OAM +, OAM -}; its
    trace is exactly zero by construction.
    """

    matrix: np.ndarray
    theta_bar: float
    mixing: float
    bloch: tuple[float, float, float]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def backaction_difference_matrix(
    theta: float,
    bloch: tuple[float, float, float],
    coupling_g2: float,
    mixing: float,
) -> BackactionState:
    """Assemble the 4x4 second-order difference matrix.

    Entries follow the perturbative expansion of the reduced scattered
    state; the in-plane Bloch angle has already been rotated away, so only
    |c_perp| and c_z enter and the matrix is real symmetric.
    """
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if coupling_g2 <= 0:
        raise ValueError("coupling_g2 must be positive")
    c = np.asarray(bloch, dtype=float)
    if np.linalg.norm(c) > 1.0 + 1e-9:
        raise ValueError("Bloch vector must satisfy |c| <= 1")
    c_perp = math.hypot(c[0], c[1])
    c_z = c[2]
    tb = theta * math.sqrt(coupling_g2 / 2.0)
    tb2 = tb * tb
    m = np.array(
        [
            [-tb2, -tb2 * mixing, 0.0, c_perp * tb / math.sqrt(2)],
            [-tb2 * mixing, 0.0, 0.0, 0.0],
            [0.0, 0.0, tb2 / 2, c_z * tb2 / 2],
            [c_perp * tb / math.sqrt(2), 0.0, c_z * tb2 / 2, tb2 / 2],
        ]
    )
    return BackactionState(matrix=m, theta_bar=tb, mixing=mixing, bloch=tuple(c))


def optimal_povm_coefficients(dq: float) -> tuple[float, float]:
    """Coefficients (a, b) of the optimal discrimination projector.

    The positive eigenvector of the two-state difference operator is
    (a |scattered> - b |incident>) / dq with a^2 + b^2 = 1.  Defined for
    0 < dq <= 1; dq = 1 gives (1, 0) for orthogonal states.
    """
    if not 0.0 < dq <= 1.0:
        raise ValueError("dq must lie in (0, 1]")
    return math.sqrt((1.0 + dq) / 2.0), math.sqrt((1.0 - dq) / 2.0)

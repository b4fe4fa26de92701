"""Special functions, deterministic quadrature, and seeded Monte Carlo.

Everything in this module is pure and stateless.  The special functions are
thin, domain-checked wrappers around scipy.special; the quadrature routines
add explicit semi-infinite handling and a reproducible batch-mean Monte
Carlo estimator on top of scipy/numpy primitives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _sciint
from scipy import special as _sp

__all__ = [
    "QuadratureSpec",
    "McSpec",
    "NonConvergenceError",
    "bessel_j",
    "bessel_k",
    "erf",
    "erf_inv",
    "assoc_laguerre",
    "integrate",
    "mc_integrate",
]


class NonConvergenceError(RuntimeError):
    """Quadrature failed to reach the requested tolerance.

    Carries the best available estimate and its error bound so callers can
    decide whether to accept it anyway.
    """

    def __init__(self, message, value, error):
        super().__init__(message)
        self.value = value
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 200
    semi_infinite_transform: bool = True

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class McSpec:
    samples: int = 1_000_000
    seed: int = 0
    batch_count: int = 20

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.batch_count < 2:
            raise ValueError("batch_count must be >= 2")
        if self.samples % self.batch_count != 0:
            raise ValueError("batch_count must divide samples")


DEFAULT_QUADRATURE = QuadratureSpec()


def bessel_j(order: int, x: float) -> float:
    """Bessel function of the first kind J_n(x) for integer order n >= 0."""
    if order < 0:
        raise ValueError("order must be a non-negative integer")
    if order == 0:
        return float(_sp.j0(x))
    if order == 1:
        return float(_sp.j1(x))
    return float(_sp.jv(order, x))


def bessel_k(order: int, x: float) -> float:
    """Modified Bessel function K_0(x) or K_1(x) for x > 0."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    if x <= 0:
        raise ValueError("bessel_k requires x > 0")
    return float(_sp.k0(x) if order == 0 else _sp.k1(x))


def erf(x: float) -> float:
    return math.erf(x)


def erf_inv(x: float) -> float:
    """Inverse error function; defined for |x| < 1."""
    if not -1.0 < x < 1.0:
        raise ValueError("erf_inv requires |x| < 1")
    return float(_sp.erfinv(x))


def assoc_laguerre(n: int, k: int, x: float) -> float:
    """Associated Laguerre polynomial L_n^k(x) for k in {0, 1}.

    Evaluated by the stable three-term recurrence in n.
    """
    if n < 0:
        raise ValueError("n must be a non-negative integer")
    if k not in (0, 1):
        raise ValueError("k must be 0 or 1")
    prev = 1.0
    if n == 0:
        return prev
    cur = 1.0 + k - x
    for m in range(1, n):
        prev, cur = cur, ((2 * m + k + 1 - x) * cur - (m + k) * prev) / (m + 1)
    return cur


def _check_quad(value, err, spec, message):
    tol = max(spec.abs_tol, spec.rel_tol * abs(value))
    if message is not None and err > 10 * tol:
        raise NonConvergenceError(
            f"quadrature did not converge: {message}", value, err
        )
    return value, err


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    scale: float = 1.0,
) -> tuple[float, float]:
    """Adaptive quadrature of f on (a, b); b may be math.inf.

    Semi-infinite domains are compactified with x = a + scale * t/(1-t),
    mapping (a, inf) onto t in (0, 1); the transformed integrand is handed
    to an adaptive Gauss-Kronrod rule.  ``scale`` should be the natural
    length of the integrand (dimensional problems would otherwise squeeze
    all structure into a corner of the unit interval).  Returns
    (value, error_estimate) and raises NonConvergenceError when the
    estimate is untrustworthy.
    """
    if math.isinf(b):
        if not spec.semi_infinite_transform:
            raise ValueError("semi-infinite domain with transform disabled")
        if scale <= 0:
            raise ValueError("scale must be positive")

        def g(t):
            if t >= 1.0:
                return 0.0
            u = 1.0 - t
            x = a + scale * t / u
            v = scale * f(x) / (u * u)
            return v if math.isfinite(v) else 0.0

        out = _sciint.quad(
            g, 0.0, 1.0,
            epsabs=spec.abs_tol, epsrel=spec.rel_tol,
            limit=spec.max_subdivisions, full_output=True,
        )
    else:
        out = _sciint.quad(
            f, a, b,
            epsabs=spec.abs_tol, epsrel=spec.rel_tol,
            limit=spec.max_subdivisions, full_output=True,
        )
    value, err = out[0], out[1]
    message = out[3] if len(out) > 3 else None
    return _check_quad(value, err, spec, message)


def integrate_with_breakpoints(
    f: Callable[[float], float],
    points: Sequence[float],
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    scale: float = 1.0,
) -> tuple[float, float]:
    """Piecewise quadrature over consecutive breakpoints (last may be inf).

    Used for integrands with known kinks or sign-change subdivision: each
    subinterval is handled independently, so the adaptive rule never
    straddles a non-smooth point.
    """
    total = 0.0
    toterr = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        v, e = integrate(f, lo, hi, spec, scale=scale)
        total += v
        toterr += e
    return total, toterr


def mc_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    bounds: Sequence[tuple[float, float]],
    spec: McSpec,
) -> tuple[float, float]:
    """Plain Monte Carlo over a hyper-rectangle with batch-mean errors.

    f receives an (n, d) array of points and must return n values.  Each
    batch draws from its own counter-based Philox stream (seed jumped by the
    batch index), so the result is bit-identical for a fixed seed no matter
    how batches would be scheduled.  std_error is the standard error of the
    batch means.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if any(hi <= lo for lo, hi in bounds):
        raise ValueError("each bound must satisfy lo < hi")
    dim = len(bounds)
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    volume = 1.0
    for lo, hi in bounds:
        volume *= hi - lo
    per_batch = spec.samples // spec.batch_count
    lows = np.array([lo for lo, _ in bounds])
    widths = np.array([hi - lo for lo, hi in bounds])
    means = np.empty(spec.batch_count)
    base = np.random.Philox(key=spec.seed)
    for b in range(spec.batch_count):
        rng = np.random.Generator(base.jumped(b))
        pts = lows + widths * rng.random((per_batch, dim))
        vals = np.asarray(f(pts), dtype=float)
        means[b] = vals.mean()
    value = volume * means.mean()
    std_error = volume * means.std(ddof=1) / math.sqrt(spec.batch_count)
    return float(value), float(std_error)

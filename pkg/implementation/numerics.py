# Numerics layer for the Homodyne Super-Resolution Simulator
#
# Special functions, adaptive quadrature and reproducible random streams
# used by every other module.

import logging
from typing import Callable, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate as sp_integrate
from scipy import special as sp_special

from implementation import settings
from implementation.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

Number = Union[float, complex]


class Quadrature(BaseModel):
    """Tolerances and subdivision budget for adaptive quadrature"""
    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(default=settings.QUAD_ABS_TOL, gt=0)
    rel_tol: float = Field(default=settings.QUAD_REL_TOL, gt=0)
    max_subdivisions: int = Field(default=settings.QUAD_MAX_SUBDIVISIONS, ge=1)


DEFAULT_QUADRATURE = Quadrature()


class RngStream:
    """Single-owner random stream; identical seed gives an identical sample sequence

    Attributes:
        seed: Root 64-bit seed
        counter: Number of variates drawn so far
    """

    def __init__(self, seed: int, _sequence: np.random.SeedSequence = None):
        if seed < 0 or seed >= 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.counter = 0
        self._sequence = _sequence if _sequence is not None else np.random.SeedSequence(self.seed)
        self._generator = np.random.Generator(np.random.PCG64(self._sequence))

    def spawn(self, count: int) -> List["RngStream"]:
        """Split off independent child streams, one per concurrent batch"""
        return [RngStream(self.seed, _sequence=child) for child in self._sequence.spawn(count)]

    def gaussian_batch(self, mean, std: float, size: int) -> np.ndarray:
        if std < 0:
            raise DomainError(f"standard deviation must be non-negative, got {std}")
        self.counter += size
        return self._generator.normal(mean, std, size)

    def poisson_batch(self, mean, size: int) -> np.ndarray:
        if np.any(np.asarray(mean) < 0):
            raise DomainError("Poisson mean must be non-negative")
        self.counter += size
        return self._generator.poisson(mean, size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, counter={self.counter})"


def hermite_phys(n: int, x):
    """Physicist's Hermite polynomial H_n(x)

    Args:
        n: Polynomial order, 0 <= n <= 30
        x: Real scalar or array

    Returns:
        H_n evaluated at x
    """
    if int(n) != n or n < 0:
        raise DomainError(f"Hermite order must be a non-negative integer, got {n}")
    if n > settings.MAX_MODE_ORDER:
        raise DomainError(f"Hermite order {n} exceeds the guard limit {settings.MAX_MODE_ORDER}")
    value = sp_special.eval_hermite(int(n), x)
    return float(value) if np.ndim(value) == 0 else value


def erf(x):
    """Error function (odd, saturates to +/-1)"""
    value = sp_special.erf(x)
    return float(value) if np.ndim(value) == 0 else value


def truncated_bounds(width: float, widths: float = settings.TRUNCATION_WIDTHS) -> Tuple[float, float]:
    """Finite window standing in for the real line under a Gaussian envelope of the given width"""
    return -widths * width, widths * width


def _integrate_real(f: Callable[[float], float], a: float, b: float, q: Quadrature) -> Tuple[float, float]:
    result = sp_integrate.quad(
        f, a, b,
        epsabs=q.abs_tol,
        epsrel=q.rel_tol,
        limit=q.max_subdivisions,
        full_output=1
    )
    value, error_bound, info = result[:3]
    message = result[3] if len(result) > 3 else None
    tolerance = max(q.abs_tol, q.rel_tol * abs(value))

    if message is not None:
        if info.get("last", 0) >= q.max_subdivisions or error_bound > tolerance:
            raise ConvergenceError(f"quadrature on [{a}, {b}] did not converge: {message.strip()}",
                                   estimate=value, error_bound=error_bound)
        logger.warning(f"Quadrature on [{a}, {b}] reported '{message.strip()}' but met tolerance")
    return value, error_bound


def integrate(f: Callable[[float], Number], a: float, b: float, q: Quadrature = DEFAULT_QUADRATURE) -> Number:
    """Adaptive Gauss-Kronrod integral of a real- or complex-valued function

    The codomain is detected by probing f at the midpoint; complex integrands
    are split into real and imaginary parts.

    Raises:
        DomainError: if a >= b
        ConvergenceError: if the subdivision budget is exhausted
    """
    if not a < b:
        raise DomainError(f"integration bounds must satisfy a < b, got [{a}, {b}]")

    probe = f(0.5 * (a + b))
    if isinstance(probe, (complex, np.complexfloating)):
        return integrate_complex(f, a, b, q)

    value, _ = _integrate_real(lambda x: float(f(x)), a, b, q)
    return value


def integrate_complex(f: Callable[[float], complex], a: float, b: float,
                      q: Quadrature = DEFAULT_QUADRATURE) -> complex:
    """Integral of a complex-valued function as two real quadratures"""
    if not a < b:
        raise DomainError(f"integration bounds must satisfy a < b, got [{a}, {b}]")
    real, _ = _integrate_real(lambda x: float(np.real(f(x))), a, b, q)
    imag, _ = _integrate_real(lambda x: float(np.imag(f(x))), a, b, q)
    return complex(real, imag)


def sample_gaussian(stream: RngStream, mean: float, std: float) -> float:
    """One normal draw from the stream"""
    if std < 0:
        raise DomainError(f"standard deviation must be non-negative, got {std}")
    if std == 0:
        return float(mean)
    return float(stream.gaussian_batch(mean, std, 1)[0])


def sample_poisson(stream: RngStream, mean: float) -> int:
    """One Poisson draw from the stream"""
    if mean < 0:
        raise DomainError(f"Poisson mean must be non-negative, got {mean}")
    if mean == 0:
        return 0
    return int(stream.poisson_batch(mean, 1)[0])

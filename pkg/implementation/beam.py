# Hermite-Gaussian mode engine for the Homodyne Super-Resolution Simulator

import math
import logging
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from implementation import settings
from implementation.exceptions import DomainError, TruncationDomainError
from implementation.numerics import (
    DEFAULT_QUADRATURE, Quadrature, hermite_phys, integrate_complex, truncated_bounds
)

logger = logging.getLogger(__name__)


class BeamGeometry(BaseModel):
    """Wavelength and waist of the (identical) source beams; everything else is derived"""
    model_config = ConfigDict(frozen=True)

    wavelength: float = Field(gt=0, description="Laser central wavelength [m]")
    w0: float = Field(gt=0, description="Beam waist [m]")

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.w0 ** 2 / self.wavelength

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength


class ModeIndex(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0, le=settings.MAX_MODE_ORDER)
    m: int = Field(ge=0, le=settings.MAX_MODE_ORDER)


class DisplacementDecomposition(BaseModel):
    """First-order HG00/HG10/HG01/HG11 content of one displaced fundamental beam"""
    model_config = ConfigDict(frozen=True)

    c00: float
    c10: float
    c01: float
    c11: float


def _check_distance(z):
    if np.any(np.asarray(z) < 0):
        raise DomainError(f"propagation distance must be non-negative, got {z}")


def beam_width(g: BeamGeometry, z: float) -> float:
    """w(z) = w0 sqrt(1 + (z/z_R)^2)"""
    _check_distance(z)
    return g.w0 * math.sqrt(1 + (z / g.rayleigh_range) ** 2)


def gouy_phase(g: BeamGeometry, z: float) -> float:
    _check_distance(z)
    return math.atan(z / g.rayleigh_range)


def radius_curvature(g: BeamGeometry, z: float) -> float:
    """R_c(z) = z(1 + (z_R/z)^2); infinite (flat wavefront) at the waist"""
    _check_distance(z)
    if z == 0:
        return math.inf
    return z * (1 + (g.rayleigh_range / z) ** 2)


def inverse_radius_curvature(g: BeamGeometry, z: float) -> float:
    """1/R_c(z), taken as exactly 0 at the waist"""
    _check_distance(z)
    if z == 0:
        return 0.0
    return z / (z ** 2 + g.rayleigh_range ** 2)


def hg_amplitude_1d(g: BeamGeometry, n: int, x, z: float):
    """Complex amplitude u_n(x, z) of the 1D Hermite-Gaussian mode [m^-1/2]

    The Gouy factor sits under the square root of the normalisation, so the
    mode carries the phase (2n+1)Psi(z)/2 on axis, taken continuously in z.

    Args:
        g: Beam geometry
        n: Mode order, 0 <= n <= 30
        x: Transverse coordinate(s) [m]
        z: Propagation distance from the waist [m]

    Returns:
        Complex scalar or array matching x
    """
    w = beam_width(g, z)
    psi = gouy_phase(g, z)
    inv_r = inverse_radius_curvature(g, z)

    x = np.asarray(x, dtype=float)
    norm = (2 / math.pi) ** 0.25 / math.sqrt(2 ** n * math.factorial(n) * w)
    gouy = np.exp(0.5j * (2 * n + 1) * psi)
    envelope = np.exp(-x ** 2 * (1 / w ** 2 + 0.5j * g.wavenumber * inv_r))
    value = norm * gouy * hermite_phys(n, math.sqrt(2) * x / w) * envelope
    return complex(value) if value.ndim == 0 else value


def hg_amplitude_2d(g: BeamGeometry, idx: ModeIndex, x, y, z: float):
    """u_{n,m}(x, y, z) = u_n(x, z) u_m(y, z) [m^-1]"""
    return hg_amplitude_1d(g, idx.n, x, z) * hg_amplitude_1d(g, idx.m, y, z)


def displaced_fundamental(g: BeamGeometry, x, d: float, z: float):
    """u_0(x + d, z), evaluated exactly with no truncation"""
    return hg_amplitude_1d(g, 0, np.asarray(x, dtype=float) + d, z)


def decompose_displacement(g: BeamGeometry, d: float, theta_d: float, sign: int = 1) -> DisplacementDecomposition:
    """First-order mode content of a source displaced by sign*d at angle theta_d

    Source A+ (sign=+1) excites HG10 with -d/w0 cos(theta_d); A- flips the
    sign of the HG10 and HG01 terms while HG11 keeps its sign.

    Raises:
        TruncationDomainError: if |d| >= w0
    """
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    ratio = d / g.w0
    if abs(ratio) >= 1:
        raise TruncationDomainError(f"first-order truncation needs |d| < w0, got d={d} m, w0={g.w0} m")

    return DisplacementDecomposition(
        c00=1.0,
        c10=-sign * ratio * math.cos(theta_d),
        c01=-sign * ratio * math.sin(theta_d),
        c11=0.5 * ratio ** 2 * math.sin(2 * theta_d),
    )


def displacement_coefficient_exact(n: int, d: float, w0: float) -> float:
    """Exact overlap of u_n with a waist-plane Gaussian displaced by d"""
    ratio = d / w0
    return (-ratio) ** n * math.exp(-0.5 * ratio ** 2) / math.sqrt(math.factorial(n))


def overlap_coefficient(g: BeamGeometry, n: int, d: float, z: float = 0.0,
                        q: Quadrature = DEFAULT_QUADRATURE) -> complex:
    """Numerical overlap integral of u_n*(x, z) with u_0(x + d, z)

    Raises:
        ConvergenceError: propagated from the quadrature
    """
    if n > settings.MAX_MODE_ORDER:
        raise DomainError(f"mode order {n} exceeds the guard limit {settings.MAX_MODE_ORDER}")
    a, b = truncated_bounds(beam_width(g, z))
    a, b = a - abs(d), b + abs(d)

    def integrand(x):
        return np.conj(hg_amplitude_1d(g, n, x, z)) * displaced_fundamental(g, x, d, z)

    return integrate_complex(integrand, a, b, q)


def mode_profile(g: BeamGeometry, n: int, z: float, points: int = 401) -> Tuple[np.ndarray, np.ndarray]:
    """Sample |u_n(x, z)|^2 across the truncation window"""
    if points < 2:
        raise DomainError(f"need at least 2 sample points, got {points}")
    a, b = truncated_bounds(beam_width(g, z))
    x = np.linspace(a, b, points)
    intensity = np.abs(hg_amplitude_1d(g, n, x, z)) ** 2
    return x, intensity

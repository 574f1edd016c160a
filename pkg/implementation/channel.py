# Diffraction channel for the Homodyne Super-Resolution Simulator

import math
import logging
from typing import Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from implementation.beam import BeamGeometry, beam_width, hg_amplitude_1d
from implementation.exceptions import DomainError
from implementation.numerics import DEFAULT_QUADRATURE, Quadrature, erf, integrate

logger = logging.getLogger(__name__)

# Rounding slack tolerated before a transmissivity is clamped into [0, 1]
_CLAMP_SLACK = 1e-12


class Aperture(BaseModel):
    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0, description="Receiver aperture radius [m]")


class ChannelLeg(BaseModel):
    """One source-to-receiver leg

    Scenarios get their legs from build() / legs_for(), which compute T from
    (g, r, ell). forced() pins T for analytic limits such as T = 1 and marks
    the leg with origin "forced".
    """
    model_config = ConfigDict(frozen=True)

    ell: float = Field(ge=0, description="Propagation distance [m]")
    T: float = Field(ge=0, le=1, description="HG10 transmissivity")
    origin: Literal["closed_form", "forced"]

    @classmethod
    def build(cls, g: BeamGeometry, aperture: Aperture, ell: float) -> "ChannelLeg":
        return cls(ell=ell, T=transmissivity_closed(g, aperture, ell), origin="closed_form")

    @classmethod
    def forced(cls, ell: float, T: float) -> "ChannelLeg":
        return cls(ell=ell, T=T, origin="forced")


def _clamp(value: float, ell: float) -> float:
    if 0 <= value <= 1:
        return value
    if -_CLAMP_SLACK < value < 1 + _CLAMP_SLACK:
        logger.warning(f"Clamping transmissivity {value!r} at ell={ell} m into [0, 1]")
        return min(max(value, 0.0), 1.0)
    raise DomainError(f"transmissivity {value!r} at ell={ell} m lies outside [0, 1]")


def transmissivity_closed(g: BeamGeometry, a: Aperture, ell: float) -> float:
    """Fraction of HG10 power inside the slit |x| <= r after propagating ell

    T = erf(sqrt2 r/w) - 2^{3/2} r exp(-2 r^2/w^2) / (sqrt(pi) w)
    """
    if ell < 0:
        raise DomainError(f"propagation distance must be non-negative, got {ell}")
    w = beam_width(g, ell)
    s = math.sqrt(2) * a.r / w
    value = erf(s) - 2 * s * math.exp(-s ** 2) / math.sqrt(math.pi)
    return _clamp(value, ell)


def transmissivity_numeric(g: BeamGeometry, a: Aperture, ell: float,
                           q: Quadrature = DEFAULT_QUADRATURE) -> float:
    """Quadrature of |u_1(x, ell)|^2 over [-r, r]; the oracle for transmissivity_closed"""
    if ell < 0:
        raise DomainError(f"propagation distance must be non-negative, got {ell}")
    value = integrate(lambda x: float(np.abs(hg_amplitude_1d(g, 1, x, ell)) ** 2), -a.r, a.r, q)
    return _clamp(value, ell)


def rayleigh_limit(g: BeamGeometry, ell: float) -> float:
    """d_rayleigh = lambda ell / w0"""
    if ell <= 0:
        raise DomainError(f"Rayleigh limit needs ell > 0, got {ell}")
    return g.wavelength * ell / g.w0


def legs_for(g: BeamGeometry, aperture: Aperture, ell_plus: float, ell_minus: float) -> Tuple[ChannelLeg, ChannelLeg]:
    """(A+, A-) legs evaluated independently"""
    return ChannelLeg.build(g, aperture, ell_plus), ChannelLeg.build(g, aperture, ell_minus)

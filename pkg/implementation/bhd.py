# Balanced homodyne estimation core for the Homodyne Super-Resolution Simulator
#
# Fisher information, the standard quantum limit, loss-degraded homodyne
# moments, SNR and the d_min family with both centroid-misalignment variants.

import math
import logging
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from implementation.beam import BeamGeometry
from implementation.channel import Aperture, ChannelLeg, rayleigh_limit
from implementation.exceptions import ContractError, DomainError, TruncationDomainError

logger = logging.getLogger(__name__)

Legs = Tuple[ChannelLeg, ChannelLeg]

# Phases closer than this are treated as locked to the LO
_PHASE_TOL = 1e-12


class SourcePair(BaseModel):
    """The two emitters A+ and A- and their separation"""
    model_config = ConfigDict(frozen=True)

    n_plus: float = Field(ge=0, description="Photons captured from A+")
    n_minus: float = Field(ge=0, description="Photons captured from A-")
    ell_plus: float = Field(gt=0, description="A+ propagation distance [m]")
    ell_minus: float = Field(gt=0, description="A- propagation distance [m]")
    phi_plus: float = 0.0
    phi_minus: float = 0.0
    d: float = Field(default=0.0, ge=0, description="Half separation [m]")
    theta_d: float = 0.0

    @property
    def mean_distance(self) -> float:
        return 0.5 * (self.ell_plus + self.ell_minus)


class Receiver(BaseModel):
    model_config = ConfigDict(frozen=True)

    aperture: Aperture
    eta: float = Field(gt=0, le=1, description="Photodetection efficiency")
    n_lo: float = Field(gt=0, description="Local oscillator photon number")
    phi_lo: float = 0.0
    field_norm: float = Field(default=1.0, gt=0, description="Field normalisation E")


class MisalignmentModel(BaseModel):
    """Receiver pointing error: none, Gaussian jitter sigma_d, or a fixed offset delta_x"""
    model_config = ConfigDict(frozen=True)

    variant: Literal["none", "fluctuating", "fixed"] = "none"
    sigma_d: float = Field(default=0.0, ge=0)
    delta_x: float = 0.0

    @model_validator(mode="after")
    def _check_variant_fields(self):
        if self.variant != "fluctuating" and self.sigma_d != 0:
            raise ValueError("sigma_d only applies to the fluctuating variant")
        if self.variant != "fixed" and self.delta_x != 0:
            raise ValueError("delta_x only applies to the fixed variant")
        return self

    @classmethod
    def none(cls) -> "MisalignmentModel":
        return cls()

    @classmethod
    def fluctuating(cls, sigma_d: float) -> "MisalignmentModel":
        return cls(variant="fluctuating", sigma_d=sigma_d)

    @classmethod
    def fixed(cls, delta_x: float) -> "MisalignmentModel":
        return cls(variant="fixed", delta_x=delta_x)

    def describe(self) -> str:
        if self.variant == "fluctuating":
            return f"fluct:{self.sigma_d!r}"
        if self.variant == "fixed":
            return f"fixed:{self.delta_x!r}"
        return "none"


class MeasurementStats(BaseModel):
    """Homodyne mean (E^2 units), variance (E^4 units) and their SNR"""
    model_config = ConfigDict(frozen=True)

    mean: float
    variance: float = Field(gt=0)
    snr: float

    @classmethod
    def from_moments(cls, mean: float, variance: float) -> "MeasurementStats":
        return cls(mean=mean, variance=variance, snr=mean / math.sqrt(variance))


class SuperResolutionCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    resolved: bool
    margin: float
    d_min: float
    d_rayleigh: float
    variant: str


def _amplitude_sum(legs: Legs, p: SourcePair) -> float:
    """sqrt(T+ N+) + sqrt(T- N-)"""
    plus, minus = legs
    return math.sqrt(plus.T * p.n_plus) + math.sqrt(minus.T * p.n_minus)


def _effective_photons(legs: Legs, p: SourcePair) -> float:
    """T+ N+ + T- N-"""
    plus, minus = legs
    return plus.T * p.n_plus + minus.T * p.n_minus


def _loss_factor(rx: Receiver, legs: Legs) -> float:
    """1 + sqrt(eta(1-eta)) (sqrt(1-T+) + sqrt(1-T-))"""
    plus, minus = legs
    return 1 + math.sqrt(rx.eta * (1 - rx.eta)) * (math.sqrt(1 - plus.T) + math.sqrt(1 - minus.T))


def _jitter_offset_ratio(p: SourcePair, rx: Receiver, legs: Legs) -> float:
    """sqrt(T+N+ + T-N-) / (2 sqrt(N_lo) (sqrt(T+N+) + sqrt(T-N-)))"""
    total = _amplitude_sum(legs, p)
    if total <= 0:
        raise DomainError("no effective photons reach the receiver (T+N+ + T-N- = 0)")
    return math.sqrt(_effective_photons(legs, p)) / (2 * math.sqrt(rx.n_lo) * total)


def path_phase(g: BeamGeometry, ell: float) -> float:
    """2 pi ell / lambda reduced into [0, 2 pi)"""
    return 2 * math.pi * math.fmod(ell / g.wavelength, 1.0)


def fisher_information(p: SourcePair, g: BeamGeometry) -> float:
    """Fisher information of the HG10 homodyne record about d [m^-2], literal expression"""
    minus = math.sqrt(p.n_minus) * math.cos(p.phi_minus + path_phase(g, p.ell_minus))
    plus = math.sqrt(p.n_plus) * math.cos(p.phi_plus + path_phase(g, p.ell_plus))
    return 2 / g.w0 ** 2 * (minus - plus) ** 2


def fisher_information_max(p: SourcePair, g: BeamGeometry) -> float:
    """Fisher information maximised over the path phases: (2/w0^2)(sqrt N+ + sqrt N-)^2"""
    return 2 / g.w0 ** 2 * (math.sqrt(p.n_plus) + math.sqrt(p.n_minus)) ** 2


def optimal_path_offset(g: BeamGeometry, j: int = 1) -> float:
    """Path difference |ell+ - ell-| = j lambda / 2 (odd j) that puts the two cosines at opposite extremes"""
    if j < 1 or j % 2 == 0:
        raise DomainError(f"j must be a positive odd integer, got {j}")
    return j * g.wavelength / 2


def d_sql(p: SourcePair, g: BeamGeometry) -> float:
    """Standard quantum limit w0 / (sqrt2 (sqrt N+ + sqrt N-))"""
    if p.n_plus + p.n_minus <= 0:
        raise DomainError("the standard quantum limit needs N+ + N- > 0")
    return g.w0 / (math.sqrt(2) * (math.sqrt(p.n_plus) + math.sqrt(p.n_minus)))


def _check_phase_lock(p: SourcePair, rx: Receiver):
    if abs(p.phi_plus - rx.phi_lo) > _PHASE_TOL or abs(p.phi_minus - rx.phi_lo) > _PHASE_TOL:
        raise ContractError(
            f"closed-form homodyne mean assumes phi+ = phi- = phi_lo "
            f"(got {p.phi_plus}, {p.phi_minus}, {rx.phi_lo}); use the Monte Carlo path "
            f"(implementation.mcsim.validate) for unlocked phases"
        )


def _mean_for(separation: float, p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs) -> float:
    return (2 * rx.field_norm ** 2 * math.sqrt(rx.eta * rx.n_lo) * separation / g.w0
            * _amplitude_sum(legs, p))


def mean_output(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs) -> float:
    """<J> = 2 E^2 sqrt(eta N_lo) (d/w0) (sqrt(T+N+) + sqrt(T-N-))

    Raises:
        ContractError: if the source phases are not locked to the LO
    """
    _check_phase_lock(p, rx)
    return _mean_for(p.d, p, g, rx, legs)


def variance_output(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs) -> float:
    """<dJ^2> at d = 0: 2 E^4 N_lo (1 + sqrt(eta(1-eta)) (sqrt(1-T+) + sqrt(1-T-)))"""
    return 2 * rx.field_norm ** 4 * rx.n_lo * _loss_factor(rx, legs)


def stats_aligned(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs) -> MeasurementStats:
    return MeasurementStats.from_moments(mean_output(p, g, rx, legs), variance_output(p, g, rx, legs))


def snr(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs, d: Optional[float] = None) -> float:
    """S = <J> / sqrt(<dJ^2>); the field normalisation cancels"""
    if d is not None:
        p = p.model_copy(update={"d": d})
    return mean_output(p, g, rx, legs) / math.sqrt(variance_output(p, g, rx, legs))


def d_min(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs) -> float:
    """Separation at which the SNR reaches 1

    Raises:
        DomainError: if no photons reach the detector
    """
    if _effective_photons(legs, p) <= 0:
        raise DomainError("d_min needs T+N+ + T-N- > 0")
    return (g.w0 * math.sqrt(_loss_factor(rx, legs))
            / (math.sqrt(2 * rx.eta) * _amplitude_sum(legs, p)))


def stats_fluctuating(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs,
                      sigma_d: float, d_bar: float) -> MeasurementStats:
    """Moments when the separation is D ~ N(d_bar, sigma_d^2)"""
    if sigma_d < 0:
        raise DomainError(f"sigma_d must be non-negative, got {sigma_d}")
    _check_phase_lock(p, rx)
    mean = _mean_for(d_bar, p, g, rx, legs)
    variance = (variance_output(p, g, rx, legs)
                + rx.field_norm ** 4 * rx.eta * sigma_d ** 2 / g.w0 ** 2 * _effective_photons(legs, p))
    return MeasurementStats.from_moments(mean, variance)


def d_min_fluctuating(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs, sigma_d: float) -> float:
    if sigma_d < 0:
        raise DomainError(f"sigma_d must be non-negative, got {sigma_d}")
    return d_min(p, g, rx, legs) + sigma_d * _jitter_offset_ratio(p, rx, legs)


def _check_fixed_truncation(p: SourcePair, g: BeamGeometry, delta_x: float):
    if abs(p.d - delta_x) >= g.w0:
        raise TruncationDomainError(
            f"fixed misalignment needs |d - delta_x| < w0, got d={p.d} m, delta_x={delta_x} m, w0={g.w0} m"
        )


def stats_fixed(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs, delta_x: float) -> MeasurementStats:
    """Moments with a constant centroid offset delta_x; the mean follows d - delta_x"""
    _check_fixed_truncation(p, g, delta_x)
    _check_phase_lock(p, rx)
    mean = _mean_for(p.d - delta_x, p, g, rx, legs)
    variance = (variance_output(p, g, rx, legs)
                + rx.field_norm ** 4 * rx.eta * delta_x ** 2 / g.w0 ** 2 * _effective_photons(legs, p))
    return MeasurementStats.from_moments(mean, variance)


def d_min_fixed(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs, delta_x: float) -> float:
    """d_min under a constant centroid offset; only the offset's magnitude counts"""
    _check_fixed_truncation(p, g, delta_x)
    return d_min(p, g, rx, legs) + abs(delta_x) * (_jitter_offset_ratio(p, rx, legs) + 1)


def d_min_for(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs, mis: MisalignmentModel) -> float:
    """d_min variant selected by the misalignment model"""
    if mis.variant == "fluctuating":
        return d_min_fluctuating(p, g, rx, legs, mis.sigma_d)
    if mis.variant == "fixed":
        return d_min_fixed(p, g, rx, legs, mis.delta_x)
    return d_min(p, g, rx, legs)


def super_resolution_check(p: SourcePair, g: BeamGeometry, rx: Receiver, legs: Legs,
                           mis: MisalignmentModel) -> SuperResolutionCheck:
    """Compare the misalignment-aware d_min with d_rayleigh at the mean distance"""
    dmin = d_min_for(p, g, rx, legs, mis)
    d_rayleigh = rayleigh_limit(g, p.mean_distance)
    margin = d_rayleigh - dmin
    return SuperResolutionCheck(
        resolved=margin > 0,
        margin=margin,
        d_min=dmin,
        d_rayleigh=d_rayleigh,
        variant=mis.variant,
    )

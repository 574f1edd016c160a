# Monte Carlo homodyne oracle for the Homodyne Super-Resolution Simulator
#
# Draws homodyne outcomes straight from the linearised two-source BHD output
# operator in phase space (hbar = 2) and compares their sample moments with
# the closed forms in implementation.bhd. The shot simulator only shares the
# operator weights and the mode-decomposition coefficients with the analytic
# path; it never calls the closed-form moments.

import math
import logging
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from implementation import bhd, settings
from implementation.beam import BeamGeometry, decompose_displacement
from implementation.bhd import MisalignmentModel, Receiver, SourcePair
from implementation.channel import ChannelLeg
from implementation.exceptions import DomainError, TruncationDomainError
from implementation.numerics import RngStream

logger = logging.getLogger(__name__)

# Below this LO photon number the linearised homodyne model is questionable
_STRONG_LO = 100.0


class McScenario(BaseModel):
    """Everything a shot needs: sources, optics, receiver, channel legs, misalignment"""
    model_config = ConfigDict(frozen=True)

    pair: SourcePair
    geometry: BeamGeometry
    receiver: Receiver
    legs: Tuple[ChannelLeg, ChannelLeg]
    misalignment: MisalignmentModel = MisalignmentModel()


class ShotPlan(BaseModel):
    """How many shots to draw, from which seed, under which noise model

    loss_model:
        lumped       one vacuum mode per source weighted sqrt(eta(1-T)) + sqrt(1-eta)
        independent  separate channel and detector vacua
    jitter_model:
        residual     the LO-amplified term follows d_bar; each source's residual
                     D - d_bar reaches the record without LO gain
        amplified    one D per shot inside the LO-amplified amplitude
    detector:
        quadrature   Gaussian quadrature samples per bosonic mode
        poisson      photon counts at the two ports of each balanced pair
    phase_convention:
        optimal      half-wave path offset; both sources add in the HG10 quadrature
        literal      path phases 2 pi ell / lambda from the configured distances
    """
    model_config = ConfigDict(frozen=True)

    shots: int = Field(ge=1)
    seed: int = Field(default=settings.DEFAULT_SEED, ge=0, lt=2 ** 64)
    jitter: Optional[float] = Field(default=None, ge=0)
    batches: int = Field(default=1, ge=1)
    loss_model: Literal["lumped", "independent"] = "lumped"
    jitter_model: Literal["residual", "amplified"] = "residual"
    detector: Literal["quadrature", "poisson"] = "quadrature"
    phase_convention: Literal["optimal", "literal"] = "optimal"
    variance_scale: float = Field(default=1.0, gt=0)

    def options(self) -> Dict[str, str]:
        return {
            "loss_model": self.loss_model,
            "jitter_model": self.jitter_model,
            "detector": self.detector,
            "phase_convention": self.phase_convention,
        }


class McReport(BaseModel):
    shots: int
    seed: int
    sample_mean: float
    sample_variance: float
    analytic_mean: float
    analytic_variance: float
    mean_z_score: float
    variance_z_score: float
    sigma_d: float = 0.0
    options: Dict[str, str] = Field(default_factory=dict)
    warnings: List[str] = Field(default_factory=list)
    error: Optional[str] = None

    def passed(self, threshold: float = settings.Z_SCORE_THRESHOLD) -> bool:
        if self.error is not None:
            return False
        return abs(self.mean_z_score) <= threshold and abs(self.variance_z_score) <= threshold


def _jitter_for(scenario: McScenario, plan: ShotPlan) -> float:
    if plan.jitter is not None:
        return plan.jitter
    if scenario.misalignment.variant == "fluctuating":
        return scenario.misalignment.sigma_d
    return 0.0


def _centroid_offset(scenario: McScenario) -> float:
    if scenario.misalignment.variant == "fixed":
        return scenario.misalignment.delta_x
    return 0.0


def _source_phase(scenario: McScenario, plan: ShotPlan, sign: int) -> float:
    """Source phase plus path phase for A+ (sign=+1) or A- (sign=-1)"""
    p = scenario.pair
    phi = p.phi_plus if sign > 0 else p.phi_minus
    if plan.phase_convention == "literal":
        ell = p.ell_plus if sign > 0 else p.ell_minus
        return phi + bhd.path_phase(scenario.geometry, ell)
    return phi + (math.pi if sign > 0 else 0.0)


def _hg10_slope(g: BeamGeometry, theta_d: float, sign: int) -> float:
    """d c10 / d(separation); the first-order coefficient is linear in the displacement"""
    return decompose_displacement(g, 0.5 * g.w0, theta_d, sign).c10 / (0.5 * g.w0)


def _hg10_coefficient(g: BeamGeometry, separation, theta_d: float, sign: int):
    """HG10 coefficient for a scalar or per-shot array of separations

    Raises:
        TruncationDomainError: if any separation reaches w0
    """
    separation = np.asarray(separation, dtype=float)
    if np.any(np.abs(separation) >= g.w0):
        raise TruncationDomainError(f"displacement reached |d| >= w0 = {g.w0} m inside the shot plan")
    return _hg10_slope(g, theta_d, sign) * separation


def simulate_shots(scenario: McScenario, stream: RngStream, m: int, plan: Optional[ShotPlan] = None) -> np.ndarray:
    """Draw m outcomes of J = J+ + J- (E^2 units)

    Args:
        scenario: Sources, optics, receiver and legs
        stream: Random stream owned by this call
        m: Number of shots
        plan: Noise-model options; defaults to the closed-form noise models

    Returns:
        Array of m homodyne outcomes
    """
    plan = plan or ShotPlan(shots=m)
    p, g, rx = scenario.pair, scenario.geometry, scenario.receiver
    if rx.n_lo < _STRONG_LO:
        logger.warning(f"N_lo={rx.n_lo} is not a strong local oscillator; the linearised model may not hold")
    if plan.detector == "poisson" and plan.loss_model != "independent":
        raise DomainError("photon-counting detector needs loss_model='independent'")

    sigma_d = _jitter_for(scenario, plan)
    centre = p.d - _centroid_offset(scenario)
    lo_amplitude = math.sqrt(rx.n_lo)
    vacuum_std = math.sqrt(settings.VACUUM_VARIANCE)

    amplified_separation = centre
    if sigma_d > 0 and plan.jitter_model == "amplified":
        amplified_separation = centre + stream.gaussian_batch(0.0, sigma_d, m)

    total = np.zeros(m)
    for sign, leg, photons in ((1, scenario.legs[0], p.n_plus), (-1, scenario.legs[1], p.n_minus)):
        rotation = np.exp(1j * (_source_phase(scenario, plan, sign) - rx.phi_lo))
        alpha = _hg10_coefficient(g, amplified_separation, p.theta_d, sign) * math.sqrt(photons) * rotation
        signal_weight = math.sqrt(rx.eta * leg.T)

        if plan.detector == "poisson":
            gamma = signal_weight * alpha
            bright = stream.poisson_batch(0.5 * np.abs(lo_amplitude + gamma) ** 2, m)
            dark = stream.poisson_batch(0.5 * np.abs(lo_amplitude - gamma) ** 2, m)
            total += (bright - dark).astype(float)
        else:
            signal = stream.gaussian_batch(2 * np.real(alpha), vacuum_std, m)
            channel_port = math.sqrt(rx.eta * (1 - leg.T))
            detector_port = math.sqrt(1 - rx.eta)
            if plan.loss_model == "lumped":
                vacuum = (channel_port + detector_port) * stream.gaussian_batch(0.0, vacuum_std, m)
            else:
                vacuum = (channel_port * stream.gaussian_batch(0.0, vacuum_std, m)
                          + detector_port * stream.gaussian_batch(0.0, vacuum_std, m))
            total += lo_amplitude * (signal_weight * signal + vacuum)

        if sigma_d > 0 and plan.jitter_model == "residual":
            # Only the slope acts on the residual D - d_bar
            residual = _hg10_slope(g, p.theta_d, sign) * stream.gaussian_batch(0.0, sigma_d, m)
            total += signal_weight * math.sqrt(photons) * residual

    return rx.field_norm ** 2 * total


def simulate_shot(scenario: McScenario, stream: RngStream, plan: Optional[ShotPlan] = None) -> float:
    """One homodyne outcome of J = J+ + J-"""
    return float(simulate_shots(scenario, stream, 1, plan)[0])


def _analytic_moments(scenario: McScenario, sigma_d: float) -> Tuple[float, float]:
    p, g, rx, legs = scenario.pair, scenario.geometry, scenario.receiver, scenario.legs
    if sigma_d > 0:
        # Jitter is centred on the same separation the shots use
        stats = bhd.stats_fluctuating(p, g, rx, legs, sigma_d, p.d - _centroid_offset(scenario))
    elif scenario.misalignment.variant == "fixed":
        stats = bhd.stats_fixed(p, g, rx, legs, scenario.misalignment.delta_x)
    else:
        stats = bhd.stats_aligned(p, g, rx, legs)
    return stats.mean, stats.variance


def validate(scenario: McScenario, plan: ShotPlan) -> McReport:
    """Run the shot plan and score the sample moments against the closed forms

    z-scores use the standard error of the mean sqrt(var/M) and of the
    variance sqrt(2/(M-1)) var, both taken from the analytic variance.
    """
    sigma_d = _jitter_for(scenario, plan)
    logger.info(f"Monte Carlo validation: {plan.shots} shots, seed={plan.seed}, sigma_d={sigma_d}, "
                f"misalignment={scenario.misalignment.describe()}, options={plan.options()}")

    streams = RngStream(plan.seed).spawn(plan.batches)
    sizes = [len(chunk) for chunk in np.array_split(np.arange(plan.shots), plan.batches)]
    samples = np.concatenate([
        simulate_shots(scenario, stream, size, plan) for stream, size in zip(streams, sizes) if size > 0
    ])

    analytic_mean, analytic_variance = _analytic_moments(scenario, sigma_d)
    analytic_variance *= plan.variance_scale

    warnings = []
    if plan.shots < settings.LOW_POWER_SHOTS:
        message = f"low statistical power: {plan.shots} shots (< {settings.LOW_POWER_SHOTS})"
        logger.warning(message)
        warnings.append(message)

    sample_mean = float(np.mean(samples))
    mean_z = (sample_mean - analytic_mean) / math.sqrt(analytic_variance / plan.shots)

    error = None
    if plan.shots < 2:
        error = "sample variance is undefined for a single shot"
        logger.error(error)
        sample_variance = math.nan
        variance_z = math.nan
    else:
        sample_variance = float(np.var(samples, ddof=1))
        variance_z = (sample_variance - analytic_variance) / (math.sqrt(2 / (plan.shots - 1)) * analytic_variance)

    report = McReport(
        shots=plan.shots,
        seed=plan.seed,
        sample_mean=sample_mean,
        sample_variance=sample_variance,
        analytic_mean=analytic_mean,
        analytic_variance=analytic_variance,
        mean_z_score=mean_z,
        variance_z_score=variance_z,
        sigma_d=sigma_d,
        options=plan.options(),
        warnings=warnings,
        error=error,
    )
    logger.info(f"Monte Carlo z-scores: mean={mean_z:.3f}, variance={variance_z:.3f}")
    return report

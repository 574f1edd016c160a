# Tests for the balanced homodyne estimation core

import math
import itertools

import pytest
from pydantic import ValidationError

from implementation import bhd
from implementation.beam import BeamGeometry
from implementation.bhd import MisalignmentModel, Receiver, SourcePair
from implementation.channel import Aperture, ChannelLeg, legs_for
from implementation.exceptions import ContractError, DomainError, TruncationDomainError

BASELINE = BeamGeometry(wavelength=600e-9, w0=0.1)
APERTURE = Aperture(r=0.2)
RECEIVER = Receiver(aperture=APERTURE, eta=0.9, n_lo=1e6)
LOSSLESS = (ChannelLeg.forced(ell=0.0, T=1.0), ChannelLeg.forced(ell=0.0, T=1.0))


def make_pair(photons=1e3, ell=1e5, d=1e-3, **kwargs):
    return SourcePair(n_plus=photons, n_minus=photons, ell_plus=ell, ell_minus=ell, d=d, **kwargs)


def baseline_legs(ell=1e5):
    return legs_for(BASELINE, APERTURE, ell, ell)


def test_mean_output_example():
    assert bhd.mean_output(make_pair(), BASELINE, RECEIVER, LOSSLESS) == pytest.approx(1200.0, rel=1e-12)


def test_mean_scales_with_field_norm():
    rx = RECEIVER.model_copy(update={"field_norm": 2.0})
    assert bhd.mean_output(make_pair(), BASELINE, rx, LOSSLESS) == pytest.approx(4800.0, rel=1e-12)


def test_variance_example():
    legs = (ChannelLeg.forced(ell=1e5, T=0.6717), ChannelLeg.forced(ell=1e5, T=0.6717))
    expected = 2e6 * (1 + math.sqrt(0.09) * 2 * math.sqrt(1 - 0.6717))
    assert bhd.variance_output(make_pair(), BASELINE, RECEIVER, legs) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(2.68758e6, rel=1e-5)


def test_variance_is_shot_noise_without_loss():
    rx = RECEIVER.model_copy(update={"eta": 1.0})
    assert bhd.variance_output(make_pair(), BASELINE, rx, baseline_legs()) == pytest.approx(2e6)


def test_phase_lock_is_enforced():
    with pytest.raises(ContractError):
        bhd.mean_output(make_pair(phi_plus=0.3), BASELINE, RECEIVER, LOSSLESS)


def test_d_min_reproduces_sql():
    rx = Receiver(aperture=APERTURE, eta=1.0, n_lo=1e6)
    for photons, w0, ell in itertools.product((1.0, 1e2, 1e4), (0.01, 0.1, 1.0), (1e3, 1e5, 1e7)):
        g = BeamGeometry(wavelength=600e-9, w0=w0)
        p = make_pair(photons=photons, ell=ell)
        assert bhd.d_min(p, g, rx, LOSSLESS) == pytest.approx(bhd.d_sql(p, g), rel=1e-12)


def test_d_sql_value():
    assert bhd.d_sql(make_pair(photons=100), BASELINE) == pytest.approx(3.5355e-3, rel=1e-4)
    with pytest.raises(DomainError):
        bhd.d_sql(make_pair(photons=0), BASELINE)


def test_fisher_information_bounds_sql():
    p = make_pair(photons=100)
    assert 1 / math.sqrt(bhd.fisher_information_max(p, BASELINE)) == pytest.approx(bhd.d_sql(p, BASELINE), rel=1e-12)


def test_fisher_information_depends_on_path_difference():
    locked = SourcePair(n_plus=100, n_minus=100, ell_plus=1.0, ell_minus=1.0)
    assert bhd.fisher_information(locked, BASELINE) == 0.0

    offset = bhd.optimal_path_offset(BASELINE)
    assert offset == pytest.approx(300e-9)
    # ell_plus is a whole number of wavelengths, so A+ sits at a cosine extreme
    opposed = SourcePair(n_plus=100, n_minus=100, ell_plus=0.6, ell_minus=0.6 + offset)
    assert bhd.fisher_information(opposed, BASELINE) == pytest.approx(
        bhd.fisher_information_max(opposed, BASELINE), rel=1e-6)


def test_optimal_path_offset_needs_odd_j():
    assert bhd.optimal_path_offset(BASELINE, 3) == pytest.approx(900e-9)
    with pytest.raises(DomainError):
        bhd.optimal_path_offset(BASELINE, 2)


def test_d_min_baseline():
    legs = baseline_legs()
    value = bhd.d_min(make_pair(), BASELINE, RECEIVER, legs)
    assert value == pytest.approx(1.6669e-3, rel=1e-3)
    assert bhd.snr(make_pair(), BASELINE, RECEIVER, legs, d=value) == pytest.approx(1.0, rel=1e-12)


def test_d_min_needs_photons():
    with pytest.raises(DomainError):
        bhd.d_min(make_pair(photons=0), BASELINE, RECEIVER, baseline_legs())


def test_stats_aligned_snr():
    stats = bhd.stats_aligned(make_pair(), BASELINE, RECEIVER, LOSSLESS)
    assert stats.snr == pytest.approx(stats.mean / math.sqrt(stats.variance))


def test_fluctuating_reduces_to_aligned():
    legs = baseline_legs()
    p = make_pair()
    assert bhd.d_min_fluctuating(p, BASELINE, RECEIVER, legs, 0.0) == bhd.d_min(p, BASELINE, RECEIVER, legs)
    aligned = bhd.stats_aligned(p, BASELINE, RECEIVER, legs)
    jittered = bhd.stats_fluctuating(p, BASELINE, RECEIVER, legs, 0.0, p.d)
    assert jittered.variance == pytest.approx(aligned.variance)


def test_fluctuating_offset_for_equal_lossless_sources():
    p = make_pair()
    offset = bhd.d_min_fluctuating(p, BASELINE, RECEIVER, LOSSLESS, 1.0) - bhd.d_min(p, BASELINE, RECEIVER, LOSSLESS)
    assert offset == pytest.approx(1 / (2 * math.sqrt(2) * 1e3), rel=1e-9)


def test_fluctuating_variance_term():
    p = make_pair()
    base = bhd.variance_output(p, BASELINE, RECEIVER, LOSSLESS)
    stats = bhd.stats_fluctuating(p, BASELINE, RECEIVER, LOSSLESS, 0.01, p.d)
    assert stats.variance - base == pytest.approx(0.9 * 0.01 ** 2 / 0.1 ** 2 * 2e3, rel=1e-9)


def test_fluctuating_rejects_negative_sigma():
    with pytest.raises(DomainError):
        bhd.d_min_fluctuating(make_pair(), BASELINE, RECEIVER, LOSSLESS, -1.0)


def test_fixed_reduces_to_aligned():
    legs = baseline_legs()
    p = make_pair()
    assert bhd.d_min_fixed(p, BASELINE, RECEIVER, legs, 0.0) == pytest.approx(bhd.d_min(p, BASELINE, RECEIVER, legs))


def test_fixed_offset_shifts_mean():
    p = make_pair(d=0.01)
    stats = bhd.stats_fixed(p, BASELINE, RECEIVER, LOSSLESS, 0.01)
    assert stats.mean == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("ell", [1e3, 1e5])
def test_fixed_offset_direction_does_not_matter(ell):
    p = make_pair(photons=100, ell=ell)
    legs = baseline_legs(ell)
    right = bhd.d_min_fixed(p, BASELINE, RECEIVER, legs, 0.01)
    left = bhd.d_min_fixed(p, BASELINE, RECEIVER, legs, -0.01)
    assert left == pytest.approx(right, rel=1e-12)
    assert left > bhd.d_min(p, BASELINE, RECEIVER, legs)

    checks = [bhd.super_resolution_check(p, BASELINE, RECEIVER, legs, MisalignmentModel.fixed(x))
              for x in (0.01, -0.01)]
    assert checks[0].resolved == checks[1].resolved
    assert checks[0].margin == pytest.approx(checks[1].margin, rel=1e-12)


def test_fixed_truncation_domain():
    with pytest.raises(TruncationDomainError):
        bhd.d_min_fixed(make_pair(d=1e-3), BASELINE, RECEIVER, baseline_legs(), 0.2)


def test_fixed_offset_resolves_at_long_range_only():
    p_far = make_pair(photons=100, ell=1e5)
    far = bhd.super_resolution_check(p_far, BASELINE, RECEIVER, baseline_legs(1e5), MisalignmentModel.fixed(0.01))
    assert far.resolved
    assert far.d_min == pytest.approx(0.015275, rel=1e-3)

    p_near = make_pair(photons=100, ell=1e3)
    near = bhd.super_resolution_check(p_near, BASELINE, RECEIVER, baseline_legs(1e3), MisalignmentModel.fixed(0.01))
    assert not near.resolved
    assert near.margin < 0


def test_super_resolution_check_baseline():
    check = bhd.super_resolution_check(make_pair(), BASELINE, RECEIVER, baseline_legs(), MisalignmentModel.none())
    assert check.resolved
    assert check.d_rayleigh == pytest.approx(0.6)
    assert check.margin == pytest.approx(0.6 - check.d_min)
    assert check.variant == "none"


def test_check_uses_mean_distance():
    p = SourcePair(n_plus=1e3, n_minus=1e3, ell_plus=1e5, ell_minus=3e5, d=1e-3)
    legs = legs_for(BASELINE, APERTURE, 1e5, 3e5)
    check = bhd.super_resolution_check(p, BASELINE, RECEIVER, legs, MisalignmentModel.none())
    assert check.d_rayleigh == pytest.approx(600e-9 * 2e5 / 0.1)


def test_misalignment_model_fields_match_variant():
    assert MisalignmentModel.fluctuating(0.1).describe() == "fluct:0.1"
    assert MisalignmentModel.fixed(0.01).describe() == "fixed:0.01"
    with pytest.raises(ValidationError):
        MisalignmentModel(variant="none", sigma_d=0.1)
    with pytest.raises(ValidationError):
        MisalignmentModel(variant="fluctuating", sigma_d=0.1, delta_x=0.01)


def test_d_min_for_dispatches_on_variant():
    legs = baseline_legs()
    p = make_pair()
    assert bhd.d_min_for(p, BASELINE, RECEIVER, legs, MisalignmentModel.fluctuating(0.5)) == \
        bhd.d_min_fluctuating(p, BASELINE, RECEIVER, legs, 0.5)
    assert bhd.d_min_for(p, BASELINE, RECEIVER, legs, MisalignmentModel.fixed(0.01)) == \
        bhd.d_min_fixed(p, BASELINE, RECEIVER, legs, 0.01)


@pytest.mark.parametrize("ell", [1e4, 1e5, 1e6])
@pytest.mark.parametrize("x", [1e-4, 1e-3, 1e-2])
def test_fixed_offset_hurts_more_than_jitter(ell, x):
    p = make_pair(ell=ell)
    legs = baseline_legs(ell)
    aligned = bhd.d_min(p, BASELINE, RECEIVER, legs)
    jittered = bhd.d_min_fluctuating(p, BASELINE, RECEIVER, legs, x)
    offset = bhd.d_min_fixed(p, BASELINE, RECEIVER, legs, x)
    assert offset > jittered > aligned


@pytest.mark.parametrize("ell,resolved", [(1e5, True), (2e4, True), (1e3, False)])
def test_fixed_offset_threshold_in_distance(ell, resolved):
    p = make_pair(photons=100, ell=ell)
    check = bhd.super_resolution_check(p, BASELINE, RECEIVER, baseline_legs(ell), MisalignmentModel.fixed(0.01))
    assert check.resolved is resolved


def _forced_legs(T):
    return ChannelLeg.forced(ell=1e5, T=T), ChannelLeg.forced(ell=1e5, T=T)


def test_d_min_does_not_grow_with_efficiency_transmissivity_or_photons():
    etas = (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)
    transmissivities = (0.05, 0.3, 0.6717, 0.9, 1.0)
    photons = (1.0, 1e2, 1e4, 1e6)
    for T in transmissivities:
        values = [bhd.d_min(make_pair(), BASELINE, RECEIVER.model_copy(update={"eta": eta}), _forced_legs(T))
                  for eta in etas]
        assert all(a >= b for a, b in zip(values, values[1:])), T
    for eta in etas:
        rx = RECEIVER.model_copy(update={"eta": eta})
        values = [bhd.d_min(make_pair(), BASELINE, rx, _forced_legs(T)) for T in transmissivities]
        assert all(a >= b for a, b in zip(values, values[1:])), eta
        values = [bhd.d_min(make_pair(photons=n), BASELINE, rx, baseline_legs()) for n in photons]
        assert all(a >= b for a, b in zip(values, values[1:])), eta


@pytest.mark.parametrize("field_norm", [0.5, 3.0])
def test_results_do_not_depend_on_field_normalisation(field_norm):
    p, legs = make_pair(), baseline_legs()
    rx = RECEIVER.model_copy(update={"field_norm": field_norm})
    assert bhd.snr(p, BASELINE, rx, legs) == pytest.approx(bhd.snr(p, BASELINE, RECEIVER, legs), rel=1e-12)
    for mis in (MisalignmentModel.none(), MisalignmentModel.fluctuating(0.01), MisalignmentModel.fixed(0.01)):
        assert bhd.d_min_for(p, BASELINE, rx, legs, mis) == pytest.approx(
            bhd.d_min_for(p, BASELINE, RECEIVER, legs, mis), rel=1e-12)
    jitter = [bhd.stats_fluctuating(p, BASELINE, r, legs, 0.01, p.d).snr for r in (rx, RECEIVER)]
    assert jitter[0] == pytest.approx(jitter[1], rel=1e-12)
    offset = [bhd.stats_fixed(p, BASELINE, r, legs, 0.01).snr for r in (rx, RECEIVER)]
    assert offset[0] == pytest.approx(offset[1], rel=1e-12)


@pytest.mark.parametrize("phi", [0.4, -2.0])
def test_limits_do_not_depend_on_lo_phase(phi):
    legs = baseline_legs()
    rx = RECEIVER.model_copy(update={"phi_lo": phi})
    assert bhd.d_min(make_pair(), BASELINE, rx, legs) == bhd.d_min(make_pair(), BASELINE, RECEIVER, legs)
    locked = make_pair(phi_plus=phi, phi_minus=phi)
    assert bhd.d_sql(locked, BASELINE) == bhd.d_sql(make_pair(), BASELINE)
    assert bhd.snr(locked, BASELINE, rx, legs) == pytest.approx(bhd.snr(make_pair(), BASELINE, RECEIVER, legs))

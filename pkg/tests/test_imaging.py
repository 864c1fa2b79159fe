import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bec_backaction.condensate import GaussianProfile, column_density
from bec_backaction.imaging import (
    DARK_GROUND,
    PHASE_CONTRAST,
    ExpansionWarning,
    NoSignalError,
    kappa,
    mean_photon_number,
    phase_noise,
    plan_for_snr,
    render_image,
    rounded_kappa_estimate,
    sample_counts,
    signal_phase,
)
from bec_backaction.paraxial import ComplexField2D, grid_axis, plane_wave, thin_phase_mask
from bec_backaction.params import PhysicalParams, ValidationError, make_params

PANCAKE_ETA = 1 / (2 * math.pi * 1e4)  # a_x a_y = 1e4 lambda^2 with lambda = 1


def disk_object(phase, n=256, radius=16):
    x = grid_axis(n, 1.0)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    inside = xx**2 + yy**2 < radius**2
    return ComplexField2D(np.where(inside, np.exp(1j * phase), 1.0 + 0j), 1.0, 1.0), inside


# --- budget -------------------------------------------------------------------


def test_signal_phase_value(reduced):
    assert signal_phase(reduced, 2.0, 0.25) == pytest.approx(math.pi / 2, rel=1e-15)


def test_photon_number_reduced_units(reduced):
    # I = hbar c, omega0 = 2 pi c / lambda: n_bar = lambda**3 dt / 2
    assert mean_photon_number(reduced, 3.0) == pytest.approx(1.5, rel=1e-14)
    assert phase_noise(4.0) == 0.5


def test_photon_number_si():
    p = make_params(780e-9, 1e-20, 10.0)
    n_bar = mean_photon_number(p, 1e-6)
    assert n_bar == pytest.approx(math.pi * p.wavelength**2 * 10.0 * 1e-6 / (p.hbar * 2 * math.pi * p.c / p.wavelength))


def test_noise_requires_photons(reduced):
    with pytest.raises(ValidationError):
        phase_noise(0.0)
    with pytest.raises(ValidationError):
        mean_photon_number(reduced, 0.0)


def test_kappa_identity_random_tuples(rng):
    for _ in range(100):
        params = PhysicalParams(10 ** rng.uniform(-7, -5), 10 ** rng.uniform(-22, -18), 10 ** rng.uniform(-2, 3))
        eta = 10 ** rng.uniform(8, 12)
        rep = kappa(params, 10 ** rng.uniform(2, 7), eta, 10 ** rng.uniform(-6, -2))
        assert rep.kappa_from_snr == pytest.approx(rep.kappa, rel=1e-12)


def test_kappa_invariant_under_chi0_at_fixed_snr():
    params = make_params(780e-9, 2e-20, 5.0)
    eta = 1 / (2 * math.pi * (30e-6) ** 2)
    values = []
    for chi0 in (2e-20, 2e-19):
        p = params.replace(chi0=chi0)
        plan = plan_for_snr(p, 1e5, eta, 3.0)
        values.append(kappa(p, 1e5, eta, plan.duration).kappa)
    assert values[1] == pytest.approx(values[0], rel=1e-12)


@pytest.mark.parametrize("N, expected", [(1e6, 4 * math.pi**2 * 1e-4), (1e3, 4 * math.pi**2 * 1e2)])
def test_pancake_scenario(reduced, N, expected):
    plan = plan_for_snr(reduced, N, PANCAKE_ETA, 1.0)
    rep = kappa(reduced, N, PANCAKE_ETA, plan.duration)
    assert rep.snr == pytest.approx(1.0, rel=1e-12)
    assert rep.kappa == pytest.approx(expected, rel=1e-12)
    assert rep.kappa == pytest.approx(rounded_kappa_estimate(N), rel=0.7)


def test_pancake_scenario_ranges(reduced):
    def kap(N):
        return kappa(reduced, N, PANCAKE_ETA, plan_for_snr(reduced, N, PANCAKE_ETA, 1.0).duration)

    assert 3.0e-3 <= kap(1e6).kappa <= 1.5e-2
    small = kap(1e3)
    assert small.kappa > 1e3
    assert small.survival < 1e-100
    assert small.log_survival == -small.kappa


def test_plan_scalings(reduced):
    base = plan_for_snr(reduced, 1e6, PANCAKE_ETA, 1.0).duration
    assert plan_for_snr(reduced, 1e6, PANCAKE_ETA, 2.0).duration == pytest.approx(4 * base, rel=1e-14)
    k6 = kappa(reduced, 1e6, PANCAKE_ETA, base).kappa
    d5 = plan_for_snr(reduced, 1e5, PANCAKE_ETA, 1.0).duration
    assert kappa(reduced, 1e5, PANCAKE_ETA, d5).kappa == pytest.approx(100 * k6, rel=1e-12)


def test_plan_without_signal(reduced):
    with pytest.raises(NoSignalError):
        plan_for_snr(reduced, 0.0, PANCAKE_ETA, 1.0)
    with pytest.raises(NoSignalError):
        plan_for_snr(reduced.replace(intensity=0.0), 1e6, PANCAKE_ETA, 1.0)
    with pytest.raises(ValidationError):
        plan_for_snr(reduced, 1e6, PANCAKE_ETA, 0.0)


def test_expansion_warning(reduced):
    with pytest.warns(ExpansionWarning):
        signal_phase(reduced, 1e3, 1e-3, peak_density=1e-3)


# --- image formation ----------------------------------------------------------


def test_dark_ground_blocks_empty_beam():
    field = plane_wave(128, 128, 1.0, 1.0)
    img = render_image(field, DARK_GROUND)
    assert img.sum() < 1e-20 * field.norm2()


def test_dark_ground_disk_intensity():
    phi = 0.05
    field, inside = disk_object(phi)
    img = render_image(field, DARK_GROUND)
    f = inside.mean()
    # the filter subtracts the mean field: inside it leaves (1 - f)(exp(i phi) - 1)
    np.testing.assert_allclose(img[inside], (1 - f) ** 2 * (2 - 2 * math.cos(phi)), rtol=1e-10)
    assert img[inside].mean() == pytest.approx(2 - 2 * math.cos(phi), rel=0.05)


def test_phase_contrast_disk_intensity():
    phi = 0.02
    field, inside = disk_object(phi)
    img = render_image(field, PHASE_CONTRAST)
    f = inside.mean()
    mean_field = 1 + f * (np.exp(1j * phi) - 1)
    exact = abs(np.exp(1j * phi) + (1j - 1) * mean_field) ** 2
    np.testing.assert_allclose(img[inside], exact, rtol=1e-10)
    assert exact == pytest.approx(1 + 2 * phi * (1 - f), abs=2 * phi**2)
    outside = abs(1 + (1j - 1) * mean_field) ** 2
    np.testing.assert_allclose(img[~inside], outside, rtol=1e-10)


def test_dark_ground_power_balance(rng):
    vals = np.exp(1j * rng.uniform(0, 0.3, size=(64, 64)))
    field = ComplexField2D(vals, 1.0, 1.0)
    img = render_image(field, DARK_GROUND)
    assert img.sum() == pytest.approx(field.norm2() - 64 * 64 * abs(vals.mean()) ** 2, rel=1e-12)


def test_wider_block_removes_more(rng):
    field = ComplexField2D(np.exp(1j * rng.uniform(0, 0.3, size=(64, 64))), 1.0, 1.0)
    p0 = render_image(field, DARK_GROUND).sum()
    p2 = render_image(field, DARK_GROUND, dc_radius_bins=2).sum()
    assert p2 < p0


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(0, 2 * math.pi), mode=st.sampled_from([DARK_GROUND, PHASE_CONTRAST]))
def test_global_phase_invariance(alpha, mode):
    field, _ = disk_object(0.1, n=32, radius=5)
    shifted = field.copy_with(field.values * np.exp(1j * alpha))
    np.testing.assert_allclose(render_image(shifted, mode), render_image(field, mode), atol=1e-13)


def test_unknown_mode():
    with pytest.raises(ValidationError):
        render_image(plane_wave(8, 8, 1.0, 1.0), "bright")


def test_counts_seeded():
    img = np.full((32, 32), 2.0)
    a = sample_counts(img, 50.0, seed=7)
    np.testing.assert_array_equal(a, sample_counts(img, 50.0, seed=7))
    assert not np.array_equal(a, sample_counts(img, 50.0, seed=8))
    assert a.mean() == pytest.approx(100.0, rel=0.02)


def test_gaussian_mask_peak_equals_signal_phase(reduced):
    g = GaussianProfile((10.0, 10.0, 5.0))
    x = grid_axis(128, 0.5)
    eta = column_density(g, x, x)
    N = 300.0
    out = thin_phase_mask(plane_wave(128, 128, 0.5, 0.5), eta, N, reduced)
    assert np.angle(out.values).max() == pytest.approx(signal_phase(reduced, N, 1 / (2 * math.pi * 100)), rel=1e-12)

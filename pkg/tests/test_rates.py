import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bec_backaction.condensate import GaussianMixtureProfile, GaussianProfile, gaussian_grid
from bec_backaction.params import ValidationError, make_params, reduced_params
from bec_backaction.rates import (
    BackactionRates,
    ConsistencyError,
    ResolutionError,
    gamma_l_closed,
    gamma_l_contour_oracle,
    gamma_p,
    gamma_p_gaussian,
    oracle_error_bound,
    phase_diffusion_routes,
    rates,
    rates_record,
)


def oracle_args(params, tau_lambdas=1e3, eps_lambdas=1e-6):
    return tau_lambdas * params.wavelength / params.c, eps_lambdas * params.wavelength


# --- phase diffusion ----------------------------------------------------------


def test_gaussian_unit_geometry(reduced):
    assert gamma_p(GaussianProfile((1.0, 1.0, 1.0)), reduced) == pytest.approx(1 / 16, rel=1e-4)
    assert gamma_p_gaussian((1.0, 1.0, 1.0), reduced) == 1 / 16


def test_routes_agree_and_match_analytic(reduced):
    widths = (3.0, 1.5, 2.0)
    routes = phase_diffusion_routes(GaussianProfile(widths), reduced, n=128)
    expected = 1 / (16 * 3.0 * 1.5)
    assert routes.real_space == pytest.approx(expected, rel=1e-4)
    assert routes.k_space == pytest.approx(expected, rel=1e-4)
    assert routes.rel_diff < 1e-4


def test_gridded_profile_matches_analytic(reduced):
    grid = gaussian_grid((2.0, 2.0, 1.0), n=64, extent=6.0)
    assert gamma_p(grid, reduced) == pytest.approx(1 / (16 * 4.0), rel=1e-5)


def test_zero_intensity_gives_zero(reduced):
    dark = reduced.replace(intensity=0.0)
    assert gamma_p(GaussianProfile((1.0, 1.0, 1.0)), dark) == 0.0
    assert gamma_l_closed(dark) == 0.0


def test_coarse_grid_raises_resolution_error(reduced):
    with pytest.raises(ResolutionError, match="finer or wider"):
        gamma_p(GaussianProfile((1.0, 1.0, 1.0)), reduced, n=8, extent=8)


def test_ratio_law_random_geometries(reduced, rng):
    lam = reduced.wavelength
    for ax, ay in rng.uniform(1.0, 20.0, size=(10, 2)):
        r = rates(GaussianProfile((ax, ay, 1.0)), reduced)
        assert r.ratio == pytest.approx(lam**2 / ((2 * math.pi * ax) * (2 * math.pi * ay)), rel=1e-6)


def test_depletion_dominates_random_mixtures(reduced, rng):
    violations = 0
    for _ in range(50):
        k = rng.integers(1, 4)
        comps = tuple(
            GaussianProfile(tuple(rng.uniform(1.0, 5.0, size=3)), center=tuple(rng.uniform(-5, 5, size=3)))
            for _ in range(k)
        )
        mix = GaussianMixtureProfile(comps, tuple(rng.uniform(0.1, 1.0, size=k)))
        r = rates(mix, reduced, extent=14)
        violations += r.gamma_l < r.gamma_p
    assert violations == 0


def test_compact_limit_approaches_depletion(reduced):
    a_min = reduced.wavelength / (2 * math.pi)
    ratios = [gamma_p_gaussian((a, a, 1.0), reduced) / gamma_l_closed(reduced) for a in (4 * a_min, 2 * a_min, a_min)]
    assert ratios == sorted(ratios)
    assert ratios[-1] == pytest.approx(1.0, rel=1e-12)


def test_too_compact_profile_rejected(reduced):
    with pytest.raises(ConsistencyError):
        rates(GaussianProfile((0.05, 0.05, 0.05)), reduced)


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(1e-3, 1e3))
def test_linear_in_intensity(scale):
    base = reduced_params()
    hot = reduced_params(intensity_scale=scale)
    g = GaussianProfile((2.0, 3.0, 1.0))
    assert gamma_l_closed(hot) == pytest.approx(scale * gamma_l_closed(base), rel=1e-14)
    assert gamma_p(g, hot) == pytest.approx(scale * gamma_p(g, base), rel=1e-14)


# --- depletion ---------------------------------------------------------------


def test_gamma_l_closed_values(reduced):
    assert gamma_l_closed(reduced) == pytest.approx(math.pi**2 / 4, rel=1e-15)
    assert gamma_l_closed(reduced.replace(wavelength=2.0)) == pytest.approx(math.pi**2 / 32, rel=1e-15)
    assert gamma_l_closed(reduced_params(intensity_scale=2.0)) == pytest.approx(math.pi**2 / 2, rel=1e-15)


def test_gamma_l_si_units():
    p = make_params(780e-9, 1e-20, 10.0)
    s = p.chi0**2 * p.intensity / (p.hbar * p.c)
    assert gamma_l_closed(p) == pytest.approx(math.pi**2 / 4 * s / p.wavelength**3, rel=1e-15)


def test_oracle_matches_closed_form(reduced):
    tau0, eps = oracle_args(reduced)
    value = gamma_l_contour_oracle(reduced, tau0, eps)
    assert value == pytest.approx(gamma_l_closed(reduced), rel=1e-3)
    # the only deviation is the finite window
    assert abs(value / gamma_l_closed(reduced) - 1) == pytest.approx(oracle_error_bound(reduced, tau0, eps), rel=1e-4)


def test_oracle_tau0_and_epsilon_insensitive(reduced):
    tau0, eps = oracle_args(reduced)
    a = gamma_l_contour_oracle(reduced, tau0, eps)
    assert abs(gamma_l_contour_oracle(reduced, 2 * tau0, eps) / a - 1) < 1e-6
    assert abs(gamma_l_contour_oracle(reduced, tau0, 10 * eps) / a - 1) < 1e-5


def test_oracle_si_wavelength():
    p = make_params(589e-9, 3e-21, 100.0)
    tau0, eps = oracle_args(p)
    assert gamma_l_contour_oracle(p, tau0, eps) == pytest.approx(gamma_l_closed(p), rel=1e-3)


def test_oracle_domain_errors(reduced):
    with pytest.raises(ValidationError):
        gamma_l_contour_oracle(reduced, 5 / reduced.c, 1e-6)
    with pytest.raises(ValidationError):
        gamma_l_contour_oracle(reduced, 1e3 / reduced.c, 0.0)
    with pytest.raises(ValidationError):
        gamma_l_contour_oracle(reduced, 1e3 / reduced.c, -1e-6)


# --- assembled rates ---------------------------------------------------------


def test_backaction_rates_complex_parts():
    r = BackactionRates(0.1, 2.0, 0.3, -0.5)
    assert r.Gamma_P == complex(0.1, 0.3)
    assert r.depletion == complex(1.9, -0.8)
    assert r.scaled(2.0).Gamma_L == complex(4.0, -1.0)


def test_rates_record_is_plain_json(reduced):
    g = GaussianProfile((2.0, 2.0, 1.0))
    rec = rates_record(rates(g, reduced), reduced, g, eps=1e-6, oracle=2.4674)
    text = json.dumps(rec)
    assert json.loads(text)["gamma_l"] == pytest.approx(math.pi**2 / 4)
    assert isinstance(rec["gamma_p"], float)
    assert np.isfinite(rec["oracle_rel_deviation"])

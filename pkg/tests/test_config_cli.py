import csv
import json
import math

import numpy as np
import pytest
import yaml
from scipy import stats

from bec_backaction import gridio
from bec_backaction.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main
from bec_backaction.condensate import gaussian_grid
from bec_backaction.config import ConfigError, ScenarioConfig, load_config, parse_config

BASE = {
    "params": {"reduced": True},
    "profile": {"kind": "gaussian", "widths": [1.0, 1.0, 1.0]},
    "observation": {"atom_counts": [1e3, 1e4]},
    "evolution": {"n_max": 8, "t": 1.0, "dt": 1e-3, "n_records": 10,
                  "rates": {"gamma_p": 0.0, "gamma_l": 0.3}, "coherences": [[0, 1]]},
    "imaging": {"nx": 64, "ny": 64},
}


def write_config(tmp_path, data, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def merged(**sections):
    data = json.loads(json.dumps(BASE))
    for key, value in sections.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            data[key].update(value)
        else:
            data[key] = value
    return data


def run(tmp_path, command, data, out="out", *extra):
    cfg = write_config(tmp_path, data)
    code = main([command, "--config", str(cfg), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


# --- configuration --------------------------------------------------------------


def test_config_roundtrip():
    cfg = ScenarioConfig.from_dict(BASE)
    again = parse_config(cfg.dumps())
    assert again.to_dict() == cfg.to_dict()
    assert again.digest() == cfg.digest()


def test_defaults_resolve_oracle(reduced):
    cfg = ScenarioConfig.from_dict({"params": {"reduced": True}})
    tau0, eps = cfg.oracle.resolve(reduced)
    assert tau0 * reduced.c == pytest.approx(1e3)
    assert eps == pytest.approx(1e-6)


@pytest.mark.parametrize("patch, path", [
    ({"params": {"reduced": False, "wavelength": -1.0}}, "params.wavelength"),
    ({"profile": {"widths": [1.0, 0.0, 1.0]}}, "profile.widths[1]"),
    ({"oracle": {"epsilon": 0.0}}, "oracle.epsilon"),
    ({"evolution": {"n_max": 300}}, "evolution.n_max"),
    ({"imaging": {"nx": 100}}, "imaging.nx"),
    ({"bogus": 1}, "bogus"),
    ({"grid": {"nz": 4}}, "grid.nz"),
])
def test_validation_paths(patch, path):
    with pytest.raises(ConfigError) as info:
        ScenarioConfig.from_dict(merged(**patch))
    assert info.value.field == path


def test_grid_file_relative_to_config(tmp_path):
    gaussian_grid((1.0, 1.0, 1.0), n=32, extent=6.0).save(tmp_path / "cloud.pxd")
    path = write_config(tmp_path, merged(profile={"kind": "grid_file", "grid_file": "cloud.pxd"}))
    cfg = load_config(path)
    profile = cfg.profile.build(cfg.params.build(), tmp_path)
    assert profile.values.shape == (32, 32, 32)


def test_missing_grid_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write_config(tmp_path, merged(profile={"kind": "grid_file", "grid_file": "nope.pxd"})))


# --- exit codes ---------------------------------------------------------------------


def test_invalid_config_exit_code(tmp_path):
    code, _ = run(tmp_path, "rates", merged(oracle={"epsilon": 0.0}))
    assert code == EXIT_VALIDATION


def test_empty_atom_list_exit_code(tmp_path):
    code, _ = run(tmp_path, "estimate", merged(observation={"atom_counts": []}))
    assert code == EXIT_VALIDATION


def test_missing_config_file(tmp_path):
    assert main(["rates", "--config", str(tmp_path / "absent.yaml")]) == EXIT_VALIDATION


def test_bad_seed(tmp_path):
    code, _ = run(tmp_path, "rates", BASE, "out", "--seed", "-1")
    assert code == EXIT_VALIDATION


def test_coarse_grid_check_fails(tmp_path):
    code, out = run(tmp_path, "check", merged(grid={"nx": 8, "ny": 8, "extent": 8.0}))
    assert code == EXIT_NUMERICAL
    record = json.loads((out / "check.json").read_text())
    parseval = next(c for c in record["checks"] if c["name"] == "parseval")
    assert not parseval["passed"] and "too coarse" in parseval["detail"]
    assert all(c["passed"] for c in record["checks"] if c["name"] != "parseval")


def test_check_passes_by_default(tmp_path):
    code, out = run(tmp_path, "check", BASE)
    assert code == EXIT_OK
    assert json.loads((out / "check.json").read_text())["all_passed"]


def test_step_size_error_exit_code(tmp_path):
    code, _ = run(tmp_path, "evolve", merged(evolution={"dt": 1.0}))
    assert code == EXIT_NUMERICAL


# --- commands -----------------------------------------------------------------------


def test_rates_file(tmp_path):
    code, out = run(tmp_path, "rates", BASE)
    assert code == EXIT_OK
    rec = json.loads((out / "rates.json").read_text())
    assert rec["gamma_l"] == pytest.approx(math.pi**2 / 4, rel=1e-15)
    assert rec["gamma_p"] == pytest.approx(1 / 16, rel=1e-4)
    assert rec["oracle_rel_deviation"] < 1e-3
    assert rec["provenance"]["seed"] == 0


def test_estimate_pancake_geometry(tmp_path):
    data = merged(profile={"widths": [100.0, 100.0, 50.0]},
                  observation={"atom_counts": [1e3, 1e4, 1e5, 1e6], "snr_target": 1.0})
    code, out = run(tmp_path, "estimate", data, "out", "--threads", "3")
    assert code == EXIT_OK
    rows = read_csv(out / "estimate.csv")
    kappas = [float(r["kappa"]) for r in rows]
    expected = [4 * math.pi**2 * 1e8 / n**2 for n in (1e3, 1e4, 1e5, 1e6)]
    np.testing.assert_allclose(kappas, expected, rtol=1e-12)
    assert float(rows[0]["survival"]) == 0.0
    assert float(rows[0]["log_survival"]) == pytest.approx(-expected[0])


def test_evolve_binomial_and_coherence(tmp_path):
    data = merged(evolution={"initial": {"kind": "superposition", "levels": [0, 1]}, "coherences": [[0, 1]]})
    code, out = run(tmp_path, "evolve", data)
    assert code == EXIT_OK
    rows = read_csv(out / "evolve.csv")
    assert len(rows) == 11
    # pure loss at gamma = 0.3: |rho_01| = 0.5 exp(-gamma t)
    for r in rows:
        assert float(r["abs_rho_0_1"]) == pytest.approx(0.5 * math.exp(-0.3 * float(r["t"])), rel=1e-9)
        assert float(r["trace"]) == pytest.approx(1.0, abs=1e-12)

    code, out = run(tmp_path, "evolve", merged(evolution={"initial": {"kind": "fock", "n": 8}}), "fock")
    final = json.loads((out / "final_state.json").read_text())
    np.testing.assert_allclose(final["populations"], stats.binom.pmf(np.arange(9), 8, math.exp(-0.6)), atol=1e-6)


def test_evolve_without_rates_is_static(tmp_path):
    data = merged(evolution={"rates": {"gamma_p": 0.0, "gamma_l": 0.0}, "initial": {"kind": "coherent", "alpha": 1.5}})
    code, out = run(tmp_path, "evolve", data)
    assert code == EXIT_OK
    rows = read_csv(out / "evolve.csv")
    assert len({r["mean_n"] for r in rows}) == 1


def test_image_dark_ground_peak(tmp_path):
    # widths 1 in reduced units: peak phase = N / 2
    data = merged(profile={"atom_count": 0.1}, imaging={"nx": 256, "ny": 256, "extent": 16.0})
    code, out = run(tmp_path, "image", data)
    assert code == EXIT_OK
    summary = json.loads((out / "image.json").read_text())
    assert summary["peak_phase"] == pytest.approx(0.05, rel=1e-12)
    assert summary["peak_intensity"]["dark-ground"] == pytest.approx(0.05**2, rel=0.05)
    img, dx, dy = gridio.read_image(out / "dark_ground.pxi")
    assert img.shape == (256, 256) and dx == pytest.approx(0.125)


def test_image_counts_seeded(tmp_path):
    data = merged(imaging={"photons_per_pixel": 100.0})
    run(tmp_path, "image", data, "a", "--seed", "5")
    run(tmp_path, "image", data, "b", "--seed", "5")
    run(tmp_path, "image", data, "c", "--seed", "6")
    a = (tmp_path / "a" / "phase_contrast_counts.pxi").read_bytes()
    assert a == (tmp_path / "b" / "phase_contrast_counts.pxi").read_bytes()
    assert a != (tmp_path / "c" / "phase_contrast_counts.pxi").read_bytes()


@pytest.mark.parametrize("command", ["estimate", "evolve", "rates"])
def test_outputs_byte_identical(tmp_path, command):
    data = merged(observation={"atom_counts": [1e3, 1e5, 1e6]})
    run(tmp_path, command, data, "one", "--seed", "11", "--threads", "2")
    run(tmp_path, command, data, "two", "--seed", "11", "--threads", "2")
    names = sorted(p.name for p in (tmp_path / "one").iterdir())
    assert names
    for name in names:
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

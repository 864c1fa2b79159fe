"""Command-line front end.

    bec-backaction {rates,estimate,evolve,image,check} --config PATH [--out DIR] [--seed N] [--threads N]

Exit codes: 0 success, 1 validation error, 2 numerical failure.  Output
files are written atomically and contain no timestamps, so identical
configurations and seeds produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, checks, gridio, imaging, master
from .condensate import column_density, effective_eta, profile_digest
from .config import ScenarioConfig, load_config
from .paraxial import GridMismatchError, QuadratureError, SingularityError, grid_axis, plane_wave, thin_phase_mask
from .params import ValidationError
from .rates import BackactionRates, ConsistencyError, ResolutionError, gamma_l_contour_oracle, rates, rates_record

log = logging.getLogger("bec_backaction")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


class CheckFailed(ArithmeticError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating, int, np.integer)) else v for v in row])
    return buf.getvalue()


def provenance(cfg: ScenarioConfig, seed: int) -> dict:
    return {"artifact_version": __version__, "config_sha256": cfg.digest(), "seed": int(seed)}


def _base(cfg: ScenarioConfig) -> Path | None:
    return Path(cfg.base_dir) if cfg.base_dir else None


# --- commands -----------------------------------------------------------------


def cmd_rates(cfg: ScenarioConfig, out: Path, seed: int = 0, threads: int = 1) -> dict:
    params = cfg.params.build()
    profile = cfg.profile.build(params, _base(cfg))
    tau0, eps = cfg.oracle.resolve(params)
    ev = cfg.evolution
    res = rates(profile, params, (ev.im_gamma_p, ev.im_gamma_l), tau0=tau0, n=cfg.grid.nx, extent=cfg.grid.extent)
    oracle = gamma_l_contour_oracle(params, tau0, eps) if params.intensity > 0 else 0.0
    record = rates_record(res, params, profile, eps=eps, oracle=oracle)
    record["provenance"] = provenance(cfg, seed)
    gridio.atomic_write_text(out / "rates.json", _dumps(record))
    return record


def _estimate_row(params, eta, N, obs) -> dict:
    if obs.snr_target is not None:
        duration = imaging.plan_for_snr(params, N, eta, obs.snr_target, obs.mode).duration
    else:
        duration = obs.duration
    rep = imaging.kappa(params, N, eta, duration)
    return {
        "atom_count": N,
        "eta": eta,
        "duration": duration,
        "delta_phi": rep.delta_phi,
        "n_bar": rep.n_bar,
        "delta_phi_noise": rep.delta_phi_noise,
        "snr": rep.snr,
        "kappa": rep.kappa,
        "kappa_rounded_estimate": imaging.rounded_kappa_estimate(N),
        "survival": rep.survival,
        "log_survival": rep.log_survival,
    }


def cmd_estimate(cfg: ScenarioConfig, out: Path, seed: int = 0, threads: int = 1) -> dict:
    params = cfg.params.build()
    obs = cfg.observation
    if not obs.atom_counts:
        raise ValidationError("observation.atom_counts", "estimate needs a non-empty list of atom counts")
    profile = cfg.profile.build(params, _base(cfg))
    eta = effective_eta(profile)
    counts = [float(n) for n in obs.atom_counts]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(lambda N: _estimate_row(params, eta, N, obs), counts))
    header = list(rows[0])
    gridio.atomic_write_text(out / "estimate.csv", _csv_text(header, [[r[k] for k in header] for r in rows]))
    record = {"rows": rows, "provenance": provenance(cfg, seed), "snr_target": obs.snr_target,
              "profile_digest": profile_digest(profile)}
    gridio.atomic_write_text(out / "estimate.json", _dumps(record))
    return record


def _initial_state(spec: dict, n_max: int) -> master.CondensateState:
    kind = spec.get("kind", "fock")
    try:
        if kind == "fock":
            return master.CondensateState.fock(int(spec.get("n", 0)), n_max)
        if kind == "superposition":
            return master.CondensateState.superposition(list(spec["levels"]), n_max, spec.get("phases"))
        if kind == "coherent":
            alpha = complex(spec.get("alpha_re", spec.get("alpha", 0.0)), spec.get("alpha_im", 0.0))
            return master.CondensateState.coherent(alpha, n_max)
    except (KeyError, IndexError, TypeError) as exc:
        raise ValidationError("evolution.initial", str(exc)) from None
    raise ValidationError("evolution.initial.kind", f"unknown initial state {kind!r}")


def _evolution_rates(cfg: ScenarioConfig) -> BackactionRates:
    ev = cfg.evolution
    if ev.rates is not None:
        try:
            return BackactionRates(float(ev.rates["gamma_p"]), float(ev.rates["gamma_l"]), ev.im_gamma_p, ev.im_gamma_l)
        except KeyError as exc:
            raise ValidationError(f"evolution.rates.{exc.args[0]}", "missing") from None
    params = cfg.params.build()
    profile = cfg.profile.build(params, _base(cfg))
    return rates(profile, params, (ev.im_gamma_p, ev.im_gamma_l), n=cfg.grid.nx, extent=cfg.grid.extent)


def cmd_evolve(cfg: ScenarioConfig, out: Path, seed: int = 0, threads: int = 1) -> dict:
    ev = cfg.evolution
    state = _initial_state(ev.initial, ev.n_max)
    rts = _evolution_rates(cfg)
    times, snaps = master.evolve_series(state, rts, ev.t, ev.dt, n_records=ev.n_records)
    pairs = [(int(m), int(n)) for m, n in ev.coherences]
    for m, n in pairs:
        if not (0 <= m <= ev.n_max and 0 <= n <= ev.n_max):
            raise ValidationError("evolution.coherences", f"({m}, {n}) outside the Fock cutoff")
    header = ["t", "trace", "mean_n", "purity"] + [f"abs_rho_{m}_{n}" for m, n in pairs]
    rows = []
    for t, s in zip(times, snaps):
        rows.append([t, master.trace(s), master.mean_atom_number(s), master.purity(s)]
                    + [abs(s.rho[m, n]) for m, n in pairs])
    gridio.atomic_write_text(out / "evolve.csv", _csv_text(header, rows))
    final = snaps[-1]
    record = json.loads(final.to_json())
    record["populations"] = master.populations(final).tolist()
    record["rates"] = {"gamma_p": rts.gamma_p, "gamma_l": rts.gamma_l,
                       "im_gamma_p": rts.im_gamma_p, "im_gamma_l": rts.im_gamma_l}
    record["t"] = ev.t
    record["provenance"] = provenance(cfg, seed)
    gridio.atomic_write_text(out / "final_state.json", _dumps(record))
    return record


def cmd_image(cfg: ScenarioConfig, out: Path, seed: int = 0, threads: int = 1) -> dict:
    params = cfg.params.build()
    profile = cfg.profile.build(params, _base(cfg))
    im = cfg.imaging
    widths = cfg.profile.widths
    dx = 2 * im.extent * float(widths[0]) / im.nx
    dy = 2 * im.extent * float(widths[1]) / im.ny
    x, y = grid_axis(im.nx, dx), grid_axis(im.ny, dy)
    if hasattr(profile, "values"):
        eta_map = column_density(profile)
        if eta_map.shape != (im.nx, im.ny):
            raise GridMismatchError(f"grid profile transverse shape {eta_map.shape} != imaging grid {(im.nx, im.ny)}")
        dx, dy = profile.spacing[0], profile.spacing[1]
    else:
        eta_map = column_density(profile, x, y)
    field = thin_phase_mask(plane_wave(im.nx, im.ny, dx, dy), eta_map, profile.atom_count, params)
    phase = 0.5 * params.k0 * params.chi0 * profile.atom_count * eta_map
    gridio.write_image(out / "phase.pxi", phase, dx, dy)
    images = {}
    for mode in im.modes:
        img = imaging.render_image(field, mode, im.dc_radius_bins)
        images[mode] = img
        gridio.write_image(out / f"{mode.replace('-', '_')}.pxi", img, dx, dy)
        if im.photons_per_pixel is not None:
            counts = imaging.sample_counts(img, im.photons_per_pixel, seed)
            gridio.write_image(out / f"{mode.replace('-', '_')}_counts.pxi", counts.astype(float), dx, dy)
    cx = im.ny // 2
    header = ["x", "phase"] + [m.replace("-", "_") for m in im.modes]
    rows = [[x[i], phase[i, cx]] + [images[m][i, cx] for m in im.modes] for i in range(im.nx)]
    gridio.atomic_write_text(out / "line_profile.csv", _csv_text(header, rows))
    summary = {
        "peak_phase": float(phase.max()),
        "peak_intensity": {m: float(images[m].max()) for m in im.modes},
        "center_intensity": {m: float(images[m][im.nx // 2, im.ny // 2]) for m in im.modes},
        "provenance": provenance(cfg, seed),
    }
    gridio.atomic_write_text(out / "image.json", _dumps(summary))
    return summary


def cmd_check(cfg: ScenarioConfig, out: Path, seed: int = 0, threads: int = 1) -> dict:
    params = cfg.params.build()
    profile = cfg.profile.build(params, _base(cfg))
    tau0, eps = cfg.oracle.resolve(params)
    results = checks.run_all(params, profile, cfg.grid.nx, cfg.grid.extent, tau0, eps, seed)
    record = {
        "checks": [r.to_dict() for r in results],
        "all_passed": all(r.passed for r in results),
        "provenance": provenance(cfg, seed),
    }
    gridio.atomic_write_text(out / "check.json", _dumps(record))
    for r in results:
        log.info("%-20s %s  measured=%.3e tol=%.0e  %s", r.name, "PASS" if r.passed else "FAIL", r.measured,
                 r.tolerance, r.detail)
    if not record["all_passed"]:
        failed = ", ".join(r.name for r in results if not r.passed)
        raise CheckFailed(f"checks failed: {failed}")
    return record


COMMANDS = {
    "rates": cmd_rates,
    "estimate": cmd_estimate,
    "evolve": cmd_evolve,
    "image": cmd_image,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bec-backaction", description="Backaction of dispersive imaging on a BEC")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML scenario file")
        p.add_argument("--out", default=None, help="output directory (default: output_dir from the config)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        cfg = load_config(args.config)
        out = Path(args.out if args.out is not None else cfg.output_dir)
        if args.out is None and not out.is_absolute() and cfg.base_dir:
            out = Path(cfg.base_dir) / out
        COMMANDS[args.command](cfg, out, seed=args.seed, threads=args.threads)
    except (CheckFailed, ResolutionError, ConsistencyError, QuadratureError, SingularityError,
            master.StepSizeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, GridMismatchError, imaging.NoSignalError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

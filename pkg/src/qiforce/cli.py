"""Command-line front end.

    qiforce scan  [--config PATH] [--seed N] [--noise none|poisson] [--out DIR] [--aperture point|window]
    qiforce fit   FILE [FILE ...] [--A 300 --sigma 4 --delta 2] [--fit-visibility] [--weighting none|poisson]
    qiforce tomo  demo|invert [--counts FILE]
    qiforce synth [--config PATH] [--seed N] [--out DIR]

Exit codes: 0 success, 1 usage or config error, 2 data error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .apparatus import CoincidenceModelParams, model_mean_momentum, scan_positions, simulate_scan
from .config import ConfigError, RunConfig
from .fitting import Dataset, FitInput, FitInputError, chi_square_report, empirical_mean_momentum, fit
from .io import DataFileError, dump_json, read_scan_csv, read_tomo_counts, write_scan_csv, write_tomo_counts
from .numerics import RngStream
from .tomography import (
    MINIMAL_SETTINGS,
    PAULI_SETTINGS,
    TomographyInputError,
    fidelity_to_bell,
    linear_inversion,
    max_fidelity_to_bell,
    ml_project,
    purity,
    settings_from_labels,
    simulate_counts,
    werner_state,
)
from .wavefunction import DegenerateStateError

log = logging.getLogger("qiforce")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
TOMO_STREAM = 1000  # stream id for tomography counts, clear of the per-setting scan streams


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _scan_filename(theta2: float) -> str:
    return f"scan_theta2_{theta2:g}.csv".replace("-", "m")


def _load_config(args, **extra) -> RunConfig:
    return RunConfig.load(
        args.config,
        seed=args.seed,
        noise=getattr(args, "noise", None),
        output_dir=args.out,
        aperture=getattr(args, "aperture", None),
        **extra,
    )


def _write_manifest(cfg: RunConfig, out: Path) -> None:
    # where the files went is not part of what produced them
    manifest = {k: v for k, v in cfg.raw.items() if k != "output_dir"}
    manifest["version"] = __version__
    dump_json(manifest, out / "manifest.json")


def _run_scans(cfg: RunConfig, out: Path, noise: str) -> list[dict]:
    positions = scan_positions(cfg.x_min, cfg.x_max, cfg.step)
    summaries = []
    for k, t2 in enumerate(cfg.theta2):
        rng = RngStream(cfg.seed, k) if noise == "poisson" else None
        records = simulate_scan(
            positions,
            cfg.theta1,
            t2,
            cfg.params,
            cfg.lens1,
            aperture=cfg.slit if cfg.aperture == "window" else None,
            noise=rng,
            pinhole=cfg.pinhole if cfg.average_pinhole else None,
            relative_phase=cfg.relative_phase,
        )
        name = _scan_filename(t2)
        write_scan_csv(out / name, cfg.theta1, t2, records)
        try:
            model_mean = model_mean_momentum(cfg.theta1, t2, cfg.params, cfg.relative_phase)
        except DegenerateStateError:
            model_mean = None
        try:
            emp_mean = empirical_mean_momentum(records)
        except DegenerateStateError:
            emp_mean = None
        summaries.append(
            {
                "theta1_deg": cfg.theta1,
                "theta2_deg": t2,
                "file": name,
                "n_points": len(records),
                "empirical_mean_momentum": emp_mean,
                "model_mean_momentum": model_mean,
                "peak_model_rate": max(r.model_rate for r in records),
            }
        )
    return summaries


def cmd_scan(args) -> int:
    cfg = _load_config(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    settings = _run_scans(cfg, out, cfg.noise)
    summary = {
        "version": __version__,
        "noise": cfg.noise,
        "seed": cfg.seed,
        "aperture": cfg.aperture,
        "params": _params_dict(cfg.params),
        "settings": settings,
    }
    _write_manifest(cfg, out)
    sys.stdout.write(dump_json(summary, out / "summary.json"))
    return EXIT_OK


def _params_dict(p: CoincidenceModelParams) -> dict:
    return {"amplitude_A": p.amplitude_A, "sigma": p.sigma, "delta": p.delta, "visibility": p.visibility}


def cmd_fit(args) -> int:
    datasets: dict[tuple[float, float], list] = {}
    for path in args.files:
        for key, recs in read_scan_csv(path).items():
            datasets.setdefault(key, []).extend(recs)
    for recs in datasets.values():
        for r in recs:
            # blank counts mark noiseless model output; fit the model rate itself
            if r.observed_counts is None:
                r.observed_counts = r.model_rate
    data = FitInput([Dataset(t1, t2, recs) for (t1, t2), recs in sorted(datasets.items())])
    try:
        initial = CoincidenceModelParams(args.A, args.sigma, args.delta, args.visibility)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = fit(data, initial, fix_visibility=not args.fit_visibility, weighting=args.weighting)
    report = result.to_dict()
    report["chi_square"] = chi_square_report(data, result.params)
    report["n_points"] = sum(len(d.records) for d in data.datasets)
    report["settings"] = [[d.theta1, d.theta2] for d in data.datasets]
    report["weighting"] = args.weighting
    path = None
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = Path(args.out) / "fit.json"
    sys.stdout.write(dump_json(report, path))
    return EXIT_OK


def _tomo_report(raw, phi: float) -> dict:
    rho = ml_project(raw)
    m = np.asarray(rho)
    best, best_phase = max_fidelity_to_bell(rho)
    return {
        "rho_real": m.real.tolist(),
        "rho_imag": m.imag.tolist(),
        "basis": ["HH", "HV", "VH", "VV"],
        "purity": purity(rho),
        "fidelity_to_bell": fidelity_to_bell(rho, phi),
        "bell_phase": phi,
        "max_fidelity_to_bell": best,
        "best_bell_phase": best_phase,
        "eigenvalues": np.linalg.eigvalsh(m).tolist(),
        "raw_min_eigenvalue": float(raw.eigenvalues().min()),
    }


def cmd_tomo(args) -> int:
    cfg = _load_config(args)
    if args.mode == "invert":
        if not args.counts:
            raise UsageError("tomo invert needs --counts FILE")
        data = read_tomo_counts(args.counts)
        report = _tomo_report(linear_inversion(data), cfg.source.phi)
        report["source"] = str(args.counts)
    else:
        labels = PAULI_SETTINGS if cfg.tomo_settings == "pauli" else MINIMAL_SETTINGS
        noise = args.noise or "poisson"
        rng = RngStream(cfg.seed, TOMO_STREAM) if noise == "poisson" else None
        truth = werner_state(cfg.werner_v, cfg.source.phi)
        data = simulate_counts(truth, cfg.counts_per_setting, settings_from_labels(labels), rng)
        report = _tomo_report(linear_inversion(data), cfg.source.phi)
        report.update(
            {
                "werner_v": cfg.werner_v,
                "true_purity": purity(truth),
                "counts_per_setting": cfg.counts_per_setting,
                "noise": noise,
                "seed": cfg.seed,
            }
        )
    report["n_settings"] = len(data.settings)
    path = None
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = Path(args.out) / "tomo.json"
    sys.stdout.write(dump_json(report, path))
    return EXIT_OK


def cmd_synth(args) -> int:
    cfg = _load_config(args)
    noise = args.noise or "poisson"
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    settings = _run_scans(cfg, out, noise)
    labels = PAULI_SETTINGS if cfg.tomo_settings == "pauli" else MINIMAL_SETTINGS
    rng = RngStream(cfg.seed, TOMO_STREAM) if noise == "poisson" else None
    counts = simulate_counts(
        werner_state(cfg.werner_v, cfg.source.phi), cfg.counts_per_setting, settings_from_labels(labels), rng
    )
    write_tomo_counts(out / "tomo_counts.csv", counts)
    _write_manifest(cfg, out)
    listing = {
        "noise": noise,
        "seed": cfg.seed,
        "scan_files": [s["file"] for s in settings],
        "tomo_file": "tomo_counts.csv",
    }
    sys.stdout.write(dump_json(listing, out / "synth.json"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run config (see qiforce.config)")
    common.add_argument("--seed", type=int, help="noise seed (overrides config)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    common.add_argument("-v", "--verbose", action="store_true")
    noise = argparse.ArgumentParser(add_help=False)
    noise.add_argument("--noise", choices=["none", "poisson"])
    aperture = argparse.ArgumentParser(add_help=False)
    aperture.add_argument("--aperture", choices=["point", "window"])

    parser = _Parser(prog="qiforce", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("scan", parents=[common, noise, aperture], help="model coincidence scans")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("fit", parents=[common], help="fit (A, sigma, delta) to scan CSVs")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--A", type=float, default=300.0, help="initial amplitude (default 300)")
    p.add_argument("--sigma", type=float, default=4.0, help="initial sigma, hbar/mm (default 4)")
    p.add_argument("--delta", type=float, default=2.0, help="initial delta, hbar/mm (default 2)")
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--fit-visibility", action="store_true")
    p.add_argument("--weighting", choices=["none", "poisson"], default="none")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("tomo", parents=[common, noise], help="polarization tomography")
    p.add_argument("mode", choices=["demo", "invert"])
    p.add_argument("--counts", metavar="FILE", help="counts CSV with columns setting,counts")
    p.set_defaults(func=cmd_tomo)

    p = sub.add_parser("synth", parents=[common, noise, aperture], help="write noisy synthetic datasets")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"qiforce: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFileError, FitInputError, TomographyInputError, DegenerateStateError, OSError) as exc:
        print(f"qiforce: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface: predict, compare, optimize, fit-afterpulse.

Every command reads one run-configuration file, writes a CSV report (and a
figure next to it unless ``--no-plot``) and is deterministic for a fixed
seed.  Exit codes: 0 success, 1 a comparison found out-of-band observables,
2 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, load_run_config
from .datasets import (
    OBSERVABLE_COLUMNS,
    load_benchmark_rows,
    load_reference_config,
    row_config,
)
from .detector import AfterpulseFitError, fit_afterpulse
from .link import prediction_band
from .optimizer import OptimizationGrid, get_scenario, run_scenario
from .reporting import (
    figure_path,
    render_compare_figure,
    render_fit_figure,
    render_optimize_figure,
    render_predict_figure,
    write_csv,
)

USAGE_ERROR = 2
COMPARISON_FAILED = 1


class _CliError(Exception):
    """Fatal configuration or input problem; maps to exit code 2."""


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        run = load_reference_config()
    else:
        run = load_run_config(args.config)
    if args.seed is not None:
        run = replace(run, seed=args.seed)
    if args.max_photons is not None:
        if not 0 <= args.max_photons <= 3:
            raise _CliError("--max-photons must lie in 0..3 for the analytic model")
        run = replace(run, uncertain=replace(run.uncertain, max_photons=args.max_photons))
    return run


def _add_common(parser: argparse.ArgumentParser, default_out: str) -> None:
    parser.add_argument("--config", metavar="PATH", help="run configuration YAML (default: bundled reference)")
    parser.add_argument("--seed", type=int, help="override the configured random seed")
    parser.add_argument("--samples", type=int, default=1000, help="uncertainty samples (default 1000)")
    parser.add_argument("--max-photons", type=int, help="override the photon-number truncation")
    parser.add_argument("--out", metavar="PATH", default=default_out, help=f"output CSV (default {default_out})")
    parser.add_argument("--no-plot", action="store_true", help="skip rendering the figure next to the CSV")


def _cmd_predict(args: argparse.Namespace) -> int:
    run = _load_config(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        band = prediction_band(run.uncertain, n_samples=args.samples, seed=run.seed)
    rows = []
    for basis in ("z", "x"):
        gain_key, err_key = f"gain_{basis}", f"error_{basis}"
        rows.append(
            [
                basis,
                band.central[gain_key],
                band.central[err_key],
                band.low[gain_key],
                band.high[gain_key],
                band.low[err_key],
                band.high[err_key],
            ]
        )
    write_csv(
        args.out,
        ["basis", "gain", "error_rate", "gain_low", "gain_high", "error_low", "error_high"],
        rows,
    )
    if not args.no_plot:
        render_predict_figure(band, figure_path(args.out))
    print(f"wrote {args.out}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    run = _load_config(args)
    rows = load_benchmark_rows(args.dataset)
    bands = []
    report = []
    n_out = 0
    for row in rows:
        cfg = row_config(run.uncertain, row)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            band = prediction_band(cfg, n_samples=args.samples, seed=run.seed)
        bands.append(band)
        for _, key in OBSERVABLE_COLUMNS:
            measured, err = row.values[key], row.errors[key]
            in_band = band.contains(key, measured, widen=err)
            n_out += 0 if in_band else 1
            report.append(
                [
                    row.fiber,
                    row.loss_db,
                    row.mu,
                    key,
                    measured,
                    err,
                    band.central[key],
                    band.low[key],
                    band.high[key],
                    in_band,
                    row.note,
                ]
            )
    write_csv(
        args.out,
        [
            "fiber",
            "loss_db",
            "mu",
            "observable",
            "measured",
            "measured_err",
            "central",
            "band_low",
            "band_high",
            "in_band",
            "note",
        ],
        report,
    )
    if not args.no_plot:
        render_compare_figure(rows, bands, figure_path(args.out))
    total = len(report)
    print(f"in-band: {total - n_out}/{total} observables ({args.samples} samples, seed {run.seed})")
    print(f"wrote {args.out}")
    return 0 if n_out == 0 else COMPARISON_FAILED


def _grid_from_args(args: argparse.Namespace, run: RunConfig) -> OptimizationGrid:
    # Precedence: explicit flag, then the config file's grid section, then
    # the built-in defaults.
    base = run.grid if run.grid is not None else OptimizationGrid()
    overrides = {
        "decoy_min": args.decoy_min,
        "decoy_max": args.decoy_max,
        "signal_max": args.signal_max,
        "intensity_step": args.intensity_step,
        "distance_min_km": args.distance_min_km,
        "distance_max_km": args.distance_max_km,
        "distance_step_km": args.distance_step_km,
        "db_per_km": args.db_per_km,
        "error_correction_efficiency": args.error_correction_f,
    }
    return replace(base, **{key: value for key, value in overrides.items() if value is not None})


def _cmd_optimize(args: argparse.Namespace) -> int:
    run = _load_config(args)
    try:
        scenario = get_scenario(args.scenario)
    except KeyError as exc:
        raise _CliError(str(exc.args[0])) from exc
    try:
        grid = _grid_from_args(args, run)
    except ValueError as exc:
        raise _CliError(f"invalid grid: {exc}") from exc
    result = run_scenario(run.uncertain.central(), scenario, grid, mode=args.mode)
    write_csv(
        args.out,
        ["loss_db", "distance_km", "tau_s", "tau_d", "secret_key_rate", "raw_rate", "truncation_warning"],
        [
            [r.loss_db, r.distance_km, r.tau_s, r.tau_d, r.secret_rate, r.raw_rate, r.truncation_warning]
            for r in result.rows
        ],
    )
    if not args.no_plot:
        render_optimize_figure([result], figure_path(args.out))
    reach = result.max_positive_loss_db()
    reach_text = f"{reach:g} dB" if reach is not None else "none"
    print(f"mode={args.mode} scenario={args.scenario}: max positive-rate loss {reach_text}")
    print(f"wrote {args.out}")
    return 0


def _read_afterpulse_csv(path: str) -> list[tuple[float, float]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc}") from exc
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames is None or {"mu_avg", "p_afterpulse_bin"} - set(reader.fieldnames):
        raise _CliError(f"{path}: expected CSV columns mu_avg, p_afterpulse_bin")
    try:
        return [(float(r["mu_avg"]), float(r["p_afterpulse_bin"])) for r in reader]
    except (TypeError, ValueError) as exc:
        raise _CliError(f"{path}: malformed numeric value: {exc}") from exc


def _cmd_fit_afterpulse(args: argparse.Namespace) -> int:
    run = _load_config(args)
    detector = run.uncertain.detector
    points = _read_afterpulse_csv(args.data)
    if len(points) < 3:
        raise _CliError(f"{args.data}: need at least 3 rows to fit, got {len(points)}")
    try:
        fit = fit_afterpulse(
            points,
            eta_gate=detector.eta_gate,
            p_dark_bin=run.uncertain.p_dark_bin.central,
            k_dead=detector.k_dead,
        )
    except AfterpulseFitError as exc:
        print(f"fit failed: {exc} (residual rms {exc.residual_rms:.3e})", file=sys.stderr)
        return USAGE_ERROR
    write_csv(
        args.out,
        ["alpha", "p_geo", "bin_gate_ratio", "residual_rms", "n_points"],
        [[fit.alpha, fit.p_geo, fit.bin_gate_ratio, fit.residual_rms, fit.n_points]],
    )
    if not args.no_plot:
        render_fit_figure(points, fit, detector, figure_path(args.out))
    print(
        f"alpha={fit.alpha:.4e} p_geo={fit.p_geo:.4e} bin_gate_ratio={fit.bin_gate_ratio:.4e} "
        f"residual_rms={fit.residual_rms:.3e} ({fit.n_points} points)"
    )
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdiqkd",
        description="Predict, validate and optimize the performance of an MDI-QKD link "
        "from its characterized imperfections.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_predict = sub.add_parser("predict", help="gains and error rates with uncertainty bands")
    _add_common(p_predict, "predict.csv")
    p_predict.set_defaults(func=_cmd_predict)

    p_compare = sub.add_parser("compare", help="model bands versus a measured benchmark dataset")
    _add_common(p_compare, "compare.csv")
    p_compare.add_argument("--dataset", metavar="PATH", help="benchmark CSV (default: bundled observations)")
    p_compare.set_defaults(func=_cmd_compare)

    p_opt = sub.add_parser("optimize", help="exhaustive signal/decoy intensity optimization vs loss")
    _add_common(p_opt, "optimize.csv")
    p_opt.add_argument("--mode", choices=("bounds", "perfect"), default="bounds")
    p_opt.add_argument("--scenario", default="identity", help="component-improvement scenario name")
    # Grid flags override the config file's grid section (defaults:
    # intensities 0.01..0.98/1.0 step 0.01, distances 2..200 km step 2).
    p_opt.add_argument("--decoy-min", type=float)
    p_opt.add_argument("--decoy-max", type=float)
    p_opt.add_argument("--signal-max", type=float)
    p_opt.add_argument("--intensity-step", type=float)
    p_opt.add_argument("--distance-min-km", type=float)
    p_opt.add_argument("--distance-max-km", type=float)
    p_opt.add_argument("--distance-step-km", type=float)
    p_opt.add_argument("--db-per-km", type=float)
    p_opt.add_argument("--error-correction-f", type=float)
    p_opt.set_defaults(func=_cmd_optimize)

    p_fit = sub.add_parser("fit-afterpulse", help="fit afterpulse parameters to measured data")
    p_fit.add_argument("data", metavar="DATA.csv", help="CSV with columns mu_avg, p_afterpulse_bin")
    _add_common(p_fit, "afterpulse_fit.csv")
    p_fit.set_defaults(func=_cmd_fit_afterpulse)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (_CliError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())

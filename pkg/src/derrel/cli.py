"""Command-line entry point.

Exit codes: 0 success, 2 usage or validation error, 3 I/O error, 4 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import report
from .adoption import KIND_ORDER, Kind
from .config import ConfigError, RunConfig
from .indices import compare_example
from .loadpoint import LoadPointParams, synth_history
from .mcengine import run_adaptive
from .rbts import build_modified_rbts, load_profiles, run_sweep
from .residential import draw_component_ranges, simulate_residence_with
from .timeseries import HOURS_PER_YEAR, SeriesError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INTERNAL = 4

KIND_CODES = [k.value for k in KIND_ORDER]

logger = logging.getLogger("derrel")


def _load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    cfg = cfg.override("mc", seed=getattr(args, "seed", None), max_samples=getattr(args, "max_samples", None))
    cfg = cfg.override(
        "system",
        sample_customers=getattr(args, "customers", None),
        horizon_years=getattr(args, "horizon_years", None),
    )
    if getattr(args, "out", None):
        cfg = cfg.override("io", output_dir=args.out)
    return cfg


def _prepare_out(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_example(args) -> int:
    rep = compare_example()
    text = report.dumps(rep.to_dict())
    sys.stdout.write(text)
    if args.out:
        out = _prepare_out(args.out)
        (out / "example.json").write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load_config(args)
    spec = build_modified_rbts(cfg)
    scenario = spec.scenario(Kind.parse(args.pv), Kind.parse(args.es))
    out = _prepare_out(cfg.io.output_dir)
    result = run_adaptive(spec, scenario, cfg.mc.to_mc_config(), workers=args.workers)
    report.write_scenario_outputs(out, result, include_runtime=not args.reproducible)
    print(
        f"{scenario.code}: converged={result.converged} n={result.n_samples} "
        f"SAIFI={report.fmt(result.saifi_mean)} +/- {report.fmt(result.saifi_half)} f/yr  "
        f"SAIDI={report.fmt(result.saidi_mean)} +/- {report.fmt(result.saidi_half)} h/yr"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    spec = build_modified_rbts(cfg)
    out = _prepare_out(cfg.io.output_dir)
    sweep = run_sweep(spec, cfg.mc.to_mc_config(), workers=args.workers)
    report.write_matrix(out / "saifi_matrix.csv", sweep.matrix("saifi_mean"))
    report.write_matrix(out / "saidi_matrix.csv", sweep.matrix("saidi_mean"))
    report.write_matrix(out / "saifi_half_matrix.csv", sweep.matrix("saifi_half"))
    report.write_matrix(out / "saidi_half_matrix.csv", sweep.matrix("saidi_half"))
    report.write_matrix(out / "n_samples_matrix.csv", sweep.matrix("n_samples"))
    first = True
    for (xk, yk), res in sweep.cells.items():
        code = f"{xk.value}-{yk.value}"
        cell_dir = out / "cells" / code
        cell_dir.mkdir(parents=True, exist_ok=True)
        report.write_json(cell_dir / "summary.json", res.summary(include_runtime=not args.reproducible))
        report.write_histogram(cell_dir / "aif_hist.csv", res.aif_histogram)
        report.write_trace(out / "convergence.csv", res, scenario_code=code, append=not first)
        first = False
    report.write_json(
        out / "sweep.json",
        {
            "baseline": dict(zip(("saifi", "saidi"), (cfg.system.lambda_lp, cfg.system.u_lp))),
            "convergence_stats": sweep.convergence_stats(),
            "errors": {f"{x.value}-{y.value}": msg for (x, y), msg in sweep.errors.items()},
            "runtime_seconds": None if args.reproducible else sum(r.runtime_seconds for r in sweep.cells.values()),
        },
    )
    for i, xk in enumerate(KIND_ORDER):
        print(xk.value.ljust(3), " ".join(report.fmt(v).rjust(9) for v in sweep.matrix("saifi_mean")[i]))
    return EXIT_OK if not sweep.errors else EXIT_INTERNAL


def cmd_residence(args) -> int:
    cfg = _load_config(args)
    if args.years < 1:
        raise ConfigError("years must be at least 1")
    if not 0 <= args.x <= cfg.adoption.x_max:
        raise ConfigError(f"x must lie in [0, {cfg.adoption.x_max}]")
    if not 0 <= args.y <= cfg.adoption.y_max:
        raise ConfigError(f"y must lie in [0, {cfg.adoption.y_max}]")
    profiles = load_profiles(cfg)
    template = cfg.residential.template(cfg.system.peak_load_kw)
    if args.perfect_components:
        template = dataclasses.replace(template, pv_comp=(0.0, 1.0), es_comp=(0.0, 1.0))
    spec = template.with_adoption(args.x, args.y)
    dt = profiles.timestep_hours
    horizon_h = args.years * HOURS_PER_YEAR
    rng = np.random.default_rng(cfg.mc.seed)
    lp = LoadPointParams(cfg.system.lambda_lp, cfg.system.u_lp, 1)
    outage = synth_history(lp, horizon_h, rng, dt)
    pv_r, es_r = draw_component_ranges(spec, horizon_h, rng, dt)
    der = simulate_residence_with(spec, profiles, outage, pv_r, es_r)
    base = simulate_residence_with(spec.with_adoption(0.0, 0.0), profiles, outage, pv_r, es_r)
    payload = {
        "x": args.x,
        "y": args.y,
        "years": args.years,
        "aif": der.aif,
        "aid": der.aid,
        "aens": der.aens,
        "no_der": {"aif": base.aif, "aid": base.aid, "aens": base.aens},
        "loadpoint": {"events_per_year": outage.n_events / args.years, "downtime_per_year": outage.downtime_hours / args.years},
    }
    text = report.dumps(payload)
    sys.stdout.write(text)
    if args.out:
        (_prepare_out(args.out) / "residence.json").write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import run_benchmark

    run_benchmark(customers=args.customers, years=args.years, repeat=args.repeat)
    return EXIT_OK


def _common(p: argparse.ArgumentParser, mc: bool = True) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides io.output_dir)")
    p.add_argument("--seed", type=int, help="master seed (overrides mc.seed)")
    if mc:
        p.add_argument("--workers", type=int, default=1, help="worker processes; output is identical for any value")
        p.add_argument("--max-samples", type=int, dest="max_samples")
        p.add_argument("--customers", type=int, help="residences per system sample")
        p.add_argument("--horizon-years", type=int, dest="horizon_years")
        p.add_argument("--reproducible", action="store_true", help="omit wall-clock runtime so outputs are byte-stable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="derrel", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example", help="perceived vs experienced indices, two-load-point example")
    p.add_argument("--out")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("run", help="adaptive Monte Carlo for one adoption scenario")
    p.add_argument("--pv", required=True, type=str.upper, choices=KIND_CODES)
    p.add_argument("--es", required=True, type=str.upper, choices=KIND_CODES)
    _common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="all 16 joint adoption scenarios")
    _common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("residence", help="simulate a single residence")
    p.add_argument("--x", type=float, required=True, help="PV kW per kW of peak load")
    p.add_argument("--y", type=float, required=True, help="storage kWh per kW of peak load")
    p.add_argument("--years", type=int, default=1000)
    p.add_argument("--perfect-components", action="store_true", help="disable PV and storage failures")
    _common(p, mc=False)
    p.set_defaults(func=cmd_residence)

    p = sub.add_parser("bench", help="compare the compiled and numpy simulation kernels")
    p.add_argument("--customers", type=int, default=50)
    p.add_argument("--years", type=int, default=2)
    p.add_argument("--repeat", type=int, default=3)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, SeriesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # pragma: no cover - last-resort guard
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

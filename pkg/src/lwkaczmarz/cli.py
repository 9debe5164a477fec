"""Command line entry point: ``lwkaczmarz solve --config run.cfg --out results``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import PRESETS, ConfigError, parse_config, preset
from .experiment import ExperimentError, run_experiment
from .penalty import KINDS

log = logging.getLogger("lwkaczmarz")

SUMMARY_HEADER = "config,preset,status,n_delta,rel_error,delta,wall_time_s,out"


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lwkaczmarz",
                                     description="Landweber-Kaczmarz reconstructions with convex penalties")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    s = sub.add_parser("solve", help="run one or more experiments")
    s.add_argument("--config", nargs="+", default=[], metavar="PATH",
                   help="flat key = value config file(s); several run as a sweep")
    s.add_argument("--out", default=None, help="output directory (default: the config's 'out')")
    s.add_argument("--seed", type=_u64, default=None)
    s.add_argument("--preset", choices=PRESETS[:-1], default=None)
    s.add_argument("--penalty", choices=KINDS, default=None)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--grid", type=int, default=None)
    s.add_argument("--measurements", type=int, default=None)
    s.add_argument("--max-sweeps", type=int, default=None)
    s.add_argument("--jobs", type=int, default=1, help="parallel runs for several configs")
    s.add_argument("--no-figure", action="store_true", help="skip the PNG summary")
    return parser


def _specs(args):
    overrides = dict(seed=args.seed, preset=args.preset, penalty=args.penalty, beta=args.beta,
                     grid=args.grid, measurements=args.measurements, max_sweeps=args.max_sweeps)
    if not args.config:
        if args.preset is None:
            raise ConfigError("give --config or --preset")
        overrides.pop("preset")
        spec = preset(args.preset, **{k: v for k, v in overrides.items() if v is not None})
        return [("preset", spec)]
    return [(Path(p).stem, parse_config(p, **overrides)) for p in args.config]


def _out_dirs(args, specs):
    if len(specs) == 1:
        return [Path(args.out or specs[0][1].out)]
    # one subdirectory per config in a sweep
    return [Path(args.out or spec.out) / name for name, spec in specs]


def _run_one(job):
    name, spec, out, figure = job
    if figure:
        report = run_experiment(spec, out)
    else:
        from .experiment import write_outputs
        report = run_experiment(spec)
        write_outputs(report, out, figure=False)
    return (f"{name},{spec.preset},{report.status},{report.n_delta},{report.rel_error:.10g},"
            f"{report.delta:.10g},{report.wall_time:.3f},{out}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        specs = _specs(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    jobs = [(name, spec.replace(out=str(out)), out, not args.no_figure)
            for (name, spec), out in zip(specs, _out_dirs(args, specs))]
    print(SUMMARY_HEADER)
    try:
        if args.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                lines = list(pool.map(_run_one, jobs))
        else:
            lines = [_run_one(j) for j in jobs]
    except ExperimentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for line in lines:
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""``tlbounds`` command line.

Exit codes: 0 success, 2 config/schema error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import harness
from .errors import ConfigError, TLBoundsError
from .domains import RNG_ALGORITHM
from .htl import STABILITY_COLUMNS

EXIT_OK, EXIT_SCHEMA, EXIT_RUNTIME = 0, 2, 3
COMMANDS = ("divergence", "erm", "bound", "verify", "compare", "htl")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tlbounds", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", metavar="PATH", help="experiment config (JSON)")
    src.add_argument("--fixture", metavar="NAME", help="use a shipped fixture config by name")
    parser.add_argument("--theorem", choices=["lemma1", "1", "2", "3", "4", "5", "7"])
    parser.add_argument("--trials", type=int, metavar="N")
    parser.add_argument("--delta", type=float, metavar="D")
    parser.add_argument("--seed", type=int, metavar="S", help="overrides the config seed")
    parser.add_argument("--output", default="tlbounds-out", metavar="DIR")
    parser.add_argument("--format", choices=["csv", "json"],
                        help="write only trials.csv or only report.json (default: both)")
    parser.add_argument("--workers", type=int, default=1, help="trial worker threads; never changes results")
    parser.add_argument("--mu-grid", metavar="LIST", help="comma-separated mu values for `compare`")
    return parser


def load_config(args) -> harness.ExperimentConfig:
    if args.fixture:
        if args.fixture not in harness.list_fixtures():
            raise ConfigError(f"unknown fixture {args.fixture!r}; available: {', '.join(harness.list_fixtures())}")
        text, where = harness.fixture_path(args.fixture).read_text(), args.fixture
    else:
        where = args.config
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    cfg = harness.ExperimentConfig.from_dict(data)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.delta is not None:
        changes["params"] = {"delta": args.delta}
    return cfg.replace(**changes) if changes else cfg


def _write(outdir: Path, fmt, report: dict, header: list, rows: list) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in (None, "json"):
        p = outdir / "report.json"
        p.write_text(json.dumps(report, indent=2) + "\n")
        written.append(p)
    if fmt in (None, "csv"):
        p = outdir / "trials.csv"
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        written.append(p)
    return written


def run(args) -> list[Path]:
    cfg = load_config(args)
    out = Path(args.output)
    cmd = args.command
    if cmd == "verify":
        rep = harness.verify_bound(cfg, args.theorem, workers=args.workers)
        header, rows = rep.csv_rows()
        return _write(out, args.format, rep.to_dict(), header, rows)
    if cmd == "compare":
        grid = [float(v) for v in args.mu_grid.split(",")] if args.mu_grid else None
        rep = harness.compare_multisource(cfg, mu_grid=grid, workers=args.workers)
        header = ["trial", "seed", "thm3_rhs", "thm7_rhs", "lhs3", "lhs7", "tighter"]
        rows = [[r[k] if k in ("trial", "seed", "tighter") else repr(r[k]) for k in header] for r in rep["per_trial"]]
        return _write(out, args.format, rep, header, rows)
    if cmd == "bound":
        theorem = args.theorem or (cfg.theorems()[0] if cfg.theorems() else None)
        if theorem is None:
            raise ConfigError(f"scenario {cfg.scenario!r} has no bound calculator")
        rep = harness.bound_report(cfg, theorem)
        data = rep.to_dict()
        data.update(seed=cfg.seed, rng=RNG_ALGORITHM, config=cfg.to_dict())
        text = rep.to_csv_row(header=True).splitlines()
        header, row = next(csv.reader([text[0]])), next(csv.reader([text[1]]))
        return _write(out, args.format, data, header, [row])
    if cmd == "divergence":
        rep = dict(harness.divergence_report(cfg), config=cfg.to_dict())
        header = ["source", "hdh_exact", "hdh_empirical", "discrepancy_exact", "m_prime"]
        return _write(out, args.format, rep, header, [[r[k] for k in header] for r in rep["rows"]])
    if cmd == "erm":
        rep = dict(harness.erm_report(cfg), config=cfg.to_dict())
        header = ["seed", "index", "objective", "tie_count", "target_risk"]
        return _write(out, args.format, rep, header, [[rep[k] for k in header]])
    if cmd == "htl":
        if cfg.scenario != "htl_stability":
            raise ConfigError("the htl command needs an htl_stability config")
        results = harness.htl_stability_grid(cfg)
        rep = {"seed": cfg.seed, "rng": RNG_ALGORITHM, "rows": [r.to_dict() for r in results], "config": cfg.to_dict()}
        return _write(out, args.format, rep, STABILITY_COLUMNS, [r.csv_row() for r in results])
    raise ConfigError(f"unknown command {cmd!r}")  # pragma: no cover


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        written = run(args)
    except ConfigError as exc:
        print(f"tlbounds: config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (TLBoundsError, ArithmeticError, OSError) as exc:
        print(f"tlbounds: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for p in written:
        print(os.fspath(p))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: run one sweep, the fixed-Eve table or the convergence trace."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigurationError
from .harness import (
    DEFAULT_VALUES, STRATEGIES, VARIABLES, ExperimentConfig, SweepSpec, emit_csv, load_config,
    run_convergence, run_sweep, run_table2,
)


def _values(text, variable):
    conv = int if variable in ("num_eves", "num_virtual_mas") else float
    return tuple(conv(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="virtualeve", description=__doc__)
    ap.add_argument("--config", help="flat key = value experiment file")
    ap.add_argument("--sweep", default="num_eves", choices=VARIABLES + ("table2", "convergence"))
    ap.add_argument("--values", help="comma-separated sweep values (defaults per variable)")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--out", default="results.csv", help="CSV path; plot-data files go next to it")
    ap.add_argument("--strategy", action="append", choices=STRATEGIES,
                    help="strategy to run (repeatable; default: all)")
    ap.add_argument("--ma-counts", default=None, help="comma-separated MA counts for each strategy")
    ap.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identical output)")
    ap.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.trials is not None:
            cfg = replace(cfg, trials=args.trials)
        params, trial, array = cfg.system_params(), cfg.trial_config(), cfg.array()
        out = Path(args.out)

        if args.sweep == "table2":
            rows = run_table2(params, trial, array=array)
            out.parent.mkdir(parents=True, exist_ok=True)
            with out.open("w", encoding="utf-8") as fh:
                fh.write("eve_distances,r_col,r_veve,error_pct,d_m\n")
                for r in rows:
                    fh.write(f"{' '.join(repr(x) for x in r.eve_distances)},{r.r_col!r},{r.r_veve!r},"
                             f"{r.error_pct!r},{r.d_m!r}\n")
            return 0
        if args.sweep == "convergence":
            hist, _ = run_convergence(params, trial, cfg.n_eves, cfg.n_virtual_mas, array=array)
            out.parent.mkdir(parents=True, exist_ok=True)
            with out.open("w", encoding="utf-8") as fh:
                fh.write("# iter d_m expected_delta\n")
                for k, d, obj in hist:
                    fh.write(f"{k} {d!r} {obj!r}\n")
            return 0

        values = _values(args.values, args.sweep) if args.values else DEFAULT_VALUES[args.sweep]
        ma = _values(args.ma_counts, "num_virtual_mas") if args.ma_counts else (cfg.n_virtual_mas,)
        spec = SweepSpec(args.sweep, values, tuple(args.strategy or STRATEGIES), ma)
        rows = run_sweep(spec, params, trial, num_eves=cfg.n_eves, bob_distance=cfg.d_bob_bs_m, array=array,
                         timing=args.timing, workers=args.workers)
        emit_csv(rows, out)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

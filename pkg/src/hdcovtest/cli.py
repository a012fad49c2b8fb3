"""Command-line interface.

Exit codes: 0 on success, 2 on usage errors, 3 on data errors.
"""

from __future__ import annotations

import argparse
import fnmatch
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .exceptions import DataError, ReplicationError
from .homtest import block_tests, box_m, default_partition, explicit_partition, lk_test
from .io import build_document, read_group_csv, result_record, write_group_csv, write_result_json
from .montecarlo import (
    run_scenario,
    scenario_from_dict,
    scenario_presets,
    scenario_to_dict,
    size_power_table,
    chi2_limit_check,
)
from .procsim import parse_model, sample_group, substream

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "reject" if v else "fail to reject"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def _render(rows: list[dict], columns: Sequence[str]) -> str:
    table = [list(columns)] + [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(columns))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(line, widths)) for line in table)


_RESULT_COLUMNS = ("label", "statistic", "rho", "scaled", "df", "p_value", "reject")


def _resolve_seed(seed: int | None, out) -> int:
    if seed is None:
        seed = int(np.random.SeedSequence().entropy) % (1 << 63)
        print(f"seed: {seed}", file=out)
    return seed


def _load_groups(args, out) -> tuple[list[np.ndarray], int | None]:
    if len(args.files) < 2:
        raise UsageError("need at least two group files")
    groups = [read_group_csv(f, header=args.header) for f in args.files]
    seed = None
    if getattr(args, "subsample", None):
        seed = _resolve_seed(args.seed, out)
        sub = []
        for i, g in enumerate(groups):
            if args.subsample > g.shape[0]:
                raise DataError(f"{args.files[i]}: cannot subsample {args.subsample} of {g.shape[0]} rows")
            idx = substream(seed, i).choice(g.shape[0], args.subsample, replace=False)
            sub.append(g[np.sort(idx)])
        groups = sub
    return groups, seed


def _finish(args, out, results: list[dict], warnings: Sequence[str], config: dict, **extra) -> None:
    print(_render(results, _RESULT_COLUMNS), file=out)
    for w in warnings:
        print(f"warning: {w}", file=out)
    if args.json:
        doc = build_document(args.files, config, results, warnings, **extra)
        write_result_json(doc, args.json)


def _config(args, seed, partition=None) -> dict:
    return {
        "alpha": args.alpha,
        "mode": args.mode,
        "partition": partition,
        "seed": seed,
        "r": getattr(args, "r", None),
        "c": getattr(args, "c", None),
    }


def cmd_test(args, out) -> int:
    groups, seed = _load_groups(args, out)
    res = lk_test(groups, alpha=args.alpha, mode=args.mode, r=args.r, c=args.c)
    _finish(args, out, [result_record(res)], res.warnings, _config(args, seed))
    return EXIT_OK


def _parse_partition(text: str):
    if text == "auto":
        return "auto"
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--partition must be 'auto' or comma-separated integers, got {text!r}") from None


def cmd_blocks(args, out) -> int:
    groups, seed = _load_groups(args, out)
    p = groups[0].shape[1]
    spec = _parse_partition(args.partition)
    if spec == "auto":
        part = default_partition(p, min(g.shape[0] for g in groups))
    else:
        try:
            part = explicit_partition(spec, p)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    res = block_tests(groups, part, alpha=args.alpha, mode=args.mode, r=args.r, c=args.c)
    records = [result_record(b) for b in res.blocks if b is not None]
    warnings = list(res.warnings) + [f"block {j + 1}: {msg}" for j, msg in res.errors.items()]
    config = _config(args, seed, list(part.boundaries))
    decision = {
        "reject": res.reject,
        "rejected_blocks": [j + 1 for j in res.rejected_blocks],
    }
    _finish(args, out, records, warnings, config, decision=decision)
    verdict = "reject H0" if res.reject else "fail to reject H0"
    print(f"overall: {verdict}; rejected blocks: {decision['rejected_blocks'] or 'none'}", file=out)
    return EXIT_OK


def cmd_boxm(args, out) -> int:
    groups, seed = _load_groups(args, out)
    res = box_m(groups, alpha=args.alpha, mode=args.mode)
    _finish(args, out, [result_record(res)], (), _config(args, seed))
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    seed = _resolve_seed(args.seed, sys.stderr if args.out is None else out)
    try:
        model = parse_model(args.model)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    X = sample_group(model, args.law, args.n, args.p, substream(seed, 0))
    text = write_group_csv(X, args.out)
    if args.out is None:
        out.write(text)
    return EXIT_OK


def _selected_scenarios(args) -> list:
    if args.config:
        d = json.loads(Path(args.config).read_text(encoding="utf-8"))
        items = d if isinstance(d, list) else [d]
        scenarios = [scenario_from_dict(x) for x in items]
    else:
        presets = scenario_presets()
        names = [n for n in presets if fnmatch.fnmatchcase(n, args.preset)]
        if not names:
            raise UsageError(f"no preset matches {args.preset!r}; see 'mc --list'")
        scenarios = [presets[n] for n in names]
    changes = {}
    if args.reps is not None:
        changes["replications"] = args.reps
    if args.alpha is not None:
        changes["alpha"] = args.alpha
    if args.mode is not None:
        changes["mode"] = args.mode
    return [s.with_(**changes) for s in scenarios]


def cmd_mc(args, out) -> int:
    if args.list:
        for name in scenario_presets():
            print(name, file=out)
        return EXIT_OK
    if not (args.preset or args.config):
        raise UsageError("mc needs --preset NAME or --config FILE")
    seed = _resolve_seed(args.seed, out)
    scenarios = [s.with_(master_seed=seed) for s in _selected_scenarios(args)]
    results = []
    rows = []
    for s in scenarios:
        est = run_scenario(s, workers=args.workers)
        results.append((s, est))
        lo, hi = est.wilson_ci_95
        rows.append(
            {
                "label": s.name,
                "rejections": est.rejections,
                "replications": est.replications,
                "rate": est.rate,
                "wilson_ci_95": [lo, hi],
            }
        )
    print(
        _render(
            [{**r, "ci": f"[{r['wilson_ci_95'][0]:.3f}, {r['wilson_ci_95'][1]:.3f}]"} for r in rows],
            ("label", "rejections", "replications", "rate", "ci"),
        ),
        file=out,
    )
    table = size_power_table(results)
    if len(table.rows) > 1:
        print(file=out)
        print(table.render(), file=out)
    if args.json:
        doc = build_document(
            [],
            {"seed": seed, "workers": args.workers},
            rows,
            (),
            scenarios=[scenario_to_dict(s) for s in scenarios],
            table=table.to_records(),
        )
        write_result_json(doc, args.json)
    return EXIT_OK


def cmd_dist_check(args, out) -> int:
    seed = _resolve_seed(args.seed, out)
    rows = []
    for i, n in enumerate(args.n):
        for j, p in enumerate(args.p):
            chk = chi2_limit_check(n, p, args.phi, args.law, args.reps, substream(seed, i, j))
            rows.append(
                {
                    "label": f"n={n},p={p}",
                    "n": n,
                    "p": p,
                    "phi": args.phi,
                    "law": chk.law,
                    "sigma2": chk.long_run_variance,
                    "ks_distance": chk.ks_distance,
                    "critical": chk.critical_value,
                    "passed": chk.passed,
                }
            )
    print(_render([{**r, "passed": "pass" if r["passed"] else "FAIL"} for r in rows],
                  ("label", "sigma2", "ks_distance", "critical", "passed")), file=out)
    if args.json:
        doc = build_document([], {"seed": seed, "reps": args.reps, "phi": args.phi, "law": args.law}, rows)
        write_result_json(doc, args.json)
    return EXIT_OK


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdcovtest",
        description="Equality tests for several high-dimensional covariance matrices.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_command(name, help_text, func):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("files", nargs="+", help="one CSV per group (rows = samples)")
        sp.add_argument("--header", action="store_true", help="skip the first row of every file")
        sp.add_argument("--alpha", type=_probability, default=0.05)
        sp.add_argument("--mode", choices=("upper", "region"), default="upper")
        sp.add_argument("--json", metavar="PATH", help="also write a JSON result document")
        sp.set_defaults(func=func)
        return sp

    for name, help_text, func in (
        ("test", "rho*L_k test on the all-ones quadratic form", cmd_test),
        ("blocks", "rho*L_k tests on coordinate blocks", cmd_blocks),
    ):
        sp = data_command(name, help_text, func)
        sp.add_argument("--subsample", type=int, metavar="N", help="randomly keep N rows per group")
        sp.add_argument("--seed", type=int, help="seed for --subsample")
        sp.add_argument("--r", type=float, default=4.0, help="moment order for the dimension advisory")
        sp.add_argument("--c", type=float, default=1.0, help="constant for the dimension advisory")
        if name == "blocks":
            sp.add_argument("--partition", default="auto", help="'auto' or right endpoints p1,p2,...,p")
    data_command("boxm", "classical Box's M test (needs p < n_i)", cmd_boxm)

    sp = sub.add_parser("simulate", help="write one synthetic group as CSV")
    sp.add_argument("--model", default="omega0", help="omega0|omega1|omega2|ar1:<b>|cs:<K>,<phi>|gamma")
    sp.add_argument("--law", default="gaussian", choices=("gaussian", "normal", "exponential", "exp", "uniform",
                                                          "centered_exponential", "centered_uniform"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("mc", help="Monte Carlo size/power experiments")
    sp.add_argument("--preset", help="preset name or glob, e.g. 'grid-size-*-p100-n50'")
    sp.add_argument("--config", metavar="FILE", help="JSON scenario (or list of scenarios)")
    sp.add_argument("--list", action="store_true", help="list preset names")
    sp.add_argument("--reps", type=int)
    sp.add_argument("--alpha", type=_probability)
    sp.add_argument("--mode", choices=("upper", "region"))
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--json", metavar="PATH")
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("dist-check", help="KS check of scaled quadratic forms against chi2_{n-1}")
    sp.add_argument("--n", type=int, nargs="+", default=[3, 5, 10])
    sp.add_argument("--p", type=int, nargs="+", default=[10, 100])
    sp.add_argument("--phi", type=float, default=0.0)
    sp.add_argument("--law", default="gaussian")
    sp.add_argument("--reps", type=int, default=2000)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--json", metavar="PATH")
    sp.set_defaults(func=cmd_dist_check)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError, ReplicationError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

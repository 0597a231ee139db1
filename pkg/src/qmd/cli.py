"""Command-line interface: ``qmd estimate | matrix | exact | simulate | test``.

Input files are UTF-8 CSV with a header row, comma separators and ``.`` as
the decimal mark.  Exit status is 0 on success and 2 on input errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional

from .copulas import REFERENCE_COPULAS, SCENARIOS, reference_copula
from .core import Sample
from .harness import default_threads, permutation_test, simulate
from .measure import pairwise_profile, zeta1_estimate, zeta1_exact

ESTIMATE_KEYS = ("value", "n", "N", "s", "predictors", "response", "seed", "tie_policy")


class InputError(Exception):
    """Bad input file or arguments; reported with exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    s: Optional[float] = None
    N: Optional[int] = None
    tie_policy: str = "midrank"
    seed: Optional[int] = 0
    output_format: str = "json"
    threads: int = 1

    def __post_init__(self):
        if self.threads < 1:
            raise InputError("threads must be at least 1")
        if self.N is not None and self.N < 2:
            raise InputError("resolution must be at least 2")
        if self.s is not None and self.N is None and not 0.0 < self.s < 1.0:
            raise InputError("s must lie in (0, 1)")


def read_csv(path: str):
    """Header and float rows of a CSV file; bad cells are reported by line."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise InputError(f"{path}: empty file, header row required")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise InputError(f"{path}: duplicate column names in header")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise InputError(f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}")
        vals = []
        for name, cell in zip(header, row):
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                raise InputError(f"{path}: row {lineno}, column {name!r}: "
                                 f"missing or non-numeric value {cell!r}")
            vals.append(v)
        data.append(vals)
    return header, data


def load_sample(path: str, response: str) -> Sample:
    header, data = read_csv(path)
    if response not in header:
        raise InputError(f"unknown response column {response!r}")
    if len(data) < 2:
        raise InputError(f"need at least 2 data rows, got {len(data)}")
    if len(header) < 2:
        raise InputError("need at least one predictor column")
    return Sample(data, tuple(header), header.index(response))


def predictor_indices(sample: Sample, names: Optional[str]):
    if not names:
        return None
    out = []
    for name in names.split(","):
        name = name.strip()
        if name not in sample.column_names:
            raise InputError(f"unknown predictor column {name!r}")
        idx = sample.column_names.index(name)
        if idx == sample.response_index:
            raise InputError(f"column {name!r} is the response")
        out.append(idx)
    if len(set(out)) != len(out):
        raise InputError("repeated predictor column")
    return out


def _fmt(x):
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError("non-finite number in output")
        return format(x, ".17g")
    return x


def to_json(obj) -> str:
    """JSON with floats written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, float):
        return _fmt(obj)
    return json.dumps(obj)


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return ";".join(str(a) for a in v)
    return str(_fmt(v))


def to_csv(keys, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys)
    for row in rows:
        w.writerow([_csv_cell(row.get(k)) for k in keys])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> RunConfig:
    threads = args.threads if getattr(args, "threads", None) is not None else default_threads()
    return RunConfig(getattr(args, "s", None), getattr(args, "resolution", None),
                     getattr(args, "ties", "midrank"), getattr(args, "seed", 0),
                     getattr(args, "format", "json"), threads)


def cmd_estimate(args) -> int:
    cfg = _config(args)
    sample = load_sample(args.input, args.response)
    preds = predictor_indices(sample, args.predictors)
    est = zeta1_estimate(sample, preds, s=cfg.s, N=cfg.N, tie_policy=cfg.tie_policy,
                         seed=cfg.seed)
    rec = est.as_dict()
    if cfg.output_format == "json":
        _emit(to_json(rec) + "\n", args.out)
    else:
        _emit(to_csv(ESTIMATE_KEYS, [rec]), args.out)
    return 0


def cmd_matrix(args) -> int:
    cfg = _config(args)
    sample = load_sample(args.input, args.response)
    rows = [e.as_dict() for e in pairwise_profile(sample, s=cfg.s, N=cfg.N,
                                                  tie_policy=cfg.tie_policy, seed=cfg.seed)]
    if cfg.output_format == "json":
        _emit(to_json(rows) + "\n", args.out)
    else:
        _emit(to_csv(ESTIMATE_KEYS, rows), args.out)
    return 0


def cmd_exact(args) -> int:
    if args.resolution is None:
        raise InputError("exact needs --resolution")
    if args.resolution < 2:
        raise InputError("resolution must be at least 2")
    try:
        cb = reference_copula(args.copula, args.resolution, args.dimension)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rec = {"copula": args.copula, "dimension": cb.dimension, "N": args.resolution,
           "value": zeta1_exact(cb)}
    status = 0
    if args.verify is not None:
        from .oracle import riemann_d1_to_product
        if args.verify < 1:
            raise InputError("--verify needs a positive M")
        riemann, _ = riemann_d1_to_product(cb, args.verify)
        gap = abs(3.0 * riemann - rec["value"])
        rec.update({"verify_M": args.verify, "riemann": 3.0 * riemann, "gap": gap,
                    "bound": 6.0 / args.verify, "verified": gap <= 6.0 / args.verify})
        if not rec["verified"]:
            status = 1
    fmt = getattr(args, "format", "json")
    if fmt == "json":
        _emit(to_json(rec) + "\n", args.out)
    else:
        _emit(to_csv(list(rec), [rec]), args.out)
    if status:
        print("verification failed: oracle gap exceeds 6/M", file=sys.stderr)
    return status


def _parse_s(text: str) -> Optional[float]:
    text = text.strip()
    if text in ("", "default", "1/rho"):
        return None
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse exponent {text!r}") from None


def _parse_ints(text: str) -> List[int]:
    try:
        vals = [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse integer list {text!r}") from None
    if not vals or any(v < 2 for v in vals):
        raise InputError("sample sizes must be at least 2")
    return vals


SIM_KEYS = ("kind", "scenario", "n", "s", "N", "replicate", "value", "q1", "median", "q3")


def cmd_simulate(args) -> int:
    threads = args.threads if args.threads is not None else default_threads()
    if args.scenario not in SCENARIOS:
        raise InputError(f"unknown scenario {args.scenario!r}; choose from {sorted(SCENARIOS)}")
    if args.reps < 1:
        raise InputError("--reps must be at least 1")
    s_list = [_parse_s(t) for t in (args.s or "1/rho").split(",")]
    for s in s_list:
        if s is not None and not 0.0 < s < 1.0:
            raise InputError("s must lie in (0, 1)")
    n_list = _parse_ints(args.n)
    rows, summary = simulate(args.scenario, n_list, args.reps, s_list, args.seed, threads)
    out = [{"kind": "replicate", "scenario": r.scenario, "n": r.n, "s": r.s, "N": r.N,
            "replicate": r.replicate, "value": r.value} for r in rows]
    for (n, s), (q1, med, q3) in sorted(summary.items()):
        N = next(r.N for r in rows if r.n == n and r.s == s)
        out.append({"kind": "summary", "scenario": args.scenario, "n": n, "s": s, "N": N,
                    "q1": q1, "median": med, "q3": q3})
    _emit(to_csv(SIM_KEYS, out), args.out)
    return 0


def cmd_test(args) -> int:
    cfg = _config(args)
    if args.permutations < 1:
        raise InputError("--permutations must be at least 1")
    sample = load_sample(args.input, args.response)
    preds = predictor_indices(sample, args.predictors)
    res = permutation_test(sample, preds, args.permutations, s=cfg.s, N=cfg.N,
                           tie_policy=cfg.tie_policy, seed=cfg.seed, threads=cfg.threads)
    rec = res.as_dict()
    if cfg.output_format == "json":
        _emit(to_json(rec) + "\n", args.out)
    else:
        _emit(to_csv(list(rec), [rec]), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmd", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True):
        if data:
            sp.add_argument("--input", required=True, help="CSV file with a header row")
            sp.add_argument("--response", required=True, help="response column name")
        sp.add_argument("--s", type=float, default=None,
                        help="resolution exponent, N = floor(n**s) (default 1/rho)")
        sp.add_argument("--resolution", type=int, default=None,
                        help="explicit checkerboard resolution N (overrides --s)")
        sp.add_argument("--ties", choices=("midrank", "random"), default="midrank")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker processes (default $QMD_THREADS or 1)")

    est = sub.add_parser("estimate", help="estimate dependence of the response on predictors")
    common(est)
    est.add_argument("--predictors", default=None, help="comma separated predictor columns")
    est.set_defaults(func=cmd_estimate)

    mat = sub.add_parser("matrix", help="estimates for each predictor and for all of them")
    common(mat)
    mat.set_defaults(func=cmd_matrix)

    ex = sub.add_parser("exact", help="exact value for a reference copula")
    ex.add_argument("--copula", required=True, choices=sorted(REFERENCE_COPULAS))
    ex.add_argument("--resolution", type=int, default=None)
    ex.add_argument("--dimension", type=int, default=None)
    ex.add_argument("--verify", type=int, default=None, metavar="M",
                    help="cross-check against a Riemann sum with M points")
    ex.add_argument("--format", choices=("json", "csv"), default="json")
    ex.add_argument("--out", default=None)
    ex.set_defaults(func=cmd_exact)

    sim = sub.add_parser("simulate", help="repeat the estimator on scenario samples (CSV out)")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--n", required=True, help="comma separated sample sizes")
    sim.add_argument("--reps", type=int, default=100)
    sim.add_argument("--s", default=None, help="comma separated exponents, e.g. 1/3,0.25")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", default=None)
    sim.add_argument("--threads", type=int, default=None)
    sim.set_defaults(func=cmd_simulate)

    tst = sub.add_parser("test", help="permutation test of independence")
    common(tst)
    tst.add_argument("--predictors", default=None)
    tst.add_argument("--permutations", type=int, default=999)
    tst.set_defaults(func=cmd_test)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"qmd: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"qmd: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

    occupancy prob subset --N 6 --S 2 --K 3 --R 1 --method exact
    occupancy prob bins --m 4 --n 2 --R 2 --method all --format table
    occupancy threshold --N 10000 --S 100 --R 1 --target-prob 0.3679
    occupancy validity --N 1000000 --S 1000 --K 6908 --R 1
    occupancy sweep --vary a --from -3 --to 3 --step 1 --N 1000000 --S 1000 --R 2

Exit codes: 0 ok, 1 Monte Carlo disagrees with the exact value, 2 invalid
parameters, 3 exact method over budget, 4 threshold regime unreachable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .asymptotics import (
    DomainError,
    asymptotic_estimate,
    c_subset,
    perturbation_c,
    threshold_K,
    validity,
)
from .exact import (
    DEFAULT_BUDGET,
    BinsModelParams,
    BudgetExceeded,
    InvalidParams,
    Model,
    ProbEstimate,
    SubsetModelParams,
    bins_prob_exact,
    bonferroni_estimate,
    subset_prob_exact,
)
from .montecarlo import DEFAULT_SEED, TrialConfig, mc_estimate, wilson_interval

EXIT_OK, EXIT_DISAGREE, EXIT_INVALID, EXIT_BUDGET, EXIT_DOMAIN = 0, 1, 2, 3, 4
METHODS = ("exact", "bonferroni", "asymptotic", "mc")
# MC vs exact check for --method all
DISAGREE_CONFIDENCE = 0.999


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fmt12(x):
    """Round to 12 significant digits; the rounded float is what gets serialized."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.12g}")


@dataclass
class OutputRecord:
    model: str
    params: dict
    method: str
    value: float | None = None
    lower: float | None = None
    upper: float | None = None
    exact: str | None = None  # "p/q" when a rational value was computed
    c: float | None = None
    validity: dict = field(default_factory=dict)
    note: str = ""
    runtime_ms: int = 0

    def __post_init__(self):
        self.value, self.lower, self.upper, self.c = map(fmt12, (self.value, self.lower, self.upper, self.c))
        self.validity = {k: fmt12(v) if isinstance(v, float) else v for k, v in self.validity.items()}

    def flat(self) -> dict:
        d = asdict(self)
        flat = {k: d[k] for k in ("model", "params", "method", "value", "lower", "upper", "exact", "c")}
        flat.update({f"validity_{k}": v for k, v in d["validity"].items()})
        flat["note"] = d["note"]
        flat["runtime_ms"] = d["runtime_ms"]
        return flat

    @classmethod
    def from_flat(cls, flat: dict) -> "OutputRecord":
        rec = cls.__new__(cls)
        for k in ("model", "params", "method", "value", "lower", "upper", "exact", "c", "note", "runtime_ms"):
            setattr(rec, k, flat[k])
        rec.validity = {k[len("validity_"):]: v for k, v in flat.items() if k.startswith("validity_")}
        return rec

    def __eq__(self, other):
        return isinstance(other, OutputRecord) and self.flat() == other.flat()


def validity_fields(model: Model) -> dict:
    rep = validity(model)
    out = {
        "ratio_a": rep.ratio_a,
        "ratio_b": rep.ratio_b,
        "ratio_c1": rep.ratio_c1,
        "ratio_c2": rep.ratio_c2,
        "alpha": rep.alpha,
    }
    out.update({f"label_{k}": v for k, v in rep.classifications.items()})
    out.update(rep.bins_ratios)
    out["trusted"] = rep.trusted
    return out


# ---------------------------------------------------------------- serialization


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, dict):
        return json.dumps(v, sort_keys=False)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_json_lines(records: list[OutputRecord]) -> str:
    return "".join(json.dumps(r.flat(), ensure_ascii=False) + "\n" for r in records)


def to_csv(records: list[OutputRecord]) -> str:
    if not records:
        return ""
    buf = io.StringIO()
    header = list(records[0].flat())
    for r in records[1:]:
        header += [k for k in r.flat() if k not in header]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in records:
        flat = r.flat()
        w.writerow([_csv_cell(flat.get(k)) for k in header])
    return buf.getvalue()


def _parse_cell(key: str, text: str):
    if text == "":
        return None
    if key == "params":
        return json.loads(text)
    if key == "runtime_ms":
        return int(text)
    if key in ("model", "method", "exact", "note") or key.startswith("validity_label_"):
        return text
    if text in ("true", "false"):
        return text == "true"
    return float(text)


def parse_json_lines(text: str) -> list[OutputRecord]:
    return [OutputRecord.from_flat(json.loads(line)) for line in text.splitlines() if line.strip()]


def parse_csv(text: str) -> list[OutputRecord]:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for row in rows:
        flat = {k: _parse_cell(k, v) for k, v in row.items()}
        flat["note"] = flat["note"] or ""
        out.append(OutputRecord.from_flat(flat))
    return out


def to_table(records: list[OutputRecord]) -> str:
    cols = ("model", "method", "params", "value", "lower", "upper", "c", "note")
    rows = [[_table_cell(r.flat().get(k)) for k in cols] for r in records]
    widths = [max(len(c), *(len(row[i]) for row in rows)) if rows else len(c) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows]
    return "\n".join(lines) + "\n"


def _table_cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, dict):
        return " ".join(f"{k}={x}" for k, x in v.items())
    return str(v)


def emit(records: list[OutputRecord], fmt: str, out) -> None:
    out.write({"json": to_json_lines, "csv": to_csv, "table": to_table}[fmt](records))


# ---------------------------------------------------------------- computation


def _model_name(model: Model) -> str:
    return "subset" if isinstance(model, SubsetModelParams) else "bins"


def _params(model: Model) -> dict:
    return asdict(model)


def _exact_string(x: Fraction | None) -> str | None:
    return None if x is None else f"{x.numerator}/{x.denominator}"


def run_method(model: Model, method: str, args) -> tuple[ProbEstimate, int]:
    t0 = time.perf_counter()
    if method == "exact":
        solver = subset_prob_exact if isinstance(model, SubsetModelParams) else bins_prob_exact
        est = solver(model, budget=args.budget)
    elif method == "bonferroni":
        est = bonferroni_estimate(model, args.max_terms)
    elif method == "asymptotic":
        est = asymptotic_estimate(model)
    elif method == "mc":
        est = mc_estimate(model, TrialConfig(args.trials, args.seed, workers=args.workers))
    else:
        raise CliError(f"unknown method {method}", EXIT_INVALID)
    ms = int(round((time.perf_counter() - t0) * 1000)) if args.timing else 0
    return est, ms


def record_for(model: Model, est: ProbEstimate, ms: int, extra_params: dict | None = None) -> OutputRecord:
    params = _params(model)
    if extra_params:
        params.update(extra_params)
    note = ""
    if est.method == "exact" and est.meta.get("mode") == "log":
        note = f"log-space; log_abs_error_bound={est.meta['log_abs_error_bound']:.3g}"
    elif est.method == "bonferroni":
        note = f"terms_used={est.meta['terms_used']} complete={est.meta['complete']}"
    elif est.method == "monte_carlo":
        note = f"successes={est.meta['successes']} trials={est.meta['trials']} seed={est.meta['seed']}"
    c = est.meta.get("c") if est.method == "asymptotic" else None
    return OutputRecord(
        model=_model_name(model),
        params=params,
        method=est.method,
        value=est.value,
        lower=est.lower,
        upper=est.upper,
        exact=_exact_string(est.exact),
        c=c,
        validity=validity_fields(model),
        note=note,
        runtime_ms=ms,
    )


def prob_records(model: Model, args) -> tuple[list[OutputRecord], int]:
    methods = METHODS if args.method == "all" else (args.method,)
    records, results, code = [], {}, EXIT_OK
    for method in methods:
        try:
            est, ms = run_method(model, method, args)
        except BudgetExceeded as exc:
            if args.method == "exact":
                raise CliError(str(exc), EXIT_BUDGET)
            records.append(OutputRecord(_model_name(model), _params(model), method,
                                        validity=validity_fields(model), note=f"skipped: {exc}"))
            continue
        results[method] = est
        records.append(record_for(model, est, ms))
    if args.method == "all" and "exact" in results:
        exact = results["exact"].value
        notes = []
        if "bonferroni" in results:
            b = results["bonferroni"]
            if not b.lower - 1e-12 <= exact <= b.upper + 1e-12:
                notes.append("exact outside bonferroni bounds")
                code = EXIT_DISAGREE
        if "mc" in results:
            mc = results["mc"].meta
            lo, hi = wilson_interval(mc["successes"], mc["trials"], DISAGREE_CONFIDENCE)
            if not lo <= exact <= hi:
                notes.append(f"exact outside MC {DISAGREE_CONFIDENCE:.1%} interval [{lo:.6g}, {hi:.6g}]")
                code = EXIT_DISAGREE
        if "asymptotic" in results:
            notes.append(f"asymptotic-exact={results['asymptotic'].value - exact:+.6g}")
        records.append(
            OutputRecord(_model_name(model), _params(model), "comparison", exact,
                         validity=validity_fields(model), note="; ".join(notes))
        )
    return records, code


# ---------------------------------------------------------------- commands


def _subset_from(args) -> SubsetModelParams:
    return SubsetModelParams(args.N, args.S, args.K, args.R)


def _bins_from(args) -> BinsModelParams:
    return BinsModelParams(args.m, args.n, args.R)


def cmd_prob(args) -> tuple[list[OutputRecord], int]:
    model = _subset_from(args) if args.model == "subset" else _bins_from(args)
    return prob_records(model, args)


def cmd_threshold(args) -> tuple[list[OutputRecord], int]:
    if not 0 < args.target_prob < 1:
        raise CliError(f"--target-prob must lie in (0, 1), got {args.target_prob}", EXIT_INVALID)
    target_c = -math.log(args.target_prob)
    t0 = time.perf_counter()
    try:
        K = threshold_K(args.N, args.S, args.R, target_c)
    except DomainError as exc:
        raise CliError(str(exc), EXIT_DOMAIN)
    model = SubsetModelParams(args.N, args.S, K, args.R)
    cp = c_subset(model)
    ms = int(round((time.perf_counter() - t0) * 1000)) if args.timing else 0
    rec = OutputRecord(
        "subset",
        {**_params(model), "target_prob": args.target_prob},
        "threshold",
        value=cp.prob,
        c=cp.c,
        validity=validity_fields(model),
        note=f"target_c={fmt12(target_c)}",
        runtime_ms=ms,
    )
    return [rec], EXIT_OK


def cmd_validity(args) -> tuple[list[OutputRecord], int]:
    if args.m is not None or args.n is not None:
        if args.m is None or args.n is None:
            raise CliError("bins validity needs both --m and --n", EXIT_INVALID)
        model = _bins_from(args)
    else:
        if None in (args.N, args.S, args.K):
            raise CliError("subset validity needs --N, --S and --K", EXIT_INVALID)
        model = _subset_from(args)
    fields = validity_fields(model)
    labels = " ".join(f"{k[len('label_'):]}={v}" for k, v in fields.items() if k.startswith("label_"))
    rec = OutputRecord(_model_name(model), _params(model), "validity", validity=fields,
                       note=f"{labels} trusted={fields['trusted']}")
    return [rec], EXIT_OK


def _grid(start: float, stop: float, step: float, integer: bool) -> list:
    if step == 0 or (stop - start) * step < 0:
        raise CliError("empty or invalid sweep grid", EXIT_INVALID)
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    pts = [start + i * step for i in range(n)]
    if integer:
        if any(abs(p - round(p)) > 1e-9 for p in pts):
            raise CliError("integer parameter swept with a fractional grid", EXIT_INVALID)
        pts = [int(round(p)) for p in pts]
    else:
        pts = [fmt12(p) for p in pts]
    return pts


def cmd_sweep(args) -> tuple[list[OutputRecord], int]:
    integer = args.vary != "a"
    points = _grid(args.start, args.stop, args.step, integer)
    records, code = [], EXIT_OK
    if args.vary == "a":
        for a in points:
            t0 = time.perf_counter()
            try:
                c1 = perturbation_c(args.N, args.S, args.R, a)
            except DomainError as exc:
                raise CliError(str(exc), EXIT_DOMAIN)
            ms = int(round((time.perf_counter() - t0) * 1000)) if args.timing else 0
            records.append(
                OutputRecord(
                    "subset",
                    {"N": args.N, "S": args.S, "R": args.R, "a": a},
                    "perturbation",
                    value=math.exp(-c1),
                    c=c1,
                    note=f"exp(-a)={fmt12(math.exp(-a))}",
                    runtime_ms=ms,
                )
            )
        return records, code
    methods = [m.strip() for m in args.methods.split(",")]
    for m in methods:
        if m not in METHODS and m != "all":
            raise CliError(f"unknown method {m}", EXIT_INVALID)
    for value in points:
        setattr(args, args.vary, value)
        model = _subset_from(args) if args.model == "subset" else _bins_from(args)
        for m in methods:
            args.method = m
            recs, rc = prob_records(model, args)
            records.extend(recs)
            code = max(code, rc)
    return records, code


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_INVALID)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv", "table"), default="json")
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="report runtime_ms as 0 so output is byte-identical across runs")


def _methods_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-terms", type=int, default=None)
    p.add_argument("--budget", type=float, default=DEFAULT_BUDGET)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="occupancy", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    prob = sub.add_parser("prob", help="probability that every block/bin is occupied R times")
    models = prob.add_subparsers(dest="model", required=True, parser_class=_Parser)
    ps = models.add_parser("subset")
    ps.add_argument("--N", type=int, required=True)
    ps.add_argument("--S", type=int, required=True)
    ps.add_argument("--K", type=int, required=True)
    ps.add_argument("--R", type=int, required=True)
    pb = models.add_parser("bins")
    pb.add_argument("--m", type=int, required=True)
    pb.add_argument("--n", type=int, required=True)
    pb.add_argument("--R", type=int, required=True)
    for p in (ps, pb):
        p.add_argument("--method", choices=(*METHODS, "all"), default="exact")
        _methods_opts(p)
        _common(p)
        p.set_defaults(func=cmd_prob)

    th = sub.add_parser("threshold", help="smallest K reaching a target occupation probability")
    th.add_argument("--N", type=int, required=True)
    th.add_argument("--S", type=int, required=True)
    th.add_argument("--R", type=int, required=True)
    th.add_argument("--target-prob", type=float, required=True)
    _common(th)
    th.set_defaults(func=cmd_threshold)

    va = sub.add_parser("validity", help="finite-size diagnostics for the limit theorems")
    for flag in ("--N", "--S", "--K", "--m", "--n"):
        va.add_argument(flag, type=int)
    va.add_argument("--R", type=int, required=True)
    _common(va)
    va.set_defaults(func=cmd_validity)

    sw = sub.add_parser("sweep", help="one record per grid point, for plotting")
    sw.add_argument("--vary", choices=("K", "N", "R", "S", "a", "m", "n"), required=True)
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--step", type=float, default=1.0)
    sw.add_argument("--model", choices=("subset", "bins"), default="subset")
    sw.add_argument("--methods", default="asymptotic", help="comma-separated list of methods")
    for flag in ("--N", "--S", "--K", "--m", "--n"):
        sw.add_argument(flag, type=int)
    sw.add_argument("--R", type=int, required=True)
    _methods_opts(sw)
    _common(sw)
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "trials", 1) < 1:
            raise CliError("--trials must be >= 1", EXIT_INVALID)
        if getattr(args, "workers", 1) < 1:
            raise CliError("--workers must be >= 1", EXIT_INVALID)
        if getattr(args, "seed", 0) is not None and not 0 <= getattr(args, "seed", 0) < 2**64:
            raise CliError("--seed must be a 64-bit unsigned integer", EXIT_INVALID)
        records, code = args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except InvalidParams as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    emit(records, args.format, out)
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

"""Command line front end.

    ldp-osc catalog
    ldp-osc conditions --method beta:0.5 --h 0.5
    ldp-osc rates      --method beta:0.5 --observable mean-position --h 0.1
    ldp-osc prob       --method beta:0.5 --observable mean-position \\
                       --h 0.1 --N-sweep 10:10000:4 --interval 0.9:1.1
    ldp-osc msq        --method em --h 0.1 --samples 2000
    ldp-osc simulate   --method beta:0.5 --h 0.1 --N 1000 --samples 100000
    ldp-osc search     --observable mean-velocity --out ./found

`--method` accepts a catalog id (see `catalog`) or a path to a method file.
A single `--h` expands to a refinement sweep h, h/2, ..., h/64 wherever a
verdict needs several step sizes; `--h-sweep lo:hi:n` pins the sweep
explicitly (geometric spacing). Output is CSV by default (`#` starts a
footer line) or a JSON document with `--format json`; `--out` writes the
report to a file instead of stdout (for `search` it names the directory that
receives one method file per hit).

Exit codes: 0 success, 1 bad usage or bad input, 2 no applicable result,
3 internal invariant violation. Worker threads for the samplers come from
LDP_OSC_THREADS; results are bit-identical for any thread count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .ldp import InternalInvariantError, exact_preservation_search, \
    finite_N_decay_rate, observable_law, preservation_report, rate_function
from .laws import interval_probability
from .methods import catalog, check_conditions, condition_b_diagnostics, \
    evaluate, get_method, parse_method_file
from .oscillator import MEAN_POSITION, OBSERVABLES, OscillatorParams, \
    continuous_rate
from .sim import SimConfig, msq_order, simulate_paths

SCHEMA = "ldp-osc/1"

VERDICT_SWEEP_POINTS = 7
MSQ_SWEEP_POINTS = 5


class _UsageError(Exception):
    pass


class _NoApplicableResult(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; route it through the single
    # exit-code policy in main() instead
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# serialization


def emit_csv(rows, footers=()):
    out = io.StringIO()
    if rows:
        writer = csv.DictWriter(out, fieldnames=list(rows[0].keys()),
                                lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: str(value) for key, value in row.items()})
    for line in footers:
        out.write(f"# {line}\n")
    return out.getvalue()


def parse_csv(text):
    """Data rows of an emitted CSV document, as dicts of strings."""
    lines = [line for line in text.splitlines()
             if line.strip() and not line.lstrip().startswith("#")]
    return [dict(row) for row in csv.DictReader(lines)]


def _jsonable(value):
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def emit_json(payload):
    return json.dumps(_jsonable(payload), indent=2) + "\n"


def _render(args, command, rows, footers=(), **extra):
    if args.format == "json":
        payload = {"schema": SCHEMA, "command": command}
        payload.update(extra)
        payload["rows"] = rows
        if footers:
            payload["notes"] = list(footers)
        return emit_json(payload)
    return emit_csv(rows, footers)


# --------------------------------------------------------------------------
# argument helpers


def _resolve_method(identifier):
    if os.path.isfile(identifier):
        with open(identifier, encoding="utf-8") as handle:
            text = handle.read()
        stem = os.path.splitext(os.path.basename(identifier))[0]
        return parse_method_file(text, fallback_name=stem)
    return get_method(identifier)


def _params(args):
    return OscillatorParams(alpha=getattr(args, "alpha", 1.0),
                            x0=getattr(args, "x0", 0.0),
                            y0=getattr(args, "y0", 0.0))


def _parse_colon_floats(text, count, what):
    parts = text.split(":")
    if len(parts) != count:
        raise _UsageError(f"{what} must have {count} colon-separated fields, "
                          f"got {text!r}")
    try:
        return [float(part) for part in parts]
    except ValueError:
        raise _UsageError(f"bad number in {what} {text!r}") from None


def _h_values(args, points):
    """The step sweep: explicit --h-sweep, or --h expanded by halving."""
    if getattr(args, "h_sweep", None):
        lo, hi, n = _parse_colon_floats(args.h_sweep, 3, "--h-sweep")
        n = int(n)
        if not 0.0 < lo < hi or n < 2:
            raise _UsageError(f"--h-sweep needs 0 < lo < hi and n >= 2, got {args.h_sweep!r}")
        return [float(h) for h in np.geomspace(hi, lo, n)]
    if getattr(args, "h", None):
        if not args.h > 0:
            raise _UsageError(f"--h must be positive, got {args.h}")
        return [args.h * 2.0 ** -k for k in range(points)]
    raise _UsageError("provide --h or --h-sweep")


def _n_values(args):
    if getattr(args, "N_sweep", None):
        lo, hi, n = _parse_colon_floats(args.N_sweep, 3, "--N-sweep")
        if not 1 <= lo < hi or int(n) < 2:
            raise _UsageError(f"--N-sweep needs 1 <= lo < hi and n >= 2, got {args.N_sweep!r}")
        values = np.unique(np.rint(np.geomspace(lo, hi, int(n))).astype(int))
        return [int(v) for v in values]
    if getattr(args, "N", None):
        if args.N < 1:
            raise _UsageError(f"--N must be >= 1, got {args.N}")
        return [args.N]
    raise _UsageError("provide --N or --N-sweep")


def _parse_interval(text):
    lo, hi = _parse_colon_floats(text, 2, "--interval")
    if not lo < hi:
        raise _UsageError(f"--interval needs lo < hi, got {text!r}")
    return lo, hi


# --------------------------------------------------------------------------
# commands


def _cmd_catalog(args):
    rows = []
    for method in catalog():
        lo, hi = method.h_range
        rows.append({
            "name": method.name,
            "h_min": lo,
            "h_max": "inf" if math.isinf(hi) else hi,
            "description": method.description,
        })
    return _render(args, "catalog", rows)


def _cmd_conditions(args):
    method = _resolve_method(args.method)
    hs = _h_values(args, VERDICT_SWEEP_POINTS)
    rows = []
    for h in hs:
        A, b = evaluate(method, h)
        rep = check_conditions(A, b)
        rows.append({
            "h": h, "det": rep.det, "tr": rep.tr,
            "a1": rep.a1, "a2": rep.a2, "a3": rep.a3, "a4": rep.a4,
            "excluded": rep.excluded,
        })
    footers = [f"method: {method.name}"]
    extra = {"method": method.name}
    if len(hs) >= 2:
        diag = condition_b_diagnostics(method, hs)
        footers.append(f"small-step consistency: {diag.verdict} "
                       f"(r3 -> {diag.r3[-1]:.6g}, r4 -> {diag.r4[-1]:.6g})")
        extra["diagnostics"] = {
            "r1": diag.r1, "r2": diag.r2, "r3": diag.r3, "r4": diag.r4,
            "verdict": diag.verdict,
        }
    return _render(args, "conditions", rows, footers, **extra)


def _cmd_rates(args):
    method = _resolve_method(args.method)
    params = _params(args)
    hs = _h_values(args, VERDICT_SWEEP_POINTS)
    rows = []
    skipped = []
    usable = []
    for h in hs:
        try:
            cls = rate_function(method, h, args.observable, params)
        except InternalInvariantError:
            raise
        except ValueError as exc:
            skipped.append((h, str(exc)))
            continue
        usable.append(h)
        degenerate = cls.rate.is_degenerate
        rows.append({
            "h": h,
            "regime": cls.regime,
            "log_mgf_coefficient": cls.log_mgf_coefficient,
            "rate_coefficient": math.inf if degenerate else cls.rate.coefficient,
            "modified_coefficient": math.inf if degenerate
                                    else cls.modified_rate.coefficient,
            "gap": math.inf if degenerate
                   else abs(cls.modified_rate.coefficient
                            - continuous_rate(args.observable, params).coefficient),
        })
    if not rows:
        raise _NoApplicableResult(
            f"no admissible step size for {method.name}: {skipped[0][1]}")
    target = continuous_rate(args.observable, params).coefficient
    footers = [f"observable: {args.observable}",
               f"target coefficient: {target!r}"]
    extra = {"method": method.name, "observable": args.observable,
             "target": target}
    if len(usable) >= 2:
        report = preservation_report(method, args.observable, usable, params)
        footers.append(f"verdict: {report.verdict}")
        extra["verdict"] = report.verdict
        extra["symbolic"] = report.symbolic
    for h, reason in skipped:
        footers.append(f"skipped h = {h:g}: {reason}")
    return _render(args, "rates", rows, footers, **extra)


def _cmd_prob(args):
    method = _resolve_method(args.method)
    params = _params(args)
    if not args.h or args.h <= 0:
        raise _UsageError("provide a positive --h")
    interval = _parse_interval(args.interval)
    try:
        predicted = rate_function(method, args.h, args.observable, params) \
            .rate.infimum(*interval)
    except ValueError as exc:
        predicted = None
        rate_note = f"no decay-rate prediction: {exc}"
    else:
        rate_note = None
    rows = []
    for N in _n_values(args):
        law = observable_law(method, args.observable, args.h, N, params)
        prob = interval_probability(law, *interval)
        rows.append({
            "N": N,
            "mean": law.mean,
            "sigma": law.sigma,
            "p": prob.p,
            "log_p": prob.log_p,
            "rate": -prob.log_p / N,
            "predicted": math.nan if predicted is None else predicted,
        })
    footers = [f"method: {method.name}",
               f"observable: {args.observable}",
               f"interval: [{interval[0]:g}, {interval[1]:g}], h = {args.h:g}",
               "rate = -log(p)/N; predicted = infimum of the per-step rate"]
    if rate_note:
        footers.append(rate_note)
    extra = {"method": method.name, "observable": args.observable,
             "h": args.h, "interval": list(interval)}
    return _render(args, "prob", rows, footers, **extra)


def _cmd_msq(args):
    method = _resolve_method(args.method)
    params = _params(args)
    hs = _h_values(args, MSQ_SWEEP_POINTS)
    report = msq_order(method, hs, T0=args.T0, samples=args.samples,
                       seed=args.seed, params=params)
    rows = [{"h": h, "steps": round(args.T0 / h), "error": err}
            for h, err in zip(report.h_values, report.errors)]
    footers = [f"method: {method.name}",
               f"T0 = {args.T0:g}, samples = {args.samples}, seed = {args.seed}",
               f"fitted mean-square order: {report.slope:.4f}"]
    return _render(args, "msq", rows, footers, method=method.name,
                   slope=report.slope, T0=args.T0, samples=args.samples)


def _cmd_simulate(args):
    method = _resolve_method(args.method)
    params = _params(args)
    config = SimConfig(method=method, h=args.h, steps=args.N,
                       samples=args.samples, seed=args.seed, params=params)
    result = simulate_paths(config)
    rows = []
    for observable, stats in (("mean-position", result.summary["position"]),
                              ("mean-velocity", result.summary["velocity"])):
        law = None
        if args.N >= 2:
            law = observable_law(method, observable, args.h, args.N, params)
        rows.append({
            "observable": observable,
            "samples": config.samples,
            "mean": stats["mean"],
            "variance": stats["variance"],
            "min": stats["min"],
            "max": stats["max"],
            "law_mean": "" if law is None else law.mean,
            "law_variance": "" if law is None else law.variance,
        })
    footers = [f"method: {method.name}",
               f"h = {args.h:g}, N = {args.N}, seed = {args.seed}"]
    return _render(args, "simulate", rows, footers, method=method.name,
                   h=args.h, N=args.N, seed=args.seed)


def _definition_fields(definition):
    fields = {}
    for line in definition.splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
    return fields


def _cmd_search(args):
    hits = exact_preservation_search(args.observable)
    if not hits:
        raise _NoApplicableResult(
            f"no exactly-preserving method found for {args.observable}")
    rows = []
    for hit in hits:
        fields = _definition_fields(hit.definition)
        row = {"name": hit.name}
        for key in ("a11", "a12", "a21", "a22", "b1", "b2"):
            row[key] = fields.get(key, "")
        rows.append(row)
    footers = [f"observable: {args.observable}", f"hits: {len(hits)}"]
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        for hit in hits:
            filename = hit.name.replace(":", "_").replace(",", "_") + ".method"
            path = os.path.join(args.out_dir, filename)
            with open(path, "w", encoding="utf-8") as handle:
                handle.write(hit.definition)
            footers.append(f"wrote {path}")
    return _render(args, "search", rows, footers, observable=args.observable)


# --------------------------------------------------------------------------
# parser assembly


def _add_format(parser):
    parser.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_model(parser):
    parser.add_argument("--alpha", type=float, default=1.0,
                        help="noise intensity (default 1)")
    parser.add_argument("--x0", type=float, default=0.0)
    parser.add_argument("--y0", type=float, default=0.0)


def _add_method(parser):
    parser.add_argument("--method", required=True,
                        help="catalog id or path to a method file")


def _add_observable(parser):
    parser.add_argument("--observable", choices=OBSERVABLES,
                        default=MEAN_POSITION)


def _add_steps(parser):
    parser.add_argument("--h", type=float,
                        help="step size; expands to a halving sweep for verdicts")
    parser.add_argument("--h-sweep", dest="h_sweep", metavar="LO:HI:N",
                        help="explicit geometric step sweep")


def _build_parser():
    parser = _Parser(prog="ldp-osc",
                     description="long-horizon decay-rate analysis of one-step "
                                 "methods for the linear stochastic oscillator")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("catalog", help="list built-in methods")
    _add_format(p)
    p.add_argument("--out")
    p.set_defaults(run=_cmd_catalog)

    p = sub.add_parser("conditions", help="admissibility flags per step size")
    _add_method(p)
    _add_steps(p)
    _add_format(p)
    p.add_argument("--out")
    p.set_defaults(run=_cmd_conditions)

    p = sub.add_parser("rates", help="decay-rate coefficients and verdict")
    _add_method(p)
    _add_observable(p)
    _add_steps(p)
    _add_model(p)
    _add_format(p)
    p.add_argument("--out")
    p.set_defaults(run=_cmd_rates)

    p = sub.add_parser("prob", help="exact interval probabilities at finite N")
    _add_method(p)
    _add_observable(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--N", type=int)
    p.add_argument("--N-sweep", dest="N_sweep", metavar="LO:HI:N")
    p.add_argument("--interval", required=True, metavar="LO:HI")
    _add_model(p)
    _add_format(p)
    p.add_argument("--out")
    p.set_defaults(run=_cmd_prob)

    p = sub.add_parser("msq", help="mean-square convergence order")
    _add_method(p)
    _add_steps(p)
    p.add_argument("--T0", type=float, default=1.0, help="comparison horizon")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    _add_model(p)
    _add_format(p)
    p.add_argument("--out")
    p.set_defaults(run=_cmd_msq)

    p = sub.add_parser("simulate", help="Monte Carlo sampling of both observables")
    _add_method(p)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--N", type=int, required=True, help="steps per path")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    _add_model(p)
    _add_format(p)
    p.add_argument("--out")
    p.set_defaults(run=_cmd_simulate)

    p = sub.add_parser("search", help="scan for exactly rate-preserving methods")
    _add_observable(p)
    _add_format(p)
    p.add_argument("--out", dest="out_dir", metavar="DIR",
                   help="directory receiving one method file per hit")
    p.set_defaults(run=_cmd_search)

    return parser


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
        text = args.run(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except _NoApplicableResult as exc:
        print(f"no applicable result: {exc}", file=sys.stderr)
        return 2
    except InternalInvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

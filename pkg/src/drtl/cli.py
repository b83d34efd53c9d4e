"""Command-line driver: ``drtl <command> ...``.

Exit status: 0 on success, 1 when verification finds a counterexample, 2 on
any input or configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import plots
from .interconnect import fanout_profile, leakage_estimate, map_all, write_bitstream
from .netlist import NetlistError, load_bench, network_stats
from .pipeline import levelize, load_pipeline, serialize_pipeline, timing_report
from .power import EnergyModel, compare_to_baseline, estimate, load_baseline, table_csv, table_markdown
from .sim import EXHAUSTIVE_LIMIT, equivalence_check
from .synth import compile_network, load_tlg, node_count_study, serialize_tlg
from .tlg import (
    LIBRARY, ThresholdGate, get_device, get_scheme, margin_analysis, max_safe_relative_deviation,
    monte_carlo_failure_rate,
)

DEFAULT_SEED = 1
DEFAULT_OUT = "drtl_out"


class UsageError(Exception):
    pass


def resolve_seed(arg) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("DRTL_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"DRTL_SEED must be an integer, got {env!r}") from None


def _stem(path) -> str:
    return Path(path).name.split(".")[0]


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(obj, args, table=None):
    """Print ``obj`` as JSON, or ``table`` rows as csv/md when asked to."""
    fmt = getattr(args, "format", "json")
    if fmt == "json" or table is None:
        sys.stdout.write(_dump(obj))
        return
    header, rows = table
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    else:
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(str(v) for v in r) + " |" for r in rows]
    sys.stdout.write("\n".join(lines) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _model(args, clock_default) -> EnergyModel:
    kw = {"clock_period": Fraction(args.clock_ns) if args.clock_ns else Fraction(str(clock_default))}
    if args.e_gate_fj:
        kw["e_gate"] = Fraction(args.e_gate_fj)
    if args.e_fanout_fj:
        kw["e_fanout"] = Fraction(args.e_fanout_fj)
    return EnergyModel(**kw)


# ---------------------------------------------------------------- commands

def cmd_stats(args):
    st = network_stats(load_bench(args.bench)).as_dict()
    rows = [(k, v) for k, v in st.items() if k != "gates_by_kind"]
    rows += [(f"gates[{k}]", v) for k, v in st["gates_by_kind"].items()]
    _emit(st, args, (["stat", "value"], rows))
    return 0


def cmd_synth(args):
    net = load_bench(args.bench)
    scheme = get_scheme(args.scheme)
    tlg = compile_network(net, scheme)
    out = _out_dir(args)
    stem = _stem(args.bench)
    tlg_path = out / f"{stem}.tlg"
    tlg_path.write_text(serialize_tlg(tlg))
    study = node_count_study(net, (2, 3, 4))
    plots.node_counts({stem: study}, out / f"{stem}_node_counts.png")
    result = {
        "bench": stem,
        "scheme": args.scheme,
        "tlg_file": str(tlg_path),
        "nodes": len(tlg.nodes),
        "node_counts": {str(k): v for k, v in study.items()},
        "min_resolution": float(min(margin_analysis(n.gate).resolution for n in tlg.nodes)) if tlg.nodes else None,
    }
    _emit(result, args, (["fanin_limit", "tlg_nodes"], sorted(study.items())))
    return 0


def cmd_pipeline(args):
    tlg = load_tlg(args.tlg)
    clock = float(Fraction(args.clock_ns)) if args.clock_ns else 0.5
    p = levelize(tlg, clock)
    out = _out_dir(args)
    stem = _stem(args.tlg)
    path = out / f"{stem}.staged"
    path.write_text(serialize_pipeline(p))
    plots.stage_profile(p, out / f"{stem}_stages.png")
    result = {"staged_file": str(path), "nodes": len(p.nodes), "buffers": p.buffer_count(),
              **timing_report(p).as_dict()}
    _emit(result, args, (["field", "value"], list(result.items())))
    return 0


def cmd_map(args):
    p = load_pipeline(args.staged)
    out = _out_dir(args)
    stem = _stem(args.staged)
    xbar_dir = out / f"{stem}_crossbar"
    boundaries = []
    for s, cfg in enumerate(map_all(p)):
        write_bitstream(cfg, s, xbar_dir)
        boundaries.append({"boundary": s, "rows": len(cfg.rows), "cols": len(cfg.cols),
                           "on_cells": cfg.n_on, "off_leakage_w": leakage_estimate(cfg)})
    prof = fanout_profile(p)
    result = {
        "crossbar_dir": str(xbar_dir),
        "boundaries": boundaries,
        "total_fanout": prof.total,
        "max_fanout": prof.max,
        "fanout": prof.per_net,
        "leakage_upper_bound_w": sum(b["off_leakage_w"] for b in boundaries),
    }
    _emit(result, args, (["boundary", "rows", "cols", "on_cells", "off_leakage_w"],
                         [tuple(b.values()) for b in boundaries]))
    return 0


def cmd_power(args):
    p = load_pipeline(args.staged)
    model = _model(args, p.clock_period)
    report = estimate(p, model)
    rows = load_baseline(args.baseline)
    stem = _stem(args.staged)
    bench = args.benchmark or stem
    comparisons = [compare_to_baseline(None, r) for r in rows]
    mine = [compare_to_baseline(report, r) for r in rows if r.name == bench]
    flags = [f"{c.name}:{f}" for c in comparisons for f in c.flags]
    result = {
        "benchmark": bench,
        "energy_model": {"e_gate_fj": float(model.e_gate), "e_fanout_fj": float(model.e_fanout),
                         "clock_ns": float(model.clock_period)},
        "report": report.as_dict(),
        "published": [c.as_dict() for c in comparisons],
        "model_vs_published": [c.as_dict() for c in mine],
        "flags": flags,
    }
    out = _out_dir(args)
    (out / f"{stem}_power.json").write_text(_dump(result))
    all_rows = comparisons + mine
    if args.format == "csv":
        (out / f"{stem}_baseline.csv").write_text(table_csv(all_rows))
    elif args.format == "md":
        (out / f"{stem}_baseline.md").write_text(table_markdown(all_rows))
    if comparisons:
        plots.reduction_bars(comparisons, out / "baseline_reductions.png")
    if args.format == "json":
        sys.stdout.write(_dump(result))
    else:
        sys.stdout.write(table_csv(all_rows) if args.format == "csv" else table_markdown(all_rows))
    return 0


def cmd_verify(args):
    ref = load_bench(args.bench)
    p = load_pipeline(args.staged)
    mode = args.mode or ("exhaustive" if len(ref.primary_inputs) <= EXHAUSTIVE_LIMIT else "random")
    device = get_device(args.device) if args.device else None
    seed = resolve_seed(args.seed)
    verdict = equivalence_check(ref, p, mode, args.vectors, seed, device=device)
    result = {"mode": mode, "seed": seed if mode == "random" else None,
              "device": device.name if device else None, "depth": p.depth, **verdict.as_dict()}
    _emit(result, args)
    return 0 if verdict.passed else 1


_GATE_SPEC_RE = re.compile(r"^\s*TLG\s*\(\s*\[([^\]]*)\]\s*,\s*([-+0-9.]+)\s*\)\s*$", re.IGNORECASE)


def _gates_for(target: str):
    path = Path(target)
    if path.is_file():
        p = load_pipeline(path)
        seen = {}
        for n in p.nodes:
            seen.setdefault(str(n.gate), n.gate)
        return seen
    if target == "library":
        return dict(LIBRARY)
    if target.upper() in LIBRARY:
        return {target.upper(): LIBRARY[target.upper()]}
    m = _GATE_SPEC_RE.match(target)
    if not m:
        raise UsageError(f"not a file, library gate or TLG spec: {target!r}")
    gate = ThresholdGate(tuple(int(w) for w in m.group(1).split(",") if w.strip()), m.group(2))
    return {str(gate): gate}


def cmd_montecarlo(args):
    gates = _gates_for(args.target)
    device = get_device(args.device)
    seed = resolve_seed(args.seed)
    try:
        sigmas = [float(s) for s in args.sigma.split(",")]
    except ValueError:
        raise UsageError(f"--sigma expects comma-separated numbers, got {args.sigma!r}") from None
    rows, curves, bounds = [], {}, {}
    for gi, (label, gate) in enumerate(gates.items()):
        bound = max_safe_relative_deviation(gate, device)
        bounds[label] = bound
        rates = []
        for si, sigma in enumerate(sigmas):
            rate = monte_carlo_failure_rate(gate, device, sigma, args.trials, [seed, gi, si])
            rates.append(rate)
            rows.append({"gate": label, "sigma": sigma, "trials": args.trials,
                         "failure_rate": rate, "safe_deviation": bound})
        curves[label] = (sigmas, rates)
    out = _out_dir(args)
    plots.failure_curves(curves, out / "montecarlo.png", bounds)
    result = {"device": device.name, "seed": seed, "rows": rows}
    (out / "montecarlo.json").write_text(_dump(result))
    _emit(result, args, (["gate", "sigma", "trials", "failure_rate", "safe_deviation"],
                         [tuple(r.values()) for r in rows]))
    return 0


def cmd_run_all(args):
    """synth -> pipeline -> map -> power -> verify on one .bench file."""
    stem = _stem(args.bench)
    out = Path(args.out)
    steps = [
        (cmd_synth, {"bench": args.bench}),
        (cmd_pipeline, {"tlg": str(out / f"{stem}.tlg")}),
        (cmd_map, {"staged": str(out / f"{stem}.staged")}),
        (cmd_power, {"staged": str(out / f"{stem}.staged"), "baseline": args.baseline,
                     "benchmark": args.benchmark}),
        (cmd_verify, {"bench": args.bench, "staged": str(out / f"{stem}.staged"), "mode": args.mode,
                      "vectors": args.vectors, "device": None}),
    ]
    code, parts = 0, {}
    for fn, extra in steps:
        ns = argparse.Namespace(**{**vars(args), **extra})
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = fn(ns)
        parts[fn.__name__[4:]] = buf.getvalue()
    if args.format == "json":
        sys.stdout.write(_dump({k: json.loads(v) for k, v in parts.items()}))
    else:
        sys.stdout.write("".join(f"## {k}\n{v}\n" for k, v in parts.items()))
    return code


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drtl", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--format", choices=("json", "csv", "md"), default="json")
        if out:
            p.add_argument("--out", default=DEFAULT_OUT, help="output directory (default: %(default)s)")

    def energy(p):
        p.add_argument("--e-gate-fj", help="energy per gate evaluation (fJ, default 0.3)")
        p.add_argument("--e-fanout-fj", help="energy per driven fan-out (fJ, default 0.2)")
        p.add_argument("--clock-ns", help="clock period (ns, default 0.5)")

    def verify_opts(p):
        p.add_argument("--mode", choices=("exhaustive", "random"))
        p.add_argument("--vectors", type=int, default=10_000)
        p.add_argument("--seed", type=int)

    p = sub.add_parser("stats", help="netlist statistics")
    p.add_argument("bench")
    common(p, out=False)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="synthesize a .bench netlist into a TLG network")
    p.add_argument("bench")
    p.add_argument("--scheme", default="default")
    common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="levelize a TLG network into pipeline stages")
    p.add_argument("tlg")
    p.add_argument("--clock-ns")
    common(p)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("map", help="crossbar bitstreams and fan-out profile")
    p.add_argument("staged")
    common(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("power", help="energy report and LUT-baseline comparison")
    p.add_argument("staged")
    p.add_argument("--baseline", help="baseline CSV (default: bundled table)")
    p.add_argument("--benchmark", help="baseline row to compare against (default: file stem)")
    energy(p)
    common(p)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("verify", help="equivalence of a staged network against its .bench source")
    p.add_argument("bench")
    p.add_argument("staged")
    p.add_argument("--device", help="evaluate through conductance realizations on this device")
    verify_opts(p)
    common(p, out=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("montecarlo", help="conductance-variation failure rates")
    p.add_argument("target", help="staged file, library gate name, 'library', or 'TLG([w,...], b)'")
    p.add_argument("--device", default="ideal")
    p.add_argument("--sigma", default="0.05,0.1,0.2,0.3")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("run-all", help="synth, pipeline, map, power and verify in one go")
    p.add_argument("bench")
    p.add_argument("--scheme", default="default")
    p.add_argument("--baseline")
    p.add_argument("--benchmark")
    energy(p)
    verify_opts(p)
    common(p)
    p.set_defaults(func=cmd_run_all)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, NetlistError, ValueError, KeyError, OSError, ArithmeticError) as e:
        print(f"drtl {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

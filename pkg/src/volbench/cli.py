"""Command-line interface: ``volbench <subcommand> ...``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import metrics as M
from .analysis import (
    DepolarizingPredictor,
    VolumetricGrid,
    discrepancy_report,
    implied_region,
    lattice_depths,
    lattice_widths,
    pareto_frontier,
    predict,
    quantum_volume,
    shape_lattice,
)
from .compiler import CompilationPolicy, NativeGateSet, compile_circuit
from .ensembles import DEFAULT_K, FAMILIES, EnsembleSpec, generate
from .errors import PipelineError, VolbenchError
from .pipeline import BenchmarkConfig, load_config, run_benchmark, sample_seed
from .plot import PlotSpec, render_plot
from .simulator import NoiseModel, OutcomeRecord, ideal_distribution, sample_noisy

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


# ---------------------------------------------------------------------------
# I/O helpers


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise VolbenchError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise VolbenchError(f"{path}: invalid JSON: {exc}") from None


def _emit(obj, out):
    text = obj if isinstance(obj, str) else json.dumps(obj, sort_keys=True, indent=1) + "\n"
    if out:
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_json(args):
    return _read_json(args.config) if args.config else {}


def _section(args, name):
    return _config_json(args).get(name, {}) or {}


def _params(pairs):
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise _UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _noise(args):
    base = _section(args, "noise")
    if args.noise:
        base = _read_json(args.noise)
    base = dict(base)
    for name in ("eps1", "eps2", "eps_idle", "eps_readout", "coherent_overrotation"):
        v = getattr(args, name, None)
        if v is not None:
            base[name] = v
    return NoiseModel.from_json(base)


def _native(args):
    if getattr(args, "native", None):
        return NativeGateSet.from_json(_read_json(args.native))
    comp = _section(args, "compiler")
    return NativeGateSet.from_json(comp["native"]) if comp.get("native") else None


def _load_spec(path):
    return EnsembleSpec.from_json(_read_json(path))


def _load_grid(path):
    return VolumetricGrid.from_json(_read_json(path))


# ---------------------------------------------------------------------------
# subcommands


def cmd_lattice(args):
    lat = _section(args, "lattice")
    max_w = args.max_w if args.max_w is not None else lat.get("max_w")
    max_d = args.max_d if args.max_d is not None else lat.get("max_d")
    if max_w is None or max_d is None:
        raise _UsageError("lattice needs --max-w and --max-d")
    depth_base = args.depth_base or lat.get("depth_base", 2)
    width_base = args.width_base or lat.get("width_base", 1.2)
    zero = args.zero_depth or lat.get("include_zero_depth", False)
    shapes = shape_lattice(max_w, max_d, depth_base, width_base, zero)
    widths = lattice_widths(max_w, width_base)
    depths = lattice_depths(max_d, depth_base, zero)
    if args.out:
        _emit({"widths": widths, "depths": depths, "shapes": [[s.w, s.d] for s in shapes]}, args.out)
    print("widths: " + " ".join(map(str, widths)))
    print("depths: " + " ".join(map(str, depths)))
    return EXIT_OK


def _bench_defaults(args):
    bench = _section(args, "benchmark")
    family = args.family or bench.get("family")
    if family is None:
        raise _UsageError("no family given (use --family or a config)")
    seed = args.seed if args.seed is not None else bench.get("seed", 0)
    k = getattr(args, "K", None)
    k = k if k is not None else bench.get("K", DEFAULT_K)
    params = dict(bench.get("params", {}))
    params.update(_params(getattr(args, "param", None)))
    return family, int(seed), int(k), params


def cmd_generate(args):
    family, seed, k, params = _bench_defaults(args)
    spec = generate(family, (args.w, args.d), K=k, seed=seed, **params)
    _emit(spec.to_json(), args.out)
    return EXIT_OK


def cmd_compile(args):
    spec = _load_spec(args.manifest)
    policy = CompilationPolicy.parse(args.policy) if args.policy else spec.compilation_policy
    native = _native(args)
    compiled = tuple(compile_circuit(c, policy, native) for c in spec.circuits)
    _emit(dataclasses.replace(spec, circuits=compiled).to_json(), args.out)
    return EXIT_OK


def cmd_simulate(args):
    spec = _load_spec(args.manifest)
    noise = _noise(args)
    seed = args.seed if args.seed is not None else _section(args, "benchmark").get("seed", 0)
    shots = args.shots or _section(args, "benchmark").get("shots", 1000)
    w, d = spec.shape
    records = [
        sample_noisy(
            c, noise, shots, sample_seed(seed, spec.family, w, d, i),
            circuit_id=c.metadata.get("id", str(i)),
        ).to_json()
        for i, c in enumerate(spec.circuits)
    ]
    _emit(records, args.out)
    return EXIT_OK


def cmd_score(args):
    spec = _load_spec(args.manifest)
    records = [OutcomeRecord.from_json(r) for r in _read_json(args.outcomes)]
    if len(records) != len(spec.circuits):
        raise VolbenchError(f"{len(records)} outcome records for {len(spec.circuits)} circuits")
    metrics = _section(args, "metrics")
    criterion = spec.criterion
    if args.criterion:
        criterion = M.criterion_from_json(_read_json(args.criterion))
    elif metrics.get("criterion"):
        criterion = M.criterion_from_json(metrics["criterion"])
    rule = M.rule_from_json(metrics["rule"]) if metrics.get("rule") else spec.family_rule
    seed = args.seed if args.seed is not None else 0
    scores = []
    for c, r in zip(spec.circuits, records):
        ideal = ideal_distribution(c)
        scores.append(M.score_circuit(r, ideal, criterion, c.metadata.get("ideal_outcome"), seed=seed))
    agg = M.score_ensemble(scores, rule)
    _emit({"circuits": [s.to_json() for s in scores], "ensemble": agg.to_json()}, args.out)
    return EXIT_OK


def cmd_frontier(args):
    front = pareto_frontier(_load_grid(args.grid))
    _emit({"frontier": [list(p) for p in front]}, args.out)
    return EXIT_OK


def cmd_qv(args):
    grid = _load_grid(args.grid)
    n = quantum_volume(grid)
    if args.out:
        _emit({"log2_quantum_volume": n, "implied_region": [list(s) for s in implied_region(grid, n)]}, args.out)
    print(n)
    return EXIT_OK


def _shapes_from(args):
    if args.config:
        return list(load_config(args.config).shapes)
    if args.max_w is None or args.max_d is None:
        raise _UsageError("predict needs --config or --max-w/--max-d")
    return shape_lattice(args.max_w, args.max_d)


def cmd_predict(args):
    family, seed, _, params = _bench_defaults(args)
    noise = _section(args, "noise")
    predictor = DepolarizingPredictor(
        args.eps1 if args.eps1 is not None else noise.get("eps1", 5e-4),
        args.eps2 if args.eps2 is not None else noise.get("eps2", 3e-3),
        noise.get("eps_idle", 0.0),
    )
    gen = _Generator(family, seed, params)
    grid = predict(_shapes_from(args), gen, predictor, _native(args))
    grid.family = family
    _emit(grid.dumps(), args.out)
    return EXIT_OK


@dataclasses.dataclass(frozen=True)
class _Generator:
    family: str
    seed: int
    params: dict

    def __call__(self, shape):
        return generate(self.family, shape, K=1, seed=self.seed, **self.params)


def cmd_report(args):
    flags = discrepancy_report(_load_grid(args.observed), _load_grid(args.predicted))
    _emit({"flags": [f.to_json() for f in flags]}, args.out)
    return EXIT_OK


def _plot_spec(args):
    return PlotSpec(
        axes=args.axes, shading=args.shading, frontier=not args.no_frontier, qv=args.qv,
        frontier_only=args.frontier_only, output=args.out,
    )


def cmd_plot(args):
    grids = [_load_grid(p) for p in args.grid]
    predicted = _load_grid(args.predicted) if args.predicted else None
    svg = render_plot(_plot_spec(args), grids, predicted)
    _emit(svg, args.out)
    return EXIT_OK


def cmd_run(args):
    if not args.config:
        raise _UsageError("run needs --config")
    raw = _read_json(args.config)
    if args.seed is not None:
        raw.setdefault("benchmark", {})["seed"] = args.seed
    config = BenchmarkConfig.from_json(raw)
    out = args.out or config.output
    if not out:
        raise _UsageError("run needs --out or an output entry in the config")
    grid = run_benchmark(config, out, workers=args.workers)
    predictor = DepolarizingPredictor(config.noise.eps1, config.noise.eps2, config.noise.eps_idle)
    gen = _Generator(config.family, config.seed, config.family_params)
    predicted = predict(config.shapes, gen, predictor, config.native)
    predicted.family = config.family
    _emit(predicted.dumps(), os.path.join(out, "predicted.json"))
    flags = discrepancy_report(grid, predicted)
    _emit({"flags": [f.to_json() for f in flags]}, os.path.join(out, "report.json"))
    svg = render_plot(PlotSpec(axes="log", shading=args.shading), [grid], predicted)
    _emit(svg, os.path.join(out, "plot.svg"))
    front = pareto_frontier(grid) if grid.tested() else []
    print(json.dumps({"frontier": [list(p) for p in front], "flags": len(flags)}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--config", help="benchmark config JSON")
    common.add_argument("--out", help="output path (stdout when omitted)")

    p = _Parser(prog="volbench", description="Volumetric benchmarking of quantum circuits.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("lattice", cmd_lattice, "print the width/depth shape lattice")
    sp.add_argument("--max-w", type=int)
    sp.add_argument("--max-d", type=int)
    sp.add_argument("--depth-base", type=float)
    sp.add_argument("--width-base", type=float)
    sp.add_argument("--zero-depth", action="store_true")

    sp = add("generate", cmd_generate, "write an ensemble manifest")
    sp.add_argument("--family", choices=sorted(FAMILIES))
    sp.add_argument("--w", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--K", type=int)
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")

    sp = add("compile", cmd_compile, "compile every circuit of a manifest")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--policy", choices=[p.value for p in CompilationPolicy])
    sp.add_argument("--native", help="native gate set JSON")

    sp = add("simulate", cmd_simulate, "sample noisy outcomes for a manifest")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--shots", type=int)
    sp.add_argument("--noise", help="noise model JSON")
    for name in ("eps1", "eps2", "eps_idle", "eps_readout", "coherent_overrotation"):
        sp.add_argument("--" + name.replace("_", "-"), dest=name, type=float)

    sp = add("score", cmd_score, "score outcome records against a manifest")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--outcomes", required=True)
    sp.add_argument("--criterion", help="criterion JSON overriding the family default")

    sp = add("frontier", cmd_frontier, "Pareto frontier of a grid")
    sp.add_argument("--grid", required=True)

    sp = add("qv", cmd_qv, "log2 quantum volume of a grid")
    sp.add_argument("--grid", required=True)

    sp = add("predict", cmd_predict, "depolarizing-model predicted grid")
    sp.add_argument("--family", choices=sorted(FAMILIES))
    sp.add_argument("--max-w", type=int)
    sp.add_argument("--max-d", type=int)
    sp.add_argument("--eps1", type=float)
    sp.add_argument("--eps2", type=float)
    sp.add_argument("--native", help="native gate set JSON")
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")

    sp = add("report", cmd_report, "observed-vs-predicted discrepancy flags")
    sp.add_argument("--observed", required=True)
    sp.add_argument("--predicted", required=True)

    sp = add("plot", cmd_plot, "render grids as SVG")
    sp.add_argument("--grid", action="append", required=True)
    sp.add_argument("--predicted")
    sp.add_argument("--axes", choices=("log", "linear"), default="log")
    sp.add_argument("--shading", choices=("binary", "score"), default="binary")
    sp.add_argument("--qv", action="store_true", help="outline quantum-volume squares")
    sp.add_argument("--frontier-only", action="store_true")
    sp.add_argument("--no-frontier", action="store_true")

    sp = add("run", cmd_run, "full pipeline from a config")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--shading", choices=("binary", "score"), default="binary")
    return p


def _diagnostic(exc):
    d = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, PipelineError):
        d["shape"] = list(exc.shape)
        d["index"] = exc.index
        d["cause"] = type(exc.cause).__name__
    return json.dumps(d)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(f"volbench {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VolbenchError as exc:
        print(_diagnostic(exc), file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(json.dumps({"error": "internal", "type": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

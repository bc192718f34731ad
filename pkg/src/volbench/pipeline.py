"""Generate, compile, simulate and score a benchmark over a shape lattice."""
from __future__ import annotations

import json
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import metrics as M
from .analysis import GridEntry, VolumetricGrid, shape_lattice
from .compiler import CompilationPolicy, NativeGateSet, compile_circuit
from .ensembles import DEFAULT_K, FAMILIES, Shape, generate
from .errors import InvalidParameter, PipelineError, ShapeUnsupported, UniformOutcome, VolbenchError
from .simulator import DEFAULT_WIDTH_CAP, NoiseModel, ideal_distribution, sample_noisy

_SECTIONS = {"benchmark", "lattice", "noise", "compiler", "metrics", "pipeline", "output"}


@dataclass(frozen=True)
class BenchmarkConfig:
    family: str
    shapes: tuple
    family_params: dict = field(default_factory=dict)
    K: int = DEFAULT_K
    seed: int = 0
    shots: int = 1000
    noise: NoiseModel = field(default_factory=NoiseModel)
    native: NativeGateSet | None = None
    policy: CompilationPolicy | None = None
    criterion: object = None
    rule: object = None
    workers: int = 1
    width_cap: int = DEFAULT_WIDTH_CAP
    output: str | None = None
    lattice: dict | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidParameter(f"unknown family {self.family!r}")
        if not self.shapes:
            raise InvalidParameter("config selects no shapes")
        if self.shots < 1 or self.K < 1 or self.workers < 1:
            raise InvalidParameter("shots, K and workers must be positive")
        if self.criterion is not None:
            M.validate_criterion(self.criterion)

    @classmethod
    def from_json(cls, d):
        if not isinstance(d, dict):
            raise InvalidParameter("config must be a JSON object")
        unknown = set(d) - _SECTIONS
        if unknown:
            raise InvalidParameter(f"unknown config sections: {sorted(unknown)}")
        try:
            bench = d["benchmark"]
            lat = d.get("lattice", {})
            if "shapes" in lat:
                shapes = tuple(Shape(int(w), int(dd)) for w, dd in lat["shapes"])
                lattice = None
            else:
                lattice = {
                    "max_w": int(lat.get("max_w", 4)),
                    "max_d": int(lat.get("max_d", 16)),
                    "depth_base": lat.get("depth_base", 2),
                    "width_base": lat.get("width_base", 1.2),
                    "include_zero_depth": bool(lat.get("include_zero_depth", False)),
                }
                shapes = tuple(shape_lattice(**lattice))
            comp = d.get("compiler", {})
            mets = d.get("metrics", {})
            pipe = d.get("pipeline", {})
            return cls(
                family=bench["family"],
                shapes=shapes,
                family_params=dict(bench.get("params", {})),
                K=int(bench.get("K", DEFAULT_K)),
                seed=int(bench.get("seed", 0)),
                shots=int(bench.get("shots", 1000)),
                noise=NoiseModel.from_json(d.get("noise", {})),
                native=NativeGateSet.from_json(comp["native"]) if comp.get("native") else None,
                policy=CompilationPolicy.parse(comp["policy"]) if comp.get("policy") else None,
                criterion=M.criterion_from_json(mets["criterion"]) if mets.get("criterion") else None,
                rule=M.rule_from_json(mets["rule"]) if mets.get("rule") else None,
                workers=int(pipe.get("workers", 1)),
                width_cap=int(pipe.get("width_cap", DEFAULT_WIDTH_CAP)),
                output=d.get("output"),
                lattice=lattice,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameter(f"malformed config: {exc}") from None

    def to_json(self):
        lat = dict(self.lattice) if self.lattice else {"shapes": [[s.w, s.d] for s in self.shapes]}
        return {
            "benchmark": {
                "family": self.family, "params": self.family_params, "K": self.K,
                "seed": self.seed, "shots": self.shots,
            },
            "lattice": lat,
            "noise": self.noise.to_json(),
            "compiler": {
                "native": self.native.to_json() if self.native else None,
                "policy": self.policy.value if self.policy else None,
            },
            "metrics": {
                "criterion": M.criterion_to_json(self.criterion) if self.criterion else None,
                "rule": M.rule_to_json(self.rule) if self.rule else None,
            },
            "pipeline": {"workers": self.workers, "width_cap": self.width_cap},
            "output": self.output,
        }


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return BenchmarkConfig.from_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise InvalidParameter(f"{path}: invalid JSON: {exc}") from None


def sample_seed(seed, family, w, d, index):
    """Shot-sampling seed for one circuit, independent of scheduling."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(family.encode()), w, d, index, 1])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class _Task:
    shape: Shape
    index: int
    circuit: object
    policy: CompilationPolicy
    native: object
    noise: NoiseModel
    shots: int
    seed: int
    criterion: object
    width_cap: int


def _run_task(task):
    c = task.circuit
    try:
        compiled = compile_circuit(c, task.policy, task.native)
        outcome = c.metadata.get("ideal_outcome")
        ideal = None
        if not isinstance(task.criterion, (M.CorrectOutcome, M.HammingBall)):
            ideal = ideal_distribution(compiled, task.width_cap)
        record = sample_noisy(
            compiled, task.noise, task.shots, task.seed, task.width_cap, circuit_id=c.metadata.get("id"),
        )
        score = M.score_circuit(record, ideal, task.criterion, outcome, seed=task.seed)
        return record, score, None
    except UniformOutcome as exc:
        return None, None, str(exc)
    except VolbenchError as exc:
        raise PipelineError(tuple(task.shape), task.index, exc) from exc


def _prepare(config, shape):
    try:
        spec = generate(config.family, shape, K=config.K, seed=config.seed, **config.family_params)
    except ShapeUnsupported:
        return None
    except VolbenchError as exc:
        raise PipelineError(tuple(shape), None, exc) from exc
    return spec


def _write(path, text):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def run_benchmark(config, out_dir=None, workers=None):
    """Run ``config`` over its lattice and return the observed grid.

    Artifacts (ensemble manifests, outcome records, per-circuit scores, the
    grid) are written under ``out_dir`` when given.  Output does not depend
    on ``workers``.
    """
    out_dir = out_dir or config.output
    workers = workers or config.workers
    specs = {}
    tasks = []
    for shape in config.shapes:
        spec = _prepare(config, shape)
        specs[shape] = spec
        if spec is None:
            continue
        crit = config.criterion or spec.criterion
        policy = config.policy or spec.compilation_policy
        for i, c in enumerate(spec.circuits):
            tasks.append(_Task(
                shape, i, c, policy, config.native, config.noise, config.shots,
                sample_seed(config.seed, config.family, shape.w, shape.d, i), crit, config.width_cap,
            ))

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_run_task(t) for t in tasks]

    by_shape = {}
    for t, r in zip(tasks, results):
        by_shape.setdefault(t.shape, []).append(r)

    first = next((s for s in specs.values() if s is not None), None)
    criterion = config.criterion or (first.criterion if first else None)
    rule = config.rule or (first.family_rule if first else None)
    info = {
        "family": config.family,
        "K": config.K,
        "N": config.shots,
        "seed": config.seed,
        "noise": config.noise.to_json(),
    }
    if criterion is not None:
        info["criterion"] = criterion.kind
        info["threshold"] = criterion.threshold
        if hasattr(criterion, "confidence"):
            info["confidence"] = criterion.confidence
    if rule is not None:
        info["rule"] = M.rule_to_json(rule)
    grid = VolumetricGrid(config.family, {}, info)

    for shape in config.shapes:
        w, d = shape
        spec = specs[shape]
        tag = f"w{w}_d{d}"
        if spec is None:
            grid.set(w, d, GridEntry(False, metadata={"reason": "shape unsupported"}))
            continue
        rows = by_shape.get(shape, [])
        reasons = [r[2] for r in rows if r[2] is not None]
        if out_dir:
            _write(os.path.join(out_dir, "ensembles", f"{tag}.json"), _dump(spec.to_json()))
        if reasons or not rows:
            grid.set(w, d, GridEntry(False, n_circuits=len(rows), metadata={"reason": "uniform ideal output"}))
            continue
        scores = [r[1] for r in rows]
        agg = M.score_ensemble(scores, config.rule or spec.family_rule)
        grid.set(w, d, GridEntry(True, agg.passed, float(agg.score), len(rows)))
        if out_dir:
            _write(os.path.join(out_dir, "outcomes", f"{tag}.json"), _dump([r[0].to_json() for r in rows]))
            _write(os.path.join(out_dir, "scores", f"{tag}.json"), _dump([s.to_json() for s in scores]))
    if out_dir:
        _write(os.path.join(out_dir, "grid.json"), grid.dumps())
        _write(os.path.join(out_dir, "config.json"), _dump(config.to_json()))
    return grid

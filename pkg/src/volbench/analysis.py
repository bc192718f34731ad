"""Volumetric grids, frontiers, quantum volume and depolarizing predictions."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import metrics as M
from .circuit import flatten
from .compiler import compile_circuit
from .distribution import Distribution
from .ensembles import Shape
from .errors import EmptyGrid, InvalidParameter, LatticeMismatch, ShapeUnsupported, UniformOutcome
from .simulator import gate_class, ideal_distribution


@dataclass(frozen=True)
class GridEntry:
    tested: bool
    passed: bool | None = None
    score: float | None = None
    n_circuits: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.tested and (self.passed is not None or self.score is not None):
            raise InvalidParameter("untested entries carry no pass or score")


@dataclass
class VolumetricGrid:
    family: str
    entries: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        for w, d in self.entries:
            if w < 1 or d < 0:
                raise InvalidParameter(f"grid key ({w}, {d}) is not a valid shape")

    def set(self, w, d, entry):
        if w < 1 or d < 0:
            raise InvalidParameter(f"grid key ({w}, {d}) is not a valid shape")
        self.entries[(w, d)] = entry

    def tested(self):
        return {k: e for k, e in self.entries.items() if e.tested}

    @property
    def widths(self):
        return sorted({w for w, _ in self.entries})

    @property
    def depths(self):
        return sorted({d for _, d in self.entries})

    def to_json(self):
        rows = []
        for (w, d), e in sorted(self.entries.items()):
            row = {"w": w, "d": d, "tested": e.tested, "pass": e.passed, "score": e.score, "n_circuits": e.n_circuits}
            if e.metadata:
                row["metadata"] = e.metadata
            rows.append(row)
        out = {"family": self.family, "entries": rows}
        if self.info:
            out["info"] = self.info
        return out

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, d):
        try:
            grid = cls(d["family"], {}, dict(d.get("info", {})))
            for row in d["entries"]:
                grid.set(int(row["w"]), int(row["d"]), GridEntry(
                    bool(row["tested"]),
                    row.get("pass") if row["tested"] else None,
                    row.get("score") if row["tested"] else None,
                    int(row.get("n_circuits", 0)),
                    dict(row.get("metadata", {})),
                ))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameter(f"malformed grid: {exc}") from None
        return grid

    @classmethod
    def loads(cls, text):
        return cls.from_json(json.loads(text))


# ---------------------------------------------------------------------------
# lattice


def _round_half_away(x):
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def lattice_widths(max_w, width_base=1.2):
    if width_base <= 1:
        raise InvalidParameter("width_base must exceed 1")
    out = []
    k = 0
    while True:
        w = _round_half_away(width_base**k)
        if w > max_w:
            return out
        if not out or w != out[-1]:
            out.append(w)
        k += 1


def lattice_depths(max_d, depth_base=2, include_zero_depth=False):
    if depth_base <= 1:
        raise InvalidParameter("depth_base must exceed 1")
    out = [0] if include_zero_depth else []
    k = 0
    while depth_base**k <= max_d:
        d = _round_half_away(depth_base**k)
        if d not in out:
            out.append(d)
        k += 1
    return out


def shape_lattice(max_w, max_d, depth_base=2, width_base=1.2, include_zero_depth=False):
    """Shapes on the width-by-depth lattice, ordered by (w, d)."""
    if max_w < 1 or max_d < 1:
        raise InvalidParameter("max_w and max_d must be at least 1")
    widths = lattice_widths(max_w, width_base)
    depths = lattice_depths(max_d, depth_base, include_zero_depth)
    return [Shape(w, d) for w in widths for d in depths]


# ---------------------------------------------------------------------------
# frontier and quantum volume


def pareto_frontier(grid):
    """``[(w, d_max)]``: deepest passing depth at each tested width."""
    tested = grid.tested()
    if not tested:
        raise EmptyGrid("grid has no tested entries")
    best = {}
    for (w, d), e in tested.items():
        if e.passed and d >= best.get(w, -1):
            best[w] = d
    return sorted(best.items())


def quantum_volume(grid):
    """Largest n with every tested square (m, m), m <= n, passing.

    Returned as the integer exponent, i.e. log2 of the volume.
    """
    squares = sorted((w, e) for (w, d), e in grid.tested().items() if w == d)
    if not squares:
        raise EmptyGrid("grid has no tested square shapes")
    n = 0
    for m, e in squares:
        if not e.passed:
            break
        n = m
    return n


def implied_region(grid, n=None):
    """Lattice shapes with ``w <= n`` and ``d <= n`` (the implied-success region)."""
    if n is None:
        n = quantum_volume(grid)
    return sorted((w, d) for (w, d) in grid.entries if w <= n and d <= n)


# ---------------------------------------------------------------------------
# prediction


@dataclass(frozen=True)
class DepolarizingPredictor:
    eps1: float = 5e-4
    eps2: float = 3e-3
    eps_idle: float = 0.0

    def __post_init__(self):
        for name in ("eps1", "eps2", "eps_idle"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise InvalidParameter(f"{name} must lie in [0, 1]")

    def rate(self, cls):
        return {"1q": self.eps1, "2q": self.eps2, "idle": self.eps_idle}.get(cls, 0.0)

    def to_json(self):
        return {"eps1": self.eps1, "eps2": self.eps2, "eps_idle": self.eps_idle}

    @classmethod
    def from_json(cls, d):
        return cls(float(d.get("eps1", 0)), float(d.get("eps2", 0)), float(d.get("eps_idle", 0)))


def gate_counts(circuit):
    """Number of noisy gate locations per noise class."""
    counts = {"1q": 0, "2q": 0, "idle": 0}
    for g in flatten(circuit):
        cls = gate_class(g)
        if cls is not None:
            counts[cls] += 1
    return counts


def success_fidelity(circuit, predictor):
    """Probability that no gate location of ``circuit`` suffers an error."""
    counts = gate_counts(circuit)
    return math.prod((1 - predictor.rate(c)) ** n for c, n in counts.items())


def score_threshold(criterion, ideal):
    """Smallest expected score that counts as a pass for ``criterion``."""
    if isinstance(criterion, M.TvdBelow):
        return 1 - criterion.threshold
    if isinstance(criterion, M.CrossEntropyBelow):
        return math.exp(M._entropy(ideal) - criterion.threshold)
    return criterion.threshold


def predicted_score(ideal, fidelity, criterion, ideal_outcome=None):
    """Score of the mixture ``F * ideal + (1 - F) * uniform``.

    For a definite outcome this is ``F + (1 - F) / 2**w``; for heavy-output
    scoring it is ``F * h_ideal + (1 - F) * |heavy| / 2**w``.
    """
    w = ideal.width
    u = (1 - fidelity) / 2**w
    if isinstance(criterion, M.CrossEntropyBelow) and u > 0 and len(ideal.probs) < 2**w:
        return 0.0
    probs = {s: fidelity * p for s, p in ideal.probs.items()}
    if u > 0:
        for i in range(2**w):
            s = format(i, f"0{w}b")
            probs[s] = probs.get(s, 0.0) + u
    return M.expected_score(Distribution(w, probs), ideal, criterion, ideal_outcome)[0]


def predict(shapes, generator, predictor, native=None):
    """Grid of depolarizing-model predictions.

    ``generator(shape)`` returns an EnsembleSpec; its first circuit is
    compiled under the ensemble's policy and used as the representative.
    Shapes the family cannot build, or whose ideal output is uniform under a
    heavy-output criterion, are left untested.
    """
    grid = VolumetricGrid("")
    for shape in shapes:
        w, d = shape
        try:
            spec = generator(Shape(w, d))
        except ShapeUnsupported:
            grid.set(w, d, GridEntry(False))
            continue
        grid.family = spec.family
        c = spec.circuits[0]
        compiled = compile_circuit(c, spec.compilation_policy, native)
        ideal = ideal_distribution(compiled)
        fid = success_fidelity(compiled, predictor)
        outcome = c.metadata.get("ideal_outcome")
        try:
            score = predicted_score(ideal, fid, spec.criterion, outcome)
        except UniformOutcome:
            grid.set(w, d, GridEntry(False))
            continue
        if isinstance(spec.family_rule, M.MeanScoreAbove):
            need = spec.family_rule.threshold
        else:
            need = score_threshold(spec.criterion, ideal)
        grid.set(w, d, GridEntry(True, bool(score >= need - 1e-12), float(score), 1, {"fidelity": fid}))
    grid.info = {"predictor": predictor.to_json()}
    return grid


# ---------------------------------------------------------------------------
# discrepancies


NON_MARKOVIAN_NOTE = (
    "depth deficiency at width 1 suggests non-Markovian or coherent errors "
    "that a depolarizing model cannot capture"
)


@dataclass(frozen=True)
class Flag:
    kind: str
    w: int
    detail: str = ""
    annotation: str = ""

    def to_json(self):
        out = {"kind": self.kind, "w": self.w, "detail": self.detail}
        if self.annotation:
            out["annotation"] = self.annotation
        return out


def discrepancy_report(observed, predicted):
    """Flags where observed results fall short of the prediction."""
    if set(observed.entries) != set(predicted.entries):
        raise LatticeMismatch("observed and predicted grids cover different shapes")
    depths = observed.depths
    flags = []
    obs_front = dict(pareto_frontier(observed)) if observed.tested() else {}
    pred_front = dict(pareto_frontier(predicted)) if predicted.tested() else {}
    for w in observed.widths:
        keys = [(w, d) for d in depths if (w, d) in observed.entries]
        tested = [k for k in keys if observed.entries[k].tested and predicted.entries[k].tested]
        bad = [k for k in tested if predicted.entries[k].passed and not observed.entries[k].passed]
        if tested and 2 * len(bad) >= len(tested):
            flags.append(Flag(
                "WidthDeficiency", w,
                f"{len(bad)} of {len(tested)} tested depths fail despite a predicted pass",
            ))
        if w in obs_front and w in pred_front:
            lo, hi = depths.index(obs_front[w]), depths.index(pred_front[w])
            if hi - lo > 1:
                flags.append(Flag(
                    "DepthDeficiency", w,
                    f"observed frontier depth {obs_front[w]} vs predicted {pred_front[w]}",
                    NON_MARKOVIAN_NOTE if w == 1 else "",
                ))
    return flags

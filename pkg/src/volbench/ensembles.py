"""Benchmark circuit families: (w, d, seed, K) -> ensemble of circuits."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import metrics as M
from .circuit import (
    Circuit,
    GateApplication,
    Layer,
    all_qubits_layer,
    circuit_from_json,
    circuit_to_json,
    gate,
    layers_from_gates,
    permute_all,
    subroutine,
    su4_gate,
)
from .compiler import CompilationPolicy, clifford_synthesis
from .errors import InvalidParameter, ShapeUnsupported
from .stabilizer import (
    pauli_tableau,
    random_clifford,
    tableau_compose,
    tableau_identity,
    tableau_inverse,
    tableau_of,
)

DEFAULT_K = 30


@dataclass(frozen=True)
class Shape:
    w: int
    d: int

    def __post_init__(self):
        if self.w < 1 or self.d < 0:
            raise InvalidParameter(f"invalid shape ({self.w}, {self.d})")

    def __iter__(self):
        return iter((self.w, self.d))


@dataclass(frozen=True)
class EnsembleSpec:
    family: str
    shape: Shape
    variant: str
    circuits: tuple
    criterion: object
    family_rule: object
    compilation_policy: CompilationPolicy
    ideal_outcomes: tuple | None = None
    seed: int | None = None
    K: int | None = None
    parameters: dict = field(default_factory=dict)
    measure: str = ""

    def to_json(self):
        return {
            "family": self.family,
            "shape": [self.shape.w, self.shape.d],
            "variant": self.variant,
            "K": self.K,
            "seed": self.seed,
            "parameters": self.parameters,
            "measure": self.measure,
            "criterion": M.criterion_to_json(self.criterion),
            "family_rule": M.rule_to_json(self.family_rule),
            "compilation_policy": self.compilation_policy.value,
            "ideal_outcomes": None if self.ideal_outcomes is None else list(self.ideal_outcomes),
            "circuits": [circuit_to_json(c) for c in self.circuits],
        }

    @classmethod
    def from_json(cls, d):
        try:
            return cls(
                family=d["family"],
                shape=Shape(*d["shape"]),
                variant=d["variant"],
                circuits=tuple(circuit_from_json(c, f"circuits[{i}]") for i, c in enumerate(d["circuits"])),
                criterion=M.criterion_from_json(d["criterion"]),
                family_rule=M.rule_from_json(d["family_rule"]),
                compilation_policy=CompilationPolicy.parse(d["compilation_policy"]),
                ideal_outcomes=None if d.get("ideal_outcomes") is None else tuple(d["ideal_outcomes"]),
                seed=d.get("seed"),
                K=d.get("K"),
                parameters=d.get("parameters", {}),
                measure=d.get("measure", ""),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidParameter(f"malformed ensemble manifest: {exc}") from None


def circuit_rng(seed, family, w, d, index):
    """Generator for one circuit; independent of generation order."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(family.encode()), w, d, index])
    return np.random.default_rng(ss)


def _meta(family, w, d, seed, index, **extra):
    m = {"family": family, "shape": [w, d], "seed": seed, "index": index, "id": f"{family}-w{w}-d{d}-{index}"}
    m.update(extra)
    return m


def _shape(shape):
    return shape if isinstance(shape, Shape) else Shape(*shape)


def _check_k(K):
    if int(K) != K or K < 1:
        raise InvalidParameter(f"K must be a positive integer, got {K}")
    return int(K)


# ---------------------------------------------------------------------------
# quantum volume


def haar_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    q = q * (diag / np.abs(diag))
    return q / np.linalg.det(q) ** (1 / n)


def qv_ensemble(shape, K=DEFAULT_K, seed=0):
    w, d = _shape(shape)
    if w < 2:
        raise ShapeUnsupported("quantum-volume circuits need w >= 2")
    K = _check_k(K)
    circuits = []
    for i in range(K):
        rng = circuit_rng(seed, "qv", w, d, i)
        layers = []
        for _ in range(d):
            perm = rng.permutation(w).tolist()
            blocks = [su4_gate(haar_unitary(4, rng), 2 * k, 2 * k + 1) for k in range(w // 2)]
            body = Circuit(w, (Layer.of(permute_all(perm)), Layer(tuple(blocks))))
            layers.append(Layer.of(subroutine("qv_layer", body)))
        circuits.append(Circuit(w, tuple(layers), metadata=_meta("qv", w, d, seed, i)))
    return EnsembleSpec(
        "qv", Shape(w, d), "Sampled", tuple(circuits), M.HeavyOutput(), M.MeanScoreAbove(2 / 3),
        CompilationPolicy.FREE, None, seed, K, {},
        "uniform permutation then Haar SU(4) on consecutive pairs, per layer",
    )


# ---------------------------------------------------------------------------
# randomized benchmarking


def _clifford_layer(t, label="clifford", targets=None):
    return Layer.of(subroutine(label, clifford_synthesis(t), targets))


def clifford_rb_ensemble(shape, K=DEFAULT_K, seed=0):
    w, d = _shape(shape)
    if d == 0:
        raise ShapeUnsupported("Clifford RB needs d >= 1")
    K = _check_k(K)
    circuits = []
    for i in range(K):
        rng = circuit_rng(seed, "clifford_rb", w, d, i)
        total = tableau_identity(w)
        layers = []
        for _ in range(d - 1):
            t = random_clifford(w, rng)
            total = tableau_compose(t, total)
            layers.append(_clifford_layer(t))
        layers.append(_clifford_layer(tableau_inverse(total)))
        meta = _meta("clifford_rb", w, d, seed, i, ideal_outcome="0" * w)
        circuits.append(Circuit(w, tuple(layers), barriers=(True,) * (d + 1), metadata=meta))
    return EnsembleSpec(
        "clifford_rb", Shape(w, d), "Sampled", tuple(circuits), M.CorrectOutcome(), M.MeanScoreAbove(2 / 3),
        CompilationPolicy.PER_SEGMENT, ("0" * w,) * K, seed, K, {},
        "d-1 uniform Cliffords followed by their inverse",
    )


_DRB_1Q = ("Id", "H", "S", "X", "Y", "Z")


def direct_rb_ensemble(shape, K=DEFAULT_K, seed=0, two_qubit_density=0.25):
    w, d = _shape(shape)
    if not 0 <= two_qubit_density <= 1:
        raise InvalidParameter("two_qubit_density must lie in [0, 1]")
    K = _check_k(K)
    circuits, outcomes = [], []
    for i in range(K):
        rng = circuit_rng(seed, "direct_rb", w, d, i)
        prep = random_clifford(w, rng)
        layers = []
        for _ in range(d):
            order = rng.permutation(w)
            gates_ = []
            used = set()
            for k in range(0, w - 1, 2):
                if rng.random() < two_qubit_density:
                    a, b = int(order[k]), int(order[k + 1])
                    gates_.append(gate("CNOT", a, b))
                    used.update((a, b))
            for q in range(w):
                if q in used:
                    continue
                kind = _DRB_1Q[rng.integers(len(_DRB_1Q))]
                if kind != "Id":
                    gates_.append(gate(kind, q))
            layers.append(Layer(tuple(sorted(gates_, key=lambda g: g.targets))))
        core = Circuit(w, tuple(layers), prefix=(_clifford_layer(prep, "stabilizer_prep"),))
        t = tableau_of(core)
        bits = rng.integers(0, 2, w)
        post = tableau_compose(pauli_tableau(bits, np.zeros(w, dtype=int)), tableau_inverse(t))
        outcome = "".join(str(int(b)) for b in bits)
        meta = _meta("direct_rb", w, d, seed, i, ideal_outcome=outcome)
        circuits.append(core.replace(
            postfix=(_clifford_layer(post, "inversion"),), barriers=(True,) * (d + 1), metadata=meta,
        ))
        outcomes.append(outcome)
    return EnsembleSpec(
        "direct_rb", Shape(w, d), "Sampled", tuple(circuits), M.CorrectOutcome(), M.MeanScoreAbove(2 / 3),
        CompilationPolicy.PER_SEGMENT, tuple(outcomes), seed, K, {"two_qubit_density": two_qubit_density},
        "random stabilizer prep, i.i.d. native Clifford layers, inversion to a random bitstring",
    )


def simultaneous_rb_ensemble(shape, K=DEFAULT_K, seed=0):
    w, d = _shape(shape)
    if d == 0:
        raise ShapeUnsupported("simultaneous RB needs d >= 1")
    K = _check_k(K)
    circuits = []
    for i in range(K):
        rng = circuit_rng(seed, "simultaneous_rb", w, d, i)
        seqs = []
        for _ in range(w):
            total = tableau_identity(1)
            seq = []
            for _ in range(d - 1):
                t = random_clifford(1, rng)
                total = tableau_compose(t, total)
                seq.append(t)
            seq.append(tableau_inverse(total))
            seqs.append(seq)
        layers = []
        for k in range(d):
            layers.append(Layer(tuple(
                subroutine("clifford1q", clifford_synthesis(seqs[q][k]), (q,)) for q in range(w)
            )))
        meta = _meta("simultaneous_rb", w, d, seed, i, ideal_outcome="0" * w, idle_padding=False)
        circuits.append(Circuit(w, tuple(layers), barriers=(True,) * (d + 1), metadata=meta))
    return EnsembleSpec(
        "simultaneous_rb", Shape(w, d), "Sampled", tuple(circuits), M.CorrectOutcome(), M.MeanScoreAbove(2 / 3),
        CompilationPolicy.PER_SEGMENT, ("0" * w,) * K, seed, K, {"idle_padding": False},
        "independent 1q Clifford RB sequence on every qubit",
    )


# ---------------------------------------------------------------------------
# periodic and structured families


def _local_tvd():
    return M.TvdBelow(1 / 3, M.DEFAULT_CONFIDENCE, M.LocalMarginals(2))


def _single(family, w, d, c, criterion, policy, outcome=None, parameters=None):
    return EnsembleSpec(
        family, Shape(w, d), "Single", (c,), criterion, M.AllPass(), policy,
        None if outcome is None else (outcome,), None, 1, parameters or {}, "single circuit",
    )


def rabi_ensemble(shape):
    w, d = _shape(shape)
    layers = tuple(all_qubits_layer("X", w) for _ in range(d))
    outcome = ("1" if d % 2 else "0") * w
    c = Circuit(w, layers, metadata=_meta("rabi", w, d, None, 0, ideal_outcome=outcome))
    return _single("rabi", w, d, c, _local_tvd(), CompilationPolicy.NONE, outcome)


def ramsey_ensemble(shape, theta=0.0):
    w, d = _shape(shape)
    if theta == 0:
        central = tuple(all_qubits_layer("Id", w) for _ in range(d))
    else:
        central = tuple(all_qubits_layer("RZ", w, (theta,)) for _ in range(d))
    outcome = None
    p1 = math.sin(d * theta / 2) ** 2
    if p1 < 1e-12 or p1 > 1 - 1e-12:
        outcome = ("1" if p1 > 0.5 else "0") * w
    meta = _meta("ramsey", w, d, None, 0, theta=theta)
    if outcome is not None:
        meta["ideal_outcome"] = outcome
    c = Circuit(
        w, central,
        prefix=(all_qubits_layer("RY", w, (math.pi / 2,)),),
        postfix=(all_qubits_layer("RY", w, (-math.pi / 2,)),),
        metadata=meta,
    )
    return _single("ramsey", w, d, c, _local_tvd(), CompilationPolicy.NONE, outcome, {"theta": theta})


_PREP = {"X": (("H",),), "Y": (("H",), ("S",)), "Z": ()}
_PREP_MINUS = {"X": (("X",), ("H",)), "Y": (("X",), ("H",), ("S",)), "Z": (("X",),)}
_MEASURE = {"X": (("H",),), "Y": (("Sdg",), ("H",)), "Z": ()}


def _basis_layers(spec, w):
    return tuple(Layer(tuple(GateApplication(k, (q,)) for q in range(w) for k in step)) for step in spec)


def idle_tomography_ensemble(shape):
    w, d = _shape(shape)
    circuits, outcomes = [], []
    for i, (p, q) in enumerate((p, q) for p in "XYZ" for q in "XYZ"):
        outcome = "0" * w if p == q else None
        meta = _meta("idle_tomography", w, d, None, i, prep=p, measure=q)
        if outcome:
            meta["ideal_outcome"] = outcome
        circuits.append(Circuit(
            w, tuple(all_qubits_layer("Id", w) for _ in range(d)),
            prefix=_basis_layers(_PREP[p], w), postfix=_basis_layers(_MEASURE[q], w), metadata=meta,
        ))
        outcomes.append(outcome)
    return EnsembleSpec(
        "idle_tomography", Shape(w, d), "ExplicitList", tuple(circuits), _local_tvd(), M.AllPass(),
        CompilationPolicy.NONE, None, None, len(circuits), {},
        "uniform Pauli-eigenstate prep and Pauli-basis measurement around d idle layers",
    )


DEFAULT_GERMS = (("X",), ("Y",), ("X", "Y"), ("X", "X", "Y"))
_LETTER = {"X": "RX", "Y": "RY"}


def germ_periodic_ensemble(shape, germ_set=DEFAULT_GERMS):
    w, d = _shape(shape)
    germ_set = tuple(tuple(g) for g in germ_set)
    if not germ_set or any(not g for g in germ_set):
        raise InvalidParameter("germ set must contain non-empty germs")
    for g in germ_set:
        for letter in g:
            if letter not in _LETTER:
                raise InvalidParameter(f"unknown germ letter {letter!r}")
    circuits = []
    idx = 0
    for g in germ_set:
        reps = d // len(g)
        body = [all_qubits_layer(_LETTER[letter], w, (math.pi,)) for letter in g] * reps
        body += [all_qubits_layer("Id", w)] * (d - len(body))
        for basis in "XYZ":
            for sign, prep in (("+", _PREP[basis]), ("-", _PREP_MINUS[basis])):
                meta = _meta(
                    "germ_periodic", w, d, None, idx, germ="".join(g), repetitions=reps,
                    germ_depth=reps * len(g), fiducial=sign + basis,
                )
                circuits.append(Circuit(
                    w, tuple(body), prefix=_basis_layers(prep, w),
                    postfix=_basis_layers(_MEASURE[basis], w), metadata=meta,
                ))
                idx += 1
    return EnsembleSpec(
        "germ_periodic", Shape(w, d), "ExplicitList", tuple(circuits), _local_tvd(), M.AllPass(),
        CompilationPolicy.NONE, None, None, len(circuits), {"germs": ["".join(g) for g in germ_set]},
        "germ repetitions between Pauli-eigenstate fiducials",
    )


def _parity_rotation(subset, alpha):
    """Gates for exp(i alpha Z_S) on the qubits in ``subset``."""
    subset = list(subset)
    last = subset[-1]
    ladder = [gate("CNOT", q, last) for q in subset[:-1]]
    return ladder + [gate("RZ", last, params=(-2 * alpha,))] + ladder[::-1]


def phase_flip(w, marked):
    """Circuit multiplying the amplitude of ``|marked>`` by -1."""
    m = np.array([int(b) for b in marked])
    gate_list = []
    for mask in range(1, 1 << w):
        subset = [q for q in range(w) if (mask >> (w - 1 - q)) & 1]
        sign = (-1) ** int(m[subset].sum())
        gate_list.extend(_parity_rotation(subset, sign * math.pi / 2**w))
    return Circuit(w, tuple(layers_from_gates(gate_list, w)))


def grover_step(w, marked):
    h = all_qubits_layer("H", w)
    diffusion = Circuit(w, (h,) + phase_flip(w, "0" * w).central + (h,))
    return Circuit(w, (
        Layer.of(subroutine("oracle", phase_flip(w, marked))),
        Layer.of(subroutine("diffusion", diffusion)),
    ))


def grover_ensemble(shape, marked=None, K=DEFAULT_K, seed=0):
    w, d = _shape(shape)
    if w < 2:
        raise ShapeUnsupported("Grover circuits need w >= 2")
    if marked is None:
        marked = "0" * w
    sampled = marked == "random"
    if not sampled and (len(marked) != w or set(marked) - {"0", "1"}):
        raise InvalidParameter(f"marked must be a {w}-bit string or 'random'")
    K = _check_k(K) if sampled else 1
    circuits, outcomes = [], []
    for i in range(K):
        if sampled:
            rng = circuit_rng(seed, "grover", w, d, i)
            target = "".join(str(int(b)) for b in rng.integers(0, 2, w))
        else:
            target = marked
        step = grover_step(w, target)
        layers = tuple(Layer.of(subroutine("grover_step", step)) for _ in range(d))
        meta = _meta("grover", w, d, seed if sampled else None, i, marked=target)
        circuits.append(Circuit(w, layers, prefix=(all_qubits_layer("H", w),), metadata=meta))
        outcomes.append(target)
    return EnsembleSpec(
        "grover", Shape(w, d), "Sampled" if sampled else "Single", tuple(circuits), M.HeavyOutput(),
        M.MeanScoreAbove(2 / 3) if sampled else M.AllPass(), CompilationPolicy.FREE, None,
        seed if sampled else None, K, {"marked": marked},
        "uniform marked basis state" if sampled else f"marked {marked}",
    )


def trotter_step(w, J, h, dt):
    gate_list = []
    for start in (0, 1):
        for q in range(start, w - 1, 2):
            gate_list.extend(_parity_rotation([q, q + 1], J * dt))
    gate_list.extend(gate("RX", q, params=(-2 * h * dt,)) for q in range(w))
    return Circuit(w, tuple(layers_from_gates(gate_list, w)))


def trotter_ensemble(shape, J=1.0, h=1.0, dt=0.1):
    w, d = _shape(shape)
    if w < 2:
        raise ShapeUnsupported("the Ising chain needs w >= 2")
    step = trotter_step(w, J, h, dt)
    layers = tuple(Layer.of(subroutine("trotter_step", step)) for _ in range(d))
    c = Circuit(w, layers, metadata=_meta("trotter", w, d, None, 0, J=J, h=h, dt=dt))
    return _single(
        "trotter", w, d, c, M.TvdBelow(1 / 3, M.DEFAULT_CONFIDENCE, M.NoGraining()),
        CompilationPolicy.FREE, None, {"J": J, "h": h, "dt": dt},
    )


# ---------------------------------------------------------------------------
# registry


FAMILIES = {
    "qv": qv_ensemble,
    "clifford_rb": clifford_rb_ensemble,
    "direct_rb": direct_rb_ensemble,
    "simultaneous_rb": simultaneous_rb_ensemble,
    "rabi": rabi_ensemble,
    "ramsey": ramsey_ensemble,
    "idle_tomography": idle_tomography_ensemble,
    "germ_periodic": germ_periodic_ensemble,
    "grover": grover_ensemble,
    "trotter": trotter_ensemble,
}
SAMPLED = {"qv", "clifford_rb", "direct_rb", "simultaneous_rb", "grover"}


def generate(family, shape, K=DEFAULT_K, seed=0, **params):
    """Build the ensemble of ``family`` at ``shape``."""
    if family not in FAMILIES:
        raise InvalidParameter(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    fn = FAMILIES[family]
    if family in SAMPLED:
        return fn(shape, K=K, seed=seed, **params)
    return fn(shape, **params)

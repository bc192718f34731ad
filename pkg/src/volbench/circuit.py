"""Layered circuit IR: gates, layers, circuits, validation and JSON I/O.

A circuit has three layer lists.  Only the ``central`` layers count toward
depth; ``prefix`` and ``postfix`` hold state preparation and measurement-basis
changes.  ``barriers[i]`` marks the boundary just before central layer ``i``
(so ``barriers[0]`` and ``barriers[-1]`` are the outer edges).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import gates as G
from .errors import CircuitParseError, UnexpandableSubroutine


@dataclass(frozen=True)
class GateApplication:
    kind: str
    targets: tuple
    params: tuple = ()
    label: str | None = None
    body: "Circuit | None" = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind == "SU4":
            object.__setattr__(self, "params", tuple(complex(p) for p in self.params))
        elif self.kind == "PermuteAll":
            object.__setattr__(self, "params", tuple(int(p) for p in self.params))
        else:
            object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @property
    def arity(self):
        return len(self.targets)

    def matrix(self, overrotation=0.0):
        return G.gate_matrix(self.kind, self.params, overrotation)


def gate(kind, *targets, params=()):
    return GateApplication(kind, targets, params)


def su4_gate(matrix, t0, t1):
    return GateApplication("SU4", (t0, t1), tuple(np.asarray(matrix).reshape(-1)))


def permute_all(perm):
    """Qubit permutation: the state of qubit ``i`` moves to qubit ``perm[i]``."""
    return GateApplication("PermuteAll", tuple(range(len(perm))), tuple(perm))


def subroutine(label, body, targets=None):
    if targets is None:
        targets = range(body.width)
    return GateApplication("SubroutineRef", tuple(targets), (), label, body)


@dataclass(frozen=True)
class Layer:
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))

    @classmethod
    def of(cls, *gates):
        return cls(gates)

    def qubits(self):
        return {q for g in self.gates for q in g.targets}

    def __iter__(self):
        return iter(self.gates)

    def __len__(self):
        return len(self.gates)


@dataclass(frozen=True)
class Circuit:
    width: int
    central: tuple = ()
    prefix: tuple = ()
    postfix: tuple = ()
    barriers: tuple | None = None
    metadata: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        for name in ("central", "prefix", "postfix"):
            layers = tuple(
                l if isinstance(l, Layer) else Layer(tuple(l))
                for l in getattr(self, name)
            )
            object.__setattr__(self, name, layers)
        if self.barriers is None:
            object.__setattr__(self, "barriers", (False,) * (len(self.central) + 1))
        else:
            object.__setattr__(self, "barriers", tuple(bool(b) for b in self.barriers))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def depth(self):
        return len(self.central)

    def all_layers(self):
        return self.prefix + self.central + self.postfix

    def replace(self, **changes):
        fields = dict(
            width=self.width,
            central=self.central,
            prefix=self.prefix,
            postfix=self.postfix,
            barriers=self.barriers,
            metadata=self.metadata,
        )
        fields.update(changes)
        return Circuit(**fields)


def shape(circuit):
    """``(width, depth)``; prefix and postfix layers never count."""
    return circuit.width, len(circuit.central)


# ---------------------------------------------------------------------------
# validation


def _gate_violations(g, width, where):
    out = []
    kind = g.kind
    if kind not in G.ALL_KINDS:
        return [f"{where}: unknown gate kind {kind!r}"]
    if len(set(g.targets)) != len(g.targets):
        out.append(f"{where}: duplicate target in {kind} {list(g.targets)}")
    for t in g.targets:
        if not 0 <= t < width:
            out.append(f"{where}: target out of range ({t} not in [0, {width}))")
    expected = G.arity(kind, width)
    if kind == "SubroutineRef":
        expected = g.body.width if g.body is not None else len(g.targets)
    if len(g.targets) != expected:
        out.append(f"{where}: {kind} expects {expected} targets, got {len(g.targets)}")
    if kind in G.N_PARAMS and len(g.params) != G.N_PARAMS[kind]:
        out.append(f"{where}: {kind} expects {G.N_PARAMS[kind]} params, got {len(g.params)}")
    elif kind == "SU4" and not G.is_unitary(np.reshape(g.params, (4, 4))):
        out.append(f"{where}: SU4 matrix is not unitary")
    if kind == "PermuteAll" and sorted(g.params) != list(range(width)):
        out.append(f"{where}: PermuteAll params are not a permutation of range({width})")
    if kind in G.ROTATION_KINDS and not all(np.isfinite(g.params)):
        out.append(f"{where}: non-finite rotation angle")
    if kind == "SubroutineRef":
        if not isinstance(g.body, Circuit):
            out.append(f"{where}: SubroutineRef without a body circuit")
        else:
            out.extend(validate(g.body, prefix=f"{where}.body"))
    return out


def validate(circuit, prefix=""):
    """List of invariant violations; empty iff the circuit is well formed."""
    out = []
    lead = f"{prefix}." if prefix else ""
    if circuit.width < 1:
        out.append(f"{lead}width: must be >= 1, got {circuit.width}")
        return out
    if len(circuit.barriers) != len(circuit.central) + 1:
        out.append(
            f"{lead}barriers: length {len(circuit.barriers)} != depth + 1 "
            f"({len(circuit.central) + 1})"
        )
    for section in ("prefix", "central", "postfix"):
        for li, layer in enumerate(getattr(circuit, section)):
            seen = set()
            for gi, g in enumerate(layer.gates):
                where = f"{lead}{section}[{li}][{gi}]"
                out.extend(_gate_violations(g, circuit.width, where))
                clash = seen.intersection(g.targets)
                if clash:
                    out.append(
                        f"{lead}{section}[{li}]: qubit {min(clash)} used by more than one gate"
                    )
                seen.update(g.targets)
    return out


# ---------------------------------------------------------------------------
# subroutine expansion


def expand_gate(g):
    """Layers realizing ``g`` on the parent register (1 layer for plain gates)."""
    if g.kind != "SubroutineRef":
        return [Layer((g,))]
    body = g.body
    if body is None:
        raise UnexpandableSubroutine(f"subroutine {g.label!r} has no body")
    mapping = g.targets
    out = []
    for layer in body.all_layers():
        for sub in expand_layer(layer):
            out.append(Layer(tuple(_remap(h, mapping) for h in sub.gates)))
    return out


def _remap(g, mapping):
    if g.kind == "PermuteAll" and list(mapping) != list(range(len(mapping))):
        raise ValueError("PermuteAll inside a subroutine must span the parent register")
    return GateApplication(
        g.kind, tuple(mapping[t] for t in g.targets), g.params, g.label, g.body
    )


def expand_layer(layer):
    """Expand every SubroutineRef in a layer; parallel bodies are zipped."""
    if all(g.kind != "SubroutineRef" for g in layer.gates):
        return [layer]
    columns = [expand_gate(g) for g in layer.gates]
    depth = max((len(c) for c in columns), default=0)
    out = []
    for k in range(depth):
        out.append(Layer(tuple(g for c in columns if k < len(c) for g in c[k].gates)))
    return out


def expanded(circuit):
    """Copy of ``circuit`` with all subroutines inlined.

    Each central layer becomes a block of layers; barrier flags move to the
    block edges and block interiors get no barrier.  Boundaries around an
    empty block merge (a barrier survives if either side had one).
    """
    central, barriers = [], []
    pending = circuit.barriers[0]
    for i, layer in enumerate(circuit.central):
        block = expand_layer(layer)
        if block:
            for k, sub in enumerate(block):
                central.append(sub)
                barriers.append(pending if k == 0 else False)
            pending = circuit.barriers[i + 1]
        else:
            pending = pending or circuit.barriers[i + 1]
    barriers.append(pending)
    prefix = [l for layer in circuit.prefix for l in expand_layer(layer)]
    postfix = [l for layer in circuit.postfix for l in expand_layer(layer)]
    return circuit.replace(
        central=tuple(central), prefix=tuple(prefix), postfix=tuple(postfix),
        barriers=tuple(barriers),
    )


def flatten(circuit):
    """Time-ordered list of non-subroutine gates (prefix, central, postfix)."""
    out = []
    for layer in circuit.all_layers():
        for sub in expand_layer(layer):
            out.extend(sub.gates)
    return out


def is_expanded(circuit):
    return all(g.kind != "SubroutineRef" for l in circuit.all_layers() for g in l.gates)


# ---------------------------------------------------------------------------
# JSON


def gate_to_json(g):
    d = {"kind": g.kind, "targets": list(g.targets)}
    if g.kind == "SU4":
        d["params"] = {"matrix": [[p.real, p.imag] for p in g.params]}
    elif g.kind == "PermuteAll":
        d["params"] = list(g.params)
    else:
        d["params"] = list(g.params)
    if g.kind == "SubroutineRef":
        d["label"] = g.label
        d["body"] = circuit_to_json(g.body)
    return d


def circuit_to_json(c):
    return {
        "width": c.width,
        "prefix": [[gate_to_json(g) for g in l.gates] for l in c.prefix],
        "central": [[gate_to_json(g) for g in l.gates] for l in c.central],
        "postfix": [[gate_to_json(g) for g in l.gates] for l in c.postfix],
        "barriers": list(c.barriers),
        "metadata": c.metadata,
    }


def serialize(circuit):
    return json.dumps(circuit_to_json(circuit), sort_keys=True)


def _need(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise CircuitParseError("expected an object", path)
    if key not in obj:
        raise CircuitParseError(f"missing field {key!r}", path)
    value = obj[key]
    if kind is not None and not isinstance(value, kind) or (
        kind is int and isinstance(value, bool)
    ):
        raise CircuitParseError(f"field {key!r} has wrong type", f"{path}.{key}" if path else key)
    return value


def gate_from_json(d, path):
    kind = _need(d, "kind", path, str)
    if kind not in G.ALL_KINDS:
        raise CircuitParseError(f"unknown gate kind {kind!r}", f"{path}.kind")
    targets = _need(d, "targets", path, list)
    for i, t in enumerate(targets):
        if not isinstance(t, int) or isinstance(t, bool):
            raise CircuitParseError("target must be an integer", f"{path}.targets[{i}]")
    raw = d.get("params", [])
    if kind == "SU4":
        if not isinstance(raw, dict) or "matrix" not in raw:
            raise CircuitParseError("SU4 params must be {\"matrix\": [[re, im], ...]}", f"{path}.params")
        entries = raw["matrix"]
        if not isinstance(entries, list) or len(entries) != 16:
            raise CircuitParseError("SU4 matrix needs 16 [re, im] entries", f"{path}.params.matrix")
        try:
            params = tuple(complex(float(re), float(im)) for re, im in entries)
        except (TypeError, ValueError):
            raise CircuitParseError("malformed matrix entry", f"{path}.params.matrix") from None
    else:
        if not isinstance(raw, list) or not all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in raw
        ):
            raise CircuitParseError("params must be a list of numbers", f"{path}.params")
        params = tuple(raw)
    label, body = None, None
    if kind == "SubroutineRef":
        label = d.get("label")
        body = circuit_from_json(_need(d, "body", path, dict), f"{path}.body")
    return GateApplication(kind, tuple(targets), params, label, body)


def circuit_from_json(d, path=""):
    lead = f"{path}" if path else ""
    width = _need(d, "width", lead, int)
    sections = {}
    for name in ("prefix", "central", "postfix"):
        layers = _need(d, name, lead, list)
        parsed = []
        for li, layer in enumerate(layers):
            lp = f"{lead}.{name}[{li}]" if lead else f"{name}[{li}]"
            if not isinstance(layer, list):
                raise CircuitParseError("layer must be a list of gates", lp)
            parsed.append(Layer(tuple(gate_from_json(g, f"{lp}[{gi}]") for gi, g in enumerate(layer))))
        sections[name] = tuple(parsed)
    barriers = _need(d, "barriers", lead, list)
    if not all(isinstance(b, bool) for b in barriers):
        raise CircuitParseError("barriers must be booleans", f"{lead}.barriers" if lead else "barriers")
    if len(barriers) != len(sections["central"]) + 1:
        raise CircuitParseError(
            "barriers length must equal number of central layers + 1",
            f"{lead}.barriers" if lead else "barriers",
        )
    metadata = _need(d, "metadata", lead, dict)
    return Circuit(width, barriers=tuple(barriers), metadata=metadata, **sections)


def deserialize(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return circuit_from_json(data)


def layers_from_gates(gate_list: Iterable[GateApplication], width: int, max_twoq=None) -> list:
    """ASAP-schedule a time-ordered gate list into layers."""
    ready = [0] * width
    layers: list[list] = []
    twoq: list[int] = []
    for g in gate_list:
        slot = max(ready[q] for q in g.targets)
        if max_twoq is not None and g.arity == 2:
            while slot < len(twoq) and twoq[slot] >= max_twoq:
                slot += 1
        while len(layers) <= slot:
            layers.append([])
            twoq.append(0)
        layers[slot].append(g)
        if g.arity == 2:
            twoq[slot] += 1
        for q in g.targets:
            ready[q] = slot + 1
    return [Layer(tuple(l)) for l in layers]


def bitstring(index: int, width: int) -> str:
    return format(index, f"0{width}b") if width else ""


def all_qubits_layer(kind, width, params=()) -> Layer:
    return Layer(tuple(GateApplication(kind, (q,), params) for q in range(width)))


def circuit(width: int, central: Sequence = (), **kw) -> Circuit:
    return Circuit(width, tuple(central), **kw)

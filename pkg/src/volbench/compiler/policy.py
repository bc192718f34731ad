"""Barrier-respecting compilation."""
from __future__ import annotations

from enum import Enum

import numpy as np

from ..circuit import Circuit, expand_gate, expand_layer, layers_from_gates
from ..errors import InvalidParameter, NonNativeGate, ParallelismViolation
from .native import NativeGateSet, lower_1q_matrix, lower_gate


class CompilationPolicy(str, Enum):
    FREE = "Free"
    PER_SEGMENT = "PerSegment"
    PER_LAYER = "PerLayer"
    NONE = "None"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for p in cls:
            if p.value.lower() == str(value).lower():
                return p
        raise InvalidParameter(f"unknown compilation policy {value!r}")


def segment_by_barriers(circuit):
    """Inclusive ``(first, last)`` central-layer ranges between barriers."""
    d = len(circuit.central)
    out = []
    start = 0
    for i in range(1, d):
        if circuit.barriers[i]:
            out.append((start, i - 1))
            start = i
    if d:
        out.append((start, d - 1))
    return out


def _flat_gates(layers):
    out = []
    for layer in layers:
        for g in layer.gates:
            for sub in expand_gate(g):
                out.extend(sub.gates)
    return out


def _is_identity_up_to_phase(m, atol=1e-10):
    k = int(np.argmax(np.abs(m)))
    ph = m.flat[k]
    if abs(abs(ph) - 1) > atol:
        return False
    return np.allclose(m / ph, np.eye(m.shape[0]), atol=atol)


_SYMMETRIC = {"CZ", "SWAP"}


def _same_support(a, b):
    if a.targets == b.targets:
        return True
    return a.kind == b.kind and a.kind in _SYMMETRIC and set(a.targets) == set(b.targets)


def cancel_adjacent_inverses(gate_list, width):
    """Drop neighbouring gate pairs (on the same qubits) whose product is
    the identity up to phase."""
    out = []
    stacks = [[] for _ in range(width)]
    for g in gate_list:
        if g.kind in ("PermuteAll", "Id"):
            idx = len(out)
            out.append(g)
            for q in g.targets:
                stacks[q].append(idx)
            continue
        tops = {stacks[q][-1] if stacks[q] else None for q in g.targets}
        if len(tops) == 1:
            j = tops.pop()
            prev = out[j] if j is not None else None
            if (
                prev is not None
                and prev.kind not in ("PermuteAll", "Id")
                and _same_support(prev, g)
                and _is_identity_up_to_phase(g.matrix() @ prev.matrix())
            ):
                out[j] = None
                for q in g.targets:
                    stacks[q].pop()
                continue
        idx = len(out)
        out.append(g)
        for q in g.targets:
            stacks[q].append(idx)
    return [g for g in out if g is not None]


def merge_single_qubit_runs(gate_list, width, native):
    """Fuse runs of 1q gates on a qubit into one re-lowered rotation."""
    out = []
    pending = [None] * width

    def flush(q):
        run = pending[q]
        pending[q] = None
        if run is None:
            return
        gates, m = run
        if len(gates) == 1:
            out.append(gates[0])
        elif not _is_identity_up_to_phase(m):
            out.extend(lower_1q_matrix(m, q, native))

    for g in gate_list:
        if g.kind == "Id":
            continue
        if len(g.targets) == 1:
            q = g.targets[0]
            if pending[q] is None:
                pending[q] = ([g], g.matrix())
            else:
                gates, m = pending[q]
                pending[q] = (gates + [g], g.matrix() @ m)
            continue
        for q in g.targets:
            flush(q)
        out.append(g)
    for q in range(width):
        flush(q)
    return out


def _lower_all(gate_list, native):
    out = []
    for g in gate_list:
        out.extend(lower_gate(g, native))
    return out


def _compile_block(layers, width, native, free):
    gate_list = _lower_all(_flat_gates(layers), native)
    if free:
        gate_list = merge_single_qubit_runs(gate_list, width, native)
        gate_list = _lower_all(gate_list, native)
    gate_list = cancel_adjacent_inverses(gate_list, width)
    for g in gate_list:
        native.check_edge(g)
    return layers_from_gates(gate_list, width, native.max_parallel_twoq)


def _literal(layers, native, width, where):
    out = []
    for li, layer in enumerate(layers):
        for sub in expand_layer(layer):
            twoq = 0
            for g in sub.gates:
                if not native.allows(g.kind):
                    raise NonNativeGate(f"{where}[{li}]: {g.kind} is not native and policy None forbids rewriting")
                native.check_edge(g)
                twoq += len(g.targets) == 2
            if native.max_parallel_twoq is not None and twoq > native.max_parallel_twoq:
                raise ParallelismViolation(
                    f"{where}[{li}]: {twoq} two-qubit gates exceed the limit {native.max_parallel_twoq}"
                )
            out.append(sub)
    return out


def compile_circuit(circuit, policy, native=None):
    """Lower ``circuit`` to ``native`` under ``policy``.

    Prefix and postfix are compiled on their own.  The output's barriers
    mark the compiled segment edges; ``metadata["compiled"]`` records the
    policy, physical depth and the central-layer range of every segment.
    """
    policy = CompilationPolicy.parse(policy)
    native = native or NativeGateSet()
    w = circuit.width
    native.check_edges_valid(w)

    if policy is CompilationPolicy.NONE:
        prefix = _literal(circuit.prefix, native, w, "prefix")
        postfix = _literal(circuit.postfix, native, w, "postfix")
        central, barriers, ranges = [], [], []
        pending = circuit.barriers[0]
        for i, layer in enumerate(circuit.central):
            block = _literal([layer], native, w, f"central[{i}]")
            ranges.append((len(central), len(central) + len(block) - 1))
            for k, sub in enumerate(block):
                central.append(sub)
                barriers.append(pending if k == 0 else False)
            pending = circuit.barriers[i + 1] if block else (pending or circuit.barriers[i + 1])
        barriers.append(pending)
    else:
        free = policy is CompilationPolicy.FREE
        if free:
            segments = [(0, len(circuit.central) - 1)] if circuit.central else []
        elif policy is CompilationPolicy.PER_LAYER:
            segments = [(i, i) for i in range(len(circuit.central))]
        else:
            segments = segment_by_barriers(circuit)
        prefix = _compile_block(circuit.prefix, w, native, free)
        postfix = _compile_block(circuit.postfix, w, native, free)
        central, barriers, ranges = [], [], []
        pending = circuit.barriers[0]
        for lo, hi in segments:
            block = _compile_block(circuit.central[lo:hi + 1], w, native, free)
            ranges.append((len(central), len(central) + len(block) - 1))
            for k, layer in enumerate(block):
                central.append(layer)
                barriers.append(pending if k == 0 else False)
            pending = (not free) or (pending and not block)
        barriers.append(circuit.barriers[-1])
        if not central:
            barriers = [circuit.barriers[0] or circuit.barriers[-1]]

    metadata = dict(circuit.metadata)
    metadata["compiled"] = {
        "policy": policy.value,
        "physical_depth": len(central),
        "prefix_depth": len(prefix),
        "postfix_depth": len(postfix),
        "segments": [list(r) for r in ranges],
    }
    return Circuit(w, tuple(central), tuple(prefix), tuple(postfix), tuple(barriers), metadata)


def physical_depth(circuit, breakdown=False):
    d = len(circuit.central)
    if breakdown:
        return {"central": d, "prefix": len(circuit.prefix), "postfix": len(circuit.postfix)}
    return d

"""Ideal dense simulation with an automatic stabilizer fast path."""
from __future__ import annotations

import numpy as np

from .. import gates as G
from .. import kernels
from ..circuit import flatten
from ..distribution import Distribution
from ..errors import UnexpandableSubroutine, UnsupportedGate, WidthCapExceeded
from ..stabilizer import stabilizer_distribution
from .program import build_program

DEFAULT_WIDTH_CAP = 16

_NO_ERRORS = np.zeros(0, dtype=np.int64)


def initial_state(w, batch=1):
    s = np.zeros((batch, 1 << w), dtype=np.complex128)
    s[:, 0] = 1.0
    return s


def evolve(states, program, start=0, errors=None, backend=None):
    if errors is None:
        errors = (_NO_ERRORS, _NO_ERRORS, _NO_ERRORS)
    kernels.run_batch(
        states, program.width, program.kinds, program.q0, program.q1,
        program.mats, program.perms, start, *errors, backend=backend,
    )
    return states


def statevector(circuit, width_cap=DEFAULT_WIDTH_CAP, overrotation=0.0, backend=None):
    """Amplitudes of ``circuit`` applied to |0...0>."""
    if circuit.width > width_cap:
        raise WidthCapExceeded(f"width {circuit.width} exceeds dense cap {width_cap}")
    program = build_program(circuit, overrotation)
    states = initial_state(circuit.width)
    evolve(states, program, backend=backend)
    return states[0]


def is_clifford_circuit(circuit, overrotation=0.0):
    try:
        gate_list = flatten(circuit)
    except ValueError as exc:
        raise UnexpandableSubroutine(str(exc)) from None
    cache = {}
    for g in gate_list:
        if g.kind in G.CLIFFORD_KINDS:
            continue
        if g.kind == "SubroutineRef":
            raise UnexpandableSubroutine(f"subroutine {g.label!r} has no body")
        key = (g.kind, g.params)
        if key not in cache:
            cache[key] = G.is_clifford_gate(g.kind, g.params, overrotation)
        if not cache[key]:
            return False
    return True


def ideal_distribution(circuit, width_cap=DEFAULT_WIDTH_CAP, cutoff=1e-14):
    """Exact output distribution; Clifford-only circuits use the tableau path."""
    if is_clifford_circuit(circuit):
        try:
            return stabilizer_distribution(circuit)
        except UnsupportedGate:
            pass
    psi = statevector(circuit, width_cap)
    probs = np.abs(psi) ** 2
    probs[probs < cutoff] = 0.0
    probs /= probs.sum()
    return Distribution.from_dense(probs, circuit.width)


def unitary(circuit, width_cap=10):
    """Dense unitary of the whole circuit (columns = images of basis states)."""
    w = circuit.width
    if w > width_cap:
        raise WidthCapExceeded(f"width {w} exceeds unitary cap {width_cap}")
    program = build_program(circuit)
    dim = 1 << w
    states = np.eye(dim, dtype=np.complex128)
    evolve(states, program)
    return states.T.copy()

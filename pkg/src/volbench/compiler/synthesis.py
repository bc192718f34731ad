"""Clifford tableau to gate sequence."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..circuit import Circuit, GateApplication, layers_from_gates
from ..stabilizer import CliffordTableau, apply_table, tableau_identity
from .. import gates as G
from .native import clifford_words, lower_gate, require_generating

_INVERSE = {"H": "H", "S": "Sdg", "Sdg": "S", "X": "X", "Y": "Y", "Z": "Z", "CNOT": "CNOT"}

_PAULI_NAME = {(1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


@lru_cache(maxsize=1)
def _pauli_action_words():
    """Word in H, S for each pair ``(P, Q)`` it maps onto ``(X, Z)``."""
    out = {}
    for word in sorted(clifford_words(("H", "S")).values(), key=len):
        m = np.eye(2, dtype=complex)
        for k in word:
            m = G.FIXED_MATRICES[k] @ m
        table = G.conjugation_table(m)
        pre = {_PAULI_NAME[tuple(table[i, :2])]: _PAULI_NAME[(i & 1, i >> 1)] for i in (1, 2, 3)}
        out.setdefault((pre["X"], pre["Z"]), word)
    return out


class _Reducer:
    def __init__(self, t):
        self.x, self.z, self.r = t.x.copy(), t.z.copy(), t.r.copy()
        self.w = t.w
        self.applied = []

    def apply(self, kind, *targets):
        g = GateApplication(kind, targets)
        apply_table(self.x, self.z, self.r, G.conjugation_table(g.matrix()), targets)
        self.applied.append(g)

    def pauli(self, row, q):
        return _PAULI_NAME.get((int(self.x[row, q]), int(self.z[row, q])))


def synthesize_gates(t):
    """Time-ordered H/S/Sdg/X/Y/Z/CNOT gates whose tableau equals ``t``."""
    w = t.w
    red = _Reducer(t)
    words = _pauli_action_words()
    for j in range(w):
        xr, zr = j, w + j
        # image of X_j: turn every factor on qubits >= j into X
        for k in range(j, w):
            p = red.pauli(xr, k)
            if p == "Z":
                red.apply("H", k)
            elif p == "Y":
                red.apply("S", k)
        cols = [k for k in range(j, w) if red.x[xr, k]]
        if not red.x[xr, j]:
            red.apply("CNOT", cols[0], j)
        for k in range(j + 1, w):
            if red.x[xr, k]:
                red.apply("CNOT", j, k)
        # image of Z_j: clear qubits > j with Z-type factors, then fold into j
        for k in range(j + 1, w):
            p = red.pauli(zr, k)
            if p == "X":
                red.apply("H", k)
            elif p == "Y":
                red.apply("S", k)
                red.apply("H", k)
        for k in range(j + 1, w):
            if red.z[zr, k]:
                red.apply("CNOT", k, j)
        # now rows xr, zr act only on qubit j; map them to X, Z
        key = (red.pauli(xr, j), red.pauli(zr, j))
        for kind in words[key]:
            red.apply(kind, j)
    final = CliffordTableau(red.x, red.z, red.r)
    phases = final.phases
    for j in range(w):
        if phases[j]:
            red.apply("Z", j)
        if phases[w + j]:
            red.apply("X", j)
    assert CliffordTableau(red.x, red.z, red.r) == tableau_identity(w)
    return [GateApplication(_INVERSE[g.kind], g.targets) for g in reversed(red.applied)]


@lru_cache(maxsize=4096)
def _synth_cached(key, w):
    n = 2 * w
    raw = np.frombuffer(key, dtype=np.int64)
    x = raw[: n * w].reshape(n, w)
    z = raw[n * w: 2 * n * w].reshape(n, w)
    r = raw[2 * n * w:]
    return tuple(synthesize_gates(CliffordTableau(x, z, r)))


def clifford_synthesis(t, native=None):
    """Circuit fragment (width ``t.w``) whose tableau equals ``t``.

    With ``native`` None the raw H/S/Sdg/X/Y/Z/CNOT sequence is returned.
    """
    if native is not None:
        require_generating(native, t.w)
    key = np.concatenate([t.x.ravel(), t.z.ravel(), t.r]).astype(np.int64).tobytes()
    gate_list = list(_synth_cached(key, t.w)) if t.w <= 3 else synthesize_gates(t)
    if native is not None:
        lowered = []
        for g in gate_list:
            lowered.extend(lower_gate(g, native))
        gate_list = lowered
    return Circuit(t.w, tuple(layers_from_gates(gate_list, t.w)))

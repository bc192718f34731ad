"""Flattened op arrays consumed by the statevector kernels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import gates as G
from ..circuit import flatten
from ..errors import UnexpandableSubroutine

OP_1Q, OP_2Q, OP_PERM, OP_NOOP = 0, 1, 2, 3


@dataclass
class Program:
    width: int
    gates: list
    kinds: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    mats: np.ndarray
    perms: np.ndarray

    def __len__(self):
        return len(self.kinds)

    def arity(self, op):
        return 2 if self.kinds[op] == OP_2Q else 1


def build_program(circuit, overrotation=0.0, keep_idles=False):
    """Lower a circuit to kernel arrays.

    Id gates are dropped unless ``keep_idles`` (then they become no-op
    locations that can still carry errors).
    """
    try:
        gate_list = flatten(circuit)
    except ValueError as exc:
        raise UnexpandableSubroutine(str(exc)) from None
    w = circuit.width
    if not keep_idles:
        gate_list = [g for g in gate_list if g.kind != "Id"]
    n = len(gate_list)
    kinds = np.zeros(n, dtype=np.int64)
    q0 = np.zeros(n, dtype=np.int64)
    q1 = np.zeros(n, dtype=np.int64)
    mats = np.zeros((n, 4, 4), dtype=np.complex128)
    perms = np.zeros((n, w), dtype=np.int64)
    for i, g in enumerate(gate_list):
        if g.kind == "SubroutineRef":
            raise UnexpandableSubroutine(f"subroutine {g.label!r} has no body")
        if g.kind == "PermuteAll":
            kinds[i] = OP_PERM
            perms[i] = g.params
            continue
        q0[i] = g.targets[0]
        if g.kind == "Id":
            kinds[i] = OP_NOOP
            continue
        m = g.matrix(overrotation)
        if len(g.targets) == 1:
            kinds[i] = OP_1Q
            mats[i, :2, :2] = m
        else:
            kinds[i] = OP_2Q
            q1[i] = g.targets[1]
            mats[i] = m
    return Program(w, gate_list, kinds, q0, q1, mats, perms)


def gate_class(g):
    """Noise class of a gate: '1q', '2q', 'idle' or None (noiseless)."""
    if g.kind == "Id":
        return "idle"
    if g.kind == "PermuteAll":
        return None
    return "2q" if G.arity(g.kind) == 2 else "1q"

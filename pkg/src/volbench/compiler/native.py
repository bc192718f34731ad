"""Native gate sets and rewriting single gates into them."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import gates as G
from ..circuit import GateApplication
from ..errors import ConnectivityViolation, InvalidParameter, NonGeneratingGateSet, NonNativeGate
from .decompose import decompose_1q, decompose_su4_gates

ALWAYS_NATIVE = frozenset({"Id", "PermuteAll"})
_CLIFFORD_1Q = ("H", "S", "Sdg", "X", "Y", "Z")


@dataclass(frozen=True)
class NativeGateSet:
    oneq: tuple = ("X", "Y", "Z", "H", "S", "Sdg", "RX", "RY", "RZ")
    twoq: tuple = ("CNOT", "CZ")
    edges: tuple | None = None
    max_parallel_twoq: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "oneq", tuple(self.oneq))
        object.__setattr__(self, "twoq", tuple(self.twoq))
        if self.edges is not None:
            object.__setattr__(self, "edges", tuple(tuple(int(q) for q in e) for e in self.edges))
        if not self.oneq and not self.twoq:
            raise InvalidParameter("native gate set is empty")
        for k in self.oneq:
            if k not in G.ONE_QUBIT:
                raise InvalidParameter(f"{k!r} is not a one-qubit gate kind")
        for k in self.twoq:
            if k not in G.TWO_QUBIT:
                raise InvalidParameter(f"{k!r} is not a two-qubit gate kind")
        for e in self.edges or ():
            if len(e) != 2 or e[0] == e[1] or min(e) < 0:
                raise InvalidParameter(f"bad connectivity edge {list(e)}")
        if self.max_parallel_twoq is not None and self.max_parallel_twoq < 1:
            raise InvalidParameter("max_parallel_twoq must be >= 1")

    def allows(self, kind):
        return kind in ALWAYS_NATIVE or kind in self.oneq or kind in self.twoq

    def check_edge(self, g):
        if self.edges is None or len(g.targets) != 2:
            return
        a, b = g.targets
        if (a, b) not in self.edges and (b, a) not in self.edges:
            raise ConnectivityViolation(f"{g.kind} on ({a}, {b}) is not on a native edge")

    def check_edges_valid(self, width):
        for e in self.edges or ():
            if max(e) >= width:
                raise ConnectivityViolation(f"edge {list(e)} references a qubit outside width {width}")

    def to_json(self):
        return {
            "oneq": list(self.oneq),
            "twoq": list(self.twoq),
            "edges": None if self.edges is None else [list(e) for e in self.edges],
            "max_parallel_twoq": self.max_parallel_twoq,
        }

    @classmethod
    def from_json(cls, d):
        try:
            return cls(
                tuple(d.get("oneq", ())),
                tuple(d.get("twoq", ())),
                None if d.get("edges") is None else tuple(tuple(e) for e in d["edges"]),
                d.get("max_parallel_twoq"),
            )
        except (TypeError, AttributeError) as exc:
            raise InvalidParameter(f"malformed native gate set: {exc}") from None


# ---------------------------------------------------------------------------
# single-qubit Clifford words


def _canon(m):
    k = int(np.argmax(np.abs(m) > 1e-9))
    m = m / (m.flat[k] / abs(m.flat[k]))
    return tuple(np.round(m, 8).ravel().tolist())


@lru_cache(maxsize=64)
def clifford_words(generators):
    """Shortest word (time-ordered kinds) for each reachable 1q Clifford."""
    words = {_canon(np.eye(2, dtype=complex)): ()}
    frontier = deque([(np.eye(2, dtype=complex), ())])
    while frontier:
        m, word = frontier.popleft()
        for k in generators:
            nm = G.FIXED_MATRICES[k] @ m
            key = _canon(nm)
            if key not in words:
                words[key] = word + (k,)
                frontier.append((nm, word + (k,)))
    return words


def _clifford_generators(native):
    return tuple(k for k in _CLIFFORD_1Q if k in native.oneq)


def _euler_mode(native):
    one = set(native.oneq)
    if "U1q" in one:
        return "U1q"
    if {"RZ", "RY"} <= one:
        return "ZYZ"
    if {"RZ", "RX"} <= one:
        return "ZXZ"
    return None


def generates_clifford_group(native, width):
    one_ok = len(clifford_words(_clifford_generators(native))) == 24 or _euler_mode(native) is not None
    two_ok = width < 2 or bool({"CNOT", "CZ"} & set(native.twoq))
    return one_ok and two_ok


def _nonzero(angle):
    return abs(math.remainder(angle, 4 * math.pi)) > 1e-12


def lower_1q_matrix(m, q, native):
    """Native gates (time order) realizing the 2x2 unitary ``m`` up to phase."""
    words = clifford_words(_clifford_generators(native))
    if G.conjugation_table(np.asarray(m, dtype=complex)) is not None and len(words) == 24:
        return [GateApplication(k, (q,)) for k in words[_canon(m)]]
    mode = _euler_mode(native)
    if mode is None:
        raise NonNativeGate("one-qubit gate cannot be expressed in the native set")
    a, b, c, _ = decompose_1q(m, atol=1e-8)
    if mode == "U1q":
        if not (_nonzero(a) or _nonzero(b) or _nonzero(c)):
            return []
        return [GateApplication("U1q", (q,), (a, b, c))]
    if mode == "ZYZ":
        seq = [("RZ", c), ("RY", b), ("RZ", a)]
    else:
        if not _nonzero(b):
            seq = [("RZ", a + c)]
        else:
            # RY(b) = RZ(pi/2) RX(b) RZ(-pi/2)
            seq = [("RZ", c - math.pi / 2), ("RX", b), ("RZ", a + math.pi / 2)]
    return [GateApplication(k, (q,), (t,)) for k, t in seq if _nonzero(t)]


def lower_gate(g, native):
    """Rewrite one non-subroutine gate into native gates (time order)."""
    if native.allows(g.kind):
        native.check_edge(g)
        return [g]
    if len(g.targets) == 1:
        return lower_1q_matrix(g.matrix(), g.targets[0], native)
    a, b = g.targets
    twoq = set(native.twoq)
    if g.kind == "CNOT" and "CZ" in twoq:
        seq = [GateApplication("H", (b,)), GateApplication("CZ", (a, b)), GateApplication("H", (b,))]
    elif g.kind == "CZ" and "CNOT" in twoq:
        seq = [GateApplication("H", (b,)), GateApplication("CNOT", (a, b)), GateApplication("H", (b,))]
    elif g.kind == "SWAP" and twoq & {"CNOT", "CZ"}:
        seq = [GateApplication("CNOT", (a, b)), GateApplication("CNOT", (b, a)), GateApplication("CNOT", (a, b))]
    elif twoq & {"CNOT", "CZ"}:
        mapping = (a, b)
        seq = [
            GateApplication(h.kind, tuple(mapping[t] for t in h.targets), h.params)
            for h in decompose_su4_gates(g.matrix())
        ]
    else:
        raise NonNativeGate(f"no two-qubit native gate to realize {g.kind}")
    out = []
    for h in seq:
        out.extend(lower_gate(h, native))
    return out


def require_generating(native, width):
    if not generates_clifford_group(native, width):
        raise NonGeneratingGateSet("native gate set does not generate the Clifford group")

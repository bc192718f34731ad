import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from volbench import gates as G
from volbench.circuit import Circuit, Layer, expanded, gate, permute_all, su4_gate, subroutine, validate
from volbench.compiler import (
    CompilationPolicy,
    NativeGateSet,
    cancel_adjacent_inverses,
    clifford_synthesis,
    cnot_count,
    compile_circuit,
    decompose_1q,
    decompose_su4,
    decompose_su4_gates,
    generates_clifford_group,
    physical_depth,
    segment_by_barriers,
)
from volbench.compiler.decompose import gates_unitary
from volbench.ensembles import Shape, clifford_rb_ensemble, qv_ensemble
from volbench.errors import (
    ConnectivityViolation,
    InvalidParameter,
    NonGeneratingGateSet,
    NonNativeGate,
    NonUnitary,
    ParallelismViolation,
)
from volbench.simulator import unitary
from volbench.stabilizer import random_clifford, tableau_of

from conftest import equal_up_to_phase, haar

ROTATIONS = NativeGateSet(("RX", "RY", "RZ"), ("CNOT",))


def _cnots(gate_list):
    return sum(g.kind == "CNOT" for g in gate_list)


# --- segmentation ---------------------------------------------------------


def test_segments_follow_barriers():
    c = Circuit(1, tuple(Layer.of(gate("X", 0)) for _ in range(4)), barriers=(True, False, True, False, True))
    assert segment_by_barriers(c) == [(0, 1), (2, 3)]
    c = Circuit(1, tuple(Layer.of(gate("X", 0)) for _ in range(4)), barriers=(True, True, False, True, True))
    assert segment_by_barriers(c) == [(0, 0), (1, 2), (3, 3)]


def test_segments_of_empty_circuit():
    assert segment_by_barriers(Circuit(2, ())) == []


def test_policy_parse():
    assert CompilationPolicy.parse("perlayer") is CompilationPolicy.PER_LAYER
    with pytest.raises(InvalidParameter):
        CompilationPolicy.parse("whatever")


# --- decompositions -------------------------------------------------------


def test_decompose_1q_examples():
    a, b, c, _ = decompose_1q(np.eye(2))
    assert abs(b) < 1e-12 and abs(math.remainder(a + c, 2 * math.pi)) < 1e-12
    a, b, c, _ = decompose_1q(G.ry(0.7))
    assert abs(b - 0.7) < 1e-12
    assert abs(math.remainder(a, 2 * math.pi)) < 1e-12 and abs(math.remainder(c, 2 * math.pi)) < 1e-12


def test_decompose_1q_haar(rng):
    worst = 0.0
    for _ in range(1000):
        u = haar(2, rng)
        a, b, c, p = decompose_1q(u)
        worst = max(worst, np.max(np.abs(u - np.exp(1j * p) * G.u1q(a, b, c))))
    assert worst < 1e-10


def test_decompose_rejects_non_unitary():
    with pytest.raises(NonUnitary):
        decompose_1q(np.array([[1, 1], [0, 1]]))
    with pytest.raises(NonUnitary):
        decompose_su4(np.ones((4, 4)))


@pytest.mark.parametrize("name, matrix, expected", [
    ("identity", np.eye(4), 0),
    ("local", np.kron(G.rx(0.3), G.ry(0.9)), 0),
    ("cnot", G.FIXED_MATRICES["CNOT"], 1),
    ("cz", G.FIXED_MATRICES["CZ"], 1),
    ("iswap", np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]]), 2),
    ("swap", G.FIXED_MATRICES["SWAP"], 3),
])
def test_su4_cnot_counts(name, matrix, expected):
    assert cnot_count(matrix) == expected
    gs = decompose_su4_gates(matrix)
    assert _cnots(gs) == expected
    assert equal_up_to_phase(gates_unitary(gs, 2), matrix, atol=1e-8)


def test_su4_haar_uses_three_cnots(rng):
    for _ in range(500):
        u = haar(4, rng)
        gs = decompose_su4_gates(u)
        assert _cnots(gs) == 3
        assert equal_up_to_phase(gates_unitary(gs, 2), u, atol=1e-8)


def test_decompose_su4_returns_circuit(rng):
    u = haar(4, rng)
    c = decompose_su4(u)
    assert c.width == 2 and validate(c) == []
    assert equal_up_to_phase(unitary(c), u, atol=1e-8)


# --- Clifford synthesis ---------------------------------------------------


def test_synthesis_round_trip(rng):
    for _ in range(200):
        t = random_clifford(3, rng)
        assert tableau_of(clifford_synthesis(t)) == t


def test_synthesis_with_cz_native_set(rng):
    native = NativeGateSet(("H", "S", "Sdg"), ("CZ",))
    for _ in range(20):
        t = random_clifford(2, rng)
        c = clifford_synthesis(t, native)
        assert all(native.allows(g.kind) for layer in c.central for g in layer.gates)
        assert tableau_of(c) == t


def test_synthesis_needs_generating_set():
    assert not generates_clifford_group(NativeGateSet(("X", "Z"), ("CNOT",)), 2)
    assert not generates_clifford_group(NativeGateSet(("H", "S"), ()), 2)
    assert generates_clifford_group(NativeGateSet(("H", "S"), ()), 1)
    with pytest.raises(NonGeneratingGateSet):
        clifford_synthesis(random_clifford(2, np.random.default_rng(0)), NativeGateSet(("X", "Z"), ("CNOT",)))


# --- compile policies -----------------------------------------------------


def test_cnot_lowered_to_cz():
    c = Circuit(2, (Layer.of(gate("CNOT", 0, 1)),))
    cc = compile_circuit(c, "PerLayer", NativeGateSet(("H",), ("CZ",)))
    kinds = [g.kind for layer in cc.central for g in layer.gates]
    assert kinds == ["H", "CZ", "H"]
    assert equal_up_to_phase(unitary(cc), G.FIXED_MATRICES["CNOT"])


def _rb_pair(width=2, depth=8, seed=3):
    return clifford_rb_ensemble(Shape(width, depth), K=1, seed=seed).circuits[0]


@pytest.mark.parametrize("native", [NativeGateSet(), ROTATIONS, NativeGateSet(("RZ", "RX"), ("CZ",))])
def test_per_segment_preserves_each_segment(native):
    c = _rb_pair()
    cc = compile_circuit(c, "PerSegment", native)
    segs = cc.metadata["compiled"]["segments"]
    src_segs = segment_by_barriers(c)
    assert len(segs) == len(src_segs)
    for (lo, hi), (slo, shi) in zip(segs, src_segs):
        compiled = Circuit(2, cc.central[lo:hi + 1])
        source = expanded(Circuit(2, c.central[slo:shi + 1]))
        assert equal_up_to_phase(unitary(compiled), unitary(source), atol=1e-8)
    for lo, _ in segs:
        assert cc.barriers[lo]
    assert equal_up_to_phase(unitary(cc), unitary(expanded(c)), atol=1e-8)


def test_per_segment_keeps_rb_deep():
    c = _rb_pair(2, 4)
    cc = compile_circuit(c, "PerSegment", ROTATIONS)
    assert physical_depth(cc) > 4
    assert physical_depth(cc, breakdown=True)["central"] == physical_depth(cc)


def test_free_may_collapse_rb_but_stays_equivalent():
    c = _rb_pair(2, 8)
    free = compile_circuit(c, "Free", ROTATIONS)
    seg = compile_circuit(c, "PerSegment", ROTATIONS)
    assert physical_depth(free) <= physical_depth(seg)
    assert equal_up_to_phase(unitary(free), unitary(expanded(c)), atol=1e-8)


def test_free_qv_equivalence():
    c = qv_ensemble(Shape(4, 4), K=1, seed=11).circuits[0]
    cc = compile_circuit(c, "Free", ROTATIONS)
    assert validate(cc) == []
    kinds = {g.kind for layer in cc.central for g in layer.gates}
    assert kinds <= {"RX", "RY", "RZ", "CNOT", "PermuteAll"}
    assert equal_up_to_phase(unitary(cc), unitary(expanded(c)), atol=1e-8)


def test_compiled_circuit_is_not_trivially_identity():
    # guard: an equivalence check between two identity circuits proves nothing
    c = _rb_pair(2, 4)
    seg = compile_circuit(c, "PerSegment", ROTATIONS)
    first = Circuit(2, seg.central[:seg.metadata["compiled"]["segments"][0][1] + 1])
    assert not equal_up_to_phase(unitary(first), np.eye(4))


def test_none_policy_rejects_non_native():
    c = Circuit(1, (Layer.of(gate("H", 0)),))
    with pytest.raises(NonNativeGate):
        compile_circuit(c, "None", ROTATIONS)


def test_none_policy_keeps_literal_circuit():
    c = Circuit(2, (Layer.of(gate("H", 0)), Layer.of(gate("CNOT", 0, 1))), barriers=(True, True, True))
    cc = compile_circuit(c, CompilationPolicy.NONE)
    assert cc.central == c.central
    assert cc.barriers == c.barriers


def test_none_policy_parallelism():
    native = NativeGateSet(max_parallel_twoq=1)
    c = Circuit(4, (Layer.of(gate("CNOT", 0, 1), gate("CNOT", 2, 3)),))
    with pytest.raises(ParallelismViolation):
        compile_circuit(c, "None", native)
    cc = compile_circuit(c, "PerLayer", native)
    assert physical_depth(cc) == 2


def test_connectivity():
    native = NativeGateSet(edges=((0, 1), (1, 2)))
    c = Circuit(3, (Layer.of(gate("CNOT", 0, 2)),))
    for policy in ("None", "PerLayer", "Free"):
        with pytest.raises(ConnectivityViolation):
            compile_circuit(c, policy, native)
    with pytest.raises(ConnectivityViolation):
        compile_circuit(Circuit(2, (Layer.of(gate("H", 0)),)), "Free", native)


def test_prefix_and_postfix_compiled_separately():
    c = Circuit(
        2, (Layer.of(gate("CNOT", 0, 1)),),
        prefix=(Layer.of(gate("H", 0)),), postfix=(Layer.of(gate("H", 0)),),
    )
    cc = compile_circuit(c, "Free", ROTATIONS)
    info = cc.metadata["compiled"]
    assert info["prefix_depth"] >= 1 and info["postfix_depth"] >= 1
    assert equal_up_to_phase(unitary(cc), unitary(c), atol=1e-8)


def test_adjacent_inverse_cancellation():
    gs = [gate("H", 0), gate("CNOT", 0, 1), gate("CNOT", 0, 1), gate("H", 0), gate("S", 1)]
    assert [g.kind for g in cancel_adjacent_inverses(gs, 2)] == ["S"]
    gs = [gate("CZ", 0, 1), gate("CZ", 1, 0)]
    assert cancel_adjacent_inverses(gs, 2) == []
    # CNOT with swapped roles is not its own inverse
    gs = [gate("CNOT", 0, 1), gate("CNOT", 1, 0)]
    assert len(cancel_adjacent_inverses(gs, 2)) == 2


def test_permute_all_passes_through():
    c = Circuit(3, (Layer.of(permute_all([1, 2, 0])), Layer.of(gate("H", 0))))
    cc = compile_circuit(c, "None")
    assert equal_up_to_phase(unitary(cc), unitary(c))


@given(st.integers(0, 2**31 - 1))
def test_per_layer_equivalence_property(seed):
    rng = np.random.default_rng(seed)
    layers = [
        Layer.of(su4_gate(haar(4, rng), 0, 1), gate("RX", 2, params=(float(rng.uniform(0, 6)),))),
        Layer.of(subroutine("c", clifford_synthesis(random_clifford(2, rng)), (2, 1))),
    ]
    c = Circuit(3, tuple(layers))
    cc = compile_circuit(c, "PerLayer", ROTATIONS)
    assert validate(cc) == []
    assert equal_up_to_phase(unitary(cc), unitary(expanded(c)), atol=1e-7)

from .decompose import cnot_count, decompose_1q, decompose_su4, decompose_su4_gates, kron_factor
from .native import NativeGateSet, generates_clifford_group, lower_gate
from .policy import (
    CompilationPolicy,
    cancel_adjacent_inverses,
    compile_circuit,
    physical_depth,
    segment_by_barriers,
)
from .synthesis import clifford_synthesis, synthesize_gates

__all__ = [
    "CompilationPolicy",
    "NativeGateSet",
    "cancel_adjacent_inverses",
    "clifford_synthesis",
    "cnot_count",
    "compile_circuit",
    "decompose_1q",
    "decompose_su4",
    "decompose_su4_gates",
    "generates_clifford_group",
    "kron_factor",
    "lower_gate",
    "physical_depth",
    "segment_by_barriers",
    "synthesize_gates",
]

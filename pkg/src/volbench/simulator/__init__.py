from .density import density_matrix, density_matrix_distribution
from .noisy import NoiseModel, OutcomeRecord, sample_noisy
from .program import Program, build_program, gate_class
from .statevector import (
    DEFAULT_WIDTH_CAP,
    ideal_distribution,
    is_clifford_circuit,
    statevector,
    unitary,
)

__all__ = [
    "DEFAULT_WIDTH_CAP",
    "NoiseModel",
    "OutcomeRecord",
    "Program",
    "build_program",
    "density_matrix",
    "density_matrix_distribution",
    "gate_class",
    "ideal_distribution",
    "is_clifford_circuit",
    "sample_noisy",
    "statevector",
    "unitary",
]

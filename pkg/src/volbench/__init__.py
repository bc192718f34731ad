"""Volumetric benchmarks for quantum processors.

Circuits are indexed by shape (width, depth); each shape maps to an ensemble
of circuits, a compilation policy and a success criterion.  The package
generates those ensembles, compiles and simulates them, scores the results
and reports frontiers and quantum volume.
"""
from .analysis import (
    DepolarizingPredictor,
    GridEntry,
    VolumetricGrid,
    discrepancy_report,
    pareto_frontier,
    predict,
    quantum_volume,
    shape_lattice,
)
from .circuit import Circuit, GateApplication, Layer, deserialize, gate, serialize
from .compiler import CompilationPolicy, NativeGateSet, compile_circuit, decompose_1q, decompose_su4
from .distribution import Distribution
from .ensembles import EnsembleSpec, Shape, generate
from .kernels import BACKEND
from .pipeline import BenchmarkConfig, run_benchmark
from .simulator import NoiseModel, OutcomeRecord, ideal_distribution, sample_noisy

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BenchmarkConfig",
    "Circuit",
    "CompilationPolicy",
    "DepolarizingPredictor",
    "Distribution",
    "EnsembleSpec",
    "GateApplication",
    "GridEntry",
    "Layer",
    "NativeGateSet",
    "NoiseModel",
    "OutcomeRecord",
    "Shape",
    "VolumetricGrid",
    "compile_circuit",
    "decompose_1q",
    "decompose_su4",
    "deserialize",
    "discrepancy_report",
    "gate",
    "generate",
    "ideal_distribution",
    "pareto_frontier",
    "predict",
    "quantum_volume",
    "run_benchmark",
    "sample_noisy",
    "serialize",
    "shape_lattice",
]

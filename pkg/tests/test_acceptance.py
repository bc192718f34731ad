"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (also repeated in the pytest
terminal summary).  Runtime bounds are part of each verdict.
"""
import json
import math
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from volbench import metrics as M
from volbench.analysis import GridEntry, VolumetricGrid
from volbench.cli import main
from volbench.compiler import NativeGateSet, compile_circuit, decompose_1q, decompose_su4_gates
from volbench.compiler.decompose import gates_unitary
from volbench.distribution import Distribution
from volbench.ensembles import (
    FAMILIES,
    Shape,
    clifford_rb_ensemble,
    direct_rb_ensemble,
    generate,
    germ_periodic_ensemble,
    qv_ensemble,
)
from volbench.errors import ShapeUnsupported, UniformOutcome
from volbench import gates as G
from volbench.pipeline import BenchmarkConfig, run_benchmark
from volbench.simulator import NoiseModel, density_matrix_distribution, ideal_distribution, sample_noisy, statevector
from volbench.stabilizer import stabilizer_distribution

from conftest import haar, record_acceptance
from test_stabilizer import random_clifford_circuit


def _elapsed(t0):
    return time.perf_counter() - t0


# 1 -------------------------------------------------------------------------


def test_criterion_1_inversion_law():
    t0 = time.perf_counter()
    shapes = [Shape(w, d) for w in (1, 2, 3, 4) for d in (1, 2, 4, 8, 16, 32)]
    per_shape = math.ceil(1000 / len(shapes))
    checked = {"clifford_rb": 0, "direct_rb": 0}
    bad = 0
    for fn, name in ((clifford_rb_ensemble, "clifford_rb"), (direct_rb_ensemble, "direct_rb")):
        for s in shapes:
            for c in fn(s, K=per_shape, seed=11).circuits:
                want = Distribution.point(c.metadata["ideal_outcome"])
                bad += stabilizer_distribution(c) != want
                checked[name] += 1
    secs = _elapsed(t0)
    ok = bad == 0 and min(checked.values()) >= 1000 and secs < 60
    record_acceptance(1, ok, f"{checked['clifford_rb']} Clifford-RB + {checked['direct_rb']} direct-RB circuits, "
                             f"{bad} mismatches, {secs:.1f}s")
    assert ok


# 2 -------------------------------------------------------------------------


def test_criterion_2_dual_path():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        c = random_clifford_circuit(6, 20, rng)
        dense = Distribution.from_dense(np.abs(statevector(c)) ** 2, 6)
        worst = max(worst, stabilizer_distribution(c).tvd(dense))
    secs = _elapsed(t0)
    ok = worst < 1e-10 and secs < 60
    record_acceptance(2, ok, f"max TVD stabilizer vs statevector {worst:.2e} over 100 circuits, {secs:.1f}s")
    assert ok


# 3 -------------------------------------------------------------------------

_NOISE3 = NoiseModel(eps1=0.01, eps2=0.03)
_SHOTS3 = 100_000
_K3 = 5


def _family_check(family, shape, seed=0):
    """(|MC - exact| / sigma, MC family score, exact family score) or None."""
    try:
        spec = generate(family, shape, K=_K3, seed=seed)
    except ShapeUnsupported:
        return None
    sampled, exact = [], []
    for i, c in enumerate(spec.circuits):
        cc = compile_circuit(c, spec.compilation_policy)
        ideal = ideal_distribution(cc)
        outcome = c.metadata.get("ideal_outcome")
        try:
            exact.append(M.expected_score(density_matrix_distribution(cc, _NOISE3), ideal, spec.criterion, outcome))
        except UniformOutcome:
            return None
        rec = sample_noisy(cc, _NOISE3, _SHOTS3, 1000 * shape.w + 10 * shape.d + i)
        sampled.append(M.score_circuit(rec, ideal, spec.criterion, outcome, seed=i))
    mc = M.score_ensemble(sampled, spec.family_rule).score
    ex, sig = M.ensemble_expected(exact, spec.family_rule)
    sigma = sig / math.sqrt(_SHOTS3)
    return abs(mc - ex) / sigma if sigma > 0 else (0.0 if abs(mc - ex) < 1e-12 else math.inf), mc, ex


def test_criterion_3_noise_oracle_agreement():
    t0 = time.perf_counter()
    rows = []
    for family in sorted(FAMILIES):
        for w in (1, 2, 3, 4):
            for d in (1, 4, 16):
                r = _family_check(family, Shape(w, d))
                if r is not None:
                    rows.append((family, w, d) + r)
    secs = _elapsed(t0)
    worst = max(rows, key=lambda r: r[3])
    failures = [r for r in rows if r[3] > 3]
    ok = not failures and secs < 600
    detail = (f"{len(rows)} (family, w, d) checks, worst {worst[3]:.2f} sigma at {worst[:3]}, "
              f"{len(failures)} beyond 3 sigma, {secs:.0f}s")
    for r in failures:
        print(f"   beyond 3 sigma: {r[:3]} mc={r[4]:.5f} exact={r[5]:.5f} ({r[3]:.2f} sigma)")
    record_acceptance(3, ok, detail)
    assert ok


# 4 -------------------------------------------------------------------------


def test_criterion_4_decomposition():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    err2, cnots = 0.0, set()
    for _ in range(500):
        u = haar(4, rng)
        gs = decompose_su4_gates(u)
        cnots.add(sum(g.kind == "CNOT" for g in gs))
        v = gates_unitary(gs, 2)
        k = int(np.argmax(np.abs(u)))
        err2 = max(err2, float(np.max(np.abs(u - (u.flat[k] / v.flat[k]) * v))))
    err1 = 0.0
    for _ in range(1000):
        u = haar(2, rng)
        a, b, c, p = decompose_1q(u)
        err1 = max(err1, float(np.max(np.abs(u - np.exp(1j * p) * G.u1q(a, b, c)))))
    secs = _elapsed(t0)
    ok = err2 < 1e-8 and cnots == {3} and err1 < 1e-10 and secs < 60
    record_acceptance(4, ok, f"SU(4) max error {err2:.1e}, CNOT counts {sorted(cnots)}, "
                             f"1q max error {err1:.1e}, {secs:.1f}s")
    assert ok


# 5 -------------------------------------------------------------------------


def test_criterion_5_heavy_output_separation():
    t0 = time.perf_counter()
    spec = qv_ensemble(Shape(4, 4), K=200, seed=0)
    rng = np.random.default_rng(5)
    ideal_mass, spoof = [], []
    for c in spec.circuits:
        ideal = ideal_distribution(c)
        heavy = M.heavy_set(ideal)
        ideal_mass.append(sum(ideal[s] for s in heavy))
        draws = np.bincount(rng.integers(0, 16, size=100_000), minlength=16)
        spoof.append(sum(int(draws[int(s, 2)]) for s in heavy) / 100_000)
    hm, hs = float(np.mean(ideal_mass)), float(np.mean(spoof))
    secs = _elapsed(t0)
    ok = 0.75 <= hm <= 0.92 and hs < 0.55 and hs < hm and secs < 300
    record_acceptance(5, ok, f"ideal heavy mass {hm:.4f}, uniform spoof HOP {hs:.4f}, {secs:.1f}s")
    assert ok


# 6 -------------------------------------------------------------------------


def test_criterion_6_rabi_boundary(tmp_path):
    t0 = time.perf_counter()
    eps1, eps2 = 5e-4, 3e-3
    d_star = math.floor(math.log(1 / 3) / math.log(1 - eps1))
    depths = [2**k for k in range(14)]
    cfg = BenchmarkConfig.from_json({
        "benchmark": {"family": "rabi", "seed": 6, "shots": 1000},
        "lattice": {"shapes": [[1, d] for d in depths]},
        "noise": {"eps1": eps1, "eps2": eps2},
    })
    grid = run_benchmark(cfg, str(tmp_path))
    passing = [d for d in depths if grid.entries[(1, d)].passed]
    observed = max(passing)
    on_lattice = max(d for d in depths if d <= d_star)
    steps = abs(depths.index(observed) - depths.index(on_lattice))
    secs = _elapsed(t0)
    ok = d_star == 2196 and steps <= 1 and secs < 300
    record_acceptance(6, ok, f"d*={d_star} (lattice {on_lattice}), simulated frontier {observed}, "
                             f"{steps} lattice step(s) apart, {secs:.1f}s")
    assert ok


# 7 -------------------------------------------------------------------------


def test_criterion_7_quantum_volume(tmp_path, capsys):
    t0 = time.perf_counter()
    lattice = range(1, 11)
    g = VolumetricGrid("qv", {}, {"family": "qv", "criterion": "HeavyOutput", "threshold": 2 / 3})
    for w in lattice:
        for d in lattice:
            ok_cell = max(w, d) <= 8 if w == d else w * d <= 40
            g.set(w, d, GridEntry(True, ok_cell, 0.8 if ok_cell else 0.55, 30))
    grid = tmp_path / "grid.json"
    grid.write_text(g.dumps())
    svg = tmp_path / "qv.svg"
    capsys.readouterr()
    code = main(["qv", "--grid", str(grid)])
    printed = capsys.readouterr().out.strip()
    code |= main(["plot", "--grid", str(grid), "--qv", "--axes", "linear", "--out", str(svg)])
    root = ET.fromstring(svg.read_bytes())
    implied = {(int(e.get("data-w")), int(e.get("data-d"))) for e in root.iter() if e.get("class") == "implied"}
    want = {(w, d) for w in lattice for d in lattice if w <= 8 and d <= 8}
    secs = _elapsed(t0)
    ok = code == 0 and printed == "8" and implied == want and secs < 10
    record_acceptance(7, ok, f"qv printed {printed}, implied region {len(implied)} cells "
                             f"(expected {len(want)}), {secs:.2f}s")
    assert ok


# 8 -------------------------------------------------------------------------


def _exact_family_score(spec, noise, native=None):
    vals = []
    for c in spec.circuits:
        cc = compile_circuit(c, spec.compilation_policy, native)
        dist = density_matrix_distribution(cc, noise)
        vals.append(M.expected_score(dist, ideal_distribution(cc), spec.criterion, c.metadata.get("ideal_outcome")))
    return M.ensemble_expected(vals, spec.family_rule)[0]


def test_criterion_8_coherent_vs_depolarizing():
    t0 = time.perf_counter()
    noise = NoiseModel(coherent_overrotation=0.02)
    germ = _exact_family_score(germ_periodic_ensemble(Shape(1, 64), germ_set=(("X",),)), noise)
    # rotation-only native set, so every compiled RB gate feels the over-rotation
    rotations = NativeGateSet(("RX", "RY", "RZ"), ("CNOT",))
    rb = _exact_family_score(clifford_rb_ensemble(Shape(1, 64), K=30, seed=8), noise, rotations)
    secs = _elapsed(t0)
    ok = germ < rb and secs < 60
    record_acceptance(8, ok, f"germ {{X}} score {germ:.4f} vs Clifford-RB {rb:.4f} at d=64, eta=0.02, {secs:.1f}s")
    assert ok


# 9 -------------------------------------------------------------------------


def test_criterion_9_clopper_pearson():
    t0 = time.perf_counter()
    lower = M.clopper_pearson_lower(689, 1000, 0.95)
    secs = _elapsed(t0)
    ok = 0.5 < lower < 2 / 3 and secs < 1
    record_acceptance(9, ok, f"lower 95% bound for 689/1000 = {lower:.6f}, {secs * 1000:.0f}ms")
    assert ok


# 10 ------------------------------------------------------------------------


def test_criterion_10_reproducibility(tmp_path, capsys):
    t0 = time.perf_counter()
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({
        "benchmark": {"family": "qv", "seed": 10, "shots": 1000, "K": 10},
        "lattice": {"max_w": 6, "max_d": 16},
        "noise": {"eps1": 5e-4, "eps2": 3e-3},
    }))
    codes = [
        main(["run", "--config", str(cfg), "--out", str(tmp_path / "serial"), "--workers", "1"]),
        main(["run", "--config", str(cfg), "--out", str(tmp_path / "parallel"), "--workers", "8"]),
    ]
    same = {
        name: (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()
        for name in ("grid.json", "plot.svg")
    }
    secs = _elapsed(t0)
    ok = codes == [0, 0] and all(same.values()) and secs < 600
    record_acceptance(10, ok, f"grid.json identical={same['grid.json']}, plot.svg identical={same['plot.svg']} "
                              f"(1 vs 8 workers), {secs:.1f}s")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))

import json
import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from volbench.circuit import Circuit, shape, validate
from volbench.compiler import CompilationPolicy, compile_circuit
from volbench.distribution import Distribution
from volbench.ensembles import (
    FAMILIES,
    SAMPLED,
    EnsembleSpec,
    Shape,
    clifford_rb_ensemble,
    direct_rb_ensemble,
    generate,
    germ_periodic_ensemble,
    grover_ensemble,
    haar_unitary,
    idle_tomography_ensemble,
    qv_ensemble,
    rabi_ensemble,
    ramsey_ensemble,
    simultaneous_rb_ensemble,
    trotter_ensemble,
)
from volbench.errors import InvalidParameter, ShapeUnsupported
from volbench.metrics import AllPass, MeanScoreAbove, expected_score, heavy_set
from volbench.simulator import NoiseModel, density_matrix_distribution, ideal_distribution
from volbench.stabilizer import stabilizer_distribution, tableau_compose, tableau_identity, tableau_of


def tvd(p, q):
    keys = set(p.probs) | set(q.probs)
    return 0.5 * sum(abs(p[k] - q[k]) for k in keys)


def marginal0(dist, q):
    return sum(p for s, p in dist.probs.items() if s[q] == "0")


# --- Shape ----------------------------------------------------------------


def test_shape_validation():
    assert tuple(Shape(3, 0)) == (3, 0)
    with pytest.raises(InvalidParameter):
        Shape(0, 1)
    with pytest.raises(InvalidParameter):
        Shape(1, -1)


# --- generic laws ---------------------------------------------------------

@pytest.mark.parametrize("family", sorted(FAMILIES))
@pytest.mark.parametrize("w, d", [(2, 0), (2, 3), (3, 4)])
def test_shape_law_and_validity(family, w, d):
    try:
        spec = generate(family, Shape(w, d), K=3, seed=1)
    except ShapeUnsupported:
        assert family in ("clifford_rb", "simultaneous_rb") and d == 0
        return
    assert spec.shape == Shape(w, d)
    assert spec.circuits
    for c in spec.circuits:
        assert shape(c) == (w, d)
        assert validate(c) == []


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_determinism_by_serialization(family):
    a = generate(family, Shape(2, 3), K=4, seed=9)
    b = generate(family, Shape(2, 3), K=4, seed=9)
    assert json.dumps(a.to_json(), sort_keys=True) == json.dumps(b.to_json(), sort_keys=True)
    back = EnsembleSpec.from_json(json.loads(json.dumps(a.to_json())))
    assert json.dumps(back.to_json(), sort_keys=True) == json.dumps(a.to_json(), sort_keys=True)


@pytest.mark.parametrize("family", sorted(SAMPLED - {"grover"}))
def test_distinct_seeds_give_distinct_circuits(family):
    a = generate(family, Shape(2, 3), K=4, seed=1)
    b = generate(family, Shape(2, 3), K=4, seed=2)
    assert json.dumps(a.to_json()["circuits"]) != json.dumps(b.to_json()["circuits"])


def test_circuit_draws_do_not_depend_on_k():
    a = qv_ensemble(Shape(3, 2), K=2, seed=4)
    b = qv_ensemble(Shape(3, 2), K=5, seed=4)
    assert [c.central for c in a.circuits] == [c.central for c in b.circuits[:2]]


def test_unsupported_shapes():
    for fn, s in [(qv_ensemble, (1, 2)), (clifford_rb_ensemble, (2, 0)), (grover_ensemble, (1, 1)),
                  (trotter_ensemble, (1, 3)), (simultaneous_rb_ensemble, (2, 0))]:
        with pytest.raises(ShapeUnsupported):
            fn(Shape(*s))


def test_unknown_family():
    with pytest.raises(InvalidParameter):
        generate("nope", Shape(1, 1))


# --- quantum volume -------------------------------------------------------


def test_haar_su4_moments():
    rng = np.random.default_rng(0)
    samples = np.array([haar_unitary(4, rng)[1, 2] for _ in range(100_000)])
    m2 = np.mean(np.abs(samples) ** 2)
    m4 = np.mean(np.abs(samples) ** 4)
    # Haar on U(4): E|u|^2 = 1/4, E|u|^4 = 2 / (4 * 5)
    assert m2 == pytest.approx(0.25, abs=0.003)
    assert m4 == pytest.approx(0.1, abs=0.003)
    assert abs(np.mean(samples)) < 0.005
    u = haar_unitary(4, rng)
    assert np.linalg.det(u) == pytest.approx(1.0)


def test_qv_policy_and_rule():
    spec = qv_ensemble(Shape(4, 4), K=3, seed=0)
    assert spec.compilation_policy is CompilationPolicy.FREE
    assert spec.family_rule == MeanScoreAbove(2 / 3)
    assert len(spec.circuits) == 3 and spec.variant == "Sampled"


def test_qv_mean_heavy_output_probability():
    spec = qv_ensemble(Shape(4, 4), K=200, seed=0)
    hops = []
    for c in spec.circuits:
        ideal = ideal_distribution(c)
        hops.append(sum(ideal[s] for s in heavy_set(ideal)))
    assert 0.75 <= np.mean(hops) <= 0.92


# --- randomized benchmarking ---------------------------------------------


def test_clifford_rb_inverts():
    spec = clifford_rb_ensemble(Shape(3, 8), K=100, seed=5)
    for c in spec.circuits:
        layers = [tableau_of(Circuit(3, (layer,))) for layer in c.central]
        total = reduce(lambda acc, t: tableau_compose(t, acc), layers, tableau_identity(3))
        assert total.is_identity()
    assert all(b for b in spec.circuits[0].barriers)
    assert spec.circuits[0].metadata["ideal_outcome"] == "000"


def test_clifford_rb_depth_one_is_identity():
    spec = clifford_rb_ensemble(Shape(2, 1), K=5, seed=1)
    for c in spec.circuits:
        assert tableau_of(c).is_identity()


def test_direct_rb_reaches_its_outcome():
    spec = direct_rb_ensemble(Shape(4, 16), K=100, seed=2)
    for c in spec.circuits:
        assert stabilizer_distribution(c) == Distribution.point(c.metadata["ideal_outcome"])
    assert len({c.metadata["ideal_outcome"] for c in spec.circuits}) > 1


def test_direct_rb_density_zero_has_no_cnots():
    spec = direct_rb_ensemble(Shape(4, 6), K=10, seed=2, two_qubit_density=0.0)
    for c in spec.circuits:
        for layer in c.central:
            assert all(len(g.targets) == 1 for g in layer.gates)
    with pytest.raises(InvalidParameter):
        direct_rb_ensemble(Shape(2, 2), K=1, two_qubit_density=1.5)


def test_simultaneous_rb():
    spec = simultaneous_rb_ensemble(Shape(3, 6), K=10, seed=3)
    for c in spec.circuits:
        assert stabilizer_distribution(c) == Distribution.point("000")
        # each layer acts qubit by qubit
        for layer in c.central:
            assert all(len(g.targets) == 1 for g in layer.gates)
    assert spec.circuits[0].metadata["idle_padding"] is False


# --- single-circuit families ----------------------------------------------


@pytest.mark.parametrize("d", [0, 1, 2, 5])
def test_rabi_parity(d):
    spec = rabi_ensemble(Shape(3, d))
    assert spec.variant == "Single"
    expected = ("1" if d % 2 else "0") * 3
    assert ideal_distribution(spec.circuits[0]) == Distribution.point(expected)


def test_ramsey_fringe():
    for d in range(1, 33):
        c = ramsey_ensemble(Shape(1, d), theta=0.1).circuits[0]
        assert ideal_distribution(c)["0"] == pytest.approx(math.cos(d * 0.1 / 2) ** 2, abs=1e-12)
    assert ideal_distribution(ramsey_ensemble(Shape(2, 7)).circuits[0]) == Distribution.point("00")
    c = ramsey_ensemble(Shape(2, 10), theta=math.pi / 10).circuits[0]
    assert ideal_distribution(c)["11"] == pytest.approx(1.0, abs=1e-12)
    assert c.metadata["ideal_outcome"] == "11"


def test_idle_tomography():
    for w in (1, 3, 5):
        assert len(idle_tomography_ensemble(Shape(w, 2)).circuits) == 9
    spec = idle_tomography_ensemble(Shape(3, 4))
    assert isinstance(spec.family_rule, AllPass)
    by_basis = {(c.metadata["prep"], c.metadata["measure"]): c for c in spec.circuits}
    assert ideal_distribution(by_basis["Z", "Z"]) == Distribution.point("000")
    xx = ideal_distribution(by_basis["X", "X"])
    for q in range(3):
        assert marginal0(xx, q) == pytest.approx(1.0)
    xz = ideal_distribution(by_basis["X", "Z"])
    assert marginal0(xz, 0) == pytest.approx(0.5)


def test_germ_layout():
    spec = germ_periodic_ensemble(Shape(2, 7))
    assert len(spec.circuits) == 4 * 6
    for c in spec.circuits:
        reps = c.metadata["repetitions"]
        assert reps == 7 // len(c.metadata["germ"])
        assert c.metadata["germ_depth"] <= 7
    with pytest.raises(InvalidParameter):
        germ_periodic_ensemble(Shape(1, 2), germ_set=())


def test_germ_x_even_repetitions_identity():
    spec = germ_periodic_ensemble(Shape(2, 4), germ_set=(("X",),))
    zz = [c for c in spec.circuits if c.metadata["fiducial"] == "+Z"][0]
    assert ideal_distribution(zz) == Distribution.point("00")


def test_germ_amplifies_over_rotation():
    noise = NoiseModel(coherent_overrotation=0.02)
    dists = []
    for d in (4, 16, 64):
        spec = germ_periodic_ensemble(Shape(1, d), germ_set=(("X",),))
        c = [c for c in spec.circuits if c.metadata["fiducial"] == "+Z"][0]
        cc = compile_circuit(c, spec.compilation_policy)
        dists.append(tvd(density_matrix_distribution(cc, noise), ideal_distribution(cc)))
    assert dists[0] < dists[1] < dists[2]
    # exact: d extra rotations of 0.02 flip the qubit with probability sin^2(0.01 d)
    assert dists[2] == pytest.approx(math.sin(0.64) ** 2, abs=1e-9)


def test_grover_closed_form():
    c = grover_ensemble(Shape(2, 1)).circuits[0]
    assert ideal_distribution(c)["00"] == pytest.approx(1.0, abs=1e-12)
    uniform = ideal_distribution(grover_ensemble(Shape(3, 0)).circuits[0])
    assert all(p == pytest.approx(1 / 8) for p in uniform.probs.values()) and len(uniform.probs) == 8
    for d in (1, 2, 3):
        c = grover_ensemble(Shape(3, d), marked="101").circuits[0]
        expected = math.sin((2 * d + 1) * math.asin(2 ** -1.5)) ** 2
        assert ideal_distribution(c)["101"] == pytest.approx(expected, abs=1e-10)


def test_grover_random_marking():
    spec = grover_ensemble(Shape(3, 1), marked="random", K=12, seed=4)
    assert spec.variant == "Sampled" and isinstance(spec.family_rule, MeanScoreAbove)
    assert len({c.metadata["marked"] for c in spec.circuits}) > 1
    with pytest.raises(InvalidParameter):
        grover_ensemble(Shape(3, 1), marked="10")


def _dense_trotter(w, J, h, dt):
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)

    def on(ops):
        return reduce(np.kron, [ops.get(q, np.eye(2)) for q in range(w)])

    step = np.eye(2**w, dtype=complex)
    for start in (0, 1):
        for q in range(start, w - 1, 2):
            step = expm(1j * J * dt * on({q: z, q + 1: z})) @ step
    for q in range(w):
        step = expm(1j * h * dt * on({q: x})) @ step
    return step


def test_trotter_matches_matrix_exponential():
    w, d = 4, 10
    c = trotter_ensemble(Shape(w, d), J=1.0, h=1.0, dt=0.1).circuits[0]
    psi = np.zeros(2**w, dtype=complex)
    psi[0] = 1
    psi = np.linalg.matrix_power(_dense_trotter(w, 1.0, 1.0, 0.1), d) @ psi
    oracle = Distribution.from_dense(np.abs(psi) ** 2, w)
    assert tvd(ideal_distribution(c, cutoff=0.0), oracle) < 1e-10


def test_trotter_trivial_cases():
    assert ideal_distribution(trotter_ensemble(Shape(3, 4), J=0, h=0).circuits[0]) == Distribution.point("000")
    dist = ideal_distribution(trotter_ensemble(Shape(3, 5), J=1.0, h=0).circuits[0])
    assert dist["000"] == pytest.approx(1.0, abs=1e-12)


# --- monotone hardness under depolarizing noise --------------------------

_NOISE = NoiseModel(eps1=0.01, eps2=0.03)


def _exact_family_scores(spec):
    scores = []
    for c in spec.circuits:
        cc = compile_circuit(c, spec.compilation_policy)
        noisy = density_matrix_distribution(cc, _NOISE)
        scores.append(noisy[c.metadata.get("ideal_outcome")])
    return np.array(scores)


@pytest.mark.parametrize("family, w", [
    ("rabi", 1), ("rabi", 3), ("clifford_rb", 1), ("clifford_rb", 2), ("direct_rb", 2), ("direct_rb", 3),
])
def test_monotone_hardness(family, w):
    # The family score is an expectation over the circuit measure; sampled
    # families estimate it from K draws, so each step gets a 3-sigma allowance
    # for the draw-to-draw spread (zero for single-circuit families).
    depths = [1, 2, 4, 8, 16]
    runs = [_exact_family_scores(generate(family, Shape(w, d), K=40, seed=0)) for d in depths]
    means = [r.mean() for r in runs]
    sems = [r.std(ddof=1) / np.sqrt(len(r)) if len(r) > 1 else 0.0 for r in runs]
    for i in range(len(depths) - 1):
        slack = 3 * math.hypot(sems[i], sems[i + 1])
        assert means[i] >= means[i + 1] - slack - 1e-12, (depths[i], means)
    assert means[0] > means[-1]


def test_rabi_density_monotone_each_depth():
    probs = []
    for d in range(1, 65):
        c = rabi_ensemble(Shape(1, d)).circuits[0]
        probs.append(density_matrix_distribution(c, NoiseModel(eps1=0.01))[c.metadata["ideal_outcome"]])
    assert all(a >= b - 1e-12 for a, b in zip(probs, probs[1:]))


@given(st.integers(1, 3), st.integers(1, 6), st.integers(0, 1000))
def test_rb_inversion_property(w, d, seed):
    for fn in (clifford_rb_ensemble, simultaneous_rb_ensemble):
        c = fn(Shape(w, d), K=1, seed=seed).circuits[0]
        assert stabilizer_distribution(c) == Distribution.point("0" * w)
    c = direct_rb_ensemble(Shape(w, d), K=1, seed=seed).circuits[0]
    assert stabilizer_distribution(c) == Distribution.point(c.metadata["ideal_outcome"])


def test_expected_score_agrees_with_family_score():
    spec = rabi_ensemble(Shape(2, 3))
    c = spec.circuits[0]
    ideal = ideal_distribution(c)
    score, _ = expected_score(density_matrix_distribution(c, _NOISE), ideal, spec.criterion)
    assert 0 < score < 1

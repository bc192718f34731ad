"""Exact 1- and 2-qubit unitary decompositions.

``decompose_su4`` uses the magic-basis (KAK) form: a two-qubit unitary is
locally equivalent to ``exp(i(a XX + b YY + c ZZ))``, and the number of
CNOTs it needs follows from the spectrum of ``gamma(U) = U (YY) U^T (YY)``.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .. import gates as G
from ..circuit import Circuit, GateApplication, layers_from_gates
from ..errors import NonUnitary

_MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / math.sqrt(2)
_YY = np.kron(G.PAULI_Y, G.PAULI_Y)


def _wrap(angle):
    """Angle in (-pi, pi]; returns +0.0 for zero."""
    a = math.remainder(angle, 2 * math.pi)
    if a <= -math.pi:
        a += 2 * math.pi
    return a + 0.0


def decompose_1q(u, atol=1e-10):
    """``(alpha, beta, gamma, phase)`` with ``U = e^{i phase} RZ(alpha) RY(beta) RZ(gamma)``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not G.is_unitary(u, atol):
        raise NonUnitary("decompose_1q needs a 2x2 unitary")
    v = u / np.sqrt(np.linalg.det(u))
    c, s = abs(v[0, 0]), abs(v[1, 0])
    beta = 2 * math.atan2(s, c)
    if s < 1e-12:
        alpha, gamma = -2 * np.angle(v[0, 0]), 0.0
    elif c < 1e-12:
        alpha, gamma = 2 * np.angle(v[1, 0]), 0.0
    else:
        plus = -2 * np.angle(v[0, 0])
        minus = 2 * np.angle(v[1, 0])
        alpha, gamma = (plus + minus) / 2, (plus - minus) / 2
    alpha, gamma = _wrap(alpha), _wrap(gamma)
    w = G.u1q(alpha, beta, gamma)
    k = int(np.argmax(np.abs(w)))
    phase = _wrap(float(np.angle(u.flat[k] / w.flat[k])))
    return alpha, beta + 0.0, gamma, phase


def kron_factor(m):
    """Split a 4x4 ``A kron B`` (up to scalar) into unitary ``A`` and ``B``."""
    t = np.asarray(m).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(t)
    a = u[:, 0].reshape(2, 2) * math.sqrt(s[0])
    b = vh[0].reshape(2, 2) * math.sqrt(s[0])
    a = a / math.sqrt(abs(np.linalg.det(a)))
    b = b / math.sqrt(abs(np.linalg.det(b)))
    return a, b


def _to_special(u):
    return u / np.linalg.det(u) ** 0.25


def cnot_count(u):
    """Minimum number of CNOTs needed for a two-qubit unitary."""
    s = _to_special(np.asarray(u, dtype=complex))
    g = s @ _YY @ s.T @ _YY
    eye = np.eye(4)
    if np.allclose(g, eye, atol=1e-8) or np.allclose(g, -eye, atol=1e-8):
        return 0
    tr = np.trace(g)
    if abs(tr) < 1e-8 and np.allclose(g @ g, -eye, atol=1e-8):
        return 1
    if abs(tr.imag) < 1e-8:
        return 2
    return 3


def _diag_orthogonal(m, rng):
    for _ in range(50):
        x, y = rng.uniform(0.1, 1.0, 2)
        _, p = np.linalg.eigh(x * m.real + y * m.imag)
        d = p.T @ m @ p
        if np.allclose(d, np.diag(np.diag(d)), atol=1e-10):
            if np.linalg.det(p) < 0:
                p[:, 0] *= -1
            return p, np.diag(d)
    raise RuntimeError("simultaneous diagonalization failed")


def _kak(u, rng):
    ub = _MAGIC.conj().T @ _to_special(u) @ _MAGIC
    p, d = _diag_orthogonal(ub.T @ ub, rng)
    return ub, p, d


def _thetas(d):
    th = np.angle(d) / 2
    s = round(th.sum() / np.pi)
    order = np.argsort(th)
    k = 0
    while s > 0:
        th[order[-1 - k % 4]] -= np.pi
        s -= 1
        k += 1
    while s < 0:
        th[order[k % 4]] += np.pi
        s += 1
        k += 1
    return th


def _match(u, t, rng):
    """Local ``L, R`` with ``U ~ L T R``, or None if ``T`` is not locally
    equivalent to ``U``."""
    for ph in (1, 1j):
        ub, pu, du = _kak(u, rng)
        tb, pt, dt = _kak(ph * t, rng)
        perm, used = [], set()
        for x in du:
            j = min((j for j in range(4) if j not in used), key=lambda j: abs(dt[j] - x))
            if abs(dt[j] - x) > 1e-6:
                break
            perm.append(j)
            used.add(j)
        else:
            pt = pt[:, perm]
            if np.linalg.det(pt) < 0:
                pt[:, 0] *= -1
            th = np.angle(du) / 2
            if abs(np.prod(np.exp(1j * th)) + 1) < 1e-6:
                th[0] += np.pi
            dl = np.diag(np.exp(-1j * th))
            k1u, k2u = ub @ pu @ dl, pu.T
            k1t, k2t = tb @ pt @ dl, pt.T
            left = _MAGIC @ k1u @ k1t.T @ _MAGIC.conj().T
            right = _MAGIC @ k2t.T @ k2u @ _MAGIC.conj().T
            return left, right
    return None


def _template3(a, b, c):
    gates = [
        GateApplication("CNOT", (1, 0)),
        GateApplication("RZ", (0,), (2 * c + math.pi / 2,)),
        GateApplication("RY", (1,), (2 * a + math.pi / 2,)),
        GateApplication("CNOT", (0, 1)),
        GateApplication("RY", (1,), (2 * b + math.pi / 2,)),
        GateApplication("CNOT", (1, 0)),
    ]
    return gates


def _template2(a, c):
    return [
        GateApplication("CNOT", (0, 1)),
        GateApplication("RX", (0,), (-2 * a,)),
        GateApplication("RZ", (1,), (-2 * c,)),
        GateApplication("CNOT", (0, 1)),
    ]


def gates_unitary(gate_list, width):
    """Dense unitary of a time-ordered list of 1q/2q gates."""
    dim = 1 << width
    u = np.eye(dim, dtype=complex)
    for g in gate_list:
        m = g.matrix()
        full = _embed(m, g.targets, width)
        u = full @ u
    return u


def _embed(m, targets, width):
    k = len(targets)
    rest = [q for q in range(width) if q not in targets]
    order = list(targets) + rest
    full = np.kron(m, np.eye(1 << (width - k)))
    t = full.reshape((2,) * (2 * width))
    inv = np.argsort(order)
    axes = list(inv) + [width + i for i in inv]
    return t.transpose(axes).reshape(1 << width, 1 << width)


def _max_err(u, v):
    k = int(np.argmax(np.abs(u)))
    ph = u.flat[k] / v.flat[k]
    ph /= abs(ph)
    return float(np.max(np.abs(u - ph * v)))


def _local_gates(m):
    a, b = kron_factor(m)
    return [GateApplication("U1q", (q,), decompose_1q(f, atol=1e-8)[:3]) for f, q in ((a, 0), (b, 1))]


def decompose_su4_gates(u, seed=0):
    """Time-ordered gates on local qubits (0, 1) realizing ``u`` up to phase."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not G.is_unitary(u):
        raise NonUnitary("decompose_su4 needs a 4x4 unitary")
    rng = np.random.default_rng(seed)
    n = cnot_count(u)
    if n == 0:
        return _local_gates(u)
    candidates = []
    if n == 1:
        candidates.append([GateApplication("CNOT", (0, 1))])
    ub, p, d = _kak(u, rng)
    th = _thetas(d)
    if n == 2:
        for perm in itertools.permutations(range(4)):
            t = th[list(perm)]
            a, b, c = (t[0] + t[2]) / 2, (t[1] + t[2]) / 2, (t[0] + t[1]) / 2
            for x, y, zero in ((a, c, b), (c, a, b), (a, b, c), (b, a, c), (b, c, a), (c, b, a)):
                if abs(math.remainder(zero, math.pi / 2)) < 1e-9:
                    candidates.append(_template2(x, y))
    a, b, c = (th[0] + th[2]) / 2, (th[1] + th[2]) / 2, (th[0] + th[1]) / 2
    candidates.append(_template3(a, b, c))
    for core in candidates:
        t = gates_unitary(core, 2)
        for _ in range(3):
            lr = _match(u, t, rng)
            if lr is None:
                break
            left, right = lr
            out = _local_gates(right) + core + _local_gates(left)
            if _max_err(u, gates_unitary(out, 2)) < 1e-9:
                return out
    raise RuntimeError("two-qubit decomposition did not converge")


def decompose_su4(u, seed=0):
    """Width-2 circuit fragment (at most 3 CNOTs) equal to ``u`` up to phase."""
    gate_list = decompose_su4_gates(u, seed)
    return Circuit(2, tuple(layers_from_gates(gate_list, 2)))

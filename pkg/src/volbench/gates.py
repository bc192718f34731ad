"""Gate kinds and their unitary matrices.

Conventions used throughout the package:

* Qubit 0 is the most significant bit of a basis index, so the bitstring
  ``"b0 b1 ... b(w-1)"`` read as a binary number is the statevector index.
* Two-qubit matrices are written in the basis ``|t0 t1>`` where ``t0`` is the
  first target (the control for CNOT).
* ``RX/RY/RZ(t) = exp(-i t P / 2)`` and ``U1q(a, b, c) = RZ(a) RY(b) RZ(c)``.
"""
from __future__ import annotations

from functools import lru_cache
from math import cos, pi, sin

import numpy as np

ONE_QUBIT_FIXED = ("Id", "X", "Y", "Z", "H", "S", "Sdg")
ROTATIONS = ("RX", "RY", "RZ")
ONE_QUBIT = ONE_QUBIT_FIXED + ROTATIONS + ("U1q",)
TWO_QUBIT = ("CNOT", "CZ", "SWAP", "SU4")
SPECIAL = ("PermuteAll", "SubroutineRef")
ALL_KINDS = ONE_QUBIT + TWO_QUBIT + SPECIAL

# kinds that a coherent over-rotation acts on
ROTATION_KINDS = frozenset(ROTATIONS + ("U1q",))
CLIFFORD_KINDS = frozenset(ONE_QUBIT_FIXED + ("CNOT", "CZ", "SWAP", "PermuteAll"))

N_PARAMS = {k: 0 for k in ONE_QUBIT_FIXED + ("CNOT", "CZ", "SWAP")}
N_PARAMS.update({"RX": 1, "RY": 1, "RZ": 1, "U1q": 3, "SU4": 16})

_S2 = 1 / np.sqrt(2)

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, PAULI_X, PAULI_Y, PAULI_Z)

FIXED_MATRICES = {
    "Id": I2,
    "X": PAULI_X,
    "Y": PAULI_Y,
    "Z": PAULI_Z,
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}
for _m in FIXED_MATRICES.values():
    _m.setflags(write=False)


def arity(kind, width=None):
    if kind in ONE_QUBIT:
        return 1
    if kind in TWO_QUBIT:
        return 2
    if kind in SPECIAL:
        return width
    raise KeyError(kind)


def rx(t):
    c, s = cos(t / 2), sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry(t):
    c, s = cos(t / 2), sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(t):
    return np.array(
        [[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]], dtype=complex
    )


def u1q(alpha, beta, gamma):
    return rz(alpha) @ ry(beta) @ rz(gamma)


def gate_matrix(kind, params=(), overrotation=0.0):
    """Unitary of a 1- or 2-qubit gate kind.

    ``overrotation`` is added to the rotation angle of RX/RY/RZ and to the
    polar angle of U1q; discrete gates ignore it.
    """
    if kind in FIXED_MATRICES:
        return FIXED_MATRICES[kind]
    if kind == "RX":
        return rx(params[0] + overrotation)
    if kind == "RY":
        return ry(params[0] + overrotation)
    if kind == "RZ":
        return rz(params[0] + overrotation)
    if kind == "U1q":
        a, b, c = params
        return u1q(a, b + overrotation, c)
    if kind == "SU4":
        return np.asarray(params, dtype=complex).reshape(4, 4)
    raise KeyError(f"no matrix for gate kind {kind!r}")


def is_unitary(m, atol=1e-10):
    m = np.asarray(m)
    return np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=atol, rtol=0)


def pauli_matrix(code, n):
    """Pauli on ``n`` qubits; ``code`` holds one base-4 digit per qubit, first
    qubit most significant (0=I, 1=X, 2=Y, 3=Z)."""
    m = np.eye(1, dtype=complex)
    for q in range(n):
        digit = (code >> (2 * (n - 1 - q))) & 3
        m = np.kron(m, PAULIS[digit])
    return m


@lru_cache(maxsize=4096)
def _conjugation_table_cached(key, n):
    u = np.frombuffer(key, dtype=complex).reshape(2**n, 2**n)
    return _conjugation_table(u, n)


def _xz_matrix(xbits, zbits, n):
    m = np.eye(1, dtype=complex)
    for q in range(n):
        f = I2
        if (xbits >> q) & 1:
            f = PAULI_X
        if (zbits >> q) & 1:
            f = f @ PAULI_Z
        m = np.kron(m, f)
    return m


def _conjugation_table(u, n):
    # For every local X^x Z^z (bit q of x/z refers to local qubit q), find
    # U X^x Z^z U^dag = i^r X^x' Z^z'.  Returns None if U is not Clifford.
    dim = 2**n
    table = np.zeros((4**n, 3), dtype=np.int64)
    basis = {}
    for xb in range(2**n):
        for zb in range(2**n):
            basis[(xb, zb)] = _xz_matrix(xb, zb, n)
    for xb in range(2**n):
        for zb in range(2**n):
            img = u @ basis[(xb, zb)] @ u.conj().T
            for (xo, zo), p in basis.items():
                c = np.trace(p.conj().T @ img) / dim
                if abs(abs(c) - 1) < 1e-9:
                    r = int(round(np.angle(c) / (pi / 2))) % 4
                    if abs(c - 1j**r) > 1e-9:
                        return None
                    table[xb + (zb << n)] = (xo, zo, r)
                    break
                if abs(c) > 1e-9:
                    return None
            else:
                return None
    table.setflags(write=False)
    return table


def conjugation_table(u):
    """Clifford action of a 1- or 2-qubit unitary, or None if not Clifford.

    Row ``x + (z << n)`` gives ``(x', z', r)`` with
    ``U X^x Z^z U^dag = i^r X^x' Z^z'``; bit q of x, z addresses local qubit q.
    """
    u = np.ascontiguousarray(u, dtype=complex)
    n = 1 if u.shape[0] == 2 else 2
    return _conjugation_table_cached(u.tobytes(), n)


def is_clifford_gate(kind, params=(), overrotation=0.0):
    if kind in CLIFFORD_KINDS:
        return True
    if kind == "SubroutineRef":
        return False
    return conjugation_table(gate_matrix(kind, params, overrotation)) is not None

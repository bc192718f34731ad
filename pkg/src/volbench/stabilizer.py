"""Clifford tableaus: composition, inversion, uniform sampling, simulation.

A tableau of the Clifford ``U`` stores, for each generator ``X_j`` and
``Z_j`` (rows ``j`` and ``w + j``), the Pauli ``U P U^dag`` as bits
``(x | z)`` plus an exponent ``r`` in Z_4 such that the row equals
``i^r X^x Z^z`` with every X factor written before every Z factor.  The
user-facing sign bit is ``((r - x.z) / 2) mod 2``, i.e. the sign in front of
the Hermitian Pauli that uses ``Y`` for ``XZ`` pairs.
"""
from __future__ import annotations

import numpy as np

from . import gates as G
from .circuit import bitstring, flatten
from .distribution import Distribution
from .errors import InvalidParameter, UnsupportedGate


class CliffordTableau:
    __slots__ = ("w", "x", "z", "r")

    def __init__(self, x, z, r):
        x = np.array(x, dtype=np.uint8) & 1
        z = np.array(z, dtype=np.uint8) & 1
        r = np.array(r, dtype=np.int64) % 4
        for a in (x, z, r):
            a.setflags(write=False)
        self.w = x.shape[1]
        self.x, self.z, self.r = x, z, r

    @property
    def symplectic(self):
        return np.hstack([self.x, self.z])

    @property
    def phases(self):
        xz = np.sum(self.x & self.z, axis=1)
        return (((self.r - xz) % 4) // 2).astype(np.uint8)

    @classmethod
    def from_symplectic(cls, matrix, phases=None):
        matrix = np.asarray(matrix, dtype=np.uint8)
        w = matrix.shape[0] // 2
        x, z = matrix[:, :w], matrix[:, w:]
        if phases is None:
            phases = np.zeros(2 * w, dtype=np.int64)
        r = 2 * np.asarray(phases, dtype=np.int64) + np.sum(x & z, axis=1)
        return cls(x, z, r)

    def is_symplectic(self):
        m = self.symplectic.astype(np.int64)
        w = self.w
        omega = np.block(
            [[np.zeros((w, w), int), np.eye(w, dtype=int)], [np.eye(w, dtype=int), np.zeros((w, w), int)]]
        )
        return np.array_equal(m @ omega @ m.T % 2, omega)

    def key(self):
        return self.symplectic.tobytes() + self.phases.tobytes()

    def __eq__(self, other):
        return (
            isinstance(other, CliffordTableau)
            and self.w == other.w
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
            and np.array_equal(self.r, other.r)
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        rows = []
        for i in range(2 * self.w):
            sign = "-" if self.phases[i] else "+"
            p = "".join("IXZY"[a + 2 * b] for a, b in zip(self.x[i], self.z[i]))
            gen = f"{'XZ'[i // self.w]}{i % self.w}"
            rows.append(f"{gen}->{sign}{p}")
        return f"CliffordTableau({', '.join(rows)})"

    def is_identity(self):
        return self == tableau_identity(self.w)


def tableau_identity(w):
    if w < 1:
        raise InvalidParameter("width must be >= 1")
    eye = np.eye(w, dtype=np.uint8)
    zero = np.zeros((w, w), dtype=np.uint8)
    return CliffordTableau(np.vstack([eye, zero]), np.vstack([zero, eye]), np.zeros(2 * w, dtype=np.int64))


def pauli_tableau(xbits, zbits):
    """Tableau of the Pauli ``X^x Z^z`` (conjugation only flips signs)."""
    xbits = np.asarray(xbits, dtype=np.int64)
    zbits = np.asarray(zbits, dtype=np.int64)
    t = tableau_identity(len(xbits))
    # X_j picks up a sign when the Pauli has Z on j, Z_j when it has X on j
    r = t.r + 2 * np.concatenate([zbits, xbits])
    return CliffordTableau(t.x, t.z, r)


def _gate_table(g, overrotation=0.0):
    kind = g.kind
    if kind == "SubroutineRef":
        raise UnsupportedGate("expand subroutines before tableau simulation")
    table = G.conjugation_table(g.matrix(overrotation))
    if table is None:
        raise UnsupportedGate(f"{kind}{list(g.params) if kind != 'SU4' else ''} is not a Clifford gate")
    return table


def apply_table(x, z, r, table, targets):
    # x, z, r are writable copies; updates rows in place
    if len(targets) == 1:
        (t0,) = targets
        idx = x[:, t0].astype(np.int64) | (z[:, t0].astype(np.int64) << 1)
        img = table[idx]
        x[:, t0] = img[:, 0]
        z[:, t0] = img[:, 1]
    else:
        t0, t1 = targets
        idx = (
            x[:, t0].astype(np.int64)
            | (x[:, t1].astype(np.int64) << 1)
            | (z[:, t0].astype(np.int64) << 2)
            | (z[:, t1].astype(np.int64) << 3)
        )
        img = table[idx]
        x[:, t0] = img[:, 0] & 1
        x[:, t1] = img[:, 0] >> 1
        z[:, t0] = img[:, 1] & 1
        z[:, t1] = img[:, 1] >> 1
    r += img[:, 2]


def _apply_inplace(x, z, r, g):
    if g.kind == "PermuteAll":
        perm = np.asarray(g.params)
        x[:, perm] = x.copy()
        z[:, perm] = z.copy()
        return
    apply_table(x, z, r, _gate_table(g), g.targets)


def tableau_apply_gate(t, g):
    """Tableau of ``g`` applied after ``t``."""
    x, z, r = t.x.copy(), t.z.copy(), t.r.copy()
    _apply_inplace(x, z, r, g)
    return CliffordTableau(x, z, r)


def tableau_of_gates(gate_list, w):
    t = tableau_identity(w)
    x, z, r = t.x.copy(), t.z.copy(), t.r.copy()
    for g in gate_list:
        _apply_inplace(x, z, r, g)
    return CliffordTableau(x, z, r)


def tableau_of(circuit):
    return tableau_of_gates(flatten(circuit), circuit.width)


def tableau_compose(a, b):
    """Tableau of ``a`` applied after ``b``."""
    if a.w != b.w:
        raise InvalidParameter(f"width mismatch: {a.w} vs {b.w}")
    c = b.symplectic.astype(np.int64)
    ga_x = a.x.astype(np.int64)
    ga_z = a.z.astype(np.int64)
    x = c @ ga_x % 2
    z = c @ ga_z % 2
    inner = np.triu(ga_z @ ga_x.T, 1)
    quad = np.einsum("ki,ij,kj->k", c, inner, c)
    r = b.r + c @ a.r + 2 * quad
    return CliffordTableau(x, z, r)


def tableau_inverse(t):
    w = t.w
    s = t.symplectic.astype(np.int64)
    omega = np.block(
        [[np.zeros((w, w), int), np.eye(w, dtype=int)], [np.eye(w, dtype=int), np.zeros((w, w), int)]]
    )
    inv = omega @ s.T @ omega % 2
    inv0 = CliffordTableau.from_symplectic(inv)
    signs = tableau_compose(inv0, t)
    return tableau_compose(signs, inv0)


def _symplectic_product(a, b):
    w = a.shape[-1] // 2
    return int((a[:w] @ b[w:] + a[w:] @ b[:w]) % 2)


def random_clifford(w, rng):
    """Uniformly random w-qubit Clifford (modulo global phase).

    Builds a random symplectic basis one pair at a time: a uniform nonzero
    vector ``u`` in the current symplectic complement, then a uniform ``v``
    in the complement with <u, v> = 1.  The number of choices at each step
    does not depend on earlier ones, so every symplectic matrix is equally
    likely.  Sign bits are uniform and independent.
    """
    if w < 1:
        raise InvalidParameter("width must be >= 1")
    rng = np.random.default_rng(rng)
    span = np.eye(2 * w, dtype=np.int64)
    rows_x = np.zeros((2 * w, 2 * w), dtype=np.int64)
    for j in range(w):
        while True:
            u = rng.integers(0, 2, span.shape[0]) @ span % 2
            if u.any():
                break
        while True:
            v = rng.integers(0, 2, span.shape[0]) @ span % 2
            if _symplectic_product(u, v) == 1:
                break
        rows_x[j] = u
        rows_x[w + j] = v
        # project the spanning set onto the complement of span{u, v}
        pu = (span[:, :w] @ u[w:] + span[:, w:] @ u[:w]) % 2
        pv = (span[:, :w] @ v[w:] + span[:, w:] @ v[:w]) % 2
        span = (span + np.outer(pv, u) + np.outer(pu, v)) % 2
    phases = rng.integers(0, 2, 2 * w)
    return CliffordTableau.from_symplectic(rows_x.astype(np.uint8), phases)


def _row_product(xa, za, ra, xb, zb, rb):
    r = ra + rb + 2 * int(za @ xb)
    return xa ^ xb, za ^ zb, r % 4


def stabilizer_support(t):
    """Affine description of the output distribution of ``U|0...0>``.

    Returns ``(offset, basis)``: outcomes are ``offset ^ (span of basis)``,
    each with probability ``2**-len(basis)``.
    """
    w = t.w
    x = t.x[w:].astype(np.int64).copy()
    z = t.z[w:].astype(np.int64).copy()
    r = t.r[w:].copy()
    row = 0
    for q in range(w):
        piv = next((i for i in range(row, w) if x[i, q]), None)
        if piv is None:
            continue
        if piv != row:
            x[[row, piv]] = x[[piv, row]]
            z[[row, piv]] = z[[piv, row]]
            r[[row, piv]] = r[[piv, row]]
        for i in range(w):
            if i != row and x[i, q]:
                x[i], z[i], r[i] = _row_product(x[i], z[i], r[i], x[row], z[row], r[row])
        row += 1
    k = row
    # remaining rows are +-Z^z; each fixes the parity z.b
    a = z[k:] % 2
    rhs = ((r[k:] % 4) // 2) % 2
    return _solve_affine(a, rhs, w)


def _solve_affine(a, rhs, w):
    a = a.copy()
    rhs = rhs.copy()
    pivots = []
    row = 0
    for q in range(w):
        piv = next((i for i in range(row, a.shape[0]) if a[i, q]), None)
        if piv is None:
            continue
        a[[row, piv]] = a[[piv, row]]
        rhs[[row, piv]] = rhs[[piv, row]]
        for i in range(a.shape[0]):
            if i != row and a[i, q]:
                a[i] ^= a[row]
                rhs[i] ^= rhs[row]
        pivots.append(q)
        row += 1
    offset = np.zeros(w, dtype=np.int64)
    for i, q in enumerate(pivots):
        offset[q] = rhs[i]
    free = [q for q in range(w) if q not in pivots]
    basis = []
    for f in free:
        v = np.zeros(w, dtype=np.int64)
        v[f] = 1
        for i, q in enumerate(pivots):
            v[q] = a[i, f]
        basis.append(v)
    return offset, basis


def _bits_to_int(bits):
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def stabilizer_distribution(circuit):
    """Exact output distribution of a Clifford-only circuit."""
    t = tableau_of(circuit)
    return tableau_distribution(t)


def tableau_distribution(t):
    offset, basis = stabilizer_support(t)
    w = t.w
    base = _bits_to_int(offset)
    vecs = [_bits_to_int(v) for v in basis]
    p = 1.0 / (1 << len(vecs))
    outcomes = [base]
    for v in vecs:
        outcomes += [o ^ v for o in outcomes]
    return Distribution(w, {bitstring(o, w): p for o in sorted(outcomes)})


def sample_stabilizer(t, shots, rng):
    """Outcome indices sampled from ``U|0...0>`` measured in the Z basis."""
    offset, basis = stabilizer_support(t)
    base = _bits_to_int(offset)
    out = np.full(shots, base, dtype=np.int64)
    for v in basis:
        flip = rng.integers(0, 2, shots).astype(bool)
        out[flip] ^= _bits_to_int(v)
    return out

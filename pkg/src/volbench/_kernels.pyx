# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels.

Ops are encoded as parallel arrays: ``kinds`` (0 = 1q matrix, 1 = 2q matrix,
2 = qubit permutation, 3 = no-op location), targets ``q0``/``q1``, 4x4
matrices ``mats`` (1q ops use the top-left 2x2 block) and ``perms``.
Qubit 0 is the most significant bit of an amplitude index.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


cdef inline void _apply_1q(cplx[::1] s, Py_ssize_t dim, Py_ssize_t stride,
                           cplx m00, cplx m01, cplx m10, cplx m11) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef cplx a, b
    for i in range(dim):
        if i & stride:
            continue
        j = i | stride
        a = s[i]
        b = s[j]
        s[i] = m00 * a + m01 * b
        s[j] = m10 * a + m11 * b


cdef inline void _apply_2q(cplx[::1] s, Py_ssize_t dim, Py_ssize_t s0, Py_ssize_t s1,
                           cplx[:, ::1] m) noexcept nogil:
    cdef Py_ssize_t i, k, r
    cdef Py_ssize_t idx[4]
    cdef cplx v[4]
    cdef cplx acc
    for i in range(dim):
        if (i & s0) or (i & s1):
            continue
        idx[0] = i
        idx[1] = i | s1
        idx[2] = i | s0
        idx[3] = i | s0 | s1
        for k in range(4):
            v[k] = s[idx[k]]
        for r in range(4):
            acc = 0
            for k in range(4):
                acc = acc + m[r, k] * v[k]
            s[idx[r]] = acc


cdef inline void _permute(cplx[::1] s, cplx[::1] buf, Py_ssize_t dim, int w,
                          long[::1] perm) noexcept nogil:
    cdef Py_ssize_t i, j, q
    for i in range(dim):
        j = 0
        for q in range(w):
            if (i >> (w - 1 - q)) & 1:
                j |= (<Py_ssize_t>1) << (w - 1 - perm[q])
        buf[j] = s[i]
    for i in range(dim):
        s[i] = buf[i]


cdef inline void _pauli_1q(cplx[::1] s, Py_ssize_t dim, Py_ssize_t stride, int p) noexcept nogil:
    # p: 1 = X, 2 = Y, 3 = Z
    cdef Py_ssize_t i, j
    cdef cplx a, b
    for i in range(dim):
        if i & stride:
            continue
        j = i | stride
        a = s[i]
        b = s[j]
        if p == 1:
            s[i] = b
            s[j] = a
        elif p == 2:
            s[i] = -1j * b
            s[j] = 1j * a
        else:
            s[j] = -b


def run_batch(cplx[:, ::1] states, int w, long[::1] kinds, long[::1] q0, long[::1] q1,
              cplx[:, :, ::1] mats, long[:, ::1] perms, long start,
              long[::1] err_op, long[::1] err_row, long[::1] err_code):
    """Evolve every row of ``states`` in place through ops ``start..end``.

    Error ``e`` (a Pauli code, see ``apply_pauli``) hits row ``err_row[e]``
    right after op ``err_op[e]``.  Errors must be sorted by op.
    """
    cdef Py_ssize_t B = states.shape[0]
    cdef Py_ssize_t dim = states.shape[1]
    cdef Py_ssize_t n_ops = kinds.shape[0]
    cdef Py_ssize_t n_err = err_op.shape[0]
    cdef Py_ssize_t op, row, e = 0, e_end
    cdef long kind, code
    cdef cplx[::1] buf = np.empty(dim, dtype=np.complex128)
    cdef cplx[:, ::1] m
    with nogil:
        while e < n_err and err_op[e] < start:
            e += 1
        for op in range(start, n_ops):
            kind = kinds[op]
            if kind == 0:
                for row in range(B):
                    _apply_1q(states[row], dim, (<Py_ssize_t>1) << (w - 1 - q0[op]),
                              mats[op, 0, 0], mats[op, 0, 1], mats[op, 1, 0], mats[op, 1, 1])
            elif kind == 1:
                m = mats[op]
                for row in range(B):
                    _apply_2q(states[row], dim, (<Py_ssize_t>1) << (w - 1 - q0[op]),
                              (<Py_ssize_t>1) << (w - 1 - q1[op]), m)
            elif kind == 2:
                for row in range(B):
                    _permute(states[row], buf, dim, w, perms[op])
            while e < n_err and err_op[e] == op:
                row = err_row[e]
                code = err_code[e]
                if kind == 1:
                    if code >> 2:
                        _pauli_1q(states[row], dim, (<Py_ssize_t>1) << (w - 1 - q0[op]), code >> 2)
                    if code & 3:
                        _pauli_1q(states[row], dim, (<Py_ssize_t>1) << (w - 1 - q1[op]), code & 3)
                else:
                    _pauli_1q(states[row], dim, (<Py_ssize_t>1) << (w - 1 - q0[op]), code)
                e += 1


def probabilities(cplx[:, ::1] states):
    cdef Py_ssize_t B = states.shape[0], dim = states.shape[1], r, i
    out = np.empty((B, dim), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef cplx a
    with nogil:
        for r in range(B):
            for i in range(dim):
                a = states[r, i]
                o[r, i] = a.real * a.real + a.imag * a.imag
    return out

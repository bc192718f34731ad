"""NumPy implementation of the statevector kernels (same interface as the
compiled module)."""
from __future__ import annotations

import numpy as np


def _apply_matrix(states, w, m, qubits):
    b = states.shape[0]
    k = len(qubits)
    t = states.reshape((b,) + (2,) * w)
    axes = [1 + q for q in qubits]
    out = np.tensordot(t, m.reshape((2,) * (2 * k)), axes=(axes, list(range(k, 2 * k))))
    # tensordot puts the new qubit axes last; move them back
    out = np.moveaxis(out, list(range(w + 1 - k, w + 1)), axes)
    states[:] = out.reshape(b, -1)


def _permute(states, w, perm):
    b = states.shape[0]
    t = states.reshape((b,) + (2,) * w)
    # axis 1 + i moves to axis 1 + perm[i]
    order = [0] + [0] * w
    for i, p in enumerate(perm):
        order[1 + p] = 1 + i
    states[:] = np.transpose(t, order).reshape(b, -1)


def _pauli(states, rows, w, q, p):
    b = len(rows)
    t = states[rows].reshape(b, 1 << q, 2, -1)
    if p == 1:
        t = t[:, :, ::-1, :]
    elif p == 2:
        t = t[:, :, ::-1, :] * np.array([-1j, 1j])[None, None, :, None]
    else:
        t = t * np.array([1, -1])[None, None, :, None]
    states[rows] = t.reshape(b, -1)


def run_batch(states, w, kinds, q0, q1, mats, perms, start, err_op, err_row, err_code):
    n_ops = len(kinds)
    # error slices per op
    bounds = np.searchsorted(err_op, np.arange(n_ops + 1))
    for op in range(start, n_ops):
        kind = kinds[op]
        if kind == 0:
            _apply_matrix(states, w, mats[op, :2, :2], [q0[op]])
        elif kind == 1:
            _apply_matrix(states, w, mats[op], [q0[op], q1[op]])
        elif kind == 2:
            _permute(states, w, perms[op])
        lo, hi = bounds[op], bounds[op + 1]
        if lo == hi:
            continue
        rows = err_row[lo:hi]
        codes = err_code[lo:hi]
        if kind == 1:
            for shift, q in ((2, q0[op]), (0, q1[op])):
                part = (codes >> shift) & 3
                for p in (1, 2, 3):
                    sel = rows[part == p]
                    if sel.size:
                        _pauli(states, sel, w, q, p)
        else:
            for p in (1, 2, 3):
                sel = rows[codes == p]
                if sel.size:
                    _pauli(states, sel, w, q0[op], p)


def probabilities(states):
    return states.real**2 + states.imag**2

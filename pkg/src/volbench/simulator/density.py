"""Exact density-matrix evolution under the sampler's noise semantics.

Meant as a verification oracle for small widths.
"""
from __future__ import annotations

import numpy as np

from .. import gates as G
from .._kernels_py import _apply_matrix, _permute
from ..circuit import flatten
from ..distribution import Distribution
from ..errors import UnexpandableSubroutine, WidthCapExceeded
from .program import gate_class

DENSITY_WIDTH_CAP = 6


def _left(m, targets, rho, w):
    # (m on targets) @ rho, applied column by column
    cols = np.ascontiguousarray(rho.T)
    _apply_matrix(cols, w, m, list(targets))
    return cols.T


def _conjugate(m, targets, rho, w):
    a = _left(m, targets, rho, w)
    return _left(m, targets, a.conj().T, w).conj().T


def _depolarize(rho, eps, targets, w):
    k = len(targets)
    acc = np.zeros_like(rho)
    for code in range(1, 4**k):
        acc += _conjugate(G.pauli_matrix(code, k), targets, rho, w)
    return (1 - eps) * rho + eps / (4**k - 1) * acc


def density_matrix(circuit, noise=None, width_cap=DENSITY_WIDTH_CAP):
    w = circuit.width
    if w > width_cap:
        raise WidthCapExceeded(f"width {w} exceeds density-matrix cap {width_cap}")
    try:
        gate_list = flatten(circuit)
    except ValueError as exc:
        raise UnexpandableSubroutine(str(exc)) from None
    eta = noise.coherent_overrotation if noise is not None else 0.0
    dim = 1 << w
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    for g in gate_list:
        if g.kind == "PermuteAll":
            rows = np.ascontiguousarray(rho)
            _permute(rows, w, g.params)
            cols = np.ascontiguousarray(rows.T)
            _permute(cols, w, g.params)
            rho = cols.T
            continue
        if g.kind != "Id":
            rho = _conjugate(g.matrix(eta), g.targets, rho, w)
        eps = noise.rate(gate_class(g)) if noise is not None else 0.0
        if eps > 0:
            rho = _depolarize(rho, eps, g.targets, w)
    return rho


def _readout(probs, eps, w):
    t = probs.reshape((2,) * w) if w else probs
    for q in range(w):
        t = (1 - eps) * t + eps * np.flip(t, axis=q)
    return t.reshape(-1)


def density_matrix_distribution(circuit, noise=None, width_cap=DENSITY_WIDTH_CAP):
    """Exact outcome distribution with depolarizing applied as a channel."""
    rho = density_matrix(circuit, noise, width_cap)
    probs = np.clip(np.real(np.diag(rho)), 0.0, None)
    if noise is not None and noise.eps_readout > 0:
        probs = _readout(probs, noise.eps_readout, circuit.width)
    probs = probs / probs.sum()
    return Distribution.from_dense(probs, circuit.width)

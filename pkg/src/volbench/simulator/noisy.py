"""Monte Carlo noisy sampling with Pauli-error trajectories.

All randomness is drawn up front from one generator: for every noisy gate
location a binomial count of hit shots, which shots, and which Pauli; then
the per-shot sampling uniforms and readout flips.  Shots with identical
error patterns share one simulated state, so the cost scales with the number
of distinct patterns rather than with ``N``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import gates as G
from .. import kernels
from ..circuit import bitstring
from ..errors import InvalidParameter, WidthCapExceeded
from ..stabilizer import CliffordTableau, apply_table, sample_stabilizer, tableau_identity
from .program import OP_2Q, OP_NOOP, OP_PERM, Program, build_program, gate_class
from .statevector import DEFAULT_WIDTH_CAP, evolve, initial_state


@dataclass(frozen=True)
class NoiseModel:
    eps1: float = 0.0
    eps2: float = 0.0
    eps_idle: float = 0.0
    eps_readout: float = 0.0
    coherent_overrotation: float = 0.0

    def __post_init__(self):
        for name in ("eps1", "eps2", "eps_idle", "eps_readout"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParameter(f"{name} must lie in [0, 1], got {v}")
        if not math.isfinite(self.coherent_overrotation):
            raise InvalidParameter("coherent_overrotation must be finite")

    def rate(self, cls):
        return {"1q": self.eps1, "2q": self.eps2, "idle": self.eps_idle}.get(cls, 0.0)

    @property
    def is_noiseless(self):
        return not (self.eps1 or self.eps2 or self.eps_idle or self.eps_readout or self.coherent_overrotation)

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, d):
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise InvalidParameter(f"unknown noise fields: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})


@dataclass(frozen=True)
class OutcomeRecord:
    circuit_id: str
    shots: int
    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise InvalidParameter("counts do not sum to the shot count")
        if any(c < 0 for c in self.counts.values()):
            raise InvalidParameter("negative count")
        if len({len(k) for k in self.counts}) > 1:
            raise InvalidParameter("outcome strings of mixed length")

    @property
    def width(self):
        return len(next(iter(self.counts))) if self.counts else 0

    def frequency(self, outcomes):
        outcomes = {outcomes} if isinstance(outcomes, str) else outcomes
        return sum(c for s, c in self.counts.items() if s in outcomes) / self.shots

    def to_json(self):
        return {"circuit_id": self.circuit_id, "shots": self.shots, "counts": dict(sorted(self.counts.items()))}

    @classmethod
    def from_json(cls, d):
        try:
            return cls(str(d["circuit_id"]), int(d["shots"]), {str(k): int(v) for k, v in d["counts"].items()})
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidParameter(f"malformed outcome record: {exc}") from None

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def _draw_errors(program, noise, shots, rng):
    ops, rows, codes = [], [], []
    for op, g in enumerate(program.gates):
        eps = noise.rate(gate_class(g))
        if eps <= 0:
            continue
        k = rng.binomial(shots, eps)
        if k == 0:
            continue
        ops.append(np.full(k, op, dtype=np.int64))
        rows.append(rng.choice(shots, k, replace=False).astype(np.int64))
        codes.append(rng.integers(1, 4 ** program.arity(op), k, dtype=np.int64))
    if not ops:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    return np.concatenate(ops), np.concatenate(rows), np.concatenate(codes)


def _clifford_tables(program):
    tables = []
    for op in range(len(program)):
        kind = program.kinds[op]
        if kind in (OP_PERM, OP_NOOP):
            tables.append(None)
            continue
        n = 4 if kind == OP_2Q else 2
        t = G.conjugation_table(program.mats[op, :n, :n])
        if t is None:
            return None
        tables.append(t)
    return tables


def _frame_sample(program, tables, events, shots, rng):
    """Clifford circuits: ideal stabilizer sample XOR propagated X errors."""
    w = program.width
    t = tableau_identity(w)
    tx, tz, tr = t.x.copy(), t.z.copy(), t.r.copy()
    fx = np.zeros((shots, w), dtype=np.uint8)
    fz = np.zeros((shots, w), dtype=np.uint8)
    fr = np.zeros(shots, dtype=np.int64)
    ev_op, ev_row, ev_code = events
    order = np.argsort(ev_op, kind="stable")
    ev_op, ev_row, ev_code = ev_op[order], ev_row[order], ev_code[order]
    bounds = np.searchsorted(ev_op, np.arange(len(program) + 1))
    for op in range(len(program)):
        kind = program.kinds[op]
        if kind == OP_PERM:
            perm = program.perms[op]
            tx[:, perm] = tx.copy()
            tz[:, perm] = tz.copy()
            fx[:, perm] = fx.copy()
            fz[:, perm] = fz.copy()
        elif kind != OP_NOOP:
            targets = (program.q0[op], program.q1[op]) if kind == OP_2Q else (program.q0[op],)
            apply_table(tx, tz, tr, tables[op], targets)
            apply_table(fx, fz, fr, tables[op], targets)
        lo, hi = bounds[op], bounds[op + 1]
        if lo == hi:
            continue
        rows, codes = ev_row[lo:hi], ev_code[lo:hi]
        if kind == OP_2Q:
            parts = (((codes >> 2) & 3, program.q0[op]), (codes & 3, program.q1[op]))
        else:
            parts = ((codes, program.q0[op]),)
        for p, q in parts:
            # 1 = X, 2 = Y, 3 = Z
            np.bitwise_xor.at(fx[:, q], rows, ((p == 1) | (p == 2)).astype(np.uint8))
            np.bitwise_xor.at(fz[:, q], rows, ((p == 2) | (p == 3)).astype(np.uint8))
    ideal = sample_stabilizer(CliffordTableau(tx, tz, tr), shots, rng)
    weights = (1 << np.arange(w - 1, -1, -1)).astype(np.int64)
    return ideal ^ (fx.astype(np.int64) @ weights)


def _group_patterns(events, shots):
    """Group id per shot (0 = no error) plus per-group event lists."""
    ev_op, ev_row, ev_code = events
    group = np.zeros(shots, dtype=np.int64)
    patterns = [None]
    if ev_op.size == 0:
        return group, patterns
    order = np.lexsort((ev_op, ev_row))
    ev_op, ev_row, ev_code = ev_op[order], ev_row[order], ev_code[order]
    starts = np.flatnonzero(np.r_[True, ev_row[1:] != ev_row[:-1]])
    ends = np.r_[starts[1:], ev_row.size]
    index = {}
    for s, e in zip(starts, ends):
        pat = (ev_op[s:e], ev_code[s:e])
        key = pat[0].tobytes() + pat[1].tobytes()
        gid = index.get(key)
        if gid is None:
            gid = len(patterns)
            index[key] = gid
            patterns.append(pat)
        group[ev_row[s]] = gid
    return group, patterns


def _sample_rows(probs, rows, uniforms):
    """Inverse-CDF sampling: shot ``i`` draws from ``probs[rows[i]]``."""
    cdf = np.cumsum(probs, axis=1)
    cdf /= cdf[:, -1:]
    dim = probs.shape[1]
    offset = np.arange(probs.shape[0])[:, None]
    flat = (cdf + offset).ravel()
    pos = np.searchsorted(flat, uniforms + rows, side="right") - rows * dim
    return np.clip(pos, 0, dim - 1)


def _dense_sample(program, events, shots, rng, backend, batch_bytes):
    w = program.width
    uniforms = rng.random(shots)
    group, patterns = _group_patterns(events, shots)
    outcomes = np.zeros(shots, dtype=np.int64)
    shot_order = np.argsort(group, kind="stable")
    gbounds = np.searchsorted(group[shot_order], np.arange(len(patterns) + 1))

    def shots_of(gid):
        return shot_order[gbounds[gid]:gbounds[gid + 1]]

    def sliced(lo, hi):
        return Program(w, program.gates[lo:hi], program.kinds[lo:hi], program.q0[lo:hi],
                       program.q1[lo:hi], program.mats[lo:hi], program.perms[lo:hi])

    ideal = initial_state(w)
    cursor = 0
    noisy = sorted(range(1, len(patterns)), key=lambda g: int(patterns[g][0][0]))
    max_rows = max(1, batch_bytes // (16 << w))
    for b in range(0, len(noisy), max_rows):
        batch = noisy[b:b + max_rows]
        f0 = int(patterns[batch[0]][0][0])
        evolve(ideal, sliced(cursor, f0), backend=backend)
        cursor = f0
        states = np.repeat(ideal, len(batch), axis=0)
        e_op = np.concatenate([patterns[g][0] for g in batch]) - f0
        e_code = np.concatenate([patterns[g][1] for g in batch])
        e_row = np.concatenate([np.full(len(patterns[g][0]), i, dtype=np.int64) for i, g in enumerate(batch)])
        order = np.argsort(e_op, kind="stable")
        evolve(states, sliced(f0, len(program)), errors=(e_op[order], e_row[order], e_code[order]),
               backend=backend)
        probs = kernels.probabilities(states, backend=backend)
        sel = [shots_of(g) for g in batch]
        idx = np.concatenate(sel)
        rows = np.concatenate([np.full(len(s), i, dtype=np.int64) for i, s in enumerate(sel)])
        outcomes[idx] = _sample_rows(probs, rows, uniforms[idx])
    evolve(ideal, sliced(cursor, len(program)), backend=backend)
    clean = shots_of(0)
    if clean.size:
        probs = kernels.probabilities(ideal, backend=backend)
        outcomes[clean] = _sample_rows(probs, np.zeros(clean.size, dtype=np.int64), uniforms[clean])
    return outcomes


def sample_noisy(circuit, noise, shots, seed, width_cap=DEFAULT_WIDTH_CAP, circuit_id=None,
                 backend=None, batch_bytes=1 << 25, clifford_path=True):
    """Sample ``shots`` noisy executions of ``circuit``; deterministic in ``seed``."""
    if int(shots) != shots or shots <= 0:
        raise InvalidParameter(f"shot count must be a positive integer, got {shots}")
    shots = int(shots)
    w = circuit.width
    program = build_program(circuit, noise.coherent_overrotation, keep_idles=True)
    rng = np.random.default_rng(seed)
    events = _draw_errors(program, noise, shots, rng)
    tables = _clifford_tables(program) if clifford_path else None
    if tables is not None:
        outcomes = _frame_sample(program, tables, events, shots, rng)
    else:
        if w > width_cap:
            raise WidthCapExceeded(f"width {w} exceeds dense cap {width_cap}")
        outcomes = _dense_sample(program, events, shots, rng, backend, batch_bytes)
    if noise.eps_readout > 0:
        flips = rng.random((shots, w)) < noise.eps_readout
        weights = (1 << np.arange(w - 1, -1, -1)).astype(np.int64)
        outcomes ^= flips.astype(np.int64) @ weights
    values, counts = np.unique(outcomes, return_counts=True)
    if circuit_id is None:
        circuit_id = str(circuit.metadata.get("id", "circuit"))
    return OutcomeRecord(
        circuit_id, shots, {bitstring(int(v), w): int(c) for v, c in zip(values, counts)}
    )

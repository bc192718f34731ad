"""Probability distributions over w-bit strings."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import bitstring


@dataclass(frozen=True)
class Distribution:
    """Outcome distribution; ``probs`` maps bitstrings to nonzero mass.

    Absent strings have probability zero.  Bit ``k`` of a string is qubit ``k``.
    """

    width: int
    probs: dict

    @classmethod
    def from_dense(cls, vector, width=None, cutoff=0.0):
        vector = np.asarray(vector, dtype=float)
        if width is None:
            width = int(round(np.log2(vector.size)))
        idx = np.flatnonzero(vector > cutoff)
        return cls(width, {bitstring(int(i), width): float(vector[i]) for i in idx})

    @classmethod
    def point(cls, outcome):
        return cls(len(outcome), {outcome: 1.0})

    def dense(self):
        out = np.zeros(2**self.width)
        for s, p in self.probs.items():
            out[int(s, 2) if s else 0] = p
        return out

    def __getitem__(self, outcome):
        return self.probs.get(outcome, 0.0)

    def total(self):
        return float(sum(self.probs.values()))

    def is_normalized(self, atol=1e-9):
        return abs(self.total() - 1.0) <= atol and all(p >= 0 for p in self.probs.values())

    def tvd(self, other):
        keys = set(self.probs) | set(other.probs)
        return 0.5 * sum(abs(self[k] - other[k]) for k in keys)

    def marginal(self, qubits):
        """Distribution over the listed qubits, in the listed order."""
        out = {}
        for s, p in self.probs.items():
            key = "".join(s[q] for q in qubits)
            out[key] = out.get(key, 0.0) + p
        return Distribution(len(qubits), out)

    def mode(self):
        return max(sorted(self.probs), key=lambda s: self.probs[s])

    def definite_outcome(self, atol=1e-9):
        """The single outcome carrying all the mass, or None."""
        s = self.mode()
        return s if abs(self.probs[s] - 1.0) <= atol else None


def empirical(counts, width=None):
    """Distribution of observed frequencies from a ``{bitstring: count}`` map."""
    n = sum(counts.values())
    if width is None:
        width = len(next(iter(counts)))
    return Distribution(width, {s: c / n for s, c in counts.items() if c})

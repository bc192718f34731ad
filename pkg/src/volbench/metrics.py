"""Per-circuit success criteria and ensemble-level rules."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import binom

from .distribution import Distribution
from .errors import (
    EmptyEnsemble,
    InvalidParameter,
    MissingIdealOutcome,
    UniformOutcome,
    ZeroProbabilityOutcome,
)

DEFAULT_THRESHOLD = 2 / 3
DEFAULT_CONFIDENCE = 0.95
BOOTSTRAP_RESAMPLES = 1000
HEAVY_TOL = 1e-12


# ---------------------------------------------------------------------------
# confidence bounds


def clopper_pearson_lower(k, n, confidence=DEFAULT_CONFIDENCE, tol=1e-10):
    """Exact one-sided lower bound on a binomial success probability.

    The largest ``p`` with ``P(X >= k | p) <= 1 - confidence``, found by
    bisection on the binomial tail.
    """
    if n <= 0 or not 0 <= k <= n:
        raise InvalidParameter(f"need 0 <= k <= n and n > 0, got k={k}, n={n}")
    if not 0 < confidence < 1:
        raise InvalidParameter("confidence must lie in (0, 1)")
    if k == 0:
        return 0.0
    alpha = 1 - confidence
    lo, hi = 0.0, k / n
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binom.sf(k - 1, n, mid) < alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def clopper_pearson_upper(k, n, confidence=DEFAULT_CONFIDENCE, tol=1e-10):
    return 1.0 - clopper_pearson_lower(n - k, n, confidence, tol)


# ---------------------------------------------------------------------------
# coarse-graining


@dataclass(frozen=True)
class NoGraining:
    kind = "NoGraining"

    def label(self, s):
        return s


@dataclass(frozen=True)
class HeavyLight:
    heavy: frozenset = frozenset()
    kind = "HeavyLight"

    def label(self, s):
        return "heavy" if s in self.heavy else "light"


@dataclass(frozen=True)
class SingleBitMarginal:
    bit: int = 0
    kind = "SingleBitMarginal"

    def label(self, s):
        return s[self.bit]


@dataclass(frozen=True)
class TargetSet:
    targets: frozenset = frozenset()
    kind = "TargetSet"

    def label(self, s):
        return "in" if s in self.targets else "out"


@dataclass(frozen=True)
class LocalMarginals:
    """All marginals on up to ``order`` qubits; distance is the worst one."""

    order: int = 2
    kind = "LocalMarginals"


def _check_partition(g, width):
    if isinstance(g, SingleBitMarginal) and not 0 <= g.bit < width:
        raise InvalidParameter(f"bit {g.bit} outside width {width}")
    members = getattr(g, "heavy", None) or getattr(g, "targets", None) or ()
    for s in members:
        if len(s) != width or set(s) - {"0", "1"}:
            raise InvalidParameter(f"{s!r} is not a {width}-bit outcome")
    if isinstance(g, LocalMarginals) and g.order < 1:
        raise InvalidParameter("marginal order must be >= 1")


def coarse_grain(dist, g):
    """Bin masses ``{label: mass}``; for LocalMarginals a list of such maps,
    one per qubit subset."""
    _check_partition(g, dist.width)
    if isinstance(g, LocalMarginals):
        return [
            dict(sorted(dist.marginal(list(sub)).probs.items()))
            for sub in _subsets(dist.width, g.order)
        ]
    out = {}
    if isinstance(g, HeavyLight):
        out = {"heavy": 0.0, "light": 0.0}
    elif isinstance(g, SingleBitMarginal):
        out = {"0": 0.0, "1": 0.0}
    elif isinstance(g, TargetSet):
        out = {"in": 0.0, "out": 0.0}
    for s, p in dist.probs.items():
        key = g.label(s)
        out[key] = out.get(key, 0.0) + p
    return dict(sorted(out.items()))


def _subsets(width, order):
    out = []
    for k in range(1, min(order, width) + 1):
        out.extend(combinations(range(width), k))
    return out


def _tvd_maps(a, b):
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in keys)


def graining_tvd(p, q, g):
    gp, gq = coarse_grain(p, g), coarse_grain(q, g)
    if isinstance(g, LocalMarginals):
        return max(_tvd_maps(a, b) for a, b in zip(gp, gq))
    return _tvd_maps(gp, gq)


# ---------------------------------------------------------------------------
# heavy outputs


def _median_probability(dist):
    n = 1 << dist.width
    vals = sorted(p for p in dist.probs.values() if p > 0)
    zeros = n - len(vals)

    def rank(i):
        return 0.0 if i < zeros else vals[i - zeros]

    if n % 2:
        return rank(n // 2)
    return 0.5 * (rank(n // 2 - 1) + rank(n // 2))


def heavy_set(ideal):
    """Outcomes whose ideal probability is strictly above the median."""
    n = 1 << ideal.width
    vals = [p for p in ideal.probs.values() if p > 0]
    lo = min(vals) if len(vals) == n else 0.0
    if max(vals) - lo <= HEAVY_TOL:
        raise UniformOutcome("heavy outputs are undefined for a uniform ideal distribution")
    med = _median_probability(ideal)
    return frozenset(s for s, p in ideal.probs.items() if p > med + HEAVY_TOL)


def heavy_output_probability(counts, heavy):
    if counts.shots <= 0:
        raise InvalidParameter("empty outcome record")
    return sum(c for s, c in counts.counts.items() if s in heavy) / counts.shots


def hamming_ball(center, radius):
    return lambda s: sum(a != b for a, b in zip(s, center)) <= radius


# ---------------------------------------------------------------------------
# criteria


@dataclass(frozen=True)
class CorrectOutcome:
    threshold: float = DEFAULT_THRESHOLD
    confidence: float = DEFAULT_CONFIDENCE
    kind = "CorrectOutcome"


@dataclass(frozen=True)
class HeavyOutput:
    threshold: float = DEFAULT_THRESHOLD
    confidence: float = DEFAULT_CONFIDENCE
    kind = "HeavyOutput"


@dataclass(frozen=True)
class TvdBelow:
    threshold: float = 1 / 3
    confidence: float = DEFAULT_CONFIDENCE
    coarse_graining: object = field(default_factory=NoGraining)
    kind = "TvdBelow"


@dataclass(frozen=True)
class HammingBall:
    radius: int = 1
    threshold: float = DEFAULT_THRESHOLD
    confidence: float = DEFAULT_CONFIDENCE
    kind = "HammingBall"


@dataclass(frozen=True)
class CrossEntropyBelow:
    """Pass iff the empirical cross-entropy (nats) is below ``threshold``."""

    threshold: float = 1.0
    kind = "CrossEntropyBelow"


def validate_criterion(c):
    if isinstance(c, CrossEntropyBelow):
        if not c.threshold > 0:
            raise InvalidParameter("cross-entropy threshold must be positive")
        return
    if not 0 < c.threshold < 1:
        raise InvalidParameter(f"threshold must lie in (0, 1), got {c.threshold}")
    if not 0 < c.confidence < 1:
        raise InvalidParameter(f"confidence must lie in (0, 1), got {c.confidence}")
    if isinstance(c, HammingBall) and c.radius < 0:
        raise InvalidParameter("radius must be >= 0")


@dataclass(frozen=True)
class CircuitScore:
    score: float
    passed: bool
    successes: int | None = None
    shots: int | None = None
    bound: float | None = None

    def to_json(self):
        return {"score": self.score, "pass": self.passed, "successes": self.successes,
                "shots": self.shots, "bound": self.bound}


def _binomial_score(k, n, crit):
    lower = clopper_pearson_lower(k, n, crit.confidence)
    return CircuitScore(k / n, bool(lower > crit.threshold), int(k), int(n), lower)


def _need_outcome(ideal_outcome):
    if ideal_outcome is None:
        raise MissingIdealOutcome("criterion needs a known ideal outcome")
    return ideal_outcome


def _bootstrap_tvd_upper(counts, ideal, g, confidence, seed):
    keys = sorted(counts.counts)
    n = counts.shots
    freq = np.array([counts.counts[k] for k in keys], dtype=float) / n
    rng = np.random.default_rng(seed)
    samples = rng.multinomial(n, freq, size=BOOTSTRAP_RESAMPLES) / n
    maps = []
    if isinstance(g, LocalMarginals):
        for sub in _subsets(ideal.width, g.order):
            maps.append((lambda s, sub=sub: "".join(s[q] for q in sub),
                         dict(ideal.marginal(list(sub)).probs)))
    else:
        maps.append((g.label, coarse_grain(ideal, g)))
    worst = np.zeros(BOOTSTRAP_RESAMPLES)
    for label, target in maps:
        bins = sorted(set(target) | {label(k) for k in keys})
        pos = {b: i for i, b in enumerate(bins)}
        m = np.zeros((len(keys), len(bins)))
        for i, k in enumerate(keys):
            m[i, pos[label(k)]] = 1.0
        q = np.array([target.get(b, 0.0) for b in bins])
        tvd = 0.5 * np.abs(samples @ m - q).sum(axis=1)
        worst = np.maximum(worst, tvd)
    return float(np.quantile(worst, confidence))


def score_circuit(counts, ideal, criterion, ideal_outcome=None, seed=0):
    """Score one outcome record against its ideal behaviour."""
    validate_criterion(criterion)
    n = counts.shots
    if n <= 0:
        raise InvalidParameter("empty outcome record")
    if isinstance(criterion, CorrectOutcome):
        target = _need_outcome(ideal_outcome)
        return _binomial_score(counts.counts.get(target, 0), n, criterion)
    if isinstance(criterion, HammingBall):
        inside = hamming_ball(_need_outcome(ideal_outcome), criterion.radius)
        return _binomial_score(sum(c for s, c in counts.counts.items() if inside(s)), n, criterion)
    if ideal is None:
        raise InvalidParameter(f"{criterion.kind} needs the ideal distribution")
    if isinstance(criterion, HeavyOutput):
        heavy = heavy_set(ideal)
        k = sum(c for s, c in counts.counts.items() if s in heavy)
        return _binomial_score(k, n, criterion)
    if isinstance(criterion, TvdBelow):
        emp = Distribution(ideal.width, {s: c / n for s, c in counts.counts.items() if c})
        tvd = graining_tvd(emp, ideal, criterion.coarse_graining)
        upper = _bootstrap_tvd_upper(counts, ideal, criterion.coarse_graining, criterion.confidence, seed)
        return CircuitScore(1.0 - tvd, bool(upper < criterion.threshold), None, n, upper)
    if isinstance(criterion, CrossEntropyBelow):
        ce = 0.0
        for s, c in counts.counts.items():
            p = ideal[s]
            if p <= 0:
                raise ZeroProbabilityOutcome(f"observed {s} has ideal probability 0")
            ce -= c * math.log(p)
        ce /= n
        return CircuitScore(_xe_score(ce, ideal), bool(ce < criterion.threshold), None, n, ce)
    raise InvalidParameter(f"unknown criterion {criterion!r}")


def _entropy(ideal):
    return -sum(p * math.log(p) for p in ideal.probs.values() if p > 0)


def _xe_score(ce, ideal):
    return float(min(1.0, max(0.0, math.exp(_entropy(ideal) - ce))))


def expected_score(dist, ideal, criterion, ideal_outcome=None):
    """Score a criterion would report with infinitely many shots from ``dist``.

    Returns ``(score, sigma_per_sqrt_shot)``; dividing the second entry by
    ``sqrt(N)`` gives the sampling standard deviation at ``N`` shots.
    """
    if isinstance(criterion, (CorrectOutcome, HammingBall, HeavyOutput)):
        if isinstance(criterion, CorrectOutcome):
            p = dist[_need_outcome(ideal_outcome)]
        elif isinstance(criterion, HammingBall):
            inside = hamming_ball(_need_outcome(ideal_outcome), criterion.radius)
            p = sum(v for s, v in dist.probs.items() if inside(s))
        else:
            heavy = heavy_set(ideal)
            p = sum(v for s, v in dist.probs.items() if s in heavy)
        return p, math.sqrt(p * (1 - p))
    if isinstance(criterion, TvdBelow):
        g = criterion.coarse_graining
        tvd = graining_tvd(dist, ideal, g)
        if isinstance(g, LocalMarginals):
            sig = max(_half_sum_sigma(m) for m in coarse_grain(dist, g))
        else:
            sig = _half_sum_sigma(coarse_grain(dist, g))
        return 1.0 - tvd, sig
    if isinstance(criterion, CrossEntropyBelow):
        logs = {s: -math.log(ideal[s]) for s in dist.probs if ideal[s] > 0}
        ce = sum(p * logs[s] for s, p in dist.probs.items())
        var = sum(p * (logs[s] - ce) ** 2 for s, p in dist.probs.items())
        return _xe_score(ce, ideal), math.sqrt(var)
    raise InvalidParameter(f"unknown criterion {criterion!r}")


def _half_sum_sigma(masses):
    return 0.5 * sum(math.sqrt(p * (1 - p)) for p in masses.values())


# ---------------------------------------------------------------------------
# ensemble rules


@dataclass(frozen=True)
class AllPass:
    kind = "AllPass"


@dataclass(frozen=True)
class FractionPass:
    f: float = 0.9
    kind = "FractionPass"

    def __post_init__(self):
        if not 0 < self.f <= 1:
            raise InvalidParameter("fraction must lie in (0, 1]")


@dataclass(frozen=True)
class MeanScoreAbove:
    threshold: float = DEFAULT_THRESHOLD
    pooled: bool = False
    confidence: float = DEFAULT_CONFIDENCE
    kind = "MeanScoreAbove"

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise InvalidParameter("threshold must lie in (0, 1)")


@dataclass(frozen=True)
class EnsembleScore:
    score: float
    passed: bool

    def to_json(self):
        return {"score": self.score, "pass": self.passed}


def score_ensemble(per_circuit, rule):
    per_circuit = list(per_circuit)
    if not per_circuit:
        raise EmptyEnsemble("no circuit scores to aggregate")
    scores = [c.score for c in per_circuit]
    passes = [c.passed for c in per_circuit]
    if isinstance(rule, AllPass):
        return EnsembleScore(float(min(scores)), all(passes))
    if isinstance(rule, FractionPass):
        frac = sum(passes) / len(passes)
        return EnsembleScore(frac, frac >= rule.f - 1e-12)
    if isinstance(rule, MeanScoreAbove):
        mean = float(np.mean(scores))
        if rule.pooled:
            if any(c.successes is None for c in per_circuit):
                raise InvalidParameter("pooled mode needs binomial circuit scores")
            k = sum(c.successes for c in per_circuit)
            n = sum(c.shots for c in per_circuit)
            return EnsembleScore(mean, bool(clopper_pearson_lower(k, n, rule.confidence) > rule.threshold))
        return EnsembleScore(mean, mean >= rule.threshold)
    raise InvalidParameter(f"unknown ensemble rule {rule!r}")


def ensemble_expected(values, rule):
    """Aggregate ``(score, sigma)`` pairs the way ``score_ensemble`` would."""
    values = list(values)
    if not values:
        raise EmptyEnsemble("no circuit scores to aggregate")
    if isinstance(rule, MeanScoreAbove):
        s = float(np.mean([v[0] for v in values]))
        sig = math.sqrt(sum(v[1] ** 2 for v in values)) / len(values)
        return s, sig
    if isinstance(rule, AllPass):
        s = min(v[0] for v in values)
        return s, max(v[1] for v in values)
    raise InvalidParameter(f"no expected-score rule for {rule!r}")


# ---------------------------------------------------------------------------
# JSON


_GRAININGS = {c.kind: c for c in (NoGraining, HeavyLight, SingleBitMarginal, TargetSet, LocalMarginals)}
_CRITERIA = {c.kind: c for c in (CorrectOutcome, HeavyOutput, TvdBelow, HammingBall, CrossEntropyBelow)}
_RULES = {c.kind: c for c in (AllPass, FractionPass, MeanScoreAbove)}


def _graining_to_json(g):
    d = {"kind": g.kind}
    if isinstance(g, HeavyLight):
        d["heavy"] = sorted(g.heavy)
    elif isinstance(g, TargetSet):
        d["targets"] = sorted(g.targets)
    elif isinstance(g, SingleBitMarginal):
        d["bit"] = g.bit
    elif isinstance(g, LocalMarginals):
        d["order"] = g.order
    return d


def _graining_from_json(d):
    kind = d.get("kind")
    if kind not in _GRAININGS:
        raise InvalidParameter(f"unknown coarse-graining {kind!r}")
    args = {k: v for k, v in d.items() if k != "kind"}
    for key in ("heavy", "targets"):
        if key in args:
            args[key] = frozenset(args[key])
    return _GRAININGS[kind](**args)


def criterion_to_json(c):
    d = {"kind": c.kind}
    for name in c.__dataclass_fields__:
        v = getattr(c, name)
        d[name] = _graining_to_json(v) if name == "coarse_graining" else v
    return d


def criterion_from_json(d):
    kind = d.get("kind")
    if kind not in _CRITERIA:
        raise InvalidParameter(f"unknown criterion {kind!r}")
    args = {k: v for k, v in d.items() if k != "kind"}
    if "coarse_graining" in args:
        args["coarse_graining"] = _graining_from_json(args["coarse_graining"])
    try:
        c = _CRITERIA[kind](**args)
    except TypeError as exc:
        raise InvalidParameter(str(exc)) from None
    validate_criterion(c)
    return c


def rule_to_json(r):
    d = {"kind": r.kind}
    d.update({name: getattr(r, name) for name in r.__dataclass_fields__})
    return d


def rule_from_json(d):
    kind = d.get("kind")
    if kind not in _RULES:
        raise InvalidParameter(f"unknown ensemble rule {kind!r}")
    try:
        return _RULES[kind](**{k: v for k, v in d.items() if k != "kind"})
    except TypeError as exc:
        raise InvalidParameter(str(exc)) from None

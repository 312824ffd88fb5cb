"""Competitive learning graph quantization, standard and accelerated.

The accelerated trainer keeps, per training graph ``X``, an upper bound
``u(X)`` on the distance to its encoding, a lower bound ``l(X, Y)`` per
code graph, and the representation ``x_a`` of ``X`` most recently aligned
to its encoding.  A code graph is only matched against ``X`` when neither
``Y == Y_X`` nor ``u(X) <= l(X, Y)`` rules it out; bounds are re-estimated
from code-graph movement once per cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evaluation import (
    CycleRecord,
    TrainReport,
    distance_matrix,
    distortion_from_distances,
    evaluate_codebook,
)
from .matching import Alignment, GaParams, Matcher, exact_distance, graph_distance

DELTA_MODES = ("displacement", "path", "graph")
AUDIT_TOL = 1e-9


@dataclass(frozen=True)
class LearningRate:
    """``harmonic``: 1 / (wins + 1).  ``exp``: eta0 * exp(-cycle / tau)."""

    kind: str = "harmonic"
    eta0: float = 0.5
    tau: float = math.inf

    def __post_init__(self):
        if self.kind not in ("harmonic", "exp"):
            raise ValueError(f"unknown learning-rate schedule {self.kind!r}")
        if self.kind == "exp" and (self.eta0 <= 0 or self.tau <= 0):
            raise ValueError("exp schedule needs eta0 > 0 and tau > 0")

    @classmethod
    def parse(cls, text: str) -> "LearningRate":
        """Parse ``harmonic`` or ``exp:ETA0:TAU`` (``TAU`` may be ``inf``)."""
        if text == "harmonic":
            return cls()
        parts = text.split(":")
        if len(parts) == 3 and parts[0] == "exp":
            return cls("exp", float(parts[1]), float(parts[2]))
        raise ValueError(f"bad learning-rate spec {text!r}; use 'harmonic' or 'exp:ETA0:TAU'")

    def __str__(self):
        return "harmonic" if self.kind == "harmonic" else f"exp:{self.eta0!r}:{self.tau!r}"


def learning_rate(schedule: LearningRate, win_count: int, cycle: int) -> float:
    if win_count < 0:
        raise ValueError("win_count must be >= 0")
    if schedule.kind == "harmonic":
        return 1.0 / (win_count + 1)
    return schedule.eta0 * math.exp(-cycle / schedule.tau)


@dataclass
class TrainConfig:
    k: int
    cycles: int = 150
    theta: float = 0.0
    matcher: str = "exact"
    ga: GaParams = field(default_factory=GaParams)
    max_nodes: int | None = None
    lr: LearningRate = field(default_factory=LearningRate)
    seed: int = 0
    instrument_bounds: bool = False
    delta_mode: str = "path"
    mean_iters: int = 3
    track_distortion: bool = True
    # test hook: added to every lower bound after each re-estimation
    corrupt_lower_bound: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.cycles < 1:
            raise ValueError("cycles must be >= 1")
        if self.theta < 0:
            raise ValueError("theta must be >= 0")
        if self.delta_mode not in DELTA_MODES:
            raise ValueError(f"delta_mode must be one of {DELTA_MODES}")
        if self.instrument_bounds and self.matcher == "ga":
            raise ValueError("bound instrumentation requires an exact matcher")
        Matcher(self.matcher)  # validates the name

    def new_matcher(self) -> Matcher:
        return Matcher(kind=self.matcher, ga=self.ga, max_nodes=self.max_nodes)


@dataclass
class Codebook:
    reps: np.ndarray  # (k, n, n, r)
    prev_reps: np.ndarray
    win_counts: np.ndarray
    path: np.ndarray  # distance travelled by each code since the last snapshot
    source: list[int] = field(default_factory=list)

    @classmethod
    def from_reps(cls, reps, source=None) -> "Codebook":
        reps = np.array(reps, dtype=float)
        if reps.ndim != 4 or reps.shape[0] < 1:
            raise ValueError("codebook needs k >= 1 representations of shape (n, n, r)")
        k = reps.shape[0]
        return cls(reps, reps.copy(), np.zeros(k, dtype=int), np.zeros(k), list(source or []))

    @property
    def k(self) -> int:
        return self.reps.shape[0]

    def snapshot(self) -> None:
        self.prev_reps = self.reps.copy()
        self.path[:] = 0.0

    def update(self, j: int, x: np.ndarray, eta: float) -> None:
        step = eta * (x - self.reps[j])
        self.reps[j] += step
        self.path[j] += float(np.sqrt(np.sum(step * step)))
        self.win_counts[j] += 1

    def copy(self) -> "Codebook":
        return Codebook(
            self.reps.copy(), self.prev_reps.copy(), self.win_counts.copy(), self.path.copy(), list(self.source)
        )


@dataclass
class BoundsState:
    u: np.ndarray
    stale: np.ndarray
    l: np.ndarray
    encoding: np.ndarray  # -1 until the first distance is known
    x_aligned: np.ndarray

    @classmethod
    def initial(cls, N: int, k: int, shape) -> "BoundsState":
        return cls(
            u=np.full(N, np.inf),
            stale=np.ones(N, dtype=bool),
            l=np.zeros((N, k)),
            encoding=np.full(N, -1, dtype=int),
            x_aligned=np.zeros((N, *shape)),
        )


def _as_stack(S) -> np.ndarray:
    if len(S) == 0:
        raise ValueError("empty training set")
    S = np.asarray(S, dtype=float)
    if S.ndim != 4 or S.shape[1] != S.shape[2]:
        raise ValueError("training set must be a sequence of (n, n, r) representations")
    return S


def _align(x: np.ndarray, y: np.ndarray, matcher: Matcher) -> Alignment:
    # the permutation acts on x, so x is passed second
    return graph_distance(y, x, matcher)


def approx_sample_mean(S, matcher: Matcher, iters: int = 3, rng=None) -> np.ndarray:
    """Incremental alignment mean of a set of graphs.

    The first pass visits ``S`` in order starting from ``S[0]``; later passes
    rebuild the mean in a shuffled order, aligning every graph to the
    running mean before folding it in.
    """
    S = _as_stack(S)
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    mean = S[0].copy()
    for it in range(iters):
        order = np.arange(len(S)) if it == 0 else rng.permutation(len(S))
        first = S[order[0]]
        running = first.copy() if it == 0 else _align(first, mean, matcher).aligned(first)
        for t, i in enumerate(order[1:], start=1):
            a = _align(S[i], running, matcher)
            running += (a.aligned(S[i]) - running) / (t + 1)
        mean = running
    return mean


def init_furthest_first(S, k: int, matcher: Matcher, mean_iters: int = 3, rng=None) -> Codebook:
    """First code: graph closest to the sample mean; then furthest-first."""
    S = _as_stack(S)
    N = len(S)
    if k > N:
        raise ValueError(f"k={k} exceeds the training set size {N}")
    mean = approx_sample_mean(S, matcher, mean_iters, rng)
    to_mean = np.array([graph_distance(mean, x, matcher).cost for x in S])
    chosen = [int(np.argmin(to_mean))]
    nearest = np.array([graph_distance(S[chosen[0]], x, matcher).cost for x in S])
    while len(chosen) < k:
        score = nearest.copy()
        score[chosen] = -np.inf
        nxt = int(np.argmax(score))
        chosen.append(nxt)
        d = np.array([graph_distance(S[nxt], x, matcher).cost for x in S])
        nearest = np.minimum(nearest, d)
    return Codebook.from_reps(S[chosen], source=chosen)


def _rngs(seed: int):
    init_seq, train_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(init_seq), np.random.default_rng(train_seq)


def _prepare(S, config: TrainConfig, codebook: Codebook | None):
    S = _as_stack(S)
    if len(S) < config.k:
        raise ValueError(f"need at least k={config.k} training graphs, got {len(S)}")
    init_rng, train_rng = _rngs(config.seed)
    init_calls = 0
    if codebook is None:
        m = config.new_matcher()
        codebook = init_furthest_first(S, config.k, m, config.mean_iters, init_rng)
        init_calls = m.calls
    else:
        codebook = codebook.copy()
        if codebook.k != config.k or codebook.reps.shape[1:] != S.shape[1:]:
            raise ValueError("initial codebook does not match k or the representation shape")
    return S, codebook, train_rng, init_calls


def _finalize(report: TrainReport, S, labels, codebook: Codebook, config: TrainConfig, pairwise=None):
    final = evaluate_codebook(S, labels, codebook.reps, config.new_matcher(), pairwise=pairwise)
    report.final = {key: final[key] for key in ("distortion", "accuracy", "silhouette")}
    report.final["encodings"] = final["encodings"]


def train_standard(S, labels=None, config: TrainConfig | None = None, codebook: Codebook | None = None,
                   pairwise=None):
    """Plain competitive learning: k matcher calls per presented graph."""
    S, codebook, rng, init_calls = _prepare(S, config, codebook)
    N, k = len(S), codebook.k
    report = TrainReport(algo="std", k=k, n_graphs=N, init_calls=init_calls)
    evaluator = config.new_matcher()
    for cycle in range(config.cycles):
        matcher = config.new_matcher()
        codebook.snapshot()
        for i in rng.permutation(N):
            aligns = [_align(S[i], codebook.reps[j], matcher) for j in range(k)]
            costs = [a.cost for a in aligns]
            j = int(np.argmin(costs))
            eta = learning_rate(config.lr, int(codebook.win_counts[j]), cycle)
            codebook.update(j, aligns[j].aligned(S[i]), eta)
        delta = np.sqrt(np.sum((codebook.reps - codebook.prev_reps) ** 2, axis=(1, 2, 3)))
        distortion = math.nan
        if config.track_distortion or cycle == config.cycles - 1:
            distortion = distortion_from_distances(distance_matrix(S, codebook.reps, evaluator))
        report.per_cycle.append(
            CycleRecord(cycle=cycle + 1, distortion=distortion, matcher_calls=matcher.calls,
                        delta_max=float(delta.max()))
        )
    _finalize(report, S, labels, codebook, config, pairwise)
    return codebook, report


def update_bounds(i: int, j: int, bounds: BoundsState, alignment: Alignment, x: np.ndarray) -> None:
    """Record a freshly computed distance from graph ``i`` to code ``j``."""
    bounds.u[i] = alignment.cost
    bounds.l[i, j] = alignment.cost
    bounds.stale[i] = False
    bounds.x_aligned[i] = alignment.aligned(x)


@dataclass
class _Audit:
    """Exact-oracle checks of pruning decisions (instrumented runs only)."""

    wrong_prunes: int = 0

    def check_prune(self, x, codebook: Codebook, enc: int, j: int, cache: dict) -> None:
        for idx in (enc, j):
            if idx not in cache:
                cache[idx] = exact_distance(codebook.reps[idx], x).cost
        if cache[enc] > cache[j] + AUDIT_TOL * max(1.0, cache[j]):
            self.wrong_prunes += 1


def classify(i: int, x: np.ndarray, codebook: Codebook, bounds: BoundsState, matcher: Matcher,
             stats: CycleRecord | None = None, audit: _Audit | None = None) -> int:
    """Encode training graph ``i`` with delayed distance evaluation."""
    if bounds.encoding[i] < 0:
        # first visit: no bound carries information yet, so scan every code graph
        aligns = [_align(x, codebook.reps[j], matcher) for j in range(codebook.k)]
        costs = [a.cost for a in aligns]
        j = int(np.argmin(costs))
        bounds.l[i] = costs
        update_bounds(i, j, bounds, aligns[j], x)
        bounds.encoding[i] = j
        return j

    oracle_cache: dict = {}
    for j in range(codebook.k):
        enc = bounds.encoding[i]
        if j == enc:
            if stats is not None:
                stats.pruned_c1 += 1
            continue
        if bounds.u[i] <= bounds.l[i, j]:
            if stats is not None:
                stats.pruned_c2 += 1
            if audit is not None:
                audit.check_prune(x, codebook, enc, j, oracle_cache)
            continue
        if bounds.stale[i]:
            a = _align(x, codebook.reps[enc], matcher)
            update_bounds(i, enc, bounds, a, x)
            if bounds.u[i] <= bounds.l[i, j]:
                if stats is not None:
                    stats.pruned_c2 += 1
                if audit is not None:
                    audit.check_prune(x, codebook, enc, j, oracle_cache)
                continue
        a = _align(x, codebook.reps[j], matcher)
        bounds.l[i, j] = a.cost
        if a.cost < bounds.u[i]:
            update_bounds(i, j, bounds, a, x)
            bounds.encoding[i] = j
    return int(bounds.encoding[i])


def estimate_bounds(codebook: Codebook, bounds: BoundsState, config: TrainConfig,
                    matcher: Matcher | None = None) -> np.ndarray:
    """Loosen bounds by each code graph's movement over the last cycle.

    Returns the per-code movement estimate ``delta``.
    """
    if config.delta_mode == "path":
        delta = codebook.path.copy()
    elif config.delta_mode == "displacement":
        delta = np.sqrt(np.sum((codebook.reps - codebook.prev_reps) ** 2, axis=(1, 2, 3)))
    else:
        if matcher is None:
            raise ValueError("delta_mode='graph' needs a matcher")
        delta = np.array([graph_distance(codebook.reps[j], codebook.prev_reps[j], matcher).cost
                          for j in range(codebook.k)])

    np.maximum(bounds.l - delta[None, :], 0.0, out=bounds.l)
    known = bounds.encoding >= 0
    enc = bounds.encoding[known]
    lifted = np.sqrt(np.sum((bounds.x_aligned[known] - codebook.reps[enc]) ** 2, axis=(1, 2, 3)))
    bounds.u[known] = np.minimum(bounds.u[known] + delta[enc], lifted)
    bounds.stale[known] = delta[enc] > config.theta
    bounds.stale[~known] = True
    if config.corrupt_lower_bound:
        bounds.l += config.corrupt_lower_bound
    return delta


def _audit_bounds(D: np.ndarray, bounds: BoundsState, theta: float, record: CycleRecord) -> None:
    tol = AUDIT_TOL * np.maximum(1.0, D)
    record.bound_violations += int(np.sum(bounds.l > D + tol))
    known = bounds.encoding >= 0
    rows = np.flatnonzero(known)
    d_enc = D[rows, bounds.encoding[rows]]
    t_enc = tol[rows, bounds.encoding[rows]]
    record.bound_violations += int(np.sum(bounds.u[rows] < d_enc - t_enc))
    fresh = ~bounds.stale[rows]
    excess = bounds.u[rows][fresh] - d_enc[fresh]
    record.theta_violations += int(np.sum(excess > theta + t_enc[fresh]))
    if excess.size:
        record.theta_excess_max = max(record.theta_excess_max, float(excess.max()))


def train_accelerated(S, labels=None, config: TrainConfig | None = None, codebook: Codebook | None = None,
                      pairwise=None):
    """Competitive learning that skips graph distances ruled out by the bounds."""
    S, codebook, rng, init_calls = _prepare(S, config, codebook)
    N, k = len(S), codebook.k
    report = TrainReport(algo="acc", k=k, n_graphs=N, init_calls=init_calls)
    bounds = BoundsState.initial(N, k, S.shape[1:])
    evaluator = config.new_matcher()
    for cycle in range(config.cycles):
        matcher = config.new_matcher()
        record = CycleRecord(cycle=cycle + 1, distortion=math.nan, matcher_calls=0)
        audit = _Audit() if config.instrument_bounds else None
        codebook.snapshot()
        for i in rng.permutation(N):
            j = classify(i, S[i], codebook, bounds, matcher, record, audit)
            eta = learning_rate(config.lr, int(codebook.win_counts[j]), cycle)
            codebook.update(j, bounds.x_aligned[i], eta)
        delta = estimate_bounds(codebook, bounds, config, matcher)
        record.matcher_calls = matcher.calls
        record.delta_max = float(delta.max())
        record.stale_count = int(bounds.stale.sum())
        D = None
        if config.track_distortion or config.instrument_bounds or cycle == config.cycles - 1:
            D = distance_matrix(S, codebook.reps, evaluator)
            record.distortion = distortion_from_distances(D)
        if audit is not None:
            record.wrong_prunes = audit.wrong_prunes
            _audit_bounds(D, bounds, config.theta, record)
        report.per_cycle.append(record)
    _finalize(report, S, labels, codebook, config, pairwise)
    return codebook, report

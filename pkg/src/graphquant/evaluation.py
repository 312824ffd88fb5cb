"""Performance measures and training reports."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .matching import Matcher, graph_distance

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "cycle",
    "distortion",
    "matcher_calls",
    "matcher_calls_pct",
    "pruned_c1",
    "pruned_c2",
    "delta_max",
    "stale_count",
    "bound_violations",
    "wrong_prunes",
    "theta_violations",
)


@dataclass
class CycleRecord:
    cycle: int
    distortion: float
    matcher_calls: int
    pruned_c1: int = 0
    pruned_c2: int = 0
    delta_max: float = 0.0
    stale_count: int = 0
    bound_violations: int = 0
    wrong_prunes: int = 0
    theta_violations: int = 0
    theta_excess_max: float = 0.0

    @property
    def pruned_calls(self) -> int:
        return self.pruned_c1 + self.pruned_c2


@dataclass
class TrainReport:
    algo: str
    k: int
    n_graphs: int
    per_cycle: list[CycleRecord] = field(default_factory=list)
    init_calls: int = 0
    final: dict = field(default_factory=dict)
    wall_notes: str = ""

    @property
    def matcher_calls(self) -> int:
        return sum(c.matcher_calls for c in self.per_cycle)

    @property
    def bound_violations(self) -> int:
        return sum(c.bound_violations for c in self.per_cycle)

    @property
    def wrong_prunes(self) -> int:
        return sum(c.wrong_prunes for c in self.per_cycle)

    @property
    def theta_violations(self) -> int:
        return sum(c.theta_violations for c in self.per_cycle)

    def call_fractions(self) -> list[float]:
        full = self.k * self.n_graphs
        return [c.matcher_calls / full for c in self.per_cycle]

    def to_record(self) -> dict:
        return {
            "algo": self.algo,
            "k": self.k,
            "n_graphs": self.n_graphs,
            "cycles": len(self.per_cycle),
            "init_calls": self.init_calls,
            "totals": {
                "matcher_calls": self.matcher_calls,
                "bound_violations": self.bound_violations,
                "wrong_prunes": self.wrong_prunes,
                "theta_violations": self.theta_violations,
                "wall_notes": self.wall_notes,
            },
            "final": self.final,
            "per_cycle": [asdict(c) for c in self.per_cycle],
        }

    def csv_rows(self) -> list[dict]:
        full = self.k * self.n_graphs
        rows = []
        for c in self.per_cycle:
            rows.append(
                {
                    "cycle": c.cycle,
                    "distortion": repr(float(c.distortion)),
                    "matcher_calls": c.matcher_calls,
                    "matcher_calls_pct": repr(100.0 * c.matcher_calls / full),
                    "pruned_c1": c.pruned_c1,
                    "pruned_c2": c.pruned_c2,
                    "delta_max": repr(float(c.delta_max)),
                    "stale_count": c.stale_count,
                    "bound_violations": c.bound_violations,
                    "wrong_prunes": c.wrong_prunes,
                    "theta_violations": c.theta_violations,
                }
            )
        return rows


def write_csv(rows: list[dict], columns, fh=None) -> str:
    out = fh if fh is not None else io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue() if fh is None else ""


def distance_matrix(S, codes, matcher: Matcher) -> np.ndarray:
    """``D[i, j] = d(S[i], codes[j])``."""
    D = np.empty((len(S), len(codes)))
    for i, x in enumerate(S):
        for j, y in enumerate(codes):
            D[i, j] = graph_distance(y, x, matcher).cost
    return D


def pairwise_distances(S, matcher: Matcher) -> np.ndarray:
    N = len(S)
    D = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1, N):
            D[i, j] = D[j, i] = graph_distance(S[i], S[j], matcher).cost
    return D


def empirical_distortion(S, codes, matcher: Matcher) -> float:
    """Half the summed distance of every graph to its nearest code graph."""
    if len(S) == 0:
        raise ValueError("empty training set")
    if len(codes) == 0:
        raise ValueError("empty codebook")
    return distortion_from_distances(distance_matrix(S, codes, matcher))


def distortion_from_distances(D: np.ndarray) -> float:
    return 0.5 * float(np.sum(D.min(axis=1)))


def _set_distance(D: np.ndarray, U, V) -> float:
    # min-linkage distance between index sets; unused by the silhouette itself
    return float(D[np.ix_(list(U), list(V))].min())


def silhouette_index(distances, clusters) -> float:
    """Mean over clusters of the mean silhouette width of their members.

    A member of a singleton cluster gets width 0.
    """
    D = np.asarray(distances, dtype=float)
    clusters = np.asarray(clusters)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] != clusters.shape[0]:
        raise ValueError("distances must be N x N with one cluster id per row")
    ids = np.unique(clusters)
    if ids.size < 2:
        raise ValueError("silhouette needs at least 2 clusters")
    members = {c: np.flatnonzero(clusters == c) for c in ids}
    widths = np.zeros(D.shape[0])
    for i in range(D.shape[0]):
        own = members[clusters[i]]
        if own.size == 1:
            continue
        a = D[i, own[own != i]].mean()
        b = min(D[i, members[c]].mean() for c in ids if c != clusters[i])
        top = max(a, b)
        widths[i] = 0.0 if top == 0 else (b - a) / top
    return float(np.mean([widths[members[c]].mean() for c in ids]))


def majority_labels(encodings, labels) -> dict:
    """Code index -> most frequent label among its graphs (ties: lowest label)."""
    by_code: dict = {}
    for enc, lab in zip(encodings, labels):
        by_code.setdefault(enc, Counter())[lab] += 1
    return {enc: min(counts, key=lambda lab: (-counts[lab], lab)) for enc, counts in by_code.items()}


def classification_accuracy(encodings, labels) -> float:
    """Fraction of graphs carrying the majority label of their code graph."""
    encodings = list(encodings)
    labels = list(labels)
    if not labels or all(lab in ("", None) for lab in labels):
        raise ValueError("no labels")
    if len(encodings) != len(labels):
        raise ValueError("encodings and labels differ in length")
    winner = majority_labels(encodings, labels)
    return sum(winner[enc] == lab for enc, lab in zip(encodings, labels)) / len(labels)


def speedup(std_calls: int, acc_calls: int) -> float:
    if acc_calls <= 0:
        raise ZeroDivisionError("accelerated run made no matcher calls")
    return std_calls / acc_calls


def evaluate_codebook(S, labels, codes, matcher: Matcher, pairwise=None) -> dict:
    """Final distortion, accuracy and silhouette of a trained codebook."""
    D = distance_matrix(S, codes, matcher)
    encodings = D.argmin(axis=1)
    out = {"distortion": distortion_from_distances(D), "accuracy": None, "silhouette": None}
    if labels is not None and any(labels):
        out["accuracy"] = classification_accuracy(encodings, labels)
    if np.unique(encodings).size >= 2:
        if pairwise is None:
            pairwise = pairwise_distances(S, matcher)
        out["silhouette"] = silhouette_index(pairwise, encodings)
    out["encodings"] = [int(e) for e in encodings]
    return out


def format_number(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return f"{value:.4g}" if isinstance(value, float) else str(value)

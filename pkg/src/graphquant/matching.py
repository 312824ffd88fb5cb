"""Graph distance d(X, Y) = min over permutations of ||x - perm(y)||.

Three matchers are provided:

* ``brute_force_distance``: exhaustive enumeration, used as a test oracle.
* ``exact_distance``: depth-first branch-and-bound, provably optimal.
* ``graduated_assignment_distance``: softassign with deterministic
  annealing and Sinkhorn normalization; returns a feasible (hence
  never underestimating) alignment.

All matchers return an ``Alignment`` whose permutation is applied to the
*second* argument: ``cost == representation_distance(x, permute(y, perm))``.
"""

from __future__ import annotations

import itertools
import logging
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graphs import DimensionError, permute, representation_distance

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_ORDER = 8
MATCHERS = ("exact", "ga", "brute")


class OracleSizeError(ValueError):
    """Raised when the brute-force oracle is asked for more than 8! permutations."""


class BudgetExceededError(RuntimeError):
    """Raised when branch-and-bound exceeds its node-expansion budget."""


@dataclass(frozen=True)
class Alignment:
    perm: np.ndarray
    cost: float
    exact: bool

    def aligned(self, y: np.ndarray) -> np.ndarray:
        """The representation of the second argument realizing ``cost``."""
        return permute(y, self.perm)


@dataclass(frozen=True)
class GaParams:
    beta_start: float = 0.5
    beta_rate: float = 1.075
    beta_max: float = 10.0
    sinkhorn_iters: int = 30
    sinkhorn_tol: float = 1e-3
    assign_iters_per_beta: int = 4
    cleanup: str = "greedy"  # or "hungarian"

    def __post_init__(self):
        if self.beta_start <= 0 or self.beta_max <= 0:
            raise ValueError("beta_start and beta_max must be positive")
        if self.beta_rate <= 1:
            raise ValueError("beta_rate must exceed 1")
        if self.beta_start >= self.beta_max:
            raise ValueError("beta_start must be below beta_max")
        if self.sinkhorn_iters < 1 or self.assign_iters_per_beta < 1:
            raise ValueError("iteration counts must be positive")
        if self.sinkhorn_tol <= 0:
            raise ValueError("sinkhorn_tol must be positive")
        if self.cleanup not in ("greedy", "hungarian"):
            raise ValueError(f"unknown cleanup {self.cleanup!r}")


def _check_pair(x: np.ndarray, y: np.ndarray) -> int:
    if x.shape != y.shape or x.ndim != 3 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"incompatible representations {x.shape} and {y.shape}")
    return x.shape[0]


def _finish(x, y, perm, exact) -> Alignment:
    perm = np.asarray(perm, dtype=int)
    return Alignment(perm=perm, cost=representation_distance(x, permute(y, perm)), exact=exact)


def _tol(value: float) -> float:
    return 1e-9 * max(1.0, abs(value))


def pair_costs(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``C[i, a, j, b] = ||y[i, j] - x[a, b]||**2`` for y-vertices i, j and x-vertices a, b."""
    y2 = np.sum(y * y, axis=2)
    x2 = np.sum(x * x, axis=2)
    cross = np.einsum("ijr,abr->iajb", y, x)
    c = y2[:, None, :, None] + x2[None, :, None, :] - 2.0 * cross
    return np.maximum(c, 0.0)


def brute_force_distance(x: np.ndarray, y: np.ndarray) -> Alignment:
    n = _check_pair(x, y)
    if n > BRUTE_FORCE_MAX_ORDER:
        raise OracleSizeError(f"brute force limited to order <= {BRUTE_FORCE_MAX_ORDER}, got {n}")
    costs = []
    perms = list(itertools.permutations(range(n)))
    for p in perms:
        costs.append(float(np.sum((x - permute(y, p)) ** 2)))
    best = min(costs)
    # permutations() is lexicographic, so the first near-minimal one wins ties
    for p, c in zip(perms, costs):
        if c <= best + _tol(best):
            return _finish(x, y, p, exact=True)
    raise AssertionError("unreachable")


def _expansion_order(y: np.ndarray) -> list[int]:
    n = y.shape[0]
    norms = np.linalg.norm(y[np.arange(n), np.arange(n)], axis=1)
    off = np.any(y != 0, axis=2)
    off[np.arange(n), np.arange(n)] = False
    degree = off.sum(axis=1)
    score = norms + degree
    return sorted(range(n), key=lambda i: (-score[i], i))


def exact_distance(x: np.ndarray, y: np.ndarray, max_nodes: int | None = None) -> Alignment:
    """Branch-and-bound depth-first search over vertex assignments.

    Vertices of ``y`` are assigned to vertices of ``x`` one at a time.  The
    lower bound on the remaining cost adds, for every unassigned vertex of
    ``y``, the cheapest free target counting its diagonal term and its
    terms against already assigned vertices; terms among unassigned
    vertices are nonnegative and dropped, so the bound is admissible.
    """
    n = _check_pair(x, y)
    c = pair_costs(x, y)
    # link[i, a, j, b]: cost added by pairing i->a once j->b is fixed
    link = c + c.transpose(2, 3, 0, 1)
    diag = np.einsum("iaia->ia", c).copy()
    order = _expansion_order(y)

    # greedy incumbent on the diagonal terms
    free = set(range(n))
    greedy = np.empty(n, dtype=int)
    for i in order:
        a = min(free, key=lambda a: (diag[i, a], a))
        greedy[i] = a
        free.discard(a)
    best = float(np.sum(c[np.arange(n)[:, None], greedy[:, None], np.arange(n)[None, :], greedy[None, :]]))
    leaves: list[tuple[float, tuple[int, ...]]] = [(best, tuple(greedy))]

    perm = np.full(n, -1, dtype=int)
    row_free = np.ones(n, dtype=bool)
    col_free = np.ones(n, dtype=bool)
    expanded = 0

    def search(depth: int, g: float, partial: np.ndarray):
        nonlocal best, expanded
        if depth == n:
            if g <= best + _tol(best):
                leaves.append((g, tuple(perm)))
                best = min(best, g)
            return
        expanded += 1
        if max_nodes is not None and expanded > max_nodes:
            raise BudgetExceededError(f"branch-and-bound exceeded {max_nodes} node expansions")
        i = order[depth]
        cols = np.flatnonzero(col_free)
        incs = partial[i, cols]
        for a in cols[np.argsort(incs, kind="stable")]:
            g2 = g + partial[i, a]
            if g2 > best + _tol(best):
                break
            perm[i] = a
            row_free[i] = False
            col_free[a] = False
            nxt = partial + link[:, :, i, a]
            if depth + 1 < n:
                h = nxt[np.ix_(row_free, col_free)].min(axis=1).sum()
            else:
                h = 0.0
            if g2 + h <= best + _tol(best):
                search(depth + 1, g2, nxt)
            row_free[i] = True
            col_free[a] = True
            perm[i] = -1

    search(0, 0.0, diag.copy())
    ties = [p for cost, p in leaves if cost <= best + _tol(best)]
    return _finish(x, y, min(ties), exact=True)


def _sinkhorn(m: np.ndarray, iters: int, tol: float) -> tuple[np.ndarray, bool]:
    for _ in range(iters):
        m = m / m.sum(axis=1, keepdims=True)
        col = m.sum(axis=0, keepdims=True)
        m = m / col
        if np.max(np.abs(m.sum(axis=1) - 1.0)) < tol:
            return m, True
    return m, False


def _greedy_cleanup(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    work = m.copy()
    perm = np.full(n, -1, dtype=int)
    for _ in range(n):
        i, a = np.unravel_index(np.argmax(work), work.shape)
        perm[i] = a
        work[i, :] = -np.inf
        work[:, a] = -np.inf
    return perm


def graduated_assignment_distance(
    x: np.ndarray, y: np.ndarray, params: GaParams | None = None, stats: dict | None = None
) -> Alignment:
    """Approximate d(X, Y) by softassign minimization of ||x - perm(y)||**2.

    The quadratic objective is relaxed over doubly-stochastic matrices and
    annealed in ``beta``; the final match matrix is hardened to a
    permutation whose realized cost is returned.
    """
    params = params or GaParams()
    n = _check_pair(x, y)
    if n == 1:
        return _finish(x, y, [0], exact=False)
    c = pair_costs(x, y)
    scale = float(c.max())
    if scale == 0.0:
        return _finish(x, y, np.arange(n), exact=False)
    c = c / scale
    idx = np.arange(n)
    linear = np.einsum("iaia->ia", c).copy()
    quad = c.copy()
    # only (i != j, a != b) pairings survive for permutation matrices
    quad[idx, :, idx, :] = 0.0
    quad[:, idx, :, idx] = 0.0
    quad = quad + quad.transpose(2, 3, 0, 1)

    m = np.full((n, n), 1.0 / n)
    beta = params.beta_start
    unconverged = 0
    while beta < params.beta_max:
        for _ in range(params.assign_iters_per_beta):
            grad = np.einsum("iajb,jb->ia", quad, m) + linear
            q = -grad
            m_new = np.exp(beta * (q - q.max()))
            m_new, ok = _sinkhorn(m_new, params.sinkhorn_iters, params.sinkhorn_tol)
            unconverged += not ok
            m = m_new
        beta *= params.beta_rate
    if unconverged:
        logger.debug("graduated assignment: %d Sinkhorn runs hit the iteration cap", unconverged)
    if stats is not None:
        stats["sinkhorn_unconverged"] = stats.get("sinkhorn_unconverged", 0) + unconverged

    if params.cleanup == "hungarian":
        rows, cols = linear_sum_assignment(m, maximize=True)
        perm = np.empty(n, dtype=int)
        perm[rows] = cols
    else:
        perm = _greedy_cleanup(m)
    return _finish(x, y, perm, exact=False)


@dataclass
class Matcher:
    """Configured distance routine with a thread-safe call counter."""

    kind: str = "exact"
    ga: GaParams = field(default_factory=GaParams)
    max_nodes: int | None = None
    calls: int = 0
    stats: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in MATCHERS:
            raise ValueError(f"unknown matcher {self.kind!r}; choose from {MATCHERS}")

    @property
    def exact(self) -> bool:
        return self.kind in ("exact", "brute")

    def fresh(self) -> "Matcher":
        """Same configuration, zeroed counters."""
        return Matcher(kind=self.kind, ga=self.ga, max_nodes=self.max_nodes)


def graph_distance(x: np.ndarray, y: np.ndarray, matcher: Matcher) -> Alignment:
    if matcher.kind == "exact":
        result = exact_distance(x, y, max_nodes=matcher.max_nodes)
    elif matcher.kind == "brute":
        result = brute_force_distance(x, y)
    else:
        stats: dict = {}
        result = graduated_assignment_distance(x, y, matcher.ga, stats)
        with matcher._lock:
            for key, value in stats.items():
                matcher.stats[key] = matcher.stats.get(key, 0) + value
    with matcher._lock:
        matcher.calls += 1
    return result

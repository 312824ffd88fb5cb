import numpy as np
import pytest

from graphquant.evaluation import (
    _set_distance,
    classification_accuracy,
    empirical_distortion,
    majority_labels,
    silhouette_index,
    speedup,
)
from graphquant.matching import Matcher, brute_force_distance

from conftest import random_rep, scalar_reps


def abs_distances(points):
    p = np.asarray(points, dtype=float)
    return np.abs(p[:, None] - p[None, :])


def random_distance_matrix(rng, n):
    pts = rng.normal(size=(n, 3))
    return np.linalg.norm(pts[:, None] - pts[None, :], axis=2)


def test_distortion_codebook_is_training_set(rng):
    S = [random_rep(rng, 3, 1) for _ in range(4)]
    assert empirical_distortion(S, S, Matcher()) == 0.0


def test_distortion_scalar():
    assert empirical_distortion(scalar_reps([0.0]), scalar_reps([2.0]), Matcher()) == 1.0


def test_distortion_matches_brute_force(rng):
    S = [random_rep(rng, 4, 2) for _ in range(6)]
    codes = [random_rep(rng, 4, 2) for _ in range(3)]
    expected = 0.5 * sum(min(brute_force_distance(y, x).cost for y in codes) for x in S)
    assert empirical_distortion(S, codes, Matcher()) == pytest.approx(expected, rel=1e-12)


def test_distortion_adding_training_graph_never_hurts(rng):
    S = [random_rep(rng, 3, 1) for _ in range(5)]
    codes = [random_rep(rng, 3, 1)]
    m = Matcher()
    assert empirical_distortion(S, codes + [S[2]], m) <= empirical_distortion(S, codes, m)


def test_distortion_empty():
    with pytest.raises(ValueError):
        empirical_distortion([], scalar_reps([1.0]), Matcher())


def test_silhouette_coincident_clusters():
    D = abs_distances([0, 0, 0, 5, 5])
    assert silhouette_index(D, [0, 0, 0, 1, 1]) == 1.0


def test_silhouette_hand_example():
    D = abs_distances([0, 1, 10, 11])
    expected = ((19 / 21 + 17 / 19) / 2 + (17 / 19 + 19 / 21) / 2) / 2
    assert silhouette_index(D, [0, 0, 1, 1]) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.8997, abs=1e-4)


def test_silhouette_singleton_width_zero():
    D = abs_distances([0, 1, 10])
    # cluster {10} contributes 0; cluster {0, 1}: widths 9/10 and 8/9
    expected = ((9 / 10 + 8 / 9) / 2 + 0.0) / 2
    assert silhouette_index(D, [0, 0, 1]) == pytest.approx(expected)


def test_silhouette_matches_sklearn_on_balanced_clusters(rng):
    metrics = pytest.importorskip("sklearn.metrics")
    for _ in range(20):
        D = random_distance_matrix(rng, 12)
        labels = np.repeat([0, 1, 2], 4)
        rng.shuffle(labels)
        ref = metrics.silhouette_score(D, labels, metric="precomputed")
        assert silhouette_index(D, labels) == pytest.approx(ref, abs=1e-12)


def test_silhouette_range_and_scale(rng):
    for _ in range(50):
        n = int(rng.integers(4, 15))
        D = random_distance_matrix(rng, n)
        labels = rng.integers(0, 3, size=n)
        if np.unique(labels).size < 2:
            continue
        s = silhouette_index(D, labels)
        assert -1.0 <= s <= 1.0
        assert silhouette_index(7.5 * D, labels) == pytest.approx(s, abs=1e-12)


def test_silhouette_single_cluster():
    with pytest.raises(ValueError):
        silhouette_index(abs_distances([0, 1]), [0, 0])


def test_set_distance_min_linkage():
    D = abs_distances([0, 1, 10, 11])
    assert _set_distance(D, [0, 1], [2, 3]) == 9.0


def test_accuracy_cases():
    assert classification_accuracy([0, 1, 2], ["a", "b", "a"]) == 1.0
    assert classification_accuracy([0, 0, 0], ["a", "a", "b"]) == pytest.approx(2 / 3)
    assert classification_accuracy([0, 0, 1, 1], ["a", "a", "b", "b"]) == 1.0


def test_majority_tie_goes_to_lowest_label():
    assert majority_labels([0, 0], ["b", "a"]) == {0: "a"}


def test_accuracy_requires_labels():
    with pytest.raises(ValueError):
        classification_accuracy([0, 1], ["", ""])


def test_speedup():
    assert speedup(16.9e5, 2.2e5) == pytest.approx(7.68, abs=0.01)
    assert speedup(10, 10) == 1.0
    assert speedup(100, 25) == 4.0
    with pytest.raises(ZeroDivisionError):
        speedup(100, 0)

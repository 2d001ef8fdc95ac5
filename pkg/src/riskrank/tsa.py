"""Shape analytics over the per-node score series.

Distance is classic dynamic time warping (absolute-difference local cost,
boundary-matched, no warping band: series here are short, so the exact
table is cheap).  Clustering is k-means under that distance, with
k-means++-style seeding and barycenter-averaging centroid updates; series
are clustered on raw values, since level differences between clusters are
part of the signal.  The elbow rule is formalized as the inertia-curve
point farthest from the chord joining the curve's endpoints.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ValidationError
from .ingest import LoanRecord, default_rate
from .windows import NodeSeries


def _as_series(values) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or len(arr) == 0:
        raise ValidationError("series must be non-empty 1-D vectors")
    return arr


def dtw_distance(a, b) -> float:
    """Minimal cumulative |a_i - b_j| cost over monotone alignments."""
    return _kernels.dtw_cost(_as_series(a), _as_series(b))


def dtw_path(a, b) -> list[tuple[int, int]]:
    """One optimal alignment, as (index into a, index into b) pairs.

    Ties during backtracking prefer the diagonal, then the step in a,
    then the step in b, so the path is deterministic.
    """
    a, b = _as_series(a), _as_series(b)
    table = _kernels.dtw_table(a, b)
    i, j = len(a), len(b)
    path = [(i - 1, j - 1)]
    while i > 1 or j > 1:
        diag = table[i - 1, j - 1]
        up = table[i - 1, j]
        left = table[i, j - 1]
        if diag <= up and diag <= left:
            i, j = i - 1, j - 1
        elif up <= left:
            i -= 1
        else:
            j -= 1
        path.append((i - 1, j - 1))
    path.reverse()
    return path


def dtw_barycenter(
    members: Sequence[np.ndarray], init: np.ndarray, max_iter: int = 10
) -> np.ndarray:
    """Barycenter averaging: realign members to the current centroid and
    replace each centroid point by the mean of the values aligned to it."""
    centroid = np.array(init, dtype=np.float64)
    for _ in range(max_iter):
        sums = np.zeros(len(centroid))
        counts = np.zeros(len(centroid))
        for member in members:
            for i, j in dtw_path(centroid, member):
                sums[i] += member[j]
                counts[i] += 1
        updated = sums / counts
        if np.array_equal(updated, centroid):
            break
        centroid = updated
    return centroid


@dataclass(frozen=True)
class ClusterResult:
    k: int
    assignments: dict[str, int]       # series label -> cluster id
    centroids: tuple[np.ndarray, ...]
    inertia: float                    # total DTW distance to assigned centroids
    iterations: int
    seed: int
    inertia_history: tuple[float, ...]


def dtw_kmeans(
    series: Sequence[NodeSeries],
    k: int,
    seed: int = 0,
    max_iter: int = 50,
    barycenter_iter: int = 10,
) -> ClusterResult:
    """k-means over DTW distance; deterministic for a fixed seed.

    Runs to an assignment fixpoint or max_iter.  Empty clusters are
    re-seeded from the point farthest from its assigned centroid.  A
    centroid update is kept only if it lowers that cluster's cost, which
    makes the recorded inertia non-increasing by construction.
    """
    n = len(series)
    if not 1 <= k <= n:
        raise ValidationError(f"k must be in [1, {n}], got {k}")
    labels = [s.label for s in series]
    if len(set(labels)) != n:
        raise ValidationError("series labels must be unique")
    arrays = [_as_series(s.values) for s in series]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise ValidationError("all series must have the same length")

    rng = np.random.default_rng(seed)
    centroids = _seed_centroids(arrays, k, rng)

    assignments = None
    history: list[float] = []
    dist = np.empty((n, k))
    iterations = 0
    for iterations in range(1, max_iter + 1):
        for c in range(k):
            for i in range(n):
                dist[i, c] = _kernels.dtw_cost(arrays[i], centroids[c])
        new_assign = dist.argmin(axis=1)

        for c in range(k):
            if not np.any(new_assign == c):
                member_dist = dist[np.arange(n), new_assign]
                farthest = int(member_dist.argmax())
                centroids[c] = arrays[farthest].copy()
                new_assign[farthest] = c
                for i in range(n):
                    dist[i, c] = _kernels.dtw_cost(arrays[i], centroids[c])

        if assignments is not None and np.array_equal(new_assign, assignments):
            break
        assignments = new_assign.copy()

        for c in range(k):
            members = [arrays[i] for i in range(n) if assignments[i] == c]
            if not members:
                continue
            current_cost = sum(dist[i, c] for i in range(n) if assignments[i] == c)
            candidate = dtw_barycenter(members, centroids[c], barycenter_iter)
            candidate_cost = sum(_kernels.dtw_cost(m, candidate) for m in members)
            if candidate_cost < current_cost:
                centroids[c] = candidate

        inertia = sum(
            _kernels.dtw_cost(arrays[i], centroids[assignments[i]]) for i in range(n)
        )
        history.append(float(inertia))

    return ClusterResult(
        k=k,
        assignments={label: int(c) for label, c in zip(labels, assignments)},
        centroids=tuple(centroids),
        inertia=history[-1],
        iterations=iterations,
        seed=seed,
        inertia_history=tuple(history),
    )


def _seed_centroids(arrays, k, rng) -> list[np.ndarray]:
    # k-means++ style: later seeds drawn proportionally to squared distance
    n = len(arrays)
    first = int(rng.integers(n))
    centroids = [arrays[first].copy()]
    chosen = {first}
    dist = np.array([_kernels.dtw_cost(a, centroids[0]) for a in arrays])
    while len(centroids) < k:
        weights = dist**2
        total = weights.sum()
        if total > 0:
            pick = int(rng.choice(n, p=weights / total))
        else:
            remaining = [i for i in range(n) if i not in chosen]
            pick = remaining[int(rng.integers(len(remaining)))]
        chosen.add(pick)
        centroids.append(arrays[pick].copy())
        new_dist = np.array([_kernels.dtw_cost(a, centroids[-1]) for a in arrays])
        dist = np.minimum(dist, new_dist)
    return centroids


@dataclass(frozen=True)
class ElbowResult:
    chosen_k: int
    ks: tuple[int, ...]
    inertias: tuple[float, ...]
    degenerate: bool  # no interior knee; chosen_k fell back to the smallest k


def knee_point(ks: Sequence[int], inertias: Sequence[float]) -> tuple[int, bool]:
    """Index the curve point with maximal perpendicular distance to the
    chord between its endpoints; flags (smallest k, True) when the curve
    is a straight line and no interior knee exists."""
    if len(ks) < 3 or len(ks) != len(inertias):
        raise ValidationError("knee detection needs at least 3 (k, inertia) points")
    x = np.asarray(ks, dtype=np.float64)
    y = np.asarray(inertias, dtype=np.float64)
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    # |cross product| of (chord, point - first); the chord-length division
    # is a common positive factor and cannot change the argmax
    distances = np.abs(dx * (y - y[0]) - dy * (x - x[0]))
    scale = max(1.0, float(np.abs(y).max())) * max(1.0, abs(dx))
    if distances.max() <= 1e-9 * scale:
        return int(ks[0]), True
    return int(ks[int(distances.argmax())]), False


def elbow_select(
    series: Sequence[NodeSeries],
    k_range: Sequence[int],
    seed: int = 0,
    max_iter: int = 50,
) -> ElbowResult:
    """Cluster at every k in k_range and pick the knee of the inertia curve."""
    ks = sorted(set(int(k) for k in k_range))
    if len(ks) < 3:
        raise ValidationError("k_range must contain at least 3 distinct values")
    if ks[0] < 1 or ks[-1] > len(series):
        raise ValidationError(f"k_range must lie within [1, {len(series)}]")
    inertias = [dtw_kmeans(series, k, seed=seed, max_iter=max_iter).inertia for k in ks]
    chosen, degenerate = knee_point(ks, inertias)
    return ElbowResult(chosen, tuple(ks), tuple(inertias), degenerate)


@dataclass(frozen=True)
class PairComparison:
    district: str
    product: str
    series_district: np.ndarray
    series_product: np.ndarray
    series_sum: np.ndarray
    default_rate_series: np.ndarray


def pair_comparison(
    records: Sequence[LoanRecord],
    windows: Sequence[tuple[str, str]],
    series: Sequence[NodeSeries],
    district: str,
    product: str,
) -> PairComparison:
    """Align the pair's two score series, their sum, and its default rate.

    Windows where the pair has no loans contribute rate 0; absent nodes
    contribute score 0, matching the series convention.
    """
    if not any(r.district == district and r.product == product for r in records):
        raise ValidationError(
            f"pair (district={district!r}, product={product!r}) never occurs in the records"
        )
    n_windows = len(windows)
    zeros = np.zeros(n_windows)
    by_key = {(s.node_kind, s.label): s.values for s in series}
    d_series = np.array(by_key.get(("district", district), zeros))
    p_series = np.array(by_key.get(("product", product), zeros))
    if len(d_series) != n_windows or len(p_series) != n_windows:
        raise ValidationError("series length does not match the window count")

    rates = np.zeros(n_windows)
    for index, (start, end) in enumerate(windows):
        rates[index] = default_rate(
            records, district=district, product=product, month_range=(start, end)
        ).rate
    return PairComparison(
        district=district,
        product=product,
        series_district=d_series,
        series_product=p_series,
        series_sum=d_series + p_series,
        default_rate_series=rates,
    )


def write_cluster_csv(result: ClusterResult, series: Sequence[NodeSeries], stream) -> None:
    kinds = {s.label: s.node_kind for s in series}
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["label", "node_kind", "cluster_id"])
    for label in sorted(result.assignments):
        writer.writerow([label, kinds.get(label, ""), result.assignments[label]])


def write_inertia_csv(ks: Sequence[int], inertias: Sequence[float], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["k", "inertia"])
    for k, inertia in zip(ks, inertias):
        writer.writerow([k, f"{inertia:.12g}"])


def write_pair_csv(pc: PairComparison, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(
        ["window_index", "score_district", "score_product", "score_sum", "default_rate"]
    )
    for index in range(len(pc.series_sum)):
        writer.writerow(
            [
                index,
                f"{pc.series_district[index]:.12g}",
                f"{pc.series_product[index]:.12g}",
                f"{pc.series_sum[index]:.12g}",
                f"{pc.default_rate_series[index]:.12g}",
            ]
        )

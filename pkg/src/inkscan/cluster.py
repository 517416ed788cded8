"""Deterministic K-means (Lloyd's algorithm) over spectral vectors.

Everything here is reproducible bit-for-bit from the seed:

- initialization draws from the package's SplitMix64 stream;
- assignment ties go to the lowest centroid index;
- samples are processed in fixed-size chunks (CHUNK_SIZE) and all
  reductions combine chunks in index order, so any thread count yields
  byte-identical results to the sequential run;
- restarts run with seeds seed, seed+1, ... and the lowest-inertia model
  wins, ties to the lowest restart index.

Distances are squared Euclidean on raw 64-bit floats, computed as
sum((x - c)^2) rather than the dot-product expansion so the arithmetic
matches a naive per-element scan.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .binarize import SpectrumSet
from .errors import DimensionMismatch, EmptyInput, TooFewSamples
from .rng import SplitMix64

INIT_KMEANSPP = "kmeanspp"
INIT_RANDOM = "random"

# Fixed regardless of worker count; changing it changes reduction order.
CHUNK_SIZE = 4096


@dataclass(frozen=True)
class KMeansParams:
    """Clustering knobs; every randomized choice is pinned by `seed`."""

    k: int
    init: str = INIT_KMEANSPP
    seed: int = 0
    max_iterations: int = 300
    tolerance: float = 1e-6
    restarts: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.init not in (INIT_KMEANSPP, INIT_RANDOM):
            raise ValueError(f"unknown init {self.init!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """Fitted model: centroids are the means of their assigned samples.

    `inertia` is the within-cluster sum of squared distances for `labels`
    against `centroids`. `inertia_trace` holds the after-update inertia of
    every Lloyd iteration of the winning restart when tracing was enabled.
    """

    centroids: np.ndarray
    labels: np.ndarray
    inertia: float
    iterations: int
    converged: bool
    inertia_trace: tuple = field(default=())

    def __post_init__(self):
        for arr in (self.centroids, self.labels):
            arr.setflags(write=False)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _chunks(n: int):
    return [(s, min(s + CHUNK_SIZE, n)) for s in range(0, n, CHUNK_SIZE)]


def _assign_chunk(x: np.ndarray, centroids: np.ndarray):
    diff = x[:, None, :] - centroids[None, :, :]
    d2 = (diff * diff).sum(axis=2)
    labels = d2.argmin(axis=1)  # argmin takes the first minimum: lowest index
    return labels, d2[np.arange(x.shape[0]), labels]


def _assign_all(x: np.ndarray, centroids: np.ndarray, workers: int):
    n = x.shape[0]
    labels = np.empty(n, dtype=np.int32)
    dists = np.empty(n, dtype=np.float64)
    spans = _chunks(n)

    def run(span):
        s, e = span
        lab, d = _assign_chunk(x[s:e], centroids)
        labels[s:e] = lab
        dists[s:e] = d

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, spans))
    else:
        for span in spans:
            run(span)
    return labels, dists


def _accumulate(x: np.ndarray, labels: np.ndarray, k: int):
    """Per-cluster sums and counts, accumulated in fixed chunk order.

    Reductions stay inside NumPy's deterministic pairwise sums (no BLAS),
    so the result is a pure function of (x, labels, k).
    """
    sums = np.zeros((k, x.shape[1]), dtype=np.float64)
    counts = np.zeros(k, dtype=np.int64)
    for s, e in _chunks(x.shape[0]):
        lab = labels[s:e]
        chunk = x[s:e]
        counts += np.bincount(lab, minlength=k)
        for c in range(k):
            members = chunk[lab == c]
            if members.shape[0]:
                sums[c] += members.sum(axis=0)
    return sums, counts


def _inertia_fixed_order(x: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    total = 0.0
    for s, e in _chunks(x.shape[0]):
        diff = x[s:e] - centroids[labels[s:e]]
        total += float((diff * diff).sum())
    return total


def _farthest_index(x: np.ndarray, centroid: np.ndarray) -> int:
    best = -1.0
    best_i = 0
    for s, e in _chunks(x.shape[0]):
        diff = x[s:e] - centroid
        d2 = (diff * diff).sum(axis=1)
        i = int(d2.argmax())  # first maximum: lowest sample index in chunk
        if d2[i] > best:
            best = float(d2[i])
            best_i = s + i
    return best_i


def kmeans_init(spectra: SpectrumSet, params: KMeansParams) -> np.ndarray:
    """Seed-determined initial centroids (k x B).

    random: k distinct sample rows, uniform without replacement.
    kmeanspp: first uniform, each next with probability proportional to
    squared distance from the nearest chosen centroid. If every remaining
    point duplicates a chosen centroid (zero total mass), the next index
    is drawn uniformly from the unchosen ones.
    """
    x = np.asarray(spectra.vectors, dtype=np.float64)
    return _init_centroids(x, params.k, params.init, params.seed)


def _init_centroids(x: np.ndarray, k: int, init: str, seed: int) -> np.ndarray:
    n = x.shape[0]
    if n == 0:
        raise EmptyInput("no samples to initialize from")
    if n < k:
        raise TooFewSamples(f"{n} samples for k={k}")
    rng = SplitMix64(seed)

    if init == INIT_RANDOM:
        idx = rng.sample_indices(n, k)
        return x[idx].copy()

    chosen = [rng.below(n)]
    d2 = _sq_dist_to(x, x[chosen[0]])
    while len(chosen) < k:
        total = float(d2.sum())
        if total > 0.0:
            target = rng.next_double() * total
            cum = np.cumsum(d2)
            next_i = int(np.searchsorted(cum, target, side="right"))
            next_i = min(next_i, n - 1)
        else:
            remaining = sorted(set(range(n)) - set(chosen))
            next_i = remaining[rng.below(len(remaining))]
        chosen.append(next_i)
        d2 = np.minimum(d2, _sq_dist_to(x, x[next_i]))
    return x[chosen].copy()


def _sq_dist_to(x: np.ndarray, point: np.ndarray) -> np.ndarray:
    diff = x - point
    return (diff * diff).sum(axis=1)


def assign(centroids: np.ndarray, spectra: SpectrumSet, workers: int = 1) -> np.ndarray:
    """Nearest-centroid label per sample; exact ties to the lowest index."""
    centroids = np.asarray(centroids, dtype=np.float64)
    x = spectra.vectors
    if centroids.ndim != 2 or centroids.shape[1] != x.shape[1]:
        raise DimensionMismatch(
            f"centroids have {centroids.shape[-1] if centroids.ndim else 0} dims, "
            f"samples have {x.shape[1]}"
        )
    labels, _ = _assign_all(x, centroids, workers)
    return labels


def inertia(centroids: np.ndarray, spectra: SpectrumSet, labels: np.ndarray) -> float:
    """Within-cluster sum of squares, summed in fixed sample order."""
    centroids = np.asarray(centroids, dtype=np.float64)
    labels = np.asarray(labels)
    x = spectra.vectors
    if centroids.ndim != 2 or centroids.shape[1] != x.shape[1]:
        raise DimensionMismatch("centroid and sample dimensionality disagree")
    if labels.shape != (x.shape[0],):
        raise DimensionMismatch(f"{labels.shape[0]} labels for {x.shape[0]} samples")
    if labels.size and (labels.min() < 0 or labels.max() >= centroids.shape[0]):
        raise DimensionMismatch("label out of range for centroid matrix")
    return _inertia_fixed_order(x, centroids, labels)


def kmeans_fit(
    spectra: SpectrumSet,
    params: KMeansParams,
    workers: int = 1,
    capture_trace: bool = False,
) -> ClusterModel:
    """Run Lloyd iterations to convergence, best of `params.restarts` runs.

    Each iteration assigns samples to the nearest centroid, recomputes
    centroids as member means, re-seeds any empty cluster with the sample
    farthest from that cluster's previous centroid (ties to the lowest
    sample index), and stops once the maximum centroid displacement drops
    to `tolerance` or `max_iterations` is reached. Restart r uses seed
    seed+r; the lowest-inertia restart wins, ties to the lowest r.
    """
    x = spectra.vectors
    n = x.shape[0]
    if n == 0:
        raise EmptyInput("no samples to cluster")
    if n < params.k:
        raise TooFewSamples(f"{n} samples for k={params.k}")

    best = None
    for restart in range(params.restarts):
        model = _fit_once(x, params, params.seed + restart, workers, capture_trace)
        if best is None or model.inertia < best.inertia:
            best = model
    return best


def _fit_once(x, params, seed, workers, capture_trace):
    k = params.k
    centroids = _init_centroids(x, k, params.init, seed)
    tol2 = params.tolerance * params.tolerance
    trace = []
    labels = None
    converged = False
    iterations = 0

    for iterations in range(1, params.max_iterations + 1):
        labels, _ = _assign_all(x, centroids, workers)
        sums, counts = _accumulate(x, labels, k)

        new_centroids = np.empty_like(centroids)
        occupied = counts > 0
        new_centroids[occupied] = sums[occupied] / counts[occupied, None]
        for c in np.nonzero(~occupied)[0]:  # ascending cluster index
            new_centroids[c] = x[_farthest_index(x, centroids[c])]

        moved = new_centroids - centroids
        max_disp2 = float((moved * moved).sum(axis=1).max())
        centroids = new_centroids

        current = _inertia_fixed_order(x, centroids, labels)
        if capture_trace:
            trace.append(current)
        if max_disp2 <= tol2:
            converged = True
            break

    return ClusterModel(
        centroids=centroids,
        labels=labels,
        inertia=current,
        iterations=iterations,
        converged=converged,
        inertia_trace=tuple(trace),
    )

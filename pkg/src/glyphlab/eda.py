"""Exploratory analysis: exact tSNE, distance matrices, average-linkage
clustering and clustered distance maps.

The tSNE here is the exact O(n^2) formulation: per-point bandwidths are
calibrated by bisecting sigma until the conditional distribution's
perplexity (2^H) hits the target, the joint P is the symmetrized
conditional, and the low-dimensional affinities Q follow a Student-t
with one degree of freedom. Optimization is plain gradient descent with
momentum, early exaggeration of P, and a per-iteration KL record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .numerics import Rng, Tensor, derive_seed

_P_FLOOR = 1e-12
_SIGMA_LO = 1e-20
_SIGMA_HI = 1e20


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric non-negative pairwise distances with a zero diagonal."""

    n: int
    d: Tensor

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.shape != (self.n, self.n):
            raise ArgumentError(f"distance matrix must be {self.n}x{self.n}, got {d.shape}")
        if not np.isfinite(d).all() or (d < 0).any():
            raise ArgumentError("distances must be finite and non-negative")
        if np.abs(d - d.T).max(initial=0.0) > 1e-12:
            raise ArgumentError("distance matrix must be symmetric within 1e-12")
        if d.size and np.abs(np.diag(d)).max() != 0.0:
            raise ArgumentError("distance matrix diagonal must be zero")
        object.__setattr__(self, "d", d)


@dataclass(frozen=True)
class TsneConfig:
    out_dims: int = 3
    perplexity: float = 30.0
    iters: int = 1000
    learning_rate: float = 200.0
    exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.out_dims < 1:
            raise ArgumentError(f"out_dims must be >= 1, got {self.out_dims}")
        if self.perplexity < 1.0:
            raise ArgumentError(f"perplexity must be >= 1, got {self.perplexity}")
        if self.iters < self.exaggeration_iters:
            raise ArgumentError("iters must be >= exaggeration_iters")


@dataclass(frozen=True)
class Embedding:
    """Low-dimensional coordinates plus the KL trace of the descent."""

    y: Tensor
    kl_history: np.ndarray

    def __post_init__(self):
        kl = np.asarray(self.kl_history, dtype=np.float64)
        if not np.isfinite(kl).all():
            raise ArgumentError("kl_history must be finite")
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.float64))
        object.__setattr__(self, "kl_history", kl)


@dataclass(frozen=True)
class Dendrogram:
    """Merge log of average-linkage clustering.

    merges holds n-1 records (left, right, height, size) where node ids
    0..n-1 are leaves and n+k is the cluster created by merge k.
    leaf_order is the depth-first traversal of the final tree, left
    child first.
    """

    merges: tuple
    leaf_order: tuple

    def __post_init__(self):
        heights = [m[2] for m in self.merges]
        for a, b in zip(heights, heights[1:]):
            if b < a - 1e-9 * max(1.0, abs(a)):
                raise ArgumentError("merge heights must be non-decreasing")
        order = list(self.leaf_order)
        if sorted(order) != list(range(len(order))):
            raise ArgumentError("leaf_order must be a permutation of the leaves")
        object.__setattr__(self, "merges", tuple(tuple(m) for m in self.merges))
        object.__setattr__(self, "leaf_order", tuple(int(i) for i in order))


def pairwise_euclidean(x: Tensor) -> DistanceMatrix:
    """All-pairs Euclidean distances between the rows of x."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ArgumentError(f"need a rank-2 array with n >= 2 rows, got shape {x.shape}")
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    d = 0.5 * (d + d.T)  # kill rounding asymmetry from the Gram product
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(x.shape[0], d)


def calibrate_row(distances_row: Tensor, perplexity: float) -> tuple[float, Tensor]:
    """Find sigma so the row's conditional distribution has the target
    perplexity, by bisection on log(sigma).

    distances_row excludes the self distance. Returns (sigma, p_row)
    with p_row summing to 1; a row of all-zero distances degenerates to
    the uniform distribution.
    """
    row = np.asarray(distances_row, dtype=np.float64)
    if row.ndim != 1 or row.size < 1:
        raise ArgumentError(f"need a non-empty 1-d distance row, got shape {row.shape}")
    if perplexity < 1.0:
        raise ArgumentError(f"perplexity must be >= 1, got {perplexity}")

    d2 = row * row
    if d2.max() == 0.0:
        return 1.0, np.full(row.size, 1.0 / row.size)

    target = math.log2(perplexity)

    def entropy_bits(sigma: float) -> tuple[float, Tensor]:
        logits = -d2 / (2.0 * sigma * sigma)
        logits -= logits.max()
        p = np.exp(logits)
        p /= p.sum()
        nz = p[p > 0.0]
        return float(-(nz * np.log2(nz)).sum()), p

    lo, hi = _SIGMA_LO, _SIGMA_HI
    sigma = 1.0
    h, p = entropy_bits(sigma)
    for _ in range(64):
        if abs(2.0 ** h - perplexity) <= 1e-5 * perplexity:
            break
        if h > target:  # too smooth: shrink sigma
            hi = sigma
        else:
            lo = sigma
        sigma = math.sqrt(lo * hi)
        h, p = entropy_bits(sigma)
    return sigma, p


def _joint_p(x: Tensor, perplexity: float) -> Tensor:
    n = x.shape[0]
    d = pairwise_euclidean(x).d
    cond = np.zeros((n, n))
    mask = ~np.eye(n, dtype=bool)
    for i in range(n):
        _, p_row = calibrate_row(d[i][mask[i]], perplexity)
        cond[i][mask[i]] = p_row
    p = (cond + cond.T) / (2.0 * n)
    p = np.maximum(p, _P_FLOOR)
    np.fill_diagonal(p, 0.0)
    return p


def _student_q(y: Tensor) -> tuple[Tensor, Tensor]:
    """Normalized t-affinities Q and the unnormalized weights W."""
    sq = np.sum(y * y, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (y @ y.T)
    np.maximum(d2, 0.0, out=d2)
    w = 1.0 / (1.0 + d2)
    np.fill_diagonal(w, 0.0)
    return w / w.sum(), w


def kl_divergence(p: Tensor, y: Tensor) -> float:
    """KL(P || Q(y)) over off-diagonal pairs, the tSNE objective."""
    q, _ = _student_q(y)
    mask = p > 0.0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], _P_FLOOR))))


def kl_gradient(p: Tensor, y: Tensor) -> Tensor:
    """Analytic objective gradient: 4 sum_j (p-q)(y_i-y_j)/(1+||.||^2)."""
    q, w = _student_q(y)
    a = (p - q) * w
    return 4.0 * (a.sum(axis=1)[:, None] * y - a @ y)


def tsne(x: Tensor, cfg: TsneConfig = TsneConfig()) -> Embedding:
    """Embed the rows of x into cfg.out_dims dimensions.

    Perplexity is clamped into [1, (n-1)/3]. The effective step size is
    the configured learning rate capped at max(1, n / exaggeration):
    plain momentum descent diverges on small point sets at the default
    rate of 200, and n/exaggeration is the usual stability bound. The
    run is fully deterministic in (x, cfg): init is a seeded Gaussian
    with stddev 1e-4 and the KL against the true (unexaggerated) P is
    recorded after every iteration.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 4:
        raise ArgumentError(f"tsne needs at least 4 points, got shape {x.shape}")
    n = x.shape[0]
    perplexity = min(max(cfg.perplexity, 1.0), (n - 1) / 3.0)
    eta = min(cfg.learning_rate, max(1.0, n / cfg.exaggeration))

    p = _joint_p(x, perplexity)
    rng = Rng(derive_seed(cfg.seed, 0x54534E45))  # stream tag: tsne init
    y = rng.normal_array((n, cfg.out_dims), 0.0, 1e-4)
    velocity = np.zeros_like(y)

    kl_history = np.empty(cfg.iters)
    for it in range(cfg.iters):
        exaggerating = it < cfg.exaggeration_iters
        p_eff = p * cfg.exaggeration if exaggerating else p
        grad = kl_gradient(p_eff, y)
        momentum = cfg.momentum_early if exaggerating else cfg.momentum_late
        velocity = momentum * velocity - eta * grad
        y = y + velocity
        kl_history[it] = kl_divergence(p, y)
    return Embedding(y, kl_history)


def hcluster_average(dm: DistanceMatrix) -> Dendrogram:
    """UPGMA: repeatedly merge the pair of clusters with the smallest
    average inter-cluster distance.

    Ties break toward the lexicographically smallest (left, right) node
    id pair. Cluster sizes weight the running distance update, so the
    height of each merge is the exact mean pairwise distance between
    the two merged clusters' leaves.
    """
    n = dm.n
    if n < 2:
        raise ArgumentError(f"need at least 2 points to cluster, got {n}")

    total = 2 * n - 1
    big = np.full((total, total), np.inf)
    big[:n, :n] = dm.d
    big[np.tril_indices(total)] = np.inf  # search the strict upper triangle only

    sizes = np.zeros(total, dtype=np.int64)
    sizes[:n] = 1
    active = np.zeros(total, dtype=bool)
    active[:n] = True

    merges = []
    children: dict[int, tuple[int, int]] = {}
    for step in range(n - 1):
        flat = np.argmin(big)
        a, b = int(flat // total), int(flat % total)
        height = float(big[a, b])
        new = n + step
        children[new] = (a, b)
        merges.append((a, b, height, int(sizes[a] + sizes[b])))

        # Lance-Williams update for average linkage.
        for k in np.flatnonzero(active):
            if k == a or k == b:
                continue
            dak = big[min(a, k), max(a, k)]
            dbk = big[min(b, k), max(b, k)]
            big[k, new] = (sizes[a] * dak + sizes[b] * dbk) / (sizes[a] + sizes[b])
        sizes[new] = sizes[a] + sizes[b]
        active[a] = active[b] = False
        active[new] = True
        big[a, :] = np.inf
        big[:, a] = np.inf
        big[b, :] = np.inf
        big[:, b] = np.inf

    leaf_order = []
    stack = [total - 1]
    while stack:
        node = stack.pop()
        if node < n:
            leaf_order.append(node)
        else:
            left, right = children[node]
            stack.append(right)
            stack.append(left)
    return Dendrogram(tuple(merges), tuple(leaf_order))


def clustered_map(dm: DistanceMatrix, dg: Dendrogram, labels) -> tuple[Tensor, np.ndarray]:
    """Reorder a distance matrix by dendrogram leaf order.

    Returns (reordered, ribbon): reordered[i, j] = d[perm(i), perm(j)]
    and ribbon[i] = labels[perm(i)], the class strip drawn along the
    map's edges.
    """
    labels = np.asarray(labels)
    if labels.shape != (dm.n,):
        raise ArgumentError(f"labels must have length {dm.n}, got shape {labels.shape}")
    perm = np.asarray(dg.leaf_order, dtype=np.int64)
    if perm.size != dm.n:
        raise ArgumentError("dendrogram and distance matrix disagree on n")
    return dm.d[np.ix_(perm, perm)], labels[perm]

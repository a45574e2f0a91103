"""Exact and approximate p-Wasserstein distances between empirical point sets.

The exact 1-D distance integrates the gap between the two empirical quantile
functions over a merged breakpoint grid, which is exact for unequal sample
counts. The sliced distance averages exact 1-D distances over seeded random
unit projections and is the approximation used by the detector. A brute-force
assignment search over permutations is provided as a small-instance oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnsupportedInstanceError

__all__ = [
    "DistanceConfig",
    "exact_1d_wasserstein",
    "sliced_wasserstein",
    "exact_ot_distance",
]

# chunk size for streaming permutation enumeration (8! fits comfortably in memory)
_PERM_CHUNK = 40320


@dataclass(frozen=True)
class DistanceConfig:
    """Settings for the sliced distance.

    Parameters
    ----------
    p : float
        Order of the distance, >= 1.
    n_projections : int
        Number of random unit directions to average over.
    seed : int
        Seed for the projection generator; every call draws its own
        directions from a fresh generator so calls stay pure.
    """

    p: float = 2.0
    n_projections: int = 128
    seed: int = 42

    def __post_init__(self) -> None:
        if not np.isfinite(self.p) or self.p < 1:
            raise InvalidInputError(f"distance order p must be >= 1, got {self.p}")
        if int(self.n_projections) < 1:
            raise InvalidInputError(
                f"n_projections must be >= 1, got {self.n_projections}"
            )
        if int(self.seed) < 0:
            raise InvalidInputError(f"seed must be nonnegative, got {self.seed}")


def _as_points(x, name: str) -> np.ndarray:
    """Coerce to a validated (n, d) float array; 1-D input becomes a column."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be a nonempty (n, d) point set")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def _as_samples(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        raise InvalidInputError(f"{name} must be a nonempty 1-D sample list")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return arr


def _quantile_grid(na: int, nb: int):
    """Merged quantile breakpoints for two empirical CDFs of sizes na, nb.

    Returns (widths, ia, ib): interval widths of the merged grid on [0, 1]
    and, per interval, the index of the order statistic each quantile
    function takes on that interval.
    """
    qa = np.arange(1, na + 1) / na
    qb = np.arange(1, nb + 1) / nb
    inner = np.sort(np.concatenate((qa[:-1], qb[:-1])))
    edges = np.concatenate(([0.0], inner, [1.0]))
    widths = np.diff(edges)
    left = edges[:-1]
    # quantile value on (left, next) is the first order statistic with cdf > left
    ia = np.searchsorted(qa, left, side="right")
    ib = np.searchsorted(qb, left, side="right")
    return widths, ia, ib


def _w1d_columns(pa: np.ndarray, pb: np.ndarray, p: float) -> np.ndarray:
    """Exact 1-D distances between column-aligned sorted samples.

    pa is (na, k) and pb is (nb, k), both sorted along axis 0; returns the
    k per-column distances. Shared by the scalar op and the sliced path.
    """
    widths, ia, ib = _quantile_grid(pa.shape[0], pb.shape[0])
    gaps = np.abs(pa[ia, :] - pb[ib, :])
    if p == 1:
        return widths @ gaps
    return (widths @ gaps**p) ** (1.0 / p)


def exact_1d_wasserstein(xs, ys, p: float = 2.0) -> float:
    """Exact p-Wasserstein distance between two 1-D empirical samples.

    Integrates |F_X^{-1}(u) - F_Y^{-1}(u)|^p over the merged breakpoint
    grid of the two empirical quantile functions, then takes the 1/p root.
    Sample counts may differ.

    Parameters
    ----------
    xs, ys : array_like
        Nonempty 1-D samples, finite values.
    p : float
        Distance order, >= 1.

    Returns
    -------
    float
        Nonnegative distance, symmetric in the arguments.
    """
    if not np.isfinite(p) or p < 1:
        raise InvalidInputError(f"distance order p must be >= 1, got {p}")
    xa = np.sort(_as_samples(xs, "xs"))
    xb = np.sort(_as_samples(ys, "ys"))
    return float(_w1d_columns(xa[:, None], xb[:, None], p)[0])


def sliced_wasserstein(a, b, cfg: DistanceConfig | None = None) -> float:
    """Sliced approximation of the p-Wasserstein distance between point sets.

    Draws ``cfg.n_projections`` unit directions (normalized Gaussian vectors)
    from a generator seeded with ``cfg.seed``, projects both sets onto each
    direction, and returns the arithmetic mean of the exact 1-D distances of
    the projections. Deterministic for fixed inputs and config.

    Parameters
    ----------
    a, b : array_like
        Point sets of shape (n, d) and (m, d); 1-D inputs are treated as
        single-dimension sets.
    cfg : DistanceConfig, optional
        Distance settings; defaults to ``DistanceConfig()``.

    Returns
    -------
    float
        Nonnegative approximate distance.
    """
    if cfg is None:
        cfg = DistanceConfig()
    pa = _as_points(a, "a")
    pb = _as_points(b, "b")
    if pa.shape[1] != pb.shape[1]:
        raise InvalidInputError(
            f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}"
        )
    dirs = _unit_directions(pa.shape[1], cfg.n_projections, cfg.seed)
    proj_a = np.sort(pa @ dirs, axis=0)
    proj_b = np.sort(pb @ dirs, axis=0)
    return float(_w1d_columns(proj_a, proj_b, cfg.p).mean())


def _unit_directions(d: int, k: int, seed: int) -> np.ndarray:
    """(d, k) matrix of unit-norm directions from a seeded generator."""
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((d, k))
    norms = np.linalg.norm(dirs, axis=0)
    # a zero-norm Gaussian draw has probability zero; guard anyway
    norms[norms == 0] = 1.0
    return dirs / norms


def exact_ot_distance(a, b, p: float = 2.0) -> float:
    """Exact p-Wasserstein distance by brute-force assignment search.

    Minimizes ((1/n) sum_i ||a_i - b_{pi(i)}||^p)^(1/p) over all
    permutations pi. Test oracle only: requires equal sizes n == m <= 10.

    Parameters
    ----------
    a, b : array_like
        Point sets of equal size n <= 10 and equal dimension.
    p : float
        Distance order, >= 1.

    Returns
    -------
    float
        The exact distance under the Euclidean ground metric.
    """
    if not np.isfinite(p) or p < 1:
        raise InvalidInputError(f"distance order p must be >= 1, got {p}")
    pa = _as_points(a, "a")
    pb = _as_points(b, "b")
    if pa.shape[1] != pb.shape[1]:
        raise InvalidInputError(
            f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}"
        )
    n = pa.shape[0]
    if pb.shape[0] != n:
        raise UnsupportedInstanceError(
            f"brute force needs equal sizes, got {n} and {pb.shape[0]}"
        )
    if n > 10:
        raise UnsupportedInstanceError(f"brute force limited to n <= 10, got {n}")
    cost = np.linalg.norm(pa[:, None, :] - pb[None, :, :], axis=2) ** p
    rows = np.arange(n)
    best = np.inf
    perms = itertools.permutations(range(n))
    while True:
        chunk = list(itertools.islice(perms, _PERM_CHUNK))
        if not chunk:
            break
        gathered = cost[rows[None, :], np.array(chunk)]
        best = min(best, float(gathered.mean(axis=1).min()))
    return best ** (1.0 / p)

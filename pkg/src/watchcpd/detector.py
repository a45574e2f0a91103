"""Streaming change point detection over mini-batches.

The detector keeps a buffer D of recent mini-batches as its model of the
current distribution. Once D holds at least kappa points, each incoming
batch B is compared to D with the sliced Wasserstein distance; the batch
triggers a change point when its distance exceeds the adaptive threshold
eta = epsilon * max over buffered batches B' of W(B', D). On a trigger the
buffer restarts from the offending batch, otherwise B is absorbed subject
to the capacity policy and eta is recomputed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateBufferError, InvalidInputError
from .wasserstein import (
    DistanceConfig,
    _unit_directions,
    _w1d_columns,
    sliced_wasserstein,
)

__all__ = [
    "WatchConfig",
    "DistributionBuffer",
    "ChangePoint",
    "DetectorState",
    "new_detector",
    "compute_threshold",
    "step",
    "process_series",
]

EVICTION_POLICIES = ("stop_adding", "fifo")


@dataclass(frozen=True)
class WatchConfig:
    """Detector parameters.

    Parameters
    ----------
    kappa : int
        Minimum number of buffered points before detection activates.
    mu : int
        Maximum number of points kept in the buffer.
    epsilon : float
        Threshold ratio; eta = epsilon * max in-buffer batch distance.
    omega : int
        Mini-batch size.
    distance : DistanceConfig
        Settings for the sliced distance.
    eviction : str
        "stop_adding" freezes the buffer at capacity (absorbing nothing
        further); "fifo" drops the oldest batches to make room.
    """

    kappa: int = 60
    mu: int = 600
    epsilon: float = 1.5
    omega: int = 20
    distance: DistanceConfig = DistanceConfig()
    eviction: str = "stop_adding"

    def __post_init__(self) -> None:
        if int(self.omega) < 1:
            raise ConfigError(f"omega must be >= 1, got {self.omega}")
        if int(self.kappa) < 2 * int(self.omega):
            # a single-batch buffer would make eta = 0 and flag everything
            raise ConfigError(
                f"kappa must be >= 2 * omega ({2 * int(self.omega)}), got {self.kappa}"
            )
        if int(self.mu) < int(self.kappa):
            raise ConfigError(f"mu must be >= kappa, got mu={self.mu} kappa={self.kappa}")
        fill = -(-int(self.kappa) // int(self.omega)) * int(self.omega)
        if int(self.mu) < fill:
            # activation needs ceil(kappa/omega) whole batches in the buffer
            raise ConfigError(
                f"mu={self.mu} cannot hold the {fill} points needed to activate"
            )
        if not np.isfinite(self.epsilon) or self.epsilon <= 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.eviction not in EVICTION_POLICIES:
            raise ConfigError(
                f"eviction must be one of {EVICTION_POLICIES}, got {self.eviction!r}"
            )


class DistributionBuffer:
    """Ordered sequence of equally sized mini-batches forming D."""

    def __init__(self) -> None:
        self._batches: list[np.ndarray] = []
        self.total_points = 0

    def __len__(self) -> int:
        return len(self._batches)

    @property
    def batches(self) -> tuple:
        return tuple(self._batches)

    @property
    def dim(self) -> int | None:
        return self._batches[0].shape[1] if self._batches else None

    def append(self, batch: np.ndarray) -> None:
        self._batches.append(batch)
        self.total_points += batch.shape[0]

    def pop_oldest(self) -> None:
        gone = self._batches.pop(0)
        self.total_points -= gone.shape[0]

    def reset_to(self, batch: np.ndarray) -> None:
        self._batches = [batch]
        self.total_points = batch.shape[0]

    def all_points(self) -> np.ndarray:
        return np.concatenate(self._batches, axis=0)


@dataclass(frozen=True)
class ChangePoint:
    """A detected distribution change.

    index is batch_ordinal * omega: one past the last sample of the
    triggering mini-batch, in input order.
    """

    index: int
    batch_ordinal: int
    distance: float
    threshold: float

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "batch": self.batch_ordinal,
            "distance": self.distance,
            "threshold": self.threshold,
        }


@dataclass
class DetectorState:
    """Mutable detector state: buffer, current threshold, emitted points."""

    config: WatchConfig
    buffer: DistributionBuffer = field(default_factory=DistributionBuffer)
    eta: float | None = None
    emitted: list = field(default_factory=list)
    samples_seen: int = 0


def new_detector(cfg: WatchConfig) -> DetectorState:
    """Fresh detector state with an empty buffer and no threshold."""
    if not isinstance(cfg, WatchConfig):
        raise ConfigError("cfg must be a WatchConfig")
    return DetectorState(config=cfg)


def compute_threshold(
    buffer: DistributionBuffer, epsilon: float, dcfg: DistanceConfig
) -> float:
    """eta = epsilon * max over buffered batches B of W(B, D).

    D is the union of all buffered points, the batch's own points
    included. The projection pass over D is shared across batches, which
    matches per-batch sliced_wasserstein calls up to float roundoff.
    """
    if len(buffer) < 2:
        raise DegenerateBufferError(
            "threshold needs at least two buffered batches (it would be 0)"
        )
    points = buffer.all_points()
    dirs = _unit_directions(points.shape[1], dcfg.n_projections, dcfg.seed)
    proj = points @ dirs
    proj_all = np.sort(proj, axis=0)
    best = 0.0
    offset = 0
    for batch in buffer.batches:
        rows = batch.shape[0]
        proj_batch = np.sort(proj[offset : offset + rows], axis=0)
        dist = float(_w1d_columns(proj_batch, proj_all, dcfg.p).mean())
        if dist > best:
            best = dist
        offset += rows
    return epsilon * best


def _validate_batch(batch, state: DetectorState) -> np.ndarray:
    arr = np.asarray(batch, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    omega = state.config.omega
    if arr.ndim != 2 or arr.shape[0] != omega:
        raise InvalidInputError(f"batch must have exactly omega={omega} rows")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("batch contains non-finite values")
    dim = state.buffer.dim
    if dim is not None and arr.shape[1] != dim:
        raise InvalidInputError(
            f"dimension mismatch: batch has {arr.shape[1]}, buffer has {dim}"
        )
    return arr


def step(state: DetectorState, batch) -> DetectorState:
    """Feed one mini-batch of omega samples; may append one ChangePoint.

    While the buffer holds fewer than kappa points the batch is absorbed
    unconditionally (fill phase). Afterwards the batch is tested against
    eta before any buffer update.
    """
    cfg = state.config
    arr = _validate_batch(batch, state)
    state.samples_seen += cfg.omega
    ordinal = state.samples_seen // cfg.omega
    buf = state.buffer

    if buf.total_points < cfg.kappa:
        buf.append(arr)
        if buf.total_points >= cfg.kappa:
            state.eta = compute_threshold(buf, cfg.epsilon, cfg.distance)
        return state

    upsilon = sliced_wasserstein(arr, buf.all_points(), cfg.distance)
    if upsilon > state.eta:
        state.emitted.append(
            ChangePoint(
                index=ordinal * cfg.omega,
                batch_ordinal=ordinal,
                distance=upsilon,
                threshold=state.eta,
            )
        )
        buf.reset_to(arr)
        state.eta = None
        return state

    if cfg.eviction == "stop_adding":
        if buf.total_points + cfg.omega <= cfg.mu:
            buf.append(arr)
            state.eta = compute_threshold(buf, cfg.epsilon, cfg.distance)
    else:  # fifo
        buf.append(arr)
        while buf.total_points > cfg.mu:
            buf.pop_oldest()
        state.eta = compute_threshold(buf, cfg.epsilon, cfg.distance)
    return state


def process_series(series, cfg: WatchConfig) -> list:
    """Run the detector over a whole series.

    The series is split into floor(T / omega) consecutive non-overlapping
    batches of omega samples (a trailing remainder is dropped) and folded
    through step. Returns the accumulated change points, whose indices are
    1-based batch ordinals times omega.
    """
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise InvalidInputError("series must be a nonempty (T, d) array")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("series contains non-finite values")
    state = new_detector(cfg)
    n_batches = arr.shape[0] // cfg.omega
    for i in range(n_batches):
        step(state, arr[i * cfg.omega : (i + 1) * cfg.omega])
    return list(state.emitted)

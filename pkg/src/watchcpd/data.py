"""Dataset ingestion, validation, normalization, and synthetic generators.

Datasets are stored as JSON objects
``{"name": str, "n_obs": int, "n_dim": int, "series": [[f64; n_dim]; n_obs]}``
with ground truth in a sidecar file
``{"dataset": str, "n_obs": int, "annotations": {"<id>": [int, ...]}}``.
CSV input is numeric with one time step per row, columns as dimensions.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .metrics import AnnotationSet

__all__ = [
    "TimeSeriesDataset",
    "SynthSpec",
    "load_dataset_json",
    "load_dataset_csv",
    "load_annotations_json",
    "load_dataset",
    "save_dataset_json",
    "save_annotations_json",
    "minmax_normalize",
    "synth_mean_shift",
    "synth_cluster_sequence",
]


@dataclass
class TimeSeriesDataset:
    """A named (T, d) real-valued series in time order with optional truth."""

    name: str
    values: np.ndarray
    truth: AnnotationSet | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidInputError("values must form a nonempty (T, d) matrix")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("values contain non-finite entries")
        self.values = arr
        if self.truth is not None and self.truth.series_length != arr.shape[0]:
            raise InvalidInputError(
                f"annotations are for length {self.truth.series_length}, "
                f"series has {arr.shape[0]}"
            )

    @property
    def n_obs(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_dim(self) -> int:
        return int(self.values.shape[1])


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the synthetic generators."""

    T: int
    d: int
    change_indices: tuple = ()
    shift_magnitude: float = 5.0
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.T) < 1 or int(self.d) < 1:
            raise InvalidInputError("T and d must be positive")
        cps = tuple(int(c) for c in self.change_indices)
        if any(b <= a for a, b in zip(cps, cps[1:])):
            raise InvalidInputError("change indices must be strictly increasing")
        if cps and (cps[0] <= 0 or cps[-1] >= self.T):
            raise InvalidInputError(f"change indices must lie in (0, {self.T})")
        object.__setattr__(self, "change_indices", cps)
        if not math.isfinite(self.shift_magnitude):
            raise InvalidInputError("shift_magnitude must be finite")
        if not math.isfinite(self.noise_sd) or self.noise_sd < 0:
            raise InvalidInputError("noise_sd must be >= 0")
        if int(self.seed) < 0:
            raise InvalidInputError("seed must be nonnegative")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidInputError(msg)


def load_dataset_json(path, forward_fill: bool = False) -> TimeSeriesDataset:
    """Load a dataset file in the JSON schema.

    Missing values (null or NaN entries) are rejected unless forward_fill
    is set, in which case each one is replaced by the previous time step's
    value for that dimension; a missing value in the first row is an error.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: malformed JSON ({exc})") from exc
    _require(isinstance(raw, dict), f"{path}: top level must be an object")
    for key in ("name", "n_obs", "n_dim", "series"):
        _require(key in raw, f"{path}: missing key {key!r}")
    name = raw["name"]
    _require(isinstance(name, str) and name != "", f"{path}: name must be a string")
    n_obs, n_dim = raw["n_obs"], raw["n_dim"]
    _require(
        isinstance(n_obs, int) and isinstance(n_dim, int) and n_obs >= 1 and n_dim >= 1,
        f"{path}: n_obs and n_dim must be positive integers",
    )
    series = raw["series"]
    _require(isinstance(series, list), f"{path}: series must be a list of rows")
    _require(
        len(series) == n_obs, f"{path}: n_obs={n_obs} but series has {len(series)} rows"
    )
    values = np.empty((n_obs, n_dim), dtype=np.float64)
    for i, row in enumerate(series):
        _require(
            isinstance(row, list) and len(row) == n_dim,
            f"{path}: row {i} has {len(row) if isinstance(row, list) else 'no'} "
            f"entries, expected {n_dim}",
        )
        for j, cell in enumerate(row):
            if cell is None:
                values[i, j] = np.nan
                continue
            _require(
                isinstance(cell, (int, float)) and not isinstance(cell, bool),
                f"{path}: row {i}, column {j}: not a number",
            )
            values[i, j] = float(cell)
    missing = ~np.isfinite(values)
    if missing.any():
        if not forward_fill:
            i, j = np.argwhere(missing)[0]
            raise InvalidInputError(
                f"{path}: missing value at row {i}, column {j} "
                "(pass forward_fill to repair)"
            )
        _require(
            not missing[0].any(), f"{path}: missing value in the first row"
        )
        for j in np.where(missing.any(axis=0))[0]:
            col = values[:, j]
            for i in np.where(missing[:, j])[0]:
                col[i] = col[i - 1]
    return TimeSeriesDataset(name=name, values=values)


def load_dataset_csv(path, has_header: bool = False) -> TimeSeriesDataset:
    """Load a numeric CSV: rows are time steps, columns are dimensions."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if has_header and rows:
        rows = rows[1:]
    rows = [r for r in rows if r]
    _require(bool(rows), f"{path}: no data rows")
    width = len(rows[0])
    offset = 2 if has_header else 1  # 1-based file line numbers in messages
    values = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        _require(
            len(row) == width,
            f"{path}: line {i + offset} has {len(row)} fields, expected {width}",
        )
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise InvalidInputError(
                    f"{path}: line {i + offset}, column {j + 1}: "
                    f"non-numeric value {cell!r}"
                ) from None
    if not np.all(np.isfinite(values)):
        i, j = np.argwhere(~np.isfinite(values))[0]
        raise InvalidInputError(
            f"{path}: line {int(i) + offset}, column {int(j) + 1}: non-finite value"
        )
    return TimeSeriesDataset(name=path.stem, values=values)


def load_annotations_json(path) -> AnnotationSet:
    """Load an annotation sidecar file into an AnnotationSet."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: malformed JSON ({exc})") from exc
    _require(isinstance(raw, dict), f"{path}: top level must be an object")
    for key in ("dataset", "n_obs", "annotations"):
        _require(key in raw, f"{path}: missing key {key!r}")
    n_obs = raw["n_obs"]
    _require(
        isinstance(n_obs, int) and n_obs >= 1, f"{path}: n_obs must be a positive integer"
    )
    ann = raw["annotations"]
    _require(isinstance(ann, dict) and ann, f"{path}: annotations must be a nonempty map")
    for key, cps in ann.items():
        _require(
            isinstance(cps, list) and all(isinstance(c, int) for c in cps),
            f"{path}: annotator {key!r} must map to a list of integers",
        )
    try:
        return AnnotationSet(ann, n_obs)
    except InvalidInputError as exc:
        raise InvalidInputError(f"{path}: {exc}") from exc


def annotations_path_for(dataset_path) -> Path:
    """Sidecar path convention: <stem>.annotations.json next to the dataset."""
    p = Path(dataset_path)
    return p.with_name(p.stem + ".annotations.json")


def load_dataset(path, forward_fill: bool = False) -> TimeSeriesDataset:
    """Load a dataset by extension (.json or .csv), attaching sidecar truth.

    If ``<stem>.annotations.json`` exists next to the file, it is loaded
    and validated against the series length.
    """
    path = Path(path)
    if not path.exists():
        raise InvalidInputError(f"{path}: no such file")
    if path.suffix == ".csv":
        ds = load_dataset_csv(path)
    elif path.suffix == ".json":
        ds = load_dataset_json(path, forward_fill=forward_fill)
    else:
        raise InvalidInputError(f"{path}: unsupported extension {path.suffix!r}")
    sidecar = annotations_path_for(path)
    if sidecar.exists():
        truth = load_annotations_json(sidecar)
        if truth.series_length != ds.n_obs:
            raise InvalidInputError(
                f"{sidecar}: n_obs={truth.series_length} does not match "
                f"dataset n_obs={ds.n_obs}"
            )
        ds.truth = truth
    return ds


def save_dataset_json(ds: TimeSeriesDataset, path) -> None:
    """Write the dataset in the JSON schema (stable key order)."""
    payload = {
        "name": ds.name,
        "n_obs": ds.n_obs,
        "n_dim": ds.n_dim,
        "series": [[float(v) for v in row] for row in ds.values],
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def save_annotations_json(truth: AnnotationSet, dataset_name: str, path) -> None:
    """Write an annotation sidecar file (stable key order)."""
    payload = {
        "dataset": dataset_name,
        "n_obs": truth.series_length,
        "annotations": {k: list(v) for k, v in sorted(truth.annotators.items())},
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def minmax_normalize(ds: TimeSeriesDataset, fit_prefix: int) -> TimeSeriesDataset:
    """Affinely map each dimension so the first fit_prefix samples span [0, 1].

    Dimensions constant over the prefix map to all zeros. Values outside
    the prefix may leave [0, 1]; the map is fit on the prefix only.
    """
    fit_prefix = int(fit_prefix)
    if fit_prefix < 2:
        raise InvalidInputError("fit_prefix must be >= 2")
    if fit_prefix > ds.n_obs:
        raise InvalidInputError(
            f"fit_prefix={fit_prefix} exceeds series length {ds.n_obs}"
        )
    prefix = ds.values[:fit_prefix]
    lo = prefix.min(axis=0)
    span = prefix.max(axis=0) - lo
    scaled = np.where(span > 0, (ds.values - lo) / np.where(span > 0, span, 1.0), 0.0)
    return TimeSeriesDataset(name=ds.name, values=scaled, truth=ds.truth)


def synth_mean_shift(spec: SynthSpec, name: str | None = None) -> TimeSeriesDataset:
    """Gaussian series whose mean jumps at each change index.

    Segment k (0-based) has mean k * shift_magnitude on every dimension,
    with i.i.d. noise of sd noise_sd. Ground truth is the change indices
    under a single synthetic annotator. Bit-stable in the seed.
    """
    edges = [0, *spec.change_indices, spec.T]
    level = np.empty(spec.T, dtype=np.float64)
    for k, (a, b) in enumerate(zip(edges, edges[1:])):
        level[a:b] = k * spec.shift_magnitude
    rng = np.random.default_rng(spec.seed)
    values = rng.standard_normal((spec.T, spec.d)) * spec.noise_sd + level[:, None]
    if name is None:
        name = f"shift_T{spec.T}_d{spec.d}_seed{spec.seed}"
    truth = AnnotationSet({"synthetic": spec.change_indices}, spec.T)
    return TimeSeriesDataset(name=name, values=values, truth=truth)


def synth_cluster_sequence(
    spec: SynthSpec, centers, segment_lengths, name: str | None = None
) -> TimeSeriesDataset:
    """Noisy draws around a sequence of cluster centers.

    Segment j draws segment_lengths[j] samples around centers[j] with sd
    noise_sd. Ground truth sits at the cumulative boundaries. spec.T and
    spec.change_indices, when set, must agree with the segment lengths.
    """
    ctr = np.asarray(centers, dtype=np.float64)
    if ctr.ndim == 1:
        ctr = ctr[:, None]
    lengths = [int(n) for n in segment_lengths]
    if ctr.ndim != 2 or ctr.shape[0] != len(lengths):
        raise InvalidInputError(
            f"got {ctr.shape[0]} centers for {len(lengths)} segment lengths"
        )
    if ctr.shape[1] != spec.d:
        raise InvalidInputError(
            f"centers have dimension {ctr.shape[1]}, spec.d is {spec.d}"
        )
    if any(n < 1 for n in lengths):
        raise InvalidInputError("segment lengths must be positive")
    if not np.all(np.isfinite(ctr)):
        raise InvalidInputError("centers contain non-finite values")
    total = sum(lengths)
    if spec.T != total:
        raise InvalidInputError(f"spec.T={spec.T} but segment lengths sum to {total}")
    bounds = tuple(np.cumsum(lengths)[:-1].tolist())
    if spec.change_indices and spec.change_indices != bounds:
        raise InvalidInputError(
            "spec.change_indices disagree with the segment boundaries"
        )
    rng = np.random.default_rng(spec.seed)
    values = rng.standard_normal((total, spec.d)) * spec.noise_sd + np.repeat(
        ctr, lengths, axis=0
    )
    if name is None:
        name = f"clusters_T{total}_d{spec.d}_seed{spec.seed}"
    truth = AnnotationSet({"synthetic": bounds}, total)
    return TimeSeriesDataset(name=name, values=values, truth=truth)

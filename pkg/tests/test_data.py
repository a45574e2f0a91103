import json

import numpy as np
import pytest

from watchcpd.data import (
    SynthSpec,
    TimeSeriesDataset,
    annotations_path_for,
    load_annotations_json,
    load_dataset,
    load_dataset_csv,
    load_dataset_json,
    minmax_normalize,
    save_annotations_json,
    save_dataset_json,
    synth_cluster_sequence,
    synth_mean_shift,
)
from watchcpd.detector import WatchConfig, process_series
from watchcpd.errors import InvalidInputError
from watchcpd.metrics import AnnotationSet
from watchcpd.wasserstein import DistanceConfig


def _write(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")


def _valid_payload():
    return {
        "name": "tiny",
        "n_obs": 3,
        "n_dim": 1,
        "series": [[0.0], [1.0], [2.0]],
    }


def test_load_minimal_json(tmp_path):
    p = tmp_path / "tiny.json"
    _write(p, _valid_payload())
    ds = load_dataset_json(p)
    assert ds.n_obs == 3
    assert ds.n_dim == 1
    assert ds.name == "tiny"


def test_load_json_rejects_malformed(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json", encoding="utf-8")
    with pytest.raises(InvalidInputError):
        load_dataset_json(p)


def test_load_json_rejects_missing_key(tmp_path):
    payload = _valid_payload()
    del payload["n_dim"]
    p = tmp_path / "bad.json"
    _write(p, payload)
    with pytest.raises(InvalidInputError):
        load_dataset_json(p)


def test_load_json_rejects_row_width_mismatch(tmp_path):
    payload = _valid_payload()
    payload["series"][1] = [1.0, 2.0]
    p = tmp_path / "bad.json"
    _write(p, payload)
    with pytest.raises(InvalidInputError, match="row 1"):
        load_dataset_json(p)


def test_load_json_rejects_n_obs_mismatch(tmp_path):
    payload = _valid_payload()
    payload["n_obs"] = 5
    p = tmp_path / "bad.json"
    _write(p, payload)
    with pytest.raises(InvalidInputError):
        load_dataset_json(p)


def test_load_json_rejects_non_numeric_cell(tmp_path):
    payload = _valid_payload()
    payload["series"][2] = ["x"]
    p = tmp_path / "bad.json"
    _write(p, payload)
    with pytest.raises(InvalidInputError, match="row 2, column 0"):
        load_dataset_json(p)


def test_load_json_missing_values(tmp_path):
    payload = _valid_payload()
    payload["series"][1] = [None]
    p = tmp_path / "gap.json"
    _write(p, payload)
    with pytest.raises(InvalidInputError, match="row 1, column 0"):
        load_dataset_json(p)
    ds = load_dataset_json(p, forward_fill=True)
    assert ds.values[1, 0] == ds.values[0, 0]


def test_load_json_rejects_missing_first_row(tmp_path):
    payload = _valid_payload()
    payload["series"][0] = [None]
    p = tmp_path / "gap.json"
    _write(p, payload)
    with pytest.raises(InvalidInputError):
        load_dataset_json(p, forward_fill=True)


def test_dataset_json_round_trip(tmp_path):
    ds = synth_mean_shift(SynthSpec(T=20, d=2, change_indices=(10,), seed=3))
    p = tmp_path / "rt.json"
    save_dataset_json(ds, p)
    back = load_dataset_json(p)
    assert back.name == ds.name
    assert np.array_equal(back.values, ds.values)
    # saving again reproduces the same bytes
    q = tmp_path / "rt2.json"
    save_dataset_json(back, q)
    assert p.read_bytes() == q.read_bytes()


def test_load_csv_two_by_two(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1.5,2\n3,4\n", encoding="utf-8")
    ds = load_dataset_csv(p)
    assert ds.n_obs == 2
    assert ds.n_dim == 2
    assert ds.values[0, 0] == 1.5
    assert ds.name == "m"


def test_load_csv_header_flag(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("a,b\n1,2\n3,4\n", encoding="utf-8")
    ds = load_dataset_csv(p, has_header=True)
    assert ds.n_obs == 2
    with pytest.raises(InvalidInputError):
        load_dataset_csv(p)  # header row is non-numeric without the flag


def test_load_csv_reports_cell_location(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,oops\n", encoding="utf-8")
    with pytest.raises(InvalidInputError, match="line 2, column 2"):
        load_dataset_csv(p)


def test_load_csv_rejects_ragged_rows(tmp_path):
    p = tmp_path / "ragged.csv"
    p.write_text("1,2\n3\n", encoding="utf-8")
    with pytest.raises(InvalidInputError, match="line 2"):
        load_dataset_csv(p)


def test_load_dataset_dispatch_and_sidecar(tmp_path):
    ds = synth_mean_shift(SynthSpec(T=30, d=1, change_indices=(15,), seed=4))
    p = tmp_path / "withtruth.json"
    save_dataset_json(ds, p)
    save_annotations_json(ds.truth, ds.name, annotations_path_for(p))
    back = load_dataset(p)
    assert back.truth is not None
    assert back.truth.annotators["synthetic"] == (15,)


def test_load_dataset_rejects_sidecar_length_mismatch(tmp_path):
    ds = synth_mean_shift(SynthSpec(T=30, d=1, seed=4))
    p = tmp_path / "bad.json"
    save_dataset_json(ds, p)
    save_annotations_json(
        AnnotationSet.single([5], 29), ds.name, annotations_path_for(p)
    )
    with pytest.raises(InvalidInputError, match="does not match"):
        load_dataset(p)


def test_load_dataset_missing_file(tmp_path):
    with pytest.raises(InvalidInputError, match="no such file"):
        load_dataset(tmp_path / "absent.json")


def test_annotations_round_trip(tmp_path):
    truth = AnnotationSet({"a": (3, 9), "b": ()}, 20)
    p = tmp_path / "x.annotations.json"
    save_annotations_json(truth, "x", p)
    back = load_annotations_json(p)
    assert back.annotators == {"a": (3, 9), "b": ()}
    assert back.series_length == 20


def test_minmax_normalize_identity_on_unit_prefix():
    vals = np.array([[0.0], [0.5], [1.0], [2.0]])
    ds = TimeSeriesDataset("u", vals)
    out = minmax_normalize(ds, 3)
    assert np.allclose(out.values[:3], vals[:3], atol=1e-12)
    assert out.values[3, 0] == pytest.approx(2.0)


def test_minmax_normalize_constant_dimension_is_zero():
    vals = np.column_stack([np.full(5, 7.0), np.arange(5.0)])
    out = minmax_normalize(TimeSeriesDataset("c", vals), 5)
    assert np.all(out.values[:, 0] == 0.0)
    assert out.values[:, 1].max() == 1.0


def test_minmax_normalize_affine_map():
    vals = np.array([[2.0], [4.0], [3.0]])
    out = minmax_normalize(TimeSeriesDataset("a", vals), 2)
    assert out.values[2, 0] == pytest.approx(0.5)


def test_minmax_normalize_validates_prefix():
    ds = TimeSeriesDataset("v", np.zeros((4, 1)))
    with pytest.raises(InvalidInputError):
        minmax_normalize(ds, 1)
    with pytest.raises(InvalidInputError):
        minmax_normalize(ds, 5)


def test_synth_mean_shift_statistics():
    spec = SynthSpec(
        T=100, d=3, change_indices=(50,), shift_magnitude=5, noise_sd=1, seed=7
    )
    ds = synth_mean_shift(spec)
    assert ds.values.shape == (100, 3)
    diff = ds.values[50:].mean(axis=0) - ds.values[:50].mean(axis=0)
    assert np.all(np.abs(diff - 5) < 0.5)
    assert ds.truth.annotators["synthetic"] == (50,)


def test_synth_mean_shift_bit_stable():
    spec = SynthSpec(T=64, d=2, change_indices=(32,), seed=9)
    a = synth_mean_shift(spec)
    b = synth_mean_shift(spec)
    assert np.array_equal(a.values, b.values)


def test_synth_zero_shift_is_single_distribution():
    spec = SynthSpec(T=400, d=5, change_indices=(200,), shift_magnitude=0, seed=1)
    ds = synth_mean_shift(spec)
    cfg = WatchConfig(
        kappa=60,
        mu=200,
        epsilon=2.0,
        omega=20,
        distance=DistanceConfig(p=2, n_projections=128, seed=42),
    )
    assert process_series(ds.values, cfg) == []


def test_synth_cluster_sequence_boundaries():
    ds = synth_cluster_sequence(
        SynthSpec(T=41, d=2, noise_sd=0.1, seed=6), np.zeros((2, 2)), [6, 35]
    )
    assert ds.n_obs == 41
    assert ds.truth.annotators["synthetic"] == (6,)


def test_synth_cluster_sequence_single_segment_empty_truth():
    ds = synth_cluster_sequence(
        SynthSpec(T=12, d=1, seed=6), np.zeros((1, 1)), [12]
    )
    assert ds.truth.annotators["synthetic"] == ()


def test_synth_cluster_sequence_validation():
    spec = SynthSpec(T=10, d=2, seed=0)
    with pytest.raises(InvalidInputError):
        synth_cluster_sequence(spec, np.zeros((2, 2)), [10])  # count mismatch
    with pytest.raises(InvalidInputError):
        synth_cluster_sequence(spec, np.zeros((2, 3)), [5, 5])  # dim mismatch
    with pytest.raises(InvalidInputError):
        synth_cluster_sequence(spec, np.zeros((2, 2)), [5, 6])  # sums to 11, not 10
    with pytest.raises(InvalidInputError):
        synth_cluster_sequence(spec, np.zeros((2, 2)), [10, 0])


def test_synth_cluster_sequence_high_dim_recovery():
    # five well-separated clusters in 784 dimensions; the detector should
    # flag every boundary within one batch
    rng = np.random.default_rng(5)
    centers = rng.uniform(0, 1, (5, 784))
    lengths = [60, 80, 70, 90, 100]
    ds = synth_cluster_sequence(
        SynthSpec(T=sum(lengths), d=784, noise_sd=0.1, seed=11), centers, lengths
    )
    cfg = WatchConfig(
        kappa=60,
        mu=200,
        epsilon=2.0,
        omega=20,
        distance=DistanceConfig(p=2, n_projections=128, seed=42),
    )
    detected = [c.index for c in process_series(ds.values, cfg)]
    bounds = ds.truth.annotators["synthetic"]
    hits = sum(1 for b in bounds if any(abs(c - b) <= 20 for c in detected))
    assert hits == len(bounds) == 4


def test_synth_spec_validation():
    with pytest.raises(InvalidInputError):
        SynthSpec(T=0, d=1)
    with pytest.raises(InvalidInputError):
        SynthSpec(T=10, d=1, change_indices=(5, 5))
    with pytest.raises(InvalidInputError):
        SynthSpec(T=10, d=1, change_indices=(10,))
    with pytest.raises(InvalidInputError):
        SynthSpec(T=10, d=1, noise_sd=-1)


def test_dataset_rejects_non_finite_values():
    with pytest.raises(InvalidInputError):
        TimeSeriesDataset("bad", np.array([[1.0], [np.nan]]))

"""Command-line interface: detect, eval, synth, and bench subcommands.

Exit codes: 0 success, 1 input error, 2 configuration error, 3 timeout.
All outputs are UTF-8 JSON/CSV with stable key order, so reruns with the
same flags reproduce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
from pathlib import Path

from .bench import bench_directory, load_grid
from .data import (
    annotations_path_for,
    load_annotations_json,
    load_dataset,
    minmax_normalize,
    save_annotations_json,
    save_dataset_json,
    synth_mean_shift,
    SynthSpec,
)
from .detector import WatchConfig, process_series
from .errors import ConfigError, InvalidInputError, WatchError
from .metrics import covering, f1, partition_from_changepoints, precision_recall
from .wasserstein import DistanceConfig

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2
EXIT_TIMEOUT = 3


def _add_detector_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--omega", type=int, default=20, help="mini-batch size")
    parser.add_argument(
        "--kappa",
        type=int,
        default=None,
        help="min buffered points before detection (default 3*omega)",
    )
    parser.add_argument(
        "--mu",
        type=int,
        default=None,
        help="max buffered points (default 30*omega)",
    )
    parser.add_argument("--epsilon", type=float, default=1.5, help="threshold ratio")
    parser.add_argument("--p", type=float, default=2.0, help="distance order")
    parser.add_argument(
        "--slices", type=int, default=128, help="random projections per distance"
    )
    parser.add_argument("--seed", type=int, default=42, help="projection seed")
    parser.add_argument(
        "--eviction",
        choices=("stop_adding", "fifo"),
        default="stop_adding",
        help="buffer policy at capacity",
    )
    parser.add_argument(
        "--normalize",
        action="store_true",
        help="min-max rescale each dimension, fit on the first kappa samples",
    )


def _config_from_args(args) -> WatchConfig:
    omega = args.omega
    kappa = args.kappa if args.kappa is not None else 3 * omega
    mu = args.mu if args.mu is not None else 30 * omega
    return WatchConfig(
        kappa=kappa,
        mu=mu,
        epsilon=args.epsilon,
        omega=omega,
        distance=DistanceConfig(p=args.p, n_projections=args.slices, seed=args.seed),
        eviction=args.eviction,
    )


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def cmd_detect(args) -> int:
    """Run the detector over one dataset file and write the result JSON."""
    cfg = _config_from_args(args)
    ds = load_dataset(args.input, forward_fill=args.forward_fill)
    values = ds.values
    if args.normalize:
        values = minmax_normalize(ds, cfg.kappa).values

    if args.timeout is not None:
        if args.timeout <= 0:
            raise ConfigError("--timeout must be positive")
        box: list = []

        def work() -> None:
            try:
                box.append(("ok", process_series(values, cfg)))
            except BaseException as exc:  # surfaced in the main thread
                box.append(("err", exc))

        worker = threading.Thread(target=work, daemon=True)
        worker.start()
        worker.join(args.timeout)
        if worker.is_alive():
            print(f"detection exceeded {args.timeout} s", file=sys.stderr)
            return EXIT_TIMEOUT
        kind, payload = box[0]
        if kind == "err":
            raise payload
        cps = payload
    else:
        cps = process_series(values, cfg)

    _emit(
        {
            "dataset": ds.name,
            "n_obs": ds.n_obs,
            "config": {
                "omega": cfg.omega,
                "kappa": cfg.kappa,
                "mu": cfg.mu,
                "epsilon": cfg.epsilon,
                "p": cfg.distance.p,
                "slices": cfg.distance.n_projections,
                "seed": cfg.distance.seed,
                "eviction": cfg.eviction,
                "normalize": bool(args.normalize),
            },
            "changepoints": [c.to_dict() for c in cps],
        },
        args.output,
    )
    return EXIT_OK


def _read_predictions(path: str):
    """Accept a detect output file or a bare JSON list of indices."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: malformed JSON ({exc})") from exc
    n_obs = None
    if isinstance(raw, dict):
        if "changepoints" not in raw:
            raise InvalidInputError(f"{path}: missing 'changepoints'")
        items = raw["changepoints"]
        n_obs = raw.get("n_obs")
    elif isinstance(raw, list):
        items = raw
    else:
        raise InvalidInputError(f"{path}: expected an object or a list")
    cps = []
    for item in items:
        if isinstance(item, dict):
            if "index" not in item:
                raise InvalidInputError(f"{path}: change point entry lacks 'index'")
            cps.append(int(item["index"]))
        elif isinstance(item, (int, float)) and not isinstance(item, bool):
            cps.append(int(item))
        else:
            raise InvalidInputError(f"{path}: change point entries must be numbers")
    return sorted(set(cps)), n_obs


def cmd_eval(args) -> int:
    """Score a prediction file against an annotation file."""
    if args.margin < 0:
        raise ConfigError("--margin must be >= 0")
    cps, pred_n_obs = _read_predictions(args.pred)
    truth = load_annotations_json(args.truth)
    if pred_n_obs is not None and pred_n_obs != truth.series_length:
        raise InvalidInputError(
            f"prediction n_obs={pred_n_obs} does not match truth "
            f"n_obs={truth.series_length}"
        )
    T = truth.series_length
    cps = sorted({min(c, T - 1) for c in cps})
    precision, recall = precision_recall(cps, truth, args.margin)
    cover = covering(
        partition_from_changepoints([c for c in cps if c > 0], T), truth
    )
    _emit(
        {
            "f1": f1(precision, recall),
            "cover": cover,
            "precision": precision,
            "recall": recall,
        },
        args.out,
    )
    return EXIT_OK


def cmd_synth(args) -> int:
    """Generate a seeded mean-shift dataset plus its annotation sidecar."""
    cps = tuple(int(c) for c in args.cps.split(",") if c != "") if args.cps else ()
    spec = SynthSpec(
        T=args.T,
        d=args.d,
        change_indices=cps,
        shift_magnitude=args.shift,
        noise_sd=args.sd,
        seed=args.seed,
    )
    ds = synth_mean_shift(spec, name=args.name)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / f"{ds.name}.json"
    save_dataset_json(ds, data_path)
    save_annotations_json(ds.truth, ds.name, annotations_path_for(data_path))
    print(data_path)
    print(annotations_path_for(data_path))
    return EXIT_OK


def cmd_bench(args) -> int:
    """Benchmark every dataset in a directory and write result files."""
    grid = load_grid(args.grid) if args.grid is not None else None
    default_config = _config_from_args(args)
    bench_directory(
        args.datasets,
        args.out,
        mode=args.mode,
        grid=grid,
        default_config=default_config,
        margin=args.margin,
        timeout=args.timeout,
        normalize=args.normalize,
        threads=args.threads,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="watchcpd",
        description="Change point detection over mini-batches with "
        "sliced Wasserstein distances, plus evaluation and benchmarking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="detect change points in a series")
    p_detect.add_argument("--input", required=True, help="dataset file (.json or .csv)")
    p_detect.add_argument("--output", default=None, help="result path (default stdout)")
    p_detect.add_argument(
        "--timeout", type=float, default=None, help="abort after this many seconds"
    )
    p_detect.add_argument(
        "--forward-fill",
        action="store_true",
        help="repair missing values from the previous time step",
    )
    _add_detector_flags(p_detect)
    p_detect.set_defaults(func=cmd_detect)

    p_eval = sub.add_parser("eval", help="score predictions against annotations")
    p_eval.add_argument("--pred", required=True, help="prediction JSON file")
    p_eval.add_argument("--truth", required=True, help="annotation JSON file")
    p_eval.add_argument("--margin", type=int, default=5, help="matching tolerance")
    p_eval.add_argument("--out", default=None, help="metric path (default stdout)")
    p_eval.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--T", type=int, required=True, help="series length")
    p_synth.add_argument("--d", type=int, required=True, help="dimensions")
    p_synth.add_argument(
        "--cps", default="", help="comma-separated change indices, e.g. 200,300"
    )
    p_synth.add_argument("--shift", type=float, default=5.0, help="mean step per segment")
    p_synth.add_argument("--sd", type=float, default=1.0, help="noise std deviation")
    p_synth.add_argument("--seed", type=int, default=0, help="generator seed")
    p_synth.add_argument("--name", default=None, help="dataset name (default derived)")
    p_synth.add_argument("--out-dir", default=".", help="output directory")
    p_synth.set_defaults(func=cmd_synth)

    p_bench = sub.add_parser("bench", help="run the benchmark over a directory")
    p_bench.add_argument("--datasets", required=True, help="directory of dataset files")
    p_bench.add_argument("--out", required=True, help="output directory")
    p_bench.add_argument(
        "--mode", choices=("default", "best"), default="default", help="protocol"
    )
    p_bench.add_argument("--grid", default=None, help="JSON grid file for best mode")
    p_bench.add_argument("--margin", type=int, default=5, help="matching tolerance")
    p_bench.add_argument(
        "--timeout", type=float, default=None, help="per-run timeout in seconds"
    )
    p_bench.add_argument(
        "--threads", type=int, default=None, help="worker threads (or WATCH_THREADS)"
    )
    _add_detector_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on unknown flags or bad values
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except WatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

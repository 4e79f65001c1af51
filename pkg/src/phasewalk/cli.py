"""Command-line interface: ``phasewalk generate|detect|spectrum|eval|aggregate``.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import benchgen
from .errors import NumericalError, ValidationError
from .metrics import ari, nmi
from .network import aggregate_window, load_temporal_network, save_temporal_network
from .pipeline import RunConfig, StageError, detect, write_json, write_result
from .spatial import build_generator, generator_spectrum, intersect_intervals, tau_interval

log = logging.getLogger("phasewalk")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phasewalk", description="Phase detection in temporal networks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate a benchmark temporal network")
    p.add_argument("--preset", choices=sorted(benchgen.PRESETS), default="community-split")
    p.add_argument("--scenario", type=Path, help="scenario JSON overriding --preset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", action="store_true", help="also write agent positions to frames.csv")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("detect", help="run LNE or IMC on a dataset")
    p.add_argument("dataset", type=Path)
    p.add_argument("--method", choices=("lne", "imc"), default="lne")
    p.add_argument("--tau", type=_positive(float))
    p.add_argument("--sigma", type=_positive(float))
    p.add_argument("--tau-temp", type=_positive(float))
    p.add_argument("--phases", type=_positive(int))
    p.add_argument("--gap-choice", type=_positive(int))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive(int), default=1)
    p.add_argument("--ratio", type=_positive(float), default=5.0)
    p.add_argument("--restarts", type=_positive(int), default=10)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("spectrum", help="per-snapshot generator spectra and tau intervals")
    p.add_argument("dataset", type=Path)
    p.add_argument("--num-eigs", type=_positive(int), default=10)
    p.add_argument("--gap-choice", type=_positive(int), help="gap index for the tau interval (default: per snapshot)")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("eval", help="ARI and NMI between two label files")
    p.add_argument("predicted", type=Path)
    p.add_argument("truth", type=Path)

    p = sub.add_parser("aggregate", help="sliding-window aggregation of a dataset")
    p.add_argument("dataset", type=Path)
    p.add_argument("--window", type=_positive(int), required=True)
    p.add_argument("--stride", type=_positive(int), required=True)
    p.add_argument("--out", type=Path, required=True)
    return parser


def read_labels(path: Path) -> list:
    """Labels from a JSON list, or an object with ``labels`` / ``ground_truth``."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read labels from {path}: {exc}") from exc
    if isinstance(data, dict):
        for key in ("labels", "ground_truth"):
            if key in data:
                data = data[key]
                break
        else:
            raise ValidationError(f"{path}: expected a 'labels' or 'ground_truth' key")
    if not isinstance(data, list):
        raise ValidationError(f"{path}: labels must be a list")
    return data


def cmd_generate(args) -> int:
    if args.scenario:
        scenario = benchgen.BenchmarkScenario.from_dict(json.loads(args.scenario.read_text()))
        scenario = scenario.with_seed(args.seed)
    else:
        scenario = benchgen.preset(args.preset, args.seed)
    net, frames = benchgen.generate(scenario)
    out = save_temporal_network(net, args.out)
    write_json(out / "scenario.json", scenario.to_dict())
    if args.frames:
        with open(out / "frames.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("frame,agent,x,y\n")
            for k, pos in enumerate(frames):
                for i, (x, y) in enumerate(pos):
                    fh.write(f"{k},{i},{float(x)!r},{float(y)!r}\n")
    log.info("wrote %d snapshots to %s", len(net), out)
    return EXIT_OK


def cmd_detect(args) -> int:
    net = load_temporal_network(args.dataset)
    config = RunConfig(method=args.method, tau=args.tau, sigma=args.sigma, tau_temp=args.tau_temp,
                       phases=args.phases, gap_choice=args.gap_choice, seed=args.seed, threads=args.threads,
                       ratio=args.ratio, restarts=args.restarts)
    result = detect(net, config)
    write_result(result, args.out)
    log.info("%d phases; labels %s", result.s, result.labels.labels.tolist())
    return EXIT_OK


def cmd_spectrum(args) -> int:
    net = load_temporal_network(args.dataset)
    snapshots, intervals = [], []
    for g in net:
        rep = generator_spectrum(build_generator(g), args.num_eigs)
        entry = rep.to_dict()
        entry["index"] = g.index
        k = args.gap_choice or rep.gap_index
        try:
            iv = tau_interval(rep.eigenvalues, k)
            intervals.append(iv)
            entry["tau_interval"] = {"k": k, "lo": iv.lo, "hi": iv.hi, "estimate": iv.estimate}
        except (NumericalError, ValidationError) as exc:
            entry["tau_interval"] = None
            log.warning("snapshot %d: no tau interval (%s)", g.index, exc)
        snapshots.append(entry)
    common = intersect_intervals(intervals) if intervals else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "spectrum.json", {
        "snapshots": snapshots,
        "mean_eigenvalues": np.mean([s["eigenvalues"] for s in snapshots], axis=0).tolist(),
        "common_tau_interval": None if common is None else {"lo": common[0], "hi": common[1]},
    })
    return EXIT_OK


def cmd_eval(args) -> int:
    a, b = read_labels(args.predicted), read_labels(args.truth)
    print(json.dumps({"ari": ari(a, b), "nmi": nmi(a, b)}, sort_keys=True))
    return EXIT_OK


def cmd_aggregate(args) -> int:
    net = load_temporal_network(args.dataset)
    save_temporal_network(aggregate_window(net, args.window, args.stride), args.out)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "detect": cmd_detect,
    "spectrum": cmd_spectrum,
    "eval": cmd_eval,
    "aggregate": cmd_aggregate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if isinstance(exc.cause, NumericalError) else EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

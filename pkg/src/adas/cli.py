"""Command-line entry points: ``train``, ``probe`` and ``theory-check``.

Exit codes: 0 success, 1 usage or config error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import re
import sys
import time
from pathlib import Path

from .config import FIELDS, ConfigError, RunConfig, dump_config, load_config
from .metrics import LayerMetrics, fmt, layer_metrics
from .micronet.data import BlobSpec, IdxFormatError, load_idx, synthetic_blobs
from .micronet.net import MicroNet, NetworkSpec
from .micronet.train import new_state, train_epoch
from .optim import FixedLR, StepDecay
from .scheduler import AdaSConfig
from .tensor import SnapshotError, read_at4, write_at4
from .theory import theory_check

log = logging.getLogger("adas")

CSV_HEADER = [
    "epoch", "block", "lr", "G3", "G4", "G_avg", "kappa3", "kappa4", "kappa_avg",
    "rank_ratio3", "rank_ratio4", "train_loss", "test_accuracy",
]
METRIC_COLUMNS = CSV_HEADER[:2] + CSV_HEADER[3:11]
SNAPSHOT_RE = re.compile(r"^epoch(\d+)_block(\d+)\.at4$")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class DataError(RuntimeError):
    pass


def csv_row(epoch: int, block: int, lr, m: LayerMetrics, train_loss, test_accuracy) -> list[str]:
    """One row of the metrics CSV; ``block`` is 1-based."""
    row = {"epoch": str(epoch), "block": str(block), "lr": fmt(lr), **{k: fmt(v) for k, v in m.row().items()}}
    row["train_loss"] = fmt(train_loss)
    row["test_accuracy"] = fmt(test_accuracy)
    return [row[c] for c in CSV_HEADER]


def load_datasets(cfg: RunConfig):
    if cfg.dataset == "idx":
        try:
            train = load_idx(cfg.train_images, cfg.train_labels, cfg.classes)
            test = load_idx(cfg.test_images, cfg.test_labels, cfg.classes)
        except (IdxFormatError, OSError) as exc:
            raise DataError(str(exc)) from exc
        return train, test
    spec = BlobSpec(
        size=cfg.synthetic_size, classes=cfg.classes, noise=cfg.synthetic_noise, jitter=cfg.synthetic_jitter
    )
    return (
        synthetic_blobs(cfg.synthetic_train, cfg.data_seed, spec),
        synthetic_blobs(cfg.synthetic_test, cfg.data_seed + 1, spec),
    )


def make_schedule(cfg: RunConfig):
    if cfg.optimizer == "adas":
        return AdaSConfig(
            beta=cfg.beta, zeta=cfg.zeta, eta_init=cfg.eta_init, eta_min=cfg.eta_min, momentum=cfg.momentum
        )
    if cfg.optimizer == "fixed":
        return FixedLR(cfg.eta_init)
    return StepDecay(cfg.eta_init, cfg.step_factor, cfg.step_period)


def run_experiment(cfg: RunConfig) -> dict:
    """Train per ``cfg`` and write metrics.csv, summary.txt and optional AT4 snapshots."""
    started = time.perf_counter()
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    train, test = load_datasets(cfg)
    if cfg.batch_size > len(train):
        raise ConfigError("batch_size", f"{cfg.batch_size} exceeds the {len(train)} training samples")
    try:
        spec = NetworkSpec(train.image_shape, tuple(cfg.conv_channels), tuple(cfg.pool), cfg.classes)
    except ValueError as exc:
        raise ConfigError("conv_channels", str(exc)) from None
    net = MicroNet(spec, seed=cfg.seed)
    schedule = make_schedule(cfg)
    state = new_state(net, cfg.seed, schedule)
    log.info("dense classifier shares the rate of conv block %d", net.num_blocks)

    snap_dir = out / "snapshots"
    if cfg.snapshots:
        snap_dir.mkdir(exist_ok=True)
    with open(out / "metrics.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for _ in range(cfg.epochs):
            rec = train_epoch(
                net, train, schedule, state, test=test, batch_size=cfg.batch_size, momentum=cfg.momentum
            )
            for ell, (lr, m) in enumerate(zip(rec.lr, rec.metrics), 1):
                writer.writerow(csv_row(rec.epoch, ell, lr, m, rec.train_loss, rec.test_accuracy))
            if cfg.snapshots:
                for ell, t in enumerate(net.conv_weights(), 1):
                    write_at4(snap_dir / f"epoch{rec.epoch}_block{ell}.at4", t)
            log.info("epoch %d loss %.4f acc %.4f", rec.epoch, rec.train_loss, rec.test_accuracy)

    last = state.history[-1]
    summary = {
        "optimizer": cfg.optimizer,
        "epochs": cfg.epochs,
        "final_train_loss": last.train_loss,
        "final_test_accuracy": last.test_accuracy,
        "wall_time_s": time.perf_counter() - started,
    }
    lines = [f"{k} = {v}" for k, v in summary.items()]
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    (out / "config.txt").write_text(dump_config(cfg))
    return summary


def probe_snapshots(directory, out_path) -> dict:
    """Recompute metric rows from ``epoch{t}_block{l}.at4`` files; no training.

    Unreadable snapshots are skipped with a warning.  lr, loss and accuracy
    are unknown offline and written as nan.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"not a directory: {directory}")
    found = []
    for path in directory.iterdir():
        match = SNAPSHOT_RE.match(path.name)
        if match:
            found.append((int(match.group(1)), int(match.group(2)), path))
    found.sort()
    warnings = rows = 0
    with open(out_path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for epoch, block, path in found:
            try:
                t = read_at4(path)
            except SnapshotError as exc:
                log.warning("skipping %s", exc)
                warnings += 1
                continue
            writer.writerow(csv_row(epoch, block, None, layer_metrics(t, p=1), None, None))
            rows += 1
    return {"rows": rows, "warnings": warnings}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adas", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    train = sub.add_parser("train", help="train the micro CNN and log per-epoch metrics")
    train.add_argument("--config", help="key = value file")
    for name in FIELDS:
        train.add_argument("--" + name.replace("_", "-"), dest="override_" + name, metavar="VALUE")

    probe = sub.add_parser("probe", help="compute metrics from AT4 weight snapshots")
    probe.add_argument("--dir", required=True)
    probe.add_argument("--out", required=True)

    theory = sub.add_parser("theory-check", help="randomised check of the p=2 step-size bound")
    theory.add_argument("--trials", type=int, default=1000)
    theory.add_argument("--seed", type=int, default=1)
    theory.add_argument("--rows", type=int, default=8)
    theory.add_argument("--cols", type=int, default=8)
    theory.add_argument("--zero-b", action="store_true", help="force the gradient term to zero")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "train":
            overrides = {
                k[len("override_"):]: v for k, v in vars(args).items() if k.startswith("override_") and v is not None
            }
            cfg = load_config(args.config, overrides)
            summary = run_experiment(cfg)
            for k, v in summary.items():
                print(f"{k} = {v}")
        elif args.command == "probe":
            result = probe_snapshots(args.dir, args.out)
            print(f"rows = {result['rows']}")
            print(f"warnings = {result['warnings']}")
        else:
            if args.trials < 1:
                parser.error("--trials must be >= 1")
            report = theory_check(args.trials, args.seed, args.rows, args.cols, zero_b=args.zero_b)
            print("\n".join(report.lines()))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        if args.command == "train" and args.config and not Path(args.config).is_file():
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

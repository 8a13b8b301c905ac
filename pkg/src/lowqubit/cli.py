"""Command-line entry point: verification suites, training, benchmarks.

Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.
"""

import argparse
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import vqc as vqc_mod
from .data import gen_synthetic, load_wav_dir
from .errors import ConfigError
from .gradcheck import TOLERANCE, clip_vanishing_demo, run_gradchecks
from .models import (
    LtVariant,
    ModelKind,
    ModelSpec,
    VqcVariant,
    build_model,
    save_checkpoint,
)
from .qsim.verify import run_all_checks
from .train import TrainConfig, TrainingAborted, train_loop

_MODEL_KINDS = {
    "qm5": ModelKind.QM5_MINI,
    "m5": ModelKind.M5_MINI,
    "qtransformer": ModelKind.QTRANSFORMER_MINI,
}


@dataclass
class RunConfig:
    """Parsed settings echoed into every run directory before execution."""

    subcommand: str
    model: str = "qm5"
    qubits: int = 4
    depth: int = 1
    variant: str = "lowqubit"
    lt: str = "fc"
    clip: bool = True
    seed: int = 0
    epochs: int = 100
    steps: int | None = None
    batch_size: int = 8
    lr: float = 1e-3
    data: str = "synthetic"
    classes: int = 4
    per_class: int = 64
    length: int = 1024
    noise: float = 0.05
    out: str = ""
    threads: int = 1
    log_timing: bool = False

    def echo(self, path: Path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for key, value in asdict(self).items():
                fh.write(f"{key} = {value}\n")


def _dataset_for(config: RunConfig):
    if config.data == "synthetic":
        return gen_synthetic(
            n_classes=config.classes, per_class=config.per_class,
            length=config.length, noise_sigma=config.noise, seed=config.seed,
        )
    dataset, skipped = load_wav_dir(config.data, length=config.length)
    for line in skipped:
        print(f"warning: skipped {line}", file=sys.stderr)
    if skipped:
        print(f"warning: {len(skipped)} file(s)/class(es) skipped", file=sys.stderr)
    return dataset


def _spec_for(config: RunConfig, n_classes: int) -> ModelSpec:
    return ModelSpec(
        kind=_MODEL_KINDS[config.model],
        n_qubits=config.qubits,
        vqc_variant=VqcVariant(config.variant),
        lt_variant=LtVariant(config.lt),
        clip_enabled=config.clip,
        depth=config.depth,
        n_classes=n_classes,
        input_length=config.length,
    )


def _run_training(config: RunConfig, out_dir: Path, spec: ModelSpec, dataset,
                  seed: int, write_checkpoint: bool = True):
    out_dir.mkdir(parents=True, exist_ok=True)
    model = build_model(spec, seed=seed)
    trace = train_loop(model, dataset, TrainConfig(
        epochs=config.epochs, batch_size=config.batch_size, lr=config.lr,
        seed=seed, log_path=str(out_dir / "loss.csv"), max_steps=config.steps,
        log_timing=config.log_timing,
    ))
    summary = trace.summary()
    with open(out_dir / "summary.txt", "w", encoding="utf-8", newline="\n") as fh:
        for key, value in summary.items():
            fh.write(f"{key} = {value}\n")
    if write_checkpoint:
        save_checkpoint(out_dir / "checkpoint.qspc", model)
    return trace, summary


# -- subcommands -------------------------------------------------------------


def cmd_simcheck(args) -> int:
    results = run_all_checks(
        seed=args.seed, oracle_circuits=args.oracle_circuits,
        max_qubits=args.qubits, corrupt_gate=args.inject_fault == "unitarity",
    )
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_gradcheck(args) -> int:
    results = run_gradchecks(args.qubits, args.depth, args.seed)
    for r in results:
        print(r.line())
    clipped, vanished = clip_vanishing_demo(n_qubits=args.qubits, seed=args.seed)
    ratio = clipped / vanished if vanished > 0 else float("inf")
    print(f"[demo] mean |input-map weight grad|: clipped {clipped:.3e}, "
          f"unclipped at 100x inputs {vanished:.3e} ({ratio:.1f}x damping)")
    return 0 if all(r.passed for r in results) else 1


def _config_from_args(args, subcommand: str) -> RunConfig:
    return RunConfig(
        subcommand=subcommand, model=args.model, qubits=args.qubits,
        depth=args.depth, variant=args.variant, lt=args.lt, clip=args.clip,
        seed=args.seed, epochs=args.epochs, steps=args.steps,
        batch_size=args.batch_size, lr=args.lr, data=args.data,
        classes=args.classes, per_class=args.per_class, length=args.length,
        noise=args.noise, out=args.out, threads=args.threads,
        log_timing=args.log_timing,
    )


def cmd_train(args) -> int:
    config = _config_from_args(args, "train")
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config.echo(out_dir / "config.txt")
    vqc_mod.set_num_threads(config.threads)
    dataset = _dataset_for(config)
    spec = _spec_for(config, dataset.n_classes)
    trace, summary = _run_training(config, out_dir, spec, dataset, config.seed)
    for key, value in summary.items():
        print(f"{key} = {value}")
    return 0


_PAIRS = ("vqc", "clip", "lt", "qubits")


def _bench_arms(config: RunConfig, pair: str, n_classes: int):
    base = dict(
        kind=ModelKind.QM5_MINI, depth=config.depth, n_classes=n_classes,
        input_length=config.length,
    )
    if pair == "vqc":
        return [
            ("lowqubit", ModelSpec(n_qubits=config.qubits, **base)),
            ("plain", ModelSpec(n_qubits=8, vqc_variant=VqcVariant.PLAIN, **base)),
        ]
    if pair == "clip":
        return [
            ("clip-on", ModelSpec(n_qubits=config.qubits, clip_enabled=True, **base)),
            ("clip-off", ModelSpec(n_qubits=config.qubits, clip_enabled=False, **base)),
        ]
    if pair == "lt":
        return [
            ("fc", ModelSpec(n_qubits=config.qubits, lt_variant=LtVariant.FC, **base)),
            ("bilinear", ModelSpec(n_qubits=config.qubits, lt_variant=LtVariant.BILINEAR, **base)),
        ]
    return [
        (f"q{n}", ModelSpec(n_qubits=n, **base)) for n in (2, 4, 8)
    ]


def _majority(wins: int, total: int) -> str:
    return f"{wins}/{total}"


def cmd_bench(args) -> int:
    config = _config_from_args(args, "bench")
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config.echo(out_dir / "config.txt")
    vqc_mod.set_num_threads(config.threads)
    dataset = _dataset_for(config)
    pairs = _PAIRS if args.pair == "all" else (args.pair,)
    seeds = [config.seed + i for i in range(args.seeds)]

    rows = []
    results: dict[str, dict[str, list]] = {}
    for pair in pairs:
        results[pair] = {}
        for arm, spec in _bench_arms(config, pair, dataset.n_classes):
            results[pair][arm] = []
            for seed in seeds:
                run_dir = out_dir / pair / f"{arm}-seed{seed}"
                trace, summary = _run_training(
                    config, run_dir, spec, dataset, seed, write_checkpoint=False,
                )
                results[pair][arm].append(summary)
                rows.append({
                    "pair": pair, "arm": arm, "seed": seed,
                    "qubits": spec.n_qubits,
                    "final_loss": summary["final_loss"],
                    "stability": summary["stability"],
                    "median_step_ms": summary["median_step_ms"],
                    "accuracy": summary["train_accuracy"],
                })
                print(f"[{pair}/{arm} seed {seed}] "
                      f"final_loss={summary['final_loss']:.4f} "
                      f"stability={summary['stability']:.4f} "
                      f"median_step_ms={summary['median_step_ms']:.1f} "
                      f"accuracy={summary['train_accuracy']:.3f}")

    header = ["pair", "arm", "seed", "qubits", "final_loss", "stability",
              "median_step_ms", "accuracy"]
    with open(out_dir / "comparison.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(row[k]) for k in header) + "\n")
    table = _aligned_table(header, rows)
    with open(out_dir / "comparison.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(table)
    print(table, end="")
    _print_verdicts(results, seeds)
    return 0


def _format_cell(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _aligned_table(header, rows) -> str:
    cells = [header] + [[_format_cell(r[k]) for k in header] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _print_verdicts(results, seeds):
    n = len(seeds)
    if "vqc" in results:
        low = results["vqc"]["lowqubit"]
        plain = results["vqc"]["plain"]
        speed = np.median([p["median_step_ms"] for p in plain]) / max(
            np.median([l["median_step_ms"] for l in low]), 1e-9
        )
        stab = sum(l["stability"] <= p["stability"] for l, p in zip(low, plain))
        loss = sum(l["final_loss"] <= p["final_loss"] for l, p in zip(low, plain))
        print(f"[verdict] lowqubit vs plain: {speed:.1f}x faster per step, "
              f"stability wins {_majority(stab, n)}, final-loss wins {_majority(loss, n)}")
    if "clip" in results:
        on, off = results["clip"]["clip-on"], results["clip"]["clip-off"]
        stab = sum(a["stability"] <= b["stability"] for a, b in zip(on, off))
        loss = sum(a["final_loss"] <= b["final_loss"] for a, b in zip(on, off))
        print(f"[verdict] clip-on vs clip-off: stability wins {_majority(stab, n)}, "
              f"final-loss wins {_majority(loss, n)}")
    if "lt" in results:
        fc, bl = results["lt"]["fc"], results["lt"]["bilinear"]
        loss = sum(a["final_loss"] <= b["final_loss"] for a, b in zip(fc, bl))
        print(f"[verdict] fc vs bilinear: final-loss wins {_majority(loss, n)}")
    if "qubits" in results:
        q2, q8 = results["qubits"]["q2"], results["qubits"]["q8"]
        acc = sum(b["train_accuracy"] >= a["train_accuracy"] for a, b in zip(q2, q8))
        print(f"[verdict] qubits 8 vs 2: accuracy non-decreasing {_majority(acc, n)}")


# -- parser ------------------------------------------------------------------


def _add_model_args(p: argparse.ArgumentParser, steps_default=None,
                    length_default=1024, per_class_default=64):
    p.add_argument("--model", choices=sorted(_MODEL_KINDS), default="qm5")
    p.add_argument("--qubits", type=int, choices=(2, 4, 8), default=4)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--variant", choices=("lowqubit", "plain"), default="lowqubit")
    p.add_argument("--lt", choices=("fc", "bilinear"), default="fc")
    p.add_argument("--clip", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--steps", type=int, default=steps_default,
                   help="stop after this many optimizer steps")
    p.add_argument("--batch-size", type=int, default=8)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--data", default="synthetic",
                   help='"synthetic" or a directory of per-class WAV files')
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--per-class", type=int, default=per_class_default)
    p.add_argument("--length", type=int, default=length_default)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--out", required=True, help="run output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--log-timing", action="store_true",
                   help="write measured wall_ms into the loss CSV "
                        "(breaks byte-reproducibility of the log)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowqubit",
        description="Low-qubit VQC layers: verification, training and benchmarks",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simcheck", help="run the simulator property suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--qubits", type=int, choices=range(1, 13), default=6,
                   metavar="N", help="largest register exercised (1-12)")
    p.add_argument("--oracle-circuits", type=int, default=500)
    p.add_argument("--inject-fault", choices=("unitarity",), help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_simcheck)

    p = sub.add_parser("gradcheck", help="parameter-shift vs finite differences")
    p.add_argument("--qubits", type=int, choices=range(2, 11), default=4, metavar="N",
                   help="qubit count for the checked layers (2-10)")
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("train", help="train one model")
    _add_model_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bench", help="matched-pair comparison benchmarks")
    _add_model_args(p, steps_default=300, length_default=256, per_class_default=16)
    p.add_argument("--pair", choices=_PAIRS + ("all",), default="vqc")
    p.add_argument("--seeds", type=int, default=3, help="number of paired seeds")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TrainingAborted, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

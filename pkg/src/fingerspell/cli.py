"""Command-line interface: train, eval, replay, serve, inspect.

Exit codes: 0 success, 2 usage, 3 I/O, 4 file/protocol format, 5 training
divergence. All behavior is controlled by flags so runs are reproducible
from the command line alone.
"""

from __future__ import annotations

import argparse
import sys
import time

from .landmarks import InvalidFrameError, UnknownLabelError, label_token
from .neuralnet import ModelFormatError, load_model, param_count, save_model
from .stream_io import ProtocolError, replay, serve
from .training import (
    DatasetFormatError,
    DivergenceError,
    SplitSpec,
    TrainConfig,
    evaluate,
    load_dataset,
    load_eval_data,
    split,
    train,
    write_confusion_csv,
    write_history,
)
from .typing_session import SessionConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_DIVERGENCE = 5

DEFAULT_SCHEDULE_TEXT = "50x30,300x30,600x60"


def parse_schedule(text: str):
    """`SIZExCOUNT[,...]`, e.g. 50x30,300x30,600x60."""
    segments = []
    for part in text.split(","):
        size, sep, count = part.partition("x")
        if not (sep and size.isdigit() and count.isdigit()) or int(size) < 1 or int(count) < 1:
            raise argparse.ArgumentTypeError(
                f"bad schedule segment {part!r}; expected SIZExCOUNT[,...]"
            )
        segments.append((int(size), int(count)))
    return tuple(segments)


def parse_fractions(text: str):
    parts = text.split(",")
    try:
        fractions = tuple(float(p) for p in parts)
        SplitSpec(fractions=fractions)  # positivity / sum-to-1 validation
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(
            f"bad split fractions {text!r}; expected three positive numbers summing to 1"
        ) from None
    if len(fractions) != 3:
        raise argparse.ArgumentTypeError("expected exactly three split fractions")
    return fractions


def parse_dims(text: str):
    try:
        dims = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}") from None
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"bad dims {text!r}")
    return dims


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fingerspell",
        description="Train and serve the landmark fingerspelling classifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model from a landmark CSV")
    p_train.add_argument("--data", required=True, help="dataset CSV path")
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.add_argument("--history", help="training history CSV to write")
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument(
        "--epochs-schedule", type=parse_schedule, default=parse_schedule(DEFAULT_SCHEDULE_TEXT),
        metavar="SIZExCOUNT[,...]",
    )
    p_train.add_argument("--flip-prob", type=float, default=0.5)
    p_train.add_argument("--splits", type=parse_fractions, default=(0.8, 0.1, 0.1))
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--dims", type=parse_dims, default=(64, 70, 50, 29))
    p_train.add_argument("--deterministic", action="store_true", help="suppress timing output")

    p_eval = sub.add_parser("eval", help="evaluate a model on labeled observations")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--confusion", help="confusion matrix CSV to write")

    p_replay = sub.add_parser("replay", help="replay a recorded frame stream")
    p_replay.add_argument("--stream", required=True)
    p_replay.add_argument("--model", required=True)
    p_replay.add_argument("--confidence", type=int, default=10)
    p_replay.add_argument("--events", help="write the raw event log here")

    p_serve = sub.add_parser("serve", help="serve the wire protocol")
    p_serve.add_argument("--model", required=True)
    p_serve.add_argument("--endpoint", default="stdio", help="'stdio' or host:port")
    p_serve.add_argument("--confidence", type=int, default=10)

    p_inspect = sub.add_parser("inspect", help="describe a model file")
    p_inspect.add_argument("--model", required=True)

    return parser


def cmd_train(args) -> int:
    dataset = load_dataset(args.data)
    train_set, val_set, test_set = split(
        dataset, SplitSpec(fractions=args.splits, seed=args.seed)
    )
    config = TrainConfig(
        dims=args.dims,
        schedule=args.epochs_schedule,
        flip_probability=args.flip_prob,
        learning_rate=args.lr,
        shuffle_seed=args.seed,
    )
    started = time.monotonic()
    model, history = train(train_set, val_set, config, model_seed=args.seed)
    save_model(model, args.out)
    if args.history:
        write_history(history, args.history)
    print(f"epochs: {len(history.epochs)}")
    print(f"best epoch: {history.best_epoch}")
    print(f"best validation accuracy: {history.best_val_accuracy:.4f}")
    if len(test_set):
        report = evaluate(model, test_set.rows)
        print(f"test accuracy: {report.accuracy:.4f}")
    if not args.deterministic:
        print(f"elapsed: {time.monotonic() - started:.1f}s")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    data = load_eval_data(args.data)
    report = evaluate(model, data)
    print(f"evaluated: {report.evaluated_count}")
    print(f"skipped: {report.skipped_count}")
    print(f"accuracy: {report.accuracy:.4f}")
    skips = {
        label_token(i): int(count)
        for i, count in enumerate(report.skipped_per_class)
        if count
    }
    if skips:
        print("skipped per class: " + " ".join(f"{k}={v}" for k, v in skips.items()))
    if args.confusion:
        write_confusion_csv(report, args.confusion)
        print(f"confusion matrix written to {args.confusion}")
    return EXIT_OK


def cmd_replay(args) -> int:
    model = load_model(args.model)
    config = SessionConfig(confidence_bound=args.confidence)
    if args.events:
        with open(args.events, "w", encoding="utf-8", newline="") as out:
            result = replay(model, args.stream, config, events_out=out)
    else:
        result = replay(model, args.stream, config)
    for emission in result.transcript:
        suffix = f" {emission.char}" if emission.char else ""
        print(f"emit {emission.kind}{suffix} -> {emission.buffer!r}")
    print(f"final: {result.final_buffer!r}")
    return EXIT_OK


def cmd_serve(args) -> int:
    model = load_model(args.model)
    config = SessionConfig(confidence_bound=args.confidence)
    try:
        serve(model, args.endpoint, config)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_inspect(args) -> int:
    model = load_model(args.model)
    print(f"dims: {','.join(str(d) for d in model.dims)}")
    print(f"activation: {model.activation}")
    print(f"vocabulary: {' '.join(model.vocab)}")
    print(f"parameters: {param_count(model)}")
    return EXIT_OK


_COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "replay": cmd_replay,
    "serve": cmd_serve,
    "inspect": cmd_inspect,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except (DatasetFormatError, ModelFormatError, ProtocolError, UnknownLabelError, InvalidFrameError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

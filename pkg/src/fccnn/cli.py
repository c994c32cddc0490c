"""Command-line interface: train, eval, count, encode, gradcheck."""

from __future__ import annotations

import argparse
import sys

from . import data as data_mod
from . import gradcheck_suite, harness, models


def _cmd_train(args) -> int:
    config = harness.RunConfig(
        model=args.model,
        dataset=args.dataset,
        encoding=args.encoding,
        data_dir=args.data_dir,
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        beta1=args.beta1,
        beta2=args.beta2,
        weight_decay=args.weight_decay,
        seed=args.seed,
        out_dir=args.out,
        stage2=not args.no_stage2,
        stage2_reinit=args.stage2_reinit,
        dcn_activation=args.dcn_activation,
        train_limit=args.train_limit,
        test_limit=args.test_limit,
    )
    summary = harness.run(config)
    print(
        f"{summary['model']} on {summary['dataset']}/{summary['encoding']}: "
        f"stage1 test acc {summary['stage1_test_acc']:.4f}, "
        f"final test acc {summary['final_test_acc']:.4f} -> {summary['out_dir']}"
    )
    return 0


def _cmd_eval(args) -> int:
    model = models.load_checkpoint(args.checkpoint)
    config = harness.RunConfig(
        model=model.spec.kind,
        dataset=args.dataset,
        encoding=args.encoding,
        data_dir=args.data_dir,
        epochs=1,
        test_limit=args.test_limit,
        train_limit=args.train_limit,
    )
    dset = harness.load_dataset(config, args.split)
    acc, loss = harness.evaluate(model, dset, args.batch_size)
    print(f"{args.dataset}/{args.split}: accuracy {acc:.4f}, loss {loss:.6f}")
    return 0


def _cmd_count(args) -> int:
    model_spec = models.build_model(args.model, args.classes).spec
    print(models.format_cost_table(model_spec))
    return 0


def _cmd_encode(args) -> int:
    dset = data_mod.load_ctns_dataset(args.in_dir)
    encoded = data_mod.encode(dset, args.encoding)
    data_mod.write_ctns_dataset(encoded, args.out)
    print(f"encoded {encoded.n} images as {args.encoding} -> {args.out}")
    return 0


def _cmd_gradcheck(args) -> int:
    results = gradcheck_suite.run_suite(points=args.points, verbose=True)
    worst = max(err for _, err in results)
    ok = worst < gradcheck_suite.TOLERANCE
    print(f"worst relative error {worst:.3e} ({'ok' if ok else 'FAIL'})")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fccnn",
        description="Complex-valued CNN training and verification tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model, two-stage by default")
    p.add_argument("--model", choices=models.MODEL_KINDS, default="fc-cnn")
    p.add_argument("--dataset", choices=sorted(harness.DATASET_CLASSES), default="cifar10")
    p.add_argument("--data-dir", default=None, help=f"default: ${harness.DATA_DIR_ENV}")
    p.add_argument("--encoding", choices=data_mod.ENCODINGS, default="rgb")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--beta1", type=float, default=0.99)
    p.add_argument("--beta2", type=float, default=0.999)
    p.add_argument("--weight-decay", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-stage2", action="store_true")
    p.add_argument("--stage2-reinit", action="store_true")
    p.add_argument("--dcn-activation", choices=("crelu", "cardioid"), default="crelu")
    p.add_argument("--train-limit", type=int, default=None)
    p.add_argument("--test-limit", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", choices=sorted(harness.DATASET_CLASSES), default="cifar10")
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--encoding", choices=data_mod.ENCODINGS, default="rgb")
    p.add_argument("--batch-size", type=int, default=256)
    p.add_argument("--train-limit", type=int, default=None)
    p.add_argument("--test-limit", type=int, default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("count", help="parameter/MAC accounting table")
    p.add_argument("--model", choices=models.MODEL_KINDS, default="fc-cnn")
    p.add_argument("--classes", type=int, default=10)
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("encode", help="re-encode a CTNS dataset directory")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--encoding", choices=data_mod.ENCODINGS, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("gradcheck", help="finite-difference verification suite")
    p.add_argument("--points", type=int, default=10)
    p.set_defaults(func=_cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: ``train``, ``query``, ``evaluate``, ``synth``.

Exit codes: 0 success, 2 configuration or usage error, 3 data or model
error, 4 internal numerical error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config
from .errors import BadConfig, DegenerateLabels, NonFiniteObjective, RetrievalError
from .evaluation import generate_synthetic_corpus, run_cross_validation, write_report
from .ingest import load_image, scan_dataset
from .model import load_model, save_model
from . import pipeline

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _trace(label: str, values, stream) -> None:
    print(f"# {label}", file=stream)
    print("iter,objective", file=stream)
    for i, v in enumerate(values):
        print(f"{i},{v!r}", file=stream)


def cmd_train(args) -> int:
    config = load_config(args.config)
    dataset = scan_dataset(args.data)
    for w in dataset.warnings:
        print(f"warning: {w}", file=sys.stderr)
    result = pipeline.train(dataset, config)
    _trace("kmeans", result.kmeans_objective, sys.stderr)
    _trace("nmf", result.nmf_objective, sys.stderr)
    save_model(result.model, args.model)
    return EXIT_OK


def cmd_query(args) -> int:
    model = load_model(args.model)
    image = load_image(args.image)
    if args.top < 1:
        raise BadConfig("--top must be positive")
    for r, rec_id, score in pipeline.query(model, image, args.top, baseline=args.baseline):
        print(f"{r},{rec_id},{score!r}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = load_config(args.config)
    dataset = scan_dataset(args.data)
    if len(dataset.classes) < 2:
        raise DegenerateLabels(dataset.warnings[-1])
    reports = run_cross_validation(dataset, config)
    for w in reports[0].warnings:
        print(f"warning: {w}", file=sys.stderr)
    write_report(reports, args.out)
    for r in reports:
        print(f"{r.method}: mean AUC {r.mean_auc:.4f} (std {r.std_auc:.4f})", file=sys.stderr)
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.classes < 1 or args.per_class < 1 or args.size < 1:
        raise BadConfig("--classes, --per-class and --size must be positive")
    if args.noise < 0:
        raise BadConfig("--noise must be nonnegative")
    generate_synthetic_corpus(args.out, args.classes, args.per_class,
                              image_size=args.size, noise_sigma=args.noise,
                              seed=args.seed)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="histretrieval",
        description="Image retrieval with bag-of-words, NMF and graph transduction.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on a corpus")
    p.add_argument("--data", required=True, help="corpus root (<root>/<class>/<img>.pgm)")
    p.add_argument("--config", help="key=value config file (defaults if omitted)")
    p.add_argument("--model", required=True, help="output model file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("query", help="rank the database against a query image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True, help="query PGM image")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--baseline", action="store_true", help="rank by cosine similarity")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("evaluate", help="cross-validated ROC evaluation")
    p.add_argument("--data", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="report CSV path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="write a synthetic grating corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=40)
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--size", type=int, default=64, help="image side in pixels")
    p.add_argument("--noise", type=float, default=0.05, help="noise std as a fraction of 255")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except BadConfig as exc:
        print(f"BadConfig: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteObjective as exc:
        print(f"NonFiniteObjective: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RetrievalError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"FileNotFound: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"IoError: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

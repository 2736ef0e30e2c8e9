"""Command-line entry points: train, index, serve, and a terminal search loop.

Exit codes: 0 success, 1 operational error, 2 usage error. Diagnostics go to
stderr; data (results, statistics) to stdout.
"""

from __future__ import annotations

import argparse
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import embeddings
from .corpus import TokenizerConfig, load_corpus
from .embeddings import FormatError, Hyperparams, TrainingError, build_index
from .search import (
    SearchMode,
    ValidationError,
    create_session,
    export,
    next_results,
    record_feedback,
)
from .service import ServiceConfig, create_app

_CONFIG_KEYS = {"host", "port", "index_path", "model_path", "default_k",
                "default_mode", "default_alpha", "session_ttl",
                "snapshot_path", "cors_origins"}


def _err(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_train(args) -> int:
    hp = Hyperparams(dim=args.dim, window=args.window, negatives=args.negatives,
                     epochs=args.epochs, lr0=args.lr, ngram_min=args.ngram_min,
                     ngram_max=args.ngram_max, buckets=args.buckets,
                     min_count=args.min_count, subsample_t=args.subsample,
                     seed=args.seed)
    try:
        corpus = load_corpus(args.corpus)
        losses: list[float] = []
        model = embeddings.train(corpus, hp, epoch_losses=losses)
        embeddings.save_model(model, args.out)
    except (OSError, UnicodeDecodeError, TrainingError) as exc:
        return _err(str(exc))
    print(f"vocab_size: {len(model.vocab)}")
    print(f"token_count: {corpus.token_count}")
    print(f"final_mean_loss: {losses[-1]:.6f}")
    return 0


def cmd_index(args) -> int:
    try:
        corpus = load_corpus(args.corpus)
        model = embeddings.load_model(args.model)
        index = build_index(model, corpus)
        embeddings.save_index(index, args.out)
    except (OSError, UnicodeDecodeError, FormatError) as exc:
        return _err(str(exc))
    print(f"sentences: {len(index.entries)}")
    return 0


def _load_service_config(args) -> ServiceConfig:
    values: dict = {}
    if args.config:
        with open(args.config, "rb") as fh:
            data = tomllib.load(fh)
        for key in data:
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key: {key!r}")
        values.update(data)
    overrides = {"host": args.host, "port": args.port, "index_path": args.index,
                 "model_path": args.model, "default_k": args.k,
                 "default_mode": args.mode, "default_alpha": args.alpha,
                 "snapshot_path": args.snapshot}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ServiceConfig(**values)


def cmd_serve(args) -> int:
    import uvicorn

    try:
        config = _load_service_config(args)
        if not config.index_path or not config.model_path:
            raise ValueError("index_path and model_path are required")
        index = embeddings.load_index(config.index_path)
        model = embeddings.load_model(config.model_path)
        if index.dim != model.dim:
            raise ValueError(f"index dim {index.dim} does not match model dim {model.dim}")
    except (OSError, FormatError, ValueError, tomllib.TOMLDecodeError) as exc:
        return _err(str(exc))
    app = create_app(index, model, config)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    except (OSError, SystemExit) as exc:
        return _err(f"server failed: {exc}")
    return 0


def _prompt(message: str) -> str | None:
    print(message, end="", file=sys.stderr, flush=True)
    try:
        return input()
    except EOFError:
        return None


def _print_batch(results) -> None:
    if not results:
        print("(no more sentences)")
        return
    for r in results:
        print(f"{r.rank}. [{r.sentence_id}] ({r.score:.4f}) {r.text}")


def cmd_query(args) -> int:
    try:
        index = embeddings.load_index(args.index)
        model = embeddings.load_model(args.model)
    except (OSError, FormatError) as exc:
        return _err(str(exc))
    mode = SearchMode(args.mode, args.alpha)

    while True:
        query = _prompt("query> ")
        if query is None:
            return 0
        if not query.strip():
            continue
        session = create_session(index, model, query, mode=mode, k=args.k)
        results = next_results(session, index, model)
        _print_batch(results)
        while True:
            line = _prompt("[r ID | i ID | more | export FILE | done | quit] > ")
            if line is None or line.strip() == "quit":
                return 0
            parts = line.split()
            if not parts:
                continue
            cmd = parts[0]
            if cmd in ("r", "i") and len(parts) == 2 and parts[1].isdigit():
                try:
                    record_feedback(session, int(parts[1]), cmd == "r")
                except ValidationError as exc:
                    print(f"error: {exc}", file=sys.stderr)
            elif cmd == "more" and len(parts) == 1:
                results = next_results(session, index, model)
                _print_batch(results)
            elif cmd == "export" and len(parts) == 2:
                try:
                    with open(parts[1], "wb") as fh:
                        fh.write(export(session, index, "txt"))
                except OSError as exc:
                    print(f"error: {exc}", file=sys.stderr)
                else:
                    print(f"exported to {parts[1]}", file=sys.stderr)
            elif cmd == "done" and len(parts) == 1:
                break  # back to a fresh query
            else:
                print("error: unrecognized command", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corpusloop",
                                     description="Interactive corpus search with relevance feedback")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train subword skip-gram embeddings")
    p_train.add_argument("--corpus", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--dim", type=int, default=100)
    p_train.add_argument("--window", type=int, default=5)
    p_train.add_argument("--negatives", type=int, default=5)
    p_train.add_argument("--epochs", type=int, default=10)
    p_train.add_argument("--lr", type=float, default=0.05)
    p_train.add_argument("--ngram-min", type=int, default=3)
    p_train.add_argument("--ngram-max", type=int, default=6)
    p_train.add_argument("--buckets", type=int, default=2_000_000)
    p_train.add_argument("--min-count", type=int, default=1)
    p_train.add_argument("--subsample", type=float, default=1e-4)
    p_train.add_argument("--seed", type=int, default=1)
    p_train.set_defaults(func=cmd_train)

    p_index = sub.add_parser("index", help="precompute sentence vectors")
    p_index.add_argument("--corpus", required=True)
    p_index.add_argument("--model", required=True)
    p_index.add_argument("--out", required=True)
    p_index.set_defaults(func=cmd_index)

    p_serve = sub.add_parser("serve", help="run the HTTP search service")
    p_serve.add_argument("--config")
    p_serve.add_argument("--host")
    p_serve.add_argument("--port", type=int)
    p_serve.add_argument("--index")
    p_serve.add_argument("--model")
    p_serve.add_argument("--k", type=int)
    p_serve.add_argument("--mode")
    p_serve.add_argument("--alpha", type=float)
    p_serve.add_argument("--snapshot")
    p_serve.set_defaults(func=cmd_serve)

    p_query = sub.add_parser("query", help="interactive terminal search loop")
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--model", required=True)
    p_query.add_argument("--mode", default="embedding",
                         choices=["embedding", "fuzzy", "hybrid"])
    p_query.add_argument("--k", type=int, default=5)
    p_query.add_argument("--alpha", type=float, default=0.5)
    p_query.set_defaults(func=cmd_query)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

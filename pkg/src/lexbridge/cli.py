"""Command-line interface: ``lexbridge <subcommand> [--flags]``.

Every subcommand writes its outputs plus a ``<output>.prov.json`` sidecar.
Failures print one JSON line ``{"error": ..., "exit": ..., "message": ...}``
on stderr and exit with a code specific to the failure class:

    2  usage (unknown flag, bad value)
    3  missing input file
    4  format mismatch / parse error
    5  invalid configuration
    6  vocabulary error (e.g. token or query missing)
    7  singular system
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from importlib import resources
from pathlib import Path

from . import __version__
from .corpus import (build_lexicon, read_corpus, read_lexicon, vocab_overlap, write_corpus,
                     write_lexicon)
from .embeddings import (FORMATS, SgnsConfig, load_embeddings, normalize, save_embeddings,
                         train_sgns)
from .errors import ConfigError, FormatError, LexbridgeError
from .evaluation import evaluate, load_test_dictionary, rd_column, trend_export
from .lexmatch import (RewriteConfig, build_candidate_map, concat_corpora, read_candidate_map,
                       rewrite_corpus, write_candidate_map)
from .pipeline import (RunConfig, default_seed, default_trend_grid, parse_k_list, run_pipeline,
                       stage_seed, write_sidecar)
from .projection import fit, load_dictionary, load_model, save_model, select_lambda
from .retrieval import TargetIndex, format_tsv, translate_batch

log = logging.getLogger("lexbridge")

EXIT_USAGE = 2
EXIT_MISSING = 3

FIXTURES = ("tiny",)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(code: str, exit_code: int, message: str) -> int:
    print(json.dumps({"error": code, "exit": exit_code, "message": message}), file=sys.stderr)
    return exit_code


def _lambda_arg(text):
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("lambda must be >= 0")
    return value


def _bool_arg(text):
    if isinstance(text, bool):
        return text
    low = str(text).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise UsageError(f"missing required option(s): {flags}")


def _check_inputs(*paths):
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise FileNotFoundError(f"input file {p} does not exist")


def _params(args, *skip) -> dict:
    drop = {"func", "config", "log_level"} | set(skip)
    return {k: v for k, v in sorted(vars(args).items()) if k not in drop}


def _sgns_config(args, seed) -> SgnsConfig:
    return SgnsConfig(dim=args.dim, window=args.window, negatives=args.negatives,
                      epochs=args.epochs, initial_learning_rate=args.lr,
                      min_count=args.min_count, subsample_threshold=args.subsample,
                      seed=seed, workers=args.workers)


# -- subcommands -------------------------------------------------------------

def cmd_vocab(args):
    _require(args, "corpus", "out")
    _check_inputs(args.corpus)
    corpus = read_corpus(args.corpus, label=args.label, drop_numeric=args.drop_numeric)
    lex = build_lexicon(corpus, args.min_count)
    write_lexicon(lex, args.out)
    write_sidecar(args.out, "vocab", {"corpus": args.corpus}, _params(args))
    print(f"{corpus.label}\ttokens={corpus.token_count}\tvocabulary={lex.size}")


def cmd_overlap(args):
    _require(args, "a", "b")
    _check_inputs(args.a, args.b)
    rep = vocab_overlap(read_lexicon(args.a), read_lexicon(args.b),
                        args.label_a or Path(args.a).stem, args.label_b or Path(args.b).stem)
    line = rep.to_tsv() + "\n"
    if args.out:
        Path(args.out).write_text(line, encoding="utf-8")
        write_sidecar(args.out, "overlap", {"a": args.a, "b": args.b}, _params(args))
    sys.stdout.write(line)


def cmd_candidates(args):
    _require(args, "lex_b2", "lex_b1", "out")
    _check_inputs(args.lex_b2, args.lex_b1)
    if args.phi < 0:
        raise ConfigError("--phi must be >= 0")
    cmap = build_candidate_map(read_lexicon(args.lex_b2), read_lexicon(args.lex_b1), args.phi,
                               workers=args.workers)
    write_candidate_map(cmap, args.out)
    write_sidecar(args.out, "candidates", {"lex_b2": args.lex_b2, "lex_b1": args.lex_b1},
                  _params(args))
    nonempty = sum(1 for s in cmap.candidates.values() if s)
    print(f"words={len(cmap)}\twith_candidates={nonempty}")


def cmd_rewrite(args):
    _require(args, "corpus", "candidates", "out")
    _check_inputs(args.corpus, args.candidates)
    corpus = read_corpus(args.corpus, label=args.label)
    cmap = read_candidate_map(args.candidates, args.phi)
    seed = stage_seed(args.seed, "rewrite")
    rewritten, stats = rewrite_corpus(corpus, cmap, RewriteConfig(args.pi, seed))
    write_corpus(rewritten, args.out)
    stats_path = Path(args.stats or str(args.out) + ".stats")
    stats_path.write_text(stats.to_text(), encoding="utf-8")
    write_sidecar(args.out, "rewrite", {"corpus": args.corpus, "candidates": args.candidates},
                  _params(args), seed=args.seed, extra={"stage_seed": seed})
    sys.stdout.write(stats.to_text())


def cmd_concat(args):
    _require(args, "a", "b", "out")
    _check_inputs(args.a, args.b)
    joint = concat_corpora(read_corpus(args.a), read_corpus(args.b))
    write_corpus(joint, args.out)
    write_sidecar(args.out, "concat", {"a": args.a, "b": args.b}, _params(args))
    print(f"{joint.label}\ttokens={joint.token_count}\tlines={len(joint.lines)}")


def cmd_train(args):
    _require(args, "corpus", "out")
    _check_inputs(args.corpus)
    seed = stage_seed(args.seed, "train")
    cfg = _sgns_config(args, seed)
    space = train_sgns(read_corpus(args.corpus), cfg)
    save_embeddings(space, args.out, args.format)
    write_sidecar(args.out, "train", {"corpus": args.corpus}, _params(args), seed=args.seed,
                  extra={"stage_seed": seed, "sgns": asdict(cfg),
                         "loss_history": space.meta["loss_history"],
                         "deterministic": space.meta["deterministic"]})
    print(f"words={len(space)}\tdim={space.dim}\tdeterministic="
          f"{str(space.meta['deterministic']).lower()}")


def cmd_convert(args):
    _require(args, "input", "out")
    _check_inputs(args.input)
    space = load_embeddings(args.input, args.in_format)
    if args.normalize:
        space = normalize(space)
    save_embeddings(space, args.out, args.out_format)
    write_sidecar(args.out, "convert", {"input": args.input}, _params(args),
                  extra={"duplicates": space.meta.get("duplicates", 0)})


def _spaces(args):
    _check_inputs(args.source, args.target)
    source = normalize(load_embeddings(args.source, args.source_format))
    target = normalize(load_embeddings(args.target, args.target_format))
    return source, target


def cmd_learn(args):
    _require(args, "source", "target", "dict", "out")
    _check_inputs(args.dict)
    source, target = _spaces(args)
    d = load_dictionary(args.dict, source, target)
    for lineno, s, t in d.skipped:
        log.warning("skipped out-of-vocabulary pair at line %d: %s\t%s", lineno, s, t)
    lam, scores = args.lam, None
    if lam == "auto":
        lam, scores = select_lambda(d, source, target, seed=stage_seed(args.seed, "lambda"))
    model = fit(d, source, target, float(lam))
    save_model(model, args.out)
    write_sidecar(args.out, "learn",
                  {"source": args.source, "target": args.target, "dict": args.dict},
                  _params(args), seed=args.seed,
                  extra={"lambda_used": float(lam), "lambda_scores": scores,
                         "fit_report": model.fit_report,
                         "skipped": [list(x) for x in d.skipped]})
    rep = model.fit_report
    print(f"m={rep['m']}\ts={rep['s']}\tt={rep['t']}\tlambda={float(lam):g}\t"
          f"residual={rep['residual']:.6f}\tskipped={len(d.skipped)}")


def _read_queries(path) -> list[str]:
    seen, out = set(), []
    text = Path(path).read_bytes().decode("utf-8")
    for line in text.splitlines():
        word = line.split("\t")[0].strip()
        if word and word not in seen:
            seen.add(word)
            out.append(word)
    return out


def cmd_translate(args):
    _require(args, "model", "source", "target", "queries")
    _check_inputs(args.model, args.queries)
    source, target = _spaces(args)
    model = load_model(args.model)
    results, skipped = translate_batch(_read_queries(args.queries), model, source, target,
                                       k=min(args.k, len(target)))
    for q in skipped:
        log.warning("out-of-vocabulary query skipped: %s", q)
    text = format_tsv(results)
    if args.out:
        Path(args.out).write_bytes(text.encode("utf-8"))
        write_sidecar(args.out, "translate", {"model": args.model, "source": args.source,
                                              "target": args.target, "queries": args.queries},
                      _params(args), extra={"skipped": skipped})
    else:
        sys.stdout.write(text)


def _read_predictions(path) -> dict[str, list[str]]:
    preds: dict[str, list[tuple[int, str]]] = {}
    for lineno, line in enumerate(Path(path).read_bytes().decode("utf-8").splitlines(), 1):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise FormatError(f"{path}:{lineno}: expected query<TAB>rank<TAB>candidate<TAB>score",
                              record=lineno)
        try:
            rank = int(parts[1])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: bad rank {parts[1]!r}", record=lineno) from None
        preds.setdefault(parts[0], []).append((rank, parts[2]))
    return {q: [w for _, w in sorted(items)] for q, items in preds.items()}


def cmd_eval(args):
    _require(args, "test")
    _check_inputs(args.test)
    ks = parse_k_list(args.k)
    gold = load_test_dictionary(args.test)
    inputs = {"test": args.test}
    if args.predictions:
        _check_inputs(args.predictions)
        if args.vocab_size is None:
            raise UsageError("--vocab-size is required with --predictions")
        N = args.vocab_size
        predictions = _read_predictions(args.predictions)
        inputs["predictions"] = args.predictions
        grid = sorted(set(ks) | {rd_column(N, args.rd)})
    else:
        _require(args, "model", "source", "target")
        _check_inputs(args.model)
        source, target = _spaces(args)
        model = load_model(args.model)
        N = len(target)
        grid = default_trend_grid(ks, rd_column(N, args.rd))
        results, _ = translate_batch(list(gold.gold), model, source, TargetIndex(target),
                                     k=max(grid))
        predictions = {r.query: r.words for r in results}
        inputs.update(model=args.model, source=args.source, target=args.target)
    report = evaluate(predictions, gold, sorted(set(ks) | set(grid)), N, rd_target=args.rd,
                      oov_as_miss=args.oov_as_miss, label=args.label,
                      provenance={"seed": args.seed})
    trend = trend_export(report, grid)
    if args.out:
        Path(args.out).write_text(report.to_text(), encoding="utf-8")
        write_sidecar(args.out, "eval", inputs, _params(args), seed=args.seed)
    if args.trend:
        Path(args.trend).write_text(trend, encoding="utf-8")
        write_sidecar(args.trend, "eval", inputs, _params(args), seed=args.seed)
    if args.plot:
        from .plotting import plot_trend
        plot_trend({args.label or "induced": trend}, args.plot)
    sys.stdout.write(report.table_row(ks))


def _fixture_paths(name):
    root = resources.files("lexbridge") / "data" / name
    return {
        "corpus_b1": Path(str(root / "b1.txt")), "corpus_b2": Path(str(root / "b2.txt")),
        "target": Path(str(root / "en.vec")), "train_dict": Path(str(root / "train.tsv")),
        "test_dict": Path(str(root / "test.tsv")),
    }


def cmd_pipeline(args):
    sources = {}
    if args.fixture:
        sources = _fixture_paths(args.fixture)
    for key in ("corpus_b1", "corpus_b2", "target", "train_dict", "test_dict"):
        if getattr(args, key) is not None:
            sources[key] = Path(getattr(args, key))
    missing = [k for k in ("corpus_b1", "corpus_b2", "target", "train_dict", "test_dict")
               if k not in sources]
    if missing:
        raise UsageError("missing required option(s): " +
                         ", ".join("--" + k.replace("_", "-") for k in missing))
    _require(args, "outdir")
    cfg = RunConfig(
        **sources, target_format=args.target_format,
        label_b1=args.label_b1, label_b2=args.label_b2, phi=args.phi, pi=args.pi,
        lam=args.lam, sgns=_sgns_config(args, 0), ks=parse_k_list(args.k), rd=args.rd,
        oov_as_miss=args.oov_as_miss, drop_numeric=args.drop_numeric, seed=args.seed,
        label=args.label, plot=args.plot)
    result = run_pipeline(cfg, args.outdir)
    sys.stdout.write(result["report"].table_row(cfg.ks))


# -- parser ------------------------------------------------------------------

def _add_sgns(p):
    d = SgnsConfig()
    p.add_argument("--dim", type=int, default=d.dim)
    p.add_argument("--window", type=int, default=d.window)
    p.add_argument("--negatives", type=int, default=d.negatives)
    p.add_argument("--epochs", type=int, default=d.epochs)
    p.add_argument("--lr", type=float, default=d.initial_learning_rate,
                   help="initial learning rate, decays linearly to 1e-4")
    p.add_argument("--min-count", type=int, default=d.min_count)
    p.add_argument("--subsample", type=float, default=d.subsample_threshold,
                   help="subsampling threshold, 0 disables")
    p.add_argument("--workers", type=int, default=1,
                   help="training threads; >1 is non-deterministic")


def _add_spaces(p):
    p.add_argument("--source", help="source (low-resource) embeddings")
    p.add_argument("--target", help="target embeddings")
    p.add_argument("--source-format", choices=FORMATS, default="binary")
    p.add_argument("--target-format", choices=FORMATS, default="text")


def _add_eval_flags(p):
    p.add_argument("--k", default="1,5,10", help="comma-separated k values")
    p.add_argument("--rd", type=float, default=0.10,
                   help="random-chance precision defining the RD column")
    p.add_argument("--oov-as-miss", type=_bool_arg, nargs="?", const=True, default=False)
    p.add_argument("--label", default="")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key=value file supplying option defaults")
    common.add_argument("--seed", type=int, default=None,
                        help="global seed (default: $LEXBRIDGE_SEED or 0)")
    common.add_argument("--log-level", default="WARNING")

    parser = _Parser(prog="lexbridge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"lexbridge {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("vocab", parents=[common], help="tokenize a corpus and export its lexicon")
    p.add_argument("--corpus")
    p.add_argument("--label")
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--drop-numeric", type=_bool_arg, nargs="?", const=True, default=False)
    p.add_argument("--out")
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("overlap", parents=[common], help="vocabulary intersection of two lexicons")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--label-a")
    p.add_argument("--label-b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("candidates", parents=[common], help="edit-distance candidate sets")
    p.add_argument("--lex-b2", help="lexicon of the language to rewrite")
    p.add_argument("--lex-b1", help="lexicon of the labeled related language")
    p.add_argument("--phi", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_candidates)

    p = sub.add_parser("rewrite", parents=[common], help="probabilistic corpus rewriting")
    p.add_argument("--corpus")
    p.add_argument("--candidates")
    p.add_argument("--phi", type=int, default=1, help="threshold the candidates were built with")
    p.add_argument("--pi", type=float, default=0.5)
    p.add_argument("--label")
    p.add_argument("--out")
    p.add_argument("--stats", help="statistics file (default: <out>.stats)")
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("concat", parents=[common], help="concatenate two corpora")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--out")
    p.set_defaults(func=cmd_concat)

    p = sub.add_parser("train", parents=[common], help="train skip-gram vectors")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--format", choices=FORMATS, default="binary")
    _add_sgns(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("convert", parents=[common], help="convert embedding file formats")
    p.add_argument("--input")
    p.add_argument("--in-format", choices=FORMATS, default="text")
    p.add_argument("--out")
    p.add_argument("--out-format", "--format", dest="out_format", choices=FORMATS,
                   default="binary")
    p.add_argument("--normalize", type=_bool_arg, nargs="?", const=True, default=False)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("learn", parents=[common], help="fit the projection matrix")
    _add_spaces(p)
    p.add_argument("--dict", help="seed dictionary TSV source<TAB>target")
    p.add_argument("--lambda", dest="lam", type=_lambda_arg, default=1.0,
                   help="ridge weight, or 'auto' for a held-out grid search")
    p.add_argument("--out")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("translate", parents=[common], help="top-k translations")
    _add_spaces(p)
    p.add_argument("--model")
    p.add_argument("--queries", help="one query per line (first TSV column)")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("eval", parents=[common], help="precision@k report")
    _add_spaces(p)
    p.add_argument("--model")
    p.add_argument("--test", help="test dictionary TSV")
    p.add_argument("--predictions", help="translate output instead of --model")
    p.add_argument("--vocab-size", type=int, help="target vocabulary size for --predictions")
    _add_eval_flags(p)
    p.add_argument("--out", help="report file")
    p.add_argument("--trend", help="trend CSV")
    p.add_argument("--plot", help="trend figure (PNG/PDF/SVG by extension)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", parents=[common], help="run the full transfer recipe")
    p.add_argument("--fixture", choices=FIXTURES, help="use a bundled synthetic fixture")
    p.add_argument("--corpus-b1", help="corpus of the labeled language")
    p.add_argument("--corpus-b2", help="corpus of the unlabeled language")
    p.add_argument("--target", help="target embeddings")
    p.add_argument("--target-format", choices=FORMATS, default="text")
    p.add_argument("--train-dict", help="seed dictionary B1<TAB>target")
    p.add_argument("--test-dict", help="test dictionary B2<TAB>target")
    p.add_argument("--label-b1", default="B1")
    p.add_argument("--label-b2", default="B2")
    p.add_argument("--phi", type=int, default=1)
    p.add_argument("--pi", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", type=_lambda_arg, default=1.0)
    p.add_argument("--drop-numeric", type=_bool_arg, nargs="?", const=True, default=False)
    _add_sgns(p)
    _add_eval_flags(p)
    p.add_argument("--plot", type=_bool_arg, nargs="?", const=True, default=False,
                   help="also render trend.png")
    p.add_argument("--outdir")
    p.set_defaults(func=cmd_pipeline)
    return parser


def _load_config(path) -> dict[str, str]:
    if not Path(path).is_file():
        raise FileNotFoundError(f"config file {path} does not exist")
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _apply_config(parser, argv, sub_parsers):
    """Parse ``argv``; values from ``--config`` act as defaults under explicit flags."""
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sp = sub_parsers[args.command]
        known = {a.dest: a for a in sp._actions}
        cfg = _load_config(args.config)
        aliases = {"lambda": "lam"}
        defaults = {}
        for key, value in cfg.items():
            dest = aliases.get(key, key)
            if dest not in known or dest in ("config", "help"):
                raise ConfigError(f"unknown config key {key!r} for '{args.command}'")
            action = known[dest]
            if action.type is not None:
                try:
                    defaults[dest] = action.type(value)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise ConfigError(f"config key {key!r}: {exc}") from None
            else:
                defaults[dest] = value
            if action.choices is not None and defaults[dest] not in action.choices:
                raise ConfigError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    sub_parsers = next(a for a in parser._actions
                       if isinstance(a, argparse._SubParsersAction)).choices
    try:
        args = _apply_config(parser, argv, sub_parsers)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        logging.basicConfig(level=args.log_level.upper(),
                            format="%(levelname)s %(name)s: %(message)s")
        if args.seed is None:
            args.seed = default_seed()
        args.func(args)
    except UsageError as exc:
        return _fail("usage", EXIT_USAGE, str(exc))
    except FileNotFoundError as exc:
        return _fail("missing_file", EXIT_MISSING, str(exc))
    except LexbridgeError as exc:
        return _fail(exc.code, exc.exit_code, str(exc))
    except ValueError as exc:
        return _fail("config", ConfigError.exit_code, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Run configuration, seed derivation, provenance and the end-to-end recipe.

The recipe induces a dictionary for an unlabeled language B2 from a seed
dictionary of a related language B1: candidates, rewrite, concat, train,
learn, translate, eval. Every stage writes its artifact into the run
directory together with a ``.prov.json`` sidecar.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .corpus import build_lexicon, read_corpus, write_corpus, write_lexicon
from .embeddings import SgnsConfig, load_embeddings, normalize, save_embeddings, train_sgns
from .errors import ConfigError
from .evaluation import evaluate, load_test_dictionary, rd_column, trend_export
from .lexmatch import (RewriteConfig, build_candidate_map, concat_corpora, rewrite_corpus,
                       write_candidate_map)
from .projection import fit, load_dictionary, save_model, select_lambda
from .retrieval import TargetIndex, TranslationCandidates, format_tsv, translate_batch

log = logging.getLogger(__name__)

SEED_ENV = "LEXBRIDGE_SEED"


def stage_seed(global_seed: int, stage: str) -> int:
    """Per-stage 64-bit seed: the first 8 bytes (little endian) of
    SHA-256 of ``"lexbridge:<global_seed>:<stage>"``."""
    digest = hashlib.sha256(f"lexbridge:{global_seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_sidecar(output: str | Path, command: str, inputs: dict, parameters: dict,
                  seed: int | None = None, extra: dict | None = None) -> Path:
    """Record what produced ``output``: input digests, parameters, seed, version."""
    prov = {
        "command": command,
        "toolkit_version": __version__,
        "output": str(output),
        "output_sha256": file_digest(output),
        "inputs": {role: {"path": str(p), "sha256": file_digest(p)}
                   for role, p in sorted(inputs.items()) if p is not None},
        "parameters": parameters,
        "seed": seed,
    }
    if extra:
        prov.update(extra)
    side = Path(str(output) + ".prov.json")
    side.write_text(json.dumps(prov, indent=2, sort_keys=True, default=str) + "\n",
                    encoding="utf-8")
    return side


def parse_k_list(text) -> list[int]:
    if isinstance(text, (list, tuple)):
        return [int(k) for k in text]
    try:
        ks = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad k list {text!r}") from None
    if not ks or any(k < 1 for k in ks):
        raise ConfigError(f"k values must be positive integers, got {text!r}")
    return sorted(set(ks))


def default_trend_grid(ks, rd_k: int) -> list[int]:
    grid = set(ks) | {rd_k}
    base = 1
    while base <= rd_k:
        grid.update(v for v in (base, 2 * base, 5 * base) if v <= rd_k)
        base *= 10
    return sorted(grid)


@dataclass
class RunConfig:
    corpus_b1: Path
    corpus_b2: Path
    target: Path
    train_dict: Path
    test_dict: Path
    target_format: str = "text"
    label_b1: str = "B1"
    label_b2: str = "B2"
    phi: int = 1
    pi: float = 0.5
    lam: float | str = 1.0
    sgns: SgnsConfig = field(default_factory=SgnsConfig)
    ks: list[int] = field(default_factory=lambda: [1, 5, 10])
    rd: float = 0.10
    oov_as_miss: bool = False
    drop_numeric: bool = False
    seed: int = 0
    label: str = ""
    plot: bool = False

    def validate(self):
        for name in ("corpus_b1", "corpus_b2", "target", "train_dict", "test_dict"):
            p = Path(getattr(self, name))
            if not p.is_file():
                raise FileNotFoundError(f"{name}: {p} does not exist")
        if self.phi < 0:
            raise ConfigError("phi must be >= 0")
        if not 0 <= self.pi <= 1:
            raise ConfigError("pi must lie in [0, 1]")
        if self.lam != "auto" and (not isinstance(self.lam, (int, float)) or self.lam < 0
                                   or not math.isfinite(self.lam)):
            raise ConfigError("lambda must be a nonnegative number or 'auto'")
        if not 0 < self.rd <= 1:
            raise ConfigError("rd must lie in (0, 1]")
        if self.target_format not in ("text", "binary"):
            raise ConfigError("target_format must be text or binary")


def run_pipeline(cfg: RunConfig, outdir: str | Path) -> dict:
    """Execute the full recipe and return the artifact paths and the report."""
    cfg.validate()
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    seeds = {s: stage_seed(cfg.seed, s) for s in ("rewrite", "train", "lambda")}
    paths = {}

    b1 = read_corpus(cfg.corpus_b1, label=cfg.label_b1, drop_numeric=cfg.drop_numeric)
    b2 = read_corpus(cfg.corpus_b2, label=cfg.label_b2, drop_numeric=cfg.drop_numeric)
    lex_b1, lex_b2 = build_lexicon(b1), build_lexicon(b2)
    for tag, lex, src in (("b1", lex_b1, cfg.corpus_b1), ("b2", lex_b2, cfg.corpus_b2)):
        p = paths[f"lexicon_{tag}"] = out / f"lexicon_{tag}.tsv"
        write_lexicon(lex, p)
        write_sidecar(p, "vocab", {"corpus": src}, {"min_count": 1})

    cmap = build_candidate_map(lex_b2, lex_b1, cfg.phi)
    p = paths["candidates"] = out / "candidates.tsv"
    write_candidate_map(cmap, p)
    write_sidecar(p, "candidates", {"lex_b2": paths["lexicon_b2"], "lex_b1": paths["lexicon_b1"]},
                  {"phi": cfg.phi})

    rewritten, stats = rewrite_corpus(b2, cmap, RewriteConfig(cfg.pi, seeds["rewrite"]))
    p = paths["rewritten"] = out / "rewritten_b2.txt"
    write_corpus(rewritten, p)
    (out / "rewrite_stats.txt").write_text(stats.to_text(), encoding="utf-8")
    write_sidecar(p, "rewrite", {"corpus": cfg.corpus_b2, "candidates": paths["candidates"]},
                  {"pi": cfg.pi, "phi": cfg.phi}, seed=cfg.seed,
                  extra={"stage_seed": seeds["rewrite"]})

    joint = concat_corpora(b1, rewritten)
    p = paths["joint"] = out / "joint.txt"
    write_corpus(joint, p)
    write_sidecar(p, "concat", {"a": cfg.corpus_b1, "b": paths["rewritten"]},
                  {"label": joint.label})

    sgns = SgnsConfig(**{**asdict(cfg.sgns), "seed": seeds["train"]})
    space = train_sgns(joint, sgns)
    p = paths["source_vectors"] = out / "source.bin"
    save_embeddings(space, p, "binary")
    write_sidecar(p, "train", {"corpus": paths["joint"]}, asdict(sgns), seed=cfg.seed,
                  extra={"stage_seed": seeds["train"], "loss_history": space.meta["loss_history"],
                         "deterministic": space.meta["deterministic"]})

    source = normalize(space)
    target = normalize(load_embeddings(cfg.target, cfg.target_format))
    seed_dict = load_dictionary(cfg.train_dict, source, target)
    lam = cfg.lam
    lam_scores = None
    if lam == "auto":
        lam, lam_scores = select_lambda(seed_dict, source, target, seed=seeds["lambda"])
    model = fit(seed_dict, source, target, float(lam))
    p = paths["model"] = out / "model.txt"
    save_model(model, p)
    write_sidecar(p, "learn", {"source": paths["source_vectors"], "target": cfg.target,
                               "dict": cfg.train_dict},
                  {"lambda": cfg.lam, "lambda_used": float(lam), "lambda_scores": lam_scores},
                  seed=cfg.seed, extra={"fit_report": model.fit_report,
                                        "skipped_pairs": len(seed_dict.skipped)})

    gold = load_test_dictionary(cfg.test_dict)
    N = len(target)
    rd_k = rd_column(N, cfg.rd)
    grid = default_trend_grid(cfg.ks, rd_k)
    depth = max(grid)
    index = TargetIndex(target)
    results, oov = translate_batch(list(gold.gold), model, source, index, k=depth)
    p = paths["translations"] = out / "translations.tsv"
    p.write_bytes(format_tsv([_truncate(r, max(cfg.ks)) for r in results]).encode("utf-8"))
    write_sidecar(p, "translate", {"model": paths["model"], "test": cfg.test_dict},
                  {"k": max(cfg.ks)}, extra={"oov": oov})

    provenance = {
        "label_b1": b1.label, "label_b2": b2.label, "phi": cfg.phi, "pi": cfg.pi,
        "lambda": cfg.lam, "lambda_used": float(lam), "seed": cfg.seed,
        "seed.rewrite": seeds["rewrite"], "seed.train": seeds["train"],
        "seed.lambda": seeds["lambda"],
        "tokens_b1": b1.token_count, "tokens_b2": b2.token_count,
        "vocab_b1": lex_b1.size, "vocab_b2": lex_b2.size,
        "rewrite.eligible": stats.eligible, "rewrite.replaced": stats.replaced,
        "rewrite.distinct_words_touched": stats.distinct_words_touched,
        "dict.m": seed_dict.m, "dict.skipped": len(seed_dict.skipped),
        "fit.residual": f"{model.fit_report['residual']:.6f}",
        "toolkit_version": __version__,
    }
    provenance.update({f"sgns.{k}": v for k, v in asdict(sgns).items()})
    predictions = {r.query: r.words for r in results}
    report = evaluate(predictions, gold, sorted(set(cfg.ks) | set(grid)), N, rd_target=cfg.rd,
                      oov_as_miss=cfg.oov_as_miss,
                      label=cfg.label or f"{cfg.label_b2}({b1.label}-R)", provenance=provenance)
    p = paths["report"] = out / "report.txt"
    p.write_text(report.to_text(), encoding="utf-8")
    write_sidecar(p, "eval", {"translations": paths["translations"], "test": cfg.test_dict},
                  {"k": cfg.ks, "rd": cfg.rd, "oov_as_miss": cfg.oov_as_miss})
    trend = trend_export(report, grid)
    p = paths["trend"] = out / "trend.csv"
    p.write_text(trend, encoding="utf-8")
    if cfg.plot:
        from .plotting import plot_trend
        p = paths["figure"] = out / "trend.png"
        plot_trend({report.label: trend}, p, title="precision at top-k")
    return {"paths": paths, "report": report, "rewrite_stats": stats, "oov": oov}


def _truncate(result, k):
    return TranslationCandidates(result.query, result.ranked[:k])

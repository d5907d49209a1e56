"""Command-line entry point: one binary, one subcommand per pipeline stage.

Configuration precedence, lowest to highest: config file (simple
``key = value`` lines), command-line flags, then the AI_EMBED_URL and
AI_METADATA_URL environment variables for provider endpoints. Every artifact
carries a provenance block of the fully resolved run configuration, so equal
provenance implies byte-identical artifacts under the mock providers.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass

from . import evaluation, mockserver
from .assigner import AssignmentParams, assign_corpus, load_predictions, save_predictions
from .corpus import Corpus, SplitSpec, default_stopwords, ingest, load_stopwords, split
from .evaluation import AnnotationStore, annotate, evaluate, write_csv
from .extraction import (
    ExtractionParams,
    extract_keywords,
    load_keyword_sets,
    save_keyword_sets,
)
from .labelspace import ClusterParams, LabelSpace, generate_label_space
from .providers import ProviderConfig, make_providers
from .spacemetrics import coverage, document_matrices, redundancy

logger = logging.getLogger("labelkit")


class _JsonLineFormatter(logging.Formatter):
    def format(self, record):
        return json.dumps({
            "level": record.levelname.lower(),
            "logger": record.name,
            "message": record.getMessage(),
        })


def _setup_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonLineFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(getattr(logging, level.upper(), logging.INFO))


def load_config_file(path) -> dict:
    """Parse a flat ``key = value`` config file; '#' starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            values[key.strip()] = value.strip().strip("\"'")
    return values


@dataclass
class RunConfig:
    """Fully resolved configuration, serialized into artifact provenance."""

    providers: ProviderConfig
    extraction: ExtractionParams
    cluster: ClusterParams | None
    assignment: AssignmentParams | None
    seed: int

    def provenance(self, corpus_hash: str | None = None) -> dict:
        block = {
            "providers": {
                "embed_endpoint": self.providers.embed_endpoint,
                "metadata_endpoint": self.providers.metadata_endpoint,
            },
            "extraction": asdict(self.extraction),
            "cluster": asdict(self.cluster) if self.cluster else None,
            "assignment": asdict(self.assignment) if self.assignment else None,
            "seed": self.seed,
        }
        if corpus_hash is not None:
            block["corpus_hash"] = corpus_hash
        return block


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--embed-url", help="embedding endpoint or 'mock'")
    parser.add_argument("--metadata-url", help="metadata endpoint or 'mock'")
    parser.add_argument("--providers", choices=["mock"],
                        help="shortcut: force both endpoints to the offline mocks")
    parser.add_argument("--cache", help="embedding cache file")
    parser.add_argument("--timeout", type=float)
    parser.add_argument("--retries", type=int)
    parser.add_argument("--log-level", default="info")


def _add_extraction_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--keywords", type=int, help="keywords per document")
    parser.add_argument("--pool", type=int, help="candidate pool size")
    parser.add_argument("--max-ngram", type=int)
    parser.add_argument("--lambda", dest="mmr_lambda", type=float)
    parser.add_argument("--metadata", choices=["on", "off"],
                        help="enrich keywords with generated metadata")
    parser.add_argument("--query-on-raw", action="store_true",
                        help="use the raw abstract, not the preprocessed text, "
                             "as the MMR query")
    parser.add_argument("--stopwords", help="domain stopword file")


def _resolve(flag_value, config: dict, key: str, convert, default):
    if flag_value is not None:
        return flag_value
    if key in config:
        return convert(config[key])
    return default


def _build_run_config(args, need_cluster: bool = False,
                      need_assignment: bool = False) -> RunConfig:
    config = load_config_file(args.config) if getattr(args, "config", None) else {}
    embed_url = _resolve(getattr(args, "embed_url", None), config, "embed_url", str, "mock")
    metadata_url = _resolve(getattr(args, "metadata_url", None), config, "metadata_url", str, "mock")
    if getattr(args, "providers", None) == "mock":
        embed_url = metadata_url = "mock"
    provider_config = ProviderConfig(
        embed_endpoint=embed_url,
        metadata_endpoint=metadata_url,
        timeout=_resolve(getattr(args, "timeout", None), config, "timeout", float, 30.0),
        retry_count=_resolve(getattr(args, "retries", None), config, "retries", int, 2),
        cache_path=_resolve(getattr(args, "cache", None), config, "cache", str, None),
    )
    extraction = ExtractionParams(
        keyword_count=_resolve(getattr(args, "keywords", None), config, "keywords", int, 5),
        candidate_pool=_resolve(getattr(args, "pool", None), config, "pool", int, 10),
        max_ngram=_resolve(getattr(args, "max_ngram", None), config, "max_ngram", int, 3),
        mmr_lambda=_resolve(getattr(args, "mmr_lambda", None), config, "lambda", float, 0.7),
        enrich=_resolve(getattr(args, "metadata", None), config, "metadata", str, "on") == "on",
        query_on_raw=bool(getattr(args, "query_on_raw", False)),
    )
    seed = _resolve(getattr(args, "seed", None), config, "seed", int, 42)
    cluster = None
    if need_cluster:
        cluster = ClusterParams(
            k=_resolve(getattr(args, "k", None), config, "k", int, 15),
            seed=seed,
            max_iters=_resolve(getattr(args, "max_iters", None), config, "max_iters", int, 300),
            tol=_resolve(getattr(args, "tol", None), config, "tol", float, 1e-6),
            restarts=_resolve(getattr(args, "restarts", None), config, "restarts", int, 8),
        )
    assignment = None
    if need_assignment:
        assignment = AssignmentParams(
            threshold_percent=_resolve(getattr(args, "threshold", None), config,
                                       "threshold", float, 1.0),
            dedupe=not getattr(args, "no_dedupe", False),
        )
    return RunConfig(providers=provider_config, extraction=extraction,
                     cluster=cluster, assignment=assignment, seed=seed)


def _load_domain_stopwords(args) -> frozenset:
    path = getattr(args, "stopwords", None)
    return load_stopwords(path) if path else default_stopwords()


def _load_corpus(args) -> Corpus:
    return ingest(args.corpus, _load_domain_stopwords(args),
                  include_titles=getattr(args, "include_titles", False))


def _extract_all(corpus: Corpus, extraction: ExtractionParams, providers):
    keyword_sets = []
    skipped = 0
    for doc in corpus:
        if doc.is_empty:
            skipped += 1
            continue
        keyword_sets.append(extract_keywords(doc, extraction, providers))
    if skipped:
        logger.warning("skipped %d documents with empty preprocessed text", skipped)
    return keyword_sets


def _cmd_ingest(args) -> int:
    stopwords = load_stopwords(args.stopwords) if args.stopwords else default_stopwords()
    corpus = ingest(args.input, stopwords, include_titles=args.include_titles)
    corpus.save(args.out)
    logger.info("ingested %d documents -> %s", len(corpus), args.out)
    if args.test_out:
        spec = SplitSpec(seed=args.split_seed, test_fraction=args.test_fraction)
        train, test = split(corpus, spec)
        train.save(args.out)
        test.save(args.test_out)
        logger.info("split: %d train, %d test -> %s", len(train), len(test), args.test_out)
    return 0


def _cmd_extract(args) -> int:
    run = _build_run_config(args)
    corpus = _load_corpus(args)
    providers = make_providers(run.providers)
    keyword_sets = _extract_all(corpus, run.extraction, providers)
    save_keyword_sets(keyword_sets, args.out,
                      provenance=run.provenance(corpus.content_hash()))
    logger.info("extracted keywords for %d documents -> %s", len(keyword_sets), args.out)
    return 0


def _cmd_labelspace(args) -> int:
    run = _build_run_config(args, need_cluster=True)
    corpus = _load_corpus(args)
    providers = make_providers(run.providers)
    space = generate_label_space(corpus, run.extraction, run.cluster, providers)
    space.provenance.update(run.provenance(corpus.content_hash()))
    space.save(args.out)
    logger.info("generated %d labels -> %s", len(space), args.out)
    return 0


def _cmd_metrics(args) -> int:
    run = _build_run_config(args)
    space = LabelSpace.load(args.space)
    keyword_sets = load_keyword_sets(args.keywords_file)
    providers = make_providers(run.providers)
    matrices = document_matrices(keyword_sets, space, providers, run.extraction.enrich)
    red = redundancy(space)
    cov = coverage(matrices)
    names = space.names()
    report = {
        "redundancy": {
            "value": red.value,
            "argmax_pair": list(red.argmax_pair),
            "argmax_labels": [names[red.argmax_pair[0]], names[red.argmax_pair[1]]],
            "mean_offdiagonal_diagnostic": red.mean_offdiagonal,
        },
        "coverage": {
            "corpus": cov.corpus_value,
            "per_document": cov.per_document,
        },
        "provenance": run.provenance(),
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, ensure_ascii=False, indent=1)
        fh.write("\n")
    if args.emit_csv:
        k = len(space)
        write_csv(f"{args.emit_csv}_redundancy.csv", ["k", "R"], [(k, red.value)])
        write_csv(f"{args.emit_csv}_coverage.csv", ["k", "S"], [(k, cov.corpus_value)])
    logger.info("R=%.4f S=%.4f -> %s", red.value, cov.corpus_value, args.out)
    return 0


def _cmd_assign(args) -> int:
    run = _build_run_config(args, need_assignment=True)
    space = LabelSpace.load(args.space)
    keyword_sets = load_keyword_sets(args.keywords_file)
    providers = make_providers(run.providers)
    matrices = document_matrices(keyword_sets, space, providers, run.extraction.enrich)
    predictions = assign_corpus(matrices, space, run.assignment)
    save_predictions(predictions, args.out, provenance=run.provenance())
    logger.info("assigned labels for %d documents -> %s", len(predictions), args.out)
    return 0


def _cmd_annotate(args) -> int:
    space = LabelSpace.load(args.space)
    corpus = _load_corpus(args)
    store = AnnotationStore(args.store)
    added = annotate(corpus, space, store, annotator=args.annotator)
    logger.info("recorded %d annotations in %s", added, args.store)
    return 0


def _cmd_evaluate(args) -> int:
    predictions = load_predictions(args.predictions)
    store = AnnotationStore(args.annotations)
    if args.space:
        gold = store.for_space(LabelSpace.load(args.space).provenance_hash())
    else:
        gold = {}
        for ann in store.load():
            gold[ann.doc_id] = ann.label
    report = evaluate(predictions, gold, threshold_percent=args.threshold,
                      unlabeled=args.unlabeled)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, ensure_ascii=False, indent=1)
        fh.write("\n")
    logger.info("P=%.3f R=%.3f F1=%.3f -> %s", report.precision, report.recall,
                report.f1, args.out)
    return 0


def _parse_numbers(text: str, convert):
    return [convert(part) for part in text.split(",") if part.strip()]


def _store_annotate_fn(store: AnnotationStore):
    def annotate_fn(space, corpus):
        gold = store.for_space(space.provenance_hash())
        if not gold:
            raise evaluation.EvaluationError(
                f"no annotations found for space {space.provenance_hash()[:12]}; "
                "annotate this configuration first"
            )
        return gold
    return annotate_fn


def _cmd_sweep(args) -> int:
    run = _build_run_config(args, need_cluster=args.mode != "threshold",
                            need_assignment=True)
    providers = make_providers(run.providers)
    if args.mode == "k":
        corpus = _load_corpus(args)
        k_values = range(args.k_min, args.k_max + 1)
        rows = evaluation.sweep_k(corpus, run.extraction, run.cluster, k_values, providers)
        write_csv(f"{args.csv}_redundancy.csv", ["k", "R"], [(k, r) for k, r, _ in rows])
        write_csv(f"{args.csv}_coverage.csv", ["k", "S"], [(k, s) for k, _, s in rows])
        logger.info("swept k over %d values -> %s_{redundancy,coverage}.csv",
                    len(rows), args.csv)
        return 0

    thresholds = _parse_numbers(args.thresholds, float)
    if args.mode == "threshold":
        space = LabelSpace.load(args.space)
        keyword_sets = load_keyword_sets(args.keywords_file)
        store = AnnotationStore(args.annotations)
        gold = store.for_space(space.provenance_hash())
        by_t = evaluation.predictions_per_threshold(
            keyword_sets, space, providers, thresholds,
            include_metadata=run.extraction.enrich, dedupe=run.assignment.dedupe)
        rows = evaluation.sweep_threshold(by_t, gold, unlabeled=args.unlabeled)
        write_csv(args.csv, ["T", "precision", "recall", "f1"], rows)
    elif args.mode == "keywords":
        corpus = _load_corpus(args)
        store = AnnotationStore(args.annotations)
        c_values = range(args.c_min, args.c_max + 1)
        rows = evaluation.sweep_keywords(corpus, c_values, run.extraction, run.cluster,
                                         run.assignment, providers,
                                         _store_annotate_fn(store))
        write_csv(args.csv, ["c", "f1"], rows)
    else:  # ablation
        corpus = _load_corpus(args)
        store = AnnotationStore(args.annotations)
        rows = evaluation.ablate_metadata(corpus, run.extraction, run.cluster,
                                          thresholds, providers,
                                          _store_annotate_fn(store),
                                          dedupe=run.assignment.dedupe)
        write_csv(args.csv, ["T", "f1_with", "f1_without"], rows)
    logger.info("sweep %s -> %s", args.mode, args.csv)
    return 0


def _cmd_serve_mock(args) -> int:
    logger.info("serving mock providers on port %d", args.port)
    try:
        mockserver.serve(args.port)
    except OSError as exc:
        logger.error("cannot bind port %d: %s", args.port, exc)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelkit",
        description="Induce a coarse label space from short abstracts and assign labels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, preprocess and optionally split a corpus")
    p.add_argument("--input", required=True)
    p.add_argument("--stopwords")
    p.add_argument("--out", required=True)
    p.add_argument("--include-titles", action="store_true")
    p.add_argument("--test-out", help="also write a test split here")
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--split-seed", type=int, default=42)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("extract", help="extract keywords per document")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--include-titles", action="store_true")
    _add_extraction_flags(p)
    _add_provider_flags(p)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("labelspace", help="induce the label space")
    p.add_argument("--corpus", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--include-titles", action="store_true")
    _add_extraction_flags(p)
    _add_provider_flags(p)
    p.set_defaults(func=_cmd_labelspace)

    p = sub.add_parser("metrics", help="redundancy and coverage of a space")
    p.add_argument("--space", required=True)
    p.add_argument("--keywords", dest="keywords_file", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--emit-csv", help="stem for figure-shaped CSV rows")
    p.add_argument("--metadata", choices=["on", "off"])
    _add_provider_flags(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("assign", help="predict labels per document")
    p.add_argument("--space", required=True)
    p.add_argument("--keywords", dest="keywords_file", required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--no-dedupe", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--metadata", choices=["on", "off"])
    _add_provider_flags(p)
    p.set_defaults(func=_cmd_assign)

    p = sub.add_parser("annotate", help="interactively record gold labels")
    p.add_argument("--corpus", required=True)
    p.add_argument("--space", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--annotator", default="anonymous")
    p.add_argument("--stopwords")
    p.add_argument("--include-titles", action="store_true")
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("evaluate", help="score predictions against annotations")
    p.add_argument("--predictions", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--space", help="restrict annotations to this space")
    p.add_argument("--threshold", type=float)
    p.add_argument("--unlabeled", choices=["exclude", "count-as-miss"], default="exclude")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="parameter sweeps emitting figure-shaped CSVs")
    p.add_argument("mode", choices=["k", "threshold", "keywords", "ablation"])
    p.add_argument("--corpus")
    p.add_argument("--space")
    p.add_argument("--keywords-file", dest="keywords_file")
    p.add_argument("--annotations")
    p.add_argument("--csv", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--k-min", type=int, default=2)
    p.add_argument("--k-max", type=int, default=28)
    p.add_argument("--c-min", type=int, default=1)
    p.add_argument("--c-max", type=int, default=12)
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--thresholds", default="1,5,10,15,20")
    p.add_argument("--threshold", type=float)
    p.add_argument("--no-dedupe", action="store_true")
    p.add_argument("--unlabeled", choices=["exclude", "count-as-miss"], default="exclude")
    p.add_argument("--include-titles", action="store_true")
    _add_extraction_flags(p)
    _add_provider_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("serve-mock", help="serve the mock providers over HTTP")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(func=_cmd_serve_mock)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(getattr(args, "log_level", "info"))
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, AssertionError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return 1
    except Exception as exc:  # domain errors from any module
        if type(exc).__module__.startswith("labelkit"):
            logger.error("%s: %s", type(exc).__name__, exc)
            return 1
        raise


if __name__ == "__main__":
    sys.exit(main())

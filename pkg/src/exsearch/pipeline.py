"""Pipeline stages. Each stage reads and writes files under the output directory."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import random
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .analytics.evaluation import entities_from_corpus, evaluate_ner
from .analytics.reports import build_reports, write_bundle, write_reports
from .analytics.stats import cohens_kappa
from .config import PipelineConfig
from .crf.model import CrfModel
from .crf.optimize import NonFiniteObjective
from .crf.train import train
from .gazetteer import load_gazetteers
from .logs import filter_records, ingest, segment_sessions, session_index, write_records
from .tagger import Tagger, TaggedQuery, categorize_pl, read_tagged, write_tagged
from .weak_labels import (
    DEFAULT_RULES, Denylist, WeakLabel, apply_denylist, apply_rules, build_training_corpus,
    default_denylist_path, group_exceptions, load_rules, read_corpus, write_corpus,
)

log = logging.getLogger(__name__)

FILTERED = "filtered.jsonl"
WEAK_LABELS = "weak_labels.jsonl"
GROUPS = "exception_groups.csv"
CORPUS = "corpus.jsonl"
MODEL = "model.crf"
HELDOUT = "heldout.jsonl"
ANALYSIS = "analysis_filtered.jsonl"
TAGGED = "tagged.jsonl"
REPORTS = "reports"
MANIFEST = "manifest.json"


class StageError(RuntimeError):
    """A stage precondition that is a usage problem (exit status 1)."""


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise StageError(f"missing {path.name}: {hint}")
    return path


def _snapshot(cfg: PipelineConfig, stage: str) -> None:
    p = cfg.out / f"{stage}.config.json"
    p.write_text(json.dumps(cfg.snapshot(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def update_manifest(outdir: Path) -> Path:
    entries = {}
    for p in sorted(outdir.rglob("*")):
        if p.is_file() and p.name != MANIFEST:
            entries[p.relative_to(outdir).as_posix()] = "sha256:" + hashlib.sha256(p.read_bytes()).hexdigest()
    path = outdir / MANIFEST
    path.write_text(json.dumps(entries, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _load_records(path: str, fmt: str):
    res = ingest(path, fmt)
    for d in res.diagnostics[:20]:
        log.warning("%s:%s", path, d)
    return res


# -- stages -----------------------------------------------------------------


def stage_filter(cfg: PipelineConfig) -> list[Path]:
    res = _load_records(cfg.resolve(cfg.inputs.training), cfg.inputs.format)
    kept = filter_records(res.records, cfg.filter_config())
    out = cfg.out / FILTERED
    write_records(kept, out)
    log.info("filter: %d of %d records kept (%d malformed lines)", len(kept), len(res.records), res.skipped)
    return [out]


def stage_weak_label(cfg: PipelineConfig) -> list[Path]:
    records = ingest(_require(cfg.out / FILTERED, "run the filter stage first")).records
    rules = load_rules(cfg.resolve(cfg.labeling.rules)) if cfg.labeling.rules else DEFAULT_RULES
    denylist = Denylist.load(cfg.resolve(cfg.labeling.denylist) or default_denylist_path())
    labels = [lb for r in records if (lb := apply_rules(r.raw_query, r.record_id, rules)) is not None]
    kept = apply_denylist(labels, denylist)
    with open(cfg.out / WEAK_LABELS, "w", encoding="utf-8", newline="\n") as fh:
        for lb in kept:
            fh.write(json.dumps(lb.to_dict(), ensure_ascii=False) + "\n")
    with open(cfg.out / GROUPS, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["canonical_key", "query_count", "denied"])
        for g in group_exceptions(labels):
            w.writerow([g.canonical_key, g.query_count, int(g.canonical_key in denylist.rejected_keys)])
    log.info("weak-label: %d labels, %d after denylist", len(labels), len(kept))
    return [cfg.out / WEAK_LABELS, cfg.out / GROUPS]


def stage_build_corpus(cfg: PipelineConfig) -> list[Path]:
    records = ingest(_require(cfg.out / FILTERED, "run the filter stage first")).records
    with open(_require(cfg.out / WEAK_LABELS, "run the weak-label stage first"), encoding="utf-8") as fh:
        labels = [WeakLabel.from_dict(json.loads(line)) for line in fh if line.strip()]
    corpus = build_training_corpus(records, labels, cfg.labeling.negatives_ratio, cfg.seed)
    write_corpus(corpus, cfg.out / CORPUS)
    log.info("build-corpus: %d sequences", len(corpus))
    return [cfg.out / CORPUS]


def split_corpus(corpus: list, fraction: float, seed: int):
    idx = list(range(len(corpus)))
    random.Random(seed).shuffle(idx)
    n_hold = int(round(fraction * len(corpus)))
    hold = set(idx[:n_hold])
    return [s for i, s in enumerate(corpus) if i not in hold], [s for i, s in enumerate(corpus) if i in hold]


def stage_train(cfg: PipelineConfig) -> list[Path]:
    corpus = read_corpus(_require(cfg.out / CORPUS, "run the build-corpus stage first"))
    train_part, heldout = split_corpus(corpus, cfg.split.holdout_fraction, cfg.seed)
    try:
        model = train(train_part, cfg.feature_config(), cfg.train_config())
    except NonFiniteObjective as exc:
        dump = cfg.out / "nonfinite_iterate.json"
        dump.write_text(json.dumps(exc.iterate.tolist()) + "\n", encoding="utf-8")
        raise RuntimeError(f"{exc} (iterate written to {dump})") from exc
    checksum = model.save(cfg.out / MODEL)
    write_corpus(heldout, cfg.out / HELDOUT)
    log.info("train: %d sequences, %d iterations, model %s", len(train_part),
             model.train_meta["n_iterations"], checksum)
    return [cfg.out / MODEL, cfg.out / HELDOUT]


def stage_evaluate(cfg: PipelineConfig) -> list[Path]:
    model = CrfModel.load(_require(cfg.out / MODEL, "run the train stage first"))
    gold_path = cfg.resolve(cfg.inputs.annotated) if cfg.inputs.annotated else cfg.out / HELDOUT
    gold = read_corpus(_require(Path(gold_path), "run the train stage or set inputs.annotated"))
    gold_ents = entities_from_corpus(gold)
    pred_ents = entities_from_corpus(gold, lambda s: model.predict_tokens(list(s.tokens)))
    scores = evaluate_ner(gold_ents, pred_ents)
    result = {"n_sequences": len(gold), "classes": {}}
    with open(cfg.out / "evaluation.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["class", "precision", "recall", "f1", "support"])
        for name, row in scores.items():
            w.writerow([name, repr(row.precision), repr(row.recall), repr(row.f1), row.support])
            result["classes"][name] = {"precision": row.precision, "recall": row.recall,
                                       "f1": row.f1, "support": row.support}
    if cfg.inputs.annotated and cfg.inputs.annotated_b:
        other = {s.record_id: s for s in read_corpus(cfg.resolve(cfg.inputs.annotated_b))}
        a, b = [], []
        for s in gold:
            if s.record_id in other and len(other[s.record_id].tags) == len(s.tags):
                a.extend(s.tags)
                b.extend(other[s.record_id].tags)
        k = cohens_kappa(a, b)
        result["kappa"] = {"observed": k.observed, "expected": k.expected, "kappa": k.kappa, "n_tokens": len(a)}
    (cfg.out / "evaluation.json").write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    log.info("evaluate: macro F1 %.4f", scores["macro"].f1)
    return [cfg.out / "evaluation.csv", cfg.out / "evaluation.json"]


_WORKER_TAGGER = None


def _init_worker(model_text: str):
    global _WORKER_TAGGER
    _WORKER_TAGGER = Tagger(CrfModel.loads(model_text))


def _extract_chunk(texts: list[str]):
    return [_WORKER_TAGGER.extract(t) for t in texts]


def tag_all(model: CrfModel, records, sessions: dict[str, str], gazetteers, workers: int = 1) -> list[TaggedQuery]:
    """Tag records (order-preserving); distinct query texts are split across workers."""
    uniq = list(dict.fromkeys(r.raw_query for r in records))
    if workers > 1 and len(uniq) > 5000:
        size = -(-len(uniq) // (workers * 4))
        chunks = [uniq[i:i + size] for i in range(0, len(uniq), size)]
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(model.dumps(),)) as ex:
            results = [t for chunk in ex.map(_extract_chunk, chunks) for t in chunk]
        tags = dict(zip(uniq, results))
    else:
        tagger = Tagger(model, cache_size=0)
        tags = {q: tagger.extract(q) for q in uniq}
    out = []
    for rec in records:
        tag = tags[rec.raw_query]
        if tag is None:
            continue
        tq = TaggedQuery(rec, tag, None, sessions.get(rec.record_id))
        out.append(TaggedQuery(rec, tag, categorize_pl(tq, gazetteers), tq.session_id))
    return out


def stage_tag(cfg: PipelineConfig) -> list[Path]:
    model_path = cfg.out / MODEL
    if not model_path.exists():
        raise StageError(f"no model file at {model_path}; run the train stage first")
    model = CrfModel.load(model_path)
    res = _load_records(cfg.resolve(cfg.inputs.analysis), cfg.inputs.format)
    kept = filter_records(res.records, cfg.filter_config())
    sessions = session_index(segment_sessions(kept))
    gaz = load_gazetteers({k: cfg.resolve(v) for k, v in cfg.gazetteers.items() if v})
    tagged = tag_all(model, kept, sessions, gaz, cfg.n_workers())
    write_records(kept, cfg.out / ANALYSIS)
    write_tagged(tagged, cfg.out / TAGGED)
    log.info("tag: %d of %d filtered records carry an exception", len(tagged), len(kept))
    return [cfg.out / ANALYSIS, cfg.out / TAGGED]


def stage_analyze(cfg: PipelineConfig) -> list[Path]:
    records = ingest(_require(cfg.out / ANALYSIS, "run the tag stage first")).records
    tagged = read_tagged(_require(cfg.out / TAGGED, "run the tag stage first"),
                         {r.record_id: r for r in records})
    bundle = build_reports(tagged, cfg.metrics_config())
    for d in bundle.diagnostics[:20]:
        log.warning(d)
    paths = write_reports(bundle, cfg.out / REPORTS)
    log.info("analyze: %d exception rows over the session threshold",
             sum(1 for r in bundle.tables["popularity"] if r[0] == "overall"))
    return paths


def stage_report(cfg: PipelineConfig) -> list[Path]:
    _require(cfg.out / REPORTS / "popularity.csv", "run the analyze stage first")
    return [write_bundle(cfg.out / REPORTS, cfg.out / "report.json")]


STAGES = {
    "filter": stage_filter,
    "weak-label": stage_weak_label,
    "build-corpus": stage_build_corpus,
    "train": stage_train,
    "evaluate": stage_evaluate,
    "tag": stage_tag,
    "analyze": stage_analyze,
    "report": stage_report,
}


def run_stage(name: str, cfg: PipelineConfig) -> list[Path]:
    cfg.out.mkdir(parents=True, exist_ok=True)
    _snapshot(cfg, name)
    paths = STAGES[name](cfg)
    update_manifest(cfg.out)
    return paths


"""Time tagging + analysis over synthetic search logs.

    python scripts/throughput.py --records 1000000
"""

import argparse
import time

from exsearch.analytics.reports import build_reports
from exsearch.crf import train
from exsearch.gazetteer import load_gazetteers
from exsearch.logs import filter_records, segment_sessions, session_index
from exsearch.pipeline import tag_all
from exsearch.synthetic import synthetic_corpus, synthetic_logs


def run(n_records: int, seed: int = 0, workers: int = 1) -> dict:
    model = train(synthetic_corpus(2000, seed=seed))
    t0 = time.perf_counter()
    records = synthetic_logs(n_records, seed=seed + 1)
    t_gen = time.perf_counter() - t0

    t0 = time.perf_counter()
    kept = filter_records(records)
    sessions = session_index(segment_sessions(kept))
    tagged = tag_all(model, kept, sessions, load_gazetteers(), workers)
    t_tag = time.perf_counter() - t0
    t0 = time.perf_counter()
    bundle = build_reports(tagged)
    t_analyze = time.perf_counter() - t0
    total = t_tag + t_analyze
    return {
        "records": n_records,
        "filtered": len(kept),
        "unique_queries": len({r.raw_query for r in kept}),
        "tagged": len(tagged),
        "generate_s": t_gen,
        "tag_s": t_tag,
        "analyze_s": t_analyze,
        "total_s": total,
        "records_per_s": n_records / total,
        "report_rows": {k: len(v) for k, v in bundle.tables.items()},
    }


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--records", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    for k, v in run(args.records, args.seed, args.workers).items():
        print(f"{k}: {v}")

from .evaluation import ClassScores, entities_from_corpus, evaluate_ner, macro_average
from .metrics import (
    ExceptionStats, MetricsConfig, QueryMetrics, aggregate_exception_stats,
    compute_query_metrics, domain_popularity, frequent_queries, url_domain,
)
from .reports import REPORT_FILES, ReportBundle, build_reports, write_bundle, write_reports
from .stats import KappaResult, StatTestResult, cohens_kappa, kappa_from_table, welch_t_test

__all__ = [
    "ClassScores", "ExceptionStats", "KappaResult", "MetricsConfig", "QueryMetrics", "REPORT_FILES",
    "ReportBundle", "StatTestResult", "aggregate_exception_stats", "build_reports", "cohens_kappa",
    "compute_query_metrics", "domain_popularity", "entities_from_corpus", "evaluate_ner",
    "frequent_queries", "kappa_from_table", "macro_average", "url_domain", "welch_t_test",
    "write_bundle", "write_reports",
]

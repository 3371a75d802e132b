import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from exsearch.crf import train  # noqa: E402
from exsearch.logs import ClickEvent, SearchRecord  # noqa: E402
from exsearch.synthetic import synthetic_corpus  # noqa: E402

CORPUS_SEED = 7


@pytest.fixture(scope="session")
def synthetic_split():
    corpus = synthetic_corpus(2000, seed=CORPUS_SEED)
    cut = int(len(corpus) * 0.8)
    return corpus[:cut], corpus[cut:]


@pytest.fixture(scope="session")
def trained_model(synthetic_split):
    return train(synthetic_split[0])


def make_record(rid="r1", query="java.io.IOException help", clicks=(), client="c1", ts=0,
                locale="en-US", region="US"):
    """clicks: iterable of (url, dwell) in click order."""
    evs = tuple(ClickEvent(u, i + 1, d) for i, (u, d) in enumerate(clicks))
    return SearchRecord(rid, client, ts, query, locale, region, tuple(u for u, _ in clicks), evs)


@pytest.fixture
def record_factory():
    return make_record


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])

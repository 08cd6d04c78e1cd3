from __future__ import annotations

from pathlib import Path

import pytest

from ctxrec.corpus import Corpus, ingest_jsonl
from ctxrec.ctxsim import ContextConfig

DATA_DIR = Path(__file__).parent / "data"

MICRO_JSONL = DATA_DIR / "micro.jsonl"
MICRO_CONFIG = DATA_DIR / "micro_config.json"
WORD_VECTORS = DATA_DIR / "word_vectors.txt"
PAIRS_JSONL = DATA_DIR / "pairs.jsonl"


@pytest.fixture()
def micro_corpus() -> Corpus:
    corpus, _ = ingest_jsonl(MICRO_JSONL)
    return corpus


@pytest.fixture()
def micro_config() -> ContextConfig:
    return ContextConfig.load(MICRO_CONFIG)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of a run."""
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid and report.when == "call":
                name = report.nodeid.split("::")[-1]
                lines.append((name, "PASS" if report.passed else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")

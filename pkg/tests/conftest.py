import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from trustlens import LabelSpace, PredictionRecord, ScoredTable, TrustParams  # noqa: E402

DATA = Path(__file__).parent / "data"

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def data_dir() -> Path:
    return DATA


@st.composite
def scored_tables(draw, max_records=60, max_classes=8, min_records=1):
    """Random (labels, table) pairs built from actor/oracle/confidence columns."""
    k = draw(st.integers(2, max_classes))
    n = draw(st.integers(min_records, max_records))
    actor = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    oracle = draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n))
    conf = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
    alpha = draw(st.sampled_from([0.5, 1.0, 2.0, 3.7]))
    beta = draw(st.sampled_from([0.5, 1.0, 2.0, 0.25]))
    table = ScoredTable.from_columns(
        np.array(actor, dtype=np.int64), np.array(oracle, dtype=np.int64), np.array(conf), TrustParams(alpha, beta)
    )
    return LabelSpace.of_size(k), table


def one_hot_record(rid: str, actor: int, oracle: int, k: int, confidence: float = 0.9) -> PredictionRecord:
    rest = (1.0 - confidence) / (k - 1)
    vec = tuple(confidence if i == actor else rest for i in range(k))
    return PredictionRecord(rid, vec, oracle)


# criterion number -> (passed, one-line detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")

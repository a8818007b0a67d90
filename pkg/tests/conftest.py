from __future__ import annotations

import warnings

import pytest

from patternbench.engine import MiningEngine, Session
from patternbench.sample import (
    SAMPLE_SESSION_ID,
    apply_sample_curation,
    make_sample_engine,
    run_sample_pipeline,
)

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient  # noqa: F401  (imported for reuse)


def _fixed_clock():
    # deterministic timestamps keep goldens and round-trip comparisons stable
    counter = {"n": 0}

    def clock() -> str:
        counter["n"] += 1
        return f"2024-01-01T00:{counter['n'] // 60:02d}:{counter['n'] % 60:02d}+00:00"

    return clock


@pytest.fixture(scope="session")
def sample_engine() -> MiningEngine:
    return make_sample_engine(_fixed_clock())


@pytest.fixture(scope="session")
def pipeline_session(sample_engine: MiningEngine) -> Session:
    """The replayed run right after the last step, before any curation."""
    return run_sample_pipeline(sample_engine, SAMPLE_SESSION_ID)


@pytest.fixture(scope="session")
def demo_session(sample_engine: MiningEngine, pipeline_session: Session) -> Session:
    """The replayed run after the full curation pass."""
    return apply_sample_curation(sample_engine, pipeline_session)

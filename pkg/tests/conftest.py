"""Shared fixtures; the desk-scale sweep payloads are session-scoped so the
expensive runs happen at most once per pytest session."""

from pathlib import Path

import pytest

from shearfront import acceptance

ACCEPTANCE_OUT = Path(__file__).resolve().parent.parent / "out" / "acceptance"


@pytest.fixture(scope="session")
def acceptance_out() -> Path:
    ACCEPTANCE_OUT.mkdir(parents=True, exist_ok=True)
    return ACCEPTANCE_OUT


@pytest.fixture(scope="session")
def delta_sweep_rows():
    return acceptance.run_delta_sweep_desk()


@pytest.fixture(scope="session")
def alpha_sweep_rows():
    return acceptance.run_alpha_sweep_desk()


@pytest.fixture(scope="session")
def variance_trace():
    return acceptance.run_variance_desk()

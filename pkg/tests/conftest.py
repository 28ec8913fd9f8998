"""Shared fixtures plus the acceptance summary hook.

Tests marked `criterion("<name>")` feed a one-line PASS/FAIL report per
criterion printed after the run; a criterion passes only if every test
carrying its marker passed.
"""
from __future__ import annotations

import shutil

import pytest

from converge.corpus import fixture_path, load_fixture
from converge.pipeline import PipelineConfig, run_pipeline

_CRITERIA: dict[str, bool] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion this test verifies")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    _CRITERIA[name] = _CRITERIA.get(name, True) and report.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, ok in _CRITERIA.items():
        terminalreporter.write_line(f"[ACCEPTANCE] {'PASS' if ok else 'FAIL'} {name}")


@pytest.fixture(scope="session")
def water11_corpus():
    return load_fixture("corpus_water11")


@pytest.fixture(scope="session")
def planted_corpus():
    return load_fixture("corpus_planted")


@pytest.fixture(scope="session")
def water11_bundle(tmp_path_factory):
    """One full pipeline run over the bundled 11-presentation corpus."""
    out = tmp_path_factory.mktemp("water11_bundle")
    run_pipeline(PipelineConfig.make(seed=42), fixture_path("corpus_water11"), out)
    return out


@pytest.fixture(scope="session")
def planted_bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("planted_bundle")
    run_pipeline(PipelineConfig.make(seed=42), fixture_path("corpus_planted"), out)
    return out


@pytest.fixture()
def bundle_copy(water11_bundle, tmp_path):
    """Writable clone for tests that mutate bundle artifacts."""
    dst = tmp_path / "bundle"
    shutil.copytree(water11_bundle, dst)
    return dst

"""Test the invariant suites."""

import pytest

from quartic.verify import CheckResult, format_table, verify


def _failures(results):
    return [(r.name, r.detail) for r in results if not r.passed]


def test_unknown_suite():
    """Test that unknown suites are rejected."""
    with pytest.raises(ValueError):
        verify("everything")


def test_format_table():
    """Test the header and one row per result."""
    table = format_table(
        [CheckResult("kernels", "a", True, "ok"), CheckResult("kernels", "b", False, "gap 1")]
    )
    lines = table.splitlines()
    assert lines[0].split() == ["suite", "check", "status", "detail"]
    assert lines[1].split()[:3] == ["kernels", "a", "pass"]
    assert lines[2].split()[:3] == ["kernels", "b", "FAIL"]


def test_oscillatory_suite():
    """Test that the oscillatory invariants hold."""
    results = verify("oscillatory")
    assert [r.suite for r in results] == ["oscillatory"] * 4
    assert _failures(results) == []


@pytest.mark.slow
def test_threshold_suite():
    """Test that the threshold invariants hold at the tuned resonance."""
    results = verify("threshold")
    assert "setup" not in [r.name for r in results]
    assert _failures(results) == []


@pytest.mark.slow
def test_threshold_suite_with_loose_kernel_tolerance():
    """Test that an oversized kernel tolerance is reported as broken projections."""
    results = {r.name: r for r in verify("threshold", ker_tol=1e3)}
    algebra = results["projection algebra"]
    assert not algebra.passed
    assert algebra.detail.startswith("violated:")
    assert "QTQ S1" in algebra.detail
    assert not results["first-kind classification"].passed

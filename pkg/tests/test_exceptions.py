"""Test the exceptions module."""

import math

import pytest

from quartic.exceptions import (
    ConfigError,
    DiagonalSingularityError,
    DomainError,
    ExtractionError,
    NearSingularError,
    QuarticError,
    exit_code_for,
    raise_error_from_residual,
)


def test_raise_error_from_residual_within_tolerance():
    """Test that a small residual is returned."""
    assert raise_error_from_residual(1e-12, 1e-8) == 1e-12


def test_raise_error_from_residual_above_tolerance():
    """Test the default error class and the attached context."""
    with pytest.raises(NearSingularError) as err:
        raise_error_from_residual(1e-3, 1e-8, stage="invert", **{"lambda": 0.25})
    assert err.value.stage == "invert"
    assert err.value.context["lambda"] == 0.25
    assert err.value.context["residual"] == 1e-3
    assert str(err.value).startswith("invert: residual 1.000e-03 exceeds tolerance 1.0e-08")
    assert "lambda=0.25" in str(err.value)


def test_raise_error_from_residual_not_finite():
    """Test that a NaN residual is never accepted."""
    with pytest.raises(ExtractionError):
        raise_error_from_residual(math.nan, 1.0, error=ExtractionError)


def test_error_str_without_stage():
    """Test the string form of an error without a stage."""
    assert str(QuarticError("plain")) == "plain"
    assert str(QuarticError("boom", stage="tune")) == "tune: boom"


def test_error_hierarchy():
    """Test the exception hierarchy."""
    assert issubclass(DiagonalSingularityError, DomainError)
    assert issubclass(DomainError, QuarticError)
    assert issubclass(ConfigError, QuarticError)


def test_exit_codes():
    """Test the exit code of configuration and numerical failures."""
    assert exit_code_for(ConfigError("bad")) == 2
    assert exit_code_for(NearSingularError("bad")) == 1
    assert exit_code_for(QuarticError("bad")) == 1

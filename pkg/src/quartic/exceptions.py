# -*- coding: utf-8 -*-
#
# The MIT License (MIT)
#
# Copyright (C) 2026 The quartic-dispersion contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of
# this software and associated documentation files (the "Software"), to deal in
# the Software without restriction, including without limitation the rights to
# use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of
# the Software, and to permit persons to whom the Software is furnished to do so,
# subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS
# FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR
# COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER
# IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN
# CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

"""Quartic dispersion custom exceptions module."""


class QuarticError(Exception):
    """Base class for custom quartic-dispersion errors.

    :param error_message: The error message
    :type error_message: str
    :param stage: The pipeline stage that failed
    :type stage: str
    """

    def __init__(self, error_message="", stage=None, context=None):
        """Init method.

        :param error_message: The error message
        :type error_message: str
        :param stage: The pipeline stage that failed
        :type stage: str
        :param context: Numerical context of the failure (wavenumber, coupling, ...)
        :type context: dict
        """
        Exception.__init__(self, error_message)

        self.stage = stage
        self.context = dict(context or {})
        self.error_message = error_message

    def __str__(self):
        """Str method.

        :returns: String representation of the object
        :rtype: str
        """
        if self.stage is not None:
            return "{0}: {1}".format(self.stage, self.error_message)
        else:
            return "{0}".format(self.error_message)


class DomainError(QuarticError):
    """Argument outside the domain of an operation."""

    pass


class DiagonalSingularityError(DomainError):
    """Kernel evaluated on its diagonal singularity."""

    pass


class EvaluationError(QuarticError):
    """Sampler returned non-finite values."""

    pass


class ContractError(QuarticError):
    """Caller-asserted bound violated by sampled values."""

    pass


class FitError(QuarticError):
    """Decay fit on insufficient or invalid samples."""

    pass


class GridCapError(QuarticError):
    """Quadrature grid above the dense linear algebra cap."""

    pass


class NotFoundError(QuarticError):
    """No resonant coupling inside the bracket."""

    pass


class NearSingularError(QuarticError):
    """Matrix inversion residual above tolerance."""

    pass


class ExtractionError(QuarticError):
    """Threshold constant inconsistent across wavenumbers."""

    pass


class EmbeddedEigenvalueError(QuarticError):
    """Embedded eigenvalue candidate on the propagation interval."""

    pass


class ConfigError(QuarticError):
    """Scenario configuration error."""

    pass


def raise_error_from_residual(residual, tolerance, error=NearSingularError, stage=None, **context):
    """Raise an exception when a residual exceeds its tolerance.

    :param residual: Measured residual
    :type residual: float
    :param tolerance: Largest acceptable residual
    :type tolerance: float
    :param error: Exception class raised on failure
    :type error: type
    :param stage: Pipeline stage reported with the error
    :type stage: str
    :param context: Extra numerical context attached to the error
    :type context: dict
    :returns: The residual
    :rtype: float
    :raises error: If the residual is above tolerance or not finite
    """
    residual = float(residual)
    if residual <= tolerance:
        return residual

    details = ", ".join("{0}={1}".format(k, _format_value(v)) for k, v in sorted(context.items()))
    message = "residual {0:.3e} exceeds tolerance {1:.1e}".format(residual, tolerance)
    if details:
        message = "{0} ({1})".format(message, details)
    context["residual"] = residual
    raise error(error_message=message, stage=stage, context=context)


def exit_code_for(exc):
    """Map an exception to the command line exit code.

    :param exc: Raised exception
    :type exc: Exception
    :returns: 2 for configuration errors, 1 otherwise
    :rtype: int
    """
    if isinstance(exc, ConfigError):
        return 2
    return 1


def _format_value(value):
    if isinstance(value, float):
        return "{0:.6g}".format(value)
    return str(value)

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

"""Oscillatory quadrature for integrals against the quartic phase e^(-it lambda^4).

Every integral in this module is split into panels whose polynomial fits depend on
the integrand only. The moments of the phase against the panel Lagrange basis are
computed per time by complex-rotated Gauss rules, so a panel set built once serves
every time of a decay scan.
"""

import logging
from dataclasses import dataclass
from math import comb
from typing import NamedTuple, Optional, Tuple

import numpy as np
from numpy.polynomial import legendre
from numpy.polynomial import polynomial as poly
from scipy import special, stats

from .exceptions import ContractError, DomainError, EvaluationError, FitError

logger = logging.getLogger(__name__)

PANEL_ORDER = 8
DIRECT_ORDER = 64
RAY_ORDER = 96
RAY_ANGLE = -np.pi / 8
DECAY_TARGET = 45.0
DIRECT_PHASE = 24.0
MAX_PANELS = 4000
GEOMETRIC_LEVELS = 16
HIGH_ENERGY_WIDTH = 1.0

_ROTATION = np.exp(1j * RAY_ANGLE)
_PANEL_X, _PANEL_W = legendre.leggauss(PANEL_ORDER)
_DIRECT_X, _DIRECT_W = legendre.leggauss(DIRECT_ORDER)
_RAY_X, _RAY_W = legendre.leggauss(RAY_ORDER)
_BARYCENTRIC = np.array(
    [1.0 / np.prod(x - np.delete(_PANEL_X, j)) for j, x in enumerate(_PANEL_X)]
)
_TO_LEGENDRE = (
    (legendre.legvander(_PANEL_X, PANEL_ORDER - 1) * _PANEL_W[:, None]).T
    * ((2.0 * np.arange(PANEL_ORDER) + 1.0) / 2.0)[:, None]
)
_RAY_RATE = np.array([comb(4, k) * np.sin(k * np.pi / 8) for k in range(1, 5)])


class SampledFunction(NamedTuple):
    """Values of a function of the wavenumber and its first two derivatives."""

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


class PowerLaw:
    """Sampler of F(lambda) = coefficient * lambda^exponent * exp(-decay * lambda).

    :param exponent: Power of the wavenumber
    :type exponent: float
    :param coefficient: Constant prefactor
    :type coefficient: complex
    :param decay: Exponential decay rate
    :type decay: float
    """

    def __init__(self, exponent, coefficient=1.0, decay=0.0):
        """Init method.

        :param exponent: Power of the wavenumber
        :type exponent: float
        :param coefficient: Constant prefactor
        :type coefficient: complex
        :param decay: Exponential decay rate
        :type decay: float
        """
        self.exponent = float(exponent)
        self.coefficient = coefficient
        self.decay = float(decay)

    def __call__(self, lam):
        """Sample the function.

        :param lam: Wavenumbers
        :type lam: numpy.ndarray
        :returns: Values and derivatives
        :rtype: SampledFunction
        """
        lam = np.asarray(lam, dtype=float)
        p, d = self.exponent, self.decay
        base = self.coefficient * lam**p * np.exp(-d * lam)
        log1 = p / lam - d
        d1 = base * log1
        d2 = base * (log1**2 - p / lam**2)
        return SampledFunction(base, d1, d2)


class Cutoff:
    """Smooth low-energy cutoff chi with chi = 1 below lambda0 and 0 above 2 lambda0.

    The transition is the smoothstep polynomial of the given order, so chi has
    ``profile`` continuous derivatives at both joins.

    :param lambda0: Cutoff scale
    :type lambda0: float
    :param profile: Smoothstep order, at least 2
    :type profile: int
    """

    def __init__(self, lambda0=0.05, profile=2):
        """Init method.

        :param lambda0: Cutoff scale
        :type lambda0: float
        :param profile: Smoothstep order, at least 2
        :type profile: int
        :raises DomainError: If lambda0 is not positive or the profile order is below 2
        """
        if not np.isfinite(lambda0) or lambda0 <= 0:
            raise DomainError("lambda0 must be positive, got {0!r}".format(lambda0))
        if isinstance(profile, bool) or int(profile) != profile or profile < 2:
            raise DomainError("profile must be an integer >= 2, got {0!r}".format(profile))
        self._lambda0 = float(lambda0)
        self._profile = int(profile)
        n = self._profile
        coef = np.zeros(2 * n + 2)
        for k in range(n + 1):
            coef[n + 1 + k] = comb(n + k, k) * comb(2 * n + 1, n - k) * (-1) ** k
        self._step = poly.Polynomial(coef)

    @property
    def lambda0(self):
        """Get the cutoff scale.

        :returns: Cutoff scale
        :rtype: float
        """
        return self._lambda0

    @property
    def profile(self):
        """Get the smoothstep order.

        :returns: Smoothstep order
        :rtype: int
        """
        return self._profile

    def chi(self, lam, deriv=0):
        """Evaluate chi or one of its derivatives.

        :param lam: Wavenumbers
        :type lam: numpy.ndarray
        :param deriv: Derivative order
        :type deriv: int
        :returns: chi^(deriv)(lam)
        :rtype: numpy.ndarray
        """
        lam = np.asarray(lam, dtype=float)
        u = (lam - self._lambda0) / self._lambda0
        inside = (u > 0) & (u < 1)
        uc = np.clip(u, 0.0, 1.0)
        if deriv == 0:
            return np.where(u <= 0, 1.0, np.where(u >= 1, 0.0, 1.0 - self._step(uc)))
        step = self._step.deriv(deriv)
        return np.where(inside, -step(uc) / self._lambda0**deriv, 0.0)

    def chi_tilde(self, lam, deriv=0):
        """Evaluate 1 - chi or one of its derivatives.

        :param lam: Wavenumbers
        :type lam: numpy.ndarray
        :param deriv: Derivative order
        :type deriv: int
        :returns: (1 - chi)^(deriv)(lam)
        :rtype: numpy.ndarray
        """
        if deriv == 0:
            return 1.0 - self.chi(lam)
        return -self.chi(lam, deriv)


@dataclass(frozen=True)
class OscillatoryResult:
    """Value of an oscillatory integral with its error estimate.

    ``majorant`` is the a-priori absolute bound of the high-energy estimate and is
    None for low-energy integrals.
    """

    value: np.ndarray
    error: np.ndarray
    majorant: Optional[np.ndarray] = None


@dataclass(frozen=True)
class DecayFit:
    """Least squares power law fit value ~ t^(-exponent)."""

    exponent: float
    intercept: float
    stderr: float
    t_window: Tuple[float, float]
    n_points: int

    def band(self, level=0.95):
        """Confidence band of the exponent.

        :param level: Confidence level
        :type level: float
        :returns: Lower and upper exponent
        :rtype: tuple
        """
        q = stats.t.ppf(0.5 + level / 2.0, self.n_points - 2)
        return self.exponent - q * self.stderr, self.exponent + q * self.stderr


def _lagrange(u):
    """Panel Lagrange basis at normalized points u, shape u.shape + (PANEL_ORDER,)."""
    terms = _BARYCENTRIC / (u[..., None] - _PANEL_X)
    return terms / terms.sum(axis=-1, keepdims=True)


_DIRECT_BASIS = _lagrange(_DIRECT_X)


def _quartic_shift(c, delta):
    """Return (c + delta)^4 - c^4 without cancellation."""
    return delta * (4 * c**3 + delta * (6 * c**2 + delta * (4 * c + delta)))


def ray_lengths(c, t):
    """Length of the rotated rays from c along which |exp(-it z^4)| falls to e^-DECAY_TARGET.

    :param c: Ray origins on the positive axis
    :type c: numpy.ndarray
    :param t: Time
    :type t: float
    :returns: Ray lengths
    :rtype: numpy.ndarray
    """
    c = np.asarray(c, dtype=float)
    powers = np.stack([c**3, c**2, c, np.ones_like(c)])
    coef = t * _RAY_RATE[:, None] * powers.reshape(4, -1)
    s = np.full(coef.shape[1], (DECAY_TARGET / t) ** 0.25)
    k = np.arange(1, 5)[:, None]
    for _ in range(80):
        f = (coef * s ** k).sum(axis=0) - DECAY_TARGET
        fp = (k * coef * s ** (k - 1)).sum(axis=0)
        step = f / fp
        s = s - step
        if np.all(np.abs(step) <= 1e-13 * s):
            break
    return s.reshape(c.shape)


def _ray_moments(c, mid, half, t):
    """Moments of exp(-it z^4) on rotated rays from c against the panel basis."""
    s_max = ray_lengths(c, t)
    s = s_max[:, None] * (1.0 + _RAY_X) / 2.0
    ds = s_max[:, None] * _RAY_W / 2.0
    delta = s * _ROTATION
    phase = np.exp(-1j * t * _quartic_shift(c[:, None], delta))
    basis = _lagrange((c[:, None] + delta - mid[:, None]) / half[:, None])
    moments = np.einsum("eq,eqj->ej", ds * phase, basis)
    return np.exp(-1j * t * c**4)[:, None] * _ROTATION * moments


def filon_weights(a, b, t, chunk=512):
    """Weights w with sum_j w_j p(x_j) = integral_a^b p(x) exp(-it x^4) dx for panel polynomials.

    :param a: Panel left ends
    :type a: numpy.ndarray
    :param b: Panel right ends
    :type b: numpy.ndarray
    :param t: Time, positive
    :type t: float
    :param chunk: Panels handled per vectorized block
    :type chunk: int
    :returns: Weights, shape (n_panels, PANEL_ORDER)
    :rtype: numpy.ndarray
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = (a + b) / 2.0
    half = (b - a) / 2.0
    weights = np.empty(a.shape + (PANEL_ORDER,), dtype=complex)

    direct = 4.0 * t * b**3 * half <= DIRECT_PHASE
    if np.any(direct):
        m, h = mid[direct], half[direct]
        delta = h[:, None] * _DIRECT_X
        phase = np.exp(-1j * t * _quartic_shift(m[:, None], delta)) * _DIRECT_W
        weights[direct] = (h * np.exp(-1j * t * m**4))[:, None] * (phase @ _DIRECT_BASIS)

    rotated = np.flatnonzero(~direct)
    for start in range(0, rotated.size, chunk):
        idx = rotated[start : start + chunk]
        m, h = mid[idx], half[idx]
        weights[idx] = _ray_moments(a[idx], m, h, t) - _ray_moments(b[idx], m, h, t)
    return weights


def _broadcast(factor, values):
    return factor.reshape(factor.shape + (1,) * (values.ndim - 1))


class PanelSet:
    """Adaptively refined panels carrying samples of a (vector valued) integrand.

    Panels are bisected until the two trailing Legendre coefficients of the panel fit
    are below the share of ``rtol * scale * span`` owed to the panel, where ``scale``
    is the largest sampled magnitude.

    :param integrand: Callable mapping wavenumbers to samples of shape (n, ...)
    :type integrand: callable
    :param breakpoints: Initial panel ends, increasing
    :type breakpoints: list
    :param rtol: Relative tolerance
    :type rtol: float
    :param max_panels: Refinement cap
    :type max_panels: int
    """

    def __init__(self, integrand, breakpoints, rtol=1e-10, max_panels=MAX_PANELS):
        """Init method.

        :param integrand: Callable mapping wavenumbers to samples of shape (n, ...)
        :type integrand: callable
        :param breakpoints: Initial panel ends, increasing
        :type breakpoints: list
        :param rtol: Relative tolerance
        :type rtol: float
        :param max_panels: Refinement cap
        :type max_panels: int
        :raises EvaluationError: If the integrand is not finite at a node
        """
        breakpoints = np.asarray(breakpoints, dtype=float)
        span = breakpoints[-1] - breakpoints[0]
        pending = np.column_stack([breakpoints[:-1], breakpoints[1:]])
        accepted, samples, errors = [], [], []
        scale = 0.0
        capped = False

        while len(pending):
            mid = pending.mean(axis=1)
            half = (pending[:, 1] - pending[:, 0]) / 2.0
            lam = (mid[:, None] + half[:, None] * _PANEL_X).ravel()
            values = np.asarray(integrand(lam))
            if not np.all(np.isfinite(values)):
                bad = lam[~np.isfinite(values.reshape(lam.size, -1)).all(axis=1)]
                raise EvaluationError(
                    "integrand not finite at lambda={0:.6g}".format(bad[0]),
                    stage="quadrature",
                    context={"lambda": float(bad[0])},
                )
            values = values.reshape((len(pending), PANEL_ORDER) + values.shape[1:])
            scale = max(scale, float(np.max(np.abs(values), initial=0.0)))

            coeffs = np.tensordot(_TO_LEGENDRE, values, axes=([1], [1]))
            tail = 2.0 * _broadcast(half, coeffs[-1]) * (np.abs(coeffs[-1]) + np.abs(coeffs[-2]))
            worst = tail.reshape(len(pending), -1).max(axis=1, initial=0.0)
            allowed = rtol * scale * 2.0 * half

            total = sum(len(x) for x in accepted) + len(pending)
            capped = capped or total >= max_panels
            done = (worst <= allowed) | capped | (half <= 1e-13 * span)
            accepted.append(pending[done])
            samples.append(values[done])
            errors.append(tail[done])

            left = pending[~done]
            middle = left.mean(axis=1)
            pending = np.concatenate(
                [np.column_stack([left[:, 0], middle]), np.column_stack([middle, left[:, 1]])]
            )

        if capped:
            logger.warning("panel refinement capped at %d panels", max_panels)
        bounds = np.concatenate(accepted)
        order = np.argsort(bounds[:, 0])
        self._a = bounds[order, 0]
        self._b = bounds[order, 1]
        self._samples = np.concatenate(samples)[order]
        self._error = np.concatenate(errors).sum(axis=0)
        logger.debug("panel set on [%g, %g] with %d panels", self._a[0], self._b[-1], len(order))

    @property
    def n_panels(self):
        """Get the number of panels.

        :returns: Panel count
        :rtype: int
        """
        return self._a.size

    @property
    def bounds(self):
        """Get the panel ends.

        :returns: Left and right panel ends
        :rtype: tuple
        """
        return self._a, self._b

    @property
    def nodes(self):
        """Get the quadrature nodes, shape (n_panels, PANEL_ORDER).

        :returns: Nodes
        :rtype: numpy.ndarray
        """
        mid = (self._a + self._b) / 2.0
        half = (self._b - self._a) / 2.0
        return mid[:, None] + half[:, None] * _PANEL_X

    @property
    def error(self):
        """Get the fit error bound, per integrand component.

        :returns: Error bound
        :rtype: numpy.ndarray
        """
        return self._error

    def integrate(self, t):
        """Integrate the sampled integrand against exp(-it lambda^4).

        :param t: Time, positive
        :type t: float
        :returns: Integral per component
        :rtype: numpy.ndarray
        """
        weights = filon_weights(self._a, self._b, t)
        return np.tensordot(weights, self._samples, axes=([0, 1], [0, 1]))

    def integrate_plain(self):
        """Integrate the sampled integrand without the phase.

        :returns: Integral per component
        :rtype: numpy.ndarray
        """
        half = (self._b - self._a) / 2.0
        weights = half[:, None] * _PANEL_W
        return np.tensordot(weights, self._samples, axes=([0, 1], [0, 1]))


def _check_time(t):
    if not np.isfinite(t) or t <= 0:
        raise DomainError("time must be positive, got {0!r}".format(t))


def _check_samples(samples, lam):
    for name in ("value", "d1", "d2"):
        data = np.asarray(getattr(samples, name))
        if not np.all(np.isfinite(data)):
            raise EvaluationError(
                "sampler returned non-finite {0}".format(name),
                stage="quadrature",
                context={"lambda": float(np.min(lam))},
            )


class LowEnergyRule:
    """Stone integral over the low-energy window, reusable across times.

    Approximates the integral of exp(-it lambda^4) lambda^3 chi(lambda) F(lambda)
    over (0, 2 lambda0], with panels refined geometrically toward zero.

    :param sampler: Callable returning F and its derivatives at wavenumbers
    :type sampler: callable
    :param cutoff: Low-energy cutoff
    :type cutoff: Cutoff
    :param rtol: Relative tolerance of the panel fits
    :type rtol: float
    """

    def __init__(self, sampler, cutoff, rtol=1e-10):
        """Init method.

        :param sampler: Callable returning F and its derivatives at wavenumbers
        :type sampler: callable
        :param cutoff: Low-energy cutoff
        :type cutoff: Cutoff
        :param rtol: Relative tolerance of the panel fits
        :type rtol: float
        """
        self.cutoff = cutoff
        lam0 = cutoff.lambda0
        breakpoints = [0.0] + [lam0 * 2.0**-k for k in range(GEOMETRIC_LEVELS, -1, -1)]
        breakpoints.append(2.0 * lam0)

        def integrand(lam):
            samples = sampler(lam)
            value = np.asarray(samples.value)
            return _broadcast(lam**3 * cutoff.chi(lam), value) * value

        self.panels = PanelSet(integrand, breakpoints, rtol=rtol)

    def integrate(self, t):
        """Evaluate the integral at time t.

        :param t: Time, positive
        :type t: float
        :returns: Value and error estimate
        :rtype: OscillatoryResult
        """
        _check_time(t)
        return OscillatoryResult(self.panels.integrate(t), self.panels.error)


class HighEnergyRule:
    """Stone integral over the high-energy window, reusable across times.

    The integral of exp(-it lambda^4) lambda^3 (1 - chi) F over [lambda0, lambda_max]
    is computed by Filon panels. Beyond lambda_max the integrand is integrated by
    parts twice: the two boundary terms at lambda_max are kept and the remaining
    integral of exp(-it lambda^4) d(d((1 - chi) F) / lambda^3) is bounded by the
    envelope |d^k F| <= C lambda^-2.

    :param sampler: Callable returning F and its derivatives at wavenumbers
    :type sampler: callable
    :param cutoff: Low-energy cutoff
    :type cutoff: Cutoff
    :param lambda_max: Truncation wavenumber
    :type lambda_max: float
    :param envelope: Asserted envelope constant C, or None to fit it near lambda_max
    :type envelope: float
    :param rtol: Relative tolerance of the panel fits
    :type rtol: float
    :param width: Initial panel width above 2 lambda0
    :type width: float
    """

    def __init__(
        self, sampler, cutoff, lambda_max=40.0, envelope=None, rtol=1e-10, width=HIGH_ENERGY_WIDTH
    ):
        """Init method.

        :param sampler: Callable returning F and its derivatives at wavenumbers
        :type sampler: callable
        :param cutoff: Low-energy cutoff
        :type cutoff: Cutoff
        :param lambda_max: Truncation wavenumber
        :type lambda_max: float
        :param envelope: Asserted envelope constant C, or None to fit it near lambda_max
        :type envelope: float
        :param rtol: Relative tolerance of the panel fits
        :type rtol: float
        :param width: Initial panel width above 2 lambda0
        :type width: float
        :raises DomainError: If lambda_max does not exceed 2 lambda0
        """
        lam0 = cutoff.lambda0
        if not lambda_max > 2.0 * lam0:
            raise DomainError(
                "lambda_max={0:g} must exceed 2*lambda0={1:g}".format(lambda_max, 2.0 * lam0)
            )
        self.cutoff = cutoff
        self.lambda_max = float(lambda_max)
        n_uniform = max(1, int(np.ceil((lambda_max - 2.0 * lam0) / width)))
        breakpoints = np.concatenate(
            [[lam0], np.linspace(2.0 * lam0, lambda_max, n_uniform + 1)]
        )

        self._envelope = envelope
        self._observed = None
        self._ibp_abs = None

        def integrand(lam):
            samples = sampler(lam)
            _check_samples(samples, lam)
            value = np.asarray(samples.value)
            self._observe(lam, samples)
            return _broadcast(lam**3 * cutoff.chi_tilde(lam), value) * value

        self.panels = PanelSet(integrand, breakpoints, rtol=rtol)

        # |d(d(chi~ F)/lambda^3)| on the accepted nodes, for the majorant
        nodes = self.panels.nodes
        samples = sampler(nodes.ravel())
        h = np.abs(self._ibp_integrand(nodes.ravel(), samples))
        h = h.reshape(nodes.shape + h.shape[1:])
        half = (self.panels.bounds[1] - self.panels.bounds[0]) / 2.0
        self._ibp_body = np.tensordot(half[:, None] * _PANEL_W, h, axes=([0, 1], [0, 1]))

        edge = sampler(np.array([self.lambda_max]))
        _check_samples(edge, self.lambda_max)
        self._observe(np.array([self.lambda_max]), edge)
        self._edge_value = np.asarray(edge.value)[0]
        self._edge_d1 = np.asarray(edge.d1)[0]

        if envelope is None:
            self._envelope = self._observed
            logger.info(
                "high-energy envelope fitted on [%g, %g]: max C=%.3e",
                lambda_max / 2.0,
                lambda_max,
                float(np.max(self._envelope)),
            )

    def _observe(self, lam, samples):
        ratio = np.maximum.reduce(
            [np.abs(np.asarray(samples.value)), np.abs(samples.d1), np.abs(samples.d2)]
        )
        ratio = _broadcast(lam**2, ratio) * ratio
        if self._envelope is not None:
            limit = np.asarray(self._envelope) * (1.0 + 1e-9)
            if np.any(ratio > limit):
                worst = np.unravel_index(np.argmax(ratio - limit), ratio.shape)[0]
                raise ContractError(
                    "envelope |d^k F| <= C lambda^-2 violated at lambda={0:.6g}".format(
                        lam[worst]
                    ),
                    stage="high-energy",
                    context={"lambda": float(lam[worst])},
                )
            return
        near = lam >= self.lambda_max / 2.0
        if np.any(near):
            local = ratio[near].max(axis=0)
            self._observed = local if self._observed is None else np.maximum(self._observed, local)

    def _ibp_integrand(self, lam, samples):
        value, d1, d2 = (np.asarray(getattr(samples, n)) for n in ("value", "d1", "d2"))
        c0, c1, c2 = (self.cutoff.chi_tilde(lam, k) for k in range(3))
        g1 = _broadcast(c1, value) * value + _broadcast(c0, d1) * d1
        g2 = _broadcast(c2, value) * value + 2 * _broadcast(c1, d1) * d1 + _broadcast(c0, d2) * d2
        return _broadcast(lam**-3, g2) * g2 - 3 * _broadcast(lam**-4, g1) * g1

    @property
    def envelope(self):
        """Get the envelope constant in use.

        :returns: Envelope constant, per component when fitted
        :rtype: numpy.ndarray
        """
        return self._envelope

    def tail_integral(self):
        """Bound on the integral of |d(d F / lambda^3)| beyond lambda_max.

        :returns: Tail bound per component
        :rtype: numpy.ndarray
        """
        lm = self.lambda_max
        return np.asarray(self._envelope) * (lm**-4 / 4.0 + 3.0 * lm**-5 / 5.0)

    def integrate(self, t):
        """Evaluate the integral at time t.

        :param t: Time, positive
        :type t: float
        :returns: Value, error estimate and the t^-2 majorant
        :rtype: OscillatoryResult
        """
        _check_time(t)
        lm = self.lambda_max
        k = -4j * t
        phase = np.exp(-1j * t * lm**4)
        boundary = -phase * self._edge_value / k + phase * self._edge_d1 / (k**2 * lm**3)
        value = self.panels.integrate(t) + boundary
        tail = self.tail_integral() / (16.0 * t**2)
        majorant = self._ibp_body / (16.0 * t**2) + tail
        error = self.panels.error + tail
        return OscillatoryResult(value, error, majorant)


def stone_low_energy(t, sampler, cutoff, rtol=1e-10):
    """Integral of exp(-it lambda^4) lambda^3 chi(lambda) F(lambda) over (0, inf).

    :param t: Time, positive
    :type t: float
    :param sampler: Callable returning F and its derivatives at wavenumbers
    :type sampler: callable
    :param cutoff: Low-energy cutoff
    :type cutoff: Cutoff
    :param rtol: Relative tolerance of the panel fits
    :type rtol: float
    :returns: Value and error estimate
    :rtype: OscillatoryResult
    """
    _check_time(t)
    return LowEnergyRule(sampler, cutoff, rtol=rtol).integrate(t)


def stone_high_energy(t, sampler, cutoff, lambda_max=40.0, envelope=None, rtol=1e-10):
    """Integral of exp(-it lambda^4) lambda^3 (1 - chi(lambda)) F(lambda) over (0, inf).

    :param t: Time, positive
    :type t: float
    :param sampler: Callable returning F and its derivatives at wavenumbers
    :type sampler: callable
    :param cutoff: Low-energy cutoff
    :type cutoff: Cutoff
    :param lambda_max: Truncation wavenumber
    :type lambda_max: float
    :param envelope: Asserted constant C with |d^k F| <= C lambda^-2, or None
    :type envelope: float
    :param rtol: Relative tolerance of the panel fits
    :type rtol: float
    :returns: Value, error estimate and majorant
    :rtype: OscillatoryResult
    """
    _check_time(t)
    rule = HighEnergyRule(sampler, cutoff, lambda_max=lambda_max, envelope=envelope, rtol=rtol)
    return rule.integrate(t)


def cutoff_moment(t, cutoff, power=2, rtol=1e-12):
    """Integral of exp(-it lambda^4) lambda^power chi(lambda) over (0, inf).

    :param t: Time, positive
    :type t: float
    :param cutoff: Low-energy cutoff
    :type cutoff: Cutoff
    :param power: Power of the wavenumber, above -1
    :type power: float
    :param rtol: Relative tolerance of the panel fits
    :type rtol: float
    :returns: Value and error estimate
    :rtype: OscillatoryResult
    """
    return stone_low_energy(t, PowerLaw(power - 3.0), cutoff, rtol=rtol)


def half_line_moment(t, power):
    """Closed form of the integral of exp(-it lambda^4) lambda^power over (0, inf).

    :param t: Time, positive
    :type t: float
    :param power: Power of the wavenumber, above -1
    :type power: float
    :returns: Value
    :rtype: complex
    """
    s = (power + 1.0) / 4.0
    return np.exp(-1j * np.pi * s / 2.0) * special.gamma(s) / (4.0 * t**s)


def fit_decay(samples):
    """Fit value ~ t^(-exponent) by least squares on log-log axes.

    :param samples: Pairs (t, value)
    :type samples: list
    :returns: The fit
    :rtype: DecayFit
    :raises FitError: If there are fewer than 8 samples, a time below 1, a nonpositive
        value or less than a decade of times
    """
    data = np.asarray(list(samples), dtype=float).reshape(-1, 2)
    t, value = data[:, 0], data[:, 1]
    if t.size < 8:
        raise FitError("decay fit needs at least 8 samples, got {0}".format(t.size))
    if not np.all(np.isfinite(data)):
        raise FitError("decay fit samples must be finite")
    if np.any(t < 1):
        raise FitError("decay fit times must be >= 1")
    if np.any(value <= 0):
        raise FitError("decay fit values must be positive")
    if t.max() / t.min() < 10:
        raise FitError("decay fit times must span a decade")
    result = stats.linregress(np.log(t), np.log(value))
    return DecayFit(
        exponent=float(-result.slope),
        intercept=float(result.intercept),
        stderr=float(result.stderr),
        t_window=(float(t.min()), float(t.max())),
        n_points=int(t.size),
    )


def _ray_profile(x, origin, order):
    """Integral of rho sin(rho x) exp(-i rho^4) / x along the rotated ray from origin."""
    k = np.arange(1, 5)
    rate = _RAY_RATE * origin ** (4 - k)
    rate[0] -= x * np.sin(np.pi / 8)
    s = (DECAY_TARGET) ** 0.25
    for _ in range(80):
        step = ((rate * s**k).sum() - DECAY_TARGET) / (k * rate * s ** (k - 1)).sum()
        s -= step
        if abs(step) <= 1e-13 * s:
            break
    nodes, weights = legendre.leggauss(order)
    sv = s * (1.0 + nodes) / 2.0
    rho = origin + sv * _ROTATION
    integrand = rho * np.sin(rho * x) / x * np.exp(-1j * rho**4)
    return _ROTATION * s / 2.0 * np.dot(weights, integrand)


def free_profile(x):
    """Radial profile of the free quartic propagator kernel.

    Evaluates (1 / (2 pi^2 x)) * integral of rho sin(rho x) exp(-i rho^4) over
    (0, inf), with the x -> 0 limit at the origin.

    :param x: Scaled distances, nonnegative
    :type x: numpy.ndarray
    :returns: Profile values
    :rtype: numpy.ndarray
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.shape, dtype=complex)
    near = x <= 1.0
    if np.any(near):
        nodes, weights = legendre.leggauss(RAY_ORDER)
        s_max = DECAY_TARGET**0.25
        s = s_max * (1.0 + nodes) / 2.0
        rho = s * _ROTATION
        xs = x[near][:, None]
        integrand = rho**2 * np.sinc(rho * xs / np.pi) * np.exp(-(s**4))
        out[near] = _ROTATION * s_max / 2.0 * (integrand @ weights)
    for i in np.flatnonzero(~near):
        xi = x.flat[i]
        origin = (xi / 4.0) ** (1.0 / 3.0) + 1.0
        n_seg = int(np.ceil((origin * xi + origin**4) / 4.0)) + 4
        edges = np.linspace(0.0, origin, n_seg + 1)
        nodes, weights = legendre.leggauss(16)
        half = (edges[1] - edges[0]) / 2.0
        rho = ((edges[:-1] + edges[1:]) / 2.0)[:, None] + half * nodes
        segment = half * np.sum(weights * rho * np.sin(rho * xi) / xi * np.exp(-1j * rho**4))
        out.flat[i] = segment + _ray_profile(xi, origin, 2 * RAY_ORDER)
    return out / (2.0 * np.pi**2)


def free_profile_origin():
    """Closed form of the free profile at the origin, Gamma(3/4) e^(-3i pi/8) / (8 pi^2).

    :returns: Profile at zero
    :rtype: complex
    """
    return special.gamma(0.75) * np.exp(-3j * np.pi / 8) / (8.0 * np.pi**2)

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

"""Perturbed resolvents and the Stone's formula evolution of H = bilaplacian + V.

The perturbed resolvent follows the symmetric resolvent identity

    R_V(lambda^4) = R0 - R0 v M(lambda)^-1 v R0,

and the evolution kernel is

    K_t(x, y) = (2 / (pi i)) * integral of exp(-it lambda^4) lambda^3 [R_V+ - R_V-](lambda^4)(x, y)

over (0, inf), split by the cutoff into a low- and a high-energy part.
"""

import logging
import threading
import weakref
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from .config import thread_count
from .exceptions import DomainError, EmbeddedEigenvalueError, raise_error_from_residual
from .kernels import KernelValue, check_sign, quartic_resolvent
from .oscillatory import (
    Cutoff,
    DecayFit,
    HighEnergyRule,
    LowEnergyRule,
    SampledFunction,
    fit_decay,
    free_profile_origin,
)
from .threshold import (
    RESIDUAL_TOL,
    Classification,
    MInverseCache,
    ThresholdData,
    assemble_M,
    build_F_t,
    build_threshold,
    embedded_eigenvalue_scan,
    relative_residual,
    support_frame,
)

logger = logging.getLogger(__name__)

STONE_FACTOR = 2.0 / (np.pi * 1j)
SCAN_POINTS = 64
SAMPLE_CACHE = 8192
KERNEL_CACHE = 64
DEFAULT_RADII = (0.5, 2.0, 5.0)

_M_CACHES = weakref.WeakKeyDictionary()
_M_CACHES_LOCK = threading.Lock()


def _inverse_cache(pot):
    with _M_CACHES_LOCK:
        cache = _M_CACHES.get(pot)
        if cache is None:
            cache = _M_CACHES[pot] = MInverseCache()
        return cache


def _as_points(points):
    points = np.asarray(points, dtype=float)
    if points.ndim == 0 or points.shape[-1] != 3:
        raise DomainError("points must have three coordinates")
    return points.reshape(-1, 3)


def _bracket(points):
    return np.sqrt(1.0 + np.sum(points**2, axis=1))


@dataclass(frozen=True)
class ResolventSample:
    """Perturbed resolvent and spectral density at one wavenumber."""

    lam: float
    x: np.ndarray
    y: np.ndarray
    RV_plus: complex
    density: complex


@dataclass(frozen=True)
class PropagatorKernel:
    """Kernel of exp(-itH) P_ac(H) on all ordered pairs of a point set.

    ``values[p, q]`` is the kernel at (points[p], points[q]).
    """

    t: float
    points: np.ndarray
    values: np.ndarray
    low_part: np.ndarray
    high_part: np.ndarray
    errors: np.ndarray

    @property
    def error_estimate(self):
        """Get the largest quadrature error bound over the pairs.

        :returns: Error bound
        :rtype: float
        """
        return float(np.max(self.errors))

    @property
    def pairs(self):
        """Get the ordered pairs in row-major order of ``values``.

        :returns: Pairs (x, y)
        :rtype: list
        """
        return [(x, y) for x in self.points for y in self.points]

    def time_reversed(self):
        """Kernel at -t, the complex conjugate.

        :returns: The kernel of exp(itH) P_ac(H)
        :rtype: PropagatorKernel
        """
        return replace(
            self,
            t=-self.t,
            values=np.conj(self.values),
            low_part=np.conj(self.low_part),
            high_part=np.conj(self.high_part),
        )


def perturbed_resolvent(pot, td, lam, sign, x, y):
    """Kernel of R_V(lambda^4 +- i0) at pairs of points.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param td: Threshold data of pot, or None
    :type td: quartic.threshold.ThresholdData
    :param lam: Wavenumber, positive
    :type lam: float
    :param sign: +1 or -1
    :type sign: int
    :param x: Point or points, shape (3,) or (p, 3)
    :type x: numpy.ndarray
    :param y: Point or points of the same shape as x
    :type y: numpy.ndarray
    :returns: Kernel value per pair
    :rtype: complex
    :raises NearSingularError: If M(lambda) cannot be inverted
    """
    sign = check_sign(sign)
    single = np.ndim(x) == 1
    X, Y = _as_points(x), _as_points(y)
    if X.shape != Y.shape:
        raise DomainError("x and y must hold the same number of points")
    values = quartic_resolvent(lam, np.linalg.norm(X - Y, axis=1), sign).value
    if not pot.is_zero:
        frame = td if td is not None else support_frame(pot)
        inverse = _inverse_cache(pot).get(pot, frame, lam, sign)
        left = quartic_resolvent(lam, cdist(X, frame.nodes), sign).value * frame.vt
        right = quartic_resolvent(lam, cdist(Y, frame.nodes), sign).value * frame.vt
        values = values - np.einsum("pi,ij,pj->p", left, inverse.matrix, right)
    return values[0] if single else values


def spectral_density(pot, td, lam, x, y):
    """Spectral density [R_V+ - R_V-](lambda^4)(x, y) = 2i Im R_V+(lambda^4)(x, y).

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param td: Threshold data of pot, or None
    :type td: quartic.threshold.ThresholdData
    :param lam: Wavenumber, positive
    :type lam: float
    :param x: Point or points
    :type x: numpy.ndarray
    :param y: Point or points
    :type y: numpy.ndarray
    :returns: The sample
    :rtype: ResolventSample
    """
    plus = perturbed_resolvent(pot, td, lam, 1, x, y)
    return ResolventSample(float(lam), np.asarray(x), np.asarray(y), plus, 2j * np.imag(plus))


def born_series(pot, lam, sign, points, order=1):
    """Born series R0 - R0 V R0 + R0 V R0 V R0 - ... on all pairs of a point set.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param lam: Wavenumber, positive
    :type lam: float
    :param sign: +1 or -1
    :type sign: int
    :param points: Points, shape (p, 3)
    :type points: numpy.ndarray
    :param order: Highest power of V kept
    :type order: int
    :returns: Partial sum, shape (p, p)
    :rtype: numpy.ndarray
    """
    if isinstance(order, bool) or int(order) != order or order < 0:
        raise DomainError("Born order must be a nonnegative integer, got {0!r}".format(order))
    points = _as_points(points)
    total = quartic_resolvent(lam, cdist(points, points), sign).value
    if pot.is_zero or order == 0:
        return total
    nodes, weights, v, U = pot.support_data()
    wV = weights * U * v**2
    left = quartic_resolvent(lam, cdist(points, nodes), sign).value
    inner = quartic_resolvent(lam, cdist(nodes, nodes), sign).value * wV
    term = left * wV
    for k in range(1, int(order) + 1):
        total = total + (-1) ** k * (term @ left.T)
        term = term @ inner
    return total


class ResolventEvaluator:
    """Perturbed resolvent on all ordered pairs of a fixed point set.

    Calling the evaluator with an array of wavenumbers returns the spectral density
    and its first two lambda-derivatives, as the Stone integrals expect. Densities are
    cached per wavenumber; wavenumbers are evaluated on a thread pool.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param td: Threshold data of pot, or None
    :type td: quartic.threshold.ThresholdData
    :param points: Points, shape (p, 3)
    :type points: numpy.ndarray
    :param threads: Worker count, default from QUARTIC_THREADS
    :type threads: int
    :param cache_size: Number of cached wavenumbers
    :type cache_size: int
    """

    def __init__(self, pot, td, points, threads=None, cache_size=SAMPLE_CACHE):
        """Init method.

        :param pot: Sampled potential
        :type pot: quartic.potential.SampledPotential
        :param td: Threshold data of pot, or None
        :type td: quartic.threshold.ThresholdData
        :param points: Points, shape (p, 3)
        :type points: numpy.ndarray
        :param threads: Worker count, default from QUARTIC_THREADS
        :type threads: int
        :param cache_size: Number of cached wavenumbers
        :type cache_size: int
        """
        self._pot = pot
        self._points = _as_points(points)
        self._dxx = cdist(self._points, self._points)
        self._frame = None
        if not pot.is_zero:
            self._frame = td if td is not None else support_frame(pot)
            self._dxn = cdist(self._points, self._frame.nodes)
        self.threads = threads or thread_count()
        self.cache_size = cache_size
        self._cache = OrderedDict()
        self._lock = threading.Lock()

    @property
    def points(self):
        """Get the point set.

        :returns: Points, shape (p, 3)
        :rtype: numpy.ndarray
        """
        return self._points

    def resolvent(self, lam, sign=1):
        """R_V(lambda^4 +- i0) and its lambda-derivatives on all pairs.

        The derivatives follow from the differentiated resolvent identity with
        d(M^-1) = -M^-1 (dM) M^-1.

        :param lam: Wavenumber, positive
        :type lam: float
        :param sign: +1 or -1
        :type sign: int
        :returns: Values and derivatives, each of shape (p, p)
        :rtype: quartic.kernels.KernelValue
        :raises NearSingularError: If the solve with M(lambda) fails its residual check
        """
        free = quartic_resolvent(lam, self._dxx, sign)
        if self._frame is None:
            return free
        M = assemble_M(self._pot, self._frame, lam, sign, derivatives=True)
        k = quartic_resolvent(lam, self._dxn, sign)
        vt = self._frame.vt[:, None]
        B0, B1, B2 = vt * k.value.T, vt * k.d1.T, vt * k.d2.T

        lu = linalg.lu_factor(M.value)
        Z = linalg.lu_solve(lu, B0)
        raise_error_from_residual(
            relative_residual(M.value, Z, B0),
            RESIDUAL_TOL,
            stage="resolvent",
            **{"lambda": float(lam), "sign": sign}
        )
        Z1 = linalg.lu_solve(lu, B1)
        M1Z = M.d1 @ Z
        W = linalg.lu_solve(lu, M1Z)
        ZM1 = M1Z.T

        f0 = B0.T @ Z
        f1 = B1.T @ Z + Z.T @ B1 - ZM1 @ Z
        f2 = (
            B2.T @ Z
            + Z.T @ B2
            + 2.0 * (B1.T @ Z1)
            - 2.0 * (Z1.T @ M1Z)
            - 2.0 * (ZM1 @ Z1)
            + 2.0 * (ZM1 @ W)
            - Z.T @ (M.d2 @ Z)
        )
        logger.debug("resolvent at lambda=%.6g sign=%+d on %d points", lam, sign, len(Z.T))
        return KernelValue(free.value - f0, free.d1 - f1, free.d2 - f2)

    def density(self, lam):
        """Spectral density 2i Im R_V+ and its derivatives at one wavenumber.

        :param lam: Wavenumber, positive
        :type lam: float
        :returns: Values and derivatives, each of shape (p, p)
        :rtype: quartic.kernels.KernelValue
        """
        key = float(lam)
        found = self._cache.get(key)
        if found is not None:
            return found
        plus = self.resolvent(key, 1)
        sample = KernelValue(2j * plus.value.imag, 2j * plus.d1.imag, 2j * plus.d2.imag)
        with self._lock:
            self._cache[key] = sample
            while len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return sample

    def __call__(self, lam):
        """Sample the spectral density at wavenumbers.

        :param lam: Wavenumbers
        :type lam: numpy.ndarray
        :returns: Densities, shape (n, p, p), with derivatives
        :rtype: quartic.oscillatory.SampledFunction
        """
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if self.threads > 1 and lam.size > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                samples = list(pool.map(self.density, lam))
        else:
            samples = [self.density(x) for x in lam]
        return SampledFunction(
            np.stack([s.value for s in samples]),
            np.stack([s.d1 for s in samples]),
            np.stack([s.d2 for s in samples]),
        )


def spectral_positivity(pot, td, lambdas, points):
    """Smallest over largest eigenvalue of Im R_V+(lambda^4) on a point set, per wavenumber.

    Im R_V+(lambda^4) is the spectral density of H at lambda^4 up to a positive factor.
    It is positive semidefinite on any point set when H is self-adjoint, which is what
    makes exp(-itH) P_ac(H) preserve the norm. A ratio below zero, beyond rounding,
    flags a discretization that has lost self-adjointness.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param td: Threshold data of pot, or None
    :type td: quartic.threshold.ThresholdData
    :param lambdas: Wavenumbers, positive
    :type lambdas: numpy.ndarray
    :param points: Points, shape (p, 3)
    :type points: numpy.ndarray
    :returns: Eigenvalue ratios, one per wavenumber
    :rtype: numpy.ndarray
    :raises DomainError: If a wavenumber is not positive
    """
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if not np.all(np.isfinite(lambdas)) or np.any(lambdas <= 0):
        raise DomainError("wavenumbers must be positive and finite")
    evaluator = ResolventEvaluator(pot, td, points, threads=1)
    ratios = np.empty(lambdas.size)
    for i, lam in enumerate(lambdas):
        measure = evaluator.resolvent(lam, 1).value.imag
        eigenvalues = linalg.eigvalsh((measure + measure.T) / 2.0)
        ratios[i] = eigenvalues[0] / max(eigenvalues[-1], np.finfo(float).tiny)
    logger.debug("spectral positivity: smallest ratio %.3e", float(np.min(ratios)))
    return ratios


class Propagator:
    """Evolution kernel exp(-itH) P_ac(H) on a point set, reusable across times.

    The quadrature panels of both energy windows are built once, on the first
    call, and every later time only reweights the stored samples.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param td: Threshold data of pot, or None
    :type td: quartic.threshold.ThresholdData
    :param points: Points, shape (p, 3)
    :type points: numpy.ndarray
    :param cutoff: Low-energy cutoff
    :type cutoff: quartic.oscillatory.Cutoff
    :param lambda_max: Truncation wavenumber of the high-energy window
    :type lambda_max: float
    :param rtol: Relative tolerance of the panel fits
    :type rtol: float
    :param threads: Worker count, default from QUARTIC_THREADS
    :type threads: int
    :param scan: Screen [lambda0, lambda_max] for embedded eigenvalues first
    :type scan: bool
    :param cache_size: Number of kernels kept, least recently used dropped first
    :type cache_size: int
    """

    def __init__(
        self,
        pot,
        td,
        points,
        cutoff,
        lambda_max=40.0,
        rtol=1e-8,
        threads=None,
        scan=True,
        cache_size=KERNEL_CACHE,
    ):
        """Init method.

        :param pot: Sampled potential
        :type pot: quartic.potential.SampledPotential
        :param td: Threshold data of pot, or None
        :type td: quartic.threshold.ThresholdData
        :param points: Points, shape (p, 3)
        :type points: numpy.ndarray
        :param cutoff: Low-energy cutoff
        :type cutoff: quartic.oscillatory.Cutoff
        :param lambda_max: Truncation wavenumber of the high-energy window
        :type lambda_max: float
        :param rtol: Relative tolerance of the panel fits
        :type rtol: float
        :param threads: Worker count, default from QUARTIC_THREADS
        :type threads: int
        :param scan: Screen [lambda0, lambda_max] for embedded eigenvalues first
        :type scan: bool
        :param cache_size: Number of kernels kept, least recently used dropped first
        :type cache_size: int
        :raises EmbeddedEigenvalueError: If the screen flags a wavenumber
        """
        self.cutoff = cutoff
        self.lambda_max = float(lambda_max)
        self.rtol = rtol
        self.evaluator = ResolventEvaluator(pot, td, points, threads=threads)
        self.scan = None
        if scan and not pot.is_zero:
            grid = np.linspace(cutoff.lambda0, self.lambda_max, SCAN_POINTS)
            self.scan = embedded_eigenvalue_scan(pot, td, grid)
            if not self.scan.clean:
                first = float(self.scan.grid[self.scan.flagged][0])
                raise EmbeddedEigenvalueError(
                    "sigma_min(M+) = {0:.3e} at lambda={1:.6g}; refusing to evolve".format(
                        float(np.min(self.scan.sigma_min)), first
                    ),
                    stage="evolve",
                    context={"lambda": first},
                )
        self._low = None
        self._high = None
        self.cache_size = cache_size
        self._kernels = OrderedDict()
        self._kernels_lock = threading.Lock()
        self._build_lock = threading.Lock()

    @property
    def points(self):
        """Get the point set.

        :returns: Points, shape (p, 3)
        :rtype: numpy.ndarray
        """
        return self.evaluator.points

    def _rules(self):
        with self._build_lock:
            if self._low is None:
                self._low = LowEnergyRule(self.evaluator, self.cutoff, rtol=self.rtol)
                self._high = HighEnergyRule(
                    self.evaluator, self.cutoff, lambda_max=self.lambda_max, rtol=self.rtol
                )
                logger.info(
                    "stone panels: %d low-energy, %d high-energy",
                    self._low.panels.n_panels,
                    self._high.panels.n_panels,
                )
        return self._low, self._high

    def kernel(self, t):
        """Evolution kernel at time t; negative times by conjugation.

        :param t: Time, nonzero
        :type t: float
        :returns: The kernel
        :rtype: PropagatorKernel
        :raises DomainError: If t is zero or not finite
        """
        t = float(t)
        if not np.isfinite(t) or t == 0:
            raise DomainError("time must be finite and nonzero, got {0!r}".format(t))
        if t < 0:
            return self.kernel(-t).time_reversed()
        with self._kernels_lock:
            found = self._kernels.get(t)
            if found is not None:
                self._kernels.move_to_end(t)
                return found
        if t < 1:
            logger.info("t=%g below 1: the lambda_max truncation limits the accuracy", t)
        low_rule, high_rule = self._rules()
        low = low_rule.integrate(t)
        high = high_rule.integrate(t)
        low_part = STONE_FACTOR * low.value
        high_part = STONE_FACTOR * high.value
        errors = 2.0 / np.pi * (np.asarray(low.error) + np.asarray(high.error))
        errors = np.broadcast_to(errors, low_part.shape).copy()
        values = low_part + high_part
        kernel = PropagatorKernel(t, self.points, values, low_part, high_part, errors)
        with self._kernels_lock:
            self._kernels[t] = kernel
            while len(self._kernels) > self.cache_size:
                self._kernels.popitem(last=False)
        return kernel


def evolve_kernel(pot, td, t, points, cutoff, lambda_max=40.0, rtol=1e-8):
    """Kernel of exp(-itH) P_ac(H) on all ordered pairs of a point set.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param td: Threshold data of pot, or None
    :type td: quartic.threshold.ThresholdData
    :param t: Time, nonzero
    :type t: float
    :param points: Points, shape (p, 3)
    :type points: numpy.ndarray
    :param cutoff: Low-energy cutoff
    :type cutoff: quartic.oscillatory.Cutoff
    :param lambda_max: Truncation wavenumber
    :type lambda_max: float
    :param rtol: Relative tolerance of the panel fits
    :type rtol: float
    :returns: The kernel
    :rtype: PropagatorKernel
    """
    return Propagator(pot, td, points, cutoff, lambda_max=lambda_max, rtol=rtol).kernel(t)


def _weighted_sup(values, points, sigma):
    if not sigma >= 0:
        raise DomainError("weight exponent must be nonnegative, got {0!r}".format(sigma))
    weight = _bracket(points) ** sigma
    return float(np.max(np.abs(values) / np.outer(weight, weight)))


def weighted_sup(kernel, sigma):
    """Weighted sup norm max |K(x, y)| / (<x>^sigma <y>^sigma) over the pairs.

    :param kernel: Evolution kernel
    :type kernel: PropagatorKernel
    :param sigma: Weight exponent, nonnegative
    :type sigma: float
    :returns: The weighted sup
    :rtype: float
    """
    return _weighted_sup(kernel.values, kernel.points, sigma)


def standard_points(extent, seed=0, radii=DEFAULT_RADII, count=8):
    """Standard test set: points inside the support, near it and far from it.

    ``count`` points lie in the ball of radius radii[0] * extent, ``count`` on the
    sphere of radius radii[1] * extent and ``count`` on the sphere of radius
    radii[2] * extent, along random directions.

    :param extent: Support radius R
    :type extent: float
    :param seed: Random seed
    :type seed: int
    :param radii: Radii in units of R
    :type radii: tuple
    :param count: Points per shell
    :type count: int
    :returns: Points, shape (3 * count, 3)
    :rtype: numpy.ndarray
    """
    if not extent > 0:
        raise DomainError("extent must be positive, got {0!r}".format(extent))
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(3 * count, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    r = np.concatenate(
        [
            rng.uniform(0.0, radii[0] * extent, count),
            np.full(count, radii[1] * extent),
            np.full(count, radii[2] * extent),
        ]
    )
    return directions * r[:, None]


@dataclass(frozen=True)
class Scenario:
    """A sampled potential with its threshold data and evolution setup."""

    name: str
    potential: object
    threshold: Optional[ThresholdData]
    cutoff: Cutoff
    lambda_max: float
    points: np.ndarray
    coupling: float = 1.0
    rtol: float = 1e-8

    @classmethod
    def build(cls, name, pot, cutoff, lambda_max, points, coupling=1.0, ker_tol=None, rtol=1e-8):
        """Build the threshold data of a potential and wrap it.

        :param name: Scenario name
        :type name: str
        :param pot: Sampled potential
        :type pot: quartic.potential.SampledPotential
        :param cutoff: Low-energy cutoff
        :type cutoff: quartic.oscillatory.Cutoff
        :param lambda_max: Truncation wavenumber
        :type lambda_max: float
        :param points: Test points, shape (p, 3)
        :type points: numpy.ndarray
        :param coupling: Coupling the potential was sampled with
        :type coupling: float
        :param ker_tol: Kernel tolerance of QTQ
        :type ker_tol: float
        :param rtol: Relative tolerance of the panel fits
        :type rtol: float
        :returns: The scenario
        :rtype: Scenario
        """
        td = None if pot.is_zero else build_threshold(pot, ker_tol=ker_tol)
        return cls(name, pot, td, cutoff, float(lambda_max), _as_points(points), coupling, rtol)

    @property
    def classification(self):
        """Get the threshold verdict, None for the free operator.

        :returns: Classification
        :rtype: quartic.threshold.Classification
        """
        return None if self.threshold is None else self.threshold.classification

    def propagator(self, threads=None, scan=True):
        """Evolution kernel builder over the scenario's test set.

        :param threads: Worker count
        :type threads: int
        :param scan: Screen for embedded eigenvalues first
        :type scan: bool
        :returns: The propagator
        :rtype: Propagator
        """
        return Propagator(
            self.potential,
            self.threshold,
            self.points,
            self.cutoff,
            lambda_max=self.lambda_max,
            rtol=self.rtol,
            threads=threads,
            scan=scan,
        )

    def resonant_part(self, t):
        """Part of the kernel subtracted to expose the faster decay.

        F_t for a first-kind resonance, t^(-3/4) K(0) on every pair for the free
        operator and None at a regular threshold.

        :param t: Time, positive
        :type t: float
        :returns: Kernel values, shape (p, p), or None
        :rtype: numpy.ndarray
        :raises DomainError: If the threshold is neither regular nor a first-kind resonance
        """
        if self.threshold is None:
            shape = (len(self.points), len(self.points))
            return np.full(shape, t**-0.75 * free_profile_origin())
        if self.classification is Classification.REGULAR:
            return None
        return build_F_t(self.threshold, self.potential, t, self.cutoff, self.points)


@dataclass(frozen=True)
class DecayRow:
    """One line of a decay table."""

    scenario: str
    t: float
    sigma: float
    subtract_Ft: bool
    weighted_sup: float
    error_estimate: float


@dataclass(frozen=True)
class DecayReport:
    """Weighted sup norms over a time grid and their fitted decay per weight."""

    rows: Tuple[DecayRow, ...]
    fits: Tuple[DecayFit, ...]
    sigma_list: Tuple[float, ...]
    subtract_Ft: bool

    def fit(self, sigma):
        """Get the fit of a weight exponent.

        :param sigma: Weight exponent
        :type sigma: float
        :returns: The fit
        :rtype: quartic.oscillatory.DecayFit
        """
        return self.fits[self.sigma_list.index(float(sigma))]


def decay_report(scenario, t_grid, sigma_list, subtract_Ft=False, propagator=None):
    """Weighted sup norms of the evolution kernel over times and their decay fits.

    :param scenario: The scenario
    :type scenario: Scenario
    :param t_grid: Times, spanning at least a decade within [1, 1e4]
    :type t_grid: list
    :param sigma_list: Weight exponents
    :type sigma_list: list
    :param subtract_Ft: Subtract the resonant part first
    :type subtract_Ft: bool
    :param propagator: Propagator of the scenario to reuse
    :type propagator: Propagator
    :returns: The table and one fit per weight exponent
    :rtype: DecayReport
    :raises FitError: If a fit fails
    """
    t_grid = [float(t) for t in t_grid]
    sigma_list = tuple(float(s) for s in sigma_list)
    propagator = propagator or scenario.propagator()
    if subtract_Ft and scenario.classification is Classification.REGULAR:
        logger.info("%s: regular threshold, nothing to subtract", scenario.name)

    rows = []
    sups = {sigma: [] for sigma in sigma_list}
    for t in t_grid:
        kernel = propagator.kernel(t)
        values = kernel.values
        if subtract_Ft:
            part = scenario.resonant_part(t)
            if part is not None:
                values = values - part
        for sigma in sigma_list:
            sup = _weighted_sup(values, kernel.points, sigma)
            sups[sigma].append(sup)
            rows.append(
                DecayRow(scenario.name, t, sigma, bool(subtract_Ft), sup, kernel.error_estimate)
            )

    fits = tuple(fit_decay(zip(t_grid, sups[sigma])) for sigma in sigma_list)
    for sigma, fit in zip(sigma_list, fits):
        logger.info(
            "%s: sigma=%g subtract=%s exponent=%.4f +- %.4f",
            scenario.name,
            sigma,
            subtract_Ft,
            fit.exponent,
            fit.stderr,
        )
    return DecayReport(tuple(rows), fits, sigma_list, bool(subtract_Ft))

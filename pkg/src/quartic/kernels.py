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

"""Free resolvent kernels of the second and fourth order operators in three dimensions.

The fourth-order kernel is written through the entire function
phi(z) = (exp(i sigma z) - exp(-z)) / z, so that

    R(lambda^4)(r) = phi(lambda r) / (8 pi lambda)

and the threshold remainders E0, E1, E2 are tails of the Taylor series of phi
divided by lambda. Tails are summed from the series below ``SERIES_CROSSOVER``
and by subtracting the series head from the closed form above it.
"""

import logging
import threading
from math import factorial
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as poly
from scipy.interpolate import CubicSpline

from .exceptions import DiagonalSingularityError, DomainError
from .oscillatory import free_profile, free_profile_origin

logger = logging.getLogger(__name__)

EIGHT_PI = 8.0 * np.pi
SERIES_CROSSOVER = 0.5
SERIES_TERMS = 30
PROFILE_EXTENT = 64.0
PROFILE_STEP = 1.0 / 64.0

# first Taylor index of phi kept by: the full kernel, E0, E1, E2
_TAIL_START = {None: 1, 0: 2, 1: 3, 2: 4}


class ExpansionConstants:
    """Threshold constants of the fourth-order free resolvent.

    R(lambda^4) = a/lambda + G0 + a1 lambda G1 + O(lambda^3) with
    a = (1 +- i)/(8 pi) and a1 = (1 -+ i)/(48 pi).
    """

    def __init__(self):
        """Init method."""
        self._a_plus = (1 + 1j) / EIGHT_PI
        self._a1_plus = (1 - 1j) / (48.0 * np.pi)

    @property
    def a_plus(self):
        """Get a+.

        :returns: (1 + i)/(8 pi)
        :rtype: complex
        """
        return self._a_plus

    @property
    def a_minus(self):
        """Get a-.

        :returns: (1 - i)/(8 pi)
        :rtype: complex
        """
        return self._a_plus.conjugate()

    @property
    def a1_plus(self):
        """Get a1+.

        :returns: (1 - i)/(48 pi)
        :rtype: complex
        """
        return self._a1_plus

    @property
    def a1_minus(self):
        """Get a1-.

        :returns: (1 + i)/(48 pi)
        :rtype: complex
        """
        return self._a1_plus.conjugate()

    def a(self, sign):
        """Get a for a sign.

        :param sign: +1 or -1
        :type sign: int
        :returns: a+ or a-
        :rtype: complex
        """
        return self.a_plus if check_sign(sign) > 0 else self.a_minus

    def a1(self, sign):
        """Get a1 for a sign.

        :param sign: +1 or -1
        :type sign: int
        :returns: a1+ or a1-
        :rtype: complex
        """
        return self.a1_plus if check_sign(sign) > 0 else self.a1_minus


CONSTANTS = ExpansionConstants()


class KernelValue(NamedTuple):
    """Kernel value with its first and second wavenumber derivatives."""

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    def conjugate(self):
        """Complex conjugate of value and derivatives.

        :returns: Conjugated kernel value
        :rtype: KernelValue
        """
        return KernelValue(np.conj(self.value), np.conj(self.d1), np.conj(self.d2))


def check_sign(sign):
    """Validate a boundary value sign.

    :param sign: +1 or -1
    :type sign: int
    :returns: The sign
    :rtype: int
    :raises DomainError: If the sign is not +1 or -1
    """
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1, got {0!r}".format(sign))
    return int(sign)


def _check_wavenumber(lam):
    lam = np.asarray(lam, dtype=float)
    if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
        raise DomainError("wavenumber must be positive")
    return lam


def _check_distance(r, allow_zero):
    r = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r)) or np.any(r < 0):
        raise DomainError("distance must be nonnegative")
    if not allow_zero and np.any(r == 0):
        raise DiagonalSingularityError("kernel is singular at r = 0")
    return r


def _taylor_coefficients(sign, start):
    """Coefficients of sum_{n >= start} c_n z^(n-1), c_n = ((i sigma)^n - (-1)^n)/n!."""
    coef = np.zeros(SERIES_TERMS, dtype=complex)
    for n in range(max(start, 1), SERIES_TERMS + 1):
        coef[n - 1] = ((1j * sign) ** n - (-1.0) ** n) / factorial(n)
    return coef


def _phi_tail(z, sign, start):
    """Tail of phi from Taylor index ``start`` with its first two z-derivatives."""
    coef = _taylor_coefficients(sign, start)
    head = _taylor_coefficients(sign, 1) - coef
    small = z < SERIES_CROSSOVER
    f = np.empty(z.shape, dtype=complex)
    f1 = np.empty(z.shape, dtype=complex)
    f2 = np.empty(z.shape, dtype=complex)

    zs = z[small]
    f[small] = poly.polyval(zs, coef)
    f1[small] = poly.polyval(zs, poly.polyder(coef))
    f2[small] = poly.polyval(zs, poly.polyder(coef, 2))

    zl = z[~small]
    osc = np.exp(1j * sign * zl)
    damp = np.exp(-zl)
    phi = (osc - damp) / zl
    phi1 = (1j * sign * osc + damp) / zl - phi / zl
    phi2 = (-osc - damp) / zl - 2.0 * phi1 / zl
    f[~small] = phi - poly.polyval(zl, head)
    f1[~small] = phi1 - poly.polyval(zl, poly.polyder(head))
    f2[~small] = phi2 - poly.polyval(zl, poly.polyder(head, 2))
    return f, f1, f2


def _scaled_kernel(lam, r, sign, start):
    """kappa(lambda r)/lambda with kappa = phi tail / (8 pi), and its lambda-derivatives."""
    lam, r = np.broadcast_arrays(lam, r)
    z = lam * r
    k0, k1, k2 = (x / EIGHT_PI for x in _phi_tail(z, sign, start))
    value = k0 / lam
    d1 = (z * k1 - k0) / lam**2
    d2 = (z**2 * k2 - 2.0 * z * k1 + 2.0 * k0) / lam**3
    return KernelValue(value, d1, d2)


def schrodinger_resolvent(lam, r, sign):
    """Free resolvent kernel of the Laplacian, exp(+-i lambda r)/(4 pi r).

    :param lam: Wavenumber, positive
    :type lam: numpy.ndarray
    :param r: Distance, positive
    :type r: numpy.ndarray
    :param sign: +1 or -1
    :type sign: int
    :returns: Kernel value and lambda-derivatives
    :rtype: KernelValue
    :raises DomainError: If lambda is not positive
    :raises DiagonalSingularityError: If r is zero
    """
    sign = check_sign(sign)
    lam = _check_wavenumber(lam)
    r = _check_distance(r, allow_zero=False)
    value = np.exp(1j * sign * lam * r) / (4.0 * np.pi * r)
    return KernelValue(value, 1j * sign * r * value, -(r**2) * value)


def quartic_resolvent(lam, r, sign):
    """Free resolvent kernel of the bilaplacian at lambda^4.

    (exp(+-i lambda r) - exp(-lambda r)) / (8 pi lambda^2 r), with the diagonal
    limit (1 +- i)/(8 pi lambda) at r = 0.

    :param lam: Wavenumber, positive
    :type lam: numpy.ndarray
    :param r: Distance, nonnegative
    :type r: numpy.ndarray
    :param sign: +1 or -1
    :type sign: int
    :returns: Kernel value and lambda-derivatives
    :rtype: KernelValue
    :raises DomainError: If lambda is not positive or r is negative
    """
    sign = check_sign(sign)
    lam = _check_wavenumber(lam)
    r = _check_distance(r, allow_zero=True)
    return _scaled_kernel(lam, r, sign, _TAIL_START[None])


def expansion_term(kind, r):
    """Threshold expansion kernels G0 = -r/(8 pi) and G1 = r^2.

    :param kind: "G0" or "G1"
    :type kind: str
    :param r: Distance, nonnegative
    :type r: numpy.ndarray
    :returns: Kernel values
    :rtype: numpy.ndarray
    :raises DomainError: If the kind is unknown or r is negative
    """
    r = _check_distance(r, allow_zero=True)
    if kind == "G0":
        return -r / EIGHT_PI
    if kind == "G1":
        return r**2
    raise DomainError("unknown expansion term {0!r}".format(kind))


def remainder(j, lam, r, sign):
    """Remainders of the threshold expansion of the fourth-order kernel.

    E0 = R - a/lambda, E1 = E0 - G0 and E2 = E1 - a1 lambda G1.

    :param j: Remainder index 0, 1 or 2
    :type j: int
    :param lam: Wavenumber, positive
    :type lam: numpy.ndarray
    :param r: Distance, nonnegative
    :type r: numpy.ndarray
    :param sign: +1 or -1
    :type sign: int
    :returns: Remainder and lambda-derivatives
    :rtype: KernelValue
    :raises DomainError: If j is not 0, 1 or 2
    """
    if j not in (0, 1, 2):
        raise DomainError("remainder index must be 0, 1 or 2, got {0!r}".format(j))
    sign = check_sign(sign)
    lam = _check_wavenumber(lam)
    r = _check_distance(r, allow_zero=True)
    return _scaled_kernel(lam, r, sign, _TAIL_START[j])


def k_family(z):
    """K(z) = (exp(iz) - exp(-z))/(8 pi z) - a+ + z/(8 pi) with K1 = z K' and K2 = z K1'.

    :param z: Nonnegative arguments
    :type z: numpy.ndarray
    :returns: K, K1, K2
    :rtype: tuple
    """
    z = _check_distance(z, allow_zero=True)
    f, f1, f2 = (x / EIGHT_PI for x in _phi_tail(z, 1, _TAIL_START[1]))
    return f, z * f1, z * f1 + z**2 * f2


class _ProfileTable:
    """Cubic spline of the free propagator profile on [0, PROFILE_EXTENT], built once."""

    def __init__(self):
        self._lock = threading.Lock()
        self._spline = None

    def spline(self):
        if self._spline is None:
            with self._lock:
                if self._spline is None:
                    grid = np.linspace(0.0, PROFILE_EXTENT, int(PROFILE_EXTENT / PROFILE_STEP) + 1)
                    values = free_profile(grid)
                    values[0] = free_profile_origin()
                    self._spline = CubicSpline(
                        grid,
                        np.column_stack([values.real, values.imag]),
                        bc_type=((1, np.zeros(2)), "not-a-knot"),
                    )
                    logger.debug("free profile table built with %d nodes", grid.size)
        return self._spline

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape, dtype=complex)
        inside = x <= PROFILE_EXTENT
        if np.any(inside):
            data = self.spline()(x[inside])
            out[inside] = data[..., 0] + 1j * data[..., 1]
        if np.any(~inside):
            out[~inside] = free_profile(x[~inside])
        return out


_PROFILE = _ProfileTable()


def free_propagator_kernel(t, r):
    """Kernel of exp(-it bilaplacian), t^(-3/4) K(t^(-1/4) r).

    :param t: Time, positive
    :type t: float
    :param r: Distance, nonnegative
    :type r: numpy.ndarray
    :returns: Kernel values
    :rtype: numpy.ndarray
    :raises DomainError: If t is not positive
    """
    if not np.isfinite(t) or t <= 0:
        raise DomainError("time must be positive, got {0!r}".format(t))
    r = _check_distance(r, allow_zero=True)
    return t**-0.75 * _PROFILE(r * t**-0.25)

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

"""Sampled potentials on tensor quadrature grids and coupling constant scans."""

import logging
import numbers
from dataclasses import dataclass, field
from typing import Mapping, Tuple

import numpy as np
from numpy.polynomial import legendre
from scipy import optimize

from .exceptions import DomainError, GridCapError, NotFoundError
from .threshold import qtq_spectrum

logger = logging.getLogger(__name__)

NODE_CAP = 4096
SUPPORT_CUTOFF = 1e-12
RULES = ("tensor-gauss", "tensor-trapezoid")
FAMILIES = ("gaussian_well", "gaussian_bump", "double_well", "custom")

_DEFAULTS = {
    "gaussian_well": {"amplitude": -1.0, "width": 1.0, "center": (0.0, 0.0, 0.0)},
    "gaussian_bump": {"amplitude": 1.0, "width": 1.0, "center": (0.0, 0.0, 0.0)},
    "double_well": {
        "amplitude_left": -1.0,
        "amplitude_right": 1.0,
        "separation": 2.0,
        "width": 0.5,
    },
    "custom": {},
}


@dataclass(frozen=True)
class GridSpec:
    """Tensor product quadrature grid on the cube [-extent, extent]^3."""

    extent: float
    points_per_axis: int
    rule: str = "tensor-gauss"

    def __post_init__(self):
        """Validate the grid.

        :raises DomainError: If the extent, the point count or the rule is invalid
        :raises GridCapError: If the grid has more than NODE_CAP nodes
        """
        if not np.isfinite(self.extent) or self.extent <= 0:
            raise DomainError("grid extent must be positive, got {0!r}".format(self.extent))
        if int(self.points_per_axis) != self.points_per_axis or self.points_per_axis < 2:
            raise DomainError("points_per_axis must be an integer >= 2")
        if self.rule not in RULES:
            raise DomainError("unknown quadrature rule {0!r}".format(self.rule))
        if self.points_per_axis**3 > NODE_CAP:
            raise GridCapError(
                "{0}^3 nodes exceed the cap of {1}".format(self.points_per_axis, NODE_CAP),
                stage="grid",
            )

    @property
    def n_nodes(self):
        """Get the number of nodes.

        :returns: points_per_axis^3
        :rtype: int
        """
        return int(self.points_per_axis) ** 3

    def axis(self):
        """One dimensional nodes and weights.

        :returns: Nodes and weights on [-extent, extent]
        :rtype: tuple
        """
        n, r = int(self.points_per_axis), float(self.extent)
        if self.rule == "tensor-gauss":
            x, w = legendre.leggauss(n)
            return r * x, r * w
        return np.linspace(-r, r, n), trapezoid_weights(np.linspace(-r, r, n))

    def nodes_and_weights(self):
        """Tensor product nodes and weights.

        :returns: Nodes of shape (n_nodes, 3) and weights of shape (n_nodes,)
        :rtype: tuple
        """
        x, w = self.axis()
        return tensor_product((x, x, x), (w, w, w))


def trapezoid_weights(x):
    """Trapezoid weights on increasing, possibly nonuniform, nodes.

    :param x: Nodes
    :type x: numpy.ndarray
    :returns: Weights
    :rtype: numpy.ndarray
    """
    gaps = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += gaps / 2.0
    w[1:] += gaps / 2.0
    return w


def tensor_product(axes, axis_weights):
    """Tensor product of three one dimensional rules.

    :param axes: Nodes per axis
    :type axes: tuple
    :param axis_weights: Weights per axis
    :type axis_weights: tuple
    :returns: Nodes of shape (n, 3) and weights of shape (n,)
    :rtype: tuple
    """
    grids = np.meshgrid(*axes, indexing="ij")
    weights = np.einsum("i,j,k->ijk", *axis_weights)
    return np.column_stack([g.ravel() for g in grids]), weights.ravel()


def _real_parameter(name, value):
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise DomainError("parameter {0!r} must be a finite real number".format(name))
    return float(value)


@dataclass(frozen=True)
class PotentialFormula:
    """Named potential family with its parameters."""

    family: str
    parameters: Mapping = field(default_factory=dict)

    def __post_init__(self):
        """Validate family and parameters.

        :raises DomainError: If the family is unknown, a parameter is not a finite real
            or a width is not positive
        """
        if self.family not in FAMILIES:
            raise DomainError("unknown potential family {0!r}".format(self.family))
        if self.family == "custom" and "path" not in self.parameters:
            raise DomainError("custom potentials need a table path")
        for name, value in self.resolved().items():
            if name == "path":
                continue
            if name == "center":
                if len(value) != 3:
                    raise DomainError("center must have three coordinates")
                for c in value:
                    _real_parameter(name, c)
            elif _real_parameter(name, value) <= 0 and name in ("width", "separation"):
                raise DomainError("parameter {0!r} must be positive".format(name))

    def resolved(self):
        """Parameters merged over the family defaults.

        :returns: Parameters
        :rtype: dict
        """
        merged = dict(_DEFAULTS[self.family])
        merged.update(self.parameters)
        return merged

    def __call__(self, points):
        """Evaluate the potential.

        :param points: Points of shape (n, 3)
        :type points: numpy.ndarray
        :returns: Potential values
        :rtype: numpy.ndarray
        :raises DomainError: For the custom family, which is tabulated
        """
        p = self.resolved()
        if self.family in ("gaussian_well", "gaussian_bump"):
            return _gaussian(points, p["amplitude"], p["width"], p["center"])
        if self.family == "double_well":
            offset = np.array([p["separation"] / 2.0, 0.0, 0.0])
            return _gaussian(points, p["amplitude_left"], p["width"], -offset) + _gaussian(
                points, p["amplitude_right"], p["width"], offset
            )
        raise DomainError("custom potentials are read from a table")


def _gaussian(points, amplitude, width, center):
    d2 = np.sum((points - np.asarray(center, dtype=float)) ** 2, axis=1)
    return amplitude * np.exp(-d2 / width**2)


class SampledPotential:
    """Potential sampled on quadrature nodes and split as V = U v^2.

    Nodes with |V| below SUPPORT_CUTOFF * max|V| are outside the effective
    support and are not part of the Birman-Schwinger node set.

    :param nodes: Quadrature nodes, shape (n, 3)
    :type nodes: numpy.ndarray
    :param weights: Positive quadrature weights
    :type weights: numpy.ndarray
    :param values: Potential values at the nodes
    :type values: numpy.ndarray
    :param beta_claimed: Claimed pointwise decay exponent
    :type beta_claimed: float
    :param extent: Half width of the sampled cube
    :type extent: float
    """

    def __init__(self, nodes, weights, values, beta_claimed=12.0, extent=None):
        """Init method.

        :param nodes: Quadrature nodes, shape (n, 3)
        :type nodes: numpy.ndarray
        :param weights: Positive quadrature weights
        :type weights: numpy.ndarray
        :param values: Potential values at the nodes
        :type values: numpy.ndarray
        :param beta_claimed: Claimed pointwise decay exponent
        :type beta_claimed: float
        :param extent: Half width of the sampled cube
        :type extent: float
        :raises DomainError: If the arrays are inconsistent, not finite or not real
        """
        nodes = np.asarray(nodes, dtype=float).reshape(-1, 3)
        weights = np.asarray(weights, dtype=float).ravel()
        values = np.asarray(values)
        if np.iscomplexobj(values):
            raise DomainError("potential values must be real")
        values = values.astype(float).ravel()
        if not (len(nodes) == len(weights) == len(values)):
            raise DomainError("nodes, weights and values must have the same length")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(values))):
            raise DomainError("potential samples must be finite")
        if np.any(weights <= 0):
            raise DomainError("quadrature weights must be positive")

        self._nodes = nodes
        self._weights = weights
        self._v = np.sqrt(np.abs(values))
        self._U = np.sign(values)
        self._V = self._U * self._v * self._v
        self._beta = float(beta_claimed)
        self._extent = float(extent) if extent is not None else float(np.max(np.abs(nodes)))
        peak = np.max(np.abs(self._V), initial=0.0)
        self._support = (self._V != 0) & (np.abs(self._V) >= SUPPORT_CUTOFF * peak)
        self._norm = float(np.sum(self._weights[self._support] * np.abs(self._V[self._support])))
        for array in (self._nodes, self._weights, self._V, self._v, self._U, self._support):
            array.setflags(write=False)

    @property
    def nodes(self):
        """Get the quadrature nodes.

        :returns: Nodes, shape (n, 3)
        :rtype: numpy.ndarray
        """
        return self._nodes

    @property
    def weights(self):
        """Get the quadrature weights.

        :returns: Weights
        :rtype: numpy.ndarray
        """
        return self._weights

    @property
    def V(self):
        """Get the potential values.

        :returns: V = U v^2 at the nodes
        :rtype: numpy.ndarray
        """
        return self._V

    @property
    def v(self):
        """Get |V|^(1/2).

        :returns: v at the nodes
        :rtype: numpy.ndarray
        """
        return self._v

    @property
    def U(self):
        """Get sign(V).

        :returns: U in {-1, 0, 1} at the nodes
        :rtype: numpy.ndarray
        """
        return self._U

    @property
    def beta_claimed(self):
        """Get the claimed decay exponent.

        :returns: beta
        :rtype: float
        """
        return self._beta

    @property
    def extent(self):
        """Get the half width of the sampled cube.

        :returns: Extent
        :rtype: float
        """
        return self._extent

    @property
    def norm_V_L1(self):
        """Get the L1 norm of V on the effective support.

        :returns: sum of weights * |V|
        :rtype: float
        """
        return self._norm

    @property
    def support(self):
        """Get the effective support mask.

        :returns: Boolean mask over the nodes
        :rtype: numpy.ndarray
        """
        return self._support

    @property
    def is_zero(self):
        """Check whether V vanishes identically.

        :returns: True when the effective support is empty
        :rtype: bool
        """
        return not np.any(self._support)

    @property
    def decay_constant(self):
        """Get the fitted C of |V(x)| <= C <x>^-beta.

        :returns: max over nodes of |V| <x>^beta
        :rtype: float
        """
        bracket = np.sqrt(1.0 + np.sum(self._nodes**2, axis=1))
        return float(np.max(np.abs(self._V) * bracket**self._beta, initial=0.0))

    def support_data(self):
        """Nodes, weights, v and U restricted to the effective support.

        :returns: Tuple (nodes, weights, v, U)
        :rtype: tuple
        """
        s = self._support
        return self._nodes[s], self._weights[s], self._v[s], self._U[s]

    def scaled(self, coupling):
        """Potential multiplied by a coupling constant.

        :param coupling: Real coupling constant
        :type coupling: float
        :returns: The potential c V on the same nodes
        :rtype: SampledPotential
        """
        coupling = _real_parameter("coupling", coupling)
        return SampledPotential(
            self._nodes, self._weights, coupling * self._V, self._beta, self._extent
        )


def read_potential_table(path, rule="tensor-trapezoid"):
    """Read a tabulated potential from a CSV file with columns x, y, z, V.

    The rows must form a full tensor product of their axis coordinates; weights
    come from the declared one dimensional rule on those coordinates.

    :param path: CSV file path
    :type path: str
    :param rule: Quadrature rule the coordinates follow
    :type rule: str
    :returns: Nodes, weights, values and the extent
    :rtype: tuple
    :raises DomainError: If the table is not a tensor grid or the rule does not match
    """
    table = np.genfromtxt(path, delimiter=",", names=True, dtype=float)
    missing = {"x", "y", "z", "V"} - set(table.dtype.names or ())
    if missing:
        raise DomainError("potential table lacks columns {0}".format(sorted(missing)))
    table = np.atleast_1d(table)
    axes = [np.unique(table[name]) for name in ("x", "y", "z")]
    if len(table) != np.prod([a.size for a in axes]):
        raise DomainError("potential table is not a full tensor grid")
    if np.prod([a.size for a in axes]) > NODE_CAP:
        raise GridCapError("potential table exceeds {0} nodes".format(NODE_CAP), stage="grid")

    if rule not in RULES:
        raise DomainError("unknown quadrature rule {0!r}".format(rule))
    axis_weights, extent = [], 0.0
    for a in axes:
        if rule == "tensor-trapezoid":
            axis_weights.append(trapezoid_weights(a))
            extent = max(extent, float(np.max(np.abs(a))))
            continue
        x, w = legendre.leggauss(a.size)
        # Gauss nodes stop short of the cube face
        r = (a[-1] - a[0]) / (x[-1] - x[0]) if a.size > 1 else 0.0
        if r <= 0 or not np.allclose(r * x, a, rtol=0, atol=1e-9 * r):
            raise DomainError("table coordinates are not Gauss-Legendre nodes")
        axis_weights.append(r * w)
        extent = max(extent, float(r))

    nodes, weights = tensor_product(axes, axis_weights)
    index = {tuple(p): i for i, p in enumerate(nodes)}
    values = np.empty(len(nodes))
    for row in table:
        values[index[(row["x"], row["y"], row["z"])]] = row["V"]
    return nodes, weights, values, extent


def build_potential(formula, grid, coupling=1.0, beta_claimed=12.0):
    """Sample a potential family on a grid.

    :param formula: Family and parameters
    :type formula: PotentialFormula
    :param grid: Quadrature grid
    :type grid: GridSpec
    :param coupling: Real coupling constant multiplying the family
    :type coupling: float
    :param beta_claimed: Claimed pointwise decay exponent
    :type beta_claimed: float
    :returns: The sampled potential
    :rtype: SampledPotential
    """
    coupling = _real_parameter("coupling", coupling)
    if formula.family == "custom":
        nodes, weights, values, extent = read_potential_table(
            formula.resolved()["path"], rule=grid.rule
        )
    else:
        nodes, weights = grid.nodes_and_weights()
        values = formula(nodes)
        extent = grid.extent
    pot = SampledPotential(nodes, weights, coupling * values, beta_claimed, extent)
    logger.info(
        "potential %s sampled on %d nodes (%d in support), |V|_1=%.6g",
        formula.family,
        len(nodes),
        int(np.sum(pot.support)),
        pot.norm_V_L1,
    )
    return pot


def _check_scan_base(base):
    if base.is_zero:
        raise DomainError("coupling scans need a nonzero potential")


def smallest_singular_value(pot):
    """Smallest singular value of QTQ restricted to QL^2.

    :param pot: Sampled potential, nonzero
    :type pot: SampledPotential
    :returns: sigma_min
    :rtype: float
    """
    return float(np.min(np.abs(qtq_spectrum(pot))))


def coupling_scan(base, couplings, executor=None):
    """Smallest singular value of Q T_c Q on QL^2 for each coupling c.

    :param base: Nonzero potential scaled by each coupling
    :type base: SampledPotential
    :param couplings: Nonzero real couplings
    :type couplings: list
    :param executor: Optional executor used to map over couplings
    :type executor: concurrent.futures.Executor
    :returns: Pairs (c, sigma_min)
    :rtype: list
    :raises DomainError: If the base vanishes or a coupling is zero
    """
    _check_scan_base(base)
    couplings = [_real_parameter("coupling", c) for c in couplings]
    if any(c == 0 for c in couplings):
        raise DomainError("coupling scans exclude c = 0")

    def sigma(c):
        return smallest_singular_value(base.scaled(c))

    mapper = executor.map if executor is not None else map
    return list(zip(couplings, mapper(sigma, couplings)))


def tune_to_resonance(base, bracket, tol=1e-10, samples=33):
    """Tune the coupling so that QT_cQ becomes singular on QL^2.

    A sign change of the tracked eigenvalue between scan points is refined by
    Brent's method; without a sign change the smallest singular value is
    minimized on the best scan cell.

    :param base: Nonzero potential scaled by the coupling
    :type base: SampledPotential
    :param bracket: Coupling interval (c_lo, c_hi) not containing zero
    :type bracket: tuple
    :param tol: Largest acceptable sigma_min at the returned coupling
    :type tol: float
    :param samples: Scan points across the bracket
    :type samples: int
    :returns: Resonant coupling and sigma_min there
    :rtype: tuple
    :raises DomainError: If the bracket is empty or contains zero
    :raises NotFoundError: If no coupling in the bracket reaches the tolerance
    """
    _check_scan_base(base)
    c_lo, c_hi = (_real_parameter("bracket", c) for c in bracket)
    if not c_lo < c_hi or c_lo <= 0 <= c_hi:
        raise DomainError("bracket ({0:g}, {1:g}) is empty or contains 0".format(c_lo, c_hi))

    grid = np.linspace(c_lo, c_hi, samples)
    spectra = [np.sort(qtq_spectrum(base.scaled(c))) for c in grid]
    negatives = np.array([np.sum(e < 0) for e in spectra])
    sigma = np.array([np.min(np.abs(e)) for e in spectra])

    cells = np.flatnonzero(negatives[:-1] != negatives[1:])
    if cells.size:
        cell = cells[np.argmin(np.minimum(sigma[cells], sigma[cells + 1]))]
        index = int(min(negatives[cell], negatives[cell + 1]))

        def tracked(c):
            return float(np.sort(qtq_spectrum(base.scaled(c)))[index])

        c_star = optimize.brentq(
            tracked, grid[cell], grid[cell + 1], xtol=tol * 1e-3, rtol=4 * np.finfo(float).eps
        )
    else:
        best = int(np.argmin(sigma))
        lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, samples - 1)]
        result = optimize.minimize_scalar(
            lambda c: smallest_singular_value(base.scaled(c)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": tol * 1e-3},
        )
        c_star = float(result.x)

    residual = smallest_singular_value(base.scaled(c_star))
    if residual > tol:
        raise NotFoundError(
            "no resonant coupling in [{0:g}, {1:g}]: sigma_min={2:.3e}".format(
                c_lo, c_hi, residual
            ),
            stage="tune",
            context={"coupling": c_star, "sigma_min": residual},
        )
    logger.info("resonant coupling c*=%.15g with sigma_min=%.3e", c_star, residual)
    return float(c_star), residual

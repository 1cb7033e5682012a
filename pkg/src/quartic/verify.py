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

"""Invariant suites run by ``quartic verify``."""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

from .exceptions import QuarticError
from .kernels import CONSTANTS, free_propagator_kernel, quartic_resolvent, remainder
from .oscillatory import (
    Cutoff,
    HighEnergyRule,
    LowEnergyRule,
    PowerLaw,
    cutoff_moment,
    fit_decay,
    free_profile_origin,
)
from .potential import GridSpec, PotentialFormula, build_potential, tune_to_resonance
from .threshold import (
    A_inverse,
    Classification,
    assemble_M,
    build_threshold,
    invert_M_direct,
    invert_M_jensen_nenciu,
    threshold_constant,
)

logger = logging.getLogger(__name__)

SUITES = ("kernels", "oscillatory", "threshold", "all")
JN_SAMPLES = 50


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""

    suite: str
    name: str
    passed: bool
    detail: str


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _relative(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), np.finfo(float).tiny))


def _kernel_checks():
    rng = np.random.default_rng(7)
    lam = rng.uniform(1e-3, 10.0, 64)
    r = rng.uniform(0.0, 10.0, 64)

    def constants():
        gap = abs(CONSTANTS.a_plus * CONSTANTS.a1_plus - CONSTANTS.a_minus * CONSTANTS.a1_minus)
        return gap == 0.0, "|a+a1+ - a-a1-| = {0:.1e}".format(gap)

    def conjugation():
        plus = quartic_resolvent(lam, r, 1)
        minus = quartic_resolvent(lam, r, -1)
        gap = max(
            _relative(minus.value, np.conj(plus.value)), _relative(minus.d2, np.conj(plus.d2))
        )
        return gap <= 1e-14, "max relative gap {0:.1e}".format(gap)

    def continuity():
        worst = 0.0
        for j in (0, 1, 2):
            below = remainder(j, 0.5 * (1.0 - 1e-13), 1.0, 1).value
            above = remainder(j, 0.5 * (1.0 + 1e-13), 1.0, 1).value
            worst = max(worst, abs(above - below) / abs(above))
        return worst <= 1e-10, "largest jump {0:.1e}".format(worst)

    def orders():
        grid = np.geomspace(1e-3, 1e-1, 9)
        s1 = _slope(grid, np.abs(remainder(1, grid, 1.0, 1).value))
        s2 = _slope(grid, np.abs(remainder(2, grid, 1.0, 1).value))
        ok = abs(s1 - 1.0) <= 0.1 and abs(s2 - 3.0) <= 0.1
        return ok, "E1 slope {0:.3f}, E2 slope {1:.3f}".format(s1, s2)

    def origin():
        gap = abs(free_propagator_kernel(1.0, 0.0) - free_profile_origin())
        return gap <= 1e-10 * abs(free_profile_origin()), "gap {0:.1e}".format(gap)

    def uniform_decay():
        radii = np.linspace(0.0, 20.0, 201)
        scaled = [t**0.75 * np.max(np.abs(free_propagator_kernel(t, radii))) for t in (1, 10, 100)]
        ratio = max(scaled) / min(scaled)
        return ratio <= 2.0, "max/min of t^(3/4) sup|K| = {0:.3f}".format(ratio)

    return [
        ("a+a1+ = a-a1-", constants),
        ("sign conjugation", conjugation),
        ("series crossover continuity", continuity),
        ("remainder orders", orders),
        ("free kernel at the origin", origin),
        ("free kernel t^-3/4 bound", uniform_decay),
    ]


def _oscillatory_checks():
    def moment():
        cutoff = Cutoff(1.0)
        x, w = legendre.leggauss(200)
        direct = 0.0
        # chi is a polynomial on each half, so split at its join
        for lam in (0.5 + x / 2.0, 1.5 + x / 2.0):
            direct += np.sum(w / 2.0 * np.exp(-1j * lam**4) * lam**2 * cutoff.chi(lam))
        value = cutoff_moment(1.0, cutoff, 2).value
        gap = abs(value - direct) / abs(direct)
        return gap <= 1e-9, "relative gap {0:.1e}".format(gap)

    def lemma_sweep():
        times = np.geomspace(10.0, 1e4, 7)
        worst = 0.0
        for alpha in (0.5, 1.0, 2.0, 3.0, -0.5, -1.0, -2.0):
            rule = LowEnergyRule(PowerLaw(alpha), Cutoff(1.0))
            scaled = [t ** (1 + alpha / 4) * abs(rule.integrate(t).value) for t in times]
            worst = max(worst, max(scaled) / min(scaled))
        return worst <= 5.0, "worst max/min ratio {0:.3f}".format(worst)

    def high_energy():
        rule = HighEnergyRule(PowerLaw(-2.0), Cutoff(1.0), lambda_max=40.0)
        times = np.geomspace(10.0, 1e3, 8)
        results = [rule.integrate(t) for t in times]
        slope = _slope(times, [float(np.max(r.majorant)) for r in results])
        bounded = all(
            np.all(np.abs(r.value) <= np.asarray(r.majorant) + np.asarray(r.error))
            for r in results
        )
        return abs(slope + 2.0) <= 0.1 and bounded, "majorant slope {0:.3f}".format(slope)

    def fit_recovery():
        times = np.geomspace(1.0, 100.0, 12)
        fit = fit_decay(zip(times, 3.0 * times**-1.25))
        return abs(fit.exponent - 1.25) <= 1e-10, "exponent {0:.12f}".format(fit.exponent)

    return [
        ("cutoff moment quadrature", moment),
        ("oscillatory lemma sweep", lemma_sweep),
        ("high-energy t^-2 majorant", high_energy),
        ("decay fit recovery", fit_recovery),
    ]


def resonant_potential(extent=3.0, points_per_axis=6, bracket=(8.0, 16.0)):
    """Gaussian well tuned to a zero-energy resonance on a small grid.

    :param extent: Grid half width
    :type extent: float
    :param points_per_axis: Nodes per axis
    :type points_per_axis: int
    :param bracket: Coupling bracket searched
    :type bracket: tuple
    :returns: The tuned potential and its coupling
    :rtype: tuple
    """
    base = build_potential(PotentialFormula("gaussian_well"), GridSpec(extent, points_per_axis))
    c_star, _ = tune_to_resonance(base, bracket)
    return base.scaled(c_star), c_star


def _threshold_checks(ker_tol=None):
    pot, c_star = resonant_potential()
    td = build_threshold(pot, ker_tol=ker_tol)
    n = td.vt.size

    def projections():
        P, Q, S1, T = td.P, td.Q, td.S1, td.T
        violations = {
            "P^2 - P": np.linalg.norm(P @ P - P, 2),
            "Q^2 - Q": np.linalg.norm(Q @ Q - Q, 2),
            "PQ": np.linalg.norm(P @ Q, 2),
            "S1^2 - S1": np.linalg.norm(S1 @ S1 - S1, 2),
            "S1 Q - S1": np.linalg.norm(S1 @ Q - S1, 2),
            "S1 P": np.linalg.norm(S1 @ P, 2),
            "tr P - 1": abs(np.trace(P) - 1.0),
        }
        failed = [name for name, gap in violations.items() if gap > 1e-12]
        # S1 must project onto the kernel of QTQ, not onto more of QL^2
        qtq = np.linalg.norm(Q @ T @ Q @ S1, 2) / np.linalg.norm(T, 2)
        if qtq > 1e-8:
            failed.append("QTQ S1")
        largest = max(max(violations.values()), qtq)
        if failed:
            return False, "violated: {0} (largest {1:.1e})".format(", ".join(failed), largest)
        return True, "largest violation {0:.1e}".format(largest)

    def kernel_identities():
        S1, D0 = td.S1, td.D0
        gap = max(
            np.linalg.norm(S1 @ td.vt) / np.linalg.norm(td.vt),
            np.linalg.norm(S1 @ D0 - S1, 2),
            np.linalg.norm(D0 @ S1 - S1, 2),
        )
        return gap <= 1e-10, "largest violation {0:.1e}".format(gap)

    def classification():
        ok = td.classification is Classification.FIRST_KIND and 1 <= td.rank_S1 <= 4
        return ok, "{0}, rank S1 = {1}, c* = {2:.10g}".format(
            td.classification.value, td.rank_S1, c_star
        )

    def jensen_nenciu():
        rng = np.random.default_rng(11)
        lambda0 = Cutoff().lambda0
        lambdas = np.exp(rng.uniform(np.log(1e-3), np.log(lambda0), JN_SAMPLES))
        worst = 0.0
        for lam, sign in zip(lambdas, rng.choice([1, -1], JN_SAMPLES)):
            direct = invert_M_direct(assemble_M(pot, td, lam, int(sign)), lam, int(sign))
            jn = invert_M_jensen_nenciu(pot, td, lam, int(sign))
            worst = max(worst, _relative(jn.matrix, direct.matrix))
        return worst <= 1e-9, "largest relative gap {0:.1e}".format(worst)

    def constant():
        _, _, c = A_inverse(td, 1e-2, 1)
        closed = threshold_constant(td)
        gap = abs(c - closed) / abs(closed)
        real = abs(c.imag) <= 1e-10 * abs(c)
        return gap <= 1e-6 and real, "c = {0:.10g}, closed form {1:.10g}".format(c.real, closed)

    def a_inverse():
        worst = 0.0
        for lam in (1e-3, 1e-2, 1e-1):
            inverse, g, _ = A_inverse(td, lam, 1)
            worst = max(worst, _relative(inverse, td.D0 + g * td.S_op))
        return worst <= 1e-8, "largest relative gap {0:.1e}".format(worst)

    def b_pole():
        if td.D1 is None:
            return False, "no D1"
        lam = 1e-4
        jn = invert_M_jensen_nenciu(pot, td, lam, 1)
        target = -CONSTANTS.a_plus * td.norm_V_L1 * td.D1
        gap = _relative(lam * jn.b_inverse, target)
        return gap <= 2e-2, "relative gap {0:.1e} on {1} nodes".format(gap, n)

    return [
        ("projection algebra", projections),
        ("S1 identities", kernel_identities),
        ("first-kind classification", classification),
        ("Jensen-Nenciu inverse", jensen_nenciu),
        ("threshold constant", constant),
        ("A inverse structure", a_inverse),
        ("B inverse pole", b_pole),
    ]


def _run(suite, checks):
    results = []
    for name, check in checks:
        try:
            passed, detail = check()
        except (QuarticError, np.linalg.LinAlgError) as exc:
            passed, detail = False, "{0}: {1}".format(type(exc).__name__, exc)
        logger.info("%s/%s: %s (%s)", suite, name, "pass" if passed else "FAIL", detail)
        results.append(CheckResult(suite, name, bool(passed), detail))
    return results


def verify(suite="all", ker_tol=None):
    """Run invariant suites.

    :param suite: "kernels", "oscillatory", "threshold" or "all"
    :type suite: str
    :param ker_tol: Kernel tolerance forced on the threshold suite
    :type ker_tol: float
    :returns: One result per check
    :rtype: list
    :raises ValueError: If the suite is unknown
    """
    if suite not in SUITES:
        raise ValueError("unknown suite {0!r}".format(suite))
    results = []
    if suite in ("kernels", "all"):
        results += _run("kernels", _kernel_checks())
    if suite in ("oscillatory", "all"):
        results += _run("oscillatory", _oscillatory_checks())
    if suite in ("threshold", "all"):
        try:
            checks = _threshold_checks(ker_tol)
        except QuarticError as exc:
            return results + [CheckResult("threshold", "setup", False, str(exc))]
        results += _run("threshold", checks)
    return results


def format_table(results):
    """Render results as a fixed width table.

    :param results: Check results
    :type results: list
    :returns: The table
    :rtype: str
    """
    width = max([len(r.name) for r in results] + [5])
    row = "{0:<12} {1:<{w}} {2:<6} {3}"
    lines = [row.format("suite", "check", "status", "detail", w=width)]
    for r in results:
        status = "pass" if r.passed else "FAIL"
        lines.append(row.format(r.suite, r.name, status, r.detail, w=width))
    return "\n".join(lines)

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

"""Zero-energy operator algebra of the Birman-Schwinger operator.

Operators act on weight-normalized coordinates f_i = sqrt(w_i) f(x_i) over the
effective support. A kernel operator becomes the matrix
sqrt(w_i) v_i K(x_i, x_j) v_j sqrt(w_j), the discrete inner product becomes the
Euclidean one, and P, Q, S1 are orthogonal projections. With vt = sqrt(w) v,
|vt|^2 = |V|_1 and

    P = vt vt^T / |V|_1,    T = U + vt G0 vt,    M(lambda) = U + vt R(lambda^4) vt.
"""

import logging
import threading
from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from .exceptions import DomainError, ExtractionError, NearSingularError, raise_error_from_residual
from .kernels import (
    CONSTANTS,
    EIGHT_PI,
    KernelValue,
    check_sign,
    expansion_term,
    quartic_resolvent,
)
from .oscillatory import cutoff_moment

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
T1_CONDITION_CAP = 1e8
B_CONDITION_CAP = 1e12
EMBEDDED_FLAG = 1e-6
MAX_FIRST_KIND_RANK = 4


class Classification(str, Enum):
    """Zero-energy threshold verdict."""

    REGULAR = "Regular"
    FIRST_KIND = "FirstKind"
    OTHER = "OtherNonRegular"


def _coordinates(pot):
    nodes, weights, v, U = pot.support_data()
    if nodes.shape[0] == 0:
        raise DomainError("threshold operators need |V|_1 > 0", stage="threshold")
    return nodes, np.sqrt(weights) * v, U


class SupportFrame(NamedTuple):
    """Weighted v, U and node distances of a potential's effective support."""

    nodes: np.ndarray
    vt: np.ndarray
    U: np.ndarray
    distances: np.ndarray


def support_frame(pot):
    """Support data needed to assemble Birman-Schwinger matrices.

    :param pot: Sampled potential, nonzero
    :type pot: quartic.potential.SampledPotential
    :returns: The frame
    :rtype: SupportFrame
    """
    nodes, vt, U = _coordinates(pot)
    return SupportFrame(nodes, vt, U, cdist(nodes, nodes))


def _q_basis(vt):
    """Orthonormal basis of the orthogonal complement of vt."""
    return linalg.null_space(vt[None, :])


def _t_matrix(U, vt, distances):
    return np.diag(U) + vt[:, None] * expansion_term("G0", distances) * vt[None, :]


def qtq_spectrum(pot):
    """Eigenvalues of QTQ restricted to QL^2.

    :param pot: Sampled potential, nonzero
    :type pot: quartic.potential.SampledPotential
    :returns: Eigenvalues in ascending order
    :rtype: numpy.ndarray
    """
    nodes, vt, U = _coordinates(pot)
    T = _t_matrix(U, vt, cdist(nodes, nodes))
    basis = _q_basis(vt)
    return linalg.eigvalsh(basis.T @ T @ basis)


def kernel_rank(eigenvalues, ker_tol):
    """Rank of the numerical kernel from eigenvalues of QTQ.

    Among the eigenvalues below ``ker_tol`` in magnitude, the cut is placed at the
    largest ratio between consecutive sorted magnitudes.

    :param eigenvalues: Eigenvalues of QTQ on QL^2
    :type eigenvalues: numpy.ndarray
    :param ker_tol: Kernel tolerance
    :type ker_tol: float
    :returns: Kernel rank
    :rtype: int
    """
    s = np.sort(np.abs(eigenvalues))
    below = int(np.sum(s < ker_tol))
    if below == 0:
        return 0
    tiny = np.finfo(float).tiny
    padded = np.append(s, np.inf)
    ratios = padded[1 : below + 1] / np.maximum(padded[:below], tiny)
    return int(np.argmax(ratios)) + 1


class ThresholdData:
    """Zero-energy operators of a sampled potential.

    All matrices act on weight-normalized coordinates over the effective support.

    :param pot: Sampled potential, nonzero
    :type pot: quartic.potential.SampledPotential
    :param ker_tol: Kernel tolerance of QTQ, default 1e-8 |T|
    :type ker_tol: float
    """

    def __init__(self, pot, ker_tol=None):
        """Init method.

        :param pot: Sampled potential, nonzero
        :type pot: quartic.potential.SampledPotential
        :param ker_tol: Kernel tolerance of QTQ, default 1e-8 |T|
        :type ker_tol: float
        :raises DomainError: If the potential vanishes
        :raises NearSingularError: If Q(T + S1)Q is singular on QL^2
        """
        nodes, vt, U = _coordinates(pot)
        n = vt.size
        self._nodes, self._vt, self._U = nodes, vt, U
        self._norm = float(vt @ vt)
        self._distances = cdist(nodes, nodes)
        self._T = _t_matrix(U, vt, self._distances)
        self._vG1v = vt[:, None] * expansion_term("G1", self._distances) * vt[None, :]
        self._P = np.outer(vt, vt) / self._norm
        self._Q = np.eye(n) - self._P
        self._ker_tol = float(ker_tol) if ker_tol is not None else 1e-8 * linalg.norm(self._T, 2)

        basis = _q_basis(vt)
        eigenvalues, vectors = linalg.eigh(basis.T @ self._T @ basis)
        rank = kernel_rank(eigenvalues, self._ker_tol)
        kernel = np.argsort(np.abs(eigenvalues))[:rank]
        frame = basis @ vectors
        self._eigenvalues = eigenvalues
        self._rank = rank
        self._Y = frame[:, kernel]
        self._S1 = self._Y @ self._Y.T

        # Q(T + S1)Q is diagonal in the eigenframe of QTQ
        shifted = eigenvalues.copy()
        shifted[kernel] += 1.0
        if np.min(np.abs(shifted)) < np.finfo(float).eps * max(np.max(np.abs(shifted)), 1.0):
            raise NearSingularError("Q(T + S1)Q is singular on QL^2", stage="threshold")
        self._D0 = (frame / shifted) @ frame.T

        self._T1 = None
        self._D1 = None
        self._t1_condition = None
        if rank == 0:
            self._classification = Classification.REGULAR
        else:
            Y = self._Y
            TY = self._T @ Y
            T1 = (TY.T @ self._P @ TY) - self._norm / (3.0 * EIGHT_PI**2) * (Y.T @ self._vG1v @ Y)
            self._T1 = T1
            self._t1_condition = float(np.linalg.cond(T1))
            if self._t1_condition < T1_CONDITION_CAP and rank <= MAX_FIRST_KIND_RANK:
                self._classification = Classification.FIRST_KIND
                self._D1 = Y @ linalg.inv(T1) @ Y.T
            else:
                self._classification = Classification.OTHER
                logger.warning(
                    "non-regular threshold beyond the first kind: rank S1=%d, cond T1=%.3e",
                    rank,
                    self._t1_condition,
                )

        identity = np.eye(n)
        self._S = (identity - self._D0 @ self._T) @ self._P @ (identity - self._T @ self._D0)
        self._S = (self._S + self._S.T) / 2.0
        self._F = {}
        for sign in (1, -1):
            a, a1 = CONSTANTS.a(sign), CONSTANTS.a1(sign)
            base = self._S / (a * self._norm)
            self._F[("R", sign)] = base + a1 * (self._vG1v @ self._D0)
            self._F[("L", sign)] = base + a1 * (self._D0 @ self._vG1v)
        logger.info(
            "threshold %s: rank S1=%d, ker_tol=%.3e, min|eig QTQ|=%.3e",
            self._classification.value,
            rank,
            self._ker_tol,
            float(np.min(np.abs(eigenvalues))),
        )

    @property
    def nodes(self):
        """Get the support nodes.

        :returns: Nodes, shape (n, 3)
        :rtype: numpy.ndarray
        """
        return self._nodes

    @property
    def vt(self):
        """Get sqrt(w) v on the support.

        :returns: Weighted v
        :rtype: numpy.ndarray
        """
        return self._vt

    @property
    def U(self):
        """Get sign(V) on the support.

        :returns: U
        :rtype: numpy.ndarray
        """
        return self._U

    @property
    def norm_V_L1(self):
        """Get |V|_1 = |vt|^2.

        :returns: L1 norm
        :rtype: float
        """
        return self._norm

    @property
    def distances(self):
        """Get the node distance matrix.

        :returns: Distances
        :rtype: numpy.ndarray
        """
        return self._distances

    @property
    def P(self):
        """Get the projection onto span(v).

        :returns: P
        :rtype: numpy.ndarray
        """
        return self._P

    @property
    def Q(self):
        """Get I - P.

        :returns: Q
        :rtype: numpy.ndarray
        """
        return self._Q

    @property
    def T(self):
        """Get U + v G0 v.

        :returns: T
        :rtype: numpy.ndarray
        """
        return self._T

    @property
    def vG1v(self):
        """Get v G1 v.

        :returns: v G1 v
        :rtype: numpy.ndarray
        """
        return self._vG1v

    @property
    def D0(self):
        """Get the inverse of Q(T + S1)Q on QL^2, extended by zero.

        :returns: D0
        :rtype: numpy.ndarray
        """
        return self._D0

    @property
    def S1(self):
        """Get the projection onto the kernel of QTQ.

        :returns: S1
        :rtype: numpy.ndarray
        """
        return self._S1

    @property
    def kernel_basis(self):
        """Get an orthonormal basis of S1 L^2.

        :returns: Basis, shape (n, rank_S1)
        :rtype: numpy.ndarray
        """
        return self._Y

    @property
    def rank_S1(self):
        """Get the rank of S1.

        :returns: Rank
        :rtype: int
        """
        return self._rank

    @property
    def qtq_eigenvalues(self):
        """Get the eigenvalues of QTQ on QL^2.

        :returns: Eigenvalues
        :rtype: numpy.ndarray
        """
        return self._eigenvalues

    @property
    def kernel_eigenvalues(self):
        """Get the eigenvalues of QTQ assigned to S1.

        :returns: Eigenvalues
        :rtype: numpy.ndarray
        """
        return self._eigenvalues[np.argsort(np.abs(self._eigenvalues))[: self._rank]]

    @property
    def ker_tol(self):
        """Get the kernel tolerance.

        :returns: Tolerance
        :rtype: float
        """
        return self._ker_tol

    @property
    def T1(self):
        """Get T1 in the basis of S1 L^2, None when regular.

        :returns: T1
        :rtype: numpy.ndarray
        """
        return self._T1

    @property
    def t1_condition(self):
        """Get the condition number of T1, None when regular.

        :returns: Condition number
        :rtype: float
        """
        return self._t1_condition

    @property
    def D1(self):
        """Get S1 T1^-1 S1, None unless the resonance is of the first kind.

        :returns: D1
        :rtype: numpy.ndarray
        """
        return self._D1

    @property
    def S_op(self):
        """Get S = (I - QD0QT) P (I - TQD0Q).

        :returns: S
        :rtype: numpy.ndarray
        """
        return self._S

    @property
    def FL_plus(self):
        """Get F_L+.

        :returns: F_L+
        :rtype: numpy.ndarray
        """
        return self._F[("L", 1)]

    @property
    def FL_minus(self):
        """Get F_L-.

        :returns: F_L-
        :rtype: numpy.ndarray
        """
        return self._F[("L", -1)]

    @property
    def FR_plus(self):
        """Get F_R+.

        :returns: F_R+
        :rtype: numpy.ndarray
        """
        return self._F[("R", 1)]

    @property
    def FR_minus(self):
        """Get F_R-.

        :returns: F_R-
        :rtype: numpy.ndarray
        """
        return self._F[("R", -1)]

    @property
    def classification(self):
        """Get the threshold verdict.

        :returns: Classification
        :rtype: Classification
        """
        return self._classification

    def F(self, side, sign):
        """Get F_L or F_R for a sign.

        :param side: "L" or "R"
        :type side: str
        :param sign: +1 or -1
        :type sign: int
        :returns: The operator
        :rtype: numpy.ndarray
        """
        return self._F[(side, check_sign(sign))]

    def summary(self):
        """Scalar description for reports.

        :returns: Classification data
        :rtype: dict
        """
        return {
            "classification": self._classification.value,
            "rank_S1": self._rank,
            "ker_tol": self._ker_tol,
            "min_abs_qtq_eigenvalue": float(np.min(np.abs(self._eigenvalues))),
            "kernel_eigenvalues": [float(e) for e in self.kernel_eigenvalues],
            "t1_condition": self._t1_condition,
            "threshold_constant": threshold_constant(self),
        }


def build_threshold(pot, ker_tol=None):
    """Build the zero-energy operators and classify the threshold.

    :param pot: Sampled potential, nonzero
    :type pot: quartic.potential.SampledPotential
    :param ker_tol: Kernel tolerance of QTQ, default 1e-8 |T|
    :type ker_tol: float
    :returns: Threshold data
    :rtype: ThresholdData
    """
    return ThresholdData(pot, ker_tol=ker_tol)


def threshold_constant(td):
    """Real constant c of (A(lambda))^-1 = QD0Q + (a |V|_1/lambda + c)^-1 S.

    :param td: Threshold data
    :type td: ThresholdData
    :returns: c = (vt T vt - vt T D0 T vt) / |V|_1
    :rtype: float
    """
    Tv = td.T @ td.vt
    return float((td.vt @ Tv - Tv @ td.D0 @ Tv) / td.norm_V_L1)


@dataclass(frozen=True)
class MInverse:
    """Inverse of M(lambda) with its provenance."""

    lam: Optional[float]
    sign: Optional[int]
    matrix: np.ndarray
    method: str
    condition_estimate: float
    residual: float
    b_inverse: Optional[np.ndarray] = None


def assemble_M(pot, td, lam, sign, derivatives=False):
    """Birman-Schwinger matrix M(lambda) = U + vt R(lambda^4) vt.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param td: Threshold data or support frame of pot, or None to assemble from pot
    :type td: ThresholdData
    :param lam: Wavenumber, positive
    :type lam: float
    :param sign: +1 or -1
    :type sign: int
    :param derivatives: Also return the lambda-derivatives
    :type derivatives: bool
    :returns: M, or M with its derivatives as a KernelValue
    :rtype: numpy.ndarray
    """
    frame = td if td is not None else support_frame(pot)
    vt, U, distances = frame.vt, frame.U, frame.distances
    kernel = quartic_resolvent(lam, distances, sign)
    outer = vt[:, None] * vt[None, :]
    M = np.diag(U.astype(complex)) + outer * kernel.value
    if not derivatives:
        return M
    return KernelValue(M, outer * kernel.d1, outer * kernel.d2)


def invert_M_direct(M, lam=None, sign=None):
    """Invert M by a dense LU factorization with a residual check.

    :param M: Square matrix
    :type M: numpy.ndarray
    :param lam: Wavenumber, for provenance
    :type lam: float
    :param sign: Sign, for provenance
    :type sign: int
    :returns: The inverse
    :rtype: MInverse
    :raises NearSingularError: If the residual exceeds RESIDUAL_TOL
    """
    M = np.asarray(M)
    identity = np.eye(M.shape[0])
    try:
        X = linalg.lu_solve(linalg.lu_factor(M), identity)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NearSingularError(str(exc), stage="invert", context={"lambda": lam}) from exc
    residual = relative_residual(M, X)
    raise_error_from_residual(residual, RESIDUAL_TOL, stage="invert", **_provenance(lam, sign))
    condition = float(np.linalg.norm(M, 1) * np.linalg.norm(X, 1))
    return MInverse(lam, sign, X, "direct", condition, residual)


def relative_residual(M, X, B=None):
    """Normwise relative residual |MX - B| / (|M| |X| + |B|) in the 1-norm.

    :param M: Matrix
    :type M: numpy.ndarray
    :param X: Computed solution
    :type X: numpy.ndarray
    :param B: Right hand side, identity when omitted
    :type B: numpy.ndarray
    :returns: Residual, nan when the solution is not finite
    :rtype: float
    """
    if B is None:
        B = np.eye(M.shape[0])
    with np.errstate(all="ignore"):
        scale = np.linalg.norm(M, 1) * np.linalg.norm(X, 1) + np.linalg.norm(B, 1)
        return float(np.linalg.norm(M @ X - B, 1) / scale)


def _provenance(lam, sign):
    context = {}
    if lam is not None:
        context["lambda"] = float(lam)
    if sign is not None:
        context["sign"] = int(sign)
    return context


def invert_M_jensen_nenciu(pot, td, lam, sign):
    """Invert M(lambda) through (M + S1)^-1 and the small matrix B on S1 L^2.

    M^-1 = (M + S1)^-1 + (M + S1)^-1 S1 B^-1 S1 (M + S1)^-1 with
    B = S1 - S1 (M + S1)^-1 S1.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param td: Threshold data of pot
    :type td: ThresholdData
    :param lam: Wavenumber, positive
    :type lam: float
    :param sign: +1 or -1
    :type sign: int
    :returns: The inverse, with B^-1 embedded in the full space
    :rtype: MInverse
    :raises NearSingularError: If B is singular at this wavenumber
    """
    M = assemble_M(pot, td, lam, sign)
    if td.rank_S1 == 0:
        direct = invert_M_direct(M, lam, sign)
        return MInverse(
            lam, sign, direct.matrix, "jensen_nenciu", direct.condition_estimate, direct.residual
        )

    Y = td.kernel_basis
    X = linalg.lu_solve(linalg.lu_factor(M + td.S1), np.eye(M.shape[0]))
    XY = X @ Y
    B = np.eye(td.rank_S1) - Y.T @ XY
    condition = np.linalg.cond(B)
    if not condition < B_CONDITION_CAP:
        raise NearSingularError(
            "B is singular at lambda={0:.6g} (cond {1:.3e})".format(lam, condition),
            stage="jensen-nenciu",
            context=_provenance(lam, sign),
        )
    B_inv = linalg.inv(B)
    matrix = X + XY @ B_inv @ (Y.T @ X)
    residual = relative_residual(M, matrix)
    raise_error_from_residual(
        residual, RESIDUAL_TOL, stage="jensen-nenciu", **_provenance(lam, sign)
    )
    estimate = float(np.linalg.norm(M, 1) * np.linalg.norm(matrix, 1))
    return MInverse(
        lam, sign, matrix, "jensen_nenciu", estimate, residual, b_inverse=Y @ B_inv @ Y.T
    )


def _g_value(td, lam, sign):
    a = CONSTANTS.a(check_sign(sign))
    A = a * td.norm_V_L1 / lam * td.P + td.T
    if td.rank_S1:
        A = A + td.S1
    inverse = linalg.inv(A)
    g = td.vt @ inverse @ td.vt / td.norm_V_L1
    return inverse, g, 1.0 / g - a * td.norm_V_L1 / lam


def A_inverse(td, lam, sign, check=0.5):
    """Invert A(lambda) = a |V|_1 P / lambda + T (+ S1) and extract g(lambda) and c.

    :param td: Threshold data
    :type td: ThresholdData
    :param lam: Wavenumber, positive
    :type lam: float
    :param sign: +1 or -1
    :type sign: int
    :param check: Factor of the second wavenumber used to confirm c
    :type check: float
    :returns: The inverse, g(lambda) and c
    :rtype: tuple
    :raises ExtractionError: If c differs between lambda and check * lambda
    """
    if not lam > 0:
        raise DomainError("wavenumber must be positive")
    inverse, g, c = _g_value(td, lam, sign)
    _, _, c_check = _g_value(td, check * lam, sign)
    if abs(c - c_check) > 1e-6 * max(abs(c), abs(c_check), np.finfo(float).tiny):
        raise ExtractionError(
            "threshold constant varies: {0:.9g} vs {1:.9g}".format(c, c_check),
            stage="threshold",
            context={"lambda": float(lam)},
        )
    return inverse, g, c


def _require_first_kind(td):
    if td.classification is not Classification.FIRST_KIND:
        raise DomainError(
            "operation needs a first-kind resonance, threshold is {0}".format(
                td.classification.value
            ),
            stage="threshold",
        )


def c_minus1_factors(td, sign, points):
    """Finite-rank factors L, R of C_-1(x, y) = L(x) D1 R(y) on a point set.

    :param td: Threshold data of a first-kind resonance
    :type td: ThresholdData
    :param sign: +1 or -1
    :type sign: int
    :param points: Evaluation points, shape (p, 3)
    :type points: numpy.ndarray
    :returns: L of shape (p, n) and R of shape (n, p)
    :rtype: tuple
    """
    _require_first_kind(td)
    sign = check_sign(sign)
    a = CONSTANTS.a(sign)
    G0 = expansion_term("G0", cdist(np.asarray(points, dtype=float).reshape(-1, 3), td.nodes))
    left = G0 * td.vt + a * (td.vt @ td.F("L", sign))
    right = (td.vt[:, None] * G0.T) + a * (td.F("R", sign) @ td.vt)[:, None]
    return left, right


def build_C_minus1(td, pot, sign, points):
    """Kernel of C_-1 on all ordered pairs of a point set.

    :param td: Threshold data of a first-kind resonance
    :type td: ThresholdData
    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param sign: +1 or -1
    :type sign: int
    :param points: Evaluation points, shape (p, 3)
    :type points: numpy.ndarray
    :returns: C_-1(x_p, x_q), shape (p, p)
    :rtype: numpy.ndarray
    """
    left, right = c_minus1_factors(td, sign, points)
    return left @ td.D1 @ right


def pole_difference(td, pot, points):
    """Residue of the spectral density at zero, a+ |V|_1 C_-1+ - a- |V|_1 C_-1-.

    :param td: Threshold data of a first-kind resonance
    :type td: ThresholdData
    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param points: Evaluation points, shape (p, 3)
    :type points: numpy.ndarray
    :returns: Residue kernel, shape (p, p)
    :rtype: numpy.ndarray
    """
    plus = build_C_minus1(td, pot, 1, points)
    minus = build_C_minus1(td, pot, -1, points)
    return td.norm_V_L1 * (CONSTANTS.a_plus * plus - CONSTANTS.a_minus * minus)


def build_F_t(td, pot, t, cutoff, points):
    """Resonant finite-rank part F_t of the evolution on all ordered pairs.

    F_t = (2 / (pi i)) * [integral of exp(-it lambda^4) lambda^2 chi] * pole_difference.

    :param td: Threshold data of a first-kind resonance
    :type td: ThresholdData
    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param t: Time, positive
    :type t: float
    :param cutoff: Low-energy cutoff
    :type cutoff: quartic.oscillatory.Cutoff
    :param points: Evaluation points, shape (p, 3)
    :type points: numpy.ndarray
    :returns: F_t(x_p, x_q), shape (p, p)
    :rtype: numpy.ndarray
    """
    residue = pole_difference(td, pot, points)
    moment = cutoff_moment(t, cutoff, power=2).value
    return 2.0 / (np.pi * 1j) * moment * residue


@dataclass(frozen=True)
class SpectrumScan:
    """Smallest singular values of a family of Birman-Schwinger matrices."""

    grid: np.ndarray
    sigma_min: np.ndarray
    flagged: np.ndarray

    @property
    def clean(self):
        """Check that no grid point is flagged.

        :returns: True when nothing is flagged
        :rtype: bool
        """
        return not bool(np.any(self.flagged))


def embedded_eigenvalue_scan(pot, td, lambdas):
    """Profile of sigma_min(M+(lambda)) with dips below EMBEDDED_FLAG flagged.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param td: Threshold data or support frame of pot, or None
    :type td: ThresholdData
    :param lambdas: Positive wavenumbers
    :type lambdas: numpy.ndarray
    :returns: The profile
    :rtype: SpectrumScan
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(lambdas <= 0):
        raise DomainError("scan wavenumbers must be positive")
    frame = td if td is not None else support_frame(pot)
    sigma = np.array([linalg.svdvals(assemble_M(pot, frame, lam, 1))[-1] for lam in lambdas])
    flagged = sigma < EMBEDDED_FLAG
    if np.any(flagged):
        logger.warning(
            "embedded eigenvalue candidates at lambda=%s",
            ", ".join("{0:.6g}".format(x) for x in lambdas[flagged]),
        )
    return SpectrumScan(lambdas, sigma, flagged)


@dataclass(frozen=True)
class BoundStateScan:
    """Negative-energy Birman-Schwinger profile over mu with E = -mu^4."""

    mu: np.ndarray
    sigma_min: np.ndarray
    negative_count: np.ndarray

    @property
    def crossings(self):
        """Energies where an eigenvalue of M(-mu^4) crosses zero.

        :returns: Midpoint energies of the cells with a change of negative count
        :rtype: numpy.ndarray
        """
        cells = np.flatnonzero(self.negative_count[:-1] != self.negative_count[1:])
        return -(((self.mu[cells] + self.mu[cells + 1]) / 2.0) ** 4)


def bound_state_scan(pot, mus, td=None):
    """Screen for eigenvalues -mu^4 < 0 of the perturbed operator.

    M(-mu^4) = U + vt R(-mu^4) vt is real symmetric, with the free kernel
    exp(-mu r / sqrt 2) sin(mu r / sqrt 2) / (4 pi mu^2 r); it is singular exactly
    when -mu^4 is an eigenvalue.

    :param pot: Sampled potential
    :type pot: quartic.potential.SampledPotential
    :param mus: Positive energy scales
    :type mus: numpy.ndarray
    :param td: Threshold data or support frame of pot, or None
    :type td: ThresholdData
    :returns: The profile
    :rtype: BoundStateScan
    """
    frame = td if td is not None else support_frame(pot)
    vt, U, distances = frame.vt, frame.U, frame.distances
    mus = np.asarray(mus, dtype=float)
    sigma, negative = [], []
    for mu in mus:
        k = mu / np.sqrt(2.0)
        # sin(k r)/r -> k on the diagonal
        shape = k * np.sinc(k * distances / np.pi)
        kernel = np.exp(-k * distances) * shape / (4.0 * np.pi * mu**2)
        e = linalg.eigvalsh(np.diag(U) + vt[:, None] * kernel * vt[None, :])
        sigma.append(np.min(np.abs(e)))
        negative.append(int(np.sum(e < 0)))
    scan = BoundStateScan(mus, np.array(sigma), np.array(negative))
    if scan.crossings.size:
        logger.warning("bound states near E=%s", scan.crossings)
    return scan


class MInverseCache:
    """Bounded cache of M(lambda)^-1 keyed by (lambda, sign).

    Reads are lock free; insertion is serialized.

    :param maxsize: Number of inverses kept
    :type maxsize: int
    """

    def __init__(self, maxsize=64):
        """Init method.

        :param maxsize: Number of inverses kept
        :type maxsize: int
        """
        self.maxsize = maxsize
        self._data = OrderedDict()
        self._lock = threading.Lock()

    def __len__(self):
        """Len method.

        :returns: Number of cached inverses
        :rtype: int
        """
        return len(self._data)

    def get(self, pot, td, lam, sign):
        """Get the inverse for (lambda, sign), computing it on a miss.

        :param pot: Sampled potential
        :type pot: quartic.potential.SampledPotential
        :param td: Threshold data or support frame of pot, or None
        :type td: ThresholdData
        :param lam: Wavenumber, positive
        :type lam: float
        :param sign: +1 or -1
        :type sign: int
        :returns: The inverse
        :rtype: MInverse
        """
        key = (float(lam), check_sign(sign))
        found = self._data.get(key)
        if found is not None:
            return found
        inverse = invert_M_direct(assemble_M(pot, td, lam, sign), lam, sign)
        with self._lock:
            if key not in self._data:
                self._data[key] = inverse
                while len(self._data) > self.maxsize:
                    self._data.popitem(last=False)
            return self._data[key]

"""Test the threshold operators and the inversion of M."""

import numpy as np
import pytest

from quartic.exceptions import DomainError, NearSingularError
from quartic.kernels import CONSTANTS
from quartic.oscillatory import Cutoff
from quartic.threshold import (
    MAX_FIRST_KIND_RANK,
    A_inverse,
    Classification,
    MInverseCache,
    ThresholdData,
    assemble_M,
    bound_state_scan,
    build_C_minus1,
    build_F_t,
    embedded_eigenvalue_scan,
    invert_M_direct,
    invert_M_jensen_nenciu,
    kernel_rank,
    pole_difference,
    relative_residual,
    support_frame,
    threshold_constant,
)


def _close(a, b, rtol):
    return np.linalg.norm(a - b) <= rtol * max(np.linalg.norm(b), np.finfo(float).tiny)


@pytest.mark.parametrize(
    "eigenvalues,rank",
    [
        ([1.0, 2.0], 0),
        ([1e-12, 1e-3, 1.0], 1),
        ([1e-14, 1e-12, 1.0], 2),
        ([1e-12, 1e-11], 2),
        ([-1e-13, 0.5, -2.0], 1),
    ],
)
def test_kernel_rank(eigenvalues, rank):
    """Test the gap rule for the numerical kernel."""
    assert kernel_rank(np.array(eigenvalues), 1e-8) == rank


def test_zero_potential_has_no_threshold_data(free_potential):
    """Test that the threshold needs a nonzero potential."""
    with pytest.raises(DomainError):
        ThresholdData(free_potential)


def test_projections(regular_threshold):
    """Test that P and Q are complementary orthogonal projections with P vt = vt."""
    td = regular_threshold
    identity = np.eye(td.vt.size)
    np.testing.assert_allclose(td.P @ td.P, td.P, atol=1e-14)
    np.testing.assert_allclose(td.P + td.Q, identity, atol=1e-15)
    np.testing.assert_allclose(td.P @ td.vt, td.vt, rtol=1e-13)
    assert np.trace(td.P) == pytest.approx(1.0)
    assert td.norm_V_L1 == pytest.approx(td.vt @ td.vt)


def test_regular_threshold(regular_threshold):
    """Test the repulsive bump: regular, D0 inverts QTQ on QL^2."""
    td = regular_threshold
    assert td.classification is Classification.REGULAR
    assert td.rank_S1 == 0
    assert not np.any(td.S1)
    assert td.D1 is None and td.T1 is None
    np.testing.assert_allclose(td.Q @ td.T @ td.D0, td.Q, atol=1e-10)
    np.testing.assert_allclose(td.Q @ td.D0 @ td.Q, td.D0, atol=1e-12)


def test_first_kind_threshold(resonant_threshold):
    """Test the tuned well: first kind with a small numerical kernel."""
    td = resonant_threshold
    assert td.classification is Classification.FIRST_KIND
    assert 1 <= td.rank_S1 <= MAX_FIRST_KIND_RANK
    assert td.t1_condition < 1e8
    assert np.all(np.abs(td.kernel_eigenvalues) < td.ker_tol)
    assert td.kernel_basis.shape == (td.vt.size, td.rank_S1)


def test_loose_kernel_tolerance(resonant_potential):
    """Test that an oversized kernel tolerance takes all of QL^2 as kernel."""
    td = ThresholdData(resonant_potential, ker_tol=1e3)
    assert td.rank_S1 == td.vt.size - 1
    assert td.classification is Classification.OTHER
    np.testing.assert_allclose(td.S1, td.Q, atol=1e-10)
    assert np.linalg.norm(td.Q @ td.T @ td.Q @ td.S1, 2) > 1e-3 * np.linalg.norm(td.T, 2)


def test_s1_identities(resonant_threshold):
    """Test S1^2 = S1, S1 Q = S1, S1 vt = 0 and D0 S1 = S1."""
    td = resonant_threshold
    np.testing.assert_allclose(td.S1 @ td.S1, td.S1, atol=1e-10)
    np.testing.assert_allclose(td.S1 @ td.Q, td.S1, atol=1e-10)
    np.testing.assert_allclose(td.S1 @ td.vt, 0.0, atol=1e-10 * np.linalg.norm(td.vt))
    np.testing.assert_allclose(td.D0 @ td.S1, td.S1, atol=1e-8)
    shifted = td.Q @ (td.T + td.S1) @ td.Q
    np.testing.assert_allclose(shifted @ td.D0, td.Q, atol=1e-8)


def test_f_operators(resonant_threshold):
    """Test F_R^T = F_L and the conjugation between signs."""
    td = resonant_threshold
    scale = np.abs(td.FL_plus).max()
    np.testing.assert_allclose(td.FR_plus.T, td.FL_plus, atol=1e-10 * scale)
    np.testing.assert_allclose(td.FL_minus, np.conj(td.FL_plus), atol=1e-10 * scale)
    np.testing.assert_array_equal(td.F("R", -1), td.FR_minus)
    with pytest.raises(DomainError):
        td.F("L", 0)


def test_summary(resonant_threshold):
    """Test the summary fields."""
    summary = resonant_threshold.summary()
    assert summary["classification"] == "FirstKind"
    assert summary["rank_S1"] == resonant_threshold.rank_S1
    assert len(summary["kernel_eigenvalues"]) == resonant_threshold.rank_S1
    assert summary["threshold_constant"] == threshold_constant(resonant_threshold)


def test_assemble_m(regular_potential, regular_threshold):
    """Test that M does not depend on how the frame is supplied."""
    lam = 0.6
    M = assemble_M(regular_potential, regular_threshold, lam, 1)
    np.testing.assert_array_equal(M, assemble_M(regular_potential, None, lam, 1))
    np.testing.assert_array_equal(
        M, assemble_M(regular_potential, support_frame(regular_potential), lam, 1)
    )
    np.testing.assert_allclose(M, M.T, atol=0)
    np.testing.assert_allclose(assemble_M(regular_potential, None, lam, -1), np.conj(M))
    with_derivatives = assemble_M(regular_potential, None, lam, 1, derivatives=True)
    np.testing.assert_array_equal(with_derivatives.value, M)


def test_invert_m_direct(regular_potential):
    """Test the direct inverse and its provenance."""
    M = assemble_M(regular_potential, None, 0.8, 1)
    inverse = invert_M_direct(M, 0.8, 1)
    assert inverse.method == "direct"
    assert (inverse.lam, inverse.sign) == (0.8, 1)
    assert inverse.residual <= 1e-8
    np.testing.assert_allclose(M @ inverse.matrix, np.eye(M.shape[0]), atol=1e-9)


def test_invert_m_direct_singular():
    """Test that a singular matrix raises NearSingularError."""
    with pytest.raises(NearSingularError):
        invert_M_direct(np.ones((3, 3)), 0.5, 1)


def test_relative_residual():
    """Test the residual of an exact and of a wrong inverse."""
    M = np.diag([2.0, 4.0])
    assert relative_residual(M, np.diag([0.5, 0.25])) == 0.0
    assert relative_residual(M, np.eye(2)) > 0.1
    assert np.isnan(relative_residual(M, np.full((2, 2), np.nan)))


@pytest.mark.parametrize("sign", [1, -1])
def test_jensen_nenciu_matches_direct(resonant_potential, resonant_threshold, sign):
    """Test that both inversions agree near the resonance."""
    for lam in np.geomspace(1e-3, 1.0, 5):
        M = assemble_M(resonant_potential, resonant_threshold, lam, sign)
        direct = invert_M_direct(M, lam, sign)
        jn = invert_M_jensen_nenciu(resonant_potential, resonant_threshold, lam, sign)
        assert jn.method == "jensen_nenciu"
        assert jn.b_inverse is not None
        assert _close(jn.matrix, direct.matrix, 1e-8)


@pytest.mark.slow
def test_jensen_nenciu_random_low_energy(resonant_potential, resonant_threshold):
    """Test both inversions on random samples below the default cutoff."""
    rng = np.random.default_rng(23)
    lambda0 = Cutoff().lambda0
    lambdas = np.exp(rng.uniform(np.log(1e-3), np.log(lambda0), 50))
    for lam, sign in zip(lambdas, rng.choice([1, -1], 50)):
        sign = int(sign)
        M = assemble_M(resonant_potential, resonant_threshold, lam, sign)
        direct = invert_M_direct(M, lam, sign)
        jn = invert_M_jensen_nenciu(resonant_potential, resonant_threshold, lam, sign)
        assert _close(jn.matrix, direct.matrix, 1e-9), (lam, sign)


def test_jensen_nenciu_regular_is_direct(regular_potential, regular_threshold):
    """Test that a regular threshold falls back to the direct inverse."""
    jn = invert_M_jensen_nenciu(regular_potential, regular_threshold, 0.3, 1)
    direct = invert_M_direct(assemble_M(regular_potential, None, 0.3, 1))
    assert jn.b_inverse is None
    np.testing.assert_allclose(jn.matrix, direct.matrix, rtol=1e-12, atol=0)


def test_b_pole(resonant_potential, resonant_threshold):
    """Test lambda B^-1 -> -a |V|_1 D1 as lambda -> 0."""
    td, lam = resonant_threshold, 1e-4
    jn = invert_M_jensen_nenciu(resonant_potential, td, lam, 1)
    expected = -CONSTANTS.a_plus * td.norm_V_L1 * td.D1
    assert _close(lam * jn.b_inverse, expected, 2e-2)


@pytest.mark.parametrize("fixture", ["regular_threshold", "resonant_threshold"])
@pytest.mark.parametrize("sign", [1, -1])
def test_a_inverse(request, fixture, sign):
    """Test A^-1 = QD0Q + (a |V|_1 / lambda + c)^-1 S with the closed form c."""
    td = request.getfixturevalue(fixture)
    lam = 0.05
    inverse, g, c = A_inverse(td, lam, sign)
    c_closed = threshold_constant(td)
    assert abs(c.imag) <= 1e-8 * abs(c)
    assert c.real == pytest.approx(c_closed, rel=1e-6)
    pole = CONSTANTS.a(sign) * td.norm_V_L1 / lam
    assert g == pytest.approx(1.0 / (pole + c_closed), rel=1e-6)
    assert _close(inverse, td.D0 + td.S_op / (pole + c_closed), 1e-8)


def test_a_inverse_rejects_wavenumber(regular_threshold):
    """Test the wavenumber check."""
    with pytest.raises(DomainError):
        A_inverse(regular_threshold, 0.0, 1)


def test_c_minus1(resonant_potential, resonant_threshold, test_points):
    """Test that C_-1 is symmetric, of rank at most rank S1 and conjugate across signs."""
    td = resonant_threshold
    plus = build_C_minus1(td, resonant_potential, 1, test_points)
    minus = build_C_minus1(td, resonant_potential, -1, test_points)
    assert plus.shape == (len(test_points), len(test_points))
    np.testing.assert_allclose(plus, plus.T, atol=1e-10 * np.abs(plus).max())
    np.testing.assert_allclose(minus, np.conj(plus), atol=1e-10 * np.abs(plus).max())
    assert np.linalg.matrix_rank(plus, tol=1e-8 * np.abs(plus).max()) <= td.rank_S1


def test_pole_difference_is_imaginary(resonant_potential, resonant_threshold, test_points):
    """Test that the residue of the density is purely imaginary and nonzero."""
    residue = pole_difference(resonant_threshold, resonant_potential, test_points)
    scale = np.abs(residue).max()
    assert scale > 0
    np.testing.assert_allclose(residue.real, 0.0, atol=1e-10 * scale)


def test_regular_has_no_c_minus1(regular_potential, regular_threshold, test_points):
    """Test that resonant terms need a first-kind threshold."""
    with pytest.raises(DomainError):
        build_C_minus1(regular_threshold, regular_potential, 1, test_points)


def test_f_t(resonant_potential, resonant_threshold, test_points):
    """Test that F_t is symmetric, of finite rank and decays like t^(-3/4)."""
    td, cutoff = resonant_threshold, Cutoff(1.0)
    early = build_F_t(td, resonant_potential, 100.0, cutoff, test_points)
    late = build_F_t(td, resonant_potential, 1600.0, cutoff, test_points)
    np.testing.assert_allclose(early, early.T, atol=1e-10 * np.abs(early).max())
    assert np.linalg.matrix_rank(early, tol=1e-8 * np.abs(early).max()) <= td.rank_S1
    ratio = np.linalg.norm(late) / np.linalg.norm(early)
    assert ratio == pytest.approx(16**-0.75, rel=0.05)


def test_embedded_scan(regular_potential, regular_threshold):
    """Test that the bump has no embedded eigenvalue candidates."""
    scan = embedded_eigenvalue_scan(regular_potential, regular_threshold, np.linspace(0.1, 4, 12))
    assert scan.clean
    assert np.all(scan.sigma_min > 0)
    with pytest.raises(DomainError):
        embedded_eigenvalue_scan(regular_potential, None, [0.0, 1.0])


def test_bound_state_scan(regular_potential, well_potential):
    """Test that the well binds and the bump does not."""
    mus = np.geomspace(1e-2, 4.0, 48)
    assert bound_state_scan(regular_potential, mus).crossings.size == 0
    crossings = bound_state_scan(well_potential, mus).crossings
    assert crossings.size >= 1
    assert np.all(crossings < 0)


def test_m_inverse_cache(regular_potential, regular_threshold):
    """Test hits and eviction of the inverse cache."""
    cache = MInverseCache(maxsize=2)
    first = cache.get(regular_potential, regular_threshold, 0.5, 1)
    assert cache.get(regular_potential, regular_threshold, 0.5, 1) is first
    cache.get(regular_potential, regular_threshold, 0.5, -1)
    cache.get(regular_potential, regular_threshold, 0.7, 1)
    assert len(cache) == 2
    assert cache.get(regular_potential, regular_threshold, 0.5, 1) is not first

"""Test potential sampling and coupling tuning."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from quartic.exceptions import DomainError, GridCapError, NotFoundError
from quartic.potential import (
    NODE_CAP,
    GridSpec,
    PotentialFormula,
    SampledPotential,
    build_potential,
    coupling_scan,
    read_potential_table,
    smallest_singular_value,
    tune_to_resonance,
)


def _write_table(path, formula, axis):
    x, y, z = np.meshgrid(axis, axis, axis, indexing="ij")
    nodes = np.column_stack([x.ravel(), y.ravel(), z.ravel()])
    values = formula(nodes)
    rows = ("{0:.17g},{1:.17g},{2:.17g},{3:.17g}".format(*p, v) for p, v in zip(nodes, values))
    lines = ["x,y,z,V"] + list(rows)
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.mark.parametrize(
    "extent,points,rule",
    [
        (0.0, 4, "tensor-gauss"),
        (-1.0, 4, "tensor-gauss"),
        (1.0, 1, "tensor-gauss"),
        (1.0, 2.5, "tensor-gauss"),
        (1.0, 4, "simpson"),
    ],
)
def test_grid_rejects_invalid(extent, points, rule):
    """Test the grid checks."""
    with pytest.raises(DomainError):
        GridSpec(extent, points, rule)


def test_grid_cap():
    """Test that grids above the node cap raise GridCapError."""
    points = int(round(NODE_CAP ** (1 / 3))) + 1
    with pytest.raises(GridCapError):
        GridSpec(1.0, points)


@pytest.mark.parametrize("rule", ["tensor-gauss", "tensor-trapezoid"])
def test_grid_weights_integrate_volume(rule):
    """Test that the weights sum to the volume of the cube."""
    grid = GridSpec(1.5, 5, rule)
    nodes, weights = grid.nodes_and_weights()
    assert nodes.shape == (grid.n_nodes, 3)
    assert weights.sum() == pytest.approx(27.0, rel=1e-12)


@pytest.mark.parametrize(
    "family,parameters",
    [
        ("square_well", {}),
        ("custom", {}),
        ("gaussian_well", {"amplitude": np.nan}),
        ("gaussian_well", {"width": True}),
        ("gaussian_well", {"width": -1.0}),
        ("gaussian_bump", {"center": (0.0, 1.0)}),
    ],
)
def test_formula_rejects_invalid(family, parameters):
    """Test the formula checks."""
    with pytest.raises(DomainError):
        PotentialFormula(family, parameters)


def test_custom_formula_is_tabulated():
    """Test that custom formulas cannot be evaluated pointwise."""
    with pytest.raises(DomainError):
        PotentialFormula("custom", {"path": "v.csv"})(np.zeros((1, 3)))


def test_double_well_is_signed():
    """Test that the double well has both signs on the x axis."""
    points = np.array([[-1.0, 0, 0], [1.0, 0, 0]])
    left, right = PotentialFormula("double_well")(points)
    assert left < 0 < right


def test_sampled_potential_split(regular_potential, well_potential):
    """Test V = U v^2 and the L1 norm."""
    for pot in (regular_potential, well_potential):
        np.testing.assert_allclose(pot.U * pot.v**2, pot.V, rtol=1e-15)
        expected = np.sum(pot.weights[pot.support] * np.abs(pot.V[pot.support]))
        assert pot.norm_V_L1 == pytest.approx(expected)
    assert np.all(well_potential.U[well_potential.support] == -1)


def test_gaussian_well_norm():
    """Test the L1 norm of a deep well against 3 pi^(3/2)."""
    formula = PotentialFormula("gaussian_well", {"amplitude": -3.0, "width": 1.0})
    pot = build_potential(formula, GridSpec(4.0, 10))
    assert len(pot.nodes) == 1000
    assert pot.norm_V_L1 == pytest.approx(3 * np.pi**1.5, rel=1e-2)


def test_sampled_potential_is_read_only(regular_potential):
    """Test that the sampled arrays cannot be written."""
    with pytest.raises(ValueError):
        regular_potential.V[0] = 1.0


def test_support_cutoff():
    """Test that tiny values are outside the effective support."""
    pot = SampledPotential(np.eye(3), np.ones(3), [1.0, 1e-14, 0.0])
    assert pot.support.tolist() == [True, False, False]
    assert pot.norm_V_L1 == 1.0
    nodes, weights, v, U = pot.support_data()
    assert len(nodes) == len(weights) == len(v) == len(U) == 1


@pytest.mark.parametrize(
    "nodes,weights,values",
    [
        (np.zeros((2, 3)), np.ones(2), np.array([1.0, 1j])),
        (np.zeros((2, 3)), np.ones(3), np.ones(2)),
        (np.zeros((2, 3)), np.array([1.0, 0.0]), np.ones(2)),
        (np.zeros((2, 3)), np.ones(2), np.array([1.0, np.inf])),
    ],
)
def test_sampled_potential_rejects_invalid(nodes, weights, values):
    """Test the sample checks."""
    with pytest.raises(DomainError):
        SampledPotential(nodes, weights, values)


def test_zero_coupling(free_potential):
    """Test that zero coupling gives the zero potential."""
    assert free_potential.is_zero
    assert free_potential.norm_V_L1 == 0.0


def test_scaled(regular_potential):
    """Test that scaling multiplies the norm and flips signs."""
    flipped = regular_potential.scaled(-2.0)
    assert flipped.norm_V_L1 == pytest.approx(2.0 * regular_potential.norm_V_L1)
    np.testing.assert_array_equal(flipped.U, -regular_potential.U)
    assert flipped.extent == regular_potential.extent


def test_decay_constant(regular_potential):
    """Test that the fitted constant bounds |V| <x>^beta at every node."""
    bracket = np.sqrt(1 + np.sum(regular_potential.nodes**2, axis=1))
    bound = regular_potential.decay_constant * bracket ** (-regular_potential.beta_claimed)
    assert np.all(np.abs(regular_potential.V) <= bound * (1 + 1e-12))


def test_table_matches_formula(tmp_path):
    """Test that a tabulated potential matches the sampled formula."""
    formula = PotentialFormula("gaussian_well", {"width": 0.8})
    grid = GridSpec(2.0, 5, "tensor-trapezoid")
    path = _write_table(tmp_path / "well.csv", formula, grid.axis()[0])
    table = build_potential(PotentialFormula("custom", {"path": str(path)}), grid)
    sampled = build_potential(formula, grid)
    np.testing.assert_allclose(table.V, sampled.V, rtol=1e-15)
    np.testing.assert_allclose(table.weights, sampled.weights, rtol=1e-15)
    assert table.extent == 2.0


def test_table_gauss_rule(tmp_path):
    """Test a table on Gauss nodes and the rule mismatch."""
    formula = PotentialFormula("gaussian_bump")
    grid = GridSpec(1.0, 4)
    path = _write_table(tmp_path / "bump.csv", formula, grid.axis()[0])
    _, weights, _, _ = read_potential_table(path, rule="tensor-gauss")
    np.testing.assert_allclose(weights, grid.nodes_and_weights()[1], rtol=1e-12)

    uniform = _write_table(tmp_path / "uniform.csv", formula, np.linspace(-1, 1, 4))
    with pytest.raises(DomainError):
        read_potential_table(uniform, rule="tensor-gauss")


def test_table_rejects_partial_grid(tmp_path):
    """Test that incomplete tensor grids and missing columns are rejected."""
    partial = tmp_path / "partial.csv"
    partial.write_text("x,y,z,V\n0,0,0,1\n1,0,0,1\n0,1,0,1\n")
    with pytest.raises(DomainError):
        read_potential_table(partial)

    columns = tmp_path / "columns.csv"
    columns.write_text("x,y,V\n0,0,1\n")
    with pytest.raises(DomainError):
        read_potential_table(columns)


def test_coupling_scan(well_potential):
    """Test the coupling scan, also through an executor."""
    couplings = [0.5, 1.0, 2.0]
    pairs = coupling_scan(well_potential, couplings)
    assert [c for c, _ in pairs] == couplings
    assert all(s >= 0 for _, s in pairs)
    with ThreadPoolExecutor(2) as executor:
        threaded = coupling_scan(well_potential, couplings, executor=executor)
    assert [s for _, s in threaded] == pytest.approx([s for _, s in pairs], rel=1e-12)


def test_coupling_scan_rejects(free_potential, well_potential):
    """Test that scans need a nonzero base and nonzero couplings."""
    with pytest.raises(DomainError):
        coupling_scan(free_potential, [1.0])
    with pytest.raises(DomainError):
        coupling_scan(well_potential, [0.0, 1.0])


def test_tune_to_resonance(well_potential, resonant_coupling):
    """Test that the tuned coupling makes QTQ singular."""
    assert 8.0 < resonant_coupling < 16.0
    assert smallest_singular_value(well_potential.scaled(resonant_coupling)) <= 1e-10


def test_tune_refinement_is_stable(well_potential, resonant_coupling):
    """Test that tuning at a tenth of the tolerance barely moves the coupling."""
    tol = 1e-10
    refined, residual = tune_to_resonance(well_potential, (8.0, 16.0), tol=tol / 10)
    assert residual <= tol / 10
    assert abs(refined - resonant_coupling) < 10 * tol


def test_tune_misses_resonance_outside_bracket(well_potential):
    """Test that a bracket below the first resonance reports no coupling."""
    with pytest.raises(NotFoundError):
        tune_to_resonance(well_potential, (0.5, 6.0), samples=9)


def test_tune_rejects_bracket(well_potential):
    """Test that brackets containing zero are rejected."""
    with pytest.raises(DomainError):
        tune_to_resonance(well_potential, (-1.0, 1.0))
    with pytest.raises(DomainError):
        tune_to_resonance(well_potential, (2.0, 1.0))


def test_tune_without_resonance(regular_potential):
    """Test that a repulsive bump has no resonant coupling in a moderate bracket."""
    with pytest.raises(NotFoundError):
        tune_to_resonance(regular_potential, (0.5, 2.0))

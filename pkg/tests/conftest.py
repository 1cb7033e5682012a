"""Fixtures for tests."""

import json

import pytest

from quartic import (
    GridSpec,
    PotentialFormula,
    build_potential,
    build_threshold,
    standard_points,
    tune_to_resonance,
)

pytest_plugins = ("pytest_asyncio",)

SMALL_EXTENT = 3.0
RESONANCE_BRACKET = (8.0, 16.0)


@pytest.fixture(scope="session")
def small_grid():
    """Fixture for the 6^3 Gauss grid on [-3, 3]^3.

    :returns: Grid
    :rtype: GridSpec
    """
    return GridSpec(SMALL_EXTENT, 6)


@pytest.fixture(scope="session")
def free_potential(small_grid):
    """Fixture for the identically vanishing potential.

    :param small_grid: Grid
    :type small_grid: GridSpec
    :returns: Potential
    :rtype: SampledPotential
    """
    return build_potential(PotentialFormula("gaussian_bump"), small_grid, coupling=0.0)


@pytest.fixture(scope="session")
def regular_potential(small_grid):
    """Fixture for a repulsive Gaussian bump.

    :param small_grid: Grid
    :type small_grid: GridSpec
    :returns: Potential
    :rtype: SampledPotential
    """
    return build_potential(PotentialFormula("gaussian_bump"), small_grid)


@pytest.fixture(scope="session")
def regular_threshold(regular_potential):
    """Fixture for the threshold data of the repulsive bump.

    :param regular_potential: Potential
    :type regular_potential: SampledPotential
    :returns: Threshold data
    :rtype: ThresholdData
    """
    return build_threshold(regular_potential)


@pytest.fixture(scope="session")
def well_potential(small_grid):
    """Fixture for an attractive Gaussian well at unit coupling.

    :param small_grid: Grid
    :type small_grid: GridSpec
    :returns: Potential
    :rtype: SampledPotential
    """
    return build_potential(PotentialFormula("gaussian_well"), small_grid)


@pytest.fixture(scope="session")
def resonant_coupling(well_potential):
    """Fixture for the resonant coupling of the well, tuned once per session.

    :param well_potential: Potential at unit coupling
    :type well_potential: SampledPotential
    :returns: Coupling c*
    :rtype: float
    """
    c_star, _ = tune_to_resonance(well_potential, RESONANCE_BRACKET)
    return c_star


@pytest.fixture(scope="session")
def resonant_potential(well_potential, resonant_coupling):
    """Fixture for the well tuned to its zero-energy resonance.

    :param well_potential: Potential at unit coupling
    :type well_potential: SampledPotential
    :param resonant_coupling: Coupling c*
    :type resonant_coupling: float
    :returns: Potential
    :rtype: SampledPotential
    """
    return well_potential.scaled(resonant_coupling)


@pytest.fixture(scope="session")
def resonant_threshold(resonant_potential):
    """Fixture for the threshold data at the resonance.

    :param resonant_potential: Potential
    :type resonant_potential: SampledPotential
    :returns: Threshold data
    :rtype: ThresholdData
    """
    return build_threshold(resonant_potential)


@pytest.fixture(scope="session")
def test_points():
    """Fixture for the standard 24 point test set of the small grid.

    :returns: Points, shape (24, 3)
    :rtype: numpy.ndarray
    """
    return standard_points(SMALL_EXTENT, seed=0)


@pytest.fixture
def scenario_document():
    """Fixture for a small valid scenario document.

    :returns: Parsed scenario
    :rtype: dict
    """
    return {
        "schema_version": 1,
        "name": "tiny",
        "potential": {"family": "gaussian_bump", "parameters": {"amplitude": 0.5}},
        "grid": {"extent": 2.0, "points_per_axis": 3},
        "coupling": 1.0,
        "cutoff": {"lambda0": 0.25, "profile": 2},
        "t_grid": {"t_min": 1.0, "t_max": 10.0, "points": 8},
        "sigma_list": [0, 1],
        "lambda_max": 6.0,
        "seed": 5,
        "points": {"inside": 0.5, "near": 1.0, "far": 1.5},
        "scan": {"start": 0.5, "stop": 2.0, "points": 4},
    }


@pytest.fixture
def scenario_file(tmp_path, scenario_document):
    """Fixture for the small scenario written to a temporary file.

    :param tmp_path: Temporary directory
    :type tmp_path: pathlib.Path
    :param scenario_document: Parsed scenario
    :type scenario_document: dict
    :returns: File path
    :rtype: pathlib.Path
    """
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(scenario_document))
    return path

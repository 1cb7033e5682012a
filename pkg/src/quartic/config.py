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

"""Scenario configuration: versioned JSON files and environment settings."""

import functools
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple, Union

import aiofiles
import jsonschema
import numpy as np

from .exceptions import ConfigError, QuarticError
from .oscillatory import Cutoff
from .potential import GridSpec, PotentialFormula

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCHEMA_DIR = Path(__file__).parent / "schemas"
SCENARIO_DIR = Path(__file__).parent / "scenarios"
THREADS_ENV = "QUARTIC_THREADS"
OUTPUT_ENV = "QUARTIC_OUTPUT"
DEFAULT_OUTPUT = "quartic-output"
T_MAX = 1e4


def thread_count():
    """Worker count for spectral sampling, from QUARTIC_THREADS or the CPU count.

    :returns: Number of threads
    :rtype: int
    :raises ConfigError: If QUARTIC_THREADS is not a positive integer
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise ConfigError("{0} must be a positive integer, got {1!r}".format(THREADS_ENV, raw))
    return value


def output_directory(override=None):
    """Directory for run artifacts.

    :param override: Explicit directory, takes precedence
    :type override: str
    :returns: Output directory
    :rtype: pathlib.Path
    """
    if override:
        return Path(override)
    return Path(os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


@functools.lru_cache(maxsize=None)
def load_schema(name):
    """Load a shipped JSON schema.

    :param name: Schema name, "scenario" or "summary"
    :type name: str
    :returns: The schema
    :rtype: dict
    """
    with open(SCHEMA_DIR / "{0}.schema.json".format(name), encoding="utf-8") as f:
        return json.load(f)


def validate(document, name):
    """Validate a document against a shipped schema.

    :param document: Parsed JSON document
    :type document: dict
    :param name: Schema name
    :type name: str
    :raises ConfigError: If the document violates the schema
    """
    schema = load_schema(name)
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        where = "/".join(str(p) for p in first.absolute_path) or "<root>"
        raise ConfigError(
            "{0}: {1}".format(where, first.message),
            stage="config",
            context={"schema": name, "violations": len(errors)},
        )


@dataclass(frozen=True)
class TimeGrid:
    """Geometric grid of times."""

    t_min: float
    t_max: float
    points: int

    def __post_init__(self):
        """Validate the grid.

        :raises ConfigError: If the range is empty or exceeds T_MAX
        """
        if not (0 < self.t_min < self.t_max <= T_MAX):
            raise ConfigError(
                "t_grid needs 0 < t_min < t_max <= {0:g}, got [{1:g}, {2:g}]".format(
                    T_MAX, self.t_min, self.t_max
                )
            )
        if self.points < 2:
            raise ConfigError("t_grid needs at least 2 points")

    def values(self):
        """The times.

        :returns: Geometrically spaced times
        :rtype: numpy.ndarray
        """
        return np.geomspace(self.t_min, self.t_max, self.points)


@dataclass(frozen=True)
class DecayCheck:
    """Acceptance gate on a fitted decay exponent."""

    sigma: float
    subtract_Ft: bool = False
    min_exponent: Optional[float] = None
    max_exponent: Optional[float] = None

    def passes(self, fit):
        """Check a fit against the gate.

        :param fit: Fitted decay
        :type fit: quartic.oscillatory.DecayFit
        :returns: True when the exponent lies within the bounds
        :rtype: bool
        """
        if self.min_exponent is not None and fit.exponent < self.min_exponent:
            return False
        if self.max_exponent is not None and fit.exponent > self.max_exponent:
            return False
        return True

    def describe(self):
        """Human readable target.

        :returns: Target description
        :rtype: str
        """
        low = "-inf" if self.min_exponent is None else "{0:g}".format(self.min_exponent)
        high = "inf" if self.max_exponent is None else "{0:g}".format(self.max_exponent)
        return "[{0}, {1}]".format(low, high)


@dataclass(frozen=True)
class CouplingGrid:
    """Uniform grid of couplings for a scan."""

    start: float
    stop: float
    points: int

    def values(self):
        """The couplings.

        :returns: Couplings
        :rtype: numpy.ndarray
        """
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated experiment description."""

    name: str
    potential: PotentialFormula
    grid: GridSpec
    coupling: Union[float, str]
    cutoff: Cutoff
    t_grid: TimeGrid
    sigma_list: Tuple[float, ...]
    lambda_max: float
    seed: int
    beta_claimed: float = 12.0
    ker_tol: Optional[float] = None
    tune_bracket: Optional[Tuple[float, float]] = None
    tune_tol: float = 1e-10
    subtract_Ft: bool = False
    radii: Tuple[float, float, float] = (0.5, 2.0, 5.0)
    checks: Tuple[DecayCheck, ...] = ()
    scan: Optional[CouplingGrid] = None
    source: Optional[Path] = field(default=None, compare=False)

    @property
    def tunes(self):
        """Check whether the coupling is tuned to a resonance.

        :returns: True when the coupling is "tune"
        :rtype: bool
        """
        return self.coupling == "tune"

    @classmethod
    def from_dict(cls, document, base_dir=None):
        """Build a config from a parsed JSON document.

        :param document: Parsed JSON document
        :type document: dict
        :param base_dir: Directory relative table paths resolve against
        :type base_dir: pathlib.Path
        :returns: The config
        :rtype: ScenarioConfig
        :raises ConfigError: If the document is invalid
        """
        validate(document, "scenario")
        if document["schema_version"] != SCHEMA_VERSION:
            raise ConfigError(
                "unsupported schema_version {0}".format(document["schema_version"]),
                stage="config",
            )
        try:
            return cls._build(document, Path(base_dir) if base_dir else Path("."))
        except ConfigError:
            raise
        except QuarticError as exc:
            raise ConfigError(exc.error_message, stage="config") from exc

    @classmethod
    def _build(cls, d, base_dir):
        spec = d["potential"]
        if "table" in spec:
            table = Path(spec["table"])
            if not table.is_absolute():
                table = base_dir / table
            formula = PotentialFormula("custom", {"path": str(table)})
        else:
            formula = PotentialFormula(spec["family"], dict(spec.get("parameters", {})))

        coupling = d["coupling"]
        tune_bracket = tuple(d["tune_bracket"]) if "tune_bracket" in d else None
        if coupling == "tune" and tune_bracket is None:
            raise ConfigError("coupling 'tune' needs a tune_bracket", stage="config")

        numbers = [d["lambda_max"], d["cutoff"]["lambda0"]] + list(d["sigma_list"])
        if not isinstance(coupling, str):
            numbers.append(coupling)
        if not all(math.isfinite(x) for x in numbers):
            raise ConfigError("physical parameters must be finite", stage="config")
        if not d["lambda_max"] > 2.0 * d["cutoff"]["lambda0"]:
            raise ConfigError("lambda_max must exceed 2 * lambda0", stage="config")
        missing = {c["sigma"] for c in d.get("checks", ())} - set(d["sigma_list"])
        if missing:
            raise ConfigError(
                "checks on sigma {0} not in sigma_list".format(sorted(missing)), stage="config"
            )

        radii = d.get("points", {})
        scan = d.get("scan")
        return cls(
            name=d["name"],
            potential=formula,
            grid=GridSpec(
                d["grid"]["extent"],
                d["grid"]["points_per_axis"],
                d["grid"].get("rule", "tensor-gauss"),
            ),
            coupling=coupling if coupling == "tune" else float(coupling),
            cutoff=Cutoff(d["cutoff"]["lambda0"], d["cutoff"].get("profile", 2)),
            t_grid=TimeGrid(d["t_grid"]["t_min"], d["t_grid"]["t_max"], d["t_grid"]["points"]),
            sigma_list=tuple(float(s) for s in d["sigma_list"]),
            lambda_max=float(d["lambda_max"]),
            seed=int(d["seed"]),
            beta_claimed=float(d.get("beta_claimed", 12.0)),
            ker_tol=d.get("ker_tol"),
            tune_bracket=tune_bracket,
            tune_tol=float(d.get("tune_tol", 1e-10)),
            subtract_Ft=bool(d.get("subtract_Ft", False)),
            radii=(
                float(radii.get("inside", 0.5)),
                float(radii.get("near", 2.0)),
                float(radii.get("far", 5.0)),
            ),
            checks=tuple(
                DecayCheck(
                    float(c["sigma"]),
                    bool(c.get("subtract_Ft", False)),
                    c.get("min_exponent"),
                    c.get("max_exponent"),
                )
                for c in d.get("checks", ())
            ),
            scan=CouplingGrid(scan["start"], scan["stop"], scan["points"]) if scan else None,
            source=base_dir,
        )


async def load_config(path):
    """Read and validate a scenario file.

    :param path: Path of the JSON file
    :type path: str
    :returns: The config
    :rtype: ScenarioConfig
    :raises ConfigError: If the file is missing, not JSON or invalid
    """
    path = Path(path)
    try:
        async with aiofiles.open(path, mode="r", encoding="utf-8") as f:
            text = await f.read()
    except OSError as exc:
        raise ConfigError("cannot read {0}: {1}".format(path, exc.strerror), stage="config")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("{0} is not valid JSON: {1}".format(path, exc), stage="config")
    config = ScenarioConfig.from_dict(document, base_dir=path.parent)
    logger.info("loaded scenario %s from %s", config.name, path)
    return config


def shipped_scenario(name):
    """Path of a scenario shipped with the package.

    :param name: Scenario name, e.g. "regular"
    :type name: str
    :returns: File path
    :rtype: pathlib.Path
    """
    return SCENARIO_DIR / "{0}.json".format(name)

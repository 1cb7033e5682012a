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

"""Command line interface: ``quartic run|tune|scan|verify``."""

import argparse
import asyncio
import csv
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import aiofiles
import aiofiles.os
import numpy as np

from ._version import __version__
from .config import SCHEMA_VERSION, load_config, output_directory, thread_count, validate
from .exceptions import ConfigError, QuarticError, exit_code_for
from .potential import build_potential, coupling_scan, tune_to_resonance
from .propagator import Scenario, decay_report, standard_points
from .threshold import Classification, bound_state_scan
from .verify import SUITES, format_table, verify

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("scenario", "t", "sigma", "subtract_Ft", "weighted_sup", "error_estimate")
BOUND_STATE_MU = np.geomspace(1e-2, 4.0, 48)


def _number(x):
    return "{0:.17g}".format(x)


def target_exponent(classification, sigma, subtracted):
    """Decay exponent the weighted estimates predict.

    :param classification: Threshold verdict, None for the free operator
    :type classification: quartic.threshold.Classification
    :param sigma: Weight exponent
    :type sigma: float
    :param subtracted: Whether the resonant part was subtracted
    :type subtracted: bool
    :returns: Predicted exponent
    :rtype: float
    """
    if classification is Classification.REGULAR:
        return min(0.75 + sigma / 2.0, 1.25)
    if subtracted:
        return 0.75 + min(sigma, 2.0) / 4.0
    return 0.75


class ExperimentRunner:
    """Run one scenario and write its artifacts.

    Artifacts are written to a temporary name and renamed into place.

    :param config: Scenario configuration
    :type config: quartic.config.ScenarioConfig
    :param output_dir: Artifact directory
    :type output_dir: pathlib.Path
    :param threads: Worker count
    :type threads: int
    """

    def __init__(self, config, output_dir=None, threads=None):
        """Init method.

        :param config: Scenario configuration
        :type config: quartic.config.ScenarioConfig
        :param output_dir: Artifact directory
        :type output_dir: pathlib.Path
        :param threads: Worker count
        :type threads: int
        """
        self.config = config
        self.output_dir = output_directory(output_dir)
        self.threads = threads or thread_count()
        self._pending = set()

    async def __aenter__(self):
        await aiofiles.os.makedirs(self.output_dir, exist_ok=True)
        return self

    async def __aexit__(self, *excinfo):
        await self.aclose()

    async def aclose(self):
        """Remove temporary files left by an interrupted write."""
        for tmp in list(self._pending):
            if await aiofiles.os.path.exists(tmp):
                await aiofiles.os.remove(tmp)
            self._pending.discard(tmp)

    def artifact(self, suffix):
        """Path of an artifact of this scenario.

        :param suffix: File name suffix, e.g. ".csv"
        :type suffix: str
        :returns: Artifact path
        :rtype: pathlib.Path
        """
        return self.output_dir / "{0}{1}".format(self.config.name, suffix)

    async def write_atomic(self, path, text):
        """Write text through a temporary file and an atomic rename.

        :param path: Final path
        :type path: pathlib.Path
        :param text: File contents
        :type text: str
        :returns: The final path
        :rtype: pathlib.Path
        """
        tmp = path.with_name(".{0}.tmp".format(path.name))
        self._pending.add(tmp)
        async with aiofiles.open(tmp, mode="w", encoding="utf-8", newline="") as f:
            await f.write(text)
        await aiofiles.os.replace(tmp, path)
        self._pending.discard(tmp)
        logger.info("wrote %s", path)
        return path

    def base_potential(self):
        """Sample the configured potential family at its base coupling.

        :returns: The potential
        :rtype: quartic.potential.SampledPotential
        """
        c = self.config
        coupling = 1.0 if c.tunes else c.coupling
        return build_potential(c.potential, c.grid, coupling, c.beta_claimed)

    def tune(self):
        """Tune the configured family to its zero-energy resonance.

        :returns: Resonant coupling and sigma_min there
        :rtype: tuple
        :raises ConfigError: If no tune_bracket is configured
        """
        if self.config.tune_bracket is None:
            raise ConfigError("tuning needs a tune_bracket", stage="config")
        base = build_potential(
            self.config.potential, self.config.grid, 1.0, self.config.beta_claimed
        )
        return tune_to_resonance(base, self.config.tune_bracket, tol=self.config.tune_tol)

    def build_scenario(self):
        """Sample, tune when requested and classify the threshold.

        :returns: The scenario
        :rtype: quartic.propagator.Scenario
        """
        c = self.config
        pot = self.base_potential()
        coupling = c.coupling
        if c.tunes:
            coupling, _ = self.tune()
            pot = pot.scaled(coupling)
        extent = pot.extent if pot.extent is not None else c.grid.extent
        points = standard_points(extent, seed=c.seed, radii=c.radii)
        scenario = Scenario.build(
            c.name, pot, c.cutoff, c.lambda_max, points, coupling=coupling, ker_tol=c.ker_tol
        )
        label = scenario.classification.value if scenario.classification else "free"
        logger.info("%s: threshold %s at coupling %.15g", c.name, label, coupling)
        return scenario

    def compute(self):
        """Run the full pipeline.

        :returns: Scenario, decay reports, bound-state screen and the embedded scan
        :rtype: tuple
        """
        c = self.config
        scenario = self.build_scenario()
        bound = None
        if not scenario.potential.is_zero:
            bound = bound_state_scan(scenario.potential, BOUND_STATE_MU, td=scenario.threshold)
        propagator = scenario.propagator(threads=self.threads)
        times = c.t_grid.values()
        flags = {False}
        if c.subtract_Ft:
            flags.add(True)
        flags.update(check.subtract_Ft for check in c.checks)
        reports = [
            decay_report(scenario, times, c.sigma_list, subtract_Ft=flag, propagator=propagator)
            for flag in sorted(flags)
        ]
        return scenario, reports, bound, propagator.scan

    def table(self, reports):
        """Render the decay tables as CSV.

        :param reports: Decay reports
        :type reports: list
        :returns: CSV text
        :rtype: str
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for report in reports:
            for row in report.rows:
                writer.writerow(
                    [
                        row.scenario,
                        _number(row.t),
                        _number(row.sigma),
                        int(row.subtract_Ft),
                        _number(row.weighted_sup),
                        _number(row.error_estimate),
                    ]
                )
        return buffer.getvalue()

    def summary(self, scenario, reports, bound, scan):
        """Machine readable summary of a run.

        :param scenario: The scenario
        :type scenario: quartic.propagator.Scenario
        :param reports: Decay reports
        :type reports: list
        :param bound: Bound-state screen, None for the free operator
        :type bound: quartic.threshold.BoundStateScan
        :param scan: Embedded eigenvalue scan, None for the free operator
        :type scan: quartic.threshold.SpectrumScan
        :returns: Summary document, valid against summary.schema.json
        :rtype: dict
        """
        classification = scenario.classification
        fits = []
        for report in reports:
            for sigma, fit in zip(report.sigma_list, report.fits):
                low, high = fit.band()
                fits.append(
                    {
                        "sigma": sigma,
                        "subtract_Ft": report.subtract_Ft,
                        "exponent": fit.exponent,
                        "stderr": fit.stderr,
                        "band": [low, high],
                        "t_window": list(fit.t_window),
                        "n_points": fit.n_points,
                        "target": target_exponent(classification, sigma, report.subtract_Ft),
                    }
                )
        checks = []
        for check in self.config.checks:
            match = [r for r in reports if r.subtract_Ft == check.subtract_Ft][0]
            fit = match.fit(check.sigma)
            checks.append(
                {
                    "sigma": check.sigma,
                    "subtract_Ft": check.subtract_Ft,
                    "bounds": check.describe(),
                    "exponent": fit.exponent,
                    "passed": check.passes(fit),
                }
            )
        document = {
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "scenario": scenario.name,
            "classification": classification.value if classification else "Free",
            "coupling": float(scenario.coupling),
            "rank_S1": scenario.threshold.rank_S1 if scenario.threshold else 0,
            "threshold": scenario.threshold.summary() if scenario.threshold else None,
            "embedded_scan": None,
            "bound_states": [],
            "fits": fits,
            "checks": checks,
        }
        if scan is not None:
            document["embedded_scan"] = {
                "lambda_min": float(scan.grid[0]),
                "lambda_max": float(scan.grid[-1]),
                "min_sigma": float(np.min(scan.sigma_min)),
                "flagged": int(np.sum(scan.flagged)),
            }
        if bound is not None:
            document["bound_states"] = [float(e) for e in bound.crossings]
        validate(document, "summary")
        return document

    def report(self, summary):
        """Plain text report of a run.

        :param summary: Summary document
        :type summary: dict
        :returns: Report text
        :rtype: str
        """
        lines = [
            "scenario        {0}".format(summary["scenario"]),
            "classification  {0}".format(summary["classification"]),
            "coupling        {0}".format(_number(summary["coupling"])),
            "rank S1         {0}".format(summary["rank_S1"]),
        ]
        threshold = summary["threshold"]
        if threshold and threshold["classification"] != "Regular":
            lines.append(
                "S1 eigenvalues  {0}".format(
                    ", ".join("{0:.3e}".format(e) for e in threshold["kernel_eigenvalues"])
                )
            )
            if threshold["t1_condition"] is not None:
                lines.append("cond T1         {0:.3e}".format(threshold["t1_condition"]))
        if threshold:
            lines.append("threshold c     {0:.10g}".format(threshold["threshold_constant"]))
        if summary["bound_states"]:
            lines.append(
                "bound states    near E = {0}".format(
                    ", ".join("{0:.4g}".format(e) for e in summary["bound_states"])
                )
            )
        lines.append("")
        header = "{0:>6} {1:>9} {2:>9} {3:>9} {4:>7}"
        lines.append(header.format("sigma", "subtract", "exponent", "stderr", "target"))
        for fit in summary["fits"]:
            lines.append(
                "{0:>6g} {1:>9} {2:>9.4f} {3:>9.4f} {4:>7.4g}".format(
                    fit["sigma"],
                    "yes" if fit["subtract_Ft"] else "no",
                    fit["exponent"],
                    fit["stderr"],
                    fit["target"],
                )
            )
        if summary["checks"]:
            lines.append("")
            for check in summary["checks"]:
                lines.append(
                    "check sigma={0:g} subtract={1}: exponent {2:.4f} in {3}: {4}".format(
                        check["sigma"],
                        "yes" if check["subtract_Ft"] else "no",
                        check["exponent"],
                        check["bounds"],
                        "pass" if check["passed"] else "FAIL",
                    )
                )
        return "\n".join(lines) + "\n"

    async def run(self):
        """Run the pipeline and write CSV, JSON summary and report.

        :returns: Exit code, 1 when an acceptance check fails
        :rtype: int
        """
        scenario, reports, bound, scan = await asyncio.to_thread(self.compute)
        summary = self.summary(scenario, reports, bound, scan)
        await self.write_atomic(self.artifact(".csv"), self.table(reports))
        await self.write_atomic(
            self.artifact("-summary.json"), json.dumps(summary, indent=2, sort_keys=True) + "\n"
        )
        report = self.report(summary)
        await self.write_atomic(self.artifact("-report.txt"), report)
        sys.stdout.write(report)
        failed = [c for c in summary["checks"] if not c["passed"]]
        if failed:
            logger.error("%s: %d acceptance check(s) failed", scenario.name, len(failed))
            return 1
        return 0

    async def run_tune(self):
        """Tune to the resonance and write the result.

        :returns: Exit code
        :rtype: int
        """
        c_star, sigma = await asyncio.to_thread(self.tune)
        document = {"scenario": self.config.name, "coupling": c_star, "sigma_min": sigma}
        await self.write_atomic(
            self.artifact("-tune.json"), json.dumps(document, indent=2, sort_keys=True) + "\n"
        )
        sys.stdout.write("c* = {0}  sigma_min = {1:.3e}\n".format(_number(c_star), sigma))
        return 0

    async def run_scan(self):
        """Scan sigma_min(QTQ) over the configured couplings and write a CSV.

        :returns: Exit code
        :rtype: int
        :raises ConfigError: If no scan grid is configured
        """
        if self.config.scan is None:
            raise ConfigError("scan needs a scan grid", stage="config")

        def work():
            base = build_potential(
                self.config.potential, self.config.grid, 1.0, self.config.beta_claimed
            )
            couplings = [c for c in self.config.scan.values() if c != 0]
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                return coupling_scan(base, couplings, executor=pool)

        rows = await asyncio.to_thread(work)
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(("coupling", "sigma_min"))
        writer.writerows((_number(c), _number(s)) for c, s in rows)
        await self.write_atomic(self.artifact("-scan.csv"), buffer.getvalue())
        return 0


def build_parser():
    """Argument parser of the ``quartic`` command.

    :returns: The parser
    :rtype: argparse.ArgumentParser
    """
    parser = argparse.ArgumentParser(
        prog="quartic", description="Dispersive decay experiments for bilaplacian + V."
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "run a scenario and write CSV, JSON summary and report"),
        ("tune", "tune the coupling to a zero-energy resonance"),
        ("scan", "scan sigma_min(QTQ) over couplings"),
    ):
        command = sub.add_parser(name, help=text)
        command.add_argument("config", help="scenario JSON file")
        command.add_argument("-o", "--output", help="artifact directory")
        command.add_argument("--threads", type=int, help="worker threads")
    check = sub.add_parser("verify", help="run invariant suites")
    check.add_argument("suite", choices=SUITES)
    check.add_argument("--ker-tol", type=float, help="force the kernel tolerance of QTQ")
    return parser


async def dispatch(args):
    """Execute a parsed command.

    :param args: Parsed arguments
    :type args: argparse.Namespace
    :returns: Exit code
    :rtype: int
    """
    if args.command == "verify":
        results = await asyncio.to_thread(verify, args.suite, args.ker_tol)
        sys.stdout.write(format_table(results) + "\n")
        return 0 if all(r.passed for r in results) else 1

    config = await load_config(Path(args.config))
    async with ExperimentRunner(config, args.output, args.threads) as runner:
        if args.command == "tune":
            return await runner.run_tune()
        if args.command == "scan":
            return await runner.run_scan()
        return await runner.run()


def main(argv=None):
    """Console entry point.

    :param argv: Arguments, default sys.argv[1:]
    :type argv: list
    :returns: Exit code, 0 success, 1 numerical or acceptance failure, 2 config error
    :rtype: int
    """
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return asyncio.run(dispatch(args))
    except QuarticError as exc:
        logger.error("%s", exc)
        sys.stderr.write("error: {0}\n".format(exc))
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())

"""
Main application module for ModelSetLab.

This module contains the application class that runs the tasks of one
experiment config, writes the CSV and SVG artifacts, and produces the
verification report.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, List, Optional
import logging
import os
import time

import numpy as np

from utils.config import Config
from utils.exporter import CsvExporter
from utils.plotting import stick_plot
from cps import autocorrelation as ac
from cps import diffraction as df
from cps import verification as vf
from cps.combs import (PointSetPatch, WeightedComb, comb_support_check, covering_growth, delone_radii, meyer_defect,
                       model_set)
from cps.fixtures import integers_minus_shifts, two_lattices
from cps.geometry import Box
from cps.scheme import dual_basis, injectivity_probe
from data.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

REPORT_FILE = "verify_report.txt"
FIXTURE_RADII = (1250.0, 2500.0, 5000.0, 10000.0)
FIXTURE_SHIFTS = 50
MEYER_RADIUS = 100.0


@dataclass
class TaskOutcome:
    name: str
    ok: bool
    seconds: float
    detail: str = ""

    def line(self) -> str:
        return f"TASK {self.name} {'OK' if self.ok else 'FAILED'}"


@dataclass
class RunState:
    """Objects shared between tasks of one run"""
    patch: Optional[PointSetPatch] = None
    comb: Optional[WeightedComb] = None
    gamma: Optional[ac.Autocorrelation] = None
    outcomes: List[TaskOutcome] = field(default_factory=list)
    claims: List[vf.ClaimResult] = field(default_factory=list)
    measures: Dict[str, float] = field(default_factory=dict)


class ModelSetApp:
    """
    Runs the tasks of an experiment in order.

    Each task is isolated: a failure is logged, recorded as a FAILED task
    line and turns the exit code nonzero, but later tasks still run.
    """
    def __init__(self, config: ExperimentConfig, threads: int = None, svg: bool = False,
                 log_scale: bool = False) -> None:
        self.config = config
        self.threads = threads or Config.MAX_WORKERS
        self.svg = svg
        self.log_scale = log_scale
        self.state = RunState()
        self.exporter = CsvExporter(config.output)
        self.tasks = {
            'points': self._task_points,
            'autocorr': self._task_autocorr,
            'decompose': self._task_decompose,
            'diffract': self._task_diffract,
            'verify': self._task_verify,
            'fixtures': self._task_fixtures,
        }

    def run(self) -> int:
        """Execute every task, write the report and return the exit code"""
        logger.info(f"Running '{self.config.name}' into {self.config.output}")
        for name in self.config.tasks:
            start = time.time()
            try:
                detail = self.tasks[name]() or ""
                outcome = TaskOutcome(name, True, time.time() - start, detail)
            except Exception as e:
                logger.error(f"Task '{name}' failed: {e}", exc_info=True)
                outcome = TaskOutcome(name, False, time.time() - start, str(e))
            logger.info(f"{outcome.line()} in {outcome.seconds:.2f}s {outcome.detail}")
            self.state.outcomes.append(outcome)

        self.write_report()
        return self.exit_code()

    def exit_code(self) -> int:
        failed_tasks = any(not o.ok for o in self.state.outcomes)
        failed_claims = any(c.status == vf.FAIL for c in self.state.claims)
        return 1 if failed_tasks or failed_claims else 0

    def report_lines(self) -> List[str]:
        lines = [o.line() for o in self.state.outcomes]
        lines.extend(c.line() for c in self.state.claims)
        lines.extend(f"MEASURE {name} {value!r}" for name, value in self.state.measures.items())
        return lines

    def write_report(self) -> str:
        path = os.path.join(self.config.output, REPORT_FILE)
        with open(path, 'w') as f:
            f.write("\n".join(self.report_lines()) + "\n")
        logger.info(f"Report written to {path}")
        return path

    def _measure(self, name: str, value) -> None:
        self.state.measures[name] = float(value)

    # Shared objects

    def _comb(self) -> WeightedComb:
        if self.state.comb is None:
            config = self.config
            self.state.patch = model_set(config.scheme, config.window, config.region)
            self.state.comb = config.comb.build(self.state.patch, config.seed)
            logger.info(f"Comb '{self.state.comb.weight_model}' on {len(self.state.comb)} points")
        return self.state.comb

    def _gamma(self) -> ac.Autocorrelation:
        if self.state.gamma is None:
            self.state.gamma = ac.autocorrelation(self._comb(), self.config.R, threads=self.threads)
        return self.state.gamma

    def _oracle(self) -> ac.OracleKind:
        return self.config.comb.oracle(self._comb())

    # Tasks

    def _task_points(self) -> str:
        config = self.config
        comb = self._comb()
        patch = comb.patch
        radii = delone_radii(patch)
        meyer_box = Box.centered(min(config.R, MEYER_RADIUS), config.scheme.d)
        meyer = meyer_defect(model_set(config.scheme, config.window, meyer_box))
        growth = covering_growth(config.scheme, config.window, Box.centered(min(config.R, MEYER_RADIUS),
                                                                             config.scheme.d))
        probe = injectivity_probe(config.scheme)
        support = comb_support_check(comb, patch.window)

        self.exporter.patch(comb)
        rows = [
            ("points", len(patch)),
            ("boundary_ambiguous", patch.boundary_ambiguous_count),
            ("packing_radius", radii.packing),
            ("covering_radius", radii.covering),
            ("meyer_defect", meyer),
            ("covering_growth_region", growth[0]),
            ("covering_growth_doubled", growth[1]),
            ("injectivity_witnesses", len(probe.witnesses)),
            ("injectivity_probe_radius", probe.radius),
            ("comb_support_violations", support.violations),
        ]
        self.exporter.table("points_summary.csv", ["quantity", "value"], rows)
        self._measure("packing_radius", radii.packing)
        self._measure("covering_radius", radii.covering)
        if not support.passed:
            raise RuntimeError(f"{support.violations} comb points lie outside the window")
        return f"{len(patch)} points, packing {radii.packing:.4g}, covering {radii.covering:.4g}"

    def _task_autocorr(self) -> str:
        gamma = self._gamma()
        report = ac.support_check(gamma, gamma.scheme, gamma.window)
        self.exporter.coefficients(gamma.coefficients, "autocorrelation.csv", self.config.scheme)

        central = self._comb().patch
        inside = Box.centered(self.config.R / 2.0, self.config.scheme.d).contains(central.physical)
        psd = ac.positive_definite_check(gamma.coefficients, central.points[inside], seed=self.config.seed)
        self._measure("autocorr_support_violations", report.violations)
        self._measure("autocorr_min_eigenvalue", psd)
        if not report.passed:
            raise RuntimeError(f"{report.violations} autocorrelation keys outside the difference window")
        return f"{len(gamma.coefficients)} keys, min relative eigenvalue {psd:.3g}"

    def _task_decompose(self) -> str:
        config = self.config
        comb = self._comb()
        oracle = self._oracle()
        seq = ac.VanHoveSequence(config.scheme.d, config.radii)

        means = ac.finite_volume_null_means(comb, oracle, seq, threads=self.threads)
        self.exporter.null_means(seq.radii, means)

        parts = ac.decompose(self._gamma(), oracle)
        self.exporter.coefficients(parts.gamma_S, "gamma_S.csv", config.scheme)
        self.exporter.coefficients(parts.gamma_0, "gamma_0.csv", config.scheme)

        periods = ac.almost_period_candidates(config.scheme)
        inner = ac.VanHoveSequence(config.scheme.d, tuple(config.R * f for f in (0.125, 0.25, 0.5, 1.0)))
        accepted = ac.uniqueness_check(parts.gamma, parts.gamma_S, parts.gamma_0, inner, periods, config.R)
        swapped = ac.uniqueness_check(parts.gamma, parts.gamma_0, parts.gamma_S, inner, periods, config.R)

        for n, value in enumerate(means):
            self._measure(f"null_mean_{n}", value)
        self._measure("uniqueness_accepted", accepted.accepted)
        self._measure("uniqueness_swapped_accepted", swapped.accepted)
        return f"null means {[f'{m:.3g}' for m in means]}, uniqueness {accepted.reason}"

    def _task_diffract(self) -> str:
        config = self.config
        comb = self._comb()
        candidates = df.bragg_candidates(dual_basis(config.scheme), config.window, None, config.freq_box)
        spec = df.spectrum(comb, candidates, config.R, threads=self.threads)
        floor = df.noise_floor(comb, candidates, config.freq_box, config.R, seed=config.seed)
        bragg = spec.above(Config.INTENSITY_THRESHOLD_FACTOR * floor.level)
        self.exporter.spectrum(bragg, "spectrum.csv")

        gamma = self._gamma()
        top = bragg.top(10)
        via = [df.SpectrumEntry(e.frequency, e.key,
                                df.intensity_via_autocorr(gamma, e.frequency, config.R / 2.0, key=e.key))
               for e in top.entries]
        self.exporter.spectrum(df.Spectrum(via, config.R, "autocorr"), "spectrum_autocorr.csv")
        if self.svg:
            stick_plot(bragg, os.path.join(config.output, "spectrum.svg"), log_scale=self.log_scale,
                       title=f"{config.name}: R = {config.R!r}")

        self._measure("noise_floor", floor.level)
        self._measure("bragg_peaks", len(bragg))
        return f"{len(bragg)} of {len(spec)} candidates above {Config.INTENSITY_THRESHOLD_FACTOR} x floor"

    def _task_verify(self) -> str:
        config = self.config
        comb = self._comb()
        ctx = vf.build_context(comb, self._oracle(), config.R, config.freq_box, threads=self.threads)
        ctx.extras['residual_box'] = config.residual_box
        self.state.claims = vf.run_claims(ctx, Config.EPSILONS)

        if 'gamma_0_at_0' in ctx.extras:
            self._measure("gamma_0_at_0", ctx.extras['gamma_0_at_0'])
        if 'residual' in ctx.extras and ctx.extras['residual'][1]:
            self._measure("residual_level", float(np.mean(ctx.extras['residual'][1])))
        failed = [c.claim for c in self.state.claims if c.status == vf.FAIL]
        return f"failed claims: {failed}" if failed else "all applicable claims pass"

    def _task_fixtures(self) -> str:
        seq = ac.VanHoveSequence(1, FIXTURE_RADII)
        nu = integers_minus_shifts(FIXTURE_RADII[-1])
        means = ac.null_mean(nu, seq)
        self.exporter.null_means(seq.radii, means, "fixture_null_mean.csv")

        extent = 1000.0
        mu = two_lattices(extent)
        shifts = np.array([(n, 0, 0) for n in range(1, FIXTURE_SHIFTS + 1)], dtype=np.int64)
        defects = [ac.norm_ap_defect(mu, t, extent) for t in shifts]
        self.exporter.table("fixture_defects.csv", ["t", "defect"],
                            ((int(t[0]), d) for t, d in zip(shifts, defects)))

        self._measure("fixture_nu_null_mean", means[-1])
        self._measure("fixture_mu_min_defect", min(defects))
        return f"nu null mean {means[-1]:.4f}, mu min defect {min(defects):.3f}"

# checks/coordinator.py

import logging
import math
import time
from pathlib import Path
from typing import Optional

import numpy as np

from checks.models import CheckResult, Report, RunConfig
from checks.suites import SuiteContext, select_checks
from pdelab.grid import GridField, SpectralOperator, gaussian_bump, spectral_wave_reference
from pdelab.klein_gordon import damped_wave, klein_gordon
from pdelab.oscillators import (
    grushin_demo,
    grushin_grid,
    harmonic_oscillator,
    hermite_state,
    oscillator_grid,
    smooth_periodic,
)
from pdelab.waves import wave2d_poisson, wave3d_kirchhoff, wave_general
from propagators.commutative import CommutingFamily, evaluate_ascent
from propagators.errors import AscentError, FixtureError, ParityMismatchError
from propagators.fixtures import bundled_fixture_path, load_fixture, random_fixture, save_fixture
from propagators.operators import HermitianOperator, cos_sqrt_sum_oracle
from propagators.quadrature import DEFAULT_MC_SAMPLES, build_ball_rule, build_sphere_rule
from propagators.trotter import Verdict, noncomm_limit
from utils.serialization import write_csv, write_field, write_rule_csv

logger = logging.getLogger(__name__)

FIELD_TOL = 1e-3
_WAVE_FORMULAS = {1: "two-point-average", 2: "weighted-ball-ascent", 3: "sphere-ascent"}


class Coordinator:
    def __init__(self, config: RunConfig):
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.warnings = []
        self.timings = {}

    def run(self) -> Report:
        """
        Dispatches the configured command and returns its report.
        """
        command = self.config.command
        started = time.perf_counter()
        handler = getattr(self, f"run_{command}")
        report = handler()
        report.warnings.extend(self.warnings)
        report.timings.update(self.timings)
        report.timings["total"] = round(time.perf_counter() - started, 4)
        logger.info("%s finished in %.2fs (%s)", command, report.timings["total"],
                    "pass" if report.passed else "FAIL")
        return report

    def _report(self, formula: str, **kwargs) -> Report:
        inputs = self.config.model_dump(exclude={"command"})
        return Report(command=self.config.command, formula=formula, seed=self.config.seed, inputs=inputs, **kwargs)

    # -- suites -----------------------------------------------------------------

    def run_verify(self) -> Report:
        cfg = self.config
        ctx = SuiteContext(
            seed=cfg.seed,
            threads=cfg.threads,
            mc_samples=cfg.samples or DEFAULT_MC_SAMPLES,
            fixture_path=cfg.fixture,
        )
        try:
            selected = select_checks(cfg.checks, cfg.quick)
        except KeyError as exc:
            raise FixtureError(str(exc.args[0]), "--checks") from exc
        results = []
        for check in selected:
            started = time.perf_counter()
            try:
                results.extend(check.run(ctx))
            except FixtureError:
                raise
            except AscentError as exc:
                logger.error("check %s raised %s: %s", check.name, type(exc).__name__, exc)
                results.append(CheckResult(
                    name=check.name, formula=check.formula, value=math.inf, tolerance=0.0,
                    detail={"error": f"{type(exc).__name__}: {exc}"},
                ))
            self.timings[check.name] = round(time.perf_counter() - started, 4)
            logger.info("check %s done in %.2fs", check.name, self.timings[check.name])
        self.warnings.extend(ctx.warnings)
        return self._report("acceptance-suite", checks=results, results={"checks": [c.name for c in selected]})

    # -- operator demos ---------------------------------------------------------

    def _load_fixture(self, default: str):
        fixture = load_fixture(self.config.fixture or bundled_fixture_path(default))
        self.warnings.extend(fixture.warnings)
        return fixture

    def run_ascent(self) -> Report:
        cfg = self.config
        if cfg.fixture:
            ops = self._load_fixture("pair4").ops
        else:
            ops = [HermitianOperator.scalar(v, label=f"a{i + 1}") for i, v in enumerate(cfg.values)]
        n = len(ops)
        if cfg.parity and (n % 2 == 0) != (cfg.parity == "even"):
            raise ParityMismatchError(f"--parity {cfg.parity} does not match a family of {n} operators")
        family = CommutingFamily(ops)
        evaluation = evaluate_ascent(family, cfg.t, rule_level=cfg.level, threads=cfg.threads, seed=cfg.seed)
        expansion = evaluation.expansion
        result = evaluation.value.entries
        gap = float(np.linalg.norm(result - cos_sqrt_sum_oracle(ops, cfg.t).entries))
        check = CheckResult(name="ascent vs spectral oracle", formula=expansion.formula, value=gap, tolerance=cfg.tol)
        results = {
            "result": result,
            "truncation": expansion.truncation,
            "rule_level": expansion.rule_level,
            "halvings": evaluation.halvings,
            "tail_bound": expansion.tail_bound,
            "moment_error": expansion.moment_error,
            "rule": expansion.rule,
        }
        return self._report(expansion.formula, checks=[check], results=results)

    def _noncomm_fixture(self):
        cfg = self.config
        if cfg.q is None or (cfg.q == 2 and not cfg.fixture):
            return self._load_fixture("pair4")
        if cfg.fixture:
            fixture = self._load_fixture("pair4")
            if len(fixture.ops) != cfg.q:
                raise FixtureError(f"fixture holds {len(fixture.ops)} operators, --q asks for {cfg.q}", "--q")
            return fixture
        return random_fixture("pair", cfg.size, cfg.q, cfg.seed)

    def run_noncomm(self) -> Report:
        cfg = self.config
        fixture = self._noncomm_fixture()
        reference = cos_sqrt_sum_oracle(fixture.ops, cfg.t).entries @ fixture.h.entries
        vector, conv = noncomm_limit(
            fixture.ops, fixture.h, cfg.t, cfg.tol,
            m0=cfg.m0, m_cap=cfg.m_cap, richardson=cfg.richardson, reference=reference,
        )
        if conv.caution:
            self.warnings.append(f"|t|={abs(cfg.t):g} lies outside the certified radius {conv.radius:.4g}")
        rows = [
            (m, err, conv.differences[i - 1] if i else "")
            for i, (m, err) in enumerate(zip(conv.m_values, conv.errors))
        ]
        csv_path = write_csv(self.output_dir / "noncomm_convergence.csv", ["m", "error", "difference"], rows)
        gap = float(np.linalg.norm(vector.entries - reference))
        checks = [
            CheckResult(name="oracle gap", formula=conv.formula, value=gap, tolerance=2.0 * cfg.tol * fixture.h.norm()),
            CheckResult(name="converged before the m cap", formula=conv.formula,
                        value=float(conv.verdict is Verdict.SLOW), tolerance=0.0),
        ]
        results = {
            "convergence": conv.to_dict(), "vector": vector.entries, "csv": str(csv_path),
            "fixture": fixture.name, "operators": len(fixture.ops),
        }
        return self._report(conv.formula, checks=checks, results=results)

    # -- grid demos -------------------------------------------------------------

    def _bump(self, dim: int) -> GridField:
        cfg = self.config
        return gaussian_bump((cfg.grid,) * dim, (cfg.length,) * dim, cfg.sigma)

    def _field_report(self, formula: str, f: GridField, u: GridField, reference: GridField, extra: Optional[dict] = None) -> Report:
        cfg = self.config
        gap = u.relative_gap(reference)
        results = {"input_norm": f.norm(), "output_norm": u.norm(), "reference_gap": gap, "shape": list(u.shape)}
        if extra:
            results.update(extra)
        if cfg.out == "csv":
            header = write_field(self.output_dir / f"{cfg.command}_field", u, cfg.t, {"formula": formula, "seed": cfg.seed})
            results["field"] = str(header.with_suffix(".csv"))
        check = CheckResult(name="spectral reference gap", formula=formula, value=gap, tolerance=FIELD_TOL)
        return self._report(formula, checks=[check], results=results)

    def run_wave(self) -> Report:
        cfg = self.config
        f = self._bump(cfg.dim)
        u = wave_general(f, cfg.t, cfg.level)
        ref = spectral_wave_reference(f, cfg.t, SpectralOperator.laplacian_root(f))
        return self._field_report(_WAVE_FORMULAS[cfg.dim], f, u, ref)

    def run_wave2d(self) -> Report:
        cfg = self.config
        f = self._bump(2)
        u = wave2d_poisson(f, cfg.t, cfg.level)
        ref = spectral_wave_reference(f, cfg.t, SpectralOperator.laplacian_root(f))
        return self._field_report("poisson-disk-average", f, u, ref)

    def run_wave3d(self) -> Report:
        cfg = self.config
        f = self._bump(3)
        u = wave3d_kirchhoff(f, cfg.t, cfg.level)
        ref = spectral_wave_reference(f, cfg.t, SpectralOperator.laplacian_root(f))
        return self._field_report("kirchhoff-sphere-average", f, u, ref)

    def run_kg(self) -> Report:
        cfg = self.config
        f = self._bump(cfg.dim)
        u = klein_gordon(f, cfg.t, cfg.a, cfg.level)
        ref = spectral_wave_reference(f, cfg.t, SpectralOperator.klein_gordon(f, cfg.a))
        return self._field_report("klein-gordon-kernel", f, u, ref, {"a": cfg.a})

    def run_damped(self) -> Report:
        cfg = self.config
        f = self._bump(cfg.dim)
        u = damped_wave(f, cfg.t, cfg.a, cfg.level)
        ref = spectral_wave_reference(f, cfg.t, SpectralOperator.damped(f, cfg.a))
        return self._field_report("damped-continuation", f, u, ref, {"a": cfg.a})

    def _demo_report(self, formula: str, demo) -> Report:
        cfg = self.config
        results = {"convergence": demo.report.to_dict(), "oracle_gap": demo.oracle_gap, "shape": list(demo.field.shape)}
        if demo.report.caution:
            self.warnings.append(f"{cfg.command}: |t|={abs(cfg.t):g} outside the certified radius {demo.report.radius:.4g}")
        if cfg.out == "csv":
            header = write_field(self.output_dir / f"{cfg.command}_field", demo.field, cfg.t, {"formula": formula, "seed": cfg.seed})
            results["field"] = str(header.with_suffix(".csv"))
        checks = [
            CheckResult(name="dense oracle gap", formula=formula, value=demo.oracle_gap, tolerance=FIELD_TOL),
            CheckResult(name="converged before the m cap", formula=formula,
                        value=float(demo.report.verdict is Verdict.SLOW), tolerance=0.0),
        ]
        return self._report(formula, checks=checks, results=results)

    def run_oscillator(self) -> Report:
        cfg = self.config
        f = hermite_state(oscillator_grid(cfg.grid, cfg.length), 0)
        return self._demo_report("harmonic-oscillator", harmonic_oscillator(f, cfg.t, cfg.tol, cfg.m_cap))

    def run_grushin(self) -> Report:
        cfg = self.config
        f = smooth_periodic(grushin_grid(cfg.grid, cfg.length), seed=cfg.seed)
        return self._demo_report("grushin-sum-of-squares", grushin_demo(f, cfg.t, cfg.tol, cfg.m_cap))

    # -- artifacts --------------------------------------------------------------

    def run_fixture(self) -> Report:
        cfg = self.config
        fixture = random_fixture(cfg.kind, cfg.size, cfg.count, cfg.seed)
        path = save_fixture(Path(cfg.fixture) if cfg.fixture else self.output_dir / f"{fixture.name}.json", fixture)
        return self._report("fixture-generator", results={"path": str(path), "name": fixture.name})

    def run_rule(self) -> Report:
        cfg = self.config
        if cfg.rule_kind == "ball":
            rule = build_ball_rule(cfg.dim, cfg.level, samples=cfg.samples or DEFAULT_MC_SAMPLES, seed=cfg.seed, threads=cfg.threads)
        else:
            rule = build_sphere_rule(cfg.dim, cfg.level, samples=cfg.samples or DEFAULT_MC_SAMPLES, seed=cfg.seed, threads=cfg.threads)
        path = write_rule_csv(self.output_dir / f"{cfg.rule_kind}{cfg.dim}_level{cfg.level}.csv", rule)
        error = rule.certified_error()
        results = {"rule": rule.describe(), "csv": str(path), "moment_error": error}
        # sampled rules carry statistical error only; nothing to certify
        checks = [] if rule.is_monte_carlo else [
            CheckResult(name="certified moment error", formula=f"{cfg.rule_kind}-rule", value=error, tolerance=1e-8)
        ]
        return self._report(f"{cfg.rule_kind}-rule", checks=checks, results=results)

"""
Cross-checks between the analytic engine, its independent oracles and the sampler.

Exact checks: generator validation, DP vs brute force, theta invariance of the
theta-recursion, Dirichlet reduction of the posterior mean.
Statistical checks: sampled first/second moments of nu(x) against the engine,
support coverage near mu and near every vertex of the simplex.
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from generators import GeneratorMatrix, GeneratorSpec, build, dirichlet_graph
from moments import MomentEngine, MomentQuery
from numerics import MSBError, NumericalConsistencyError, StatisticalCheckError, ValidationError
from posterior import CountVector, PosteriorSmoother, dirichlet_posterior_mean
from sampler import MonteCarloSampler, RngStream, RunningMoments

PASS, FAIL, SKIP = 'PASS', 'FAIL', 'SKIP'


@dataclass
class CheckResult:
    name: str
    status: str
    observed: float = float('nan')
    tolerance: float = float('nan')
    detail: str = ""
    exit_code: int = 0

    def line(self) -> str:
        return f"{self.name:<22} {self.status:<5} {self.observed:<12.4g} {self.tolerance:<10.4g} {self.detail}"


@dataclass
class VerificationReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    @property
    def exit_code(self) -> int:
        for check in self.checks:
            if check.status == FAIL:
                return check.exit_code
        return 0

    def render(self) -> str:
        header = f"{'check':<22} {'status':<5} {'observed':<12} {'tolerance':<10} detail"
        return '\n'.join([header] + [c.line() for c in self.checks])

    def raise_for_status(self):
        """Raise the error matching the first failed check"""
        for check in self.checks:
            if check.status != FAIL:
                continue
            message = f"verification check {check.name} failed: {check.detail}"
            if check.exit_code == 3:
                raise StatisticalCheckError(message)
            if check.exit_code == 2:
                raise NumericalConsistencyError(message)
            raise ValidationError(message)


class VerificationSuite:
    """Runs every check against one generator spec"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        """
        Initialize verification suite

        Args:
            config: Configuration dictionary (uses the 'verification' section)
        """
        self.config = config or {}
        section = self.config.get('verification', {})
        self.min_samples = int(section.get('min_samples', 1000))
        self.sigma = float(section.get('sigma', 3.0))
        self.exact_tolerance = float(section.get('exact_tolerance', 1e-10))
        self.theta_tolerance = float(section.get('theta_tolerance', 1e-8))
        self.max_brute_k = int(section.get('max_brute_k', 6))
        self.brute_queries = int(section.get('brute_queries', 5))
        self.coverage_radius = float(section.get('coverage_radius', 0.5))

        self.engine = MomentEngine(self.config)
        self.smoother = PosteriorSmoother(self.config, engine=self.engine)
        self.sampler = MonteCarloSampler(self.config)

    def run(self, spec: GeneratorSpec, n_samples: int, seed: int) -> VerificationReport:
        """
        Run the suite

        Args:
            spec: Generator spec to verify
            n_samples: Monte Carlo sample size; below min_samples the statistical checks are skipped
            seed: Root seed for every random draw
        """
        report = VerificationReport()
        try:
            generator = build(spec, self.config)
        except MSBError as e:
            report.checks.append(CheckResult('validation', FAIL, detail=str(e), exit_code=e.exit_code))
            for name in ('dp_vs_brute', 'theta_invariance', 'dirichlet_reduction',
                         'first_moment', 'second_moment', 'support_coverage'):
                report.checks.append(CheckResult(name, SKIP, detail="generator invalid"))
            return report
        report.checks.append(CheckResult('validation', PASS, detail=f"d={generator.dim}, theta^G={generator.theta_G:g}"))

        rng = RngStream(seed).for_batch(2 ** 32)
        for check in (self._dp_vs_brute, self._theta_invariance, self._dirichlet_reduction):
            report.checks.append(self._guarded(check, generator, rng))

        if n_samples < self.min_samples:
            logger.warning(f"{n_samples} samples is below the minimum {self.min_samples}; "
                           f"statistical checks skipped")
            for name in ('first_moment', 'second_moment', 'support_coverage'):
                report.checks.append(CheckResult(name, SKIP, detail=f"N < {self.min_samples}"))
        else:
            report.checks.extend(self._moment_checks(generator, n_samples, seed))
            report.checks.append(self._support_coverage(generator, n_samples, seed))

        for check in report.checks:
            logger.info(f"{check.name}: {check.status} {check.detail}")
        return report

    @staticmethod
    def _guarded(check, generator: GeneratorMatrix, rng: RngStream) -> CheckResult:
        try:
            return check(generator, rng)
        except MSBError as e:
            name = check.__name__.lstrip('_')
            return CheckResult(name, FAIL, detail=str(e), exit_code=2)

    # ==================== EXACT CHECKS ====================

    def _random_query(self, generator: GeneratorMatrix, rng: RngStream) -> MomentQuery:
        d = generator.dim
        gen = rng.generator
        n_sets = int(gen.integers(1, min(d, 3) + 1))
        order = gen.permutation(d)
        cuts = np.sort(gen.choice(np.arange(1, d), size=n_sets - 1, replace=False)) if n_sets > 1 else []
        blocks = np.split(order, cuts)
        # keep each set a strict subset so the moment is not identically 1
        blocks = [b[:max(1, len(b) - 1)] if n_sets == 1 else b for b in blocks]
        total = int(gen.integers(1, self.max_brute_k + 1))
        exponents = np.ones(n_sets, dtype=int)
        for _ in range(max(total - n_sets, 0)):
            exponents[gen.integers(0, n_sets)] += 1
        return MomentQuery.build(zip(blocks, exponents.tolist()))

    def _dp_vs_brute(self, generator: GeneratorMatrix, rng: RngStream) -> CheckResult:
        worst = 0.0
        for _ in range(self.brute_queries):
            query = self._random_query(generator, rng)
            dp = self.engine.moment_unconditional(generator, query)
            brute = self.engine.moment_bruteforce(generator, query)
            worst = max(worst, abs(dp - brute))
        status = PASS if worst <= self.exact_tolerance else FAIL
        return CheckResult('dp_vs_brute', status, worst, self.exact_tolerance,
                           f"{self.brute_queries} random queries, k <= {self.max_brute_k}", exit_code=2)

    def _theta_invariance(self, generator: GeneratorMatrix, rng: RngStream) -> CheckResult:
        if generator.theta_G <= 0:
            return CheckResult('theta_invariance', SKIP, detail="theta^G = 0")
        query = self._random_query(generator, rng)
        reference = self.engine.moment_unconditional(generator, query)
        worst = 0.0
        for factor in (1.0, 2.0, 10.0):
            value = self.engine.moment_via_theta_recursion(generator, factor * generator.theta_G, query)
            worst = max(worst, abs(value - reference))
        status = PASS if worst <= self.theta_tolerance else FAIL
        return CheckResult('theta_invariance', status, worst, self.theta_tolerance,
                           f"theta in theta^G x (1, 2, 10), query {query}", exit_code=2)

    def _dirichlet_reduction(self, generator: GeneratorMatrix, rng: RngStream) -> CheckResult:
        """Dirichlet generator with the same mu: posterior mean must equal (alpha + k) / (|alpha| + n)"""
        d = generator.dim
        if d < 2:
            return CheckResult('dirichlet_reduction', SKIP, detail="d = 1")
        scale = generator.theta_G if generator.theta_G > 0 else 1.0
        alpha = scale * generator.mu
        reference = dirichlet_graph(alpha)
        n = int(rng.generator.integers(1, 9))
        counts = CountVector.from_observations(d, rng.generator.choice(d, size=n, p=generator.mu))
        pmf = self.smoother.posterior_mean_pmf(reference, counts)
        worst = float(np.abs(pmf - dirichlet_posterior_mean(alpha, counts.counts)).max())
        status = PASS if worst <= self.exact_tolerance else FAIL
        return CheckResult('dirichlet_reduction', status, worst, self.exact_tolerance,
                           f"alpha = {scale:g} mu, n={n}", exit_code=2)

    # ==================== STATISTICAL CHECKS ====================

    def _moment_checks(self, generator: GeneratorMatrix, n_samples: int, seed: int) -> List[CheckResult]:
        d = generator.dim
        first = [RunningMoments() for _ in range(d)]
        second = [RunningMoments() for _ in range(d)]
        for nu, _ in self.sampler.batches(generator, n_samples, seed, label="verify"):
            for x in range(d):
                first[x].merge(nu[:, x])
                second[x].merge(nu[:, x] ** 2)

        results = []
        for name, stats, power in (('first_moment', first, 1), ('second_moment', second, 2)):
            worst = 0.0
            for x in range(d):
                exact = self.engine.moment_unconditional(generator, MomentQuery.from_singletons({x: power}))
                se = stats[x].standard_error
                gap = abs(stats[x].mean - exact)
                z = gap / se if se > 0 else (0.0 if gap <= self.exact_tolerance else math.inf)
                worst = max(worst, z)
            status = PASS if worst <= self.sigma else FAIL
            results.append(CheckResult(name, status, worst, self.sigma,
                                       f"max |z| over {d} categories, N={n_samples}", exit_code=3))
        return results

    def _support_coverage(self, generator: GeneratorMatrix, n_samples: int, seed: int) -> CheckResult:
        targets = np.vstack([generator.mu, np.eye(generator.dim)])
        hits = self.sampler.support_coverage(generator, targets, self.coverage_radius, n_samples, (seed + 1) % 2 ** 64)
        fewest = min(hits)
        status = PASS if fewest >= 1 else FAIL
        return CheckResult('support_coverage', status, float(fewest), 1.0,
                           f"min hits near mu and each vertex, radius {self.coverage_radius:g}",
                           exit_code=3)

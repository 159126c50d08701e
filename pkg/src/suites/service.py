"""Suite runner: seeded trials of every registered invariant family."""

import contextvars
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from loguru import logger

from src.core.exceptions import SelfTestException
from src.linalg.sampling import make_rng
from src.suites.registry import Suite, select
from src.suites.schemas import Check, SuiteConfig, SuiteResult, SuiteSummary, TrialOutcome


class SuiteRunner:
    """Runs property suites with per-trial generators.

    Trial t of the suite at registry position i draws from
    SeedSequence(seed, spawn_key=(i, t)), so a violation is replayed from
    (seed, i, t) alone regardless of worker count or suite selection.
    """

    def run_trial(self, suite: Suite, index: int, trial: int, config: SuiteConfig) -> Check:
        """Run one trial; contract errors and failed factorizations count as violations."""
        rng = make_rng(config.seed, index, trial)
        with logger.contextualize(suite=suite.name, trial=trial, seed=config.seed):
            try:
                return suite.trial(rng, config.dims, config.slack)
            except (SelfTestException, np.linalg.LinAlgError) as e:
                logger.warning("Trial raised", error=type(e).__name__, detail=str(e))
                return Check(holds=False, detail=f"{type(e).__name__}: {e}")

    def run_suite(self, suite: Suite, index: int, config: SuiteConfig) -> SuiteResult:
        """Run config.trials trials of one suite, fanned out over config.workers threads.

        Parameters
        ----------
        suite : Suite
            Registered suite
        index : int
            Its registry position, the first spawn-key component
        config : SuiteConfig
            Seed, trial count, dimension range, slack and workers

        Returns
        -------
        SuiteResult
            Counts in trial order with every violation and its spawn key
        """
        trials = range(config.trials)
        if config.workers == 1:
            checks = [self.run_trial(suite, index, t, config) for t in trials]
        else:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                futures = [
                    pool.submit(contextvars.copy_context().run, self.run_trial, suite, index, t, config)
                    for t in trials
                ]
                checks = [f.result() for f in futures]

        violations = [
            TrialOutcome(
                suite=suite.name,
                trial=t,
                seed=config.seed,
                spawn_key=(index, t),
                value=c.value,
                bound=c.bound,
                detail=c.detail,
            )
            for t, c in zip(trials, checks)
            if not c.holds
        ]
        for v in violations:
            logger.warning(
                "Suite violation", suite=v.suite, trial=v.trial, seed=v.seed, value=v.value, bound=v.bound
            )

        failed = len(violations)
        passed = config.trials - failed
        pass_rate = passed / config.trials
        if not suite.hard:
            status = "info"
        else:
            status = "pass" if pass_rate >= suite.min_pass_rate else "fail"
        logger.info("Suite finished", suite=suite.name, passed=passed, failed=failed, status=status)
        return SuiteResult(
            name=suite.name,
            trials=config.trials,
            passed=passed,
            failed=failed,
            pass_rate=pass_rate,
            min_pass_rate=suite.min_pass_rate,
            status=status,
            violations=violations,
        )

    def run(self, config: SuiteConfig) -> SuiteSummary:
        """Run the selected suites in registry order.

        Raises
        ------
        ContractViolation
            If the selector names an unknown suite
        """
        selected = select(config.suites)
        logger.info("Running suites", count=len(selected), seed=config.seed, trials=config.trials)
        results = [self.run_suite(suite, index, config) for index, suite in selected]
        return SuiteSummary(
            seed=config.seed,
            trials=config.trials,
            slack=config.slack,
            passed=all(r.status != "fail" for r in results),
            suites=results,
        )


suite_runner = SuiteRunner()

import pytest
from pydantic import ValidationError

from src.core.exceptions import ContractViolation
from src.suites.registry import SUITE_NAMES, SUITES, Suite, select
from src.suites.schemas import Check, SuiteConfig
from src.suites.service import suite_runner


def config(**overrides) -> SuiteConfig:
    fields = {"seed": 7, "trials": 2, "slack": 1e-9}
    fields.update(overrides)
    return SuiteConfig(**fields)


def always(holds: bool):
    def trial(rng, dims, slack):
        return Check(holds=holds, value=float(rng.random()), bound=0.5)

    return trial


def alternating(rng, dims, slack):
    return Check(holds=rng.random() < 0.5)


def raising(rng, dims, slack):
    raise ContractViolation("bad instance")


class TestSuiteConfig:
    def test_defaults_from_settings(self):
        cfg = SuiteConfig.from_settings(trials=5, seed=None)
        assert cfg.trials == 5
        assert cfg.seed == 1
        assert cfg.slack == pytest.approx(1e-9)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"slack": 0.0},
            {"trials": 0},
            {"workers": 0},
            {"seed": -1},
            {"seed": 2**64},
            {"dims": (3, 2)},
            {"dims": (0, 2)},
        ],
    )
    def test_rejects_bad_values(self, overrides):
        with pytest.raises(ValidationError):
            config(**overrides)


class TestRegistry:
    def test_names_are_unique(self):
        assert len(set(SUITE_NAMES)) == len(SUITES) == 18

    def test_select_keeps_registry_positions(self):
        chosen = select(["holder", "sync-value"])
        assert [(i, s.name) for i, s in chosen] == [(0, "sync-value"), (4, "holder")]

    def test_empty_selects_all(self):
        assert [s.name for _, s in select(())] == list(SUITE_NAMES)

    def test_unknown_suite(self):
        with pytest.raises(ContractViolation):
            select(["no-such-suite"])

    def test_only_rounding_tolerates_failures(self):
        relaxed = {s.name for s in SUITES if s.min_pass_rate < 1.0}
        assert relaxed == {"rounding"}
        assert {s.name for s in SUITES if not s.hard} == {"exponents"}


class TestRunner:
    def test_violations_carry_spawn_keys(self):
        suite = Suite(name="never", trial=always(False))
        result = suite_runner.run_suite(suite, 3, config(trials=4))
        assert result.status == "fail"
        assert result.failed == 4
        assert [v.spawn_key for v in result.violations] == [(3, t) for t in range(4)]
        assert all(v.seed == 7 and v.bound == 0.5 for v in result.violations)

    def test_raising_trial_is_a_violation(self):
        result = suite_runner.run_suite(Suite(name="raises", trial=raising), 0, config())
        assert result.failed == 2
        assert "ContractViolation" in result.violations[0].detail

    def test_pass_rate_rule(self):
        suite = Suite(name="half", trial=alternating, min_pass_rate=0.0)
        result = suite_runner.run_suite(suite, 0, config(trials=20))
        assert result.status == "pass"
        assert result.passed + result.failed == 20
        assert result.pass_rate == pytest.approx(result.passed / 20)

    def test_soft_suite_reports_info(self):
        result = suite_runner.run_suite(Suite(name="soft", trial=always(False), hard=False), 0, config())
        assert result.status == "info"

    def test_trials_replay_from_seed_and_key(self):
        suite = Suite(name="values", trial=always(True))
        first = suite_runner.run_trial(suite, 2, 5, config())
        again = suite_runner.run_trial(suite, 2, 5, config())
        other = suite_runner.run_trial(suite, 2, 6, config())
        assert first.value == again.value
        assert first.value != other.value

    def test_workers_do_not_change_results(self):
        suite = Suite(name="never", trial=always(False))
        serial = suite_runner.run_suite(suite, 1, config(trials=6))
        threaded = suite_runner.run_suite(suite, 1, config(trials=6, workers=3))
        assert serial.model_dump() == threaded.model_dump()


class TestRegisteredSuites:
    @pytest.mark.parametrize(
        "name", [n for n in SUITE_NAMES if n not in {"rounding", "exponents"}]
    )
    def test_certified_suites_hold(self, name):
        summary = suite_runner.run(config(suites=(name,)))
        (result,) = summary.suites
        assert result.failed == 0, result.violations
        assert summary.passed

    def test_exponents_never_fail(self):
        (result,) = suite_runner.run(config(suites=("exponents",))).suites
        assert result.status == "info"

    def test_selection_does_not_shift_seeds(self):
        alone = suite_runner.run(config(suites=("scan-identity",)))
        together = suite_runner.run(config(suites=("holder", "scan-identity")))
        assert alone.suites[0].model_dump() == together.suites[1].model_dump()

    def test_summary_is_deterministic(self):
        cfg = config(suites=("holder", "povm-pair", "exponents"))
        assert suite_runner.run(cfg).model_dump() == suite_runner.run(cfg).model_dump()

"""Typer application: one subcommand per module plus the property suites.

Every command runs inside a run scope, writes its report to stdout and maps
library errors to exit codes: 1 for violated invariants, 2 for bad input,
3 for files that do not fit together.
"""

from collections.abc import Callable
from enum import Enum, IntEnum
from pathlib import Path
from typing import Annotated

import typer
from loguru import logger
from pydantic import BaseModel, ValidationError

from src.cli.serialization import (
    dumps_report,
    parse_code,
    parse_game,
    parse_strategy,
    parse_tracial,
    parse_witness,
    to_csv,
)
from src.config import get_settings
from src.core.exceptions import (
    CompatibilityError,
    ContractViolation,
    DimensionMismatch,
    InvariantViolation,
    SchemaError,
    SelfTestException,
)
from src.core.logging_config import configure_logging
from src.core.run_context import run_scope
from src.decomposition.calculator import block_partition, lambda_filter, level_statistics, me_components, spectral_scan
from src.dilation.calculator import dilation_residuals, strong_residual
from src.dilation.conversion import vna_roundtrip
from src.games.calculator import analyze_synchronicity, polynomial_gap
from src.games.instances import uniform_nu
from src.games.schemas import Game
from src.linalg.calculator import pvm_residual, reduced_densities
from src.linalg.sampling import make_rng, perturbed_pvm
from src.qldt.calculator import qldt_gap, qubit_test_report
from src.rounding.calculator import nearest_pvm, projectivize_strategy
from src.strategies.calculator import gns_realize
from src.strategies.schemas import BipartiteStrategy
from src.suites.schemas import SuiteConfig
from src.suites.service import suite_runner

ROUNDING_PASS_RATE = 0.99

app = typer.Typer(name="selftest", help="Nonlocal games, strategies and self-testing bounds.", no_args_is_help=True)

InputFile = Annotated[Path, typer.Argument(exists=True, dir_okay=False, readable=True)]
CsvFlag = Annotated[bool, typer.Option("--csv", help="Flatten the report to CSV")]
TracialFlag = Annotated[bool, typer.Option("--tracial", help="Read STRATEGY as a tracial strategy and realise it by GNS")]


class GapMethod(str, Enum):
    fast = "fast"
    dense = "dense"


class Side(str, Enum):
    A = "A"
    B = "B"


class ExitCode(IntEnum):
    OK = 0
    VIOLATION = 1
    BAD_INPUT = 2
    INCOMPATIBLE = 3


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, InvariantViolation):
        return ExitCode.VIOLATION
    if isinstance(exc, (CompatibilityError, DimensionMismatch)):
        return ExitCode.INCOMPATIBLE
    if isinstance(exc, (SchemaError, ContractViolation, ValidationError)):
        return ExitCode.BAD_INPUT
    return ExitCode.VIOLATION


def _execute(command: str, body: Callable[[], int]) -> None:
    """Run a command body in a run scope and turn its outcome into an exit code."""
    with run_scope(command=command) as run_id:
        logger.info("Command started", command=command)
        try:
            code = body()
        except (SelfTestException, ValidationError) as e:
            code = _exit_code(e)
            logger.error("Command failed", command=command, error_type=type(e).__name__, error=str(e))
            typer.echo(f"Error: {e}", err=True)
        except Exception as e:
            code = ExitCode.VIOLATION
            logger.opt(exception=True).error(
                "Unhandled exception", command=command, run_id=run_id, error_type=type(e).__name__
            )
            typer.echo(f"Error: {type(e).__name__}: {e}", err=True)
        logger.info("Command finished", command=command, exit_code=code)
    if code != ExitCode.OK:
        raise typer.Exit(int(code))


def _emit(report, csv: bool, table: str | None = None) -> None:
    typer.echo(to_csv(report, table) if csv else dumps_report(report), nl=not csv)


def _holds(report: BaseModel) -> int:
    return ExitCode.OK if getattr(report, "holds", True) else ExitCode.VIOLATION


def _load_strategy(path: Path, game: Game | None, tracial: bool) -> BipartiteStrategy:
    if tracial:
        return gns_realize(parse_tracial(path.read_text(), game))
    return parse_strategy(path.read_text(), game)


@app.callback()
def configure(
    log_level: Annotated[str | None, typer.Option(help="Overrides LOG_LEVEL")] = None,
    json_logs: Annotated[bool | None, typer.Option("--json-logs/--console-logs", help="Log format on stderr")] = None,
) -> None:
    if log_level is not None or json_logs is not None:
        configure_logging(level=log_level, json_output=json_logs)


@app.command()
def analyze(game: InputFile, csv: CsvFlag = False) -> None:
    """Symmetry, synchronicity and beta of a game."""

    def body() -> int:
        _emit(analyze_synchronicity(parse_game(game.read_text())), csv)
        return ExitCode.OK

    _execute("analyze", body)


@app.command()
def gap(
    game: InputFile,
    strategy: InputFile,
    perfect_threshold: Annotated[float | None, typer.Option(help="omega >= 1 - threshold is perfect")] = None,
    tracial: TracialFlag = False,
    csv: CsvFlag = False,
) -> None:
    """Top two eigenvalues and spectral gap of the game polynomial of a strategy."""

    def body() -> int:
        G = parse_game(game.read_text())
        S = _load_strategy(strategy, G, tracial)
        _emit(polynomial_gap(G, S, perfect_threshold), csv)
        return ExitCode.OK

    _execute("gap", body)


@app.command()
def qldt(
    code: Annotated[Path, typer.Option(exists=True, dir_okay=False, readable=True, help="Generator file")],
    method: Annotated[GapMethod, typer.Option(help="Codeword enumeration or dense eigensolve")] = GapMethod.fast,
    beta: Annotated[float, typer.Option(help="Synchronisation parameter")] = 0.5,
    csv: CsvFlag = False,
) -> None:
    """Qubit-test parameters and spectral gap of a binary code."""

    def body() -> int:
        parsed = parse_code(code.read_text())
        report = qubit_test_report(parsed, beta)
        _emit({"method": method.value, "computed_gap": qldt_gap(parsed, method.value), "report": report}, csv)
        return ExitCode.OK

    _execute("qldt", body)


@app.command(name="round")
def round_(
    eta: Annotated[float, typer.Option(help="Perturbation of the sampled PVMs")] = 0.02,
    trials: Annotated[int, typer.Option(min=1)] = 100,
    seed: Annotated[int | None, typer.Option(help="Defaults to SELFTEST_SEED")] = None,
    dim: Annotated[int, typer.Option(min=1)] = 4,
    answers: Annotated[int, typer.Option(min=1)] = 3,
    strategy: Annotated[Path | None, typer.Option(exists=True, dir_okay=False, help="Projectivize this strategy")] = None,
    game: Annotated[Path | None, typer.Option(exists=True, dir_okay=False, help="Question distribution for --strategy")] = None,
    csv: CsvFlag = False,
) -> None:
    """Round seeded perturbed PVMs, or one strategy, to nearby projective measurements."""

    def body() -> int:
        settings = get_settings()
        run_seed = settings.SELFTEST_SEED if seed is None else seed
        if strategy is not None:
            G = parse_game(game.read_text()) if game is not None else None
            S = parse_strategy(strategy.read_text(), G)
            nu = G.nu if G is not None else uniform_nu(S.n_questions)
            _, report = projectivize_strategy(S, nu, make_rng(run_seed))
            _emit(report, csv)
            return ExitCode.OK if report.replacement.holds else ExitCode.VIOLATION

        rows = []
        for t in range(trials):
            rng = make_rng(run_seed, t)
            family = perturbed_pvm(rng, dim, answers, eta)
            P, q = nearest_pvm(family, rng=rng)
            if not q.holds:
                logger.warning("Rounding violation", seed=run_seed, trial=t, defect=q.defect, bound=q.bound)
            rows.append({"trial": t, **q.model_dump(), "pvm_residual": pvm_residual(P)})
        violations = sum(not r["holds"] for r in rows)
        pass_rate = 1.0 - violations / trials
        _emit(
            {
                "eta": eta,
                "seed": run_seed,
                "trials": trials,
                "violations": violations,
                "pass_rate": pass_rate,
                "rows": rows,
            },
            csv,
            table="rows" if csv else None,
        )
        return ExitCode.OK if pass_rate >= ROUNDING_PASS_RATE else ExitCode.VIOLATION

    _execute("round", body)


@app.command()
def decompose(
    strategy: InputFile,
    game: Annotated[Path | None, typer.Option(exists=True, dir_okay=False, help="Adds level values and blocks")] = None,
    side: Annotated[Side, typer.Option(help="Whose reduced density to scan")] = Side.A,
    tracial: TracialFlag = False,
    csv: CsvFlag = False,
) -> None:
    """Decompose a projective strategy into ME strategies along one side's spectrum."""

    def body() -> int:
        G = parse_game(game.read_text()) if game is not None else None
        S = _load_strategy(strategy, G, tracial)
        nu = G.nu if G is not None else uniform_nu(S.n_questions)
        side_ = side.value
        components, report = me_components(S, nu.sum(axis=1), side_)
        result: dict = {"components": len(components), "me": report}
        code = _holds(report)
        if G is not None:
            rho = reduced_densities(S.psi, S.dim_a, S.dim_b)[0 if side_ == "A" else 1]
            scan = spectral_scan(rho)
            stats = level_statistics(G, S, scan, side_)
            selection = lambda_filter(stats)
            result.update(statistics=stats, selection=selection)
            if selection.members:
                _, blocks = block_partition(G, S, scan, stats, selection, side_)
                result["blocks"] = blocks
                code = max(code, _holds(blocks))
            code = max(code, _holds(selection))
        _emit(result if not csv else report, csv, table="levels" if csv else None)
        return code

    _execute("decompose", body)


@app.command(name="dilate-check")
def dilate_check(
    strategy: InputFile,
    ideal: InputFile,
    witness: InputFile,
    convert: Annotated[bool, typer.Option(help="Also run the vNA round trip")] = False,
    csv: CsvFlag = False,
) -> None:
    """Residuals of a local-dilation witness between a strategy and an ideal one."""

    def body() -> int:
        S = parse_strategy(strategy.read_text())
        S_tilde = parse_strategy(ideal.read_text())
        w = parse_witness(witness.read_text())
        strong = strong_residual(S, S_tilde, w)
        result: dict = {"residuals": dilation_residuals(S, S_tilde, w), "strong": strong}
        code = _holds(strong)
        if convert:
            roundtrip = vna_roundtrip(S, S_tilde, w)
            result["roundtrip"] = roundtrip
            code = max(code, _holds(roundtrip))
        _emit(result, csv)
        return code

    _execute("dilate-check", body)


@app.command()
def suite(
    seed: Annotated[int | None, typer.Option(help="Defaults to SELFTEST_SEED")] = None,
    trials: Annotated[int | None, typer.Option(help="Defaults to SUITE_TRIALS")] = None,
    name: Annotated[list[str] | None, typer.Option("--suite", help="Run only these suites")] = None,
    slack: Annotated[float | None, typer.Option(help="Defaults to SUITE_SLACK")] = None,
    workers: Annotated[int | None, typer.Option(help="Defaults to SUITE_WORKERS")] = None,
    min_dim: Annotated[int, typer.Option()] = 2,
    max_dim: Annotated[int, typer.Option()] = 4,
    csv: CsvFlag = False,
) -> None:
    """Run the seeded property suites; exits 1 when any hard suite fails."""

    def body() -> int:
        config = SuiteConfig.from_settings(
            seed=seed,
            trials=trials,
            slack=slack,
            workers=workers,
            dims=(min_dim, max_dim),
            suites=tuple(name or ()),
        )
        summary = suite_runner.run(config)
        _emit(summary, csv, table="suites" if csv else None)
        return ExitCode.OK if summary.passed else ExitCode.VIOLATION

    _execute("suite", body)

import json
import logging
import sys

import pytest
from loguru import logger

from src.core.exceptions import ContractViolation, DimensionMismatch, SchemaError, SelfTestException
from src.core.logging_config import configure_logging
from src.core.run_context import get_run_id, run_scope


@pytest.fixture
def json_logs(capsys):
    configure_logging(level="DEBUG", json_output=True)
    yield lambda: [json.loads(line) for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    logger.remove()
    logger.add(sys.__stderr__, level="INFO")


class TestRunContext:
    def test_scope_sets_and_resets(self):
        assert get_run_id() is None
        with run_scope() as run_id:
            assert get_run_id() == run_id
        assert get_run_id() is None

    def test_explicit_id(self):
        with run_scope("fixed") as run_id:
            assert run_id == "fixed"

    def test_records_carry_run_fields(self, json_logs):
        with run_scope("r-1", command="analyze"):
            logger.info("inside", seed=3)
        (record,) = [r for r in json_logs() if r["message"] == "inside"]
        assert record["run_id"] == "r-1"
        assert record["command"] == "analyze"
        assert record["seed"] == 3
        assert record["level"] == "INFO"


class TestLogging:
    def test_stdlib_is_intercepted(self, json_logs):
        logging.getLogger("scipy").warning("from stdlib")
        assert any(r["message"] == "from stdlib" for r in json_logs())

    def test_exception_fields(self, json_logs):
        try:
            raise ContractViolation("bad")
        except ContractViolation:
            logger.opt(exception=True).error("failed")
        (record,) = [r for r in json_logs() if r["message"] == "failed"]
        assert record["exception"] == {"type": "ContractViolation", "value": "bad"}


class TestExceptions:
    def test_hierarchy(self):
        assert issubclass(DimensionMismatch, ContractViolation)
        assert issubclass(ContractViolation, ValueError)
        assert issubclass(SchemaError, SelfTestException)

    def test_schema_error_position(self):
        e = SchemaError("unexpected token", line=3, column=7)
        assert str(e) == "unexpected token (line 3, column 7)"
        assert str(SchemaError("missing field")) == "missing field"

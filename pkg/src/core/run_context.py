"""Run context management using contextvars.

A run is one CLI invocation or one suite execution. Its run_id is attached to
every log record emitted inside ``run_scope``; suite workers execute inside a
copy of the submitting context, so trials inherit it without parameter passing.
"""

import uuid
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Optional

from loguru import logger

run_id_var: ContextVar[Optional[str]] = ContextVar("run_id", default=None)


def get_run_id() -> Optional[str]:
    """Get the current run ID from context.

    Returns
    -------
    Optional[str]
        The current run ID, or None outside a run
    """
    return run_id_var.get()


def generate_run_id() -> str:
    """Generate a new unique run ID (UUID v4)."""
    return str(uuid.uuid4())


@contextmanager
def run_scope(run_id: str | None = None, **extra) -> Iterator[str]:
    """Open a run: set the run ID and bind it to loguru records.

    Parameters
    ----------
    run_id : str | None
        Explicit run ID; a fresh one is generated when None
    **extra
        Additional fields bound to every record in the scope (command, suite...)

    Yields
    ------
    str
        The active run ID
    """
    run_id = run_id or generate_run_id()
    token = run_id_var.set(run_id)
    try:
        with logger.contextualize(run_id=run_id, **extra):
            yield run_id
    finally:
        run_id_var.reset(token)

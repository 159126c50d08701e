"""Entry point of the ``selftest`` command."""

from src.cli.app import app
from src.core.logging_config import configure_logging


def main() -> None:
    # Configure logging FIRST (before any command reads settings)
    configure_logging()
    app()


if __name__ == "__main__":
    main()

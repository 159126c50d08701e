"""Command line: file formats and the Typer application."""

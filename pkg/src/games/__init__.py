"""Nonlocal games: distributions, predicates and game polynomials."""

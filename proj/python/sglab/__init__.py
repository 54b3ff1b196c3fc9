"""Python access to the sglab core: Monge-Ampere, transport, Euler and the run harness."""

from ._core import (
    assignment_cost,
    criterion_count,
    euler_run,
    ma_determinant,
    parse_config,
    poisson_solve,
    run,
    solve_ma,
    verify,
    w2_torus,
)

__all__ = [
    "assignment_cost",
    "criterion_count",
    "euler_run",
    "ma_determinant",
    "parse_config",
    "poisson_solve",
    "run",
    "solve_ma",
    "verify",
    "w2_torus",
]
__version__ = "0.1.0"

"""2D periodic homogenization toolkit."""

from ._core import (
    boundary_distance,
    cell_solve,
    cutoff,
    fit_rate,
    flux_identities,
    run_study,
    solve_homogenized,
)

__all__ = [
    "boundary_distance",
    "cell_solve",
    "cutoff",
    "fit_rate",
    "flux_identities",
    "run_study",
    "solve_homogenized",
]

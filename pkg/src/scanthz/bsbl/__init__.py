"""Block multiple-measurement-vector sparse Bayesian learning solver."""

from .solver import (
    ADD,
    DELETE,
    REESTIMATE,
    HyperParams,
    PosteriorState,
    SolveOptions,
    SolveReport,
    SqCache,
    StepOutcome,
    block_cost,
    candidate_gamma,
    delta_cost,
    dft_matrix,
    init_state,
    refresh_posterior,
    select_and_apply,
    solve_bmmv,
    solve_transform,
    total_cost,
)

__all__ = [
    "ADD",
    "DELETE",
    "REESTIMATE",
    "HyperParams",
    "PosteriorState",
    "SolveOptions",
    "SolveReport",
    "SqCache",
    "StepOutcome",
    "block_cost",
    "candidate_gamma",
    "delta_cost",
    "dft_matrix",
    "init_state",
    "refresh_posterior",
    "select_and_apply",
    "solve_bmmv",
    "solve_transform",
    "total_cost",
]

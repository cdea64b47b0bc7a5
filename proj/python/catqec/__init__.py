"""Cat-code error-correction simulator."""

import json as _json

from ._core import (
    CatqecError,
    __version__,
    basis_overlaps,
    bayes_records,
    cat_state,
    coherent_state,
    default_params,
    equal_lambda_schedule,
    evolve_master,
    fit_decay,
    gain,
    jump_count_pmf,
    loss_budget,
    optimize_cadence,
    params,
    postselect_accepts,
    process_matrix,
    safe_dim,
    solve_r,
    square_grid,
    step_fidelities,
    trajectory_jump_times,
    wigner,
)
from ._core import run_lifetime_sweep as _run_lifetime_sweep


def run_lifetime_sweep(config):
    """Run the lifetime sweep for a config dict (same keys as the config file).

    A seed is required. Returns the archive as a dict.
    """
    return _json.loads(_run_lifetime_sweep(dict(config)))


__all__ = [name for name in dir() if not name.startswith("_")]

# SPDX-License-Identifier: Apache-2.0
"""Robust distributed transceiver design for coordinated base stations."""

from ._core import (  # noqa: F401
    BracketFailure,
    ConfigError,
    InfeasibleUser,
    SingularMatrix,
    algorithm1,
    cell_edge_snr_db,
    convergence,
    dual_objective_p1,
    exp_correlation,
    fixture_p2,
    hermitian_inverse,
    lambda_update_p2,
    nu_update,
    p1_sweep,
    p2_sweep,
    pg_dual_p1,
    psd_sqrt,
    scalar_min,
    thermal_noise_power,
    verify,
)

__version__ = "0.1.0"

import logging

from largesol.conditions import (
    ConditionReport,
    check_A_rho,
    check_h_inv_subadditive,
    check_KO,
    compute_H_bar,
    compute_H_tilde,
    ko_envelopes,
)
from largesol.config import RunConfig, dump_config, parse_config
from largesol.exceptions import (
    ConfigurationError,
    DomainError,
    Infeasible,
    LargesolError,
    NonConvergence,
    NumericFailure,
    PreconditionRejected,
    SolverDefect,
    StructuralError,
)
from largesol.fd import FdSolution, fd_comparison_check, fd_solve
from largesol.nfunction import (
    Indices,
    PhiSpec,
    check_hypotheses,
    estimate_indices,
    eval_h,
    eval_h_inv,
    eval_Phi,
    eval_Phi_inv,
    xi_eta,
)
from largesol.problems import (
    CalF,
    NonlinearitySpec,
    WeightSpec,
    calF,
    calF_inv,
    envelope_lower,
    envelope_upper,
    eval_F,
    eval_G,
    weight_A,
)
from largesol.radial import (
    BlowupRadius,
    RadialProfile,
    SolverControls,
    blowup_radius,
    boundary_sweep_blowup,
    entire_sandwich,
    existence_threshold,
    solve_ball_dirichlet,
    solve_ivp,
    verify_sandwich,
)
from largesol.tables import Table, load_table

__version__ = "0.1.0"
__all__ = [
    "ConditionReport",
    "check_A_rho",
    "check_h_inv_subadditive",
    "check_KO",
    "compute_H_bar",
    "compute_H_tilde",
    "ko_envelopes",
    "RunConfig",
    "dump_config",
    "parse_config",
    "ConfigurationError",
    "DomainError",
    "Infeasible",
    "LargesolError",
    "NonConvergence",
    "NumericFailure",
    "PreconditionRejected",
    "SolverDefect",
    "StructuralError",
    "FdSolution",
    "fd_comparison_check",
    "fd_solve",
    "Indices",
    "PhiSpec",
    "check_hypotheses",
    "estimate_indices",
    "eval_h",
    "eval_h_inv",
    "eval_Phi",
    "eval_Phi_inv",
    "xi_eta",
    "CalF",
    "NonlinearitySpec",
    "WeightSpec",
    "calF",
    "calF_inv",
    "envelope_lower",
    "envelope_upper",
    "eval_F",
    "eval_G",
    "weight_A",
    "BlowupRadius",
    "RadialProfile",
    "SolverControls",
    "blowup_radius",
    "boundary_sweep_blowup",
    "entire_sandwich",
    "existence_threshold",
    "solve_ball_dirichlet",
    "solve_ivp",
    "verify_sandwich",
    "Table",
    "load_table",
]

logging.getLogger(__name__).addHandler(logging.NullHandler())

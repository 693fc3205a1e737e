"""Periodic stripe patterns of a nonlocal isoperimetric energy: exact energy
evaluation and the search for minimizers."""

from .kernels import (
    DomainError,
    ModelParams,
    QuadratureError,
    cbar_constant,
    cq_constant,
    jc_constant,
    kernel_value,
    marginal_kernel,
)
from .geometry import GridSetND, PeriodicSet1D, extrude, make_stripes, random_grid, random_set, sym_diff_measure
from .energy1d import EnergyReport, chessboard_margin, chessboard_rhs, f0, f_tau_1d, g1d, stripe_energy_inf
from .reflection import (
    ReflectionPair,
    chessboard_exp_margin,
    chessboard_margin_via_laplace,
    exp_interaction,
    laplace_identity_residual,
    reflect,
    rp_margin,
    stripe_energy_alpha,
)
from .energynd import f_tau, ftilde, scaling_transform
from .search import (
    find_hstar,
    hstar_closed_form,
    log_tau_grid,
    minimize_f0_free,
    minimize_f0_stripes,
    scaling_fit,
    tau_sweep,
)

__version__ = "0.1.0"

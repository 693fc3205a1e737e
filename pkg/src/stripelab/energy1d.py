"""One-dimensional energies built from the nonlocal term.

All evaluations go through the kinks of the difference profile.  For a
bracket ``b(z) = P|z| - omega(z)`` that vanishes near the origin, two
integrations by parts give

    int_R K^_tau(z) b(z) dz = 4 * sum_atoms w * Phi_tau(r + kL),

where ``Phi_tau`` is the excess moment of the kernel and the atoms are the
kinks of the self-overlap.  Summing the periodic images is a Hurwitz zeta
series, so the limit energy is exact up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import PeriodicSet1D
from .kernels import (
    DomainError,
    ModelParams,
    QuadratureError,
    cbar_constant,
    excess_moment,
    periodic_excess_sum,
)

EPS = np.finfo(float).eps


@dataclass
class EnergyReport:
    """Itemized energy; ``total = perimeter_term + nonlocal_term``.

    ``per_direction`` and ``cross_term`` are the directional and angle
    contributions; their sum never exceeds ``nonlocal_term`` and matches
    it for sets depending on one variable.
    """

    total: float
    perimeter_term: float
    nonlocal_term: float
    per_direction: list[float] = field(default_factory=list)
    cross_term: float = 0.0
    err_estimate: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def splitting_margin(self) -> float:
        return self.nonlocal_term - sum(self.per_direction) - self.cross_term

    def to_dict(self) -> dict:
        out = asdict(self)
        out["splitting_margin"] = self.splitting_margin
        return out


def g1d(pset: PeriodicSet1D, params: ModelParams, tol: float | None = None) -> float:
    """``int_R K^_tau(z) (per(E) |z| - omega(z)) dz``; zero for empty or full sets.

    The atom sum is exact up to rounding, so ``tol`` only guards the result:
    a rounding estimate above it raises :class:`QuadratureError`.
    """
    value, err = g1d_with_error(pset, params)
    if tol is not None and err > tol:
        raise QuadratureError("rounding estimate above tolerance", err)
    return value
    return g1d_with_error(pset, params)[0]


def g1d_with_error(pset: PeriodicSet1D, params: ModelParams) -> tuple[float, float]:
    if not pset.N:
        return 0.0, 0.0
    r, w = pset.kinks()
    terms = 4 * w * periodic_excess_sum(r, pset.L, params)
    value = math.fsum(terms)
    # rounding in the zeta values and the signed cancellation between atoms
    err = 64 * EPS * float(np.abs(terms).sum())
    return float(value), float(err)


def f0(pset: PeriodicSet1D, params: ModelParams) -> EnergyReport:
    """Limit energy ``(1/L)(-per(E) + G_0(E))``; ``params.tau`` is ignored."""
    p0 = params.with_tau(0.0)
    L = pset.L
    nonlocal_, err = g1d_with_error(pset, p0)
    perimeter = -pset.perimeter / L
    return EnergyReport(
        total=perimeter + nonlocal_ / L,
        perimeter_term=perimeter,
        nonlocal_term=nonlocal_ / L,
        per_direction=[nonlocal_ / L],
        err_estimate=err / L,
    )


def f_tau_1d(pset: PeriodicSet1D, params: ModelParams) -> EnergyReport:
    """``(1/L)(-per(E) + G_tau(E))``: the rescaled energy of a one-dimensional set."""
    L = pset.L
    nonlocal_, err = g1d_with_error(pset, params)
    perimeter = -pset.perimeter / L
    return EnergyReport(
        total=perimeter + nonlocal_ / L,
        perimeter_term=perimeter,
        nonlocal_term=nonlocal_ / L,
        per_direction=[nonlocal_ / L],
        err_estimate=err / L,
    )


def stripe_energy_inf(h, params: ModelParams):
    """``e_inf(h) = -1/h + Cbar_q h^-(q-1)``."""
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise DomainError("stripe width must be positive")
    out = -1.0 / h + cbar_constant(params) * h ** -(params.q - 1)
    return float(out) if out.ndim == 0 else out


def chessboard_rhs(pset: PeriodicSet1D, params: ModelParams) -> float:
    """``(1/2L) sum_x [h(x) e_inf(h(x)) + g(x) e_inf(g(x))]``."""
    if not pset.N:
        raise DomainError("chessboard bound needs at least one interval")
    _, _, h, g = pset.boundary()
    terms = h * stripe_energy_inf(h, params) + g * stripe_energy_inf(g, params)
    return math.fsum(terms) / (2 * pset.L)


def chessboard_margin(pset: PeriodicSet1D, params: ModelParams) -> float:
    return f0(pset, params).total - chessboard_rhs(pset, params)


def width_gap_bound(pset: PeriodicSet1D, params: ModelParams) -> float:
    """``sum_x Phi_tau(h(x)) + Phi_tau(g(x))``: a lower bound for ``G_tau(E)``.

    Integrating the pointwise bound ``omega <= sum_x eta(x, .)`` against the
    marginal kernel gives ``G_tau(E) >= sum_x Phi_tau(h(x)) + Phi_tau(g(x))``.
    At ``tau = 0`` the right side is ``C_q/((q-1)(q-2)) sum_x h^-beta + g^-beta``.
    """
    _, _, h, g = pset.boundary()
    return math.fsum(excess_moment(h, params)) + math.fsum(excess_moment(g, params))


def width_gap_comparison(pset: PeriodicSet1D, params: ModelParams) -> float:
    """Ratio of ``G_tau(E)`` to ``sum_x min(h^-beta, 1/tau) + min(g^-beta, 1/tau)``."""
    _, _, h, g = pset.boundary()
    beta = params.beta
    cap = math.inf if params.tau == 0 else 1.0 / params.tau
    denom = np.minimum(h**-beta, cap).sum() + np.minimum(g**-beta, cap).sum()
    return g1d(pset, params) / denom

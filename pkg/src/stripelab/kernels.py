"""Power-law kernels with a temperature floor and their marginals.

The kernel family is ``K_tau(zeta) = 1 / (|zeta|^p + tau^(p/beta))`` on R^d with
``beta = p - d - 1``.  Writing ``lam = tau^(1/beta)`` every quantity reduces to
the unit-floor kernel ``K_1`` through ``K_tau(zeta) = lam^-p K_1(zeta / lam)``,
which is what most routines below exploit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev
from scipy import integrate, special


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


class DomainError(ValueError):
    """Arguments outside the domain where a quantity is defined."""


@dataclass(frozen=True)
class ModelParams:
    """Model parameters. ``tau`` is the kernel floor in rescaled units; ``J`` is the interface weight."""

    d: int
    p: float
    tau: float = 0.0
    J: float | None = None
    L: float = 1.0

    def __post_init__(self) -> None:
        if int(self.d) != self.d or self.d < 2:
            raise DomainError(f"d must be an integer >= 2, got {self.d}")
        if not self.p > 2 * self.d:
            raise DomainError(f"p must exceed 2d = {2 * self.d}, got {self.p}")
        if not self.tau >= 0:
            raise DomainError(f"tau must be >= 0, got {self.tau}")
        if not self.L > 0:
            raise DomainError(f"L must be > 0, got {self.L}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def q(self) -> float:
        return self.p - self.d + 1

    @property
    def beta(self) -> float:
        return self.p - self.d - 1

    @property
    def floor(self) -> float:
        """``tau^(p/beta)``, evaluated in log space."""
        if self.tau == 0:
            return 0.0
        return math.exp(self.p / self.beta * math.log(self.tau))

    @property
    def length_scale(self) -> float:
        """``tau^(1/beta)``: the width below which the floor flattens the kernel."""
        if self.tau == 0:
            return 0.0
        return math.exp(math.log(self.tau) / self.beta)

    def with_tau(self, tau: float) -> "ModelParams":
        return ModelParams(self.d, self.p, tau, self.J, self.L)


def kernel_value(zeta, params: ModelParams) -> float:
    """``1 / (|zeta|^p + tau^(p/beta))``; ``inf`` at the origin when ``tau == 0``."""
    r = float(np.linalg.norm(np.atleast_1d(np.asarray(zeta, dtype=float))))
    denom = r**params.p + params.floor
    return math.inf if denom == 0 else 1.0 / denom


# --- angular factors ---------------------------------------------------------


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^(d-1) in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def abs_first_coordinate_mean(d: int) -> float:
    """``int_{S^(d-1)} |omega_1| d omega``."""
    return 2 * math.pi ** ((d - 1) / 2) / math.gamma((d + 1) / 2)


def _radial_power_integral(a: float, p: float, c: float) -> float:
    """``int_0^inf r^a / (r^p + c) dr`` for ``-1 < a < p - 1``, ``c > 0``."""
    s = (a + 1) / p
    return c ** (s - 1) * (math.pi / p) / math.sin(math.pi * s)


# --- closed-form constants ---------------------------------------------------


def cq_constant(params: ModelParams) -> float:
    """Prefactor of the marginal of the pure power law: ``K^_0(z) = C_q |z|^-q``."""
    d, p, q = params.d, params.p, params.q
    return math.exp(
        0.5 * (d - 1) * math.log(math.pi) + special.gammaln(q / 2) - special.gammaln(p / 2)
    )


def cbar_constant(params: ModelParams) -> float:
    """Coefficient of ``h^-(q-1)`` in the energy of periodic stripes of width h."""
    q = params.q
    if q <= 3:
        raise DomainError(f"series diverges for q <= 3 (q = {q})")
    zeta_sum = float(special.zeta(q - 2))
    cq = cq_constant(params)
    return 4 * cq * (1 - 2.0 ** -(q - 3)) / ((q - 2) * (q - 1)) * zeta_sum


def kernel_mass(params: ModelParams) -> float:
    """``int_{R^d} K_tau``; finite only for ``tau > 0``."""
    if params.tau == 0:
        return math.inf
    d, p = params.d, params.p
    return sphere_area(d) * _radial_power_integral(d - 1, p, params.floor)


def kernel_first_moment(params: ModelParams) -> float:
    """``int_{R^d} K_tau(zeta) |zeta_1| d zeta``; equals ``J_c`` at ``tau = 1``."""
    if params.tau == 0:
        return math.inf
    d, p = params.d, params.p
    return abs_first_coordinate_mean(d) * _radial_power_integral(d, p, params.floor)


def jc_constant(params: ModelParams) -> float:
    """Critical interfacial weight ``J_c = int K_1(zeta) |zeta_1| d zeta``."""
    return kernel_first_moment(params.with_tau(1.0))


# --- marginal kernel ---------------------------------------------------------


def _unit_marginal(w: float, d: int, p: float, tol: float) -> float:
    """``int_{R^(d-1)} K_1(w, xi) d xi`` by radial quadrature in ``|xi|``."""
    area = sphere_area(d - 1)
    f = lambda r: r ** (d - 2) / ((w * w + r * r) ** (p / 2) + 1.0)
    split = max(1.0, w)
    v1, e1 = integrate.quad(f, 0.0, split, epsabs=0.0, epsrel=tol * 0.1, limit=200)
    v2, e2 = integrate.quad(f, split, np.inf, epsabs=0.0, epsrel=tol * 0.1, limit=200)
    value, err = area * (v1 + v2), area * (e1 + e2)
    if not err <= tol * abs(value):
        raise QuadratureError("marginal kernel quadrature failed", err)
    return value


def marginal_kernel(z: float, params: ModelParams, tol: float = 1e-10) -> float:
    """``K^_tau(z) = int_{R^(d-1)} K_tau(z, xi) d xi``."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    z = abs(float(z))
    if params.tau == 0:
        return math.inf if z == 0 else cq_constant(params) * z**-params.q
    lam = params.length_scale
    return lam**-params.q * _unit_marginal(z / lam, params.d, params.p, tol)


def sandwich_ratios(params: ModelParams, z_grid, tau_grid, tol: float = 1e-10):
    """Ratios ``K^_tau(z) (|z|^q + tau^(q/beta))`` over a grid.

    Their min and max are empirical constants for the two-sided comparison
    of the marginal kernel with ``1 / (|z|^q + tau^(q/beta))``.
    """
    q, beta = params.q, params.beta
    out = np.empty((len(tau_grid), len(z_grid)))
    for i, tau in enumerate(tau_grid):
        pt = params.with_tau(tau)
        floor_q = math.exp(q / beta * math.log(tau)) if tau > 0 else 0.0
        for j, z in enumerate(z_grid):
            out[i, j] = marginal_kernel(z, pt, tol) * (abs(z) ** q + floor_q)
    return out


# --- excess moment -----------------------------------------------------------
#
# Phi_tau(z) = int_{R^d} (zeta_1 - z)_+ K_tau(zeta) d zeta is the second
# primitive of the marginal kernel vanishing at +inf.  Integrating a
# piecewise-linear bracket against K^_tau by parts twice leaves only values of
# Phi_tau at the kinks, so all one-dimensional energies are finite sums of it.


def _cap_moment(d: int, u: float, r: np.ndarray) -> np.ndarray:
    """``int_{S^(d-1)} (r omega_1 - u)_+ d omega`` for ``r >= u >= 0``."""
    r = np.asarray(r, dtype=float)
    c = np.clip(u / r, 0.0, 1.0)
    if d == 2:
        return 2 * (np.sqrt(np.maximum(r * r - u * u, 0.0)) - u * np.arccos(c))
    if d == 3:
        return math.pi * (r - u) ** 2 / r
    m = (d - 3) / 2
    area = sphere_area(d - 1)
    first = (1 - c * c) ** (m + 1) / (2 * (m + 1))
    zeroth = 0.5 * special.beta(0.5, m + 1) * special.betaincc(0.5, m + 1, c * c)
    return area * (r * first - u * zeroth)


class _UnitExcessMoment:
    """``Phi_1`` for fixed ``(d, p)``: Chebyshev fit on [0, U0], power series beyond."""

    U0 = 2.0
    DEGREE = 96
    TERMS = 14

    def __init__(self, d: int, p: float):
        self.d, self.p = d, p
        self.q = p - d + 1
        nodes_fit = chebyshev.Chebyshev.interpolate(
            lambda x: np.array([self.direct(v) for v in np.atleast_1d(x)]),
            self.DEGREE,
            domain=[0.0, self.U0],
        )
        self._cheb = nodes_fit
        # 1/(r^p + 1) = sum_m (-1)^m r^-(m+1)p for r > 1, so
        # Phi_1(u) = sum_m (-1)^m c_m u^(d+1-(m+1)p) with c_m independent of u.
        self.exponents = np.array(
            [d + 1 - (m + 1) * p for m in range(self.TERMS)], dtype=float
        )
        coeffs = []
        for m in range(self.TERMS):
            f = lambda s, m=m: s ** (d - 1 - (m + 1) * p) * _cap_moment(d, 1.0, s)
            v1, _ = integrate.quad(f, 1.0, 2.0, epsabs=0.0, epsrel=1e-13, limit=200)
            v2, _ = integrate.quad(f, 2.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
            coeffs.append((-1) ** m * (v1 + v2))
        self.coeffs = np.array(coeffs)

    def direct(self, u: float) -> float:
        d, p = self.d, self.p
        f = lambda r: r ** (d - 1) / (r**p + 1.0) * _cap_moment(d, u, r)
        v1, e1 = integrate.quad(f, u, u + 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
        v2, e2 = integrate.quad(f, u + 1.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
        if not e1 + e2 <= 1e-10 * (v1 + v2):
            raise QuadratureError("excess moment quadrature failed", e1 + e2)
        return v1 + v2

    def __call__(self, u) -> np.ndarray:
        u = np.abs(np.asarray(u, dtype=float))
        out = np.empty_like(u)
        near = u < self.U0
        out[near] = self._cheb(u[near])
        far = u[~near]
        out[~near] = np.sum(
            self.coeffs[:, None] * far[None, :] ** self.exponents[:, None], axis=0
        )
        return out


@lru_cache(maxsize=None)
def unit_excess_moment(d: int, p: float) -> _UnitExcessMoment:
    return _UnitExcessMoment(d, p)


def excess_moment(z, params: ModelParams) -> np.ndarray:
    """``Phi_tau(z) = int (zeta_1 - |z|)_+ K_tau(zeta) d zeta`` (vectorized in z).

    For ``tau = 0`` this is ``C_q |z|^(2-q) / ((q-1)(q-2))``.
    """
    z = np.abs(np.asarray(z, dtype=float))
    q = params.q
    if params.tau == 0:
        with np.errstate(divide="ignore"):
            return cq_constant(params) / ((q - 1) * (q - 2)) * z ** (2 - q)
    lam = params.length_scale
    return lam ** (2 - q) * unit_excess_moment(params.d, params.p)(z / lam)


def periodic_excess_sum(r, period: float, params: ModelParams) -> np.ndarray:
    """``sum_{k >= 0} Phi_tau(r + k * period)`` for offsets ``0 < r <= period``.

    Images beyond the Chebyshev window are summed in closed form with the
    Hurwitz zeta function, so no truncation error enters.
    """
    r = np.asarray(r, dtype=float)
    q = params.q
    if params.tau == 0:
        c0 = cq_constant(params) / ((q - 1) * (q - 2))
        return c0 * period ** (2 - q) * special.zeta(q - 2, r / period)
    lam = params.length_scale
    unit = unit_excess_moment(params.d, params.p)
    reach = unit.U0 * lam
    k0 = np.maximum(0, np.ceil((reach - r) / period)).astype(np.int64)
    total = np.zeros_like(r)
    kmax = int(k0.max()) if k0.size else 0
    for k in range(kmax):
        active = k < k0
        if not active.any():
            break
        z = r[active] + k * period
        total[active] += lam ** (2 - q) * unit(z / lam)
    start = k0 + r / period
    # lam^(2-q) * c_m * lam^(-e_m) * period^e_m * zeta(-e_m, start); lam exponent is m*p
    for m, (c, e) in enumerate(zip(unit.coeffs, unit.exponents)):
        scale = c * period**e
        if m:
            log_lam = math.log(lam) * m * params.p
            if log_lam < -700:
                break
            scale *= math.exp(log_lam)
        total += scale * special.zeta(-e, start)
    return total

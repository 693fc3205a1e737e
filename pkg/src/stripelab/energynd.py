"""Energies of d-dimensional pixel sets.

For a union of cubes of side ``a = L/n`` the difference function
``D(zeta) = int_{Q_L} |chi(x) - chi(x + zeta)| dx`` is exactly the
multilinear interpolant of its values at lattice offsets ``a k``, and
``D(a k) = a^d #{c : m_c != m_(c+k)}`` is a cyclic correlation of the mask.
The same holds for the three-point products entering the cross term.
Every kernel integral therefore reduces to a lattice sum
``sum_k D(a k) W(k)`` with hat-function weights

    W(k) = a^d int_[-1,1]^d K(a (k + u)) prod_i (1 - |u_i|) du,

which are computed once per (kernel, cell, lattice) and cached.  The sum
runs over a box of whole periods after subtracting the mean of ``D``; the
remainder decays fast because ``D - mean`` oscillates with zero average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .energy1d import EnergyReport, g1d, width_gap_bound
from .geometry import GridSetND
from .kernels import (
    DomainError,
    ModelParams,
    QuadratureError,
    jc_constant,
    kernel_first_moment,
    kernel_mass,
)

EPS = np.finfo(float).eps
DEFAULT_PERIODS = {2: 8, 3: 4}


# --- lattice data of a mask --------------------------------------------------


def _correlate(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``C[k] = sum_c x[c] y[c + k]`` (cyclic), rounded to integers."""
    fx, fy = np.fft.rfftn(x), np.fft.rfftn(y)
    return np.rint(np.fft.irfftn(np.conj(fx) * fy, s=x.shape, axes=tuple(range(x.ndim)))).astype(np.int64)


def difference_counts(mask: np.ndarray) -> np.ndarray:
    """``#{c : m_c != m_(c+k)}`` for every cyclic offset ``k``."""
    m = mask.astype(float)
    return 2 * (int(mask.sum()) - _correlate(m, m))


def directional_counts(mask: np.ndarray, axis: int) -> np.ndarray:
    """Counts of :func:`difference_counts` restricted to offsets along ``axis``,
    broadcast to the full offset lattice."""
    full = difference_counts(mask)
    index = [0] * mask.ndim
    index[axis] = slice(None)
    line = full[tuple(index)]
    shape = [1] * mask.ndim
    shape[axis] = -1
    return np.broadcast_to(line.reshape(shape), mask.shape)


def cross_counts(mask: np.ndarray, axis: int) -> np.ndarray:
    """``sum_c |m_c - m_(c + k_i e_i)| |m_c - m_(c + k_perp)|`` at every offset ``k``.

    For binary values the product equals ``m (1-m') (1-m'') + (1-m) m' m''``;
    for each shift along ``axis`` the sum over perpendicular shifts is a
    cyclic correlation evaluated on the hyperplane ``k_i = 0``.
    """
    m = mask.astype(float)
    mc = 1.0 - m
    n = mask.shape[axis]
    out = np.empty(mask.shape, dtype=np.int64)
    for s in range(n):
        shifted = np.roll(m, -s, axis=axis)
        a = _correlate(m * (1.0 - shifted), mc) + _correlate(mc * shifted, m)
        sel = [slice(None)] * mask.ndim
        sel[axis] = 0
        dst = [slice(None)] * mask.ndim
        dst[axis] = s
        out[tuple(dst)] = a[tuple(sel)]
    return out


# --- hat-function weights ----------------------------------------------------


def _graded_rule(order: int, levels: int, toward_zero: bool):
    """Gauss-Legendre on [0, 1], geometrically refined toward 0 (or 1)."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = [0.0] + [0.5 ** (levels - j) for j in range(levels)] + [1.0] if levels else [0.0, 1.0]
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes.append(lo + (hi - lo) * (x + 1) / 2)
        weights.append(w * (hi - lo) / 2)
    nodes, weights = np.concatenate(nodes), np.concatenate(weights)
    if not toward_zero:
        nodes = 1.0 - nodes
    return nodes, weights


def _axis_rule(k: int, order: int, levels: int):
    """Nodes ``u`` in [-1, 1] and weights including the hat ``1 - |u|``.

    The kernel peak sits at ``u = -k``; for ``k in {0, 1}`` the adjacent
    half-cells are graded toward it.
    """
    plain = _graded_rule(order, 0, True)
    near = _graded_rule(order, levels, True)
    # right half [0, 1]: peak at 0 when k == 0
    xr, wr = near if k == 0 else plain
    # left half [-1, 0]: peak at 0 (k == 0) or at -1 (k == 1)
    if k == 0:
        xl, wl = -near[0], near[1]
    elif k == 1:
        xl, wl = near[0] - 1.0, near[1]
    else:
        xl, wl = -plain[0], plain[1]
    u = np.concatenate([xl, xr])
    w = np.concatenate([wl, wr]) * (1 - np.abs(u))
    return u, w


def _unit_kernel(r2: np.ndarray, p: float) -> np.ndarray:
    return 1.0 / (r2 ** (p / 2) + 1.0)


@lru_cache(maxsize=32)
def hat_weights(d: int, p: float, lam: float, a: float, R: int, order: int) -> np.ndarray:
    """``W(k)`` for ``k in [0, R]^d`` and kernel ``lam^-p K_1(zeta / lam)``."""
    levels = max(0, math.ceil(math.log2(a / lam)) + 3) if lam < a else 2
    W = np.empty((R + 1,) * d)
    rules = [_axis_rule(k, order, levels) for k in range(R + 1)]
    small = [_axis_rule(k, max(4, order // 2), 0) for k in range(R + 1)]
    scale = a / lam
    for k in np.ndindex(*W.shape):
        near = max(k) <= 3
        use = rules if near else small
        coords = [(k[i] + use[k[i]][0]) * scale for i in range(d)]
        weights = [use[k[i]][1] for i in range(d)]
        r2 = coords[0][:, None] ** 2 + coords[1][None, :] ** 2
        w = weights[0][:, None] * weights[1][None, :]
        if d == 3:
            r2 = r2[:, :, None] + coords[2][None, None, :] ** 2
            w = w[:, :, None] * weights[2][None, None, :]
        W[k] = float(np.sum(w * _unit_kernel(r2, p)))
    return W * a**d * lam ** (-p)


def _fold_matrix(n: int, R: int) -> np.ndarray:
    """Map orthant index ``|j|`` to residue ``j mod n`` over ``j in [-R, R]``,
    with half weight on the faces ``|j| = R``."""
    F = np.zeros((n, R + 1))
    for j in range(-R, R + 1):
        F[j % n, abs(j)] += 0.5 if abs(j) == R else 1.0
    return F


@lru_cache(maxsize=32)
def folded_weights(d: int, p: float, lam: float, a: float, n: int, periods: int, order: int):
    """Hat weights summed over a symmetric box of ``periods`` whole periods per axis."""
    R = periods * n // 2
    W = hat_weights(d, p, lam, a, R, order)
    F = _fold_matrix(n, R)
    for axis in range(d):
        W = np.moveaxis(np.tensordot(F, W, axes=([1], [axis])), 0, axis)
    W.setflags(write=False)
    return W


@dataclass
class LatticeIntegrator:
    """``int K_tau(zeta) f(zeta) d zeta`` for periodic multilinear ``f`` on the lattice."""

    d: int
    params: ModelParams
    a: float
    n: int
    periods: int
    order: int = 10

    def __post_init__(self):
        if self.params.tau <= 0:
            raise DomainError("lattice integration needs a bounded kernel (tau > 0)")
        if self.periods < 2 or self.periods % 2:
            raise DomainError("periods must be an even integer >= 2")
        self.mass = kernel_mass(self.params)
        lam = self.params.length_scale
        key = (self.d, self.params.p, lam, self.a, self.n)
        self._W = folded_weights(*key, self.periods, self.order)
        self._W_half = folded_weights(*key, self.periods // 2, self.order)
        self._W_low = folded_weights(*key, self.periods, self.order - 4)

    def _sum(self, values: np.ndarray, W: np.ndarray) -> float:
        mean = float(values.mean())
        centered = values - mean
        return mean * self.mass + math.fsum((centered * W).ravel())

    def integrate(self, values: np.ndarray) -> tuple[float, float]:
        """Returns ``(integral, error estimate)``; ``values`` are lattice values."""
        values = np.asarray(values, dtype=float)
        full = self._sum(values, self._W)
        trunc = abs(full - self._sum(values, self._W_half))
        quad = abs(full - self._sum(values, self._W_low))
        roundoff = 16 * EPS * (abs(values.mean()) * self.mass + float(np.abs(values).max()) * self.mass)
        return full, trunc + quad + roundoff


# --- energies ----------------------------------------------------------------


def _decomposition(grid: GridSetND, params: ModelParams, periods: int | None):
    """Lattice integrals of the bracket, its directional parts and the cross term."""
    d, n, a, L = grid.d, grid.n, grid.cell, grid.L
    periods = periods or DEFAULT_PERIODS[d]
    integ = LatticeIntegrator(d, params, a, n, periods)
    vol = a**d
    D = difference_counts(grid.mask) * vol
    Di = [directional_counts(grid.mask, i) * vol for i in range(d)]
    Ti = [cross_counts(grid.mask, i) * vol for i in range(d)]
    moment = kernel_first_moment(params)
    P = [grid.per_axis(i) for i in range(d)]
    per = sum(P)

    kd, ed = integ.integrate(D)
    nonlocal_ = (moment * per - kd) / L**d
    G, errs = [], [ed]
    for i in range(d):
        ki, ei = integ.integrate(Di[i])
        G.append((moment * P[i] - ki) / L**d)
        errs.append(ei)
    kt, et = integ.integrate(sum(Ti))
    cross = 2 * kt / (d * L**d)
    errs.append(et)
    rounding = 16 * EPS * moment * per / L**d
    err = sum(errs) / L**d + rounding

    notes = []
    if params.length_scale < a:
        notes.append(
            f"kernel width {params.length_scale:.3g} below cell size {a:.3g}: "
            "weights use graded quadrature near the origin"
        )
    return per, nonlocal_, G, cross, err, notes


def f_tau(grid: GridSetND, params: ModelParams, tol: float = 1e-6, periods: int | None = None) -> EnergyReport:
    """Rescaled energy ``(1/L^d)(-per_1 + int K_tau [sum_i P_i |zeta_i| - D])``."""
    if params.tau <= 0:
        raise DomainError("f_tau needs tau > 0; the bracket integral diverges at tau = 0")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not grid.mask.any() or grid.mask.all():
        return EnergyReport(0.0, 0.0, 0.0, [0.0] * grid.d, 0.0, 0.0)
    per, nonlocal_, G, cross, err, notes = _decomposition(grid, params, periods)
    if err > tol:
        raise QuadratureError("lattice quadrature error above tolerance", err)
    perimeter = -per / grid.L**grid.d
    return EnergyReport(perimeter + nonlocal_, perimeter, nonlocal_, G, cross, err, notes)


def ftilde(grid: GridSetND, params: ModelParams, tol: float = 1e-6, periods: int | None = None) -> EnergyReport:
    """Original energy ``(1/L^d)(J per_1 - int K_1(zeta) D(zeta))``.

    Reported as ``(J - J_c) per_1 / L^d`` plus the nonnegative bracket
    integral, so ``per_direction`` and ``cross_term`` refer to the unit kernel.
    """
    if params.J is None:
        raise DomainError("ftilde needs params.J")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not grid.mask.any() or grid.mask.all():
        return EnergyReport(0.0, 0.0, 0.0, [0.0] * grid.d, 0.0, 0.0)
    unit = params.with_tau(1.0)
    per, nonlocal_, G, cross, err, notes = _decomposition(grid, unit, periods)
    if err > tol:
        raise QuadratureError("lattice quadrature error above tolerance", err)
    perimeter = (params.J - jc_constant(params)) * per / grid.L**grid.d
    return EnergyReport(perimeter + nonlocal_, perimeter, nonlocal_, G, cross, err, notes)


def directional_terms_by_slicing(grid: GridSetND, params: ModelParams) -> list[float]:
    """``G^i`` as the average of the one-dimensional energies of the lines along ``e_i``."""
    out = []
    for axis in range(grid.d):
        total = math.fsum(g1d(grid.slice(axis, index), params) for index, _ in grid.lines(axis))
        out.append(total * grid.cell ** (grid.d - 1) / grid.L**grid.d)
    return out


def directional_bound_margins(grid: GridSetND, params: ModelParams) -> list[float]:
    """Per direction, ``int K D_i`` subtracted from its width/gap upper bound.

    Line by line this is ``g1d(line) - sum_x [Phi(h) + Phi(g)]``, nonnegative
    by the pointwise bound ``omega <= sum_x eta(x, .)``.
    """
    out = []
    for axis in range(grid.d):
        terms = []
        for index, _ in grid.lines(axis):
            line = grid.slice(axis, index)
            if line.N:
                terms.append(g1d(line, params) - width_gap_bound(line, params))
        out.append(math.fsum(terms) * grid.cell ** (grid.d - 1) / grid.L**grid.d)
    return out


@dataclass(frozen=True)
class ScaledProblem:
    tau: float
    L: float
    grid: GridSetND
    factor: float


def scaling_transform(J: float, L: float, grid: GridSetND, params: ModelParams, direction: str = "forward"):
    """Map between the original problem at weight ``J`` and the rescaled one.

    ``forward``: ``tau = J_c - J``, ``L_hat = tau^(1/beta) L`` and
    ``ftilde_{J,L}(E) = tau^((p-d)/beta) f_{tau,L_hat}(E_hat)``.
    ``inverse`` takes ``J`` to be ``tau`` and ``L`` to be ``L_hat`` and
    returns the original period in ``L``, with ``tau`` replaced by ``J``.
    """
    jc = jc_constant(params)
    beta, p, d = params.beta, params.p, params.d
    if direction == "forward":
        tau = jc - J
        if not tau > 0:
            raise DomainError(f"forward map needs J < J_c = {jc}")
        L_hat = math.exp(math.log(tau) / beta) * L
        factor = math.exp((p - d) / beta * math.log(tau))
        return ScaledProblem(tau, L_hat, GridSetND(grid.d, L_hat, grid.n, grid.mask), factor)
    if direction == "inverse":
        tau = J
        if not tau > 0:
            raise DomainError("inverse map needs tau > 0")
        L_orig = L / math.exp(math.log(tau) / beta)
        factor = math.exp((p - d) / beta * math.log(tau))
        return ScaledProblem(jc - tau, L_orig, GridSetND(grid.d, L_orig, grid.n, grid.mask), factor)
    raise DomainError(f"direction must be 'forward' or 'inverse', got {direction!r}")

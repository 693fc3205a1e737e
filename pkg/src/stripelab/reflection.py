"""Exponential-kernel interactions and reflections across a cut.

Interval unions on a segment are ``(k, 2)`` arrays of sorted disjoint
``[a, b]`` rows.  Every double integral of ``exp(-alpha |x - y|)`` over a
product of intervals is evaluated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from .geometry import PeriodicSet1D
from .kernels import DomainError, ModelParams, QuadratureError, cq_constant
from .energy1d import f0


def as_union(intervals, lo: float, hi: float) -> np.ndarray:
    """Sort, clip to ``[lo, hi]`` and merge touching rows."""
    arr = np.asarray(intervals, dtype=float).reshape(-1, 2)
    arr = np.clip(arr, lo, hi)
    arr = arr[arr[:, 1] > arr[:, 0]]
    if not len(arr):
        return arr
    arr = arr[np.argsort(arr[:, 0])]
    merged = [arr[0].copy()]
    for a, b in arr[1:]:
        if a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append(np.array([a, b]))
    return np.array(merged)


def complement(union: np.ndarray, lo: float, hi: float) -> np.ndarray:
    edges = np.concatenate([[lo], union.ravel(), [hi]]).reshape(-1, 2)
    return edges[edges[:, 1] > edges[:, 0]]


def _separated_pairs(A: np.ndarray, B: np.ndarray, alpha: float) -> float:
    """``sum over I in A, J in B of int_I int_J exp(-alpha |x - y|)`` for disjoint unions."""
    if not len(A) or not len(B):
        return 0.0
    a, b = A[:, 0][:, None], A[:, 1][:, None]
    c, d = B[:, 0][None, :], B[:, 1][None, :]
    # I = [a, b] left of J = [c, d]:
    #   (e^{-alpha(c-b)} - e^{-alpha(c-a)} - e^{-alpha(d-b)} + e^{-alpha(d-a)}) / alpha^2
    left = np.exp(-alpha * (c - b)) - np.exp(-alpha * (c - a)) - np.exp(-alpha * (d - b)) + np.exp(-alpha * (d - a))
    right = np.exp(-alpha * (a - d)) - np.exp(-alpha * (a - c)) - np.exp(-alpha * (b - d)) + np.exp(-alpha * (b - c))
    vals = np.where(b <= c, left, right)
    return math.fsum(vals.ravel()) / alpha**2


def segment_interaction(union: np.ndarray, lo: float, hi: float, alpha: float) -> float:
    """``int_{[lo,hi]^2} |chi(x) - chi(y)| exp(-alpha |x - y|)``."""
    return 2 * _separated_pairs(union, complement(union, lo, hi), alpha)


@dataclass(frozen=True)
class ReflectionPair:
    """Sets ``E1`` in ``[0, L1]`` and ``E2`` in ``[L1, L]`` seen as one set on ``[0, L]``."""

    left: np.ndarray
    right: np.ndarray
    L1: float
    L: float
    alpha: float = 1.0

    def __post_init__(self):
        if not 0 < self.L1 < self.L:
            raise DomainError("need 0 < L1 < L")
        if not self.alpha > 0:
            raise DomainError("alpha must be positive")
        left = np.asarray(self.left, dtype=float).reshape(-1, 2)
        right = np.asarray(self.right, dtype=float).reshape(-1, 2)
        if len(left) and (left.min() < 0 or left.max() > self.L1):
            raise DomainError("left set must lie in [0, L1]")
        if len(right) and (right.min() < self.L1 or right.max() > self.L):
            raise DomainError("right set must lie in [L1, L]")
        object.__setattr__(self, "left", as_union(left, 0.0, self.L1))
        object.__setattr__(self, "right", as_union(right, self.L1, self.L))

    @property
    def union(self) -> np.ndarray:
        return as_union(np.vstack([self.left, self.right]), 0.0, self.L)


def exp_interaction(pair: ReflectionPair) -> float:
    """``J(E1, E2) = -int_{[0,L]^2} |chi - chi| exp(-alpha |x - y|)``."""
    return -segment_interaction(pair.union, 0.0, pair.L, pair.alpha)


def reflect(pair: ReflectionPair, side: str) -> tuple[np.ndarray, float, float]:
    """Reflect-and-complement one half across ``L1``.

    ``side="left"`` gives ``(E1, theta E1)`` on ``[0, 2 L1]``; ``side="right"``
    gives ``(theta E2, E2)`` on ``[L1 - L2, L]``.  Returns ``(union, lo, hi)``.
    """
    L1, L = pair.L1, pair.L
    if side == "left":
        mirrored = 2 * L1 - complement(pair.left, 0.0, L1)[:, ::-1]
        return as_union(np.vstack([pair.left, mirrored]), 0.0, 2 * L1), 0.0, 2 * L1
    if side == "right":
        L2 = L - L1
        mirrored = 2 * L1 - complement(pair.right, L1, L)[:, ::-1]
        return as_union(np.vstack([mirrored, pair.right]), L1 - L2, L), L1 - L2, L
    raise DomainError(f"side must be 'left' or 'right', got {side!r}")


def rp_margin(pair: ReflectionPair) -> float:
    """``J(E1, E2) - (J(E1, theta E1) + J(theta E2, E2)) / 2``."""
    a = pair.alpha
    both = exp_interaction(pair)
    lu, llo, lhi = reflect(pair, "left")
    ru, rlo, rhi = reflect(pair, "right")
    mirrored = -segment_interaction(lu, llo, lhi, a) - segment_interaction(ru, rlo, rhi, a)
    return both - 0.5 * mirrored


def _exp_weight(union: np.ndarray, anchor: float, alpha: float, sign: int) -> float:
    """``int_union exp(sign * alpha * (x - anchor))`` with every exponent <= 0."""
    if not len(union):
        return 0.0
    x0, x1 = union[:, 0] - anchor, union[:, 1] - anchor
    if sign > 0:
        return math.fsum(np.exp(alpha * x1) - np.exp(alpha * x0)) / alpha
    return math.fsum(np.exp(-alpha * x0) - np.exp(-alpha * x1)) / alpha


def square_completion(pair: ReflectionPair) -> float:
    """The reflection-positivity margin written as a sum of two squares."""
    a, L1, L = pair.alpha, pair.L1, pair.L
    e1 = _exp_weight(pair.left, L1, a, +1)
    e1c = _exp_weight(complement(pair.left, 0.0, L1), L1, a, +1)
    e2 = _exp_weight(pair.right, L1, a, -1)
    e2c = _exp_weight(complement(pair.right, L1, L), L1, a, -1)
    return (e1 - e2c) ** 2 + (e1c - e2) ** 2


# --- periodic sets -----------------------------------------------------------


def _geometric_images(r: np.ndarray, L: float, alpha: float) -> np.ndarray:
    """``sum_{k >= 0} exp(-alpha (r + k L))``."""
    return np.exp(-alpha * r) / -np.expm1(-alpha * L)


def periodic_exp_interaction(pset: PeriodicSet1D, alpha: float) -> float:
    """``int_{[0,L] x R} |chi_E(x) - chi_E(y)| exp(-alpha |x - y|)``, exact."""
    if not pset.N:
        return 0.0
    return 2 * pset.perimeter / alpha**2 - exp_bracket(pset, alpha)


def exp_bracket(pset: PeriodicSet1D, alpha: float) -> float:
    """``int_R exp(-alpha |z|) (per(E) |z| - omega(z)) dz >= 0``."""
    if not pset.N:
        return 0.0
    r, w = pset.kinks()
    return 4 * math.fsum(w * _geometric_images(r, pset.L, alpha)) / alpha**2


def free_exp_interaction(pset: PeriodicSet1D, alpha: float, periods: int) -> float:
    """``(1/k) int_{[0,kL]^2} |chi - chi| exp(-alpha |x - y|)`` for k = ``periods``."""
    L = pset.L
    if not pset.N:
        return 0.0
    base = pset.intervals
    copies = np.vstack([base + j * L for j in range(-1, periods + 1)])
    union = as_union(copies, 0.0, periods * L)
    return segment_interaction(union, 0.0, periods * L, alpha) / periods


def free_boundary_limit(pset: PeriodicSet1D, alpha: float, tol: float = 1e-8, max_periods: int = 1024):
    """Limit ``k -> inf`` of :func:`free_exp_interaction` by period doubling.

    The free-boundary value is ``X - B / k`` plus exponentially small terms,
    so ``2 f(2k) - f(k)`` removes the boundary term; doubling stops when
    successive extrapolants agree to ``tol``.
    """
    k = 1
    prev = free_exp_interaction(pset, alpha, k)
    extrap_prev = None
    while k < max_periods:
        cur = free_exp_interaction(pset, alpha, 2 * k)
        extrap = 2 * cur - prev
        if extrap_prev is not None and abs(extrap - extrap_prev) < tol:
            return extrap
        extrap_prev, prev, k = extrap, cur, 2 * k
    raise QuadratureError("free-boundary limit did not settle", abs(extrap - extrap_prev))


def stripe_energy_alpha(h, alpha: float, tol: float | None = None):
    """``e_{alpha,inf}(h)``: exponential-kernel energy per length of stripes of width h.

    The image series is summed in closed form, so ``tol`` is accepted for
    interface symmetry and never limits accuracy.

    Summing the rectangle integrals against the periodic images of the
    complement gives the geometric series
    ``int_0^h int_{E_h^c} = 2 (1 - e^{-alpha h}) / (alpha^2 (1 + e^{-alpha h}))``.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0) or not alpha > 0:
        raise DomainError("h and alpha must be positive")
    decay = np.exp(-alpha * h)
    one_side = -np.expm1(-alpha * h) / (alpha**2 * (1 + decay))
    out = -(4 * one_side) / (2 * h)
    return float(out) if out.ndim == 0 else out


def chessboard_exp_rhs(pset: PeriodicSet1D, alpha: float) -> float:
    _, _, h, g = pset.boundary()
    return 0.5 * math.fsum(h * stripe_energy_alpha(h, alpha) + g * stripe_energy_alpha(g, alpha))


def chessboard_exp_margin(pset: PeriodicSet1D, alpha: float) -> float:
    """``-X_alpha(E) - (1/2) sum_x [h e_alpha(h) + g e_alpha(g)]``.

    With ``h e_alpha(h) = -2 tanh(alpha h / 2) / alpha^2`` and one boundary
    point per unit of perimeter, the margin equals
    ``bracket - alpha^-2 sum_x [(1 - tanh(alpha h/2)) + (1 - tanh(alpha g/2))]``,
    which avoids subtracting two terms of size ``2 per / alpha^2``.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    if not pset.N:
        return 0.0
    _, _, h, g = pset.boundary()
    # 1 - tanh(u) = 2 e^{-2u} / (1 + e^{-2u})
    one_minus = lambda w: 2 * np.exp(-alpha * w) / (1 + np.exp(-alpha * w))
    deficit = math.fsum(np.concatenate([one_minus(h), one_minus(g)])) / alpha**2
    return exp_bracket(pset, alpha) - deficit


# --- Laplace representation of the limit energy ------------------------------


def _std_exponential(alpha):
    return np.exp(-alpha)


def laplace_weight(alpha, params: ModelParams):
    """``C_q alpha^(q-1) / Gamma(q)``."""
    q = params.q
    return cq_constant(params) * np.exp((q - 1) * np.log(alpha) - special.gammaln(q))


def laplace_energy(
    pset: PeriodicSet1D,
    params: ModelParams,
    rho: Callable | None = None,
    tol: float = 1e-9,
) -> tuple[float, float]:
    """The limit energy as an alpha-integral of exponential-kernel energies.

    The integrand ``rho_hat(alpha) per - w(alpha) X_alpha`` is evaluated as
    ``-rho per + w(alpha) (2 per / alpha^2 - X_alpha)``, algebraically equal
    but free of the cancellation between two terms growing like ``alpha^(q-3)``.
    Returns ``(value, error estimate)``.
    """
    rho = rho or _std_exponential
    L = pset.L
    if not pset.N:
        return 0.0, 0.0
    _, _, h, g = pset.boundary()
    scale = 1.0 / min(h.min(), g.min())
    per = pset.perimeter

    def integrand(a):
        if a == 0:
            return -rho(0.0) * per / L
        return (-rho(a) * per + laplace_weight(a, params) * exp_bracket(pset, a)) / L

    cuts = [0.0, scale, 10 * scale, 100 * scale, 1000 * scale]
    total, err = 0.0, 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        v, e = integrate.quad(integrand, lo, hi, epsabs=tol * 1e-2, epsrel=1e-12, limit=400)
        total, err = total + v, err + e
    v, e = integrate.quad(integrand, cuts[-1], np.inf, epsabs=tol * 1e-2, limit=400)
    total, err = total + v, err + e
    if err > tol:
        raise QuadratureError("alpha integral did not converge", err)
    return total, err


def laplace_identity_residual(
    pset: PeriodicSet1D,
    params: ModelParams,
    rho: Callable | None = None,
    tol: float = 1e-6,
) -> float:
    """``|F_0(E) - laplace_energy(E)|``."""
    if params.tau != 0:
        raise DomainError("the Laplace identity is stated for tau = 0")
    direct = f0(pset, params).total if pset.N else 0.0
    value, _ = laplace_energy(pset, params, rho, tol=tol * 1e-2)
    return abs(direct - value)


def chessboard_margin_via_laplace(pset: PeriodicSet1D, params: ModelParams, tol: float = 1e-9):
    """``int w(alpha) chessboard_exp_margin(E, alpha) d alpha / L``.

    Equals the limit-energy chessboard margin ``F_0(E) - chessboard_rhs(E)``.
    """
    _, _, h, g = pset.boundary()
    scale = 1.0 / min(h.min(), g.min())
    f = lambda a: laplace_weight(a, params) * chessboard_exp_margin(pset, a) / pset.L if a > 0 else 0.0
    cuts = [0.0, scale, 10 * scale, 100 * scale, 1000 * scale, np.inf]
    total, err = 0.0, 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        v, e = integrate.quad(f, lo, hi, epsabs=tol * 1e-2, epsrel=1e-12, limit=400)
        total, err = total + v, err + e
    return total, err

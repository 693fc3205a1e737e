"""Optimal stripe widths and minimizers, at the limit and along tau sweeps."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import astuple, dataclass, field, fields
from typing import Callable, Sequence

import numpy as np

from .energy1d import f0, f_tau_1d, g1d, stripe_energy_inf
from .geometry import PeriodicSet1D, align, make_stripes, sym_diff_measure
from .kernels import DomainError, ModelParams, cbar_constant

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_section(
    f: Callable[[float], float] | None,
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    less: Callable[[float, float], bool] | None = None,
    max_iter: int = 500,
) -> float:
    """Minimizer of a unimodal function on ``[lo, hi]``.

    ``less(x, y)`` decides whether the function is smaller at ``x`` than at
    ``y``.  Supplying it lets callers compare through an exactly factored
    difference when the values themselves tie in floating point.
    """
    if less is None:
        if f is None:
            raise DomainError("need f or less")
        less = lambda x, y: f(x) < f(y)
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    for _ in range(max_iter):
        if abs(b - a) <= xtol * max(1.0, abs(a) + abs(b)):
            break
        if less(c, d):
            b, d = d, c
            c = b - INV_PHI * (b - a)
        else:
            a, c = c, d
            d = a + INV_PHI * (b - a)
    return 0.5 * (a + b)


def _stripe_energy_less(params: ModelParams):
    """``e_inf(x) < e_inf(y)`` through ``e(x) - e(y) = (x - y)(1/(xy) + Cbar dd)``
    where ``dd`` is the divided difference of ``h^-(q-1)``, computed without cancellation."""
    cbar, s = cbar_constant(params), params.q - 1

    def less(x: float, y: float) -> bool:
        if x == y:
            return False
        rel = (x - y) / y
        dd = y**-s * math.expm1(-s * math.log1p(rel)) / (x - y)
        return (x - y) * (1.0 / (x * y) + cbar * dd) < 0

    return less


def hstar_closed_form(params: ModelParams) -> float:
    """Stationary point of ``e_inf``: ``((q-1) Cbar_q)^(1/(q-2))``."""
    q = params.q
    return ((q - 1) * cbar_constant(params)) ** (1 / (q - 2))


def find_hstar(params: ModelParams, agreement: float = 1e-8) -> tuple[float, float]:
    """Minimizer and minimum of ``e_inf`` by golden section, checked against the closed form."""
    q = params.q
    if q <= 3:
        raise DomainError(f"stripe energy has no minimizer for q <= 3 (q = {q})")
    # e_inf(h) = (Cbar h^-(q-2) - 1)/h is positive below Cbar^(1/(q-2)) and
    # tends to 0 from below at infinity, so the minimizer lies in between
    root = cbar_constant(params) ** (1 / (q - 2))
    lo, hi = root, root * 64
    if not stripe_energy_inf(2 * root, params) < 0:
        raise DomainError("failed to bracket the minimizer")
    h = golden_section(None, lo, hi, less=_stripe_energy_less(params))
    closed = hstar_closed_form(params)
    if abs(h - closed) > agreement * closed:
        raise DomainError(f"golden section {h} disagrees with stationarity {closed}")
    return h, stripe_energy_inf(h, params)


def minimize_f0_stripes(L: float, params: ModelParams) -> tuple[int, float, float]:
    """Best periodic stripes in period ``L``: ``(N, h = L/(2N), e_inf(h))``."""
    if not L > 0:
        raise DomainError("L must be positive")
    hs = hstar_closed_form(params)
    ratio = L / (2 * hs)
    cands = sorted({max(1, math.floor(ratio)), max(1, math.ceil(ratio))})
    cbar, q = cbar_constant(params), params.q
    # per unit length, -x + Cbar L^-(q-2) x^(q-1) at x = 2N, divided by L
    scores = [(-2 * n + cbar * L ** -(q - 2) * (2 * n) ** (q - 1), n) for n in cands]
    _, N = min(scores)
    h = L / (2 * N)
    return N, h, stripe_energy_inf(h, params)


# --- free endpoint descent ---------------------------------------------------


@dataclass
class FreeResult:
    set: PeriodicSet1D
    energy: float
    converged: bool
    history: list[float] = field(default_factory=list)


def _endpoints(pset: PeriodicSet1D) -> np.ndarray:
    return pset.intervals.ravel().copy()


def _feasible(x: np.ndarray, L: float, gap: float) -> bool:
    return bool(np.all(np.diff(np.append(x, x[0] + L)) >= gap))


def minimize_free(
    initial: PeriodicSet1D,
    energy: Callable[[PeriodicSet1D], float],
    steps: int = 20000,
    step0: float | None = None,
    xtol: float = 1e-10,
    min_gap: float | None = None,
) -> FreeResult:
    """Coordinate descent over the 2N endpoints with an adaptive step.

    A move is accepted only if it lowers the energy and keeps every width and
    gap above ``min_gap``; when no coordinate improves, the step is halved.
    """
    L, N = initial.L, initial.N
    if not N:
        raise DomainError("descent needs at least one interval")
    x = _endpoints(initial)
    spacing = np.diff(np.append(x, x[0] + L))
    if min_gap is None:
        min_gap = spacing.min() / 10
    step = step0 or spacing.min() / 4
    build = lambda y: PeriodicSet1D(L, y.reshape(-1, 2))
    best = energy(build(x))
    history = [best]
    evals = 0
    while step > xtol * L:
        improved = False
        for i in range(2 * N):
            for sign in (1.0, -1.0):
                trial = x.copy()
                trial[i] += sign * step
                if not _feasible(trial, L, min_gap):
                    continue
                val = energy(build(trial))
                evals += 1
                if val < best:
                    x, best = trial, val
                    history.append(best)
                    improved = True
                    break
            if evals >= steps:
                return FreeResult(build(x), best, False, history)
        if not improved:
            step /= 2
        else:
            step *= 1.5
    return FreeResult(build(x), best, True, history)


def minimize_f0_free(initial: PeriodicSet1D, params: ModelParams, steps: int = 20000) -> FreeResult:
    """Local minimization of the limit energy with the number of intervals fixed."""
    return minimize_free(initial, lambda s: f0(s, params).total, steps)


# --- tau sweeps --------------------------------------------------------------


@dataclass
class SweepRecord:
    tau: float
    N: int
    h: float
    energy: float
    err_estimate: float
    symdiff_to_limit: float
    wall_ms: float


CSV_COLUMNS = [f.name for f in fields(SweepRecord)]


def log_tau_grid(start: float, stop: float, per_decade: int = 8) -> np.ndarray:
    """Log-spaced decreasing grid from ``start`` down to ``stop``, both included."""
    if not (start > 0 and stop > 0):
        raise DomainError("tau values must be positive")
    decades = abs(math.log10(start / stop))
    count = max(2, int(round(decades * per_decade)) + 1)
    grid = np.geomspace(start, stop, count)
    return np.sort(grid)[::-1]


def _stripe_energy_tau(N: int, L: float, params: ModelParams) -> tuple[float, float]:
    """``(1/L)(-2N + g1d(E_{L/2N}, tau))`` computed on one period ``L/N``."""
    h = L / (2 * N)
    unit = make_stripes(h)
    report = f_tau_1d(unit, params)
    return report.total, report.err_estimate


def best_stripes_tau(L: float, params: ModelParams, n_max: int | None = None) -> tuple[int, float, float]:
    """Best stripe count for the rescaled energy at ``params.tau``; ``(N, energy, err)``."""
    if n_max is None:
        n_max = max(4, math.ceil(2 * L / hstar_closed_form(params)))
    best = None
    for N in range(1, n_max + 1):
        e, err = _stripe_energy_tau(N, L, params)
        if best is None or e < best[1]:
            best = (N, e, err)
    return best


def tau_sweep(
    L: float,
    params: ModelParams,
    tau_grid: Sequence[float],
    free: bool = False,
    steps: int = 4000,
) -> list[SweepRecord]:
    """Minimize the rescaled stripe energy at each ``tau`` and compare with ``tau = 0``.

    With ``free=True`` the best stripes are further relaxed by endpoint
    descent on the rescaled energy.
    """
    taus = [float(t) for t in tau_grid]
    if any(t <= 0 for t in taus):
        raise DomainError("tau values must be positive")
    if any(b > a for a, b in zip(taus, taus[1:])):
        raise DomainError("tau grid must be decreasing")
    N0, h0, _ = minimize_f0_stripes(L, params)
    limit = make_stripes(h0, L)
    out = []
    for tau in taus:
        t0 = time.perf_counter()
        p_tau = params.with_tau(tau)
        N, energy, err = best_stripes_tau(L, p_tau)
        h = L / (2 * N)
        found = make_stripes(h, L)
        if free:
            res = minimize_free(found, lambda s: f_tau_1d(s, p_tau).total, steps)
            if res.energy < energy:
                found, energy = res.set, res.energy
        symdiff = sym_diff_measure(limit, align(limit, found))
        wall = (time.perf_counter() - t0) * 1e3
        out.append(SweepRecord(tau, N, h, energy, err, symdiff, wall))
    return out


def write_sweep_csv(records: Sequence[SweepRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in astuple(r)])


def monotone_g1d(pset: PeriodicSet1D, params: ModelParams, tau_grid: Sequence[float]) -> np.ndarray:
    """``g1d`` along a decreasing tau grid, ending with ``tau = 0``."""
    vals = [g1d(pset, params.with_tau(float(t))) for t in tau_grid]
    vals.append(g1d(pset, params.with_tau(0.0)))
    return np.array(vals)


# --- scaling in the original variables ---------------------------------------


def original_stripe_energy(h: float, tau: float, params: ModelParams) -> float:
    """``ftilde`` of stripes of width ``h`` at ``J = J_c - tau``: ``-tau/h + g1d(E_h, 1)/(2h)``."""
    unit = params.with_tau(1.0)
    return -tau / h + g1d(make_stripes(h), unit) / (2 * h)


def original_min_energy(tau: float, params: ModelParams) -> tuple[float, float]:
    """``(h_opt, min_h ftilde(E_h))`` for ``J = J_c - tau``."""
    hs = hstar_closed_form(params)
    guess = hs * tau ** (-1 / params.beta)
    f = lambda h: original_stripe_energy(h, tau, params)
    h = golden_section(f, 0.1 * guess, 10 * guess, xtol=1e-9)
    return h, f(h)


@dataclass
class ScalingFit:
    taus: np.ndarray
    energies: np.ndarray
    widths: np.ndarray
    slope: float
    intercept: float


def scaling_fit(params: ModelParams, tau_grid: Sequence[float]) -> ScalingFit:
    """Fit ``log(-E_min)`` against ``log tau``; the expected slope is ``(p-d)/(p-d-1)``."""
    taus = np.asarray(tau_grid, dtype=float)
    res = [original_min_energy(float(t), params) for t in taus]
    widths = np.array([r[0] for r in res])
    energies = np.array([r[1] for r in res])
    if np.any(energies >= 0):
        raise DomainError("minimal stripe energy is not negative")
    slope, intercept = np.polyfit(np.log(taus), np.log(-energies), 1)
    return ScalingFit(taus, energies, widths, float(slope), float(intercept))

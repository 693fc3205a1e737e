import csv
import math

import numpy as np
import pytest

from stripelab.energy1d import f0, f_tau_1d, g1d, stripe_energy_inf
from stripelab.geometry import PeriodicSet1D, make_stripes, random_set
from stripelab.kernels import DomainError, ModelParams, cbar_constant
from stripelab.search import (
    CSV_COLUMNS,
    best_stripes_tau,
    find_hstar,
    golden_section,
    hstar_closed_form,
    log_tau_grid,
    minimize_f0_free,
    minimize_f0_stripes,
    minimize_free,
    monotone_g1d,
    scaling_fit,
    tau_sweep,
    write_sweep_csv,
)


def test_golden_section_quadratic():
    x = golden_section(lambda t: (t - 0.3) ** 2, -2.0, 5.0)
    assert x == pytest.approx(0.3, abs=1e-9)
    x = golden_section(None, 0.0, 4.0, less=lambda a, b: abs(a - math.pi) < abs(b - math.pi))
    assert x == pytest.approx(math.pi, rel=1e-12)
    # boundary minimizer
    assert golden_section(lambda t: t, 1.0, 2.0) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("d,p", [(2, 5), (2, 6), (3, 7), (2, 6.5)])
def test_find_hstar(d, p):
    pr = ModelParams(d, p)
    h, e = find_hstar(pr)
    q = pr.q
    assert h == pytest.approx(hstar_closed_form(pr), rel=1e-8)
    assert e == pytest.approx(-(q - 2) / ((q - 1) * h), rel=1e-8)
    # stationarity by central differences
    dh = 1e-4 * h
    slope = (stripe_energy_inf(h + dh, pr) - stripe_energy_inf(h - dh, pr)) / (2 * dh)
    assert abs(slope) < 1e-6


def test_hstar_two_five_value():
    assert hstar_closed_form(ModelParams(2, 5)) == pytest.approx(math.pi * math.sqrt(2) / 3, rel=1e-14)


def test_hstar_two_six_closed_form():
    # q = 5: Cbar = 4 C_5 (3/4) zeta(3) / 12
    pr = ModelParams(2, 6)
    assert hstar_closed_form(pr) == pytest.approx((4 * cbar_constant(pr)) ** (1 / 3), rel=1e-14)


def test_minimize_stripes_commensurate(p25):
    hs = hstar_closed_form(p25)
    N, h, e = minimize_f0_stripes(10 * hs, p25)
    assert N == 5 and h == pytest.approx(hs, rel=1e-14)
    assert e == pytest.approx(find_hstar(p25)[1], rel=1e-12)


def test_minimize_stripes_small_period(p25):
    N, h, _ = minimize_f0_stripes(0.3, p25)
    assert N == 1 and h == 0.15
    with pytest.raises(DomainError):
        minimize_f0_stripes(0.0, p25)


@pytest.mark.parametrize("factor", [20.0, 50.0, 100.0, 7.3, 31.7])
def test_minimize_stripes_exhaustive(factor, p25):
    hs = hstar_closed_form(p25)
    L = factor * hs
    N, h, e = minimize_f0_stripes(L, p25)
    assert abs(h - hs) <= 4 * hs**2 / L
    for n in range(1, 51):
        assert e <= stripe_energy_inf(L / (2 * n), p25) + 1e-15
    assert f0(make_stripes(h, L), p25).total == pytest.approx(e, rel=1e-12)


def test_free_descent_keeps_optimal_stripes(p25):
    hs = hstar_closed_form(p25)
    res = minimize_f0_free(make_stripes(hs, 6 * hs), p25, steps=2000)
    assert res.energy == pytest.approx(find_hstar(p25)[1], rel=1e-10)
    np.testing.assert_allclose(res.set.widths, hs, rtol=1e-6)


def test_free_descent_converges_to_stripes(p25):
    hs = hstar_closed_form(p25)
    L = 6 * hs
    start = PeriodicSet1D(L, np.array([[0.0, 0.7], [1.5, 3.4], [4.5, 5.8]]) * hs)
    res = minimize_f0_free(start, p25, steps=20000)
    assert res.converged
    assert np.all(np.diff(res.history) < 0)
    np.testing.assert_allclose(res.set.widths, hs, rtol=1e-4)
    np.testing.assert_allclose(res.set.gaps, hs, rtol=1e-4)
    assert res.energy == pytest.approx(find_hstar(p25)[1], rel=1e-8)


def test_free_descent_budget(p25):
    start = PeriodicSet1D(6.0, [[0.0, 0.5], [2.0, 4.0]])
    res = minimize_f0_free(start, p25, steps=5)
    assert not res.converged
    assert res.energy <= f0(start, p25).total
    with pytest.raises(DomainError):
        minimize_free(PeriodicSet1D.empty(2.0), lambda s: 0.0)


def test_log_tau_grid():
    g = log_tau_grid(1e-1, 1e-3, 4)
    assert len(g) == 9 and g[0] == pytest.approx(1e-1) and g[-1] == pytest.approx(1e-3)
    assert np.all(np.diff(g) < 0)
    with pytest.raises(DomainError):
        log_tau_grid(0.0, 1e-3)


def test_best_stripes_tau_matches_direct(p25):
    pr = p25.with_tau(0.2)
    L = 8.0
    N, e, err = best_stripes_tau(L, pr, n_max=6)
    direct = [f_tau_1d(make_stripes(L / (2 * n), L), pr).total for n in range(1, 7)]
    assert N == int(np.argmin(direct)) + 1
    assert e == pytest.approx(min(direct), rel=1e-10)


def test_tau_sweep_approaches_limit(p25, tmp_path):
    # at this period the minimizer moves from four stripes to the limit's three
    L = 6.95 * hstar_closed_form(p25)
    records = tau_sweep(L, p25, log_tau_grid(1.0, 1e-3, 2))
    assert records[0].N == 4
    assert records[-1].N == minimize_f0_stripes(L, p25)[0] == 3
    assert records[-1].symdiff_to_limit < 1e-3
    taus = [r.tau for r in records]
    assert taus == sorted(taus, reverse=True)
    out = tmp_path / "sweep.csv"
    write_sweep_csv(records, out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == CSV_COLUMNS and len(rows) == len(records) + 1
    assert float(rows[1][0]) == records[0].tau


def test_tau_sweep_rejects_bad_grid(p25):
    with pytest.raises(DomainError):
        tau_sweep(5.0, p25, [1e-3, 1e-2])
    with pytest.raises(DomainError):
        tau_sweep(5.0, p25, [1e-2, 0.0])


def test_tau_sweep_free_relaxation(p25):
    L = 6.95 * hstar_closed_form(p25)
    fixed = tau_sweep(L, p25, [0.5], free=False)[0]
    free = tau_sweep(L, p25, [0.5], free=True, steps=300)[0]
    assert free.energy <= fixed.energy


def test_monotone_g1d(rng, p25):
    for _ in range(10):
        E = random_set(rng, 5.0)
        vals = monotone_g1d(E, p25, log_tau_grid(1.0, 1e-3, 3))
        assert np.all(np.diff(vals) >= -1e-12 * vals[-1])
        assert vals[-1] == pytest.approx(g1d(E, p25), rel=1e-14)


def test_scaling_slope(p25):
    fit = scaling_fit(p25, log_tau_grid(1e-1, 1e-3, 4))
    assert fit.slope == pytest.approx(1.5, rel=0.01)
    # widths grow like tau^(-1/beta)
    w_slope = np.polyfit(np.log(fit.taus), np.log(fit.widths), 1)[0]
    assert w_slope == pytest.approx(-0.5, rel=0.01)

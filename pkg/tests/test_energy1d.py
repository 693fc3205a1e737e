import math

import numpy as np
import pytest
from hypothesis import given
from scipy import integrate

from conftest import periodic_sets
from stripelab.energy1d import (
    EnergyReport,
    chessboard_margin,
    chessboard_rhs,
    f0,
    f_tau_1d,
    g1d,
    g1d_with_error,
    stripe_energy_inf,
    width_gap_bound,
    width_gap_comparison,
)
from stripelab.geometry import PeriodicSet1D, difference_profile, make_stripes, random_set
from stripelab.kernels import (
    DomainError,
    ModelParams,
    QuadratureError,
    cbar_constant,
    cq_constant,
    marginal_kernel,
)


def power_law_oracle(E, params, periods=2000):
    """``2 int_0^inf C_q z^-q (P z - omega(z)) dz`` by quadrature on every linear piece.

    Beyond ``Z = periods * L`` the bracket is replaced by ``P z - mean(omega)``,
    whose integral is elementary; the dropped oscillation is O(Z^-q L^2).
    """
    q, cq, P, L = params.q, cq_constant(params), E.perimeter, E.L
    prof = difference_profile(E)
    bp = prof.breakpoints
    mean_omega = np.trapezoid(prof.values, bp) / L
    total = 0.0
    for k in range(periods):
        for a, b, va, vb in zip(bp[:-1], bp[1:], prof.values[:-1], prof.values[1:]):
            lo, hi = a + k * L, b + k * L
            slope = (vb - va) / (b - a)
            if lo == 0:
                # omega = P z up to the first kink, so the bracket vanishes there
                assert slope == pytest.approx(P, rel=1e-12)
                continue
            # bracket is linear on the piece: P z - (va + slope (z - lo))
            c1, c0 = P - slope, -va + slope * lo
            total += cq * (c1 * (hi ** (2 - q) - lo ** (2 - q)) / (2 - q) + c0 * (hi ** (1 - q) - lo ** (1 - q)) / (1 - q))
    Z = periods * L
    total += cq * (P * Z ** (2 - q) / (q - 2) - mean_omega * Z ** (1 - q) / (q - 1))
    return 2 * total


@pytest.mark.parametrize("h", [0.5, 1.0, 1.5, 2.0, 3.7])
@pytest.mark.parametrize("d,p", [(2, 5), (2, 6), (3, 7)])
def test_stripes_closed_form(h, d, p):
    pr = ModelParams(d, p)
    report = f0(make_stripes(h, 2 * h), pr)
    assert report.total == pytest.approx(stripe_energy_inf(h, pr), rel=1e-12)
    assert g1d(make_stripes(h), pr) / (2 * h) == pytest.approx(cbar_constant(pr) * h ** -(pr.q - 1), rel=1e-12)


def test_stripe_energy_examples(p25):
    assert stripe_energy_inf(1.0, p25) == pytest.approx(-1 + 2 * math.pi**2 / 27, rel=1e-14)
    assert stripe_energy_inf(1.0, p25) == pytest.approx(-0.2689181925119, abs=1e-13)
    big = stripe_energy_inf(np.array([1e3, 1e6]), p25)
    assert np.all(big < 0) and abs(big[1]) < 1.1e-6
    root = cbar_constant(p25) ** 0.5
    assert stripe_energy_inf(0.99 * root, p25) > 0 > stripe_energy_inf(1.01 * root, p25)
    with pytest.raises(DomainError):
        stripe_energy_inf(0.0, p25)


def test_dilation_of_stripes(p25):
    for s in (0.5, 3.0):
        E = make_stripes(1.3 * s)
        assert f0(E, p25).total == pytest.approx(-1 / (1.3 * s) + cbar_constant(p25) * (1.3 * s) ** -3, rel=1e-12)


def test_empty_and_full(p25):
    assert g1d(PeriodicSet1D.empty(3.0), p25) == 0
    assert g1d(PeriodicSet1D.full(3.0), p25.with_tau(0.5)) == 0


@pytest.mark.parametrize(
    "E",
    [
        PeriodicSet1D(3.0, [[0.0, 1.0]]),
        PeriodicSet1D(2.0, [[0.1, 0.6], [1.0, 1.7]]),
        PeriodicSet1D(5.0, [[0.3, 0.9], [1.2, 1.4], [3.0, 4.4]]),
    ],
)
def test_g1d_power_law_oracle(E, p25):
    assert g1d(E, p25) == pytest.approx(power_law_oracle(E, p25), rel=1e-9)


def test_g1d_unit_interval_example(p25):
    # E = [0, 1) in L = 3: value checked against the piecewise oracle to 1e-4 (stated oracle)
    E = PeriodicSet1D(3.0, [[0.0, 1.0]])
    assert g1d(E, p25) == pytest.approx(power_law_oracle(E, p25, periods=200), rel=1e-4)


@pytest.mark.parametrize("tau", [0.05, 0.5, 2.0])
def test_g1d_positive_tau_against_marginal_quadrature(tau, p25):
    # the difference to tau = 0 converges fast: K^_tau - K^_0 = O(z^-(q+p))
    E = PeriodicSet1D(2.0, [[0.1, 0.6], [1.0, 1.7]])
    pr = p25.with_tau(tau)
    prof = difference_profile(E)
    bracket = lambda z: E.perimeter * z - prof(z)
    f = lambda z: (marginal_kernel(z, pr, tol=1e-12) - marginal_kernel(z, p25)) * bracket(z)
    pts = np.unique(np.concatenate([prof.breakpoints + k * E.L for k in range(10)]))
    pts = pts[pts > 0]
    diff = sum(integrate.quad(f, a, b, epsrel=1e-12, epsabs=1e-15)[0] for a, b in zip(pts[:-1], pts[1:]))
    diff += integrate.quad(f, pts[-1], np.inf, epsabs=1e-13, limit=200)[0]
    assert g1d(E, pr) - g1d(E, p25) == pytest.approx(2 * diff, rel=1e-8, abs=1e-12)


def test_g1d_tolerance_guard(p25):
    E = PeriodicSet1D(2.0, [[0.1, 0.6], [1.0, 1.7]])
    val, err = g1d_with_error(E, p25)
    assert 0 < err < 1e-12 * val
    with pytest.raises(QuadratureError):
        g1d(E, p25, tol=err / 10)


def test_f0_at_hstar(p25):
    hs = math.sqrt(2 * math.pi**2 / 9)
    report = f0(make_stripes(hs), p25)
    assert report.total == pytest.approx(-0.450158158078553, rel=1e-13)
    assert report.total == pytest.approx(-2 / (3 * hs), rel=1e-13)


def test_f0_vanishes_for_long_periods(p25):
    vals = [abs(f0(PeriodicSet1D(L, [[0.0, 1.0], [2.0, 2.5]]), p25).total) for L in (10, 100, 1000)]
    assert vals[2] < vals[1] < vals[0] and vals[2] < 1e-2


def test_report_invariants(p25):
    E = PeriodicSet1D(4.0, [[0.0, 1.0], [2.0, 2.5]])
    for report in (f0(E, p25), f_tau_1d(E, p25.with_tau(0.3))):
        assert isinstance(report, EnergyReport)
        assert report.total == pytest.approx(report.perimeter_term + sum(report.per_direction) + report.cross_term)
        assert report.nonlocal_term >= 0 and report.splitting_margin == 0
        assert set(report.to_dict()) >= {"total", "err_estimate", "splitting_margin"}


def test_chessboard_rhs_examples(p25):
    E = PeriodicSet1D(3.0, [[0.0, 1.0]])
    e = lambda h: stripe_energy_inf(h, p25)
    assert chessboard_rhs(E, p25) == pytest.approx((2 * 1 * e(1.0) + 2 * 2 * e(2.0)) / 6, rel=1e-14)
    S = make_stripes(0.8, 4.8)
    assert chessboard_rhs(S, p25) == pytest.approx(e(0.8), rel=1e-13)
    assert abs(chessboard_margin(S, p25)) < 1e-13
    with pytest.raises(DomainError):
        chessboard_rhs(PeriodicSet1D.empty(1.0), p25)


@given(periodic_sets())
def test_chessboard_estimate(E):
    pr = ModelParams(2, 5)
    assert chessboard_margin(E, pr) >= -1e-9


@given(periodic_sets(max_intervals=4))
def test_g1d_monotone_in_tau(E):
    pr = ModelParams(2, 5)
    vals = [g1d(E, pr.with_tau(t)) for t in (4.0, 1.0, 0.3, 0.05, 0.0)]
    assert vals[0] >= 0
    assert np.all(np.diff(vals) >= -1e-12 * vals[-1])


@given(periodic_sets(max_intervals=4))
def test_width_gap_lower_bound(E):
    for tau in (0.0, 0.2, 1.0):
        pr = ModelParams(2, 5, tau=tau)
        assert g1d(E, pr) - width_gap_bound(E, pr) >= -1e-12 * g1d(E, pr)


def test_width_gap_bound_equals_power_sum_at_zero(p25):
    E = PeriodicSet1D(4.0, [[0.0, 1.0], [2.0, 2.5]])
    _, _, h, g = E.boundary()
    expected = cq_constant(p25) / 6 * (np.sum(h**-2.0) + np.sum(g**-2.0))
    assert width_gap_bound(E, p25) == pytest.approx(expected, rel=1e-14)


def test_width_gap_comparison_positive(rng):
    ratios = []
    for _ in range(50):
        E = random_set(rng, 6.0)
        for tau in (0.0, 0.1, 1.0):
            ratios.append(width_gap_comparison(E, ModelParams(2, 5, tau=tau)))
    assert min(ratios) > 0.05

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import periodic_sets
from stripelab.geometry import (
    GridSetND,
    PeriodicSet1D,
    difference_profile,
    eta,
    eta_sum,
    extrude,
    line_to_set,
    make_stripes,
    omega,
    random_grid,
    random_set,
    sym_diff_measure,
    align,
)
from stripelab.kernels import DomainError


def sampled_omega(pset, z, n=200_000):
    """Midpoint rule for ``int_0^L |chi(x) - chi(x+z)| dx``."""
    x = (np.arange(n) + 0.5) * pset.L / n
    return np.mean(pset.contains(x) != pset.contains(x + z)) * pset.L


def test_set_validation():
    with pytest.raises(DomainError):
        PeriodicSet1D(0.0)
    with pytest.raises(DomainError):
        PeriodicSet1D(1.0, [[0.2, 0.1]])
    with pytest.raises(DomainError):
        PeriodicSet1D(1.0, [[0.0, 0.5], [0.4, 0.8]])
    with pytest.raises(DomainError):
        PeriodicSet1D(1.0, [[0.1, 0.6], [0.8, 1.2]])


def test_basic_measurements():
    E = PeriodicSet1D(3.0, [[0.5, 1.0], [2.0, 3.25]])
    assert E.N == 2 and E.perimeter == 4
    assert E.measure == pytest.approx(1.75)
    np.testing.assert_allclose(E.widths, [0.5, 1.25])
    np.testing.assert_allclose(E.gaps, [1.0, 0.25])
    assert E.contains(0.1) and E.contains(3.1) and not E.contains(0.4)
    x, kind, h, g = E.boundary()
    np.testing.assert_allclose(x, [0.5, 1.0, 2.0, 3.25])
    np.testing.assert_array_equal(kind, [1, -1, 1, -1])
    np.testing.assert_allclose(h, [0.5, 0.5, 1.25, 1.25])
    np.testing.assert_allclose(g, [0.25, 1.0, 1.0, 0.25])


def test_full_and_empty():
    assert PeriodicSet1D.full(2.0).contains(0.3)
    assert not PeriodicSet1D.empty(2.0).contains(0.3)
    assert PeriodicSet1D.full(2.0).perimeter == 0
    assert omega(PeriodicSet1D.full(2.0), 0.7) == 0


@given(periodic_sets())
def test_json_round_trip(E):
    assert PeriodicSet1D.from_json(E.to_json()) == E


def test_make_stripes_commensurate():
    E = make_stripes(0.5, 3.0)
    assert E.N == 3
    np.testing.assert_allclose(E.widths, 0.5)
    np.testing.assert_allclose(E.gaps, 0.5)
    assert make_stripes(1.25).L == 2.5


def test_make_stripes_incommensurate_names_neighbors():
    with pytest.raises(DomainError, match=r"h\+ = 0\.5.*h- = 0\.75"):
        make_stripes(0.6, 3.0)


def test_eta_examples():
    E = PeriodicSet1D(3.0, [[0.0, 1.0]])
    # right endpoint t = 1: width 1 to the left, gap 2 to the right
    assert eta(E, 1.0, 0.4) == pytest.approx(0.4)
    assert eta(E, 1.0, 5.0) == pytest.approx(1.0)
    assert eta(E, 1.0, -5.0) == pytest.approx(2.0)
    assert eta(E, 0.0, 5.0) == pytest.approx(2.0)
    assert eta(E, 0.0, -0.3) == pytest.approx(0.3)
    with pytest.raises(DomainError):
        eta(E, 0.5, 1.0)


@given(periodic_sets(), st.floats(-30, 30))
def test_eta_bounds_difference(E, z):
    assert eta_sum(E, z) >= omega(E, z) - 1e-12 * E.L


@given(periodic_sets(max_intervals=4), st.floats(-10, 10))
def test_omega_bounds(E, z):
    w = omega(E, z)
    assert -1e-12 <= w <= min(E.perimeter * abs(z), 2 * min(E.measure, E.L - E.measure)) + 1e-9
    assert omega(E, -z) == pytest.approx(w, abs=1e-12)
    assert omega(E, z + E.L) == pytest.approx(w, abs=1e-9)
    assert omega(E.translate(1.234), z) == pytest.approx(w, abs=1e-9)


@pytest.mark.parametrize("z", [0.07, 0.5, 1.3, 2.9, -1.1])
def test_omega_against_sampling(z):
    E = PeriodicSet1D(3.0, [[0.1, 0.6], [1.0, 1.7], [2.2, 3.05]])
    assert omega(E, z) == pytest.approx(sampled_omega(E, z), abs=1e-4)


@given(periodic_sets(max_intervals=4))
def test_difference_profile_is_exact(E):
    prof = difference_profile(E)
    z = np.linspace(-2 * E.L, 2 * E.L, 97)
    np.testing.assert_allclose(prof(z), omega(E, z), atol=1e-10 * E.L)


def test_difference_profile_near_origin_slope():
    E = PeriodicSet1D(4.0, [[0.0, 1.0], [2.0, 2.5]])
    prof = difference_profile(E)
    assert prof.slopes[0] == pytest.approx(E.perimeter)


@given(periodic_sets(max_intervals=4), st.floats(0.0, 1.0))
def test_sym_diff_properties(E, frac):
    F = E.translate(frac * E.L)
    assert sym_diff_measure(E, E) == 0
    assert sym_diff_measure(E, F) == pytest.approx(sym_diff_measure(F, E), abs=1e-12)
    assert sym_diff_measure(E, align(E, F)) <= 1e-9 * E.L
    comp = PeriodicSet1D(E.L, np.column_stack([E.ends, np.roll(E.starts, -1) + np.r_[np.zeros(E.N - 1), E.L]]))
    assert sym_diff_measure(E, comp) == pytest.approx(E.L)


def test_sym_diff_triangle():
    a = PeriodicSet1D(2.0, [[0.0, 0.5]])
    b = PeriodicSet1D(2.0, [[0.25, 1.0]])
    c = PeriodicSet1D(2.0, [[0.3, 0.4], [1.5, 1.9]])
    assert sym_diff_measure(a, c) <= sym_diff_measure(a, b) + sym_diff_measure(b, c) + 1e-15
    assert sym_diff_measure(a, b) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        sym_diff_measure(a, PeriodicSet1D(3.0, [[0, 1]]))


def test_random_set_spacing_and_seed():
    r1, r2 = np.random.default_rng(5), np.random.default_rng(5)
    for _ in range(50):
        a, b = random_set(r1, 4.0), random_set(r2, 4.0)
        assert a == b
        assert min(a.widths.min(), a.gaps.min()) >= 0.04 - 1e-12


def test_line_to_set_wraps():
    row = np.array([1, 0, 0, 1, 1, 0, 1, 1], dtype=bool)
    E = line_to_set(row, 8.0)
    assert E.N == 2 and E.perimeter == 4
    np.testing.assert_allclose(sorted(E.widths), [2.0, 3.0])
    centers = np.arange(8) + 0.5
    np.testing.assert_array_equal(E.contains(centers), row)


def test_grid_validation_and_json(rng):
    with pytest.raises(DomainError):
        GridSetND(2, 4.0, 4, np.zeros((4, 5)))
    with pytest.raises(DomainError):
        GridSetND(4, 4.0, 2, np.zeros((2,) * 4))
    g = random_grid(rng, d=3, n=4, L=2.0)
    h = GridSetND.from_json(g.to_json())
    assert h.d == 3 and h.L == 2.0
    np.testing.assert_array_equal(h.mask, g.mask)


@pytest.mark.parametrize("d,n", [(2, 16), (3, 6)])
def test_slicing_identity_for_perimeter(rng, d, n):
    g = random_grid(rng, d=d, n=n, L=3.0)
    for axis in range(d):
        total = sum(g.slice(axis, idx).perimeter for idx, _ in g.lines(axis))
        assert total * g.cell ** (d - 1) == pytest.approx(g.per_axis(axis), rel=1e-14)


def test_slice_direction():
    mask = np.zeros((4, 4), dtype=bool)
    mask[1, :] = True  # a full row along axis 1
    g = GridSetND(2, 4.0, 4, mask)
    assert g.slice(1, (1,)).fill
    assert g.slice(0, (2,)).N == 1
    assert g.per_axis(0) == 8 and g.per_axis(1) == 0
    with pytest.raises(DomainError):
        g.slice(0, (7,))


def test_extrude_matches_set():
    E = PeriodicSet1D(8.0, [[1.0, 3.0], [5.0, 6.0]])
    g = extrude(E, 16, d=3, axis=2)
    assert g.mask.shape == (16,) * 3
    assert g.slice(2, (3, 7)) == E
    assert g.per_1 == pytest.approx(E.perimeter * 8.0**2)
    with pytest.raises(DomainError):
        extrude(PeriodicSet1D(8.0, [[0.3, 2.0]]), 16)

"""Periodic interval sets and pixel sets on the torus."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import DomainError


class PeriodicSet1D:
    """An L-periodic finite union of intervals.

    One period is stored as ``[s_1, t_1), ..., [s_N, t_N)`` with
    ``0 <= s_1 < t_1 < s_2 < ... < t_N < s_1 + L``.  The last interval may
    run past ``L`` (it then wraps around the period).  ``N = 0`` encodes the
    empty set, or the whole line when ``fill`` is true.
    """

    __slots__ = ("L", "starts", "ends", "fill")

    def __init__(self, L: float, intervals=(), fill: bool = False):
        L = float(L)
        if not L > 0:
            raise DomainError(f"period must be positive, got {L}")
        arr = np.asarray(intervals, dtype=float).reshape(-1, 2)
        if len(arr):
            fill = False
            shift = math.floor(arr[0, 0] / L) * L
            arr = arr - shift
            flat = arr.ravel()
            if not np.all(np.diff(flat) > 0):
                raise DomainError("endpoints must strictly interleave: s1 < t1 < s2 < ...")
            if not flat[-1] < flat[0] + L:
                raise DomainError("intervals overlap their own periodic image")
        self.L = L
        self.starts = arr[:, 0].copy()
        self.ends = arr[:, 1].copy()
        self.fill = bool(fill)

    @classmethod
    def full(cls, L: float) -> "PeriodicSet1D":
        return cls(L, (), fill=True)

    @classmethod
    def empty(cls, L: float) -> "PeriodicSet1D":
        return cls(L, ())

    def __repr__(self) -> str:
        if not self.N:
            return f"PeriodicSet1D(L={self.L}, {'full' if self.fill else 'empty'})"
        body = ", ".join(f"[{s:.6g}, {t:.6g})" for s, t in zip(self.starts, self.ends))
        return f"PeriodicSet1D(L={self.L}, {body})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PeriodicSet1D)
            and self.L == other.L
            and self.fill == other.fill
            and np.array_equal(self.starts, other.starts)
            and np.array_equal(self.ends, other.ends)
        )

    @property
    def N(self) -> int:
        return len(self.starts)

    @property
    def perimeter(self) -> int:
        return 2 * self.N

    @property
    def intervals(self) -> np.ndarray:
        return np.column_stack([self.starts, self.ends])

    @property
    def measure(self) -> float:
        if not self.N:
            return self.L if self.fill else 0.0
        return math.fsum(self.ends - self.starts)

    @property
    def widths(self) -> np.ndarray:
        """Interval lengths ``t_i - s_i``."""
        return self.ends - self.starts

    @property
    def gaps(self) -> np.ndarray:
        """Gap after each interval, ``s_(i+1) - t_i`` with ``s_(N+1) = s_1 + L``."""
        nxt = np.append(self.starts[1:], self.starts[0] + self.L)
        return nxt - self.ends

    def boundary(self):
        """Boundary points with their local width and gap.

        Returns arrays ``(x, kind, h, g)`` where ``kind`` is +1 at left
        endpoints ``s_i`` and -1 at right endpoints ``t_i``.
        """
        if not self.N:
            return (np.empty(0),) * 2 + (np.empty(0),) * 2
        w = self.widths
        gap_after = self.gaps
        gap_before = np.roll(gap_after, 1)
        x = np.column_stack([self.starts, self.ends]).ravel()
        kind = np.tile([1, -1], self.N)
        h = np.repeat(w, 2)
        g = np.column_stack([gap_before, gap_after]).ravel()
        return x, kind, h, g

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.N:
            return np.full(x.shape, self.fill)
        y = np.mod(x - self.starts[0], self.L) + self.starts[0]
        idx = np.searchsorted(self.starts, y, side="right") - 1
        return (idx >= 0) & (y < self.ends[np.clip(idx, 0, None)])

    def translate(self, shift: float) -> "PeriodicSet1D":
        if not self.N:
            return self
        return PeriodicSet1D(self.L, self.intervals + shift)

    def kinks(self):
        """Second-derivative atoms of the self-overlap ``m(z) = |E n (E - z)|``.

        Returns ``(r, w)``: atoms sit at ``r + k L`` for every ``k >= 0`` with
        offsets ``0 < r <= L`` and signed unit masses ``w``.  The difference
        profile is ``omega = 2 (|E| - m)``.
        """
        s, t = self.starts, self.ends
        if not self.N:
            return np.empty(0), np.empty(0)
        offsets = np.concatenate(
            [
                (s[None, :] - t[:, None]).ravel(),
                (s[None, :] - s[:, None]).ravel(),
                (t[None, :] - t[:, None]).ravel(),
                (t[None, :] - s[:, None]).ravel(),
            ]
        )
        n2 = self.N * self.N
        weights = np.repeat([1.0, -1.0, -1.0, 1.0], n2)
        r = np.mod(offsets, self.L)
        r[r == 0] = self.L
        return r, weights

    def to_json(self) -> str:
        return json.dumps(
            {"L": self.L, "intervals": self.intervals.tolist(), "fill": self.fill}
        )

    @classmethod
    def from_json(cls, text: str) -> "PeriodicSet1D":
        obj = json.loads(text)
        return cls(obj["L"], obj.get("intervals", []), fill=obj.get("fill", False))


@dataclass(frozen=True)
class PiecewiseLinearProfile:
    """Continuous piecewise-linear L-periodic function given on ``[0, L]``."""

    breakpoints: np.ndarray
    values: np.ndarray
    L: float

    def __call__(self, z) -> np.ndarray:
        z = np.mod(np.asarray(z, dtype=float), self.L)
        return np.interp(z, self.breakpoints, self.values)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)


def make_stripes(h: float, L: float | None = None) -> PeriodicSet1D:
    """``E_h = U_k [2kh, (2k+1)h)`` restricted to a period ``L`` (default ``2h``)."""
    if not h > 0:
        raise DomainError("stripe width must be positive")
    if L is None:
        L = 2 * h
    ratio = L / (2 * h)
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        up, down = math.ceil(ratio), math.floor(ratio)
        h_plus = L / (2 * up)
        h_minus = L / (2 * down) if down >= 1 else math.inf
        raise DomainError(
            f"width {h} does not tile period {L}; nearest commensurate widths "
            f"h+ = {h_plus:.12g}, h- = {h_minus:.12g}"
        )
    step = L / n
    starts = step * np.arange(n)
    return PeriodicSet1D(L, np.column_stack([starts, starts + step / 2]))


def eta(pset: PeriodicSet1D, x: float, z: float) -> float:
    """Local cap on how much a translation by z can move the boundary point x."""
    xs, kind, h, g = pset.boundary()
    if not len(xs):
        raise DomainError("set has no boundary points")
    dist = np.abs(np.mod(xs - x + pset.L / 2, pset.L) - pset.L / 2)
    i = int(np.argmin(dist))
    if dist[i] > 1e-12 * pset.L:
        raise DomainError(f"{x} is not a boundary point")
    zp, zm = max(z, 0.0), max(-z, 0.0)
    if kind[i] < 0:
        return min(zp, h[i]) + min(zm, g[i])
    return min(zp, g[i]) + min(zm, h[i])


def eta_sum(pset: PeriodicSet1D, z) -> np.ndarray:
    """``sum_{x in boundary} eta(x, z)`` (vectorized in z)."""
    z = np.asarray(z, dtype=float)[..., None]
    _, kind, h, g = pset.boundary()
    zp, zm = np.maximum(z, 0), np.maximum(-z, 0)
    right = np.minimum(zp, h) + np.minimum(zm, g)
    left = np.minimum(zp, g) + np.minimum(zm, h)
    return np.where(kind < 0, right, left).sum(axis=-1)


def omega(pset: PeriodicSet1D, z) -> np.ndarray:
    """``int_0^L |chi_E(x) - chi_E(x + z)| dx``, exact, vectorized in z."""
    z = np.mod(np.asarray(z, dtype=float), pset.L)
    if not pset.N:
        return np.zeros_like(z)
    s, t = pset.starts, pset.ends
    overlap = np.zeros_like(z)
    for k in (-2, -1, 0, 1, 2):
        lo = np.maximum(s[:, None, None], s[None, :, None] - z + k * pset.L)
        hi = np.minimum(t[:, None, None], t[None, :, None] - z + k * pset.L)
        overlap = overlap + np.clip(hi - lo, 0, None).sum(axis=(0, 1))
    return 2 * (pset.measure - overlap)


def difference_profile(pset: PeriodicSet1D) -> PiecewiseLinearProfile:
    """Exact ``omega`` as a piecewise-linear profile over one period."""
    if not pset.N:
        return PiecewiseLinearProfile(np.array([0.0, pset.L]), np.zeros(2), pset.L)
    r, _ = pset.kinks()
    bp = np.unique(np.concatenate([[0.0, pset.L], r]))
    values = omega(pset, bp)
    values[0] = values[-1] = 0.0
    return PiecewiseLinearProfile(bp, values, pset.L)


def sym_diff_measure(a: PeriodicSet1D, b: PeriodicSet1D) -> float:
    """``|a (sym. diff.) b|`` per period, by a sweep over all endpoints."""
    if a.L != b.L:
        raise DomainError(f"periods differ: {a.L} vs {b.L}")
    L = a.L
    cuts = np.mod(np.concatenate([a.starts, a.ends, b.starts, b.ends]), L)
    cuts = np.unique(np.concatenate([[0.0, L], cuts]))
    mid = 0.5 * (cuts[1:] + cuts[:-1])
    differ = a.contains(mid) != b.contains(mid)
    return math.fsum(np.diff(cuts)[differ])


def align(a: PeriodicSet1D, b: PeriodicSet1D) -> PeriodicSet1D:
    """Translate b so that one of its left endpoints sits on a's first one.

    Tries every left endpoint of b and keeps the translate closest to a.
    """
    if not a.N or not b.N:
        return b
    best, best_val = b, math.inf
    for s in b.starts:
        cand = b.translate(a.starts[0] - s)
        val = sym_diff_measure(a, cand)
        if val < best_val:
            best, best_val = cand, val
    return best


def random_set(
    rng: np.random.Generator,
    L: float = 1.0,
    max_intervals: int = 8,
    delta_min: float | None = None,
) -> PeriodicSet1D:
    """Random periodic set with every width and gap at least ``delta_min`` (default L/100)."""
    if delta_min is None:
        delta_min = L / 100
    n = int(rng.integers(1, max_intervals + 1))
    if 2 * n * delta_min >= L:
        raise DomainError("delta_min too large for the requested number of intervals")
    while True:
        pts = np.sort(rng.uniform(0.0, L, size=2 * n))
        spacing = np.diff(np.append(pts, pts[0] + L))
        if spacing.min() >= delta_min:
            return PeriodicSet1D(L, pts.reshape(-1, 2))


# --- pixel sets --------------------------------------------------------------


@dataclass(frozen=True)
class GridSetND:
    """A Q_L-periodic union of cubes of side ``L / n`` given by an occupancy mask."""

    d: int
    L: float
    n: int
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if self.d not in (2, 3):
            raise DomainError("pixel sets are supported for d = 2 and d = 3")
        if mask.shape != (self.n,) * self.d:
            raise DomainError(f"mask shape {mask.shape} != {(self.n,) * self.d}")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @property
    def cell(self) -> float:
        return self.L / self.n

    @property
    def volume(self) -> float:
        return int(self.mask.sum()) * self.cell**self.d

    def face_count(self, axis: int) -> int:
        """Number of cell faces orthogonal to ``axis`` on the boundary."""
        return int(np.count_nonzero(self.mask != np.roll(self.mask, -1, axis=axis)))

    def per_axis(self, axis: int) -> float:
        """``int_{boundary} |nu_axis|``."""
        return self.face_count(axis) * self.cell ** (self.d - 1)

    @property
    def per_1(self) -> float:
        return sum(self.per_axis(i) for i in range(self.d))

    def slice(self, axis: int, index) -> PeriodicSet1D:
        """The one-dimensional set along ``axis`` through the cells at ``index``."""
        index = tuple(int(i) for i in index)
        if len(index) != self.d - 1 or not all(0 <= i < self.n for i in index):
            raise DomainError(f"bad line index {index}")
        sel = list(index)
        sel.insert(axis, slice(None))
        return line_to_set(self.mask[tuple(sel)], self.L)

    def lines(self, axis: int):
        """Iterate ``(index, occupancy row)`` over all lines parallel to ``axis``."""
        moved = np.moveaxis(self.mask, axis, -1)
        for index in itertools.product(range(self.n), repeat=self.d - 1):
            yield index, moved[index]

    def to_json(self) -> str:
        return json.dumps(
            {"d": self.d, "L": self.L, "n": self.n, "mask": self.mask.astype(int).tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "GridSetND":
        obj = json.loads(text)
        return cls(int(obj["d"]), float(obj["L"]), int(obj["n"]), np.array(obj["mask"]))


def line_to_set(row: np.ndarray, L: float) -> PeriodicSet1D:
    """Periodic set of occupied cells of a boolean row."""
    row = np.asarray(row, dtype=bool)
    n = len(row)
    if row.all():
        return PeriodicSet1D.full(L)
    if not row.any():
        return PeriodicSet1D.empty(L)
    a = L / n
    # rotate so the row starts on an empty cell; runs then never wrap
    first_empty = int(np.argmin(row))
    r = np.roll(row, -first_empty).astype(np.int8)
    edges = np.diff(np.concatenate([[0], r, [0]]))
    s = np.flatnonzero(edges == 1) + first_empty
    t = np.flatnonzero(edges == -1) + first_empty
    return PeriodicSet1D(L, np.column_stack([s, t]) * a)


def extrude(pset: PeriodicSet1D, n: int, d: int = 2, axis: int = 0) -> GridSetND:
    """Pixel set ``E x R^(d-1)`` whose slices along ``axis`` are ``pset``.

    ``pset`` endpoints must sit on multiples of ``L / n``.
    """
    a = pset.L / n
    centers = (np.arange(n) + 0.5) * a
    row = pset.contains(centers)
    rebuilt = line_to_set(row, pset.L)
    if not sym_diff_measure(rebuilt, pset) <= 1e-9 * pset.L:
        raise DomainError("set endpoints are not on the grid")
    shape = [1] * d
    shape[axis] = n
    mask = np.broadcast_to(row.reshape(shape), (n,) * d)
    return GridSetND(d, pset.L, n, mask.copy())


def random_grid(
    rng: np.random.Generator, d: int = 2, n: int = 16, L: float = 8.0, density: float = 0.5
) -> GridSetND:
    return GridSetND(d, L, n, rng.random((n,) * d) < density)

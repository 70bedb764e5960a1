"""Grids, sampled fields, Fourier conventions and the flat Hilbert transform.

Two grid types are supported.  A ``PeriodicGrid`` samples one period
``[-P/2, P/2)``; a ``LineGrid`` samples the truncated line ``[-L, L)`` and is
treated as one period of length ``2L`` by every FFT-based operation, which is
accurate as long as the sampled function has decayed at the truncation edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np
import scipy.fft as sfft

from ._threads import n_workers
from .errors import DecayViolation

S0 = 2.0
DECAY_TOL = 1e-8
EDGE_FRACTION = 0.05


@dataclass(frozen=True)
class PeriodicGrid:
    n_points: int
    period: float = 2 * np.pi

    def __post_init__(self):
        if self.n_points < 8 or self.n_points % 2:
            raise ValueError("PeriodicGrid needs an even n_points >= 8")
        if not self.period > 0:
            raise ValueError("period must be positive")

    @property
    def spacing(self) -> float:
        return self.period / self.n_points

    @property
    def box_length(self) -> float:
        return self.period

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -self.period / 2 + self.spacing * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def frequencies(self) -> np.ndarray:
        xi = 2 * np.pi * sfft.fftfreq(self.n_points, self.spacing)
        xi.flags.writeable = False
        return xi


@dataclass(frozen=True)
class LineGrid:
    n_points: int = 4096
    half_width: float = 32 * np.pi

    def __post_init__(self):
        if self.n_points < 8 or self.n_points % 2:
            raise ValueError("LineGrid needs an even n_points >= 8")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / self.n_points

    @property
    def box_length(self) -> float:
        return 2 * self.half_width

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -self.half_width + self.spacing * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def frequencies(self) -> np.ndarray:
        xi = 2 * np.pi * sfft.fftfreq(self.n_points, self.spacing)
        xi.flags.writeable = False
        return xi

    def refined(self, factor: int = 2) -> "LineGrid":
        return LineGrid(self.n_points * factor, self.half_width)


Grid = Union[PeriodicGrid, LineGrid]


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != (self.grid.n_points,):
            raise ValueError(
                f"field has {v.shape} samples, grid has {self.grid.n_points}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite samples")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "ComplexField":
        return cls(grid, func(grid.nodes))

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.conj())

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def _other(self, other):
        if isinstance(other, ComplexField):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return ComplexField(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ComplexField(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return ComplexField(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return ComplexField(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ComplexField(self.grid, self.values / self._other(other))

    def __neg__(self):
        return ComplexField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Fourier coefficients together with their (angular) frequencies."""
    grid: Grid
    frequencies: np.ndarray
    coefficients: np.ndarray


def _fft(v: np.ndarray) -> np.ndarray:
    return sfft.fft(v, workers=n_workers())


def _ifft(v: np.ndarray) -> np.ndarray:
    return sfft.ifft(v, workers=n_workers())


def _shift_phase(grid: Grid) -> np.ndarray:
    # nodes start at x0 rather than 0; e^{-i xi x_j} = e^{-i xi x0} e^{-2 pi i m j / N}
    x0 = grid.nodes[0]
    return np.exp(-1j * grid.frequencies * x0)


def dft(f: ComplexField) -> Spectrum:
    """Forward transform with the package conventions.

    Periodic grids give ``(1/P) sum f(a_j) e^{-i xi a_j} h``; line grids give
    the trapezoid approximation of ``int f e^{-i x xi} dx``.
    """
    g = f.grid
    raw = _fft(f.values) * _shift_phase(g)
    if isinstance(g, PeriodicGrid):
        coeffs = raw / g.n_points
    else:
        coeffs = raw * g.spacing
    return Spectrum(g, g.frequencies, coeffs)


def inverse_dft(spec: Spectrum) -> ComplexField:
    g = spec.grid
    raw = spec.coefficients / _shift_phase(g)
    if isinstance(g, PeriodicGrid):
        raw = raw * g.n_points
    else:
        raw = raw / g.spacing
    return ComplexField(g, _ifft(raw))


def apply_multiplier(f: ComplexField, symbol: np.ndarray) -> ComplexField:
    """Apply a Fourier multiplier sampled at ``f.grid.frequencies``."""
    return ComplexField(f.grid, _ifft(symbol * _fft(f.values)))


def multiplier_values(grid: Grid, values: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    return _ifft(symbol * _fft(values))


def derivative_symbol(grid: Grid, order: int = 1) -> np.ndarray:
    xi = grid.frequencies
    sym = (1j * xi) ** order
    if order % 2:
        sym = sym.copy()
        sym[grid.n_points // 2] = 0.0
    return sym


def spectral_derivative(f: ComplexField, order: int = 1) -> ComplexField:
    if order < 1:
        raise ValueError("order must be a positive integer")
    return apply_multiplier(f, derivative_symbol(f.grid, order))


def diff(values: np.ndarray, grid: Grid, order: int = 1) -> np.ndarray:
    """Spectral derivative of raw samples (no field wrapper)."""
    return _ifft(derivative_symbol(grid, order) * _fft(values))


def _tail_basis(x: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Derivatives of the tail models 1/(1+x^2) and x/(1+x^2)."""
    q = 1.0 + x * x
    if order == 0:
        return 1.0 / q, x / q
    if order == 1:
        return -2.0 * x / q ** 2, (1.0 - x * x) / q ** 2
    if order == 2:
        return (6.0 * x * x - 2.0) / q ** 3, (2.0 * x ** 3 - 6.0 * x) / q ** 3
    raise ValueError("tail model supports derivative orders up to 2")


def diff_tail(values: np.ndarray, grid: LineGrid, order: int = 1) -> np.ndarray:
    """Spectral derivative after removing an algebraic far-field tail.

    Fields decaying like ``1/x`` or ``1/x^2`` leave a jump or a kink across
    the box edge.  The tail ``(a + b x)/(1+x^2)`` matched to the two edge
    samples is differentiated exactly and only the faster-decaying rest goes
    through the FFT.
    """
    if not isinstance(grid, LineGrid):
        raise TypeError("tail subtraction needs a LineGrid")
    x = grid.nodes
    v = np.asarray(values, dtype=np.complex128)
    even, odd = _tail_basis(x, 0)
    m = np.array([[even[0], odd[0]], [even[-1], odd[-1]]])
    a, b = np.linalg.solve(m, np.array([v[0], v[-1]]))
    rest = v - a * even - b * odd
    de, do = _tail_basis(x, order)
    return diff(rest, grid, order) + a * de + b * do


def hilbert_symbol(grid: Grid) -> np.ndarray:
    return -np.sign(grid.frequencies)


def flat_hilbert(f: ComplexField) -> ComplexField:
    """Multiplier -sgn(xi); the zero mode is sent to 0."""
    return apply_multiplier(f, hilbert_symbol(f.grid))


def hilbert_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    return _ifft(hilbert_symbol(grid) * _fft(values))


def _spectral_measure(grid: Grid) -> float:
    # sum over modes (periodic) versus d-xi quadrature of the integral (line)
    if isinstance(grid, PeriodicGrid):
        return 1.0
    return 2 * np.pi / grid.box_length


def sobolev_norm(f: ComplexField, s: float) -> float:
    if s < 0:
        raise ValueError("s must be nonnegative")
    spec = dft(f)
    w = (1.0 + spec.frequencies ** 2) ** s
    total = np.sum(w * np.abs(spec.coefficients) ** 2) * _spectral_measure(f.grid)
    return float(np.sqrt(total))


def edge_ratio(values: np.ndarray, fraction: float = EDGE_FRACTION,
               scale: float = 0.0) -> float:
    """max |f| on the outer ``fraction`` of nodes divided by max(max |f|, scale)."""
    a = np.abs(values)
    top = max(a.max() if a.size else 0.0, scale)
    if top == 0.0:
        return 0.0
    n = len(a)
    m = max(1, int(np.ceil(fraction * n / 2)))
    edge = max(a[:m].max(), a[-m:].max())
    return float(edge / top)


def check_decay(values: np.ndarray, tol: float = DECAY_TOL, what: str = "field",
                scale: float = 0.0) -> None:
    """Raise DecayViolation unless the edge level is below ``tol`` times the peak.

    ``scale`` lets a remainder be judged against the field it was split from.
    """
    r = edge_ratio(values, scale=scale)
    if r > tol:
        raise DecayViolation(f"{what} does not decay at the truncation edge "
                             f"(edge/max = {r:.3e} > {tol:.1e})")


def periods_in_box(grid: LineGrid, period: float) -> tuple[int, int]:
    """Number of whole periods in the box and nodes per period.

    Raises ValueError when the box does not hold a whole number of periods
    sampled by a whole number of nodes.
    """
    m = grid.box_length / period
    mi = int(round(m))
    if mi < 1 or abs(m - mi) > 1e-9 * max(1.0, m):
        raise ValueError(f"box length {grid.box_length} is not a multiple of {period}")
    if grid.n_points % mi:
        raise ValueError("nodes per period is not an integer")
    return mi, grid.n_points // mi


def _block_roll(grid: LineGrid, period: float, n_per: int) -> int:
    """Index roll taking a block starting at a box node to the periodic node order."""
    off = ((grid.nodes[0] + period / 2) % period) / grid.spacing
    return -int(round(off)) % n_per


def xs_split(f: ComplexField, period: float = 2 * np.pi,
             tol: float = DECAY_TOL) -> tuple[ComplexField, ComplexField]:
    """Split a line field into a periodic profile and a decaying remainder.

    The periodic profile is the phase-aligned average of the field over the
    whole periods lying in the outer half of the box.
    """
    grid = f.grid
    if not isinstance(grid, LineGrid):
        raise TypeError("xs_split needs a LineGrid field")
    L = grid.half_width
    m, n_per = periods_in_box(grid, period)
    blocks = f.values.reshape(m, n_per)
    starts = -L + period * np.arange(m)
    outer = (starts + period <= -L / 2 + 1e-12) | (starts >= L / 2 - 1e-12)
    if not outer.any():
        raise ValueError("box too small for far-field averaging")
    profile = blocks[outer].mean(axis=0)
    roll = _block_roll(grid, period, n_per)
    f0 = ComplexField(PeriodicGrid(n_per, period), np.roll(profile, roll))
    f1 = ComplexField(grid, f.values - np.tile(profile, m))
    check_decay(f1.values, tol, "decaying part", float(np.max(np.abs(f.values))))
    return f0, f1


def periodize(f0: ComplexField, grid: LineGrid) -> ComplexField:
    """Tile a periodic field across a line grid whose box holds whole periods."""
    m, n_per = periods_in_box(grid, f0.grid.period)
    if n_per != f0.grid.n_points:
        raise ValueError("periodic grid spacing does not match the line grid")
    row = np.roll(f0.values, -_block_roll(grid, f0.grid.period, n_per))
    return ComplexField(grid, np.tile(row, m))


def xs_norm(f: ComplexField, s: float, s0: float = S0,
            period: float = 2 * np.pi) -> float:
    if s0 <= 1.5:
        raise ValueError("s0 must exceed 3/2")
    if isinstance(f.grid, PeriodicGrid):
        return sobolev_norm(f, s + s0)
    f0, f1 = xs_split(f, period)
    return sobolev_norm(f0, s + s0) + sobolev_norm(f1, s)

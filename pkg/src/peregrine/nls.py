"""Focusing cubic NLS with a plane-wave background.

The equation is written generically as ``i a B_T + c2 B_XX + c3 |B|^2 B = 0``:

* standard:   a = 1, c2 = 1,               c3 = 2
* scaled(k):  a = 2, c2 = 1/(4 k^{3/2}),   c3 = k^{5/2}

A state stores the background ``rho e^{i mu T}`` analytically and only the
localized perturbation ``B1`` on a line grid.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Callable

import numba
import numpy as np
import scipy.fft as sfft

from ._threads import n_workers
from .errors import StepBlowup
from .spectral_core import DECAY_TOL, ComplexField, LineGrid, check_decay, diff_tail

BLOWUP = 1e6
T_WINDOW = 2.0
# Rational breathers decay like 1/x^2, so no affordable grid reaches the
# default relative edge level; breather states use this looser bound.
ALGEBRAIC_DECAY_TOL = 1e-5


@dataclass(frozen=True)
class NlsParams:
    normalization: str = "standard"
    k: float | None = None

    def __post_init__(self):
        if self.normalization not in ("standard", "scaled"):
            raise ValueError("normalization must be 'standard' or 'scaled'")
        if self.normalization == "scaled" and not (self.k is not None and self.k > 0):
            raise ValueError("scaled normalization needs k > 0")

    @classmethod
    def standard(cls) -> "NlsParams":
        return cls("standard")

    @classmethod
    def scaled(cls, k: float) -> "NlsParams":
        return cls("scaled", float(k))

    @property
    def coefficients(self) -> tuple[float, float, float]:
        if self.normalization == "standard":
            return 1.0, 1.0, 2.0
        k = self.k
        return 2.0, 1.0 / (4.0 * k ** 1.5), k ** 2.5

    def phase_rate(self, rho: float) -> float:
        """mu from substituting rho e^{i mu T}: -a mu + c3 rho^2 = 0."""
        a, _, c3 = self.coefficients
        return c3 * rho * rho / a


def _standard_to(params: NlsParams, n: int, L: float) -> LineGrid:
    if params.normalization == "scaled":
        L /= dilation(params.k)
    return LineGrid(n, L)


def default_grid(params: NlsParams) -> LineGrid:
    """Breather grid: h = 0.05 and L = 409.6 in the standard variable x."""
    return _standard_to(params, 16384, 409.6)


def evolve_grid(params: NlsParams) -> LineGrid:
    """Wider box for time stepping, so the 1/x^2 tails stay small at the edge."""
    return _standard_to(params, 65536, 1638.4)


@dataclass(frozen=True, eq=False)
class NlsState:
    params: NlsParams
    T: float
    rho: float
    mu: float
    B1: ComplexField
    decay_tol: float = DECAY_TOL
    exact: Callable[[np.ndarray, float], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("background amplitude must be nonnegative")
        if not isinstance(self.B1.grid, LineGrid):
            raise TypeError("perturbation must live on a LineGrid")
        check_decay(self.B1.values, self.decay_tol, "NLS perturbation")

    @property
    def grid(self) -> LineGrid:
        return self.B1.grid

    def background(self, T: float | None = None) -> complex:
        T = self.T if T is None else T
        return self.rho * np.exp(1j * self.mu * T)

    def total(self) -> ComplexField:
        return self.B1 + self.background()


def background_state(params: NlsParams, grid: LineGrid, rho: float = 1.0,
                     T: float = 0.0) -> NlsState:
    mu = params.phase_rate(rho)
    zero = ComplexField(grid, np.zeros(grid.n_points))
    exact = lambda x, t: np.full(np.shape(x), rho * np.exp(1j * mu * t))
    return NlsState(params, T, rho, mu, zero, exact=exact)


def state_from_profile(params: NlsParams, grid: LineGrid, B1, rho: float = 1.0,
                       T: float = 0.0, decay_tol: float = DECAY_TOL) -> NlsState:
    values = B1(grid.nodes) if callable(B1) else B1
    return NlsState(params, T, rho, params.phase_rate(rho), ComplexField(grid, values),
                    decay_tol)


# -- Peregrine breather ------------------------------------------------------

def _q(x, t):
    # resolved standard form: solves i q_t + q_xx + 2|q|^2 q = 0
    d = 1 + 4 * x * x + 16 * t * t
    return np.exp(2j * t) * (1 - 4 * (1 + 4j * t) / d)


def _q1(x, t):
    d = 1 + 4 * x * x + 16 * t * t
    return -4 * np.exp(2j * t) * (1 + 4j * t) / d


def _q_t(x, t):
    d = 1 + 4 * x * x + 16 * t * t
    num = 1 + 4j * t
    dq = -4 * (4j * d - num * 32 * t) / (d * d)
    return np.exp(2j * t) * (2j * (1 - 4 * num / d) + dq)


def dilation(k: float) -> float:
    return np.sqrt(8 * k ** 1.5)


def amplitude_factor(k: float) -> float:
    return 2 / np.sqrt(k ** 2.5)


def _breather_parts(params: NlsParams, X, T, rho: float):
    """(full value, perturbation, time derivative) of the breather family."""
    X = np.asarray(X, dtype=float)
    if params.normalization == "standard":
        x, t, c = rho * X, rho * rho * T, rho
        return c * _q(x, t), c * _q1(x, t), c * rho * rho * _q_t(x, t)
    k = params.k
    d, c = dilation(k), amplitude_factor(k)
    x, t = rho * d * X, rho * rho * T
    return c * rho * _q(x, t), c * rho * _q1(x, t), c * rho ** 3 * _q_t(x, t)


def peregrine(params: NlsParams, x, t: float, rho: float = 1.0):
    """Peregrine breather for the chosen normalization.

    Standard form: ``e^{2it}(1 - 4(1+4it)/(1+4x^2+16t^2))`` (amplitude family
    ``rho q(rho x, rho^2 t)``); the scaled form is its image under the packet
    rescaling.  ``|B(0,0)|`` is three times the background modulus.
    """
    val = _breather_parts(params, x, t, rho)[0]
    return val if np.ndim(val) else complex(val)


def peregrine_dt(params: NlsParams, x, t: float, rho: float = 1.0):
    return _breather_parts(params, x, t, rho)[2]


def peregrine_state(params: NlsParams, grid: LineGrid | None = None, T: float = 0.0,
                    rho: float = 1.0, shift: float = 0.0,
                    decay_tol: float = ALGEBRAIC_DECAY_TOL) -> NlsState:
    """Breather state at time T; ``shift`` relabels the profile time (T + shift)."""
    grid = default_grid(params) if grid is None else grid
    _, b1, _ = _breather_parts(params, grid.nodes, T + shift, rho)
    mu = params.phase_rate(rho * (1 if params.normalization == "standard"
                                  else amplitude_factor(params.k)))
    amp = rho if params.normalization == "standard" else rho * amplitude_factor(params.k)
    # the profile at T + shift carries background phase mu (T + shift)
    b1 = b1 * np.exp(-1j * mu * shift)
    exact = lambda x, t: peregrine(params, x, t + shift, rho) * np.exp(-1j * mu * shift)
    return NlsState(params, T, amp, mu, ComplexField(grid, b1), decay_tol, exact)


def breather_residual(params: NlsParams, grid: LineGrid | None = None, t: float = 0.0,
                      rho: float = 1.0) -> float:
    """Sup norm of the equation residual with the exact time derivative."""
    grid = default_grid(params) if grid is None else grid
    B, B1, Bt = _breather_parts(params, grid.nodes, t, rho)
    a, c2, c3 = params.coefficients
    Bxx = diff_tail(B1, grid, 2)
    r = 1j * a * Bt + c2 * Bxx + c3 * np.abs(B) ** 2 * B
    return float(np.max(np.abs(r)))


@dataclass(frozen=True)
class BreatherSpec:
    """Peregrine family member for a normalization, residual-checked on creation."""
    params: NlsParams
    tolerance: float = 1e-8

    def __post_init__(self):
        r = breather_residual(self.params)
        if r > self.tolerance:
            raise ValueError(f"breather residual {r:.3e} exceeds {self.tolerance:.1e}")

    def __call__(self, x, t: float, rho: float = 1.0):
        return peregrine(self.params, x, t, rho)

    def state(self, grid: LineGrid | None = None, T: float = 0.0, **kw) -> NlsState:
        return peregrine_state(self.params, grid, T, **kw)


# -- residual and time stepping ------------------------------------------------

def _residual_from(params, state: NlsState, b1_plus, b1_minus, dT) -> float:
    a, c2, c3 = params.coefficients
    grid = state.grid
    B0 = state.background()
    B1 = state.B1.values
    B1_T = (b1_plus - b1_minus) / (2 * dT)
    B1_xx = diff_tail(B1, grid, 2)
    B = B0 + B1
    # |B|^2 B - rho^2 B0 expanded so the background balance cancels exactly
    dm = 2 * (np.conj(B0) * B1).real + np.abs(B1) ** 2
    r = 1j * a * B1_T + c2 * B1_xx + c3 * (dm * B + state.rho ** 2 * B1)
    return float(np.max(np.abs(r)))


def nls_residual(params: NlsParams, state: NlsState, dT: float = 1e-4) -> float:
    """Sup norm of the governing equation with a centred difference in T."""
    if not 0 < dT <= 1e-2:
        raise ValueError("dT must lie in (0, 1e-2]")
    if state.rho == 0 and not np.any(state.B1.values):
        return 0.0
    x = state.grid.nodes
    if state.exact is not None:
        def pert(T):
            return state.exact(x, T) - state.background(T)
        plus, minus = pert(state.T + dT), pert(state.T - dT)
    else:
        plus = evolve(params, state, dT, 1).B1.values
        minus = evolve(params, state, -dT, 1).B1.values
    return _residual_from(params, state, plus, minus, dT)


@numba.njit(cache=True)
def _kick(w, rho, tau):
    """Exact flow of i a w_T = -c3 (|rho+w|^2 - rho^2)(rho + w); tau = c3 dt / a."""
    big = 0.0
    for i in range(w.shape[0]):
        v = w[i]
        r = 2 * rho * v.real + v.real * v.real + v.imag * v.imag
        th = tau * r
        s2 = np.sin(0.5 * th)
        em = complex(-2.0 * s2 * s2, np.sin(th))
        v = v + (v + rho) * em
        w[i] = v
        m = v.real * v.real + v.imag * v.imag
        if m > big:
            big = m
    return np.sqrt(big)


_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = 1.0 - 2.0 * _W1


def evolve(params: NlsParams, state: NlsState, dT_total: float, n_steps: int,
           allow_long: bool = False) -> NlsState:
    """Split-step evolution: Strang steps composed by the triple jump.

    The background phase is removed exactly (rotating frame), the dispersive
    part is integrated in spectrum space, and the nonlinear part is solved
    exactly pointwise since it preserves ``|rho + w|``.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if state.params != params:
        raise ValueError("state normalization differs from params")
    T1 = state.T + dT_total
    if not allow_long and (abs(T1) > T_WINDOW or abs(state.T) > T_WINDOW):
        raise ValueError(f"evolution window |T| <= {T_WINDOW} exceeded; "
                         "pass allow_long=True to override")
    a, c2, c3 = params.coefficients
    grid = state.grid
    rho, mu = state.rho, state.mu
    dt = dT_total / n_steps
    xi2 = grid.frequencies ** 2
    w = np.array(state.B1.values * np.exp(-1j * mu * state.T), dtype=np.complex128)
    lin = {s: np.exp(-1j * c2 * xi2 * s * dt / a) for s in (_W1, _W0)}
    workers = n_workers()
    for _ in range(n_steps):
        for s in (_W1, _W0, _W1):
            _kick(w, rho, c3 * s * dt / (2 * a))
            w = sfft.ifft(lin[s] * sfft.fft(w, workers=workers), workers=workers)
            top = _kick(w, rho, c3 * s * dt / (2 * a))
        if not np.isfinite(top) or top > BLOWUP:
            raise StepBlowup(f"|B1| reached {top:.3e}")
    B1 = ComplexField(grid, w * np.exp(1j * mu * T1))
    return replace(state, T=T1, B1=B1, exact=state.exact)


# -- packet rescaling ---------------------------------------------------------

def scale_to_packet_frame(state: NlsState, k: float) -> NlsState:
    """U(X,T) = 2/sqrt(k^{5/2}) B(sqrt(8 k^{3/2}) X, T)."""
    if state.params.normalization != "standard":
        raise ValueError("input must use the standard normalization")
    d, c = dilation(k), amplitude_factor(k)
    p = NlsParams.scaled(k)
    grid = LineGrid(state.grid.n_points, state.grid.half_width / d)
    exact = None
    if state.exact is not None:
        ex = state.exact
        exact = lambda X, T: c * ex(d * np.asarray(X), T)
    return NlsState(p, state.T, c * state.rho, state.mu,
                    ComplexField(grid, c * state.B1.values), state.decay_tol, exact)


def scale_from_packet_frame(state: NlsState) -> NlsState:
    """Algebraic inverse of :func:`scale_to_packet_frame`."""
    if state.params.normalization != "scaled":
        raise ValueError("input must use the scaled normalization")
    k = state.params.k
    d, c = dilation(k), amplitude_factor(k)
    grid = LineGrid(state.grid.n_points, state.grid.half_width * d)
    exact = None
    if state.exact is not None:
        ex = state.exact
        exact = lambda x, T: ex(np.asarray(x) / d, T) / c
    return NlsState(NlsParams.standard(), state.T, state.rho / c, state.mu,
                    ComplexField(grid, state.B1.values / c), state.decay_tol, exact)


def state_to_csv(state: NlsState, path) -> None:
    """Snapshot of the full field B0 + B1 as rows (x, re, im, modulus)."""
    B = state.total().values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "re", "im", "modulus"])
        for row in zip(state.grid.nodes, B.real, B.imag, np.abs(B)):
            w.writerow([f"{v:.17g}" for v in row])

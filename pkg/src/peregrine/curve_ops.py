"""Singular integral operators attached to a curve.

Every transform is evaluated with the periodic cotangent kernel of the grid's
box, ``(1/(iP)) zeta_b cot(pi (zeta(a) - zeta(b)) / P)``, and the
alternating-point trapezoid rule.  On a ``PeriodicGrid`` this is the periodic
transform of the curve itself.  On a ``LineGrid`` the box ``[-L, L)`` is the
period: the cotangent kernel sums the Cauchy kernel over all translates by
``2L``, so a periodic background whose period divides ``2L`` is summed
exactly (no truncation of its oscillatory tail), while the decaying part only
picks up image contributions bounded by its value at the edge.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import ChordArcViolation, DecayViolation, NoConvergence
from .spectral_core import (DECAY_TOL, ComplexField, Grid, LineGrid, PeriodicGrid,
                            check_decay, diff, edge_ratio)

CHORD_ARC_MIN = 1e-3


@dataclass(frozen=True)
class BackgroundSplit:
    """Periodic parts of ``zeta - alpha`` and of ``f`` sampled on the line nodes."""
    period: float
    zeta0: np.ndarray
    f0: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class Curve:
    grid: Grid
    zeta: np.ndarray
    zeta_alpha: np.ndarray
    background: BackgroundSplit | None = field(default=None)

    def __post_init__(self):
        for name in ("zeta", "zeta_alpha"):
            v = np.array(getattr(self, name), dtype=np.complex128)
            if v.shape != (self.grid.n_points,) or not np.all(np.isfinite(v)):
                raise ValueError(f"bad {name} samples")
            v.flags.writeable = False
            object.__setattr__(self, name, v)

    @classmethod
    def from_samples(cls, grid: Grid, zeta, zeta_alpha=None,
                     background: BackgroundSplit | None = None) -> "Curve":
        zeta = np.asarray(zeta, dtype=np.complex128)
        if zeta_alpha is None:
            zeta_alpha = 1.0 + diff(zeta - grid.nodes, grid)
        return cls(grid, zeta, zeta_alpha, background)

    @classmethod
    def flat(cls, grid: Grid) -> "Curve":
        a = grid.nodes.astype(np.complex128)
        return cls(grid, a, np.ones_like(a))

    @property
    def period(self) -> float:
        return self.grid.box_length

    @cached_property
    def chord_arc(self) -> tuple[float, float]:
        lo, hi = _kernels.chord_arc_bounds(self.zeta, np.asarray(self.grid.nodes),
                                           self.period)
        return float(lo), float(hi)

    def validate(self) -> None:
        lo, _ = self.chord_arc
        if not lo > CHORD_ARC_MIN:
            raise ChordArcViolation(f"chord-arc lower bound {lo:.3e}")

    @cached_property
    def _E(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.zeta / self.period)

    @property
    def as_field(self) -> ComplexField:
        return ComplexField(self.grid, self.zeta)


def _as_values(f, grid: Grid) -> np.ndarray:
    if isinstance(f, ComplexField):
        if f.grid != grid:
            raise ValueError("field and curve live on different grids")
        return f.values
    v = np.asarray(f, dtype=np.complex128)
    if v.shape != (grid.n_points,):
        raise ValueError("sample count does not match the curve grid")
    return v


def transform(curve: Curve, f) -> np.ndarray:
    """Raw box transform of samples ``f`` (no decay bookkeeping)."""
    curve.validate()
    v = _as_values(f, curve.grid)
    h = curve.grid.spacing
    out = _kernels.cot_sum(curve._E, curve.zeta_alpha * v)
    return out * (2 * h / curve.period)


def periodic_hilbert(curve: Curve, f) -> ComplexField:
    if not isinstance(curve.grid, PeriodicGrid):
        raise TypeError("periodic_hilbert needs a curve on a PeriodicGrid")
    return ComplexField(curve.grid, transform(curve, f))


def _check_split(curve: Curve, values: np.ndarray, split: BackgroundSplit | None,
                 decay_tol: float) -> None:
    grid = curve.grid
    if split is None:
        split = curve.background
        f0 = None
    else:
        f0 = split.f0
    zeta_rest = curve.zeta - grid.nodes
    if split is not None:
        m = grid.box_length / split.period
        if abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise DecayViolation("background period does not divide the box length")
        zeta_rest = zeta_rest - split.zeta0
    f_rest = values if f0 is None else values - f0
    zscale = float(np.max(np.abs(curve.zeta - grid.nodes)))
    check_decay(zeta_rest, decay_tol, "curve perturbation", zscale)
    check_decay(f_rest, decay_tol, "transform input", float(np.max(np.abs(values))))


def cauchy_hilbert(curve: Curve, f, background_split: BackgroundSplit | None = None,
                   decay_tol: float = DECAY_TOL) -> ComplexField:
    """Line transform ``(1/(pi i)) p.v. int zeta_b f / (zeta(a) - zeta(b)) db``.

    Inputs must decay at the truncation edge, or a background split must say
    which periodic parts of the curve and of ``f`` carry the far field.
    """
    if not isinstance(curve.grid, LineGrid):
        raise TypeError("cauchy_hilbert needs a curve on a LineGrid")
    v = _as_values(f, curve.grid)
    _check_split(curve, v, background_split, decay_tol)
    return ComplexField(curve.grid, transform(curve, v))


def hilbert(curve: Curve, f, background_split: BackgroundSplit | None = None,
            decay_tol: float | None = DECAY_TOL) -> ComplexField:
    """Dispatch to the periodic or line transform; ``decay_tol=None`` skips checks."""
    if isinstance(curve.grid, PeriodicGrid) or decay_tol is None:
        return ComplexField(curve.grid, transform(curve, f))
    return cauchy_hilbert(curve, f, background_split, decay_tol)


def holomorphicity_residual(curve: Curve, f, side: str = "below",
                            background_split: BackgroundSplit | None = None,
                            decay_tol: float | None = DECAY_TOL) -> float:
    """Sup norm of (I - H)f (side below) or (I + H)f (side above)."""
    if side not in ("below", "above"):
        raise ValueError("side must be 'below' or 'above'")
    v = _as_values(f, curve.grid)
    Hf = hilbert(curve, v, background_split, decay_tol).values
    r = v - Hf if side == "below" else v + Hf
    return float(np.max(np.abs(r)))


def _layer_weights(curve: Curve, variant: str):
    za = curve.zeta_alpha
    if variant == "K":
        return np.ones_like(za), za
    if variant == "K_star":
        return -za / np.abs(za), np.abs(za).astype(np.complex128)
    raise ValueError("variant must be 'K' or 'K_star'")


def double_layer(curve: Curve, f, variant: str = "K") -> ComplexField:
    """Real part of the transform kernel applied to real ``f``.

    ``K_star`` is the adjoint of ``K`` for the arclength-weighted pairing.
    """
    curve.validate()
    v = _as_values(f, curve.grid)
    if np.max(np.abs(v.imag)) > 1e-12 * max(1.0, np.max(np.abs(v))):
        raise ValueError("double_layer needs a real field")
    u, w = _layer_weights(curve, variant)
    out = _kernels.real_cot_sum(curve._E, u, w, np.ascontiguousarray(v.real))
    return ComplexField(curve.grid, out * (2 * curve.grid.spacing / curve.period))


def _layer_apply(curve, u, w, x):
    return _kernels.real_cot_sum(curve._E, u, w, x) * (2 * curve.grid.spacing / curve.period)


def estimate_layer_norm(curve: Curve, variant: str = "K", steps: int = 5) -> float:
    """Power-iteration estimate of the sup-norm gain of K."""
    u, w = _layer_weights(curve, variant)
    a = curve.grid.nodes
    x = 1.0 + 0.5 * np.cos(2 * np.pi * a / curve.period) + 0.25 * np.sin(3 * np.pi * a / curve.period)
    est = 0.0
    for _ in range(steps):
        nx = np.max(np.abs(x))
        if nx == 0.0:
            return 0.0
        y = _layer_apply(curve, u, w, x / nx)
        est = float(np.max(np.abs(y)))
        x = y
    return est


def resolvent_solve(curve: Curve, g, variant: str = "K", sign: int = -1,
                    tol: float = 1e-12, max_iter: int = 200,
                    norm_threshold: float = 0.9) -> ComplexField:
    """Solve (I + sign*K) f = g for real f by Neumann iteration.

    ``sign=-1`` is the usual (I - K); ``sign=+1`` solves (I + K).
    """
    curve.validate()
    v = _as_values(g, curve.grid)
    gr = np.ascontiguousarray(v.real)
    scale = np.max(np.abs(gr))
    if scale == 0.0:
        return ComplexField(curve.grid, np.zeros_like(gr))
    knorm = estimate_layer_norm(curve, variant)
    if knorm >= norm_threshold:
        raise NoConvergence(f"layer operator norm estimate {knorm:.3f} too large "
                            "for Neumann iteration")
    u, w = _layer_weights(curve, variant)
    f = gr.copy()
    prev = np.inf
    for _ in range(max_iter):
        Kf = _layer_apply(curve, u, w, f)
        res = np.max(np.abs(f + sign * Kf - gr)) / scale
        if res <= tol:
            return ComplexField(curve.grid, f)
        if res >= prev and res > 1e3 * tol:
            raise NoConvergence(f"resolvent iteration stalled at residual {res:.3e}")
        prev = min(prev, res)
        f = gr - sign * Kf
    raise NoConvergence(f"resolvent iteration hit the cap with residual {res:.3e}")


def quotient_square_integral(curve: Curve, D, w) -> np.ndarray:
    """p.v. sum for ``int ((D(a)-D(b)) / (zeta(a)-zeta(b)))^2 w(b) db``.

    The box version replaces ``1/(zeta(a)-zeta(b))^2`` with its periodic sum
    ``(pi/P)^2 / sin^2(pi (zeta(a)-zeta(b))/P)``.
    """
    curve.validate()
    Dv = _as_values(D, curve.grid)
    wv = _as_values(w, curve.grid)
    P = curve.period
    s = _kernels.quotient_square_sum(curve._E, Dv, wv)
    return s * (2 * curve.grid.spacing) * (np.pi / P) ** 2


def commutator(curve: Curve, f, g) -> np.ndarray:
    """[f, H] g = f H g - H(f g) on raw samples."""
    fv = _as_values(f, curve.grid)
    gv = _as_values(g, curve.grid)
    return fv * transform(curve, gv) - transform(curve, fv * gv)


__all__ = [
    "BackgroundSplit", "Curve", "periodic_hilbert", "cauchy_hilbert", "hilbert",
    "holomorphicity_residual", "double_layer", "resolvent_solve", "transform",
    "estimate_layer_norm", "quotient_square_integral", "commutator", "edge_ratio",
]

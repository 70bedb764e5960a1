"""Fixed-point constructions of compatible initial data and their checks.

The periodic curve solves ``conj(omega) - alpha = c e^{-i k omega}``; the
localized correction ``xi_1`` makes ``conj(zeta_0) - alpha`` holomorphic below
the composite curve ``zeta_0 = omega_0 + xi_1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve_ops import BackgroundSplit, Curve, transform
from .errors import DecayViolation, NoConvergence
from .spectral_core import (ComplexField, LineGrid, PeriodicGrid, _fft, _ifft, diff,
                            edge_ratio, periodize, sobolev_norm)

MAX_ITER = 200
TOL = 1e-12
COMPAT_TOL = 1e-6
NEGATIVE_CONTROL_SEED = 20240607


@dataclass
class FixedPointTrace:
    iterates: list = field(default_factory=list)
    converged: bool = False
    final_increment: float = float("nan")
    n_iter: int = 0

    def ratios(self) -> np.ndarray:
        inc = np.asarray(self.iterates, dtype=float)
        if inc.size < 2:
            return np.empty(0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return inc[1:] / inc[:-1]

    def to_dict(self) -> dict:
        return {"increments": [float(v) for v in self.iterates],
                "converged": self.converged, "final_increment": self.final_increment,
                "n_iter": self.n_iter}


def iterate_periodic(c: complex, k: float = 1, tol: float = TOL, n_points: int = 64,
                     max_iter: int = MAX_ITER,
                     start: Curve | None = None) -> tuple[Curve, FixedPointTrace]:
    """Picard iteration ``conj(omega_{n+1}) = alpha + c e^{-i k omega_n}`` from omega_0 = alpha.

    The curve is sampled over one carrier period ``2 pi / k``; ``start``
    replaces the initial guess (it must use the same sampling).
    """
    if not k > 0:
        raise ValueError("k must be positive")
    if abs(c) > 0.2 / k + 1e-15:
        raise ValueError("|c| must not exceed 0.2/k (contraction regime)")
    grid = PeriodicGrid(n_points, 2 * np.pi / k)
    a = grid.nodes
    omega = a.astype(np.complex128)
    if start is not None:
        if start.grid != grid:
            raise ValueError("start curve uses a different sampling")
        omega = np.array(start.zeta, dtype=np.complex128)
    trace = FixedPointTrace()
    for n in range(1, max_iter + 1):
        new = a + np.conj(c * np.exp(-1j * k * omega))
        inc = float(np.max(np.abs(new - omega)))
        omega = new
        trace.iterates.append(inc)
        trace.n_iter = n
        trace.final_increment = inc
        if inc <= tol:
            trace.converged = True
            break
    if not trace.converged:
        raise NoConvergence(f"periodic iteration stalled at increment {inc:.3e}")
    return Curve.from_samples(grid, omega), trace


def periodic_defect(curve: Curve, c: complex, k: float = 1) -> float:
    """max |conj(omega) - alpha - c e^{-i k omega}|."""
    a = curve.grid.nodes
    return float(np.max(np.abs(np.conj(curve.zeta) - a - c * np.exp(-1j * k * curve.zeta))))


def tile_curve(omega0: Curve, grid: LineGrid) -> Curve:
    """Periodic curve repeated across a line grid, with its background split."""
    pg = omega0.grid
    xi0 = periodize(ComplexField(pg, omega0.zeta - pg.nodes), grid).values
    za = periodize(ComplexField(pg, omega0.zeta_alpha), grid).values
    split = BackgroundSplit(pg.period, xi0)
    return Curve(grid, grid.nodes + xi0, za, split)


def _curve_with(omega_line: Curve, g: np.ndarray) -> Curve:
    grid = omega_line.grid
    z = omega_line.zeta + g
    za = omega_line.zeta_alpha + diff(g, grid)
    return Curve(grid, z, za, omega_line.background)


def smoothing_filter(grid) -> np.ndarray:
    """Exponential multiplier exp(-36 (|xi|/xi_max)^36) on the grid frequencies.

    The map ``g -> H_{omega0+g}`` loses a derivative, so without it grid-scale
    roundoff is amplified once the resolved content has converged.
    """
    xi = np.abs(grid.frequencies)
    return np.exp(-36.0 * (xi / xi.max()) ** 36)


def iterate_localized(omega0: Curve, xi1_tilde: ComplexField, xi0: ComplexField | None = None,
                      tol: float = TOL, max_iter: int = MAX_ITER,
                      decay_tol: float = 1e-3) -> tuple[ComplexField, FixedPointTrace]:
    """Solve conj(g) = 1/2 (I + H_z) conj(xi1~) + 1/2 (H_z - H_omega0) conj(xi0), z = omega0 + g.

    ``omega0`` may be the periodic curve or its tiling on the line grid of
    ``xi1_tilde``.  Starts from g = 0.
    """
    grid = xi1_tilde.grid
    if not isinstance(grid, LineGrid):
        raise TypeError("xi1_tilde must live on a LineGrid")
    w = omega0 if isinstance(omega0.grid, LineGrid) else tile_curve(omega0, grid)
    if xi0 is None:
        xi0 = ComplexField(grid, w.zeta - grid.nodes)
    x1b = np.conj(xi1_tilde.values)
    x0b = np.conj(xi0.values)
    H_w_x0 = transform(w, x0b)
    scale = max(float(np.max(np.abs(xi1_tilde.values))), 1e-300)
    filt = smoothing_filter(grid)
    g = np.zeros(grid.n_points, dtype=np.complex128)
    trace = FixedPointTrace()
    for n in range(1, max_iter + 1):
        z = _curve_with(w, g)
        gbar = 0.5 * (x1b + transform(z, x1b)) + 0.5 * (transform(z, x0b) - H_w_x0)
        new = _ifft(filt * _fft(np.conj(gbar)))
        inc = float(np.max(np.abs(new - g)))
        g = new
        trace.iterates.append(inc)
        trace.n_iter = n
        trace.final_increment = inc
        if edge_ratio(g, scale=scale) > decay_tol:
            raise DecayViolation("localized iterate lost decay at the box edge")
        if inc <= tol * max(1.0, scale):
            trace.converged = True
            break
        if n > 3 and inc > 10 * trace.iterates[0]:
            raise NoConvergence(f"localized iteration diverging (increment {inc:.3e})")
    if not trace.converged:
        raise NoConvergence(f"localized iteration stalled at increment {inc:.3e}")
    return ComplexField(grid, g), trace


def composite_curve(omega0: Curve, xi1: ComplexField) -> Curve:
    grid = xi1.grid
    w = omega0 if isinstance(omega0.grid, LineGrid) else tile_curve(omega0, grid)
    return _curve_with(w, xi1.values)


def holomorphic_part(curve: Curve, f) -> np.ndarray:
    """Projection onto boundary values holomorphic below: 1/2 H (I + H) f.

    On the box ``H^2 = I - m`` with ``m`` the d-zeta mean, so ``(I - H)`` of the
    result vanishes identically (up to quadrature error).
    """
    v = np.asarray(f.values if isinstance(f, ComplexField) else f, dtype=np.complex128)
    u = v + transform(curve, v)
    return 0.5 * transform(curve, u)


def negative_control_bump(grid: LineGrid, k: float, amplitude: float = 0.05,
                          seed: int = NEGATIVE_CONTROL_SEED) -> np.ndarray:
    """Seeded Gaussian bump times e^{i k alpha}: not holomorphic below when conjugated."""
    rng = np.random.default_rng(seed)
    center = rng.uniform(-0.1, 0.1) * grid.half_width
    width = 2 * np.pi / k * rng.uniform(2.0, 4.0)
    a = grid.nodes
    return amplitude * np.exp(1j * k * a) * np.exp(-((a - center) / width) ** 2)


@dataclass
class CompatibilityCheck:
    name: str
    value: float
    tolerance: float | None

    @property
    def passed(self) -> bool:
        return True if self.tolerance is None else bool(self.value <= self.tolerance)

    def to_dict(self) -> dict:
        return {"value": self.value, "tolerance": self.tolerance, "pass": self.passed}


def check_compatibility(zeta0: Curve, v0, w0, *, A=None, omega0: Curve | None = None,
                        v0_periodic=None, w0_periodic=None, A0=None, reference=None,
                        s: float = 4.0, tol: float = COMPAT_TOL) -> dict:
    """Residual norms of the initial-data conditions (I-1)..(I-5).

    Only ``zeta0``, ``v0`` and ``w0`` are required; the periodic parts feed
    (I-2)/(I-4), ``reference`` (a packet) feeds the (I-3) distances, and ``A``
    (from ``recover_A``) feeds (I-5).
    """
    from .verify import A_rhs, recover_A

    def vals(f):
        return np.asarray(f.values if isinstance(f, ComplexField) else f, dtype=np.complex128)

    g = zeta0.grid
    v = vals(v0)
    w2 = vals(w0)
    out: dict[str, CompatibilityCheck] = {}

    def add(name, value, t=tol):
        out[name] = CompatibilityCheck(name, float(value), t)

    zb = np.conj(zeta0.zeta - g.nodes)
    add("I-1 position", np.max(np.abs(zb - transform(zeta0, zb))))
    vb = np.conj(v)
    add("I-1 velocity", np.max(np.abs(vb - transform(zeta0, vb))))

    if omega0 is not None:
        pg = omega0.grid
        ob = np.conj(omega0.zeta - pg.nodes)
        add("I-2 position", np.max(np.abs(ob - transform(omega0, ob))))
        if v0_periodic is not None:
            pv = np.conj(vals(v0_periodic))
            add("I-2 velocity", np.max(np.abs(pv - transform(omega0, pv))))
            if w0_periodic is not None:
                A0v = recover_A(omega0, vals(v0_periodic), vals(w0_periodic)).values if A0 is None else vals(A0)
                lhs = (A0v - 1) - transform(omega0, A0v - 1)
                add("I-4", np.max(np.abs(lhs - A_rhs(omega0, vals(v0_periodic), vals(w0_periodic)))))

    if reference is not None:
        ref_curve = reference.zeta_tilde
        xi1_ref = reference.xi1_tilde.values
        if omega0 is not None:
            wl = tile_curve(omega0, g)
            d_omega = np.max(np.abs(wl.zeta - g.nodes - reference.xi0_tilde.values))
            add("I-3 periodic distance", d_omega, None)
            xi1 = zeta0.zeta - wl.zeta
            d1 = sobolev_norm(ComplexField(g, diff(xi1 - xi1_ref, g)), s)
            add("I-3 localized distance", d1, None)
        add("I-3 velocity distance",
            sobolev_norm(ComplexField(g, v - reference.Dt_zeta.values), s + 0.5), None)
        del ref_curve

    if A is not None:
        Av = vals(A)
        lhs = (Av - 1) - transform(zeta0, Av - 1)
        add("I-5", np.max(np.abs(lhs - A_rhs(zeta0, v, w2))), None)
    return out


def build_initial_data(packet, n_periodic: int | None = None, tol: float = TOL,
                       control: bool = False, max_iter: int = MAX_ITER) -> dict:
    """Compatible data (zeta0, v0, w0) from a packet at t = 0.

    The periodic curve uses ``c = eps conj(B_0(0))`` so that its first
    harmonic matches the packet; ``v0`` is the holomorphic projection of the
    packet velocity and ``w0`` is the packet acceleration.  ``control=True``
    adds the seeded non-holomorphic bump to ``conj(v0)``.
    """
    p = packet.params
    grid = packet.grid
    from .spectral_core import periods_in_box
    _, n_per = periods_in_box(grid, p.carrier_period)
    c = p.epsilon * np.conj(packet.B.background())
    omega0, trace_p = iterate_periodic(c, p.k, tol, n_periodic or n_per, max_iter)
    xi1, trace_l = iterate_localized(omega0, packet.xi1_tilde, tol=tol, max_iter=max_iter)
    zeta0 = composite_curve(omega0, xi1)
    vbar = holomorphic_part(zeta0, np.conj(packet.Dt_zeta.values))
    if control:
        vbar = vbar + negative_control_bump(grid, p.k)
    w0 = packet.Dt2_zeta.values
    # periodic velocity: background-only part of the packet velocity, projected on omega0
    from .spectral_core import xs_split
    v_per, _ = xs_split(packet.Dt_zeta, p.carrier_period, tol=np.inf)
    w_per, _ = xs_split(packet.Dt2_zeta, p.carrier_period, tol=np.inf)
    if v_per.grid.n_points != omega0.grid.n_points:
        raise ValueError("periodic grid does not match the packet sampling")
    vper_bar = holomorphic_part(omega0, np.conj(v_per.values))
    return {"omega0": omega0, "xi1": xi1, "zeta0": zeta0, "v0": np.conj(vbar), "w0": w0,
            "v0_periodic": np.conj(vper_bar), "w0_periodic": w_per.values,
            "trace_periodic": trace_p, "trace_localized": trace_l}

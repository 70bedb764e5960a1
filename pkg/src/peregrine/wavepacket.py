"""Third-order modulated wave packet built from an NLS envelope.

The interface is assembled as a sum of envelope fields times carrier
harmonics ``e^{i n phi}`` (n = -1, 0, 1).  Envelopes live on the slow grid
``X = eps * alpha`` and carry their first two slow-time derivatives (obtained
from the NLS itself), so every fast-time derivative is analytic:

    d/dt     -> i n gamma + (eps / (2 gamma)) d/dX + eps^2 d/dT
    d/dalpha -> i n k + eps d/dX
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erf

from .curve_ops import BackgroundSplit, Curve
from .errors import NormalizationMismatch
from .nls import (NlsParams, NlsState, _breather_parts, background_state, evolve,
                  state_from_profile)
from .spectral_core import (ComplexField, LineGrid, PeriodicGrid, _fft, _ifft, diff,
                            hilbert_values, periods_in_box)

EPS_MAX = 0.25
# H0 of a zero-mass envelope still decays only algebraically, so packet
# remainders are checked at a looser edge level than plain NLS fields.
PACKET_DECAY_TOL = 1e-3


@dataclass(frozen=True)
class PacketParams:
    epsilon: float
    k: float = 1.0
    t: float = 0.0
    gamma: float = field(init=False)

    def __post_init__(self):
        if not 0 <= self.epsilon <= EPS_MAX:
            raise ValueError(f"epsilon must lie in [0, {EPS_MAX}]")
        if not self.k > 0:
            raise ValueError("k must be positive")
        object.__setattr__(self, "gamma", float(np.sqrt(self.k)))

    @property
    def carrier_period(self) -> float:
        return 2 * np.pi / self.k

    @property
    def T(self) -> float:
        return self.epsilon ** 2 * self.t


def slow_vars(params: PacketParams, alpha):
    """(X, T, phi) for the packet frame moving at the group velocity."""
    e, g = params.epsilon, params.gamma
    X = e * (np.asarray(alpha) + params.t / (2 * g))
    return X, e * e * params.t, params.k * np.asarray(alpha) + g * params.t


# -- grids --------------------------------------------------------------------

def packet_grid(params: PacketParams, half_width_X: float = 10.0,
                points_per_period: int = 32) -> LineGrid:
    """Slow-variable grid whose alpha image holds whole carrier periods."""
    if params.epsilon == 0:
        raise ValueError("the slow grid needs epsilon > 0")
    if points_per_period < 8 or points_per_period % 2:
        raise ValueError("points_per_period must be even and >= 8")
    m = int(np.ceil(half_width_X * params.k / (params.epsilon * np.pi)))
    L_alpha = m * np.pi / params.k
    return LineGrid(m * points_per_period, params.epsilon * L_alpha)


def alpha_grid(params: PacketParams, xgrid: LineGrid) -> LineGrid:
    if params.epsilon == 0:
        return xgrid
    return LineGrid(xgrid.n_points, xgrid.half_width / params.epsilon)


# -- envelopes ----------------------------------------------------------------

def background_envelope(params: PacketParams, grid: LineGrid, rho: float = 1.0) -> NlsState:
    return background_state(NlsParams.scaled(params.k), grid, rho, params.T)


def bump_envelope(params: PacketParams, grid: LineGrid, amplitude: float = 0.5,
                  rho: float = 1.0) -> NlsState:
    """Real envelope ``rho sqrt(1 + h)`` with ``h = a (1 - 2X^2) e^{-X^2}``.

    ``h`` has zero integral and zero first moment, so ``|B|^2 - rho^2`` has
    zero mass and zero momentum.
    """
    X = grid.nodes
    h = amplitude * (1 - 2 * X * X) * np.exp(-X * X)
    if np.min(1 + h) <= 0:
        raise ValueError("bump amplitude too large")
    return state_from_profile(NlsParams.scaled(params.k), grid,
                              rho * (np.sqrt(1 + h) - 1), rho, params.T)


def smooth_window(X, center: float = 4.0, width: float = 1.0):
    """Even window equal to 1 near the origin and decaying like a Gaussian."""
    X = np.asarray(X)
    return 0.5 * (erf((X + center) / width) - erf((X - center) / width))


def peregrine_envelope(params: PacketParams, grid: LineGrid, shift: float = -0.5,
                       window: tuple[float, float] = (4.0, 1.0),
                       rho: float = 1.0) -> NlsState:
    """Scaled Peregrine profile (at slow time ``shift``) with a smooth far-field taper.

    The exact breather decays like ``1/X^2``; the taper makes the perturbation
    decay on a packet-sized box.  A small multiple of a Gaussian is added so
    that ``|B|^2 - |B_0|^2`` keeps the zero mass of the untapered breather.
    """
    p = NlsParams.scaled(params.k)
    X = grid.nodes
    _, b1, _ = _breather_parts(p, X, shift, rho)
    amp = rho * 2 / params.k ** 1.25
    mu = p.phase_rate(amp)
    b1 = b1 * np.exp(-1j * mu * shift) * smooth_window(X, *window)
    B0 = amp * np.exp(1j * mu * params.T)
    b1 = b1 * np.exp(1j * mu * params.T)
    g = np.exp(-X * X) * B0 / amp
    h = grid.spacing
    m0 = np.sum(np.abs(B0 + b1) ** 2 - amp ** 2) * h
    lin = 2 * np.sum((np.conj(B0 + b1) * g).real) * h
    quad = np.sum(np.abs(g) ** 2) * h
    disc = lin * lin - 4 * quad * m0
    if disc < 0:
        raise ValueError("mass correction has no real solution")
    delta = (-lin + np.sign(lin) * np.sqrt(disc)) / (2 * quad) if lin else 0.0
    return NlsState(p, params.T, amp, mu, ComplexField(grid, b1 + delta * g))


# -- slow-time jets -----------------------------------------------------------

class Jet:
    """An envelope and its slow-time derivatives ``(F, F_T, F_TT)``."""
    __slots__ = ("parts", "grid")

    def __init__(self, parts, grid: LineGrid):
        self.parts = tuple(np.asarray(p, dtype=np.complex128) for p in parts)
        self.grid = grid

    def _wrap(self, parts):
        return Jet(parts, self.grid)

    def __len__(self):
        return len(self.parts)

    def __add__(self, other):
        if isinstance(other, Jet):
            n = min(len(self), len(other))
            return self._wrap([self.parts[i] + other.parts[i] for i in range(n)])
        return self._wrap([self.parts[0] + other, *self.parts[1:]])

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self._wrap([other * p for p in self.parts])
        n = min(len(self), len(other))
        f, g = self.parts, other.parts
        out = [f[0] * g[0]]
        if n > 1:
            out.append(f[1] * g[0] + f[0] * g[1])
        if n > 2:
            out.append(f[2] * g[0] + 2 * f[1] * g[1] + f[0] * g[2])
        return self._wrap(out)

    __rmul__ = __mul__

    def conj(self):
        return self._wrap([p.conj() for p in self.parts])

    def dx(self):
        return self._wrap([diff(p, self.grid) for p in self.parts])

    def hilbert(self):
        return self._wrap([hilbert_values(p, self.grid) for p in self.parts])

    def shifted(self, s: float):
        """Translate every part by ``s`` in X (samples of F(X + s))."""
        if s == 0:
            return self
        sym = np.exp(1j * self.grid.frequencies * s)
        return self._wrap([_translate(p, sym) for p in self.parts])


def _translate(values, sym):
    c = 0.5 * (values[0] + values[-1])
    return c + _ifft(sym * _fft(values - c))


def envelope_jet(B: NlsState) -> Jet:
    """(B, B_T, B_TT) with time derivatives taken from the NLS."""
    a, c2, c3 = B.params.coefficients
    grid = B.grid
    Bv = B.total().values
    B1 = B.B1.values
    Bt = (1j / a) * (c2 * diff(B1, grid, 2) + c3 * np.abs(Bv) ** 2 * Bv)
    # the background part of B_T is constant in X, so its X-derivatives vanish
    Bt1 = Bt - 1j * B.mu * B.background()
    mod_t = 2 * (np.conj(Bv) * Bt).real
    Btt = (1j / a) * (c2 * diff(Bt1, grid, 2) + c3 * (mod_t * Bv + np.abs(Bv) ** 2 * Bt))
    return Jet([Bv, Bt, Btt], grid)


# -- assembly -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Term:
    coef: complex
    n: int
    F: Jet


def _dt(p: PacketParams, n: int, F: Jet) -> Jet:
    e, g = p.epsilon, p.gamma
    Fx = F.dx()
    parts = [1j * n * g * F.parts[i] + e / (2 * g) * Fx.parts[i] + e * e * F.parts[i + 1]
             for i in range(len(F) - 1)]
    return Jet(parts, F.grid)


def _da(p: PacketParams, n: int, F: Jet) -> Jet:
    return 1j * n * p.k * F + p.epsilon * F.dx()


def _sum(terms, carrier, op=None):
    out = 0j
    for t in terms:
        F = t.F if op is None else op(t.n, t.F)
        out = out + t.coef * F.parts[0] * carrier[t.n]
    return np.broadcast_to(out, carrier[0].shape).astype(np.complex128)


@dataclass(frozen=True, eq=False)
class WavePacket:
    params: PacketParams
    B: NlsState
    zeta_tilde: Curve
    b_tilde: ComplexField
    A_tilde: ComplexField
    Dt_zeta: ComplexField
    Dt2_zeta: ComplexField
    xi0_tilde: ComplexField
    xi1_tilde: ComplexField
    b0_tilde: ComplexField
    b1_tilde: ComplexField
    zeta_t: ComplexField = field(repr=False, default=None)
    zeta_tt: ComplexField = field(repr=False, default=None)

    @property
    def grid(self) -> LineGrid:
        return self.zeta_tilde.grid

    @property
    def alpha(self) -> np.ndarray:
        return self.grid.nodes

    def background_split(self, f0=None) -> BackgroundSplit:
        return BackgroundSplit(self.params.carrier_period, self.xi0_tilde.values, f0)

    def xi0_periodic(self) -> ComplexField:
        """One carrier period of the periodic part on a PeriodicGrid."""
        _, n_per = periods_in_box(self.grid, self.params.carrier_period)
        pg = PeriodicGrid(n_per, self.params.carrier_period)
        row = self.xi0_tilde.values[:n_per]
        return ComplexField(pg, np.roll(row, -(n_per // 2)))


def build_packet(params: PacketParams, B: NlsState) -> WavePacket:
    """Assemble the third-order packet, its transport data and the splits."""
    if B.params.normalization != "scaled" or not np.isclose(B.params.k, params.k,
                                                            rtol=0, atol=1e-14):
        raise NormalizationMismatch("envelope must solve the scaled NLS for this k")
    if abs(B.T - params.T) > 1e-12 * max(1.0, abs(params.T)):
        raise ValueError(f"envelope time {B.T} differs from eps^2 t = {params.T}")
    e, k, g = params.epsilon, params.k, params.gamma
    xgrid = B.grid
    agrid = alpha_grid(params, xgrid)
    alpha = agrid.nodes
    if e > 0:
        periods_in_box(agrid, params.carrier_period)
    _, _, phi = slow_vars(params, alpha)
    carrier = {n: np.exp(1j * n * phi) for n in (-1, 0, 1)}
    carrier[0] = np.ones_like(phi, dtype=np.complex128)

    Bj = envelope_jet(B).shifted(e * params.t / (2 * g) if e > 0 else 0.0)
    Bc = Bj.conj()
    rho2 = B.rho ** 2
    mod = Bj * Bc
    dmod = mod - rho2
    BX = Bj.dx()
    BcBX = Bc * BX
    ik = 1j * k
    z = [
        _Term(e, 1, Bj),
        _Term(e ** 2, 0, (ik / 2) * (dmod + dmod.hilbert()) + ik * rho2),
        _Term(e ** 3, -1, (-0.5 * k * k) * (Bc * mod)),
        _Term(e ** 3, 0, 0.5 * (BcBX + BcBX.hilbert())),
    ]
    q = BcBX - 0.5 * (Bj * BX.conj())
    bt = [
        _Term(e ** 2, 0, (-g * k) * mod),
        _Term(e ** 3, 0, (1j * g) * (q + q.hilbert())),
        _Term(e ** 3, -1, (-2j * g * k * k) * (Bc * mod)),
    ]
    dt = lambda n, F: _dt(params, n, F)
    da = lambda n, F: _da(params, n, F)

    zeta = alpha + _sum(z, carrier)
    z_a = 1 + _sum(z, carrier, da)
    z_aa = _sum(z, carrier, lambda n, F: da(n, da(n, F)))
    z_t = _sum(z, carrier, dt)
    z_tt = _sum(z, carrier, lambda n, F: dt(n, dt(n, F)))
    z_ta = _sum(z, carrier, lambda n, F: da(n, dt(n, F)))
    b = _sum(bt, carrier).real
    b_t = _sum(bt, carrier, dt).real
    b_a = _sum(bt, carrier, da).real

    Dt = z_t + b * z_a
    Dt2 = z_tt + b_t * z_a + 2 * b * z_ta + b * b_a * z_a + b * b * z_aa

    B0 = B.background()
    xi0 = (e * B0 * carrier[1] + e ** 2 * ik * rho2
           - 0.5 * e ** 3 * k * k * np.conj(B0) * rho2 * carrier[-1])
    xi0 = np.broadcast_to(xi0, alpha.shape).astype(np.complex128)
    b0 = (-e ** 2 * g * k * rho2
          + e ** 3 * (-2j * g * k * k * np.conj(B0) * rho2 * carrier[-1]).real)
    b0 = np.broadcast_to(b0, alpha.shape).astype(float)

    split = BackgroundSplit(params.carrier_period, xi0)
    curve = Curve(agrid, zeta, z_a, split)
    F = lambda v: ComplexField(agrid, v)
    return WavePacket(params, B, curve, F(b), F(np.ones_like(b)), F(Dt), F(Dt2),
                      F(xi0), F(zeta - alpha - xi0), F(b0), F(b - b0), F(z_t), F(z_tt))


def packet_at_shifted_time(params: PacketParams, B: NlsState, dt: float,
                           n_steps: int = 1) -> WavePacket:
    """Packet at fast time ``t + dt``; the envelope is advanced by ``eps^2 dt``."""
    if abs(dt) > 1e-3:
        raise ValueError("|dt| must not exceed 1e-3")
    if dt == 0:
        return build_packet(params, B)
    Bn = evolve(B.params, B, params.epsilon ** 2 * dt, n_steps, allow_long=True)
    return build_packet(replace(params, t=params.t + dt), Bn)


def a3_correction(packet: WavePacket) -> ComplexField:
    """The real third-order pressure term ``eps^3 (-i k/2) H0 d_X |B|^2``.

    It balances the only non-oscillating third-order term of the momentum
    equation; the packet itself keeps ``A = 1``.
    """
    p = packet.params
    Bj = envelope_jet(packet.B).shifted(p.epsilon * p.t / (2 * p.gamma) if p.epsilon else 0.0)
    mod = (Bj * Bj.conj()).parts[0] - packet.B.rho ** 2
    h = hilbert_values(diff(mod, packet.B.grid), packet.B.grid)
    return ComplexField(packet.grid, (p.epsilon ** 3 * (-0.5j * p.k) * h).real)


def packet_to_csv(packet: WavePacket, path) -> None:
    z = packet.zeta_tilde.zeta
    D = packet.Dt_zeta.values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "re_zeta", "im_zeta", "b", "re_Dt_zeta", "im_Dt_zeta"])
        for row in zip(packet.alpha, z.real, z.imag, packet.b_tilde.real, D.real, D.imag):
            w.writerow([f"{v:.17g}" for v in row])

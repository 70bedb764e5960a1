"""Quick closed-form checks for every module, run by ``peregrine self-test``."""
from __future__ import annotations

import numpy as np

from .curve_ops import (Curve, double_layer, holomorphicity_residual, periodic_hilbert,
                        resolvent_solve)
from .initdata import check_compatibility, iterate_localized, iterate_periodic
from .nls import (NlsParams, background_state, evolve, nls_residual, scale_to_packet_frame,
                  state_from_profile)
from .spectral_core import (ComplexField, LineGrid, PeriodicGrid, dft, flat_hilbert,
                            sobolev_norm, spectral_derivative, xs_norm, xs_split)
from .verify import (energy_e0, eval_G, fit_slope, recover_A, recover_b, ww_residual)
from .wavepacket import (PacketParams, background_envelope, build_packet, packet_grid,
                         packet_at_shifted_time, slow_vars)

TOL = 1e-10


def _torus(n=32):
    g = PeriodicGrid(n)
    return g, g.nodes


def _spectral_core():
    g, a = _torus()
    out = {}
    c = dft(ComplexField(g, np.exp(1j * a))).coefficients
    out["dft e^{ia}"] = abs(c[1] - 1) + np.max(np.abs(np.delete(c, 1)))
    c = dft(ComplexField(g, np.ones_like(a))).coefficients
    out["dft 1"] = abs(c[0] - 1) + np.max(np.abs(c[1:]))
    d = spectral_derivative(ComplexField(g, np.exp(3j * a))).values
    out["derivative e^{3ia}"] = np.max(np.abs(d - 3j * np.exp(3j * a)))
    out["derivative const"] = np.max(np.abs(spectral_derivative(ComplexField(g, 2 + 0 * a)).values))
    H = lambda v: flat_hilbert(ComplexField(g, v)).values
    out["H e^{-ia}"] = np.max(np.abs(H(np.exp(-1j * a)) - np.exp(-1j * a)))
    out["H e^{ia}"] = np.max(np.abs(H(np.exp(1j * a)) + np.exp(1j * a)))
    out["H 1"] = np.max(np.abs(H(np.ones_like(a))))
    out["H^2 norm e^{ia}"] = abs(sobolev_norm(ComplexField(g, np.exp(1j * a)), 2) - 2)
    out["norm 0"] = sobolev_norm(ComplexField(g, 0 * a), 2)
    out["X^0 norm sin"] = abs(xs_norm(ComplexField(g, np.sin(a)), 0, 2) - np.sqrt(2))
    lg = LineGrid(1024, 32 * np.pi)
    _, f1 = xs_split(ComplexField(lg, np.sin(lg.nodes)))
    out["split sin"] = np.max(np.abs(f1.values))
    return out


def _curve_ops():
    g, a = _torus()
    flat = Curve.flat(g)
    out = {}
    v = np.exp(2j * a) + np.cos(5 * a)
    out["flat periodic = flat H"] = np.max(np.abs(
        periodic_hilbert(flat, v).values - flat_hilbert(ComplexField(g, v)).values))
    out["(I-H_p) e^{-ia}"] = holomorphicity_residual(flat, np.exp(-1j * a), "below")
    out["H 0"] = np.max(np.abs(periodic_hilbert(flat, 0 * a).values))
    out["K_p flat"] = np.max(np.abs(double_layer(flat, np.cos(a)).values))
    rhs = np.sin(2 * a)
    out["(I-K)^-1 flat"] = np.max(np.abs(resolvent_solve(flat, rhs).values - rhs))
    lg = LineGrid(512, 16 * np.pi)
    out["line (I-H) e^{-2ia}"] = holomorphicity_residual(
        Curve.flat(lg), np.exp(-2j * lg.nodes), "below", decay_tol=None)
    return out


def _nls():
    out = {}
    grid = LineGrid(256, 20.0)
    for p in (NlsParams.standard(), NlsParams.scaled(1.0)):
        st = background_state(p, grid)
        out[f"{p.normalization} background residual"] = nls_residual(p, st)
        out[f"{p.normalization} zero residual"] = nls_residual(
            p, state_from_profile(p, grid, np.zeros(grid.n_points), rho=0.0))
        moved = evolve(p, st, 0.3, 10)
        out[f"{p.normalization} background evolve"] = moved.B1.sup()
    zero = state_from_profile(NlsParams.standard(), grid, np.zeros(grid.n_points), rho=0.0)
    out["rescale zero"] = scale_to_packet_frame(zero, 2.0).total().sup()
    return out


def _wavepacket():
    out = {}
    for (e, k, t, al), (X, T, ph) in [((0.1, 1, 0, 5), (0.5, 0, 5)),
                                      ((0.1, 1, 10, 0), (0.5, 0.1, 10)),
                                      ((0.2, 4, 1, 1), (0.25, 0.04, 6))]:
        got = slow_vars(PacketParams(e, k, t), al)
        out[f"slow vars {e},{k},{t},{al}"] = max(abs(got[0] - X), abs(got[1] - T), abs(got[2] - ph))
    p = PacketParams(0.1, 1)
    pk = build_packet(p, background_envelope(p, packet_grid(p)))
    a = pk.alpha
    z = a + 0.1 * np.exp(1j * a) + 0.01j - 0.0005 * np.exp(-1j * a)
    out["B=1 zeta"] = np.max(np.abs(pk.zeta_tilde.zeta - z))
    out["B=1 b"] = np.max(np.abs(pk.b_tilde.values.real - (-0.01 - 0.002 * np.sin(a))))
    same = packet_at_shifted_time(p, pk.B, 0.0)
    out["dt = 0"] = np.max(np.abs(same.zeta_tilde.zeta - pk.zeta_tilde.zeta))
    return out


def _verify():
    out = {}
    p = PacketParams(0.0, 1)
    g = packet_grid(PacketParams(0.1, 1))
    pk0 = build_packet(p, background_envelope(p, g))
    r = ww_residual(pk0)
    out["rest residual"] = r.residual_sup + sum(r.components.values())
    flat = Curve.flat(LineGrid(512, 16 * np.pi))
    zero = np.zeros(flat.grid.n_points)
    out["rest b"] = recover_b(flat, zero).sup()
    out["rest A"] = np.max(np.abs(recover_A(flat, zero, zero).values - 1))
    out["rest G"] = eval_G(flat, zero).sup()
    out["energy 0"] = sum(abs(v) for v in energy_e0(flat, np.ones(flat.grid.n_points), zero, zero))
    eps = [0.1, 0.05, 0.025]
    rep = fit_slope(eps, [e ** 4 for e in eps])
    out["slope eps^4"] = abs(rep.fitted_slope - 4) + abs(rep.r_squared - 1)
    out["slope const"] = abs(fit_slope(eps, [1.0, 1.0, 1.0]).fitted_slope)
    return out


def _initdata():
    out = {}
    w, tr = iterate_periodic(0.0, 1)
    out["c = 0"] = np.max(np.abs(w.zeta - w.grid.nodes)) + (tr.n_iter != 1)
    lg = LineGrid(512, 16 * np.pi)
    xi1, _ = iterate_localized(Curve.flat(lg), ComplexField(lg, np.zeros(lg.n_points)))
    out["xi1 = 0"] = xi1.sup()
    zero = np.zeros(lg.n_points)
    chk = check_compatibility(Curve.flat(lg), zero, zero,
                              A=recover_A(Curve.flat(lg), zero, zero))
    out["rest compatibility"] = max(c.value for c in chk.values())
    return out


CHECKS = {
    "spectral_core": _spectral_core,
    "curve_ops": _curve_ops,
    "nls": _nls,
    "wavepacket": _wavepacket,
    "verify": _verify,
    "initdata": _initdata,
}


def run_self_test(tol: float = TOL) -> dict:
    """{module: {check: (value, passed)}} over every closed-form example."""
    report = {}
    for name, fn in CHECKS.items():
        report[name] = {k: (float(v), bool(v <= tol)) for k, v in fn().items()}
    return report

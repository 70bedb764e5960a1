"""Experiment drivers shared by the command line and the acceptance suite."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral_core import ComplexField, LineGrid, flat_hilbert, sobolev_norm
from .verify import (eval_G, fit_slope, hierarchy_residual, recover_A, recover_at_over_a,
                     recover_b, ww_residual)
from .wavepacket import (PacketParams, background_envelope, build_packet, bump_envelope,
                         envelope_jet, packet_grid, peregrine_envelope)

ENVELOPES = {
    "background": background_envelope,
    "bump": bump_envelope,
    "peregrine": peregrine_envelope,
}

# metric -> slope threshold as stated for the sweep (None: reported only)
TARGETS = {
    "residual_sup": 3.5,
    "b_minus_b2": 2.7,
    "b_minus_b_tilde": 3.5,
    "A_minus_1": 2.5,
    "G_sup": 2.7,
    "hierarchy_corrected": 3.5,
    "momentum_with_A3": None,
    "holomorphic_zeta": None,
    "holomorphic_velocity": None,
    "residual_sobolev": None,
    "at_over_a": None,
    "A_min": None,
    "A_max": None,
}
# bounds checked pointwise rather than by slope
NOT_FITTED = ("A_min", "A_max")


def make_packet(epsilon: float, k: float = 1.0, envelope: str = "peregrine",
                points_per_period: int = 32, half_width_X: float = 10.0):
    if envelope not in ENVELOPES:
        raise ValueError(f"unknown envelope {envelope!r}")
    p = PacketParams(epsilon, k)
    g = packet_grid(p, half_width_X, points_per_period)
    return build_packet(p, ENVELOPES[envelope](p, g))


def packet_metrics(packet) -> dict:
    """Every norm reported by the order study for one packet."""
    p = packet.params
    e, k, gam = p.epsilon, p.k, p.gamma
    curve = packet.zeta_tilde
    r = ww_residual(packet)
    B = envelope_jet(packet.B).parts[0]
    mod = np.abs(B) ** 2
    b = recover_b(curve, packet.Dt_zeta).values.real
    A = recover_A(curve, packet.Dt_zeta, packet.Dt2_zeta).values.real
    G = eval_G(curve, packet.Dt_zeta).values
    at = recover_at_over_a(curve, packet.Dt_zeta, packet.Dt2_zeta, A).values
    # the hierarchy remainder after removing its third-order cubic term
    phase = np.exp(1j * k * packet.alpha + 1j * gam * p.t)
    hier = hierarchy_residual(packet) + 2 * gam * k ** 2.5 * e ** 3 * B * mod * phase
    out = {
        "residual_sup": r.residual_sup,
        "residual_sobolev": r.residual_sobolev,
        **r.components,
        "b_minus_b2": float(np.max(np.abs(b + e * e * gam * k * mod))),
        "b_minus_b_tilde": float(np.max(np.abs(b - packet.b_tilde.values.real))),
        "A_minus_1": float(np.max(np.abs(A - 1))),
        "A_min": float(A.min()),
        "A_max": float(A.max()),
        "G_sup": float(np.max(np.abs(G))),
        "at_over_a": float(np.max(np.abs(at))),
        "hierarchy_corrected": float(np.max(np.abs(hier))),
    }
    del out["momentum"]
    return out


@dataclass
class OrderStudy:
    epsilons: list
    rows: list          # one metrics dict per epsilon
    envelope: str
    k: float

    def slopes(self) -> dict:
        out = {}
        for m, target in TARGETS.items():
            if m in NOT_FITTED:
                continue
            norms = [row[m] for row in self.rows]
            if any(v == 0 for v in norms):
                out[m] = None
                continue
            out[m] = fit_slope(self.epsilons, norms, target)
        return out

    def a_bounds_ok(self) -> bool:
        return all(0.5 <= row["A_min"] and row["A_max"] <= 2 for row in self.rows)


def order_study(epsilons, k: float = 1.0, envelope: str = "peregrine",
                points_per_period: int = 32, half_width_X: float = 10.0) -> OrderStudy:
    rows = [packet_metrics(make_packet(e, k, envelope, points_per_period, half_width_X))
            for e in epsilons]
    return OrderStudy(list(epsilons), rows, envelope, k)


def flat_scaling_norms(epsilons=(0.2, 0.1, 0.05), k: float = 1.0,
                       grid: LineGrid | None = None) -> list:
    """H^0 norm of (I - H) g(eps a) e^{-i k a} for a Gaussian g."""
    grid = grid or LineGrid(16384, 512.0)
    a = grid.nodes
    out = []
    for e in epsilons:
        f = ComplexField(grid, np.exp(-(e * a) ** 2) * np.exp(-1j * k * a))
        out.append(sobolev_norm(f - flat_hilbert(f), 0.0))
    return out


def compatibility_study(epsilons, k: float = 1.0, envelope: str = "bump",
                        points_per_period: int = 32, tol: float = 1e-12,
                        max_iter: int = 200) -> dict:
    """Initial data per epsilon, their (I-1)..(I-5) residuals and the seeded control."""
    from .initdata import build_initial_data, check_compatibility

    rows, controls, traces = [], [], []
    for e in epsilons:
        pk = make_packet(e, k, envelope, points_per_period)
        d = build_initial_data(pk, tol=tol, max_iter=max_iter)
        A = recover_A(d["zeta0"], d["v0"], d["w0"])
        chk = check_compatibility(d["zeta0"], d["v0"], d["w0"], A=A, omega0=d["omega0"],
                                  v0_periodic=d["v0_periodic"],
                                  w0_periodic=d["w0_periodic"], reference=pk)
        rows.append({name: c.value for name, c in chk.items()})
        traces.append({"periodic": d["trace_periodic"].to_dict(),
                       "localized": d["trace_localized"].to_dict()})
        ctl = build_initial_data(pk, tol=tol, max_iter=max_iter, control=True)
        c2 = check_compatibility(ctl["zeta0"], ctl["v0"], ctl["w0"])
        controls.append(c2["I-1 velocity"].value)
    return {"epsilons": list(epsilons), "rows": rows, "control": controls, "traces": traces}

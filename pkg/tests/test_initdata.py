import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peregrine.curve_ops import Curve
from peregrine.errors import NoConvergence
from peregrine.experiments import make_packet
from peregrine.initdata import (build_initial_data, check_compatibility, iterate_localized,
                                iterate_periodic, negative_control_bump, periodic_defect)
from peregrine.spectral_core import ComplexField, LineGrid
from peregrine.verify import fit_slope, recover_A

SWEEP = (0.1, 0.05, 0.025)


def test_zero_coefficient_is_one_step():
    w, tr = iterate_periodic(0.0, 1)
    assert tr.n_iter == 1 and tr.converged
    assert np.max(np.abs(w.zeta - w.grid.nodes)) == 0


def test_contraction_at_005():
    _, tr = iterate_periodic(0.05, 1)
    r = tr.ratios()
    assert np.all(r[:-1] <= 2 * 0.05 + 0.02)


@given(st.floats(0.0, 0.2), st.floats(0, 2 * np.pi), st.sampled_from([1, 2, 3]))
def test_contraction_certificate(mag, arg, k):
    c = mag / k * np.exp(1j * arg)
    w, tr = iterate_periodic(c, k)
    inc = np.asarray(tr.iterates)
    # ratios are meaningful until the increments reach roundoff
    live = inc[:-1] > 1e-13
    r = inc[1:][live] / inc[:-1][live]
    assert np.all(r <= 2 * k * abs(c) + 0.05)
    if tr.n_iter > 1:
        assert tr.final_increment <= (2 * k * abs(c)) ** (tr.n_iter - 1) * inc[0] * 1.1 + 1e-15
    assert periodic_defect(w, c, k) <= 1e-12


@pytest.mark.parametrize("c", [0.05, 0.1j, -0.15])
def test_idempotence(c):
    w, _ = iterate_periodic(c)
    w2, tr = iterate_periodic(c, start=w)
    assert tr.n_iter == 1


def test_first_order_distance_slope():
    d = []
    for c in SWEEP:
        w, _ = iterate_periodic(c)
        a = w.grid.nodes
        d.append(np.max(np.abs(w.zeta - a - np.conj(c) * np.exp(1j * a))))
    assert fit_slope(SWEEP, d, 1.8).fitted_slope >= 1.8


def test_periodic_guards():
    with pytest.raises(ValueError):
        iterate_periodic(0.21)
    with pytest.raises(ValueError):
        iterate_periodic(0.11, k=2)
    with pytest.raises(ValueError):
        iterate_periodic(0.05, k=0)
    with pytest.raises(NoConvergence):
        iterate_periodic(0.15, max_iter=3)


def test_zero_localized_perturbation():
    lg = LineGrid(512, 16 * np.pi)
    xi1, tr = iterate_localized(Curve.flat(lg), ComplexField(lg, np.zeros(512)))
    assert xi1.sup() == 0 and tr.converged


def test_rest_state_compatibility():
    lg = LineGrid(512, 16 * np.pi)
    flat = Curve.flat(lg)
    z = np.zeros(512)
    chk = check_compatibility(flat, z, z, A=recover_A(flat, z, z))
    assert all(c.value == 0 for c in chk.values())
    assert all(c.passed for c in chk.values())


def test_bump_data_at_005(compat):
    row = compat["rows"][1]
    for name in ("I-1 position", "I-1 velocity", "I-2 position", "I-2 velocity"):
        assert row[name] <= 1e-6, name


def test_localized_distance_slope(compat):
    d = [r["I-3 localized distance"] for r in compat["rows"]]
    assert fit_slope(compat["epsilons"], d, 1.3).fitted_slope >= 1.3


def test_negative_control(compat):
    assert all(v >= 1e-2 for v in compat["control"])


def test_control_bump_is_seeded():
    lg = LineGrid(1024, 64 * np.pi)
    a = negative_control_bump(lg, 1.0)
    b = negative_control_bump(lg, 1.0)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, negative_control_bump(lg, 1.0, seed=1))


def test_localized_traces(compat):
    for tr in compat["traces"]:
        assert tr["periodic"]["converged"] and tr["localized"]["converged"]


@pytest.mark.parametrize("ppp", [32, 64])
def test_peregrine_data_converges(ppp):
    d = build_initial_data(make_packet(0.05, 1, "peregrine", ppp))
    assert d["trace_localized"].converged
    chk = check_compatibility(d["zeta0"], d["v0"], d["w0"])
    assert chk["I-1 velocity"].value <= 1e-6


def test_peregrine_position_residual_is_box_truncation():
    # the complex envelope gives H0(conj(B) B_X) a 1/X tail, so the position
    # residual falls like 1/L rather than with the grid spacing
    vals = []
    for hw in (10.0, 20.0):
        d = build_initial_data(make_packet(0.05, 1, "peregrine", 32, hw))
        vals.append(check_compatibility(d["zeta0"], d["v0"], d["w0"])["I-1 position"].value)
    assert vals[1] == pytest.approx(vals[0] / 2, rel=0.1)

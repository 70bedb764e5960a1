import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peregrine.errors import DecayViolation
from peregrine.experiments import flat_scaling_norms
from peregrine.spectral_core import (ComplexField, LineGrid, PeriodicGrid, dft, flat_hilbert,
                                     inverse_dft, periodize, sobolev_norm, spectral_derivative,
                                     xs_norm, xs_split)
from peregrine.verify import fit_slope

coef = st.floats(-1, 1, allow_nan=False)


def torus(n=64):
    g = PeriodicGrid(n)
    return g, g.nodes


def random_trig(g, cs, shift=0):
    a = g.nodes
    return sum(c * np.exp(1j * (m - shift) * a) for m, c in enumerate(cs))


def test_grid_validation():
    with pytest.raises(ValueError):
        PeriodicGrid(7)
    with pytest.raises(ValueError):
        LineGrid(64, -1.0)
    with pytest.raises(ValueError):
        ComplexField(PeriodicGrid(8), np.ones(4))
    with pytest.raises(ValueError):
        ComplexField(PeriodicGrid(8), np.full(8, np.nan))


def test_dft_single_modes():
    g, a = torus(32)
    c = dft(ComplexField(g, np.exp(1j * a))).coefficients
    assert abs(c[1] - 1) < 1e-14
    assert np.max(np.abs(np.delete(c, 1))) < 1e-14
    c = dft(ComplexField(g, np.ones(32))).coefficients
    assert abs(c[0] - 1) < 1e-14 and np.max(np.abs(c[1:])) < 1e-14


def test_dft_gaussian_line():
    g = LineGrid(1024, 20.0)
    s = dft(ComplexField(g, np.exp(-g.nodes ** 2)))
    ref = np.sqrt(np.pi) * np.exp(-s.frequencies ** 2 / 4)
    assert np.max(np.abs(s.coefficients - ref)) < 1e-10


def test_derivative_examples():
    g, a = torus(32)
    for k in (1, 3, -5):
        d = spectral_derivative(ComplexField(g, np.exp(1j * k * a))).values
        assert np.max(np.abs(d - 1j * k * np.exp(1j * k * a))) < 1e-12
    assert np.max(np.abs(spectral_derivative(ComplexField(g, np.full(32, 2.0))).values)) == 0
    lg = LineGrid(2000, 40.0)  # spacing 0.04
    x = lg.nodes
    f = 1 / np.cosh(x)
    spec = spectral_derivative(ComplexField(lg, f)).values.real
    h = lg.spacing
    r = lambda j: np.roll(f, -j) - np.roll(f, j)
    # sixth-order central differences; the three-point stencil's own error is ~4e-4 here
    fd6 = (45 * r(1) - 9 * r(2) + r(3)) / (60 * h)
    assert np.max(np.abs(spec - fd6)) < 1e-6
    assert np.max(np.abs(spec + np.tanh(x) / np.cosh(x))) < 1e-12


def test_flat_hilbert_examples():
    g, a = torus(32)
    H = lambda v: flat_hilbert(ComplexField(g, v)).values
    assert np.max(np.abs(H(np.exp(-1j * a)) - np.exp(-1j * a))) < 1e-14
    assert np.max(np.abs(H(np.exp(1j * a)) + np.exp(1j * a))) < 1e-14
    assert np.max(np.abs(H(np.ones(32)))) == 0


@pytest.mark.parametrize("k", [1, 2, 5])
def test_sign_rule(k):
    g, a = torus(64)
    f = ComplexField(g, np.exp(-1j * k * a))
    assert np.max(np.abs((f - flat_hilbert(f) * np.sign(k)).values)) < 1e-10


def test_sobolev_examples():
    g, a = torus(32)
    assert sobolev_norm(ComplexField(g, np.exp(1j * a)), 2) == pytest.approx(2.0, abs=1e-14)
    assert sobolev_norm(ComplexField(g, np.zeros(32)), 3) == 0
    with pytest.raises(ValueError):
        sobolev_norm(ComplexField(g, np.zeros(32)), -1)


def _sech_h1():
    from scipy.integrate import quad
    # transform of sech is pi sech(pi xi / 2); the line norm integrates d xi
    val, _ = quad(lambda xi: (1 + xi ** 2) * (np.pi / np.cosh(np.pi * xi / 2)) ** 2, -60, 60)
    return np.sqrt(val)


def test_sobolev_sech_line():
    lg = LineGrid(4096, 32 * np.pi)
    got = sobolev_norm(ComplexField(lg, 1 / np.cosh(lg.nodes)), 1)
    assert got == pytest.approx(_sech_h1(), abs=1e-6)


def test_xs_split_examples():
    lg = LineGrid(4096, 32 * np.pi)
    x = lg.nodes
    f0, f1 = xs_split(ComplexField(lg, np.sin(x) + 1 / np.cosh(x)))
    assert np.max(np.abs(f0.values - np.sin(f0.grid.nodes))) < 1e-8
    assert np.max(np.abs(f1.values - 1 / np.cosh(x))) < 1e-8
    _, f1 = xs_split(ComplexField(lg, np.sin(x)))
    assert np.max(np.abs(f1.values)) < 1e-12
    f0, _ = xs_split(ComplexField(lg, 1 / np.cosh(x)))
    assert np.max(np.abs(f0.values)) < 1e-8


def test_xs_split_rejects_non_decaying():
    lg = LineGrid(4096, 32 * np.pi)
    with pytest.raises(DecayViolation):
        xs_split(ComplexField(lg, np.tanh(lg.nodes)))


def test_xs_norm_examples():
    g, a = torus(32)
    assert xs_norm(ComplexField(g, np.sin(a)), 0, 2) == pytest.approx(np.sqrt(2), abs=1e-14)
    assert xs_norm(ComplexField(g, np.zeros(32)), 0, 2) == 0
    lg = LineGrid(4096, 32 * np.pi)
    x = lg.nodes
    got = xs_norm(ComplexField(lg, np.sin(x) + 1 / np.cosh(x)), 1, 2)
    ref = sobolev_norm(ComplexField(g, np.sin(a)), 3) + _sech_h1()
    assert got == pytest.approx(ref, abs=1e-6)


@given(st.lists(coef, min_size=3, max_size=12), st.integers(0, 6))
def test_round_trip_and_parseval(cs, shift):
    g, _ = torus(32)
    f = ComplexField(g, random_trig(g, cs, shift) + 0.25)
    back = inverse_dft(dft(f)).values
    scale = max(1.0, np.max(np.abs(f.values)))
    assert np.max(np.abs(back - f.values)) <= 1e-12 * scale
    grid_l2 = np.sum(np.abs(f.values) ** 2) * g.spacing / g.period
    spec_l2 = np.sum(np.abs(dft(f).coefficients) ** 2)
    assert abs(grid_l2 - spec_l2) <= 1e-10 * max(spec_l2, 1.0)


@given(st.floats(0.5, 4.0), st.floats(-3, 3))
def test_round_trip_line(width, center):
    lg = LineGrid(1024, 40.0)
    f = ComplexField(lg, np.exp(-((lg.nodes - center) / width) ** 2) * np.exp(0.7j * lg.nodes))
    assert np.max(np.abs(inverse_dft(dft(f)).values - f.values)) < 1e-12


@given(st.lists(coef, min_size=3, max_size=10), st.integers(1, 5))
def test_hilbert_involution_and_projections(cs, shift):
    g, _ = torus(32)
    v = random_trig(g, cs, shift)
    v = v - v.mean()
    f = ComplexField(g, v)
    H = flat_hilbert
    assert np.max(np.abs(H(H(f)).values - v)) < 1e-10
    for s in (1, -1):
        P = lambda u: (u - s * H(u)) * 0.5
        assert np.max(np.abs(P(P(f)).values - P(f).values)) < 1e-10


@given(st.lists(coef, min_size=2, max_size=6), st.floats(1.0, 5.0), st.floats(-5, 5))
def test_split_round_trip(cs, width, center):
    lg = LineGrid(2048, 16 * np.pi)
    x = lg.nodes
    per = sum(c * np.exp(1j * m * x) for m, c in enumerate(cs))
    dec = np.exp(-((x - center) / width) ** 2)
    f0, f1 = xs_split(ComplexField(lg, per + dec))
    rebuilt = periodize(f0, lg).values + f1.values
    assert np.max(np.abs(rebuilt - per - dec)) < 1e-8


def test_regularity_to_decay_scaling():
    eps = (0.2, 0.1, 0.05)
    rep = fit_slope(eps, flat_scaling_norms(eps), 2 - 0.5)
    assert rep.fitted_slope >= 2 - 0.5 - 0.2

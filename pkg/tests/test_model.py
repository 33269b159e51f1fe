import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from jinxin.model import (
    Grid,
    ModelParams,
    ParameterDomainError,
    SpectralField,
    StateBGK,
    StateCD,
    StateUV,
    bgk_to_uv,
    cd_to_uv,
    f_eval,
    gaussian,
    maxwellians,
    symmetrizer,
    uv_to_bgk,
    uv_to_cd,
    well_prepared_data,
)

rng = np.random.default_rng(20240611)


def random_params(n, a_max=2.0):
    out = []
    while len(out) < n:
        eps = 10 ** rng.uniform(-2, 0)
        lam = rng.uniform(0.2, 3.0)
        a = rng.uniform(-a_max, a_max)
        if lam**2 - a**2 * eps**2 > 1e-3:
            out.append(ModelParams(eps, lam, a, (rng.uniform(-1, 1),)))
    return out


def rel(x, y):
    return np.max(np.abs(x - y)) / max(np.max(np.abs(y)), 1e-300)


# parameters and grid

@pytest.mark.parametrize(
    "kw",
    [dict(epsilon=0.0), dict(epsilon=-1.0), dict(epsilon=0.1, lam=0.0), dict(epsilon=1.0, lam=1.0, a=1.0)],
)
def test_parameter_domain_rejected(kw):
    with pytest.raises(ParameterDomainError):
        ModelParams(**kw)


def test_replace_revalidates():
    p = ModelParams(0.1, 1.0, 0.5)
    with pytest.raises(ParameterDomainError):
        p.replace(epsilon=2.0)
    assert p.replace(a=0.0).a == 0.0


def test_h_vanishes_to_second_order():
    p = ModelParams(0.1, h=(0.7, -0.3, 0.2))
    assert p.h_eval(0.0) == 0.0 and p.dh_eval(0.0) == 0.0
    u = np.linspace(-1, 1, 11)
    assert np.allclose(p.h_eval(u), 0.7 * u**2 - 0.3 * u**3 + 0.2 * u**4, rtol=0, atol=1e-15)
    assert np.allclose(p.dh_eval(u), 1.4 * u - 0.9 * u**2 + 0.8 * u**3, rtol=0, atol=1e-15)
    assert ModelParams(0.1, h=()).h_name == "zero"


@pytest.mark.parametrize("n", [4, 12, 100])
def test_grid_needs_power_of_two(n):
    with pytest.raises(ParameterDomainError):
        Grid(n, 10.0)


def test_grid_geometry():
    g = Grid(64, 10.0)
    assert g.dx == 10.0 / 64
    assert g.x[0] == -5.0 and g.x[32] == 0.0
    assert np.isclose(g.xi[1], 2 * np.pi / 10.0)


def test_spectral_derivative_is_exact_on_modes():
    g = Grid(64, 2 * np.pi)
    u = np.sin(3 * g.x) + np.cos(5 * g.x)
    assert rel(g.derivative(u), 3 * np.cos(3 * g.x) - 5 * np.sin(5 * g.x)) < 1e-13
    assert rel(g.derivative(u, 2), -9 * np.sin(3 * g.x) - 25 * np.cos(5 * g.x)) < 1e-13


def test_conjugate_symmetry_of_real_fields():
    g = Grid(128, 20.0)
    u = gaussian(g, 1.0, 0.7, 1.3)
    p = ModelParams(0.3, 1.0, 0.5)
    w = uv_to_cd(well_prepared_data(u, p, g), p)
    for field in (u, w.w2, uv_to_bgk(cd_to_uv(w, p), p).f1):
        assert SpectralField.from_real(field, g).is_conjugate_symmetric()
    assert not SpectralField(np.fft.fft(u) * 1j + 1.0, g).is_conjugate_symmetric()


# flux and Maxwellians

def test_f_eval_examples():
    assert np.all(f_eval(np.zeros(4), ModelParams(0.1, a=0.5)) == 0)
    assert np.isclose(f_eval(0.2, ModelParams(0.1, 1.0, 1.0)), 0.22, rtol=1e-15)
    assert np.all(f_eval(np.arange(4.0), ModelParams(0.1, h=())) == 0)


def test_maxwellian_examples():
    m1, m2 = maxwellians(np.zeros(3), ModelParams(0.1))
    assert np.all(m1 == 0) and np.all(m2 == 0)
    m1, m2 = maxwellians(0.2, ModelParams(0.1, 1.0, 0.0))
    assert np.isclose(m1, 0.101, rtol=1e-14) and np.isclose(m2, 0.099, rtol=1e-14)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(1e-3, 1.0),
    st.floats(0.1, 4.0),
    st.floats(-1.0, 1.0),
    st.lists(st.floats(-10, 10), min_size=1, max_size=20),
)
@example(1.0, 1.0, 0.0, [5e-324])
def test_maxwellian_consistency(eps, lam, a, values):
    p = ModelParams(eps, lam, a * lam / eps * 0.99)
    u = np.array(values)
    m1, m2 = maxwellians(u, p)
    # exact up to the rounding of m1, m2 themselves
    # plus one subnormal ulp: halving 5e-324 rounds to 0
    ulp = 4 * np.finfo(float).eps * (np.abs(m1) + np.abs(m2)) + 2 * np.finfo(float).smallest_subnormal
    assert np.all(np.abs(m1 + m2 - u) <= ulp)
    assert np.all(np.abs(m1 - m2 - eps * f_eval(u, p) / lam) <= ulp + 1e-15 * np.abs(eps * f_eval(u, p) / lam))


# changes of variables

def test_bgk_example():
    s = uv_to_bgk(StateUV(np.array([1.0]), np.array([2.0])), ModelParams(1.0, 2.0))
    assert s.f1[0] == 1.0 and s.f2[0] == 0.0
    z = uv_to_bgk(StateUV(np.zeros(2), np.zeros(2)), ModelParams(1.0))
    assert np.all(z.f1 == 0) and np.all(z.f2 == 0)


def test_cd_example():
    w = uv_to_cd(StateUV(np.array([3.0]), np.array([5.0])), ModelParams(1.0, 1.0, 0.0))
    assert w.w1[0] == 3.0 and w.w2[0] == 5.0


def test_round_trips_over_random_parameters():
    worst = 0.0
    for p in random_params(100):
        u, v = rng.normal(size=(2, 64))
        s = StateUV(u, v)
        for back in (bgk_to_uv(uv_to_bgk(s, p), p), cd_to_uv(uv_to_cd(s, p), p)):
            worst = max(worst, rel(back.u, u), rel(back.v, v))
    assert worst <= 1e-13


def test_cd_stack_round_trip():
    w = StateCD(rng.normal(size=8), rng.normal(size=8))
    w2 = StateCD.from_stack(w.stack())
    assert np.array_equal(w2.w1, w.w1) and np.array_equal(w2.w2, w.w2)


# symmetrizer

def test_symmetrizer_examples():
    assert np.array_equal(symmetrizer(ModelParams(1.0, 1.0, 0.0)), np.eye(2))
    S = symmetrizer(ModelParams(1.0, 2.0, 1.0))
    assert np.array_equal(S, [[1.0, 1.0], [1.0, 4.0]])
    assert np.isclose(np.linalg.det(S), 3.0)


def test_symmetrizer_positive_definite():
    for p in random_params(200):
        S = symmetrizer(p)
        assert np.array_equal(S, S.T)
        assert np.all(np.linalg.eigvalsh(S) > 0)


def test_symmetrizer_quadratic_form_bounds():
    g = Grid(64, 10.0)
    checked = 0
    for p in random_params(400, a_max=1.0):
        if p.a < 0 or p.epsilon > 0.5 or p.lam**2 - 2 * p.a**2 * p.epsilon**2 <= 0:
            continue
        w1, w2 = rng.normal(size=(2, g.n))
        S = symmetrizer(p)
        form = g.integrate(S[0, 0] * w1 * w1 + 2 * S[0, 1] * w1 * w2 + S[1, 1] * w2 * w2)
        n1, n2 = g.integrate(w1 * w1), g.integrate(w2 * w2)
        e2 = p.epsilon**2
        lower = 0.5 * n1 + e2 * (p.lam**2 - 2 * p.a**2 * e2) * n2
        upper = (1 + p.a * e2) * n1 + (p.a + p.lam**2) * e2 * n2
        assert lower <= form <= upper
        checked += 1
    assert checked > 50


# well-prepared data

def test_well_prepared_examples():
    g = Grid(64, 10.0)
    p = ModelParams(0.1, 1.0, 0.0, ())
    s = well_prepared_data(np.zeros(g.n), p, g)
    assert np.all(s.v == 0)
    u0 = np.sin(2 * np.pi * g.x / g.length)
    s = well_prepared_data(u0, p, g)
    assert rel(s.v, -(2 * np.pi / g.length) * np.cos(2 * np.pi * g.x / g.length)) < 1e-13


@pytest.mark.parametrize("a", [0.0, 0.5])
def test_well_prepared_bgk_fluctuation(a):
    g = Grid(256, 40.0)
    p = ModelParams(0.1, 1.3, a)
    u0 = gaussian(g, 0.3, 1.5)
    b = uv_to_bgk(well_prepared_data(u0, p, g), p)
    m1, m2 = maxwellians(u0, p)
    du = g.derivative(u0)
    half = p.epsilon * p.lam / 2
    assert np.max(np.abs(b.f1 - m1 + half * du)) <= 1e-12
    assert np.max(np.abs(b.f2 - m2 - half * du)) <= 1e-12

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dncsim import errmodel


def model(**kw):
    base = dict(n=16, d=1, D=3, h=4, Delta=2, K=2, T=2, eta=2, e_of_n=0.0, g_of_n=0.0)
    base.update(kw)
    return errmodel.ErrorModel(**base)


def test_e1_hand_values():
    assert errmodel.e1(0.25, 1) == pytest.approx(0.125, abs=1e-15)
    assert errmodel.e1(1.0, 1) == pytest.approx(0.0, abs=1e-15)
    assert errmodel.e1(0.01, 2) == pytest.approx((0.01**0.25 - 0.01**0.5) / 2, abs=1e-12)
    assert abs(errmodel.e1(0.01, 2) - 0.10811388300841898) < 1e-12


def test_e1_domain():
    with pytest.raises(ValueError):
        errmodel.e1(0.0, 1)
    with pytest.raises(ValueError):
        errmodel.e1(1.5, 1)
    with pytest.raises(ValueError):
        errmodel.e1(0.1, 0.5)


def test_e1_positive_on_unit_interval():
    for delta in np.geomspace(1e-8, 0.999, 50):
        assert errmodel.e1(float(delta), 3) > 0


def test_e1_lower_bound_on_grid():
    # 100-point grid: e1(delta) >= -log(delta) ln(2) 2^(log delta / h) / (4h)
    for h in (1, 2, 7):
        for delta in np.geomspace(1e-6, 0.99, 100):
            assert errmodel.e1(float(delta), h) >= errmodel.e1_lower_bound(float(delta), h) - 1e-15


def test_e2_formula():
    assert errmodel.e2(1.0, 16) == 2.0**-80
    assert errmodel.e2(0.0, 16) == 0.0
    with pytest.raises(ValueError):
        errmodel.e2(0.1, 3)


def test_e2_linearity():
    assert errmodel.e2(0.2, 32) == pytest.approx(2 * errmodel.e2(0.1, 32), rel=1e-14)


def test_e3_values_and_linearity():
    assert errmodel.e3(0.08, 3) == pytest.approx(0.01)
    assert errmodel.e3(0.7, 0) == 0.7
    assert errmodel.e3(0.0, 5) == 0.0


@settings(max_examples=50, deadline=None)
@given(eps=st.floats(min_value=0, max_value=10), scale=st.floats(min_value=0, max_value=5))
def test_e3_exact_linearity(eps, scale):
    assert errmodel.e3(scale * eps, 4) == pytest.approx(scale * errmodel.e3(eps, 4), rel=1e-12, abs=1e-300)


def test_e5_degenerate_and_chain():
    # D = 0 iterations: e5 = E3(E2(delta))
    m0 = model(D=0, Delta=2, n=16)
    assert errmodel.e5(0.125, m0) == pytest.approx(errmodel.e3(errmodel.e2(0.125, 16), 2))
    # D = 1, delta = 1/4, h = 1: E1 = 0.125, then E3(E2(0.125)) = 0.125 2^-80 / 4
    m1 = model(D=1, h=1, Delta=2, n=16)
    assert errmodel.e5(0.25, m1) == pytest.approx(0.125 * 2.0**-80 / 4)


def test_e5_composition_equals_stepwise():
    m = model(D=3, h=2, Delta=3, n=64)
    delta = 0.3
    step = delta
    for _ in range(3):
        step = errmodel.e1(step, 2)
    expected = errmodel.e3(errmodel.e2(step, 64), 3)
    assert errmodel.e5(delta, m) == pytest.approx(expected, rel=1e-12)


def test_e5_monotone_on_grid():
    # the slice-test margin peaks at delta = 2^(-2h); on the grid 2^-k the
    # composition is monotone provided the grid stays right of the peak,
    # which always holds at paper-scale h
    m = model(D=2, h=16, Delta=2, n=16)
    vals = [errmodel.e5(2.0**-k, m) for k in range(1, 20)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_script_bounds_hand_values():
    m = model(K=2, T=2, e_of_n=0.0, g_of_n=0.0)
    b1, b2, b3 = errmodel.script_bounds(m, 0.01)
    assert b1 == pytest.approx(0.2)
    assert b2 == pytest.approx(0.21)
    assert b3 >= b2 >= b1


def test_script_bounds_rejects_k0():
    with pytest.raises(ValueError):
        model(K=0)


def test_script_bounds_chain_on_grid():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        m = model(
            e_of_n=float(rng.uniform(0, 1)),
            g_of_n=float(rng.uniform(0, 0.5)),
            K=int(rng.integers(1, 12)),
            T=int(rng.integers(1, 6)),
            Delta=int(rng.integers(1, 8)),
        )
        eps = float(rng.uniform(0, 0.2))
        b1, b2, b3 = errmodel.script_bounds(m, eps)
        assert b3 >= b2 >= b1


def test_predicted_error_zero_when_exact():
    assert errmodel.predicted_error(model(e_of_n=0.0, g_of_n=0.0), 0.0) == 0.0


def test_predicted_error_eta1_delta1_plugin():
    m = model(eta=1, Delta=1, e_of_n=0.0, g_of_n=0.0, K=2, T=2)
    _, _, b3 = errmodel.script_bounds(m, 0.01)
    assert errmodel.predicted_error(m, 0.01) == pytest.approx(20 * 3 * b3)


def test_predicted_error_paper_profile_below_delta():
    n = 2**10
    ln = math.log2(n)
    delta = 0.1
    m = errmodel.ErrorModel(
        n=n,
        d=1,
        D=3,
        h=ln**7,
        Delta=math.ceil(ln),
        K=math.ceil(ln**3),
        T=math.ceil(ln**3),
        eta=math.ceil(ln / (3 * math.log2(4 / 3))),
        e_of_n=errmodel.default_e_of_n(delta, n),
        g_of_n=0.0,
    )
    eps = delta * 2.0 ** (-10 * ln * math.log2(ln))
    assert errmodel.predicted_error(m, eps) <= delta


def test_predicted_error_monotone_in_each_knob():
    base = model(e_of_n=0.01, g_of_n=0.01, Delta=2, eta=2)
    v0 = errmodel.predicted_error(base, 0.01)
    assert errmodel.predicted_error(model(e_of_n=0.02, g_of_n=0.01), 0.01) >= v0
    assert errmodel.predicted_error(model(e_of_n=0.01, g_of_n=0.02), 0.01) >= v0
    assert errmodel.predicted_error(base, 0.02) >= v0
    assert errmodel.predicted_error(model(e_of_n=0.01, g_of_n=0.01, eta=3), 0.01) >= v0
    assert errmodel.predicted_error(model(e_of_n=0.01, g_of_n=0.01, Delta=3), 0.01) >= v0


def test_eta_i_formula():
    # eta_i = log(n) / (i log(4/3))
    assert errmodel.eta_i(16, 4) == pytest.approx(4 / (4 * math.log2(4 / 3)))
    assert math.ceil(errmodel.eta_i(16, 4)) == 3


def test_default_e_of_n_bound_form():
    val = errmodel.default_e_of_n(0.1, 1024)
    assert val == pytest.approx(1 - 2.0 ** (math.log2(0.1) / math.log2(1024) ** 7))
    assert 0 < val < 1e-6


def test_predicted_runtime_base_case_direct():
    m = model()
    out = errmodel.predicted_runtime(4.0, 2, 1, 1.0, 0.1, m)
    assert out["cost"] == pytest.approx(errmodel.default_base_cost(m.n, 1, 1.0, 0.1))
    assert out["counts"]["base"] == 1


def test_predicted_runtime_structure_and_envelope():
    m = model(n=64, Delta=2, h=2)
    out = errmodel.predicted_runtime(8.0, 3, 1, 1.0, 0.1, m)
    assert out["cost"] > 0
    assert out["counts"]["recursive"] > 0
    assert "fit_constant" in out["envelope"]


def test_predicted_runtime_rejects_nonterminating():
    m = model()
    with pytest.raises(ValueError):
        errmodel.predicted_runtime(0.5, 3, 1, 1.0, 0.1, m)

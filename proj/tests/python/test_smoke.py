import math

import pytest

import fylab


def test_params_and_kernel():
    p = fylab.make_params(3, 0.5)
    assert p.p == pytest.approx(2.0)
    K = fylab.Kernel(p)
    # For (3, 1/2) the kernel is 1 / (2 sinh^2 t).
    for t in (0.1, 1.0, 3.0):
        assert K(t) == pytest.approx(0.5 / math.sinh(t) ** 2, rel=1e-8)


def test_invalid_regime_raises_with_kind():
    with pytest.raises(fylab.FylabError) as info:
        fylab.make_params(1, 0.75)
    assert info.value.kind == "invalid-regime"


def test_constant_solution():
    K = fylab.Kernel(fylab.make_params(3, 0.25))
    one = fylab.Profile.constant()
    assert abs(fylab.apply_P(K, one, 0.3)) <= 1e-10
    assert abs(fylab.equation_residual(K, one, -2.0)) <= 1e-10


def test_branch_and_index():
    K = fylab.Kernel(fylab.make_params(3, 0.5))
    L = fylab.bifurcation_period(K)
    assert fylab.theta(K, 2 * math.pi / L) == pytest.approx(1.0, abs=1e-10)
    b = fylab.solve_periodic(K, 1.1 * L)
    assert b.nonconstant()
    assert b.residual <= 1e-8
    assert fylab.sign_changes_per_period(b.profile) >= 2
    kind, zeros = fylab.crossings(b.profile)
    assert kind == "crosses" and len(zeros) >= 2
    r = fylab.index_lower_bound(K, b.profile, m=2)
    assert r.negative_definite and r.implied_lower_bound == 2
    assert r.gram.shape == (2, 2)


def test_lambda1():
    K = fylab.Kernel(fylab.make_params(3, 0.5))
    e = fylab.lambda1(K, 2.0, 1.0 / 32)
    assert e.lambda1 > 0 and e.min_interior > 0
    assert len(e.phi1) == len(e.nodes)

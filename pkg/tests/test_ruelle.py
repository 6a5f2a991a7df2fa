import cmath
import json
import math

import numpy as np
import pytest

from expdyn.errors import (EmptyGridAfterExclusion, ImageAtForbiddenPole, MoebiusDegenerate,
                           PoleHit, ZeroArgument)
from expdyn.logcplx import LogComplex
from expdyn.ruelle import (GammaCombo, branch_sum, branches, expand_star,
                           fixed_point_residual, gamma_eval, grid_points, l1_evidence,
                           mobius_identity_residual, modulus_branch_sum, nested_branch_sum,
                           nonvanishing_scan, phi_truncation, push_forward, push_forward_iter)
from expdyn.series import b_series
from expdyn.verify import DEFAULT_SAMPLES

E = math.e


def random_triples(seed, count):
    rng = np.random.default_rng(seed)

    def rc():
        return rng.uniform(0.5, 3) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))

    return [(rc(), rc(), rc()) for _ in range(count)]


def test_gamma_eval_examples(mp):
    assert gamma_eval(2, 3) == pytest.approx(1 / 3, rel=1e-15)
    a = mp.e ** 2
    oracle = float(a * (a - 1) / (3 * 2 * (3 - a)))
    assert gamma_eval(E ** 2, 3) == pytest.approx(oracle, rel=1e-14)
    assert oracle == pytest.approx(-1.7927, abs=1e-4)
    with pytest.raises(PoleHit) as exc:
        gamma_eval(2, 2)
    assert exc.value.where == "z=a"
    with pytest.raises(PoleHit):
        gamma_eval(2, 0)


def test_partial_fraction_form():
    a, z = 2.5 - 1j, 0.3 + 0.8j
    pf = (a - 1) / z - a / (z - 1) + 1 / (z - a)
    assert gamma_eval(a, z) == pytest.approx(pf, rel=1e-13)
    C0, C1, res = GammaCombo.gamma(a).partial_fractions()
    assert C0 == pytest.approx(a - 1) and C1 == pytest.approx(-a)
    assert res[0][0] == pytest.approx(1)


def test_branch_identity():
    for lam, z in ((1, 3), (0.4 - 2j, -1 + 0.5j), (-2.5j, 7)):
        bs = branches(lam, z, 200)
        vals = np.exp(lam * bs.xi)
        assert np.all(np.abs(vals - z) <= 1e-10 * abs(z))
    with pytest.raises(ZeroArgument):
        branches(1, 0, 5)


def test_closed_form_anchor(mp):
    lam, a, z = 1, 2, 3
    exact = push_forward(lam, GammaCombo.gamma(a)).evaluate(z)
    # independent oracle: the full branch series summed in high precision
    g = lambda w: 2 / (w * (w - 1) * (w - 2))
    series = mp.nsum(lambda k: g(mp.log(3) + 2j * mp.pi * k), [-mp.inf, mp.inf])
    oracle = complex(series / 9)
    assert exact == pytest.approx(oracle, abs=1e-13)
    assert exact.real == pytest.approx(-2.2757, abs=1e-4)
    assert abs(branch_sum(lam, GammaCombo.gamma(a), z, 10_000) - exact) < 1e-6


def test_push_forward_terms():
    out = push_forward(1, GammaCombo.gamma(2))
    assert out.coefficient_at(E ** 2) == pytest.approx(1 / E ** 2, rel=1e-15)
    assert out.coefficient_at(E) == pytest.approx(-2 / E, rel=1e-15)
    assert len(push_forward(1, GammaCombo())) == 0


def test_shared_image_merges():
    a = 0.5 + 0.3j
    combo = GammaCombo([(1.0, a), (2.0, a + 2j * math.pi)])
    out = push_forward(1, combo)
    single_a = push_forward(1, GammaCombo.gamma(a))
    single_b = push_forward(1, GammaCombo.gamma(a + 2j * math.pi, 2.0))
    fa = cmath.exp(a)
    assert len(out) == 2
    assert out.coefficient_at(fa) == pytest.approx(
        single_a.coefficient_at(fa) + single_b.coefficient_at(fa), rel=1e-12)


def test_forbidden_image():
    with pytest.raises(ImageAtForbiddenPole):
        push_forward(1, GammaCombo.gamma(2j * math.pi))


def test_prop2_random_triples():
    for lam, a, z in random_triples(7, 20):
        g = GammaCombo.gamma(a)
        exact = push_forward(lam, g).evaluate(z)
        assert abs(branch_sum(lam, g, z, 10_000) - exact) <= 1e-5


def test_truncation_order_is_cubic():
    # +k and -k branches cancel the leading tail term, so the error falls like 1/K^3
    for lam, a, z in random_triples(11, 20):
        g = GammaCombo.gamma(a)
        exact = push_forward(lam, g).evaluate(z)
        e1 = abs(branch_sum(lam, g, z, 100) - exact)
        e2 = abs(branch_sum(lam, g, z, 200) - exact)
        assert 7.0 <= e1 / e2 <= 9.0


def test_zero_combo_sums():
    assert branch_sum(1, GammaCombo(), 3, 50) == 0
    assert modulus_branch_sum(1, GammaCombo(), 3, 50) == 0
    assert len(GammaCombo([(1.0, 2.0), (-1.0, 2.0)])) == 0


def test_modulus_sum_dominates():
    for lam, a, z in random_triples(3, 10):
        g = GammaCombo([(1.0, a), (0.5j, a + 1)])
        assert modulus_branch_sum(lam, g, z, 500) >= abs(branch_sum(lam, g, z, 500)) - 1e-15
    m = modulus_branch_sum(1, GammaCombo.gamma(2), 3, 10_000)
    assert m >= 2.2757


def test_branch_pole_hit():
    z = cmath.exp(2.0)   # xi_0 = 2 is the pole
    with pytest.raises(PoleHit) as exc:
        branch_sum(1, GammaCombo.gamma(2.0), z, 5)
    assert exc.value.branch == 0


def test_linearity():
    T1 = GammaCombo([(1.5, 2.0), (-0.5j, 0.3 + 1j)])
    T2 = GammaCombo([(2.0, 2.0), (1.0, -1.5)])
    c1, c2 = 0.7 - 0.2j, -1.3
    lhs = push_forward(0.8 + 0.1j, T1.scale(c1) + T2.scale(c2))
    rhs = push_forward(0.8 + 0.1j, T1).scale(c1) + push_forward(0.8 + 0.1j, T2).scale(c2)
    assert len(lhs) == len(rhs)
    for c, a in lhs.terms:
        assert rhs.coefficient_at(a) == pytest.approx(c, rel=1e-14)


def test_iterate_identity_and_nested():
    g = GammaCombo.gamma(2.0)
    assert push_forward_iter(1, g, 0).combo.terms == g.terms
    exact = push_forward_iter(1, g, 2).combo.evaluate(3)
    assert abs(nested_branch_sum(1, g, 3, 400) - exact) < 1e-5


def test_iterated_formula_coefficients(mp):
    lam, a = mp.mpc(0.6, 0.4), mp.mpc(1.7, -0.5)
    f = lambda z: mp.exp(lam * z)
    fp = lambda z: lam * f(z)
    d = f(1)
    oracle = -f(a) / (fp(a) * fp(1)) + a * d / fp(1) ** 2
    res = push_forward_iter(complex(lam), GammaCombo.gamma(complex(a)), 2)
    assert res.combo.coefficient_at(complex(d)) == pytest.approx(complex(oracle), rel=1e-12)
    w0, w1 = res.cascade[0]
    assert w0 == pytest.approx(complex(a / fp(1)), rel=1e-13)
    assert w1 == pytest.approx(complex(f(a) / (fp(a) * fp(1))), rel=1e-13)
    diff = expand_star(complex(lam), complex(a), 3) - push_forward_iter(
        complex(lam), GammaCombo.gamma(complex(a)), 3).combo
    for c, _ in diff.terms:
        assert abs(complex(c)) < 1e-14


def test_phi_truncation():
    phi = phi_truncation(0.3 + 0.5j, 1)
    assert len(phi) == 1
    c, a = phi.terms[0]
    assert c == 1 and a == pytest.approx(cmath.exp(0.3 + 0.5j))
    phi = phi_truncation(1, 4)
    poles = phi.poles
    assert poles[0] == pytest.approx(E) and poles[1] == pytest.approx(E ** E)
    assert poles[2] == pytest.approx(math.exp(E ** E), rel=1e-13)
    assert isinstance(poles[3], LogComplex)
    assert poles[3].logmod == pytest.approx(math.exp(E ** E), rel=1e-13)
    assert phi.terms[1][0] == pytest.approx(1 / E ** E, rel=1e-14)


def test_fixed_point_residual_lambda_one():
    r = fixed_point_residual(1, 12, DEFAULT_SAMPLES)
    assert len(r.difference) == 1
    assert r.difference.poles[0] == pytest.approx(E)
    B = b_series(1, E, 12).value
    assert np.allclose(r.normalized, abs(1 + B), rtol=1e-9, atol=0)
    assert np.allclose(r.residual, -(1 + B) * r.gamma_d, rtol=1e-9, atol=0)


def test_fixed_point_residual_two_poles():
    lam = -1
    r = fixed_point_residual(lam, 12, DEFAULT_SAMPLES)
    d = cmath.exp(lam)
    assert len(r.difference) == 2
    assert any(abs(p - d) < 1e-12 for p in r.difference.poles)
    assert np.max(np.abs(r.residual - r.predicted)) <= 1e-9 * np.max(np.abs(r.predicted))


def test_mobius_identity():
    for lam, y in ((1, 3 + 1j), (-1, 0.5 - 2j), (0.4 + 0.7j, -2 + 0.3j)):
        for N in (3, 12):
            r = mobius_identity_residual(lam, y, N, DEFAULT_SAMPLES)
            assert r.max_residual < 1e-8
    r = mobius_identity_residual(1, 3 + 1j, 12, [2 + 2j])
    assert r.max_residual < 1e-8
    with pytest.raises(MoebiusDegenerate):
        mobius_identity_residual(1, 1, 12, DEFAULT_SAMPLES)


def test_nonvanishing_scan():
    grid = grid_points((-5, 5), (-5, 5), 0.1)
    m, _ = nonvanishing_scan(GammaCombo.gamma(2 + 1j), grid, 0.05)
    assert m > 0
    m, _ = nonvanishing_scan(GammaCombo([(1.0, 2.0), (-1.0, 2.0)]), grid, 0.05)
    assert m == 0
    m, where = nonvanishing_scan(phi_truncation(1, 12), grid, 0.05)
    assert m > 0
    with pytest.raises(EmptyGridAfterExclusion):
        nonvanishing_scan(GammaCombo.gamma(2.0), [0.01, 1.01, 2.01], 0.05)


def test_l1_contraction_evidence():
    for combo, box in ((GammaCombo.gamma(2.0), (-2, 2, -2, 2)),
                       (phi_truncation(1, 12), (-3, 3, -3, 3))):
        ev = l1_evidence(1, combo, box)
        assert ev.box_integral <= 1.05 * ev.plane_integral


def test_combo_json_roundtrip():
    phi = phi_truncation(1, 6)
    back = GammaCombo.from_json(json.loads(json.dumps(phi.to_json())))
    assert len(back) == len(phi)
    z = np.array(DEFAULT_SAMPLES)
    assert np.allclose(back.evaluate(z), phi.evaluate(z), rtol=1e-15)
    assert GammaCombo.gamma(2.0).to_json() == [{"coef": [1.0, 0.0], "pole": [2.0, 0.0]}]

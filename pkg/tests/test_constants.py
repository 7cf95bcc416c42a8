import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nekhoroshev.constants import (
    AnalyticityEnvelope,
    derived_constants,
    enumeration_cutoff,
    epsilon_scales,
    exponents,
    lattice_scales,
    nekhoroshev_1977_exponents,
    scaled_geometry,
    verify_parameter_relations,
)
from nekhoroshev.lattices import Lattice, all_maximal_lattices
from nekhoroshev.numeric import MP, mpf
from nekhoroshev.steepness import SteepnessProfile

F = Fraction
alpha_lists = st.integers(3, 8).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.integers(1, 4), min_size=n - 1, max_size=n - 1))
)


def quiet_scales(consts, eps):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return epsilon_scales(consts, eps)


@pytest.mark.parametrize(
    "n,alphas,p,a,q,gaps",
    [
        (3, (1, 1), (1,), F(1, 6), (2, 1), (1, 1)),
        (4, (2, 1, 1), (2, 1), F(1, 16), (7, 2, 1), (5, 1, 1)),
        (3, (2, 1), (2,), F(1, 12), (5, 1), (4, 1)),
    ],
)
def test_exponent_examples(n, alphas, p, a, q, gaps):
    t = exponents(n, alphas)
    assert t.p == tuple(map(F, p))
    assert t.a == a and t.b == a / alphas[-1]
    assert t.q == tuple(map(F, q))
    assert t.a_gaps == tuple(map(F, gaps))


@settings(max_examples=300, deadline=None)
@given(case=alpha_lists)
def test_exponent_identities(case):
    n, alphas = case
    t = exponents(n, alphas)
    for j in range(1, n - 1):
        assert t.q[j - 1] == n * t.p[j - 1] - j
    assert t.q[0] + 1 == n * t.p[0] == 1 / (2 * t.a)
    assert all(x > y for x, y in zip(t.q, t.q[1:]))
    assert all(g >= 1 for g in t.a_gaps)


def test_exponent_input_validation():
    with pytest.raises(ValueError):
        exponents(2, (1,))
    with pytest.raises(ValueError):
        exponents(3, (1,))
    with pytest.raises(ValueError):
        exponents(3, (0.5, 1))


def test_reference_constants(consts):
    assert [int(x) for x in consts.l] == [41, 41]
    assert consts.E == 164 and consts.A == 984
    expected = mpf(1) / (mpf(2) ** 8 * mpf(6) ** 7 * mpf(164) ** 5)
    assert abs(consts.eps0 / expected - 1) < mpf(10) ** -40
    assert consts.eps_star <= consts.eps0
    assert consts.E >= 4 and consts.A >= 24


@settings(max_examples=50, deadline=None)
@given(
    w_lo=st.fractions(F(1, 10), 5),
    spread=st.fractions(1, 4),
    M=st.fractions(F(1, 10), 10),
    C=st.fractions(F(1, 10), 10),
    alpha=st.integers(1, 3),
)
def test_constants_invariants(w_lo, spread, M, C, alpha):
    prof = SteepnessProfile(3, (alpha, 1), (C, C), 1)
    env = AnalyticityEnvelope(1, w_lo, w_lo * spread, M, 1)
    c = derived_constants(prof, env)
    assert c.E >= 4 and c.A == 6 * c.E
    assert 0 < c.eps_star <= c.eps0
    assert c.c > 0 and c.R > 0 and c.T > 0


def test_zero_perturbation_norm_is_rejected(profile):
    with pytest.raises(ValueError):
        derived_constants(profile, AnalyticityEnvelope(1, 1, 2, 1, 0))


def test_cutoff_examples(consts):
    assert quiet_scales(consts, consts.eps0).K == 1
    s = quiet_scales(consts, consts.eps0 / 64)
    assert s.K == 2 and s.K_int == 2


def test_cutoff_relation_fails_at_threshold_scale(consts):
    rep = verify_parameter_relations(quiet_scales(consts, consts.eps0))
    assert any(r.name == "Ksigma" and r.status == "fail" for r in rep.records)
    assert not rep.passed


def test_warning_above_threshold(consts):
    with pytest.warns(UserWarning):
        s = epsilon_scales(consts, consts.eps_star * 2)
    assert s.warnings


def test_lambda_ordering_at_threshold(consts):
    s = epsilon_scales(consts, consts.eps_star)
    assert s.lam[0] < s.lam[1] < s.lambda_bar
    assert s.lambda_ordered()


def test_lattice_scale_identities(consts):
    s = epsilon_scales(consts, consts.eps_star)
    for j in (1, 2):
        ls = lattice_scales(s, (j, 1))
        assert ls.delta_L == s.lam[j - 1]
        ratio = ls.alpha_L / ls.delta_L
        assert abs(ratio / (consts.E * s.K) ** consts.table.a_gaps[j - 1] - 1) < mpf(10) ** -40


def test_axis_lattice_scales_by_hand(consts):
    s = epsilon_scales(consts, consts.eps_star)
    ls = lattice_scales(s, Lattice.from_basis([[1, 0, 0]]))
    K = 6.0
    lam_bar = 1 / (2 * math.sqrt(2))
    lam1 = lam_bar / (984 * K) ** 2
    assert float(s.K) == pytest.approx(K, rel=1e-14)
    assert float(ls.delta_L) == pytest.approx(lam1, rel=1e-12)
    assert float(ls.rho_L) == pytest.approx(lam1, rel=1e-12)
    assert float(ls.alpha_L) == pytest.approx(164 * K * lam1, rel=1e-12)
    assert float(ls.d_L) == pytest.approx(164 * K * lam1 / (4 * K), rel=1e-12)


def test_reference_derived_values(consts):
    s = epsilon_scales(consts, consts.eps_star)
    assert float(consts.mu0) == pytest.approx(0.029463, rel=1e-4)
    assert float(s.r) == pytest.approx(0.02946, rel=1e-3)
    assert float(s.m) == pytest.approx(float(s.r) / 6, rel=1e-14)


def test_relations_pass_below_threshold(consts):
    s = epsilon_scales(consts, consts.eps_star / 2)
    K = enumeration_cutoff(s)
    lats = [L for ls in all_maximal_lattices(3, K).values() for L in ls]
    rep = verify_parameter_relations(s, lats)
    assert rep.passed, [r.to_json() for r in rep.failures]
    assert rep.min_slack() >= 1 - 1e-10
    assert "conda1" in rep.summary()


@pytest.mark.parametrize("K", [2, 3, 4])
def test_scaled_geometry_relations(consts, K):
    s = scaled_geometry(consts, K)
    assert s.mode == "scaled" and s.K == K
    lats = [L for ls in all_maximal_lattices(3, K).values() for L in ls]
    rep = verify_parameter_relations(s, lats)
    assert rep.passed
    assert {r.status for r in rep.records if r.name in ("Ksigma", "Texp")} == {"n/a"}


def test_cutoff_and_radius_are_monotone(consts):
    eps = [consts.eps_star / mpf(2) ** k for k in range(12)]
    sc = [quiet_scales(consts, e) for e in eps]
    assert all(a.K < b.K for a, b in zip(sc, sc[1:]))
    assert all(a.r > b.r for a, b in zip(sc, sc[1:]))
    assert all(a.stability_time < b.stability_time for a, b in zip(sc, sc[1:]))


def test_tiny_eps_does_not_underflow(consts):
    s = quiet_scales(consts, mpf(10) ** -4000)
    assert MP.isfinite(s.K) and s.K > mpf(10) ** 600
    assert s.stability_time > 0 and MP.isfinite(MP.log(s.stability_time))


def test_envelope_json_round_trip():
    env = AnalyticityEnvelope(1, F(1, 2), 2, 3, F(7, 10), rigorous=False, notes=("sampled",))
    assert AnalyticityEnvelope.from_json(env.to_json()) == env
    with pytest.raises(ValueError):
        AnalyticityEnvelope(1, 2, 1, 1, 1)


def test_1977_exponents_five_degrees_of_freedom():
    res = nekhoroshev_1977_exponents(5, (1, 1, 1, 1))
    # independent evaluation of the nested bracket
    n, a1, a2, a3 = 5, 1, 1, 1
    zeta = (a1 * (a2 * (a3 * n + n - 2) + n - 3) + 1) - 1
    assert res["zeta"] == zeta
    assert res["a_old"] == F(2, 12 * zeta + 3 * n + 14)
    assert res["convention"] == "nested"


def test_1977_strict_mode_rejects_small_n():
    with pytest.raises(ValueError):
        nekhoroshev_1977_exponents(4, (1, 1, 1), strict=True)
    assert nekhoroshev_1977_exponents(4, (1, 1, 1))["convention"] == "uniform-recursion"


@settings(max_examples=200, deadline=None)
@given(case=alpha_lists)
def test_new_exponent_improves_on_1977(case):
    n, alphas = case
    res = nekhoroshev_1977_exponents(n, alphas)
    assert res["a_new"] >= res["a_old"]


@pytest.mark.parametrize("alphas", [(1,) * 8, (2, 1, 3, 1, 1, 2, 1, 1), (4, 3, 2, 1, 1, 1, 1, 1)])
def test_1977_exponent_growth(alphas):
    for n in (6, 7, 8):
        cur = nekhoroshev_1977_exponents(n, alphas[: n - 1])
        prev = nekhoroshev_1977_exponents(n - 1, alphas[: n - 2])
        prod = math.prod(alphas[: n - 2])
        assert cur["zeta"] - prev["zeta"] >= (n - 1) * prod
        assert 1 / cur["a_old"] - 1 / prev["a_old"] >= 6 * (n - 1) * prod

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nekhoroshev.model import (
    DomainBall,
    HamiltonianModel,
    Polynomial,
    PolynomialH,
    TrigPolyF,
    envelope,
    fourier_norm,
    frequency,
)
from nekhoroshev.steepness import SteepnessProfile

coef = st.floats(-3, 3, allow_nan=False)
MONOMIALS3 = [e for e in itertools.product(range(4), repeat=3) if sum(e) <= 3]


def cubic(coeffs):
    return PolynomialH(3, list(zip(MONOMIALS3, coeffs)))


def test_frequency_examples():
    h = PolynomialH.quadratic(np.eye(3))
    np.testing.assert_allclose(frequency(h, (1, 2, 3)), (1, 2, 3))
    h2 = PolynomialH.quadratic(np.diag([1.0, -1.0, 0.0]))
    np.testing.assert_allclose(frequency(h2, (1, 1, 0)), (1, -1, 0))


@settings(max_examples=200, deadline=None)
@given(coeffs=st.lists(coef, min_size=len(MONOMIALS3), max_size=len(MONOMIALS3)),
       I=st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_frequency_matches_finite_differences(coeffs, I):
    h = cubic(coeffs)
    I = np.array(I)
    step = 1e-5
    fd = np.array([(h(I + step * e) - h(I - step * e)) / (2 * step) for e in np.eye(3)])
    w = h.frequency(I)
    scale = max(1.0, float(np.max(np.abs(coeffs))) * 10)
    np.testing.assert_allclose(w, fd, rtol=1e-6, atol=1e-6 * scale)


@settings(max_examples=100, deadline=None)
@given(coeffs=st.lists(coef, min_size=len(MONOMIALS3), max_size=len(MONOMIALS3)),
       I=st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_hessian_is_symmetric_jacobian_of_frequency(coeffs, I):
    h = cubic(coeffs)
    I = np.array(I)
    H = h.hessian(I)
    np.testing.assert_allclose(H, H.T)
    step = 1e-5
    fd = np.array([(h.frequency(I + step * e) - h.frequency(I - step * e)) / (2 * step) for e in np.eye(3)])
    np.testing.assert_allclose(H, fd.T, atol=1e-6 * max(1.0, 10 * float(np.max(np.abs(coeffs)))))


def test_polynomial_validation():
    with pytest.raises(ValueError):
        Polynomial(2, [((1, 0, 0), 1.0)])
    with pytest.raises(ValueError):
        Polynomial(2, [((-1, 0), 1.0)])
    with pytest.raises(ValueError):
        PolynomialH(1, [((1,), 1j)])


def test_fourier_norm_examples():
    dom = DomainBall((0.0, 0.0), 1.0)
    sigma, delta = 0.7, 0.5
    f = TrigPolyF.cosine(2, (1, 0))
    assert fourier_norm(f, dom, delta, sigma) == pytest.approx(math.exp(sigma), rel=1e-15)
    assert fourier_norm(TrigPolyF.constant(2, -2.5), dom, delta, sigma) == 2.5
    r0 = 0.8
    amp = Polynomial(2, [((1, 0), 1.0)])
    g = TrigPolyF.cosine(2, (1, 0), amp)
    val = fourier_norm(g, DomainBall((0.0, 0.0), r0), delta, sigma)
    assert val == pytest.approx((r0 + delta) * math.exp(sigma), rel=1e-14)


def test_reference_perturbation_has_unit_norm(model):
    assert fourier_norm(model.f, model.domain, 1, 1) == pytest.approx(1.0, rel=1e-15)


def test_fourier_norm_requires_positive_widths():
    with pytest.raises(ValueError):
        fourier_norm(TrigPolyF.constant(2, 1), DomainBall((0.0, 0.0), 1.0), 0, 1)


harmonic = st.tuples(st.integers(-2, 2), st.integers(-2, 2), st.integers(-2, 2)).filter(any)


def trig_poly(ks, amps):
    f = TrigPolyF(3, {})
    for k, a in zip(ks, amps):
        f = f + TrigPolyF.cosine(3, k, a)
    return f


@settings(max_examples=100, deadline=None)
@given(k1=st.lists(harmonic, min_size=1, max_size=3), a1=st.lists(coef, min_size=3, max_size=3),
       k2=st.lists(harmonic, min_size=1, max_size=3), a2=st.lists(coef, min_size=3, max_size=3),
       c=st.floats(-5, 5, allow_nan=False))
def test_fourier_norm_subadditive_and_homogeneous(k1, a1, k2, a2, c):
    dom = DomainBall((1.0, 0.5, 0.0), 0.3)
    f, g = trig_poly(k1, a1), trig_poly(k2, a2)
    nf, ng = fourier_norm(f, dom, 0.2, 0.5), fourier_norm(g, dom, 0.2, 0.5)
    assert fourier_norm(f + g, dom, 0.2, 0.5) <= nf + ng + 1e-12 * (1 + nf + ng)
    assert fourier_norm(f.scaled(c), dom, 0.2, 0.5) == pytest.approx(abs(c) * nf, rel=1e-12, abs=1e-300)
    s1 = {k for k in k1} | {tuple(-x for x in k) for k in k1}
    s2 = {k for k in k2} | {tuple(-x for x in k) for k in k2}
    if not s1 & s2:
        assert fourier_norm(f + g, dom, 0.2, 0.5) == pytest.approx(nf + ng, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(k=st.lists(harmonic, min_size=1, max_size=4), a=st.lists(coef, min_size=4, max_size=4),
       seed=st.integers(0, 2**31))
def test_real_values_and_gradients(k, a, seed):
    amps = [Polynomial(3, [((1, 0, 0), x), ((0, 0, 0), 0.5)]) for x in a]
    f = trig_poly(k, amps)
    rng = np.random.default_rng(seed)
    I, phi = rng.normal(size=(5, 3)), rng.uniform(0, 2 * np.pi, size=(5, 3))
    assert np.max(np.abs(f.evaluate_complex(I, phi).imag)) < 1e-12
    step = 1e-6
    gp = f.grad_phi(I, phi)
    gi = f.grad_I(I, phi)
    for i, e in enumerate(np.eye(3)):
        fd_phi = (f(I, phi + step * e) - f(I, phi - step * e)) / (2 * step)
        fd_I = (f(I + step * e, phi) - f(I - step * e, phi)) / (2 * step)
        np.testing.assert_allclose(gp[:, i], fd_phi, atol=1e-6)
        np.testing.assert_allclose(gi[:, i], fd_I, atol=1e-6)


def test_reality_constraint_is_enforced():
    one = Polynomial(2, [((0, 0), 1.0)])
    with pytest.raises(ValueError):
        TrigPolyF(2, {(1, 0): one})
    with pytest.raises(ValueError):
        TrigPolyF(2, {(1, 0): one, (-1, 0): one.scaled(2.0)})
    TrigPolyF(2, {(1, 0): one.scaled(1j), (-1, 0): one.scaled(-1j)})


def test_envelope_examples():
    prof = SteepnessProfile.convex(3)
    h = PolynomialH.quadratic(np.eye(3))
    f = TrigPolyF.cosine(3, (1, 0, 0), 0.1)
    env = envelope(h, f, DomainBall((2.0, 0.0, 0.0), 0.5), prof, sigma=1)
    assert 1.485 - 1e-12 <= env.omega_min <= 1.5
    assert 2.5 <= env.omega_max <= 2.525 + 1e-12
    assert env.lipschitz_M == 1
    assert not env.rigorous

    h2 = PolynomialH.quadratic(np.diag([1.0, 2.0, 1.0]))
    env2 = envelope(h2, f, DomainBall((1.0, 1.0, 1.0), 0.5), prof, sigma=1)
    assert env2.lipschitz_M == 2


def test_envelope_cubic_lipschitz_bound():
    prof = SteepnessProfile.convex(3)
    h = PolynomialH(3, [((3, 0, 0), 1 / 6), ((0, 1, 0), 1.0), ((0, 0, 1), 1.0)])
    f = TrigPolyF.cosine(3, (0, 1, 0), 0.1)
    env = envelope(h, f, DomainBall((0.0, 1.0, 1.0), 0.5), prof, sigma=1)
    # sup |I1| over the extension is radius + delta
    assert float(env.lipschitz_M) == pytest.approx(0.5 + 1.0, rel=1e-12)
    sampled = envelope(h, f, DomainBall((0.0, 1.0, 1.0), 0.5), prof, sigma=1, lipschitz_mode="sample")
    assert float(sampled.lipschitz_M) <= float(env.lipschitz_M) * 1.01 + 1e-12


def test_envelope_rejects_vanishing_frequency():
    prof = SteepnessProfile.convex(3)
    h = PolynomialH.quadratic(np.eye(3))
    with pytest.raises(ValueError):
        envelope(h, TrigPolyF.constant(3, 1.0), DomainBall((0.0, 0.0, 0.0), 0.5), prof, sigma=1)


def test_model_json_round_trip(model, tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps(model.to_json()))
    back = HamiltonianModel.load(path)
    I = np.array([[0.9, 0.8, 0.85]])
    phi = np.array([[0.1, 2.0, -1.0]])
    np.testing.assert_array_equal(back.energy(I, phi, 1e-3), model.energy(I, phi, 1e-3))
    assert back.domain == model.domain


def test_domain_grid_stays_in_ball():
    dom = DomainBall((1.0, -1.0, 0.5), 0.25)
    pts = dom.grid(7)
    assert np.all(np.linalg.norm(pts - np.array(dom.center), axis=1) <= 0.25 * (1 + 1e-12))
    assert len(pts) > 7
    with pytest.raises(ValueError):
        DomainBall((0.0,), 0.0)

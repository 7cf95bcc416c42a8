import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nekhoroshev.angles import Subspace
from nekhoroshev.model import PolynomialH
from nekhoroshev.steepness import (
    SamplingConfig,
    SteepnessProfile,
    check_steepness,
    random_orthogonal_frames,
    steepness_measure,
)


def identity(I):
    return np.asarray(I, dtype=float)


def constant(I):
    I = np.asarray(I, dtype=float)
    return np.broadcast_to(np.array([1.0, 2.0, 3.0]), I.shape).copy()


def saddle(I):
    return np.asarray(I, dtype=float) * np.array([1.0, -1.0, 1.0])


def dense_oracle(omega, I, q, xi, n_eta=320, n_theta=640):
    """Max over a dense eta grid of the min over a dense sphere grid."""
    etas = np.linspace(0, xi, n_eta)
    if q.shape[1] == 1:
        dirs = np.array([q[:, 0], -q[:, 0]])
    else:
        th = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
        dirs = np.cos(th)[:, None] * q[:, 0] + np.sin(th)[:, None] * q[:, 1]
    pts = I + etas[:, None, None] * dirs[None]
    vals = np.linalg.norm(omega(pts) @ q, axis=-1)
    return float(vals.min(axis=1).max())


def test_profile_validation():
    with pytest.raises(ValueError):
        SteepnessProfile(2, (1,), (1,), 1)
    with pytest.raises(ValueError):
        SteepnessProfile(3, (0.5, 1), (1, 1), 1)
    with pytest.raises(ValueError):
        SteepnessProfile(3, (1, 1), (1, 0), 1)
    with pytest.raises(ValueError):
        SteepnessProfile(3, (1, 1), (1, 1), 0)
    p = SteepnessProfile.convex(4, coeff=2)
    assert SteepnessProfile.from_json(p.to_json()) == p
    assert p.required(2, 0.5) == 1


@pytest.mark.parametrize("j", [1, 2])
def test_convex_measure_equals_radius(j, rng):
    I = np.array([1.0, 2.0, 3.0])
    for L in random_orthogonal_frames(I, j, 4, rng):
        assert steepness_measure(identity, I, L, 0.5).value == pytest.approx(0.5, rel=1e-12)


def test_linear_frequency_is_not_steep():
    L = Subspace(np.array([[2.0, -1.0, 0.0]]))
    assert steepness_measure(constant, np.zeros(3), L, 0.3).value < 1e-14


def test_measure_matches_dense_oracle():
    h = PolynomialH(3, [((2, 0, 0), 0.5), ((0, 2, 0), 0.5), ((0, 0, 1), 1.0)])
    I = np.array([1.0, 0.0, 1.0])
    L = Subspace(np.array([[1.0, 0.0, -1.0]]))
    got = steepness_measure(h.frequency, I, L, 0.25).value
    want = dense_oracle(h.frequency, I, L.orthonormal_basis, 0.25)
    assert got > 0
    assert got == pytest.approx(want, rel=0.05)
    assert got == pytest.approx(0.125, rel=1e-12)


def test_planar_measure_matches_dense_oracle(rng):
    h = PolynomialH(3, [((2, 0, 0), 0.5), ((0, 2, 0), 0.2), ((0, 0, 3), 0.3), ((1, 1, 0), 0.1)])
    I = np.array([0.8, 0.5, 1.1])
    L = random_orthogonal_frames(h.frequency(I), 2, 1, rng)[0]
    got = steepness_measure(h.frequency, I, L, 0.3).value
    want = dense_oracle(h.frequency, I, L.orthonormal_basis, 0.3)
    assert got == pytest.approx(want, rel=0.05)


def test_three_dimensional_subspaces_use_multistart(rng):
    I = np.array([1.0, 0.5, 0.2, 0.7])
    L = random_orthogonal_frames(I, 3, 1, rng)[0]
    assert L.dim == 3
    assert steepness_measure(identity, I, L, 0.4).value == pytest.approx(0.4, rel=1e-6)


def test_measure_input_checks():
    with pytest.raises(ValueError):
        steepness_measure(identity, np.zeros(3), Subspace([[1.0, 0, 0]]), 0.1)
    with pytest.raises(ValueError):
        steepness_measure(identity, np.array([1.0, 0, 0]), Subspace([[1.0, 1.0, 0]]), 0.1)
    with pytest.raises(ValueError):
        steepness_measure(identity, np.array([1.0, 0, 0]), Subspace([[0, 1.0, 0]]), 2.0, delta=1)


def test_convex_profile_holds_on_samples(rng):
    prof = SteepnessProfile.convex(3)
    samples = rng.uniform(0.5, 1.5, size=(50, 3))
    rep = check_steepness(identity, prof, samples, sampling=SamplingConfig(frames=2))
    assert rep.verdict == "holds-on-samples" and rep.holds
    assert rep.min_margin >= 1 - 1e-9
    assert rep.status == "heuristic"


def test_linear_frequency_gives_counterexample_at_first_sample():
    rep = check_steepness(constant, SteepnessProfile.convex(3), [np.zeros(3), np.ones(3)], stop_at_first=True)
    assert rep.verdict == "counterexample"
    np.testing.assert_array_equal(rep.counterexample.point, np.zeros(3))
    assert len(rep.to_json(include_records=True)["records"]) == 1


def test_saddle_verdict_agrees_with_dense_oracle():
    prof = SteepnessProfile.convex(3)
    I = np.array([1.0, 1.0, 1.0])
    samples = I + 0.01 * np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    rep = check_steepness(saddle, prof, samples, sampling=SamplingConfig(frames=8))
    # dense oracle over lines orthogonal to omega(I): measure is xi |q.Dq| < xi except on a null set
    w = saddle(I)
    basis = Subspace(w[None, :]).complement().orthonormal_basis
    th = np.linspace(0, np.pi, 2000)
    q = np.cos(th)[:, None] * basis[:, 0] + np.sin(th)[:, None] * basis[:, 1]
    ratios = np.abs(np.einsum("ti,i,ti->t", q, np.array([1.0, -1.0, 1.0]), q))
    oracle = "counterexample" if ratios.min() < 1 - 1e-9 else "holds-on-samples"
    assert rep.verdict == oracle == "counterexample"


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0.01, 100), seed=st.integers(0, 2**31), j=st.sampled_from([1, 2]))
def test_scaling_covariance(c, seed, j):
    h = PolynomialH(3, [((2, 0, 0), 0.5), ((0, 2, 0), 1.0), ((0, 0, 3), 0.2), ((1, 0, 1), 0.3)])
    rng = np.random.default_rng(seed)
    I = rng.uniform(0.5, 1.5, 3)
    L = random_orthogonal_frames(h.frequency(I), j, 1, rng)[0]
    base = steepness_measure(h.frequency, I, L, 0.3).value
    scaled = steepness_measure(lambda x: c * h.frequency(x), I, L, 0.3).value
    assert abs(scaled - c * base) <= 1e-12 * max(1.0, c * base)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), j=st.sampled_from([1, 2]))
def test_refining_eta_grid_never_lowers_measure(seed, j):
    h = PolynomialH(3, [((2, 0, 0), 0.5), ((0, 2, 0), 1.0), ((0, 0, 3), 0.2), ((1, 1, 0), -0.4)])
    rng = np.random.default_rng(seed)
    I = rng.uniform(0.5, 1.5, 3)
    L = random_orthogonal_frames(h.frequency(I), j, 1, rng)[0]
    coarse = steepness_measure(h.frequency, I, L, 0.3, SamplingConfig(n_eta=17)).value
    fine = steepness_measure(h.frequency, I, L, 0.3, SamplingConfig(n_eta=33)).value
    assert fine >= coarse - 1e-9 * max(1.0, coarse)


def test_frames_are_orthogonal_and_reproducible():
    w = np.array([1.0, -2.0, 0.5, 3.0])
    a = random_orthogonal_frames(w, 2, 5, np.random.default_rng(7))
    b = random_orthogonal_frames(w, 2, 5, np.random.default_rng(7))
    for L, M in zip(a, b):
        assert np.abs(L.orthonormal_basis.T @ w).max() < 1e-12
        np.testing.assert_array_equal(L.orthonormal_basis, M.orthonormal_basis)
    assert len(random_orthogonal_frames(w, 3, 5, np.random.default_rng(0))) == 1

import numpy as np
import pytest

from classcap.datamodel import (
    apply_erasure,
    classify_ml,
    complex_normal,
    estimate_error_mc,
    generate_sample,
    loglik_scores,
    pairwise_error_mc,
    restrict_library,
)
from classcap.errors import DimensionError
from classcap.grassmann import ClassLibrary, Frame, sample_isotropic


def orthogonal_lines(n=2):
    e = np.eye(n)
    return Frame(e[:, :1]), Frame(e[:, 1:2])


def test_complex_normal_moments():
    rng = np.random.default_rng(0)
    z = complex_normal(rng, (40000,), 3.0)
    assert abs(np.mean(np.abs(z) ** 2) - 3.0) < 0.1
    assert abs(z.real.var() - 1.5) < 0.1
    assert abs(z.imag.var() - 1.5) < 0.1
    # circularity: pseudo-variance E[z^2] vanishes
    assert abs(np.mean(z**2)) < 0.05


def test_sample_covariance():
    # E[x x^H] = snr * U U^T + I
    u = sample_isotropic(4, 2, seed=3)
    x = generate_sample(u, snr=5.0, seed=10, size=60000)
    cov = (x[:, :, None].conj() * x[:, None, :]).mean(axis=0).T
    target = 5.0 * (u.basis @ u.basis.T) + np.eye(4)
    np.testing.assert_allclose(cov, target, atol=0.12)


def test_sample_shapes_and_determinism():
    u = sample_isotropic(6, 2, seed=1)
    single = generate_sample(u, snr=2.0, seed=4)
    assert single.shape == (6,) and np.iscomplexobj(single)
    batch1 = generate_sample(u, snr=2.0, seed=4, size=3)
    batch2 = generate_sample(u, snr=2.0, seed=4, size=3)
    np.testing.assert_array_equal(batch1, batch2)
    with pytest.raises(ValueError):
        generate_sample(u, snr=0.0, seed=4)


def test_loglik_matches_dense_covariance():
    # same scores from the k-by-k form and from the full m-by-m Gaussian
    # density, up to the class-independent -||x||^2 term
    rng = np.random.default_rng(7)
    mats = rng.standard_normal((3, 5, 2)) * 0.6  # deliberately not orthonormal
    x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    snr = 2.5
    scores = loglik_scores(mats, x, snr=snr)
    for i in range(3):
        sigma = np.eye(5) + snr * mats[i] @ mats[i].T
        dense = -float((x.conj() @ np.linalg.solve(sigma, x)).real)
        dense -= float(np.linalg.slogdet(sigma)[1])
        np.testing.assert_allclose(scores[i], dense + np.vdot(x, x).real, atol=1e-10)


def test_classify_orthonormal_equals_projection_energy():
    rng = np.random.default_rng(8)
    lib = sample_isotropic(8, 2, seed=rng, size=5)
    x = generate_sample(lib[2], snr=4.0, seed=rng, size=64)
    pred = classify_ml(lib, x, snr=4.0)
    energy = np.einsum("lnk,cn->clk", lib.stacked, x)
    alt = np.argmax(np.sum(np.abs(energy) ** 2, axis=-1), axis=-1)
    np.testing.assert_array_equal(pred, alt)


def test_classify_single_vector_ties_to_lowest_index():
    u, _ = orthogonal_lines()
    lib = ClassLibrary((u, u, u))  # identical classes, all scores tie
    x = generate_sample(u, snr=3.0, seed=0)
    assert classify_ml(lib, x, snr=3.0) == 0


def test_pairwise_error_orthogonal_lines():
    # exact confusion for two orthogonal lines at snr 10: the projection
    # energies are independent exponentials with means snr+1 and 1, and
    # P(wrong one is larger) = 1/(snr + 2) = 1/12
    u, v = orthogonal_lines()
    est = pairwise_error_mc(u, v, snr=10.0, trials=200_000, seed=42)
    assert abs(est.p_hat - 1.0 / 12.0) < 0.0025
    assert est.trials == 200_000
    assert 0.0 < est.stderr < 0.001


def test_estimate_error_uniform_guess_floor():
    # identical frames force the classifier to always answer 0, so the
    # error rate is the random-guess floor (L-1)/L
    u, _ = orthogonal_lines(4)
    lib = ClassLibrary((u, u, u, u))
    est = estimate_error_mc(lib, snr=3.0, trials=40_000, seed=5)
    assert abs(est.p_hat - 0.75) < 0.01


def test_estimate_error_deterministic_and_small():
    lib = ClassLibrary(
        (Frame(np.eye(6)[:, :1]), Frame(np.eye(6)[:, 1:2]), Frame(np.eye(6)[:, 2:3]))
    )
    a = estimate_error_mc(lib, snr=100.0, trials=30_000, seed=9)
    b = estimate_error_mc(lib, snr=100.0, trials=30_000, seed=9)
    assert a == b
    assert a.p_hat < 0.05


def test_erasure_of_dead_coordinates_is_exact():
    # frames supported on the first 3 coordinates: dropping the dead ones
    # must not change any score
    base = sample_isotropic(3, 1, seed=13, size=4).stacked
    mats = np.zeros((4, 6, 1))
    mats[:, :3, :] = base
    rng = np.random.default_rng(14)
    x = rng.standard_normal((10, 6)) + 1j * rng.standard_normal((10, 6))
    keep = np.array([True, True, True, False, False, False])
    full = loglik_scores(mats, x, snr=2.0)
    restricted = loglik_scores(
        restrict_library(mats, keep), apply_erasure(x, keep), snr=2.0
    )
    np.testing.assert_allclose(full, restricted, atol=1e-10)


def test_erasure_helpers():
    lib = sample_isotropic(5, 2, seed=20, size=3)
    keep_all = np.ones(5, dtype=bool)
    assert restrict_library(lib, keep_all).shape == (3, 5, 2)
    keep = np.array([True, False, True, False, True])
    assert restrict_library(lib, keep).shape == (3, 3, 2)
    x = np.arange(5.0)
    np.testing.assert_array_equal(apply_erasure(x, keep), [0.0, 2.0, 4.0])
    with pytest.raises(DimensionError):
        apply_erasure(x, keep[:3])
    with pytest.raises(DimensionError):
        restrict_library(lib, keep[:3])


def test_erasure_degrades_separability():
    # keeping fewer coordinates cannot make classification better on
    # average; check the monotone trend at moderate snr
    lib = sample_isotropic(8, 1, seed=30, size=6)
    rng = np.random.default_rng(31)
    labels = rng.integers(6, size=4000)
    c = complex_normal(rng, (4000, 1), 6.0)
    w = complex_normal(rng, (4000, 8), 1.0)
    x = np.einsum("cnk,ck->cn", lib.stacked[labels], c) + w
    full_err = np.mean(classify_ml(lib, x, snr=6.0) != labels)
    keep = np.zeros(8, dtype=bool)
    keep[:3] = True
    err3 = np.mean(
        classify_ml(restrict_library(lib, keep), apply_erasure(x, keep), snr=6.0)
        != labels
    )
    assert full_err < err3


def test_classification_ill_posed_below_subspace_dim():
    # fewer surviving coordinates than the subspace dimension
    lib = sample_isotropic(6, 3, seed=40, size=4)
    keep = np.array([True, False, False, True, False, False])
    mats = restrict_library(lib, keep)
    x = np.ones(2, dtype=complex)
    with pytest.raises(ValueError, match="ill-posed"):
        loglik_scores(mats, x, snr=2.0)

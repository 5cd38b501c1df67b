import numpy as np
import pytest
from scipy.integrate import quad

from classcap.channel import (
    ergodic_rate,
    ergodic_rate_mc,
    feature_budget,
    make_erasure_mask,
    outage_prob,
    outage_rate,
    pmf_received_binomial,
    pmf_received_poisson,
    poisson_approx_tv,
    rate_siso,
    sample_rayleigh_gain,
)

RHO = 10.0**1.5
BW = 5.0e4


def test_rate_frozen_value():
    np.testing.assert_allclose(
        rate_siso(1.0, snr_tx=RHO, bandwidth=BW), 251390.38366752598, rtol=1e-12
    )
    assert rate_siso(0.0, snr_tx=RHO, bandwidth=BW) == 0.0
    batch = rate_siso([0.5, 1.0, 2.0], snr_tx=RHO, bandwidth=BW)
    assert batch.shape == (3,) and np.all(np.diff(batch) > 0)
    with pytest.raises(ValueError):
        rate_siso(-0.1, snr_tx=RHO, bandwidth=BW)
    with pytest.raises(ValueError):
        rate_siso(1.0, snr_tx=0.0, bandwidth=BW)


def test_rayleigh_gain_distribution():
    g = sample_rayleigh_gain(seed=0, size=200_000)
    assert abs(g.mean() - 1.0) < 0.01
    assert abs(g.var() - 1.0) < 0.02
    assert g.min() >= 0.0


def test_outage_rate_frozen_value():
    np.testing.assert_allclose(
        outage_rate(snr_tx=RHO, bandwidth=BW, outage=0.3),
        180906.36427652134,
        rtol=1e-12,
    )
    with pytest.raises(ValueError):
        outage_rate(snr_tx=RHO, bandwidth=BW, outage=0.0)


def test_outage_prob_inverts_outage_rate():
    for delta in (0.05, 0.3, 0.8):
        r = outage_rate(snr_tx=RHO, bandwidth=BW, outage=delta)
        np.testing.assert_allclose(
            outage_prob(r, snr_tx=RHO, bandwidth=BW), delta, rtol=1e-12
        )
    assert outage_prob(0.0, snr_tx=RHO, bandwidth=BW) == 0.0


def test_outage_prob_matches_monte_carlo():
    r = outage_rate(snr_tx=RHO, bandwidth=BW, outage=0.3)
    rates = rate_siso(
        sample_rayleigh_gain(seed=17, size=200_000), snr_tx=RHO, bandwidth=BW
    )
    assert abs(np.mean(rates < r) - 0.3) < 0.005


def test_ergodic_rate_against_quadrature():
    closed = ergodic_rate(snr_tx=RHO, bandwidth=BW)
    np.testing.assert_allclose(closed, 216510.01671992862, rtol=1e-12)
    direct, _ = quad(
        lambda x: BW * np.log2(1.0 + RHO * x) * np.exp(-x), 0.0, np.inf
    )
    np.testing.assert_allclose(closed, direct, rtol=1e-9)


def test_ergodic_rate_against_monte_carlo():
    closed = ergodic_rate(snr_tx=RHO, bandwidth=BW)
    est, stderr = ergodic_rate_mc(snr_tx=RHO, bandwidth=BW, trials=400_000, seed=23)
    assert abs(est - closed) < 3.0 * stderr


def test_feature_budget():
    r = outage_rate(snr_tx=RHO, bandwidth=BW, outage=0.3)
    assert feature_budget(r, 1e-3) == 180
    assert feature_budget(999.9, 1e-3) == 0
    assert feature_budget(0.0, 1e-3) == 0
    with pytest.raises(ValueError):
        feature_budget(-1.0, 1e-3)
    with pytest.raises(ValueError):
        feature_budget(1.0, 0.0)


def test_received_pmfs_normalize():
    pb = pmf_received_binomial(40, 0.2)
    assert pb.shape == (41,)
    np.testing.assert_allclose(pb.sum(), 1.0, rtol=1e-12)
    pp = pmf_received_poisson(40, 0.2, size=200)
    np.testing.assert_allclose(pp.sum(), 1.0, atol=1e-10)
    # binomial mean = (1-eta) s
    np.testing.assert_allclose(np.arange(41) @ pb, 32.0, rtol=1e-12)


def test_poisson_approx_tv_values():
    # the approximation is good only when packets are mostly lost
    # (small success probability); frozen values from direct summation
    np.testing.assert_allclose(poisson_approx_tv(1000, 0.995), 0.00122757, atol=1e-6)
    np.testing.assert_allclose(poisson_approx_tv(100, 0.1), 0.50518462, atol=1e-6)
    assert poisson_approx_tv(10, 0.0) > 0.5  # degenerate vs spread out
    tv_small = poisson_approx_tv(50, 0.99)
    tv_large = poisson_approx_tv(50, 0.5)
    assert tv_small < tv_large


def test_erasure_mask_contiguous_blocks():
    mask = make_erasure_mask(12, 4, 0.5, seed=2)
    assert mask.shape == (12,) and mask.dtype == bool
    blocks = mask.reshape(4, 3)
    assert all(len(set(row.tolist())) == 1 for row in blocks)


def test_erasure_mask_edge_cases():
    assert make_erasure_mask(10, 5, 0.0, seed=1).all()
    assert not make_erasure_mask(10, 5, 1.0, seed=1).any()
    a = make_erasure_mask(10, 5, 0.4, seed=3)
    b = make_erasure_mask(10, 5, 0.4, seed=3)
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        make_erasure_mask(10, 3, 0.4, seed=1)
    with pytest.raises(ValueError):
        make_erasure_mask(10, 5, 1.5, seed=1)


def test_erasure_mask_loss_rate():
    kept = [make_erasure_mask(100, 50, 0.3, seed=s).mean() for s in range(200)]
    assert abs(np.mean(kept) - 0.7) < 0.02

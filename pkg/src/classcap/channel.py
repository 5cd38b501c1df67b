"""Wireless link model: Rayleigh fading rates, outage, packet erasures.

A single-antenna link with transmit SNR rho and bandwidth B carries

    R = B log2(1 + rho |h|^2)   bit/s,

with |h|^2 exponentially distributed (unit mean) under Rayleigh fading.
Slow fading holds the gain fixed for a whole feature vector; the fast
fading model splits the vector into S equal packets, each lost
independently with probability eta, which erases a contiguous block of
feature coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import exp1
from scipy.stats import binom, poisson

from .seeding import as_generator


@dataclass(frozen=True)
class FastFading:
    """Per-slot packetization: `packets` sub-slots, each lost with
    probability `loss_prob`."""

    packets: int
    loss_prob: float

    def __post_init__(self):
        if self.packets < 1:
            raise ValueError(f"need at least one packet, got {self.packets}")
        if not 0.0 <= self.loss_prob < 1.0:
            raise ValueError(
                f"loss probability must be in [0, 1), got {self.loss_prob}"
            )


@dataclass(frozen=True)
class ChannelParams:
    """Link parameters: transmit SNR (linear), bandwidth in Hz, and an
    optional fast-fading packet model."""

    snr_tx: float
    bandwidth: float
    fast: FastFading | None = None

    def __post_init__(self):
        _check_positive("snr_tx", self.snr_tx)
        _check_positive("bandwidth", self.bandwidth)


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not value > 0.0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def rate_siso(gain_sq, *, snr_tx: float, bandwidth: float):
    """Instantaneous rate B log2(1 + snr_tx * |h|^2) in bit/s."""
    snr_tx = _check_positive("snr_tx", snr_tx)
    bandwidth = _check_positive("bandwidth", bandwidth)
    gain_sq = np.asarray(gain_sq, dtype=float)
    if np.any(gain_sq < 0.0):
        raise ValueError("channel gain |h|^2 cannot be negative")
    out = bandwidth * np.log2(1.0 + snr_tx * gain_sq)
    return float(out) if out.ndim == 0 else out


def sample_rayleigh_gain(*, seed, size: int | None = None):
    """Draw |h|^2 ~ Exp(1)."""
    rng = as_generator(seed)
    return rng.exponential(1.0, size=size)


def outage_prob(rate: float, *, snr_tx: float, bandwidth: float) -> float:
    """Probability the fading rate falls below `rate`:
    1 - exp(-(2^(R/B) - 1) / snr_tx)."""
    snr_tx = _check_positive("snr_tx", snr_tx)
    bandwidth = _check_positive("bandwidth", bandwidth)
    if rate <= 0.0:
        return 0.0
    threshold = (2.0 ** (rate / bandwidth) - 1.0) / snr_tx
    return -math.expm1(-threshold)


def outage_rate(*, snr_tx: float, bandwidth: float, outage: float) -> float:
    """Largest rate whose outage probability stays at `outage`:
    B log2(1 + snr_tx ln(1/(1 - outage)))."""
    snr_tx = _check_positive("snr_tx", snr_tx)
    bandwidth = _check_positive("bandwidth", bandwidth)
    if not 0.0 < outage < 1.0:
        raise ValueError(f"outage must be in (0, 1), got {outage}")
    return bandwidth * math.log2(1.0 + snr_tx * math.log(1.0 / (1.0 - outage)))


def ergodic_rate(*, snr_tx: float, bandwidth: float) -> float:
    """Mean fading rate: B e^(1/rho) E1(1/rho) / ln 2."""
    snr_tx = _check_positive("snr_tx", snr_tx)
    bandwidth = _check_positive("bandwidth", bandwidth)
    inv = 1.0 / snr_tx
    return bandwidth * math.exp(inv) * float(exp1(inv)) / math.log(2.0)


def ergodic_rate_mc(
    *, snr_tx: float, bandwidth: float, trials: int, seed
) -> tuple[float, float]:
    """Monte Carlo mean fading rate; returns (estimate, stderr)."""
    gains = sample_rayleigh_gain(seed=seed, size=trials)
    rates = rate_siso(gains, snr_tx=snr_tx, bandwidth=bandwidth)
    return float(rates.mean()), float(rates.std(ddof=1) / np.sqrt(trials))


def feature_budget(rate: float, beta: float) -> int:
    """Features per slot N = floor(beta * R)."""
    beta = _check_positive("beta", beta)
    if rate < 0.0:
        raise ValueError(f"rate cannot be negative, got {rate}")
    return int(math.floor(beta * rate))


def _check_packet_args(s: int, eta: float) -> tuple[int, float]:
    s = int(s)
    if s < 1:
        raise ValueError(f"need at least one packet, got {s}")
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"loss probability must be in [0, 1], got {eta}")
    return s, eta


def pmf_received_binomial(s: int, eta: float) -> np.ndarray:
    """PMF of the number of received packets out of s, Binomial(s, 1-eta)."""
    s, eta = _check_packet_args(s, eta)
    return binom.pmf(np.arange(s + 1), s, 1.0 - eta)


def pmf_received_poisson(s: int, eta: float, size: int | None = None) -> np.ndarray:
    """Poisson((1-eta) s) approximation of the received-packet count,
    on 0..size-1 (default 0..s)."""
    s, eta = _check_packet_args(s, eta)
    size = s + 1 if size is None else int(size)
    return poisson.pmf(np.arange(size), (1.0 - eta) * s)


def poisson_approx_tv(s: int, eta: float) -> float:
    """Total variation between Binomial(s, 1-eta) and Poisson((1-eta)s).

    The grid is extended until the Poisson tail is negligible, so the
    truncation contributes less than 1e-12.
    """
    s, eta = _check_packet_args(s, eta)
    lam = (1.0 - eta) * s
    cut = int(max(s, poisson.ppf(1.0 - 1e-13, lam) if lam > 0 else 0)) + 10
    ns = np.arange(cut + 1)
    pb = np.zeros(cut + 1)
    pb[: s + 1] = pmf_received_binomial(s, eta)
    pp = poisson.pmf(ns, lam)
    return float(0.5 * np.sum(np.abs(pb - pp)) + 0.5 * (1.0 - poisson.cdf(cut, lam)))


def make_erasure_mask(n: int, s: int, eta: float, *, seed) -> np.ndarray:
    """Keep-mask over n coordinates after packet losses.

    The coordinates are split into s contiguous packets (s must divide
    n); each packet survives independently with probability 1 - eta.
    """
    if n < 1:
        raise ValueError(f"need at least one coordinate, got {n}")
    s, eta = _check_packet_args(s, eta)
    if n % s != 0:
        raise ValueError(f"fading speed {s} must divide the feature count {n}")
    rng = as_generator(seed)
    kept_packets = rng.random(s) >= eta
    return np.repeat(kept_packets, n // s)

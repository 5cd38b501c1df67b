"""Pairwise confusion probability of the ML subspace classifier.

For two classes at principal angles theta_1..theta_K and coefficient
SNR sigma^2, the exact confusion probability is a one-dimensional
integral over a product of rational factors, one per angle with
cos(theta_k) < 1.  This module evaluates that integral by composite
Simpson quadrature with an analytic tail bound, and provides closed
bounds in terms of the squared chordal distance, tail bounds on the
distance distribution of random subspaces, and the mean confusion of
randomly drawn class pairs.

Two algebraically published variants of the integrand circulate: a
direct denominator form and a pole-shifted form.  They coincide only
at right angles.  The direct form is the one consistent with Monte
Carlo (and is used as the value); both are evaluated so a disagreement
is detected and logged rather than silently inherited.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import simpson

from .errors import QuadratureError
from .grassmann import ClassLibrary, min_distances

logger = logging.getLogger(__name__)

# Angles with cos(theta) >= 1 - COS_ONE_TOL contribute no factor.
COS_ONE_TOL = 1e-12


def g_factor(snr: float) -> float:
    """Separation gain g = snr^2 / (4 (1 + snr)), increasing in snr."""
    snr = float(snr)
    if not snr > 0.0:
        raise ValueError(f"snr must be positive, got {snr}")
    return snr * snr / (4.0 * (1.0 + snr))


@dataclass(frozen=True)
class PcepQuadOptions:
    """Quadrature controls for the exact confusion integral."""

    half_width: float = 200.0
    nodes: int = 20001
    tail_tol: float = 1e-8
    max_doublings: int = 2
    form_tol: float = 1e-10


@dataclass(frozen=True)
class PcepResult:
    value: float
    alt_value: float
    forms_disagree: bool
    tail_bound: float
    half_width: float
    nodes_used: int


def _factors_direct(w2: np.ndarray, sin2: np.ndarray, snr: float) -> np.ndarray:
    num = 1.0 + snr
    den = snr * snr * np.multiply.outer(w2 + 0.25, sin2) + num
    return np.prod(num / den, axis=-1)


def _factors_pole_shifted(w2: np.ndarray, sin2: np.ndarray, snr: float) -> np.ndarray:
    num = 1.0 + snr
    a2 = 0.25 + num / (snr * snr * sin2 * sin2)
    den = snr * snr * sin2 * (w2[..., None] + a2)
    return np.prod(num / den, axis=-1)


def pcep_exact_detailed(
    angles, snr: float, *, options: PcepQuadOptions | None = None
) -> PcepResult:
    """Exact pairwise confusion probability with quadrature diagnostics.

    `angles` are the principal angles between the two class subspaces.
    Coinciding directions (cos >= 1 - 1e-12) drop out of the product;
    if every direction coincides the subspaces are identical and the
    result is exactly 1/2.

    The integration window is widened (up to `max_doublings` times,
    keeping the node spacing) until the analytic bound on the omitted
    tail falls below `tail_tol`; QuadratureError otherwise.
    """
    opts = options or PcepQuadOptions()
    snr = float(snr)
    if not snr > 0.0:
        raise ValueError(f"snr must be positive, got {snr}")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    keep = np.cos(angles) < 1.0 - COS_ONE_TOL
    sin2 = np.sin(angles[keep]) ** 2
    m = sin2.size
    if m == 0:
        return PcepResult(0.5, 0.5, False, 0.0, opts.half_width, 0)

    # |integrand| <= coef / w^(2m+2) for |w| >= W, integrated analytically
    coef = float(np.prod((1.0 + snr) / (snr * snr * sin2))) / (4.0 * np.pi)
    width = opts.half_width
    nodes = opts.nodes
    for doubling in range(opts.max_doublings + 1):
        tail = 2.0 * coef * width ** (-(2 * m + 1)) / (2 * m + 1)
        if tail <= opts.tail_tol:
            break
        if doubling == opts.max_doublings:
            raise QuadratureError(
                f"tail bound {tail:.3e} exceeds {opts.tail_tol:.1e} "
                f"even at half-width {width:g}"
            )
        width *= 2.0
        nodes = 2 * nodes - 1  # keep spacing fixed

    w = np.linspace(-width, width, nodes)
    w2 = w * w
    base = 1.0 / (4.0 * np.pi * (w2 + 0.25))
    value = float(simpson(base * _factors_direct(w2, sin2, snr), x=w))
    alt = float(simpson(base * _factors_pole_shifted(w2, sin2, snr), x=w))
    disagree = abs(value - alt) > opts.form_tol
    if disagree:
        logger.warning(
            "confusion integrand forms disagree (%.6e vs %.6e); "
            "using the direct denominator form",
            value,
            alt,
        )
    return PcepResult(value, alt, disagree, tail, width, nodes)


def pcep_exact(angles, snr: float, *, options: PcepQuadOptions | None = None) -> float:
    """Exact pairwise confusion probability (see pcep_exact_detailed)."""
    return pcep_exact_detailed(angles, snr, options=options).value


class PcepBounds(NamedTuple):
    lower: float
    upper: float


def pcep_bounds(
    d_sq: float, k: int, snr: float, *, g_override: float | None = None
) -> PcepBounds:
    """Closed bounds on the pairwise confusion at squared distance d_sq.

        1/3 * (1 + (4/k) g d^2)^(-k)  <=  P  <=  1/2 * (1 + g)^(-floor(d^2))

    g_override substitutes the separation gain; it exists only so
    consistency checks can inject a deliberately broken value.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    d_sq = float(d_sq)
    if not 0.0 <= d_sq <= k + 1e-9:
        raise ValueError(f"squared distance {d_sq} outside [0, {k}]")
    g = g_factor(snr) if g_override is None else float(g_override)
    lower = (math.atan(math.sqrt(3.0)) / math.pi) * (1.0 + 4.0 * g * d_sq / k) ** (-k)
    upper = 0.5 * (1.0 + g) ** (-math.floor(min(d_sq, k)))
    return PcepBounds(lower, upper)


class ErrorBounds(NamedTuple):
    lower: float
    upper: float


def error_prob_bounds(
    library: ClassLibrary, snr: float, *, g_override: float | None = None
) -> ErrorBounds:
    """Bounds on the misclassification rate of a library under uniform labels.

    Lower: average over classes of the pairwise lower bound at each
    class's nearest-neighbor distance.  Upper: union bound at the
    global minimum distance, clipped to 1.
    """
    md = min_distances(library)
    k = library.k
    num = len(library)
    g = g_factor(snr) if g_override is None else float(g_override)
    third = math.atan(math.sqrt(3.0)) / math.pi
    lower = float(
        np.mean(third * (1.0 + 4.0 * g * md.per_class / k) ** (-k))
    )
    upper = min(1.0, 0.5 * num * (1.0 + g) ** (-math.floor(min(md.overall, k))))
    return ErrorBounds(lower, upper)


def sin2max_cdf_ub(y, n: int, k: int):
    """Bound P(sin^2 of the largest principal angle <= y) <= y^(k(n-k)/2)
    for one isotropic subspace against any fixed one.  Valid for all n."""
    if k < 1 or n <= k:
        raise ValueError(f"need n > k >= 1, got n={n}, k={k}")
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    out = y ** (0.5 * k * (n - k))
    return float(out) if out.ndim == 0 else out


def distance_cdf_ub(x, n: int, k: int):
    """Bound P(d^2 <= x) <= (x/k)^(k(n-k)/2) for an isotropic pair.

    This is an n-large form: the squared distance concentrates near k
    and its lower tail is dominated by the largest-angle tail.  For
    small n it can undershoot the true CDF; see sin2max_cdf_ub for the
    variant that holds at any n.
    """
    if k < 1 or n <= k:
        raise ValueError(f"need n > k >= 1, got n={n}, k={k}")
    x = np.clip(np.asarray(x, dtype=float) / k, 0.0, 1.0)
    out = x ** (0.5 * k * (n - k))
    return float(out) if out.ndim == 0 else out


def expected_pcep_ub(n: int, k: int, snr: float) -> float:
    """Upper bound on the mean pairwise confusion of two isotropic classes:
    (1/2)(1+g)^(-k) + ln(1+g) / ((1+g) n)."""
    if k < 1 or n <= k:
        raise ValueError(f"need n > k >= 1, got n={n}, k={k}")
    g = g_factor(snr)
    return 0.5 * (1.0 + g) ** (-k) + math.log1p(g) / ((1.0 + g) * n)


def expected_error_ub(n: int, k: int, num_classes: int, snr: float) -> float:
    """Union-bound version of expected_pcep_ub for a random library."""
    if num_classes < 2:
        raise ValueError(f"need at least two classes, got {num_classes}")
    return min(1.0, 0.5 * num_classes * expected_pcep_ub(n, k, snr))


def effective_error(eps: float, outage: float, num_classes: int) -> float:
    """Overall error when an outage (probability `outage`) forces a
    uniform guess: (1 - outage) eps + outage (L-1)/L."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be in [0, 1], got {eps}")
    if not 0.0 <= outage <= 1.0:
        raise ValueError(f"outage must be in [0, 1], got {outage}")
    if num_classes < 1:
        raise ValueError(f"need at least one class, got {num_classes}")
    guess_err = (num_classes - 1) / num_classes
    return (1.0 - outage) * eps + outage * guess_err

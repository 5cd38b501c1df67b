"""How many classes a link can discriminate at a target error rate.

Two regimes are covered.  With class selection, the library is a
max-min packing and the achievable class count grows exponentially in
the communication rate; with isotropically drawn classes the count
grows only linearly.  For each regime this module provides root-solved
counts (inverting the closed error bounds at a feature budget N), the
high-rate closed forms, fading averages (ergodic, outage, packetized
fast fading), and a direct simulation-based estimator.

Counts can be astronomically large (2^900 and beyond), so every result
carries base-2 logarithms alongside the (possibly overflowing) linear
values, and all solving happens in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, logsumexp

from .channel import ChannelParams, ergodic_rate, feature_budget, outage_rate, rate_siso
from .datamodel import estimate_error_mc
from .errorprob import expected_pcep_ub, g_factor
from .grassmann import PackingOptions, pack, sample_isotropic
from .seeding import as_generator

SELECTION = "selection"
RANDOM = "random"

# 2^x overflows float64 beyond this; larger results stay log-only.
_LOG2_LINEAR_MAX = 1023.0

# Bisection stops below this bracket width in log2(classes); keeps the
# residual under 1e-9 * eps even for single-feature budgets.
_BRACKET_TOL = 1e-10


@dataclass(frozen=True)
class CapacityQuery:
    """A capacity question: how many classes at rate `rate` (bit/s).

    `k` is the subspace dimension per class, `snr` the data SNR,
    `eps` the error budget, `beta` the features-per-bit ratio, and
    `regime` either "selection" (packed classes) or "random".
    """

    rate: float
    k: int
    snr: float
    eps: float
    beta: float
    regime: str = SELECTION

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if not self.snr > 0.0:
            raise ValueError(f"snr must be positive, got {self.snr}")
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must be in (0, 1), got {self.eps}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.regime not in (SELECTION, RANDOM):
            raise ValueError(f"unknown regime {self.regime!r}")

    @property
    def features(self) -> int:
        """Integer feature budget N = floor(beta * rate)."""
        return feature_budget(self.rate, self.beta)


@dataclass(frozen=True)
class CapacityResult:
    """Class-count bounds plus solver details.

    A one-sided operation fills its side and leaves the other at the
    trivial bound (1 below, +inf above).  Linear values overflow to
    +inf for counts beyond float range; the log2 fields always hold.
    """

    c_lb: float
    c_ub: float
    log2_c_lb: float
    log2_c_ub: float
    floor_lb: int | None
    floor_ub: int | None
    method: str
    diagnostics: dict


def _linear(log2_value: float) -> float:
    if log2_value >= _LOG2_LINEAR_MAX:
        return math.inf
    return 2.0**log2_value


def _floor_or_none(value: float) -> int | None:
    if math.isinf(value) or math.isnan(value):
        return None
    return int(math.floor(value))


def _result(log2_lb: float, log2_ub: float, method: str, diagnostics: dict):
    c_lb, c_ub = _linear(log2_lb), _linear(log2_ub)
    return CapacityResult(
        c_lb=c_lb,
        c_ub=c_ub,
        log2_c_lb=log2_lb,
        log2_c_ub=log2_ub,
        floor_lb=_floor_or_none(c_lb),
        floor_ub=_floor_or_none(c_ub),
        method=method,
        diagnostics=diagnostics,
    )


def _require_regime(query: CapacityQuery, regime: str) -> None:
    if query.regime != regime:
        raise ValueError(f"operation needs the {regime} regime, got {query.regime}")


class SelectionExponents(NamedTuple):
    """Per-feature log2 capacity growth in the selection regime."""

    lb_per_feature: float
    ub_per_feature: float
    c_sigma: float
    c_eps: float
    g: float


def selection_exponents(k: int, snr: float, eps: float) -> SelectionExponents:
    """Closed-form exponents of the high-rate capacity bounds.

    lb: (k/2)(log2 k + c_sigma - c_eps) per feature, with
    c_sigma = log2 log2 (1+g) and c_eps = log2 log2 ((1+g)/(2 eps));
    ub: (k/2)(log2 4k + log2(4g/(1-3 eps))), defined for eps < 1/3.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if not 0.0 < eps < 1.0 / 3.0:
        raise ValueError(f"eps must be in (0, 1/3) for these exponents, got {eps}")
    g = g_factor(snr)
    c_sigma = math.log2(math.log2(1.0 + g))
    c_eps = math.log2(math.log2((1.0 + g) / (2.0 * eps)))
    lb = 0.5 * k * (math.log2(k) + c_sigma - c_eps)
    ub = 0.5 * k * (math.log2(4.0 * k) + math.log2(4.0 * g / (1.0 - 3.0 * eps)))
    return SelectionExponents(lb, ub, c_sigma, c_eps, g)


def _bisect_log2_classes(h, t_max: float):
    """Root of the increasing function h over log2-class-count t in
    [0, t_max].  Returns (t, flags-and-counters)."""
    info = {"infeasible": False, "saturated": False, "iterations": 0}
    if h(0.0) > 0.0:
        info["infeasible"] = True
        return 0.0, info
    if h(t_max) < 0.0:
        info["saturated"] = True
        return t_max, info
    lo, hi = 0.0, t_max
    while hi - lo > _BRACKET_TOL:
        mid = 0.5 * (lo + hi)
        info["iterations"] += 1
        if h(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), info


def capacity_selection_lb(query: CapacityQuery) -> CapacityResult:
    """Largest class count whose packed-library error bound meets eps.

    Solves (L/2)(1+g)^(-d2) = eps with d2 = k L^(-2/(N k)), the
    guaranteed-packing separation at feature budget N.  The equation is
    solved by bisection on log2 L; both sides of F are increasing in L
    so the root is unique.
    """
    _require_regime(query, SELECTION)
    n = query.features
    if n < query.k:
        raise ValueError(
            f"feature budget {n} is below the subspace dimension {query.k}"
        )
    g = g_factor(query.snr)
    log2_1pg = math.log2(1.0 + g)
    log2_eps = math.log2(query.eps)
    nk = n * query.k

    def h(t: float) -> float:
        return t - 1.0 - query.k * 2.0 ** (-2.0 * t / nk) * log2_1pg - log2_eps

    t, info = _bisect_log2_classes(h, 64.0 * nk)
    diag = dict(info)
    diag["residual"] = abs(query.eps * (2.0 ** h(t) - 1.0))
    diag["d2_at_root"] = query.k * 2.0 ** (-2.0 * t / nk)
    diag["features"] = n
    return _result(t, math.inf, "root_solved", diag)


def capacity_selection_ub(query: CapacityQuery) -> CapacityResult:
    """Largest class count consistent with the packing-impossibility bound.

    Solves (1/3)(1 + 8 g x (2-x))^(-k) = eps where x = L^(-2/(N k));
    the separation no packing can beat is d2 = 2k x (2-x).
    """
    _require_regime(query, SELECTION)
    if not query.eps < 1.0 / 3.0:
        raise ValueError(
            f"eps must be below 1/3 for the upper-bound solve, got {query.eps}"
        )
    n = query.features
    if n < query.k:
        raise ValueError(
            f"feature budget {n} is below the subspace dimension {query.k}"
        )
    g = g_factor(query.snr)
    log2_eps = math.log2(query.eps)
    log2_3 = math.log2(3.0)
    nk = n * query.k
    k = query.k

    def h(t: float) -> float:
        x = 2.0 ** (-2.0 * t / nk)
        return -log2_3 - k * math.log2(1.0 + 8.0 * g * x * (2.0 - x)) - log2_eps

    t, info = _bisect_log2_classes(h, 64.0 * nk)
    x = 2.0 ** (-2.0 * t / nk)
    diag = dict(info)
    diag["residual"] = abs(query.eps * (2.0 ** h(t) - 1.0))
    diag["d2_at_root"] = 2.0 * k * x * (2.0 - x)
    diag["features"] = n
    return _result(0.0, t, "root_solved", diag)


def capacity_selection_asymptotic(
    query: CapacityQuery, *, bandwidth: float | None = None
) -> CapacityResult:
    """High-rate closed forms: log2 counts linear in the rate.

    log2 c_lb = (beta R / 2) k (log2 k + c_sigma - c_eps) and the ub
    analogue.  A nonpositive lb exponent (low SNR or tight eps) is
    flagged as degenerate, not clamped; configurations whose ub-side
    separation d2 fails to exceed 1 are flagged too, since the closed
    ub leans on that inequality.  With `bandwidth` given, gamma-style
    rate exponents (slope times bandwidth) land in the diagnostics.
    """
    _require_regime(query, SELECTION)
    exps = selection_exponents(query.k, query.snr, query.eps)
    n_real = query.beta * query.rate
    log2_lb = n_real * exps.lb_per_feature
    log2_ub = n_real * exps.ub_per_feature
    x = 2.0 ** (-2.0 * log2_ub / (n_real * query.k))
    d2_ub = 2.0 * query.k * x * (2.0 - x)
    diag = {
        "c_sigma": exps.c_sigma,
        "c_eps": exps.c_eps,
        "g": exps.g,
        "slope_lb_per_rate": query.beta * exps.lb_per_feature,
        "slope_ub_per_rate": query.beta * exps.ub_per_feature,
        "degenerate_exponent": exps.lb_per_feature <= 0.0,
        "d2_ub_below_one": d2_ub <= 1.0,
        "d2_ub": d2_ub,
    }
    if bandwidth is not None:
        diag["gamma_lb"] = query.beta * bandwidth * exps.lb_per_feature
        diag["gamma_ub"] = query.beta * bandwidth * exps.ub_per_feature
    return _result(log2_lb, log2_ub, "asymptotic", diag)


def capacity_random_lb(query: CapacityQuery) -> CapacityResult:
    """Guaranteed class count with isotropically drawn classes.

    High-rate form 2 beta eps (1+g) R / ln(1+g), linear in the rate.
    The finite-budget count solving (L/2) * mean-confusion-bound = eps
    rides along in the diagnostics; it saturates in N where the
    asymptote keeps growing, so their ratio tends to 0 at fixed k.
    """
    _require_regime(query, RANDOM)
    g = g_factor(query.snr)
    c = 2.0 * query.beta * query.eps * (1.0 + g) * query.rate / math.log1p(g)
    n = query.features
    diag = {"features": n}
    if n > query.k:
        finite = 2.0 * query.eps / expected_pcep_ub(n, query.k, query.snr)
        diag["finite_n_classes"] = finite
        diag["finite_to_asymptotic"] = finite / c
    # built directly so c_lb stays exactly linear in the rate (the
    # 2**log2 round trip would cost an ulp)
    return CapacityResult(
        c_lb=c,
        c_ub=math.inf,
        log2_c_lb=math.log2(c),
        log2_c_ub=math.inf,
        floor_lb=_floor_or_none(c),
        floor_ub=None,
        method="closed_form",
        diagnostics=diag,
    )


def ergodic_capacity(
    query: CapacityQuery,
    channel: ChannelParams,
    mode: str = "closed_form",
    *,
    trials: int = 200_000,
    seed=0,
) -> CapacityResult:
    """Average class count over the Rayleigh rate distribution.

    Selection, closed_form: Stirling-form bounds sqrt(2 pi gamma)
    rho^gamma e^(gamma(ln gamma - 1)) at gamma = slope * bandwidth
    (the exact-moment version via lgamma sits in the diagnostics).
    Selection, monte_carlo: the high-rate forms averaged over sampled
    gains in log space.  Random: the linear form at the mean rate,
    which by linearity is also its exact gain-average.
    """
    if mode not in ("closed_form", "monte_carlo"):
        raise ValueError(f"unknown mode {mode!r}")
    if query.regime == RANDOM:
        r_bar = ergodic_rate(snr_tx=channel.snr_tx, bandwidth=channel.bandwidth)
        res = capacity_random_lb(replace(query, rate=r_bar))
        diag = dict(res.diagnostics)
        diag["ergodic_rate"] = r_bar
        return replace(res, diagnostics=diag)

    exps = selection_exponents(query.k, query.snr, query.eps)
    if exps.lb_per_feature <= 0.0:
        raise ValueError("degenerate lower exponent; no ergodic closed form")
    gamma_lb = query.beta * channel.bandwidth * exps.lb_per_feature
    gamma_ub = query.beta * channel.bandwidth * exps.ub_per_feature
    diag = {"gamma_lb": gamma_lb, "gamma_ub": gamma_ub}

    if mode == "closed_form":
        ln_rho = math.log(channel.snr_tx)

        def stirling_log2(gamma: float) -> float:
            ln_c = (
                0.5 * math.log(2.0 * math.pi * gamma)
                + gamma * ln_rho
                + gamma * (math.log(gamma) - 1.0)
            )
            return ln_c / math.log(2.0)

        def exact_moment_log2(gamma: float) -> float:
            return (gamma * ln_rho + float(gammaln(gamma + 1.0))) / math.log(2.0)

        diag["log2_gamma_moment_lb"] = exact_moment_log2(gamma_lb)
        diag["log2_gamma_moment_ub"] = exact_moment_log2(gamma_ub)
        return _result(
            stirling_log2(gamma_lb), stirling_log2(gamma_ub), "closed_form", diag
        )

    rng = as_generator(seed)
    gains = rng.exponential(1.0, size=trials)
    rates = rate_siso(gains, snr_tx=channel.snr_tx, bandwidth=channel.bandwidth)
    ln2 = math.log(2.0)

    def mc_log2(slope_per_rate: float) -> float:
        ln_values = slope_per_rate * rates * ln2
        return float((logsumexp(ln_values) - math.log(trials)) / ln2)

    diag["trials"] = trials
    return _result(
        mc_log2(query.beta * exps.lb_per_feature),
        mc_log2(query.beta * exps.ub_per_feature),
        "monte_carlo",
        diag,
    )


def outage_capacity(
    query: CapacityQuery, channel: ChannelParams, delta: float
) -> CapacityResult:
    """Class count at the largest rate whose outage stays below delta.

    Selection: closed forms (1 + rho ln(1/(1-delta)))^gamma, which
    coincide exactly with the high-rate forms evaluated at the outage
    rate; the root-solved counts at that rate are reported in the
    diagnostics.  Random: the linear form at the outage rate.
    """
    r_delta = outage_rate(
        snr_tx=channel.snr_tx, bandwidth=channel.bandwidth, outage=delta
    )
    at_rate = replace(query, rate=r_delta)
    if query.regime == RANDOM:
        res = capacity_random_lb(at_rate)
        diag = dict(res.diagnostics)
        diag["outage_rate"] = r_delta
        return replace(res, diagnostics=diag)

    exps = selection_exponents(query.k, query.snr, query.eps)
    base = math.log2(
        1.0 + channel.snr_tx * math.log(1.0 / (1.0 - delta))
    )  # = r_delta / bandwidth
    gamma_lb = query.beta * channel.bandwidth * exps.lb_per_feature
    gamma_ub = query.beta * channel.bandwidth * exps.ub_per_feature
    diag = {"outage_rate": r_delta, "gamma_lb": gamma_lb, "gamma_ub": gamma_ub}
    if at_rate.features >= query.k:
        root_lb = capacity_selection_lb(at_rate)
        root_ub = capacity_selection_ub(at_rate)
        diag["log2_root_lb"] = root_lb.log2_c_lb
        diag["log2_root_ub"] = root_ub.log2_c_ub
        diag["root_flags"] = {
            "lb": {k: v for k, v in root_lb.diagnostics.items() if isinstance(v, bool)},
            "ub": {k: v for k, v in root_ub.diagnostics.items() if isinstance(v, bool)},
        }
    else:
        # root solvers need at least k features; the closed forms do not
        diag["root_skipped_features"] = at_rate.features
    return _result(gamma_lb * base, gamma_ub * base, "closed_form", diag)


def fastfading_capacity(
    query: CapacityQuery,
    channel: ChannelParams,
    mode: str = "closed_form",
    *,
    trials: int = 200_000,
    seed=0,
) -> CapacityResult:
    """Average class count when packets within a slot fade independently.

    Selection, closed_form: e^((1-eta) S (z - 1)) with
    z = 2^(slope_per_feature * N / S), the Poisson limit of averaging
    the high-rate form over the received-packet count; the exact
    binomial average (eta + (1-eta) z)^S is always computed alongside
    as a diagnostic.  Selection, monte_carlo: the same average by
    sampling the binomial count.  Random: the linear form at the mean
    delivered rate (1-eta) N / beta.
    """
    if channel.fast is None:
        raise ValueError("channel has no fast-fading parameters")
    if mode not in ("closed_form", "monte_carlo"):
        raise ValueError(f"unknown mode {mode!r}")
    s, eta = channel.fast.packets, channel.fast.loss_prob
    n = query.features
    if n % s != 0:
        raise ValueError(f"fading speed {s} must divide the feature count {n}")

    if query.regime == RANDOM:
        r_bar = (1.0 - eta) * n / query.beta
        res = capacity_random_lb(replace(query, rate=r_bar))
        diag = dict(res.diagnostics)
        diag["delivered_rate"] = r_bar
        return replace(res, diagnostics=diag)

    exps = selection_exponents(query.k, query.snr, query.eps)
    ln2 = math.log(2.0)

    def poisson_log2(per_feature: float) -> float:
        exponent = per_feature * n / s
        if exponent >= _LOG2_LINEAR_MAX:
            return math.inf
        z = 2.0**exponent
        return (1.0 - eta) * s * (z - 1.0) / ln2

    def binomial_log2(per_feature: float) -> float:
        ln_z = per_feature * (n / s) * ln2
        ln_term = np.logaddexp(
            math.log(eta) if eta > 0.0 else -math.inf,
            math.log1p(-eta) + ln_z,
        )
        return float(s * ln_term / ln2)

    diag = {
        "features": n,
        "log2_binomial_lb": binomial_log2(exps.lb_per_feature),
        "log2_binomial_ub": binomial_log2(exps.ub_per_feature),
    }

    if mode == "closed_form":
        return _result(
            poisson_log2(exps.lb_per_feature),
            poisson_log2(exps.ub_per_feature),
            "closed_form",
            diag,
        )

    rng = as_generator(seed)
    counts = rng.binomial(s, 1.0 - eta, size=trials)
    features_seen = counts * (n / s)

    def mc_log2(per_feature: float) -> float:
        ln_values = per_feature * features_seen * ln2
        return float((logsumexp(ln_values) - math.log(trials)) / ln2)

    diag["trials"] = trials
    return _result(
        mc_log2(exps.lb_per_feature),
        mc_log2(exps.ub_per_feature),
        "monte_carlo",
        diag,
    )


def empirical_capacity(
    regime: str,
    n: int,
    k: int,
    snr: float,
    eps: float,
    *,
    trials: int = 20_000,
    seed=0,
    libraries: int = 20,
    max_classes: int = 4096,
    packing_options: PackingOptions | None = None,
) -> int:
    """Largest class count passing a direct error simulation.

    Doubles the candidate count until the Monte Carlo error estimate
    rejects it (accept means p_hat + 2 stderr <= eps), then bisects.
    Selection builds a packing per candidate; random averages the error
    over independently sampled libraries, with the spread across
    libraries as the uncertainty.  Returns at least 1; `max_classes`
    caps the search.  Candidate seeds derive from the count itself, so
    results do not depend on the search path.
    """
    if regime not in (SELECTION, RANDOM):
        raise ValueError(f"unknown regime {regime!r}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    opts = packing_options or PackingOptions(restarts=8, iters=800)
    cache: dict[int, bool] = {}

    def accepted(num_classes: int) -> bool:
        if num_classes in cache:
            return cache[num_classes]
        pack_seed = np.random.SeedSequence(seed, spawn_key=(num_classes, 0))
        mc_seed = np.random.SeedSequence(seed, spawn_key=(num_classes, 1))
        if regime == SELECTION:
            report = pack(n, k, num_classes, seed=pack_seed, options=opts)
            est = estimate_error_mc(report.library, snr=snr, trials=trials, seed=mc_seed)
            ok = est.p_hat + 2.0 * est.stderr <= eps
        else:
            per_lib = max(trials // libraries, 200)
            rates = []
            for child in mc_seed.spawn(libraries):
                lib = sample_isotropic(n, k, seed=child, size=num_classes)
                rates.append(
                    estimate_error_mc(lib, snr=snr, trials=per_lib, seed=child).p_hat
                )
            rates = np.asarray(rates)
            spread = float(rates.std(ddof=1) / math.sqrt(libraries))
            ok = float(rates.mean()) + 2.0 * spread <= eps
        cache[num_classes] = ok
        return ok

    if not accepted(2):
        return 1
    lo, hi = 2, 4
    while hi <= max_classes and accepted(hi):
        lo, hi = hi, hi * 2
    if hi > max_classes:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if accepted(mid):
            lo = mid
        else:
            hi = mid
    return lo

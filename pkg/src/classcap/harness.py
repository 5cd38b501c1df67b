"""Command-line front end: experiments, sweeps, and self-validation.

Subcommands:

    pack      solve a max-min subspace packing and write it to a file
    pcep      pairwise confusion table (exact + bounds) for angles or a packing
    error     Monte Carlo error rate for a packed or sampled library
    capacity  rate sweep of class-count bounds, with optional fading averages
    verify    run the numerical cross-checks and report pass/fail

Configuration comes from an INI file (sections mirror the library
modules) plus CLI flag overrides; every stochastic step derives from
one seed, so repeated runs emit byte-identical CSV.  SNRs are taken in
dB on the surface and converted to linear scale internally.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .capacity import (
    CapacityQuery,
    capacity_random_lb,
    capacity_selection_asymptotic,
    capacity_selection_lb,
    capacity_selection_ub,
    ergodic_capacity,
    fastfading_capacity,
    outage_capacity,
)
from .channel import (
    ChannelParams,
    FastFading,
    ergodic_rate,
    ergodic_rate_mc,
    outage_rate,
    poisson_approx_tv,
    rate_siso,
)
from .datamodel import (
    MC_CHUNK,
    ErrorEstimate,
    _check_snr,
    _chunk_sizes,
    classify_ml,
    complex_normal,
    estimate_error_mc,
    pairwise_error_mc,
)
from .errorprob import (
    distance_cdf_ub,
    error_prob_bounds,
    expected_pcep_ub,
    g_factor,
    pcep_bounds,
    pcep_exact,
)
from .grassmann import (
    ClassLibrary,
    Frame,
    PackingOptions,
    chordal_distance_sq,
    pack,
    principal_angles,
    read_packing,
    sample_isotropic,
    write_packing,
)
from .seeding import as_generator, spawn

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass
class ExperimentConfig:
    """Experiment settings; defaults follow the reference operating
    point (15 dB transmit and data SNR, 50 kHz bandwidth, error budgets
    0.03 for selected and 0.19 for random classes, outage 0.3)."""

    regime: str = "selection"
    seed: int = 0
    threads: int = 1
    snr_tx_db: float = 15.0
    bandwidth: float = 5e4
    packets: int = 0  # 0 disables the fast-fading packet model
    loss_prob: float = 0.0
    n: int = 64
    k: int = 2
    snr_db: float = 15.0
    beta: float = 1e-3
    eps: float = 0.03
    eps_random: float = 0.19
    delta: float = 0.3
    rate_min: float = 32_000.0
    rate_max: float = 512_000.0
    points: int = 9
    log_spaced: bool = True
    trials: int = 100_000
    libraries: int = 20

    def validate(self):
        if self.regime not in ("selection", "random"):
            raise ValueError(f"regime: unknown value {self.regime!r}")
        if not self.rate_min < self.rate_max:
            raise ValueError(
                f"rate_min/rate_max: need rate_min < rate_max, "
                f"got {self.rate_min} and {self.rate_max}"
            )
        if self.points < 2:
            raise ValueError(f"points: need at least 2, got {self.points}")
        if self.k < 1 or self.n < self.k:
            raise ValueError(f"n/k: need n >= k >= 1, got n={self.n} k={self.k}")
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps: must be in (0, 1), got {self.eps}")
        if not 0.0 < self.eps_random < 1.0:
            raise ValueError(f"eps_random: must be in (0, 1), got {self.eps_random}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta: must be in (0, 1), got {self.delta}")
        if self.packets < 0:
            raise ValueError(f"packets: must be nonnegative, got {self.packets}")
        if not 0.0 <= self.loss_prob < 1.0:
            raise ValueError(f"loss_prob: must be in [0, 1), got {self.loss_prob}")
        if self.trials < 1 or self.libraries < 1:
            raise ValueError("trials/libraries: must be positive")
        if self.threads < 1:
            raise ValueError(f"threads: must be positive, got {self.threads}")
        return self

    def channel(self) -> ChannelParams:
        fast = None
        if self.packets:
            fast = FastFading(packets=self.packets, loss_prob=self.loss_prob)
        return ChannelParams(
            snr_tx=db_to_linear(self.snr_tx_db), bandwidth=self.bandwidth, fast=fast
        )

    @property
    def snr(self) -> float:
        return db_to_linear(self.snr_db)

    def rates(self) -> np.ndarray:
        if self.log_spaced:
            return np.geomspace(self.rate_min, self.rate_max, self.points)
        return np.linspace(self.rate_min, self.rate_max, self.points)


# (ini section, ini key) -> (field name, parser)
_CONFIG_SCHEMA = {
    ("experiment", "regime"): ("regime", str),
    ("experiment", "seed"): ("seed", int),
    ("experiment", "threads"): ("threads", int),
    ("channel", "snr_tx_db"): ("snr_tx_db", float),
    ("channel", "bandwidth"): ("bandwidth", float),
    ("channel", "packets"): ("packets", int),
    ("channel", "loss_prob"): ("loss_prob", float),
    ("data", "n"): ("n", int),
    ("data", "k"): ("k", int),
    ("data", "snr_db"): ("snr_db", float),
    ("capacity", "beta"): ("beta", float),
    ("capacity", "eps"): ("eps", float),
    ("capacity", "eps_random"): ("eps_random", float),
    ("capacity", "delta"): ("delta", float),
    ("sweep", "rate_min"): ("rate_min", float),
    ("sweep", "rate_max"): ("rate_max", float),
    ("sweep", "points"): ("points", int),
    ("sweep", "log_spaced"): ("log_spaced", None),  # bool; parsed specially
    ("mc", "trials"): ("trials", int),
    ("mc", "libraries"): ("libraries", int),
}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def load_config(path: str | None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from defaults, an optional INI file, then overrides."""
    values: dict = {}
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_file(fh)
        for section in parser.sections():
            for key, raw in parser.items(section):
                try:
                    field_name, caster = _CONFIG_SCHEMA[(section, key)]
                except KeyError:
                    raise ValueError(f"unknown config entry [{section}] {key}")
                values[field_name] = (
                    _parse_bool(raw) if caster is None else caster(raw)
                )
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return ExperimentConfig(**values).validate()


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _config_from_args(args) -> ExperimentConfig:
    overrides = {
        name: getattr(args, name)
        for name in _FIELD_NAMES
        if getattr(args, name, None) is not None
    }
    return load_config(getattr(args, "config", None), overrides)


def _format(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.12g" % value


def write_csv(rows, header, out_path: str | None):
    """Emit rows (lists of values) as CSV with LF endings; stdout when
    no path is given."""
    lines = [",".join(header)]
    lines.extend(",".join(_format(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)


def erasure_error_mc(
    library: ClassLibrary,
    *,
    snr: float,
    packets: int,
    loss_prob: float,
    trials: int,
    seed=0,
    chunk: int = MC_CHUNK,
) -> ErrorEstimate:
    """Monte Carlo error rate with per-packet coordinate erasures.

    Each trial drops every packet (a contiguous block of coordinates)
    independently with probability `loss_prob` and classifies on the
    survivors.  Trials left with fewer coordinates than the subspace
    dimension are scored as random guesses (error with probability
    (L-1)/L).  Masks come from a side stream, so with loss_prob = 0
    the sample draws and decisions match estimate_error_mc exactly.
    """
    snr = _check_snr(snr)
    stack = library.stacked
    num_classes, n, k = stack.shape
    if packets < 1 or n % packets:
        raise ValueError(f"packets must divide the {n} coordinates, got {packets}")
    if not 0.0 <= loss_prob < 1.0:
        raise ValueError(f"loss_prob must be in [0, 1), got {loss_prob}")
    block = n // packets
    sizes = _chunk_sizes(trials, chunk)
    errors = 0
    for child, num in zip(spawn(seed, len(sizes)), sizes):
        mask_rng = as_generator(spawn(child, 1)[0])
        rng = as_generator(child)
        labels = rng.integers(num_classes, size=num)
        c = complex_normal(rng, (num, k), snr)
        w = complex_normal(rng, (num, n), 1.0)
        x = np.einsum("cnk,ck->cn", stack[labels], c) + w
        keep = np.repeat(
            mask_rng.random((num, packets)) >= loss_prob, block, axis=1
        )
        if keep.all():
            pred = classify_ml(library, x, snr=snr)
            errors += int(np.count_nonzero(pred != labels))
            continue
        starved = keep.sum(axis=1) < k
        guesses = mask_rng.random(int(np.count_nonzero(starved)))
        errors += int(np.count_nonzero(guesses < (num_classes - 1) / num_classes))
        healthy = ~starved
        if not healthy.any():
            continue
        kh = keep[healthy].astype(float)
        xh = np.where(keep[healthy], x[healthy], 0.0)
        # per-trial Gram matrices over the surviving coordinates; zeroed
        # rows contribute nothing, so masking equals row removal
        gram = np.einsum("tm,lmk,lmj->tlkj", kh, stack, stack, optimize=True)
        a = np.eye(k) + snr * gram
        z = np.einsum("lmk,tm->tlk", stack, xh)
        solved = np.linalg.solve(a, z[..., np.newaxis])[..., 0]
        quad = np.einsum("tlk,tlk->tl", z.conj(), solved).real
        _, logdet = np.linalg.slogdet(a)
        pred = np.argmax(snr * quad - logdet, axis=-1)
        errors += int(np.count_nonzero(pred != labels[healthy]))
    p = errors / trials
    return ErrorEstimate(p, float(np.sqrt(p * (1.0 - p) / trials)), trials)


def cmd_pack(args) -> int:
    if args.k > args.n:
        raise ValueError(f"k exceeds n (k={args.k}, n={args.n})")
    opts = PackingOptions(restarts=args.restarts, iters=args.iters)
    report = pack(args.n, args.k, args.l, seed=args.seed, options=opts)
    bounds = report.bounds
    clamp = " (upper clamped)" if bounds.clamped else ""
    print(
        f"n={args.n} k={args.k} l={args.l} "
        f"d_min_sq={report.d_min_sq:.12g} "
        f"bracket=[{bounds.lower_sq:.12g}, {bounds.upper_sq:.12g}]{clamp}"
    )
    if args.out is not None:
        write_packing(args.out, report.library)
        print(f"wrote {args.out}")
    return EXIT_OK


def _parse_angles(text: str) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise ValueError(f"bad angle list {text!r}: {exc}")
    if vals.size == 0:
        raise ValueError("empty angle list")
    if np.any(vals < 0.0) or np.any(vals > math.pi / 2.0 + 1e-12):
        raise ValueError("principal angles must lie in [0, pi/2]")
    return vals


def pcep_exact_pair(frame_a: Frame, frame_b: Frame, snr: float) -> float:
    return pcep_exact(principal_angles(frame_a, frame_b), snr)


def cmd_pcep(args) -> int:
    snr = db_to_linear(args.snr_db)
    rows = []
    if args.angles is not None:
        angles = _parse_angles(args.angles)
        d_sq = float(np.sum(np.sin(angles) ** 2))
        exact = pcep_exact(angles, snr)
        bounds = pcep_bounds(d_sq, angles.size, snr)
        rows.append(
            ("0-1", d_sq, exact, bounds.lower, bounds.upper,
             bounds.lower <= exact <= bounds.upper)
        )
    else:
        library = read_packing(args.packing)
        for i in range(len(library)):
            for j in range(i + 1, len(library)):
                exact = pcep_exact_pair(library[i], library[j], snr)
                d_sq = chordal_distance_sq(library[i], library[j])
                bounds = pcep_bounds(d_sq, library.k, snr)
                rows.append(
                    (f"{i}-{j}", d_sq, exact, bounds.lower, bounds.upper,
                     bounds.lower <= exact <= bounds.upper)
                )
    header = ["pair", "d_sq", "pcep_exact_probability", "lb_probability",
              "ub_probability", "sandwich_ok"]
    write_csv(rows, header, args.out)
    return EXIT_OK


def _load_library(args, config: ExperimentConfig) -> ClassLibrary:
    if args.packing is not None:
        return read_packing(args.packing)
    if args.random_classes is not None:
        return sample_isotropic(
            config.n, config.k, seed=config.seed, size=args.random_classes
        )
    raise ValueError("need either --packing or --random-classes")


def cmd_error(args) -> int:
    config = _config_from_args(args)
    library = _load_library(args, config)
    if config.packets > 0:
        est = erasure_error_mc(
            library, snr=config.snr, packets=config.packets,
            loss_prob=config.loss_prob, trials=config.trials, seed=config.seed,
        )
        lb = ub = math.nan
    else:
        est = estimate_error_mc(
            library, snr=config.snr, trials=config.trials, seed=config.seed
        )
        bounds = error_prob_bounds(library, config.snr)
        lb, ub = bounds.lower, bounds.upper
    header = ["p_hat_probability", "stderr_probability", "trials",
              "lb_probability", "ub_probability"]
    write_csv([(est.p_hat, est.stderr, est.trials, lb, ub)], header, args.out)
    return EXIT_OK


def _fast_rate_for_budget(features: int, beta: float) -> float:
    # midpoint keeps floor(beta * rate) pinned to the intended budget
    return (features + 0.5) / beta


def _capacity_row(config: ExperimentConfig, rate: float, fading: str, channel):
    snr = config.snr
    sel = CapacityQuery(rate=rate, k=config.k, snr=snr, eps=config.eps,
                        beta=config.beta)
    rnd = replace(sel, eps=config.eps_random, regime="random")
    nan = math.nan
    if sel.features >= config.k:
        root_lb = capacity_selection_lb(sel)
        root_ub = capacity_selection_ub(sel)
        root_vals = (root_lb.c_lb, root_ub.c_ub, root_lb.log2_c_lb,
                     root_ub.log2_c_ub)
    else:
        root_vals = (nan, nan, nan, nan)
    asym = capacity_selection_asymptotic(sel)
    random = capacity_random_lb(rnd)
    row = [
        rate,
        root_vals[0], root_vals[1],
        asym.c_lb, asym.c_ub,
        random.c_lb,
        root_vals[2], root_vals[3],
        asym.log2_c_lb, asym.log2_c_ub,
    ]
    if fading == "ergodic":
        try:
            erg = ergodic_capacity(sel, channel)
            erg_vals = (erg.c_lb, erg.c_ub)
        except ValueError:
            # degenerate lower exponent: no closed form at this (k, eps, snr)
            erg_vals = (nan, nan)
        erg_rnd = ergodic_capacity(rnd, channel)
        row += [erg_vals[0], erg_vals[1], erg_rnd.c_lb]
    elif fading == "outage":
        out = outage_capacity(sel, channel, config.delta)
        out_rnd = outage_capacity(rnd, channel, config.delta)
        row += [out.c_lb, out.c_ub, out_rnd.c_lb,
                out.diagnostics["outage_rate"]]
    elif fading == "fast":
        s = channel.fast.packets
        n_used = (sel.features // s) * s
        if n_used >= max(config.k, s):
            budget_rate = _fast_rate_for_budget(n_used, config.beta)
            fast = fastfading_capacity(replace(sel, rate=budget_rate), channel)
            fast_rnd = fastfading_capacity(replace(rnd, rate=budget_rate), channel)
            row += [fast.c_lb, fast.c_ub, fast_rnd.c_lb, n_used]
        else:
            row += [nan, nan, nan, n_used]
    return row


_CAPACITY_HEADER = [
    "R_bit_per_s",
    "C_lb_root_classes", "C_ub_root_classes",
    "C_lb_asym_classes", "C_ub_asym_classes",
    "C_random_classes",
    "log2_C_lb_root", "log2_C_ub_root",
    "log2_C_lb_asym", "log2_C_ub_asym",
]
_FADING_COLUMNS = {
    "none": [],
    "ergodic": ["C_ergodic_lb_classes", "C_ergodic_ub_classes",
                "C_ergodic_random_classes"],
    "outage": ["C_outage_lb_classes", "C_outage_ub_classes",
               "C_outage_random_classes", "R_delta_bit_per_s"],
    "fast": ["C_fast_lb_classes", "C_fast_ub_classes",
             "C_fast_random_classes", "N_used_features"],
}


def cmd_capacity(args) -> int:
    config = _config_from_args(args)
    fading = args.fading
    channel = config.channel()
    if fading == "fast" and channel.fast is None:
        raise ValueError("--fading fast needs channel packets > 0")
    rates = config.rates()

    def worker(rate):
        return _capacity_row(config, float(rate), fading, channel)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            rows = list(pool.map(worker, rates))  # map keeps sweep order
    else:
        rows = [worker(r) for r in rates]
    write_csv(rows, _CAPACITY_HEADER + _FADING_COLUMNS[fading], args.out)
    return EXIT_OK


class CheckResult:
    def __init__(self, name: str, passed: bool, margin: float, detail: str):
        self.name = name
        self.passed = passed
        self.margin = margin
        self.detail = detail

    def row(self, seed: int):
        return (self.name, "pass" if self.passed else "FAIL",
                self.margin, self.detail, seed)


def _frames_with_angles(angles) -> tuple[Frame, Frame]:
    """Build two frames whose principal angles are exactly `angles`."""
    k = len(angles)
    n = 2 * k
    a = np.zeros((n, k))
    b = np.zeros((n, k))
    for i, theta in enumerate(angles):
        a[2 * i, i] = 1.0
        b[2 * i, i] = math.cos(theta)
        b[2 * i + 1, i] = math.sin(theta)
    return Frame(a), Frame(b)


def pairwise_cross_distance(a: ClassLibrary, b: ClassLibrary) -> np.ndarray:
    """Squared chordal distance between a[i] and b[i] for each i."""
    g = np.einsum("ink,inm->ikm", a.stacked, b.stacked)
    return a.k - np.einsum("ikm,ikm->i", g, g)


def _verify_checks(config: ExperimentConfig, g_override: float | None):
    """Numerical cross-checks; margin > 0 means the check passed with
    that much room."""
    snr = config.snr
    checks = []
    seeds = np.random.SeedSequence(config.seed).spawn(8)

    # pairwise error sandwiched by the distance bounds
    pairs = 300
    a = sample_isotropic(config.n, config.k, seed=seeds[0], size=pairs)
    b = sample_isotropic(config.n, config.k, seed=seeds[1], size=pairs)
    slack_lo = math.inf
    slack_hi = math.inf
    for fa, fb in zip(a, b):
        exact = pcep_exact_pair(fa, fb, snr)
        bounds = pcep_bounds(
            chordal_distance_sq(fa, fb), config.k, snr, g_override=g_override
        )
        slack_lo = min(slack_lo, exact - bounds.lower)
        slack_hi = min(slack_hi, bounds.upper - exact)
    margin = min(slack_lo, slack_hi)
    checks.append(CheckResult(
        "pair_sandwich", margin >= 0.0, margin,
        f"{pairs} isotropic pairs at n={config.n} k={config.k}",
    ))

    # library error between nearest-pair bound and union bound
    library = pack(8, 2, 8, seed=seeds[2],
                   options=PackingOptions(restarts=4, iters=400)).library
    est = estimate_error_mc(library, snr=snr, trials=60_000, seed=seeds[3])
    lib_bounds = error_prob_bounds(library, snr, g_override=g_override)
    lo = lib_bounds.lower - 3.0 * est.stderr
    hi = lib_bounds.upper + 3.0 * est.stderr
    margin = min(est.p_hat - lo, hi - est.p_hat)
    checks.append(CheckResult(
        "library_sandwich", margin >= 0.0, margin,
        f"packed l=8 error {est.p_hat:.5f} in [{lo:.5f}; {hi:.5f}]",
    ))

    # quadrature against direct pairwise simulation
    margin = math.inf
    for angles in ([math.pi / 2], [0.4, 1.0]):
        fa, fb = _frames_with_angles(angles)
        exact = pcep_exact(np.array(angles), snr)
        mc = pairwise_error_mc(fa, fb, snr=snr, trials=200_000, seed=seeds[4])
        margin = min(margin, 4.0 * max(mc.stderr, 1e-12) - abs(mc.p_hat - exact))
    checks.append(CheckResult(
        "quadrature_vs_mc", margin >= 0.0, margin, "two fixed-angle pairs",
    ))

    # isotropic distance CDF dominated by its closed-form bound
    pairs = 4000
    a = sample_isotropic(64, 2, seed=seeds[5], size=pairs)
    b = sample_isotropic(64, 2, seed=seeds[6], size=pairs)
    d2 = pairwise_cross_distance(a, b)
    margin = math.inf
    for x in np.linspace(0.2, 1.8, 9):
        emp = float(np.mean(d2 <= x))
        margin = min(margin, float(distance_cdf_ub(float(x), 64, 2)) + 0.02 - emp)
    checks.append(CheckResult(
        "distance_cdf", margin >= 0.0, margin,
        "decile grid at n=64 k=2 with 0.02 slack",
    ))

    # mean pairwise confusion below its closed-form bound
    mean_pcep = float(np.mean([
        pcep_exact_pair(fa, fb, snr) for fa, fb in zip(a[:800], b[:800])
    ]))
    bound = expected_pcep_ub(64, 2, snr)
    checks.append(CheckResult(
        "mean_pcep_bound", mean_pcep <= bound, bound - mean_pcep,
        f"measured {mean_pcep:.6f} vs bound {bound:.6f}",
    ))

    # outage probability at the outage rate comes back as delta
    channel = config.channel()
    r_delta = outage_rate(snr_tx=channel.snr_tx, bandwidth=channel.bandwidth,
                          outage=config.delta)
    gains = as_generator(seeds[7]).exponential(1.0, size=200_000)
    sim_rates = rate_siso(gains, snr_tx=channel.snr_tx,
                          bandwidth=channel.bandwidth)
    hit = float(np.mean(sim_rates < r_delta))
    margin = 0.005 - abs(hit - config.delta)
    checks.append(CheckResult(
        "outage_mc", margin >= 0.0, margin,
        f"simulated {hit:.4f} vs delta {config.delta}",
    ))

    # ergodic rate closed form against simulation
    closed = ergodic_rate(snr_tx=channel.snr_tx, bandwidth=channel.bandwidth)
    mc_rate, mc_err = ergodic_rate_mc(
        snr_tx=channel.snr_tx, bandwidth=channel.bandwidth,
        trials=200_000, seed=config.seed,
    )
    margin = 3.0 * mc_err - abs(mc_rate - closed)
    checks.append(CheckResult(
        "ergodic_rate", margin >= 0.0, margin,
        f"closed {closed:.6g} vs mc {mc_rate:.6g}",
    ))

    # outage class count closed form equals the high-rate form at R_delta
    q = CapacityQuery(rate=r_delta, k=4, snr=snr, eps=min(config.eps, 0.32),
                      beta=config.beta)
    out = outage_capacity(q, channel, config.delta)
    asym = capacity_selection_asymptotic(q)
    rel = abs(out.log2_c_lb - asym.log2_c_lb) / abs(asym.log2_c_lb)
    checks.append(CheckResult(
        "outage_identity", rel <= 1e-9, 1e-9 - rel,
        "closed form vs rate substitution",
    ))

    # packet-count model: Poisson approximation in the rare-delivery limit
    tv = poisson_approx_tv(1000, 0.995)
    checks.append(CheckResult(
        "poisson_tv", tv < 0.05, 0.05 - tv, f"tv {tv:.6f} at s=1000 eta=0.995",
    ))

    # erasure simulation with no losses matches the plain estimator
    small = sample_isotropic(8, 2, seed=config.seed, size=6)
    plain = estimate_error_mc(small, snr=snr, trials=20_000, seed=config.seed)
    erased = erasure_error_mc(small, snr=snr, packets=4, loss_prob=0.0,
                              trials=20_000, seed=config.seed)
    checks.append(CheckResult(
        "erasure_identity", erased.p_hat == plain.p_hat,
        -abs(erased.p_hat - plain.p_hat),
        "loss-free masks reproduce the unmasked run",
    ))
    return checks


def cmd_verify(args) -> int:
    config = _config_from_args(args)
    g_override = None
    if args.negate_g:
        g_override = -g_factor(config.snr)
    checks = _verify_checks(config, g_override)
    header = ["check", "status", "margin", "detail", "seed"]
    write_csv([c.row(config.seed) for c in checks], header, args.out)
    if args.out is not None:
        for c in checks:
            print(f"{'pass' if c.passed else 'FAIL'}  {c.name}")
    failed = [c for c in checks if not c.passed]
    if failed:
        print(f"{len(failed)} of {len(checks)} checks failed", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--threads", type=int, help="parallel sweep workers")
    parser.add_argument("--regime", choices=["selection", "random"])
    parser.add_argument("--snr-tx-db", dest="snr_tx_db", type=float,
                        help="transmit SNR in dB")
    parser.add_argument("--bandwidth", type=float, help="bandwidth in Hz")
    parser.add_argument("--packets", type=int, help="fast-fading packets per slot")
    parser.add_argument("--loss-prob", dest="loss_prob", type=float,
                        help="per-packet loss probability")
    parser.add_argument("--n", type=int, help="feature dimension")
    parser.add_argument("--k", type=int, help="class subspace dimension")
    parser.add_argument("--snr-db", dest="snr_db", type=float,
                        help="data SNR in dB")
    parser.add_argument("--beta", type=float, help="features per bit")
    parser.add_argument("--eps", type=float, help="selection error budget")
    parser.add_argument("--eps-random", dest="eps_random", type=float,
                        help="random-regime error budget")
    parser.add_argument("--delta", type=float, help="outage probability")
    parser.add_argument("--rate-min", dest="rate_min", type=float)
    parser.add_argument("--rate-max", dest="rate_max", type=float)
    parser.add_argument("--points", type=int, help="sweep points")
    parser.add_argument("--log-spaced", dest="log_spaced", type=_parse_bool,
                        help="true for log-spaced sweep")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials")
    parser.add_argument("--libraries", type=int,
                        help="sampled libraries per random-regime estimate")
    parser.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="classcap",
        description="Classification capacity of a remote subspace "
                    "classifier over a wireless link.",
    )
    parser.add_argument("--log-level", dest="log_level", default="warning",
                        choices=["debug", "info", "warning", "error"],
                        help="stderr log threshold (the confusion integral "
                             "logs each dual-form disagreement at warning)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_pack = sub.add_parser("pack", help="solve a max-min subspace packing")
    p_pack.add_argument("--n", type=int, required=True)
    p_pack.add_argument("--k", type=int, required=True)
    p_pack.add_argument("--l", type=int, required=True)
    p_pack.add_argument("--restarts", type=int, default=50)
    p_pack.add_argument("--iters", type=int, default=2000)
    p_pack.add_argument("--seed", type=int, default=0)
    p_pack.add_argument("--out", help="packing file to write")
    p_pack.set_defaults(func=cmd_pack)

    p_pcep = sub.add_parser("pcep", help="pairwise confusion table")
    src = p_pcep.add_mutually_exclusive_group(required=True)
    src.add_argument("--angles", help="comma-separated principal angles (rad)")
    src.add_argument("--packing", help="packing file")
    p_pcep.add_argument("--snr-db", dest="snr_db", type=float, default=15.0)
    p_pcep.add_argument("--out")
    p_pcep.set_defaults(func=cmd_pcep)

    p_err = sub.add_parser("error", help="Monte Carlo error rate")
    p_err.add_argument("--packing", help="packing file")
    p_err.add_argument("--random-classes", dest="random_classes", type=int,
                       help="sample this many isotropic classes instead")
    _add_config_flags(p_err)
    p_err.set_defaults(func=cmd_error)

    p_cap = sub.add_parser("capacity", help="rate sweep of class counts")
    p_cap.add_argument("--fading", choices=list(_FADING_COLUMNS), default="none")
    _add_config_flags(p_cap)
    p_cap.set_defaults(func=cmd_capacity)

    p_ver = sub.add_parser("verify", help="run numerical cross-checks")
    p_ver.add_argument("--negate-g", dest="negate_g", action="store_true",
                       help="inject a sign error into the separation gain "
                            "(self-test; sandwich checks must then fail)")
    _add_config_flags(p_ver)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()), stream=sys.stderr
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())

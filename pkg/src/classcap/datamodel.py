"""Signal model and maximum-likelihood subspace classification.

An observation from class i is

    x = U_i c + w,   c ~ CN(0, snr * I_k),   w ~ CN(0, I_m),

with U_i the real n-by-k class frame: complex circular Gaussian
coefficients in a real subspace, plus white complex noise.  The ML
classifier picks the class maximizing the Gaussian log-likelihood of x;
for orthonormal frames this reduces to the largest projection energy
||U_i^T x||^2.

Classification also has to work after coordinate erasures, where the
surviving rows of each frame are no longer orthonormal.  The scores are
therefore computed in the general form (Woodbury identity on the k-by-k
Gram matrix), which covers both cases.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionError
from .grassmann import ClassLibrary, Frame
from .seeding import as_generator, spawn

MC_CHUNK = 65536


def _as_stack(classes) -> np.ndarray:
    """Accept a ClassLibrary, a Frame sequence, or an (L, m, k) array."""
    if isinstance(classes, ClassLibrary):
        return classes.stacked
    if isinstance(classes, (list, tuple)) and classes and isinstance(classes[0], Frame):
        return np.stack([f.basis for f in classes])
    arr = np.asarray(classes, dtype=float)
    if arr.ndim != 3:
        raise DimensionError(f"class stack must be (L, m, k), got shape {arr.shape}")
    return arr


def _check_snr(snr: float) -> float:
    snr = float(snr)
    if not snr > 0.0:
        raise ValueError(f"snr must be positive, got {snr}")
    return snr


def complex_normal(rng: np.random.Generator, shape, var: float) -> np.ndarray:
    """Circular complex Gaussian, total variance `var` per entry."""
    z = rng.standard_normal((2, *shape))
    return (z[0] + 1j * z[1]) * np.sqrt(var / 2.0)


def generate_sample(frame: Frame, *, snr: float, seed, size: int | None = None):
    """Draw x = U c + w from the class of `frame`.

    Returns a complex (n,) vector, or (size, n) when size is given.
    """
    snr = _check_snr(snr)
    rng = as_generator(seed)
    num = 1 if size is None else size
    c = complex_normal(rng, (num, frame.k), snr)
    w = complex_normal(rng, (num, frame.n), 1.0)
    x = c @ frame.basis.T + w
    return x[0] if size is None else x


def loglik_scores(classes, x: np.ndarray, *, snr: float) -> np.ndarray:
    """Per-class log-likelihoods of x, up to a class-independent constant.

    `classes` may hold general (not necessarily orthonormal) m-by-k
    matrices, as arise after erasing coordinates.  x has shape (..., m).
    Scores are snr * x^H V (I + snr V^T V)^{-1} V^T x - logdet(I + snr V^T V).
    """
    snr = _check_snr(snr)
    mats = _as_stack(classes)
    x = np.asarray(x)
    if x.shape[-1] != mats.shape[1]:
        raise DimensionError(
            f"x has {x.shape[-1]} coordinates, classes have {mats.shape[1]}"
        )
    if mats.shape[1] < mats.shape[2]:
        raise DimensionError(
            f"only {mats.shape[1]} coordinates survive for {mats.shape[2]}-dim "
            "classes; classification is ill-posed"
        )
    k = mats.shape[2]
    gram = np.einsum("lmk,lmj->lkj", mats, mats)
    a = np.eye(k) + snr * gram
    z = np.einsum("lmk,...m->...lk", mats, x)
    solved = np.linalg.solve(a, z[..., np.newaxis])[..., 0]
    quad = np.einsum("...lk,...lk->...l", z.conj(), solved).real
    _, logdet = np.linalg.slogdet(a)
    return snr * quad - logdet


def classify_ml(classes, x: np.ndarray, *, snr: float):
    """ML class decision for x (lowest index wins ties).

    Returns an int for a single observation, an int array for a batch.
    """
    scores = loglik_scores(classes, x, snr=snr)
    pred = np.argmax(scores, axis=-1)
    return int(pred) if pred.ndim == 0 else pred


def restrict_library(classes, keep: np.ndarray) -> np.ndarray:
    """Drop erased coordinates (rows) from every class matrix.

    `keep` is a boolean mask over coordinates; all-true is a no-op.
    """
    mats = _as_stack(classes)
    keep = np.asarray(keep, dtype=bool)
    if keep.shape != (mats.shape[1],):
        raise DimensionError(
            f"mask has shape {keep.shape}, expected ({mats.shape[1]},)"
        )
    if keep.all():
        return mats
    return mats[:, keep, :]


def apply_erasure(x: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Keep only the surviving coordinates of x (last axis)."""
    keep = np.asarray(keep, dtype=bool)
    x = np.asarray(x)
    if keep.shape != (x.shape[-1],):
        raise DimensionError(
            f"mask has shape {keep.shape}, expected ({x.shape[-1]},)"
        )
    if keep.all():
        return x
    return x[..., keep]


class ErrorEstimate(NamedTuple):
    p_hat: float
    stderr: float
    trials: int


def _chunk_sizes(trials: int, chunk: int):
    out = [chunk] * (trials // chunk)
    if trials % chunk:
        out.append(trials % chunk)
    return out


def pairwise_error_mc(
    frame_a: Frame,
    frame_b: Frame,
    *,
    snr: float,
    trials: int,
    seed,
    chunk: int = MC_CHUNK,
) -> ErrorEstimate:
    """Monte Carlo pairwise confusion: truth is frame_a, the ML test
    between the two classes picks frame_b."""
    snr = _check_snr(snr)
    stack = _as_stack((frame_a, frame_b))
    sizes = _chunk_sizes(trials, chunk)
    errors = 0
    for child, num in zip(spawn(seed, len(sizes)), sizes):
        rng = as_generator(child)
        c = complex_normal(rng, (num, frame_a.k), snr)
        w = complex_normal(rng, (num, frame_a.n), 1.0)
        x = c @ frame_a.basis.T + w
        scores = loglik_scores(stack, x, snr=snr)
        errors += int(np.count_nonzero(scores[:, 1] > scores[:, 0]))
    p = errors / trials
    return ErrorEstimate(p, float(np.sqrt(p * (1.0 - p) / trials)), trials)


def estimate_error_mc(
    library: ClassLibrary,
    *,
    snr: float,
    trials: int,
    seed,
    chunk: int = MC_CHUNK,
) -> ErrorEstimate:
    """Monte Carlo misclassification rate with uniformly drawn labels.

    Work is split into fixed-size chunks, each with its own derived RNG
    stream, so the estimate is reproducible regardless of scheduling.
    """
    snr = _check_snr(snr)
    stack = library.stacked
    num_classes, n, k = stack.shape
    sizes = _chunk_sizes(trials, chunk)
    errors = 0
    for child, num in zip(spawn(seed, len(sizes)), sizes):
        rng = as_generator(child)
        labels = rng.integers(num_classes, size=num)
        c = complex_normal(rng, (num, k), snr)
        w = complex_normal(rng, (num, n), 1.0)
        x = np.einsum("cnk,ck->cn", stack[labels], c) + w
        pred = classify_ml(library, x, snr=snr)
        errors += int(np.count_nonzero(pred != labels))
    p = errors / trials
    return ErrorEstimate(p, float(np.sqrt(p * (1.0 - p) / trials)), trials)

"""Orthonormal frames, principal angles, and subspace packings.

A class is represented by a k-dimensional subspace of R^n, stored as an
n-by-k matrix with orthonormal columns.  The separation between two
subspaces is the squared chordal distance

    d^2(U, V) = k - ||U^T V||_F^2 = sum_i sin^2 theta_i,

where theta_i are the principal angles.  This module provides sampling
from the invariant (isotropic) distribution, distance computations, a
max-min packing solver, analytic packing bounds, and a plain-text file
format for exchanging packings.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionError,
    OrthonormalityError,
    PackingFileError,
    TooFewClassesError,
)
from .seeding import as_generator, spawn

logger = logging.getLogger(__name__)

# Column Gram deviation below this is treated as exact.
ORTHONORMALITY_TOL = 1e-10
# Between ORTHONORMALITY_TOL and this, columns are re-orthonormalized
# with a warning; beyond it the frame is rejected.
REORTH_TOL = 1e-6


def _qr_nonneg(mats: np.ndarray) -> np.ndarray:
    """Thin QR with the sign convention diag(R) >= 0.

    Applied to standard normal matrices this yields the invariant
    distribution on the Stiefel manifold.  Works on stacked inputs
    (..., n, k).
    """
    q, r = np.linalg.qr(mats)
    s = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    s = np.where(s == 0.0, 1.0, s)
    return q * s[..., None, :]


@dataclass(frozen=True, eq=False)
class Frame:
    """An n-by-k matrix with orthonormal columns spanning one class subspace."""

    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2:
            raise DimensionError(f"frame must be a 2-d array, got ndim={basis.ndim}")
        n, k = basis.shape
        if k < 1 or n < k:
            raise DimensionError(f"need n >= k >= 1, got n={n}, k={k}")
        gram = basis.T @ basis
        dev = float(np.max(np.abs(gram - np.eye(k))))
        if dev > REORTH_TOL:
            raise OrthonormalityError(
                f"columns are not orthonormal (max Gram deviation {dev:.3e})"
            )
        if dev > ORTHONORMALITY_TOL:
            logger.warning(
                "re-orthonormalizing frame with Gram deviation %.3e", dev
            )
            basis = _qr_nonneg(basis)
        basis = basis.copy()
        basis.flags.writeable = False
        object.__setattr__(self, "basis", basis)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class ClassLibrary:
    """An ordered collection of frames, all of the same shape."""

    frames: tuple[Frame, ...]

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise TooFewClassesError("a library needs at least one class")
        n, k = frames[0].n, frames[0].k
        for i, f in enumerate(frames):
            if (f.n, f.k) != (n, k):
                raise DimensionError(
                    f"frame {i} has shape ({f.n}, {f.k}), expected ({n}, {k})"
                )
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, i: int) -> Frame:
        return self.frames[i]

    @property
    def n(self) -> int:
        return self.frames[0].n

    @property
    def k(self) -> int:
        return self.frames[0].k

    @cached_property
    def stacked(self) -> np.ndarray:
        """All bases as one (L, n, k) array (read-only)."""
        a = np.stack([f.basis for f in self.frames])
        a.flags.writeable = False
        return a


def sample_isotropic(n: int, k: int, *, seed, size: int | None = None):
    """Draw subspaces from the rotation-invariant distribution.

    Returns a single Frame when size is None, otherwise a ClassLibrary
    of `size` independent draws.
    """
    if k < 1 or n < k:
        raise DimensionError(f"need n >= k >= 1, got n={n}, k={k}")
    rng = as_generator(seed)
    shape = (n, k) if size is None else (size, n, k)
    q = _qr_nonneg(rng.standard_normal(shape))
    if size is None:
        return Frame(q)
    return ClassLibrary(tuple(Frame(b) for b in q))


def principal_angles(a: Frame, b: Frame) -> np.ndarray:
    """Principal angles between two subspaces, ascending, in [0, pi/2]."""
    if (a.n, a.k) != (b.n, b.k):
        raise DimensionError(
            f"shape mismatch: ({a.n}, {a.k}) vs ({b.n}, {b.k})"
        )
    cosines = np.linalg.svd(a.basis.T @ b.basis, compute_uv=False)
    cosines = np.clip(cosines, 0.0, 1.0)
    return np.arccos(cosines)[::-1]


def chordal_distance_sq(a: Frame, b: Frame) -> float:
    """Squared chordal distance k - ||a^T b||_F^2, in [0, k]."""
    if (a.n, a.k) != (b.n, b.k):
        raise DimensionError(
            f"shape mismatch: ({a.n}, {a.k}) vs ({b.n}, {b.k})"
        )
    overlap = a.basis.T @ b.basis
    d2 = a.k - float(np.sum(overlap * overlap))
    return float(min(max(d2, 0.0), a.k))


def _pairwise_distance_sq(stacked: np.ndarray) -> np.ndarray:
    """All squared chordal distances of an (L, n, k) stack, as (L, L)."""
    g = np.einsum("ank,bnm->abkm", stacked, stacked)
    d2 = stacked.shape[-1] - np.einsum("abkm,abkm->ab", g, g)
    np.fill_diagonal(d2, 0.0)
    return np.clip(d2, 0.0, stacked.shape[-1])


def pairwise_distance_sq(library: ClassLibrary) -> np.ndarray:
    """Squared chordal distances between all pairs, as an (L, L) matrix."""
    return _pairwise_distance_sq(library.stacked)


class MinDistances(NamedTuple):
    per_class: np.ndarray
    overall: float


def min_distances(library: ClassLibrary) -> MinDistances:
    """Nearest-neighbor squared distance of each class and the global minimum."""
    if len(library) < 2:
        raise TooFewClassesError("pairwise distances need at least two classes")
    d2 = pairwise_distance_sq(library)
    np.fill_diagonal(d2, np.inf)
    per_class = d2.min(axis=1)
    return MinDistances(per_class, float(per_class.min()))


class PackingBounds(NamedTuple):
    lower_sq: float
    upper_sq: float
    clamped: bool


def packing_bounds(n: int, k: int, num_classes: int) -> PackingBounds:
    """Existence bounds on the best achievable min squared distance.

    For L subspaces in G(n, k) there is a packing with min distance at
    least the lower bound, and no packing beats the upper bound.  The
    raw upper bound can exceed the geometric maximum k for small L; it
    is clamped and the flag records that.
    """
    if k < 1 or n <= k:
        raise DimensionError(f"need n > k >= 1, got n={n}, k={k}")
    if num_classes < 2:
        raise TooFewClassesError("packing bounds need at least two classes")
    q = float(num_classes) ** (-2.0 / (n * k))
    lower = k * q
    raw_upper = 2.0 * k * (1.0 - (1.0 - q) ** 2)
    clamped = raw_upper > k
    upper = min(raw_upper, float(k))
    return PackingBounds(lower, upper, clamped)


@dataclass(frozen=True)
class PackingOptions:
    """Knobs for the max-min packing search."""

    restarts: int = 50
    iters: int = 2000
    step0: float = 0.1
    step_decay: float = 0.999
    sharp0: float = 10.0
    sharp1: float = 1000.0


@dataclass(frozen=True)
class PackingReport:
    library: ClassLibrary
    d_min_sq: float
    bounds: PackingBounds
    best_restart: int


def _pack_once(n: int, k: int, num_classes: int, opts: PackingOptions, seed):
    """One restart of soft-min repulsion ascent with QR retraction.

    Maximizes a log-sum-exp smoothing of the min pairwise distance,
    sharpening the smoothing geometrically over the iterations.  The
    best configuration ever visited (including the initialization) is
    returned, so a restart can never end worse than it started.
    """
    rng = as_generator(seed)
    a = _qr_nonneg(rng.standard_normal((num_classes, n, k)))
    best_a = a.copy()
    best_d = -np.inf
    off = ~np.eye(num_classes, dtype=bool)
    for t in range(opts.iters):
        d2 = _pairwise_distance_sq(a)
        d_now = d2[off].min()
        if d_now > best_d:
            best_d = d_now
            best_a = a.copy()
        frac = t / (opts.iters - 1) if opts.iters > 1 else 1.0
        sharp = opts.sharp0 * (opts.sharp1 / opts.sharp0) ** frac
        w = np.exp(-sharp * np.where(off, d2 - d_now, np.inf))
        w /= w.sum()
        g = np.einsum("ank,bnm->abkm", a, a)
        pull = np.einsum("ab,bnm,bamk->ank", w, a, g)
        step = opts.step0 * opts.step_decay**t
        a = _qr_nonneg(a - 2.0 * step * pull)
    d2 = _pairwise_distance_sq(a)
    d_now = d2[off].min()
    if d_now > best_d:
        best_d = d_now
        best_a = a
    return best_a, float(best_d)


def pack(
    n: int,
    k: int,
    num_classes: int,
    *,
    seed,
    options: PackingOptions | None = None,
) -> PackingReport:
    """Search for a max-min packing of `num_classes` subspaces in G(n, k).

    Runs independent random restarts (one derived RNG stream each, so
    the outcome does not depend on scheduling) and keeps the best.
    """
    if k < 1 or n <= k:
        raise DimensionError(f"need n > k >= 1, got n={n}, k={k}")
    if num_classes < 2:
        raise TooFewClassesError("packing needs at least two classes")
    opts = options or PackingOptions()
    best_a = None
    best_d = -np.inf
    best_restart = -1
    for i, child in enumerate(spawn(seed, opts.restarts)):
        a, d = _pack_once(n, k, num_classes, opts, child)
        if d > best_d:
            best_a, best_d, best_restart = a, d, i
    library = ClassLibrary(tuple(Frame(b) for b in best_a))
    return PackingReport(
        library=library,
        d_min_sq=best_d,
        bounds=packing_bounds(n, k, num_classes),
        best_restart=best_restart,
    )


def write_packing(path, library: ClassLibrary, *, comment: str | None = None) -> None:
    """Write a library as text: header `n k L`, then one n-by-k block per class.

    Blocks are separated by blank lines; values use repr-exact %.17g.
    """
    lines = []
    if comment:
        for c in comment.splitlines():
            lines.append(f"# {c}")
    lines.append(f"{library.n} {library.k} {len(library)}")
    for frame in library.frames:
        lines.append("")
        for row in frame.basis:
            lines.append(" ".join(f"{v:.17g}" for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_packing(path) -> ClassLibrary:
    """Read a library written by write_packing.

    Blank lines and `#` comments are ignored anywhere.  Malformed
    content raises PackingFileError with the offending line number;
    frames whose columns have drifted are re-orthonormalized or
    rejected per the Frame tolerances.
    """
    data = []  # (line_no, [floats])
    with open(path) as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            data.append((line_no, text.split()))
    if not data:
        raise PackingFileError("no content found", line=1)
    head_no, head = data[0]
    if len(head) != 3:
        raise PackingFileError(
            f"header must be 'n k L', got {len(head)} fields", line=head_no
        )
    try:
        n, k, num_classes = (int(tok) for tok in head)
    except ValueError:
        raise PackingFileError(f"non-integer header {head!r}", line=head_no) from None
    if k < 1 or n < k or num_classes < 1:
        raise PackingFileError(
            f"bad dimensions n={n} k={k} L={num_classes}", line=head_no
        )
    rows = data[1:]
    if len(rows) != num_classes * n:
        raise PackingFileError(
            f"expected {num_classes * n} coefficient rows, found {len(rows)}",
            line=rows[-1][0] if rows else head_no,
        )
    values = np.empty((num_classes * n, k))
    for i, (line_no, toks) in enumerate(rows):
        if len(toks) != k:
            raise PackingFileError(
                f"expected {k} values per row, got {len(toks)}", line=line_no
            )
        try:
            values[i] = [float(tok) for tok in toks]
        except ValueError:
            raise PackingFileError(
                f"non-numeric value in row {toks!r}", line=line_no
            ) from None
    blocks = values.reshape(num_classes, n, k)
    return ClassLibrary(tuple(Frame(b) for b in blocks))

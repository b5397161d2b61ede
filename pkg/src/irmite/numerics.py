"""Seeded random sampling and the small dense linear-algebra kernel.

Every stochastic component of the package draws through :class:`Rng`, a thin
wrapper over numpy's counter-based Philox generator.  Streams are bit-exact
functions of the seed, and ``split(label)`` derives child seeds by hashing
(parent seed, label), so adding a new consumer never perturbs the stream seen
by an existing one.
"""

from __future__ import annotations

import hashlib

import numpy as np
import scipy.linalg

from .errors import InvalidArg, NotPD, NotPSD, SingularInput

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, label: str) -> int:
    """Deterministic 64-bit child seed from (parent seed, label)."""
    payload = f"{seed & _MASK64:016x}/{label}".encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


class Rng:
    """Seedable generator with deterministic splitting.

    Backed by ``numpy.random.Philox`` (counter-based); normal variates use
    numpy's ziggurat implementation.  Single-owner mutable state: do not share
    one instance across concurrent tasks, split instead.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def split(self, label: str) -> "Rng":
        """Child generator that depends only on (self.seed, label)."""
        return Rng(derive_seed(self.seed, label))

    def uniform(self, lo: float, hi: float, n: int) -> np.ndarray:
        """n i.i.d. draws from U[lo, hi)."""
        if not lo < hi:
            raise InvalidArg(f"need lo < hi, got [{lo}, {hi})")
        if n < 1:
            raise InvalidArg(f"need n >= 1, got {n}")
        return self._gen.uniform(lo, hi, size=n)

    def normal(self, n: int) -> np.ndarray:
        """n i.i.d. standard normal draws."""
        if n < 1:
            raise InvalidArg(f"need n >= 1, got {n}")
        return self._gen.standard_normal(n)

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        """rows x cols matrix of i.i.d. standard normal entries."""
        if rows < 1 or cols < 1:
            raise InvalidArg(f"need positive shape, got ({rows}, {cols})")
        return self._gen.standard_normal((rows, cols))

    def bernoulli(self, p: float, n: int) -> np.ndarray:
        """n i.i.d. Bernoulli(p) draws as an int array of {0, 1}."""
        if not 0.0 <= p <= 1.0:
            raise InvalidArg(f"need 0 <= p <= 1, got {p}")
        if n < 1:
            raise InvalidArg(f"need n >= 1, got {n}")
        return (self._gen.uniform(0.0, 1.0, size=n) < p).astype(np.int64)


def qr_orthonormal(g: np.ndarray, rank_tol: float = 1e-12) -> np.ndarray:
    """Q factor of the QR decomposition of a square nonsingular matrix.

    Raises SingularInput when a diagonal entry of R is negligible relative to
    the largest one (rank-deficient input).
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InvalidArg(f"need a square matrix, got shape {g.shape}")
    q, r = np.linalg.qr(g)
    diag = np.abs(np.diag(r))
    if diag.min() <= rank_tol * max(diag.max(), 1.0):
        raise SingularInput("rank-deficient input to qr_orthonormal")
    return q


def cholesky(sigma: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L.T == sigma for a symmetric PSD matrix.

    Eigenvalues in (-1e-10, 0) are treated as rounding noise: a small diagonal
    jitter (enough to lift the spectrum above zero) is added and the
    factorization retried.  Anything more negative raises NotPSD.
    """
    sigma = np.asarray(sigma, dtype=float)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        pass
    min_eig = np.linalg.eigvalsh(sigma).min()
    if min_eig < -1e-10:
        raise NotPSD(f"matrix has eigenvalue {min_eig:.3e} < -1e-10")
    jitter = 2.0 * max(1e-12, -float(min_eig))
    jittered = sigma + jitter * np.eye(sigma.shape[0])
    try:
        return np.linalg.cholesky(jittered)
    except np.linalg.LinAlgError as exc:
        raise NotPSD("factorization failed even after diagonal jitter") from exc


def solve_spd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a @ x = b for symmetric positive-definite a via Cholesky."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    try:
        factor = scipy.linalg.cho_factor(a, lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise NotPD("Cholesky factorization failed in solve_spd") from exc
    return scipy.linalg.cho_solve(factor, b)

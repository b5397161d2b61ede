"""Synthetic observational-data generators.

The pipeline is treatment -> features (model A or B) -> potential outcomes
(linear or quadratic), with the factual outcome selected by the assigned
treatment.  Generated datasets carry both potential outcomes and the true
individual effect, which real observational data never would; those columns
are optional on import.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidArg, SingularInput
from .numerics import Rng, cholesky, qr_orthonormal

MODEL_A = "A"
MODEL_B = "B"
LINEAR = "linear"
QUADRATIC = "quadratic"

_FLOAT_FMT = "%.17g"


def _as_mu(value, d: int) -> np.ndarray:
    """Broadcast a scalar or validate a length-d vector of group means."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(d, float(arr))
    if arr.shape != (d,):
        raise DimensionMismatch(f"mean vector has shape {arr.shape}, expected ({d},)")
    return arr


@dataclass
class GenSpec:
    """Full description of one synthetic generation scheme."""

    d: int
    feature_model: str = MODEL_A
    outcome_model: str = LINEAR
    mu0: object = 0.0
    mu1: object = 0.0
    sigma_noise: float = 1.0
    coeff_lo: float = 0.0
    coeff_hi: float = 1.0
    treatment_p: float = 0.5

    def __post_init__(self):
        if self.d < 1:
            raise InvalidArg(f"need d >= 1, got {self.d}")
        if self.feature_model not in (MODEL_A, MODEL_B):
            raise InvalidArg(f"unknown feature model {self.feature_model!r}")
        if self.outcome_model not in (LINEAR, QUADRATIC):
            raise InvalidArg(f"unknown outcome model {self.outcome_model!r}")
        if self.sigma_noise < 0:
            raise InvalidArg("sigma_noise must be >= 0")
        if not self.coeff_lo < self.coeff_hi:
            raise InvalidArg("need coeff_lo < coeff_hi")
        # strict overlap: 0 < p(t=1) < 1 keeps the effect identifiable
        if not 0.0 < self.treatment_p < 1.0:
            raise InvalidArg("need 0 < treatment_p < 1")
        self.mu0 = _as_mu(self.mu0, self.d)
        self.mu1 = _as_mu(self.mu1, self.d)

    def mu(self, t: int) -> np.ndarray:
        return self.mu1 if t else self.mu0


@dataclass
class CovarianceSet:
    """Covariances for both feature models: shared sigma_a for model A,
    mixture components sigma_0/sigma_1 for model B."""

    sigma_a: np.ndarray
    sigma_0: np.ndarray
    sigma_1: np.ndarray

    @property
    def d(self) -> int:
        return self.sigma_a.shape[0]


@dataclass
class OutcomeParams:
    """Group-dependent outcome coefficients.  a0/a1 are None for linear specs."""

    b0: np.ndarray
    b1: np.ndarray
    c0: float
    c1: float
    a0: np.ndarray | None = None
    a1: np.ndarray | None = None

    def mean_outcome(self, x: np.ndarray, t: int) -> np.ndarray:
        """Noise-free outcome surface m_t(x) for each row of x."""
        b = self.b1 if t else self.b0
        c = self.c1 if t else self.c0
        m = x @ b + c
        a = self.a1 if t else self.a0
        if a is not None:
            m = m + np.einsum("ij,jk,ik->i", x, a, x)
        return m


@dataclass
class Dataset:
    """Observational rows, plus oracle columns when produced by a generator."""

    x: np.ndarray
    t: np.ndarray
    y_f: np.ndarray
    y0: np.ndarray | None = None
    y1: np.ndarray | None = None
    ite: np.ndarray | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.t = np.asarray(self.t, dtype=np.int64)
        self.y_f = np.asarray(self.y_f, dtype=float)
        if self.x.ndim != 2:
            raise DimensionMismatch("x must be 2-d")
        n = self.x.shape[0]
        for name in ("t", "y_f", "y0", "y1", "ite"):
            v = getattr(self, name)
            if v is not None and len(v) != n:
                raise DimensionMismatch(f"{name} has length {len(v)}, expected {n}")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def has_oracle(self) -> bool:
        return self.ite is not None

    def subset(self, idx) -> "Dataset":
        """Row subset preserving order; oracle columns carried along."""
        pick = lambda v: None if v is None else np.asarray(v)[idx]
        return Dataset(self.x[idx], self.t[idx], self.y_f[idx],
                       pick(self.y0), pick(self.y1), pick(self.ite))

    def to_csv(self, path) -> None:
        """Write `x1,...,xd,t,y_f[,y0,y1,ite]` with 17-significant-digit floats."""
        header = [f"x{j + 1}" for j in range(self.d)] + ["t", "y_f"]
        if self.has_oracle:
            header += ["y0", "y1", "ite"]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for i in range(self.n):
                row = [_FLOAT_FMT % v for v in self.x[i]]
                row.append(str(int(self.t[i])))
                row.append(_FLOAT_FMT % self.y_f[i])
                if self.has_oracle:
                    row += [_FLOAT_FMT % self.y0[i], _FLOAT_FMT % self.y1[i],
                            _FLOAT_FMT % self.ite[i]]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        if "t" not in header or "y_f" not in header:
            raise InvalidArg(f"{path}: missing required columns t, y_f")
        d = header.index("t")
        if header[:d] != [f"x{j + 1}" for j in range(d)]:
            raise InvalidArg(f"{path}: malformed feature columns")
        oracle = header[d + 2:] == ["y0", "y1", "ite"]
        if not oracle and len(header) != d + 2:
            raise InvalidArg(f"{path}: unexpected trailing columns {header[d + 2:]}")
        data = np.asarray(rows, dtype=float)
        x = data[:, :d]
        t = data[:, d].astype(np.int64)
        y_f = data[:, d + 1]
        if oracle:
            return cls(x, t, y_f, data[:, d + 2], data[:, d + 3], data[:, d + 4])
        return cls(x, t, y_f)


def build_covariances(rng: Rng, d: int) -> CovarianceSet:
    """Draw the three covariance matrices from their eigen-construction.

    Eigenvalues are uniform on [0,1] rescaled to sum to 1 (so every trace is
    1); the spectra for sigma_a and sigma_0 are sorted ascending and sigma_1
    descending; eigenvectors come from the Q factor of a Gaussian matrix.
    """
    if d < 1:
        raise InvalidArg(f"need d >= 1, got {d}")

    def spectrum(descending: bool) -> np.ndarray:
        lam = rng.uniform(0.0, 1.0, d)
        lam = np.sort(lam / lam.sum())
        return lam[::-1].copy() if descending else lam

    def random_q() -> np.ndarray:
        # a Gaussian draw is almost surely nonsingular; retry just in case
        err = None
        for _ in range(5):
            g = rng.normal_matrix(d, d)
            try:
                return qr_orthonormal(g)
            except SingularInput as exc:  # pragma: no cover - probability ~0
                err = exc
        raise err  # pragma: no cover

    def assemble(q: np.ndarray, lam: np.ndarray) -> np.ndarray:
        sigma = (q * lam) @ q.T
        return 0.5 * (sigma + sigma.T)

    lam_a = spectrum(descending=False)
    lam_0 = spectrum(descending=False)
    lam_1 = spectrum(descending=True)
    q_a = random_q()
    q_b = random_q()
    return CovarianceSet(assemble(q_a, lam_a), assemble(q_b, lam_0), assemble(q_b, lam_1))


def gen_treatment(rng: Rng, n: int, p: float) -> np.ndarray:
    """Treatment assignments, i.i.d. Bernoulli(p)."""
    return rng.bernoulli(p, n)


def gen_features(rng: Rng, spec: GenSpec, cov: CovarianceSet, t: np.ndarray) -> np.ndarray:
    """Feature rows conditional on treatment.

    Model A: x | t ~ N(mu_t, sigma_a).  Model B: a fair coin per row selects
    the sigma_0 or sigma_1 mixture component, mean still mu_t.
    """
    if cov.d != spec.d:
        raise DimensionMismatch(f"covariance dim {cov.d} != spec dim {spec.d}")
    t = np.asarray(t, dtype=np.int64)
    n = len(t)
    mu = np.where(t[:, None] == 1, spec.mu1[None, :], spec.mu0[None, :])
    if spec.feature_model == MODEL_A:
        eps = rng.normal_matrix(n, spec.d)
        return mu + eps @ cholesky(cov.sigma_a).T
    coin = rng.bernoulli(0.5, n)
    eps = rng.normal_matrix(n, spec.d)
    l0 = cholesky(cov.sigma_0)
    l1 = cholesky(cov.sigma_1)
    x = np.where(coin[:, None] == 1, eps @ l1.T, eps @ l0.T)
    return mu + x


def gen_outcome_params(rng: Rng, spec: GenSpec) -> OutcomeParams:
    """Sample outcome coefficients uniformly from [coeff_lo, coeff_hi)."""
    lo, hi = spec.coeff_lo, spec.coeff_hi
    b0 = rng.uniform(lo, hi, spec.d)
    b1 = rng.uniform(lo, hi, spec.d)
    c0, c1 = rng.uniform(lo, hi, 2)
    a0 = a1 = None
    if spec.outcome_model == QUADRATIC:
        a0 = rng.uniform(lo, hi, spec.d * spec.d).reshape(spec.d, spec.d)
        a1 = rng.uniform(lo, hi, spec.d * spec.d).reshape(spec.d, spec.d)
    return OutcomeParams(b0=b0, b1=b1, c0=float(c0), c1=float(c1), a0=a0, a1=a1)


def gen_outcomes(rng: Rng, spec: GenSpec, params: OutcomeParams,
                 x: np.ndarray, t: np.ndarray):
    """Draw both potential outcomes for every row, then select the factual one.

    y_t ~ N(m_t(x), sigma^2) with independent noise across the two arms.
    Returns (y0, y1, y_f, ite).
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=np.int64)
    if x.shape[1] != spec.d or len(t) != x.shape[0]:
        raise DimensionMismatch("x/t shapes inconsistent with spec")
    n = x.shape[0]
    y0 = params.mean_outcome(x, 0)
    y1 = params.mean_outcome(x, 1)
    if spec.sigma_noise > 0:
        y0 = y0 + spec.sigma_noise * rng.normal(n)
        y1 = y1 + spec.sigma_noise * rng.normal(n)
    y_f = np.where(t == 1, y1, y0)
    ite = y1 - y0
    return y0, y1, y_f, ite


def _draw_split(rng_parent: Rng, label: str, spec: GenSpec, n: int,
                cov: CovarianceSet, params: OutcomeParams,
                min_group: int | None) -> Dataset:
    """One i.i.d. dataset under child seeds of `label`.

    When min_group is set, treatment vectors leaving either group below that
    size are redrawn under a fresh child seed (at most 100 retries)."""
    t = None
    for attempt in range(100):
        cand = gen_treatment(rng_parent.split(f"{label}/treatment/{attempt}"),
                             n, spec.treatment_p)
        if min_group is None or min(cand.sum(), n - cand.sum()) >= min_group:
            t = cand
            break
    if t is None:
        raise InvalidArg(
            f"could not draw a treatment vector with both groups >= {min_group} "
            f"in 100 attempts (n={n})")
    x = gen_features(rng_parent.split(f"{label}/features"), spec, cov, t)
    y0, y1, y_f, ite = gen_outcomes(rng_parent.split(f"{label}/outcomes"),
                                    spec, params, x, t)
    return Dataset(x=x, t=t, y_f=y_f, y0=y0, y1=y1, ite=ite)


def generate(root_seed: int, spec: GenSpec, n_tr: int, n_te: int):
    """Generate one (train, test) pair sharing a covariance set and outcome
    coefficients.

    The training treatment vector is redrawn (fresh child seed, <= 100 tries)
    if either group would have fewer than d/2 + 2 rows, so that per-group
    regressions are minimally determined.

    Returns (train, test, params, cov).
    """
    if n_tr < 1 or n_te < 1:
        raise InvalidArg("need n_tr, n_te >= 1")
    rng = Rng(root_seed)
    cov = build_covariances(rng.split("covariance"), spec.d)
    params = gen_outcome_params(rng.split("params"), spec)
    min_group = int(spec.d / 2 + 2)
    train = _draw_split(rng, "train", spec, n_tr, cov, params, min_group)
    test = _draw_split(rng, "test", spec, n_te, cov, params, None)
    return train, test, params, cov

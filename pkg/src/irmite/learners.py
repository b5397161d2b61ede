"""Base-learners: closed-form ridge/OLS and the IRMv1 gradient-descent fit.

Both learners standardize features before fitting and fold the standardizer
into the returned model, so one default learning rate serves every experiment
and OLS/IRM comparisons are like-for-like.  The IRMv1 objective over training
domains e is

    sum_e  R_e(f) + lambda * D_e(f)^2

where R_e is the mean squared error on domain e and D_e is the scalar
derivative of R_e(w * f) with respect to a fixed dummy multiplier w at w = 1:
D_e = (2/m) * sum_i (f(x_i) - y_i) * f(x_i).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionMismatch, EmptyInput, InvalidArg, NonFinite)
from .numerics import solve_spd


@dataclass
class LinearModel:
    """Scalar-output linear predictor over standardized features.

    predict(x) = ((x - means) / stds) @ w + b.  Constant features are recorded
    with std 1 so standardization never divides by zero.
    """

    w: np.ndarray
    b: float
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.means = np.asarray(self.means, dtype=float)
        self.stds = np.asarray(self.stds, dtype=float)
        self.b = float(self.b)
        if not (self.w.shape == self.means.shape == self.stds.shape):
            raise DimensionMismatch("w, means, stds must share a shape")
        if np.any(self.stds <= 0):
            raise InvalidArg("stds must be positive")

    @property
    def p(self) -> int:
        return len(self.w)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.p:
            raise DimensionMismatch(f"x has {x.shape[1]} columns, model expects {self.p}")
        return ((x - self.means) / self.stds) @ self.w + self.b

    def coefficients(self):
        """(weights, intercept) in the original, unstandardized feature space."""
        w_raw = self.w / self.stds
        return w_raw, self.b - float(self.means @ w_raw)

    def to_json(self) -> dict:
        return {"weights": self.w.tolist(), "intercept": self.b,
                "means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "LinearModel":
        return cls(w=np.asarray(obj["weights"]), b=obj["intercept"],
                   means=np.asarray(obj["means"]), stds=np.asarray(obj["stds"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass
class IrmConfig:
    """Hyperparameters of the IRMv1 optimizer.

    The penalty weight is 1.0 until `anneal_step`, then jumps to `lam`; after
    the jump the total loss is rescaled by 1 / max(1, lam) so the step size
    does not need retuning per lam.  The anneal point controls how far toward
    the plain ERM solution the fit travels before the invariance penalty takes
    over, and with it the effective strength of the regularization.
    """

    lam: float = 1e4
    steps: int = 2000
    lr: float = 1e-2
    anneal_step: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidArg("lam must be >= 0")
        if self.steps < 1:
            raise InvalidArg("steps must be >= 1")
        if self.lr <= 0:
            raise InvalidArg("lr must be > 0")
        if not 0 <= self.anneal_step <= self.steps:
            raise InvalidArg("need 0 <= anneal_step <= steps")


def standardizer(x: np.ndarray, mask: np.ndarray | None = None):
    """Per-column (means, stds); masked-out columns keep mean 0, std 1.

    Columns with zero variance also get std 1."""
    x = np.asarray(x, dtype=float)
    means = x.mean(axis=0)
    stds = x.std(axis=0)
    stds[stds == 0] = 1.0
    if mask is not None:
        keep = ~np.asarray(mask, dtype=bool)
        means[keep] = 0.0
        stds[keep] = 1.0
    return means, stds


def ols_fit(x: np.ndarray, y: np.ndarray, ridge: float = 1e-8,
            standardize_mask: np.ndarray | None = None) -> LinearModel:
    """Ridge-regularized least squares with an unpenalized intercept.

    Solves the normal equations on standardized, mean-centered features.  The
    default ridge of 1e-8 is purely numerical safety; pass ridge=0 for pure
    empirical risk minimization.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    if x.shape[0] != len(y):
        raise DimensionMismatch("x and y row counts differ")
    if x.shape[0] == 0:
        raise EmptyInput("cannot fit on zero rows")
    if ridge < 0:
        raise InvalidArg("ridge must be >= 0")
    means, stds = standardizer(x, standardize_mask)
    xs = (x - means) / stds
    col_means = xs.mean(axis=0)
    xc = xs - col_means
    y_mean = y.mean()
    yc = y - y_mean
    gram = xc.T @ xc + ridge * np.eye(x.shape[1])
    w = solve_spd(gram, xc.T @ yc)
    b = y_mean - float(col_means @ w)
    return LinearModel(w=w, b=b, means=means, stds=stds)


def risk(model: LinearModel, x: np.ndarray, y: np.ndarray) -> float:
    """Mean squared error of the model on (x, y)."""
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise EmptyInput("risk of an empty sample is undefined")
    r = model.predict(x) - y
    return float(np.mean(r * r))


def irm_penalty(model: LinearModel, x: np.ndarray, y: np.ndarray) -> float:
    """Squared derivative of the domain risk w.r.t. the dummy multiplier at 1."""
    y = np.asarray(y, dtype=float)
    if len(y) == 0:
        raise EmptyInput("penalty of an empty sample is undefined")
    z = model.predict(x)
    d = 2.0 * float(np.mean((z - y) * z))
    return d * d


def irm_objective(domains, w: np.ndarray, b: float, lam: float):
    """Value and analytic gradient of the IRMv1 objective.

    `domains` is a list of (x, y) arrays taken as-is (no standardization);
    returns (value, grad_w, grad_b).
    """
    w = np.asarray(w, dtype=float)
    value = 0.0
    grad_w = np.zeros_like(w)
    grad_b = 0.0
    for x, y in domains:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        m = len(y)
        if m == 0:
            raise EmptyInput("empty domain in irm_objective")
        z = x @ w + b
        r = z - y
        risk_e = float(np.mean(r * r))
        d_e = 2.0 * float(np.mean(r * z))
        value += risk_e + lam * d_e * d_e
        grad_w += (2.0 / m) * (x.T @ r)
        grad_b += 2.0 * float(np.mean(r))
        if lam != 0.0:
            gd_w = (2.0 / m) * (x.T @ (z + r))
            gd_b = 2.0 * float(np.mean(z + r))
            grad_w += lam * 2.0 * d_e * gd_w
            grad_b += lam * 2.0 * d_e * gd_b
    return value, grad_w, grad_b


def irm_fit(domains, cfg: IrmConfig | None = None,
            standardize_mask: np.ndarray | None = None) -> LinearModel:
    """Full-batch gradient descent on the IRMv1 objective.

    Features and the outcome are standardized by statistics pooled over all
    domains (the outcome rescaling is folded back into the returned model), and
    (w, b) start at zero.  Optimizing on the standardized outcome keeps the
    quartic penalty term well scaled so one default learning rate serves every
    experiment.  Raises NonFinite if the loss or gradient blows up, which
    usually means the learning rate is too large for the instance.
    """
    cfg = cfg or IrmConfig()
    if not domains:
        raise EmptyInput("need at least one domain")
    xs, ys = [], []
    p = None
    for x, y in domains:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.asarray(y, dtype=float)
        if len(y) == 0:
            raise EmptyInput("empty domain passed to irm_fit")
        if x.shape[0] != len(y):
            raise DimensionMismatch("x and y row counts differ within a domain")
        if p is None:
            p = x.shape[1]
        elif x.shape[1] != p:
            raise DimensionMismatch("domains disagree on feature dimension")
        xs.append(x)
        ys.append(y)
    means, stds = standardizer(np.concatenate(xs, axis=0), standardize_mask)
    y_all = np.concatenate(ys)
    y_mean = float(y_all.mean())
    y_scale = float(y_all.std()) or 1.0
    std_domains = [((x - means) / stds, (y - y_mean) / y_scale)
                   for x, y in zip(xs, ys)]

    w = np.zeros(p)
    b = 0.0
    value = gw = gb = None
    lr_t = cfg.lr
    n_dom = len(std_domains)
    for step in range(cfg.steps):
        # dividing by the domain count makes the trajectory invariant to
        # duplicating a domain, so n_e only matters through data diversity
        if step < cfg.anneal_step:
            lam_t, scale = 1.0, float(n_dom)
        else:
            lam_t, scale = cfg.lam, max(1.0, cfg.lam) * n_dom
        if value is None or step == cfg.anneal_step:
            value, gw, gb = irm_objective(std_domains, w, b, lam_t)
        if not (np.isfinite(value) and np.all(np.isfinite(gw)) and np.isfinite(gb)):
            raise NonFinite(f"non-finite loss/gradient at step {step}; lower lr")
        # backtracking keeps the objective non-increasing on the quartic
        # penalty surface; the step size recovers toward cfg.lr afterwards
        accepted = False
        for _ in range(60):
            w_new = w - lr_t * (gw / scale)
            b_new = b - lr_t * (gb / scale)
            v_new, gw_new, gb_new = irm_objective(std_domains, w_new, b_new, lam_t)
            if np.isfinite(v_new) and v_new <= value:
                accepted = True
                break
            lr_t *= 0.5
        if not accepted:
            break  # stationary to machine precision
        w, b = w_new, b_new
        value, gw, gb = v_new, gw_new, gb_new
        lr_t = min(cfg.lr, 2.0 * lr_t)
    return LinearModel(w=w * y_scale, b=b * y_scale + y_mean, means=means, stds=stds)

"""Effect-estimation metrics and the group-separation probe.

PEHE is the mean squared error between true and estimated individual effects;
figures report its square root.  The separation between the control and
treatment feature distributions is summarized by the held-out accuracy of a
logistic-regression classifier predicting treatment from features, which the
accuracy sweeps use as their x-axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import CovarianceSet, GenSpec, gen_features
from .errors import EmptyInput, InvalidArg, LengthMismatch, MissingOracle
from .learners import standardizer
from .numerics import Rng


@dataclass(frozen=True)
class EvalReport:
    pehe: float
    sqrt_pehe: float
    n: int


def pehe(ite_true, ite_hat) -> EvalReport:
    """Mean squared error between true and estimated individual effects."""
    ite_true = np.asarray(ite_true, dtype=float)
    ite_hat = np.asarray(ite_hat, dtype=float)
    if ite_true.shape != ite_hat.shape:
        raise LengthMismatch(f"{ite_true.shape} vs {ite_hat.shape}")
    if ite_true.size == 0:
        raise EmptyInput("PEHE of an empty sample is undefined")
    err = ite_true - ite_hat
    mse = float(np.mean(err * err))
    return EvalReport(pehe=mse, sqrt_pehe=float(np.sqrt(mse)), n=ite_true.size)


def evaluate_estimator(est, test) -> EvalReport:
    """PEHE of a fitted estimator against the test set's oracle effects."""
    if test.ite is None:
        raise MissingOracle("test dataset lacks true ITE values")
    return pehe(test.ite, est.predict(test.x))


def _fit_logistic(x, y, steps=2000, lr=0.1, l2=1e-4):
    """Plain full-batch gradient descent on l2-regularized logistic loss."""
    m, p = x.shape
    w = np.zeros(p)
    b = 0.0
    for _ in range(steps):
        z = x @ w + b
        prob = 1.0 / (1.0 + np.exp(-z))
        err = prob - y
        gw = x.T @ err / m + 2.0 * l2 * w
        gb = float(np.mean(err))
        w -= lr * gw
        b -= lr * gb
    return w, b


def group_classification_accuracy(rng: Rng, spec: GenSpec, cov: CovarianceSet,
                                  n_probe: int) -> float:
    """Held-out accuracy of a features -> treatment classifier on fresh data.

    Draws n_probe rows from the spec's feature model, fits logistic regression
    on the first half (standardized features), and reports accuracy on the
    second half.  Converges to the Bayes rate for well-separated Gaussian
    groups, so it is a monotone proxy for group separation.
    """
    if n_probe < 100:
        raise InvalidArg(f"need n_probe >= 100, got {n_probe}")
    t = rng.split("treatment").bernoulli(spec.treatment_p, n_probe)
    x = gen_features(rng.split("features"), spec, cov, t)
    means, stds = standardizer(x)
    xs = (x - means) / stds
    half = n_probe // 2
    w, b = _fit_logistic(xs[:half], t[:half].astype(float))
    pred = (xs[half:] @ w + b) > 0
    return float(np.mean(pred == (t[half:] == 1)))

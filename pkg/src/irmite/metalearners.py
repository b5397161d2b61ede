"""T-learner and S-learner meta-frameworks over the linear base-learners.

Both estimators follow the sklearn fit/predict convention, with `predict`
returning the estimated individual treatment effect.  The base learner is
either closed-form OLS (one domain, no invariance penalty) or the IRMv1
optimizer over a caller-supplied domain assignment.

The S-learner trains on the expanded encoding (x, t, x*t) of 2d+1 columns and
predicts effects as model(x, 1, x) - model(x, 0, 0).  The binary t column is
left unstandardized so those test encodings stay exact.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array, check_consistent_length

from .errors import DimensionMismatch, EmptyDomainGroup, InvalidArg
from .learners import IrmConfig, LinearModel, irm_fit, ols_fit

OLS = "ols"
IRM = "irm"


def _check_inputs(X, t, y):
    X = check_array(X, dtype=float)
    t = np.asarray(t, dtype=np.int64)
    y = np.asarray(y, dtype=float)
    check_consistent_length(X, t, y)
    if not np.isin(t, (0, 1)).all():
        raise InvalidArg("treatment vector must be binary")
    return X, t, y


def _domains_for(X, y, rows, domain, n_e):
    """Group the selected rows by domain index; every cell must be nonempty."""
    out = []
    for j in range(1, n_e + 1):
        idx = rows & (domain == j)
        if not idx.any():
            raise EmptyDomainGroup(f"domain {j} has no rows in this branch")
        out.append((X[idx], y[idx]))
    return out


def expand_s_features(X: np.ndarray, t: np.ndarray) -> np.ndarray:
    """S-learner encoding (x, t, x*t), 2d+1 columns."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    t = np.asarray(t, dtype=float)
    return np.hstack([X, t[:, None], X * t[:, None]])


class TLearner(BaseEstimator):
    """Two-branch ITE estimator: one outcome regression per treatment arm.

    Parameters
    ----------
    base : {"ols", "irm"}
        Base learner.  "ols" ignores any domain assignment and fits each
        branch by closed-form ridge regression; "irm" runs the IRMv1
        optimizer over the per-branch domain partition.
    irm_config : IrmConfig, optional
        Optimizer settings shared by both branches (irm base only).
    ridge : float
        Ridge strength for the OLS base.
    """

    def __init__(self, base: str = OLS, irm_config: IrmConfig | None = None,
                 ridge: float = 1e-8):
        self.base = base
        self.irm_config = irm_config
        self.ridge = ridge

    @property
    def kind(self) -> str:
        return "t_learner"

    def fit(self, X, t, y, domain=None):
        if self.base not in (OLS, IRM):
            raise InvalidArg(f"unknown base {self.base!r}")
        X, t, y = _check_inputs(X, t, y)
        for group in (0, 1):
            if not (t == group).any():
                raise EmptyDomainGroup(f"treatment group {group} is empty")
        if self.base == OLS:
            self.n_e_ = 1
            self.control_model_ = ols_fit(X[t == 0], y[t == 0], ridge=self.ridge)
            self.treatment_model_ = ols_fit(X[t == 1], y[t == 1], ridge=self.ridge)
            return self
        if domain is None:
            raise InvalidArg("base='irm' requires a domain assignment")
        domain = np.asarray(domain, dtype=np.int64)
        check_consistent_length(X, domain)
        self.n_e_ = int(domain.max())
        cfg = self.irm_config or IrmConfig()
        self.control_model_ = irm_fit(_domains_for(X, y, t == 0, domain, self.n_e_), cfg)
        self.treatment_model_ = irm_fit(_domains_for(X, y, t == 1, domain, self.n_e_), cfg)
        return self

    def predict_outcomes(self, X):
        """(y0_hat, y1_hat) from the two branch models."""
        X = check_array(X, dtype=float)
        return self.control_model_.predict(X), self.treatment_model_.predict(X)

    def predict(self, X):
        """Estimated individual treatment effect for each row of X."""
        y0_hat, y1_hat = self.predict_outcomes(X)
        return y1_hat - y0_hat

    def to_json(self) -> dict:
        return {"kind": self.kind, "base": self.base, "n_e": self.n_e_,
                "control_model": self.control_model_.to_json(),
                "treatment_model": self.treatment_model_.to_json()}


class SLearner(BaseEstimator):
    """Single-model ITE estimator over the (x, t, x*t) interaction encoding.

    Parameters mirror :class:`TLearner`.
    """

    def __init__(self, base: str = OLS, irm_config: IrmConfig | None = None,
                 ridge: float = 1e-8):
        self.base = base
        self.irm_config = irm_config
        self.ridge = ridge

    @property
    def kind(self) -> str:
        return "s_learner"

    def fit(self, X, t, y, domain=None):
        if self.base not in (OLS, IRM):
            raise InvalidArg(f"unknown base {self.base!r}")
        X, t, y = _check_inputs(X, t, y)
        if (t == 0).all() or (t == 1).all():
            raise EmptyDomainGroup("both treatment groups must be represented")
        self.d_ = X.shape[1]
        expanded = expand_s_features(X, t)
        # standardize x and x*t blocks, keep the binary t column raw
        mask = np.ones(2 * self.d_ + 1, dtype=bool)
        mask[self.d_] = False
        if self.base == OLS:
            self.n_e_ = 1
            self.model_ = ols_fit(expanded, y, ridge=self.ridge, standardize_mask=mask)
            return self
        if domain is None:
            raise InvalidArg("base='irm' requires a domain assignment")
        domain = np.asarray(domain, dtype=np.int64)
        check_consistent_length(X, domain)
        self.n_e_ = int(domain.max())
        all_rows = np.ones(len(t), dtype=bool)
        doms = _domains_for(expanded, y, all_rows, domain, self.n_e_)
        cfg = self.irm_config or IrmConfig()
        self.model_ = irm_fit(doms, cfg, standardize_mask=mask)
        return self

    def predict_outcomes(self, X):
        """(y0_hat, y1_hat) from the control and treatment encodings."""
        X = check_array(X, dtype=float)
        if X.shape[1] != self.d_:
            raise DimensionMismatch(f"X has {X.shape[1]} columns, expected {self.d_}")
        n = X.shape[0]
        y0_hat = self.model_.predict(expand_s_features(X, np.zeros(n)))
        y1_hat = self.model_.predict(expand_s_features(X, np.ones(n)))
        return y0_hat, y1_hat

    def predict(self, X):
        y0_hat, y1_hat = self.predict_outcomes(X)
        return y1_hat - y0_hat

    def to_json(self) -> dict:
        return {"kind": self.kind, "base": self.base, "n_e": self.n_e_,
                "single_model": self.model_.to_json()}


def estimator_from_json(obj: dict):
    """Rebuild a fitted estimator from its JSON form."""
    base = obj["base"]
    if obj["kind"] == "t_learner":
        est = TLearner(base=base)
        est.n_e_ = obj["n_e"]
        est.control_model_ = LinearModel.from_json(obj["control_model"])
        est.treatment_model_ = LinearModel.from_json(obj["treatment_model"])
        return est
    if obj["kind"] == "s_learner":
        est = SLearner(base=base)
        est.n_e_ = obj["n_e"]
        est.model_ = LinearModel.from_json(obj["single_model"])
        est.d_ = (est.model_.p - 1) // 2
        return est
    raise InvalidArg(f"unknown estimator kind {obj['kind']!r}")


def fit_t_learner(train, assign, base: str, cfg: IrmConfig | None = None) -> TLearner:
    """Dataset-level convenience wrapper used by the experiment harness."""
    domain = assign.e if (assign is not None and base == IRM) else None
    return TLearner(base=base, irm_config=cfg).fit(train.x, train.t, train.y_f,
                                                   domain=domain)


def fit_s_learner(train, assign, base: str, cfg: IrmConfig | None = None) -> SLearner:
    domain = assign.e if (assign is not None and base == IRM) else None
    return SLearner(base=base, irm_config=cfg).fit(train.x, train.t, train.y_f,
                                                   domain=domain)


def predict_ite(est, x_test) -> np.ndarray:
    return est.predict(x_test)

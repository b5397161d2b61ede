"""Experiment orchestration: single runs, the two sweep families, CSV and SVG.

All randomness in a sweep descends from one root seed through labeled child
seeds (per sweep point, per repetition, then per named consumer), so results
are reproducible from the config alone and adding an estimator to the list
never perturbs data generation.  Within a repetition every estimator sees the
identical train/test pair and (for IRM bases) the identical domain split.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .datagen import (GenSpec, LINEAR, QUADRATIC, build_covariances, generate)
from .domains import split_for_estimation
from .errors import InvalidArg, IrmIteError, SchemaError
from .evaluation import evaluate_estimator, group_classification_accuracy
from .learners import IrmConfig
from .metalearners import IRM, OLS, fit_s_learner, fit_t_learner
from .numerics import Rng, derive_seed

ESTIMATORS = ("IRM2", "IRM1", "OLS_LR2", "OLS_LR1")

CSV_HEADER = ["sweep", "x_value", "measured_accuracy", "estimator", "rep",
              "sqrt_pehe", "wall_time_s", "error"]

DEFAULT_DIMS = (5, 10, 20, 35, 50)
# per-coordinate mean scales; at d = 35 these span measured classification
# accuracy from ~0.5 to ~1.0
DEFAULT_SEPARATIONS = {
    LINEAR: (0.0, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1),
    QUADRATIC: (0.0, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1),
}
DEFAULT_MU_SCALE = {LINEAR: 1.0, QUADRATIC: 0.1}

_FLOAT_FMT = "%.17g"


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment family."""

    spec: GenSpec
    n_tr: int = 200
    n_te: int = 100
    n_e: int = 3
    reps: int = 10
    irm: IrmConfig = field(default_factory=IrmConfig)
    estimators: tuple = ESTIMATORS
    root_seed: int = 0
    separations: tuple | None = None
    dims: tuple | None = None
    mu_scale: float | None = None
    n_probe: int = 4000
    timing: bool = False

    def __post_init__(self):
        if self.reps < 1:
            raise InvalidArg("reps must be >= 1")
        if not self.estimators:
            raise InvalidArg("estimators must be nonempty")
        for name in self.estimators:
            if name not in ESTIMATORS:
                raise InvalidArg(f"unknown estimator {name!r}")
        if self.n_tr < 1 or self.n_te < 1 or self.n_e < 1:
            raise InvalidArg("n_tr, n_te, n_e must be >= 1")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        obj = dict(obj)
        spec_obj = obj.pop("spec", None)
        if spec_obj is None:
            raise InvalidArg("config is missing the 'spec' section")
        try:
            spec = GenSpec(**spec_obj)
        except TypeError as exc:
            raise InvalidArg(f"bad spec section: {exc}") from exc
        irm_obj = dict(obj.pop("irm", {}))
        if "lambda" in irm_obj:  # JSON uses the paper-facing name
            irm_obj["lam"] = irm_obj.pop("lambda")
        try:
            irm = IrmConfig(**irm_obj)
        except TypeError as exc:
            raise InvalidArg(f"bad irm section: {exc}") from exc
        for key in ("estimators", "separations", "dims"):
            if obj.get(key) is not None:
                obj[key] = tuple(obj[key])
        try:
            return cls(spec=spec, irm=irm, **obj)
        except TypeError as exc:
            raise InvalidArg(f"bad config: {exc}") from exc


@dataclass
class ResultRecord:
    """One (sweep point, estimator, repetition) result row."""

    sweep: str
    x_value: float
    measured_accuracy: float | None
    estimator: str
    rep: int
    sqrt_pehe: float | None
    wall_time_s: float | None
    error: str = ""


def _fit_estimator(name: str, train, assign, irm_cfg: IrmConfig):
    if name == "IRM2":
        return fit_t_learner(train, assign, IRM, irm_cfg)
    if name == "IRM1":
        return fit_s_learner(train, assign, IRM, irm_cfg)
    if name == "OLS_LR2":
        return fit_t_learner(train, None, OLS)
    if name == "OLS_LR1":
        return fit_s_learner(train, None, OLS)
    raise InvalidArg(f"unknown estimator {name!r}")


def run_once(cfg: ExperimentConfig, rep: int, sweep: str = "single",
             x_value: float | None = None,
             measured_accuracy: float | None = None) -> list[ResultRecord]:
    """One repetition: generate data, split domains, fit and score estimators.

    Generation and fit failures become error-tagged records instead of
    aborting the sweep."""
    rep_seed = derive_seed(cfg.root_seed, f"rep/{rep}")
    if x_value is None:
        x_value = float(cfg.spec.d)
    try:
        train, test, _params, _cov = generate(rep_seed, cfg.spec, cfg.n_tr, cfg.n_te)
        assign = split_for_estimation(Rng(rep_seed).split("domain-split"),
                                      train, cfg.n_e)
    except IrmIteError as exc:
        err = f"{type(exc).__name__}: {exc}"
        return [ResultRecord(sweep, x_value, measured_accuracy, name, rep,
                             None, None, error=err)
                for name in cfg.estimators]
    irm_cfg = replace(cfg.irm, seed=derive_seed(rep_seed, "optimizer"))
    records = []
    for name in cfg.estimators:
        start = time.perf_counter()
        try:
            est = _fit_estimator(name, train, assign, irm_cfg)
            report = evaluate_estimator(est, test)
            records.append(ResultRecord(
                sweep, x_value, measured_accuracy, name, rep,
                report.sqrt_pehe, time.perf_counter() - start))
        except IrmIteError as exc:
            records.append(ResultRecord(
                sweep, x_value, measured_accuracy, name, rep, None,
                time.perf_counter() - start,
                error=f"{type(exc).__name__}: {exc}"))
    return records


def _run_point(cfg: ExperimentConfig, sweep: str, x_value: float,
               measured_accuracy: float | None) -> list[ResultRecord]:
    """All repetitions at one sweep point, ordered (estimator, rep)."""
    by_rep = [run_once(cfg, rep, sweep, x_value, measured_accuracy)
              for rep in range(cfg.reps)]
    ordered = []
    for i, _name in enumerate(cfg.estimators):
        for rep in range(cfg.reps):
            ordered.append(by_rep[rep][i])
    return ordered


def run(cfg: ExperimentConfig) -> list[ResultRecord]:
    """A single configuration, all repetitions."""
    return _run_point(cfg, "single", float(cfg.spec.d), None)


def sweep_accuracy(cfg: ExperimentConfig,
                   separations=None) -> list[ResultRecord]:
    """Vary group separation (mu = -s..+s per coordinate), measure the
    resulting classification accuracy, and score every estimator."""
    if separations is None:
        separations = cfg.separations or DEFAULT_SEPARATIONS[cfg.spec.outcome_model]
    # one probe covariance for the whole sweep keeps the accuracy axis
    # monotone in the separation scale
    probe_cov = build_covariances(Rng(cfg.root_seed).split("probe-cov"), cfg.spec.d)
    records = []
    for i, s in enumerate(separations):
        point_seed = derive_seed(cfg.root_seed, f"accuracy-point/{i}")
        spec_s = replace(cfg.spec, mu0=np.full(cfg.spec.d, -float(s)),
                         mu1=np.full(cfg.spec.d, float(s)))
        acc = group_classification_accuracy(Rng(point_seed).split("probe"), spec_s,
                                            probe_cov, cfg.n_probe)
        cfg_point = replace(cfg, spec=spec_s, root_seed=point_seed)
        records.extend(_run_point(cfg_point, "accuracy", float(s), acc))
    return records


def sweep_dimension(cfg: ExperimentConfig, dims=None) -> list[ResultRecord]:
    """Vary the feature dimension at a fixed per-coordinate mean scale."""
    if dims is None:
        dims = cfg.dims or DEFAULT_DIMS
    scale = cfg.mu_scale
    if scale is None:
        scale = DEFAULT_MU_SCALE[cfg.spec.outcome_model]
    records = []
    for d in dims:
        point_seed = derive_seed(cfg.root_seed, f"dimension-point/{d}")
        spec_d = replace(cfg.spec, d=int(d), mu0=np.full(int(d), -scale),
                         mu1=np.full(int(d), scale))
        cfg_point = replace(cfg, spec=spec_d, root_seed=point_seed)
        records.extend(_run_point(cfg_point, "dimension", float(d), None))
    return records


def _fmt(value, timing=True) -> str:
    if value is None or not timing:
        return ""
    return _FLOAT_FMT % value


def write_csv(records: list[ResultRecord], path, timing: bool = False) -> None:
    """Write result rows under the fixed schema.

    Wall times are omitted unless `timing` is set, so that identical configs
    always produce byte-identical files."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow([
                r.sweep, _FLOAT_FMT % r.x_value, _fmt(r.measured_accuracy),
                r.estimator, str(r.rep), _fmt(r.sqrt_pehe),
                _fmt(r.wall_time_s, timing), r.error,
            ])


def read_csv(path) -> list[dict]:
    """Parse a results CSV, validating the schema."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if header != CSV_HEADER:
        raise SchemaError(f"bad header in {path}: {header}")
    if not rows:
        raise SchemaError(f"{path} contains no data rows")
    out = []
    for row in rows:
        if len(row) != len(CSV_HEADER):
            raise SchemaError(f"row has {len(row)} fields, expected {len(CSV_HEADER)}")
        rec = dict(zip(CSV_HEADER, row))
        try:
            rec["x_value"] = float(rec["x_value"])
            rec["rep"] = int(rec["rep"])
            for key in ("measured_accuracy", "sqrt_pehe", "wall_time_s"):
                rec[key] = float(rec[key]) if rec[key] else None
        except ValueError as exc:
            raise SchemaError(f"unparsable row {row}") from exc
        out.append(rec)
    return out


# --- SVG rendering -----------------------------------------------------------

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")

_SVG_SIZE = (720, 480)
_MARGINS = (70, 170, 40, 55)  # left, right, top, bottom


def _series_stats(rows: list[dict], kind: str) -> dict:
    """estimator -> sorted list of (x, mean sqrt_pehe, std over reps)."""
    if kind == "accuracy":
        x_of = lambda r: r["measured_accuracy"]
    elif kind == "dimension":
        x_of = lambda r: r["x_value"]
    else:
        raise InvalidArg(f"unknown plot kind {kind!r}")
    grouped: dict = {}
    for r in rows:
        if r["error"] or r["sqrt_pehe"] is None:
            continue
        x = x_of(r)
        if x is None:
            raise SchemaError("missing x coordinate for plot kind " + kind)
        grouped.setdefault(r["estimator"], {}).setdefault(x, []).append(r["sqrt_pehe"])
    if not grouped:
        raise SchemaError("no plottable rows")
    series = {}
    for name, pts in grouped.items():
        series[name] = [(x, float(np.mean(v)), float(np.std(v)))
                        for x, v in sorted(pts.items())]
    return series


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def plot(csv_path, kind: str, out_path) -> None:
    """Render a results CSV as a standalone SVG line chart.

    One polyline per estimator, with mean +/- std error bars across
    repetitions; byte-identical output for identical input."""
    rows = read_csv(csv_path)
    series = _series_stats(rows, kind)
    width, height = _SVG_SIZE
    ml, mr, mt, mb = _MARGINS
    x0, x1 = ml, width - mr
    y0, y1 = height - mb, mt

    xs = [x for pts in series.values() for x, _, _ in pts]
    ys = [m - s for pts in series.values() for _, m, s in pts]
    ys += [m + s for pts in series.values() for _, m, s in pts]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    if xhi == xlo:
        xlo, xhi = xlo - 1.0, xhi + 1.0
    if yhi == ylo:
        ylo, yhi = ylo - 1.0, yhi + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad

    def sx(v):
        return x0 + (v - xlo) / (xhi - xlo) * (x1 - x0)

    def sy(v):
        return y0 + (v - ylo) / (yhi - ylo) * (y1 - y0)

    xlabel = "treatment group classification accuracy" if kind == "accuracy" \
        else "feature dimension d"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
    ]
    for tick in _ticks(xlo, xhi):
        px = sx(tick)
        parts.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" '
                     f'y2="{y0 + 5}" stroke="black"/>')
        parts.append(f'<text x="{px:.2f}" y="{y0 + 20}" font-size="12" '
                     f'text-anchor="middle">{tick:.4g}</text>')
    for tick in _ticks(ylo, yhi):
        py = sy(tick)
        parts.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" '
                     f'y2="{py:.2f}" stroke="black"/>')
        parts.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" font-size="12" '
                     f'text-anchor="end">{tick:.4g}</text>')
    parts.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{height - 12}" '
                 f'font-size="13" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="18" y="{(y0 + y1) / 2:.2f}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 18 '
                 f'{(y0 + y1) / 2:.2f})">sqrt PEHE</text>')

    for i, name in enumerate(sorted(series)):
        color = _PALETTE[i % len(_PALETTE)]
        pts = series[name]
        coords = " ".join(f"{sx(x):.2f},{sy(m):.2f}" for x, m, _ in pts)
        for x, m, s in pts:
            px, plo, phi = sx(x), sy(m - s), sy(m + s)
            parts.append(f'<line x1="{px:.2f}" y1="{plo:.2f}" x2="{px:.2f}" '
                         f'y2="{phi:.2f}" stroke="{color}" stroke-width="1"/>')
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="2"/>')
        ly = mt + 20 * i + 10
        parts.append(f'<rect x="{x1 + 12}" y="{ly - 9}" width="18" height="4" '
                     f'fill="{color}"/>')
        parts.append(f'<text x="{x1 + 36}" y="{ly}" font-size="12">{name}</text>')
    parts.append("</svg>")
    with open(out_path, "w", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")

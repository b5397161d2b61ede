"""Artificial domain construction.

IRM needs multiple training domains; given a single observational dataset we
fabricate them by assigning every row a uniformly random domain index.  The
splitter is a strategy parameter on the estimation entry points so alternative
schemes can plug in later.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datagen import Dataset
from .errors import DimensionMismatch, EmptyDomainGroup, InvalidArg
from .numerics import Rng

CONTROL = "control"
TREATMENT = "treatment"
BOTH = "both"


@dataclass
class DomainAssignment:
    """Domain index in 1..n_e for every row of a dataset."""

    e: np.ndarray
    n_e: int

    def __post_init__(self):
        self.e = np.asarray(self.e, dtype=np.int64)
        if self.n_e < 1:
            raise InvalidArg(f"need n_e >= 1, got {self.n_e}")
        if self.e.size and (self.e.min() < 1 or self.e.max() > self.n_e):
            raise InvalidArg("domain indices out of range")

    @property
    def n(self) -> int:
        return len(self.e)


def split_random(rng: Rng, n: int, n_e: int) -> DomainAssignment:
    """Assign each of n rows a domain index i.i.d. uniform over 1..n_e."""
    if n < n_e or n_e < 1:
        raise InvalidArg(f"need n >= n_e >= 1, got n={n}, n_e={n_e}")
    idx = np.floor(rng.uniform(0.0, 1.0, n) * n_e).astype(np.int64) + 1
    # guard against the measure-zero u == 1.0 edge
    np.clip(idx, 1, n_e, out=idx)
    return DomainAssignment(e=idx, n_e=n_e)


def partition(ds: Dataset, assign: DomainAssignment, group: str = BOTH) -> list[Dataset]:
    """Per-domain datasets, optionally restricted to one treatment group.

    Row order within each domain follows the original dataset.  Raises
    EmptyDomainGroup if any (domain, group) cell is empty, which signals the
    caller to redraw the split.
    """
    if assign.n != ds.n:
        raise DimensionMismatch(f"assignment covers {assign.n} rows, dataset has {ds.n}")
    if group == CONTROL:
        keep = ds.t == 0
    elif group == TREATMENT:
        keep = ds.t == 1
    elif group == BOTH:
        keep = np.ones(ds.n, dtype=bool)
    else:
        raise InvalidArg(f"unknown group {group!r}")
    out = []
    for j in range(1, assign.n_e + 1):
        idx = np.flatnonzero(keep & (assign.e == j))
        if idx.size == 0:
            raise EmptyDomainGroup(f"domain {j} has no {group} rows")
        out.append(ds.subset(idx))
    return out


def split_for_estimation(rng: Rng, ds: Dataset, n_e: int,
                         max_retries: int = 100) -> DomainAssignment:
    """Random split whose every (domain, treatment-group) cell is nonempty.

    Redraws under fresh child seeds until both the control and treatment
    partitions succeed; raises EmptyDomainGroup past the retry budget.
    """
    last = None
    for attempt in range(max_retries):
        assign = split_random(rng.split(f"attempt/{attempt}"), ds.n, n_e)
        try:
            partition(ds, assign, CONTROL)
            partition(ds, assign, TREATMENT)
            return assign
        except EmptyDomainGroup as exc:
            last = exc
    raise EmptyDomainGroup(
        f"no valid split in {max_retries} attempts (n={ds.n}, n_e={n_e})") from last

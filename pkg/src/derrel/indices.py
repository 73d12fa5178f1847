"""Experienced system indices, per-customer AIF histograms and the
perceived-versus-experienced two-load-point example."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .loadpoint import LoadPointParams, perceived_indices

DEFAULT_BIN_WIDTH = 0.01
# absorbs representation error, e.g. 0.3 / 0.01 = 29.999999999999996
_BIN_EPS = 1e-9


@dataclass(frozen=True)
class Commercial:
    """DER-free customers that see the load-point indices directly."""

    count: float = 0  # may be fractional when scaled to a subsample
    lambda_lp: float = 0.0
    u_lp: float = 0.0


@dataclass(frozen=True)
class SystemSample:
    aif: np.ndarray  # per residential customer, f/yr
    aid: np.ndarray  # per residential customer, h/yr
    commercial: Commercial = Commercial()

    @classmethod
    def from_metrics(cls, metrics: Sequence, commercial: Commercial = Commercial()) -> "SystemSample":
        return cls(
            np.array([m.aif for m in metrics], dtype=np.float64),
            np.array([m.aid for m in metrics], dtype=np.float64),
            commercial,
        )

    @property
    def n_customers(self) -> float:
        return int(np.size(self.aif)) + self.commercial.count


def experienced_indices(sample: SystemSample) -> tuple[float, float]:
    total = sample.n_customers
    if total <= 0:
        raise ValueError("sample has no customers")
    com = sample.commercial
    saifi = (float(np.sum(sample.aif)) + com.count * com.lambda_lp) / total
    saidi = (float(np.sum(sample.aid)) + com.count * com.u_lp) / total
    return saifi, saidi


@dataclass
class AifHistogram:
    """Counts over half-open bins ``[k w, (k + 1) w)``."""

    bin_width: float = DEFAULT_BIN_WIDTH
    counts: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")
        self.counts = np.asarray(self.counts, dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def bin_index(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=np.float64)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("AIF values must be finite and non-negative")
        return np.floor(v / self.bin_width + _BIN_EPS).astype(np.int64)

    def add(self, values) -> None:
        idx = self.bin_index(np.ravel(values))
        if idx.size == 0:
            return
        add = np.bincount(idx)
        if add.size > self.counts.size:
            self.counts = np.concatenate([self.counts, np.zeros(add.size - self.counts.size, dtype=np.int64)])
        self.counts[: add.size] += add

    def merge(self, other: "AifHistogram") -> "AifHistogram":
        if not math.isclose(self.bin_width, other.bin_width):
            raise ValueError("cannot merge histograms with different bin widths")
        n = max(self.counts.size, other.counts.size)
        counts = np.zeros(n, dtype=np.int64)
        counts[: self.counts.size] += self.counts
        counts[: other.counts.size] += other.counts
        return AifHistogram(self.bin_width, counts)

    def mass_between(self, lo: float, hi: float) -> float:
        """Fraction of observations in bins lying within ``[lo, hi)``."""
        if self.total == 0:
            return 0.0
        k_lo = int(math.floor(lo / self.bin_width + _BIN_EPS))
        k_hi = int(math.floor(hi / self.bin_width + _BIN_EPS))
        return float(self.counts[k_lo:k_hi].sum()) / self.total

    def rows(self):
        for k, c in enumerate(self.counts):
            yield k * self.bin_width, (k + 1) * self.bin_width, int(c)


def pool_aif(values: Iterable, bin_width: float = DEFAULT_BIN_WIDTH) -> AifHistogram:
    """Histogram of per-customer AIF values; ``values`` may nest per-sample arrays."""
    hist = AifHistogram(bin_width)
    parts = [np.ravel(np.asarray(v, dtype=np.float64)) for v in values]
    if parts:
        hist.add(np.concatenate(parts))
    return hist


# two load points, five customers each
TABLE_I = (
    LoadPointParams(lambda_lp=3.0, u_lp=5.0, customers=5),
    LoadPointParams(lambda_lp=2.0, u_lp=10.0, customers=5),
)
CASE2_DER_CUSTOMERS = (4, 5, 9, 10)


@dataclass(frozen=True)
class ExampleReport:
    saifi_p: float
    saidi_p: float
    saifi_e_case1: float
    saidi_e_case1: float
    saifi_e_case2: float
    saidi_e_case2: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _ideal_der_sample(points: Sequence[LoadPointParams], der_customers: Iterable[int]) -> SystemSample:
    der = set(der_customers)
    aif, aid = [], []
    cid = 1
    for lp in points:
        for _ in range(lp.customers):
            ideal = cid in der
            aif.append(0.0 if ideal else lp.lambda_lp)
            aid.append(0.0 if ideal else lp.u_lp)
            cid += 1
    return SystemSample(np.array(aif), np.array(aid))


def compare_example(der_customers: Optional[Iterable[int]] = None) -> ExampleReport:
    """Perceived vs experienced indices for the two-load-point example.

    Case 1 has no DER. Case 2 gives the listed customers (1-based, numbered
    across load points in order) ideal DER that rides through every outage.
    """
    der = CASE2_DER_CUSTOMERS if der_customers is None else tuple(der_customers)
    saifi_p, saidi_p = perceived_indices(TABLE_I)
    e1 = experienced_indices(_ideal_der_sample(TABLE_I, ()))
    e2 = experienced_indices(_ideal_der_sample(TABLE_I, der))
    return ExampleReport(saifi_p, saidi_p, e1[0], e1[1], e2[0], e2[1])

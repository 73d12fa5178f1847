"""Customer-level PV/storage adoption: marginal archetypes and their
Gaussian-copula coupling.

Correlation targets are rank (Spearman) correlations. For a Gaussian copula
the induced Spearman coefficient is ``(6/pi) asin(rho/2)``, so the target is
inverted with ``rho = 2 sin(pi r / 6)``; ranks survive the marginal
transforms, so the target holds for any choice of marginals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

X_RANGE = (0.0, 3.5)
Y_RANGE = (0.0, 6.75)
BETA_LOW = (0.75, 5.0)
BETA_HIGH = (5.0, 0.75)
TRUNCNORM_SIGMA = {"X": 0.5, "Y": 1.0}


class Kind(str, enum.Enum):
    LIMITED = "L"
    VARIED = "V"
    MEDIAN_FOCUSED = "MF"
    HIGHLY_CONCENTRATED = "HC"

    @classmethod
    def parse(cls, code: str) -> "Kind":
        try:
            return cls(code.upper())
        except ValueError:
            raise ValueError(f"unknown adoption kind {code!r}; expected one of L, V, MF, HC") from None


KIND_ORDER = (Kind.LIMITED, Kind.VARIED, Kind.MEDIAN_FOCUSED, Kind.HIGHLY_CONCENTRATED)

# rows: PV kind, columns: storage kind
CORRELATION_TABLE = {
    (Kind.LIMITED, Kind.LIMITED): 0.7,
    (Kind.LIMITED, Kind.VARIED): 0.2,
    (Kind.LIMITED, Kind.MEDIAN_FOCUSED): 0.4,
    (Kind.LIMITED, Kind.HIGHLY_CONCENTRATED): -0.2,
    (Kind.VARIED, Kind.LIMITED): 0.2,
    (Kind.VARIED, Kind.VARIED): 0.4,
    (Kind.VARIED, Kind.MEDIAN_FOCUSED): 0.3,
    (Kind.VARIED, Kind.HIGHLY_CONCENTRATED): 0.1,
    (Kind.MEDIAN_FOCUSED, Kind.LIMITED): 0.3,
    (Kind.MEDIAN_FOCUSED, Kind.VARIED): 0.4,
    (Kind.MEDIAN_FOCUSED, Kind.MEDIAN_FOCUSED): 0.5,
    (Kind.MEDIAN_FOCUSED, Kind.HIGHLY_CONCENTRATED): 0.3,
    (Kind.HIGHLY_CONCENTRATED, Kind.LIMITED): 0.2,
    (Kind.HIGHLY_CONCENTRATED, Kind.VARIED): 0.2,
    (Kind.HIGHLY_CONCENTRATED, Kind.MEDIAN_FOCUSED): 0.3,
    (Kind.HIGHLY_CONCENTRATED, Kind.HIGHLY_CONCENTRATED): 0.8,
}


@dataclass(frozen=True)
class MarginalSpec:
    kind: Kind
    variable: str  # "X" (PV) or "Y" (storage)
    lo: float
    hi: float

    @classmethod
    def for_variable(cls, kind, variable: str, hi: float | None = None) -> "MarginalSpec":
        kind = kind if isinstance(kind, Kind) else Kind.parse(kind)
        variable = variable.upper()
        if variable not in ("X", "Y"):
            raise ValueError("variable must be 'X' or 'Y'")
        lo, default_hi = X_RANGE if variable == "X" else Y_RANGE
        return cls(kind, variable, lo, default_hi if hi is None else float(hi))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def beta_params(self) -> tuple[float, float]:
        if self.kind is Kind.LIMITED:
            return BETA_LOW
        if self.kind is Kind.HIGHLY_CONCENTRATED:
            return BETA_HIGH
        raise AttributeError(f"{self.kind} is not a beta marginal")

    @property
    def normal_params(self) -> tuple[float, float]:
        return 0.5 * (self.lo + self.hi), TRUNCNORM_SIGMA[self.variable]

    def _truncnorm_bounds(self):
        mu, sigma = self.normal_params
        return (self.lo - mu) / sigma, (self.hi - mu) / sigma

    def mean(self) -> float:
        if self.kind is Kind.VARIED or self.kind is Kind.MEDIAN_FOCUSED:
            return 0.5 * (self.lo + self.hi)
        a, b = self.beta_params
        return self.lo + self.width * a / (a + b)


def marginal_pdf(spec: MarginalSpec, value):
    v = np.asarray(value, dtype=np.float64)
    inside = (v >= spec.lo) & (v <= spec.hi)
    if spec.kind is Kind.VARIED:
        out = np.where(inside, 1.0 / spec.width, 0.0)
    elif spec.kind is Kind.MEDIAN_FOCUSED:
        mu, sigma = spec.normal_params
        za, zb = spec._truncnorm_bounds()
        mass = special.ndtr(zb) - special.ndtr(za)
        z = (v - mu) / sigma
        out = np.where(inside, np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi) / (sigma * mass), 0.0)
    else:
        a, b = spec.beta_params
        xp = np.clip((v - spec.lo) / spec.width, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_pdf = (a - 1) * np.log(xp) + (b - 1) * np.log1p(-xp) - special.betaln(a, b)
            dens = np.exp(log_pdf) / spec.width
        out = np.where(inside, dens, 0.0)
    return float(out) if out.ndim == 0 else out


def marginal_cdf(spec: MarginalSpec, value):
    v = np.asarray(value, dtype=np.float64)
    xp = np.clip((v - spec.lo) / spec.width, 0.0, 1.0)
    if spec.kind is Kind.VARIED:
        out = xp
    elif spec.kind is Kind.MEDIAN_FOCUSED:
        mu, sigma = spec.normal_params
        za, zb = spec._truncnorm_bounds()
        z = np.clip((v - mu) / sigma, za, zb)
        out = (special.ndtr(z) - special.ndtr(za)) / (special.ndtr(zb) - special.ndtr(za))
    else:
        a, b = spec.beta_params
        out = special.betainc(a, b, xp)
    return float(out) if np.ndim(out) == 0 else out


def _bisect_beta(a: float, b: float, u: float, tol: float = 1e-10) -> float:
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if special.betainc(a, b, mid) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def marginal_quantile(spec: MarginalSpec, u):
    """Inverse CDF on (0, 1)."""
    uu = np.asarray(u, dtype=np.float64)
    if np.any(~((uu > 0.0) & (uu < 1.0))):
        raise ValueError("quantile level must lie strictly inside (0, 1)")
    if spec.kind is Kind.VARIED:
        xp = uu
    elif spec.kind is Kind.MEDIAN_FOCUSED:
        za, zb = spec._truncnorm_bounds()
        pa, pb = special.ndtr(za), special.ndtr(zb)
        mu, sigma = spec.normal_params
        val = mu + sigma * special.ndtri(pa + uu * (pb - pa))
        out = np.clip(val, spec.lo, spec.hi)
        return float(out) if out.ndim == 0 else out
    else:
        a, b = spec.beta_params
        xp = special.betaincinv(a, b, uu)
        bad = ~np.isfinite(xp)
        if np.any(bad):
            xp = np.where(bad, np.vectorize(lambda q: _bisect_beta(a, b, q))(uu), xp)
    out = spec.lo + spec.width * np.clip(xp, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def copula_param(rho_target: float) -> float:
    """Gaussian-copula correlation whose induced Spearman correlation is ``rho_target``."""
    if not abs(rho_target) < 1:
        raise ValueError("target correlation must satisfy |rho| < 1")
    return 2.0 * math.sin(math.pi * rho_target / 6.0)


@dataclass(frozen=True)
class AdoptionScenario:
    x_kind: Kind
    y_kind: Kind
    rho_target: float
    x_hi: float = X_RANGE[1]
    y_hi: float = Y_RANGE[1]
    zero_threshold: float = 0.0

    def __post_init__(self):
        if not abs(self.rho_target) < 1:
            raise ValueError("rho_target must lie in (-1, 1)")

    @classmethod
    def from_table(cls, x_kind, y_kind, **kwargs) -> "AdoptionScenario":
        xk = x_kind if isinstance(x_kind, Kind) else Kind.parse(x_kind)
        yk = y_kind if isinstance(y_kind, Kind) else Kind.parse(y_kind)
        return cls(xk, yk, CORRELATION_TABLE[(xk, yk)], **kwargs)

    @property
    def code(self) -> str:
        return f"{self.x_kind.value}-{self.y_kind.value}"

    @property
    def x_marginal(self) -> MarginalSpec:
        return MarginalSpec.for_variable(self.x_kind, "X", self.x_hi)

    @property
    def y_marginal(self) -> MarginalSpec:
        return MarginalSpec.for_variable(self.y_kind, "Y", self.y_hi)

    def to_dict(self) -> dict:
        return {"x_kind": self.x_kind.value, "y_kind": self.y_kind.value, "rho_target": self.rho_target}


def transform_normals(scenario: AdoptionScenario, z1: np.ndarray, e: np.ndarray) -> np.ndarray:
    """Map independent standard normals to (x, y) pairs through the copula.

    ``z1`` drives X directly; Y's normal is ``rho z1 + sqrt(1 - rho^2) e``.
    Draws below the scenario's zero threshold are set to zero.
    """
    rho = copula_param(scenario.rho_target)
    z2 = rho * z1 + math.sqrt(1.0 - rho * rho) * e
    u1 = np.clip(special.ndtr(z1), 1e-16, 1 - 1e-16)
    u2 = np.clip(special.ndtr(z2), 1e-16, 1 - 1e-16)
    x = np.atleast_1d(marginal_quantile(scenario.x_marginal, u1))
    y = np.atleast_1d(marginal_quantile(scenario.y_marginal, u2))
    if scenario.zero_threshold > 0:
        x = np.where(x < scenario.zero_threshold, 0.0, x)
        y = np.where(y < scenario.zero_threshold, 0.0, y)
    return np.column_stack([x, y])


def sample_joint(scenario: AdoptionScenario, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` correlated adoption pairs as an ``(n, 2)`` array of (x, y)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    z = rng.standard_normal((2, n))
    return transform_normals(scenario, z[0], z[1])


def macro_penetration(samples, peaks: Sequence[float]) -> tuple[float, float]:
    """Peak-weighted system PV and storage penetration ratios."""
    s = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
    p = np.asarray(peaks, dtype=np.float64)
    if s.shape[0] == 0:
        raise ValueError("no samples")
    if s.shape[0] != p.size:
        raise ValueError("samples and peaks differ in length")
    total = p.sum()
    return float((s[:, 0] * p).sum() / total), float((s[:, 1] * p).sum() / total)

"""Goodness-of-fit statistics for progressively Type-II censored samples.

Every statistic is computed from the probability-integral transform
``u_i = Phi((x_i - mu_hat) / sigma_hat)`` of the sample under the fitted null
model, except Balakrishnan's ``T`` which works on raw spacings. All of them
are large when the fit is poor, so tests reject in the upper tail.

The array kernels (``*_batch`` and the private helpers) accept a trailing
axis of length ``m`` so Monte Carlo replicates can be evaluated together.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import linalg, special

from .censoring import CensoringScheme, expected_uniform, gamma_coefficients
from .exceptions import DegenerateDenominator, DomainError, ParseError
from .mle import LocationScaleFit, fit_normal, fit_normal_batch
from .simulate import CensoredSample

__all__ = [
    "StatisticKind",
    "ALL_STATISTICS",
    "parse_statistic",
    "TransformedSample",
    "transform",
    "edf_statistics",
    "spacings",
    "spacings_k",
    "greenwood",
    "qm",
    "greenwood_k",
    "balakrishnan_t",
    "balakrishnan_t_uniform",
    "expected_normal_scores",
    "h_kernel",
    "h_statistic",
    "compute_statistic",
    "compute_all",
    "statistics_batch",
]

U_CLAMP = 1e-15


@dataclass(frozen=True)
class StatisticKind:
    """One of the twelve statistics; ``k`` only applies to ``GreenwoodK``."""

    code: str
    k: int | None = None

    _CODES = ("CPlus", "CMinus", "C", "K", "T1", "T2", "Greenwood", "QM", "GreenwoodK", "BalakrishnanT", "H")
    _NAMES = {"CPlus": "C+", "CMinus": "C-", "C": "C", "K": "K", "T1": "T1", "T2": "T2",
              "Greenwood": "G", "QM": "Q", "BalakrishnanT": "T", "H": "H"}

    def __post_init__(self):
        if self.code not in self._CODES:
            raise ValueError(f"unknown statistic {self.code!r}")
        if self.code == "GreenwoodK":
            if self.k is None or self.k < 2:
                raise ValueError("GreenwoodK needs an integer k >= 2")
        elif self.k is not None:
            raise ValueError(f"{self.code} takes no k")

    @property
    def two_sided(self) -> bool:
        """T concentrates around 1/2 under the null and is tested in both tails."""
        return self.code == "BalakrishnanT"

    @property
    def name(self) -> str:
        if self.code == "GreenwoodK":
            return f"G{self.k}"
        return self._NAMES[self.code]

    def __str__(self):
        return self.name


CPLUS = StatisticKind("CPlus")
CMINUS = StatisticKind("CMinus")
C = StatisticKind("C")
K = StatisticKind("K")
T1 = StatisticKind("T1")
T2 = StatisticKind("T2")
GREENWOOD = StatisticKind("Greenwood")
QM = StatisticKind("QM")
G2 = StatisticKind("GreenwoodK", 2)
G3 = StatisticKind("GreenwoodK", 3)
BALAKRISHNAN_T = StatisticKind("BalakrishnanT")
H = StatisticKind("H")

ALL_STATISTICS = (CPLUS, CMINUS, C, K, T1, T2, GREENWOOD, QM, G2, G3, BALAKRISHNAN_T, H)

_BY_NAME = {s.name.lower(): s for s in ALL_STATISTICS}
_BY_NAME.update({s.code.lower(): s for s in ALL_STATISTICS if s.code != "GreenwoodK"})
_GK = re.compile(r"^g(?:reenwoodk?)?\(?(\d+)\)?$")


def parse_statistic(name) -> StatisticKind:
    """Accepts report names (``"C+"``, ``"G2"``, ``"H"``...) or kind codes."""
    if isinstance(name, StatisticKind):
        return name
    key = str(name).strip().lower()
    if key in _BY_NAME:
        return _BY_NAME[key]
    m = _GK.match(key)
    if m and int(m.group(1)) >= 2:
        return StatisticKind("GreenwoodK", int(m.group(1)))
    raise ParseError(f"unknown statistic {name!r}")


@dataclass(frozen=True)
class TransformedSample:
    """Fitted-CDF values ``u`` next to their null expectations ``mu``."""

    scheme: CensoringScheme
    u: np.ndarray
    mu: np.ndarray

    @property
    def v(self) -> np.ndarray:
        return self.u - self.mu

    @property
    def m(self):
        return self.scheme.m


def _clamp(u):
    return np.clip(u, U_CLAMP, 1.0 - U_CLAMP)


def transform(sample: CensoredSample, fit: LocationScaleFit) -> TransformedSample:
    u = _clamp(special.ndtr((sample.x - fit.mu_hat) / fit.sigma_hat))
    return TransformedSample(sample.scheme, u, expected_uniform(sample.scheme))


def from_uniforms(scheme: CensoringScheme, u) -> TransformedSample:
    """Wrap already-transformed values (mainly for testing)."""
    u = np.asarray(u, dtype=float)
    if u.shape != (scheme.m,):
        raise ValueError(f"expected {scheme.m} values")
    return TransformedSample(scheme, _clamp(u), expected_uniform(scheme))


# --- array kernels -------------------------------------------------------

def _edf(v):
    cp = v.max(axis=-1)
    cm = (-v).max(axis=-1)
    return {
        "C+": cp,
        "C-": cm,
        "C": np.maximum(cp, cm),
        "K": cp + cm,
        "T1": (v * v).mean(axis=-1),
        "T2": np.abs(v).mean(axis=-1),
    }


def _spacings(u, gamma):
    return gamma * np.diff(u, axis=-1, prepend=0.0)


def _spacings_k(u, gamma, k):
    m = u.shape[-1]
    lead = u.shape[:-1]
    ext = np.concatenate([np.zeros(lead + (1,)), u, np.ones(lead + (max(k - 1, 0),))], axis=-1)
    return gamma * (ext[..., k:k + m] - ext[..., :m])


def _greenwood(s):
    return (s * s).sum(axis=-1)


def _qm(s):
    return (s * s).sum(axis=-1) + (s[..., :-1] * s[..., 1:]).sum(axis=-1)


def _t_ratio(gaps, expected_gaps):
    """Weighted ratio of normalized gaps ``i = 2..m``; NaN if degenerate."""
    g = gaps / expected_gaps
    m = g.shape[-1] + 1
    weights = (m - np.arange(2, m + 1)).astype(float)
    num = (weights * g).sum(axis=-1)
    den = (m - 2) * g.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)


def _h_raw(x):
    return (x - 1.0) ** 2 / (x * x + 1.0)


def h_kernel(x):
    """``(x - 1)**2 / (x**2 + 1)``: zero at 1, tends to 1 at 0 and infinity."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("h is defined for x > 0")
    out = _h_raw(x)
    return float(out) if out.ndim == 0 else out


def _h(u, mu, kernel=_h_raw):
    return kernel(u / mu).mean(axis=-1)


# --- single-sample API ---------------------------------------------------

def edf_statistics(t: TransformedSample) -> dict[str, float]:
    return {k: float(v) for k, v in _edf(t.v).items()}


def spacings(t: TransformedSample) -> np.ndarray:
    """Normalized one-step spacings ``gamma_i * (u_i - u_{i-1})`` with ``u_0 = 0``."""
    return _spacings(t.u, gamma_coefficients(t.scheme))


def spacings_k(t: TransformedSample, k: int) -> np.ndarray:
    """Overlapping ``k``-step spacings ``gamma_i * (u_{i+k-1} - u_{i-1})``.

    Indices past ``m`` read as 1, i.e. the upper end of the unit interval.
    """
    if k < 1:
        raise ValueError("k must be positive")
    return _spacings_k(t.u, gamma_coefficients(t.scheme), k)


def greenwood(s) -> float:
    return float(_greenwood(np.asarray(s, dtype=float)))


def qm(s) -> float:
    return float(_qm(np.asarray(s, dtype=float)))


def greenwood_k(sk) -> float:
    return float(_greenwood(np.asarray(sk, dtype=float)))


def balakrishnan_t_uniform(t: TransformedSample) -> float:
    """T computed on the transformed scale.

    Gaps ``u_i - u_{i-1}`` are divided by ``mu_i - mu_{i-1}``. This variant does
    not match the published wire-data value; :func:`balakrishnan_t` does.
    """
    if t.m < 3:
        raise DomainError("T needs m >= 3")
    val = _t_ratio(np.diff(t.u), np.diff(t.mu))
    if np.isnan(val):
        raise DegenerateDenominator("all normalized gaps are zero")
    return float(val)


def balakrishnan_t(sample: CensoredSample) -> float:
    """Balakrishnan, Ng and Kannan's T on raw spacings.

    ``G_i = (x_i - x_{i-1}) / (alpha_i - alpha_{i-1})`` where ``alpha`` are the
    expected standard normal progressive order statistics, and
    ``T = sum_{i=2}^{m-1} (m-i) G_i / ((m-2) sum_{i=2}^{m} G_i)``. Needs no
    parameter estimates and is exactly location-scale invariant.
    """
    if sample.m < 3:
        raise DomainError("T needs m >= 3")
    alpha = expected_normal_scores(sample.scheme)
    val = _t_ratio(np.diff(sample.x), np.diff(alpha))
    if np.isnan(val):
        raise DegenerateDenominator("all spacings after the first are zero")
    return float(val)


def h_statistic(t: TransformedSample, kernel: Callable = h_kernel) -> float:
    """Mean of ``kernel(u_i / mu_i)``."""
    return float(_h(t.u, t.mu, kernel))


# --- expected normal progressive order statistics -----------------------

_SCORE_EDGES = np.linspace(-12.0, 12.0, 41)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(32)


@lru_cache(maxsize=128)
def _normal_scores(r: tuple[int, ...]) -> np.ndarray:
    n = len(r) + sum(r)
    gam = gamma_coefficients(CensoringScheme(n, len(r), r)).astype(float)
    m = gam.size
    # -log(1 - U_i) is the i-th absorption time of a pure-death chain with
    # rates gam; phase probabilities p(y) = e0 @ expm(Q y).
    q = np.diag(-gam) + np.diag(gam[:-1], 1)
    half = np.diff(_SCORE_EDGES)[:, None] / 2
    mid = (_SCORE_EDGES[1:] + _SCORE_EDGES[:-1])[:, None] / 2
    x = (half * _GL_X + mid).ravel()
    w = (half * _GL_W).ravel()
    log_tail = special.log_ndtr(-x)
    y = -log_tail
    dy_dx = np.exp(-0.5 * x * x - 0.5 * math.log(2 * math.pi) - log_tail)
    phases = np.empty((x.size, m))
    p = np.zeros(m)
    p[0] = 1.0
    prev = 0.0
    for j, yj in enumerate(y):
        p = p @ linalg.expm(q * (yj - prev))
        prev = yj
        phases[j] = p
    density = phases * gam * dy_dx[:, None]
    out = (w * x) @ density
    out.setflags(write=False)
    return out


def expected_normal_scores(scheme: CensoringScheme) -> np.ndarray:
    """``E[Z_{i:m:n}]`` for standard normal progressive order statistics."""
    return _normal_scores(scheme.r).copy()


# --- dispatch ------------------------------------------------------------

def _from_transformed(kind: StatisticKind, t: TransformedSample) -> float:
    if kind.code in ("CPlus", "CMinus", "C", "K", "T1", "T2"):
        return edf_statistics(t)[kind.name]
    if kind.code == "Greenwood":
        return greenwood(spacings(t))
    if kind.code == "QM":
        return qm(spacings(t))
    if kind.code == "GreenwoodK":
        return greenwood_k(spacings_k(t, kind.k))
    if kind.code == "H":
        return h_statistic(t)
    raise ValueError(kind)


def compute_statistic(sample: CensoredSample, kind, fit: LocationScaleFit | None = None) -> float:
    """Fit the normal null model (unless ``fit`` is given) and evaluate ``kind``."""
    kind = parse_statistic(kind)
    if kind.code == "BalakrishnanT":
        return balakrishnan_t(sample)
    if fit is None:
        fit = fit_normal(sample)
    return _from_transformed(kind, transform(sample, fit))


def compute_all(sample: CensoredSample, kinds=ALL_STATISTICS, fit: LocationScaleFit | None = None) -> dict[str, float]:
    kinds = [parse_statistic(k) for k in kinds]
    if fit is None and any(k.code != "BalakrishnanT" for k in kinds):
        fit = fit_normal(sample)
    return {k.name: compute_statistic(sample, k, fit) for k in kinds}


def statistics_batch(x, scheme: CensoringScheme, kinds=ALL_STATISTICS):
    """Evaluate statistics for many samples (rows of ``x``) under one scheme.

    Returns
    -------
    values : dict of str to ndarray
        One array of length ``R`` per statistic name. Statistics of rows whose
        fit failed are NaN.
    converged : ndarray of bool
        MLE convergence flag per row.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    kinds = [parse_statistic(k) for k in kinds]
    out = {}
    need_fit = any(k.code != "BalakrishnanT" for k in kinds)
    converged = np.ones(x.shape[0], dtype=bool)
    if need_fit:
        fit = fit_normal_batch(x, scheme.removals)
        converged = fit.converged
        with np.errstate(invalid="ignore"):
            z = (x - fit.mu[:, None]) / fit.sigma[:, None]
        u = _clamp(special.ndtr(z))
        mu = expected_uniform(scheme)
        gamma = gamma_coefficients(scheme)
        v = u - mu
        edf = _edf(v) if any(k.code in ("CPlus", "CMinus", "C", "K", "T1", "T2") for k in kinds) else {}
        s1 = _spacings(u, gamma)
    for k in kinds:
        if k.code in ("CPlus", "CMinus", "C", "K", "T1", "T2"):
            val = edf[k.name]
        elif k.code == "Greenwood":
            val = _greenwood(s1)
        elif k.code == "QM":
            val = _qm(s1)
        elif k.code == "GreenwoodK":
            val = _greenwood(_spacings_k(u, gamma, k.k))
        elif k.code == "H":
            val = _h(u, mu)
        else:
            val = _t_ratio(np.diff(x, axis=-1), np.diff(expected_normal_scores(scheme)))
        val = np.where(converged, val, np.nan) if k.code != "BalakrishnanT" else val
        out[k.name] = np.asarray(val, dtype=float)
    return out, converged

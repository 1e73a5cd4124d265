"""Location-scale families used as null model and alternatives."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import DomainError, ParseError

__all__ = ["Distribution", "normal", "student_t", "logistic", "laplace", "parse_distribution"]

KINDS = ("normal", "student_t", "logistic", "laplace")


@dataclass(frozen=True)
class Distribution:
    """A symmetric location-scale distribution.

    ``kind`` is one of ``normal``, ``student_t``, ``logistic``, ``laplace``.
    ``df`` is only used by ``student_t``.
    """

    kind: str
    loc: float = 0.0
    scale: float = 1.0
    df: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")
        if self.kind == "student_t":
            if self.df is None or not self.df > 0:
                raise DomainError(f"degrees of freedom must be positive, got {self.df}")
        elif self.df is not None:
            raise ValueError(f"{self.kind} takes no degrees of freedom")

    @property
    def name(self) -> str:
        if self.kind == "student_t":
            base = f"t{_fmt(self.df)}"
        else:
            base = self.kind
        if self.loc != 0 or self.scale != 1:
            base += f":{_fmt(self.loc)}:{_fmt(self.scale)}"
        return base

    @property
    def label(self) -> str:
        """Column label in the style of the published tables."""
        if self.kind == "normal":
            head = "N"
        elif self.kind == "student_t":
            return f"t({_fmt(self.df)})" if self.loc == 0 and self.scale == 1 else self.name
        elif self.kind == "logistic":
            head = "L"
        else:
            head = "DE"
        return f"{head}({_fmt(self.loc)},{_fmt(self.scale)})"

    def _std(self, x):
        return (np.asarray(x, dtype=float) - self.loc) / self.scale

    def pdf(self, x):
        z = self._std(x)
        if self.kind == "normal":
            out = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        elif self.kind == "student_t":
            nu = self.df
            logc = special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2) - 0.5 * math.log(nu * math.pi)
            out = np.exp(logc - (nu + 1) / 2 * np.log1p(z * z / nu))
        elif self.kind == "logistic":
            e = np.exp(-np.abs(z))
            out = e / (1.0 + e) ** 2
        else:
            out = 0.5 * np.exp(-np.abs(z))
        return out / self.scale

    def cdf(self, x):
        z = self._std(x)
        if self.kind == "normal":
            return special.ndtr(z)
        if self.kind == "student_t":
            return special.stdtr(self.df, z)
        if self.kind == "logistic":
            return special.expit(z)
        return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0)))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0) | (p >= 1)) or np.any(np.isnan(p)):
            raise DomainError("quantile requires 0 < p < 1")
        if self.kind == "normal":
            z = special.ndtri(p)
        elif self.kind == "student_t":
            z = special.stdtrit(self.df, p)
        elif self.kind == "logistic":
            z = special.logit(p)
        else:
            z = np.where(p < 0.5, np.log(2 * np.minimum(p, 0.5)), -np.log(2 * (1 - np.maximum(p, 0.5))))
        return self.loc + self.scale * z

    def sample(self, rng, size=None):
        """Inverse-transform draw(s) using ``rng.random``."""
        u = rng.random(size)
        # Generator.random is in [0, 1); 0 would map to -inf
        u = np.where(u == 0.0, np.nextafter(0.0, 1.0), u)
        out = self.quantile(u)
        return float(out) if size is None else out


def _fmt(v) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def normal(loc=0.0, scale=1.0) -> Distribution:
    return Distribution("normal", loc, scale)


def student_t(df, loc=0.0, scale=1.0) -> Distribution:
    return Distribution("student_t", loc, scale, float(df))


def logistic(loc=0.0, scale=1.0) -> Distribution:
    return Distribution("logistic", loc, scale)


def laplace(loc=0.0, scale=1.0) -> Distribution:
    return Distribution("laplace", loc, scale)


_T_RE = re.compile(r"^t\(?([0-9.]+)\)?$")
_ALIASES = {
    "normal": "normal", "norm": "normal", "n": "normal",
    "logistic": "logistic", "l": "logistic",
    "laplace": "laplace", "de": "laplace", "double_exponential": "laplace", "dexp": "laplace",
}


_LABEL_RE = re.compile(r"^([a-z]+)\(\s*([-0-9.e+]+)\s*,\s*([-0-9.e+]+)\s*\)$")


def parse_distribution(text: str) -> Distribution:
    """Parse names like ``normal``, ``t3``, ``t(4.5)``, ``laplace:0:2``.

    Table labels such as ``N(0,1)`` and ``DE(0,1)`` are accepted too.
    """
    lab = _LABEL_RE.match(text.strip().lower())
    if lab:
        text = f"{lab.group(1)}:{lab.group(2)}:{lab.group(3)}"
    parts = text.strip().lower().split(":")
    if len(parts) not in (1, 3):
        raise ParseError(f"distribution must be 'name' or 'name:loc:scale', got {text!r}")
    head = parts[0]
    try:
        loc, scale = (float(parts[1]), float(parts[2])) if len(parts) == 3 else (0.0, 1.0)
    except ValueError as exc:
        raise ParseError(f"bad location/scale in {text!r}") from exc
    m = _T_RE.match(head)
    if m:
        return student_t(float(m.group(1)), loc, scale)
    if head not in _ALIASES:
        raise ParseError(f"unknown distribution {text!r}")
    return Distribution(_ALIASES[head], loc, scale)

"""Simulation of progressively Type-II censored samples."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .censoring import CensoringScheme, _tail_exponents
from .distributions import Distribution

__all__ = [
    "CensoredSample",
    "UniformProgressiveSample",
    "uniforms_from_draws",
    "sample_uniform_progressive",
    "sample_progressive",
]


@dataclass(frozen=True)
class CensoredSample:
    """Observed failure values ``x`` under ``scheme`` (ties allowed)."""

    scheme: CensoringScheme
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).copy()
        if x.shape != (self.scheme.m,):
            raise ValueError(f"expected {self.scheme.m} observations, got shape {x.shape}")
        if np.any(np.diff(x) < 0):
            raise ValueError("observations must be nondecreasing")
        if not np.all(np.isfinite(x)):
            raise ValueError("observations must be finite")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def m(self):
        return self.scheme.m

    def affine(self, a, b) -> CensoredSample:
        """Sample of ``a * x + b`` (``a > 0``)."""
        if not a > 0:
            raise ValueError("affine map needs a > 0 to preserve order")
        return CensoredSample(self.scheme, a * self.x + b)


@dataclass(frozen=True)
class UniformProgressiveSample:
    scheme: CensoringScheme
    u: np.ndarray


def uniforms_from_draws(scheme: CensoringScheme, w) -> np.ndarray:
    """Map iid U(0,1) draws to uniform progressive order statistics.

    Parameters
    ----------
    scheme : CensoringScheme
    w : array_like, shape (..., m)
        Independent uniforms. Column ``j`` drives the factor with exponent
        ``a_{j+1} = j + 1 + r_{m-j} + ... + r_m``.

    Returns
    -------
    numpy.ndarray
        Same shape as ``w``; ``u[..., i-1]`` is distributed as ``U_{i:m:n}``.
        Computed as ``1 - prod V_j`` over the last ``i`` factors, with
        ``V_j = W_j ** (1 / a_j)``, in log space.
    """
    w = np.asarray(w, dtype=float)
    a = _tail_exponents(scheme.removals.astype(float))
    tiny = np.finfo(float).tiny
    logv = np.log(np.maximum(w, tiny)) / a
    # log(1 - u_i) accumulates factors j = m, m-1, ..., m-i+1
    log_surv = np.cumsum(logv[..., ::-1], axis=-1)
    return -np.expm1(log_surv)


def sample_uniform_progressive(scheme: CensoringScheme, rng, size=None):
    """Draw uniform progressive order statistics.

    With ``size=None`` returns a :class:`UniformProgressiveSample`, otherwise an
    array of shape ``(size, m)``.
    """
    shape = (scheme.m,) if size is None else (size, scheme.m)
    u = uniforms_from_draws(scheme, rng.random(shape))
    if size is None:
        return UniformProgressiveSample(scheme, u)
    return u


def sample_progressive(scheme: CensoringScheme, dist: Distribution, rng, size=None):
    """Draw a censored sample from ``dist`` by inverse transform.

    Returns a :class:`CensoredSample` when ``size`` is None, otherwise an array
    of shape ``(size, m)``.
    """
    if size is None:
        u = sample_uniform_progressive(scheme, rng).u
        return CensoredSample(scheme, transform_uniforms(dist, u))
    return transform_uniforms(dist, sample_uniform_progressive(scheme, rng, size))


def transform_uniforms(dist: Distribution, u):
    u = np.clip(u, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    x = dist.quantile(u)
    # quantile is monotone, but guard against roundoff inversions in far tails
    return np.maximum.accumulate(x, axis=-1)

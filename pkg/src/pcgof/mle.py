"""Maximum likelihood for the normal model under progressive Type-II censoring.

The log-likelihood (up to the scheme constant) is

    l(mu, sigma) = sum_i [log phi(z_i) - log sigma + r_i log(1 - Phi(z_i))],

with ``z_i = (x_i - mu) / sigma``. Fits run on data standardized by the sample
mean and standard deviation and are mapped back, so the estimates are exactly
equivariant up to roundoff. Many samples sharing one scheme are fitted at once
by :func:`fit_normal_batch`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .exceptions import DegenerateSample, DomainError
from .simulate import CensoredSample

__all__ = [
    "LocationScaleFit",
    "BatchFit",
    "mills_ratio",
    "loglik_normal",
    "loglik_gradient",
    "fit_normal",
    "fit_normal_batch",
]

log = logging.getLogger(__name__)

_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)
MAX_ITER = 200
MAX_HALVINGS = 30
GRAD_RTOL = 1e-8
STEP_TOL = 1e-10
_HESS_STEP = 1e-5


@dataclass(frozen=True)
class LocationScaleFit:
    """Fitted normal parameters with convergence diagnostics.

    ``grad_norm`` is the Euclidean norm of ``sigma * (dl/dmu, dl/dsigma)``,
    which does not depend on the measurement scale.
    """

    mu_hat: float
    sigma_hat: float
    loglik: float
    converged: bool
    iterations: int
    grad_norm: float

    def as_dict(self):
        return {
            "mu_hat": self.mu_hat,
            "sigma_hat": self.sigma_hat,
            "loglik": self.loglik,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
        }


@dataclass
class BatchFit:
    """Vectorized counterpart of :class:`LocationScaleFit` (one entry per row)."""

    mu: np.ndarray
    sigma: np.ndarray
    loglik: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    grad_norm: np.ndarray


def mills_ratio(z):
    """Hazard of the standard normal, ``phi(z) / (1 - Phi(z))``.

    Evaluated as ``exp(log phi(z) - log Phi(-z))`` so it stays finite and
    accurate far into the upper tail, where it behaves like ``z + 1/z``.
    """
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z - _LOG_SQRT_2PI - special.log_ndtr(-z))


def _check_sigma(sigma):
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")


def loglik_normal(sample: CensoredSample, mu, sigma) -> float:
    _check_sigma(sigma)
    z = (sample.x - mu) / sigma
    r = sample.scheme.removals
    return float(np.sum(-0.5 * z * z - _LOG_SQRT_2PI - math.log(sigma) + r * special.log_ndtr(-z)))


def loglik_gradient(sample: CensoredSample, mu, sigma) -> tuple[float, float]:
    """Analytic partial derivatives ``(dl/dmu, dl/dsigma)``."""
    _check_sigma(sigma)
    z = (sample.x - mu) / sigma
    r = sample.scheme.removals
    lam = mills_ratio(z)
    d_mu = np.sum(z + r * lam) / sigma
    d_sigma = np.sum(z * z - 1.0 + r * z * lam) / sigma
    return float(d_mu), float(d_sigma)


# --- batched core on standardized data, parameters theta = (mu, log sigma) ---

def _loglik_std(x, r, mu, tau):
    z = (x - mu[:, None]) * np.exp(-tau)[:, None]
    terms = -0.5 * z * z - _LOG_SQRT_2PI - tau[:, None] + r * special.log_ndtr(-z)
    return terms.sum(axis=1)


def _scaled_grad(x, r, mu, tau):
    """``sigma * dl/dmu`` and ``dl/dlog(sigma)``, both scale free."""
    z = (x - mu[:, None]) * np.exp(-tau)[:, None]
    rl = r * mills_ratio(z)
    return (z + rl).sum(axis=1), (z * z - 1.0 + z * rl).sum(axis=1)


def _theta_grad(x, r, mu, tau):
    gs_mu, g_tau = _scaled_grad(x, r, mu, tau)
    return gs_mu * np.exp(-tau), g_tau


def _num_hessian(x, r, mu, tau):
    h = _HESS_STEP
    gp = _theta_grad(x, r, mu + h, tau)
    gm = _theta_grad(x, r, mu - h, tau)
    h_mm = (gp[0] - gm[0]) / (2 * h)
    h_mt1 = (gp[1] - gm[1]) / (2 * h)
    gp = _theta_grad(x, r, mu, tau + h)
    gm = _theta_grad(x, r, mu, tau - h)
    h_tt = (gp[1] - gm[1]) / (2 * h)
    h_mt2 = (gp[0] - gm[0]) / (2 * h)
    return h_mm, 0.5 * (h_mt1 + h_mt2), h_tt


def _grad_ok(gnorm, ll_std, ll_orig):
    scale = np.maximum(1.0, np.minimum(np.abs(ll_std), np.abs(ll_orig)))
    return gnorm <= GRAD_RTOL * scale


def _newton(x, r, mu, tau, log_sd, max_iter):
    """Damped Newton ascent on every row; returns updated state arrays."""
    nrow = x.shape[0]
    iters = np.zeros(nrow, dtype=np.int64)
    done = np.zeros(nrow, dtype=bool)
    converged = np.zeros(nrow, dtype=bool)
    ll = _loglik_std(x, r, mu, tau)
    for _ in range(max_iter + 1):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        xa, ma, ta = x[act], mu[act], tau[act]
        gs_mu, g_tau = _scaled_grad(xa, r, ma, ta)
        gnorm = np.hypot(gs_mu, g_tau)
        ok = _grad_ok(gnorm, ll[act], ll[act] - x.shape[1] * log_sd[act])
        converged[act[ok]] = True
        done[act[ok]] = True
        capped = iters[act] >= max_iter
        done[act[capped]] = True
        keep = ~(ok | capped)
        act = act[keep]
        if act.size == 0:
            break
        xa, ma, ta = x[act], mu[act], tau[act]
        g0 = gs_mu[keep] * np.exp(-ta)
        g1 = g_tau[keep]
        h00, h01, h11 = _num_hessian(xa, r, ma, ta)
        det = h00 * h11 - h01 * h01
        negdef = (h00 < 0) & (det > 0)
        safe_det = np.where(negdef, det, 1.0)
        d0 = np.where(negdef, -(h11 * g0 - h01 * g1) / safe_det, g0)
        d1 = np.where(negdef, -(-h01 * g0 + h00 * g1) / safe_det, g1)
        ascent = d0 * g0 + d1 * g1 > 0
        d0 = np.where(ascent, d0, g0)
        d1 = np.where(ascent, d1, g1)
        # cap the log-scale move so exp() cannot overflow on wild steps
        cap = np.maximum(1.0, np.maximum(np.abs(d0), np.abs(d1)) / 2.0)
        d0, d1 = d0 / cap, d1 / cap

        step = np.ones(act.size)
        pending = np.ones(act.size, dtype=bool)
        ll_old = ll[act]
        new_mu, new_tau, new_ll = ma.copy(), ta.copy(), ll_old.copy()
        for _ in range(MAX_HALVINGS + 1):
            idx = np.flatnonzero(pending)
            if idx.size == 0:
                break
            cm = ma[idx] + step[idx] * d0[idx]
            ct = ta[idx] + step[idx] * d1[idx]
            cl = _loglik_std(xa[idx], r, cm, ct)
            # roundoff slack: near the optimum the gain is below one ulp of l
            slack = 1e-12 * np.maximum(1.0, np.abs(ll_old[idx]))
            good = np.isfinite(cl) & (cl >= ll_old[idx] - slack)
            gi = idx[good]
            new_mu[gi], new_tau[gi], new_ll[gi] = cm[good], ct[good], cl[good]
            pending[gi] = False
            step[idx[~good]] *= 0.5
        stalled = pending
        moved = np.maximum(np.abs(new_mu - ma), np.abs(new_tau - ta))
        mu[act], tau[act], ll[act] = new_mu, new_tau, new_ll
        iters[act] += 1
        # no acceptable step or negligible motion: hand over to the fallback
        stop = stalled | (moved <= STEP_TOL)
        done[act[stop]] = True
    return mu, tau, ll, converged, iters


def _nelder_mead(x_row, r, mu0, tau0):
    def neg(theta):
        v = _loglik_std(x_row[None, :], r, np.array([theta[0]]), np.array([theta[1]]))[0]
        return -v if np.isfinite(v) else np.inf

    res = optimize.minimize(neg, [mu0, tau0], method="Nelder-Mead",
                            options={"maxiter": MAX_ITER, "xatol": 1e-12, "fatol": 1e-14})
    return float(res.x[0]), float(res.x[1]), int(res.nit)


def fit_normal_batch(x, r) -> BatchFit:
    """Fit the censored normal model to every row of ``x``.

    Parameters
    ----------
    x : array_like, shape (R, m)
        Nondecreasing observations, one censored sample per row.
    r : array_like, shape (m,)
        Removal vector shared by all rows.

    Rows with zero spread come back with ``converged=False`` and NaN estimates.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.asarray(r, dtype=float)
    nrow, m = x.shape
    center = x.mean(axis=1)
    sd = x.std(axis=1)
    degenerate = ~(sd > 0) | (m < 2)
    sd_safe = np.where(degenerate, 1.0, sd)
    xs = (x - center[:, None]) / sd_safe[:, None]
    log_sd = np.log(sd_safe)

    mu = np.zeros(nrow)
    tau = np.zeros(nrow)
    mu, tau, ll, conv, iters = _newton(xs, r, mu, tau, log_sd, MAX_ITER)

    retry = np.flatnonzero(~conv & ~degenerate)
    for i in retry:
        m0, t0, nit = _nelder_mead(xs[i], r, mu[i], tau[i])
        rows = np.array([i])
        mu_i, tau_i, ll_i, conv_i, it_i = _newton(
            xs[rows], r, np.array([m0]), np.array([t0]), log_sd[rows], MAX_ITER)
        if ll_i[0] >= ll[i] or conv_i[0]:
            mu[i], tau[i], ll[i], conv[i] = mu_i[0], tau_i[0], ll_i[0], conv_i[0]
        iters[i] += nit + it_i[0]
        if not conv[i]:
            log.debug("censored normal fit did not converge for row %d", i)

    gs_mu, g_tau = _scaled_grad(xs, r, mu, tau)
    gnorm = np.hypot(gs_mu, g_tau)
    out_mu = center + sd_safe * mu
    out_sigma = sd_safe * np.exp(tau)
    out_ll = ll - m * log_sd
    conv = conv & ~degenerate
    nan = np.where(degenerate, np.nan, 1.0)
    return BatchFit(out_mu * nan, out_sigma * nan, out_ll * nan, conv, iters, gnorm * nan)


def fit_normal(sample: CensoredSample) -> LocationScaleFit:
    """Maximum likelihood estimates of ``(mu, sigma)`` for a censored sample.

    Raises
    ------
    DegenerateSample
        Fewer than two observations, or all observations equal.
    """
    if sample.m < 2:
        raise DegenerateSample("at least two observed failures are needed")
    if not np.ptp(sample.x) > 0:
        raise DegenerateSample("all observations are equal")
    b = fit_normal_batch(sample.x[None, :], sample.scheme.removals)
    fit = LocationScaleFit(
        mu_hat=float(b.mu[0]),
        sigma_hat=float(b.sigma[0]),
        loglik=float(b.loglik[0]),
        converged=bool(b.converged[0]),
        iterations=int(b.iterations[0]),
        grad_norm=float(b.grad_norm[0]),
    )
    if not fit.converged:
        log.warning("MLE did not converge after %d iterations; returning best point", fit.iterations)
    return fit

"""Monte Carlo engine: null distributions, critical values, p-values, power.

Reproducibility
---------------
Replicate ``i`` of an experiment draws its uniforms from a Philox stream whose
key is a hash of ``(seed, tag)`` and whose counter starts at
``(attempt, i, 0, 0)``. Replicates are grouped in fixed-size chunks, so the
output is bit-identical whatever the number of worker processes. Replicates
whose MLE does not converge are redrawn with ``attempt + 1``.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .censoring import CensoringScheme
from .distributions import Distribution, normal
from .exceptions import NonConvergence
from .gof import ALL_STATISTICS, StatisticKind, compute_all, parse_statistic, statistics_batch
from .mle import fit_normal
from .simulate import CensoredSample, transform_uniforms, uniforms_from_draws

__all__ = [
    "MonteCarloConfig",
    "TestReport",
    "PowerCell",
    "ConsistencyCell",
    "simulate_statistics",
    "null_statistics",
    "null_statistic_sample",
    "critical_value",
    "quantile_upper",
    "critical_bounds",
    "rejects",
    "p_value",
    "monte_carlo_p_value",
    "power",
    "power_table",
    "consistency_study",
    "run_test",
]

log = logging.getLogger(__name__)

CHUNK = 500
MAX_ATTEMPTS = 25
REDRAW_CAP = 0.01
NULL_TAG = "null"


@dataclass(frozen=True)
class MonteCarloConfig:
    """Settings shared by every Monte Carlo driver.

    ``workers=0`` uses all available CPUs, ``1`` runs in-process. The result
    never depends on ``workers``. ``cache_dir`` (optional) stores simulated
    null samples between runs.
    """

    reps: int = 10_000
    seed: int = 20240611
    alpha: float = 0.10
    workers: int = 1
    cache_dir: str | None = None

    def __post_init__(self):
        if self.reps < 100:
            raise ValueError(f"reps must be at least 100, got {self.reps}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")

    def replace(self, **changes) -> MonteCarloConfig:
        return MonteCarloConfig(**{**asdict(self), **changes})

    @property
    def n_workers(self) -> int:
        return self.workers or os.cpu_count() or 1


@dataclass(frozen=True)
class TestReport:
    """Outcome of one statistic on one sample.

    ``critical_lower`` is set only for two-sided statistics; the test rejects
    when ``observed > critical_value`` or ``observed < critical_lower``.
    """

    statistic: str
    observed: float
    critical_value: float
    p_value: float
    reject: bool
    alpha: float
    reps: int
    seed: int
    scheme: str
    fit: dict = field(default_factory=dict)
    critical_lower: float | None = None

    __test__ = False  # not a pytest class

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class PowerCell:
    scheme: str
    alternative: str
    statistic: str
    estimate: float
    std_error: float
    critical_value: float
    reps: int
    critical_lower: float | None = None


@dataclass(frozen=True)
class ConsistencyCell:
    scheme: str
    n: int
    m: int
    alternative: str
    statistic: str
    estimate: float
    std_error: float
    reps: int


# --- random streams -----------------------------------------------------

def stream_key(seed: int, tag: str) -> np.ndarray:
    digest = hashlib.blake2b(f"{int(seed)}/{tag}".encode(), digest_size=16).digest()
    return np.frombuffer(digest, dtype="<u8").astype(np.uint64)


def replicate_draws(seed: int, tag: str, indices, attempts, m: int) -> np.ndarray:
    """``m`` iid uniforms for each replicate index, from its own stream."""
    key = stream_key(seed, tag)
    out = np.empty((len(indices), m))
    for row, (i, a) in enumerate(zip(indices, attempts)):
        counter = np.array([a, i, 0, 0], dtype=np.uint64)
        bitgen = np.random.Philox(key=key, counter=counter)
        out[row] = np.random.Generator(bitgen).random(m)
    return out


def _experiment_tag(kind: str, scheme: CensoringScheme, dist: Distribution) -> str:
    return f"{kind}|{scheme.key()}|{dist.name}"


# --- simulation core ----------------------------------------------------

def _simulate_chunk(scheme, dist, kinds, seed, tag, start, stop):
    idx = np.arange(start, stop, dtype=np.uint64)
    attempts = np.zeros(idx.size, dtype=np.uint64)

    def draw(rows):
        w = replicate_draws(seed, tag, idx[rows], attempts[rows], scheme.m)
        return transform_uniforms(dist, uniforms_from_draws(scheme, w))

    rows = np.arange(idx.size)
    values, ok = statistics_batch(draw(rows), scheme, kinds)
    redraws = 0
    while not ok.all():
        bad = np.flatnonzero(~ok)
        attempts[bad] += 1
        if attempts.max() > MAX_ATTEMPTS:
            raise NonConvergence(f"replicate keeps failing to fit under {scheme}")
        redraws += bad.size
        sub, sub_ok = statistics_batch(draw(bad), scheme, kinds)
        for name in values:
            values[name][bad] = sub[name]
        ok[bad] = sub_ok
    return values, redraws


def simulate_statistics(scheme: CensoringScheme, dist: Distribution, config: MonteCarloConfig,
                        kinds=ALL_STATISTICS, tag: str = "sample") -> dict[str, np.ndarray]:
    """Statistic values for ``config.reps`` samples drawn from ``dist``.

    Returns a dict mapping statistic names to arrays of length ``reps``, in
    replicate order.
    """
    kinds = tuple(parse_statistic(k) for k in kinds)
    full_tag = _experiment_tag(tag, scheme, dist)
    bounds = [(s, min(s + CHUNK, config.reps)) for s in range(0, config.reps, CHUNK)]
    args = [(scheme, dist, kinds, config.seed, full_tag, a, b) for a, b in bounds]
    workers = min(config.n_workers, len(bounds))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk, *zip(*args)))
    else:
        parts = [_simulate_chunk(*a) for a in args]
    redraws = sum(p[1] for p in parts)
    if redraws > REDRAW_CAP * config.reps:
        raise NonConvergence(f"{redraws} of {config.reps} replicates needed redraws under {scheme}")
    if redraws:
        log.info("%d replicates redrawn after non-converged fits (%s)", redraws, scheme)
    return {k.name: np.concatenate([p[0][k.name] for p in parts]) for k in kinds}


def _cache_path(config: MonteCarloConfig, scheme: CensoringScheme) -> Path | None:
    if not config.cache_dir:
        return None
    return Path(config.cache_dir) / f"null-{scheme.key()}-r{config.reps}-s{config.seed}.npz"


def null_statistics(scheme: CensoringScheme, config: MonteCarloConfig) -> dict[str, np.ndarray]:
    """Null (standard normal) distribution of all twelve statistics.

    Samples are cached on disk when ``config.cache_dir`` is set. The cache
    key covers the scheme, replicate count and seed; alpha is applied later.
    """
    path = _cache_path(config, scheme)
    if path is not None and path.exists():
        with np.load(path) as data:
            return {k: data[k] for k in data.files}
    values = simulate_statistics(scheme, normal(), config, ALL_STATISTICS, tag=NULL_TAG)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + f".{os.getpid()}.tmp.npz")
        np.savez(tmp, **values)
        os.replace(tmp, path)
    return values


def _null_for(scheme, kind: StatisticKind, config) -> np.ndarray:
    values = null_statistics(scheme, config)
    if kind.name not in values:
        values = simulate_statistics(scheme, normal(), config, (kind,), tag=NULL_TAG)
    return values[kind.name]


def null_statistic_sample(scheme: CensoringScheme, kind, config: MonteCarloConfig) -> np.ndarray:
    return _null_for(scheme, parse_statistic(kind), config)


def quantile_upper(values, alpha: float) -> float:
    """Order statistic of rank ``ceil((1 - alpha) * N)`` (1-based).

    Warns when either tail holds less than one replicate, which means the
    requested level is not resolved by the sample; the rank is then clamped
    to ``[1, N]``.
    """
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    rank = math.ceil(round((1.0 - alpha) * n, 9))
    if alpha * n < 1 or (1.0 - alpha) * n < 1:
        warnings.warn(f"alpha={alpha} is not resolved by {n} replicates; rank clamped", RuntimeWarning,
                      stacklevel=2)
    rank = min(max(rank, 1), n)
    return float(x[rank - 1])


def critical_bounds(simulated, kind, alpha: float) -> tuple[float | None, float]:
    """``(lower, upper)`` rejection thresholds; ``lower`` is None for upper-tail tests."""
    kind = parse_statistic(kind)
    if kind.two_sided:
        upper = quantile_upper(simulated, alpha / 2)
        lower = -quantile_upper(-np.asarray(simulated), alpha / 2)
        return lower, upper
    return None, quantile_upper(simulated, alpha)


def rejects(observed, lower, upper):
    observed = np.asarray(observed)
    out = observed > upper
    if lower is not None:
        out = out | (observed < lower)
    return out


def critical_value(scheme: CensoringScheme, kind, config: MonteCarloConfig) -> float:
    """Upper critical value of the statistic's null distribution.

    For two-sided statistics this is the upper ``alpha / 2`` point.
    """
    return critical_bounds(null_statistic_sample(scheme, kind, config), kind, config.alpha)[1]


def monte_carlo_p_value(observed: float, simulated, two_sided: bool = False) -> float:
    """``(1 + #{simulated >= observed}) / (N + 1)``, doubled smaller tail if two-sided."""
    simulated = np.asarray(simulated)
    upper = (1 + np.count_nonzero(simulated >= observed)) / (simulated.size + 1)
    if not two_sided:
        return float(upper)
    lower = (1 + np.count_nonzero(simulated <= observed)) / (simulated.size + 1)
    return float(min(1.0, 2 * min(upper, lower)))


def p_value(observed: float, scheme: CensoringScheme, kind, config: MonteCarloConfig) -> float:
    kind = parse_statistic(kind)
    return monte_carlo_p_value(observed, null_statistic_sample(scheme, kind, config), kind.two_sided)


def power_table(scheme: CensoringScheme, alternatives, kinds, config: MonteCarloConfig) -> list[PowerCell]:
    """Rejection rates of the level-``alpha`` tests for every (alternative, kind)."""
    kinds = tuple(parse_statistic(k) for k in kinds)
    nulls = null_statistics(scheme, config)
    cvs = {k.name: critical_bounds(_null_for(scheme, k, config) if k.name not in nulls else nulls[k.name],
                                   k, config.alpha)
           for k in kinds}
    cells = []
    for dist in alternatives:
        values = simulate_statistics(scheme, dist, config, kinds, tag="alternative")
        for k in kinds:
            lower, upper = cvs[k.name]
            rate = float(np.mean(rejects(values[k.name], lower, upper)))
            cells.append(PowerCell(
                scheme=scheme.label or scheme.describe(),
                alternative=dist.label,
                statistic=k.name,
                estimate=rate,
                std_error=math.sqrt(rate * (1 - rate) / config.reps),
                critical_value=upper,
                reps=config.reps,
                critical_lower=lower,
            ))
    return cells


def power(scheme: CensoringScheme, kind, alternative: Distribution, config: MonteCarloConfig) -> PowerCell:
    return power_table(scheme, [alternative], [kind], config)[0]


def consistency_study(family: int, ms, alternatives, config: MonteCarloConfig, kind="H") -> list[ConsistencyCell]:
    """Mean of a statistic over ``reps`` samples for each (m, alternative)."""
    from .censoring import scheme_family

    kind = parse_statistic(kind)
    cells = []
    for m in ms:
        scheme = scheme_family(family, m)
        for dist in alternatives:
            vals = simulate_statistics(scheme, dist, config, (kind,), tag="consistency")[kind.name]
            cells.append(ConsistencyCell(
                scheme=scheme.label,
                n=scheme.n,
                m=scheme.m,
                alternative=dist.label,
                statistic=kind.name,
                estimate=float(vals.mean()),
                std_error=float(vals.std(ddof=1) / math.sqrt(vals.size)),
                reps=config.reps,
            ))
    return cells


def run_test(sample: CensoredSample, kinds=ALL_STATISTICS, config: MonteCarloConfig | None = None) -> list[TestReport]:
    """Observed statistics with Monte Carlo critical values and p-values."""
    config = config or MonteCarloConfig()
    kinds = [parse_statistic(k) for k in kinds]
    fit = fit_normal(sample)
    observed = compute_all(sample, kinds, fit=fit)
    nulls = null_statistics(sample.scheme, config)
    label = sample.scheme.label or sample.scheme.describe()
    reports = []
    for k in kinds:
        sim = nulls[k.name] if k.name in nulls else _null_for(sample.scheme, k, config)
        lower, upper = critical_bounds(sim, k, config.alpha)
        obs = observed[k.name]
        reports.append(TestReport(
            statistic=k.name,
            observed=obs,
            critical_value=upper,
            critical_lower=lower,
            p_value=monte_carlo_p_value(obs, sim, k.two_sided),
            reject=bool(rejects(obs, lower, upper)),
            alpha=config.alpha,
            reps=config.reps,
            seed=config.seed,
            scheme=label,
            fit=fit.as_dict(),
        ))
    return reports

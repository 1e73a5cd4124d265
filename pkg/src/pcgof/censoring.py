"""Progressive Type-II censoring schemes.

A scheme ``(n, m, r)`` puts ``n`` units on test, observes ``m`` failures and
withdraws ``r[i]`` surviving units at the ``i``-th failure.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exceptions import EmptyScheme, IndivisibleM, ParseError, SchemeInconsistent, SchemeInfeasible

__all__ = [
    "CensoringScheme",
    "validate_scheme",
    "gamma_coefficients",
    "expected_uniform",
    "catalog_table6",
    "scheme_family",
    "parse_removals",
    "format_removals",
]


@dataclass(frozen=True)
class CensoringScheme:
    """Validated progressive Type-II censoring scheme.

    Attributes
    ----------
    n : int
        Units placed on test.
    m : int
        Observed failures.
    r : tuple of int
        Units withdrawn at each of the ``m`` failures.
    label : str
        Free-form identifier, e.g. ``"[15]"`` for catalog entries.
    """

    n: int
    m: int
    r: tuple[int, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(int(v) for v in self.r))
        _check(self.n, self.m, self.r)

    @property
    def removals(self) -> np.ndarray:
        return np.asarray(self.r, dtype=np.int64)

    @property
    def is_complete(self) -> bool:
        return not any(self.r)

    def key(self) -> str:
        """Short stable hash identifying ``(n, m, r)``; labels are ignored."""
        text = f"{self.n}|{self.m}|{format_removals(self.r)}"
        return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()

    def describe(self) -> str:
        nz = [f"r{i + 1}={v}" for i, v in enumerate(self.r) if v]
        body = ", ".join(nz) if nz else "complete"
        return f"n={self.n}, m={self.m}, {body}"

    def __str__(self):
        prefix = f"{self.label} " if self.label else ""
        return prefix + self.describe()


def _check(n, m, r):
    if m == 0 or len(r) == 0:
        raise EmptyScheme("scheme has no observed failures (m = 0)")
    if m < 0 or n < 1:
        raise SchemeInconsistent(f"n and m must be positive, got n={n}, m={m}")
    if len(r) != m:
        raise SchemeInconsistent(f"removal vector has length {len(r)}, expected m={m}")
    if any(v < 0 for v in r):
        raise SchemeInconsistent("removals must be nonnegative")
    total = m + sum(r)
    if total != n:
        raise SchemeInconsistent(f"m + sum(r) = {total} != n = {n}")
    remaining = n
    for i, v in enumerate(r, start=1):
        if remaining < v + 1:
            raise SchemeInfeasible(
                f"failure {i}: only {remaining} units on test, cannot fail one and remove {v}"
            )
        remaining -= v + 1


def validate_scheme(n, m, r, label="") -> CensoringScheme:
    """Build a :class:`CensoringScheme`, raising if any invariant fails."""
    for name, value in (("n", n), ("m", m)):
        if int(value) != value:
            raise SchemeInconsistent(f"{name} must be an integer, got {value!r}")
    return CensoringScheme(int(n), int(m), tuple(r), label)


def gamma_coefficients(scheme: CensoringScheme) -> np.ndarray:
    """Number of units on test just before each failure.

    ``gamma[i] = n - (r[0] + ... + r[i-1]) - i`` (0-based ``i``); these are the
    multipliers of the normalized spacings.
    """
    r = scheme.removals
    before = np.concatenate(([0], np.cumsum(r[:-1] + 1)))
    return scheme.n - before


def _tail_exponents(r: np.ndarray) -> np.ndarray:
    # a[j-1] = j + r[m-j] + ... + r[m-1], j = 1..m
    return np.arange(1, len(r) + 1) + np.cumsum(r[::-1])


@lru_cache(maxsize=512)
def _expected_uniform_cached(r: tuple[int, ...]) -> np.ndarray:
    a = _tail_exponents(np.asarray(r, dtype=np.float64))
    # 1 - mu_i = prod over the last i factors a_j / (a_j + 1), j = m-i+1..m
    ratios = (a / (a + 1.0))[::-1]
    mu = 1.0 - np.cumprod(ratios)
    mu.setflags(write=False)
    return mu


def expected_uniform(scheme: CensoringScheme) -> np.ndarray:
    """Expected values of the uniform progressive order statistics.

    Returns
    -------
    numpy.ndarray
        ``mu[i-1] = E[U_{i:m:n}]``, strictly increasing inside (0, 1). For
        complete data this is ``i / (m + 1)``; for every scheme
        ``mu[0] = 1 / (n + 1)``.
    """
    return _expected_uniform_cached(scheme.r).copy()


def _single(n, m, pos, value):
    r = [0] * m
    for p in pos:
        r[p - 1] = value
    return tuple(r)


def _table6_rows():
    return [
        ("[1]", 20, 8, _single(20, 8, [1], 12)),
        ("[2]", 20, 8, _single(20, 8, [8], 12)),
        ("[3]", 20, 8, _single(20, 8, [1, 8], 6)),
        ("[4]", 20, 12, _single(20, 12, [1], 8)),
        ("[5]", 20, 12, _single(20, 12, [12], 8)),
        ("[6]", 20, 12, _single(20, 12, [3, 5, 7, 9], 2)),
        ("[7]", 20, 16, _single(20, 16, [1], 4)),
        ("[8]", 20, 16, _single(20, 16, [16], 4)),
        ("[9]", 20, 16, _single(20, 16, [5], 4)),
        ("[10]", 40, 10, _single(40, 10, [1], 30)),
        ("[11]", 40, 10, _single(40, 10, [10], 30)),
        ("[12]", 40, 10, _single(40, 10, [1, 5, 10], 10)),
        ("[13]", 40, 20, _single(40, 20, [1], 20)),
        ("[14]", 40, 20, _single(40, 20, [20], 20)),
        ("[15]", 40, 20, (1,) * 20),
        ("[16]", 40, 30, _single(40, 30, [1], 10)),
        ("[17]", 40, 30, _single(40, 30, [30], 10)),
        ("[18]", 40, 30, _single(40, 30, [1, 30], 5)),
        ("[19]", 60, 20, _single(60, 20, [1], 40)),
        ("[20]", 60, 20, _single(60, 20, [20], 40)),
        ("[21]", 60, 20, tuple(10 if i in (1, 20) else 20 if i == 10 else 0 for i in range(1, 21))),
        ("[22]", 60, 40, _single(60, 40, [1], 20)),
        ("[23]", 60, 40, _single(60, 40, [40], 20)),
        ("[24]", 60, 40, (1, 0) * 20),
        ("[25]", 60, 50, _single(60, 50, [1], 10)),
        ("[26]", 60, 50, _single(60, 50, [50], 10)),
        ("[27]", 60, 50, _single(60, 50, [1, 50], 5)),
    ]


def catalog_table6() -> list[tuple[str, CensoringScheme]]:
    """The 27 benchmark schemes, labelled ``"[1]"`` to ``"[27]"``."""
    return [(lab, CensoringScheme(n, m, r, lab)) for lab, n, m, r in _table6_rows()]


def catalog_lookup(label: str) -> CensoringScheme:
    label = label.strip()
    if not label.startswith("["):
        label = f"[{label}]"
    for lab, scheme in catalog_table6():
        if lab == label:
            return scheme
    raise KeyError(f"unknown catalog scheme {label!r}")


def scheme_family(family: int, m: int) -> CensoringScheme:
    """Scheme from one of the five parametric families used in consistency studies.

    1. constant removal ``r_i = 1`` (``n = 2m``)
    2. increasing removal ``r_i = i``
    3. decreasing removal ``r_i = m - i + 1``
    4. conventional Type-II, ``r_m = m / 5`` (``n = 1.2 m``)
    5. complete data
    """
    if m < 1:
        raise EmptyScheme("m must be at least 1")
    idx = range(1, m + 1)
    if family == 1:
        r = [1] * m
    elif family == 2:
        r = list(idx)
    elif family == 3:
        r = [m - i + 1 for i in idx]
    elif family == 4:
        if m % 5:
            raise IndivisibleM(f"family 4 requires m divisible by 5, got m={m}")
        r = [0] * (m - 1) + [m // 5]
    elif family == 5:
        r = [0] * m
    else:
        raise ValueError(f"scheme family must be 1..5, got {family}")
    return CensoringScheme(m + sum(r), m, tuple(r), f"family{family}:m={m}")


def parse_removals(text: str) -> tuple[int, ...]:
    """Parse ``"0,2,1,0"`` into a removal tuple."""
    parts = [p.strip() for p in text.replace(";", ",").split(",")]
    try:
        values = tuple(int(p) for p in parts if p)
    except ValueError as exc:
        raise ParseError(f"bad removal vector {text!r}") from exc
    if not values:
        raise ParseError("empty removal vector")
    return values


def format_removals(r) -> str:
    return ",".join(str(int(v)) for v in r)

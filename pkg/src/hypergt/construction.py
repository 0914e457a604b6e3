"""Selector construction by greedy cover or randomized sampling, and closed-form size bounds.

A selector for ``(q, m, chi)`` is any cover of the auxiliary hypergraph whose
vertices are the weight ``floor(n'/(d+chi))`` rows of length ``n'`` and whose
edges are the families ``B_{A,S}``: rows that restrict to a unit vector
``a_j`` with ``j`` in ``A`` on the S-set ``S``, for ``|A| = d + chi - m + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

import mpmath
import numpy as np

from hypergt.errors import ConstructionError, ParameterError, WorkBudgetExceeded
from hypergt.hypergraph import AugmentedHypergraph, distinct_s_sets, mask_of
from hypergt.selectors import TestMatrix, is_selector

DEFAULT_BUDGET = 2_000_000
DEFAULT_SAMPLE_POOL = 4096
_DPS = 50
TABLE_LIMIT = 10_000_000  # int16 cells kept in memory by the exact greedy


# bounds


@dataclass(frozen=True)
class BoundReport:
    """Right-hand side of a selector-size bound together with its ingredients.

    ``alpha`` is the active value of the two-branch minimum, recorded in
    ``branches``. ``additive`` is the ``d*q`` stage-two term (0 for plain
    selectors).
    """

    kind: str
    t_bound: float
    alpha: float
    branches: tuple[float, float]
    coefficient: float
    binomial: int
    additive: int
    params: dict = field(default_factory=dict)

    @property
    def ceiling(self) -> int:
        return math.ceil(self.t_bound)

    def to_text(self) -> str:
        name = "alpha" if self.kind == "selector" else "beta"
        lines = [f"kind={self.kind}"]
        lines += [f"{k}={v}" for k, v in self.params.items()]
        lines += [
            f"{name}={self.alpha!r}",
            f"{name}_branch_1={self.branches[0]!r}",
            f"{name}_branch_2={self.branches[1]!r}",
            f"coefficient={self.coefficient!r}",
            f"binomial={self.binomial}",
            f"additive={self.additive}",
            f"t_bound={self.t_bound!r}",
            f"t_bound_ceil={self.ceiling}",
        ]
        return "\n".join(lines) + "\n"


def _rhs(n: int, d: int, q: int, m: int, chi: int, e_size: int, divisor: int, binomial: int):
    with mpmath.workdps(_DPS):
        e = mpmath.e
        k = d + chi
        first = e**q * e_size * (mpmath.mpf(e_size - 1) / q) ** q
        second = e ** (k - 1) * (mpmath.mpf(n) / (k - 1)) ** k
        alpha = min(first, second)
        coefficient = 2 * e * k / divisor
        t = coefficient * (1 + mpmath.log(binomial * alpha))
        return float(t), float(alpha), (float(first), float(second)), float(coefficient)


def eval_selector_bound(n: int, d: int, q: int, m: int, chi: int, E_size: int) -> BoundReport:
    """Upper bound on the smallest ``(E, q, m, chi)``-selector for ``E_size`` edges of size ``d``."""
    if not 1 <= q <= E_size - 1:
        raise ParameterError(f"q must lie in [1, {E_size - 1}], got {q}")
    if chi < 1 or d < 1:
        raise ParameterError("d and chi must be positive")
    if not 1 <= m <= d + chi <= n:
        raise ParameterError(f"need 1 <= m <= d + chi <= n, got m={m}, d+chi={d + chi}, n={n}")
    k = d + chi
    binomial = comb(k - 1, k - m)
    t, alpha, branches, coefficient = _rhs(n, d, q, m, chi, E_size, k - m + 1, binomial)
    params = dict(n=n, d=d, q=q, m=m, chi=chi, E=E_size)
    return BoundReport("selector", t, alpha, branches, coefficient, binomial, 0, params)


def eval_two_stage_bound(n: int, d: int, q: int, chi: int, E_size: int) -> BoundReport:
    """Total-test bound of the trivial two-stage protocol, ``d*q`` stage-two term included.

    The stage-one selector is taken with ``m = d + 1`` over ``n + d - 1``
    vertices to account for padding dummies.
    """
    if chi < 1 or q < 1 or d < 1:
        raise ParameterError("d, q and chi must be positive")
    if q > E_size - 1:
        raise ParameterError(f"q must lie in [1, {E_size - 1}], got {q}")
    k = d + chi
    binomial = comb(k - 1, chi - 1)
    t, beta, branches, coefficient = _rhs(n + d - 1, d, q, d + 1, chi, E_size, chi, binomial)
    params = dict(n=n, d=d, q=q, m=d + 1, chi=chi, E=E_size)
    return BoundReport("two-stage", t + d * q, beta, branches, coefficient, binomial, d * q, params)


# cover instance


def selector_width(ah: AugmentedHypergraph, q: int, chi: int) -> int:
    """Columns a selector needs: the real vertices plus every dummy an S-set uses."""
    top = ah.n
    for cols in distinct_s_sets(ah, q, chi):
        top = max(top, cols[-1])
    return top


@dataclass(frozen=True)
class CoverInstance:
    """The auxiliary cover problem whose covers are ``(q, m, chi)``-selectors.

    ``target_sets`` lists the distinct S-sets; each stands for the
    ``C(d+chi, d+chi-m+1)`` families ``B_{A,S}``.
    """

    weight: int
    universe_size: int
    k: int
    m: int
    target_sets: tuple[tuple[int, ...], ...]
    delta_bound: int

    @property
    def a_size(self) -> int:
        return self.k - self.m + 1

    @property
    def x_size(self) -> int:
        return comb(self.universe_size, self.weight)

    @property
    def min_b(self) -> int:
        return self.a_size * comb(self.universe_size - self.k, self.weight - 1)

    @property
    def degree_factor(self) -> int:
        """Families ``B_{A,S}`` holding a row that restricts to one unit vector on ``S``."""
        return comb(self.k - 1, self.a_size - 1)

    def lovasz_bound(self, delta: int) -> int:
        """Greedy guarantee ``ceil(|X| / min|B| * (1 + ln delta))``."""
        with mpmath.workdps(_DPS):
            value = mpmath.mpf(self.x_size) / self.min_b * (1 + mpmath.log(delta))
            return int(mpmath.ceil(value))


def cover_instance(ah: AugmentedHypergraph, q: int, mm: int, chi: int) -> CoverInstance:
    k = ah.d + chi
    if not 1 <= mm <= k:
        raise ParameterError(f"m must lie in [1, {k}], got {mm}")
    targets = tuple(distinct_s_sets(ah, q, chi))
    width = max([ah.n] + [cols[-1] for cols in targets])
    weight = width // k
    if weight < 1:
        raise ParameterError(f"augmented width {width} is below d + chi = {k}")
    per_row = min(len(targets), weight * comb(width - weight, k - 1))
    delta = comb(k - 1, k - mm) * per_row
    return CoverInstance(weight, width, k, mm, targets, delta)


def _unit_table(inst: CoverInstance, supports: np.ndarray) -> np.ndarray:
    """``U[s, x]``: the 0-based unit index row ``x`` shows on S-set ``s``, or -1."""
    n_sets = len(inst.target_sets)
    table = np.full((n_sets, len(supports)), -1, dtype=np.int16)
    position = np.full(inst.universe_size, -1, dtype=np.int16)
    for s, cols in enumerate(inst.target_sets):
        position[:] = -1
        position[np.asarray(cols) - 1] = np.arange(len(cols), dtype=np.int16)
        hits = position[supports]
        inside = hits >= 0
        single = inside.sum(axis=1) == 1
        table[s, single] = hits[single].max(axis=1)
    return table


def exact_delta(inst: CoverInstance) -> int:
    """Maximum degree of the auxiliary hypergraph, by enumerating every row."""
    supports = np.array(list(combinations(range(inst.universe_size), inst.weight)), dtype=np.int16)
    table = _unit_table(inst, supports)
    return int((table >= 0).sum(axis=0).max()) * inst.degree_factor


def _support_mask(support) -> int:
    return mask_of(int(c) + 1 for c in support)


class _GreedyState:
    """Per-S-set record of unit vectors still missing; scores rows by newly hit families."""

    def __init__(self, inst: CoverInstance) -> None:
        self.inst = inst
        n_sets = len(inst.target_sets)
        self.missing = np.ones((n_sets, inst.k), dtype=bool)
        self.realized = np.zeros(n_sets, dtype=np.int64)
        # weights[r]: uncovered families of a set with r units realized that a new unit hits
        s = inst.a_size
        self.weights = np.array(
            [comb(inst.k - r - 1, s - 1) if r < inst.m else 0 for r in range(inst.k + 1)],
            dtype=np.int64,
        )

    @property
    def done(self) -> bool:
        return bool((self.realized >= self.inst.m).all())

    def scores(self, table: np.ndarray) -> np.ndarray:
        rows = np.arange(table.shape[0])[:, None]
        hit = (table >= 0) & self.missing[rows, np.maximum(table, 0)]
        w = self.weights[self.realized]
        return (hit * w[:, None]).sum(axis=0)

    def take(self, column: np.ndarray) -> None:
        sets = np.nonzero(column >= 0)[0]
        units = column[sets]
        fresh = self.missing[sets, units]
        self.missing[sets[fresh], units[fresh]] = False
        self.realized[sets[fresh]] += 1


def build_greedy(ah: AugmentedHypergraph, q: int, mm: int, chi: int, *,
                 budget: int = DEFAULT_BUDGET, sample_pool: int = DEFAULT_SAMPLE_POOL,
                 seed: int = 0, exact_only: bool = False) -> TestMatrix:
    """Greedy cover of the auxiliary hypergraph.

    Each step adds the row hitting the most still-uncovered families, ties
    going to the lexicographically smallest support. When the candidate rows
    number more than ``budget``, each step instead scores ``sample_pool``
    random rows (seeded), or raises :class:`WorkBudgetExceeded` if
    ``exact_only``. The result is verified before it is returned.
    """
    if mm == 0:
        return TestMatrix(0, selector_width(ah, q, chi), ah.n, ())
    inst = cover_instance(ah, q, mm, chi)
    if inst.x_size <= budget:
        rows = _greedy_exact(inst)
    elif exact_only:
        raise WorkBudgetExceeded(f"{inst.x_size} candidate rows exceed the budget of {budget}")
    else:
        rows = _greedy_sampled(inst, sample_pool, seed)
    matrix = TestMatrix(len(rows), inst.universe_size, ah.n, tuple(rows))
    verdict = is_selector(matrix, ah, q, mm, chi)
    if not verdict.holds:
        raise ConstructionError("greedy output failed verification", verdict.witness)
    return matrix


def _greedy_exact(inst: CoverInstance, table_limit: int = TABLE_LIMIT) -> list[int]:
    supports = np.array(list(combinations(range(inst.universe_size), inst.weight)), dtype=np.int16)
    chunk = max(1, table_limit // max(1, len(inst.target_sets)))
    # small instances keep the whole table; large ones rebuild it chunk by chunk each step
    table = _unit_table(inst, supports) if len(supports) <= chunk else None
    state = _GreedyState(inst)
    rows = []
    while not state.done:
        if table is not None:
            scores = state.scores(table)
            best = int(np.argmax(scores))
            top = scores[best]
        else:
            best, top = -1, 0
            for start in range(0, len(supports), chunk):
                scores = state.scores(_unit_table(inst, supports[start:start + chunk]))
                i = int(np.argmax(scores))
                if scores[i] > top:
                    best, top = start + i, scores[i]
        if top == 0:
            raise ConstructionError("no candidate row covers a remaining family")
        column = table[:, best] if table is not None else _unit_table(inst, supports[best:best + 1])[:, 0]
        state.take(column)
        rows.append(_support_mask(supports[best]))
    return rows


def _greedy_sampled(inst: CoverInstance, sample_pool: int, seed: int, max_idle: int = 50) -> list[int]:
    rng = np.random.default_rng(seed)
    state = _GreedyState(inst)
    rows = []
    idle = 0
    while not state.done:
        keys = rng.random((sample_pool, inst.universe_size))
        supports = np.sort(np.argsort(keys, axis=1)[:, : inst.weight], axis=1).astype(np.int16)
        supports = np.unique(supports, axis=0)  # lexicographic order
        table = _unit_table(inst, supports)
        scores = state.scores(table)
        best = int(np.argmax(scores))
        if scores[best] == 0:
            idle += 1
            if idle >= max_idle:
                raise ConstructionError(f"{max_idle} sampled pools in a row covered nothing new")
            continue
        idle = 0
        state.take(table[:, best])
        rows.append(_support_mask(supports[best]))
    return rows


def build_randomized(ah: AugmentedHypergraph, q: int, mm: int, chi: int, seed: int, *,
                     growth: float = 1.25, retry_cap: int = 20) -> TestMatrix:
    """Sample rows uniformly from the weight class until the result verifies.

    Starts at the ceiling of the closed-form bound and grows the row count by
    ``growth`` after each failed attempt. Attempt ``i`` draws from a generator
    seeded with ``(seed, i)``.
    """
    width = selector_width(ah, q, chi)
    if mm == 0:
        return TestMatrix(0, width, ah.n, ())
    inst = cover_instance(ah, q, mm, chi)
    t = eval_selector_bound(width, ah.d, q, mm, chi, ah.size).ceiling
    verdict = None
    for attempt in range(retry_cap):
        rng = np.random.default_rng([seed, attempt])
        keys = rng.random((t, width))
        supports = np.argsort(keys, axis=1)[:, : inst.weight]
        matrix = TestMatrix(t, width, ah.n, tuple(_support_mask(s) for s in supports))
        verdict = is_selector(matrix, ah, q, mm, chi)
        if verdict.holds:
            return matrix
        t = math.ceil(t * growth)
    raise ConstructionError(f"no verified selector after {retry_cap} attempts", verdict.witness)


@dataclass(frozen=True)
class BuilderConfig:
    method: str = "greedy"
    budget: int = DEFAULT_BUDGET
    sample_pool: int = DEFAULT_SAMPLE_POOL
    seed: int = 0
    exact_only: bool = False
    growth: float = 1.25
    retry_cap: int = 20

    def __post_init__(self) -> None:
        if self.method not in ("greedy", "randomized"):
            raise ParameterError(f"unknown builder {self.method!r}")


@lru_cache(maxsize=256)
def build_selector(ah: AugmentedHypergraph, q: int, mm: int, chi: int,
                   config: BuilderConfig = BuilderConfig()) -> TestMatrix:
    """Dispatch to the configured builder. Results are memoized per input."""
    if config.method == "greedy":
        return build_greedy(ah, q, mm, chi, budget=config.budget, sample_pool=config.sample_pool,
                            seed=config.seed, exact_only=config.exact_only)
    return build_randomized(ah, q, mm, chi, config.seed, growth=config.growth,
                            retry_cap=config.retry_cap)

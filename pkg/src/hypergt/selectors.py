"""Test matrices and the checks that decide separability and selector properties."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from hypergt.errors import HypergraphFormatError, ParameterError, WidthError
from hypergt.hypergraph import AugmentedHypergraph, Hypergraph, SSet, iter_s_sets, vertices_of


@dataclass(frozen=True)
class TestMatrix:
    """A ``t x width`` binary matrix; row ``i`` is pool ``i``.

    Rows are stored as int bitsets with column ``j`` (1-based) at bit ``j - 1``.
    Columns past ``real_columns`` are dummy vertices and are never tested.
    """

    __test__ = False  # keep pytest from collecting this class

    t: int
    width: int
    real_columns: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        if self.t < 0 or len(self.rows) != self.t:
            raise ValueError(f"expected {self.t} rows, got {len(self.rows)}")
        if not 1 <= self.real_columns <= self.width:
            raise ValueError(f"need 1 <= real_columns <= width, got {self.real_columns}, {self.width}")
        limit = 1 << self.width
        if any(not 0 <= r < limit for r in self.rows):
            raise ValueError("row has bits outside the matrix width")

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int] | str], real_columns: int | None = None,
                  width: int | None = None) -> TestMatrix:
        """Build from rows given as 0/1 sequences or strings like ``"0110"``."""
        parsed = [[int(c) for c in r] for r in rows]
        if width is None:
            if not parsed:
                raise ValueError("width is required for a matrix with no rows")
            width = len(parsed[0])
        masks = []
        for r in parsed:
            if len(r) != width or any(c not in (0, 1) for c in r):
                raise ValueError(f"row {r} is not a 0/1 row of width {width}")
            masks.append(sum(1 << j for j, c in enumerate(r) if c))
        return cls(len(masks), width, width if real_columns is None else real_columns, tuple(masks))

    @classmethod
    def identity(cls, k: int) -> TestMatrix:
        return cls(k, k, k, tuple(1 << j for j in range(k)))

    @property
    def real_mask(self) -> int:
        return (1 << self.real_columns) - 1

    def column(self, j: int) -> int:
        """Column ``j`` as a bitset over rows (row ``i`` at bit ``i``)."""
        if not 1 <= j <= self.width:
            raise WidthError(f"column {j} outside [1, {self.width}]")
        bit = 1 << (j - 1)
        return sum(1 << i for i, r in enumerate(self.rows) if r & bit)

    def pools(self) -> list[tuple[int, ...]]:
        """Each row as the set of real vertices it tests."""
        return [vertices_of(r & self.real_mask) for r in self.rows]

    def with_rows(self, extra: Iterable[int]) -> TestMatrix:
        extra = tuple(extra)
        return TestMatrix(self.t + len(extra), self.width, self.real_columns, self.rows + extra)

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.t, self.width), dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for v in vertices_of(r):
                out[i, v - 1] = 1
        return out

    def row_string(self, i: int) -> str:
        r = self.rows[i]
        return "".join("1" if r >> j & 1 else "0" for j in range(self.width))


def format_matrix(m: TestMatrix) -> str:
    lines = [f"{m.t} {m.width} {m.real_columns}"]
    lines += [m.row_string(i) for i in range(m.t)]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> TestMatrix:
    """Parse ``t width real_columns`` followed by ``t`` rows of ``0``/``1`` characters."""
    lines = [(no, raw.strip()) for no, raw in enumerate(text.splitlines(), start=1)]
    lines = [(no, s) for no, s in lines if s and not s.startswith("#")]
    if not lines:
        raise HypergraphFormatError("missing 't width real_columns' header")
    no, header = lines[0]
    try:
        t, width, real = (int(tok) for tok in header.split())
    except ValueError:
        raise HypergraphFormatError("header must be 't width real_columns'", no) from None
    if t < 0 or width < 1 or not 1 <= real <= width:
        raise HypergraphFormatError(f"invalid header {header!r}", no)
    body = lines[1:]
    if len(body) != t:
        raise HypergraphFormatError(f"header declares {t} rows, found {len(body)}", no)
    rows = []
    for no, s in body:
        if len(s) != width or set(s) - {"0", "1"}:
            raise HypergraphFormatError(f"row must be {width} characters from {{0,1}}", no)
        rows.append(int(s[::-1], 2))
    return TestMatrix(t, width, real, tuple(rows))


def read_matrix(path: str | Path) -> TestMatrix:
    return parse_matrix(Path(path).read_text())


def write_matrix(m: TestMatrix, path: str | Path) -> None:
    Path(path).write_text(format_matrix(m))


@dataclass(frozen=True)
class Witness:
    """Edge ids of a failing tuple; counts are unset for separability witnesses."""

    edges: tuple[int, ...]
    found: int | None = None
    required: int | None = None


@dataclass(frozen=True)
class SelectorVerdict:
    holds: bool
    witness: Witness | None = None
    identity_rows_found: frozenset[int] = frozenset()

    def __bool__(self) -> bool:
        return self.holds


def count_identity_rows(m: TestMatrix, cols: SSet | Sequence[int]) -> set[int]:
    """Positions ``j`` (1-based in ``cols``) whose unit vector is a row of ``m[:, cols]``."""
    cols = tuple(cols)
    position = {}
    colmask = 0
    for j, c in enumerate(cols, start=1):
        if not 1 <= c <= m.width:
            raise WidthError(f"column {c} outside [1, {m.width}]")
        position[1 << (c - 1)] = j
        colmask |= 1 << (c - 1)
    found: set[int] = set()
    for row in m.rows:
        r = row & colmask
        # popcount 1 test
        if r and not r & (r - 1):
            found.add(position[r])
            if len(found) == len(cols):
                break
    return found


def is_separable(m: TestMatrix, h: Hypergraph) -> SelectorVerdict:
    """Whether the ORs of the real columns of distinct edges always differ.

    The witness is the lexicographically first pair of edges with equal ORs.
    """
    if m.real_columns != h.n:
        raise WidthError(f"matrix has {m.real_columns} real columns, hypergraph has {h.n} vertices")
    columns = [m.column(j) for j in range(1, h.n + 1)]
    first: dict[int, int] = {}
    best = None
    for i, e in enumerate(h.edges):
        sig = 0
        for v in e:
            sig |= columns[v - 1]
        if sig in first:
            pair = (first[sig], i)
            if best is None or pair < best:
                best = pair
        else:
            first[sig] = i
    if best is None:
        return SelectorVerdict(True)
    return SelectorVerdict(False, Witness(best))


def _check_selector_params(m: TestMatrix, ah: AugmentedHypergraph, q: int, mm: int, chi: int) -> None:
    if not 1 <= q <= ah.size - 1:
        raise ParameterError(f"q must lie in [1, {ah.size - 1}], got {q}")
    if chi < 1:
        raise ParameterError(f"chi must be positive, got {chi}")
    if not 0 <= mm <= ah.d + chi:
        raise ParameterError(f"m must lie in [0, d + chi] = [0, {ah.d + chi}], got {mm}")
    if m.real_columns != ah.n:
        raise WidthError(f"matrix has {m.real_columns} real columns, hypergraph has {ah.n} vertices")


def is_selector(m: TestMatrix, ah: AugmentedHypergraph, q: int, mm: int, chi: int) -> SelectorVerdict:
    """Whether every S-set submatrix holds at least ``mm`` distinct unit rows.

    Tuples are enumerated with ``others`` as increasing combinations since the
    order of the other edges does not change the S-set. On failure the
    witness is the first failing ``(e, *others)`` in lexicographic order. On
    success ``identity_rows_found`` is the unit set of a weakest S-set.
    """
    _check_selector_params(m, ah, q, mm, chi)
    if mm == 0:
        return SelectorVerdict(True)
    cache: dict[tuple[int, ...], set[int]] = {}
    weakest: set[int] | None = None
    for e, others, s in iter_s_sets(ah, q, chi):
        found = cache.get(s.tuple)
        if found is None:
            found = cache[s.tuple] = count_identity_rows(m, s)
        if len(found) < mm:
            return SelectorVerdict(False, Witness((e, *others), len(found), mm), frozenset(found))
        if weakest is None or len(found) < len(weakest):
            weakest = found
    return SelectorVerdict(True, None, frozenset(weakest or ()))


def is_p_selector(m: TestMatrix, ah: AugmentedHypergraph, p: int, mm: int) -> SelectorVerdict:
    """The pairwise case: ``is_selector`` with ``q = 1`` and ``chi = p``."""
    return is_selector(m, ah, 1, mm, p)

"""Hypergraphs of candidate defective sets, their structural parameters, and S-sets.

Vertices are the integers ``1..n``. Edge ids are 0-based positions in
``Hypergraph.edges``. Sets of vertices are also kept as Python ints used as
bitsets, with vertex ``v`` stored at bit ``v - 1``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from hypergt.errors import CapacityError, HypergraphFormatError, ParameterError

log = logging.getLogger(__name__)


def mask_of(vertices: Iterable[int]) -> int:
    """Bitset of a vertex collection (vertex ``v`` at bit ``v - 1``)."""
    m = 0
    for v in vertices:
        m |= 1 << (v - 1)
    return m


def vertices_of(mask: int) -> tuple[int, ...]:
    """Sorted vertex ids in a bitset."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return tuple(out)


def _lowest(mask: int, k: int) -> int:
    """The ``k`` lowest set bits of ``mask``."""
    out = 0
    for _ in range(k):
        low = mask & -mask
        out |= low
        mask ^= low
    return out


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    message: str
    severity: str = "error"
    edge: int | None = None
    vertex: int | None = None

    def __str__(self) -> str:
        return f"{self.severity}: {self.message}"


@dataclass(frozen=True)
class Hypergraph:
    """A vertex count ``n`` and an ordered list of hyperedges over ``[n]``.

    Edges are stored sorted. Construction does not enforce the invariants so
    that :func:`validate` can report every violation; use :meth:`checked` or
    :func:`parse_hypergraph` to obtain a hypergraph known to be valid.
    """

    n: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(tuple(sorted(e)) for e in self.edges))

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(mask_of(e) for e in self.edges)

    @cached_property
    def d(self) -> int:
        """Maximum hyperedge size (0 for an empty edge list)."""
        return max((len(e) for e in self.edges), default=0)

    @property
    def size(self) -> int:
        return len(self.edges)

    @property
    def min_edge_size(self) -> int:
        return min((len(e) for e in self.edges), default=0)

    @cached_property
    def is_uniform(self) -> bool:
        return len({len(e) for e in self.edges}) <= 1

    def index(self, vertices: Iterable[int]) -> int | None:
        """Edge id of the given vertex set, or ``None`` when it is not an edge."""
        target = mask_of(vertices)
        for i, m in enumerate(self.masks):
            if m == target:
                return i
        return None

    def checked(self) -> Hypergraph:
        """Return ``self`` after raising on any error-level diagnostic."""
        errors = [diag for diag in validate(self) if diag.severity == "error"]
        if errors:
            raise HypergraphFormatError("; ".join(diag.message for diag in errors))
        return self


def validate(h: Hypergraph) -> list[Diagnostic]:
    """All invariant violations of ``h``; an empty list means ``h`` is valid.

    Uncovered vertices are reported with severity ``"warning"``: they do not
    change the set of candidates and :func:`compact` can remove them.
    """
    diags: list[Diagnostic] = []
    if h.n < 1:
        diags.append(Diagnostic("bad-n", f"vertex count must be positive, got {h.n}"))
    seen: dict[frozenset, int] = {}
    for i, e in enumerate(h.edges):
        if not e:
            diags.append(Diagnostic("empty-edge", f"edge {i} is empty", edge=i))
            continue
        bad = [v for v in e if not 1 <= v <= h.n]
        for v in bad:
            diags.append(
                Diagnostic("out-of-range", f"edge {i} has vertex {v} outside [1, {h.n}]", edge=i, vertex=v)
            )
        if len(set(e)) != len(e):
            diags.append(Diagnostic("repeated-vertex", f"edge {i} repeats a vertex", edge=i))
        key = frozenset(e)
        if key in seen:
            diags.append(
                Diagnostic("duplicate-edge", f"edge {i} duplicates edge {seen[key]}", edge=i)
            )
        else:
            seen[key] = i
    covered = set().union(*h.edges) if h.edges else set()
    for v in range(1, h.n + 1):
        if v not in covered:
            diags.append(
                Diagnostic("uncovered-vertex", f"vertex {v} is in no edge", severity="warning", vertex=v)
            )
    return diags


def compact(h: Hypergraph) -> tuple[Hypergraph, tuple[int, ...]]:
    """Drop uncovered vertices and renumber the rest in order.

    Returns the compacted hypergraph and ``old_ids`` with ``old_ids[k - 1]``
    the original id of new vertex ``k``.
    """
    old_ids = tuple(sorted(set().union(*h.edges))) if h.edges else ()
    new_id = {v: k for k, v in enumerate(old_ids, start=1)}
    edges = tuple(tuple(new_id[v] for v in e) for e in h.edges)
    return Hypergraph(max(len(old_ids), 1), edges), old_ids


def compute_p(h: Hypergraph) -> int:
    """Minimum of ``|e' - e|`` over ordered pairs of distinct edges.

    Nested edges give 0; callers needing ``p >= 1`` must check.
    """
    if h.size < 2:
        raise ParameterError("p is undefined for fewer than 2 edges")
    best = None
    masks = h.masks
    for i, a in enumerate(masks):
        for j, b in enumerate(masks):
            if i != j:
                diff = (b & ~a).bit_count()
                if best is None or diff < best:
                    best = diff
                    if best == 0:
                        return 0
    return best


def compute_chi(h: Hypergraph, q: int) -> int:
    """Minimum of ``|e'_1 | ... | e'_q  -  e|`` over an edge ``e`` and ``q`` other edges."""
    if not 1 <= q <= h.size - 1:
        raise ParameterError(f"q must lie in [1, {h.size - 1}], got {q}")
    masks = h.masks
    best = None
    for i, a in enumerate(masks):
        rest = masks[:i] + masks[i + 1:]
        for group in combinations(rest, q):
            union = 0
            for b in group:
                union |= b
            diff = (union & ~a).bit_count()
            if best is None or diff < best:
                best = diff
                if best == 0:
                    return 0
    return best


@dataclass(frozen=True)
class AugmentedHypergraph:
    """``base`` with every edge padded to size ``d`` from a shared dummy pool.

    Dummy vertices are ``n + 1 .. n + dummy_count``. The same pool tops up
    S-sets whose union difference is smaller than the requested ``chi``.
    """

    base: Hypergraph
    d: int
    chi_pool: int
    dummy_count: int
    edges_tilde: tuple[tuple[int, ...], ...]
    masks_tilde: tuple[int, ...] = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def width(self) -> int:
        return self.base.n + self.dummy_count

    @property
    def size(self) -> int:
        return self.base.size

    @property
    def real_mask(self) -> int:
        return (1 << self.base.n) - 1

    def is_dummy(self, v: int) -> bool:
        return v > self.base.n


def augment(h: Hypergraph, chi_pool: int = 0) -> AugmentedHypergraph:
    """Uniformize ``h`` to size ``d`` with a pool of ``max(chi_pool, d - 1)`` dummies."""
    if chi_pool < 0:
        raise ParameterError(f"chi_pool must be non-negative, got {chi_pool}")
    d = h.d
    n = h.n
    tilde = tuple(e + tuple(range(n + 1, n + 1 + d - len(e))) for e in h.edges)
    return AugmentedHypergraph(
        base=h,
        d=d,
        chi_pool=chi_pool,
        dummy_count=max(chi_pool, d - 1),
        edges_tilde=tilde,
        masks_tilde=tuple(mask_of(e) for e in tilde),
    )


@dataclass(frozen=True)
class SSet:
    """Sorted ``d + chi`` columns: an augmented edge plus ``chi`` columns from the others.

    ``contains_dummy`` is true when the union difference had fewer than ``chi``
    elements and dummy columns were added to make up the count.
    """

    tuple: tuple[int, ...]
    chi: int
    contains_dummy: bool

    def __len__(self) -> int:
        return len(self.tuple)

    def __iter__(self) -> Iterator[int]:
        return iter(self.tuple)


def s_set(ah: AugmentedHypergraph, e_index: int, others: Sequence[int], chi: int) -> SSet:
    """Columns of ``S_{e,(e'_1..e'_q),chi}`` over the augmented vertex set.

    The augmented edge is kept whole; the ``chi`` smallest elements of the
    union of the other augmented edges minus it are added. When that union is
    too small, the smallest pool ids not already present fill the gap.
    """
    m = ah.size
    if chi < 1:
        raise ParameterError(f"chi must be positive, got {chi}")
    if not 0 <= e_index < m or any(not 0 <= o < m for o in others):
        raise ParameterError("edge id out of range")
    if e_index in others or len(set(others)) != len(others) or not others:
        raise ParameterError("others must be distinct edge ids different from e_index")
    if chi > ah.dummy_count:
        raise CapacityError(f"chi={chi} exceeds the dummy pool of {ah.dummy_count}")

    base = ah.masks_tilde[e_index]
    union = 0
    for o in others:
        union |= ah.masks_tilde[o]
    union &= ~base
    have = union.bit_count()
    if have >= chi:
        return SSet(vertices_of(base | _lowest(union, chi)), chi, False)

    pool = ((1 << ah.width) - 1) & ~ah.real_mask
    free = pool & ~(base | union)
    need = chi - have
    if free.bit_count() < need:
        raise CapacityError(
            f"S-set for edge {e_index} needs {need} free dummy vertices, pool has {free.bit_count()}"
        )
    return SSet(vertices_of(base | union | _lowest(free, need)), chi, True)


def iter_s_sets(ah: AugmentedHypergraph, q: int, chi: int) -> Iterator[tuple[int, tuple[int, ...], SSet]]:
    """Every ``(e, others, S-set)`` with ``others`` an increasing ``q``-combination.

    Order is lexicographic in ``(e, others)``.
    """
    if not 1 <= q <= ah.size - 1:
        raise ParameterError(f"q must lie in [1, {ah.size - 1}], got {q}")
    ids = range(ah.size)
    for e in ids:
        rest = [o for o in ids if o != e]
        for others in combinations(rest, q):
            yield e, others, s_set(ah, e, others, chi)


def distinct_s_sets(ah: AugmentedHypergraph, q: int, chi: int) -> dict[tuple[int, ...], tuple[int, tuple[int, ...]]]:
    """Distinct S-set column tuples mapped to the first ``(e, others)`` producing each."""
    out: dict[tuple[int, ...], tuple[int, tuple[int, ...]]] = {}
    for e, others, s in iter_s_sets(ah, q, chi):
        out.setdefault(s.tuple, (e, others))
    return out


def pool_for(h: Hypergraph, chi: int) -> int:
    """A dummy pool size that can top up any S-set of ``h`` at this ``chi``.

    A padded edge already holds up to ``d - min|e|`` dummies, so the top-up
    may need that many beyond ``chi``.
    """
    return chi + h.d - h.min_edge_size


# text format


def parse_hypergraph(text: str) -> Hypergraph:
    """Parse the ``n m`` header plus one edge per line format.

    ``#`` starts a comment; blank lines are skipped. Error-level invariant
    violations raise :class:`HypergraphFormatError` naming the line.
    """
    rows: list[tuple[int, list[int]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values = [int(tok) for tok in line.split()]
        except ValueError:
            raise HypergraphFormatError(f"non-integer token in {line!r}", lineno) from None
        rows.append((lineno, values))
    if not rows:
        raise HypergraphFormatError("missing 'n m' header")
    header_line, header = rows[0]
    if len(header) != 2:
        raise HypergraphFormatError("header must be 'n m'", header_line)
    n, m = header
    if n < 1 or m < 0:
        raise HypergraphFormatError(f"invalid header n={n} m={m}", header_line)
    body = rows[1:]
    if len(body) != m:
        where = body[m][0] if len(body) > m else (body[-1][0] if body else header_line)
        raise HypergraphFormatError(f"header declares {m} edges, found {len(body)}", where)
    h = Hypergraph(n, tuple(tuple(vals) for _, vals in body))
    for diag in validate(h):
        if diag.severity == "warning":
            log.warning("%s", diag.message)
            continue
        lineno = body[diag.edge][0] if diag.edge is not None else header_line
        raise HypergraphFormatError(diag.message, lineno)
    return h


def format_hypergraph(h: Hypergraph) -> str:
    lines = [f"{h.n} {h.size}"]
    lines += [" ".join(map(str, e)) for e in h.edges]
    return "\n".join(lines) + "\n"


def read_hypergraph(path: str | Path) -> Hypergraph:
    return parse_hypergraph(Path(path).read_text())


def write_hypergraph(h: Hypergraph, path: str | Path) -> None:
    Path(path).write_text(format_hypergraph(h))

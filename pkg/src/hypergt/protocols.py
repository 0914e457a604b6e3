"""Group-testing protocols that find one defective hyperedge, with full transcripts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from hypergt.construction import BuilderConfig, build_selector
from hypergt.errors import ParameterError, WidthError
from hypergt.hypergraph import (
    Hypergraph,
    augment,
    compact,
    compute_chi,
    compute_p,
    mask_of,
    pool_for,
    vertices_of,
)
from hypergt.selectors import TestMatrix

NON_ADAPTIVE = "non-adaptive"
TWO_STAGE = "two-stage"
THREE_STAGE = "three-stage"
PARAMETER_NAME = {NON_ADAPTIVE: "p", TWO_STAGE: "q", THREE_STAGE: "b"}


class TestOracle:
    """Answers pool queries for a hidden defective edge and counts them.

    In strict mode the defective set must be an edge of ``h``. Permissive mode
    accepts any vertex set; no protocol guarantee applies then.
    """

    __test__ = False

    def __init__(self, defective: Iterable[int], h: Hypergraph | None = None, *, strict: bool = True) -> None:
        self.defective = frozenset(defective)
        self.mask = mask_of(self.defective)
        self.strict = strict
        self.call_count = 0
        if strict:
            if h is None:
                raise ParameterError("strict oracle needs the hypergraph to check membership")
            if h.index(self.defective) is None:
                raise ParameterError(f"defective {sorted(self.defective)} is not an edge")

    def test(self, pool: Iterable[int]) -> int:
        self.call_count += 1
        return int(bool(mask_of(pool) & self.mask))


def respond(o: TestOracle, m: TestMatrix) -> list[int]:
    """Response vector: one oracle call per row, dummy columns dropped."""
    return [o.test(pool) for pool in m.pools()]


def decode_discard(m: TestMatrix, h: Hypergraph, resp: Sequence[int]) -> list[int]:
    """Edge ids with no vertex in a negative pool."""
    if len(resp) != m.t:
        raise WidthError(f"response has length {len(resp)}, matrix has {m.t} rows")
    if m.real_columns != h.n:
        raise WidthError(f"matrix has {m.real_columns} real columns, hypergraph has {h.n} vertices")
    negative = 0
    for row, bit in zip(m.rows, resp):
        if not bit:
            negative |= row
    negative &= m.real_mask
    return [i for i, e in enumerate(h.masks) if not e & negative]


@dataclass
class Stage:
    name: str
    pools: list[tuple[int, ...]] = field(default_factory=list)
    responses: list[int] = field(default_factory=list)
    survivors: list[int] = field(default_factory=list)
    selector: TestMatrix | None = field(default=None, repr=False, compare=False)

    @property
    def tests(self) -> int:
        return len(self.pools)


@dataclass
class ProtocolTranscript:
    protocol: str
    parameter: int
    defective: tuple[int, ...]
    stages: list[Stage] = field(default_factory=list)
    answer: tuple[int, ...] = ()
    flags: list[str] = field(default_factory=list)

    @property
    def total_tests(self) -> int:
        return sum(s.tests for s in self.stages)

    @property
    def identified(self) -> int | None:
        return self.answer[0] if len(self.answer) == 1 else None

    def to_text(self) -> str:
        lines = [
            f"protocol={self.protocol}",
            f"parameter={PARAMETER_NAME.get(self.protocol, 'k')}={self.parameter}",
            "defective=" + " ".join(map(str, self.defective)),
            "flags=" + ",".join(self.flags),
        ]
        for i, s in enumerate(self.stages, start=1):
            lines.append(f"[stage {i} {s.name}]")
            for pool, bit in zip(s.pools, s.responses):
                lines.append("pool " + " ".join(map(str, pool)) + f" -> {bit}")
            lines.append("survivors=" + ",".join(map(str, s.survivors)))
        lines.append(f"total_tests={self.total_tests}")
        lines.append("answer=" + ",".join(map(str, self.answer)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> ProtocolTranscript:
        def ints(s: str, sep: str | None) -> tuple[int, ...]:
            return tuple(int(x) for x in s.split(sep) if x)

        header: dict[str, str] = {}
        stages: list[Stage] = []
        for line in text.splitlines():
            if line.startswith("[stage "):
                stages.append(Stage(line[1:-1].split(" ", 2)[2]))
            elif line.startswith("pool"):
                pool, bit = line[4:].split("->")
                stages[-1].pools.append(ints(pool, None))
                stages[-1].responses.append(int(bit))
            elif line.startswith("survivors="):
                stages[-1].survivors = list(ints(line[10:], ","))
            elif "=" in line:
                key, value = line.split("=", 1)
                header[key] = value
        out = cls(
            protocol=header["protocol"],
            parameter=int(header["parameter"].split("=")[1]),
            defective=ints(header["defective"], None),
            stages=stages,
            answer=ints(header["answer"], ","),
            flags=[f for f in header["flags"].split(",") if f],
        )
        if out.total_tests != int(header["total_tests"]):
            raise ValueError("total_tests does not match the listed pools")
        return out


def _selector_stage(h: Hypergraph, o: TestOracle, selector: TestMatrix, name: str,
                    vertex_ids: Sequence[int] | None = None) -> Stage:
    """Query the selector's pools and keep the consistent edges.

    Rows made only of dummy columns give empty pools; they are known to be
    negative and are not sent to the oracle. ``vertex_ids`` maps the vertices
    of ``h`` to the ids the oracle knows.
    """
    pools, responses, full = [], [], []
    for pool in selector.pools():
        if not pool:
            full.append(0)
            continue
        if vertex_ids is not None:
            pool = tuple(vertex_ids[v - 1] for v in pool)
        bit = o.test(pool)
        pools.append(pool)
        responses.append(bit)
        full.append(bit)
    return Stage(name, pools, responses, decode_discard(selector, h, full), selector)


def _discard_stage(h: Hypergraph, o: TestOracle, p: int, config: BuilderConfig, name: str,
                   vertex_ids: Sequence[int] | None = None) -> Stage:
    """Test the rows of an ``(E~, p, d+1)``-selector and keep the consistent edges."""
    ah = augment(h, pool_for(h, p))
    selector = build_selector(ah, 1, h.d + 1, p, config)
    return _selector_stage(h, o, selector, name, vertex_ids)


def _individual_stage(o: TestOracle, vertices: Iterable[int], name: str) -> Stage:
    pools = [(v,) for v in sorted(set(vertices))]
    return Stage(name, pools, [o.test(pool) for pool in pools])


def _largest(h: Hypergraph, ids: Sequence[int]) -> tuple[int, ...]:
    if not ids:
        return ()
    return (max(ids, key=lambda i: (len(h.edges[i]), -i)),)


def _check_oracle(h: Hypergraph, o: TestOracle, t: ProtocolTranscript) -> None:
    if not o.strict:
        t.flags.append("permissive")
    if not o.defective <= set(range(1, h.n + 1)):
        raise ParameterError("defective set has vertices outside [n]")


def run_non_adaptive(h: Hypergraph, o: TestOracle, p: int, config: BuilderConfig = BuilderConfig()) -> ProtocolTranscript:
    """Single round of pools from an ``(E~, p, d+1)``-selector, decoded by discarding.

    Every edge ``e'`` with ``|e' - e*| >= p`` is discarded. When ``p`` is at
    most the minimum pairwise difference, only the defective edge remains;
    otherwise the transcript is flagged ``partial`` and answers all survivors.
    """
    if p < 1:
        raise ParameterError(f"p must be positive, got {p}")
    t = ProtocolTranscript(NON_ADAPTIVE, p, tuple(sorted(o.defective)))
    _check_oracle(h, o, t)
    if h.size == 1:
        t.answer = (0,)
        return t
    if p > compute_p(h):
        t.flags.append("partial")
    stage = _discard_stage(h, o, p, config, "discard")
    t.stages.append(stage)
    t.answer = tuple(stage.survivors)
    return t


def run_two_stage(h: Hypergraph, o: TestOracle, q: int, config: BuilderConfig = BuilderConfig()) -> ProtocolTranscript:
    """Selector round with ``chi`` from ``q``, then singleton tests of the survivors' vertices.

    The answer is the largest survivor whose vertices all tested positive.
    """
    chi = compute_chi(h, q)
    if chi < 1:
        raise ParameterError(f"chi is 0 for q={q}; the two-stage protocol needs chi >= 1")
    t = ProtocolTranscript(TWO_STAGE, q, tuple(sorted(o.defective)))
    _check_oracle(h, o, t)
    ah = augment(h, chi)
    selector = build_selector(ah, q, h.d + 1, chi, config)
    t.stages.append(_selector_stage(h, o, selector, "discard"))
    survivors = t.stages[0].survivors

    stage2 = _individual_stage(o, (v for i in survivors for v in h.edges[i]), "individual")
    positive = mask_of(pool[0] for pool, bit in zip(stage2.pools, stage2.responses) if bit)
    stage2.survivors = [i for i in survivors if h.masks[i] & ~positive == 0]
    t.stages.append(stage2)
    t.answer = _largest(h, stage2.survivors)
    return t


def run_three_stage(h: Hypergraph, o: TestOracle, b: int, config: BuilderConfig = BuilderConfig()) -> ProtocolTranscript:
    """Discard with threshold ``b``, split a largest survivor by singleton tests, then discard with ``p = 1``.

    Stage 2 keeps the survivors meeting the split edge exactly in its positive
    vertices and strips those vertices; what is left has at most ``b - 1``
    vertices per edge. Stage 3 runs on the stripped edges and answers the
    largest consistent one. A stage whose input has one candidate is skipped.
    """
    if not 1 <= b < h.d:
        raise ParameterError(f"b must lie in [1, d - 1] = [1, {h.d - 1}], got {b}")
    t = ProtocolTranscript(THREE_STAGE, b, tuple(sorted(o.defective)))
    _check_oracle(h, o, t)
    if h.size == 1:
        t.answer = (0,)
        return t

    stage1 = _discard_stage(h, o, b, config, "discard")
    t.stages.append(stage1)
    survivors = stage1.survivors
    if len(survivors) <= 1:
        t.answer = tuple(survivors)
        return t

    stripped = 0
    if max(len(h.edges[i]) for i in survivors) >= b:
        split = _largest(h, survivors)[0]
        stage2 = _individual_stage(o, h.edges[split], "individual")
        split_mask = h.masks[split]
        stripped = mask_of(pool[0] for pool, bit in zip(stage2.pools, stage2.responses) if bit)
        survivors = [i for i in survivors if h.masks[i] & split_mask == stripped]
        stage2.survivors = survivors
        t.stages.append(stage2)
        if len(survivors) <= 1:
            t.answer = tuple(survivors)
            return t

    residual = {i: h.masks[i] & ~stripped for i in survivors}
    nonempty = [i for i in survivors if residual[i]]
    empty = [i for i in survivors if not residual[i]]
    if len(nonempty) == 1:
        # the stripped vertices alone are also a candidate: a single pool decides
        pool = vertices_of(residual[nonempty[0]])
        bit = o.test(pool)
        keep = nonempty if bit else empty
        t.stages.append(Stage("residual", [pool], [bit], keep))
        t.answer = tuple(keep)
        return t
    if not nonempty:
        t.answer = tuple(empty)
        return t

    rest = Hypergraph(h.n, tuple(vertices_of(residual[i]) for i in nonempty))
    small, old_ids = compact(rest)
    stage3 = _discard_stage(small, o, 1, config, "residual", vertex_ids=old_ids)
    kept = [nonempty[j] for j in stage3.survivors] + empty
    stage3.survivors = sorted(kept)
    t.stages.append(stage3)
    if len(stage3.survivors) > 1:
        t.flags.append("nested")
    t.answer = max(((i,) for i in stage3.survivors), key=lambda a: (residual[a[0]].bit_count(), -a[0]), default=())
    return t


def default_three_stage_b(d: int) -> int:
    """``ceil(sqrt(d))`` clamped into the admissible range ``[1, d - 1]``."""
    if d < 2:
        raise ParameterError("the three-stage protocol needs d >= 2")
    return min(math.isqrt(d - 1) + 1, d - 1)


def run_protocol(protocol: str, h: Hypergraph, o: TestOracle, parameter: int,
                 config: BuilderConfig = BuilderConfig()) -> ProtocolTranscript:
    runners = {NON_ADAPTIVE: run_non_adaptive, TWO_STAGE: run_two_stage, THREE_STAGE: run_three_stage}
    if protocol not in runners:
        raise ParameterError(f"unknown protocol {protocol!r}")
    return runners[protocol](h, o, parameter, config)


def guarantee_violations(h: Hypergraph, t: ProtocolTranscript) -> list[str]:
    """Broken promises in a transcript for a defective edge of ``h``.

    Checks that no pool names a vertex outside ``[n]``, that the defective
    edge survives every stage, and the protocol-specific promise: exact
    answer (or the ``|e' - e*| < p`` survivor property when flagged
    partial), at most ``q + 1`` stage-one survivors for two stages.
    """
    if "permissive" in t.flags:
        return []
    star = h.index(t.defective)
    star_mask = h.masks[star]
    out = []
    for s in t.stages:
        if any(not 1 <= v <= h.n for pool in s.pools for v in pool):
            out.append(f"stage {s.name} tests a vertex outside [1, {h.n}]")
    if t.stages and star not in t.stages[0].survivors:
        out.append("defective edge discarded in stage 1")
    if t.protocol == NON_ADAPTIVE and "partial" in t.flags:
        for i in t.answer:
            if (h.masks[i] & ~star_mask).bit_count() >= t.parameter:
                out.append(f"survivor {i} differs from the defective edge in >= p vertices")
        if star not in t.answer:
            out.append("defective edge missing from the partial answer")
        return out
    if t.protocol == TWO_STAGE and len(t.stages[0].survivors) > t.parameter + 1:
        out.append(f"{len(t.stages[0].survivors)} stage-1 survivors exceed q + 1")
    if t.answer != (star,):
        out.append(f"answer {t.answer} is not the defective edge {star}")
    return out

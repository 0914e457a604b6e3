"""Seeded random hypergraphs with a guaranteed minimum pairwise difference."""

from __future__ import annotations

import random

from hypergt.errors import ParameterError
from hypergt.hypergraph import Hypergraph, compute_p, mask_of


def random_hypergraph(n: int, d: int, edges: int, *, uniform: bool = True, min_diff: int = 1,
                      seed: int = 0, max_attempts: int = 200, tries_per_edge: int = 200) -> Hypergraph:
    """Draw ``edges`` distinct edges on ``[n]`` with ``compute_p >= min_diff``.

    Uniform ``d``-edges are accepted one at a time when they differ from every
    accepted edge in at least ``min_diff`` vertices. For non-uniform output
    each accepted edge is then truncated with probability 1/2 and the whole
    draw is rejected unless the target still holds. Raises
    :class:`ParameterError` when no instance is found within the caps.
    """
    if not 1 <= d <= n or edges < 1 or min_diff < 0:
        raise ParameterError(f"invalid generator parameters n={n} d={d} edges={edges} min_diff={min_diff}")
    rng = random.Random(seed)
    vertices = range(1, n + 1)
    for _ in range(max_attempts):
        accepted: list[int] = []
        picked: list[tuple[int, ...]] = []
        for _ in range(edges):
            for _ in range(tries_per_edge):
                e = tuple(sorted(rng.sample(vertices, d)))
                m = mask_of(e)
                if all((m & ~a).bit_count() >= max(min_diff, 1) and (a & ~m).bit_count() >= max(min_diff, 1)
                       for a in accepted):
                    accepted.append(m)
                    picked.append(e)
                    break
            else:
                break
        if len(picked) < edges:
            continue
        if not uniform and d > 1:
            picked = [tuple(sorted(rng.sample(e, rng.randint(1, d - 1)))) if rng.random() < 0.5 else e
                      for e in picked]
            if len({frozenset(e) for e in picked}) < edges:
                continue
        h = Hypergraph(n, tuple(picked))
        if edges < 2 or compute_p(h) >= min_diff:
            return h
    raise ParameterError(
        f"no hypergraph with n={n} d={d} edges={edges} min_diff={min_diff} after {max_attempts} attempts"
    )

"""Brute-force reference solvers and feasibility checkers.

Deliberately dumb: subset enumeration plus two independent feasibility
strategies that are cross-validated against each other.  Everything here
is the ground truth the fast solvers are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Set, Tuple

from .graph import (
    INF,
    ComponentClass,
    Multigraph,
    Problem,
    Weight,
    bipartition,
    classify_component,
    is_square_cycle_free,
    nontrivial_components,
)

DEFAULT_CAP = 16


class OracleCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    value: Weight
    witness: Optional[Tuple[int, ...]]


def simple_cycles(g: Multigraph) -> Iterator[Tuple[int, ...]]:
    """All simple cycles as vertex tuples (2-cycles from parallel edges).

    Cycles on >= 3 vertices are enumerated with their minimum vertex first;
    both orientations may appear, which is harmless for feasibility checks.
    Intended for small graphs only.
    """
    pair_count: Dict[Tuple[int, int], int] = {}
    for e in g.edges:
        pair_count[e] = pair_count.get(e, 0) + 1
    for (u, v), cnt in sorted(pair_count.items()):
        if cnt >= 2:
            yield (u, v)
    nbrs: Dict[int, Set[int]] = {v: set() for v in g.vertices}
    for u, v in g.edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    for start in sorted(g.vertices):
        # paths start,v1,...  using only vertices > start
        stack: List[Tuple[int, List[int]]] = [(start, [start])]
        while stack:
            v, path = stack.pop()
            for w in nbrs[v]:
                if w == start and len(path) >= 3:
                    yield tuple(path)
                elif w > start and w not in path:
                    stack.append((w, path + [w]))


def _cycle_is_forbidden(cycle: Tuple[int, ...], s_set, problem: Problem) -> bool:
    length = len(cycle)
    has_s = any(v in s_set for v in cycle)
    if problem is Problem.SFVS:
        return has_s
    if problem is Problem.ECT:
        return length % 2 == 0
    if problem is Problem.SOCT:
        return has_s and length % 2 == 1
    if problem is Problem.SECT:
        return has_s and length % 2 == 0
    if problem is Problem.OCT:
        return length % 2 == 1
    raise ValueError(f"no cycle condition for {problem}")


def _terminals_separated(g: Multigraph) -> bool:
    adj = g.adj()
    for t in g.terminals:
        seen = {t}
        queue = [t]
        while queue:
            v = queue.pop()
            for w, _ in adj[v]:
                if w not in seen:
                    if w in g.terminals:
                        return False
                    seen.add(w)
                    queue.append(w)
    return True


def check_feasible(
    g: Multigraph, problem: Problem, cross_validate: bool = False
) -> bool:
    """Is ``g`` already free of the cycles (or paths) ``problem`` hits?

    Strategy A classifies the nontrivial 2-connected components; strategy B
    enumerates all simple cycles and tests the defining condition directly.
    With ``cross_validate`` both run and must agree (small graphs only).
    """
    if problem is Problem.NMWC:
        return _terminals_separated(g)
    by_blocks = is_square_cycle_free(g, problem)
    if cross_validate:
        by_cycles = not any(
            _cycle_is_forbidden(c, g.s_set, problem) for c in simple_cycles(g)
        )
        if by_blocks != by_cycles:
            raise AssertionError(
                f"feasibility strategies disagree on {problem}: "
                f"blocks={by_blocks} cycles={by_cycles} graph={g!r} "
                f"edges={g.edges} S={sorted(g.s_set)}"
            )
    return by_blocks


def brute_force(
    g: Multigraph, problem: Problem, cap: int = DEFAULT_CAP
) -> OracleResult:
    """Exact minimum-weight deletion set by subset enumeration.

    Subsets are tried in increasing (weight, lexicographic) order, so the
    witness is the lexicographically least among optimal solutions.  For
    NMWC, terminals are never deleted.
    """
    if len(g.vertices) > cap:
        raise OracleCapExceeded(
            f"{len(g.vertices)} vertices exceed the oracle cap of {cap}"
        )
    deletable = sorted(
        g.vertices - g.terminals if problem is Problem.NMWC else g.vertices
    )
    candidates: List[Tuple[Weight, Tuple[int, ...]]] = []
    for r in range(len(deletable) + 1):
        for combo in combinations(deletable, r):
            candidates.append((g.total_weight(combo), combo))
    candidates.sort(key=lambda t: (t[0], t[1]))
    for weight, combo in candidates:
        if check_feasible(g.minus(combo), problem):
            return OracleResult(weight, combo)
    return OracleResult(INF, None)


def subdivide(g: Multigraph) -> Multigraph:
    """Subdivide every edge once; new midpoints get weight 1 and stay off S."""
    next_id = max(g.vertices, default=-1) + 1
    vertices = set(g.vertices)
    edges = []
    for u, v in g.edges:
        mid = next_id
        next_id += 1
        vertices.add(mid)
        edges.append((u, mid))
        edges.append((mid, v))
    return Multigraph(vertices, edges, g.s_set, dict(g.weights), g.terminals)

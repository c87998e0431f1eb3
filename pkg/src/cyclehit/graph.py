"""Multigraph representation and 2-connectivity analysis.

Vertices are non-negative integers.  Parallel edges are supported and a
pair of parallel edges counts as a cycle of length 2; loops are rejected.
Edge labels over F2 are kept positionally (one label per edge slot), so
parallel edges can carry distinct labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

INF = math.inf

Weight = float  # non-negative int, or math.inf
Edge = Tuple[int, int]


class Problem(str, Enum):
    SFVS = "sfvs"
    ECT = "ect"
    SOCT = "soct"
    SECT = "sect"
    OCT = "oct"
    NMWC = "nmwc"

    @property
    def uses_s(self) -> bool:
        return self in (Problem.SFVS, Problem.SOCT, Problem.SECT)


#: Problems solvable by the tree-decomposition dynamic program.
TW_PROBLEMS = (Problem.SFVS, Problem.ECT, Problem.SOCT, Problem.SECT)


class ComponentClass(Enum):
    """Shape of a nontrivial 2-connected component in a feasible graph."""

    NO_S_NONBIPARTITE = "no-s-nonbipartite"
    NO_S_BIPARTITE = "no-s-bipartite"
    S_BIPARTITE = "s-bipartite"
    ODD_CYCLE = "odd-cycle"
    ODD_S_CYCLE_OF_BIPARTITE = "odd-s-cycle-of-bipartite-subcomponents"
    VIOLATING = "violating"


class Multigraph:
    """Immutable multigraph with a marked vertex set S, weights and terminals.

    ``edges`` keeps one slot per edge instance (parallel edges repeat).
    Weights default to 1; they must be >= 1 or infinite.
    """

    __slots__ = ("vertices", "edges", "s_set", "weights", "terminals", "_adj")

    def __init__(
        self,
        vertices: Iterable[int],
        edges: Iterable[Edge] = (),
        s_set: Iterable[int] = (),
        weights: Optional[Dict[int, Weight]] = None,
        terminals: Iterable[int] = (),
    ) -> None:
        self.vertices = frozenset(vertices)
        norm = []
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop edge at vertex {u}")
            if u not in self.vertices or v not in self.vertices:
                raise ValueError(f"edge ({u},{v}) uses unknown vertex")
            norm.append((u, v) if u < v else (v, u))
        self.edges: Tuple[Edge, ...] = tuple(norm)
        self.s_set = frozenset(s_set)
        self.terminals = frozenset(terminals)
        if not self.s_set <= self.vertices:
            raise ValueError("S contains unknown vertices")
        if not self.terminals <= self.vertices:
            raise ValueError("terminal set contains unknown vertices")
        w = dict(weights) if weights else {}
        for v, wv in w.items():
            if v not in self.vertices:
                raise ValueError(f"weight given for unknown vertex {v}")
            if wv != INF and (wv < 1 or int(wv) != wv):
                raise ValueError(f"weight of vertex {v} must be >= 1 or inf")
        self.weights: Dict[int, Weight] = w
        self._adj: Optional[Dict[int, List[Tuple[int, int]]]] = None

    def weight(self, v: int) -> Weight:
        return self.weights.get(v, 1)

    def total_weight(self, vs: Iterable[int]) -> Weight:
        return sum(self.weight(v) for v in vs)

    def adj(self) -> Dict[int, List[Tuple[int, int]]]:
        """Adjacency lists of ``(neighbour, edge_id)`` pairs."""
        if self._adj is None:
            a: Dict[int, List[Tuple[int, int]]] = {v: [] for v in self.vertices}
            for eid, (u, v) in enumerate(self.edges):
                a[u].append((v, eid))
                a[v].append((u, eid))
            self._adj = a
        return self._adj

    def degree(self, v: int) -> int:
        return len(self.adj()[v])

    def minus(self, removed: Iterable[int]) -> "Multigraph":
        """Graph with the given vertices (and incident edges) deleted."""
        rm = set(removed)
        keep = self.vertices - rm
        return Multigraph(
            keep,
            [e for e in self.edges if e[0] in keep and e[1] in keep],
            self.s_set & keep,
            {v: w for v, w in self.weights.items() if v in keep},
            self.terminals & keep,
        )

    def induced(self, keep: Iterable[int]) -> "Multigraph":
        return self.minus(self.vertices - set(keep))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Multigraph):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and sorted(self.edges) == sorted(other.edges)
            and self.s_set == other.s_set
            and self.terminals == other.terminals
            and {v: self.weight(v) for v in self.vertices}
            == {v: other.weight(v) for v in other.vertices}
        )

    def __repr__(self) -> str:
        return (
            f"Multigraph(|V|={len(self.vertices)}, |E|={len(self.edges)}, "
            f"|S|={len(self.s_set)})"
        )


@dataclass(frozen=True)
class Block:
    """One biconnected component, as vertex set plus edge-slot ids."""

    vertices: frozenset
    edge_ids: Tuple[int, ...]
    nontrivial: bool  # contains a cycle (>= 2 edge slots)


@dataclass(frozen=True)
class BlockDecomposition:
    blocks: Tuple[Block, ...]
    cutvertices: frozenset


def biconnected_components(g: Multigraph) -> BlockDecomposition:
    """Partition the edge slots of ``g`` into biconnected components.

    Iterative Hopcroft-Tarjan over edge ids, so parallel edges land in a
    common (nontrivial) component.  Isolated vertices appear in no block.
    """
    adj = g.adj()
    disc: Dict[int, int] = {}
    low: Dict[int, int] = {}
    cuts = set()
    blocks: List[Block] = []
    counter = 0
    for root in sorted(g.vertices):
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        root_children = 0
        edge_stack: List[int] = []
        # stack frames: (vertex, incoming edge id, iterator position)
        stack = [(root, -1, 0)]
        while stack:
            v, in_eid, idx = stack[-1]
            if idx < len(adj[v]):
                stack[-1] = (v, in_eid, idx + 1)
                w, eid = adj[v][idx]
                if eid == in_eid:
                    continue
                if w not in disc:
                    disc[w] = low[w] = counter
                    counter += 1
                    edge_stack.append(eid)
                    stack.append((w, eid, 0))
                elif disc[w] < disc[v]:
                    edge_stack.append(eid)
                    if disc[w] < low[v]:
                        low[v] = disc[w]
            else:
                stack.pop()
                if not stack:
                    continue
                p = stack[-1][0]
                if low[v] < low[p]:
                    low[p] = low[v]
                if low[v] >= disc[p]:
                    # p separates the subtree at v: pop one block
                    if p == root:
                        root_children += 1
                    else:
                        cuts.add(p)
                    eids = []
                    while edge_stack:
                        eid = edge_stack.pop()
                        eids.append(eid)
                        if eid == in_eid:
                            break
                    vs = set()
                    for eid in eids:
                        vs.update(g.edges[eid])
                    blocks.append(
                        Block(frozenset(vs), tuple(sorted(eids)), len(eids) >= 2)
                    )
        if root_children >= 2:
            cuts.add(root)
    return BlockDecomposition(tuple(blocks), frozenset(cuts))


def compute_potentials(
    g: Multigraph, labels: Sequence[int]
) -> Optional[Dict[int, int]]:
    """F2 potentials from a rooted spanning forest, or None.

    Returns ``x`` with ``x[u] + x[v] = labels[e]`` for every edge slot
    ``e = (u, v)`` iff every closed walk has label sum 0.  Each component
    is normalized so that its minimum vertex gets potential 0.
    """
    if len(labels) != len(g.edges):
        raise ValueError("one label per edge slot required")
    adj = g.adj()
    pot: Dict[int, int] = {}
    for root in sorted(g.vertices):
        if root in pot:
            continue
        pot[root] = 0
        queue = [root]
        while queue:
            v = queue.pop()
            for w, eid in adj[v]:
                if w not in pot:
                    pot[w] = pot[v] ^ labels[eid]
                    queue.append(w)
    for eid, (u, v) in enumerate(g.edges):
        if pot[u] ^ pot[v] != labels[eid]:
            return None
    return pot


def bipartition(g: Multigraph) -> Optional[Dict[int, int]]:
    """Two-coloring of ``g`` (0/1 per vertex), or None if not bipartite."""
    return compute_potentials(g, [1] * len(g.edges))


def _is_single_cycle(g: Multigraph) -> bool:
    if len(g.edges) != len(g.vertices) or not g.vertices:
        return False
    return all(g.degree(v) == 2 for v in g.vertices)
    # connectivity follows from 2-connectedness of the input


def _connected_components(vertices: Iterable[int], adj) -> List[List[int]]:
    seen = set()
    comps = []
    for start in vertices:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = [start]
        while queue:
            v = queue.pop()
            for w, _ in adj[v]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def _classify_sect_s_form(g: Multigraph) -> ComponentClass:
    """Check the cycle-of-bipartite-subcomponents form with one odd S-cycle."""
    for v in g.s_set:
        if g.degree(v) != 2:
            return ComponentClass.VIOLATING
    rest = g.minus(g.s_set)
    comps = _connected_components(rest.vertices, rest.adj())
    comp_of: Dict[int, int] = {}
    for ci, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = ci
    sides = bipartition(rest)
    if sides is None:
        return ComponentClass.VIOLATING

    # Quotient of g: one node per subcomponent, one per S-vertex; every
    # S-incident edge survives.  The form requires this to be one cycle.
    boundary: Dict[int, List[int]] = {ci: [] for ci in range(len(comps))}
    qdeg: Dict[object, int] = {("s", v): 0 for v in g.s_set}
    qdeg.update({("c", ci): 0 for ci in range(len(comps))})
    qedges = []
    for u, v in g.edges:
        if u not in g.s_set and v not in g.s_set:
            continue
        nu = ("s", u) if u in g.s_set else ("c", comp_of[u])
        nv = ("s", v) if v in g.s_set else ("c", comp_of[v])
        qdeg[nu] += 1
        qdeg[nv] += 1
        qedges.append((nu, nv))
        if nu[0] == "c":
            boundary[nu[1]].append(u)
        if nv[0] == "c":
            boundary[nv[1]].append(v)
    if any(d != 2 for d in qdeg.values()):
        return ComponentClass.VIOLATING
    if len(qedges) != len(qdeg):
        return ComponentClass.VIOLATING
    qadj: Dict[object, List[object]] = {n: [] for n in qdeg}
    for nu, nv in qedges:
        qadj[nu].append(nv)
        qadj[nv].append(nu)
    seen = set()
    queue = [next(iter(qdeg))]
    seen.add(queue[0])
    while queue:
        n = queue.pop()
        for m in qadj[n]:
            if m not in seen:
                seen.add(m)
                queue.append(m)
    if len(seen) != len(qdeg):
        return ComponentClass.VIOLATING

    # All S-cycles traverse the full quotient cycle; their parity is the
    # number of S-incident edges plus the side changes inside components.
    parity = len(qedges) % 2
    for ci in range(len(comps)):
        a, b = boundary[ci]
        parity ^= sides[a] ^ sides[b]
    if parity == 1:
        return ComponentClass.ODD_S_CYCLE_OF_BIPARTITE
    return ComponentClass.VIOLATING


def classify_component(g: Multigraph, problem: Problem) -> ComponentClass:
    """Classify one nontrivial 2-connected multigraph for ``problem``.

    The caller guarantees 2-connectedness; the answer says whether the
    component can occur in a graph free of the problem's forbidden cycles,
    and if so in which shape.
    """
    has_s = bool(g.s_set)
    if problem is Problem.SFVS:
        if has_s:
            return ComponentClass.VIOLATING
        return (
            ComponentClass.NO_S_BIPARTITE
            if bipartition(g) is not None
            else ComponentClass.NO_S_NONBIPARTITE
        )
    if problem is Problem.ECT:
        if _is_single_cycle(g) and len(g.edges) % 2 == 1:
            return ComponentClass.ODD_CYCLE
        return ComponentClass.VIOLATING
    if problem is Problem.SOCT:
        if not has_s:
            return (
                ComponentClass.NO_S_BIPARTITE
                if bipartition(g) is not None
                else ComponentClass.NO_S_NONBIPARTITE
            )
        if bipartition(g) is not None:
            return ComponentClass.S_BIPARTITE
        return ComponentClass.VIOLATING
    if problem is Problem.SECT:
        if not has_s:
            return (
                ComponentClass.NO_S_BIPARTITE
                if bipartition(g) is not None
                else ComponentClass.NO_S_NONBIPARTITE
            )
        return _classify_sect_s_form(g)
    raise ValueError(f"no component classification for {problem}")


def nontrivial_components(g: Multigraph) -> List[Multigraph]:
    """The nontrivial blocks of ``g`` as standalone multigraphs."""
    out = []
    for block in biconnected_components(g).blocks:
        if block.nontrivial:
            out.append(
                Multigraph(
                    block.vertices,
                    [g.edges[eid] for eid in block.edge_ids],
                    g.s_set & block.vertices,
                    {v: g.weight(v) for v in block.vertices},
                )
            )
    return out


def is_square_cycle_free(g: Multigraph, problem: Problem) -> bool:
    """True iff ``g`` has none of the cycles ``problem`` must hit."""
    if problem is Problem.OCT:
        return bipartition(g) is not None
    return all(
        classify_component(c, problem) is not ComponentClass.VIOLATING
        for c in nontrivial_components(g)
    )

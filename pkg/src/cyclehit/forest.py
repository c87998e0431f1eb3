"""Reduced labeled forests: the connectivity state of the treewidth DPs.

A feasible graph is summarized, relative to a set of *active* vertices,
by a forest in which every nontrivial 2-connected component has been
replaced by a labeled hub, simplified by two reduction rules, and given
an F2 edge labeling that reproduces path parities of the original graph.
Joining two such forests (`merge_forests`) decides whether the union of
the underlying graphs stays feasible and, if so, produces the reduced
forest of the union.
"""

from __future__ import annotations

import struct
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .graph import (
    ComponentClass,
    Multigraph,
    Problem,
    biconnected_components,
    bipartition,
    classify_component,
)

SYM_NONE = 0
SYM_ODD_CYCLE = 1
SYM_BIPARTITE = 2
SYM_NOT_BIPARTITE = 3
SYM_INTERNAL_BIPARTITE = 4

#: Symbol count per problem, counting S-membership, from the size bound.
SYMBOL_BUDGET = {
    Problem.SFVS: 1,
    Problem.ECT: 2,
    Problem.SOCT: 3,
    Problem.SECT: 5,
}


class ViolatingComponentError(ValueError):
    """The graph contains a 2-connected component the problem forbids."""


class WorkGraph:
    """Mutable scratch multigraph with per-node state and F2 edge labels.

    Node attributes: ``active`` flag, ``orig`` vertex id (-1 when the node
    does not stand for an original vertex), S-mark, hub symbol.
    """

    __slots__ = ("active", "orig", "smark", "symbol", "inc", "edges", "_next_edge")

    def __init__(self) -> None:
        self.active: Dict[int, bool] = {}
        self.orig: Dict[int, int] = {}
        self.smark: Dict[int, bool] = {}
        self.symbol: Dict[int, int] = {}
        self.inc: Dict[int, Set[int]] = {}
        self.edges: Dict[int, Tuple[int, int, int]] = {}  # eid -> (u, v, lab)
        self._next_edge = 0

    def add_node(
        self, node: int, active: bool, orig: int, smark: bool, symbol: int
    ) -> int:
        self.active[node] = active
        self.orig[node] = orig
        self.smark[node] = smark
        self.symbol[node] = symbol
        self.inc[node] = set()
        return node

    def add_edge(self, u: int, v: int, lab: int) -> int:
        eid = self._next_edge
        self._next_edge += 1
        self.edges[eid] = (u, v, lab)
        self.inc[u].add(eid)
        self.inc[v].add(eid)
        return eid

    def remove_edge(self, eid: int) -> None:
        u, v, _ = self.edges.pop(eid)
        self.inc[u].discard(eid)
        self.inc[v].discard(eid)

    def remove_node(self, node: int) -> None:
        for eid in list(self.inc[node]):
            self.remove_edge(eid)
        del self.inc[node]
        del self.active[node]
        del self.orig[node]
        del self.smark[node]
        del self.symbol[node]

    def degree(self, node: int) -> int:
        return len(self.inc[node])

    def neighbors(self, node: int) -> List[Tuple[int, int, int]]:
        """(neighbour, eid, label) over incident edges."""
        out = []
        for eid in self.inc[node]:
            u, v, lab = self.edges[eid]
            out.append((v if u == node else u, eid, lab))
        return out


class Forest:
    """Immutable, canonically ordered reduced forest.

    Nodes are indexed 0..N-1 in canonical order (roots first per tree,
    children sorted by subtree encoding); ``parent[i] == i`` marks roots.
    Equality and hashing go through the packed byte encoding, which is
    invariant under re-rooting and sibling permutation.
    """

    __slots__ = ("parent", "elab", "active", "orig", "smark", "symbol", "_enc")

    def __init__(self, parent, elab, active, orig, smark, symbol) -> None:
        self.parent: Tuple[int, ...] = parent
        self.elab: Tuple[int, ...] = elab
        self.active: Tuple[bool, ...] = active
        self.orig: Tuple[int, ...] = orig
        self.smark: Tuple[bool, ...] = smark
        self.symbol: Tuple[int, ...] = symbol
        self._enc: Optional[bytes] = None

    def __len__(self) -> int:
        return len(self.parent)

    def encode(self) -> bytes:
        if self._enc is None:
            pack = struct.Struct("<iiB").pack
            parts = []
            for i in range(len(self.parent)):
                flags = (
                    (1 if self.active[i] else 0)
                    | (2 if self.smark[i] else 0)
                    | (self.symbol[i] << 2)
                    | (self.elab[i] << 5)
                )
                parts.append(pack(self.parent[i], self.orig[i], flags))
            self._enc = b"".join(parts)
        return self._enc

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Forest):
            return NotImplemented
        return self.encode() == other.encode()

    def __hash__(self) -> int:
        return hash(self.encode())

    def active_origs(self) -> FrozenSet[int]:
        return frozenset(
            self.orig[i] for i in range(len(self.parent)) if self.active[i]
        )

    def to_workgraph(self) -> WorkGraph:
        wg = WorkGraph()
        for i in range(len(self.parent)):
            wg.add_node(i, self.active[i], self.orig[i], self.smark[i], self.symbol[i])
        for i, p in enumerate(self.parent):
            if p != i:
                wg.add_edge(i, p, self.elab[i])
        return wg

    def __repr__(self) -> str:
        return f"Forest(n={len(self.parent)}, active={sorted(self.active_origs())})"


EMPTY_FOREST = Forest((), (), (), (), (), ())


def _canonicalize(wg: WorkGraph, problem: Problem) -> Forest:
    """Root each tree at its minimum active vertex, normalize bipartite-hub
    edge labels, sort siblings by subtree encoding, and freeze."""
    nodes = list(wg.active)
    if not nodes:
        return EMPTY_FOREST
    zero_labels = problem is Problem.SFVS

    seen: Set[int] = set()
    trees: List[Tuple[int, int]] = []  # (root orig id, root node)
    comp_nodes: Dict[int, List[int]] = {}
    for start in nodes:
        if start in seen:
            continue
        comp = [start]
        seen.add(start)
        queue = [start]
        while queue:
            v = queue.pop()
            for w, _, _ in wg.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        actives = [n for n in comp if wg.active[n]]
        assert actives, "reduced forest component without active vertex"
        root = min(actives, key=lambda n: wg.orig[n])
        trees.append((wg.orig[root], root))
        comp_nodes[root] = comp
    trees.sort()
    assert len(wg.edges) == len(nodes) - len(trees), "work graph is not a forest"

    parent_of: Dict[int, int] = {}
    plab: Dict[int, int] = {}
    order_all: List[int] = []
    for _, root in trees:
        # orient away from the root
        parent_of[root] = root
        plab[root] = 0
        bfs = [root]
        head = 0
        while head < len(bfs):
            v = bfs[head]
            head += 1
            for w, _, lab in wg.neighbors(v):
                if w not in parent_of:
                    parent_of[w] = v
                    plab[w] = 0 if zero_labels else lab
                    bfs.append(w)
        order_all.extend(bfs)

    # bottom-up AHU encodings with sorted children
    children_of: Dict[int, List[int]] = {v: [] for v in order_all}
    for v in order_all:
        if parent_of[v] != v:
            children_of[parent_of[v]].append(v)
    enc: Dict[int, bytes] = {}
    for v in reversed(order_all):
        payload = struct.pack(
            "<iB",
            wg.orig[v] if wg.active[v] else -1,
            (1 if wg.active[v] else 0)
            | (2 if wg.smark[v] else 0)
            | (wg.symbol[v] << 2)
            | (plab[v] << 5),
        )
        enc[v] = payload + b"".join(sorted(enc[c] for c in children_of[v]))

    index: Dict[int, int] = {}
    parent: List[int] = []
    elab: List[int] = []
    active: List[bool] = []
    orig: List[int] = []
    smark: List[bool] = []
    symbol: List[int] = []
    stack = [root for _, root in trees][::-1]
    while stack:
        v = stack.pop()
        i = len(parent)
        index[v] = i
        parent.append(index[parent_of[v]] if parent_of[v] != v else i)
        elab.append(plab[v] if parent_of[v] != v else 0)
        active.append(wg.active[v])
        orig.append(wg.orig[v] if wg.active[v] else -1)
        smark.append(wg.smark[v])
        symbol.append(wg.symbol[v])
        for c in sorted(children_of[v], key=lambda c: enc[c], reverse=True):
            stack.append(c)
    return Forest(
        tuple(parent),
        tuple(elab),
        tuple(active),
        tuple(orig),
        tuple(smark),
        tuple(symbol),
    )


def _check_size_bound(f: Forest, problem: Problem) -> None:
    x = sum(f.active)
    k = SYMBOL_BUDGET[problem]
    bound = (k + 1) * (2 * x - 2) + 1 if x else 0
    if len(f) > max(bound, x):
        raise AssertionError(
            f"reduced forest has {len(f)} nodes, bound {bound} for |X|={x} ({problem})"
        )


def _zero_dead_edges(wg: WorkGraph) -> None:
    """Zero the label of every edge at an odd-cycle / not-bipartite node.

    Any path or cycle through such an edge passes a parity-breaking
    symbol, so these labels are never consumed; pinning them to 0 makes
    the labeling canonical regardless of construction history.
    """
    for eid, (u, v, lab) in list(wg.edges.items()):
        if lab and (
            wg.symbol[u] in (SYM_ODD_CYCLE, SYM_NOT_BIPARTITE)
            or wg.symbol[v] in (SYM_ODD_CYCLE, SYM_NOT_BIPARTITE)
        ):
            wg.edges[eid] = (u, v, 0)


def reduce_forest(wg: WorkGraph, problem: Problem) -> Forest:
    """Apply the two reduction rules exhaustively and canonicalize.

    Rule 1 deletes inactive vertices of degree at most one.  Rule 2
    contracts maximal paths of inactive degree-2 internal vertices down to
    the first occurrence of each hub symbol plus a single S-carrier
    (keeping first and last occurrence of "internal bipartite" when two or
    more appear without an "odd cycle" in between), preserving positions
    and summing F2 labels across spliced-out runs.
    """
    _zero_dead_edges(wg)
    queue = [n for n in list(wg.active) if not wg.active[n] and wg.degree(n) <= 1]
    while queue:
        n = queue.pop()
        if n not in wg.active or wg.active[n] or wg.degree(n) > 1:
            continue
        nbrs = [w for w, _, _ in wg.neighbors(n)]
        wg.remove_node(n)
        for w in nbrs:
            if not wg.active[w] and wg.degree(w) <= 1:
                queue.append(w)

    def is_internal(n: int) -> bool:
        return not wg.active[n] and wg.degree(n) == 2

    visited: Set[int] = set()
    for start in list(wg.active):
        if start in visited or start not in wg.active or not is_internal(start):
            continue
        # walk left to the chain's end
        chain = [start]
        visited.add(start)
        for direction in (0, 1):
            prev = start
            nxts = [w for w, _, _ in wg.neighbors(start)]
            cur = nxts[direction]
            while is_internal(cur):
                if cur in visited:
                    break
                visited.add(cur)
                if direction == 0:
                    chain.insert(0, cur)
                else:
                    chain.append(cur)
                step = [w for w, _, _ in wg.neighbors(cur) if w != prev]
                if not step:
                    break
                prev, cur = cur, step[0]
            if direction == 0:
                left_end = cur
            else:
                right_end = cur
        assert left_end != right_end or len(chain) >= 1
        # gather edge labels along left_end, chain..., right_end
        path = [left_end] + chain + [right_end]
        labs = []
        for a, b in zip(path, path[1:]):
            for w, eid, lab in wg.neighbors(a):
                if w == b:
                    labs.append((eid, lab))
                    break
        keep: Set[int] = set()
        seen_sym: Set[int] = set()
        ib_idx = [i for i, n in enumerate(chain) if wg.symbol[n] == SYM_INTERNAL_BIPARTITE]
        has_oc = any(wg.symbol[n] == SYM_ODD_CYCLE for n in chain)
        for i, n in enumerate(chain):
            sym = wg.symbol[n]
            if sym != SYM_NONE and sym not in seen_sym:
                seen_sym.add(sym)
                keep.add(i)
        if problem is Problem.SECT and len(ib_idx) >= 2 and not has_oc:
            keep.add(ib_idx[-1])
        if any(wg.smark[chain[i]] for i in range(len(chain))) and not any(
            wg.smark[chain[i]] for i in keep
        ):
            keep.add(next(i for i, n in enumerate(chain) if wg.smark[n]))
        # splice: connect consecutive retained positions, summing labels
        retained = [0] + [i + 1 for i in sorted(keep)] + [len(path) - 1]
        for eid, _ in labs:
            wg.remove_edge(eid)
        for a, b in zip(retained, retained[1:]):
            lab = 0
            for i in range(a, b):
                lab ^= labs[i][1]
            wg.add_edge(path[a], path[b], lab)
        for i, n in enumerate(chain):
            if i not in keep:
                wg.remove_node(n)

    _zero_dead_edges(wg)
    forest = _canonicalize(wg, problem)
    _check_size_bound(forest, problem)
    return forest


def build_underlying_forest(
    g: Multigraph,
    problem: Problem,
    active: Optional[Iterable[int]] = None,
) -> WorkGraph:
    """Replace every nontrivial 2-connected component by its labeled hub.

    Vertices listed in ``active`` (default: all) are marked active.  Edge
    labels follow the validity rule: bridges get 1, edges at bipartite-ish
    hubs get the bipartition side, all other hub edges get 0.  Raises
    ``ViolatingComponentError`` when some component is infeasible.
    """
    act = g.vertices if active is None else frozenset(active)
    use_s = problem.uses_s
    wg = WorkGraph()
    for v in g.vertices:
        wg.add_node(v, v in act, v, use_s and v in g.s_set, SYM_NONE)
    hub_id = max(g.vertices, default=-1) + 1

    decomp = biconnected_components(g)
    for block in decomp.blocks:
        if not block.nontrivial:
            (eid,) = block.edge_ids
            u, v = g.edges[eid]
            wg.add_edge(u, v, 1)
            continue
        comp = Multigraph(
            block.vertices,
            [g.edges[eid] for eid in block.edge_ids],
            g.s_set & block.vertices if use_s else (),
        )
        cls = classify_component(comp, problem)
        if cls is ComponentClass.VIOLATING:
            raise ViolatingComponentError(
                f"component on {sorted(block.vertices)} violates {problem.value}"
            )
        if problem is Problem.SFVS:
            hub = wg.add_node(hub_id, False, -1, False, SYM_NONE)
            hub_id += 1
            for v in sorted(block.vertices):
                wg.add_edge(hub, v, 0)
        elif problem is Problem.ECT:
            hub = wg.add_node(hub_id, False, -1, False, SYM_ODD_CYCLE)
            hub_id += 1
            for v in sorted(block.vertices):
                wg.add_edge(hub, v, 0)
        elif cls in (
            ComponentClass.NO_S_BIPARTITE,
            ComponentClass.NO_S_NONBIPARTITE,
            ComponentClass.S_BIPARTITE,
        ):
            bipart = cls is not ComponentClass.NO_S_NONBIPARTITE
            sym = SYM_BIPARTITE if bipart else SYM_NOT_BIPARTITE
            has_s = bool(comp.s_set) and problem is Problem.SOCT
            hub = wg.add_node(hub_id, False, -1, has_s, sym)
            hub_id += 1
            sides = bipartition(comp) if bipart else None
            if sides is not None:
                flip = _anchor_flip(sides, block.vertices, act)
                for v in sorted(block.vertices):
                    wg.add_edge(hub, v, sides[v] ^ flip)
            else:
                for v in sorted(block.vertices):
                    wg.add_edge(hub, v, 0)
        else:  # SECT, odd S-cycle of bipartite subcomponents
            assert cls is ComponentClass.ODD_S_CYCLE_OF_BIPARTITE
            rest = comp.minus(comp.s_set)
            sides = bipartition(rest)
            seen: Set[int] = set()
            ib_hubs = []
            for v in sorted(rest.vertices):
                if v in seen:
                    continue
                sub = [v]
                seen.add(v)
                queue = [v]
                radj = rest.adj()
                while queue:
                    a = queue.pop()
                    for b, _ in radj[a]:
                        if b not in seen:
                            seen.add(b)
                            sub.append(b)
                            queue.append(b)
                hub = wg.add_node(hub_id, False, -1, False, SYM_INTERNAL_BIPARTITE)
                hub_id += 1
                ib_hubs.append(hub)
                flip = _anchor_flip(sides, sub, act)
                for a in sorted(sub):
                    wg.add_edge(hub, a, sides[a] ^ flip)
            oc = wg.add_node(hub_id, False, -1, True, SYM_ODD_CYCLE)
            hub_id += 1
            for v in sorted(comp.s_set):
                wg.add_edge(oc, v, 0)
            for hub in ib_hubs:
                wg.add_edge(oc, hub, 0)
    return wg


def _anchor_flip(sides: Dict[int, int], members: Iterable[int], act) -> int:
    """Gauge choice for a bipartition: the smallest active member gets 0.

    Both forest constructions (from scratch and via a join) see the same
    active vertices inside a component, so anchoring on them makes the
    two labelings coincide byte for byte.
    """
    anchored = [v for v in members if v in act]
    if not anchored:
        return 0
    return sides[min(anchored)]


def forest_of_graph(
    g: Multigraph, active: Iterable[int], problem: Problem
) -> Optional[Forest]:
    """Reduced forest of ``g`` w.r.t. ``active``, or None when infeasible."""
    try:
        wg = build_underlying_forest(g, problem, active)
    except ViolatingComponentError:
        return None
    return reduce_forest(wg, problem)


def star_forest(
    g: Multigraph, v: int, active: FrozenSet[int], problem: Problem
) -> Optional[Forest]:
    """Reduced forest of the star of ``v``'s bag edges plus isolated actives.

    The star carries every edge slot between ``v`` and ``active``, so a
    parallel pair shows up as a 2-cycle and is classified like any other
    component.  Returns None when that local graph is already infeasible.
    """
    edges = []
    for u, w in g.edges:
        if u == v and w in active:
            edges.append((u, w))
        elif w == v and u in active:
            edges.append((u, w))
    star = Multigraph(active, edges, g.s_set & active if problem.uses_s else ())
    return forest_of_graph(star, active, problem)


def deactivate(f: Forest, orig_v: int, problem: Problem) -> Forest:
    """Mark the active vertex ``orig_v`` inactive and re-reduce."""
    wg = f.to_workgraph()
    for n in list(wg.active):
        if wg.active[n] and wg.orig[n] == orig_v:
            wg.active[n] = False
            wg.orig[n] = -1
            break
    else:
        raise ValueError(f"vertex {orig_v} is not active in this forest")
    return reduce_forest(wg, problem)


# ---------------------------------------------------------------------------
# merge


def _wg_blocks(wg: WorkGraph):
    """Biconnected components of a WorkGraph (same scheme as for graphs)."""
    disc: Dict[int, int] = {}
    low: Dict[int, int] = {}
    cuts: Set[int] = set()
    blocks: List[Tuple[List[int], List[int], bool]] = []
    counter = 0
    adj: Dict[int, List[Tuple[int, int]]] = {
        n: [(w, eid) for w, eid, _ in wg.neighbors(n)] for n in wg.active
    }
    for root in wg.active:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        root_children = 0
        edge_stack: List[int] = []
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
                    vs: Set[int] = set()
                    for eid in eids:
                        u2, v2, _ = wg.edges[eid]
                        vs.add(u2)
                        vs.add(v2)
                    blocks.append((sorted(vs), eids, len(eids) >= 2))
        if root_children >= 2:
            cuts.add(root)
    return blocks, cuts


def _wg_potentials(
    wg: WorkGraph, members: Iterable[int], eids: Iterable[int]
) -> Optional[Dict[int, int]]:
    """F2 potentials over the edge subset, or None on an odd-sum cycle."""
    eids = list(eids)
    adj: Dict[int, List[Tuple[int, int]]] = {m: [] for m in members}
    for eid in eids:
        u, v, lab = wg.edges[eid]
        adj[u].append((v, lab))
        adj[v].append((u, lab))
    pot: Dict[int, int] = {}
    for root in adj:
        if root in pot:
            continue
        pot[root] = 0
        queue = [root]
        while queue:
            v = queue.pop()
            for w, lab in adj[v]:
                if w not in pot:
                    pot[w] = pot[v] ^ lab
                    queue.append(w)
    for eid in eids:
        u, v, lab = wg.edges[eid]
        if pot[u] ^ pot[v] != lab:
            return None
    return pot


def _anchor_pot(
    wg: WorkGraph, pot: Dict[int, int], members: Iterable[int]
) -> Dict[int, int]:
    """Flip a potential so the smallest active member gets 0 (see
    ``_anchor_flip``); no active member means no flip."""
    anchored = [m for m in members if wg.active[m]]
    if not anchored or pot[min(anchored, key=lambda m: wg.orig[m])] == 0:
        return pot
    return {m: p ^ 1 for m, p in pot.items()}


def _replace_blob_with_hub(
    wg: WorkGraph,
    members: List[int],
    eids: List[int],
    hub_symbol: int,
    hub_smark: bool,
    pot: Optional[Dict[int, int]],
    next_id: int,
) -> int:
    """Common edit: drop internal edges, star unlabeled members on a new hub,
    identify labeled members into the hub (rerouting their outside edges)."""
    for eid in eids:
        wg.remove_edge(eid)
    hub = wg.add_node(next_id, False, -1, hub_smark, hub_symbol)
    for m in members:
        if wg.symbol[m] == SYM_NONE:
            wg.add_edge(hub, m, pot[m] if pot is not None else 0)
        else:
            for w, eid, lab in wg.neighbors(m):
                wg.add_edge(hub, w, (lab ^ pot[m]) if pot is not None else 0)
                wg.remove_edge(eid)
            wg.remove_node(m)
    return hub


def _merge_blob(
    wg: WorkGraph, problem: Problem, members: List[int], eids: List[int], next_id: int
) -> Optional[int]:
    """Process one blob; returns the number of fresh node ids consumed,
    or None to reject the whole join."""
    has_s = any(wg.smark[m] for m in members)
    symbols = [wg.symbol[m] for m in members]

    if problem is Problem.SFVS:
        if has_s:
            return None
        _replace_blob_with_hub(wg, members, eids, SYM_NONE, False, None, next_id)
        return 1

    if problem is Problem.ECT:
        if any(s == SYM_ODD_CYCLE for s in symbols):
            return None
        if len(eids) != len(members) or any(
            len(wg.inc[m] & set(eids)) != 2 for m in members
        ):
            return None
        total = 0
        for eid in eids:
            total ^= wg.edges[eid][2]
        if total == 0:
            return None
        _replace_blob_with_hub(wg, members, eids, SYM_ODD_CYCLE, False, None, next_id)
        return 1

    if problem is Problem.SOCT:
        pot = _wg_potentials(wg, members, eids)
        has_nb = any(s == SYM_NOT_BIPARTITE for s in symbols)
        if has_s and (pot is None or has_nb):
            return None
        bip = pot is not None and not has_nb
        _replace_blob_with_hub(
            wg,
            members,
            eids,
            SYM_BIPARTITE if bip else SYM_NOT_BIPARTITE,
            has_s,
            _anchor_pot(wg, pot, members) if bip else None,
            next_id,
        )
        return 1

    assert problem is Problem.SECT
    if not has_s:
        assert not any(s == SYM_ODD_CYCLE for s in symbols)
        pot = _wg_potentials(wg, members, eids)
        has_nb = any(s == SYM_NOT_BIPARTITE for s in symbols)
        n_ib = sum(1 for s in symbols if s == SYM_INTERNAL_BIPARTITE)
        if n_ib > 1 or (n_ib and (pot is None or has_nb)):
            return None
        if pot is not None and not has_nb and not n_ib:
            sym = SYM_BIPARTITE
        elif n_ib:
            sym = SYM_INTERNAL_BIPARTITE
        else:
            sym = SYM_NOT_BIPARTITE
        _replace_blob_with_hub(
            wg, members, eids, sym, False,
            _anchor_pot(wg, pot, members)
            if sym in (SYM_BIPARTITE, SYM_INTERNAL_BIPARTITE)
            else None,
            next_id,
        )
        return 1

    # SECT, blob containing an S-vertex
    if any(s in (SYM_NOT_BIPARTITE, SYM_ODD_CYCLE, SYM_INTERNAL_BIPARTITE) for s in symbols):
        return None
    eid_set = set(eids)
    s_members = [m for m in members if wg.smark[m]]
    for m in s_members:
        if len(wg.inc[m] & eid_set) != 2:
            return None
    non_s = [m for m in members if not wg.smark[m]]
    comp_of: Dict[int, int] = {}
    comps: List[List[int]] = []
    internal_adj: Dict[int, List[Tuple[int, int]]] = {m: [] for m in non_s}
    for eid in eids:
        u, v, _ = wg.edges[eid]
        if u in internal_adj and v in internal_adj:
            internal_adj[u].append((v, eid))
            internal_adj[v].append((u, eid))
    for start in non_s:
        if start in comp_of:
            continue
        ci = len(comps)
        comp = [start]
        comp_of[start] = ci
        queue = [start]
        while queue:
            a = queue.pop()
            for b, _ in internal_adj[a]:
                if b not in comp_of:
                    comp_of[b] = ci
                    comp.append(b)
                    queue.append(b)
        comps.append(comp)
    for ci, comp in enumerate(comps):
        outgoing = 0
        comp_set = set(comp)
        for m in comp:
            for eid in wg.inc[m] & eid_set:
                u, v, _ = wg.edges[eid]
                other = v if u == m else u
                if other not in comp_set:
                    outgoing += 1
        if outgoing != 2:
            return None

    # split one S-vertex by a fresh edge labeled 1 and test all cycle sums
    split = min(s_members, key=lambda m: (0, wg.orig[m]) if wg.active[m] else (1, m))
    e1, e2 = sorted(wg.inc[split] & eid_set)
    twin = next_id
    tmp_nodes = {m: None for m in members}
    tadj: Dict[int, List[Tuple[int, int]]] = {m: [] for m in members}
    tadj[twin] = []
    for eid in eids:
        u, v, lab = wg.edges[eid]
        if eid == e2:
            u = twin if u == split else u
            v = twin if v == split else v
        tadj[u].append((v, lab))
        tadj[v].append((u, lab))
    tadj[split].append((twin, 1))
    tadj[twin].append((split, 1))
    pot: Dict[int, int] = {}
    for root in tadj:
        if root in pot:
            continue
        pot[root] = 0
        queue = [root]
        while queue:
            a = queue.pop()
            for b, lab in tadj[a]:
                if b not in pot:
                    pot[b] = pot[a] ^ lab
                    queue.append(b)
    for a, nbrs in tadj.items():
        for b, lab in nbrs:
            if pot[a] ^ pot[b] != lab:
                return None

    used = 0
    ib_hubs = []
    for comp in comps:
        # each bipartite subcomponent is an independent gauge: anchor it
        anchored = [m for m in comp if wg.active[m]]
        if anchored and pot[min(anchored, key=lambda m: wg.orig[m])] == 1:
            for m in comp:
                pot[m] ^= 1
        hub = wg.add_node(next_id + used, False, -1, False, SYM_INTERNAL_BIPARTITE)
        used += 1
        ib_hubs.append(hub)
        for m in comp:
            if wg.symbol[m] == SYM_NONE:
                wg.add_edge(hub, m, pot[m])
            else:
                for w, eid, lab in wg.neighbors(m):
                    if eid in eid_set:
                        continue
                    wg.add_edge(hub, w, lab ^ pot[m])
                    wg.remove_edge(eid)
    for eid in eids:
        wg.remove_edge(eid)
    for comp in comps:
        for m in comp:
            if wg.symbol[m] != SYM_NONE:
                wg.remove_node(m)
    oc = wg.add_node(next_id + used, False, -1, True, SYM_ODD_CYCLE)
    used += 1
    for m in s_members:
        wg.add_edge(oc, m, 0)
    for hub in ib_hubs:
        wg.add_edge(oc, hub, 0)
    return used


def merge_forests(f1: Forest, f2: Forest, problem: Problem) -> Optional[Forest]:
    """Join two reduced forests over the same active set.

    Forms the union graph, groups its nontrivial 2-connected components
    into blobs (blocks glued through labeled cutvertices), checks and
    replaces each blob according to the problem, and re-reduces.  Returns
    None exactly when the union of the underlying graphs is infeasible.
    """
    assert f1.active_origs() == f2.active_origs(), "active sets must coincide"
    wg = WorkGraph()
    by_orig: Dict[int, int] = {}
    next_id = 0
    map1: Dict[int, int] = {}
    for i in range(len(f1)):
        map1[i] = next_id
        wg.add_node(next_id, f1.active[i], f1.orig[i], f1.smark[i], f1.symbol[i])
        if f1.active[i]:
            by_orig[f1.orig[i]] = next_id
        next_id += 1
    for i in range(len(f1)):
        if f1.parent[i] != i:
            wg.add_edge(map1[i], map1[f1.parent[i]], f1.elab[i])
    map2: Dict[int, int] = {}
    for i in range(len(f2)):
        if f2.active[i]:
            nid = by_orig[f2.orig[i]]
            assert wg.smark[nid] == f2.smark[i], "S-marks disagree on shared vertex"
            map2[i] = nid
        else:
            map2[i] = next_id
            wg.add_node(next_id, False, -1, f2.smark[i], f2.symbol[i])
            next_id += 1
    for i in range(len(f2)):
        if f2.parent[i] != i:
            wg.add_edge(map2[i], map2[f2.parent[i]], f2.elab[i])

    blocks, _cuts = _wg_blocks(wg)
    nontrivial = [b for b in blocks if b[2]]
    if nontrivial:
        # union-find over blocks sharing a labeled cutvertex
        parent = list(range(len(nontrivial)))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        holder: Dict[int, int] = {}
        for bi, (vs, _, _) in enumerate(nontrivial):
            for v in vs:
                if wg.symbol[v] != SYM_NONE:
                    if v in holder:
                        ra, rb = find(holder[v]), find(bi)
                        if ra != rb:
                            parent[ra] = rb
                    else:
                        holder[v] = bi
        blobs: Dict[int, Tuple[Set[int], List[int]]] = {}
        for bi, (vs, eids, _) in enumerate(nontrivial):
            r = find(bi)
            if r not in blobs:
                blobs[r] = (set(), [])
            blobs[r][0].update(vs)
            blobs[r][1].extend(eids)
        for vs, eids in blobs.values():
            used = _merge_blob(wg, problem, sorted(vs), eids, next_id)
            if used is None:
                return None
            next_id += used
    return reduce_forest(wg, problem)

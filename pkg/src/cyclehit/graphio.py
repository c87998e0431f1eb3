"""Text formats for graphs and tree decompositions, plus nicification.

Graph files are line oriented::

    c comment
    p cyc <n> <m>
    e <u> <v>          edge, 1-based, may repeat for parallel edges
    s <v>              v belongs to S
    w <v> <int|inf>    vertex weight (default 1)
    t <v>              v is a terminal (node multiway cut)

Tree decompositions use the PACE-style ``.td`` layout::

    s td <bags> <maxbagsize> <n>
    b <id> <v...>
    <id1> <id2>
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from .graph import INF, Multigraph, Weight


class GraphFormatError(ValueError):
    pass


class TdFormatError(ValueError):
    pass


class TdValidationError(ValueError):
    pass


def _fail(line_no: int, msg: str) -> None:
    raise GraphFormatError(f"line {line_no}: {msg}")


def parse_graph(text: str) -> Multigraph:
    n = m = None
    edges: List[Tuple[int, int]] = []
    s_set: List[int] = []
    terminals: List[int] = []
    weights: Dict[int, Weight] = {}
    seen_s: set = set()
    seen_t: set = set()

    def vertex(tok: str, line_no: int) -> int:
        try:
            v = int(tok)
        except ValueError:
            _fail(line_no, f"bad vertex {tok!r}")
        if n is None:
            _fail(line_no, "vertex line before header")
        if not 1 <= v <= n:
            _fail(line_no, f"vertex {v} out of range 1..{n}")
        return v

    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "p":
            if n is not None:
                _fail(line_no, "duplicate header")
            if len(parts) != 4 or parts[1] != "cyc":
                _fail(line_no, f"malformed header {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                _fail(line_no, f"malformed header {line!r}")
            if n < 0 or m < 0:
                _fail(line_no, "negative counts in header")
        elif kind == "e":
            if len(parts) != 3:
                _fail(line_no, f"malformed edge line {line!r}")
            u, v = vertex(parts[1], line_no), vertex(parts[2], line_no)
            if u == v:
                _fail(line_no, f"loop edge at vertex {u}")
            edges.append((u, v))
        elif kind == "s":
            if len(parts) != 2:
                _fail(line_no, f"malformed s line {line!r}")
            v = vertex(parts[1], line_no)
            if v in seen_s:
                _fail(line_no, f"duplicate s declaration for vertex {v}")
            seen_s.add(v)
            s_set.append(v)
        elif kind == "t":
            if len(parts) != 2:
                _fail(line_no, f"malformed t line {line!r}")
            v = vertex(parts[1], line_no)
            if v in seen_t:
                _fail(line_no, f"duplicate t declaration for vertex {v}")
            seen_t.add(v)
            terminals.append(v)
        elif kind == "w":
            if len(parts) != 3:
                _fail(line_no, f"malformed w line {line!r}")
            v = vertex(parts[1], line_no)
            if v in weights:
                _fail(line_no, f"duplicate weight for vertex {v}")
            if parts[2] == "inf":
                weights[v] = INF
            else:
                try:
                    w = int(parts[2])
                except ValueError:
                    _fail(line_no, f"bad weight {parts[2]!r}")
                if w < 1:
                    _fail(line_no, f"weight {w} of vertex {v} must be >= 1")
                weights[v] = w
        else:
            _fail(line_no, f"unknown line kind {kind!r}")
    if n is None:
        raise GraphFormatError("missing header 'p cyc <n> <m>'")
    if len(edges) != m:
        raise GraphFormatError(f"header declares {m} edges, found {len(edges)}")
    return Multigraph(range(1, n + 1), edges, s_set, weights, terminals)


def write_graph(g: Multigraph) -> str:
    """Canonical text form: sorted edges, then s/t/w lines in vertex order."""
    verts = sorted(g.vertices)
    remap = {v: i + 1 for i, v in enumerate(verts)}
    lines = [f"p cyc {len(verts)} {len(g.edges)}"]
    for u, v in sorted((min(remap[a], remap[b]), max(remap[a], remap[b])) for a, b in g.edges):
        lines.append(f"e {u} {v}")
    for v in verts:
        if v in g.s_set:
            lines.append(f"s {remap[v]}")
    for v in verts:
        if v in g.terminals:
            lines.append(f"t {remap[v]}")
    for v in verts:
        w = g.weight(v)
        if w != 1:
            lines.append(f"w {remap[v]} {'inf' if w == INF else int(w)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TreeDecomposition:
    bags: Dict[int, FrozenSet[int]]
    tree_edges: Tuple[Tuple[int, int], ...]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1


def parse_td(text: str, g: Multigraph) -> TreeDecomposition:
    declared = None
    bags: Dict[int, FrozenSet[int]] = {}
    tree_edges: List[Tuple[int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if declared is not None:
                raise TdFormatError(f"line {line_no}: duplicate solution line")
            if len(parts) != 5 or parts[1] != "td":
                raise TdFormatError(f"line {line_no}: malformed solution line")
            declared = tuple(int(x) for x in parts[2:])
        elif parts[0] == "b":
            if len(parts) < 2:
                raise TdFormatError(f"line {line_no}: malformed bag line")
            bid = int(parts[1])
            if bid in bags:
                raise TdFormatError(f"line {line_no}: duplicate bag {bid}")
            bags[bid] = frozenset(int(x) for x in parts[2:])
        else:
            if len(parts) != 2:
                raise TdFormatError(f"line {line_no}: malformed tree edge")
            tree_edges.append((int(parts[0]), int(parts[1])))
    if not bags:
        raise TdFormatError("no bags found")
    td = TreeDecomposition(bags, tuple(tree_edges))
    validate_td(td, g)
    return td


def validate_td(td: TreeDecomposition, g: Multigraph) -> None:
    """Check the three tree-decomposition axioms plus tree-ness."""
    ids = set(td.bags)
    for a, b in td.tree_edges:
        if a not in ids or b not in ids:
            raise TdValidationError(f"tree edge {a}-{b} uses unknown bag")
    # tree-ness: connected and |E| = |V| - 1
    if len(td.tree_edges) != len(ids) - 1:
        raise TdValidationError("bag tree is not a tree")
    adj: Dict[int, List[int]] = {i: [] for i in ids}
    for a, b in td.tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = set()
    queue = [next(iter(ids))]
    seen.add(queue[0])
    while queue:
        v = queue.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    if seen != ids:
        raise TdValidationError("bag tree is not connected")
    covered = set().union(*td.bags.values()) if td.bags else set()
    for v in g.vertices:
        if v not in covered:
            raise TdValidationError(f"vertex {v} uncovered")
    for u, v in set(g.edges):
        if not any(u in bag and v in bag for bag in td.bags.values()):
            raise TdValidationError(f"edge {u}-{v} uncovered")
    for v in g.vertices:
        holding = [i for i in ids if v in td.bags[i]]
        hold = set(holding)
        comp = {holding[0]}
        queue = [holding[0]]
        while queue:
            a = queue.pop()
            for b in adj[a]:
                if b in hold and b not in comp:
                    comp.add(b)
                    queue.append(b)
        if comp != hold:
            raise TdValidationError(f"bags containing vertex {v} are disconnected")


def write_td(td: TreeDecomposition, g: Multigraph) -> str:
    width = max(len(b) for b in td.bags.values())
    lines = [f"s td {len(td.bags)} {width} {len(g.vertices)}"]
    for bid in sorted(td.bags):
        lines.append("b " + " ".join([str(bid)] + [str(v) for v in sorted(td.bags[bid])]))
    for a, b in td.tree_edges:
        lines.append(f"{a} {b}")
    return "\n".join(lines) + "\n"


class NodeKind(Enum):
    LEAF = "leaf"
    INTRODUCE = "introduce"
    FORGET = "forget"
    JOIN = "join"


@dataclass(frozen=True)
class NiceNode:
    kind: NodeKind
    bag: FrozenSet[int]
    children: Tuple[int, ...]
    vertex: Optional[int] = None  # introduced / forgotten vertex


@dataclass(frozen=True)
class NiceTreeDecomposition:
    """Nodes in post-order; the root is the last node and has an empty bag."""

    nodes: Tuple[NiceNode, ...]

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    @property
    def width(self) -> int:
        return max((len(nd.bag) for nd in self.nodes), default=0) - 1


def _prune_td(td: TreeDecomposition) -> TreeDecomposition:
    """Contract tree edges whose one bag contains the other."""
    bags = dict(td.bags)
    adj: Dict[int, set] = {i: set() for i in bags}
    for a, b in td.tree_edges:
        adj[a].add(b)
        adj[b].add(a)
    changed = True
    while changed:
        changed = False
        for a in list(bags):
            for b in list(adj[a]):
                if bags[a] <= bags[b]:
                    # merge a into b
                    for x in adj[a]:
                        if x != b:
                            adj[x].discard(a)
                            adj[x].add(b)
                            adj[b].add(x)
                    adj[b].discard(a)
                    del adj[a]
                    del bags[a]
                    changed = True
                    break
            if changed:
                break
    edges = set()
    for a, nbrs in adj.items():
        for b in nbrs:
            edges.add((min(a, b), max(a, b)))
    return TreeDecomposition(bags, tuple(sorted(edges)))


def nicify(td: TreeDecomposition, g: Multigraph) -> NiceTreeDecomposition:
    """Nice tree decomposition of the same width with O(width * |V|) nodes.

    Subset bags are contracted first, adjacent bags are connected by
    forget/introduce chains, joins are binarized, and empty bags are added
    at the root and below every leaf.
    """
    td = _prune_td(td)
    nodes: List[NiceNode] = []

    def emit(kind: NodeKind, bag: FrozenSet[int], children=(), vertex=None) -> int:
        nodes.append(NiceNode(kind, bag, tuple(children), vertex))
        return len(nodes) - 1

    def chain_to(idx: int, source: FrozenSet[int], target: FrozenSet[int]) -> int:
        bag = set(source)
        for v in sorted(source - target):
            bag.discard(v)
            idx = emit(NodeKind.FORGET, frozenset(bag), (idx,), v)
        for v in sorted(target - source):
            bag.add(v)
            idx = emit(NodeKind.INTRODUCE, frozenset(bag), (idx,), v)
        return idx

    def fresh_leaf_chain(target: FrozenSet[int]) -> int:
        idx = emit(NodeKind.LEAF, frozenset())
        return chain_to(idx, frozenset(), target)

    adj: Dict[int, List[int]] = {i: [] for i in td.bags}
    for a, b in td.tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    root_bag_id = min(td.bags)
    # iterative post-order over the pruned bag tree
    order: List[Tuple[int, Optional[int]]] = []
    stack = [(root_bag_id, None)]
    while stack:
        t, parent = stack.pop()
        order.append((t, parent))
        for c in adj[t]:
            if c != parent:
                stack.append((c, t))
    built: Dict[int, int] = {}
    for t, parent in reversed(order):
        children = [c for c in adj[t] if c != parent]
        bag = td.bags[t]
        if not children:
            built[t] = fresh_leaf_chain(bag)
            continue
        tops = []
        for c in children:
            tops.append(chain_to(built[c], td.bags[c], bag))
        acc = tops[0]
        for other in tops[1:]:
            acc = emit(NodeKind.JOIN, bag, (acc, other))
        built[t] = acc
    top = chain_to(built[root_bag_id], td.bags[root_bag_id], frozenset())
    ntd = NiceTreeDecomposition(tuple(nodes))
    assert ntd.root == top
    return ntd


def check_nice(ntd: NiceTreeDecomposition, g: Multigraph) -> None:
    """Assert the structural invariants of a nice tree decomposition."""
    nodes = ntd.nodes
    seen_child = set()
    for idx, nd in enumerate(nodes):
        for c in nd.children:
            if c >= idx or c in seen_child:
                raise AssertionError("children must precede nodes and be unique")
            seen_child.add(c)
        if nd.kind is NodeKind.LEAF:
            assert not nd.children and not nd.bag
        elif nd.kind is NodeKind.INTRODUCE:
            (c,) = nd.children
            assert nd.vertex not in nodes[c].bag
            assert nd.bag == nodes[c].bag | {nd.vertex}
        elif nd.kind is NodeKind.FORGET:
            (c,) = nd.children
            assert nd.vertex in nodes[c].bag
            assert nd.bag == nodes[c].bag - {nd.vertex}
        else:
            c1, c2 = nd.children
            assert nd.bag == nodes[c1].bag == nodes[c2].bag
    assert not nodes[ntd.root].bag, "root bag must be empty"
    # vertex / edge coverage and occurrence connectivity,
    # plus: every vertex is forgotten exactly once
    forgotten: Dict[int, int] = {}
    for nd in nodes:
        if nd.kind is NodeKind.FORGET:
            forgotten[nd.vertex] = forgotten.get(nd.vertex, 0) + 1
    for v in g.vertices:
        assert forgotten.get(v, 0) == 1, f"vertex {v} forgotten {forgotten.get(v, 0)} times"
    covered = set()
    for nd in nodes:
        covered |= nd.bag
    assert covered == set(g.vertices)
    for u, v in set(g.edges):
        assert any(u in nd.bag and v in nd.bag for nd in nodes), f"edge {u}-{v} uncovered"
    # occurrence connectivity, per vertex, on the node tree
    parent: List[Optional[int]] = [None] * len(nodes)
    for idx, nd in enumerate(nodes):
        for c in nd.children:
            parent[c] = idx
    holders: Dict[int, List[int]] = {v: [] for v in g.vertices}
    for idx, nd in enumerate(nodes):
        for v in nd.bag:
            holders[v].append(idx)
    for v, hold in holders.items():
        hold_set = set(hold)
        comp = {hold[0]}
        queue = [hold[0]]
        while queue:
            a = queue.pop()
            for b in list(nodes[a].children) + ([parent[a]] if parent[a] is not None else []):
                if b in hold_set and b not in comp:
                    comp.add(b)
                    queue.append(b)
        assert comp == hold_set, f"occurrences of vertex {v} are disconnected"
    # every edge slot belongs to exactly one forget event of one endpoint
    nbr_count: Dict[Tuple[int, int], int] = {}
    for idx, nd in enumerate(nodes):
        if nd.kind is not NodeKind.FORGET:
            continue
        child_bag = nodes[nd.children[0]].bag
        for u, v in set(g.edges):
            if (nd.vertex == u and v in child_bag) or (nd.vertex == v and u in child_bag):
                nbr_count[(u, v)] = nbr_count.get((u, v), 0) + 1
    for e in set(g.edges):
        assert nbr_count.get(e, 0) == 1, f"edge {e} covered by {nbr_count.get(e, 0)} forget events"

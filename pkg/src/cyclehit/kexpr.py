"""Clique-width expressions: parsing, evaluation, normalization, doubling.

Concrete syntax is s-expressions, whitespace-insensitive, labels 1-based::

    (v <id> <label>)     vertex creation
    (u <e1> <e2>)        disjoint union
    (j <i> <j> <e>)      join: add every absent edge between labels i and j
    (r <i> <j> <e>)      rename label i to j

All tree walks are iterative; linear expressions get arbitrarily deep.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Set, Tuple, Union

from .graph import Multigraph


class KexprError(ValueError):
    pass


@dataclass(frozen=True)
class Create:
    vertex: int
    label: int


@dataclass(frozen=True)
class Union_:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Join:
    i: int
    j: int
    child: "Node"


@dataclass(frozen=True)
class Rename:
    i: int
    j: int
    child: "Node"


Node = Union[Create, Union_, Join, Rename]


@dataclass(frozen=True)
class CliqueExpression:
    root: Node
    k: int  # label universe size

    def __post_init__(self) -> None:
        hi = 0
        for node in iter_nodes(self.root):
            if isinstance(node, Create):
                hi = max(hi, node.label)
            elif isinstance(node, (Join, Rename)):
                hi = max(hi, node.i, node.j)
        if hi > self.k:
            raise KexprError(f"label {hi} exceeds declared universe {self.k}")

    def size(self) -> int:
        return sum(1 for _ in iter_nodes(self.root))


def iter_nodes(root: Node) -> Iterator[Node]:
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Union_):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Join, Rename)):
            stack.append(node.child)


def postorder(root: Node) -> List[Node]:
    out: List[Node] = []
    stack: List[Tuple[Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded or isinstance(node, Create):
            out.append(node)
            continue
        stack.append((node, True))
        if isinstance(node, Union_):
            stack.append((node.right, False))
            stack.append((node.left, False))
        else:
            stack.append((node.child, False))
    return out


def _tokenize(text: str) -> List[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_kexpr(text: str, k: Optional[int] = None) -> CliqueExpression:
    """Parse the s-expression syntax; ``k`` defaults to the largest label."""
    tokens = _tokenize(text)
    if not tokens:
        raise KexprError("empty expression")
    pos = 0

    def peek() -> str:
        if pos >= len(tokens):
            raise KexprError("unexpected end of expression")
        return tokens[pos]

    # iterative descent with an explicit work stack of pending operator frames
    out: List[Node] = []
    frames: List[Tuple[str, List[int]]] = []  # (op, numeric args)

    def close_frame() -> None:
        op, args = frames.pop()
        if op == "u":
            if len(out) < 2:
                raise KexprError("union needs two subexpressions")
            right = out.pop()
            left = out.pop()
            out.append(Union_(left, right))
        elif op == "j":
            out.append(Join(args[0], args[1], out.pop()))
        else:
            out.append(Rename(args[0], args[1], out.pop()))

    while pos < len(tokens):
        tok = tokens[pos]
        if tok == "(":
            pos += 1
            op = peek()
            pos += 1
            if op == "v":
                try:
                    vid, lab = int(tokens[pos]), int(tokens[pos + 1])
                except (ValueError, IndexError):
                    raise KexprError("malformed vertex creation") from None
                pos += 2
                if peek() != ")":
                    raise KexprError("malformed vertex creation")
                pos += 1
                if lab < 1:
                    raise KexprError(f"label {lab} must be positive")
                out.append(Create(vid, lab))
            elif op in ("j", "r"):
                try:
                    i, j = int(tokens[pos]), int(tokens[pos + 1])
                except (ValueError, IndexError):
                    raise KexprError(f"malformed {op!r} node") from None
                pos += 2
                if i < 1 or j < 1 or i == j:
                    raise KexprError(f"bad label pair {i},{j}")
                frames.append((op, [i, j]))
            elif op == "u":
                frames.append(("u", []))
            else:
                raise KexprError(f"unknown operator {op!r}")
        elif tok == ")":
            pos += 1
            if not frames:
                raise KexprError("unbalanced ')'")
            close_frame()
        else:
            raise KexprError(f"unexpected token {tok!r}")
    if frames:
        raise KexprError("unbalanced '('")
    if len(out) != 1:
        raise KexprError("expression must have exactly one root")
    root = out[0]
    seen: Set[int] = set()
    hi = 0
    for node in iter_nodes(root):
        if isinstance(node, Create):
            if node.vertex in seen:
                raise KexprError(f"vertex {node.vertex} created twice")
            seen.add(node.vertex)
            hi = max(hi, node.label)
        elif isinstance(node, (Join, Rename)):
            hi = max(hi, node.i, node.j)
    return CliqueExpression(root, k if k is not None else max(hi, 1))


def write_kexpr(expr: CliqueExpression) -> str:
    parts: List[str] = []
    stack: List[Union[Node, str]] = [expr.root]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
        elif isinstance(item, Create):
            parts.append(f"(v {item.vertex} {item.label})")
        elif isinstance(item, Union_):
            parts.append("(u")
            stack.extend([")", item.right, item.left])
        elif isinstance(item, Join):
            parts.append(f"(j {item.i} {item.j}")
            stack.extend([")", item.child])
        else:
            parts.append(f"(r {item.i} {item.j}")
            stack.extend([")", item.child])
    return " ".join(parts).replace("( ", "(").replace(" )", ")")


@dataclass(frozen=True)
class LabeledGraph:
    graph: Multigraph
    labels: Dict[int, int]  # vertex -> label

    def label_classes(self, k: int) -> List[Set[int]]:
        out: List[Set[int]] = [set() for _ in range(k + 1)]
        for v, lab in self.labels.items():
            out[lab].add(v)
        return out


def eval_kexpr(expr: CliqueExpression) -> LabeledGraph:
    """Evaluate bottom-up; the result is a simple labeled graph."""
    k = expr.k
    results: List[Tuple[Dict[int, int], Set[Tuple[int, int]]]] = []
    for node in postorder(expr.root):
        if isinstance(node, Create):
            if node.label > k:
                raise KexprError(f"label {node.label} exceeds universe {k}")
            results.append(({node.vertex: node.label}, set()))
        elif isinstance(node, Union_):
            labels2, edges2 = results.pop()
            labels1, edges1 = results.pop()
            dup = labels1.keys() & labels2.keys()
            if dup:
                raise KexprError(f"vertex {min(dup)} created twice")
            labels1.update(labels2)
            edges1 |= edges2
            results.append((labels1, edges1))
        elif isinstance(node, Join):
            if node.i > k or node.j > k:
                raise KexprError(f"label above universe {k} in join")
            labels, edges = results.pop()
            side_i = [v for v, lab in labels.items() if lab == node.i]
            side_j = [v for v, lab in labels.items() if lab == node.j]
            for u in side_i:
                for v in side_j:
                    edges.add((u, v) if u < v else (v, u))
            results.append((labels, edges))
        else:
            if node.i > k or node.j > k:
                raise KexprError(f"label above universe {k} in rename")
            labels, edges = results.pop()
            for v, lab in labels.items():
                if lab == node.i:
                    labels[v] = node.j
            results.append((labels, edges))
    labels, edges = results.pop()
    return LabeledGraph(Multigraph(labels.keys(), sorted(edges)), labels)


def normalize_kexpr(
    expr: CliqueExpression, return_stats: bool = False
):
    """Make every edge appear in exactly one join and drop trivial joins.

    Runs the two-pass list-merging algorithm: a post-order sweep marks join
    nodes that are redundant (all their edges reappear at a later join) or
    trivial (one side empty); the rebuild skips marked nodes.  The evaluated
    graph is unchanged.
    """
    k = expr.k
    order = postorder(expr.root)
    node_id = {id(node): idx for idx, node in enumerate(order)}
    removed: Set[int] = set()
    # per node: B = set of nonempty labels, L = {(i,j) sorted pair: [join ids]}
    stack: List[Tuple[Set[int], Dict[Tuple[int, int], List[int]]]] = []
    for node in order:
        if isinstance(node, Create):
            stack.append(({node.label}, {}))
        elif isinstance(node, Union_):
            b2, l2 = stack.pop()
            b1, l1 = stack.pop()
            # merge the smaller list collection into the larger one
            if sum(map(len, l2.values())) > sum(map(len, l1.values())):
                l1, l2 = l2, l1
            b1 |= b2
            for key, lst in l2.items():
                if key in l1:
                    l1[key].extend(lst)
                else:
                    l1[key] = lst
            stack.append((b1, l1))
        elif isinstance(node, Join):
            b, lists = stack.pop()
            key = (node.i, node.j) if node.i < node.j else (node.j, node.i)
            if node.i not in b or node.j not in b:
                removed.add(node_id[id(node)])
                lists.pop(key, None)
            else:
                for s in lists.get(key, ()):
                    removed.add(s)
                lists[key] = [node_id[id(node)]]
            stack.append((b, lists))
        else:
            b, lists = stack.pop()
            i, j = node.i, node.j
            nl: Dict[Tuple[int, int], List[int]] = {}
            for (a, c), lst in lists.items():
                if i in (a, c):
                    other = c if a == i else a
                    if other == j:
                        continue  # both endpoints now share label j
                    nk = (other, j) if other < j else (j, other)
                else:
                    nk = (a, c)
                if nk in nl:
                    nl[nk].extend(lst)
                else:
                    nl[nk] = lst
            if i in b:
                b.discard(i)
                b.add(j)
            stack.append((b, nl))

    # rebuild bottom-up, skipping removed joins
    rebuilt: List[Node] = []
    for idx, node in enumerate(order):
        if isinstance(node, Create):
            rebuilt.append(node)
        elif isinstance(node, Union_):
            right = rebuilt.pop()
            left = rebuilt.pop()
            rebuilt.append(node if left is node.left and right is node.right else Union_(left, right))
        elif isinstance(node, Join):
            child = rebuilt.pop()
            if idx in removed:
                rebuilt.append(child)
            else:
                rebuilt.append(node if child is node.child else Join(node.i, node.j, child))
        else:
            child = rebuilt.pop()
            rebuilt.append(node if child is node.child else Rename(node.i, node.j, child))
    out = CliqueExpression(rebuilt.pop(), k)
    if return_stats:
        return out, len(removed)
    return out


def is_normalized(expr: CliqueExpression) -> bool:
    """Every edge introduced by exactly one join, no trivial joins."""
    labels: List[Tuple[Dict[int, int], Set[Tuple[int, int]]]] = []
    ok = True
    for node in postorder(expr.root):
        if isinstance(node, Create):
            labels.append(({node.vertex: node.label}, set()))
        elif isinstance(node, Union_):
            l2, e2 = labels.pop()
            l1, e1 = labels.pop()
            l1.update(l2)
            labels.append((l1, e1 | e2))
        elif isinstance(node, Join):
            labs, edges = labels.pop()
            side_i = [v for v, lab in labs.items() if lab == node.i]
            side_j = [v for v, lab in labs.items() if lab == node.j]
            if not side_i or not side_j:
                ok = False
            for u in side_i:
                for v in side_j:
                    e = (u, v) if u < v else (v, u)
                    if e in edges:
                        ok = False
                    edges.add(e)
            labels.append((labs, edges))
        else:
            labs, edges = labels.pop()
            for v, lab in labs.items():
                if lab == node.i:
                    labs[v] = node.j
            labels.append((labs, edges))
    return ok


def used_labels(node: Node) -> Set[int]:
    """Labels with at least one vertex in the evaluated subexpression."""
    out: List[Set[int]] = []
    for nd in postorder(node):
        if isinstance(nd, Create):
            out.append({nd.label})
        elif isinstance(nd, Union_):
            b = out.pop()
            a = out.pop()
            out.append(a | b)
        elif isinstance(nd, Join):
            pass
        else:
            labs = out.pop()
            if nd.i in labs:
                labs.discard(nd.i)
                labs.add(nd.j)
            out.append(labs)
    return out.pop()


def double_labels(expr: CliqueExpression) -> CliqueExpression:
    """Move to 2k labels so every union's children use disjoint label sets.

    Each union node's right child is wrapped in renames into the primed
    half (i' = i + k) and the union's result is renamed back, leaving the
    evaluation unchanged.
    """
    k = expr.k
    rebuilt: List[Node] = []
    for node in postorder(expr.root):
        if isinstance(node, Create):
            rebuilt.append(node)
        elif isinstance(node, Union_):
            right = rebuilt.pop()
            left = rebuilt.pop()
            for i in range(1, k + 1):
                right = Rename(i, i + k, right)
            merged: Node = Union_(left, right)
            for i in range(1, k + 1):
                merged = Rename(i + k, i, merged)
            rebuilt.append(merged)
        elif isinstance(node, Join):
            rebuilt.append(Join(node.i, node.j, rebuilt.pop()))
        else:
            rebuilt.append(Rename(node.i, node.j, rebuilt.pop()))
    return CliqueExpression(rebuilt.pop(), 2 * k)


def is_union_disjoint(expr: CliqueExpression) -> bool:
    """Do the two children of every union use disjoint label sets?"""
    out: List[Set[int]] = []
    ok = True
    for nd in postorder(expr.root):
        if isinstance(nd, Create):
            out.append({nd.label})
        elif isinstance(nd, Union_):
            b = out.pop()
            a = out.pop()
            if a & b:
                ok = False
            out.append(a | b)
        elif isinstance(nd, Join):
            pass
        else:
            labs = out.pop()
            if nd.i in labs:
                labs.discard(nd.i)
                labs.add(nd.j)
            out.append(labs)
    return ok

"""Tree decompositions: validation, the .td format, min-fill, nice normalization,
good vertex colorings, forget ownership and forget-node contexts."""

from __future__ import annotations

from dataclasses import dataclass

from .assignment import DecisionVariable, dv_eq, dv_mem
from .errors import DecompositionError
from .graph import Edge, Graph
from .mso import Formula

LEAF = "leaf"
INTRODUCE = "introduce"
FORGET = "forget"
JOIN = "join"


class TreeDecomposition:
    """Bags indexed by node id plus the tree edges connecting them."""

    def __init__(self, bags: dict[int, frozenset], tree_edges) -> None:
        self.bags = {n: frozenset(b) for n, b in bags.items()}
        self.tree_edges = [tuple(sorted(e)) for e in tree_edges]
        self.neighbors: dict[int, list[int]] = {n: [] for n in self.bags}
        for a, b in self.tree_edges:
            if a not in self.bags or b not in self.bags:
                raise DecompositionError(f"tree edge ({a}, {b}) references unknown node")
            self.neighbors[a].append(b)
            self.neighbors[b].append(a)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.bags)

    def width(self) -> int:
        return max(len(b) for b in self.bags.values()) - 1


def parse_tree_decomposition(text: str) -> TreeDecomposition:
    """Parse the .td format: `s td <bags> <max_bag_size> <n>` header, `b` bag lines,
    then one tree edge per line."""
    header = None
    bags: dict[int, frozenset] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if header is not None:
                raise DecompositionError(f"line {lineno}: duplicate header")
            if len(parts) != 5 or parts[1] != "td":
                raise DecompositionError(f"line {lineno}: malformed header")
            header = tuple(int(x) for x in parts[2:])
        elif parts[0] == "b":
            try:
                bag_id = int(parts[1])
                members = frozenset(int(x) for x in parts[2:])
            except (ValueError, IndexError):
                raise DecompositionError(f"line {lineno}: malformed bag line") from None
            if bag_id in bags:
                raise DecompositionError(f"line {lineno}: duplicate bag {bag_id}")
            bags[bag_id] = members
        else:
            if len(parts) != 2:
                raise DecompositionError(f"line {lineno}: malformed tree edge line")
            edges.append((int(parts[0]), int(parts[1])))
    if header is None:
        raise DecompositionError("missing header line")
    if len(bags) != header[0]:
        raise DecompositionError(f"header declares {header[0]} bags, found {len(bags)}")
    return TreeDecomposition(bags, edges)


def serialize_tree_decomposition(t: TreeDecomposition, n_vertices: int) -> str:
    max_bag = max((len(b) for b in t.bags.values()), default=0)
    lines = [f"s td {len(t.bags)} {max_bag} {n_vertices}"]
    for n in t.nodes:
        lines.append("b " + " ".join([str(n)] + [str(v) for v in sorted(t.bags[n])]))
    lines.extend(f"{a} {b}" for a, b in sorted(t.tree_edges))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    width: int
    violations: tuple[str, ...]


def validate_decomposition(g: Graph, t: TreeDecomposition) -> ValidationReport:
    """Check tree-ness, edge coverage and connected vertex occurrence."""
    violations = []
    nodes = t.nodes
    if not nodes:
        return ValidationReport(False, -1, ("decomposition has no nodes",))
    if len(t.tree_edges) != len(nodes) - 1:
        violations.append("underlying graph is not a tree (wrong edge count)")
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for m in t.neighbors[stack.pop()]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    if len(seen) != len(nodes):
        violations.append("underlying graph is not a tree (disconnected)")
    tree_ok = not violations
    for e in g.edges:
        if not any({e.u, e.v} <= bag for bag in t.bags.values()):
            violations.append(f"edge ({e.u}, {e.v}) not covered by any bag")
    if tree_ok:  # occurrence connectivity is only meaningful on a tree
        for v in g.vertices():
            occ = [n for n in nodes if v in t.bags[n]]
            if not occ:
                violations.append(f"vertex {v} appears in no bag")
                continue
            reach = {occ[0]}
            stack = [occ[0]]
            occ_set = set(occ)
            while stack:
                for m in t.neighbors[stack.pop()]:
                    if m in occ_set and m not in reach:
                        reach.add(m)
                        stack.append(m)
            if len(reach) != len(occ):
                violations.append(f"occurrence of vertex {v} is disconnected")
    width = max(len(b) for b in t.bags.values()) - 1
    return ValidationReport(not violations, width, tuple(violations))


def min_fill_decomposition(g: Graph) -> TreeDecomposition:
    """Heuristic decomposition from a min-fill elimination order (ties by vertex id)."""
    if g.n_vertices == 0:
        raise DecompositionError("graph has no vertices")
    adj = {v: set(g.neighbors(v)) for v in g.vertices()}
    order = []
    saved_nbrs = []
    remaining = set(g.vertices())
    while remaining:
        best = None
        for v in sorted(remaining):
            nbrs = adj[v]
            fill = sum(
                1
                for a in nbrs
                for b in nbrs
                if a < b and b not in adj[a]
            )
            if best is None or fill < best[0]:
                best = (fill, v)
        v = best[1]
        nbrs = set(adj[v])
        order.append(v)
        saved_nbrs.append(nbrs)
        for a in nbrs:
            for b in nbrs:
                if a != b:
                    adj[a].add(b)
            adj[a].discard(v)
        del adj[v]
        remaining.discard(v)
    position = {v: i for i, v in enumerate(order)}
    bags = {i + 1: frozenset({order[i]} | saved_nbrs[i]) for i in range(len(order))}
    edges = []
    for i in range(len(order) - 1):
        later = [position[w] for w in saved_nbrs[i]]
        parent = min(later) if later else i + 1
        edges.append((i + 1, parent + 1))
    return TreeDecomposition(bags, edges)


@dataclass(frozen=True)
class NiceNode:
    id: int
    kind: str
    vertex: int | None
    bag: frozenset
    children: tuple[int, ...]


class NiceTreeDecomposition:
    def __init__(self, nodes: dict[int, NiceNode], root: int) -> None:
        self.nodes = nodes
        self.root = root

    def node(self, node_id: int) -> NiceNode:
        return self.nodes[node_id]

    def width(self) -> int:
        return max(len(n.bag) for n in self.nodes.values()) - 1

    def postorder(self) -> list[int]:
        out, stack = [], [(self.root, False)]
        while stack:
            nid, expanded = stack.pop()
            if expanded:
                out.append(nid)
            else:
                stack.append((nid, True))
                for child in reversed(self.nodes[nid].children):
                    stack.append((child, False))
        return out

    def forget_nodes(self) -> list[int]:
        return [nid for nid in self.postorder() if self.nodes[nid].kind == FORGET]

    def depths(self) -> dict[int, int]:
        depth = {self.root: 0}
        stack = [self.root]
        while stack:
            nid = stack.pop()
            for child in self.nodes[nid].children:
                depth[child] = depth[nid] + 1
                stack.append(child)
        return depth

    def as_tree_decomposition(self) -> TreeDecomposition:
        bags = {nid: n.bag for nid, n in self.nodes.items()}
        edges = [
            (nid, c) for nid, n in self.nodes.items() for c in n.children
        ]
        return TreeDecomposition(bags, edges)

    def __len__(self) -> int:
        return len(self.nodes)


def _reduce_bags(t: TreeDecomposition):
    """Contract tree edges where one bag contains the other."""
    bags = dict(t.bags)
    nbrs = {n: set(ns) for n, ns in t.neighbors.items()}
    changed = True
    while changed:
        changed = False
        for a in sorted(bags):
            for b in sorted(nbrs[a]):
                if bags[a] <= bags[b]:
                    for m in nbrs[a]:
                        if m != b:
                            nbrs[m].discard(a)
                            nbrs[m].add(b)
                            nbrs[b].add(m)
                    nbrs[b].discard(a)
                    del nbrs[a], bags[a]
                    changed = True
                    break
            if changed:
                break
    return bags, nbrs


def make_nice(g: Graph, t: TreeDecomposition) -> NiceTreeDecomposition:
    """Normalize to a rooted binary decomposition of identical width with typed
    nodes and an empty root bag."""
    report = validate_decomposition(g, t)
    if not report.valid:
        raise DecompositionError(
            "input decomposition invalid: " + "; ".join(report.violations)
        )
    bags, nbrs = _reduce_bags(t)
    leafish = [n for n in sorted(bags) if len(nbrs[n]) <= 1]
    root_in = leafish[0]

    nodes: dict[int, NiceNode] = {}

    def new_node(kind, vertex, bag, children=()) -> int:
        nid = len(nodes) + 1
        nodes[nid] = NiceNode(nid, kind, vertex, frozenset(bag), tuple(children))
        return nid

    def lift(top_id: int, from_bag: frozenset, to_bag: frozenset) -> int:
        cur, bag = top_id, set(from_bag)
        for v in sorted(from_bag - to_bag):
            bag.discard(v)
            cur = new_node(FORGET, v, bag, (cur,))
        for v in sorted(to_bag - from_bag):
            bag.add(v)
            cur = new_node(INTRODUCE, v, bag, (cur,))
        return cur

    def build(x: int, parent: int | None) -> int:
        kids = sorted(k for k in nbrs[x] if k != parent)
        if not kids:
            return new_node(LEAF, None, bags[x])
        lifted = [lift(build(k, x), bags[k], bags[x]) for k in kids]
        acc = lifted[0]
        for nxt in lifted[1:]:
            acc = new_node(JOIN, None, bags[x], (acc, nxt))
        return acc

    top = build(root_in, None)
    bag = set(bags[root_in])
    for v in sorted(bags[root_in]):
        bag.discard(v)
        top = new_node(FORGET, v, bag, (top,))
    return NiceTreeDecomposition(nodes, top)


def is_path_decomposition(t: NiceTreeDecomposition) -> bool:
    return all(n.kind != JOIN for n in t.nodes.values())


def validate_nice(g: Graph, t: NiceTreeDecomposition) -> ValidationReport:
    """Check the nice-form conditions on top of ordinary validity."""
    base = validate_decomposition(g, t.as_tree_decomposition())
    violations = list(base.violations)
    if t.nodes[t.root].bag:
        violations.append("root bag is not empty")
    for n in t.nodes.values():
        kids = [t.nodes[c] for c in n.children]
        if n.kind == LEAF:
            if kids:
                violations.append(f"leaf node {n.id} has children")
        elif n.kind in (INTRODUCE, FORGET):
            if len(kids) != 1:
                violations.append(f"node {n.id} needs exactly one child")
                continue
            child = kids[0]
            diff = n.bag ^ child.bag
            if len(diff) != 1:
                violations.append(f"node {n.id}: symmetric difference is not one vertex")
            expect = (
                child.bag | {n.vertex} if n.kind == INTRODUCE else child.bag - {n.vertex}
            )
            if n.bag != expect or n.vertex is None:
                violations.append(f"node {n.id}: bag does not match its {n.kind} vertex")
        elif n.kind == JOIN:
            if len(kids) != 2 or any(k.bag != n.bag for k in kids):
                violations.append(f"join node {n.id}: children must copy its bag")
        else:
            violations.append(f"node {n.id}: unknown kind {n.kind!r}")
    return ValidationReport(not violations, base.width, tuple(violations))


def good_coloring(g: Graph, t: NiceTreeDecomposition) -> dict[int, int]:
    """Color vertices with at most width+1 colors so that every bag is rainbow.

    Vertices are processed by increasing depth of their forget node; each takes
    the smallest color unused in that node's bag.
    """
    own = forget_ownership(g, t)
    depth = t.depths()
    color: dict[int, int] = {}
    for v in sorted(g.vertices(), key=lambda v: (depth[own.vertex_owner[v]], v)):
        bag = t.nodes[own.vertex_owner[v]].bag
        used = {color[u] for u in bag if u in color}
        c = 1
        while c in used:
            c += 1
        color[v] = c
    return color


def is_good_coloring(g: Graph, t: NiceTreeDecomposition, color: dict[int, int]) -> bool:
    for n in t.nodes.values():
        seen = [color[v] for v in n.bag]
        if len(set(seen)) != len(seen):
            return False
    return True


@dataclass(frozen=True)
class ForgetOwnership:
    vertex_owner: dict[int, int]
    edge_owner: dict[int, int]


def forget_ownership(g: Graph, t: NiceTreeDecomposition) -> ForgetOwnership:
    """Map every vertex and every edge to the unique node forgetting it."""
    vertex_owner: dict[int, int] = {}
    edge_owner: dict[int, int] = {}
    for nid in t.forget_nodes():
        n = t.nodes[nid]
        child_bag = t.nodes[n.children[0]].bag
        v = n.vertex
        if v in vertex_owner:
            raise DecompositionError(f"vertex {v} forgotten twice")
        vertex_owner[v] = nid
        for e in g.incident_edges(v):
            if e.other(v) in child_bag:
                if e.id in edge_owner:
                    raise DecompositionError(f"edge {e.id} forgotten twice")
                edge_owner[e.id] = nid
    for v in g.vertices():
        if v not in vertex_owner:
            raise DecompositionError(f"vertex {v} never forgotten")
    for e in g.edges:
        if e.id not in edge_owner:
            raise DecompositionError(f"edge {e.id} never forgotten")
    return ForgetOwnership(vertex_owner, edge_owner)


@dataclass(frozen=True)
class Context:
    """Decision variables owned by one forget node, canonically ordered: first the
    variables naming the forgotten vertex (free-variable declaration order), then
    per forgotten edge in edge-id order."""

    node: int
    vertex: int
    edges: tuple[Edge, ...]
    variables: tuple[DecisionVariable, ...]


def context_of(
    phi: Formula, g: Graph, t: NiceTreeDecomposition, node_id: int
) -> Context:
    n = t.nodes[node_id]
    if n.kind != FORGET:
        raise DecompositionError(f"node {node_id} is not a forget node")
    child_bag = t.nodes[n.children[0]].bag
    v = n.vertex
    forgotten = tuple(
        e for e in g.incident_edges(v) if e.other(v) in child_bag
    )
    variables = []
    for var in phi.free_vars:
        if var.sort.is_vertex:
            variables.append(dv_eq(var, v) if var.sort.is_object else dv_mem(var, v))
    for e in forgotten:
        for var in phi.free_vars:
            if not var.sort.is_vertex:
                variables.append(
                    dv_eq(var, e.id) if var.sort.is_object else dv_mem(var, e.id)
                )
    return Context(node_id, v, forgotten, tuple(variables))

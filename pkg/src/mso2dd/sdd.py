"""Structured decision diagrams over v-trees, and their construction from the
decomposition dynamic program.

Nodes are hash-consed: structurally identical terminals, literals and
decompositions are shared. A decomposition's primes always respect the left
subtree of its v-tree node and form a boolean partition; subs respect the right
subtree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .assignment import DecisionVariable, decision_variables, dv_dummy
from .decomposition import FORGET, INTRODUCE, LEAF, NiceTreeDecomposition
from .errors import DiagramError
from .graph import Graph
from .mso import Formula
from .states import ReachableSets, decision_space, forget_plan, reachable_states

FALSE = "false"
TRUE = "true"
LITERAL = "lit"
DECOMP = "decomp"


class VTree:
    """Full binary tree whose leaves carry the decision variables."""

    def __init__(self) -> None:
        self.kind: list[str] = []
        self.var: list[DecisionVariable | None] = []
        self.left: list[int | None] = []
        self.right: list[int | None] = []
        self.n_vars: list[int] = []
        self._var_leaf: dict[DecisionVariable, int] = {}

    def leaf(self, var: DecisionVariable) -> int:
        if var in self._var_leaf:
            raise DiagramError(f"variable {var!r} already has a v-tree leaf")
        vid = self._new("leaf", var, None, None, 1)
        self._var_leaf[var] = vid
        return vid

    def inner(self, left: int, right: int) -> int:
        return self._new("inner", None, left, right, self.n_vars[left] + self.n_vars[right])

    def _new(self, kind, var, left, right, count) -> int:
        self.kind.append(kind)
        self.var.append(var)
        self.left.append(left)
        self.right.append(right)
        self.n_vars.append(count)
        return len(self.kind) - 1

    def leaf_of(self, var: DecisionVariable) -> int:
        return self._var_leaf[var]

    def all_variables(self) -> tuple[DecisionVariable, ...]:
        return tuple(self._var_leaf)

    def variables(self, vid: int) -> list[DecisionVariable]:
        if self.kind[vid] == "leaf":
            return [self.var[vid]]
        return self.variables(self.left[vid]) + self.variables(self.right[vid])

    def contains(self, ancestor: int, vid: int) -> bool:
        if ancestor == vid:
            return True
        if self.kind[ancestor] == "leaf":
            return False
        return self.contains(self.left[ancestor], vid) or self.contains(
            self.right[ancestor], vid
        )

    def __len__(self) -> int:
        return len(self.kind)


class SddNode:
    __slots__ = ("uid", "kind", "var", "polarity", "pairs", "vtree_id")

    def __init__(self, uid, kind, var=None, polarity=None, pairs=(), vtree_id=None):
        self.uid = uid
        self.kind = kind
        self.var = var
        self.polarity = polarity
        self.pairs = pairs
        self.vtree_id = vtree_id

    @property
    def is_terminal(self) -> bool:
        return self.kind in (FALSE, TRUE, LITERAL)

    def __repr__(self) -> str:
        if self.kind == LITERAL:
            sign = "" if self.polarity else "~"
            return f"<sdd {self.uid}: {sign}{self.var.name}>"
        if self.kind == DECOMP:
            return f"<sdd {self.uid}: decomp/{len(self.pairs)}>"
        return f"<sdd {self.uid}: {self.kind}>"


class SddBuilder:
    """Hash-consing factory; owns the v-tree being grown alongside the diagram."""

    def __init__(self) -> None:
        self.vtree = VTree()
        self._table: dict[tuple, SddNode] = {}
        self._nodes: list[SddNode] = []
        self.false = self._intern((FALSE,), FALSE)
        self.true = self._intern((TRUE,), TRUE)

    def _intern(self, key, kind, **fields) -> SddNode:
        node = self._table.get(key)
        if node is None:
            node = SddNode(len(self._nodes), kind, **fields)
            self._nodes.append(node)
            self._table[key] = node
        return node

    def literal(self, var: DecisionVariable, polarity: bool) -> SddNode:
        vid = self.vtree.leaf_of(var)
        return self._intern(
            (LITERAL, vid, polarity), LITERAL, var=var, polarity=polarity, vtree_id=vid
        )

    def decomposition(self, vtree_id: int, pairs) -> SddNode:
        """Prime-sub pairs; constant-false primes are dropped, pairs are stored in
        canonical (prime uid, sub uid) order so sharing is maximal."""
        kept = tuple(
            sorted(
                ((p, s) for p, s in pairs if p.kind != FALSE),
                key=lambda ps: (ps[0].uid, ps[1].uid),
            )
        )
        if not kept:
            raise DiagramError("decomposition with no non-false primes")
        key = (DECOMP, vtree_id, tuple((p.uid, s.uid) for p, s in kept))
        return self._intern(key, DECOMP, pairs=kept, vtree_id=vtree_id)


def iter_sdd_nodes(root: SddNode):
    """Distinct nodes reachable from the root, children first."""
    seen = set()
    order = []

    def walk(node: SddNode) -> None:
        if node.uid in seen:
            return
        seen.add(node.uid)
        for p, s in node.pairs:
            walk(p)
            walk(s)
        order.append(node)

    walk(root)
    return order


def sdd_size(root: SddNode) -> int:
    """Terminals count one, a decomposition counts its number of pairs; shared
    nodes are counted once."""
    total = 0
    for node in iter_sdd_nodes(root):
        total += len(node.pairs) if node.kind == DECOMP else 1
    return total


def evaluate_sdd(root: SddNode, delta) -> bool:
    memo: dict[int, bool] = {}

    def value(node: SddNode) -> bool:
        got = memo.get(node.uid)
        if got is not None:
            return got
        if node.kind == FALSE:
            result = False
        elif node.kind == TRUE:
            result = True
        elif node.kind == LITERAL:
            if node.var not in delta:
                raise DiagramError(f"assignment missing variable {node.var!r}")
            result = bool(delta[node.var]) == node.polarity
        else:
            result = any(value(p) and value(s) for p, s in node.pairs)
        memo[node.uid] = result
        return result

    return value(root)


@dataclass
class StateSddMapping:
    """For one decomposition node: each procedure state to the diagram deciding
    `the run lands in this state`; exactly one image is true per assignment.

    Keys are procedure states, except for context mappings where they are
    context-assignment bit tuples; `order` fixes a deterministic iteration.
    """

    images: dict
    vtree_id: int
    order: tuple

    def states(self):
        return self.order


def context_assignment_mapping(
    builder: SddBuilder, ctx_vars: tuple[DecisionVariable, ...]
) -> StateSddMapping:
    """One diagram per context assignment, true exactly on that assignment,
    over a right-linear v-tree of the context variables."""
    if not ctx_vars:
        raise DiagramError("context mapping needs at least one variable")
    leaves = [builder.vtree.leaf(v) for v in ctx_vars]
    spine = leaves[-1]
    for vid in reversed(leaves[:-1]):
        spine = builder.vtree.inner(vid, spine)

    # vtree node respected by the suffix starting at position i
    suffix_vid = [spine]
    for _ in range(len(ctx_vars) - 1):
        suffix_vid.append(builder.vtree.right[suffix_vid[-1]])

    k = len(ctx_vars)
    images: dict[tuple, SddNode] = {}
    cache: dict[tuple, SddNode] = {}

    def build(i: int, bits: tuple) -> SddNode:
        got = cache.get((i, bits[i:]))
        if got is not None:
            return got
        var = ctx_vars[i]
        pos = builder.literal(var, True)
        neg = builder.literal(var, False)
        if i == k - 1:
            node = pos if bits[i] else neg
        elif i == k - 2:
            last = builder.literal(ctx_vars[i + 1], bits[i + 1] == 1)
            if bits[i]:
                pairs = [(pos, last), (neg, builder.false)]
            else:
                pairs = [(pos, builder.false), (neg, last)]
            node = builder.decomposition(suffix_vid[i], pairs)
        else:
            rest = build(i + 1, bits)
            if bits[i]:
                pairs = [(pos, rest), (neg, builder.false)]
            else:
                pairs = [(pos, builder.false), (neg, rest)]
            node = builder.decomposition(suffix_vid[i], pairs)
        cache[(i, bits[i:])] = node
        return node

    order = tuple(itertools.product((0, 1), repeat=k))
    for bits in order:
        images[bits] = build(0, bits)
    return StateSddMapping(images, spine, order)


def state_table_mapping(
    builder: SddBuilder,
    g_a: StateSddMapping,
    g_b: StateSddMapping,
    table,
    out_states,
    dummy_tag: str,
) -> StateSddMapping:
    """Combine two mappings through a transition table.

    `table(a, b)` gives the state reached from a-state and b-state; the result
    maps each output state c to a diagram true exactly when the combination
    lands in c. Respects node(t_a, node(t_b, dummy)).
    """
    pad = builder.vtree.leaf(dv_dummy(dummy_tag))
    right_vid = builder.vtree.inner(g_b.vtree_id, pad)
    out_vid = builder.vtree.inner(g_a.vtree_id, right_vid)

    a_states = g_a.states()
    b_states = g_b.states()
    hits: dict[object, dict[object, set]] = {}
    for a in a_states:
        for b in b_states:
            c = table(a, b)
            hits.setdefault(c, {}).setdefault(a, set()).add(b)
    unknown = set(hits) - set(out_states)
    if unknown:
        raise DiagramError(f"transition image outside declared states: {unknown}")

    beta_cache: dict[tuple, SddNode] = {}

    def beta(selected: set) -> SddNode:
        key = tuple(b in selected for b in b_states)
        node = beta_cache.get(key)
        if node is None:
            pairs = [
                (g_b.images[b], builder.true if b in selected else builder.false)
                for b in b_states
            ]
            node = builder.decomposition(right_vid, pairs)
            beta_cache[key] = node
        return node

    images = {}
    out_order = tuple(out_states)  # caller-fixed deterministic order
    for c in out_order:
        selected_by_a = hits.get(c, {})
        pairs = [(g_a.images[a], beta(selected_by_a.get(a, set()))) for a in a_states]
        images[c] = builder.decomposition(out_vid, pairs)
    return StateSddMapping(images, out_vid, out_order)


class SddCompilation:
    """Result of compiling a formula into a structured diagram."""

    def __init__(self, phi, g, nice, coloring, builder, root, mappings, reachable, legend):
        self.kind = "sdd"
        self.formula = phi
        self.graph = g
        self.nice = nice
        self.coloring = coloring
        self.builder = builder
        self.root: SddNode = root
        self.node_mappings: dict[int, StateSddMapping] = mappings
        self.reachable: ReachableSets = reachable
        self.legend: tuple[DecisionVariable, ...] = legend

    @property
    def vtree(self) -> VTree:
        return self.builder.vtree

    @property
    def vtree_root(self) -> int:
        return self.root.vtree_id

    @property
    def dummy_vars(self) -> tuple[DecisionVariable, ...]:
        return tuple(v for v in self.vtree.all_variables() if v.kind == "dummy")

    def size(self) -> int:
        return sdd_size(self.root)

    def evaluate(self, delta) -> bool:
        return evaluate_sdd(self.root, delta)


def compile_sdd(
    phi: Formula, g: Graph, t: NiceTreeDecomposition, coloring: dict[int, int]
) -> SddCompilation:
    """Bottom-up construction over the nice decomposition: every node gets a
    state-to-diagram mapping; the root mapping collapses to one diagram that is
    true exactly on the accepted assignments."""
    if not phi.is_core:
        raise DiagramError("formula must be desugared before compilation")
    width = t.width()
    space = decision_space(phi, width)
    plan = forget_plan(phi, g, t, coloring)
    reach = reachable_states(space, t, plan)
    builder = SddBuilder()
    mappings: dict[int, StateSddMapping] = {}

    for nid in t.postorder():
        node = t.nodes[nid]
        if node.kind == LEAF:
            vid = builder.vtree.leaf(dv_dummy(f"leaf{nid}"))
            mappings[nid] = StateSddMapping(
                {space.initial: builder.true}, vid, (space.initial,)
            )
        elif node.kind == INTRODUCE:
            mappings[nid] = mappings[node.children[0]]
        elif node.kind == FORGET:
            ctx_vars = plan[nid].context.variables
            if ctx_vars:
                g_b = context_assignment_mapping(builder, ctx_vars)
            else:
                vid = builder.vtree.leaf(dv_dummy(f"ctx{nid}"))
                g_b = StateSddMapping({(): builder.true}, vid, ((),))
            table = reach.forget_tables[nid]

            def forget_table(a, bits, _table=table):
                # context assignment indices follow binary-counter order
                idx = 0
                for bit in bits:
                    idx = idx * 2 + bit
                return _table[(a, idx)]

            mappings[nid] = state_table_mapping(
                builder,
                mappings[node.children[0]],
                g_b,
                forget_table,
                reach.per_node[nid],
                f"forget{nid}",
            )
        else:
            table = reach.join_tables[nid]
            mappings[nid] = state_table_mapping(
                builder,
                mappings[node.children[0]],
                mappings[node.children[1]],
                lambda a, b, _table=table: _table[(a, b)],
                reach.per_node[nid],
                f"join{nid}",
            )

    g_root = mappings[t.root]
    pad = builder.vtree.leaf(dv_dummy("root"))
    top_vid = builder.vtree.inner(g_root.vtree_id, pad)
    pairs = [
        (g_root.images[s], builder.true if space.is_accepting(s) else builder.false)
        for s in g_root.states()
    ]
    root = builder.decomposition(top_vid, pairs)
    legend = decision_variables(phi, g)
    return SddCompilation(
        phi, g, t, coloring, builder, root, mappings, reach, legend
    )


def vtree_respected(root: SddNode, vtree: VTree) -> bool:
    """Structural check: primes live in the left subtree of their decomposition's
    v-tree node, subs in the right subtree."""
    for node in iter_sdd_nodes(root):
        if node.kind != DECOMP:
            continue
        left = vtree.left[node.vtree_id]
        right = vtree.right[node.vtree_id]
        for p, s in node.pairs:
            if p.vtree_id is not None and not vtree.contains(left, p.vtree_id):
                return False
            if s.vtree_id is not None and not vtree.contains(right, s.vtree_id):
                return False
    return True

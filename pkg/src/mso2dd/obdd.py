"""Ordered binary decision diagrams and the path-decomposition compiler.

The compiler grows a multi-terminal diagram whose leaves carry procedure
states: each forget node substitutes every leaf by a complete tree over the
node's context variables, relabelled with the transition result; identical
subtrees are shared by hash-consing. The final step maps accepting terminals
to 1 and reduces.
"""

from __future__ import annotations

from .assignment import DecisionVariable, decision_variables
from .decomposition import FORGET, JOIN, NiceTreeDecomposition
from .errors import DiagramError
from .graph import Graph
from .mso import Formula
from .states import decision_space, forget_plan, reachable_states


class ObddNode:
    __slots__ = ("uid", "level", "label", "lo", "hi")

    def __init__(self, uid, level=None, label=None, lo=None, hi=None):
        self.uid = uid
        self.level = level
        self.label = label
        self.lo = lo
        self.hi = hi

    @property
    def is_leaf(self) -> bool:
        return self.level is None

    def __repr__(self) -> str:
        if self.is_leaf:
            return f"<leaf {self.label!r}>"
        return f"<dec v{self.level} uid={self.uid}>"


class ObddSpace:
    """Node store for one variable order; all diagrams built here share nodes."""

    def __init__(self, order: tuple[DecisionVariable, ...]) -> None:
        self.order = tuple(order)
        self.level_of = {v: i for i, v in enumerate(self.order)}
        if len(self.level_of) != len(self.order):
            raise DiagramError("variable order contains duplicates")
        self._nodes: list[ObddNode] = []
        self._leaves: dict[object, ObddNode] = {}
        self._decisions: dict[tuple, ObddNode] = {}

    def leaf(self, label) -> ObddNode:
        node = self._leaves.get(label)
        if node is None:
            node = ObddNode(len(self._nodes), label=label)
            self._nodes.append(node)
            self._leaves[label] = node
        return node

    def decision(self, level: int, lo: ObddNode, hi: ObddNode) -> ObddNode:
        """Interned decision node; keeps redundant (lo == hi) nodes."""
        key = (level, lo.uid, hi.uid)
        node = self._decisions.get(key)
        if node is None:
            node = ObddNode(len(self._nodes), level=level, lo=lo, hi=hi)
            self._nodes.append(node)
            self._decisions[key] = node
        return node

    def reduced(self, level: int, lo: ObddNode, hi: ObddNode) -> ObddNode:
        return lo if lo is hi else self.decision(level, lo, hi)

    def constant(self, bit: int) -> "Obdd":
        return Obdd(self, self.leaf(int(bit)))

    def literal(self, var: DecisionVariable, polarity: bool = True) -> "Obdd":
        zero, one = self.leaf(0), self.leaf(1)
        lo, hi = (zero, one) if polarity else (one, zero)
        return Obdd(self, self.decision(self.level_of[var], lo, hi))


class Obdd:
    def __init__(self, space: ObddSpace, root: ObddNode) -> None:
        self.kind = "obdd"
        self.space = space
        self.root = root

    @property
    def order(self) -> tuple[DecisionVariable, ...]:
        return self.space.order

    def nodes(self) -> list[ObddNode]:
        seen = {}
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n.uid in seen:
                continue
            seen[n.uid] = n
            if not n.is_leaf:
                stack.extend((n.lo, n.hi))
        return [seen[uid] for uid in sorted(seen)]

    def level_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for n in self.nodes():
            if not n.is_leaf:
                counts[n.level] = counts.get(n.level, 0) + 1
        return counts

    def is_ordered(self) -> bool:
        for n in self.nodes():
            if n.is_leaf:
                continue
            for child in (n.lo, n.hi):
                if not child.is_leaf and child.level <= n.level:
                    return False
        return True


def obdd_size(b: Obdd) -> int:
    """Distinct reachable nodes, decisions and terminals alike."""
    return len(b.nodes())


def evaluate_obdd(b: Obdd, delta) -> bool:
    node = b.root
    while not node.is_leaf:
        var = b.order[node.level]
        if var not in delta:
            raise DiagramError(f"assignment missing variable {var!r}")
        node = node.hi if delta[var] else node.lo
    return bool(node.label)


def reduce_obdd(b: Obdd) -> Obdd:
    """Canonical form for the given order: no redundant decisions, all shared."""
    memo: dict[int, ObddNode] = {}

    def walk(node: ObddNode) -> ObddNode:
        got = memo.get(node.uid)
        if got is not None:
            return got
        if node.is_leaf:
            out = b.space.leaf(node.label)
        else:
            out = b.space.reduced(node.level, walk(node.lo), walk(node.hi))
        memo[node.uid] = out
        return out

    return Obdd(b.space, walk(b.root))


def obdd_apply(a: Obdd, b: Obdd, op) -> Obdd:
    """Combine two diagrams pointwise with a binary boolean operator; the result
    is reduced. Both inputs must share one variable order."""
    if a.order != b.order:
        raise DiagramError("operands respect different variable orders")
    space = a.space
    if b.space is not space:
        b = _import_into(space, b)
    memo: dict[tuple[int, int], ObddNode] = {}

    def walk(x: ObddNode, y: ObddNode) -> ObddNode:
        key = (x.uid, y.uid)
        got = memo.get(key)
        if got is not None:
            return got
        if x.is_leaf and y.is_leaf:
            out = space.leaf(int(op(bool(x.label), bool(y.label))))
        else:
            levels = [n.level for n in (x, y) if not n.is_leaf]
            level = min(levels)
            x0, x1 = (x.lo, x.hi) if (not x.is_leaf and x.level == level) else (x, x)
            y0, y1 = (y.lo, y.hi) if (not y.is_leaf and y.level == level) else (y, y)
            out = space.reduced(level, walk(x0, y0), walk(x1, y1))
        memo[key] = out
        return out

    return Obdd(space, walk(a.root, b.root))


def _import_into(space: ObddSpace, b: Obdd) -> Obdd:
    memo: dict[int, ObddNode] = {}

    def walk(node: ObddNode) -> ObddNode:
        got = memo.get(node.uid)
        if got is not None:
            return got
        if node.is_leaf:
            out = space.leaf(node.label)
        else:
            out = space.decision(node.level, walk(node.lo), walk(node.hi))
        memo[node.uid] = out
        return out

    return Obdd(space, walk(b.root))


class ObddCompilation:
    def __init__(self, phi, g, nice, coloring, obdd, reachable, legend):
        self.kind = "obdd"
        self.formula = phi
        self.graph = g
        self.nice = nice
        self.coloring = coloring
        self.obdd: Obdd = obdd
        self.reachable = reachable
        self.legend: tuple[DecisionVariable, ...] = legend

    @property
    def root(self) -> ObddNode:
        return self.obdd.root

    @property
    def order(self) -> tuple[DecisionVariable, ...]:
        return self.obdd.order

    def size(self) -> int:
        return obdd_size(self.obdd)

    def evaluate(self, delta) -> bool:
        return evaluate_obdd(self.obdd, delta)


def compile_obdd(
    phi: Formula, g: Graph, t: NiceTreeDecomposition, coloring: dict[int, int]
) -> ObddCompilation:
    """Compile along a nice path decomposition; the variable order concatenates
    the forget-node contexts from the leaf up to the root.

    Every forget step turns each distinct procedure state into a complete tree
    over the step's context variables whose branches continue with the successor
    state; hash-consing merges equal successors, and the accepting test labels
    the bottom. One reduction pass finishes the diagram.
    """
    if not phi.is_core:
        raise DiagramError("formula must be desugared before compilation")
    for n in t.nodes.values():
        if n.kind == JOIN:
            raise DiagramError("path decomposition required: join node present")
    space_dp = decision_space(phi, t.width())
    plan = forget_plan(phi, g, t, coloring)
    reach = reachable_states(space_dp, t, plan)

    chain = [
        nid for nid in t.postorder() if t.nodes[nid].kind == FORGET
    ]  # a path decomposition's postorder runs leaf upward
    order: list[DecisionVariable] = []
    bases = []
    for nid in chain:
        bases.append(len(order))
        order.extend(plan[nid].context.variables)
    space = ObddSpace(tuple(order))

    memo: dict[tuple, ObddNode] = {}

    def continue_from(step: int, state) -> ObddNode:
        """Sub-diagram over the contexts of steps step.. given the entering state."""
        got = memo.get((step, state))
        if got is not None:
            return got
        if step == len(chain):
            out = space.leaf(1 if space_dp.is_accepting(state) else 0)
        else:
            nid = chain[step]
            k = len(plan[nid].context.variables)
            table = reach.forget_tables[nid]

            def expand(pos: int, idx: int) -> ObddNode:
                if pos == k:
                    return continue_from(step + 1, table[(state, idx)])
                return space.decision(
                    bases[step] + pos,
                    expand(pos + 1, idx * 2),
                    expand(pos + 1, idx * 2 + 1),
                )

            out = expand(0, 0)
        memo[(step, state)] = out
        return out

    obdd = reduce_obdd(Obdd(space, continue_from(0, space_dp.initial)))
    legend = decision_variables(phi, g)
    if set(order) != set(legend):
        raise DiagramError("context variables do not cover the decision universe")
    return ObddCompilation(phi, g, t, coloring, obdd, reach, legend)

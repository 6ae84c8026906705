"""Per-subformula state machines driving the decomposition dynamic program.

Each formula constructor gets a space with an initial state, an acceptance
predicate, and two transition functions: `forget` consumes the decision bits
tied to the vertex/edges dropped at a forget node, `join` combines the states
of the two subtrees below a join node. Spaces depend only on the formula and
the decomposition width, never on the graph.

States are hash-consed values with identity semantics, so the set-valued
states of quantifier blocks stay cheap to hash and compare.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .assignment import dv_eq, dv_mem
from .decomposition import (
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    Context,
    NiceTreeDecomposition,
    context_of,
    forget_ownership,
)
from .errors import Mso2ddError
from .graph import Edge, Graph
from .mso import Adj, And, Eq, Exists, Formula, In, Not, Sort, Var


class State:
    """Interned state value; equality and hashing are by identity."""

    __slots__ = ("uid", "tag", "payload", "_key")

    def __init__(self, uid: int, tag: str, payload) -> None:
        self.uid = uid
        self.tag = tag
        self.payload = payload
        self._key = None

    def __hash__(self) -> int:
        return self.uid

    def __repr__(self) -> str:
        return f"<state {state_key(self)}>"


_store: dict = {}


def _intern(key, tag, payload) -> State:
    state = _store.get(key)
    if state is None:
        state = State(len(_store), tag, payload)
        _store[key] = state
    return state


INIT = _intern(("atom", "INIT"), "atom", "INIT")
TRUE = _intern(("atom", "TRUE"), "atom", "TRUE")
BOT = _intern(("atom", "BOT"), "atom", "BOT")


def color_state(i: int) -> State:
    return _intern(("color", i), "color", i)


def pair_state(left: State, right: State) -> State:
    return _intern(("pair", left.uid, right.uid), "pair", (left, right))


def bits_state(bits: tuple) -> State:
    return _intern(("bits", bits), "bits", bits)


def set_state(members) -> State:
    """Members are (inner state, bits tuple) pairs."""
    canon = tuple(sorted(set(members), key=lambda m: (m[0].uid, m[1])))
    return _intern(("set", tuple((s.uid, b) for s, b in canon)), "set", canon)


def state_key(s: State) -> str:
    """Deterministic structural encoding, used to order states canonically."""
    if s._key is None:
        if s.tag == "atom":
            key = {"INIT": "I", "TRUE": "T", "BOT": "X"}[s.payload]
        elif s.tag == "color":
            key = f"c{s.payload:03d}"
        elif s.tag == "bits":
            key = "b" + "".join(map(str, s.payload))
        elif s.tag == "pair":
            key = f"P({state_key(s.payload[0])},{state_key(s.payload[1])})"
        else:
            parts = sorted(
                f"({state_key(inner)},{''.join(map(str, bits))})"
                for inner, bits in s.payload
            )
            key = "S{" + ";".join(parts) + "}"
        s._key = key
    return s._key


@dataclass(frozen=True)
class ForgetEdge:
    edge: Edge
    other: int
    other_color: int


@dataclass(frozen=True)
class ForgetInfo:
    """Everything a forget transition may consult about the node."""

    vertex: int
    vertex_color: int
    edges: tuple[ForgetEdge, ...]
    context: Context


class StateSpace:
    initial: State = None

    def is_accepting(self, s: State) -> bool:
        raise NotImplementedError

    def forget(self, s: State, info: ForgetInfo, delta) -> State:
        raise NotImplementedError

    def join(self, left: State, right: State) -> State:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


class EqualitySpace(StateSpace):
    initial = INIT

    def __init__(self, left: Var, right: Var) -> None:
        self.left = left
        self.right = right
        self.is_vertex = left.sort.is_vertex

    def is_accepting(self, s) -> bool:
        return s is TRUE

    def forget(self, s, info, delta):
        if s is TRUE:
            return TRUE
        if self.is_vertex:
            v = info.vertex
            if delta[dv_eq(self.left, v)] and delta[dv_eq(self.right, v)]:
                return TRUE
            return INIT
        for fe in info.edges:
            if delta[dv_eq(self.left, fe.edge.id)] and delta[dv_eq(self.right, fe.edge.id)]:
                return TRUE
        return INIT

    def join(self, left, right):
        return TRUE if (left is TRUE or right is TRUE) else INIT

    def describe(self) -> str:
        return f"eq({self.left.name},{self.right.name})"


class MembershipSpace(StateSpace):
    initial = INIT

    def __init__(self, element: Var, container: Var) -> None:
        self.element = element
        self.container = container
        self.is_vertex = element.sort.is_vertex

    def is_accepting(self, s) -> bool:
        return s is TRUE

    def forget(self, s, info, delta):
        if s is TRUE:
            return TRUE
        if self.is_vertex:
            v = info.vertex
            if delta[dv_eq(self.element, v)] and delta[dv_mem(self.container, v)]:
                return TRUE
            return INIT
        for fe in info.edges:
            e = fe.edge.id
            if delta[dv_eq(self.element, e)] and delta[dv_mem(self.container, e)]:
                return TRUE
        return INIT

    def join(self, left, right):
        return TRUE if (left is TRUE or right is TRUE) else INIT

    def describe(self) -> str:
        return f"in({self.element.name},{self.container.name})"


class AdjacencySpace(StateSpace):
    """Endpoint checks may have to wait until the other endpoint is forgotten;
    its color is parked in the state meanwhile."""

    initial = INIT

    # joins pairing two non-INIT states are unreachable on consistent runs;
    # instrumented so tests can assert that
    impossible_join_hits = 0

    def __init__(self, vertex: Var, edge: Var, width: int) -> None:
        self.vertex = vertex
        self.edge = edge
        self.width = width

    def is_accepting(self, s) -> bool:
        return s is TRUE

    def forget(self, s, info, delta):
        if s is TRUE:
            return TRUE
        if s.tag == "color":
            if info.vertex_color == s.payload:
                return TRUE if delta[dv_eq(self.vertex, info.vertex)] else INIT
            return s
        x_here = delta[dv_eq(self.vertex, info.vertex)]
        for fe in info.edges:
            if delta[dv_eq(self.edge, fe.edge.id)]:
                return TRUE if x_here else color_state(fe.other_color)
        return INIT

    def join(self, left, right):
        if left is INIT:
            return right
        if right is INIT:
            return left
        AdjacencySpace.impossible_join_hits += 1
        return INIT  # unconstrained cell, any value works

    def describe(self) -> str:
        return f"adj({self.vertex.name},{self.edge.name},w={self.width})"


class NegationSpace(StateSpace):
    def __init__(self, inner: StateSpace) -> None:
        self.inner = inner
        self.initial = inner.initial

    def is_accepting(self, s) -> bool:
        return not self.inner.is_accepting(s)

    def forget(self, s, info, delta):
        return self.inner.forget(s, info, delta)

    def join(self, left, right):
        return self.inner.join(left, right)

    def describe(self) -> str:
        return f"not({self.inner.describe()})"


class ConjunctionSpace(StateSpace):
    def __init__(self, left: StateSpace, right: StateSpace) -> None:
        self.left = left
        self.right = right
        self.initial = pair_state(left.initial, right.initial)

    def is_accepting(self, s) -> bool:
        l, r = s.payload
        return self.left.is_accepting(l) and self.right.is_accepting(r)

    def forget(self, s, info, delta):
        l, r = s.payload
        return pair_state(
            self.left.forget(l, info, delta), self.right.forget(r, info, delta)
        )

    def join(self, a, b):
        al, ar = a.payload
        bl, br = b.payload
        return pair_state(self.left.join(al, bl), self.right.join(ar, br))

    def describe(self) -> str:
        return f"and({self.left.describe()},{self.right.describe()})"


def all_consistent_extensions(bound_vars, delta, bits, info: ForgetInfo):
    """All ways to extend a context assignment with values for the bound
    variables at one forget node.

    Object variables may take the forgotten vertex (or one forgotten edge) if
    their bit is still clear; set variables branch over membership of every
    forgotten object. Returns (extended delta, updated bits) pairs.
    """
    object_index = {}
    for var in bound_vars:
        if var.sort.is_object:
            object_index[var] = len(object_index)
    out = [(delta, bits)]
    for var in bound_vars:
        nxt = []
        if var.sort is Sort.VERTEX_OBJECT:
            key = dv_eq(var, info.vertex)
            i = object_index[var]
            for d, b in out:
                skip = dict(d)
                skip[key] = 0
                nxt.append((skip, b))
                if b[i] == 0:
                    take = dict(d)
                    take[key] = 1
                    nxt.append((take, b[:i] + (1,) + b[i + 1 :]))
        elif var.sort is Sort.EDGE_OBJECT:
            i = object_index[var]
            for d, b in out:
                skip = dict(d)
                for fe in info.edges:
                    skip[dv_eq(var, fe.edge.id)] = 0
                nxt.append((skip, b))
                if b[i] == 0:
                    for fe in info.edges:
                        take = dict(d)
                        for other in info.edges:
                            take[dv_eq(var, other.edge.id)] = (
                                1 if other.edge.id == fe.edge.id else 0
                            )
                        nxt.append((take, b[:i] + (1,) + b[i + 1 :]))
        elif var.sort is Sort.VERTEX_SET:
            key = dv_mem(var, info.vertex)
            for d, b in out:
                for bit in (0, 1):
                    ext = dict(d)
                    ext[key] = bit
                    nxt.append((ext, b))
        else:
            edge_keys = [dv_mem(var, fe.edge.id) for fe in info.edges]
            for d, b in out:
                for pattern in itertools.product((0, 1), repeat=len(edge_keys)):
                    ext = dict(d)
                    for key, bit in zip(edge_keys, pattern):
                        ext[key] = bit
                    nxt.append((ext, b))
        out = nxt
    return out


class QuantifierSpace(StateSpace):
    """Existential block: states are sets of (inner state, assigned-bits) pairs,
    one per way of instantiating the bound variables with already-forgotten
    objects."""

    def __init__(self, bound_vars: tuple[Var, ...], inner: StateSpace, width: int) -> None:
        self.bound_vars = bound_vars
        self.inner = inner
        self.width = width
        self.n_object = sum(1 for v in bound_vars if v.sort.is_object)
        zeros = (0,) * self.n_object
        self.initial = set_state([(inner.initial, zeros)])
        self._ones = (1,) * self.n_object
        # per (node, context assignment, member) transition results
        self._forget_memo: dict = {}
        self._join_memo: dict = {}

    def is_accepting(self, s) -> bool:
        return any(
            bits == self._ones and self.inner.is_accepting(inner)
            for inner, bits in s.payload
        )

    def forget(self, s, info, delta):
        delta_key = (info.context.node, frozenset(delta.items()))
        memo = self._forget_memo
        result = set()
        for inner, bits in s.payload:
            key = (delta_key, inner, bits)
            got = memo.get(key)
            if got is None:
                got = tuple(
                    (self.inner.forget(inner, info, ext), new_bits)
                    for ext, new_bits in all_consistent_extensions(
                        self.bound_vars, delta, bits, info
                    )
                )
                memo[key] = got
            result.update(got)
        return set_state(result)

    def join(self, left, right):
        key = (left, right)
        got = self._join_memo.get(key)
        if got is not None:
            return got
        result = set()
        for inner_l, bl in left.payload:
            for inner_r, br in right.payload:
                if all(x & y == 0 for x, y in zip(bl, br)):
                    merged = tuple(x | y for x, y in zip(bl, br))
                    result.add((self.inner.join(inner_l, inner_r), merged))
        out = set_state(result)
        self._join_memo[key] = out
        return out

    def describe(self) -> str:
        vs = ",".join(f"{v.name}:{v.sort.value}" for v in self.bound_vars)
        return f"exists[{vs}]({self.inner.describe()})"


class ConsistencySpace(StateSpace):
    """Tracks, per free object variable, whether it has received a value; a second
    value or a missing one at the root rejects the whole assignment."""

    def __init__(self, object_vars: tuple[Var, ...]) -> None:
        self.object_vars = object_vars
        self.initial = bits_state((0,) * len(object_vars))
        self._ones = (1,) * len(object_vars)

    def is_accepting(self, s) -> bool:
        return s is not BOT and s.payload == self._ones

    def forget(self, s, info, delta):
        if s is BOT:
            return BOT
        counts = list(s.payload)
        for i, var in enumerate(self.object_vars):
            if var.sort is Sort.VERTEX_OBJECT:
                hits = delta[dv_eq(var, info.vertex)]
            else:
                hits = sum(delta[dv_eq(var, fe.edge.id)] for fe in info.edges)
            counts[i] += hits
            if counts[i] > 1:
                return BOT
        return bits_state(tuple(counts))

    def join(self, left, right):
        if left is BOT or right is BOT:
            return BOT
        if any(x & y for x, y in zip(left.payload, right.payload)):
            return BOT
        return bits_state(tuple(x | y for x, y in zip(left.payload, right.payload)))

    def describe(self) -> str:
        return f"consistency[{','.join(v.name for v in self.object_vars)}]"


def build_state_space(expr, width: int) -> StateSpace:
    """Recursive state-space construction over the core connectives."""
    if isinstance(expr, Eq):
        return EqualitySpace(expr.left, expr.right)
    if isinstance(expr, In):
        return MembershipSpace(expr.element, expr.container)
    if isinstance(expr, Adj):
        return AdjacencySpace(expr.vertex, expr.edge, width)
    if isinstance(expr, Not):
        return NegationSpace(build_state_space(expr.body, width))
    if isinstance(expr, And):
        return ConjunctionSpace(
            build_state_space(expr.left, width), build_state_space(expr.right, width)
        )
    if isinstance(expr, Exists):
        return QuantifierSpace(
            expr.variables, build_state_space(expr.body, width), width
        )
    raise Mso2ddError(f"formula is not in core form: {type(expr).__name__}")


def with_consistency(space: StateSpace, phi: Formula) -> ConjunctionSpace:
    """Product with the consistency checker over phi's free object variables."""
    return ConjunctionSpace(space, ConsistencySpace(phi.free_object_vars))


def decision_space(phi: Formula, width: int) -> ConjunctionSpace:
    """The consistency-checked space the compilers and the runner operate on."""
    if not phi.is_core:
        raise Mso2ddError("formula must be desugared first")
    return with_consistency(build_state_space(phi.root, width), phi)


def forget_plan(
    phi: Formula, g: Graph, t: NiceTreeDecomposition, coloring: dict[int, int]
) -> dict[int, ForgetInfo]:
    """Precompute per-forget-node transition data (colors, edges, contexts)."""
    forget_ownership(g, t)  # validates uniqueness
    plan = {}
    for nid in t.forget_nodes():
        ctx = context_of(phi, g, t, nid)
        edges = tuple(
            ForgetEdge(e, e.other(ctx.vertex), coloring[e.other(ctx.vertex)])
            for e in ctx.edges
        )
        plan[nid] = ForgetInfo(ctx.vertex, coloring[ctx.vertex], edges, ctx)
    return plan


def node_states(
    space: StateSpace, t: NiceTreeDecomposition, plan: dict[int, ForgetInfo], delta
) -> dict[int, State]:
    """Run the procedure once, recording the state assigned to every node."""
    states: dict[int, State] = {}
    for nid in t.postorder():
        n = t.nodes[nid]
        if n.kind == LEAF:
            states[nid] = space.initial
        elif n.kind == INTRODUCE:
            states[nid] = states[n.children[0]]
        elif n.kind == FORGET:
            states[nid] = space.forget(states[n.children[0]], plan[nid], delta)
        elif n.kind == JOIN:
            states[nid] = space.join(states[n.children[0]], states[n.children[1]])
        else:
            raise Mso2ddError(f"unknown node kind {n.kind!r}")
    return states


def run_decision_procedure(
    phi: Formula, g: Graph, t: NiceTreeDecomposition, coloring: dict[int, int], delta
) -> bool:
    """Accept iff delta is consistent and encodes a model of phi on g."""
    space = decision_space(phi, t.width())
    plan = forget_plan(phi, g, t, coloring)
    states = node_states(space, t, plan, delta)
    return space.is_accepting(states[t.root])


def context_assignments(context: Context):
    """All assignments of the context's variables, in binary-counter order."""
    out = []
    for pattern in itertools.product((0, 1), repeat=len(context.variables)):
        out.append(dict(zip(context.variables, pattern)))
    return out


@dataclass
class ReachableSets:
    """Per-node reachable states plus the transition tables restricted to them.

    Forget tables are keyed by (child state, context assignment index) with
    assignment indices following `context_assignments` order; join tables by the
    pair of child states."""

    per_node: dict[int, tuple]
    all_states: tuple
    forget_tables: dict[int, dict]
    join_tables: dict[int, dict]

    @property
    def count(self) -> int:
        return len(self.all_states)


def dump_reachable_states(reach: "ReachableSets") -> str:
    """Diagnostic listing: per decomposition node, one canonical state encoding
    per line."""
    lines = []
    for nid in sorted(reach.per_node):
        lines.append(f"node {nid}")
        lines.extend(f"  {state_key(s)}" for s in reach.per_node[nid])
    return "\n".join(lines) + "\n"


def reachable_states(
    space: StateSpace, t: NiceTreeDecomposition, plan: dict[int, ForgetInfo]
) -> ReachableSets:
    """Per-node reachable state sets: the closure over every context assignment
    of every forget node, computed in one bottom-up pass."""
    per_node: dict[int, tuple] = {}
    forget_tables: dict[int, dict] = {}
    join_tables: dict[int, dict] = {}
    for nid in t.postorder():
        n = t.nodes[nid]
        if n.kind == LEAF:
            reached = {space.initial}
        elif n.kind == INTRODUCE:
            reached = set(per_node[n.children[0]])
        elif n.kind == FORGET:
            table = {}
            for s in per_node[n.children[0]]:
                for idx, delta in enumerate(context_assignments(plan[nid].context)):
                    table[(s, idx)] = space.forget(s, plan[nid], delta)
            forget_tables[nid] = table
            reached = set(table.values())
        else:
            table = {}
            for a in per_node[n.children[0]]:
                for b in per_node[n.children[1]]:
                    table[(a, b)] = space.join(a, b)
            join_tables[nid] = table
            reached = set(table.values())
        per_node[nid] = tuple(sorted(reached, key=state_key))
    union = set()
    for states in per_node.values():
        union.update(states)
    return ReachableSets(
        per_node, tuple(sorted(union, key=state_key)), forget_tables, join_tables
    )

"""Brute-force semantics, truth tables, diagram queries, and the vertex-cover
CNF family used by the lower-bound benchmark.

The truth-table helpers represent the set of satisfying assignments over an
ordered variable list as a single big integer: bit i gives the value on the
assignment whose j-th variable equals bit j of i. That makes exhaustive
diagram/oracle comparisons and partition checks cheap at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .assignment import (
    DecisionVariable,
    all_mso_assignments,
    decision_variables,
    dv_mem,
    encode_assignment,
    is_consistent,
)
from .errors import QueryError
from .graph import Graph
from .mso import (
    Adj,
    And,
    EdgePred,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    In,
    Nbr,
    Neq,
    Not,
    NotIn,
    Or,
    Sort,
    parse_formula,
)
from .obdd import Obdd, ObddSpace, obdd_apply
from .sdd import FALSE, LITERAL, TRUE, iter_sdd_nodes

DEFAULT_VARIABLE_CAP = 20
QUANTIFIER_BRANCH_CAP = 10**7


# -- recursive evaluation ------------------------------------------------------


def _domain(g: Graph, sort: Sort):
    if sort is Sort.VERTEX_OBJECT:
        return list(g.vertices())
    if sort is Sort.EDGE_OBJECT:
        return list(range(1, g.n_edges + 1))
    if sort is Sort.VERTEX_SET:
        base = list(g.vertices())
    else:
        base = list(range(1, g.n_edges + 1))
    return [
        frozenset(o for i, o in enumerate(base) if mask >> i & 1)
        for mask in range(1 << len(base))
    ]


def oracle_eval(phi: Formula, g: Graph, alpha) -> bool:
    """Textbook recursive evaluation; quantifiers enumerate the whole universe.
    Handles the surface sugar directly so pre- and post-desugar formulas can be
    compared."""
    return compile_oracle(phi, g)(dict(alpha))


def compile_oracle(phi: Formula, g: Graph):
    """Close the recursion over the graph once; the returned callable evaluates
    one assignment dict per call."""
    return _compile_eval(phi.root, g)


def _compile_eval(expr, g: Graph):
    if isinstance(expr, Adj):
        x, y, edges = expr.vertex, expr.edge, g.edges

        return lambda a: edges[a[y] - 1].incident_to(a[x])
    if isinstance(expr, Eq):
        x, y = expr.left, expr.right
        return lambda a: a[x] == a[y]
    if isinstance(expr, Neq):
        x, y = expr.left, expr.right
        return lambda a: a[x] != a[y]
    if isinstance(expr, In):
        x, s = expr.element, expr.container
        return lambda a: a[x] in a[s]
    if isinstance(expr, NotIn):
        x, s = expr.element, expr.container
        return lambda a: a[x] not in a[s]
    if isinstance(expr, EdgePred):
        e, u, v, edges = expr.edge, expr.left, expr.right, g.edges

        def edge_pred(a):
            edge = edges[a[e] - 1]
            return a[u] != a[v] and edge.incident_to(a[u]) and edge.incident_to(a[v])

        return edge_pred
    if isinstance(expr, Nbr):
        # some edge touches both arguments; for equal arguments that reads as
        # "has any incident edge", matching the desugared existential exactly
        u, v, edges = expr.left, expr.right, g.edges
        return lambda a: any(
            e.incident_to(a[u]) and e.incident_to(a[v]) for e in edges
        )
    if isinstance(expr, Not):
        body = _compile_eval(expr.body, g)
        return lambda a: not body(a)
    if isinstance(expr, And):
        left, right = _compile_eval(expr.left, g), _compile_eval(expr.right, g)
        return lambda a: left(a) and right(a)
    if isinstance(expr, Or):
        left, right = _compile_eval(expr.left, g), _compile_eval(expr.right, g)
        return lambda a: left(a) or right(a)
    if isinstance(expr, Implies):
        left, right = _compile_eval(expr.left, g), _compile_eval(expr.right, g)
        return lambda a: (not left(a)) or right(a)
    if isinstance(expr, (Exists, Forall)):
        body = _compile_eval(expr.body, g)
        domains = [(v, _domain(g, v.sort)) for v in expr.variables]
        if math.prod(len(d) for _, d in domains) > QUANTIFIER_BRANCH_CAP:
            raise QueryError("quantifier enumeration exceeds the cap")
        existential = isinstance(expr, Exists)

        def quantify(a, i=0):
            if i == len(domains):
                return body(a)
            var, domain = domains[i]
            for value in domain:
                a[var] = value
                if quantify(a, i + 1) == existential:
                    del a[var]
                    return existential
            a.pop(var, None)
            return not existential

        return quantify
    raise QueryError(f"unknown expression node {type(expr).__name__}")


# -- explicit model sets -------------------------------------------------------


@dataclass(frozen=True)
class ModelSet:
    """Explicit desk-scale model listing: bit tuples over the canonical
    decision-variable order."""

    variables: tuple[DecisionVariable, ...]
    assignments: frozenset

    @property
    def count(self) -> int:
        return len(self.assignments)

    def __contains__(self, bits) -> bool:
        return tuple(bits) in self.assignments

    def as_dicts(self):
        return [dict(zip(self.variables, bits)) for bits in sorted(self.assignments)]


def oracle_models(phi: Formula, g: Graph, cap: int = DEFAULT_VARIABLE_CAP) -> ModelSet:
    """Enumerate every assignment to the free variables, keep the models, and
    encode each as a consistent bit tuple."""
    dvars = decision_variables(phi, g)
    if len(dvars) > cap:
        raise QueryError(f"{len(dvars)} decision variables exceed the cap of {cap}")
    evaluate = compile_oracle(phi, g)
    found = set()
    for alpha in all_mso_assignments(phi, g):
        # quantifiers scratch only their own bound-variable keys
        if evaluate(alpha):
            delta = encode_assignment(alpha, phi, g)
            found.add(tuple(delta[d] for d in dvars))
    return ModelSet(dvars, frozenset(found))


# -- truth tables as big-integer bitsets ----------------------------------------


def variable_masks(n_vars: int) -> list[int]:
    """masks[i] has bit j set iff assignment index j sets variable i to 1."""
    total = 1 << n_vars
    masks = []
    for i in range(n_vars):
        block = ((1 << (1 << i)) - 1) << (1 << i)
        period = 1 << (i + 1)
        mask, filled = block, period
        while filled < total:
            mask |= mask << filled
            filled *= 2
        masks.append(mask)
    return masks


def truth_table_oracle(phi: Formula, g: Graph, dvars=None) -> int:
    """Bitset of assignments that are consistent and encode a model."""
    if dvars is None:
        dvars = decision_variables(phi, g)
    dvars = tuple(dvars)
    table = 0
    models = oracle_models(phi, g, cap=max(DEFAULT_VARIABLE_CAP, len(dvars)))
    index = {d: i for i, d in enumerate(dvars)}
    for bits in models.assignments:
        idx = 0
        for d, b in zip(models.variables, bits):
            idx |= b << index[d]
        table |= 1 << idx
    return table


def sdd_truth_tables(root, dvars) -> dict[int, int]:
    """Per-node bitsets over the given variable order; dummies never appear as
    literals so they need no columns."""
    n = len(dvars)
    ones = (1 << (1 << n)) - 1
    masks = dict(zip(dvars, variable_masks(n)))
    table: dict[int, int] = {}
    for node in iter_sdd_nodes(root):
        if node.kind == FALSE:
            bits = 0
        elif node.kind == TRUE:
            bits = ones
        elif node.kind == LITERAL:
            if node.var not in masks:
                raise QueryError(f"literal on unknown variable {node.var!r}")
            bits = masks[node.var] if node.polarity else ones ^ masks[node.var]
        else:
            bits = 0
            for p, s in node.pairs:
                bits |= table[p.uid] & table[s.uid]
        table[node.uid] = bits
    return table


def truth_table_sdd(root, dvars) -> int:
    return sdd_truth_tables(root, dvars)[root.uid]


def truth_table_obdd(b: Obdd, dvars) -> int:
    n = len(dvars)
    ones = (1 << (1 << n)) - 1
    masks = dict(zip(dvars, variable_masks(n)))
    table: dict[int, int] = {}

    def bits(node) -> int:
        got = table.get(node.uid)
        if got is not None:
            return got
        if node.is_leaf:
            out = ones if node.label else 0
        else:
            mask = masks[b.order[node.level]]
            out = (bits(node.lo) & (ones ^ mask)) | (bits(node.hi) & mask)
        table[node.uid] = out
        return out

    return bits(b.root)


def truth_table(diagram, dvars) -> int:
    if diagram.kind == "sdd":
        return truth_table_sdd(diagram.root, dvars)
    obdd = diagram if isinstance(diagram, Obdd) else diagram.obdd
    return truth_table_obdd(obdd, dvars)


# -- counting, enumeration, optimization ----------------------------------------


def _sdd_model_count(diagram) -> int:
    vtree = diagram.vtree
    memo: dict[int, int] = {}

    def scoped(node, vid: int) -> int:
        # models over the scope of vid; variables outside the node's own scope
        # are unconstrained
        base = count(node)
        own = 0 if node.vtree_id is None else vtree.n_vars[node.vtree_id]
        return base << (vtree.n_vars[vid] - own)

    def count(node) -> int:
        got = memo.get(node.uid)
        if got is not None:
            return got
        if node.kind == FALSE:
            out = 0
        elif node.kind in (TRUE, LITERAL):
            out = 1
        else:
            vid = node.vtree_id
            out = sum(
                scoped(p, vtree.left[vid]) * scoped(s, vtree.right[vid])
                for p, s in node.pairs
            )
        memo[node.uid] = out
        return out

    total = scoped(diagram.root, diagram.vtree_root)
    return total >> len(diagram.dummy_vars)


def _obdd_model_count(diagram) -> int:
    obdd = diagram if isinstance(diagram, Obdd) else diagram.obdd
    n = len(obdd.order)
    memo: dict[int, int] = {}

    def tail(node) -> int:
        """Models over variables from node's level to the end."""
        got = memo.get(node.uid)
        if got is not None:
            return got
        if node.is_leaf:
            out = 1 if node.label else 0
        else:
            out = 0
            for child in (node.lo, node.hi):
                child_level = n if child.is_leaf else child.level
                out += tail(child) << (child_level - node.level - 1)
        memo[node.uid] = out
        return out

    root_level = n if obdd.root.is_leaf else obdd.root.level
    return tail(obdd.root) << root_level


def model_count(diagram) -> int:
    """Satisfying assignments over the real decision variables only."""
    if diagram.kind == "sdd":
        return _sdd_model_count(diagram)
    return _obdd_model_count(diagram)


def is_satisfiable(diagram) -> bool:
    return model_count(diagram) > 0


def decode_bits(legend, delta):
    """Recover the variable assignment a consistent bit assignment encodes;
    works from the legend alone, so it applies to loaded diagrams too."""
    by_var: dict = {}
    for d in legend:
        by_var.setdefault(d.var, []).append(d)
    alpha = {}
    for var, dvs in by_var.items():
        if var.sort.is_object:
            hits = [d.obj for d in dvs if delta[d]]
            if len(hits) != 1:
                raise QueryError(f"inconsistent bits for object variable {var.name!r}")
            alpha[var] = hits[0]
        else:
            alpha[var] = frozenset(d.obj for d in dvs if delta[d])
    return alpha


def enumerate_models(diagram, limit: int):
    """Decoded models in lexicographic order of the legend bit string (first
    variable is the most significant bit). Dummy variables never influence
    evaluation, so each model appears once."""
    if limit < 1:
        raise QueryError("limit must be at least 1")
    legend = tuple(diagram.legend)
    n = len(legend)
    out = []
    for idx in range(1 << n):
        bits = tuple((idx >> (n - 1 - i)) & 1 for i in range(n))
        delta = dict(zip(legend, bits))
        if diagram.evaluate(delta):
            out.append(decode_bits(legend, delta))
            if len(out) >= limit:
                break
    return out


_INF = float("inf")


class _MinCard:
    """Shared cost model: forced variables are pinned, satisfied targets cost 1,
    unconstrained variables take their cheapest legal value."""

    def __init__(self, targets, forced):
        self.targets = set(targets)
        self.forced = dict(forced)

    def var_cost(self, var, value) -> float:
        if var in self.forced and self.forced[var] != value:
            return _INF
        return 1 if value and var in self.targets else 0

    def free_value(self, var) -> int:
        return self.forced.get(var, 0)

    def free_cost(self, var) -> float:
        return self.var_cost(var, self.free_value(var))


def min_cardinality_model(diagram, targets, forced=None):
    """A model minimizing the number of satisfied target variables.

    Bottom-up dynamic program over the diagram DAG: costs add across a
    decomposition's prime and sub (or a decision's branch and skipped levels)
    and minimize across alternatives. `forced` pins variables to fixed values
    (the vertex-cover demo pins all edge-set memberships to 0). Returns
    (minimum, decoded witness assignment).
    """
    cm = _MinCard(targets, forced or {})
    if diagram.kind == "sdd":
        cost, partial = _sdd_min_card(diagram, cm)
    else:
        cost, partial = _obdd_min_card(diagram, cm)
    if cost == _INF:
        raise QueryError("diagram is unsatisfiable under the given constraints")
    witness = {
        var: partial.get(var, cm.free_value(var)) for var in diagram.legend
    }
    return int(cost), decode_bits(diagram.legend, witness)


def _sdd_min_card(diagram, cm: _MinCard):
    vtree = diagram.vtree
    floor_memo: dict[int, float] = {}

    def scope_floor(vid: int) -> float:
        got = floor_memo.get(vid)
        if got is None:
            got = sum(
                cm.free_cost(var)
                for var in vtree.variables(vid)
                if var.kind != "dummy"
            )
            floor_memo[vid] = got
        return got

    memo: dict[int, tuple] = {}

    def scoped(node, vid: int):
        # lift a node to a wider scope: unconstrained variables take free values
        cost, partial = best(node)
        if cost == _INF:
            return cost, partial
        own_floor = scope_floor(node.vtree_id) if node.vtree_id is not None else 0
        return cost + scope_floor(vid) - own_floor, partial

    def best(node):
        got = memo.get(node.uid)
        if got is not None:
            return got
        if node.kind == FALSE:
            out = (_INF, {})
        elif node.kind == TRUE:
            out = (0, {})
        elif node.kind == LITERAL:
            value = 1 if node.polarity else 0
            out = (cm.var_cost(node.var, value), {node.var: value})
        else:
            vid = node.vtree_id
            out = (_INF, {})
            for p, s in node.pairs:
                pc, pb = scoped(p, vtree.left[vid])
                sc, sb = scoped(s, vtree.right[vid])
                if pc + sc < out[0]:
                    out = (pc + sc, pb | sb)
        memo[node.uid] = out
        return out

    return scoped(diagram.root, diagram.vtree_root)


def _obdd_min_card(diagram, cm: _MinCard):
    obdd = diagram if isinstance(diagram, Obdd) else diagram.obdd
    order = obdd.order
    n = len(order)

    def gap_cost(lo: int, hi: int) -> float:
        return sum(cm.free_cost(order[i]) for i in range(lo, hi))

    memo: dict[int, tuple] = {}

    def best(node):
        got = memo.get(node.uid)
        if got is not None:
            return got
        if node.is_leaf:
            out = (0, {}) if node.label else (_INF, {})
        else:
            var = order[node.level]
            out = (_INF, {})
            for value, child in ((0, node.lo), (1, node.hi)):
                step = cm.var_cost(var, value)
                if step == _INF:
                    continue
                child_level = n if child.is_leaf else child.level
                ccost, cbits = best(child)
                total = step + gap_cost(node.level + 1, child_level) + ccost
                if total < out[0]:
                    out = (total, {var: value} | cbits)
        memo[node.uid] = out
        return out

    root_level = n if obdd.root.is_leaf else obdd.root.level
    cost, bits = best(obdd.root)
    return cost + gap_cost(0, root_level), bits


# -- the covering formula and its CNF twin ---------------------------------------


@dataclass(frozen=True)
class Cnf:
    """Positive 3-clause per edge: cover it by an endpoint or by the edge itself.
    Variables are the membership decision variables of the covering formula."""

    variables: tuple[DecisionVariable, ...]
    clauses: tuple[tuple[int, int, int], ...]  # indices into variables


KAPPA_TEXT = (
    "free vset X_V; free eset X_E; "
    "forall edge e. forall vertex u. forall vertex v. "
    "((((u != v) & adj(u, e)) & adj(v, e)) -> (((u in X_V) | (v in X_V)) | (e in X_E)))"
)


def kappa_formula() -> Formula:
    """The covering formula over one vertex-set and one edge-set variable."""
    return parse_formula(KAPPA_TEXT)


def cnf_of_graph(g: Graph) -> Cnf:
    kappa = kappa_formula()
    x_v = next(v for v in kappa.free_vars if v.name == "X_V")
    x_e = next(v for v in kappa.free_vars if v.name == "X_E")
    variables = tuple(
        [dv_mem(x_v, v) for v in g.vertices()]
        + [dv_mem(x_e, e.id) for e in g.edges]
    )
    index = {d: i for i, d in enumerate(variables)}
    clauses = tuple(
        (
            index[dv_mem(x_v, e.u)],
            index[dv_mem(x_e, e.id)],
            index[dv_mem(x_v, e.v)],
        )
        for e in g.edges
    )
    return Cnf(variables, clauses)


def cnf_to_dimacs(cnf: Cnf) -> str:
    lines = [f"p cnf {len(cnf.variables)} {len(cnf.clauses)}"]
    lines.extend(
        " ".join(str(i + 1) for i in clause) + " 0" for clause in cnf.clauses
    )
    return "\n".join(lines) + "\n"


def cnf_truth_table(cnf: Cnf) -> int:
    masks = variable_masks(len(cnf.variables))
    ones = (1 << (1 << len(cnf.variables))) - 1
    table = ones
    for clause in cnf.clauses:
        clause_bits = 0
        for i in clause:
            clause_bits |= masks[i]
        table &= clause_bits
    return table


def cnf_to_obdd(cnf: Cnf, order=None) -> Obdd:
    """Clause-by-clause conjunction under the given (default: legend) order."""
    order = tuple(order) if order is not None else cnf.variables
    space = ObddSpace(order)
    result = space.constant(1)
    for clause in cnf.clauses:
        clause_dd = space.constant(0)
        for i in clause:
            clause_dd = obdd_apply(clause_dd, space.literal(cnf.variables[i]), lambda a, b: a or b)
        result = obdd_apply(result, clause_dd, lambda a, b: a and b)
    return result

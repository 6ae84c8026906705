import itertools

import pytest

from mso2dd import (
    clique,
    compile_sdd,
    decision_variables,
    desugar,
    evaluate_sdd,
    good_coloring,
    make_nice,
    min_fill_decomposition,
    parse_formula,
    sdd_size,
)
from mso2dd.assignment import dv_eq
from mso2dd.errors import DiagramError
from mso2dd.mso import Sort, Var
from mso2dd.oracle import (
    model_count,
    truth_table_oracle,
    truth_table_sdd,
    variable_masks,
)
from mso2dd.sdd import (
    DECOMP,
    SddBuilder,
    StateSddMapping,
    context_assignment_mapping,
    iter_sdd_nodes,
    state_table_mapping,
    vtree_respected,
)
from mso2dd.states import decision_space, forget_plan, node_states

from conftest import all_deltas, path_graph


def build_example_sdd():
    """(a and not b and (c or d)) or (not a and c) over v-tree ((a,b),(c,d))."""
    builder = SddBuilder()
    a, b, c, d = (dv_eq(Var(n, Sort.VERTEX_OBJECT), 1) for n in "abcd")
    la, lb = builder.vtree.leaf(a), builder.vtree.leaf(b)
    lc, ld = builder.vtree.leaf(c), builder.vtree.leaf(d)
    left = builder.vtree.inner(la, lb)
    right = builder.vtree.inner(lc, ld)
    top = builder.vtree.inner(left, right)
    a_and_not_b = builder.decomposition(
        left, [(builder.literal(a, True), builder.literal(b, False))]
    )
    not_a = builder.decomposition(
        left, [(builder.literal(a, False), builder.true)]
    )
    a_and_b = builder.decomposition(
        left, [(builder.literal(a, True), builder.literal(b, True))]
    )
    c_or_d = builder.decomposition(
        right,
        [
            (builder.literal(c, True), builder.true),
            (builder.literal(c, False), builder.literal(d, True)),
        ],
    )
    just_c = builder.decomposition(
        right, [(builder.literal(c, True), builder.true), (builder.literal(c, False), builder.false)]
    )
    root = builder.decomposition(
        top, [(a_and_not_b, c_or_d), (not_a, just_c), (a_and_b, builder.false)]
    )
    return builder, root, (a, b, c, d)


class TestEvaluate:
    def test_terminals(self):
        builder = SddBuilder()
        assert evaluate_sdd(builder.true, {})
        assert not evaluate_sdd(builder.false, {})

    def test_literal(self):
        builder = SddBuilder()
        x = dv_eq(Var("x", Sort.VERTEX_OBJECT), 1)
        builder.vtree.leaf(x)
        lit = builder.literal(x, True)
        assert not evaluate_sdd(lit, {x: 0})
        assert evaluate_sdd(lit, {x: 1})
        with pytest.raises(DiagramError):
            evaluate_sdd(lit, {})

    def test_two_level_example(self):
        _, root, (a, b, c, d) = build_example_sdd()
        assert evaluate_sdd(root, {a: 1, b: 0, c: 0, d: 1})
        reference = lambda va, vb, vc, vd: (va and not vb and (vc or vd)) or (
            not va and vc
        )
        for bits in itertools.product((0, 1), repeat=4):
            delta = dict(zip((a, b, c, d), bits))
            assert evaluate_sdd(root, delta) == bool(reference(*bits))

    def test_respects_vtree(self):
        builder, root, _ = build_example_sdd()
        assert vtree_respected(root, builder.vtree)


class TestSize:
    def test_terminal(self):
        assert sdd_size(SddBuilder().true) == 1

    def test_single_decomposition(self):
        builder = SddBuilder()
        a = dv_eq(Var("a", Sort.VERTEX_OBJECT), 1)
        b = dv_eq(Var("b", Sort.VERTEX_OBJECT), 1)
        top = builder.vtree.inner(builder.vtree.leaf(a), builder.vtree.leaf(b))
        node = builder.decomposition(
            top,
            [
                (builder.literal(a, True), builder.literal(b, True)),
                (builder.literal(a, False), builder.literal(b, False)),
            ],
        )
        # two pairs plus four distinct terminal children
        assert sdd_size(node) == 6

    def test_sharing_counts_once(self):
        builder = SddBuilder()
        a = dv_eq(Var("a", Sort.VERTEX_OBJECT), 1)
        b = dv_eq(Var("b", Sort.VERTEX_OBJECT), 1)
        top = builder.vtree.inner(builder.vtree.leaf(a), builder.vtree.leaf(b))
        shared = builder.literal(b, True)
        node = builder.decomposition(
            top,
            [
                (builder.literal(a, True), shared),
                (builder.literal(a, False), shared),
            ],
        )
        # unfolded this would be 2 + 4; the shared sub collapses to 2 + 3
        assert sdd_size(node) == 5


class TestContextMapping:
    def test_single_variable(self):
        builder = SddBuilder()
        d1 = dv_eq(Var("x", Sort.VERTEX_OBJECT), 1)
        mapping = context_assignment_mapping(builder, (d1,))
        assert mapping.images[(1,)].kind == "lit"
        assert mapping.images[(1,)].polarity is True
        assert mapping.images[(0,)].polarity is False

    def test_two_variables_structure(self):
        builder = SddBuilder()
        x = Var("x", Sort.VERTEX_OBJECT)
        d1, d2 = dv_eq(x, 1), dv_eq(x, 2)
        mapping = context_assignment_mapping(builder, (d1, d2))
        node = mapping.images[(1, 0)]
        assert node.kind == DECOMP
        rendered = {
            (p.var.name, p.polarity, s.kind, getattr(s, "polarity", None))
            for p, s in node.pairs
        }
        assert rendered == {
            ("x=v1", True, "lit", False),
            ("x=v1", False, "false", None),
        }

    def test_exactly_one_true_per_assignment(self):
        for k in range(1, 5):
            builder = SddBuilder()
            var = Var("x", Sort.VERTEX_OBJECT)
            ctx = tuple(dv_eq(var, i + 1) for i in range(k))
            mapping = context_assignment_mapping(builder, ctx)
            for _, delta in all_deltas(ctx):
                hits = [
                    bits
                    for bits in mapping.states()
                    if evaluate_sdd(mapping.images[bits], delta)
                ]
                assert hits == [tuple(delta[d] for d in ctx)]

    def test_size_bound(self):
        builder = SddBuilder()
        var = Var("x", Sort.VERTEX_OBJECT)
        ctx = tuple(dv_eq(var, i + 1) for i in range(4))
        mapping = context_assignment_mapping(builder, ctx)
        total = 0
        seen = set()
        for node in mapping.images.values():
            for sub in iter_sdd_nodes(node):
                if sub.uid in seen:
                    continue
                seen.add(sub.uid)
                total += len(sub.pairs) if sub.kind == DECOMP else 1
        assert total <= 2 * len(ctx) * 2 ** len(ctx)


class TestStateTableMapping:
    def setup_mappings(self):
        builder = SddBuilder()
        var = Var("x", Sort.VERTEX_OBJECT)
        a_vars = (dv_eq(var, 1),)
        b_vars = (dv_eq(var, 2),)
        g_a = context_assignment_mapping(builder, a_vars)
        g_b = context_assignment_mapping(builder, b_vars)
        return builder, g_a, g_b, a_vars + b_vars

    def test_constant_table(self):
        builder, g_a, g_b, dvars = self.setup_mappings()
        out = state_table_mapping(builder, g_a, g_b, lambda a, b: "c0", ("c0",), "t")
        for _, delta in all_deltas(dvars):
            assert evaluate_sdd(out.images["c0"], delta)

    def test_projection_table(self):
        builder, g_a, g_b, dvars = self.setup_mappings()
        out = state_table_mapping(builder, g_a, g_b, lambda a, b: a, g_a.states(), "t")
        for _, delta in all_deltas(dvars):
            for a_bits in g_a.states():
                assert evaluate_sdd(out.images[a_bits], delta) == evaluate_sdd(
                    g_a.images[a_bits], delta
                )

    def test_output_partition(self):
        builder, g_a, g_b, dvars = self.setup_mappings()
        table = lambda a, b: (a[0], b[0])
        states = [(i, j) for i in (0, 1) for j in (0, 1)]
        out = state_table_mapping(builder, g_a, g_b, table, states, "t")
        for _, delta in all_deltas(dvars):
            hits = [s for s in out.states() if evaluate_sdd(out.images[s], delta)]
            assert len(hits) == 1

    def test_image_outside_declared_states(self):
        builder, g_a, g_b, _ = self.setup_mappings()
        with pytest.raises(DiagramError):
            state_table_mapping(builder, g_a, g_b, lambda a, b: "other", ("c0",), "t")


class TestCompile:
    def compile(self, text, g):
        phi = desugar(parse_formula(text))
        nice = make_nice(g, min_fill_decomposition(g))
        coloring = good_coloring(g, nice)
        return phi, compile_sdd(phi, g, nice, coloring)

    def test_equality_on_singleton_models(self):
        g = clique(1)
        phi, comp = self.compile("free vertex x; free vertex y; (x = y)", g)
        dvars = decision_variables(phi, g)
        assert truth_table_sdd(comp.root, dvars) == truth_table_oracle(phi, g, dvars)
        assert model_count(comp) == 1

    def test_kappa_on_triangle_counts(self):
        from mso2dd.oracle import kappa_formula, oracle_models

        g = clique(3)
        phi = desugar(kappa_formula())
        nice = make_nice(g, min_fill_decomposition(g))
        comp = compile_sdd(phi, g, nice, good_coloring(g, nice))
        assert model_count(comp) == oracle_models(phi, g).count == 45

    def test_closed_tautology_is_constant_true(self):
        g = path_graph(3)
        phi, comp = self.compile(
            "exists vset X. ~ exists vertex v. (~(v in X) & (v in X))", g
        )
        assert comp.evaluate({})
        assert model_count(comp) == 1  # one empty assignment

    def test_dummy_variables_are_irrelevant(self):
        g = path_graph(2)
        phi, comp = self.compile("free vertex x; free vertex y; (x = y)", g)
        dvars = decision_variables(phi, g)
        for _, delta in all_deltas(dvars):
            base = comp.evaluate(delta)
            for flip in (0, 1):
                noisy = dict(delta)
                for dummy in comp.dummy_vars:
                    noisy[dummy] = flip
                assert comp.evaluate(noisy) == base

    def test_rejects_sugared_formula(self):
        g = clique(1)
        phi = parse_formula("free vset X; forall vertex v. (v in X)")
        nice = make_nice(g, min_fill_decomposition(g))
        with pytest.raises(DiagramError):
            compile_sdd(phi, g, nice, good_coloring(g, nice))

    def test_matches_decision_procedure_directly(self):
        from mso2dd import run_decision_procedure

        for text, g in (
            ("free vertex x; free vertex y; (x = y)", path_graph(2)),
            ("free vertex x; free edge p; adj(x, p)", clique(3)),
            ("exists vset X. ~ exists vertex v. (~(v in X) & (v in X))", path_graph(2)),
        ):
            phi, comp = self.compile(text, g)
            dvars = decision_variables(phi, g)
            for _, delta in all_deltas(dvars):
                assert comp.evaluate(delta) == run_decision_procedure(
                    phi, g, comp.nice, comp.coloring, delta
                )

    def test_state_mapping_property(self):
        # at every decomposition node exactly one image is true, and it names
        # the state the procedure reaches there
        g = path_graph(3)
        phi, comp = self.compile("free vertex x; free vset X; (x in X)", g)
        dvars = decision_variables(phi, g)
        space = decision_space(phi, comp.nice.width())
        plan = forget_plan(phi, g, comp.nice, comp.coloring)
        for _, delta in all_deltas(dvars):
            states = node_states(space, comp.nice, plan, delta)
            for nid, mapping in comp.node_mappings.items():
                hits = [
                    s
                    for s in mapping.states()
                    if evaluate_sdd(mapping.images[s], delta)
                ]
                assert hits == [states[nid]]

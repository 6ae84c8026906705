from mso2dd import (
    Graph,
    build_state_space,
    clique,
    decision_variables,
    desugar,
    encode_assignment,
    good_coloring,
    is_consistent,
    make_nice,
    min_fill_decomposition,
    parse_formula,
    run_decision_procedure,
    with_consistency,
)
from mso2dd.assignment import all_mso_assignments, dv_eq, dv_mem
from mso2dd.oracle import oracle_eval
from mso2dd.states import (
    BOT,
    INIT,
    TRUE,
    AdjacencySpace,
    ConsistencySpace,
    ForgetEdge,
    ForgetInfo,
    all_consistent_extensions,
    bits_state,
    color_state,
    decision_space,
    forget_plan,
    node_states,
    pair_state,
    reachable_states,
    set_state,
    state_key,
)

from conftest import all_deltas, path_graph, star_graph


def setup_instance(formula_text, g):
    phi = desugar(parse_formula(formula_text))
    nice = make_nice(g, min_fill_decomposition(g))
    coloring = good_coloring(g, nice)
    return phi, nice, coloring


def fake_info(vertex, vertex_color, edges=()):
    return ForgetInfo(vertex, vertex_color, tuple(edges), None)


class TestSpaceShapes:
    def test_equality_space(self):
        phi = desugar(parse_formula("free vertex x; free vertex y; (x = y)"))
        space = build_state_space(phi.root, 1)
        assert space.initial is INIT
        assert space.is_accepting(TRUE) and not space.is_accepting(INIT)

    def test_negation_swaps_acceptance(self):
        phi = desugar(parse_formula("free vertex x; free vertex y; ~(x = y)"))
        space = build_state_space(phi.root, 1)
        assert space.initial is INIT
        assert space.is_accepting(INIT) and not space.is_accepting(TRUE)

    def test_quantifier_space(self):
        phi = desugar(parse_formula("free vset X; exists vertex x. (x in X)"))
        space = build_state_space(phi.root, 2)
        assert space.initial is set_state([(INIT, (0,))])
        assert space.is_accepting(set_state([(TRUE, (1,))]))
        assert not space.is_accepting(set_state([(TRUE, (0,))]))
        assert not space.is_accepting(set_state([(INIT, (1,))]))

    def test_independent_of_graph(self):
        phi = desugar(parse_formula("free vertex x; free edge p; adj(x, p)"))
        a = build_state_space(phi.root, 3)
        b = build_state_space(phi.root, 3)
        assert a.describe() == b.describe()
        assert a.initial is b.initial
        assert a.describe() != build_state_space(phi.root, 4).describe()


class TestForgetRules:
    def test_equality_hit(self):
        phi = desugar(parse_formula("free vertex x; free vertex y; (x = y)"))
        space = build_state_space(phi.root, 1)
        x, y = phi.free_vars
        delta = {dv_eq(x, 3): 1, dv_eq(y, 3): 1}
        assert space.forget(INIT, fake_info(3, 1), delta) is TRUE
        delta = {dv_eq(x, 3): 1, dv_eq(y, 3): 0}
        assert space.forget(INIT, fake_info(3, 1), delta) is INIT
        assert space.forget(TRUE, fake_info(3, 1), delta) is TRUE

    def test_membership_hit(self):
        phi = desugar(parse_formula("free vertex x; free vset X; (x in X)"))
        space = build_state_space(phi.root, 1)
        x, xs = phi.free_vars
        delta = {dv_eq(x, 2): 1, dv_mem(xs, 2): 1}
        assert space.forget(INIT, fake_info(2, 1), delta) is TRUE
        delta = {dv_eq(x, 2): 1, dv_mem(xs, 2): 0}
        assert space.forget(INIT, fake_info(2, 1), delta) is INIT

    def test_adjacency_delayed_endpoint(self):
        phi = desugar(parse_formula("free vertex x; free edge y; adj(x, y)"))
        space = build_state_space(phi.root, 2)
        x, y = phi.free_vars
        g = path_graph(2)
        edge = ForgetEdge(g.edges[0], other=2, other_color=3)
        # rule for a matched edge with the tracked vertex elsewhere: park its color
        delta = {dv_eq(x, 1): 0, dv_eq(y, 1): 1}
        out = space.forget(INIT, fake_info(1, 1, [edge]), delta)
        assert out is color_state(3)
        # color matches the forgotten vertex but the vertex bit is off
        delta2 = {dv_eq(x, 2): 0, dv_eq(y, 1): 0}
        assert space.forget(color_state(3), fake_info(2, 3, []), delta2) is INIT
        # color matches and the vertex bit is on
        delta3 = {dv_eq(x, 2): 1, dv_eq(y, 1): 0}
        assert space.forget(color_state(3), fake_info(2, 3, []), delta3) is TRUE
        # immediate hit: edge and its endpoint forgotten together
        delta4 = {dv_eq(x, 1): 1, dv_eq(y, 1): 1}
        assert space.forget(INIT, fake_info(1, 1, [edge]), delta4) is TRUE
        # unrelated color passes through
        delta5 = {dv_eq(x, 2): 1, dv_eq(y, 1): 0}
        assert space.forget(color_state(3), fake_info(2, 1, []), delta5) is color_state(3)

    def test_consistency_counts(self):
        phi = desugar(parse_formula("free vertex x; free vertex y; (x = y)"))
        space = ConsistencySpace(phi.free_object_vars)
        x, y = phi.free_vars
        delta = {dv_eq(x, 1): 1, dv_eq(y, 1): 0}
        s1 = space.forget(space.initial, fake_info(1, 1), delta)
        assert s1 is bits_state((1, 0))
        # same variable assigned again
        delta2 = {dv_eq(x, 2): 1, dv_eq(y, 2): 0}
        assert space.forget(s1, fake_info(2, 1), delta2) is BOT
        assert space.forget(BOT, fake_info(2, 1), delta2) is BOT

    def test_consistency_two_edges_at_once(self):
        phi = desugar(parse_formula("free edge p; exists vertex v. adj(v, p)"))
        space = ConsistencySpace(phi.free_object_vars)
        p = phi.free_vars[0]
        g = path_graph(3)
        edges = [ForgetEdge(g.edges[0], 1, 1), ForgetEdge(g.edges[1], 3, 1)]
        delta = {dv_eq(p, 1): 1, dv_eq(p, 2): 1}
        assert space.forget(space.initial, fake_info(2, 2, edges), delta) is BOT


class TestJoinRules:
    def test_equality_join(self):
        phi = desugar(parse_formula("free vertex x; free vertex y; (x = y)"))
        space = build_state_space(phi.root, 1)
        assert space.join(INIT, TRUE) is TRUE
        assert space.join(INIT, INIT) is INIT

    def test_adjacency_join(self):
        phi = desugar(parse_formula("free vertex x; free edge y; adj(x, y)"))
        space = build_state_space(phi.root, 2)
        assert space.join(color_state(2), INIT) is color_state(2)
        assert space.join(INIT, color_state(1)) is color_state(1)
        assert space.join(TRUE, INIT) is TRUE

    def test_consistency_join(self):
        space = ConsistencySpace(
            desugar(parse_formula("free vertex x; free vertex y; (x = y)")).free_object_vars
        )
        assert space.join(bits_state((1, 0)), bits_state((0, 1))) is bits_state((1, 1))
        assert space.join(bits_state((1, 0)), bits_state((1, 0))) is BOT
        assert space.join(BOT, bits_state((0, 0))) is BOT


class TestExtensions:
    def test_vertex_set_two_ways(self):
        phi = desugar(parse_formula("exists vset X. exists vertex v. (v in X)"))
        xvar = phi.root.variables[0]
        assert xvar.sort.value == "vset"
        out = all_consistent_extensions((xvar,), {}, (), fake_info(4, 1))
        assert len(out) == 2
        values = sorted(d[dv_mem(xvar, 4)] for d, _ in out)
        assert values == [0, 1]

    def test_assigned_vertex_object_only_skips(self):
        phi = desugar(parse_formula("free vset X; exists vertex v. (v in X)"))
        v = phi.root.variables[0]
        out = all_consistent_extensions((v,), {}, (1,), fake_info(4, 1))
        assert len(out) == 1
        delta, bits = out[0]
        assert delta[dv_eq(v, 4)] == 0 and bits == (1,)

    def test_edge_object_skip_or_each_edge(self):
        phi = desugar(parse_formula("free vertex u; exists edge x. adj(u, x)"))
        xvar = phi.root.variables[0]
        g = path_graph(3)
        info = fake_info(2, 1, [ForgetEdge(g.edges[0], 1, 2), ForgetEdge(g.edges[1], 3, 2)])
        out = all_consistent_extensions((xvar,), {}, (0,), info)
        assert len(out) == 3
        patterns = sorted(
            (d[dv_eq(xvar, 1)], d[dv_eq(xvar, 2)], b[0]) for d, b in out
        )
        assert patterns == [(0, 0, 0), (0, 1, 1), (1, 0, 1)]


class TestRuns:
    def test_equality_on_singleton(self):
        g = clique(1)
        phi, nice, col = setup_instance("free vertex x; free vertex y; (x = y)", g)
        delta = encode_assignment(
            {phi.free_vars[0]: 1, phi.free_vars[1]: 1}, phi, g
        )
        assert run_decision_procedure(phi, g, nice, col, delta)

    def test_adjacency_endpoint(self):
        g = path_graph(2)
        phi, nice, col = setup_instance("free vertex x; free edge p; adj(x, p)", g)
        delta = encode_assignment({phi.free_vars[0]: 1, phi.free_vars[1]: 1}, phi, g)
        assert run_decision_procedure(phi, g, nice, col, delta)

    def test_product_root_state_shape(self):
        g = path_graph(2)
        phi, nice, col = setup_instance("free vertex x; free vertex y; (x = y)", g)
        space = decision_space(phi, nice.width())
        plan = forget_plan(phi, g, nice, col)
        delta = encode_assignment({phi.free_vars[0]: 2, phi.free_vars[1]: 2}, phi, g)
        root = node_states(space, nice, plan, delta)[nice.root]
        assert root is pair_state(TRUE, bits_state((1, 1)))
        # assigning x twice drives the consistency component to the sink
        bad = dict(delta)
        bad[dv_eq(phi.free_vars[0], 1)] = 1
        root_bad = node_states(space, nice, plan, bad)[nice.root]
        assert root_bad.payload[1] is BOT
        assert not space.is_accepting(root_bad)

    def test_closed_formula_consistency_is_vacuous(self):
        g = path_graph(2)
        phi, nice, col = setup_instance(
            "exists vset X. ~ exists vertex v. (~(v in X) & (v in X))", g
        )
        space = decision_space(phi, nice.width())
        assert space.right.initial is bits_state(())
        assert space.right.is_accepting(bits_state(()))
        assert run_decision_procedure(phi, g, nice, col, {})

    def test_determinism(self):
        g = clique(3)
        phi, nice, col = setup_instance("free vertex x; free edge p; adj(x, p)", g)
        dvars = decision_variables(phi, g)
        for _, delta in all_deltas(dvars):
            space = decision_space(phi, nice.width())
            plan = forget_plan(phi, g, nice, col)
            a = node_states(space, nice, plan, delta)[nice.root]
            b = node_states(space, nice, plan, delta)[nice.root]
            assert a is b


class TestOracleEquivalence:
    FORMULAS = (
        "free vertex x; free vertex y; (x = y)",
        "free vertex x; free vset X; (x in X)",
        "free vertex x; free edge p; adj(x, p)",
        "free vertex x; free edge p; ~adj(x, p)",
        "free vset S; forall vertex u. exists vertex v. (((u = v) | nbr(u, v)) & (v in S))",
    )

    def test_exhaustive_desk_scale(self):
        graphs = [clique(1), path_graph(2), path_graph(3), clique(3), star_graph(3)]
        for text in self.FORMULAS:
            for g in graphs:
                if g.n_objects > 8:
                    continue
                phi, nice, col = setup_instance(text, g)
                dvars = decision_variables(phi, g)
                if len(dvars) > 14:
                    continue
                space = decision_space(phi, nice.width())
                plan = forget_plan(phi, g, nice, col)
                for _, delta in all_deltas(dvars):
                    got = space.is_accepting(node_states(space, nice, plan, delta)[nice.root])
                    if is_consistent(delta, phi, g):
                        from mso2dd import decode_assignment

                        expected = oracle_eval(phi, g, decode_assignment(delta, phi, g))
                    else:
                        expected = False
                    assert got == expected, (text, g, delta)

    def test_adjacency_impossible_join_cells_untouched(self):
        # on consistent assignments the join table never pairs two non-initial states
        g = star_graph(4)  # branching decomposition, so joins occur
        phi, nice, col = setup_instance("free vertex x; free edge p; adj(x, p)", g)
        dvars = decision_variables(phi, g)
        space = decision_space(phi, nice.width())
        plan = forget_plan(phi, g, nice, col)
        AdjacencySpace.impossible_join_hits = 0
        checked = 0
        for _, delta in all_deltas(dvars):
            if not is_consistent(delta, phi, g):
                continue
            node_states(space, nice, plan, delta)
            checked += 1
        assert checked > 0
        assert AdjacencySpace.impossible_join_hits == 0


class TestQuantifierSemantics:
    def test_state_sets_enumerate_extensions(self):
        # a quantifier state set at node p holds exactly the (state, bits) pairs
        # realized by extending the assignment with values for the bound variables
        g = path_graph(2)
        phi = desugar(parse_formula("free vset X; exists vertex x. (x in X)"))
        inner = desugar(parse_formula("free vertex x; free vset X; (x in X)"))
        ix, ixs = inner.free_vars
        nice = make_nice(g, min_fill_decomposition(g))
        col = good_coloring(g, nice)

        phi_space = build_state_space(phi.root, nice.width())
        phi_plan = forget_plan(phi, g, nice, col)
        inner_space = build_state_space(inner.root, nice.width())
        inner_plan = forget_plan(inner, g, nice, col)

        own_forgets = {phi_plan[nid].vertex: nid for nid in nice.forget_nodes()}
        below = {}
        for nid in nice.postorder():
            node = nice.nodes[nid]
            acc = set()
            for c in node.children:
                acc |= below[c]
            if node.kind == "forget":
                acc.add(node.vertex)
            below[nid] = acc

        for alpha in all_mso_assignments(phi, g):
            delta = encode_assignment(alpha, phi, g)
            sigma = node_states(phi_space, nice, phi_plan, delta)
            for nid in nice.postorder():
                expected = set()
                # partial extensions: the bound variable takes a vertex or stays
                # unassigned (all equality bits zero)
                for v in [None] + list(g.vertices()):
                    inner_delta = {
                        dv_mem(ixs, u): (1 if u in alpha[phi.free_vars[0]] else 0)
                        for u in g.vertices()
                    }
                    for u in g.vertices():
                        inner_delta[dv_eq(ix, u)] = 1 if u == v else 0
                    inner_states = node_states(inner_space, nice, inner_plan, inner_delta)
                    bit = 1 if (v is not None and v in below[nid]) else 0
                    expected.add((inner_states[nid], (bit,)))
                got = set(sigma[nid].payload)
                # identify the bound variable's decision bits with the inner free ones
                assert got == expected, nid

    def test_reachable_dump_format(self):
        from mso2dd.states import dump_reachable_states

        g = path_graph(2)
        phi, nice, col = setup_instance("free vertex x; free vertex y; (x = y)", g)
        space = decision_space(phi, nice.width())
        plan = forget_plan(phi, g, nice, col)
        text = dump_reachable_states(reachable_states(space, nice, plan))
        lines = text.strip().splitlines()
        assert lines[0] == "node 1"
        assert lines[1] == "  P(I,b00)"  # one canonical encoding per line
        assert sum(1 for l in lines if l.startswith("node ")) == len(nice)

    def test_reachable_count_graph_size_independent_shape(self):
        phi = desugar(parse_formula("free vset X; exists vertex x. (x in X)"))
        counts = []
        for n in (4, 6, 8):
            g = path_graph(n)
            nice = make_nice(g, min_fill_decomposition(g))
            col = good_coloring(g, nice)
            space = decision_space(phi, nice.width())
            plan = forget_plan(phi, g, nice, col)
            reach = reachable_states(space, nice, plan)
            counts.append(max(len(v) for v in reach.per_node.values()))
        assert counts[1] == counts[2]  # per-node reachable width saturates

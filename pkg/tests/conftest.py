"""Shared corpus and helpers for the test suite."""

from __future__ import annotations

from dataclasses import dataclass

import pytest

from mso2dd import (
    Graph,
    clique,
    clique_tree,
    compile_obdd,
    compile_sdd,
    desugar,
    good_coloring,
    is_path_decomposition,
    make_nice,
    min_fill_decomposition,
    parse_formula,
)
from mso2dd.assignment import decision_variables
from mso2dd.oracle import KAPPA_TEXT


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(1, n)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(1, n)] + [(1, n)])


def star_graph(leaves: int) -> Graph:
    return Graph(leaves + 1, [(1, i + 2) for i in range(leaves)])


def bowtie_graph() -> Graph:
    return Graph(5, [(1, 2), (1, 3), (2, 3), (1, 4), (1, 5), (4, 5)])


def path_decomposition(n: int):
    """Width-1 decomposition of the n-vertex path: bags {i, i+1} in a chain."""
    from mso2dd import TreeDecomposition

    bags = {i: frozenset({i, i + 1}) for i in range(1, n)}
    return TreeDecomposition(bags, [(i, i + 1) for i in range(1, n - 1)])


FORMULA_TEXTS = {
    "eq": "free vertex x; free vertex y; (x = y)",
    "mem": "free vertex x; free vset X; (x in X)",
    "adj": "free vertex x; free edge p; adj(x, p)",
    "nadj": "free vertex x; free edge p; ~adj(x, p)",
    "edge3": "free edge e; free vertex u; free vertex v; edge(e, u, v)",
    "taut": "exists vset X. ~ exists vertex v. (~(v in X) & (v in X))",
    "kappa": KAPPA_TEXT,
    "dom": "free vset S; forall vertex u. exists vertex v. (((u = v) | nbr(u, v)) & (v in S))",
}


def corpus_graphs() -> dict[str, Graph]:
    return {
        "K1": clique(1),
        "P2": path_graph(2),
        "P3": path_graph(3),
        "P4": path_graph(4),
        "K3": clique(3),
        "C4": cycle_graph(4),
        "S3": star_graph(3),
        "S4": star_graph(4),
        "bowtie": bowtie_graph(),
        "KT22": clique_tree(2, 2),
    }


@dataclass
class Instance:
    formula_name: str
    graph_name: str
    phi: object  # desugared formula
    graph: Graph
    nice: object
    coloring: dict
    dvars: tuple
    sdd: object
    obdd: object  # None when the decomposition has join nodes


MAX_UNIVERSE = 14


@pytest.fixture(scope="session")
def corpus() -> list[Instance]:
    """Every corpus formula crossed with every corpus graph, restricted to
    instances whose decision universe fits exhaustive checking."""
    instances = []
    formulas = {name: desugar(parse_formula(text)) for name, text in FORMULA_TEXTS.items()}
    for gname, g in corpus_graphs().items():
        nice = make_nice(g, min_fill_decomposition(g))
        coloring = good_coloring(g, nice)
        on_path = is_path_decomposition(nice)
        for fname, phi in formulas.items():
            dvars = decision_variables(phi, g)
            if len(dvars) > MAX_UNIVERSE:
                continue
            sdd = compile_sdd(phi, g, nice, coloring)
            obdd = compile_obdd(phi, g, nice, coloring) if on_path else None
            instances.append(
                Instance(fname, gname, phi, g, nice, coloring, dvars, sdd, obdd)
            )
    return instances


def all_deltas(dvars):
    """Every total assignment, in truth-table index order (variable i is bit i)."""
    n = len(dvars)
    for idx in range(1 << n):
        yield idx, {d: (idx >> i) & 1 for i, d in enumerate(dvars)}

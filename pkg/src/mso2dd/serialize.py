"""Text serialization for compiled diagrams, and DOT export.

One format covers both diagram kinds. Lines:

    mso2dd-diagram 1
    kind sdd|obdd
    var <idx> <kind> <mso-var> <obj>      legend; kind in veq eeq vmem emem dummy
    vtree <id> leaf <var-idx>             sdd only
    vtree <id> inner <left> <right>
    vtreeroot <id>
    order <var-idx>...                    obdd only
    node <id> false|true                  sdd terminals
    node <id> lit <var-idx> <0|1>
    node <id> decomp <vtree-id> <prime>:<sub>...
    node <id> leaf <0|1>                  obdd terminals
    node <id> dec <var-idx> <lo> <hi>
    root <id>

Lines starting with `c` are comments.
"""

from __future__ import annotations

from .assignment import DecisionVariable, dv_dummy, dv_eq, dv_mem
from .errors import DiagramError
from .mso import Sort, Var
from .obdd import Obdd, ObddSpace, evaluate_obdd
from .sdd import DECOMP, FALSE, LITERAL, TRUE, SddBuilder, SddNode, evaluate_sdd, iter_sdd_nodes

_VAR_KIND = {
    ("eq", True): "veq",
    ("eq", False): "eeq",
    ("mem", True): "vmem",
    ("mem", False): "emem",
}
_SORT_OF = {
    "veq": Sort.VERTEX_OBJECT,
    "eeq": Sort.EDGE_OBJECT,
    "vmem": Sort.VERTEX_SET,
    "emem": Sort.EDGE_SET,
}


def _var_line(idx: int, var: DecisionVariable) -> str:
    if var.kind == "dummy":
        return f"var {idx} dummy {var.obj} 0"
    tag = _VAR_KIND[(var.kind, var.var.sort.is_vertex)]
    return f"var {idx} {tag} {var.var.name} {var.obj}"


def _parse_var(parts) -> DecisionVariable:
    tag, name, obj = parts[0], parts[1], parts[2]
    if tag == "dummy":
        return dv_dummy(name)
    sort = _SORT_OF.get(tag)
    if sort is None:
        raise DiagramError(f"unknown variable kind {tag!r}")
    var = Var(name, sort)
    return dv_eq(var, int(obj)) if tag in ("veq", "eeq") else dv_mem(var, int(obj))


def serialize_diagram(diagram) -> str:
    lines = ["mso2dd-diagram 1", f"kind {diagram.kind}"]
    if diagram.kind == "sdd":
        vtree = diagram.vtree
        variables = list(diagram.legend) + [
            v for v in vtree.all_variables() if v.kind == "dummy"
        ]
        index = {v: i for i, v in enumerate(variables)}
        lines.extend(_var_line(i, v) for i, v in enumerate(variables))
        for vid in range(len(vtree)):
            if vtree.kind[vid] == "leaf":
                lines.append(f"vtree {vid} leaf {index[vtree.var[vid]]}")
            else:
                lines.append(f"vtree {vid} inner {vtree.left[vid]} {vtree.right[vid]}")
        lines.append(f"vtreeroot {diagram.vtree_root}")
        for node in iter_sdd_nodes(diagram.root):
            if node.kind in (FALSE, TRUE):
                lines.append(f"node {node.uid} {node.kind}")
            elif node.kind == LITERAL:
                lines.append(
                    f"node {node.uid} lit {index[node.var]} {1 if node.polarity else 0}"
                )
            else:
                pairs = " ".join(f"{p.uid}:{s.uid}" for p, s in node.pairs)
                lines.append(f"node {node.uid} decomp {node.vtree_id} {pairs}")
        lines.append(f"root {diagram.root.uid}")
    else:
        obdd = diagram if isinstance(diagram, Obdd) else diagram.obdd
        variables = list(obdd.order)
        index = {v: i for i, v in enumerate(variables)}
        lines.extend(_var_line(i, v) for i, v in enumerate(variables))
        lines.append("order " + " ".join(str(index[v]) for v in obdd.order))
        for node in obdd.nodes():
            if node.is_leaf:
                lines.append(f"node {node.uid} leaf {int(node.label)}")
            else:
                lines.append(
                    f"node {node.uid} dec {node.level} {node.lo.uid} {node.hi.uid}"
                )
        lines.append(f"root {obdd.root.uid}")
    return "\n".join(lines) + "\n"


class LoadedSdd:
    """A deserialized structured diagram; quacks like a compilation for queries."""

    kind = "sdd"

    def __init__(self, builder, root, vtree_root, legend, dummy_vars):
        self.builder = builder
        self.root: SddNode = root
        self.vtree_root: int = vtree_root
        self.legend = legend
        self.dummy_vars = dummy_vars

    @property
    def vtree(self):
        return self.builder.vtree

    def size(self) -> int:
        from .sdd import sdd_size

        return sdd_size(self.root)

    def evaluate(self, delta) -> bool:
        return evaluate_sdd(self.root, delta)


class LoadedObdd:
    kind = "obdd"

    def __init__(self, obdd: Obdd):
        self.obdd = obdd
        self.legend = obdd.order

    @property
    def root(self):
        return self.obdd.root

    @property
    def order(self):
        return self.obdd.order

    def size(self) -> int:
        return len(self.obdd.nodes())

    def evaluate(self, delta) -> bool:
        return evaluate_obdd(self.obdd, delta)


def load_diagram(text: str):
    lines = [
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("c ") and line.strip() != "c"
    ]
    if not lines or lines[0].split() != ["mso2dd-diagram", "1"]:
        raise DiagramError("not a diagram file (bad magic line)")
    if len(lines) < 2 or not lines[1].startswith("kind "):
        raise DiagramError("missing kind line")
    kind = lines[1].split()[1]
    if kind == "sdd":
        return _load_sdd(lines[2:])
    if kind == "obdd":
        return _load_obdd(lines[2:])
    raise DiagramError(f"unknown diagram kind {kind!r}")


def _load_sdd(lines) -> LoadedSdd:
    variables: dict[int, DecisionVariable] = {}
    builder = SddBuilder()
    vtree_ids: dict[int, int] = {}
    nodes: dict[int, SddNode] = {}
    vtree_root = None
    root_id = None
    try:
        for line in lines:
            parts = line.split()
            if parts[0] == "var":
                variables[int(parts[1])] = _parse_var(parts[2:])
            elif parts[0] == "vtree":
                fid = int(parts[1])
                if parts[2] == "leaf":
                    vtree_ids[fid] = builder.vtree.leaf(variables[int(parts[3])])
                else:
                    vtree_ids[fid] = builder.vtree.inner(
                        vtree_ids[int(parts[3])], vtree_ids[int(parts[4])]
                    )
            elif parts[0] == "vtreeroot":
                vtree_root = vtree_ids[int(parts[1])]
            elif parts[0] == "node":
                nid = int(parts[1])
                if parts[2] == "false":
                    nodes[nid] = builder.false
                elif parts[2] == "true":
                    nodes[nid] = builder.true
                elif parts[2] == "lit":
                    nodes[nid] = builder.literal(
                        variables[int(parts[3])], parts[4] == "1"
                    )
                elif parts[2] == "decomp":
                    pairs = []
                    for chunk in parts[4:]:
                        p, s = chunk.split(":")
                        pairs.append((nodes[int(p)], nodes[int(s)]))
                    nodes[nid] = builder.decomposition(
                        vtree_ids[int(parts[3])], pairs
                    )
                else:
                    raise DiagramError(f"unknown node form {parts[2]!r}")
            elif parts[0] == "root":
                root_id = int(parts[1])
            else:
                raise DiagramError(f"unknown line {line!r}")
    except (KeyError, ValueError, IndexError) as exc:
        raise DiagramError(f"malformed diagram file: {exc}") from exc
    if root_id is None or root_id not in nodes or vtree_root is None:
        raise DiagramError("diagram file missing root")
    legend = tuple(
        variables[i] for i in sorted(variables) if variables[i].kind != "dummy"
    )
    dummies = tuple(
        variables[i] for i in sorted(variables) if variables[i].kind == "dummy"
    )
    return LoadedSdd(builder, nodes[root_id], vtree_root, legend, dummies)


def _load_obdd(lines) -> LoadedObdd:
    variables: dict[int, DecisionVariable] = {}
    order = None
    raw_nodes = []
    root_id = None
    try:
        for line in lines:
            parts = line.split()
            if parts[0] == "var":
                variables[int(parts[1])] = _parse_var(parts[2:])
            elif parts[0] == "order":
                order = tuple(variables[int(i)] for i in parts[1:])
            elif parts[0] == "node":
                raw_nodes.append(parts[1:])
            elif parts[0] == "root":
                root_id = int(parts[1])
            else:
                raise DiagramError(f"unknown line {line!r}")
        if order is None:
            raise DiagramError("missing order line")
        space = ObddSpace(order)
        nodes = {}
        for parts in raw_nodes:
            nid = int(parts[0])
            if parts[1] == "leaf":
                nodes[nid] = space.leaf(int(parts[2]))
            elif parts[1] == "dec":
                nodes[nid] = space.decision(
                    int(parts[2]), nodes[int(parts[3])], nodes[int(parts[4])]
                )
            else:
                raise DiagramError(f"unknown node form {parts[1]!r}")
    except (KeyError, ValueError, IndexError) as exc:
        raise DiagramError(f"malformed diagram file: {exc}") from exc
    if root_id is None or root_id not in nodes:
        raise DiagramError("diagram file missing root")
    return LoadedObdd(Obdd(space, nodes[root_id]))


# -- DOT export -----------------------------------------------------------------


def _dot_quote(text: str) -> str:
    return '"' + text.replace('"', '\\"') + '"'


def diagram_to_dot(diagram) -> str:
    if diagram.kind == "sdd":
        return _sdd_dot(diagram)
    return _obdd_dot(diagram)


def _sdd_dot(diagram) -> str:
    # decompositions are circles feeding rows of paired prime|sub boxes
    out = ["digraph sdd {", "  node [fontname=monospace];"]

    def label(node) -> str:
        if node.kind == FALSE:
            return "F"
        if node.kind == TRUE:
            return "T"
        if node.kind == LITERAL:
            return ("" if node.polarity else "~") + node.var.name
        return ""

    for node in iter_sdd_nodes(diagram.root):
        if node.kind != DECOMP:
            continue
        out.append(f"  n{node.uid} [shape=circle label={_dot_quote(str(node.uid))}];")
        for i, (p, s) in enumerate(node.pairs):
            box = f"n{node.uid}p{i}"
            left = label(p) if p.kind != DECOMP else "*"
            right = label(s) if s.kind != DECOMP else "*"
            out.append(
                f"  {box} [shape=record label={_dot_quote(f'{left}|{right}')}];"
            )
            out.append(f"  n{node.uid} -> {box};")
            if p.kind == DECOMP:
                out.append(f"  {box} -> n{p.uid} [style=dashed];")
            if s.kind == DECOMP:
                out.append(f"  {box} -> n{s.uid};")
    if diagram.root.kind != DECOMP:
        out.append(f"  n{diagram.root.uid} [shape=box label={_dot_quote(label(diagram.root))}];")
    out.append("}")
    return "\n".join(out) + "\n"


def _obdd_dot(diagram) -> str:
    # dotted edges are 0-branches, solid edges 1-branches
    obdd = diagram if isinstance(diagram, Obdd) else diagram.obdd
    out = ["digraph obdd {", "  node [fontname=monospace];"]
    for node in obdd.nodes():
        if node.is_leaf:
            out.append(
                f"  n{node.uid} [shape=box label={_dot_quote(str(int(node.label)))}];"
            )
        else:
            name = obdd.order[node.level].name
            out.append(f"  n{node.uid} [shape=ellipse label={_dot_quote(name)}];")
            out.append(f"  n{node.uid} -> n{node.lo.uid} [style=dotted];")
            out.append(f"  n{node.uid} -> n{node.hi.uid};")
    out.append("}")
    return "\n".join(out) + "\n"

"""Boolean decision variables encoding MSO2 assignments, and the consistency predicate.

A decision variable is either an object-equality variable (an object variable x
takes value v or e), a set-membership variable (object v or e belongs to set
variable X), or a dummy used only as structural padding in v-trees.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import AssignmentError
from .graph import Graph
from .mso import Formula, Sort, Var

EQ = "eq"
MEM = "mem"
DUMMY = "dummy"


@dataclass(frozen=True)
class DecisionVariable:
    kind: str
    var: Var | None
    obj: int | str

    @property
    def name(self) -> str:
        if self.kind == DUMMY:
            return f"_{self.obj}"
        tag = "v" if self.var.sort.is_vertex else "e"
        if self.kind == EQ:
            return f"{self.var.name}={tag}{self.obj}"
        return f"{tag}{self.obj}in{self.var.name}"

    def __repr__(self) -> str:
        return f"[{self.name}]"


# interned: transition code constructs the same keys over and over
@lru_cache(maxsize=None)
def dv_eq(var: Var, obj: int) -> DecisionVariable:
    return DecisionVariable(EQ, var, obj)


@lru_cache(maxsize=None)
def dv_mem(var: Var, obj: int) -> DecisionVariable:
    return DecisionVariable(MEM, var, obj)


@lru_cache(maxsize=None)
def dv_dummy(tag: str) -> DecisionVariable:
    return DecisionVariable(DUMMY, None, tag)


def _objects(g: Graph, sort: Sort):
    return g.vertices() if sort.is_vertex else range(1, g.n_edges + 1)


def decision_variables(phi: Formula, g: Graph) -> tuple[DecisionVariable, ...]:
    """The full decision-variable universe, ordered by free-variable declaration
    order (major) and object id (minor)."""
    out = []
    for var in phi.free_vars:
        maker = dv_eq if var.sort.is_object else dv_mem
        out.extend(maker(var, obj) for obj in _objects(g, var.sort))
    return tuple(out)


def is_consistent(delta, phi: Formula, g: Graph) -> bool:
    """True iff every free object variable has exactly one satisfied equality bit."""
    for var in phi.free_object_vars:
        count = sum(delta[dv_eq(var, obj)] for obj in _objects(g, var.sort))
        if count != 1:
            return False
    return True


def encode_assignment(alpha, phi: Formula, g: Graph) -> dict[DecisionVariable, int]:
    """The unique consistent boolean assignment representing alpha."""
    delta = {}
    for var in phi.free_vars:
        if var not in alpha:
            raise AssignmentError(f"no value for free variable {var.name!r}")
        value = alpha[var]
        universe = set(_objects(g, var.sort))
        if var.sort.is_object:
            if value not in universe:
                raise AssignmentError(f"value {value!r} for {var.name!r} outside universe")
            for obj in _objects(g, var.sort):
                delta[dv_eq(var, obj)] = 1 if obj == value else 0
        else:
            members = set(value)
            if not members <= universe:
                raise AssignmentError(f"value for {var.name!r} outside universe")
            for obj in _objects(g, var.sort):
                delta[dv_mem(var, obj)] = 1 if obj in members else 0
    return delta


def decode_assignment(delta, phi: Formula, g: Graph) -> dict[Var, object]:
    """Inverse of encode_assignment; rejects inconsistent input."""
    if not is_consistent(delta, phi, g):
        raise AssignmentError("assignment is not consistent")
    alpha: dict[Var, object] = {}
    for var in phi.free_vars:
        if var.sort.is_object:
            for obj in _objects(g, var.sort):
                if delta[dv_eq(var, obj)]:
                    alpha[var] = obj
                    break
        else:
            alpha[var] = frozenset(
                obj for obj in _objects(g, var.sort) if delta[dv_mem(var, obj)]
            )
    return alpha


def all_mso_assignments(phi: Formula, g: Graph):
    """Iterate every assignment to the free variables, in a fixed order: object
    variables run over ids ascending, set variables over subsets in binary-counter
    order by object id."""
    domains = []
    for var in phi.free_vars:
        objs = list(_objects(g, var.sort))
        if var.sort.is_object:
            domains.append(objs)
        else:
            domains.append(
                [
                    frozenset(o for i, o in enumerate(objs) if mask >> i & 1)
                    for mask in range(1 << len(objs))
                ]
            )
    for values in itertools.product(*domains):
        yield dict(zip(phi.free_vars, values))


def parse_assignment_text(text: str, phi: Formula, g: Graph) -> dict[Var, object]:
    """Parse `set <var> <obj>` / `member <var> <obj>` lines into an assignment.

    Set variables not mentioned at all get the empty set; object variables must
    be given exactly one `set` line.
    """
    by_name = {v.name: v for v in phi.free_vars}
    alpha: dict[Var, object] = {v: set() for v in phi.free_vars if v.sort.is_set}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("set", "member"):
            raise AssignmentError(f"line {lineno}: malformed assignment line {line!r}")
        cmd, name, obj_text = parts
        if name not in by_name:
            raise AssignmentError(f"line {lineno}: unknown variable {name!r}")
        var = by_name[name]
        try:
            obj = int(obj_text)
        except ValueError:
            raise AssignmentError(f"line {lineno}: bad object id {obj_text!r}") from None
        if cmd == "set":
            if not var.sort.is_object:
                raise AssignmentError(f"line {lineno}: `set` needs an object variable")
            if var in alpha:
                raise AssignmentError(f"line {lineno}: {name!r} assigned twice")
            alpha[var] = obj
        else:
            if not var.sort.is_set:
                raise AssignmentError(f"line {lineno}: `member` needs a set variable")
            alpha[var].add(obj)
    for var in phi.free_vars:
        if var not in alpha:
            raise AssignmentError(f"object variable {var.name!r} never assigned")
        if var.sort.is_set:
            alpha[var] = frozenset(alpha[var])
    return alpha


def assignment_bits(delta, dvars) -> tuple[int, ...]:
    return tuple(delta[d] for d in dvars)


def bits_to_assignment(bits, dvars) -> dict[DecisionVariable, int]:
    return dict(zip(dvars, bits))

"""MSO2 syntax: AST, concrete-syntax parser, desugaring to the minimal core, sizes.

The core connectives are Adj, Eq, In, Not, And and multi-variable Exists blocks.
Everything else (or, implication, forall, !=, notin, the ternary edge predicate
and the neighbourhood predicate) is surface sugar removed by :func:`desugar`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import FormulaError


class Sort(enum.Enum):
    VERTEX_OBJECT = "vertex"
    EDGE_OBJECT = "edge"
    VERTEX_SET = "vset"
    EDGE_SET = "eset"

    @property
    def is_object(self) -> bool:
        return self in (Sort.VERTEX_OBJECT, Sort.EDGE_OBJECT)

    @property
    def is_set(self) -> bool:
        return not self.is_object

    @property
    def is_vertex(self) -> bool:
        return self in (Sort.VERTEX_OBJECT, Sort.VERTEX_SET)

    @property
    def object_sort(self) -> "Sort":
        """The object sort with the same base (vertex/edge) as this sort."""
        return Sort.VERTEX_OBJECT if self.is_vertex else Sort.EDGE_OBJECT


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __repr__(self) -> str:
        return f"{self.name}:{self.sort.value}"


class Expr:
    """Base class for syntax-tree nodes."""

    __slots__ = ()


# -- core nodes ---------------------------------------------------------------


@dataclass(frozen=True)
class Adj(Expr):
    vertex: Var
    edge: Var


@dataclass(frozen=True)
class Eq(Expr):
    left: Var
    right: Var


@dataclass(frozen=True)
class In(Expr):
    element: Var
    container: Var


@dataclass(frozen=True)
class Not(Expr):
    body: Expr


@dataclass(frozen=True)
class And(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Exists(Expr):
    variables: tuple[Var, ...]
    body: Expr


# -- sugar nodes --------------------------------------------------------------


@dataclass(frozen=True)
class Or(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Implies(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Forall(Expr):
    variables: tuple[Var, ...]
    body: Expr


@dataclass(frozen=True)
class Neq(Expr):
    left: Var
    right: Var


@dataclass(frozen=True)
class NotIn(Expr):
    element: Var
    container: Var


@dataclass(frozen=True)
class EdgePred(Expr):
    edge: Var
    left: Var
    right: Var


@dataclass(frozen=True)
class Nbr(Expr):
    left: Var
    right: Var


_CORE_TYPES = (Adj, Eq, In, Not, And, Exists)


@dataclass(frozen=True)
class Formula:
    """An expression together with its free variables in declaration order."""

    free_vars: tuple[Var, ...]
    root: Expr

    @property
    def free_object_vars(self) -> tuple[Var, ...]:
        return tuple(v for v in self.free_vars if v.sort.is_object)

    @property
    def is_core(self) -> bool:
        return is_core(self.root)


def is_core(expr: Expr) -> bool:
    if isinstance(expr, (Adj, Eq, In)):
        return True
    if isinstance(expr, Not):
        return is_core(expr.body)
    if isinstance(expr, And):
        return is_core(expr.left) and is_core(expr.right)
    if isinstance(expr, Exists):
        return is_core(expr.body)
    return False


# -- parsing ------------------------------------------------------------------

_SORT_KEYWORDS = {s.value: s for s in Sort}
_PUNCT = ["->", "!=", "(", ")", ",", ";", ".", "~", "&", "|", "="]


def _tokenize(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "#":  # comment to end of line
            while i < n and text[i] != "\n":
                i += 1
            continue
        matched = False
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(p)
                i += len(p)
                matched = True
                break
        if matched:
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
            continue
        raise FormulaError(f"unexpected character {ch!r}")
    return tokens


_WORD_OPS = {"in", "notin"}
_BINDERS = {"exists", "forall"}
_ATOM_HEADS = {"adj", "edge", "nbr"}


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.fresh = 0

    def peek(self, offset: int = 0):
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            raise FormulaError("unexpected end of input")
        if expected is not None and tok != expected:
            raise FormulaError(f"expected {expected!r}, found {tok!r}")
        self.pos += 1
        return tok

    def ident(self):
        tok = self.take()
        if not (tok[0].isalpha() or tok[0] == "_") or tok in _BINDERS | _WORD_OPS:
            raise FormulaError(f"expected identifier, found {tok!r}")
        return tok

    def parse(self) -> Formula:
        free = []
        env: dict[str, Var] = {}
        while self.peek() == "free":
            self.take()
            sort_tok = self.take()
            if sort_tok not in _SORT_KEYWORDS:
                raise FormulaError(f"unknown sort {sort_tok!r}")
            name = self.ident()
            if name in env:
                raise FormulaError(f"duplicate free declaration of {name!r}")
            var = Var(name, _SORT_KEYWORDS[sort_tok])
            env[name] = var
            free.append(var)
            self.take(";")
        root, used = self.expr(env)
        if self.pos != len(self.tokens):
            raise FormulaError(f"trailing input starting at {self.peek()!r}")
        for var in free:
            if var not in used:
                raise FormulaError(f"free variable {var.name!r} never occurs in the formula")
        return Formula(tuple(free), root)

    def expr(self, env) -> tuple[Expr, set]:
        tok = self.peek()
        if tok is None:
            raise FormulaError("unexpected end of input")
        if tok == "~":
            self.take()
            body, used = self.expr(env)
            return Not(body), used
        if tok in _BINDERS:
            return self.binder(env)
        if tok in _ATOM_HEADS and self.peek(1) == "(":
            return self.predicate_atom(env)
        if tok == "(":
            # two-token lookahead separates `(x = y)`-style atoms from binary exprs
            if self.peek(2) in ("=", "!=", "in", "notin"):
                return self.relation_atom(env)
            self.take("(")
            left, lu = self.expr(env)
            op = self.take()
            if op not in ("&", "|", "->"):
                raise FormulaError(f"expected binary operator, found {op!r}")
            right, ru = self.expr(env)
            self.take(")")
            node = {"&": And, "|": Or, "->": Implies}[op](left, right)
            return node, lu | ru
        raise FormulaError(f"unexpected token {tok!r}")

    def binder(self, env) -> tuple[Expr, set]:
        kind = self.take()
        sort_tok = self.take()
        if sort_tok not in _SORT_KEYWORDS:
            raise FormulaError(f"unknown sort {sort_tok!r}")
        name = self.ident()
        if name in env:
            raise FormulaError(f"variable {name!r} rebound by a quantifier")
        self.take(".")
        # alpha-rename so every binder introduces a globally fresh variable
        self.fresh += 1
        var = Var(f"{name}@{self.fresh}", _SORT_KEYWORDS[sort_tok])
        inner_env = dict(env)
        inner_env[name] = var
        body, used = self.expr(inner_env)
        if var not in used:
            raise FormulaError(f"quantified variable {name!r} never occurs in its scope")
        used.discard(var)
        node = (Exists if kind == "exists" else Forall)((var,), body)
        return node, used

    def lookup(self, env, name) -> Var:
        if name not in env:
            raise FormulaError(f"unbound variable {name!r}")
        return env[name]

    def predicate_atom(self, env) -> tuple[Expr, set]:
        head = self.take()
        self.take("(")
        args = [self.lookup(env, self.ident())]
        while self.peek() == ",":
            self.take(",")
            args.append(self.lookup(env, self.ident()))
        self.take(")")
        if head == "adj":
            if len(args) != 2:
                raise FormulaError("adj takes two arguments")
            x, y = args
            if x.sort is not Sort.VERTEX_OBJECT or y.sort is not Sort.EDGE_OBJECT:
                raise FormulaError("adj requires a vertex variable and an edge variable")
            return Adj(x, y), set(args)
        if head == "edge":
            if len(args) != 3:
                raise FormulaError("edge takes three arguments")
            e, u, v = args
            if (
                e.sort is not Sort.EDGE_OBJECT
                or u.sort is not Sort.VERTEX_OBJECT
                or v.sort is not Sort.VERTEX_OBJECT
            ):
                raise FormulaError("edge requires an edge variable and two vertex variables")
            return EdgePred(e, u, v), set(args)
        if len(args) != 2:
            raise FormulaError("nbr takes two arguments")
        u, v = args
        if u.sort is not Sort.VERTEX_OBJECT or v.sort is not Sort.VERTEX_OBJECT:
            raise FormulaError("nbr requires two vertex variables")
        return Nbr(u, v), set(args)

    def relation_atom(self, env) -> tuple[Expr, set]:
        self.take("(")
        left = self.lookup(env, self.ident())
        op = self.take()
        right = self.lookup(env, self.ident())
        self.take(")")
        if op in ("=", "!="):
            if not (left.sort.is_object and left.sort is right.sort):
                raise FormulaError("equality requires two object variables of one sort")
            node = Eq(left, right) if op == "=" else Neq(left, right)
        else:
            if not left.sort.is_object or not right.sort.is_set:
                raise FormulaError("membership requires an object variable and a set variable")
            if left.sort.is_vertex != right.sort.is_vertex:
                raise FormulaError("membership requires matching vertex/edge sorts")
            node = In(left, right) if op == "in" else NotIn(left, right)
        return node, {left, right}


def parse_formula(text: str) -> Formula:
    """Parse concrete syntax into a (possibly sugared) sort-checked AST."""
    return _Parser(_tokenize(text)).parse()


# -- desugaring ---------------------------------------------------------------

_FRESH_NBR = [0]


def _neg(expr: Expr) -> Expr:
    if isinstance(expr, Not):
        return expr.body
    return Not(expr)


def _exists(variables: tuple[Var, ...], body: Expr) -> Expr:
    if isinstance(body, Exists):
        return Exists(variables + body.variables, body.body)
    return Exists(variables, body)


def _desugar(expr: Expr) -> Expr:
    if isinstance(expr, (Adj, Eq, In)):
        return expr
    if isinstance(expr, Not):
        return _neg(_desugar(expr.body))
    if isinstance(expr, And):
        return And(_desugar(expr.left), _desugar(expr.right))
    if isinstance(expr, Or):
        return _neg(And(_neg(_desugar(expr.left)), _neg(_desugar(expr.right))))
    if isinstance(expr, Implies):
        return _neg(And(_desugar(expr.left), _neg(_desugar(expr.right))))
    if isinstance(expr, Exists):
        return _exists(expr.variables, _desugar(expr.body))
    if isinstance(expr, Forall):
        return _neg(_exists(expr.variables, _neg(_desugar(expr.body))))
    if isinstance(expr, Neq):
        return Not(Eq(expr.left, expr.right))
    if isinstance(expr, NotIn):
        return Not(In(expr.element, expr.container))
    if isinstance(expr, EdgePred):
        e, u, v = expr.edge, expr.left, expr.right
        return And(And(Not(Eq(u, v)), Adj(u, e)), Adj(v, e))
    if isinstance(expr, Nbr):
        _FRESH_NBR[0] += 1
        x = Var(f"_nbr@{_FRESH_NBR[0]}", Sort.EDGE_OBJECT)
        return _exists((x,), And(Adj(expr.left, x), Adj(expr.right, x)))
    raise FormulaError(f"unknown expression node {type(expr).__name__}")


def desugar(formula: Formula) -> Formula:
    """Rewrite to the core connectives, merging consecutive quantifier blocks."""
    return Formula(formula.free_vars, _desugar(formula.root))


# -- analysis -----------------------------------------------------------------


def formula_size(f) -> int:
    """Syntax-tree size: atoms count 3, negation 1 extra, conjunction joins with 1,
    and a quantifier block counts one symbol per bound variable."""
    expr = f.root if isinstance(f, Formula) else f
    if isinstance(expr, (Adj, Eq, In, Neq, NotIn, EdgePred, Nbr)):
        return 3
    if isinstance(expr, Not):
        return 1 + formula_size(expr.body)
    if isinstance(expr, (And, Or, Implies)):
        return 1 + formula_size(expr.left) + formula_size(expr.right)
    if isinstance(expr, (Exists, Forall)):
        return len(expr.variables) + formula_size(expr.body)
    raise FormulaError(f"unknown expression node {type(expr).__name__}")


def free_variables(f: Formula) -> tuple[Var, ...]:
    """Free variables in declaration order."""
    return f.free_vars


def occurring_variables(expr: Expr) -> set[Var]:
    """All variables appearing in atoms below this node."""
    if isinstance(expr, Adj):
        return {expr.vertex, expr.edge}
    if isinstance(expr, (Eq, Neq)):
        return {expr.left, expr.right}
    if isinstance(expr, (In, NotIn)):
        return {expr.element, expr.container}
    if isinstance(expr, EdgePred):
        return {expr.edge, expr.left, expr.right}
    if isinstance(expr, Nbr):
        return {expr.left, expr.right}
    if isinstance(expr, Not):
        return occurring_variables(expr.body)
    if isinstance(expr, (And, Or, Implies)):
        return occurring_variables(expr.left) | occurring_variables(expr.right)
    if isinstance(expr, (Exists, Forall)):
        return occurring_variables(expr.body) - set(expr.variables)
    raise FormulaError(f"unknown expression node {type(expr).__name__}")

"""
WeightExpr: the small expression language used for interpretation equations, rule
side conditions, instantiation guards and multiadditive functions.

Arithmetic is exact and follows the weight conventions of `wfsosWB.weights`
(x/0 = 0, x/inf = 0, inf/inf = 1, 0 * inf = 0). Predicates (`=`, `!=`, `<`, `<=`,
`>`, `>=`, `in`, `notin`, `&&`, `||`, `!`) evaluate to Python booleans. Bare names
are looked up in the evaluation environment and otherwise denote labels, so that
side conditions like `$a != tau` read naturally.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

from lark import Lark, Token, Transformer
from lark.exceptions import LarkError, UnexpectedInput, VisitError

from wfsosWB.syntax import MetaVar, Term
from wfsosWB.utils import InterpretationError, SpecError
from wfsosWB.weights import INF, WeightFn, format_weight, wadd, wdiv, wmax, wmin, wmul, wsub, weight_key

COMMON_TERMINALS = r"""
NAME: /[A-Za-z_][A-Za-z0-9_]*/
DECIMAL: /\d+(\.\d+)?/
META: /\$[A-Za-z_][A-Za-z0-9_]*/
COMMENT: /\/\/[^\n]*/
%import common.ESCAPED_STRING
%import common.WS
%ignore WS
%ignore COMMENT
"""

EXPR_RULES = r"""
?e_expr: e_or
?e_or: e_and
     | e_or "||" e_and -> e_lor
?e_and: e_not
      | e_and "&&" e_not -> e_land
?e_not: e_cmp
      | "!" e_not -> e_lnot
?e_cmp: e_sum
      | e_sum _cmpop e_sum -> e_compare
      | e_sum "in" e_sum -> e_member
      | e_sum "notin" e_sum -> e_nonmember
!_cmpop: "!=" | "<=" | ">=" | "=" | "<" | ">"
?e_sum: e_prod
      | e_sum "+" e_prod -> e_add
      | e_sum "-" e_prod -> e_sub
?e_prod: e_unary
       | e_prod "*" e_unary -> e_mul
       | e_prod "/" e_unary -> e_div
?e_unary: e_atom
        | "-" e_unary -> e_neg
?e_atom: DECIMAL -> e_num
       | NAME -> e_name
       | META -> e_meta
       | NAME "(" [e_arg ("," e_arg)*] ")" -> e_call
       | "total" "(" e_arg ")" -> e_total
       | "{" [e_expr ("," e_expr)*] "}" -> e_set
       | "(" e_expr ")"
?e_arg: e_expr
      | "@" e_term
e_term: NAME e_tparams? e_targs?
e_tparams: "{" [e_tparam ("," e_tparam)*] "}"
e_targs: "(" e_term ("," e_term)* ")"
?e_tparam: NAME -> e_tp_name
         | DECIMAL "/" DECIMAL -> e_tp_ratio
         | DECIMAL -> e_tp_num
         | "{" [NAME ("," NAME)*] "}" -> e_tp_set
"""

Node = Tuple[Any, ...]

_ARITH = {"+": wadd, "-": wsub, "*": wmul, "/": wdiv}
_PREC = {"or": 1, "and": 2, "not": 3, "cmp": 4, "in": 4, "notin": 4, "+": 5, "-": 5, "*": 6, "/": 6}
FUNCTIONS = frozenset({"min", "max", "total", "support_size", "point"})


def _is_number(v: Any) -> bool:
    return v is INF or isinstance(v, (bool, int, Fraction))


def _fold(op: str, a: Node, b: Node) -> Node:
    if a[0] == "const" and b[0] == "const" and _is_number(a[1]) and _is_number(b[1]):
        if not (op == "-" and b[1] is INF):
            return ("const", _ARITH[op](a[1], b[1]))
    return ("bin", op, a, b)


class ExprTransformer(Transformer):
    """Builds WeightExpr nodes from `e_*` parse trees."""

    def e_num(self, c: List[Token]) -> Node:
        return ("const", Fraction(str(c[0])))

    def e_name(self, c: List[Token]) -> Node:
        name = str(c[0])
        if name == "inf":
            return ("const", INF)
        if name in ("tt", "ff"):
            return ("const", name == "tt")
        return ("name", name)

    def e_meta(self, c: List[Token]) -> Node:
        return ("meta", str(c[0])[1:])

    def e_call(self, c: List[Any]) -> Node:
        fname = str(c[0])
        args = tuple(a for a in c[1:] if a is not None)
        if fname not in FUNCTIONS:
            raise SpecError(f"Unknown function '{fname}' in weight expression.")
        return ("call", fname, args)

    def e_total(self, c: List[Any]) -> Node:
        return ("call", "total", (c[0],))

    def e_set(self, c: List[Any]) -> Node:
        items = tuple(a for a in c if a is not None)
        if all(i[0] == "name" for i in items):
            return ("const", frozenset(i[1] for i in items))
        return ("set", items)

    def e_neg(self, c: List[Node]) -> Node:
        return _fold("-", ("const", Fraction(0)), c[0])

    def e_add(self, c: List[Node]) -> Node:
        return _fold("+", c[0], c[1])

    def e_sub(self, c: List[Node]) -> Node:
        return _fold("-", c[0], c[1])

    def e_mul(self, c: List[Node]) -> Node:
        return _fold("*", c[0], c[1])

    def e_div(self, c: List[Node]) -> Node:
        return _fold("/", c[0], c[1])

    def e_compare(self, c: List[Any]) -> Node:
        return ("cmp", str(c[1]), c[0], c[2])

    def e_member(self, c: List[Node]) -> Node:
        return ("in", c[0], c[1])

    def e_nonmember(self, c: List[Node]) -> Node:
        return ("notin", c[0], c[1])

    def e_land(self, c: List[Node]) -> Node:
        return ("and", c[0], c[1])

    def e_lor(self, c: List[Node]) -> Node:
        return ("or", c[0], c[1])

    def e_lnot(self, c: List[Node]) -> Node:
        return ("not", c[0])

    def e_term(self, c: List[Any]) -> Node:
        params: Tuple[Any, ...] = ()
        children: Tuple[Term, ...] = ()
        for part in c[1:]:
            if part[0] == "tparams":
                params = part[1]
            else:
                children = tuple(t[1] for t in part[1])
        return ("term", Term.op(str(c[0]), *children, params=params))

    def e_tparams(self, c: List[Any]) -> Node:
        return ("tparams", tuple(p for p in c if p is not None))

    def e_targs(self, c: List[Node]) -> Node:
        return ("targs", tuple(c))

    def e_tp_name(self, c: List[Token]) -> Any:
        return INF if str(c[0]) == "inf" else str(c[0])

    def e_tp_num(self, c: List[Token]) -> Any:
        return Fraction(str(c[0]))

    def e_tp_ratio(self, c: List[Token]) -> Any:
        return Fraction(str(c[0])) / Fraction(str(c[1]))

    def e_tp_set(self, c: List[Any]) -> Any:
        return frozenset(str(t) for t in c if t is not None)


_PARSER: Optional[Lark] = None


def _parser() -> Lark:
    global _PARSER
    if _PARSER is None:
        _PARSER = Lark(
            "start: e_expr\n" + EXPR_RULES + COMMON_TERMINALS,
            parser="lalr",
            maybe_placeholders=True,
        )
    return _PARSER


def lark_error_message(e: LarkError, text: str) -> str:
    if isinstance(e, UnexpectedInput):
        return f"{e.line}:{e.column}: syntax error near {text[max(0, e.pos_in_stream or 0):][:20]!r}"
    if isinstance(e, VisitError):
        return str(e.orig_exc)
    return str(e)


class Expr:
    """A parsed WeightExpr. Equality and hashing are structural."""

    __slots__ = ("node", "_hash")

    def __init__(self, node: Node) -> None:
        self.node = node
        self._hash = hash(node)

    @classmethod
    def parse(cls, text: str) -> "Expr":
        try:
            tree = _parser().parse(text)
            node = ExprTransformer().transform(tree)
        except VisitError as e:
            if isinstance(e.orig_exc, SpecError):
                raise e.orig_exc from e
            raise SpecError(f"Invalid weight expression '{text}': {e.orig_exc}") from e
        except LarkError as e:
            raise SpecError(f"Invalid weight expression '{text}': {lark_error_message(e, text)}") from e
        if isinstance(node, tuple) and node and node[0] == "start":
            node = node[1]
        if not isinstance(node, tuple):
            node = node.children[0]
        return cls(node)

    @classmethod
    def const(cls, value: Any) -> "Expr":
        return cls(("const", value))

    @classmethod
    def of(cls, value: Any) -> "Expr":
        if isinstance(value, Expr):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        return cls.const(value)

    def bind(self, bindings: Mapping[str, Any]) -> "Expr":
        def go(n: Node) -> Node:
            tag = n[0]
            if tag == "meta":
                if n[1] not in bindings:
                    return n
                value = bindings[n[1]]
                if isinstance(value, MetaVar):
                    return ("meta", value.name)
                return ("const", value)
            if tag in ("const", "name", "term"):
                return n
            if tag == "bin":
                return ("bin", n[1], go(n[2]), go(n[3]))
            if tag == "cmp":
                return ("cmp", n[1], go(n[2]), go(n[3]))
            if tag == "call":
                return ("call", n[1], tuple(go(a) for a in n[2]))
            if tag == "set":
                return ("set", tuple(go(a) for a in n[1]))
            return (tag,) + tuple(go(a) for a in n[1:])

        return Expr(go(self.node))

    def rename(self, names: Mapping[str, str]) -> "Expr":
        """Simultaneously rename bare names (not metavariables)."""

        def go(n: Node) -> Node:
            tag = n[0]
            if tag == "name":
                return ("name", names.get(n[1], n[1]))
            if tag in ("const", "meta", "term"):
                return n
            if tag in ("bin", "cmp"):
                return (tag, n[1], go(n[2]), go(n[3]))
            if tag == "call":
                return ("call", n[1], tuple(go(a) for a in n[2]))
            if tag == "set":
                return ("set", tuple(go(a) for a in n[1]))
            return (tag,) + tuple(go(a) for a in n[1:])

        return Expr(go(self.node))

    def _collect(self, tag: str) -> FrozenSet[str]:
        found: Set[str] = set()

        def go(n: Any) -> None:
            if not isinstance(n, tuple) or not n:
                return
            if n[0] == tag:
                found.add(n[1])
                return
            if n[0] in ("const", "term"):
                return
            for part in n[1:]:
                if isinstance(part, tuple):
                    if part and isinstance(part[0], str):
                        go(part)
                    else:
                        for p in part:
                            go(p)

        go(self.node)
        return frozenset(found)

    def metavars(self) -> FrozenSet[str]:
        return self._collect("meta")

    def names(self) -> FrozenSet[str]:
        return self._collect("name")

    def evaluate(
        self,
        env: Optional[Mapping[str, Any]] = None,
        functions: Optional[Mapping[str, WeightFn]] = None,
    ) -> Any:
        """Evaluate with names bound by `env` and weight functions by `functions`.

        Metavariables may be supplied in `env` under the key `$name`.
        """
        return _eval(self.node, env or {}, functions or {})

    def holds(self, env: Optional[Mapping[str, Any]] = None) -> bool:
        value = self.evaluate(env)
        if not isinstance(value, bool):
            raise InterpretationError(f"Condition '{self}' evaluated to non-boolean {value}.")
        return value

    def sort_key(self) -> str:
        return str(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Expr):
            return NotImplemented
        return self.node == other.node

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return _show(self.node)[0]

    def __repr__(self) -> str:
        return f'Expr("{self}")'


def _show_const(v: Any) -> str:
    if isinstance(v, frozenset):
        return "{" + ", ".join(sorted(v)) + "}"
    if isinstance(v, str):
        return v
    return format_weight(v)


def _show(n: Node) -> Tuple[str, int]:
    tag = n[0]
    if tag == "const":
        v = n[1]
        if isinstance(v, Fraction) and v < 0:
            return (f"-{format_weight(-v)}", 7)
        if isinstance(v, Fraction) and v.denominator != 1:
            return (format_weight(v), 6)
        return (_show_const(v), 8)
    if tag == "name":
        return (n[1], 8)
    if tag == "meta":
        return (f"${n[1]}", 8)
    if tag == "term":
        return (f"@{n[1]}", 8)
    if tag == "call":
        return (f"{n[1]}(" + ", ".join(_show(a)[0] for a in n[2]) + ")", 8)
    if tag == "set":
        return ("{" + ", ".join(_show(a)[0] for a in n[1]) + "}", 8)
    if tag == "not":
        inner, p = _show(n[1])
        return ("!" + (inner if p >= 3 else f"({inner})"), 3)
    if tag in ("bin", "cmp"):
        op, a, b = n[1], n[2], n[3]
        prec = _PREC[op] if tag == "bin" else 4
    else:
        op = {"and": "&&", "or": "||", "in": "in", "notin": "notin"}[tag]
        a, b = n[1], n[2]
        prec = _PREC[tag]
    left, lp = _show(a)
    right, rp = _show(b)
    if lp < prec or (lp == prec and prec == 4):
        left = f"({left})"
    if rp <= prec:
        right = f"({right})"
    return (f"{left} {op} {right}", prec)


def _fail(msg: str) -> InterpretationError:
    return InterpretationError(msg)


def _number(v: Any, n: Node) -> Any:
    if not _is_number(v):
        raise _fail(f"Expected a weight in '{_show(n)[0]}', got {v!r}.")
    return v


def _as_function(n: Node, env: Mapping[str, Any], functions: Mapping[str, WeightFn]) -> WeightFn:
    if n[0] == "name" and n[1] in functions:
        return functions[n[1]]
    value = _eval(n, env, functions)
    if not isinstance(value, WeightFn):
        raise _fail(f"'{_show(n)[0]}' does not denote a weight function.")
    return value


def _equal(a: Any, b: Any) -> bool:
    if _is_number(a) and _is_number(b):
        return weight_key(a) == weight_key(b)
    return bool(a == b)


def _eval(n: Node, env: Mapping[str, Any], functions: Mapping[str, WeightFn]) -> Any:
    tag = n[0]
    if tag == "const":
        return n[1]
    if tag == "name":
        return env.get(n[1], n[1])
    if tag == "meta":
        key = f"${n[1]}"
        if key not in env:
            raise _fail(f"Metavariable {key} is unbound.")
        return env[key]
    if tag == "term":
        return n[1]
    if tag == "bin":
        a = _number(_eval(n[2], env, functions), n[2])
        b = _number(_eval(n[3], env, functions), n[3])
        try:
            return _ARITH[n[1]](a, b)
        except ValueError as e:
            raise _fail(str(e)) from e
    if tag == "call":
        fname, args = n[1], n[2]
        if fname in ("min", "max"):
            values = [_number(_eval(a, env, functions), a) for a in args]
            if not values:
                raise _fail(f"{fname}() needs at least one argument.")
            return wmin(*values) if fname == "min" else wmax(*values)
        if fname == "total":
            return _as_function(args[0], env, functions).total()
        if fname == "support_size":
            return Fraction(len(_as_function(args[0], env, functions)))
        if fname == "point":
            if len(args) != 2:
                raise _fail("point() takes a function and a term.")
            return _as_function(args[0], env, functions)(_eval(args[1], env, functions))
        raise _fail(f"Unknown function '{fname}'.")
    if tag == "set":
        return frozenset(_eval(a, env, functions) for a in n[1])
    if tag == "cmp":
        a = _eval(n[2], env, functions)
        b = _eval(n[3], env, functions)
        op = n[1]
        if op == "=":
            return _equal(a, b)
        if op == "!=":
            return not _equal(a, b)
        ka, kb = weight_key(_number(a, n[2])), weight_key(_number(b, n[3]))
        return {"<": ka < kb, "<=": ka <= kb, ">": ka > kb, ">=": ka >= kb}[op]
    if tag in ("in", "notin"):
        a = _eval(n[1], env, functions)
        b = _eval(n[2], env, functions)
        if not isinstance(b, (frozenset, set)):
            raise _fail(f"Right operand of '{tag}' is not a set: {b!r}.")
        return (a in b) if tag == "in" else (a not in b)
    if tag == "and":
        return _truth(n[1], env, functions) and _truth(n[2], env, functions)
    if tag == "or":
        return _truth(n[1], env, functions) or _truth(n[2], env, functions)
    if tag == "not":
        return not _truth(n[1], env, functions)
    raise _fail(f"Malformed expression node {tag}.")


def _truth(n: Node, env: Mapping[str, Any], functions: Mapping[str, WeightFn]) -> bool:
    value = _eval(n, env, functions)
    if not isinstance(value, bool):
        raise _fail(f"'{_show(n)[0]}' is not a condition.")
    return value


def expr_env(bindings: Mapping[str, Any]) -> Dict[str, Any]:
    """Environment exposing metavariable bindings as `$name` keys."""
    return {f"${k}": v for k, v in bindings.items()}

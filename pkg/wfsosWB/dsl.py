"""
Textual syntax: terms, the spec DSL for the three rule formats, and the printer.

A spec file is a sequence of statements:

    format wfsos;                       // or segala, wgsos
    monoid rat_inf_plus;
    labels a, b, tau;
    signature process { nil/0; prefix{label,weight}/1; coop{labelset}/2 }
    signature weight { empty/0; diamond{weight}/1; wsum/2 }
    const P = prefix{a,1}(P);
    interp pepa = { empty: zero; diamond(r): reshape; wsum: pointwise_sum; base: dirac(inf) };
    rule act: => prefix{$a,$r}(x) --$a--> diamond{$r}(x);
    rule choice [open x, y]: x --$a--> %f, y --$a--> %g => plus(x, y) --$a--> wsum(%f, %g);

Bare identifiers in terms are process variables unless they name a declared operator
or constant, in which case they denote that nullary operator. Parsing happens in two
passes so that the order of declarations does not matter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from lark import Lark, Token, Tree
from lark.exceptions import LarkError, VisitError
from typing_extensions import Literal

from wfsosWB._types import SchemaKind, SpecFormat
from wfsosWB.interp import EvalRule, Interpretation, builtin
from wfsosWB.syntax import MetaVar, OpDecl, Signature, Term, TermKind
from wfsosWB.utils import InterpretationError, SpecError
from wfsosWB.weights import INF, WeightMonoid, format_weight, get_monoid
from wfsosWB.wexpr import COMMON_TERMINALS, EXPR_RULES, Expr, ExprTransformer, lark_error_message
from wfsosWB.wfsos import (
    LabelRef,
    NegPremise,
    PosPremise,
    SupportPremise,
    TotalPremise,
    WfsosRule,
    WfsosSpec,
    format_rule,
)

GRAMMAR = r"""
start: _stmt*
term_only: term

_stmt: format_stmt | monoid_stmt | labels_stmt | const_stmt | sig_stmt | interp_stmt | rule_stmt

format_stmt: "format" NAME ";"
monoid_stmt: "monoid" NAME ";"
labels_stmt: "labels" NAME ("," NAME)* ";"
const_stmt: "const" NAME "=" term ";"

sig_stmt: "signature" NAME "{" [op_decl (";" op_decl)*] ";"? "}"
op_decl: NAME [schema] "/" arity
schema: "{" schema_item ("," schema_item)* "}"
!schema_item: NAME "*"?
!arity: DECIMAL | "*"

interp_stmt: "interp" NAME "=" "{" [interp_entry (";" interp_entry)*] ";"? "}" ";"?
interp_entry: NAME [ipattern] ":" ibody
ipattern: "(" [NAME ("," NAME)*] ")"
ibody: NAME ESCAPED_STRING -> ib_pointwise
     | NAME ["(" [tparam ("," tparam)*] ")"] -> ib_builtin

rule_stmt: "rule" NAME [open_clause] ":" [premise ("," premise)*] "=>" conclusion [where_clause] ";"
open_clause: "[" "open" NAME ("," NAME)* "]"
premise: NAME "--" lbl "-->" WVAR -> p_pos
       | NAME "--" lbl "," NAME "-->" NAME -> p_wtrans
       | NAME "-/" lbl "->" -> p_neg
       | "total" "(" WVAR ")" "=" tparam -> p_total
       | "total" "(" NAME "," lbl ")" "=" tparam -> p_wtotal
       | "in" "(" WVAR "," NAME ")" -> p_support
       | WVAR "∋" NAME -> p_support
       | WVAR "==>" NAME -> p_support
lbl: NAME | META
conclusion: term "--" lbl [beta] "-->" target
beta: "," ESCAPED_STRING
?target: term
       | convex
convex: coef "*" term ("+" coef "*" term)*
coef: DECIMAL ["/" DECIMAL]
where_clause: "where" e_expr ("," e_expr)*

term: NAME [tparams] [targs] -> t_op
    | WVAR -> t_wvar
    | HOLE -> t_hole
tparams: "{" [tparam ("," tparam)*] "}"
targs: "(" [term ("," term)*] ")"
?tparam: NAME -> tp_name
       | META -> tp_meta
       | DECIMAL -> tp_num
       | DECIMAL "/" DECIMAL -> tp_ratio
       | "-" DECIMAL -> tp_neg
       | "-" DECIMAL "/" DECIMAL -> tp_negratio
       | "{" [NAME ("," NAME)*] "}" -> tp_set
       | NAME "=" tparam -> tp_named
       | "@" term -> tp_term
       | ESCAPED_STRING -> tp_expr

WVAR: /%[A-Za-z_][A-Za-z0-9_]*/
HOLE: /#\d+/
"""

Premise = Tuple[Any, ...]
ConvexTarget = Tuple[Tuple[Fraction, Term], ...]


def _unquote(s: str) -> str:
    return s[1:-1].replace('\\"', '"').replace("\\\\", "\\")


class SpecTransformer(ExprTransformer):
    """Turns parse trees into statements; bare names stay provisional process
    variables until `resolve_names` knows the declared operators."""

    def start(self, c: List[Any]) -> List[Any]:
        return c

    def term_only(self, c: List[Any]) -> Term:
        return c[0]

    def format_stmt(self, c: List[Token]) -> Tuple[str, str]:
        return ("format", str(c[0]))

    def monoid_stmt(self, c: List[Token]) -> Tuple[str, str]:
        return ("monoid", str(c[0]))

    def labels_stmt(self, c: List[Token]) -> Tuple[str, List[str]]:
        return ("labels", [str(t) for t in c])

    def const_stmt(self, c: List[Any]) -> Tuple[str, str, Term]:
        return ("const", str(c[0]), c[1])

    def sig_stmt(self, c: List[Any]) -> Tuple[str, str, List[OpDecl]]:
        kind = str(c[0])
        if kind not in ("process", "weight"):
            raise SpecError(f"Signature kind must be 'process' or 'weight', got '{kind}'.")
        return ("signature", kind, [d for d in c[1:] if d is not None])

    def op_decl(self, c: List[Any]) -> OpDecl:
        name, schema, arity = str(c[0]), c[1] or [], c[2]
        kinds = []
        repeat = False
        for i, (kind, starred) in enumerate(schema):
            try:
                kinds.append(SchemaKind.validate(kind))
            except ValueError as e:
                raise SpecError(f"Operator {name}: {e}") from e
            if starred and i != len(schema) - 1:
                raise SpecError(f"Operator {name}: only the last parameter may repeat.")
            repeat = repeat or starred
        return OpDecl(name, tuple(kinds), arity, repeat)

    def schema(self, c: List[Any]) -> List[Tuple[str, bool]]:
        return list(c)

    def schema_item(self, c: List[Token]) -> Tuple[str, bool]:
        return (str(c[0]), len(c) > 1)

    def arity(self, c: List[Token]) -> Optional[int]:
        text = str(c[0])
        return None if text == "*" else int(text)

    def interp_stmt(self, c: List[Any]) -> Tuple[str, str, List[Any]]:
        return ("interp", str(c[0]), [e for e in c[1:] if e is not None])

    def interp_entry(self, c: List[Any]) -> Tuple[str, str, Tuple[Any, ...]]:
        name, body = str(c[0]), c[2]
        return (name, body[0], body[1])

    def ipattern(self, c: List[Any]) -> None:
        return None

    def ib_pointwise(self, c: List[Token]) -> Tuple[str, Tuple[Any, ...]]:
        if str(c[0]) != "pointwise":
            raise SpecError(f"Only 'pointwise' takes a quoted equation, not '{c[0]}'.")
        return ("pointwise", (_unquote(str(c[1])),))

    def ib_builtin(self, c: List[Any]) -> Tuple[str, Tuple[Any, ...]]:
        return (str(c[0]), tuple(a for a in c[1:] if a is not None))

    def rule_stmt(self, c: List[Any]) -> "RawRule":
        name, open_names = str(c[0]), c[1] or ()
        concl, where = c[-2], c[-1] or ()
        premises = tuple(p for p in c[2:-2] if p is not None)
        _, source, label, beta, target = concl
        return RawRule(name, source, label, target, premises, beta, tuple(where), tuple(open_names))

    def open_clause(self, c: List[Token]) -> Tuple[str, ...]:
        return tuple(str(t) for t in c)

    def p_pos(self, c: List[Any]) -> Premise:
        return ("pos", str(c[0]), c[1], str(c[2])[1:])

    def p_wtrans(self, c: List[Any]) -> Premise:
        return ("wtrans", str(c[0]), c[1], str(c[2]), str(c[3]))

    def p_neg(self, c: List[Any]) -> Premise:
        return ("neg", str(c[0]), c[1])

    def p_total(self, c: List[Any]) -> Premise:
        return ("total", str(c[0])[1:], c[1])

    def p_wtotal(self, c: List[Any]) -> Premise:
        return ("wtotal", str(c[0]), c[1], c[2])

    def p_support(self, c: List[Token]) -> Premise:
        return ("support", str(c[0])[1:], str(c[1]))

    def lbl(self, c: List[Token]) -> LabelRef:
        tok = c[0]
        return MetaVar(str(tok)[1:]) if tok.type == "META" else str(tok)

    def conclusion(self, c: List[Any]) -> Tuple[Any, ...]:
        return ("concl", c[0], c[1], c[2], c[3])

    def beta(self, c: List[Token]) -> str:
        return _unquote(str(c[0]))

    def convex(self, c: List[Any]) -> ConvexTarget:
        return tuple((c[i], c[i + 1]) for i in range(0, len(c), 2))

    def coef(self, c: List[Any]) -> Fraction:
        value = Fraction(str(c[0]))
        return value if c[1] is None else value / Fraction(str(c[1]))

    def where_clause(self, c: List[Any]) -> Tuple[Expr, ...]:
        return tuple(Expr(n) for n in c)

    def t_op(self, c: List[Any]) -> Term:
        name, params, args = str(c[0]), c[1], c[2]
        if params is None and args is None:
            return Term.var(name)
        return Term.op(name, *(args or ()), params=params or ())

    def t_wvar(self, c: List[Token]) -> Term:
        return Term.wvar(str(c[0])[1:])

    def t_hole(self, c: List[Token]) -> Term:
        return Term.hole(int(str(c[0])[1:]))

    def tparams(self, c: List[Any]) -> Tuple[Any, ...]:
        return tuple(p for p in c if p is not None)

    def targs(self, c: List[Any]) -> Tuple[Term, ...]:
        return tuple(t for t in c if t is not None)

    def tp_name(self, c: List[Token]) -> Any:
        return INF if str(c[0]) == "inf" else str(c[0])

    def tp_meta(self, c: List[Token]) -> MetaVar:
        return MetaVar(str(c[0])[1:])

    def tp_num(self, c: List[Token]) -> Fraction:
        return Fraction(str(c[0]))

    def tp_ratio(self, c: List[Token]) -> Fraction:
        return Fraction(str(c[0])) / Fraction(str(c[1]))

    def tp_neg(self, c: List[Token]) -> Fraction:
        return -Fraction(str(c[0]))

    def tp_negratio(self, c: List[Token]) -> Fraction:
        return -Fraction(str(c[0])) / Fraction(str(c[1]))

    def tp_set(self, c: List[Any]) -> frozenset:
        return frozenset(str(t) for t in c if t is not None)

    def tp_named(self, c: List[Any]) -> Any:
        return c[1]

    def tp_term(self, c: List[Term]) -> Term:
        return c[0]

    def tp_expr(self, c: List[Token]) -> Expr:
        return Expr.parse(_unquote(str(c[0])))


_PARSER: Optional[Lark] = None


def _parser() -> Lark:
    global _PARSER
    if _PARSER is None:
        _PARSER = Lark(
            GRAMMAR + EXPR_RULES + COMMON_TERMINALS,
            start=["start", "term_only"],
            parser="earley",
            lexer="basic",
            ambiguity="resolve",
            maybe_placeholders=True,
        )
    return _PARSER


def _parse(text: str, start: str) -> Any:
    try:
        tree: Tree = _parser().parse(text, start=start)
        return SpecTransformer().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, SpecError):
            raise e.orig_exc from e
        raise SpecError(f"Invalid spec: {e.orig_exc}") from e
    except LarkError as e:
        raise SpecError(lark_error_message(e, text)) from e


def resolve_names(t: Term, ops: Iterable[str]) -> Term:
    """Turn provisional process variables that name an operator into nullary terms."""
    names = ops if isinstance(ops, (set, frozenset)) else frozenset(ops)
    if t.kind is TermKind.ProcessVar:
        return Term.op(t.name) if t.name in names else t
    if t.kind is not TermKind.Op:
        return t
    params = tuple(resolve_names(p, names) if isinstance(p, Term) else p for p in t.params)
    children = tuple(resolve_names(ch, names) for ch in t.children)
    return Term(t.kind, t.name, params, children)


def parse_term(text: str, ops: Optional[Iterable[str]] = None) -> Term:
    """Parse `name{p,...}(t,...)`.

    Parameters
    ----------
    text: str
        The term.

    ops: Iterable[str]
        Names denoting nullary operators. When omitted every bare identifier is a
        nullary operator, which is what ground terms need.
    """
    raw: Term = _parse(text, "term_only")
    if ops is None:
        return _close_term(raw)
    return resolve_names(raw, ops)


def _close_term(t: Term) -> Term:
    if t.kind is TermKind.ProcessVar:
        return Term.op(t.name)
    if t.kind is not TermKind.Op:
        return t
    params = tuple(_close_term(p) if isinstance(p, Term) else p for p in t.params)
    return Term(t.kind, t.name, params, tuple(_close_term(c) for c in t.children))


def parse_expr(text: str) -> Expr:
    return Expr.parse(text)


@dataclass
class RawRule:
    """A rule as written, before it is read in a particular format.

    `premises` holds tagged tuples: ("pos", x, label, f), ("neg", x, label),
    ("total", f, w), ("support", f, y), ("wtotal", x, label, w) and
    ("wtrans", x, label, u, y). `target` is a term or, for convex targets,
    a tuple of (coefficient, term) pairs.
    """

    name: str
    source: Term
    label: LabelRef
    target: Union[Term, ConvexTarget]
    premises: Tuple[Premise, ...] = ()
    beta: Optional[str] = None
    where: Tuple[Expr, ...] = ()
    open_names: Tuple[str, ...] = ()

    def arg_index(self, x: str) -> int:
        for i, child in enumerate(self.source.children):
            if child.is_process_var and child.name == x:
                return i
        raise SpecError(f"Rule {self.name}: '{x}' is not an argument of {self.source}.")

    def resolved(self, ops: frozenset) -> "RawRule":
        if isinstance(self.target, Term):
            target: Union[Term, ConvexTarget] = resolve_names(self.target, ops)
        else:
            target = tuple((w, resolve_names(t, ops)) for w, t in self.target)
        return RawRule(
            self.name,
            resolve_names(self.source, ops),
            self.label,
            target,
            self.premises,
            self.beta,
            self.where,
            self.open_names,
        )


@dataclass
class InterpDecl:
    name: str
    entries: List[Tuple[str, str, Tuple[Any, ...]]] = field(default_factory=list)


@dataclass
class SpecDocument:
    """Everything a spec file declares, independent of its rule format."""

    format: SpecFormat = SpecFormat.Wfsos
    monoid: Optional[str] = None
    labels: List[str] = field(default_factory=list)
    constants: Dict[str, Term] = field(default_factory=dict)
    sigma: Signature = field(default_factory=lambda: Signature("process"))
    theta: Signature = field(default_factory=lambda: Signature("weight"))
    interps: List[InterpDecl] = field(default_factory=list)
    rules: List[RawRule] = field(default_factory=list)
    name: str = "spec"

    def get_monoid(self, default: str) -> WeightMonoid:
        try:
            return get_monoid(self.monoid or default)
        except ValueError as e:
            raise SpecError(str(e)) from e

    @property
    def ops(self) -> frozenset:
        return self.sigma.names | self.theta.names | frozenset(self.constants)


def parse_document(text: str, name: str = "spec") -> SpecDocument:
    statements = _parse(text, "start")
    doc = SpecDocument(name=name)
    seen_format = False
    for stmt in statements:
        if isinstance(stmt, RawRule):
            doc.rules.append(stmt)
            continue
        tag = stmt[0]
        if tag == "format":
            if seen_format:
                raise SpecError("The format is declared twice.")
            try:
                doc.format = SpecFormat.validate(stmt[1])
            except ValueError as e:
                raise SpecError(str(e)) from e
            seen_format = True
        elif tag == "monoid":
            doc.monoid = stmt[1]
        elif tag == "labels":
            doc.labels.extend(stmt[1])
        elif tag == "const":
            if stmt[1] in doc.constants:
                raise SpecError(f"Constant '{stmt[1]}' is defined twice.")
            doc.constants[stmt[1]] = stmt[2]
        elif tag == "signature":
            sig = doc.sigma if stmt[1] == "process" else doc.theta
            for decl in stmt[2]:
                sig.add(decl)
        elif tag == "interp":
            doc.interps.append(InterpDecl(stmt[1], list(stmt[2])))
    if len(set(doc.labels)) != len(doc.labels):
        raise SpecError(f"Labels {doc.labels} contain duplicates.")
    ops = doc.ops
    doc.constants = {k: resolve_names(v, ops) for k, v in doc.constants.items()}
    doc.rules = [r.resolved(ops) for r in doc.rules]
    return doc


def build_interpretation(doc: SpecDocument, monoid: WeightMonoid) -> Interpretation:
    """The document's interpretation; a spec without one gets an empty table."""
    default_base = INF if monoid.has_infinity else monoid.one
    if not doc.interps:
        return Interpretation("default", doc.theta, {}, default_base, monoid)
    if len(doc.interps) > 1:
        raise SpecError(f"Expected one interp block, found {len(doc.interps)}.")
    decl = doc.interps[0]
    rules: Dict[str, EvalRule] = {}
    base: Any = default_base
    for op, name, args in decl.entries:
        if op == "base":
            if name not in ("dirac", "dirac_process") or len(args) != 1:
                raise SpecError("The base of an interpretation must be dirac(<weight>).")
            base = args[0]
            continue
        if op in rules:
            raise SpecError(f"Operator '{op}' has two eval rules in interp {decl.name}.")
        try:
            rules[op] = builtin(name, *args)
        except InterpretationError as e:
            raise SpecError(f"interp {decl.name}, operator {op}: {e}") from e
    try:
        base = monoid.coerce(base)
    except ValueError as e:
        raise SpecError(f"Base weight of interp {decl.name}: {e}") from e
    return Interpretation(decl.name, doc.theta, rules, base, monoid)


def wfsos_rule(raw: RawRule) -> WfsosRule:
    pos: List[PosPremise] = []
    neg: List[NegPremise] = []
    totals: List[TotalPremise] = []
    supports: List[SupportPremise] = []
    for prem in raw.premises:
        kind = prem[0]
        if kind == "pos":
            pos.append(PosPremise(raw.arg_index(prem[1]), prem[2], prem[3]))
        elif kind == "neg":
            neg.append(NegPremise(raw.arg_index(prem[1]), prem[2]))
        elif kind == "total":
            totals.append(TotalPremise(prem[1], prem[2]))
        elif kind == "support":
            supports.append(SupportPremise(prem[1], prem[2]))
        else:
            raise SpecError(f"Rule {raw.name}: premise form '{kind}' is not a WFSOS premise.")
    if not isinstance(raw.target, Term):
        raise SpecError(f"Rule {raw.name}: a WFSOS target is a weight term, not a convex combination.")
    if raw.beta is not None:
        raise SpecError(f"Rule {raw.name}: WFSOS conclusions carry no weight function.")
    return WfsosRule(
        name=raw.name,
        source=raw.source,
        label=raw.label,
        target=raw.target,
        pos=tuple(pos),
        neg=tuple(neg),
        totals=tuple(totals),
        supports=tuple(supports),
        where=raw.where,
        open_args=frozenset(raw.arg_index(x) for x in raw.open_names),
    )


def wfsos_from_document(doc: SpecDocument) -> WfsosSpec:
    monoid = doc.get_monoid("rat_inf_plus")
    return WfsosSpec(
        monoid=monoid,
        labels=tuple(doc.labels),
        sigma=doc.sigma,
        theta=doc.theta,
        rules=[wfsos_rule(r) for r in doc.rules],
        interp=build_interpretation(doc, monoid),
        constants=dict(doc.constants),
        name=doc.name,
    )


def parse_spec(text: str, name: str = "spec") -> WfsosSpec:
    """Parse a `format wfsos` document."""
    doc = parse_document(text, name)
    if doc.format is not SpecFormat.Wfsos:
        raise SpecError(f"Expected a wfsos spec, got format {doc.format.value}; use load_spec.")
    return wfsos_from_document(doc)


SpecFormatName = Literal["wfsos", "segala", "wgsos", "pepa"]


def load_spec(
    text: str, fmt: Optional[Union[SpecFormat, SpecFormatName]] = None, name: str = "spec"
) -> WfsosSpec:
    """The WFSOS spec denoted by `text` in any supported input format.

    Segala and W-GSOS documents are translated; PEPA models get the PEPA rules.
    """
    from wfsosWB.frontends.pepa import parse_pepa, pepa_wfsos
    from wfsosWB.frontends.segala import segala_from_document, translate_segala
    from wfsosWB.frontends.wgsos import translate_wgsos, wgsos_from_document

    wanted = None if fmt is None else SpecFormat.validate(fmt)
    if wanted is SpecFormat.Pepa:
        return pepa_wfsos(parse_pepa(text))
    doc = parse_document(text, name)
    if wanted is not None and doc.format is not wanted:
        raise SpecError(f"File declares format {doc.format.value}, expected {wanted.value}.")
    if doc.format is SpecFormat.Segala:
        return translate_segala(segala_from_document(doc))
    if doc.format is SpecFormat.Wgsos:
        return translate_wgsos(wgsos_from_document(doc))
    if doc.format is SpecFormat.Pepa:
        raise SpecError("PEPA models use PEPA syntax, not the spec DSL.")
    return wfsos_from_document(doc)


def detect_format(path: Union[str, Path]) -> Optional[SpecFormat]:
    return SpecFormat.Pepa if Path(path).suffix.lower() == ".pepa" else None


def _dump_interp(interp: Interpretation) -> str:
    entries = [f"{op}: {rule}" for op, rule in sorted(interp.rules.items())]
    entries.append(f"base: dirac({format_weight(interp.base_weight)})")
    return f"interp {interp.name} = {{ " + "; ".join(entries) + " }"


def dump_spec(spec: WfsosSpec) -> str:
    """Print `spec` in the DSL; `parse_spec(dump_spec(s))` rebuilds an equal spec
    as long as every eval rule is a catalogued builtin."""
    lines = [
        "format wfsos;",
        f"monoid {spec.monoid.id};",
        "labels " + ", ".join(spec.labels) + ";",
        str(spec.sigma),
        str(spec.theta),
    ]
    for cname, body in sorted(spec.constants.items()):
        lines.append(f"const {cname} = {body};")
    lines.append(_dump_interp(spec.interp) + ";")
    lines.extend(format_rule(r) for r in spec.rules)
    return "\n".join(lines) + "\n"


def format_terms(terms: Sequence[Term]) -> str:
    return "; ".join(str(t) for t in terms)


def parse_roots(text: str, ops: Optional[Iterable[str]] = None) -> List[Term]:
    """Split `"t1; t2"` and parse each root."""
    parts = [p.strip() for p in text.split(";")]
    return [parse_term(p, ops) for p in parts if p]

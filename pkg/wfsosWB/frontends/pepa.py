"""
PEPA: concrete syntax, the WFSOS specification of its semantics and its W-GSOS
presentation.

A model is a sequence of statements followed by an optional system expression:

    law minimal;                // or multiplicative
    labels a, b;                // optional; tau is always added
    P = (a, 1).Q + (b, 1/2).P;
    Q = (a, 2).P;
    P <a> (Q \\ {b})

Operators, loosest first: choice `+`, cooperation `P <a,b> Q` (`P || Q` for the
empty set), hiding `P \\ {a}`, prefix `(a, r).P`. `nil` and `0` denote the inactive
process; other identifiers are constants. Rates are positive exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from lark import Lark, Token, Transformer
from lark.exceptions import LarkError, VisitError
from numpy.random import Generator

from wfsosWB._constants import DEFAULT_SAMPLE_DEPTH, TAU
from wfsosWB._types import RateLaw
from wfsosWB.syntax import Term, TermKind
from wfsosWB.utils import SpecError
from wfsosWB.weights import format_weight
from wfsosWB.wexpr import lark_error_message

PROCESS_OPS = frozenset({"nil", "prefix", "plus", "coop", "hide"})
SAMPLE_RATES: Tuple[Fraction, ...] = (Fraction(1), Fraction(2), Fraction(1, 2), Fraction(3))

PEPA_GRAMMAR = r"""
start: _stmt* [system]
process_only: process

_stmt: law_stmt | labels_stmt | const_stmt
law_stmt: "law" NAME ";"
labels_stmt: "labels" NAME ("," NAME)* ";"
const_stmt: NAME "=" process ";"
system: process ";"?

?process: choice
?choice: cooperation
       | choice "+" cooperation -> plus
?cooperation: hidden
            | cooperation "<" [NAME ("," NAME)*] ">" hidden -> coop
            | cooperation "||" hidden -> par
?hidden: prefixed
       | hidden "\\" "{" [NAME ("," NAME)*] "}" -> hide
?prefixed: "(" NAME "," rate ")" "." prefixed -> prefix
         | atom
?atom: "nil" -> nil
     | "0" -> nil
     | NAME -> name
     | "(" process ")"
rate: DECIMAL ["/" DECIMAL]

NAME: /[A-Za-z_][A-Za-z0-9_]*/
DECIMAL: /\d+(\.\d+)?/
COMMENT: /\/\/[^\n]*/
%import common.WS
%ignore WS
%ignore COMMENT
"""


class PepaTransformer(Transformer):
    def start(self, c: List[Any]) -> List[Any]:
        return [s for s in c if s is not None]

    def process_only(self, c: List[Term]) -> Term:
        return c[0]

    def law_stmt(self, c: List[Token]) -> Tuple[str, RateLaw]:
        try:
            return ("law", RateLaw.validate(str(c[0])))
        except ValueError as e:
            raise SpecError(str(e)) from e

    def labels_stmt(self, c: List[Token]) -> Tuple[str, List[str]]:
        return ("labels", [str(t) for t in c])

    def const_stmt(self, c: List[Any]) -> Tuple[str, str, Term]:
        name = str(c[0])
        if name in PROCESS_OPS:
            raise SpecError(f"'{name}' is a PEPA operator and cannot name a constant.")
        return ("const", name, c[1])

    def system(self, c: List[Term]) -> Tuple[str, Term]:
        return ("system", c[0])

    def plus(self, c: List[Term]) -> Term:
        return Term.op("plus", c[0], c[1])

    def coop(self, c: List[Any]) -> Term:
        left, right = c[0], c[-1]
        labels = _label_set(c[1:-1])
        return Term.op("coop", left, right, params=(labels,))

    def par(self, c: List[Term]) -> Term:
        return Term.op("coop", c[0], c[1], params=(frozenset(),))

    def hide(self, c: List[Any]) -> Term:
        return Term.op("hide", c[0], params=(_label_set(c[1:]),))

    def prefix(self, c: List[Any]) -> Term:
        return Term.op("prefix", c[2], params=(str(c[0]), c[1]))

    def nil(self, c: List[Any]) -> Term:
        return Term.op("nil")

    def name(self, c: List[Token]) -> Term:
        return Term.op(str(c[0]))

    def rate(self, c: List[Any]) -> Fraction:
        num = Fraction(str(c[0]))
        den = Fraction(1) if c[1] is None else Fraction(str(c[1]))
        if den == 0:
            raise SpecError(f"Rate {c[0]}/{c[1]} divides by zero.")
        r = num / den
        if r <= 0:
            raise SpecError(f"Rate {format_weight(r)} is not positive.")
        return r


def _label_set(tokens: Sequence[Any]) -> FrozenSet[str]:
    labels = frozenset(str(t) for t in tokens if t is not None)
    if TAU in labels:
        raise SpecError(f"'{TAU}' cannot be synchronized on or hidden.")
    return labels


_PARSER: Optional[Lark] = None


def _parser() -> Lark:
    global _PARSER
    if _PARSER is None:
        _PARSER = Lark(
            PEPA_GRAMMAR,
            start=["start", "process_only"],
            parser="lalr",
            maybe_placeholders=True,
        )
    return _PARSER


def _parse(text: str, start: str) -> Any:
    try:
        tree = _parser().parse(text, start=start)
        return PepaTransformer().transform(tree)
    except VisitError as e:
        if isinstance(e.orig_exc, SpecError):
            raise e.orig_exc from e
        raise SpecError(f"Invalid PEPA model: {e.orig_exc}") from e
    except LarkError as e:
        raise SpecError(lark_error_message(e, text)) from e


@dataclass
class PepaModel:
    """A PEPA model: constant definitions, the action labels (tau included), the
    cooperation rate law and an optional system process."""

    constants: Dict[str, Term] = field(default_factory=dict)
    labels: Tuple[str, ...] = (TAU,)
    law: RateLaw = RateLaw.Minimal
    system: Optional[Term] = None

    @property
    def actions(self) -> Tuple[str, ...]:
        """The labels other than tau."""
        return tuple(a for a in self.labels if a != TAU)

    def roots(self) -> List[Term]:
        if self.system is not None:
            return [self.system]
        return [Term.op(name) for name in sorted(self.constants)]

    def with_labels(self, labels: Sequence[str]) -> "PepaModel":
        return PepaModel(
            dict(self.constants), tuple(sorted(set(labels) | {TAU})), self.law, self.system
        )


def used_labels(t: Term) -> Set[str]:
    used: Set[str] = set()
    for s in t.subterms():
        if s.name == "prefix" and s.params:
            used.add(s.params[0])
        elif s.name in ("coop", "hide") and s.params:
            used.update(s.params[0])
    return used


def _check_references(t: Term, constants: Dict[str, Term], where: str) -> None:
    for s in t.subterms():
        if s.kind is TermKind.Op and not s.children and not s.params and s.name != "nil":
            if s.name not in constants:
                raise SpecError(f"Undefined constant '{s.name}' in {where}.")


def parse_pepa(text: str) -> PepaModel:
    """Parse a PEPA model.

    Raises
    ------
    SpecError
        On syntax errors (with line and column), undefined or doubly defined
        constants, nonpositive rates, tau in a cooperation or hiding set, and labels
        missing from an explicit `labels` declaration.
    """
    statements = _parse(text, "start")
    constants: Dict[str, Term] = {}
    declared: Optional[List[str]] = None
    law = RateLaw.Minimal
    system: Optional[Term] = None
    for stmt in statements:
        tag = stmt[0]
        if tag == "law":
            law = stmt[1]
        elif tag == "labels":
            declared = (declared or []) + stmt[1]
        elif tag == "const":
            if stmt[1] in constants:
                raise SpecError(f"Constant '{stmt[1]}' is defined twice.")
            constants[stmt[1]] = stmt[2]
        elif tag == "system":
            system = stmt[1]
    for cname, body in constants.items():
        _check_references(body, constants, f"the definition of {cname}")
    if system is not None:
        _check_references(system, constants, "the system")
    used: Set[str] = set()
    for body in constants.values():
        used |= used_labels(body)
    if system is not None:
        used |= used_labels(system)
    if declared is not None:
        missing = sorted(used - set(declared) - {TAU})
        if missing:
            raise SpecError(f"Labels {missing} are used but not declared.")
        labels = set(declared)
    else:
        labels = used
    return PepaModel(constants, tuple(sorted(labels | {TAU})), law, system)


def parse_pepa_process(text: str, model: Optional[PepaModel] = None) -> Term:
    """Parse one PEPA process expression, resolving constants against `model`."""
    t: Term = _parse(text, "process_only")
    _check_references(t, model.constants if model is not None else {}, f"'{text}'")
    if model is not None:
        stray = sorted(used_labels(t) - set(model.labels))
        if stray:
            raise SpecError(f"Labels {stray} of '{text}' are not labels of the model.")
    return t


_PREC = {"plus": 1, "coop": 2, "hide": 3, "prefix": 4}


def format_pepa(t: Term) -> str:
    """Print a PEPA term in concrete syntax with minimal parentheses."""
    return _fmt(t)[0]


def _fmt(t: Term) -> Tuple[str, int]:
    if not t.children:
        return (t.name, 5)
    prec = _PREC.get(t.name)
    if prec is None:
        raise SpecError(f"{t} is not a PEPA term.")

    def wrap(sub: Term, at_least: int) -> str:
        text, p = _fmt(sub)
        return text if p >= at_least else f"({text})"

    if t.name == "prefix":
        a, r = t.params
        return (f"({a}, {format_weight(r)}).{wrap(t.children[0], 4)}", 4)
    if t.name == "hide":
        labels = ", ".join(sorted(t.params[0]))
        return (f"{wrap(t.children[0], 3)} \\ {{{labels}}}", 3)
    if t.name == "coop":
        labels = sorted(t.params[0])
        op = f"<{', '.join(labels)}>" if labels else "||"
        return (f"{wrap(t.children[0], 2)} {op} {wrap(t.children[1], 3)}", 2)
    return (f"{wrap(t.children[0], 1)} + {wrap(t.children[1], 2)}", 1)


def _subsets(items: Sequence[str]) -> List[Tuple[str, ...]]:
    return [c for k in range(len(items) + 1) for c in combinations(items, k)]


def _constants_text(model: PepaModel) -> List[str]:
    return [f"const {name} = {body};" for name, body in sorted(model.constants.items())]


def pepa_spec_text(model: PepaModel, name: str = "pepa") -> str:
    """The WFSOS specification of `model`'s semantics in the spec DSL."""
    labels = ", ".join(model.labels)
    law = "coop_min_law(coop)" if model.law is RateLaw.Minimal else "coop_product_law(coop)"
    base = "inf" if model.law is RateLaw.Minimal else "1"
    lines = [
        f"// {name}: PEPA with the {model.law.value} rate law",
        "format wfsos;",
        "monoid rat_inf_plus;",
        f"labels {labels};",
        "signature process { nil/0; prefix{label,weight}/1; plus/2; coop{labelset}/2; hide{labelset}/1 }",
        "signature weight { empty/0; diamond{weight}/1; wsum/2; wpar{labelset}/2 }",
        *_constants_text(model),
        f"interp {name} = {{ empty: zero; diamond: reshape; wsum: pointwise_sum; wpar: {law}; base: dirac({base}) }};",
        "rule nil: => nil --$b--> empty;",
        "rule act [open x]: => prefix{$a,$r}(x) --$a--> diamond{$r}(x);",
        "rule off [open x]: => prefix{$a,$r}(x) --$b--> empty where $b != $a;",
        "rule choice [open x, y]: x --$a--> %f, y --$a--> %g => plus(x, y) --$a--> wsum(%f, %g);",
        "rule sync [open x, y]: x --$a--> %f, y --$a--> %g => coop{$L}(x, y) --$a--> wpar{$L}(%f, %g) where $a in $L;",
        "rule interleave [open x, y]: x --$a--> %f, y --$a--> %g => "
        "coop{$L}(x, y) --$a--> wsum(wpar{$L}(%f, y), wpar{$L}(x, %g)) where $a notin $L;",
        "rule hide_pass [open x]: x --$a--> %f => hide{$L}(x) --$a--> %f where $a notin $L, $a != tau;",
        "rule hide_block [open x]: => hide{$L}(x) --$a--> empty where $a in $L;",
    ]
    for hidden in _subsets(model.actions):
        raced = list(hidden) + [TAU]
        premises = ", ".join(f"x --{b}--> %f_{b}" for b in raced)
        target = f"%f_{raced[-1]}"
        for b in reversed(raced[:-1]):
            target = f"wsum(%f_{b}, {target})"
        rule = "hide_tau_" + ("_".join(hidden) if hidden else "none")
        lines.append(
            f"rule {rule} [open x]: {premises} => hide{{{{{','.join(hidden)}}}}}(x) --tau--> {target};"
        )
    return "\n".join(lines) + "\n"


def pepa_wfsos(model: PepaModel, name: str = "pepa") -> Any:
    """The validated WFSOS specification of `model` (a `WfsosSpec`)."""
    from wfsosWB.dsl import parse_spec
    from wfsosWB.wfsos import ensure_valid

    return ensure_valid(parse_spec(pepa_spec_text(model, name), name))


def pepa_wgsos_text(model: PepaModel, name: str = "pepa_wgsos") -> str:
    """`model`'s semantics as W-GSOS rules over (rationals with infinity, +)."""
    if model.law is RateLaw.Minimal:
        sync_beta = "u * v * min($w1, $w2) / ($w1 * $w2)"
    else:
        sync_beta = "u * v"
    lines = [
        f"// {name}: PEPA as W-GSOS rules",
        "format wgsos;",
        "monoid rat_inf_plus;",
        f"labels {', '.join(model.labels)};",
        "signature process { nil/0; prefix{label,weight}/1; plus/2; coop{labelset}/2; hide{labelset}/1 }",
        *_constants_text(model),
        'rule act: => prefix{$a,$r}(x) --$a,"$r"--> x;',
        'rule choice_l: x --$a,u--> y => plus(x, z) --$a,"u"--> y;',
        'rule choice_r: z --$a,u--> y => plus(x, z) --$a,"u"--> y;',
        "rule sync: total(x, $a) = $w1, total(z, $a) = $w2, x --$a,u--> y1, z --$a,v--> y2 => "
        f'coop{{$L}}(x, z) --$a,"{sync_beta}"--> coop{{$L}}(y1, y2) where $a in $L;',
        'rule left: x --$a,u--> y => coop{$L}(x, z) --$a,"u"--> coop{$L}(y, z) where $a notin $L;',
        'rule right: z --$a,u--> y => coop{$L}(x, z) --$a,"u"--> coop{$L}(x, y) where $a notin $L;',
        'rule hide_pass: x --$a,u--> y => hide{$L}(x) --$a,"u"--> y where $a notin $L, $a != tau;',
        'rule hide_tau: x --$b,u--> y => hide{$L}(x) --tau,"u"--> y where $b in $L;',
        'rule hide_own: x --tau,u--> y => hide{$L}(x) --tau,"u"--> y;',
    ]
    return "\n".join(lines) + "\n"


def pepa_wgsos(model: PepaModel, name: str = "pepa_wgsos") -> Any:
    """`model` as a `WGsosSpec`; translating it should give back `pepa_wfsos`'s system."""
    from wfsosWB.dsl import parse_document
    from wfsosWB.frontends.wgsos import wgsos_from_document

    return wgsos_from_document(parse_document(pepa_wgsos_text(model, name), name))


def sample_pepa_term(
    rng: Generator,
    actions: Sequence[str],
    depth: int = DEFAULT_SAMPLE_DEPTH,
    rates: Sequence[Fraction] = SAMPLE_RATES,
    constants: Sequence[str] = (),
) -> Term:
    """Draw a random PEPA term of depth at most `depth` over the action labels.

    Leaves are `nil` or one of `constants`.
    """
    acts = sorted(actions)
    if not acts:
        raise ValueError("Cannot sample PEPA terms without action labels.")

    def leaf() -> Term:
        if constants and rng.random() < 0.3:
            return Term.op(constants[int(rng.integers(0, len(constants)))])
        return Term.op("nil")

    def labelset() -> FrozenSet[str]:
        mask = rng.integers(0, 2, size=len(acts))
        return frozenset(a for a, keep in zip(acts, mask) if keep)

    def go(d: int) -> Term:
        if d <= 0:
            return leaf()
        kind = int(rng.integers(0, 6))
        if kind == 0:
            return leaf()
        if kind <= 2:
            a = acts[int(rng.integers(0, len(acts)))]
            r = rates[int(rng.integers(0, len(rates)))]
            return Term.op("prefix", go(d - 1), params=(a, r))
        if kind == 3:
            return Term.op("plus", go(d - 1), go(d - 1))
        if kind == 4:
            return Term.op("coop", go(d - 1), go(d - 1), params=(labelset(),))
        return Term.op("hide", go(d - 1), params=(labelset(),))

    return go(depth)


def pepa_sampler(
    actions: Sequence[str], depth: int = DEFAULT_SAMPLE_DEPTH, constants: Sequence[str] = ()
) -> Any:
    """A `rng -> Term` sampler for the congruence suite."""

    def sample(rng: Generator) -> Term:
        return sample_pepa_term(rng, actions, depth, constants=constants)

    return sample


def pepa_variants(t: Term) -> List[Term]:
    """Terms bisimilar to `t` by the PEPA laws (used to seed congruence trials)."""
    nil = Term.op("nil")
    return [
        Term.op("plus", t, nil),
        Term.op("plus", nil, t),
        Term.op("hide", t, params=(frozenset(),)),
    ]

"""
GSOS rules for Segala systems and their translation into WFSOS.

A rule has positive premises `x --a--> %mu` (mu ranges over the distributions of
x on a), negative premises `x -/b->`, support premises `%mu ==> y` and a target
that is a convex combination `w_1 * t_1 + ... + w_m * t_m` of terms over the
arguments, the support variables and the distribution variables. Every
occurrence of a distribution variable in t_i is sampled independently, so t_i
denotes the product distribution over its instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from wfsosWB._constants import DEFAULT_MAX_DEPTH
from wfsosWB._types import FormatBullet, Label, SchemaKind
from wfsosWB.interp import Interpretation, builtin
from wfsosWB.syntax import MetaVar, OpDecl, Signature, Term, TermKind, instantiate
from wfsosWB.utils import BudgetExhaustedError, FormatViolationError, SpecError
from wfsosWB.weights import RAT_PLUS, WeightFn, canonical_key
from wfsosWB.wexpr import Expr, expr_env
from wfsosWB.wfsos import (
    LabelRef,
    NegPremise,
    PosPremise,
    SupportPremise,
    Violation,
    WfsosRule,
    WfsosSpec,
    ensure_valid,
    resolve_label,
)

SEGALA_THETA = Signature.of(
    "weight",
    [
        OpDecl("convex", (SchemaKind.Weight,), None, repeat_last=True),
        OpDecl("lift", (SchemaKind.Text, SchemaKind.Term), None),
        OpDecl("colour", (SchemaKind.Weight,), 1),
    ],
)


@dataclass(frozen=True)
class SegalaRule:
    name: str
    source: Term
    label: LabelRef
    target: Tuple[Tuple[Fraction, Term], ...]
    pos: Tuple[PosPremise, ...] = ()
    neg: Tuple[NegPremise, ...] = ()
    supports: Tuple[SupportPremise, ...] = ()
    where: Tuple[Expr, ...] = ()

    @property
    def op(self) -> str:
        return self.source.name

    @property
    def arity(self) -> int:
        return len(self.source.children)

    def label_metavars(self) -> FrozenSet[str]:
        labels = [self.label, *(p.label for p in self.pos), *(n.label for n in self.neg)]
        return frozenset(l.name for l in labels if isinstance(l, MetaVar))


@dataclass
class SegalaGsosSpec:
    labels: Tuple[Label, ...]
    sigma: Signature
    rules: List[SegalaRule]
    constants: Dict[str, Term] = field(default_factory=dict)
    name: str = "segala"

    def __post_init__(self) -> None:
        self.labels = tuple(sorted(set(self.labels)))

    def rules_for(self, op: str, arity: int) -> List[SegalaRule]:
        return [r for r in self.rules if r.op == op and r.arity == arity]


def check_convex_weights(rule: SegalaRule) -> Optional[str]:
    weights = [w for w, _ in rule.target]
    if not weights:
        return "the target has no summands"
    bad = [w for w in weights if not 0 < w <= 1]
    if bad:
        return f"weights {[str(w) for w in bad]} are not in (0, 1]"
    if sum(weights) != 1:
        return f"weights sum to {sum(weights)}, not 1"
    return None


def segala_from_document(doc: Any) -> SegalaGsosSpec:
    """Read a parsed `format segala` document (see `wfsosWB.dsl`)."""
    if doc.monoid not in (None, "rat_plus", "rat"):
        raise SpecError(f"Segala specifications are over rat_plus, not {doc.monoid}.")
    rules = []
    for raw in doc.rules:
        pos: List[PosPremise] = []
        neg: List[NegPremise] = []
        supports: List[SupportPremise] = []
        for prem in raw.premises:
            kind = prem[0]
            if kind == "pos":
                pos.append(PosPremise(raw.arg_index(prem[1]), prem[2], prem[3]))
            elif kind == "neg":
                neg.append(NegPremise(raw.arg_index(prem[1]), prem[2]))
            elif kind == "support":
                supports.append(SupportPremise(prem[1], prem[2]))
            else:
                raise SpecError(f"Rule {raw.name}: premise form '{kind}' is not a Segala premise.")
        if raw.beta is not None:
            raise SpecError(f"Rule {raw.name}: Segala conclusions carry no weight function.")
        if raw.open_names:
            raise SpecError(f"Rule {raw.name}: every argument of a Segala rule is open already.")
        target = ((Fraction(1), raw.target),) if isinstance(raw.target, Term) else tuple(raw.target)
        rules.append(
            SegalaRule(raw.name, raw.source, raw.label, target, tuple(pos), tuple(neg), tuple(supports), raw.where)
        )
    return SegalaGsosSpec(tuple(doc.labels), doc.sigma, rules, dict(doc.constants), doc.name)


def _occurrences(t: Term) -> Tuple[Term, List[str]]:
    """Replace every distribution-variable occurrence of `t` by a fresh hole,
    numbered left to right."""
    found: List[str] = []

    def go(s: Term) -> Term:
        if s.kind is TermKind.WeightVar:
            found.append(s.name)
            return Term.hole(len(found))
        if s.kind is not TermKind.Op or not s.children:
            return s
        return s.with_children([go(c) for c in s.children])

    return go(t), found


def _summand(t: Term) -> Term:
    template, occ = _occurrences(t)
    beta = Expr.parse(" * ".join(f"u{k}" for k in range(1, len(occ) + 1)) or "1")
    coloured = [Term.op("colour", Term.wvar(v), params=(Fraction(k),)) for k, v in enumerate(occ, start=1)]
    return Term.op("lift", *coloured, params=(beta, template))


def translate_segala(spec: SegalaGsosSpec) -> WfsosSpec:
    """The WFSOS specification of `spec`: premises carry over, every argument is
    open, and the target becomes a convex combination of product lifts.

    Raises
    ------
    FormatViolationError
        If some target's weights are not in (0, 1] or do not sum to 1, or the
        translated rules are not well formed.
    """
    bad = []
    for rule in spec.rules:
        msg = check_convex_weights(rule)
        if msg is not None:
            bad.append(Violation(rule.name, FormatBullet.ConvexWeights, msg))
    if bad:
        raise FormatViolationError(bad)
    rules = []
    for rule in spec.rules:
        weights = tuple(w for w, _ in rule.target)
        target = Term.op("convex", *(_summand(t) for _, t in rule.target), params=weights)
        rules.append(
            WfsosRule(
                name=rule.name,
                source=rule.source,
                label=rule.label,
                target=target,
                pos=rule.pos,
                neg=rule.neg,
                supports=rule.supports,
                where=rule.where,
                open_args=frozenset(range(rule.arity)),
            )
        )
    interp = Interpretation(
        f"{spec.name}_theta",
        SEGALA_THETA,
        {
            "convex": builtin("convex_combination"),
            "lift": builtin("multiadditive_apply"),
            "colour": builtin("colour"),
        },
        RAT_PLUS.one,
        RAT_PLUS,
    )
    out = WfsosSpec(
        monoid=RAT_PLUS,
        labels=spec.labels,
        sigma=spec.sigma,
        theta=SEGALA_THETA,
        rules=rules,
        interp=interp,
        constants=dict(spec.constants),
        name=spec.name,
    )
    return ensure_valid(out)


SegalaSuccessors = Dict[Label, FrozenSet[WeightFn]]


class SegalaDeriver:
    """Direct semantics of a Segala GSOS specification."""

    def __init__(self, spec: SegalaGsosSpec, max_depth: int = DEFAULT_MAX_DEPTH) -> None:
        self.spec = spec
        self.max_depth = max_depth
        self._memo: Dict[Term, SegalaSuccessors] = {}

    def successors(self, p: Term, depth: int = 0) -> SegalaSuccessors:
        if p in self._memo:
            return self._memo[p]
        if not p.children and not p.params and p.name in self.spec.constants:
            if depth >= self.max_depth:
                raise BudgetExhaustedError(f"constant unfolding of {p} exceeded max_depth={self.max_depth}")
            result = self.successors(self.spec.constants[p.name], depth + 1)
            self._memo[p] = result
            return result
        if p.name not in self.spec.sigma:
            raise SpecError(f"Operator '{p.name}' of {p} is not in the process signature.")
        found: Dict[Label, Set[WeightFn]] = {a: set() for a in self.spec.labels}
        for rule in self.spec.rules_for(p.name, len(p.children)):
            bindings = _match(rule.source.params, p.params)
            if bindings is None:
                continue
            free = sorted(rule.label_metavars() - bindings.keys())
            for values in product(self.spec.labels, repeat=len(free)):
                local = dict(bindings)
                local.update(zip(free, values))
                for label, mu in self._fire(rule, p, local, depth):
                    found[label].add(mu)
        result = {a: frozenset(fns) for a, fns in found.items()}
        self._memo[p] = result
        return result

    def _fire(self, rule: SegalaRule, p: Term, local: Dict[str, Any], depth: int) -> List[Tuple[Label, WeightFn]]:
        env = expr_env(local)
        for cond in rule.where:
            if cond.metavars() <= local.keys() and not cond.holds(env):
                return []

        def child(i: int, label: LabelRef) -> FrozenSet[WeightFn]:
            return self.successors(p.children[i], depth)[resolve_label(label, local)]

        if any(not child(q.arg, q.label) for q in rule.pos):
            return []
        if any(child(q.arg, q.label) for q in rule.neg):
            return []
        label = resolve_label(rule.label, local)
        options = [sorted(child(q.arg, q.label), key=lambda mu: mu.sort_key()) for q in rule.pos]
        sigma_x = {c.name: arg for c, arg in zip(rule.source.children, p.children)}
        out = []
        for combo in product(*options):
            mus = {q.var: mu for q, mu in zip(rule.pos, combo)}
            points = [sorted(mus[s.var], key=canonical_key) for s in rule.supports]
            for ys in product(*points):
                names = dict(sigma_x)
                names.update({s.target: y for s, y in zip(rule.supports, ys)})
                acc: Dict[Term, Fraction] = {}
                for w, t in rule.target:
                    for q, weight in _distribution(instantiate(t, local, strict=True), names, mus):
                        acc[q] = acc.get(q, Fraction(0)) + w * weight
                out.append((label, WeightFn(acc, RAT_PLUS)))
        return out


def _distribution(
    t: Term, names: Dict[str, Term], mus: Dict[str, WeightFn]
) -> List[Tuple[Term, Fraction]]:
    """The product distribution of `t`: each distribution-variable occurrence is
    drawn independently."""
    if t.kind is TermKind.WeightVar:
        return [(q, Fraction(w)) for q, w in mus[t.name].sorted_items()]
    if t.kind is TermKind.ProcessVar:
        return [(names[t.name], Fraction(1))]
    if not t.children:
        return [(t, Fraction(1))]
    out = []
    for choice in product(*(_distribution(c, names, mus) for c in t.children)):
        weight = Fraction(1)
        for _, w in choice:
            weight *= w
        out.append((t.with_children([q for q, _ in choice]), weight))
    return out


def _match(pattern: Sequence[Any], params: Sequence[Any]) -> Optional[Dict[str, Any]]:
    if len(pattern) != len(params):
        return None
    bindings: Dict[str, Any] = {}
    for pat, value in zip(pattern, params):
        if isinstance(pat, MetaVar):
            if bindings.setdefault(pat.name, value) != value:
                return None
        elif pat != value:
            return None
    return bindings


def segala_successors(spec: SegalaGsosSpec, p: Term) -> SegalaSuccessors:
    return SegalaDeriver(spec).successors(p)

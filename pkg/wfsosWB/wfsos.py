"""
WFSOS rules and specifications.

A rule has the shape

    x_i --a--> %f   (positive premises)     x_i -/b->  (negative premises)
    total(%f) = w   (total premises)         in(%f, y)  (support premises)
    ------------------------------------------------------------------------
                  f{params}(x_1, ..., x_n) --c--> psi

where `psi` is a weight term. Static parameters and labels may be metavariables
(`$a`); they are bound by the source operator's parameters, by enumeration over the
declared labels (for label metavariables), or by total premises whose weight is a
metavariable. Arguments marked open accept any enabled set containing the required
labels and avoiding the forbidden ones; `expand_open` turns such a rule into the
equivalent family of exact-trigger rules.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from itertools import chain, combinations, product
from typing import (
    Any,
    Dict,
    FrozenSet,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

import pandas as pd
from pandas import DataFrame

from wfsosWB._types import FormatBullet, Label
from wfsosWB.interp import Interpretation
from wfsosWB.syntax import (
    MetaVar,
    Signature,
    Term,
    TermKind,
    bind_param,
    format_param,
    instantiate,
    term_metavars,
    term_vars,
)
from wfsosWB.utils import FormatViolationError, InterpretationError
from wfsosWB.weights import Weight, WeightFn, WeightMonoid
from wfsosWB.wexpr import Expr, expr_env

LabelRef = Union[Label, MetaVar]


@dataclass(frozen=True)
class PosPremise:
    arg: int
    label: LabelRef
    var: str


@dataclass(frozen=True)
class NegPremise:
    arg: int
    label: LabelRef


@dataclass(frozen=True)
class TotalPremise:
    var: str
    weight: Any


@dataclass(frozen=True)
class SupportPremise:
    var: str
    target: str


def _label_str(label: LabelRef) -> str:
    return str(label)


def resolve_label(label: LabelRef, bindings: Mapping[str, Any]) -> LabelRef:
    if isinstance(label, MetaVar):
        return bindings.get(label.name, label)
    return label


@dataclass(frozen=True)
class WfsosRule:
    """A WFSOS rule (schema). Argument positions are 0-based."""

    name: str
    source: Term
    label: LabelRef
    target: Term
    pos: Tuple[PosPremise, ...] = ()
    neg: Tuple[NegPremise, ...] = ()
    totals: Tuple[TotalPremise, ...] = ()
    supports: Tuple[SupportPremise, ...] = ()
    where: Tuple[Expr, ...] = ()
    open_args: FrozenSet[int] = frozenset()

    @property
    def op(self) -> str:
        return self.source.name

    @property
    def arity(self) -> int:
        return len(self.source.children)

    def arg_name(self, i: int) -> str:
        child = self.source.children[i]
        return child.name if child.is_process_var else str(child)

    def premise_of(self, var: str) -> Optional[PosPremise]:
        for p in self.pos:
            if p.var == var:
                return p
        return None

    def required(self, i: int, bindings: Mapping[str, Any] = {}) -> FrozenSet[LabelRef]:
        return frozenset(resolve_label(p.label, bindings) for p in self.pos if p.arg == i)

    def forbidden(self, i: int, bindings: Mapping[str, Any] = {}) -> FrozenSet[LabelRef]:
        return frozenset(resolve_label(p.label, bindings) for p in self.neg if p.arg == i)

    def source_metavars(self) -> FrozenSet[str]:
        return term_metavars(self.source)

    def label_metavars(self) -> FrozenSet[str]:
        labels = chain((p.label for p in self.pos), (p.label for p in self.neg), (self.label,))
        return frozenset(l.name for l in labels if isinstance(l, MetaVar))

    def free_label_metavars(self) -> Tuple[str, ...]:
        """Label metavariables that must be enumerated over the declared labels."""
        return tuple(sorted(self.label_metavars() - self.source_metavars()))

    def total_metavars(self) -> FrozenSet[str]:
        return frozenset(t.weight.name for t in self.totals if isinstance(t.weight, MetaVar))

    def bound_metavars(self) -> FrozenSet[str]:
        return self.source_metavars() | self.label_metavars() | self.total_metavars()

    def used_vars(self) -> FrozenSet[str]:
        """Weight-function variables whose value matters for the conclusion."""
        in_target = {v.name for v in term_vars(self.target) if v.is_weight_var}
        return frozenset(
            in_target | {t.var for t in self.totals} | {s.var for s in self.supports}
        )

    def with_bindings(self, bindings: Mapping[str, Any], name: Optional[str] = None) -> "WfsosRule":
        """Substitute bound metavariables throughout the rule."""
        return replace(
            self,
            name=self.name if name is None else name,
            source=instantiate(self.source, bindings),
            label=resolve_label(self.label, bindings),
            target=instantiate(self.target, bindings),
            pos=tuple(replace(p, label=resolve_label(p.label, bindings)) for p in self.pos),
            neg=tuple(replace(p, label=resolve_label(p.label, bindings)) for p in self.neg),
            totals=tuple(replace(t, weight=bind_param(t.weight, bindings)) for t in self.totals),
            where=tuple(w.bind(bindings) for w in self.where),
        )

    def __str__(self) -> str:
        return format_rule(self)


def format_rule(rule: WfsosRule) -> str:
    parts: List[str] = []
    for p in rule.pos:
        parts.append(f"{rule.arg_name(p.arg)} --{_label_str(p.label)}--> %{p.var}")
    for n in rule.neg:
        parts.append(f"{rule.arg_name(n.arg)} -/{_label_str(n.label)}->")
    for t in rule.totals:
        parts.append(f"total(%{t.var}) = {format_param(t.weight)}")
    for s in rule.supports:
        parts.append(f"in(%{s.var}, {s.target})")
    head = f"rule {rule.name}"
    if rule.open_args:
        head += " [open " + ", ".join(rule.arg_name(i) for i in sorted(rule.open_args)) + "]"
    premises = ", ".join(parts) + " " if parts else ""
    out = f"{head}: {premises}=> {rule.source} --{_label_str(rule.label)}--> {rule.target}"
    if rule.where:
        out += " where " + ", ".join(str(w) for w in rule.where)
    return out + ";"


@dataclass(frozen=True)
class Trigger:
    """Enabled labels per argument and the totals offered per (argument, label)."""

    enabled: Tuple[FrozenSet[Label], ...]
    totals: Mapping[Tuple[int, Label], FrozenSet[Weight]] = field(default_factory=dict)

    @classmethod
    def from_successors(
        cls, successors: Sequence[Mapping[Label, FrozenSet[WeightFn]]]
    ) -> "Trigger":
        enabled = tuple(frozenset(a for a, fns in s.items() if fns) for s in successors)
        totals = {
            (i, a): frozenset(fn.total() for fn in fns)
            for i, s in enumerate(successors)
            for a, fns in s.items()
            if fns
        }
        return cls(enabled, totals)


def match_trigger(rule: WfsosRule, trigger: Trigger, bindings: Mapping[str, Any] = {}) -> bool:
    """Whether the (label-ground) rule is triggered by `trigger`.

    Exact arguments need A_i = C_i, open arguments A_i subset of C_i with
    B_i disjoint from C_i. Every concrete total premise must be offered by some
    candidate function; per-function filtering happens during derivation.
    """
    if len(trigger.enabled) != rule.arity:
        raise ValueError(f"Trigger has {len(trigger.enabled)} argument(s), rule {rule.name} has {rule.arity}.")
    for i, enabled in enumerate(trigger.enabled):
        required = rule.required(i, bindings)
        forbidden = rule.forbidden(i, bindings)
        if any(isinstance(l, MetaVar) for l in required | forbidden):
            raise ValueError(f"Rule {rule.name} has unbound label metavariables.")
        if i in rule.open_args:
            if not required <= enabled or forbidden & enabled:
                return False
        elif required != enabled:
            return False
    for t in rule.totals:
        prem = rule.premise_of(t.var)
        if prem is None:
            return False
        offered = trigger.totals.get((prem.arg, resolve_label(prem.label, bindings)), frozenset())
        weight = bind_param(t.weight, bindings)
        if isinstance(weight, MetaVar):
            if not offered:
                return False
        elif weight not in offered:
            return False
    return True


@dataclass(frozen=True)
class Violation:
    rule: str
    bullet: FormatBullet
    message: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.bullet.value}: {self.message}"


@dataclass
class WfsosSpec:
    """A WFSOS specification: signatures, rules over them and an interpretation."""

    monoid: WeightMonoid
    labels: Tuple[Label, ...]
    sigma: Signature
    theta: Signature
    rules: List[WfsosRule]
    interp: Interpretation
    constants: Dict[str, Term] = field(default_factory=dict)
    name: str = "spec"
    _index: Dict[Tuple[str, int], List[WfsosRule]] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        self.labels = tuple(sorted(set(self.labels)))

    def rules_for(self, op: str, arity: int) -> List[WfsosRule]:
        key = (op, arity)
        if key not in self._index:
            self._index[key] = [r for r in self.rules if r.op == op and r.arity == arity]
        return self._index[key]

    def process_ops(self) -> FrozenSet[str]:
        return self.sigma.names | frozenset(self.constants)


def _violation(rule: WfsosRule, bullet: FormatBullet, message: str) -> Violation:
    return Violation(rule.name, bullet, message)


def validate_rule(rule: WfsosRule, spec: WfsosSpec) -> List[Violation]:
    """Return every well-formedness violation of `rule` in the context of `spec`."""
    out: List[Violation] = []
    def V(bullet: FormatBullet, msg: str) -> None:
        out.append(_violation(rule, bullet, msg))

    if rule.source.kind is not TermKind.Op or rule.source.name not in spec.sigma:
        V(FormatBullet.UnknownOperator, f"source operator '{rule.source.name}' is not in the process signature")
        return out
    decl = spec.sigma[rule.source.name]
    for msg in (decl.check_arity(rule.arity), decl.check_params(rule.source.params)):
        if msg is not None:
            V(FormatBullet.Arity, msg)

    args = [c.name for c in rule.source.children if c.is_process_var]
    if len(args) != rule.arity:
        V(FormatBullet.DistinctVars, "source arguments must be process variables")
    if len(set(args)) != len(args):
        V(FormatBullet.DistinctVars, f"source variables {args} are not pairwise distinct")
    ys = [s.target for s in rule.supports]
    if len(set(ys)) != len(ys) or set(ys) & set(args):
        V(FormatBullet.DistinctVars, "support premise variables must be fresh and pairwise distinct")
    wvars = [p.var for p in rule.pos]
    if len(set(wvars)) != len(wvars):
        V(FormatBullet.DistinctVars, f"weight-function variables {wvars} are not pairwise distinct")

    for p in chain(rule.pos, rule.neg):
        if not 0 <= p.arg < rule.arity:
            V(FormatBullet.Arity, f"premise refers to argument {p.arg + 1} of {rule.arity}")
    for i in range(rule.arity):
        overlap = rule.required(i) & rule.forbidden(i)
        if overlap:
            V(
                FormatBullet.PremiseOverlap,
                f"labels {sorted(map(str, overlap))} are both required and forbidden on {rule.arg_name(i)}",
            )

    allowed = {Term.var(x) for x in args} | {Term.var(y) for y in ys} | {Term.wvar(v) for v in wvars}
    stray = sorted(str(v) for v in term_vars(rule.target) - allowed)
    if stray:
        V(FormatBullet.TargetVars, f"target variables {stray} are not bound by the rule")
    for sub in rule.target.subterms():
        if sub.kind is TermKind.Op and sub.name in spec.sigma and sub.name not in spec.theta:
            if any(v.is_weight_var for v in term_vars(sub)):
                V(FormatBullet.TargetVars, f"weight variable inside process term {sub}")
                break

    for var in chain((t.var for t in rule.totals), (s.var for s in rule.supports)):
        if rule.premise_of(var) is None:
            V(FormatBullet.UnboundWeightVar, f"%{var} does not occur in a positive premise")

    supported = {s.var for s in rule.supports}
    for t in rule.totals:
        if isinstance(t.weight, MetaVar):
            continue
        try:
            w = spec.monoid.coerce(t.weight)
        except ValueError as e:
            V(FormatBullet.BadWeight, f"total of %{t.var}: {e}")
            continue
        if t.var in supported and spec.monoid.is_zero(w):
            V(FormatBullet.ZeroTotal, f"%{t.var} has a support premise but total 0")
    if rule.supports and not spec.monoid.zerosumfree:
        V(FormatBullet.Zerosumfree, f"support premises need a zerosumfree monoid, {spec.monoid.id} is not")

    declared = set(spec.labels)
    used_labels = chain((p.label for p in rule.pos), (p.label for p in rule.neg), (rule.label,))
    for l in used_labels:
        if isinstance(l, str) and l not in declared:
            V(FormatBullet.UnknownLabel, f"label '{l}' is not declared")

    bound = rule.bound_metavars()
    mentioned = term_metavars(rule.target).union(*(w.metavars() for w in rule.where))
    unbound = sorted(mentioned - bound)
    if unbound:
        V(FormatBullet.UnboundMetavar, f"metavariables {['$' + u for u in unbound]} are never bound")

    for msg in spec.theta.check_term(rule.target, spec.sigma):
        V(FormatBullet.UnknownOperator, f"target: {msg}")
    for sub in rule.target.subterms():
        if sub.kind is TermKind.Op and sub.name in spec.theta and sub.name not in spec.interp.rules:
            V(FormatBullet.Interpretation, f"weight operator '{sub.name}' has no eval rule")
        elif _is_reshape(sub, spec) and not _is_dirac(sub.children[0], spec):
            V(
                FormatBullet.Naturality,
                f"reshape operator '{sub.name}' applied to {sub.children[0]}, which is not a process term",
            )
    return out


def _is_reshape(t: Term, spec: WfsosSpec) -> bool:
    rule = spec.interp.rules.get(t.name)
    if t.kind is not TermKind.Op or rule is None:
        return False
    return rule.name == "reshape" and len(t.children) == 1


def _is_dirac(t: Term, spec: WfsosSpec) -> bool:
    """Whether `t` always evaluates to a function with at most one support point."""
    if t.kind is TermKind.ProcessVar:
        return True
    if t.kind is not TermKind.Op:
        return False
    if t.name not in spec.theta:
        return not any(v.is_weight_var for v in term_vars(t))
    rule = spec.interp.rules.get(t.name)
    if rule is None or rule.name != "dirac_process":
        return False
    return all(_is_dirac(c, spec) for c in t.children)


def validate_spec(spec: WfsosSpec) -> List[Violation]:
    out: List[Violation] = []
    names: Set[str] = set()
    for rule in spec.rules:
        if rule.name in names:
            warnings.warn(f"Rule name '{rule.name}' is used more than once.", category=UserWarning)
        names.add(rule.name)
        out.extend(validate_rule(rule, spec))
    clash = sorted(spec.sigma.names & spec.theta.names)
    if clash:
        out.append(Violation("<spec>", FormatBullet.UnknownOperator, f"operators {clash} are in both signatures"))
    missing = sorted(op.name for op in spec.theta if op.name not in spec.interp.rules)
    if missing:
        out.append(Violation("<spec>", FormatBullet.Interpretation, f"no eval rule for {missing}"))
    for cname, body in sorted(spec.constants.items()):
        where = f"const {cname}"
        if cname in spec.sigma:
            out.append(Violation(where, FormatBullet.Constant, "constant shadows a process operator"))
        problems = [p for p in spec.sigma.check_term(body) if not _is_constant_ref(p, spec.constants)]
        for msg in problems:
            out.append(Violation(where, FormatBullet.Constant, msg))
        if term_vars(body):
            out.append(Violation(where, FormatBullet.Constant, "constant body must be closed"))
    return out


def _is_constant_ref(problem: str, constants: Mapping[str, Term]) -> bool:
    return any(problem == f"unknown operator '{c}'" for c in constants)


def ensure_valid(spec: WfsosSpec) -> WfsosSpec:
    violations = validate_spec(spec)
    if violations:
        raise FormatViolationError(violations)
    return spec


def ground_labels(rule: WfsosRule, labels: Sequence[Label]) -> List[WfsosRule]:
    """Instances of `rule` for every assignment of declared labels to its label
    metavariables. Instances whose side conditions are decided false are dropped."""
    names = sorted(rule.label_metavars())
    out: List[WfsosRule] = []
    for values in product(sorted(labels), repeat=len(names)):
        bindings = dict(zip(names, values))
        suffix = ",".join(values)
        inst = rule.with_bindings(bindings, name=f"{rule.name}[{suffix}]" if names else rule.name)
        if not _where_possible(inst):
            continue
        out.append(inst)
    return out


def _where_possible(rule: WfsosRule) -> bool:
    for cond in rule.where:
        if cond.metavars():
            continue
        try:
            if not cond.holds():
                return False
        except InterpretationError:
            continue
    return True


def _subsets(items: Sequence[Label]) -> Iterator[Tuple[Label, ...]]:
    for k in range(len(items) + 1):
        yield from combinations(items, k)


def expand_open(rule: WfsosRule, labels: Sequence[Label]) -> List[WfsosRule]:
    """The exact-trigger rules equivalent to `rule`: every open argument is padded
    with positive premises for each extension of its required labels."""
    out: List[WfsosRule] = []
    for ground in ground_labels(rule, labels):
        if not ground.open_args:
            out.append(ground)
            continue
        choices = []
        for i in sorted(ground.open_args):
            spare = sorted(set(labels) - ground.required(i) - ground.forbidden(i))
            choices.append([(i, extra) for extra in _subsets(spare)])
        for combo in product(*choices):
            pads = tuple(
                PosPremise(i, a, f"pad_{i + 1}_{a}") for i, extra in combo for a in extra
            )
            tag = ";".join(f"{ground.arg_name(i)}+{{{','.join(extra)}}}" for i, extra in combo)
            out.append(
                replace(ground, name=f"{ground.name}<{tag}>", pos=ground.pos + pads, open_args=frozenset())
            )
    return out


def instantiate_target(rule: WfsosRule, bindings: Mapping[str, Any]) -> Term:
    return instantiate(rule.target, bindings, strict=True)


def where_holds(rule: WfsosRule, bindings: Mapping[str, Any]) -> bool:
    env = expr_env(bindings)
    return all(cond.holds(env) for cond in rule.where)


RULE_COLUMNS = ["rule", "op", "label", "target"]


def describe_rules(spec: WfsosSpec) -> DataFrame:
    """One row per rule of `spec`, in declaration order."""
    rows = [(r.name, r.op, _label_str(r.label), str(r.target)) for r in spec.rules]
    return pd.DataFrame(rows, columns=RULE_COLUMNS)

"""
W-GSOS specifications (GSOS rules for weighted transition systems) and their
translation into WFSOS.

A rule

    total(x_i, a) = w   ...   x_j --b,u--> y   ...
    --------------------------------------------------
          f(x_1, ..., x_n) --c,"beta"--> t

fires on f(p_1, ..., p_n) when every listed total matches the total weight of
p_i on a (labels that are not listed are unconstrained). For every choice of
support points q of the weighted premises it contributes beta(u_1, ..., u_m) to
t[x := p, y := q], where u_k is the weight of the k-th premise at its point.
`beta` must be multiadditive: additive in each argument and zero whenever an
argument is.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np
from numpy.random import Generator

from wfsosWB._constants import DEFAULT_MAX_DEPTH, MULTIADDITIVITY_SAMPLES
from wfsosWB._types import FormatBullet, Label, SchemaKind
from wfsosWB.interp import Interpretation, builtin
from wfsosWB.syntax import (
    MetaVar,
    OpDecl,
    Signature,
    Term,
    apply_subst,
    instantiate,
    term_metavars,
    term_vars,
)
from wfsosWB.utils import BudgetExhaustedError, FormatViolationError, InterpretationError, SpecError
from wfsosWB.weights import INF, WeightFn, WeightMonoid, canonical_key, weight_key
from wfsosWB.wexpr import Expr, expr_env
from wfsosWB.wfsos import (
    LabelRef,
    PosPremise,
    TotalPremise,
    Violation,
    WfsosRule,
    WfsosSpec,
    ensure_valid,
    resolve_label,
)

BETA_CATALOG = ("identity", "const", "scale", "product", "min_law")


def catalog_beta(name: str, arity: int, *args: Any) -> Expr:
    """A catalogued multiadditive function of `arity` arguments `u1..um`.

    identity: u1 (arity 1); const(w): w (arity 0); scale(c): c * u1 (arity 1);
    product: u1 * ... * um; min_law(w1, w2): u1 * u2 * min(w1, w2) / (w1 * w2)
    (arity 2, the totals given as metavariable names or weights).
    """
    us = [f"u{k}" for k in range(1, arity + 1)]
    if name == "identity":
        _expect_arity(name, arity, 1)
        return Expr.parse("u1")
    if name == "const":
        _expect_arity(name, arity, 0)
        if len(args) != 1:
            raise SpecError("const takes one weight.")
        return Expr.of(args[0])
    if name == "scale":
        _expect_arity(name, arity, 1)
        if len(args) != 1:
            raise SpecError("scale takes one coefficient.")
        return Expr.parse(f"({_operand(args[0])}) * u1")
    if name == "product":
        return Expr.parse(" * ".join(us) if us else "1")
    if name == "min_law":
        _expect_arity(name, arity, 2)
        if len(args) != 2:
            raise SpecError("min_law takes the two totals.")
        w1, w2 = (_operand(a) for a in args)
        return Expr.parse(f"u1 * u2 * min({w1}, {w2}) / (({w1}) * ({w2}))")
    raise SpecError(f"Unknown multiadditive function '{name}'. Must be one of {list(BETA_CATALOG)}")


def _expect_arity(name: str, arity: int, n: int) -> None:
    if arity != n:
        raise SpecError(f"{name} takes {n} weighted premise(s), the rule has {arity}.")


def _operand(a: Any) -> str:
    if isinstance(a, MetaVar):
        return str(a)
    if isinstance(a, str):
        return a if a.startswith("$") or a[:1].isdigit() else f"${a}"
    return str(Expr.const(a))


@dataclass(frozen=True)
class WeightedPremise:
    """x_arg --label,u--> y"""

    arg: int
    label: LabelRef
    u: str
    target: str


@dataclass(frozen=True)
class WTotalPremise:
    """total(x_arg, label) = weight"""

    arg: int
    label: LabelRef
    weight: Any


@dataclass(frozen=True)
class WGsosRule:
    """A W-GSOS rule. `beta` is a WeightExpr over `u1..um`, numbered in the order
    of `trans`, and over the rule's metavariables."""

    name: str
    source: Term
    label: LabelRef
    target: Term
    totals: Tuple[WTotalPremise, ...] = ()
    trans: Tuple[WeightedPremise, ...] = ()
    beta: Expr = field(default_factory=lambda: Expr.const(Fraction(1)))
    where: Tuple[Expr, ...] = ()

    @property
    def op(self) -> str:
        return self.source.name

    @property
    def arity(self) -> int:
        return len(self.source.children)

    @property
    def args(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.source.children)

    def label_refs(self) -> List[LabelRef]:
        return [self.label, *(t.label for t in self.totals), *(p.label for p in self.trans)]

    def label_metavars(self) -> FrozenSet[str]:
        return frozenset(l.name for l in self.label_refs() if isinstance(l, MetaVar))

    def observed(self) -> FrozenSet[Tuple[int, Label]]:
        """The (argument, label) pairs whose functions the rule reads."""
        refs = [(t.arg, t.label) for t in self.totals] + [(p.arg, p.label) for p in self.trans]
        return frozenset((i, l) for i, l in refs if isinstance(l, str))

    def bind_labels(self, bindings: Mapping[str, Any]) -> "WGsosRule":
        return WGsosRule(
            self.name,
            instantiate(self.source, bindings),
            resolve_label(self.label, bindings),
            instantiate(self.target, bindings),
            tuple(WTotalPremise(t.arg, resolve_label(t.label, bindings), t.weight) for t in self.totals),
            tuple(
                WeightedPremise(p.arg, resolve_label(p.label, bindings), p.u, p.target)
                for p in self.trans
            ),
            self.beta.bind(bindings),
            tuple(w.bind(bindings) for w in self.where),
        )

    def __str__(self) -> str:
        parts = [f"total({self.args[t.arg]}, {t.label}) = {_show_weight(t.weight)}" for t in self.totals]
        parts += [f"{self.args[p.arg]} --{p.label},{p.u}--> {p.target}" for p in self.trans]
        out = f'rule {self.name}: {", ".join(parts)} => {self.source} --{self.label},"{self.beta}"--> {self.target}'
        if self.where:
            out += " where " + ", ".join(str(w) for w in self.where)
        return out + ";"


def _show_weight(w: Any) -> str:
    return str(w) if isinstance(w, MetaVar) else str(Expr.const(w))


@dataclass
class WGsosSpec:
    monoid: WeightMonoid
    labels: Tuple[Label, ...]
    sigma: Signature
    rules: List[WGsosRule]
    constants: Dict[str, Term] = field(default_factory=dict)
    name: str = "wgsos"

    def __post_init__(self) -> None:
        self.labels = tuple(sorted(set(self.labels)))

    def rules_for(self, op: str, arity: int) -> List[WGsosRule]:
        return [r for r in self.rules if r.op == op and r.arity == arity]


def _violation(rule: WGsosRule, bullet: FormatBullet, message: str) -> Violation:
    return Violation(rule.name, bullet, message)


def validate_wgsos(spec: WGsosSpec) -> List[Violation]:
    """Well-formedness of every rule (multiadditivity is checked separately)."""
    out: List[Violation] = []
    for rule in spec.rules:
        def V(bullet: FormatBullet, msg: str) -> None:
            out.append(_violation(rule, bullet, msg))

        if rule.op not in spec.sigma:
            V(FormatBullet.UnknownOperator, f"source operator '{rule.op}' is not in the process signature")
            continue
        decl = spec.sigma[rule.op]
        for msg in (decl.check_arity(rule.arity), decl.check_params(rule.source.params)):
            if msg is not None:
                V(FormatBullet.Arity, msg)
        xs = list(rule.args)
        if not all(c.is_process_var for c in rule.source.children) or len(set(xs)) != len(xs):
            V(FormatBullet.DistinctVars, "source arguments must be pairwise distinct process variables")
        ys = [p.target for p in rule.trans]
        if len(set(ys)) != len(ys) or set(ys) & set(xs):
            V(FormatBullet.DistinctVars, "targets of weighted premises must be fresh and pairwise distinct")
        us = [p.u for p in rule.trans]
        if len(set(us)) != len(us):
            V(FormatBullet.DistinctVars, f"weight names {us} are not pairwise distinct")
        allowed = {Term.var(v) for v in xs + ys}
        stray = sorted(str(v) for v in term_vars(rule.target) - allowed)
        if stray:
            V(FormatBullet.TargetVars, f"target variables {stray} are not bound by the rule")
        unused = sorted(set(ys) - {v.name for v in term_vars(rule.target)})
        if unused:
            V(FormatBullet.TargetVars, f"premise targets {unused} do not occur in the target")
        for msg in spec.sigma.check_term(rule.target):
            if not any(msg == f"unknown operator '{c}'" for c in spec.constants):
                V(FormatBullet.UnknownOperator, f"target: {msg}")
        for l in rule.label_refs():
            if isinstance(l, str) and l not in spec.labels:
                V(FormatBullet.UnknownLabel, f"label '{l}' is not declared")
        zero_totals = set()
        for t in rule.totals:
            if isinstance(t.weight, MetaVar):
                continue
            try:
                w = spec.monoid.coerce(t.weight)
            except ValueError as e:
                V(FormatBullet.BadWeight, f"total of {xs[t.arg]}: {e}")
                continue
            if spec.monoid.is_zero(w):
                zero_totals.add((t.arg, t.label))
        for p in rule.trans:
            if (p.arg, p.label) in zero_totals:
                V(FormatBullet.ZeroTotal, f"{xs[p.arg]} has a weighted premise on {p.label} but total 0")
        bound = (
            term_metavars(rule.source)
            | rule.label_metavars()
            | {t.weight.name for t in rule.totals if isinstance(t.weight, MetaVar)}
        )
        mentioned = term_metavars(rule.target) | rule.beta.metavars()
        for w in rule.where:
            mentioned |= w.metavars()
        unbound = sorted(mentioned - bound)
        if unbound:
            V(FormatBullet.UnboundMetavar, f"metavariables {['$' + u for u in unbound]} are never bound")
        names = rule.beta.names() - {f"u{k}" for k in range(1, len(rule.trans) + 1)}
        if names:
            V(FormatBullet.BadWeight, f"weight function mentions unknown names {sorted(names)}")
    return out


def _sample_weight(monoid: WeightMonoid, rng: Generator) -> Any:
    w = monoid.sample(rng)
    while w is INF:
        w = monoid.sample(rng)
    return w


def _sample_positive(monoid: WeightMonoid, rng: Generator) -> Any:
    w = _sample_weight(monoid, rng)
    while monoid.is_zero(w) or (monoid.is_numeric and w < 0):  # type: ignore
        w = _sample_weight(monoid, rng)
    return w


def check_multiadditive(
    rule: WGsosRule,
    monoid: WeightMonoid,
    rng: Optional[Generator] = None,
    samples: int = MULTIADDITIVITY_SAMPLES,
) -> List[str]:
    """Sampled failures of additivity and zero-annihilation of `rule.beta`.

    Metavariables of beta are sampled as nonzero weights. An empty list means no
    failure was observed, not that beta is multiadditive.
    """
    m = len(rule.trans)
    if m == 0:
        return []
    gen = np.random.default_rng() if rng is None else rng
    metas = sorted(rule.beta.metavars())
    failures: List[str] = []

    def beta(us: Sequence[Any], env: Dict[str, Any]) -> Any:
        full = dict(env)
        full.update({f"u{k}": u for k, u in enumerate(us, start=1)})
        return monoid.coerce(rule.beta.evaluate(full))

    for _ in range(samples):
        env = expr_env({name: _sample_positive(monoid, gen) for name in metas})
        us = [_sample_weight(monoid, gen) for _ in range(m)]
        k = int(gen.integers(0, m))
        extra = _sample_weight(monoid, gen)
        try:
            whole = beta(us[:k] + [monoid.add(us[k], extra)] + us[k + 1 :], env)
            parts = monoid.add(beta(us, env), beta(us[:k] + [extra] + us[k + 1 :], env))
            zeroed = beta(us[:k] + [monoid.zero] + us[k + 1 :], env)
        except (InterpretationError, ValueError) as e:
            failures.append(f"not a weight at u={us}: {e}")
            break
        if whole != parts:
            failures.append(f"not additive in u{k + 1} at u={us}, extra={extra}")
            break
        if not monoid.is_zero(zeroed):
            failures.append(f"u{k + 1} = 0 does not give 0 at u={us}")
            break
    return failures


def ensure_wgsos(spec: WGsosSpec, rng: Optional[Generator] = None) -> WGsosSpec:
    """Validate `spec` and sample-check the multiadditivity of every beta.

    Raises
    ------
    FormatViolationError
        With every violation found.
    """
    violations = validate_wgsos(spec)
    gen = np.random.default_rng(0) if rng is None else rng
    for rule in spec.rules:
        for msg in check_multiadditive(rule, spec.monoid, gen):
            violations.append(_violation(rule, FormatBullet.Multiadditive, msg))
    if violations:
        raise FormatViolationError(violations)
    return spec


def wgsos_from_document(doc: Any) -> WGsosSpec:
    """Read a parsed `format wgsos` document (see `wfsosWB.dsl`)."""
    rules = [_wgsos_rule(raw) for raw in doc.rules]
    return WGsosSpec(
        monoid=doc.get_monoid("rat_plus"),
        labels=tuple(doc.labels),
        sigma=doc.sigma,
        rules=rules,
        constants=dict(doc.constants),
        name=doc.name,
    )


def _wgsos_rule(raw: Any) -> WGsosRule:
    totals: List[WTotalPremise] = []
    trans: List[WeightedPremise] = []
    for prem in raw.premises:
        kind = prem[0]
        if kind == "wtotal":
            totals.append(WTotalPremise(raw.arg_index(prem[1]), prem[2], prem[3]))
        elif kind == "wtrans":
            trans.append(WeightedPremise(raw.arg_index(prem[1]), prem[2], prem[3], prem[4]))
        else:
            raise SpecError(f"Rule {raw.name}: premise form '{kind}' is not a W-GSOS premise.")
    if not isinstance(raw.target, Term):
        raise SpecError(f"Rule {raw.name}: a W-GSOS target is a process term.")
    if raw.open_names:
        raise SpecError(f"Rule {raw.name}: W-GSOS rules have no open arguments.")
    return WGsosRule(
        name=raw.name,
        source=raw.source,
        label=raw.label,
        target=raw.target,
        totals=tuple(totals),
        trans=tuple(trans),
        beta=_read_beta(raw.name, raw.beta, [p.u for p in trans]),
        where=raw.where,
    )


def _read_beta(rule: str, text: Optional[str], us: Sequence[str]) -> Expr:
    arity = len(us)
    if text is None:
        return catalog_beta("product", arity)
    head, _, rest = text.strip().partition("(")
    if head in BETA_CATALOG and (rest or head in ("identity", "product")):
        args = [a.strip() for a in rest.rstrip(")").split(",") if a.strip()] if rest else []
        return catalog_beta(head, arity, *(_catalog_arg(a) for a in args))
    try:
        expr = Expr.parse(text)
    except SpecError as e:
        raise SpecError(f"Rule {rule}: {e}") from e
    return expr.rename({u: f"u{k}" for k, u in enumerate(us, start=1)})


def _catalog_arg(text: str) -> Any:
    if text.startswith("$"):
        return MetaVar(text[1:])
    return Expr.parse(text).evaluate()


def _label_groundings(rule: WGsosRule, labels: Sequence[Label]) -> List[WGsosRule]:
    names = sorted(rule.label_metavars())
    return [
        rule.bind_labels(dict(zip(names, values)))
        for values in product(sorted(labels), repeat=len(names))
    ]


def _fvar(i: int, a: Label) -> str:
    return f"f{i + 1}_{a}"


def _tmeta(i: int, a: Label) -> str:
    return f"t{i + 1}_{a}"


def _eq(a: Any, b: Any) -> Tuple[Any, ...]:
    return ("cmp", "=", a, b)


def _const_node(v: Any) -> Tuple[Any, ...]:
    if isinstance(v, MetaVar):
        return ("meta", v.name)
    return ("const", v)


def _conjunction(nodes: Sequence[Tuple[Any, ...]]) -> Optional[Expr]:
    if not nodes:
        return None
    node = nodes[0]
    for n in nodes[1:]:
        node = ("and", node, n)
    return Expr(node)


WGSOS_THETA = Signature.of(
    "weight",
    [
        OpDecl("wsum", (), None),
        OpDecl("wzero", (), 0),
        OpDecl("when", (SchemaKind.Text,), 1),
        OpDecl("lift", (SchemaKind.Text, SchemaKind.Term), None),
        OpDecl("colour", (SchemaKind.Weight,), 1),
    ],
)


def _constituent(rule: WGsosRule) -> Optional[Term]:
    """The guarded lift contributed by one label-ground rule to a merged target."""
    rename: Dict[str, Any] = {}
    conds: List[Tuple[Any, ...]] = []
    for j, pat in enumerate(rule.source.params):
        p = ("meta", f"p{j + 1}")
        if isinstance(pat, MetaVar):
            if pat.name in rename:
                conds.append(_eq(p, _const_node(rename[pat.name])))
            else:
                rename[pat.name] = MetaVar(f"p{j + 1}")
        else:
            conds.append(_eq(p, ("const", pat)))
    for t in rule.totals:
        observed = ("meta", _tmeta(t.arg, t.label))
        if isinstance(t.weight, MetaVar):
            if t.weight.name in rename:
                conds.append(_eq(observed, _const_node(rename[t.weight.name])))
            else:
                rename[t.weight.name] = MetaVar(_tmeta(t.arg, t.label))
        else:
            conds.append(_eq(observed, ("const", t.weight)))
    for w in rule.where:
        conds.append(w.bind(rename).node)
    xs = {Term.var(x): Term.var(f"x{i + 1}") for i, x in enumerate(rule.args)}
    holes = {Term.var(p.target): Term.hole(k) for k, p in enumerate(rule.trans, start=1)}
    template = instantiate(apply_subst(rule.target, {**xs, **holes}), rename)
    beta = rule.beta.bind(rename)
    coloured = [
        Term.op("colour", Term.wvar(_fvar(p.arg, p.label)), params=(Fraction(k),))
        for k, p in enumerate(rule.trans, start=1)
    ]
    lift = Term.op("lift", *coloured, params=(beta, template))
    cond = _conjunction(conds)
    if cond is None:
        return lift
    if not cond.metavars() and not cond.holds():
        return None
    return Term.op("when", lift, params=(cond,))


def translate_wgsos(spec: WGsosSpec, check: bool = True) -> WfsosSpec:
    """The WFSOS specification inducing the same weighted system as `spec`.

    For every operator and conclusion label the rules concluding with that label are
    merged into one rule. It reads the function and total of every (argument, label)
    some constituent observes, and its target is the sum of the constituents'
    guarded lifts. A pair without constituents concludes with the zero function,
    so the induced system is functional.
    """
    if check:
        ensure_wgsos(spec)
    grounded: Dict[Tuple[str, int, Label], List[Tuple[WGsosRule, Term]]] = {}
    for rule in spec.rules:
        for g in _label_groundings(rule, spec.labels):
            part = _constituent(g) if isinstance(g.label, str) else None
            if part is not None:
                grounded.setdefault((g.op, g.arity, g.label), []).append((g, part))
    arities: Dict[str, Set[int]] = {}
    for decl in spec.sigma:
        if decl.arity is not None:
            arities.setdefault(decl.name, set()).add(decl.arity)
    for rule in spec.rules:
        arities.setdefault(rule.op, set()).add(rule.arity)
    rules: List[WfsosRule] = []
    for decl in spec.sigma:
        params = tuple(MetaVar(f"p{j + 1}") for j in range(len(decl.schema)))
        for n in sorted(arities.get(decl.name, ())):
            xs = [Term.var(f"x{i + 1}") for i in range(n)]
            source = Term.op(decl.name, *xs, params=params)
            for c in spec.labels:
                group = grounded.get((decl.name, n, c), [])
                observed = sorted(frozenset().union(*(g.observed() for g, _ in group)))
                parts = [part for _, part in group]
                target = Term.op("wsum", *parts) if parts else Term.op("wzero")
                rules.append(
                    WfsosRule(
                        name=f"{decl.name}_{n}_{c}",
                        source=source,
                        label=c,
                        target=target,
                        pos=tuple(PosPremise(i, a, _fvar(i, a)) for i, a in observed),
                        totals=tuple(TotalPremise(_fvar(i, a), MetaVar(_tmeta(i, a))) for i, a in observed),
                        open_args=frozenset(range(n)),
                    )
                )
    interp = Interpretation(
        f"{spec.name}_theta",
        WGSOS_THETA,
        {
            "wsum": builtin("pointwise_sum"),
            "wzero": builtin("zero"),
            "when": builtin("guard"),
            "lift": builtin("multiadditive_apply"),
            "colour": builtin("colour"),
        },
        spec.monoid.one,
        spec.monoid,
    )
    out = WfsosSpec(
        monoid=spec.monoid,
        labels=spec.labels,
        sigma=spec.sigma,
        theta=WGSOS_THETA,
        rules=rules,
        interp=interp,
        constants=dict(spec.constants),
        name=spec.name,
    )
    return ensure_valid(out)


class WGsosDeriver:
    """Direct semantics of a W-GSOS specification: one weight function per
    (ground term, label), computed by structural recursion with memoization."""

    def __init__(self, spec: WGsosSpec, max_depth: int = DEFAULT_MAX_DEPTH) -> None:
        self.spec = spec
        self.max_depth = max_depth
        self._memo: Dict[Term, Dict[Label, WeightFn]] = {}

    def successors(self, p: Term, depth: int = 0) -> Dict[Label, WeightFn]:
        if p in self._memo:
            return self._memo[p]
        m = self.spec.monoid
        if not p.children and not p.params and p.name in self.spec.constants:
            if depth >= self.max_depth:
                raise BudgetExhaustedError(f"constant unfolding of {p} exceeded max_depth={self.max_depth}")
            result = self.successors(self.spec.constants[p.name], depth + 1)
            self._memo[p] = result
            return result
        if p.name not in self.spec.sigma:
            raise SpecError(f"Operator '{p.name}' of {p} is not in the process signature.")
        acc: Dict[Label, Dict[Term, Any]] = {a: {} for a in self.spec.labels}
        for rule in self.spec.rules_for(p.name, len(p.children)):
            bindings = _match(rule.source.params, p.params)
            if bindings is None:
                continue
            free = sorted(rule.label_metavars() - bindings.keys())
            for values in product(self.spec.labels, repeat=len(free)):
                local = dict(bindings)
                local.update(zip(free, values))
                self._fire(rule, p, local, depth, acc)
        result = {a: WeightFn(sorted(acc[a].items(), key=lambda kv: canonical_key(kv[0])), m) for a in self.spec.labels}
        self._memo[p] = result
        return result

    def _fire(
        self, rule: WGsosRule, p: Term, local: Dict[str, Any], depth: int, acc: Dict[Label, Dict[Term, Any]]
    ) -> None:
        m = self.spec.monoid
        for cond in rule.where:
            if cond.metavars() <= local.keys() and not cond.holds(expr_env(local)):
                return

        def fn(i: int, label: LabelRef) -> WeightFn:
            return self.successors(p.children[i], depth)[resolve_label(label, local)]

        for t in rule.totals:
            total = fn(t.arg, t.label).total()
            if isinstance(t.weight, MetaVar):
                if t.weight.name in local:
                    if weight_key(local[t.weight.name]) != weight_key(total):
                        return
                else:
                    local[t.weight.name] = total
            elif weight_key(m.coerce(t.weight)) != weight_key(total):
                return
        env = expr_env(local)
        if not all(w.holds(env) for w in rule.where):
            return
        label = resolve_label(rule.label, local)
        target = instantiate(rule.target, local, strict=True)
        xs = {Term.var(x): c for x, c in zip(rule.args, p.children)}
        supports = [fn(q.arg, q.label).sorted_items() for q in rule.trans]
        into = acc[label]
        for choice in product(*supports):
            full = dict(env)
            full.update({f"u{k}": w for k, (_, w) in enumerate(choice, start=1)})
            weight = m.coerce(rule.beta.evaluate(full))
            sigma = dict(xs)
            sigma.update({Term.var(q.target): y for q, (y, _) in zip(rule.trans, choice)})
            key = apply_subst(target, sigma)
            into[key] = m.add(into[key], weight) if key in into else weight


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


def wgsos_successors(spec: WGsosSpec, p: Term) -> Dict[Label, WeightFn]:
    return WGsosDeriver(spec).successors(p)

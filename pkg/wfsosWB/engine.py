"""
Derivation of the ULTraS induced by a WFSOS specification.

Successors of a ground term are computed by structural recursion: the rules for
its head operator are matched against the enabled labels and totals of the
arguments, every assignment of weight functions to the positive-premise variables
(and of support points to the support-premise variables) is enumerated, and the
instantiated interpretation of the target is emitted. Results are memoized per
term. Process constants are unfolded on lookup and each unfolding counts towards
`max_depth`.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import (
    Any,
    Deque,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from typing_extensions import Literal

from wfsosWB._constants import DEFAULT_MAX_DEPTH, DEFAULT_MAX_STATES
from wfsosWB._types import Label, OnExhaustion
from wfsosWB._validate import make_positive_int
from wfsosWB.interp import interpret
from wfsosWB.syntax import MetaVar, Term
from wfsosWB.ultras import Ultras, sort_states
from wfsosWB.utils import BudgetExhaustedError, SpecError
from wfsosWB.weights import WeightFn
from wfsosWB.wexpr import expr_env
from wfsosWB.wfsos import (
    WfsosRule,
    WfsosSpec,
    ground_labels,
    instantiate_target,
    resolve_label,
    where_holds,
)

Successors = Dict[Label, FrozenSet[WeightFn]]


@dataclass(frozen=True)
class DerivationBudget:
    max_states: int = DEFAULT_MAX_STATES
    max_depth: int = DEFAULT_MAX_DEPTH
    on_exhaustion: Union[OnExhaustion, Literal["error", "truncate"]] = OnExhaustion.Error

    def __post_init__(self) -> None:
        object.__setattr__(self, "max_states", make_positive_int(self.max_states, "max_states"))
        object.__setattr__(self, "max_depth", make_positive_int(self.max_depth, "max_depth"))
        object.__setattr__(self, "on_exhaustion", OnExhaustion.validate(self.on_exhaustion))

    @property
    def truncates(self) -> bool:
        return self.on_exhaustion is OnExhaustion.Truncate


def _match_params(pattern: Sequence[Any], params: Sequence[Any]) -> Optional[Dict[str, Any]]:
    if len(pattern) != len(params):
        return None
    bindings: Dict[str, Any] = {}
    for pat, value in zip(pattern, params):
        if isinstance(pat, MetaVar):
            if pat.name in bindings and bindings[pat.name] != value:
                return None
            bindings[pat.name] = value
        elif pat != value:
            return None
    return bindings


def _decided_false(rule: WfsosRule, bindings: Mapping[str, Any]) -> bool:
    env = expr_env(bindings)
    for cond in rule.where:
        if cond.metavars() <= bindings.keys() and not cond.holds(env):
            return True
    return False


class Deriver:
    """Memoizing derivation engine for one specification.

    A Deriver is confined to one thread; create one per worker.
    """

    def __init__(self, spec: WfsosSpec, budget: Optional[DerivationBudget] = None) -> None:
        self.spec = spec
        self.budget = budget or DerivationBudget()
        self.truncated = False
        self._memo: Dict[Term, Successors] = {}
        self._grounded: Dict[Tuple[str, int], List[WfsosRule]] = {}

    def _rules(self, op: str, arity: int) -> List[WfsosRule]:
        key = (op, arity)
        if key not in self._grounded:
            rules: List[WfsosRule] = []
            for rule in self.spec.rules_for(op, arity):
                rules.extend(ground_labels(rule, self.spec.labels))
            self._grounded[key] = rules
        return self._grounded[key]

    def _exhausted(self, message: str) -> None:
        if not self.budget.truncates:
            raise BudgetExhaustedError(message)
        if not self.truncated:
            warnings.warn(f"{message}; the derived system is truncated.", category=UserWarning)
        self.truncated = True

    def successors(self, p: Term, depth: int = 0) -> Successors:
        """trans(p, a) for every declared label a."""
        if p in self._memo:
            return self._memo[p]
        if not p.is_ground:
            raise SpecError(f"Cannot derive successors of non-ground term {p}.")
        if not p.params and not p.children and p.name in self.spec.constants:
            if depth >= self.budget.max_depth:
                self._exhausted(f"constant unfolding of {p} exceeded max_depth={self.budget.max_depth}")
                return {a: frozenset() for a in self.spec.labels}
            result = self.successors(self.spec.constants[p.name], depth + 1)
            self._memo[p] = result
            return result
        if p.name not in self.spec.sigma:
            raise SpecError(f"Operator '{p.name}' of {p} is not in the process signature.")
        found: Dict[Label, Set[WeightFn]] = {}
        child_succ: Dict[int, Successors] = {}

        def child(i: int) -> Successors:
            if i not in child_succ:
                child_succ[i] = self.successors(p.children[i], depth)
            return child_succ[i]

        for rule in self._rules(p.name, len(p.children)):
            bindings = _match_params(rule.source.params, p.params)
            if bindings is None or _decided_false(rule, bindings):
                continue
            if not self._triggered(rule, bindings, child):
                continue
            for label, rho in self._fire(rule, p, bindings, child):
                found.setdefault(label, set()).add(rho)
        result = {a: frozenset(found.get(a, ())) for a in self.spec.labels}
        self._memo[p] = result
        return result

    def _triggered(self, rule: WfsosRule, bindings: Dict[str, Any], child: Any) -> bool:
        for i in range(rule.arity):
            required = rule.required(i, bindings)
            forbidden = rule.forbidden(i, bindings)
            is_open = i in rule.open_args
            if is_open and not required and not forbidden:
                continue
            enabled = frozenset(a for a, fns in child(i).items() if fns)
            if is_open:
                if not required <= enabled or forbidden & enabled:
                    return False
            elif required != enabled:
                return False
        return True

    def _fire(
        self, rule: WfsosRule, p: Term, bindings: Dict[str, Any], child: Any
    ) -> Iterable[Tuple[Label, WeightFn]]:
        used = rule.used_vars()
        fixed_totals = {t.var: t.weight for t in rule.totals if not isinstance(t.weight, MetaVar)}
        chosen = [prem for prem in rule.pos if prem.var in used]
        options: List[List[WeightFn]] = []
        for prem in chosen:
            label = resolve_label(prem.label, bindings)
            fns = sorted(child(prem.arg)[label], key=lambda fn: fn.sort_key())
            if prem.var in fixed_totals:
                w = self.spec.monoid.coerce(fixed_totals[prem.var])
                fns = [fn for fn in fns if fn.total() == w]
            options.append(fns)
        args = {rule.arg_name(i): c for i, c in enumerate(p.children)}
        for combo in product(*options):
            env = {prem.var: fn for prem, fn in zip(chosen, combo)}
            local = dict(bindings)
            if not self._bind_totals(rule, env, local):
                continue
            if not where_holds(rule, local):
                continue
            label = resolve_label(rule.label, local)
            target = instantiate_target(rule, local)
            points = [sorted(env[s.var], key=lambda t: t.sort_key()) for s in rule.supports]
            for ys in product(*points):
                sigma: Dict[Any, Term] = dict(args)
                sigma.update({s.target: q for s, q in zip(rule.supports, ys)})
                yield label, interpret(self.spec.interp, target, env, sigma)

    def _bind_totals(self, rule: WfsosRule, env: Mapping[str, WeightFn], local: Dict[str, Any]) -> bool:
        for t in rule.totals:
            if not isinstance(t.weight, MetaVar):
                continue
            total = env[t.var].total()
            if t.weight.name in local:
                if local[t.weight.name] != total:
                    return False
            else:
                local[t.weight.name] = total
        return True

    def enabled(self, p: Term) -> FrozenSet[Label]:
        return frozenset(a for a, fns in self.successors(p).items() if fns)

    def explore(self, roots: Sequence[Term]) -> Ultras:
        """Breadth-first closure of `roots` under the supports of derived functions."""
        seen: Set[Term] = set()
        queue: Deque[Term] = deque()
        for r in roots:
            if not r.is_ground:
                raise SpecError(f"Root {r} is not a ground term.")
            if r not in seen:
                seen.add(r)
                queue.append(r)
        trans: Dict[Tuple[Term, Label], FrozenSet[WeightFn]] = {}
        expanded = 0
        while queue:
            if expanded >= self.budget.max_states:
                self._exhausted(f"exploration exceeded max_states={self.budget.max_states}")
                break
            p = queue.popleft()
            succ = self.successors(p)
            expanded += 1
            for a in self.spec.labels:
                fns = succ[a]
                if fns:
                    trans[(p, a)] = fns
                for fn in sorted(fns, key=lambda f: f.sort_key()):
                    for q in fn:
                        if q not in seen:
                            seen.add(q)
                            queue.append(q)
        return Ultras(sort_states(seen), self.spec.labels, trans, self.spec.monoid, self.truncated)


def successors(spec: WfsosSpec, p: Term, budget: Optional[DerivationBudget] = None) -> Successors:
    return Deriver(spec, budget).successors(p)


def explore(
    spec: WfsosSpec, roots: Sequence[Term], budget: Optional[DerivationBudget] = None
) -> Ultras:
    return Deriver(spec, budget).explore(roots)

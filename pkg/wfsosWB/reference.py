"""
Reference semantics written directly from the classic operational rules, used as
oracles for the rule engine and the format translations.

Nothing here goes through WFSOS rules or interpretations: PEPA rates are computed
by the race semantics (rates of identical residuals are summed), and Segala and
W-GSOS systems come from the direct derivers in `wfsosWB.frontends`.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Any, Callable, Deque, Dict, FrozenSet, Mapping, Optional, Sequence, Set, Tuple, Union

from wfsosWB._constants import DEFAULT_MAX_DEPTH, DEFAULT_MAX_STATES, TAU
from wfsosWB._types import Label, RateLaw
from wfsosWB.syntax import Term
from wfsosWB.ultras import Ultras, sort_states
from wfsosWB.utils import BudgetExhaustedError, SpecError
from wfsosWB.weights import RAT_INF_PLUS, WeightFn, WeightMonoid, canonical_key

Rates = Dict[Term, Fraction]
DirectSuccessors = Mapping[Label, Union[WeightFn, FrozenSet[WeightFn]]]


def _add_into(acc: Rates, rates: Mapping[Term, Fraction]) -> None:
    for t, r in rates.items():
        acc[t] = acc.get(t, Fraction(0)) + r


class PepaReference:
    """Race semantics of PEPA: `rates(p)[a]` maps every a-derivative of p to the sum
    of the rates of the derivations reaching it."""

    def __init__(self, model: Any, max_depth: int = DEFAULT_MAX_DEPTH) -> None:
        self.model = model
        self.max_depth = max_depth
        self._memo: Dict[Term, Dict[Label, Rates]] = {}

    def rates(self, p: Term, depth: int = 0) -> Dict[Label, Rates]:
        if p in self._memo:
            return self._memo[p]
        labels = self.model.labels
        out: Dict[Label, Rates] = {a: {} for a in labels}
        if p.name == "nil":
            pass
        elif not p.children and p.name in self.model.constants:
            if depth >= self.max_depth:
                raise BudgetExhaustedError(f"constant unfolding of {p} exceeded max_depth={self.max_depth}")
            out = self.rates(self.model.constants[p.name], depth + 1)
        elif p.name == "prefix":
            a, r = p.params
            out[a] = {p.children[0]: Fraction(r)}
        elif p.name == "plus":
            left, right = (self.rates(c, depth) for c in p.children)
            for a in labels:
                _add_into(out[a], left[a])
                _add_into(out[a], right[a])
        elif p.name == "hide":
            (hidden,) = p.params
            inner = self.rates(p.children[0], depth)
            for a in labels:
                if a == TAU:
                    for b in sorted(hidden | {TAU}):
                        _add_into(out[a], inner[b])
                elif a not in hidden:
                    out[a] = dict(inner[a])
        elif p.name == "coop":
            (coop_set,) = p.params
            P, Q = p.children
            left, right = self.rates(P, depth), self.rates(Q, depth)
            for a in labels:
                if a in coop_set:
                    out[a] = self._sync(coop_set, left[a], right[a])
                else:
                    for p1, r in left[a].items():
                        _add_into(out[a], {Term.op("coop", p1, Q, params=(coop_set,)): r})
                    for q1, r in right[a].items():
                        _add_into(out[a], {Term.op("coop", P, q1, params=(coop_set,)): r})
        else:
            raise SpecError(f"{p} is not a PEPA term.")
        self._memo[p] = out
        return out

    def _sync(self, coop_set: FrozenSet[str], left: Rates, right: Rates) -> Rates:
        if not left or not right:
            return {}
        apparent_l, apparent_r = sum(left.values()), sum(right.values())
        out: Rates = {}
        for p1, r1 in left.items():
            for q1, r2 in right.items():
                if self.model.law is RateLaw.Minimal:
                    rate = r1 / apparent_l * r2 / apparent_r * min(apparent_l, apparent_r)
                else:
                    rate = r1 * r2
                _add_into(out, {Term.op("coop", p1, q1, params=(coop_set,)): rate})
        return out

    def successors(self, p: Term) -> Dict[Label, WeightFn]:
        return {a: WeightFn(rates, RAT_INF_PLUS) for a, rates in self.rates(p).items()}


def explore_direct(
    successors: Callable[[Term], DirectSuccessors],
    roots: Sequence[Term],
    labels: Sequence[Label],
    monoid: WeightMonoid,
    max_states: int = DEFAULT_MAX_STATES,
) -> Ultras:
    """Breadth-first closure of `roots` under a direct successor function.

    `successors(p)` maps each label to one weight function (a functional system) or
    to a set of them.

    Raises
    ------
    BudgetExhaustedError
        If more than `max_states` states are reachable.
    """
    seen: Set[Term] = set(roots)
    queue: Deque[Term] = deque(sorted(seen, key=canonical_key))
    trans: Dict[Tuple[Term, Label], FrozenSet[WeightFn]] = {}
    while queue:
        if len(seen) > max_states:
            raise BudgetExhaustedError(f"reference exploration exceeded max_states={max_states}")
        p = queue.popleft()
        for a, value in successors(p).items():
            fns = frozenset({value}) if isinstance(value, WeightFn) else frozenset(value)
            if fns:
                trans[(p, a)] = fns
            for fn in sorted(fns, key=lambda f: f.sort_key()):
                for q in sorted(fn, key=canonical_key):
                    if q not in seen:
                        seen.add(q)
                        queue.append(q)
    return Ultras(sort_states(seen), labels, trans, monoid)


def pepa_reference_ultras(
    model: Any, roots: Optional[Sequence[Term]] = None, max_states: int = DEFAULT_MAX_STATES
) -> Ultras:
    """The PEPA system reachable from `roots` (default: the model's roots)."""
    ref = PepaReference(model)
    return explore_direct(ref.successors, roots or model.roots(), model.labels, RAT_INF_PLUS, max_states)


def segala_reference_ultras(spec: Any, roots: Sequence[Term], max_states: int = DEFAULT_MAX_STATES) -> Ultras:
    from wfsosWB.frontends.segala import SegalaDeriver
    from wfsosWB.weights import RAT_PLUS

    deriver = SegalaDeriver(spec)
    return explore_direct(deriver.successors, roots, spec.labels, RAT_PLUS, max_states)


def wgsos_reference_ultras(spec: Any, roots: Sequence[Term], max_states: int = DEFAULT_MAX_STATES) -> Ultras:
    from wfsosWB.frontends.wgsos import WGsosDeriver

    deriver = WGsosDeriver(spec)
    return explore_direct(deriver.successors, roots, spec.labels, spec.monoid, max_states)

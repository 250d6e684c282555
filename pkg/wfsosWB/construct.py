"""
Seeded generators: random and exhaustive ULTraS families for the bisimulation
oracles, and random ground terms over a process signature.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from numpy.random import Generator

from wfsosWB._constants import DEFAULT_SAMPLE_DEPTH
from wfsosWB._types import Label, SchemaKind
from wfsosWB.syntax import OpDecl, Signature, Term
from wfsosWB.ultras import State, TransKey, Ultras
from wfsosWB.weights import NAT_PLUS, RAT_PLUS, WeightFn, WeightMonoid

SMALL_WEIGHTS: Tuple[int, ...] = (0, 1, 2)


def _states(n: int) -> List[str]:
    return [f"s{i}" for i in range(n)]


def _random_fn(rng: Generator, states: Sequence[State], weights: Sequence[Any], monoid: WeightMonoid) -> WeightFn:
    picks = rng.integers(0, len(weights), size=len(states))
    return WeightFn([(x, weights[int(k)]) for x, k in zip(states, picks)], monoid)


def random_ultras(
    rng: Generator,
    n_states: int,
    labels: Sequence[Label] = ("a", "b"),
    weights: Sequence[Any] = SMALL_WEIGHTS,
    max_fns: int = 2,
    monoid: WeightMonoid = NAT_PLUS,
) -> Ultras:
    """A system with 0..max_fns weight functions per (state, label), each weight
    drawn uniformly from `weights` (so zero functions and stuck pairs occur)."""
    states = _states(n_states)
    trans: Dict[TransKey, List[WeightFn]] = {}
    for x in states:
        for a in labels:
            k = int(rng.integers(0, max_fns + 1))
            trans[(x, a)] = [_random_fn(rng, states, weights, monoid) for _ in range(k)]
    return Ultras(states, labels, trans, monoid)


def random_functional_ultras(
    rng: Generator,
    n_states: int,
    labels: Sequence[Label] = ("a", "b"),
    weights: Sequence[Any] = SMALL_WEIGHTS,
    monoid: WeightMonoid = NAT_PLUS,
) -> Ultras:
    """A system with exactly one weight function per (state, label)."""
    states = _states(n_states)
    trans = {(x, a): [_random_fn(rng, states, weights, monoid)] for x in states for a in labels}
    return Ultras(states, labels, trans, monoid)


def random_distribution(rng: Generator, states: Sequence[State], max_support: int = 3) -> WeightFn:
    """A probability distribution with rational weights on at most `max_support` states."""
    k = int(rng.integers(1, min(max_support, len(states)) + 1))
    support = rng.choice(len(states), size=k, replace=False)
    raw = [int(v) for v in rng.integers(1, 4, size=k)]
    total = sum(raw)
    return WeightFn([(states[int(i)], Fraction(r, total)) for i, r in zip(support, raw)], RAT_PLUS)


def random_segala_ultras(
    rng: Generator,
    n_states: int,
    labels: Sequence[Label] = ("a", "b"),
    max_fns: int = 2,
    max_support: int = 3,
) -> Ultras:
    """A Segala system: 0..max_fns probability distributions per (state, label)."""
    states = _states(n_states)
    trans: Dict[TransKey, List[WeightFn]] = {}
    for x in states:
        for a in labels:
            k = int(rng.integers(0, max_fns + 1))
            trans[(x, a)] = [random_distribution(rng, states, max_support) for _ in range(k)]
    return Ultras(states, labels, trans, RAT_PLUS)


def random_single_termination_ultras(
    rng: Generator,
    n_states: int,
    labels: Sequence[Label] = ("a", "b"),
    weights: Sequence[Any] = SMALL_WEIGHTS,
    max_fns: int = 2,
    monoid: WeightMonoid = NAT_PLUS,
) -> Ultras:
    """A system in which no label has both a stuck and a terminal state.

    Each label is drawn as a "stuck" label (pairs may be stuck, zero functions are
    dropped) or a "terminal" label (every pair has a transition).
    """
    states = _states(n_states)
    trans: Dict[TransKey, List[WeightFn]] = {}
    for a in labels:
        stuck_label = bool(rng.integers(0, 2))
        for x in states:
            lo = 0 if stuck_label else 1
            k = int(rng.integers(lo, max_fns + 1))
            fns = [_random_fn(rng, states, weights, monoid) for _ in range(k)]
            if stuck_label:
                fns = [fn for fn in fns if not fn.is_zero]
            trans[(x, a)] = fns
    return Ultras(states, labels, trans, monoid)


def _all_fns(states: Sequence[State], weights: Sequence[Any], monoid: WeightMonoid) -> List[WeightFn]:
    return [WeightFn(list(zip(states, ws)), monoid) for ws in product(weights, repeat=len(states))]


def _fn_sets(fns: Sequence[WeightFn], max_fns: int) -> List[Tuple[WeightFn, ...]]:
    return [c for k in range(max_fns + 1) for c in combinations(fns, k)]


def count_exhaustive(n_states: int, n_labels: int, n_weights: int, max_fns: int) -> int:
    n_fns = n_weights**n_states
    per_pair = sum(len(list(combinations(range(n_fns), k))) for k in range(max_fns + 1))
    return int(per_pair ** (n_states * n_labels))


def exhaustive_ultras(
    n_states: int,
    labels: Sequence[Label] = ("a",),
    weights: Sequence[Any] = SMALL_WEIGHTS,
    max_fns: int = 1,
    monoid: WeightMonoid = NAT_PLUS,
    functional: bool = False,
) -> Iterator[Ultras]:
    """Every system on `n_states` states whose (state, label) pairs carry a set of at
    most `max_fns` distinct functions with weights from `weights` (exactly one
    function when `functional`). See `count_exhaustive` for the family size."""
    states = _states(n_states)
    fns = _all_fns(states, weights, monoid)
    choices = [(fn,) for fn in fns] if functional else _fn_sets(fns, max_fns)
    keys = [(x, a) for x in states for a in labels]
    for assignment in product(choices, repeat=len(keys)):
        yield Ultras(states, labels, dict(zip(keys, assignment)), monoid)


def sample_param(rng: Generator, kind: SchemaKind, labels: Sequence[Label], weights: Sequence[Any]) -> Any:
    if kind is SchemaKind.Label:
        return labels[int(rng.integers(0, len(labels)))]
    if kind is SchemaKind.Weight:
        return weights[int(rng.integers(0, len(weights)))]
    if kind is SchemaKind.LabelSet:
        mask = rng.integers(0, 2, size=len(labels))
        return frozenset(a for a, keep in zip(labels, mask) if keep)
    raise ValueError(f"Cannot sample a parameter of kind {kind.value}.")


def sample_term(
    rng: Generator,
    sigma: Signature,
    labels: Sequence[Label],
    depth: int = DEFAULT_SAMPLE_DEPTH,
    weights: Sequence[Any] = (Fraction(1), Fraction(2)),
    leaves: Sequence[str] = (),
    max_variadic: int = 2,
) -> Term:
    """A random ground term of depth at most `depth` over the fixed-arity operators
    of `sigma` (variadic ones get up to `max_variadic` arguments).

    Leaves are nullary operators of `sigma` plus the names in `leaves` (constants).
    """
    decls = sorted(sigma, key=lambda d: d.name)
    nullary = [d for d in decls if d.arity == 0]
    if not nullary and not leaves:
        raise ValueError("The signature has no constants to build ground terms from.")

    def build(decl: OpDecl, children: List[Term]) -> Term:
        params = tuple(sample_param(rng, k, labels, weights) for k in decl.schema)
        return Term.op(decl.name, *children, params=params)

    def leaf() -> Term:
        k = int(rng.integers(0, len(nullary) + len(leaves)))
        if k < len(nullary):
            return build(nullary[k], [])
        return Term.op(leaves[k - len(nullary)])

    def go(d: int) -> Term:
        if d <= 0 or rng.random() < 0.2:
            return leaf()
        decl = decls[int(rng.integers(0, len(decls)))]
        n = decl.arity if decl.arity is not None else int(rng.integers(1, max_variadic + 1))
        if n == 0:
            return build(decl, [])
        return build(decl, [go(d - 1) for _ in range(n)])

    return go(depth)


def term_sampler(
    sigma: Signature,
    labels: Sequence[Label],
    depth: int = DEFAULT_SAMPLE_DEPTH,
    leaves: Sequence[str] = (),
    weights: Optional[Sequence[Any]] = None,
) -> Callable[[Generator], Term]:
    """A `rng -> Term` sampler for the congruence suite."""
    ws = tuple(weights) if weights is not None else (Fraction(1), Fraction(2))

    def sample(rng: Generator) -> Term:
        return sample_term(rng, sigma, labels, depth, ws, leaves)

    return sample

"""
Bisimulation on ULTraS: partition refinement, a brute-force oracle, direct
checkers for the weighted and Segala special cases, and M-bisimulation.

Two states x, y are related by a bisimulation R when for every label a and every
rho in trans(x, a) there is rho' in trans(y, a) with rho(C) = rho'(C) for every
class C of R, and symmetrically. Bisimilarity between two systems is computed on
their disjoint union.
"""

from __future__ import annotations

from itertools import combinations
from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy import ndarray
from pandas import DataFrame

from wfsosWB._constants import DEFAULT_BRUTE_FORCE_LIMIT
from wfsosWB._types import Constraint, Label, TerminationKind
from wfsosWB.ultras import State, Ultras, check_constraint, classify, ensure_functional, sort_states
from wfsosWB.utils import MFunctionViolation, PreconditionError
from wfsosWB.weights import WeightFn, canonical_key, class_weight, weight_key

Vector = Tuple[Any, ...]
StateSignature = Tuple[FrozenSet[Vector], ...]


class Partition:
    """A partition of a finite state set into nonempty, pairwise disjoint blocks.

    Blocks are kept in canonical form: states within a block sorted canonically,
    blocks ordered by their first state.
    """

    def __init__(self, blocks: Iterable[Iterable[State]]) -> None:
        canon = [tuple(sort_states(b)) for b in blocks]
        if any(not b for b in canon):
            raise ValueError("Partition blocks must be nonempty.")
        canon.sort(key=lambda b: canonical_key(b[0]))
        self.blocks: Tuple[Tuple[State, ...], ...] = tuple(canon)
        self._block_of: Dict[State, int] = {}
        for i, b in enumerate(self.blocks):
            for x in b:
                if x in self._block_of:
                    raise ValueError(f"State {x} occurs in two blocks.")
                self._block_of[x] = i

    @classmethod
    def trivial(cls, states: Iterable[State]) -> "Partition":
        """The one-block partition (empty when there are no states)."""
        states = list(states)
        return cls([states] if states else [])

    @classmethod
    def discrete(cls, states: Iterable[State]) -> "Partition":
        return cls([x] for x in states)

    @classmethod
    def from_labels(cls, labelling: Dict[State, Hashable]) -> "Partition":
        groups: Dict[Hashable, List[State]] = {}
        for x, key in labelling.items():
            groups.setdefault(key, []).append(x)
        return cls(groups.values())

    @property
    def states(self) -> FrozenSet[State]:
        return frozenset(self._block_of)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[Tuple[State, ...]]:
        return iter(self.blocks)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash(self.blocks)

    def __repr__(self) -> str:
        return "Partition(" + " | ".join(", ".join(str(x) for x in b) for b in self.blocks) + ")"

    def block_of(self, x: State) -> int:
        try:
            return self._block_of[x]
        except KeyError as e:
            raise ValueError(f"State {x} is not covered by the partition.") from e

    def same(self, x: State, y: State) -> bool:
        return self.block_of(x) == self.block_of(y)

    def refines(self, other: "Partition") -> bool:
        """True when every block of `self` lies inside a block of `other`."""
        return all(len({other.block_of(x) for x in b}) == 1 for b in self.blocks)

    def covers(self, u: Ultras) -> bool:
        return self.states == frozenset(u.states)

    def pairs(self) -> Iterator[Tuple[State, State]]:
        """Every unordered pair of distinct related states."""
        for b in self.blocks:
            yield from combinations(b, 2)

    def to_json(self) -> List[List[str]]:
        return [[str(x) for x in b] for b in self.blocks]

    def to_dataframe(self) -> DataFrame:
        rows = [(str(x), i) for i, b in enumerate(self.blocks) for x in b]
        return pd.DataFrame(rows, columns=["state", "block"])


def _check_covers(u: Ultras, p: Partition) -> None:
    if not p.covers(u):
        raise ValueError("The partition does not cover exactly the states of the system.")


def class_vector(rho: WeightFn, p: Partition) -> Vector:
    """(rho(C)) for the blocks C of `p`, in block order."""
    m = rho.monoid
    acc = [m.zero] * len(p)
    for y, w in rho.items():
        i = p.block_of(y)
        acc[i] = m.add(acc[i], w)
    return tuple(weight_key(w) for w in acc)


def state_signature(u: Ultras, x: State, p: Partition) -> StateSignature:
    """Per label, the set of class-weight vectors of x's weight functions. A stuck
    label gives the empty set, a terminal one contains the zero vector."""
    return tuple(frozenset(class_vector(rho, p) for rho in u.trans(x, a)) for a in u.labels)


def coarsest_bisimulation(u: Ultras, initial: Optional[Partition] = None) -> Partition:
    """The largest bisimulation on `u`, by signature refinement.

    Parameters
    ----------
    u: Ultras
        The system (use `disjoint_union` to compare two systems).

    initial: Partition
        Optional starting partition; the result refines it.

    Returns
    -------
    partition: Partition
        x and y share a block iff they are bisimilar (and share a block of `initial`).
    """
    current = Partition.trivial(u.states) if initial is None else initial
    _check_covers(u, current)
    while True:
        keys = {x: (current.block_of(x), state_signature(u, x, current)) for x in u.states}
        refined = Partition.from_labels(keys)
        if len(refined) == len(current):
            return current
        current = refined


def _matches(u: Ultras, x: State, y: State, p: Partition) -> bool:
    for a in u.labels:
        left = [class_vector(rho, p) for rho in u.trans(x, a)]
        right = [class_vector(rho, p) for rho in u.trans(y, a)]
        if not all(any(v == w for w in right) for v in left):
            return False
        if not all(any(v == w for w in left) for v in right):
            return False
    return True


def is_bisimulation(u: Ultras, p: Partition) -> bool:
    """Check both transfer conditions directly for every related pair."""
    _check_covers(u, p)
    return all(_matches(u, x, y, p) for x, y in p.pairs())


def _set_partitions(items: Sequence[State]) -> Iterator[List[List[State]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for smaller in _set_partitions(rest):
        for i in range(len(smaller)):
            yield smaller[:i] + [[first] + smaller[i]] + smaller[i + 1 :]
        yield [[first]] + smaller


def brute_force_bisim(u: Ultras, limit: int = DEFAULT_BRUTE_FORCE_LIMIT) -> Partition:
    """The largest bisimulation, found by testing every partition of the states,
    coarsest first.

    Raises
    ------
    PreconditionError
        If `u` has more than `limit` states.
    """
    n = len(u.states)
    if n > limit:
        raise PreconditionError(f"brute_force_bisim is limited to {limit} states, the system has {n}.")
    candidates = sorted(_set_partitions(list(u.states)), key=len)
    for blocks in candidates:
        p = Partition(blocks)
        if is_bisimulation(u, p):
            return p
    # the discrete partition always passes
    raise AssertionError("no bisimulation found")


def bisimilar(u: Ultras, x: State, y: State) -> bool:
    return coarsest_bisimulation(u).same(x, y)


def check_weighted_bisim(u: Ultras, p: Partition) -> bool:
    """Whether `p` is a weighted bisimulation of the functional system `u`: related
    states give every class the same weight on every label.

    Raises
    ------
    NotFunctionalError
        If some (state, label) has no or several weight functions.
    """
    ensure_functional(u)
    _check_covers(u, p)
    for x, y in p.pairs():
        for a in u.labels:
            (rx,) = u.trans(x, a)
            (ry,) = u.trans(y, a)
            for block in p.blocks:
                if weight_key(class_weight(rx, block)) != weight_key(class_weight(ry, block)):
                    return False
    return True


def _classes(R: ndarray) -> List[List[int]]:
    if R.size == 0:
        return []
    rows = np.unique(R, axis=0)
    return [list(np.flatnonzero(row)) for row in rows]


def _relation_partition(u: Ultras, R: ndarray) -> Partition:
    return Partition([[u.states[i] for i in cls] for cls in _classes(R)])


def coarsest_weighted_bisimulation(u: Ultras) -> Partition:
    """The largest weighted bisimulation of a functional system, as the greatest
    fixpoint of a boolean relation matrix.

    Raises
    ------
    NotFunctionalError
        If `u` is not functional.
    """
    ensure_functional(u)
    n = len(u.states)
    R = np.ones((n, n), dtype=bool)
    fns = [[next(iter(u.trans(x, a))) for a in u.labels] for x in u.states]
    while True:
        classes = _classes(R)
        blocks = [[u.states[c] for c in cls] for cls in classes]
        rows = [
            tuple(tuple(weight_key(class_weight(rho, b)) for b in blocks) for rho in fns[i])
            for i in range(n)
        ]
        same = np.array([[rows[i] == rows[j] for j in range(n)] for i in range(n)], dtype=bool).reshape(n, n)
        nxt = R & same
        if np.array_equal(nxt, R):
            return _relation_partition(u, R)
        R = nxt


def segala_bisimulation(u: Ultras) -> Partition:
    """Strong bisimilarity of a Segala system: related states match each other's
    distributions class by class, computed on a boolean relation matrix.

    Raises
    ------
    PreconditionError
        If some weight function of `u` is not a probability distribution.
    """
    violations = check_constraint(u, Constraint.Segala)
    if violations:
        raise PreconditionError(f"Not a Segala system: {violations[0]}", violations[0])
    n = len(u.states)
    R = np.ones((n, n), dtype=bool)
    while True:
        classes = _classes(R)
        blocks = [[u.states[c] for c in cls] for cls in classes]

        def lifted(i: int, a: Label) -> List[Vector]:
            return [
                tuple(weight_key(class_weight(mu, b)) for b in blocks) for mu in u.trans(u.states[i], a)
            ]

        dists = [[lifted(i, a) for a in u.labels] for i in range(n)]
        nxt = R.copy()
        for i in range(n):
            for j in range(n):
                if not R[i, j]:
                    continue
                for k in range(len(u.labels)):
                    mine, theirs = dists[i][k], dists[j][k]
                    if not all(mu in theirs for mu in mine) or not all(nu in mine for nu in theirs):
                        nxt[i, j] = False
                        break
        if np.array_equal(nxt, R):
            return _relation_partition(u, R)
        R = nxt


MTable = Callable[[State, Label, FrozenSet[State]], Any]


class MFunction:
    """An M-function: a map (x, a, C) -> M into a pointed set (M, bottom).

    Values are computed on demand and cached. `query` checks the first condition
    (bottom whenever every function of x on a gives C weight zero, or there is none)
    and `check_union` the second (agreement on C1 and C2 implies agreement on
    their union).
    """

    def __init__(self, u: Ultras, table: MTable, bottom: Any, name: str = "M") -> None:
        self.u = u
        self.table = table
        self.bottom = bottom
        self.name = name
        self._cache: Dict[Tuple[State, Label, FrozenSet[State]], Any] = {}

    def __call__(self, x: State, a: Label, C: Iterable[State]) -> Any:
        return self.query(x, a, C)

    def query(self, x: State, a: Label, C: Iterable[State]) -> Any:
        """
        Raises
        ------
        MFunctionViolation
            With bullet 1 if the value is not bottom where it must be.
        """
        key = (x, a, frozenset(C))
        if key in self._cache:
            return self._cache[key]
        value = self.table(*key)
        m = self.u.monoid
        fns = self.u.trans(x, a)
        if all(m.is_zero(class_weight(rho, key[2])) for rho in fns) and value != self.bottom:
            raise MFunctionViolation(1, (x, a, sorted(key[2], key=canonical_key)))
        self._cache[key] = value
        return value

    def check_union(self, x: State, y: State, a: Label, C1: Iterable[State], C2: Iterable[State]) -> None:
        """
        Raises
        ------
        MFunctionViolation
            With bullet 2 if x and y agree on C1 and on C2 but not on their union.
        """
        c1, c2 = frozenset(C1), frozenset(C2)
        if self.query(x, a, c1) == self.query(y, a, c1) and self.query(x, a, c2) == self.query(y, a, c2):
            if self.query(x, a, c1 | c2) != self.query(y, a, c1 | c2):
                raise MFunctionViolation(2, (x, y, a, sorted(c1, key=canonical_key), sorted(c2, key=canonical_key)))


def constant_m(u: Ultras, bottom: Any = None) -> MFunction:
    """The M-function that is bottom everywhere."""
    return MFunction(u, lambda x, a, C: bottom, bottom, "constant")


def termination_witness(u: Ultras) -> Optional[Tuple[State, State, Label]]:
    """A label on which one state is stuck and another terminal, if any."""
    for a in u.labels:
        stuck = [x for x in u.states if TerminationKind.Stuck in classify(u, x, a)]
        terminal = [x for x in u.states if TerminationKind.Terminal in classify(u, x, a)]
        if stuck and terminal:
            return (stuck[0], terminal[0], a)
    return None


def canonical_m(u: Ultras, rel: Partition) -> MFunction:
    """The M-function of `rel`'s classes of weight functions.

    M(x, a, C) is the set of classes [rho] (rho equal up to the weights it gives
    the blocks of `rel`) of x's a-functions with rho(C) != 0, together with the
    class of the zero function, which is also bottom.

    Raises
    ------
    PreconditionError
        If some label has both a stuck and a terminal state (the witness is
        attached as (stuck state, terminal state, label)).
    """
    _check_covers(u, rel)
    witness = termination_witness(u)
    if witness is not None:
        x, y, a = witness
        raise PreconditionError(f"{x} is stuck and {y} is terminal on '{a}'", witness)
    m = u.monoid
    zero = tuple(weight_key(m.zero) for _ in rel.blocks)
    bottom = frozenset({zero})

    def table(x: State, a: Label, C: FrozenSet[State]) -> FrozenSet[Vector]:
        found = {class_vector(rho, rel) for rho in u.trans(x, a) if not m.is_zero(class_weight(rho, C))}
        return frozenset(found) | bottom

    return MFunction(u, table, bottom, "canonical")


def check_m_bisim(u: Ultras, m: MFunction, rel: Partition, check_unions: bool = True) -> bool:
    """Whether `rel` is an M-bisimulation: related states agree on M(-, a, C) for
    every label a and block C of `rel`.

    Raises
    ------
    MFunctionViolation
        If `m` breaks one of the M-function conditions on a queried triple.
    """
    _check_covers(u, rel)
    ok = True
    for x, y in rel.pairs():
        for a in u.labels:
            for block in rel.blocks:
                if m.query(x, a, block) != m.query(y, a, block):
                    ok = False
            if check_unions:
                for b1, b2 in combinations(rel.blocks, 2):
                    m.check_union(x, y, a, b1, b2)
    return ok

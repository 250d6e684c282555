"""
Uniform labelled transition systems (ULTraS).

`trans(x, a)` is a finite set of weight functions over the states: the empty set
means x is stuck on a, and a set containing the zero function gives x a terminal
option on a.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import (
    Any,
    Callable,
    Dict,
    FrozenSet,
    Generator,
    Hashable,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Tuple,
)

import pandas as pd
from pandas import DataFrame

from wfsosWB._constants import DOT_FN_SHAPE, DOT_STATE_SHAPE
from wfsosWB._types import Constraint, Label, TerminationKind
from wfsosWB.utils import NotFunctionalError, PreconditionError
from wfsosWB.weights import RAT_INF_PLUS, WeightFn, WeightMonoid, canonical_key, get_monoid

State = Hashable
TransKey = Tuple[State, Label]


class Ultras:
    """A finite ULTraS over a declared label set.

    Parameters
    ----------
    states: Iterable[State]
        The states, in presentation order.

    labels: Iterable[Label]
        The finite label set A.

    trans: Mapping[(state, label), Iterable[WeightFn]]
        Missing pairs are stuck.

    monoid: WeightMonoid
        The weight monoid of every transition.

    truncated: bool
        Set when the states were produced by an exploration that hit its budget.
    """

    def __init__(
        self,
        states: Iterable[State],
        labels: Iterable[Label],
        trans: Mapping[TransKey, Iterable[WeightFn]],
        monoid: WeightMonoid = RAT_INF_PLUS,
        truncated: bool = False,
    ) -> None:
        self.states: Tuple[State, ...] = tuple(states)
        self.labels: Tuple[Label, ...] = tuple(sorted(set(labels)))
        self.monoid = monoid
        self.truncated = truncated
        self._index: Dict[State, int] = {}
        for i, x in enumerate(self.states):
            if x in self._index:
                raise ValueError(f"State {x} is listed twice.")
            self._index[x] = i
        label_set = set(self.labels)
        self._trans: Dict[TransKey, FrozenSet[WeightFn]] = {}
        for (x, a), fns in trans.items():
            if x not in self._index:
                raise ValueError(f"Transition from unknown state {x}.")
            if a not in label_set:
                raise ValueError(f"Transition with undeclared label '{a}'.")
            fset = frozenset(fns)
            for fn in fset:
                outside = [y for y in fn if y not in self._index]
                if outside:
                    raise ValueError(f"Weight function {fn} of {x} reaches unknown states {outside}.")
            if fset:
                self._trans[(x, a)] = fset

    def __len__(self) -> int:
        return len(self.states)

    def __contains__(self, x: object) -> bool:
        return x in self._index

    def index(self, x: State) -> int:
        try:
            return self._index[x]
        except KeyError as e:
            raise ValueError(f"Unknown state {x}.") from e

    def trans(self, x: State, a: Label) -> FrozenSet[WeightFn]:
        if x not in self._index:
            raise ValueError(f"Unknown state {x}.")
        if a not in self.labels:
            raise ValueError(f"Unknown label '{a}'.")
        return self._trans.get((x, a), frozenset())

    def sorted_trans(self, x: State, a: Label) -> List[WeightFn]:
        return sorted(self.trans(x, a), key=lambda fn: fn.sort_key())

    def transitions(self) -> Iterator[Tuple[State, Label, List[WeightFn]]]:
        for x in self.states:
            for a in self.labels:
                yield x, a, self.sorted_trans(x, a)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Ultras):
            return NotImplemented
        return (
            set(self.states) == set(other.states)
            and self.labels == other.labels
            and self.monoid == other.monoid
            and self._trans == other._trans
        )

    def __repr__(self) -> str:
        return f"Ultras({len(self.states)} states, labels={list(self.labels)}, monoid={self.monoid.id})"

    def to_json(self) -> Dict[str, Any]:
        fmt = self.monoid.format
        return {
            "monoid": self.monoid.id,
            "labels": list(self.labels),
            "states": [str(x) for x in self.states],
            "truncated": self.truncated,
            "trans": [
                {
                    "src": str(x),
                    "label": a,
                    "fns": [[{"tgt": str(y), "w": fmt(w)} for y, w in fn.sorted_items()] for fn in fns],
                }
                for x, a, fns in self.transitions()
            ],
        }

    def to_json_str(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(
        cls, data: Mapping[str, Any], parse_state: Optional[Callable[[str], State]] = None
    ) -> "Ultras":
        """Inverse of `to_json`. States are kept as strings unless `parse_state` is given."""
        try:
            monoid = get_monoid(data["monoid"])
            parse = parse_state or (lambda s: s)
            by_name = {s: parse(s) for s in data["states"]}
            trans: Dict[TransKey, List[WeightFn]] = {}
            for entry in data["trans"]:
                src = by_name[entry["src"]]
                fns = [
                    WeightFn([(by_name[p["tgt"]], monoid.parse(p["w"])) for p in fn], monoid)
                    for fn in entry["fns"]
                ]
                trans[(src, entry["label"])] = fns
            return cls(
                [by_name[s] for s in data["states"]],
                data["labels"],
                trans,
                monoid,
                bool(data.get("truncated", False)),
            )
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed ULTraS JSON: missing or invalid field {e}.") from e

    def to_dot(self, name: str = "ultras") -> str:
        return "\n".join(self._dot_lines(name)) + "\n"

    def _dot_lines(self, name: str) -> Generator[str, None, None]:
        fmt = self.monoid.format
        yield f"digraph {_gvquote(name)} {{"
        yield "  rankdir=LR;"
        for i, x in enumerate(self.states):
            yield f"  s{i} [label={_gvquote(str(x))}, shape={DOT_STATE_SHAPE}];"
        for x, a, fns in self.transitions():
            i = self._index[x]
            for j, fn in enumerate(fns):
                node = f"f{i}_{_gvid(a)}_{j}"
                yield f"  {node} [label=\"\", shape={DOT_FN_SHAPE}];"
                yield f"  s{i} -> {node} [label={_gvquote(a)}, arrowhead=none];"
                for y, w in fn.sorted_items():
                    yield f"  {node} -> s{self._index[y]} [label={_gvquote(f'{a}; {fmt(w)}')}];"
        yield "}"

    def to_text(self) -> str:
        fmt = self.monoid.format
        lines = []
        for x, a, fns in self.transitions():
            if not fns:
                lines.append(f"{x} -/{a}-> (stuck)")
            for fn in fns:
                body = ", ".join(f"{y}: {fmt(w)}" for y, w in fn.sorted_items())
                lines.append(f"{x} --{a}--> {{{body}}}")
        if self.truncated:
            lines.append("# truncated: exploration budget exhausted")
        return "\n".join(lines) + "\n"

    def to_dataframe(self) -> DataFrame:
        """One row per (source, label, function index, target); terminal functions give a
        row with no target and stuck pairs give a row with no function."""
        rows = []
        fmt = self.monoid.format
        for x, a, fns in self.transitions():
            if not fns:
                rows.append((str(x), a, None, None, None))
            for j, fn in enumerate(fns):
                if fn.is_zero:
                    rows.append((str(x), a, j, None, fmt(self.monoid.zero)))
                for y, w in fn.sorted_items():
                    rows.append((str(x), a, j, str(y), fmt(w)))
        return pd.DataFrame(rows, columns=["src", "label", "fn", "tgt", "weight"])


def _gvquote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _gvid(s: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in s)


def disjoint_union(u: Ultras, v: Ultras) -> Ultras:
    """The ULTraS on states (0, x) for x in u and (1, y) for y in v."""
    if u.monoid != v.monoid:
        raise ValueError(f"Cannot join systems over {u.monoid.id} and {v.monoid.id}.")
    labels = sorted(set(u.labels) | set(v.labels))
    trans: Dict[TransKey, List[WeightFn]] = {}
    for side, sys in enumerate((u, v)):
        tag: Callable[[State], State] = lambda x, side=side: (side, x)
        for x, a, fns in sys.transitions():
            if fns:
                trans[((side, x), a)] = [
                    WeightFn._trusted({tag(y): w for y, w in fn.items()}, sys.monoid) for fn in fns
                ]
    states = [(0, x) for x in u.states] + [(1, y) for y in v.states]
    return Ultras(states, labels, trans, u.monoid, u.truncated or v.truncated)


def classify(u: Ultras, x: State, a: Label) -> FrozenSet[TerminationKind]:
    fns = u.trans(x, a)
    if not fns:
        return frozenset({TerminationKind.Stuck})
    kinds = set()
    for fn in fns:
        kinds.add(TerminationKind.Terminal if fn.is_zero else TerminationKind.Active)
    return frozenset(kinds)


def is_functional(u: Ultras) -> bool:
    return all(len(u.trans(x, a)) == 1 for x in u.states for a in u.labels)


def ensure_functional(u: Ultras) -> None:
    for x in u.states:
        for a in u.labels:
            n = len(u.trans(x, a))
            if n != 1:
                raise NotFunctionalError(f"State {x} has {n} weight function(s) on label '{a}'.")


@dataclass(frozen=True)
class ConstraintViolation:
    state: State
    label: Optional[Label]
    fn: Optional[WeightFn]
    message: str

    def __str__(self) -> str:
        where = f"{self.state}" if self.label is None else f"{self.state} --{self.label}-->"
        return f"{where}: {self.message}"


def check_constraint(u: Ultras, c: Any) -> List[ConstraintViolation]:
    """Every transition violating the probabilistic constraint `c`.

    Parameters
    ----------
    u: Ultras
        A system over `rat_plus` or `rat_inf_plus`.

    c: Constraint or str
        "segala": every weight function has total 1. "reactive": every weight function
        has total 0 or 1. "generative": the system is functional and the totals of each
        state summed over all labels are 0 or 1.
    """
    constraint = Constraint.validate(c)
    if not u.monoid.is_rational:
        raise PreconditionError(f"Constraint {constraint.value} needs a rational monoid, not {u.monoid.id}.")
    m = u.monoid
    one = m.one
    out: List[ConstraintViolation] = []
    if constraint is Constraint.Generative:
        ensure_functional(u)
        for x in u.states:
            total = m.sum(next(iter(u.trans(x, a))).total() for a in u.labels)
            if not (m.is_zero(total) or total == one):
                out.append(ConstraintViolation(x, None, None, f"outgoing total {m.format(total)} not in {{0,1}}"))
        return out
    for x, a, fns in u.transitions():
        for fn in fns:
            total = fn.total()
            if constraint is Constraint.Segala and total != one:
                out.append(ConstraintViolation(x, a, fn, f"total {m.format(total)} is not 1"))
            if constraint is Constraint.Reactive and not (m.is_zero(total) or total == one):
                out.append(ConstraintViolation(x, a, fn, f"total {m.format(total)} not in {{0,1}}"))
    return out


def sort_states(states: Iterable[State]) -> List[State]:
    return sorted(states, key=canonical_key)

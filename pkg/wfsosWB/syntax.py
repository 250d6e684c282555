"""
Signatures and freely generated terms.

Terms are immutable and hash-consed on their structure, so structurally equal terms
compare and hash equal. An operator instance carries static parameters (labels, exact
rates, label sets) which distinguish e.g. `prefix{a,2}` from `prefix{a,3}`. Rule
schemas use `MetaVar` parameters (`$a`) which are bound when a rule is instantiated.
Weight terms may additionally carry term-valued template parameters (`@t`, with holes
`#k`) and quoted WeightExpr parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import (
    Any,
    Callable,
    Dict,
    FrozenSet,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from wfsosWB._types import SchemaKind
from wfsosWB.utils import SpecError, SubstitutionError
from wfsosWB.weights import INF, format_weight, weight_key


@dataclass(frozen=True, order=True)
class MetaVar:
    """A static-parameter metavariable such as `$a` or `$L`."""

    name: str

    def __str__(self) -> str:
        return f"${self.name}"


class TermKind(Enum):
    Op = 0
    ProcessVar = 1
    WeightVar = 2
    Hole = 3


Param = Any


def param_key(p: Param) -> Tuple[Any, ...]:
    if isinstance(p, str):
        return (0, p)
    if p is INF or (isinstance(p, (int, Fraction)) and not isinstance(p, bool)):
        return (1, weight_key(p))
    if isinstance(p, frozenset):
        return (2, tuple(sorted(p)))
    if isinstance(p, MetaVar):
        return (3, p.name)
    if isinstance(p, Term):
        return (4, p.sort_key())
    return (5, str(p))


def format_param(p: Param) -> str:
    if isinstance(p, str):
        return p
    if isinstance(p, frozenset):
        return "{" + ",".join(sorted(p)) + "}"
    if isinstance(p, MetaVar):
        return str(p)
    if isinstance(p, Term):
        return f"@{p}"
    if p is INF or isinstance(p, (int, Fraction)):
        return format_weight(p)
    text = str(p).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{text}"'


class Term:
    """A term `name{p1,...}(t1,...)`, a process variable `x`, a weight-function
    variable `%f`, or a template hole `#k`."""

    __slots__ = ("kind", "name", "params", "children", "_hash", "_key")

    def __init__(
        self,
        kind: TermKind,
        name: str,
        params: Sequence[Param] = (),
        children: Sequence["Term"] = (),
    ) -> None:
        self.kind = kind
        self.name = name
        self.params: Tuple[Param, ...] = tuple(params)
        self.children: Tuple[Term, ...] = tuple(children)
        if kind is not TermKind.Op and (self.params or self.children):
            raise ValueError(f"Variables and holes are leaves, got {name} with arguments.")
        self._hash = hash((kind.value, name, self.params, self.children))
        self._key: Optional[Tuple[Any, ...]] = None

    @classmethod
    def op(cls, name: str, *children: "Term", params: Sequence[Param] = ()) -> "Term":
        return cls(TermKind.Op, name, params, children)

    @classmethod
    def var(cls, name: str) -> "Term":
        return cls(TermKind.ProcessVar, name)

    @classmethod
    def wvar(cls, name: str) -> "Term":
        return cls(TermKind.WeightVar, name)

    @classmethod
    def hole(cls, k: int) -> "Term":
        return cls(TermKind.Hole, str(k))

    @property
    def arity(self) -> int:
        return len(self.children)

    @property
    def is_var(self) -> bool:
        return self.kind in (TermKind.ProcessVar, TermKind.WeightVar)

    @property
    def is_process_var(self) -> bool:
        return self.kind is TermKind.ProcessVar

    @property
    def is_weight_var(self) -> bool:
        return self.kind is TermKind.WeightVar

    @property
    def is_hole(self) -> bool:
        return self.kind is TermKind.Hole

    @property
    def is_ground(self) -> bool:
        if self.kind is not TermKind.Op:
            return False
        for p in self.params:
            if isinstance(p, MetaVar) or (isinstance(p, Term) and not p.is_ground):
                return False
        return all(c.is_ground for c in self.children)

    @property
    def depth(self) -> int:
        if not self.children:
            return 0
        return 1 + max(c.depth for c in self.children)

    def with_children(self, children: Sequence["Term"]) -> "Term":
        return Term(self.kind, self.name, self.params, children)

    def with_params(self, params: Sequence[Param]) -> "Term":
        return Term(self.kind, self.name, params, self.children)

    def replace_child(self, i: int, child: "Term") -> "Term":
        children = list(self.children)
        children[i] = child
        return self.with_children(children)

    def subterms(self) -> Iterator["Term"]:
        yield self
        for c in self.children:
            yield from c.subterms()

    def sort_key(self) -> Tuple[Any, ...]:
        if self._key is None:
            self._key = (
                self.kind.value,
                self.name,
                tuple(param_key(p) for p in self.params),
                tuple(c.sort_key() for c in self.children),
            )
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.kind is other.kind
            and self.name == other.name
            and self.params == other.params
            and self.children == other.children
        )

    def __lt__(self, other: "Term") -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        if self.kind is TermKind.ProcessVar:
            return self.name
        if self.kind is TermKind.WeightVar:
            return f"%{self.name}"
        if self.kind is TermKind.Hole:
            return f"#{self.name}"
        out = self.name
        if self.params:
            out += "{" + ",".join(format_param(p) for p in self.params) + "}"
        if self.children:
            out += "(" + ",".join(str(c) for c in self.children) + ")"
        return out

    def __repr__(self) -> str:
        return f"Term({self})"


VarKey = Union[Term, str]


def _as_var(key: VarKey) -> Term:
    if isinstance(key, Term):
        if not key.is_var:
            raise SubstitutionError(f"Substitution key {key} is not a variable.")
        return key
    if isinstance(key, str):
        return Term.wvar(key[1:]) if key.startswith("%") else Term.var(key)
    raise SubstitutionError(f"Substitution key {key!r} is not a variable.")


def _normalize_subst(sigma: Mapping[VarKey, Any]) -> Dict[Term, Any]:
    return {_as_var(k): v for k, v in sigma.items()}


def _map_term(t: Term, leaf: Callable[[Term], Term], param: Callable[[Param], Param]) -> Term:
    if t.kind is not TermKind.Op:
        return leaf(t)
    params = tuple(param(p) for p in t.params)
    children = tuple(_map_term(c, leaf, param) for c in t.children)
    if params == t.params and all(a is b for a, b in zip(children, t.children)):
        return t
    return Term(t.kind, t.name, params, children)


def apply_subst(t: Term, sigma: Mapping[VarKey, Term], strict: bool = False) -> Term:
    """Simultaneous substitution of variables (including inside template parameters).

    Raises
    ------
    SubstitutionError
        If a key is not a variable, an image is not a term, or (strict mode) a
        variable of `t` is unmapped.
    """
    table = _normalize_subst(sigma)
    for k, image in table.items():
        if not isinstance(image, Term):
            raise SubstitutionError(f"Image of {k} is not a term: {image!r}")

    def leaf(v: Term) -> Term:
        if v in table:
            return table[v]
        if strict and v.is_var:
            raise SubstitutionError(f"Variable {v} is not mapped by the substitution.")
        return v

    def param(p: Param) -> Param:
        if isinstance(p, Term):
            return _map_term(p, leaf, param)
        return p

    return _map_term(t, leaf, param)


def term_vars(t: Term) -> FrozenSet[Term]:
    """The set of variable leaves of `t` (process and weight-function variables)."""
    found: Set[Term] = set()

    def visit(s: Term) -> None:
        if s.is_var:
            found.add(s)
            return
        for p in s.params:
            if isinstance(p, Term):
                visit(p)
        for c in s.children:
            visit(c)

    visit(t)
    return frozenset(found)


def term_metavars(t: Term) -> FrozenSet[str]:
    found: Set[str] = set()

    def visit_param(p: Param) -> None:
        if isinstance(p, MetaVar):
            found.add(p.name)
        elif isinstance(p, Term):
            visit(p)
        elif hasattr(p, "metavars"):
            found.update(p.metavars())

    def visit(s: Term) -> None:
        for p in s.params:
            visit_param(p)
        for c in s.children:
            visit(c)

    visit(t)
    return frozenset(found)


def bind_param(p: Param, bindings: Mapping[str, Any], strict: bool = False) -> Param:
    if isinstance(p, MetaVar):
        if p.name in bindings:
            return bindings[p.name]
        if strict:
            raise SubstitutionError(f"Metavariable {p} is unbound.")
        return p
    if isinstance(p, Term):
        return instantiate(p, bindings, strict)
    bind = getattr(p, "bind", None)
    if callable(bind):
        return bind(bindings)
    return p


def instantiate(t: Term, bindings: Mapping[str, Any], strict: bool = False) -> Term:
    """Replace metavariable parameters by their bound static values."""
    if not bindings and not strict:
        return t
    return _map_term(t, lambda v: v, lambda p: bind_param(p, bindings, strict))


def fill_holes(template: Term, values: Sequence[Term]) -> Term:
    """Replace each hole `#k` (1-based) in `template` by `values[k-1]`."""

    def leaf(v: Term) -> Term:
        if v.is_hole:
            k = int(v.name)
            if not 1 <= k <= len(values):
                raise SubstitutionError(f"Hole #{k} has no value ({len(values)} given).")
            return values[k - 1]
        return v

    return _map_term(template, leaf, lambda p: p)


def template_holes(template: Term) -> FrozenSet[int]:
    return frozenset(int(s.name) for s in template.subterms() if s.is_hole)


@dataclass(frozen=True)
class OpDecl:
    """An operator family: name, static-parameter schema and arity.

    `arity=None` declares a variadic operator. With `repeat_last` the last schema
    entry may occur any number of times (at least once).
    """

    name: str
    schema: Tuple[SchemaKind, ...] = ()
    arity: Optional[int] = 0
    repeat_last: bool = False

    def check_params(self, params: Sequence[Param]) -> Optional[str]:
        if self.repeat_last and self.schema:
            fixed = len(self.schema) - 1
            if len(params) < len(self.schema):
                return f"{self.name} expects at least {len(self.schema)} parameter(s)"
            kinds = list(self.schema[:fixed]) + [self.schema[-1]] * (len(params) - fixed)
        else:
            if len(params) != len(self.schema):
                return (
                    f"{self.name} expects {len(self.schema)} parameter(s), got {len(params)}"
                )
            kinds = list(self.schema)
        for kind, p in zip(kinds, params):
            if isinstance(p, MetaVar):
                continue
            if not _param_fits(kind, p):
                return f"{self.name}: parameter {format_param(p)} is not a {kind.value}"
        return None

    def check_arity(self, n: int) -> Optional[str]:
        if self.arity is not None and n != self.arity:
            return f"{self.name} has arity {self.arity}, got {n} argument(s)"
        return None

    def __str__(self) -> str:
        out = self.name
        if self.schema:
            kinds = [k.value for k in self.schema]
            if self.repeat_last:
                kinds[-1] += "*"
            out += "{" + ",".join(kinds) + "}"
        return out + "/" + ("*" if self.arity is None else str(self.arity))


def _param_fits(kind: SchemaKind, p: Param) -> bool:
    if kind is SchemaKind.Label:
        return isinstance(p, str)
    if kind is SchemaKind.Weight:
        return p is INF or (isinstance(p, (int, Fraction)) and not isinstance(p, bool))
    if kind is SchemaKind.LabelSet:
        return isinstance(p, frozenset)
    if kind is SchemaKind.Term:
        return isinstance(p, Term)
    return hasattr(p, "evaluate")


@dataclass
class Signature:
    """A finite set of operator families of one kind (`process` or `weight`)."""

    kind: str
    ops: Dict[str, OpDecl] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("process", "weight"):
            raise ValueError("Signature kind must be one of ['process', 'weight']")

    @classmethod
    def of(cls, kind: str, decls: Iterable[OpDecl]) -> "Signature":
        sig = cls(kind)
        for d in decls:
            sig.add(d)
        return sig

    def add(self, decl: OpDecl) -> None:
        if decl.name in self.ops:
            raise SpecError(f"Operator '{decl.name}' declared twice in {self.kind} signature.")
        self.ops[decl.name] = decl

    def __contains__(self, name: object) -> bool:
        return name in self.ops

    def __getitem__(self, name: str) -> OpDecl:
        return self.ops[name]

    def __iter__(self) -> Iterator[OpDecl]:
        return iter(self.ops.values())

    def __len__(self) -> int:
        return len(self.ops)

    @property
    def names(self) -> FrozenSet[str]:
        return frozenset(self.ops)

    def check_term(self, t: Term, other: Optional["Signature"] = None) -> List[str]:
        """Return the problems of `t` as a term over this signature.

        Operators absent here are looked up in `other` (the process signature when
        checking weight terms, whose leaves may be process terms).
        """
        problems: List[str] = []

        def visit(s: Term) -> None:
            if s.kind is not TermKind.Op:
                return
            decl = self.ops.get(s.name)
            if decl is None and other is not None:
                decl = other.ops.get(s.name)
            if decl is None:
                problems.append(f"unknown operator '{s.name}'")
            else:
                for msg in (decl.check_arity(len(s.children)), decl.check_params(s.params)):
                    if msg is not None:
                        problems.append(msg)
            for c in s.children:
                visit(c)

        visit(t)
        return problems

    def __str__(self) -> str:
        return f"signature {self.kind} {{ " + "; ".join(str(d) for d in self) + " }"

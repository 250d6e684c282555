from __future__ import annotations

from enum import Enum
from typing import Hashable, Type, TypeVar, Union

Label = str
Element = Hashable

E = TypeVar("E", bound="ValidatedEnum")


class ValidatedEnum(Enum):
    @classmethod
    def validate(cls: Type[E], s: Union[str, E]) -> E:
        try:
            if isinstance(s, str):
                return cls(s)
            if isinstance(s, cls):
                return s
            raise TypeError(f"Cannot interpret {s!r} as {cls.__name__}")
        except Exception as e:
            values = [e.value for e in cls]
            raise ValueError(f"{cls.__name__} must be one of {values}") from e


class Carrier(ValidatedEnum):
    Boolean = "bool_or"
    Naturals = "nat_plus"
    Integers = "int_plus"
    Rational = "rat_plus"
    RationalInf = "rat_inf_plus"


class TerminationKind(ValidatedEnum):
    Stuck = "stuck"
    Terminal = "terminal"
    Active = "active"


class Constraint(ValidatedEnum):
    Segala = "segala"
    Reactive = "reactive"
    Generative = "generative"


class OnExhaustion(ValidatedEnum):
    Error = "error"
    Truncate = "truncate"


class RateLaw(ValidatedEnum):
    Minimal = "minimal"
    Multiplicative = "multiplicative"


class Emit(ValidatedEnum):
    Json = "json"
    Dot = "dot"
    Text = "text"


class SpecFormat(ValidatedEnum):
    Wfsos = "wfsos"
    Pepa = "pepa"
    Segala = "segala"
    Wgsos = "wgsos"


class SchemaKind(ValidatedEnum):
    Label = "label"
    Weight = "weight"
    LabelSet = "labelset"
    Term = "term"
    Text = "text"


class FormatBullet(ValidatedEnum):
    """Which well-formedness condition of a rule a violation refers to."""

    UnknownOperator = "unknown-operator"
    Arity = "arity"
    DistinctVars = "distinct-vars"
    PremiseOverlap = "premise-overlap"
    TargetVars = "target-vars"
    UnboundWeightVar = "unbound-weight-var"
    ZeroTotal = "zero-total"
    Zerosumfree = "zerosumfree"
    UnknownLabel = "unknown-label"
    UnboundMetavar = "unbound-metavar"
    BadWeight = "bad-weight"
    Interpretation = "interpretation"
    Constant = "constant"
    ConvexWeights = "convex-weights"
    Multiadditive = "multiadditive"
    Naturality = "naturality"

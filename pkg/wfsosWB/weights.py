"""
Commutative weight monoids and finitely supported weight functions.

A `WeightMonoid` is one of a handful of built-in carriers (booleans under
disjunction, naturals, integers, non-negative rationals, and non-negative rationals
extended with +inf). All arithmetic is exact: rationals are `fractions.Fraction`
and +inf is the singleton `INF`.

A `WeightFn` is an immutable, finitely supported map from elements (states, or
process terms) to weights, kept in canonical form: zero weights are never stored,
so two weight functions are equal iff their entry maps are equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import (
    AbstractSet,
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
    Tuple,
    Union,
)

import numpy as np
from numpy import ndarray
from numpy.random import Generator

from wfsosWB._constants import DEFAULT_ROW_COLUMN_ROUNDS, LAW_SAMPLES
from wfsosWB._types import Carrier, Element
from wfsosWB.utils import SpecError, SubstitutionError, SumMismatchError


class Infinity:
    """The distinguished top element of the `rat_inf_plus` carrier."""

    __slots__ = ()
    _instance: Optional["Infinity"] = None

    def __new__(cls) -> "Infinity":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self) -> Tuple[Any, ...]:
        return (Infinity, ())

    def __copy__(self) -> "Infinity":
        return self

    def __deepcopy__(self, memo: Any) -> "Infinity":
        return self

    def __eq__(self, other: object) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("inf")

    def __lt__(self, other: object) -> bool:
        return False

    def __le__(self, other: object) -> bool:
        return other is self

    def __gt__(self, other: object) -> bool:
        return other is not self

    def __ge__(self, other: object) -> bool:
        return True

    def __repr__(self) -> str:
        return "inf"


INF = Infinity()

Weight = Union[bool, int, Fraction, Infinity]
ElementMap = Union[Mapping[Any, Any], Callable[[Any], Any]]


def is_inf(w: Any) -> bool:
    return w is INF


# Numeric helpers shared by interpretations and WeightExpr. They do not consult a
# monoid: booleans count as 0/1 and results are coerced by the caller.


def _num(w: Any) -> Any:
    if isinstance(w, bool):
        return int(w)
    return w


def wadd(a: Any, b: Any) -> Any:
    a, b = _num(a), _num(b)
    if a is INF or b is INF:
        return INF
    return Fraction(a) + Fraction(b)


def wsub(a: Any, b: Any) -> Any:
    a, b = _num(a), _num(b)
    if b is INF:
        if a is INF:
            return Fraction(0)
        raise ValueError("Cannot subtract inf from a finite weight.")
    if a is INF:
        return INF
    return Fraction(a) - Fraction(b)


def wmul(a: Any, b: Any) -> Any:
    """Product with 0 * inf = 0."""
    a, b = _num(a), _num(b)
    if a == 0 or b == 0:
        return Fraction(0)
    if a is INF or b is INF:
        return INF
    return Fraction(a) * Fraction(b)


def wdiv(a: Any, b: Any) -> Any:
    """Division with x/0 = 0, x/inf = 0, inf/inf = 1 and inf/x = inf."""
    a, b = _num(a), _num(b)
    if b == 0:
        return Fraction(0)
    if a is INF:
        return Fraction(1) if b is INF else INF
    if b is INF:
        return Fraction(0)
    return Fraction(a) / Fraction(b)


def wmin(*ws: Any) -> Any:
    if not ws:
        raise ValueError("min() of no weights")
    return min((_num(w) for w in ws), key=weight_key)


def wmax(*ws: Any) -> Any:
    if not ws:
        raise ValueError("max() of no weights")
    return max((_num(w) for w in ws), key=weight_key)


def weight_key(w: Any) -> Tuple[int, Fraction]:
    """Total order on weights of any carrier, +inf last."""
    if w is INF:
        return (1, Fraction(0))
    if isinstance(w, bool):
        return (0, Fraction(int(w)))
    return (0, Fraction(w))


def canonical_key(e: Any) -> Tuple[Any, ...]:
    """Total order on elements: terms by their structural key, tuples elementwise,
    everything else by type name and value."""
    key = getattr(e, "sort_key", None)
    if callable(key):
        return (0, key())
    if isinstance(e, tuple):
        return (1, tuple(canonical_key(x) for x in e))
    return (2, type(e).__name__, e)


@dataclass(frozen=True)
class WeightMonoid:
    """A commutative monoid (W, +, 0) over one of the built-in carriers."""

    id: str
    carrier: Carrier
    zerosumfree: bool
    has_infinity: bool = False

    @property
    def zero(self) -> Weight:
        if self.carrier is Carrier.Boolean:
            return False
        if self.carrier in (Carrier.Naturals, Carrier.Integers):
            return 0
        return Fraction(0)

    @property
    def one(self) -> Weight:
        if self.carrier is Carrier.Boolean:
            return True
        if self.carrier in (Carrier.Naturals, Carrier.Integers):
            return 1
        return Fraction(1)

    @property
    def is_numeric(self) -> bool:
        return self.carrier is not Carrier.Boolean

    @property
    def is_rational(self) -> bool:
        return self.carrier in (Carrier.Rational, Carrier.RationalInf)

    def is_zero(self, w: Weight) -> bool:
        if self.carrier is Carrier.Boolean:
            return w is False
        return w is not INF and w == 0

    def add(self, a: Weight, b: Weight) -> Weight:
        if self.carrier is Carrier.Boolean:
            return bool(a or b)
        if a is INF or b is INF:
            return INF
        return a + b  # type: ignore

    def mul(self, a: Weight, b: Weight) -> Weight:
        if self.carrier is Carrier.Boolean:
            return bool(a and b)
        return self.coerce(wmul(a, b))

    def sum(self, ws: Iterable[Weight]) -> Weight:
        total = self.zero
        for w in ws:
            total = self.add(total, w)
        return total

    def natural_le(self, a: Weight, b: Weight) -> bool:
        """The natural preorder a <= b iff a + c = b for some c."""
        if self.carrier is Carrier.Boolean:
            return (not a) or bool(b)
        if self.carrier is Carrier.Integers:
            return True
        if b is INF:
            return True
        if a is INF:
            return False
        return a <= b  # type: ignore

    def coerce(self, w: Any) -> Weight:
        """Return `w` as a canonical element of the carrier or raise ValueError."""
        if isinstance(w, str):
            return self.parse(w)
        if isinstance(w, float):
            raise ValueError(f"Floating point weight {w} is not exact; use a fraction string.")
        if self.carrier is Carrier.Boolean:
            if isinstance(w, bool):
                return w
            if w is INF:
                return True
            if isinstance(w, (int, Fraction)):
                if w < 0:
                    raise ValueError(f"Weight {w} cannot be read as a boolean.")
                return w != 0
            raise ValueError(f"Weight {w!r} is not a boolean.")
        if isinstance(w, bool):
            raise ValueError(f"Boolean weight {w} used over monoid {self.id}.")
        if w is INF:
            if self.has_infinity:
                return INF
            raise ValueError(f"Monoid {self.id} has no infinite element.")
        if not isinstance(w, (int, Fraction)):
            raise ValueError(f"Weight {w!r} is not a number.")
        if self.carrier in (Carrier.Naturals, Carrier.Integers):
            if isinstance(w, Fraction):
                if w.denominator != 1:
                    raise ValueError(f"Weight {w} is not an integer (monoid {self.id}).")
                w = w.numerator
            if self.carrier is Carrier.Naturals and w < 0:
                raise ValueError(f"Weight {w} is negative (monoid {self.id}).")
            return int(w)
        if w < 0:
            raise ValueError(f"Weight {w} is negative (monoid {self.id}).")
        return Fraction(w)

    def parse(self, s: str) -> Weight:
        text = s.strip()
        if text in ("tt", "ff"):
            if self.carrier is not Carrier.Boolean:
                raise ValueError(f"Boolean weight '{text}' used over monoid {self.id}.")
            return text == "tt"
        if text == "inf":
            return self.coerce(INF)
        try:
            value = Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"Cannot parse weight '{s}'.") from e
        return self.coerce(value)

    def format(self, w: Weight) -> str:
        if isinstance(w, bool):
            return "tt" if w else "ff"
        return format_weight(w)

    def sample(self, rng: Generator) -> Weight:
        """Draw a small random weight (used by property suites)."""
        if self.carrier is Carrier.Boolean:
            return bool(rng.integers(0, 2))
        if self.carrier is Carrier.Naturals:
            return int(rng.integers(0, 5))
        if self.carrier is Carrier.Integers:
            return int(rng.integers(-4, 5))
        if self.has_infinity and rng.random() < 0.1:
            return INF
        return Fraction(int(rng.integers(0, 9)), int(rng.integers(1, 5)))


def format_weight(w: Any) -> str:
    """Serialize a weight: "p/q" (reduced), "n", "inf", "tt"/"ff"."""
    if isinstance(w, bool):
        return "tt" if w else "ff"
    if w is INF:
        return "inf"
    if isinstance(w, Fraction):
        if w.denominator == 1:
            return str(w.numerator)
        return f"{w.numerator}/{w.denominator}"
    return str(w)


BOOL_OR = WeightMonoid("bool_or", Carrier.Boolean, zerosumfree=True)
NAT_PLUS = WeightMonoid("nat_plus", Carrier.Naturals, zerosumfree=True)
INT_PLUS = WeightMonoid("int_plus", Carrier.Integers, zerosumfree=False)
RAT_PLUS = WeightMonoid("rat_plus", Carrier.Rational, zerosumfree=True)
RAT_INF_PLUS = WeightMonoid("rat_inf_plus", Carrier.RationalInf, zerosumfree=True, has_infinity=True)

MONOIDS: Dict[str, WeightMonoid] = {
    m.id: m for m in (BOOL_OR, NAT_PLUS, INT_PLUS, RAT_PLUS, RAT_INF_PLUS)
}
_ALIASES = {
    "bool": "bool_or",
    "nat": "nat_plus",
    "int": "int_plus",
    "rat": "rat_plus",
    "rat_inf": "rat_inf_plus",
}


def get_monoid(name: Union[str, WeightMonoid]) -> WeightMonoid:
    if isinstance(name, WeightMonoid):
        return name
    key = _ALIASES.get(name, name)
    try:
        return MONOIDS[key]
    except KeyError as e:
        raise SpecError(f"Unknown monoid '{name}'. Must be one of {sorted(MONOIDS)}") from e


class WeightFn(Mapping[Element, Weight]):
    """Finitely supported weight function in canonical form.

    Parameters
    ----------
    entries: Mapping or Iterable of (element, weight) pairs
        Repeated elements are summed; zero weights are dropped.

    monoid: WeightMonoid
        The monoid the weights are drawn from.

    Notes
    -----
    Iteration is in canonical element order. `rho(x)` returns the weight of `x`,
    which is the monoid zero outside the support, whereas `rho[x]` follows the
    Mapping protocol and raises KeyError.
    """

    __slots__ = ("_entries", "_monoid", "_hash", "_order")

    def __init__(
        self,
        entries: Union[Mapping[Element, Any], Iterable[Tuple[Element, Any]], None] = None,
        monoid: WeightMonoid = RAT_INF_PLUS,
    ) -> None:
        acc: Dict[Element, Weight] = {}
        items: Iterable[Tuple[Element, Any]]
        if entries is None:
            items = ()
        elif isinstance(entries, Mapping):
            items = entries.items()
        else:
            items = entries
        for key, w in items:
            w = monoid.coerce(w)
            acc[key] = monoid.add(acc[key], w) if key in acc else w
        self._entries: Dict[Element, Weight] = {
            k: w for k, w in acc.items() if not monoid.is_zero(w)
        }
        self._monoid = monoid
        self._hash: Optional[int] = None
        self._order: Optional[Tuple[Element, ...]] = None

    @classmethod
    def _trusted(cls, entries: Dict[Element, Weight], monoid: WeightMonoid) -> "WeightFn":
        fn = cls.__new__(cls)
        fn._entries = {k: w for k, w in entries.items() if not monoid.is_zero(w)}
        fn._monoid = monoid
        fn._hash = None
        fn._order = None
        return fn

    @classmethod
    def zero(cls, monoid: WeightMonoid = RAT_INF_PLUS) -> "WeightFn":
        return cls._trusted({}, monoid)

    @classmethod
    def dirac(cls, x: Element, w: Any, monoid: WeightMonoid = RAT_INF_PLUS) -> "WeightFn":
        return cls({x: w}, monoid)

    @property
    def monoid(self) -> WeightMonoid:
        return self._monoid

    @property
    def is_zero(self) -> bool:
        return not self._entries

    def __call__(self, x: Element) -> Weight:
        return self._entries.get(x, self._monoid.zero)

    def __getitem__(self, x: Element) -> Weight:
        return self._entries[x]

    def __contains__(self, x: object) -> bool:
        return x in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Element]:
        if self._order is None:
            self._order = tuple(sorted(self._entries, key=canonical_key))
        return iter(self._order)

    def support(self) -> FrozenSet[Element]:
        return frozenset(self._entries)

    def total(self) -> Weight:
        return self._monoid.sum(self._entries.values())

    def sorted_items(self) -> List[Tuple[Element, Weight]]:
        return [(k, self._entries[k]) for k in self]

    def sort_key(self) -> Tuple[Any, ...]:
        return tuple((canonical_key(k), weight_key(w)) for k, w in self.sorted_items())

    def scale(self, c: Weight) -> "WeightFn":
        m = self._monoid
        return WeightFn._trusted({k: m.mul(c, w) for k, w in self._entries.items()}, m)

    def __add__(self, other: "WeightFn") -> "WeightFn":
        m = self._monoid
        acc = dict(self._entries)
        for k, w in other._entries.items():
            acc[k] = m.add(acc[k], w) if k in acc else w
        return WeightFn._trusted(acc, m)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightFn):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._entries.items()))
        return self._hash

    def __lt__(self, other: "WeightFn") -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {self._monoid.format(w)}" for k, w in self.sorted_items())
        return "{" + body + "}"


def total_weight(rho: WeightFn) -> Weight:
    """The monoid sum over supp(rho); the unit for the zero function."""
    return rho.total()


def class_weight(rho: WeightFn, C: Iterable[Element]) -> Weight:
    """rho(C): the monoid sum of rho over the members of C."""
    members: AbstractSet[Element] = C if isinstance(C, AbstractSet) else frozenset(C)
    m = rho.monoid
    return m.sum(w for k, w in rho.sorted_items() if k in members)


def substitute(rho: WeightFn, sigma: ElementMap) -> WeightFn:
    """The action of an element map on a weight function.

    result(y) is the sum of rho(x) over the preimage of y; merged keys are summed
    and zero results dropped.
    """
    lookup: Callable[[Any], Any]
    if isinstance(sigma, Mapping):
        lookup = sigma.__getitem__
    else:
        lookup = sigma
    m = rho.monoid
    acc: Dict[Element, Weight] = {}
    for x, w in rho.sorted_items():
        try:
            y = lookup(x)
        except KeyError as e:
            raise SubstitutionError(f"Substitution is not defined on {x}") from e
        acc[y] = m.add(acc[y], w) if y in acc else w
    return WeightFn._trusted(acc, m)


@dataclass(frozen=True)
class RowColumnResult:
    """Outcome of the bounded row-column witness search."""

    found: bool
    matrix: Optional[ndarray]
    candidates: Tuple[Weight, ...]

    def __bool__(self) -> bool:
        return self.found

    @property
    def reason(self) -> str:
        if self.found:
            return "witness found"
        return "no witness found in bound"


def _closure(m: WeightMonoid, seeds: Iterable[Weight], rounds: int) -> Tuple[Weight, ...]:
    pool = {m.zero, *seeds}
    for _ in range(rounds):
        pool |= {m.add(a, b) for a in pool for b in pool}
    return tuple(sorted(pool, key=weight_key))


def check_row_column(
    m: WeightMonoid,
    w: Sequence[Any],
    v: Sequence[Any],
    rounds: int = DEFAULT_ROW_COLUMN_ROUNDS,
) -> RowColumnResult:
    """Search a matrix with row sums `w` and column sums `v`.

    Parameters
    ----------
    m: WeightMonoid
        The monoid the entries are drawn from.

    w: Sequence[Weight]
        Required row sums.

    v: Sequence[Weight]
        Required column sums. Must have the same monoid sum as `w`.

    rounds: int
        Candidate entries are the closure of {0} and the inputs under pairwise sums,
        iterated `rounds` times.

    Returns
    -------
    result: RowColumnResult
        `result.matrix` is an object-dtype array of shape (len(w), len(v)) when a
        witness exists among the candidates. A negative answer only means none was
        found within the bound.
    """
    if rounds < 0:
        raise ValueError("`rounds` must be non-negative.")
    rows_sum = tuple(m.coerce(x) for x in w)
    cols_sum = tuple(m.coerce(x) for x in v)
    if m.sum(rows_sum) != m.sum(cols_sum):
        raise SumMismatchError(
            f"Row sums total {m.format(m.sum(rows_sum))} but column sums total "
            f"{m.format(m.sum(cols_sum))}."
        )
    candidates = _closure(m, rows_sum + cols_sum, rounds)
    ordered = m.carrier is not Carrier.Integers
    if ordered:
        candidates = tuple(c for c in candidates if any(m.natural_le(c, x) for x in rows_sum))
    n, k = len(rows_sum), len(cols_sum)

    row_options: List[List[Tuple[Weight, ...]]] = []
    for target in rows_sum:
        options = [row for row in product(candidates, repeat=k) if m.sum(row) == target]
        if not options:
            return RowColumnResult(False, None, candidates)
        row_options.append(options)

    def search(i: int, cols: Tuple[Weight, ...]) -> Optional[List[Tuple[Weight, ...]]]:
        if i == n:
            return [] if all(c == t for c, t in zip(cols, cols_sum)) else None
        for row in row_options[i]:
            partial = tuple(m.add(c, x) for c, x in zip(cols, row))
            if ordered and not all(m.natural_le(c, t) for c, t in zip(partial, cols_sum)):
                continue
            rest = search(i + 1, partial)
            if rest is not None:
                return [row] + rest
        return None

    rows = search(0, tuple(m.zero for _ in range(k)))
    if rows is None:
        return RowColumnResult(False, None, candidates)
    matrix = np.empty((n, k), dtype=object)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            matrix[i, j] = x
    return RowColumnResult(True, matrix, candidates)


def check_monoid_laws(
    m: WeightMonoid, rng: Optional[Generator] = None, samples: int = LAW_SAMPLES
) -> List[str]:
    """Return the monoid laws violated on sampled (or, for booleans, all) triples."""
    if m.carrier is Carrier.Boolean:
        triples: Iterable[Tuple[Weight, Weight, Weight]] = product((False, True), repeat=3)
    else:
        gen = np.random.default_rng() if rng is None else rng
        triples = [(m.sample(gen), m.sample(gen), m.sample(gen)) for _ in range(samples)]
    problems: List[str] = []
    for a, b, c in triples:
        if m.add(a, b) != m.add(b, a):
            problems.append(f"commutativity fails at ({a}, {b})")
        if m.add(m.add(a, b), c) != m.add(a, m.add(b, c)):
            problems.append(f"associativity fails at ({a}, {b}, {c})")
        if m.add(a, m.zero) != a or m.add(m.zero, a) != a:
            problems.append(f"unit law fails at {a}")
        if m.zerosumfree and m.is_zero(m.add(a, b)) and not (m.is_zero(a) and m.is_zero(b)):
            problems.append(f"zerosumfree fails at ({a}, {b})")
        if m.has_infinity and m.add(INF, a) is not INF:
            problems.append(f"inf is not absorbing at {a}")
    return problems

from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np
import pytest
from numpy.random import Generator

from wfsosWB._types import SchemaKind
from wfsosWB.interp import BUILTINS, Interpretation, build_from_recursion, builtin, check_naturality, interpret
from wfsosWB.syntax import OpDecl, Signature, Term
from wfsosWB.utils import InterpretationError
from wfsosWB.weights import RAT_INF_PLUS, RAT_PLUS, WeightFn
from wfsosWB.wexpr import Expr

NIL = Term.op("nil")
X = [Term.var(f"x{i}") for i in range(3)]
Y = [Term.var(f"y{i}") for i in range(2)]
N_CASES = 1000

THETA = Signature.of(
    "weight",
    [
        OpDecl("empty"),
        OpDecl("diamond", (SchemaKind.Weight,), 1),
        OpDecl("wsum", (), None),
        OpDecl("wpar", (SchemaKind.LabelSet,), 2),
        OpDecl("wprod", (SchemaKind.LabelSet,), 2),
        OpDecl("scaled", (SchemaKind.Weight,), 1),
        OpDecl("convex", (SchemaKind.Weight,), None, repeat_last=True),
        OpDecl("colour", (SchemaKind.Weight,), 1),
        OpDecl("lift", (SchemaKind.Text, SchemaKind.Term), None),
        OpDecl("lin", (), 2),
        OpDecl("when", (SchemaKind.Text,), 1),
    ],
)

INTERP = Interpretation(
    "test",
    THETA,
    {
        "empty": builtin("zero"),
        "diamond": builtin("reshape"),
        "wsum": builtin("pointwise_sum"),
        "wpar": builtin("coop_min_law", "coop"),
        "wprod": builtin("coop_product_law", "coop"),
        "scaled": builtin("dirac_process"),
        "convex": builtin("convex_combination"),
        "colour": builtin("colour"),
        "lift": builtin("multiadditive_apply"),
        "lin": builtin("pointwise", "v1 + 2 * v2"),
        "when": builtin("guard"),
    },
    base_weight=Fraction(1),
    monoid=RAT_PLUS,
)


def _pick(rng: Generator, items: List[Term]) -> Term:
    return items[int(rng.integers(0, len(items)))]


def _weight(rng: Generator) -> Fraction:
    return Fraction(int(rng.integers(0, 4)), int(rng.integers(1, 3)))


def _key(rng: Generator) -> Term:
    k = int(rng.integers(0, 4))
    if k == 0:
        return NIL
    x = _pick(rng, X)
    if k == 1:
        return x
    if k == 2:
        return Term.op("prefix", x, params=("a", Fraction(1)))
    return Term.op("plus", x, _pick(rng, X))


def _fn(rng: Generator) -> WeightFn:
    n = int(rng.integers(0, 4))
    return WeightFn([(_key(rng), _weight(rng)) for _ in range(n)], RAT_PLUS)


def _renaming(rng: Generator) -> Dict[Term, Term]:
    perm = rng.permutation(len(X))
    images = [Term.var(f"y{int(i)}") for i in perm]
    return dict(zip(X, images))


def _substitution(rng: Generator) -> Dict[Term, Term]:
    images = [NIL, *Y, Term.op("prefix", Y[0], params=("b", Fraction(2)))]
    return {x: _pick(rng, images) for x in X}


def _arg(rng: Generator) -> Term:
    return _pick(rng, [Term.wvar("f"), Term.wvar("g"), *X, NIL])


def _colours(rng: Generator, n: int) -> List[Term]:
    return [Term.op("colour", _arg(rng), params=(Fraction(k),)) for k in range(1, n + 1)]


PsiBuilder = Callable[[Generator], Term]

BUILDERS: Dict[str, PsiBuilder] = {
    "zero": lambda rng: Term.op("empty"),
    "pointwise_sum": lambda rng: Term.op("wsum", *[_arg(rng) for _ in range(int(rng.integers(1, 4)))]),
    "coop_min_law": lambda rng: Term.op("wpar", _arg(rng), _arg(rng), params=(frozenset({"a"}),)),
    "coop_product_law": lambda rng: Term.op("wprod", _arg(rng), _arg(rng), params=(frozenset(),)),
    "dirac_process": lambda rng: Term.op("scaled", _arg(rng), params=(_weight(rng),)),
    "convex_combination": lambda rng: Term.op(
        "convex", _arg(rng), _arg(rng), params=(Fraction(1, 3), Fraction(2, 3))
    ),
    "colour": lambda rng: Term.op("colour", _arg(rng), params=(Fraction(1),)),
    "multiadditive_apply": lambda rng: (
        Term.op(
            "lift",
            *_colours(rng, 2),
            params=(Expr.parse("u1 * u2"), Term.op("plus", Term.hole(1), Term.hole(2))),
        )
        if rng.random() < 0.5
        else Term.op(
            "lift", *_colours(rng, 1), params=(Expr.parse("3 * u1"), Term.op("plus", Term.hole(1), X[0]))
        )
    ),
    "pointwise": lambda rng: Term.op("lin", _arg(rng), _arg(rng)),
    "guard": lambda rng: Term.op(
        "when", _arg(rng), params=(Expr.parse("1 < 2") if rng.random() < 0.5 else Expr.parse("2 < 1"),)
    ),
}


@pytest.mark.math
@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_naturality(name: str) -> None:
    rng = np.random.default_rng([8, BUILTINS.index(name)])
    for _ in range(N_CASES):
        psi = BUILDERS[name](rng)
        env = {"f": _fn(rng), "g": _fn(rng)}
        sigma = _substitution(rng) if rng.random() < 0.7 else _renaming(rng)
        assert check_naturality(INTERP, psi, env, sigma), (psi, env, sigma)


@pytest.mark.math
def test_reshape_naturality() -> None:
    rng = np.random.default_rng(8)
    for _ in range(N_CASES):
        if rng.random() < 0.5:
            # Dirac arguments: any substitution
            psi = Term.op("diamond", _pick(rng, [*X, NIL]), params=(_weight(rng),))
            sigma = _substitution(rng)
        else:
            psi = Term.op("diamond", _arg(rng), params=(_weight(rng),))
            sigma = _renaming(rng)
        env = {"f": _fn(rng), "g": _fn(rng)}
        assert check_naturality(INTERP, psi, env, sigma), (psi, env, sigma)


@pytest.mark.fast
def test_reshape_depends_on_support_size() -> None:
    f = WeightFn({X[0]: 1, X[1]: 1, X[2]: 1}, RAT_PLUS)
    psi = Term.op("diamond", Term.wvar("f"), params=(Fraction(3),))
    assert dict(interpret(INTERP, psi, {"f": f})) == {x: 1 for x in X}
    merge = {X[0]: Y[0], X[1]: Y[0], X[2]: Y[1]}
    assert not check_naturality(INTERP, psi, {"f": f}, merge)


@pytest.mark.fast
def test_catalogue_values() -> None:
    f = WeightFn({X[0]: 2, X[1]: 1}, RAT_PLUS)
    g = WeightFn({X[2]: 1}, RAT_PLUS)
    env = {"f": f, "g": g}
    L = (frozenset({"a"}),)
    # min law: (2/3 * 1/1) * min(3, 1)
    par = interpret(INTERP, Term.op("wpar", Term.wvar("f"), Term.wvar("g"), params=L), env)
    assert par(Term.op("coop", X[0], X[2], params=L)) == Fraction(2, 3)
    assert par(Term.op("coop", X[1], X[2], params=L)) == Fraction(1, 3)
    prod = interpret(INTERP, Term.op("wprod", Term.wvar("f"), Term.wvar("g"), params=L), env)
    assert prod.total() == 3
    lin = interpret(INTERP, Term.op("lin", Term.wvar("f"), Term.wvar("f")), env)
    assert dict(lin) == {X[0]: 6, X[1]: 3}
    scaled = interpret(INTERP, Term.op("scaled", Term.wvar("f"), params=(Fraction(6),)), env)
    assert dict(scaled) == {X[0]: 4, X[1]: 2}
    convex = Term.op("convex", Term.wvar("f"), X[2], params=(Fraction(1, 2), Fraction(1, 2)))
    assert dict(interpret(INTERP, convex, env)) == {X[0]: 1, X[1]: Fraction(1, 2), X[2]: Fraction(1, 2)}
    assert interpret(INTERP, Term.op("empty"), env).is_zero
    assert dict(interpret(INTERP, X[0], env, subst={X[0]: NIL})) == {NIL: 1}


@pytest.mark.fast
def test_errors() -> None:
    with pytest.raises(InterpretationError):
        builtin("bogus")
    with pytest.raises(InterpretationError):
        interpret(INTERP, Term.wvar("h"), {})
    with pytest.raises(InterpretationError):
        build_from_recursion(THETA, {"empty": builtin("zero")})
    partial = Signature.of("weight", [OpDecl("empty")])
    interp = build_from_recursion(partial, {"empty": builtin("zero")}, base_weight="inf", monoid=RAT_INF_PLUS)
    assert interp.base(NIL) == WeightFn.dirac(NIL, "inf", RAT_INF_PLUS)
    with pytest.raises(InterpretationError):
        build_from_recursion(partial, {"empty": builtin("zero")}, base_weight="inf", monoid=RAT_PLUS)
    assert str(builtin("pointwise", "v1 + v2")) == 'pointwise "v1 + v2"'
    assert str(builtin("coop_min_law", "coop")) == "coop_min_law(coop)"

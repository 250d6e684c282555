from fractions import Fraction

import pytest

from wfsosWB.utils import InterpretationError, SpecError
from wfsosWB.weights import INF, RAT_PLUS, WeightFn
from wfsosWB.wexpr import Expr, expr_env


@pytest.mark.fast
def test_arithmetic_is_exact() -> None:
    assert Expr.parse("1/3 + 1/6").evaluate() == Fraction(1, 2)
    assert Expr.parse("u * v").evaluate({"u": Fraction(2, 3), "v": 3}) == 2
    assert Expr.parse("2 - 1/2").evaluate() == Fraction(3, 2)
    assert Expr.parse("min(3, 1/2, inf)").evaluate() == Fraction(1, 2)
    assert Expr.parse("max(3, inf)").evaluate() is INF


@pytest.mark.fast
def test_weight_conventions() -> None:
    assert Expr.parse("5 / 0").evaluate() == 0
    assert Expr.parse("5 / inf").evaluate() == 0
    assert Expr.parse("inf / inf").evaluate() == 1
    assert Expr.parse("0 * inf").evaluate() == 0
    assert Expr.parse("u / w").evaluate({"u": INF, "w": INF}) == 1


@pytest.mark.fast
def test_conditions() -> None:
    env = expr_env({"a": "a", "L": frozenset({"b"})})
    assert Expr.parse("$a != tau").holds(env)
    assert Expr.parse("$a notin $L").holds(env)
    assert not Expr.parse("$a in $L").holds(env)
    assert Expr.parse("$a = a && !($a in $L)").holds(env)
    assert Expr.parse("1/2 < 1 || ff").holds()
    with pytest.raises(InterpretationError):
        Expr.parse("1 + 1").holds()
    with pytest.raises(InterpretationError):
        Expr.parse("$missing = a").holds()


@pytest.mark.fast
def test_functions_of_weight_functions() -> None:
    rho = WeightFn({"x": 1, "y": Fraction(1, 2)}, RAT_PLUS)
    assert Expr.parse("total(f)").evaluate(functions={"f": rho}) == Fraction(3, 2)
    assert Expr.parse("support_size(f)").evaluate(functions={"f": rho}) == 2
    with pytest.raises(InterpretationError):
        Expr.parse("total(g)").evaluate(functions={"f": rho})


@pytest.mark.fast
def test_bind_and_rename() -> None:
    e = Expr.parse("u * $r")
    assert e.metavars() == frozenset({"r"})
    assert e.names() == frozenset({"u"})
    bound = e.bind({"r": Fraction(2)})
    assert bound.metavars() == frozenset()
    assert bound.evaluate({"u": 3}) == 6
    renamed = Expr.parse("u * v").rename({"u": "u1", "v": "u2"})
    assert renamed.names() == frozenset({"u1", "u2"})
    assert renamed.evaluate({"u1": 2, "u2": 5}) == 10


@pytest.mark.fast
def test_printing_reparses() -> None:
    for text in ["u * v * min($w1, $w2) / ($w1 * $w2)", "(u + v) * 2", "a - (b - c)", "$a notin $L"]:
        e = Expr.parse(text)
        assert Expr.parse(str(e)) == e, text


@pytest.mark.fast
def test_syntax_errors() -> None:
    with pytest.raises(SpecError):
        Expr.parse("1 +")
    with pytest.raises(SpecError):
        Expr.parse("sqrt(2)")

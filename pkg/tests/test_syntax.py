from fractions import Fraction

import pytest

from wfsosWB._types import SchemaKind
from wfsosWB.dsl import parse_term
from wfsosWB.syntax import (
    MetaVar,
    OpDecl,
    Signature,
    Term,
    apply_subst,
    fill_holes,
    instantiate,
    template_holes,
    term_metavars,
    term_vars,
)
from wfsosWB.utils import SpecError, SubstitutionError

NIL = Term.op("nil")


def prefix(a: str, r: int, t: Term) -> Term:
    return Term.op("prefix", t, params=(a, Fraction(r)))


SIGMA = Signature.of(
    "process",
    [
        OpDecl("nil"),
        OpDecl("prefix", (SchemaKind.Label, SchemaKind.Weight), 1),
        OpDecl("plus", (), 2),
        OpDecl("coop", (SchemaKind.LabelSet,), 2),
    ],
)


@pytest.mark.fast
def test_structural_equality() -> None:
    p = prefix("a", 1, NIL)
    q = Term.op("prefix", Term.op("nil"), params=("a", 1))
    assert p == q
    assert hash(p) == hash(q)
    assert p != prefix("a", 2, NIL)
    assert p != prefix("b", 1, NIL)
    assert len({p, q, prefix("a", 2, NIL)}) == 2
    assert str(p) == "prefix{a,1}(nil)"
    assert p.depth == 1 and NIL.depth == 0


@pytest.mark.fast
def test_substitution() -> None:
    x, y = Term.var("x"), Term.var("y")
    t = Term.op("plus", x, y)
    s = apply_subst(t, {"x": NIL, y: prefix("a", 1, NIL)})
    assert s == Term.op("plus", NIL, prefix("a", 1, NIL))
    assert apply_subst(t, {"x": NIL}) == Term.op("plus", NIL, y)
    with pytest.raises(SubstitutionError):
        apply_subst(t, {"x": NIL}, strict=True)
    with pytest.raises(SubstitutionError):
        apply_subst(t, {NIL: x})
    assert term_vars(t) == frozenset({x, y})
    assert term_vars(s) == frozenset()


@pytest.mark.fast
def test_substitution_reaches_template_params() -> None:
    f = Term.wvar("f")
    t = Term.op("lift", f, params=("u1", Term.op("plus", Term.hole(1), Term.var("y"))))
    s = apply_subst(t, {"y": NIL})
    assert s.params[1] == Term.op("plus", Term.hole(1), NIL)
    assert Term.wvar("f") in term_vars(t)
    assert Term.var("y") in term_vars(t)


@pytest.mark.fast
def test_metavariables() -> None:
    t = Term.op("prefix", Term.var("x"), params=(MetaVar("a"), MetaVar("r")))
    assert term_metavars(t) == frozenset({"a", "r"})
    assert not t.is_ground
    g = instantiate(t, {"a": "b", "r": Fraction(2)})
    assert g.params == ("b", Fraction(2))
    with pytest.raises(SubstitutionError):
        instantiate(t, {"a": "b"}, strict=True)


@pytest.mark.fast
def test_holes() -> None:
    template = Term.op("plus", Term.hole(1), Term.hole(2))
    assert template_holes(template) == frozenset({1, 2})
    assert fill_holes(template, [NIL, NIL]) == Term.op("plus", NIL, NIL)
    with pytest.raises(SubstitutionError):
        fill_holes(template, [NIL])


@pytest.mark.fast
def test_signature_checks() -> None:
    assert SIGMA.check_term(prefix("a", 1, NIL)) == []
    assert SIGMA.check_term(Term.op("plus", NIL)) != []
    assert SIGMA.check_term(Term.op("prefix", NIL, params=("a",))) != []
    assert SIGMA.check_term(Term.op("coop", NIL, NIL, params=("a",))) != []
    assert SIGMA.check_term(Term.op("bang", NIL)) == ["unknown operator 'bang'"]
    with pytest.raises(SpecError):
        SIGMA.add(OpDecl("nil"))
    assert str(SIGMA["prefix"]) == "prefix{label,weight}/1"


@pytest.mark.fast
def test_parse_term() -> None:
    t = parse_term("coop{{a,b}}(prefix{a,1/2}(nil), nil)")
    assert t == Term.op(
        "coop", prefix("a", 1, NIL).with_params(("a", Fraction(1, 2))), NIL, params=(frozenset({"a", "b"}),)
    )
    assert parse_term(str(t)) == t
    with_var = parse_term("plus(x, nil)", ops={"plus", "nil"})
    assert with_var == Term.op("plus", Term.var("x"), NIL)
    with pytest.raises(SpecError):
        parse_term("plus(nil,")


@pytest.mark.fast
def test_canonical_order_is_total() -> None:
    terms = [prefix("b", 1, NIL), NIL, prefix("a", 2, NIL), prefix("a", 1, NIL)]
    ordered = sorted(terms)
    assert ordered[0] == NIL
    assert ordered.index(prefix("a", 1, NIL)) < ordered.index(prefix("a", 2, NIL))
    assert sorted(reversed(terms)) == ordered

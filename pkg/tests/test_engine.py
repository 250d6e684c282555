from fractions import Fraction
from pathlib import Path

import pytest

from wfsosWB._types import OnExhaustion
from wfsosWB.dsl import parse_spec
from wfsosWB.engine import DerivationBudget, Deriver, successors
from wfsosWB.frontends.pepa import parse_pepa, parse_pepa_process, pepa_wfsos
from wfsosWB.syntax import Term
from wfsosWB.ultras import is_functional
from wfsosWB.utils import BudgetExhaustedError, SpecError
from wfsosWB.weights import RAT_INF_PLUS, WeightFn

DEMOS = Path(__file__).resolve().parent.parent / "demos"
SPEC = parse_spec((DEMOS / "pepa_demo.wfs").read_text(encoding="utf-8"), "pepa")
NIL = Term.op("nil")
ZERO = WeightFn.zero(RAT_INF_PLUS)


def prefix(a: str, r: int, t: Term = NIL) -> Term:
    return Term.op("prefix", t, params=(a, Fraction(r)))


def coop(labels: str, p: Term, q: Term) -> Term:
    return Term.op("coop", p, q, params=(frozenset(labels),))


def fn(*pairs: object) -> frozenset:
    return frozenset({WeightFn(list(pairs), RAT_INF_PLUS)})


@pytest.mark.fast
def test_prefix_and_disabled_actions() -> None:
    root = prefix("a", 2, prefix("b", 1))
    u = Deriver(SPEC).explore([root])
    assert len(u) == 3
    assert u.trans(root, "a") == fn((prefix("b", 1), 2))
    assert u.trans(root, "b") == frozenset({ZERO})
    assert u.trans(NIL, "tau") == frozenset({ZERO})
    assert is_functional(u)
    assert not u.truncated


@pytest.mark.fast
def test_choice_adds_rates() -> None:
    p = Term.op("plus", prefix("a", 1), prefix("a", 2))
    assert successors(SPEC, p)["a"] == fn((NIL, 3))
    q = Term.op("plus", prefix("a", 1), prefix("b", 2))
    assert successors(SPEC, q)["b"] == fn((NIL, 2))


@pytest.mark.fast
def test_cooperation_uses_the_minimal_law() -> None:
    p = coop("a", Term.op("plus", prefix("a", 1), prefix("a", 3, prefix("b", 1))), prefix("a", 2))
    # apparent rates 4 and 2: each pair gets r1/4 * r2/2 * min(4, 2)
    expected = fn(
        (coop("a", NIL, NIL), Fraction(1, 2)),
        (coop("a", prefix("b", 1), NIL), Fraction(3, 2)),
    )
    assert successors(SPEC, p)["a"] == expected
    assert successors(SPEC, coop("a", prefix("a", 1), prefix("b", 1)))["a"] == frozenset({ZERO})


@pytest.mark.fast
def test_interleaving_keeps_the_partner() -> None:
    left, right = prefix("a", 1), prefix("a", 2)
    p = coop("", left, right)
    assert successors(SPEC, p)["a"] == fn((coop("", NIL, right), 1), (coop("", left, NIL), 2))


@pytest.mark.fast
def test_hiding() -> None:
    p = Term.op("hide", Term.op("plus", prefix("a", 1), prefix("tau", 2)), params=(frozenset({"a"}),))
    succ = successors(SPEC, p)
    assert succ["tau"] == fn((NIL, 3))
    assert succ["a"] == frozenset({ZERO})
    assert succ["b"] == frozenset({ZERO})


@pytest.mark.fast
def test_constants_unfold() -> None:
    model = parse_pepa("P = (a, 1).(b, 2).P;")
    spec = pepa_wfsos(model)
    P = Term.op("P")
    u = Deriver(spec).explore(model.roots())
    assert len(u) == 2
    assert u.trans(P, "a") == fn((prefix("b", 2, P), 1))
    assert u.trans(prefix("b", 2, P), "b") == fn((P, 2))


@pytest.mark.fast
def test_unguarded_constants_exhaust_depth() -> None:
    model = parse_pepa("P = Q; Q = P;")
    spec = pepa_wfsos(model)
    with pytest.raises(BudgetExhaustedError):
        Deriver(spec, DerivationBudget(max_depth=8)).explore(model.roots())
    deriver = Deriver(spec, DerivationBudget(max_depth=8, on_exhaustion="truncate"))
    with pytest.warns(UserWarning):
        u = deriver.explore(model.roots())
    assert u.truncated
    assert u.trans(Term.op("P"), "tau") == frozenset()


@pytest.mark.fast
def test_state_budget() -> None:
    model = parse_pepa("P = (a, 1).(P || P);")
    spec = pepa_wfsos(model)
    with pytest.raises(BudgetExhaustedError):
        Deriver(spec, DerivationBudget(max_states=5)).explore(model.roots())
    with pytest.warns(UserWarning):
        u = Deriver(spec, DerivationBudget(max_states=5, on_exhaustion=OnExhaustion.Truncate)).explore(
            model.roots()
        )
    assert u.truncated
    assert len(u) > 5


@pytest.mark.fast
def test_budget_validation() -> None:
    assert DerivationBudget().max_states == 10000
    assert DerivationBudget(on_exhaustion="truncate").truncates
    with pytest.raises(ValueError):
        DerivationBudget(max_states=0)
    with pytest.raises(ValueError):
        DerivationBudget(max_depth=True)
    with pytest.raises(ValueError):
        DerivationBudget(on_exhaustion="ignore")  # type: ignore[arg-type]


@pytest.mark.fast
def test_bad_roots() -> None:
    deriver = Deriver(SPEC)
    with pytest.raises(SpecError):
        deriver.explore([Term.var("x")])
    with pytest.raises(SpecError):
        deriver.successors(Term.op("bang", NIL))


@pytest.mark.fast
def test_memoized() -> None:
    deriver = Deriver(SPEC)
    p = parse_pepa_process("(a, 1).nil <a> (a, 2).nil")
    assert deriver.successors(p) is deriver.successors(p)
    assert deriver.enabled(p) == frozenset({"a", "b", "tau"})


@pytest.mark.fast
def test_shop_demo_is_functional() -> None:
    model = parse_pepa((DEMOS / "shop.pepa").read_text(encoding="utf-8"))
    u = Deriver(pepa_wfsos(model)).explore(model.roots())
    assert is_functional(u)
    assert len(u) == 4

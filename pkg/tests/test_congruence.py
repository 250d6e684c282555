from fractions import Fraction
from pathlib import Path
from typing import List

import pandas as pd
import pytest
from numpy.random import Generator

from wfsosWB._types import FormatBullet
from wfsosWB.congruence import COLUMNS, bisimilar_terms, congruence_suite
from wfsosWB.construct import term_sampler
from wfsosWB.dsl import load_spec, parse_spec
from wfsosWB.engine import DerivationBudget
from wfsosWB.frontends.pepa import PepaModel, parse_pepa, pepa_sampler, pepa_variants, pepa_wfsos
from wfsosWB.syntax import Term
from wfsosWB.utils import BudgetExhaustedError
from wfsosWB.wfsos import validate_spec

DEMOS = Path(__file__).resolve().parent.parent / "demos"
NIL = Term.op("nil")
TRIALS = 200


def prefix(a: str, r: int, t: Term = NIL) -> Term:
    return Term.op("prefix", t, params=(a, Fraction(r)))


def plus(p: Term, q: Term) -> Term:
    return Term.op("plus", p, q)


@pytest.mark.congruence
def test_pepa_is_a_congruence() -> None:
    spec = pepa_wfsos(PepaModel(labels=("a", "b", "tau")))
    report = congruence_suite(spec, pepa_sampler(("a", "b")), TRIALS, seed=0, variants=pepa_variants)
    assert report.ok, [str(c) for c in report.counterexamples]
    assert len(report.table) == TRIALS
    assert list(report.table.columns) == COLUMNS
    assert report.skipped == 0
    assert report.nontrivial > TRIALS // 2


@pytest.mark.congruence
def test_translated_segala_is_a_congruence() -> None:
    spec = load_spec((DEMOS / "segala_demo.wfs").read_text(encoding="utf-8"), name="segala")
    sampler = term_sampler(spec.sigma, ("a", "b"), depth=2, leaves=("Coin",))
    report = congruence_suite(spec, sampler, TRIALS, seed=1, variants=lambda t: [plus(t, t)])
    assert report.ok, [str(c) for c in report.counterexamples]
    assert report.nontrivial > 0


@pytest.mark.congruence
def test_translated_wgsos_is_a_congruence() -> None:
    spec = load_spec((DEMOS / "wgsos_demo.wfs").read_text(encoding="utf-8"), name="wgsos")
    sampler = term_sampler(spec.sigma, ("a", "b"), depth=2, leaves=("Loop",))
    report = congruence_suite(
        spec, sampler, TRIALS, seed=2, variants=lambda t: [plus(t, NIL), plus(NIL, t)]
    )
    assert report.ok, [str(c) for c in report.counterexamples]
    assert report.nontrivial > 0


@pytest.mark.fast
def test_results_do_not_depend_on_jobs() -> None:
    spec = pepa_wfsos(PepaModel(labels=("a", "b", "tau")))
    sampler = pepa_sampler(("a", "b"), depth=2)
    one = congruence_suite(spec, sampler, 20, seed=7, variants=pepa_variants)
    many = congruence_suite(spec, sampler, 20, seed=7, variants=pepa_variants, jobs=3)
    pd.testing.assert_frame_equal(one.table, many.table)
    assert list(one.table["trial"]) == list(range(20))


NON_NATURAL = """
format wfsos;
monoid rat_inf_plus;
labels a, b;
signature process { nil/0; prefix{label,weight}/1; plus/2; sq/1 }
signature weight { empty/0; diamond{weight}/1; wsum/2 }
interp i = { empty: zero; diamond: reshape; wsum: pointwise_sum; base: dirac(inf) };
rule nil: => nil --$b--> empty;
rule act [open x]: => prefix{$a,$r}(x) --$a--> diamond{$r}(x);
rule off [open x]: => prefix{$a,$r}(x) --$b--> empty where $b != $a;
rule choice [open x, y]: x --$a--> %f, y --$a--> %g => plus(x, y) --$a--> wsum(%f, %g);
rule sq [open x]: x --$a--> %f => sq(x) --$a--> diamond{1}(%f);
"""


@pytest.mark.fast
def test_reshaping_derived_functions_breaks_congruence() -> None:
    # spreading weight evenly over a support is not preserved by merging bisimilar targets
    spec = parse_spec(NON_NATURAL)
    assert [(v.rule, v.bullet) for v in validate_spec(spec)] == [("sq", FormatBullet.Naturality)]
    tail = prefix("a", 1, prefix("b", 1))
    p = plus(plus(prefix("a", 1), prefix("a", 1, plus(NIL, NIL))), tail)
    q = plus(prefix("a", 2), tail)
    assert bisimilar_terms(spec, p, q)
    assert not bisimilar_terms(spec, Term.op("sq", p), Term.op("sq", q))

    def sampler(rng: Generator) -> Term:
        return p

    def variants(t: Term) -> List[Term]:
        return [q]

    report = congruence_suite(spec, sampler, 30, seed=0, variants=variants, pool=1)
    assert not report.ok
    assert {c.context.name for c in report.counterexamples} == {"sq"}
    assert (report.table["status"] == "counterexample").sum() == len(report.counterexamples)


@pytest.mark.fast
def test_budgets() -> None:
    model = parse_pepa("P = (a, 1).(P || P);")
    spec = pepa_wfsos(model)
    P = Term.op("P")
    with pytest.raises(BudgetExhaustedError):
        bisimilar_terms(spec, P, P, DerivationBudget(max_states=10))
    sampler = pepa_sampler(("a",), depth=1, constants=("P",))
    with pytest.raises(BudgetExhaustedError):
        congruence_suite(spec, sampler, 10, budget=DerivationBudget(max_states=10), leaves=("P",))
    with pytest.warns(UserWarning):
        report = congruence_suite(
            spec,
            sampler,
            10,
            budget=DerivationBudget(max_states=10, on_exhaustion="truncate"),
            leaves=("P",),
        )
    assert report.ok
    assert report.skipped > 0


@pytest.mark.fast
def test_argument_checks() -> None:
    spec = pepa_wfsos(PepaModel(labels=("a", "tau")))
    with pytest.raises(ValueError):
        congruence_suite(spec, pepa_sampler(("a",)), trials=0)
    with pytest.raises(ValueError):
        congruence_suite(spec, pepa_sampler(("a",)), trials=5, jobs=0)
    nullary = parse_spec(
        "format wfsos; labels a; signature process { nil/0 } signature weight { empty/0 } "
        "interp i = { empty: zero }; rule nil: => nil --a--> empty;"
    )
    with pytest.raises(ValueError):
        congruence_suite(nullary, lambda rng: NIL, trials=5)

from fractions import Fraction
from itertools import combinations, product
from pathlib import Path
from typing import FrozenSet, List, Set

import pytest

from wfsosWB._types import FormatBullet
from wfsosWB.dsl import parse_spec
from wfsosWB.syntax import Term
from wfsosWB.utils import FormatViolationError
from wfsosWB.weights import RAT_INF_PLUS, WeightFn
from wfsosWB.wfsos import (
    RULE_COLUMNS,
    Trigger,
    WfsosRule,
    WfsosSpec,
    describe_rules,
    ensure_valid,
    expand_open,
    ground_labels,
    instantiate_target,
    match_trigger,
    validate_rule,
    validate_spec,
    where_holds,
)

DEMOS = Path(__file__).resolve().parent.parent / "demos"

HEADER = """
format wfsos;
monoid rat_inf_plus;
labels a, b, tau;
signature process { nil/0; prefix{label,weight}/1; plus/2; coop{labelset}/2 }
signature weight { empty/0; diamond{weight}/1; wsum/2; wpar{labelset}/2 }
interp pepa = { empty: zero; diamond: reshape; wsum: pointwise_sum; wpar: coop_min_law(coop); base: dirac(inf) };
"""

NIL = Term.op("nil")


def spec_with(*rules: str, header: str = HEADER) -> WfsosSpec:
    return parse_spec(header + "\n".join(rules))


def rule(text: str) -> WfsosRule:
    return spec_with(text).rules[0]


def bullets(text: str, header: str = HEADER) -> Set[FormatBullet]:
    spec = spec_with(text, header=header)
    return {v.bullet for v in validate_rule(spec.rules[0], spec)}


def subsets(labels: List[str]) -> List[FrozenSet[str]]:
    return [frozenset(c) for k in range(len(labels) + 1) for c in combinations(labels, k)]


@pytest.mark.fast
def test_pepa_demo_is_well_formed() -> None:
    spec = parse_spec((DEMOS / "pepa_demo.wfs").read_text(encoding="utf-8"))
    assert validate_spec(spec) == []
    assert ensure_valid(spec) is spec
    assert spec.labels == ("a", "b", "tau")
    assert [r.name for r in spec.rules_for("coop", 2)] == ["sync", "interleave"]
    assert spec.process_ops() == frozenset({"nil", "prefix", "plus", "coop", "hide"})


@pytest.mark.fast
def test_well_formed_rule_has_no_violations() -> None:
    text = "rule choice [open x, y]: x --$a--> %f, y --$a--> %g => plus(x, y) --$a--> wsum(%f, %g);"
    assert bullets(text) == set()


@pytest.mark.fast
@pytest.mark.parametrize(
    "text, bullet",
    [
        ("rule r: => nil --c--> empty;", FormatBullet.UnknownLabel),
        ("rule r: => nil --a--> diamond{$r}(nil);", FormatBullet.UnboundMetavar),
        ("rule r: => plus(x, x) --a--> empty;", FormatBullet.DistinctVars),
        ("rule r: => prefix{a,1}(x) --a--> diamond{1}(y);", FormatBullet.TargetVars),
        ("rule r: x --a--> %f, x -/a-> => plus(x, y) --a--> %f;", FormatBullet.PremiseOverlap),
        ("rule r: => bang(x) --a--> empty;", FormatBullet.UnknownOperator),
        ("rule r: => plus(x) --a--> empty;", FormatBullet.Arity),
        ("rule r: x --a--> %f, total(%g) = 1 => plus(x, y) --a--> %f;", FormatBullet.UnboundWeightVar),
        ("rule r: x --a--> %f, total(%f) = -1 => plus(x, y) --a--> %f;", FormatBullet.BadWeight),
        ("rule r: x --a--> %f, in(%f, z), total(%f) = 0 => plus(x, y) --a--> z;", FormatBullet.ZeroTotal),
        ("rule r: x --a--> %f, x --b--> %f => plus(x, y) --a--> %f;", FormatBullet.DistinctVars),
        ("rule r: => nil --a--> bogus(nil);", FormatBullet.UnknownOperator),
        ("rule r: x --a--> %f => plus(x, y) --a--> diamond{1}(%f);", FormatBullet.Naturality),
        ("rule r: x --a--> %f => plus(x, y) --a--> diamond{1}(wsum(%f, empty));", FormatBullet.Naturality),
    ],
)
def test_violations(text: str, bullet: FormatBullet) -> None:
    assert bullet in bullets(text)


@pytest.mark.fast
def test_reshape_on_process_terms_is_natural() -> None:
    for target in ("diamond{2}(x)", "diamond{1}(plus(x, y))", "wsum(diamond{1}(x), diamond{3}(nil))"):
        text = f"rule r: x --a--> %f => plus(x, y) --a--> {target};"
        assert FormatBullet.Naturality not in bullets(text), target


@pytest.mark.fast
def test_support_premises_need_zerosumfree_monoid() -> None:
    header = """
    format wfsos;
    monoid int_plus;
    labels a;
    signature process { nil/0; plus/2 }
    signature weight { empty/0 }
    interp z = { empty: zero; base: dirac(1) };
    """
    text = "rule r: x --a--> %f, in(%f, z) => plus(x, y) --a--> z;"
    assert FormatBullet.Zerosumfree in bullets(text, header=header)


@pytest.mark.fast
def test_spec_level_violations() -> None:
    header = HEADER.replace("wpar: coop_min_law(coop); ", "")
    spec = spec_with("const P = prefix{a,1}(Q);", header=header)
    found = {(v.rule, v.bullet) for v in validate_spec(spec)}
    assert ("<spec>", FormatBullet.Interpretation) in found
    assert ("const P", FormatBullet.Constant) in found
    with pytest.raises(FormatViolationError) as info:
        ensure_valid(spec_with("rule r: => nil --c--> empty;"))
    assert len(info.value.violations) == 1
    assert "r: unknown-label:" in str(info.value)
    with pytest.warns(UserWarning):
        validate_spec(spec_with("rule r: => nil --a--> empty;", "rule r: => nil --b--> empty;"))


@pytest.mark.fast
def test_exact_and_open_triggers() -> None:
    exact = rule("rule choice: x --a--> %f, y --a--> %g => plus(x, y) --a--> wsum(%f, %g);")
    lax = rule("rule choice [open x, y]: x --a--> %f, y --a--> %g => plus(x, y) --a--> wsum(%f, %g);")
    A, AB = frozenset({"a"}), frozenset({"a", "b"})
    assert match_trigger(exact, Trigger((A, A)))
    assert not match_trigger(exact, Trigger((AB, A)))
    assert match_trigger(lax, Trigger((AB, A)))
    assert not match_trigger(lax, Trigger((frozenset(), A)))
    with pytest.raises(ValueError):
        match_trigger(exact, Trigger((A,)))


@pytest.mark.fast
def test_negative_premises_on_open_arguments() -> None:
    unless = rule("rule unless [open y]: x --a--> %f, y -/b-> => plus(x, y) --a--> %f;")
    A, B = frozenset({"a"}), frozenset({"b"})
    assert match_trigger(unless, Trigger((A, frozenset())))
    assert match_trigger(unless, Trigger((A, A)))
    assert not match_trigger(unless, Trigger((A, B)))
    assert not match_trigger(unless, Trigger((A | B, A)))


@pytest.mark.fast
def test_label_metavariables_need_bindings() -> None:
    r = rule("rule choice: x --$a--> %f, y --$a--> %g => plus(x, y) --$a--> wsum(%f, %g);")
    B = frozenset({"b"})
    with pytest.raises(ValueError):
        match_trigger(r, Trigger((B, B)))
    assert match_trigger(r, Trigger((B, B)), {"a": "b"})
    assert not match_trigger(r, Trigger((B, B)), {"a": "a"})


@pytest.mark.fast
def test_total_premises_filter_triggers() -> None:
    r = rule("rule t: x --a--> %f, total(%f) = 2 => plus(x, y) --a--> %f;")
    two = WeightFn({NIL: 2}, RAT_INF_PLUS)
    one = WeightFn({NIL: 1}, RAT_INF_PLUS)
    none = {"a": frozenset(), "b": frozenset(), "tau": frozenset()}
    hit = Trigger.from_successors([{**none, "a": frozenset({two, one})}, none])
    miss = Trigger.from_successors([{**none, "a": frozenset({one})}, none])
    assert hit.enabled == (frozenset({"a"}), frozenset())
    assert hit.totals[(0, "a")] == frozenset({Fraction(1), Fraction(2)})
    assert match_trigger(r, hit)
    assert not match_trigger(r, miss)


@pytest.mark.fast
def test_ground_labels() -> None:
    spec = parse_spec((DEMOS / "pepa_demo.wfs").read_text(encoding="utf-8"))
    by_name = {r.name: r for r in spec.rules}
    off = by_name["off"]
    assert off.free_label_metavars() == ("b",)
    assert by_name["act"].free_label_metavars() == ()
    assert [r.name for r in ground_labels(off, spec.labels)] == ["off[a]", "off[b]", "off[tau]"]
    # `$a != tau` is decided false for the tau instance
    passing = ground_labels(by_name["hide_pass"], spec.labels)
    assert [r.name for r in passing] == ["hide_pass[a]", "hide_pass[b]"]
    assert passing[0].label == "a"
    assert passing[0].required(0) == frozenset({"a"})
    nil = ground_labels(by_name["nil"], spec.labels)
    assert [r.label for r in nil] == ["a", "b", "tau"]


@pytest.mark.fast
def test_expand_open_counts_and_names() -> None:
    r = rule("rule choice [open x, y]: x --$a--> %f, y --$a--> %g => plus(x, y) --$a--> wsum(%f, %g);")
    expanded = expand_open(r, ("a", "b"))
    assert len(expanded) == 8
    assert all(not e.open_args for e in expanded)
    names = {e.name for e in expanded}
    assert "choice[a]<x+{};y+{b}>" in names
    padded = next(e for e in expanded if e.name == "choice[a]<x+{};y+{b}>")
    assert padded.required(1) == frozenset({"a", "b"})
    assert padded.required(0) == frozenset({"a"})
    assert len(expand_open(r, ("a", "b", "tau"))) == 3 * 4 * 4


@pytest.mark.fast
def test_expand_open_preserves_triggering() -> None:
    labels = ["a", "b", "tau"]
    r = rule("rule unless [open y]: x --a--> %f, y --tau--> %g, y -/b-> => plus(x, y) --a--> wsum(%f, %g);")
    expanded = expand_open(r, labels)
    assert len(expanded) == 2
    for left, right in product(subsets(labels), repeat=2):
        trigger = Trigger((left, right))
        assert match_trigger(r, trigger) == any(match_trigger(e, trigger) for e in expanded), trigger


@pytest.mark.fast
def test_instantiation_helpers() -> None:
    spec = parse_spec((DEMOS / "pepa_demo.wfs").read_text(encoding="utf-8"))
    act = next(r for r in spec.rules if r.name == "act")
    target = instantiate_target(act, {"a": "a", "r": Fraction(2)})
    assert target == Term.op("diamond", Term.var("x"), params=(Fraction(2),))
    off = next(r for r in spec.rules if r.name == "off")
    assert where_holds(off, {"a": "a", "b": "b"})
    assert not where_holds(off, {"a": "a", "b": "a"})
    rows = describe_rules(spec)
    assert list(rows.columns) == RULE_COLUMNS
    assert tuple(rows.iloc[0]) == ("nil", "nil", "$b", "empty")
    assert list(rows["rule"]) == [r.name for r in spec.rules]
    assert str(act) == "rule act [open x]: => prefix{$a,$r}(x) --$a--> diamond{$r}(x);"

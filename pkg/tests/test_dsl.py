from fractions import Fraction
from pathlib import Path

import pytest

from wfsosWB._types import SpecFormat
from wfsosWB.dsl import (
    detect_format,
    dump_spec,
    load_spec,
    parse_document,
    parse_roots,
    parse_spec,
)
from wfsosWB.syntax import Term
from wfsosWB.utils import SpecError
from wfsosWB.weights import RAT_INF_PLUS, RAT_PLUS
from wfsosWB.wfsos import WfsosSpec, validate_spec

DEMOS = Path(__file__).resolve().parent.parent / "demos"

MINIMAL = """
format wfsos;
labels a;
signature process { nil/0; prefix{label,weight}/1 }
signature weight { empty/0; diamond{weight}/1 }
interp i = { empty: zero; diamond: reshape };
"""


def demo(name: str) -> str:
    return (DEMOS / name).read_text(encoding="utf-8")


@pytest.mark.fast
def test_dump_then_parse_rebuilds_the_spec() -> None:
    spec = parse_spec(demo("pepa_demo.wfs"), "pepa")
    again = parse_spec(dump_spec(spec), "pepa")
    assert again.rules == spec.rules
    assert again.labels == spec.labels
    assert again.monoid is spec.monoid
    assert again.sigma.names == spec.sigma.names
    assert again.theta.names == spec.theta.names
    assert sorted(again.interp.rules) == sorted(spec.interp.rules)
    assert again.interp.base_weight == spec.interp.base_weight
    assert dump_spec(again) == dump_spec(spec)


@pytest.mark.fast
def test_declaration_order_does_not_matter() -> None:
    text = "const P = prefix{a,1}(P);\n" + MINIMAL + "rule act: => prefix{$a,$r}(x) --$a--> diamond{$r}(x);"
    spec = parse_spec(text)
    assert spec.constants["P"] == Term.op("prefix", Term.op("P"), params=("a", Fraction(1)))
    assert spec.monoid is RAT_INF_PLUS
    assert spec.interp.base_weight is RAT_INF_PLUS.parse("inf")
    assert spec.rules[0].source.children == (Term.var("x"),)


@pytest.mark.fast
def test_load_every_format() -> None:
    wfsos = load_spec(demo("pepa_demo.wfs"))
    segala = load_spec(demo("segala_demo.wfs"), name="segala")
    wgsos = load_spec(demo("wgsos_demo.wfs"), "wgsos", name="wgsos")
    pepa = load_spec(demo("shop.pepa"), "pepa")
    for spec in (wfsos, segala, wgsos, pepa):
        assert isinstance(spec, WfsosSpec)
        assert validate_spec(spec) == [], spec.name
    assert segala.monoid is RAT_PLUS
    assert "Coin" in segala.constants
    assert "Loop" in wgsos.constants
    assert set(pepa.labels) == {"browse", "buy", "restock", "tau"}


@pytest.mark.fast
def test_format_mismatches() -> None:
    with pytest.raises(SpecError):
        load_spec(demo("segala_demo.wfs"), "wgsos")
    with pytest.raises(SpecError):
        parse_spec(demo("segala_demo.wfs"))
    with pytest.raises(SpecError):
        load_spec("format pepa;")
    with pytest.raises(ValueError):
        load_spec(demo("pepa_demo.wfs"), "prolog")  # type: ignore[arg-type]


@pytest.mark.fast
def test_detect_format() -> None:
    assert detect_format("models/shop.pepa") is SpecFormat.Pepa
    assert detect_format(Path("SHOP.PEPA")) is SpecFormat.Pepa
    assert detect_format("demos/pepa_demo.wfs") is None


@pytest.mark.fast
def test_syntax_errors_carry_positions() -> None:
    with pytest.raises(SpecError, match=r"^3:\d+: syntax error"):
        parse_document("format wfsos;\nlabels a;\nlabels ,;\n")
    with pytest.raises(SpecError, match=r"^1:\d+: syntax error"):
        parse_roots("prefix{a,1}(nil))")


@pytest.mark.fast
@pytest.mark.parametrize(
    "text",
    [
        "format wfsos; format wfsos;",
        "format smalltalk;",
        "labels a, a;",
        "const P = nil; const P = nil;",
        "signature colour { nil/0 }",
        "signature process { f{colour}/1 }",
        "signature process { f{weight*,label}/1 }",
        "signature process { nil/0; nil/0 }",
    ],
)
def test_bad_declarations(text: str) -> None:
    with pytest.raises(SpecError):
        parse_document(text)


@pytest.mark.fast
def test_interpretation_blocks() -> None:
    assert sorted(parse_spec(MINIMAL).interp.rules) == ["diamond", "empty"]
    with pytest.raises(SpecError):
        parse_spec(MINIMAL + "interp j = { empty: zero };")


@pytest.mark.fast
@pytest.mark.parametrize(
    "interp",
    [
        "interp i = { empty: frobnicate };",
        "interp i = { empty: zero; empty: zero };",
        "interp i = { base: zero };",
        "interp i = { base: dirac(-1) };",
    ],
)
def test_bad_interpretations(interp: str) -> None:
    text = MINIMAL.replace("interp i = { empty: zero; diamond: reshape };", interp)
    with pytest.raises(SpecError):
        parse_spec(text)


@pytest.mark.fast
@pytest.mark.parametrize(
    "rule",
    [
        "rule r: z --a--> %f => prefix{a,1}(x) --a--> %f;",
        "rule r: => prefix{a,1}(x) --a--> 1/2 * x + 1/2 * nil;",
        'rule r: => prefix{a,1}(x) --a,"u"--> empty;',
        "rule r: x --a,u--> y => prefix{a,1}(x) --a--> empty;",
    ],
)
def test_rules_outside_the_wfsos_format(rule: str) -> None:
    with pytest.raises(SpecError):
        parse_spec(MINIMAL + rule)


@pytest.mark.fast
def test_parse_roots() -> None:
    roots = parse_roots("nil; prefix{a,1/2}(nil) ;")
    assert roots == [Term.op("nil"), Term.op("prefix", Term.op("nil"), params=("a", Fraction(1, 2)))]
    assert parse_roots("plus(x, nil)", ops={"plus", "nil"})[0].children[0] == Term.var("x")

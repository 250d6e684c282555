import json
from fractions import Fraction

import pytest

from wfsosWB._types import Constraint, TerminationKind
from wfsosWB.ultras import (
    Ultras,
    check_constraint,
    classify,
    disjoint_union,
    ensure_functional,
    is_functional,
)
from wfsosWB.utils import NotFunctionalError, PreconditionError
from wfsosWB.weights import NAT_PLUS, RAT_INF_PLUS, RAT_PLUS, WeightFn


def two_state() -> Ultras:
    rho = WeightFn({"s": 1, "t": 2}, NAT_PLUS)
    trans = {("s", "a"): [rho, WeightFn.zero(NAT_PLUS)], ("t", "b"): [WeightFn({"t": 1}, NAT_PLUS)]}
    return Ultras(["s", "t"], ["a", "b"], trans, NAT_PLUS)


@pytest.mark.fast
def test_construction_and_queries() -> None:
    u = two_state()
    assert len(u) == 2
    assert u.labels == ("a", "b")
    assert len(u.trans("s", "a")) == 2
    assert u.trans("s", "b") == frozenset()
    assert classify(u, "s", "a") == frozenset({TerminationKind.Active, TerminationKind.Terminal})
    assert classify(u, "s", "b") == frozenset({TerminationKind.Stuck})
    assert classify(u, "t", "b") == frozenset({TerminationKind.Active})
    assert not is_functional(u)
    with pytest.raises(NotFunctionalError):
        ensure_functional(u)
    with pytest.raises(ValueError):
        u.trans("s", "c")
    with pytest.raises(ValueError):
        Ultras(["s"], ["a"], {("s", "a"): [WeightFn({"x": 1}, NAT_PLUS)]}, NAT_PLUS)
    with pytest.raises(ValueError):
        Ultras(["s", "s"], ["a"], {}, NAT_PLUS)


@pytest.mark.fast
def test_stuck_and_terminal_differ() -> None:
    stuck = Ultras(["x"], ["a"], {}, NAT_PLUS)
    terminal = Ultras(["x"], ["a"], {("x", "a"): [WeightFn.zero(NAT_PLUS)]}, NAT_PLUS)
    assert stuck != terminal
    assert stuck.to_json() != terminal.to_json()


@pytest.mark.fast
def test_json_round_trip_and_schema() -> None:
    u = two_state()
    data = json.loads(u.to_json_str())
    assert data["monoid"] == "nat_plus"
    assert data["states"] == ["s", "t"]
    entry = next(e for e in data["trans"] if e["src"] == "s" and e["label"] == "a")
    assert [] in entry["fns"]
    assert [{"tgt": "s", "w": "1"}, {"tgt": "t", "w": "2"}] in entry["fns"]
    assert Ultras.from_json(data) == u
    with pytest.raises(ValueError):
        Ultras.from_json({"monoid": "nat_plus"})


@pytest.mark.fast
def test_text_dot_and_frame() -> None:
    u = two_state()
    text = u.to_text()
    assert "s --a--> {s: 1, t: 2}" in text
    assert "s --a--> {}" in text
    assert "s -/b-> (stuck)" in text
    dot = u.to_dot()
    assert dot.startswith('digraph "ultras" {')
    assert dot.count("->") == 6
    df = u.to_dataframe()
    assert list(df.columns) == ["src", "label", "fn", "tgt", "weight"]
    assert len(df[(df["src"] == "s") & (df["label"] == "b")]) == 1


@pytest.mark.fast
def test_rationals_serialize_exactly() -> None:
    u = Ultras(["x"], ["a"], {("x", "a"): [WeightFn({"x": Fraction(1, 3)}, RAT_PLUS)]}, RAT_PLUS)
    assert '"w": "1/3"' in u.to_json_str()
    assert Ultras.from_json(json.loads(u.to_json_str())) == u


@pytest.mark.fast
def test_disjoint_union() -> None:
    u = two_state()
    v = disjoint_union(u, u)
    assert len(v) == 4
    assert v.trans((1, "t"), "b") == frozenset({WeightFn({(1, "t"): 1}, NAT_PLUS)})
    with pytest.raises(ValueError):
        disjoint_union(u, Ultras(["x"], ["a"], {}, RAT_PLUS))


@pytest.mark.fast
def test_constraints() -> None:
    half = Fraction(1, 2)
    seg = Ultras(["x", "y"], ["a"], {("x", "a"): [WeightFn({"x": half, "y": half}, RAT_PLUS)]}, RAT_PLUS)
    assert check_constraint(seg, Constraint.Segala) == []
    bad = Ultras(["x"], ["a"], {("x", "a"): [WeightFn({"x": 2}, RAT_PLUS)]}, RAT_PLUS)
    assert len(check_constraint(bad, "segala")) == 1
    reactive = Ultras(["x"], ["a"], {("x", "a"): [WeightFn.zero(RAT_PLUS)]}, RAT_PLUS)
    assert check_constraint(reactive, "reactive") == []
    assert len(check_constraint(reactive, "segala")) == 1
    gen = Ultras(
        ["x"],
        ["a", "b"],
        {("x", "a"): [WeightFn({"x": half}, RAT_INF_PLUS)], ("x", "b"): [WeightFn({"x": half}, RAT_INF_PLUS)]},
        RAT_INF_PLUS,
    )
    assert check_constraint(gen, "generative") == []
    with pytest.raises(PreconditionError):
        check_constraint(two_state(), "segala")
    with pytest.raises(ValueError):
        check_constraint(seg, "bogus")

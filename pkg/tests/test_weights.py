from fractions import Fraction

import numpy as np
import pytest

from wfsosWB.utils import SpecError, SubstitutionError, SumMismatchError
from wfsosWB.weights import (
    BOOL_OR,
    INF,
    INT_PLUS,
    MONOIDS,
    NAT_PLUS,
    RAT_INF_PLUS,
    RAT_PLUS,
    WeightFn,
    check_monoid_laws,
    check_row_column,
    class_weight,
    format_weight,
    get_monoid,
    substitute,
    total_weight,
    wdiv,
    wmin,
    wmul,
)


@pytest.mark.fast
def test_monoid_laws() -> None:
    rng = np.random.default_rng(0)
    for m in MONOIDS.values():
        assert check_monoid_laws(m, rng, samples=500) == [], m.id


@pytest.mark.slow
@pytest.mark.math
def test_rational_monoid_laws_full_sample() -> None:
    for m in (RAT_PLUS, RAT_INF_PLUS):
        assert check_monoid_laws(m, np.random.default_rng(1)) == [], m.id


@pytest.mark.fast
def test_coerce_and_parse() -> None:
    assert RAT_PLUS.parse("2/4") == Fraction(1, 2)
    assert RAT_INF_PLUS.parse("inf") is INF
    assert BOOL_OR.parse("tt") is True
    assert NAT_PLUS.coerce(Fraction(4, 2)) == 2
    assert INT_PLUS.coerce(-3) == -3
    with pytest.raises(ValueError):
        RAT_PLUS.coerce(0.5)
    with pytest.raises(ValueError):
        NAT_PLUS.coerce(-1)
    with pytest.raises(ValueError):
        NAT_PLUS.coerce(Fraction(1, 2))
    with pytest.raises(ValueError):
        RAT_PLUS.parse("inf")
    with pytest.raises(ValueError):
        RAT_PLUS.coerce(True)
    with pytest.raises(SpecError):
        get_monoid("reals")
    assert get_monoid("rat") is RAT_PLUS


@pytest.mark.fast
def test_format_weight() -> None:
    assert format_weight(Fraction(6, 4)) == "3/2"
    assert format_weight(Fraction(4, 2)) == "2"
    assert format_weight(INF) == "inf"
    assert format_weight(False) == "ff"


@pytest.mark.fast
def test_infinity_conventions() -> None:
    assert wmul(0, INF) == 0
    assert wmul(INF, Fraction(1, 3)) is INF
    assert wdiv(3, 0) == 0
    assert wdiv(3, INF) == 0
    assert wdiv(INF, INF) == 1
    assert wdiv(INF, 2) is INF
    assert wmin(INF, Fraction(2)) == 2
    assert RAT_INF_PLUS.add(INF, Fraction(1)) is INF


@pytest.mark.fast
def test_weight_fn_canonical_form() -> None:
    rho = WeightFn([("x", 1), ("y", 0), ("x", Fraction(1, 2))], RAT_PLUS)
    assert dict(rho) == {"x": Fraction(3, 2)}
    assert rho("y") == 0
    with pytest.raises(KeyError):
        rho["y"]
    assert rho == WeightFn({"x": Fraction(3, 2)}, RAT_PLUS)
    assert hash(rho) == hash(WeightFn({"x": Fraction(3, 2)}, RAT_PLUS))
    assert WeightFn({"x": 0}, RAT_PLUS).is_zero
    assert WeightFn.zero(RAT_PLUS) == WeightFn({}, RAT_PLUS)
    assert list(WeightFn({"b": 1, "a": 2}, NAT_PLUS)) == ["a", "b"]
    assert repr(WeightFn({"b": 1, "a": Fraction(1, 2)}, RAT_PLUS)) == "{a: 1/2, b: 1}"


@pytest.mark.fast
def test_integers_cancel() -> None:
    rho = WeightFn([("x", 2), ("x", -2), ("y", 1)], INT_PLUS)
    assert dict(rho) == {"y": 1}


@pytest.mark.fast
def test_totals_and_classes() -> None:
    rho = WeightFn({"x": 1, "y": 2, "z": 3}, NAT_PLUS)
    assert total_weight(rho) == 6
    assert total_weight(WeightFn.zero(NAT_PLUS)) == 0
    assert class_weight(rho, {"x", "z"}) == 4
    assert class_weight(rho, ["w"]) == 0
    inf = WeightFn({"x": INF, "y": 1}, RAT_INF_PLUS)
    assert inf.total() is INF


@pytest.mark.fast
def test_substitute_merges() -> None:
    rho = WeightFn({"x": 1, "y": 2, "z": 3}, NAT_PLUS)
    merged = substitute(rho, {"x": "a", "y": "a", "z": "b"})
    assert dict(merged) == {"a": 3, "b": 3}
    assert substitute(rho, lambda e: e) == rho
    with pytest.raises(SubstitutionError):
        substitute(rho, {"x": "a"})


@pytest.mark.fast
def test_row_column() -> None:
    res = check_row_column(NAT_PLUS, [2, 1], [1, 2])
    assert res
    assert res.matrix is not None
    m = res.matrix
    assert [sum(m[i, :]) for i in range(2)] == [2, 1]
    assert [sum(m[:, j]) for j in range(2)] == [1, 2]
    with pytest.raises(SumMismatchError):
        check_row_column(NAT_PLUS, [1], [2])
    assert check_row_column(BOOL_OR, [True], [True, True])
    empty = check_row_column(NAT_PLUS, [], [])
    assert empty.found and empty.matrix is not None and empty.matrix.shape == (0, 0)

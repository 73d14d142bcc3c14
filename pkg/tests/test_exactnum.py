import random
from fractions import Fraction as F
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpcount.exactnum import (
    DimensionError,
    RMatrix,
    SingularMatrixError,
    det,
    format_rational,
    inverse,
    mat_mul,
    parse_rational,
    power_matrix,
    replace_column,
)
from dpcount.mechanism import geometric_restricted


def cofactor_det(rows):
    """Laplace expansion along the first row; test oracle for small sizes only."""
    if len(rows) == 1:
        return rows[0][0]
    total = F(0)
    for j, v in enumerate(rows[0]):
        if v:
            minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
            total += (-1) ** j * v * cofactor_det(minor)
    return total


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def square_matrices(size):
    return st.lists(st.lists(rationals, min_size=size, max_size=size), min_size=size, max_size=size)


@pytest.mark.parametrize("text,canonical", [("2/4", "1/2"), ("-3/6", "-1/2"), ("7", "7"), ("0/5", "0"), ("-4/8", "-1/2")])
def test_rational_round_trip(text, canonical):
    value = parse_rational(text)
    assert format_rational(value) == canonical
    assert parse_rational(format_rational(value)) == value


@pytest.mark.parametrize("bad", ["0.5", "1e3", "", "a/b", "1/0"])
def test_rational_rejects_non_exact(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


def test_mat_mul_identity_cases():
    b = RMatrix([[F(1, 2), F(1, 2)], [F(1, 3), F(2, 3)]])
    assert mat_mul(RMatrix.identity(2), b) == b
    assert mat_mul(RMatrix([[F(1, 2), F(1, 2)]]), RMatrix.identity(2)) == RMatrix([[F(1, 2), F(1, 2)]])


def test_mat_mul_reassociates_geometric():
    g14 = geometric_restricted(3, F(1, 4)).matrix
    g12 = geometric_restricted(3, F(1, 2)).matrix
    assert mat_mul(g14, mat_mul(inverse(g14), g12)) == g12


def test_mat_mul_dimension_error_names_shapes():
    with pytest.raises(DimensionError, match="2x3.*2x2"):
        mat_mul(RMatrix([[1, 2, 3], [4, 5, 6]]), RMatrix.identity(2))


def test_det_examples():
    assert det(RMatrix.identity(3)) == 1
    assert det(power_matrix(2, F(1, 2))) == F(3, 4)
    assert det(power_matrix(5, F(1, 3))) == F(4096, 6561)


def test_det_size5_matches_cofactor_expansion():
    m = power_matrix(5, F(1, 3))
    assert cofactor_det(m.tolist()) == F(4096, 6561)


@pytest.mark.parametrize("size", range(2, 9))
@pytest.mark.parametrize("alpha", [F(1, 4), F(1, 3), F(1, 2), F(2, 3)])
def test_power_matrix_determinant_law(size, alpha):
    assert det(power_matrix(size, alpha)) == (1 - alpha**2) ** (size - 1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).flatmap(square_matrices))
def test_det_agrees_with_cofactor_oracle(rows):
    assert det(RMatrix(rows)) == cofactor_det(rows)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4).flatmap(lambda k: st.tuples(square_matrices(k), square_matrices(k))))
def test_det_is_multiplicative(pair):
    a, b = RMatrix(pair[0]), RMatrix(pair[1])
    assert det(mat_mul(a, b)) == det(a) * det(b)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5).flatmap(square_matrices))
def test_inverse_is_exact(rows):
    a = RMatrix(rows)
    if det(a) == 0:
        with pytest.raises(SingularMatrixError) as info:
            inverse(a)
        assert info.value.det == 0
        return
    eye = RMatrix.identity(a.rows)
    assert mat_mul(a, inverse(a)) == eye
    assert mat_mul(inverse(a), a) == eye


def test_inverse_examples():
    assert inverse(RMatrix.identity(4)) == RMatrix.identity(4)
    assert inverse(RMatrix([[2, 0], [0, 4]])) == RMatrix([[F(1, 2), 0], [0, F(1, 4)]])
    g = geometric_restricted(3, F(1, 4)).matrix
    assert mat_mul(inverse(g), g) == RMatrix.identity(4)


def test_inverse_singular():
    with pytest.raises(SingularMatrixError):
        inverse(RMatrix([[1, 2], [2, 4]]))


def test_non_square_errors():
    with pytest.raises(DimensionError):
        det(RMatrix([[1, 2]]))
    with pytest.raises(DimensionError):
        inverse(RMatrix([[1, 2]]))


def test_replace_column_examples():
    assert replace_column(RMatrix.identity(2), 0, (1, 0)) == RMatrix.identity(2)
    assert replace_column(RMatrix.identity(2), 1, (1, 1)) == RMatrix([[1, 1], [0, 1]])
    with pytest.raises(IndexError):
        replace_column(RMatrix.identity(2), 2, (1, 1))
    with pytest.raises(DimensionError):
        replace_column(RMatrix.identity(2), 0, (1, 1, 1))


def test_replace_column_sign_follows_triple_condition():
    alpha = F(1, 2)
    base = power_matrix(4, alpha)
    rng = random.Random(3)
    for _ in range(10):
        col = [F(rng.randint(0, 9), rng.randint(1, 9)) for _ in range(4)]
        d = det(replace_column(base, 1, col))
        margin = (1 + alpha**2) * col[1] - alpha * (col[0] + col[2])
        assert (d >= 0) == (margin >= 0)
        assert cofactor_det(replace_column(base, 1, col).tolist()) == d


def test_replace_column_closed_forms():
    a = F(1, 3)
    size = 5
    base = power_matrix(size, a)
    rng = random.Random(8)
    scale = (1 - a * a) ** (size - 2)
    for _ in range(5):
        x = [F(rng.randint(0, 20), 7) for _ in range(size)]
        assert det(replace_column(base, 0, x)) == scale * (x[0] - a * x[1])
        assert det(replace_column(base, size - 1, x)) == scale * (x[-1] - a * x[-2])
        for i in range(1, size - 1):
            expected = scale * ((1 + a * a) * x[i] - a * (x[i - 1] + x[i + 1]))
            assert det(replace_column(base, i, x)) == expected


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4).flatmap(square_matrices))
def test_results_are_canonical(rows):
    a = RMatrix(rows)
    values = list(mat_mul(a, a).entries()) + [det(a)]
    for v in values:
        assert v.denominator > 0
        assert gcd(abs(v.numerator), v.denominator) == 1


def test_matrix_json_round_trip():
    m = RMatrix([[F(1, 2), F(-3, 4)], [0, 5]])
    obj = m.to_json()
    assert obj == {"rows": 2, "cols": 2, "entries": [["1/2", "-3/4"], ["0", "5"]]}
    assert RMatrix.from_json(obj) == m
    with pytest.raises(DimensionError):
        RMatrix.from_json({"rows": 3, "cols": 2, "entries": obj["entries"]})


def test_matrix_is_immutable():
    m = RMatrix.identity(2)
    with pytest.raises(AttributeError):
        m._rows = 3
    with pytest.raises(TypeError):
        m.row(0)[0] = 5

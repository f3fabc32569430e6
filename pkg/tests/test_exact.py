from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scpseudo.enumerator.alphabet import EnumeratorBudgetError
from scpseudo.enumerator.exact import brute_force_average_count, exact_average_count

# (B, type counts per variable over weights 0..2) with N = 2, m = 2
INSTANCES = [
    ([[2, 1]], ((0, 2, 0), (1, 0, 1))),
    ([[1, 1, 1]], ((0, 1, 1), (0, 1, 1), (0, 2, 0))),
    ([[1, 1], [1, 1]], ((1, 1, 0), (1, 1, 0))),
    ([[1, 2]], ((1, 0, 1), (0, 2, 0))),
    ([[1, 1, 0], [0, 1, 1]], ((0, 1, 1), (0, 1, 1), (0, 1, 1))),
    ([[1, 1, 0], [0, 1, 1]], ((1, 1, 0), (1, 1, 0), (1, 1, 0))),
]


def compositions(n, parts):
    if parts == 1:
        return [(n,)]
    return [(a,) + rest for a in range(n + 1) for rest in compositions(n - a, parts - 1)]


@pytest.mark.parametrize("counting", ["codeword", "pseudocodeword"])
@pytest.mark.parametrize("B, counts", INSTANCES)
def test_exact_equals_brute_force(B, counts, counting):
    assert any(c[0] < 2 for c in counts)
    exact = exact_average_count(B, 2, 2, counts, counting)
    assert isinstance(exact, Fraction)
    assert exact == brute_force_average_count(B, 2, 2, counts, counting)


@settings(max_examples=25)
@given(
    st.sampled_from([[[2, 1]], [[1, 1]], [[3]], [[1, 2]]]),
    st.integers(1, 2),
    st.integers(1, 3),
    st.sampled_from(["codeword", "pseudocodeword"]),
    st.data(),
)
def test_exact_equals_brute_force_random(B, N, m, counting, data):
    if N * m > 4:
        m = 2
    counts = tuple(data.draw(st.sampled_from(compositions(N, m + 1))) for _ in B[0])
    assert exact_average_count(B, m, N, counts, counting) == brute_force_average_count(B, m, N, counts, counting)


def test_zero_type_counts_one():
    counts = ((2, 0, 0), (2, 0, 0))
    assert exact_average_count([[1, 1]], 2, 2, counts) == 1


def test_validation():
    with pytest.raises(ValueError):
        exact_average_count([[1, 1]], 2, 2, ((1, 0, 0), (2, 0, 0)))
    with pytest.raises(ValueError):
        exact_average_count([[1, 1]], 2, 2, ((2, 0), (2, 0)))
    with pytest.raises(EnumeratorBudgetError):
        exact_average_count([[1, 1]], 1, 5, ((5, 0), (5, 0)))
    with pytest.raises(EnumeratorBudgetError):
        brute_force_average_count([[3, 3]], 3, 2, ((2, 0, 0, 0), (2, 0, 0, 0)))

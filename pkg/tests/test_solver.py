import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sftkit import zoo
from sftkit.core import InvalidInput, Pattern, TorusConfig, box, rect, validate_pattern, validate_torus
from sftkit.solver import (
    BudgetExhausted,
    SearchBudget,
    brute_force_language,
    complete_torus,
    count_language,
    enumerate_language,
    enumerate_tori,
    extend,
    sample_language,
    solve_open,
)


def fib(n):
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


@pytest.mark.parametrize("n", range(1, 8))
def test_golden_mean_counts_are_fibonacci(n):
    assert count_language(zoo.golden_mean(), rect((0,), (n - 1,))) == fib(n + 2)


def test_hard_squares_small_counts():
    hs = zoo.hard_squares()
    assert count_language(hs, box(2, 1)) == 63
    assert count_language(hs, box(2, 2)) == 55447


def test_enumeration_matches_brute_force_with_margin():
    hs = zoo.hard_squares()
    F = rect((0, 0), (2, 1))
    for m in (0, 1):
        assert sorted(enumerate_language(hs, F, m)) == sorted(brute_force_language(hs, F, m))


def test_sofic_enumeration_matches_image_of_cover():
    ws = zoo.worm_shift()
    F = rect((0, 0), (1, 1))
    images = {ws.image(p) for p in brute_force_language(ws.cover, F)}
    assert set(enumerate_language(ws, F)) == images


def test_count_equals_enumeration_length():
    xs = zoo.x_struct()
    F = rect((0, 0), (1, 1))
    assert count_language(xs, F) == len(enumerate_language(xs, F))


def test_extend_and_refute():
    gm = zoo.golden_mean()
    p = Pattern.from_word([1, 0, 1])
    e = extend(gm, p, rect((-2,), (4,)))
    assert e is not None and validate_pattern(gm, e)
    with pytest.raises(InvalidInput):
        extend(gm, Pattern.from_word([1, 1]), rect((0,), (3,)))
    # the gap between two ones is filled with a zero
    hs = zoo.hard_squares()
    assert extend(hs, Pattern({(0, 0): 1, (2, 0): 1}), rect((0, 0), (2, 0))) is not None


def test_budget_exhaustion_is_distinct_from_refutation():
    hs = zoo.hard_squares()
    with pytest.raises(BudgetExhausted):
        count_language(hs, box(2, 3), budget=SearchBudget(max_nodes=5))


def test_complete_torus_respects_pattern():
    hs = zoo.hard_squares()
    p = Pattern({(0, 0): 1, (1, 1): 1})
    t = complete_torus(hs, p, (4, 4))
    assert t is not None and validate_torus(hs, t)
    assert t[(0, 0)] == 1 and t[(1, 1)] == 1


def test_complete_torus_refutes_odd_golden_mean_alternation():
    gm = zoo.golden_mean()
    assert complete_torus(gm, Pattern.from_word([1, 0, 1], start=-1), (3,)) is None


def test_enumerate_tori_small_golden_mean():
    tori = list(enumerate_tori(zoo.golden_mean(), (5,)))
    # Lucas number L_5 = 11 cyclic binary words without adjacent ones
    assert len(tori) == 11
    assert all(validate_torus(zoo.golden_mean(), t) for t in tori)


def test_sampling_is_reproducible():
    xs = zoo.x_struct()
    a = sample_language(xs, box(2, 1), 0, 10, seed=3)
    b = sample_language(xs, box(2, 1), 0, 10, seed=3)
    assert list(a) == list(b)
    assert all(validate_pattern(xs, p) for p in a)


def test_solve_open_randomized_is_valid():
    xs = zoo.x_struct()
    S = solve_open(xs, box(2, 3), {}, SearchBudget(seed=11), randomize=True)
    assert S is not None and validate_pattern(xs, S)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=9))
def test_golden_mean_locally_valid_words_extend(word):
    gm = zoo.golden_mean()
    p = Pattern.from_word(word)
    if not validate_pattern(gm, p):
        with pytest.raises(InvalidInput):
            extend(gm, p, rect((-2,), (len(word) + 1,)))
    else:
        assert extend(gm, p, rect((-2,), (len(word) + 1,))) is not None


def test_full_shift_counts_are_powers():
    fs = zoo.full_shift(3, 3)
    assert count_language(fs, box(3, 2)) == 3 ** 125
    assert math.isclose(math.log(count_language(fs, box(3, 1))) / 27, math.log(3))


def test_torus_config_rejects_wrong_length():
    with pytest.raises(Exception):
        TorusConfig((2, 2), [0, 0, 0])

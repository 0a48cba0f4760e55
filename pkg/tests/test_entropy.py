import json
import math

import numpy as np
import pytest

from sftkit import zoo
from sftkit.core import InvalidInput
from sftkit.entropy import (
    dominant_eigenvalue,
    entropy_upper_box,
    reflection_symmetric,
    strip_table,
    strip_transfer_entropy,
    transfer_operator,
    valid_rows,
)

PHI = (1 + 5 ** 0.5) / 2


@pytest.mark.parametrize("k,d,n", [(2, 1, 3), (3, 2, 2), (2, 3, 3), (3, 3, 1)])
def test_full_shift_box_entropy_is_exact(k, d, n):
    e = entropy_upper_box(zoo.full_shift(k, d), n)
    assert e.upper == math.log(k)
    assert e.lower == 0.0


def test_box_upper_bound_decreases_for_golden_mean():
    ups = [entropy_upper_box(zoo.golden_mean(), n).upper for n in range(1, 6)]
    assert all(a >= b for a, b in zip(ups, ups[1:]))
    assert ups[-1] > math.log(PHI)


def test_golden_mean_rows_strip_matches_eigenvalue():
    e = strip_transfer_entropy(zoo.golden_mean_rows(), 1)
    assert abs(e.upper - math.log(PHI)) < 1e-9
    assert abs(e.eigenvalue - max(np.linalg.eigvals(np.array([[1, 1], [1, 0]])).real)) < 1e-9


def test_one_dimensional_strip_is_exact():
    e = strip_transfer_entropy(zoo.golden_mean(), 3)
    assert e.lower == e.upper
    assert abs(e.upper - math.log(PHI)) < 1e-9


def test_hard_squares_rows_are_fibonacci():
    hs = zoo.hard_squares()
    assert len(valid_rows(hs, 5)) == 13
    assert len(valid_rows(hs, 5, cyclic=True)) == 11


def test_transfer_operator_is_symmetric_for_hard_squares():
    _, T = transfer_operator(zoo.hard_squares(), 4)
    A = T.toarray() if hasattr(T, "toarray") else T
    assert (A == A.T).all()


def test_reflection_symmetry_detection():
    assert reflection_symmetric(zoo.hard_squares())
    assert not reflection_symmetric(zoo.golden_mean_rows())


def test_hard_squares_bounds_bracket_and_tighten():
    rows = strip_table(zoo.hard_squares(), range(2, 9))
    for a, b in zip(rows, rows[1:]):
        assert b["upper"] <= a["upper"] + 1e-12
        assert b["lower"] >= a["lower"] - 1e-12
    last = rows[-1]
    # the hard-square constant 1.50304808247533... is known to high precision
    assert last["lower"] <= math.log(1.5030480824753322) <= last["upper"]
    assert last["upper"] - last["lower"] < 0.01


def test_power_iteration_against_numpy():
    rng = np.random.default_rng(1)
    A = (rng.random((30, 30)) < 0.2).astype(float)
    A = A + A.T
    lam = dominant_eigenvalue(A)[0]
    assert abs(lam - max(np.linalg.eigvalsh(A))) < 1e-8 * lam


def test_estimate_json_round_trip():
    e = entropy_upper_box(zoo.hard_squares(), 1)
    doc = json.loads(e.to_json())
    assert doc["count"] == "63"
    assert doc["upper"] == e.upper


def test_strip_rejects_three_dimensions():
    with pytest.raises(InvalidInput):
        strip_transfer_entropy(zoo.good_wave(), 1)

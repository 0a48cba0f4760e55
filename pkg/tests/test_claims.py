import json

import pytest

from sftkit import claims, zoo
from sftkit.core import Pattern, TorusConfig, box, rect, validate_pattern, validate_torus


def gw_torus(periods, f):
    gw = zoo.good_wave()
    return TorusConfig.from_function(periods, lambda c: zoo.gw_symbol(gw, *f(c)))


def test_flat_wave_extracts_one_flat_wave():
    t = zoo.flat_wave_torus((3, 3, 5), level=1)
    (w,) = claims.extract_waves(t)
    assert w.amplitude == 0 and w.base == 1
    assert set(w.offsets().values()) == {0}
    assert len(w.crest) == 9


def test_blank_torus_has_no_waves():
    gw = zoo.good_wave()
    t = TorusConfig.constant((3, 3, 5), zoo.gw_symbol(gw, "white", False))
    assert claims.extract_waves(t) == []


def test_invalid_config_fails_extraction():
    # a cube with no neighbouring cube breaks the wave partition
    t = gw_torus((3, 3, 5), lambda c: ("white", c == (0, 0, 0)))
    with pytest.raises(claims.ExtractionFailure):
        claims.extract_waves(t)


def test_crest_wave_from_enumeration():
    from sftkit.solver import enumerate_tori

    gw = zoo.good_wave()
    for t in enumerate_tori(gw, (3, 3, 5)):
        waves = claims.extract_waves(t, gw)
        if waves and waves[0].amplitude == 1:
            w = waves[0]
            assert set(w.offsets().values()) == {0, 1}
            assert w.crest and w.is_lipschitz(t.periods)
            break
    else:
        pytest.fail("no non-flat wave at periods (3, 3, 5)")


def test_three_level_window_is_rejected():
    gw = zoo.good_wave()
    cube = zoo.gw_symbol(gw, "white", True)
    blank = zoo.gw_symbol(gw, "white", False)
    stair = {(0, 0, 0), (1, 0, 1), (2, 0, 2)}
    p = Pattern({c: cube if c in stair else blank for c in rect((0, 0, -1), (2, 0, 3))}, 3)
    assert not validate_pattern(gw, p)


def test_good_wave_verified_on_small_tori():
    rep = claims.verify_good_wave((3, 3, 5))
    assert rep.verdict == claims.VERIFIED, rep.stats
    assert rep.stats["tori"] == 5546
    assert rep.stats["consecutive_nonwhite"] == 0
    assert rep.stats["max_amplitude"] <= 1


def test_pasting_two_flat_waves():
    c1 = zoo.flat_wave_torus((3, 3, 13), level=-5)
    c2 = zoo.flat_wave_torus((3, 3, 13), level=5)
    rep = claims.verify_pasting(c1, c2, 0)
    assert rep.ok, rep.stats


def test_pasting_identical_inputs():
    c = claims.random_gw_torus((3, 3, 7), seed=4)
    assert claims.verify_pasting(c, c, 2).ok


def test_pasting_random_pairs():
    rep = claims.verify_pasting_random(count=10, seed=5)
    assert rep.ok and rep.stats["pairs"] == 10


def test_pasting_rejects_invalid_inputs():
    gw = zoo.good_wave()
    bad = TorusConfig.constant((3, 3, 5), zoo.gw_symbol(gw, "white", True))
    with pytest.raises(claims.PreconditionError):
        claims.verify_pasting(bad, bad, 0)


def test_weak_mixing_blank_patterns():
    gw = zoo.good_wave()
    b = zoo.blank_pattern(gw, box(3, 1))
    rep = claims.verify_weak_mixing_gluing(b, b, b, b)
    assert rep.ok


def test_weak_mixing_flat_and_crest_windows():
    flat = zoo.flat_wave_torus((3, 3, 7)).restrict(box(3, 1))
    crest = claims.random_gw_window(7)
    rep = claims.verify_weak_mixing_gluing(flat, flat, crest, crest)
    assert rep.ok
    assert rep.params["u"][:2] == [0, 0]


def test_weak_mixing_precondition_guard():
    gw = zoo.good_wave()
    b = zoo.blank_pattern(gw, box(3, 1))
    with pytest.raises(claims.PreconditionError):
        claims.verify_weak_mixing_gluing(b, b, b, b, u=(0, 0, 1))


def test_worm_chain_lengths():
    assert claims.worm_chain(0, 0) == []
    chain = claims.worm_chain(0, 3)
    assert len(chain) == 3
    with pytest.raises(claims.WindowTooSmall):
        claims.worm_chain(0, 5, box(2, 4))


def test_worm_chain_single_step_validates():
    from sftkit.asymptotics import check_witness

    ws = zoo.worm_shift()
    F = box(2, 4)
    (w,) = claims.worm_chain(0, 1, F)
    line, white = ws.alphabet.index("line"), ws.alphabet.index("white")
    p = Pattern(((c, line if c[0] == 0 else white) for c in F), 2)
    q = Pattern(((c, line if c[0] == 1 else white) for c in F), 2)
    assert check_witness(ws, w, p, q)


def test_blue_sky_single_cell_windows():
    # a lone T7 corner needs the ring one step further out than radius 2
    assert claims.verify_blue_sky(0, ring=2).verdict == claims.COUNTEREXAMPLE
    assert claims.verify_blue_sky(0, ring=3).ok


def test_all_blue_cross_window_extends_by_constant_tile():
    from sftkit.solver import solve_open

    xs = zoo.x_struct()
    cross = xs.alphabet.index("X.bbbb")
    pins = {c: 1 << cross for c in box(2, 5) if max(map(abs, c)) in (0, 1, 5)}
    S = solve_open(xs, box(2, 5), pins)
    assert S is not None and validate_pattern(xs, S)
    assert validate_pattern(xs, Pattern.constant(box(2, 5), cross))


def test_blue_sky_sampled_n2_small():
    rep = claims.verify_blue_sky(2, sample=10, seed=1)
    assert rep.ok and rep.stats["windows"] == 10


def test_periodic_density_full_shift_and_golden_mean():
    assert claims.verify_periodic_density(zoo.full_shift(2, 2), 1).ok
    assert claims.verify_periodic_density(zoo.golden_mean(), 3).ok


def test_periodic_density_seven_is_too_small_for_golden_mean_n3():
    rep = claims.verify_periodic_density(zoo.golden_mean(), 3, periods=(7,))
    assert rep.verdict == claims.COUNTEREXAMPLE
    # 1 0 0 0 0 0 1 wraps onto two adjacent ones
    assert any(a["pattern"][0][1] == "1" and a["pattern"][-1][1] == "1" for a in rep.artifacts)


def test_report_json_is_deterministic():
    a = claims.verify_pasting_random(count=3, seed=9).to_json()
    b = claims.verify_pasting_random(count=3, seed=9).to_json()
    assert a == b
    assert json.loads(a)["verdict"] == "verified"


def test_wave_partition_on_random_tori():
    gw = zoo.good_wave()
    for seed in range(5):
        t = claims.random_gw_torus((4, 4, 8), seed)
        assert validate_torus(gw, t)
        for w in claims.extract_waves(t, gw):
            assert w.amplitude <= 1

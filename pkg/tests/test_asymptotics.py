import json

import pytest

from sftkit import zoo
from sftkit.asymptotics import (
    ExchangeabilityParams,
    NoWitnessUpTo,
    Obstructed,
    Obstruction,
    UnknownObstructionKind,
    VertexNotFound,
    Witness,
    bce_profile,
    chain_distance,
    chain_path,
    check_obstruction,
    check_witness,
    exchangeability_graph,
    exchangeable,
    graph_to_dot,
    graph_to_json,
)
from sftkit.core import InvalidInput, Pattern, box, rect


def straight(spec, col, F):
    line, white = spec.alphabet.index("line"), spec.alphabet.index("white")
    return Pattern(((c, line if c[0] == col else white) for c in F), 2)


def test_full_shift_pair_has_witness_differing_inside_K():
    fs = zoo.full_shift(2, 2)
    F = box(2, 1)
    p = Pattern.constant(F, 0)
    q = Pattern(((c, 1 if c == (0, 0) else 0) for c in F), 2)
    w = exchangeable(fs, p, q)
    assert isinstance(w, Witness)
    assert check_witness(fs, w, p, q)
    assert set(w.differing_cells) <= set(w.K)


def test_reflexive_pair_has_empty_difference():
    gm = zoo.golden_mean()
    p = Pattern.from_word([1, 0, 1])
    w = exchangeable(gm, p, p)
    assert isinstance(w, Witness) and len(w.differing_cells) == 0


def test_witness_is_symmetric_under_swap():
    hs = zoo.hard_squares()
    F = rect((0, 0), (1, 0))
    p, q = Pattern({(0, 0): 1, (1, 0): 0}), Pattern({(0, 0): 0, (1, 0): 1})
    w = exchangeable(hs, p, q)
    w2 = exchangeable(hs, q, p)
    assert check_witness(hs, w, p, q) and check_witness(hs, w2, q, p)
    assert w2 == w.swapped()


def test_tampered_witness_fails_check():
    fs = zoo.full_shift(2, 1)
    p, q = Pattern.from_word([0, 0]), Pattern.from_word([0, 1])
    w = exchangeable(fs, p, q)
    assert not check_witness(fs, w, q, p)


def test_sunny_side_up_open_witness():
    s = zoo.sunny_side_up()
    p, q = Pattern.from_word([0, 1, 0]), Pattern.from_word([0, 0, 0])
    w = exchangeable(s, p, q)
    assert isinstance(w, Witness) and w.kind == "open-pair" and w.certifying
    assert check_witness(s, w, p, q)


def test_worm_column_obstruction():
    ws = zoo.worm_shift()
    F = box(2, 2)
    p = straight(ws, 0, F)
    q = Pattern.constant(F, ws.alphabet.index("white"))
    res = exchangeable(ws, p, q)
    assert isinstance(res, Obstructed)
    assert res.obstruction.kind == "worm-column"
    assert check_obstruction(ws, res.obstruction, p, q)
    assert not check_obstruction(ws, res.obstruction, p, p)


def test_edge_worm_is_exchangeable_with_white():
    ws = zoo.worm_shift()
    F = box(2, 1)
    p = straight(ws, -1, F)
    q = Pattern.constant(F, ws.alphabet.index("white"))
    w = exchangeable(ws, p, q)
    assert isinstance(w, Witness) and check_witness(ws, w, p, q)


def test_unknown_obstruction_kind():
    ws = zoo.worm_shift()
    F = box(2, 1)
    p = Pattern.constant(F, 0)
    with pytest.raises(UnknownObstructionKind):
        check_obstruction(ws, Obstruction("no-such-kind", 0, ()), p, p)


def test_support_mismatch_is_rejected():
    gm = zoo.golden_mean()
    with pytest.raises(InvalidInput):
        exchangeable(gm, Pattern.from_word([0]), Pattern.from_word([0, 0]))


def test_radius_must_cover_support():
    gm = zoo.golden_mean()
    with pytest.raises(InvalidInput):
        exchangeable(gm, Pattern.from_word([0, 0, 0]), Pattern.from_word([0, 1, 0]),
                     ExchangeabilityParams(r=0))


def test_golden_mean_graph_is_complete_and_exports():
    gm = zoo.golden_mean()
    g = exchangeability_graph(gm, rect((0,), (1,)))
    assert len(g.vertices) == 3 and g.is_complete()
    dot = graph_to_dot(g, gm)
    assert dot.startswith("graph exchangeability {")
    doc = json.loads(graph_to_json(g, gm))
    assert len(doc["vertices"]) == 3
    assert graph_to_json(g, gm) == graph_to_json(exchangeability_graph(gm, rect((0,), (1,))), gm)


def test_chain_distance_and_path():
    gm = zoo.golden_mean()
    g = exchangeability_graph(gm, rect((0,), (2,)))
    a, b = g.vertices[0], g.vertices[-1]
    assert chain_distance(g, a, b) == 1
    assert chain_path(g, a, b) == [a, b]
    with pytest.raises(VertexNotFound):
        chain_distance(g, a, Pattern.from_word([1, 1, 1]))


def test_worm_graph_has_obstructed_cross_pairs():
    ws = zoo.worm_shift()
    F = box(2, 2)
    white = Pattern.constant(F, ws.alphabet.index("white"))
    verts = [white, straight(ws, 0, F), straight(ws, 1, F)]
    g = exchangeability_graph(ws, F, vertices=verts)
    assert g.obstructions[(0, 1)].kind == "worm-column"
    # the band around column 1 leaves F, so that pair stays unclassified
    assert (0, 2) in g.unknown
    assert (1, 2) in g.edges


def test_bce_profile_golden_mean():
    prof = bce_profile(zoo.golden_mean(), [rect((0,), (n - 1,)) for n in range(1, 5)])
    assert prof.max_diameters() == [1, 1, 1, 1]
    assert json.loads(prof.to_json())["records"][0]["vertices"] == 2


def test_three_dimensional_wave_presence_obstruction():
    gw = zoo.good_wave()
    F = rect((0, 0, -2), (0, 0, 2))
    blank = zoo.blank_pattern(gw, F)
    cube = Pattern(((c, zoo.gw_symbol(gw, "white", c[2] == 0)) for c in F), 3)
    res = exchangeable(gw, cube, blank)
    assert isinstance(res, Obstructed) and res.obstruction.kind == "wave-presence"
    assert check_obstruction(gw, res.obstruction, cube, blank)


def test_no_witness_result_reports_bounds():
    ws = zoo.worm_shift()
    F = box(2, 1)
    p = straight(ws, 0, F)
    q = Pattern.constant(F, ws.alphabet.index("white"))
    res = exchangeable(ws, p, q)
    assert isinstance(res, NoWitnessUpTo)
    assert res.r == 2 and res.m == 1

import pytest

from sftkit import zoo
from sftkit.core import (
    Alphabet,
    ForbiddenPattern,
    InvalidInput,
    MissingFaceLabels,
    Pattern,
    ShiftSpec,
    SpecFormatError,
    Support,
    TorusConfig,
    box,
    compile_wang,
    dumps_pattern,
    dumps_spec,
    dumps_torus,
    loads_pattern,
    loads_spec,
    loads_torus,
    rect,
    validate_pattern,
    validate_torus,
    violations,
)


def test_box_and_rect():
    assert len(box(2, 1)) == 9
    assert len(box(3, 2)) == 125
    assert rect((0, 0), (1, 2)) == Support([(x, y) for x in range(2) for y in range(3)])
    assert box(2, 1).bounds() == ((-1, -1), (1, 1))


def test_support_rejects_mixed_dimension():
    with pytest.raises(InvalidInput):
        Support([(0,), (0, 1)])


def test_pattern_translate_and_equality():
    p = Pattern({(0, 0): 1, (1, 0): 0})
    q = p.translate((2, 3))
    assert q[(2, 3)] == 1
    assert q.translate((-2, -3)) == p
    assert p.differing_cells(Pattern({(0, 0): 0, (1, 0): 0})) == Support([(0, 0)])


def test_golden_mean_validation():
    gm = zoo.golden_mean()
    assert validate_pattern(gm, Pattern.from_word([0, 1, 0, 1]))
    assert not validate_pattern(gm, Pattern.from_word([0, 1, 1]))
    assert violations(gm, Pattern.from_word([1, 1, 1]))


def test_torus_indexing_is_centred():
    t = TorusConfig((3, 4), list(range(12)))
    assert t.lo() == (-1, -2)
    assert t[(-1, -2)] == 0
    assert t[(2, 2)] == t[(-1, -2)]
    assert t.wrap((5, -7)) == (-1, 1)


def test_torus_validation_wraps():
    gm = zoo.golden_mean()
    assert validate_torus(gm, TorusConfig((4,), [1, 0, 1, 0]))
    assert not validate_torus(gm, TorusConfig((3,), [1, 0, 1]))


def test_spec_round_trip_all_builtins():
    for name in ("golden-mean", "hard-squares", "golden-mean-rows", "sunny-side-up", "worm-precursor",
                 "x-struct", "good-wave"):
        spec = zoo.builtin(name)
        text = dumps_spec(spec)
        again = loads_spec(text)
        assert dumps_spec(again) == text
        assert again.alphabet.names == spec.alphabet.names


def test_pattern_and_torus_round_trip():
    xs = zoo.x_struct()
    p = Pattern({(0, 0): 5, (1, -1): 7})
    assert loads_pattern(xs, dumps_pattern(xs, p)) == p
    t = zoo.flat_wave_torus((3, 3, 5))
    gw = zoo.good_wave()
    assert loads_torus(gw, dumps_torus(gw, t)) == t


@pytest.mark.parametrize("text", [
    "",
    "format 1\nname x\n",
    "format 1\nname x\ndimension 1\nsymbol a\nforbid (0) zz\n",
])
def test_malformed_spec_raises(text):
    with pytest.raises(SpecFormatError):
        loads_spec(text)


def test_wang_compilation_matches_face_rule():
    al = Alphabet(("a", "b"), faces=(("x", "y", "u", "v"), ("y", "x", "v", "u")))
    spec = compile_wang(ShiftSpec("toy", 2, al, wang_mode=True))
    # a's E face (y) must meet the W face of its right neighbour: only b has W = y
    assert validate_pattern(spec, Pattern({(0, 0): 0, (1, 0): 1}))
    assert not validate_pattern(spec, Pattern({(0, 0): 0, (1, 0): 0}))
    assert validate_pattern(spec, Pattern({(0, 0): 0, (0, 1): 1}))
    assert not validate_pattern(spec, Pattern({(0, 0): 1, (0, 1): 1}))


def test_wang_requires_faces():
    with pytest.raises(MissingFaceLabels):
        compile_wang(ShiftSpec("toy", 2, Alphabet(("a",)), wang_mode=True))


def test_forbidden_pattern_masks_expand():
    fp = ForbiddenPattern((((0,), 0b11), ((1,), 0b10)))
    assert len(fp.expand()) == 2


def test_shipped_data_matches_builders(tmp_path):
    written = zoo.regenerate(tmp_path)
    assert written
    for path in written:
        name = path.rsplit("/", 1)[1]
        shipped = zoo.shipped_text(name.rsplit(".v", 1)[0])
        assert open(path, encoding="utf-8").read() == shipped


def test_worm_shift_is_sofic_image():
    ws = zoo.worm_shift()
    assert ws.alphabet.names[0] == "white"
    wp = zoo.worm_precursor()
    img = ws.image(Pattern({(0, 0): wp.alphabet.index("lineB")}))
    assert ws.alphabet.names[img[(0, 0)]] == "line"


def test_sunny_side_up_counts_ones():
    s = zoo.sunny_side_up()
    assert validate_pattern(s, Pattern.from_word([0, 1, 0, 0]))
    assert not validate_pattern(s, Pattern.from_word([1, 0, 0, 1]))

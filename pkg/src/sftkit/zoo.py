"""Constructors for the example shifts, block codes and sofic images.

Every named shift is shipped as a versioned spec file under ``data/``; the
public constructors load those files so that tile tables are pinned.  The
``build_*`` functions generate the same specs from first principles and the
test suite checks the two agree byte for byte.

Run ``python -m sftkit.zoo --regenerate`` to rewrite the data files.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Mapping

from .core import (
    Alphabet,
    Coord,
    CustomValidator,
    ForbiddenPattern,
    InvalidInput,
    Pattern,
    ShiftSpec,
    Support,
    TorusConfig,
    add,
    box,
    compile_wang,
    dumps_spec,
    loads_spec,
    register_validator,
    unit,
)


class SupportTooSmall(InvalidInput):
    pass


# ---------------------------------------------------------------- block codes


@dataclass(frozen=True)
class BlockCode:
    """Sliding block code: the image at c is rule(pattern on c + neighborhood)."""

    neighborhood: Support
    rule: Callable[[tuple[int, ...]], int]
    source: Alphabet
    target: Alphabet
    name: str = "code"

    def image_symbol(self, window: tuple[int, ...]) -> int:
        return self.rule(window)


def identity_code(spec: ShiftSpec) -> BlockCode:
    nb = Support([(0,) * spec.dimension])
    return BlockCode(nb, lambda w: w[0], spec.alphabet, spec.alphabet, "identity")


def apply_code(code: BlockCode, spec: ShiftSpec, pattern: Pattern) -> Pattern:
    """Image of pattern on the eroded support {c : c + N within support}."""
    offs = code.neighborhood.cells
    out = []
    for c in pattern.cells():
        window = []
        for o in offs:
            s = pattern.get(add(c, o))
            if s is None:
                break
            window.append(s)
        else:
            out.append((c, code.rule(tuple(window))))
    if not out:
        raise SupportTooSmall("pattern support is too small for the code's neighborhood")
    return Pattern(out, pattern.dim)


def one_block_code_from_attr(spec: ShiftSpec, key: str, name: str) -> BlockCode:
    """1-block code sending each symbol to the value of one of its attributes."""
    images: list[str] = []
    table = []
    for s in range(spec.k):
        v = spec.alphabet.attr(s, key)
        if v is None:
            raise InvalidInput(f"symbol {spec.alphabet.names[s]} has no {key!r} attribute")
        v = str(v)
        if v not in images:
            images.append(v)
        table.append(images.index(v))
    tbl = tuple(table)
    nb = Support([(0,) * spec.dimension])
    return BlockCode(nb, lambda w: tbl[w[0]], spec.alphabet, Alphabet(tuple(images)), name)


class SoficShift:
    """Image of an SFT under a 1-block code.

    Patterns are written over the image alphabet; searches run on the cover
    with each cell restricted to the fibre of its image symbol.
    """

    def __init__(self, cover: ShiftSpec, code: BlockCode, name: str):
        if len(code.neighborhood) != 1:
            raise InvalidInput("only 1-block codes are supported for sofic shifts")
        self.cover = cover
        self.code = code
        self.name = name
        self.dimension = cover.dimension
        self.alphabet = code.target
        fib = [0] * len(code.target)
        for s in range(cover.k):
            fib[code.rule((s,))] |= 1 << s
        self.fibers = tuple(fib)

    @property
    def k(self) -> int:
        return len(self.alphabet)

    def image(self, p: Pattern) -> Pattern:
        return apply_code(self.code, self.cover, p)

    def image_torus(self, t: TorusConfig) -> TorusConfig:
        return TorusConfig(t.periods, [self.code.rule((s,)) for s in t.data])


# ---------------------------------------------------------------- simple shifts


def build_full_shift(k: int = 2, d: int = 1) -> ShiftSpec:
    if k < 1:
        raise InvalidInput("full shift needs k >= 1")
    return ShiftSpec(f"full-{k}-shift-d{d}", d, Alphabet(tuple(str(i) for i in range(k))), (), (1,) * d)


def full_shift(k: int = 2, d: int = 1) -> ShiftSpec:
    return build_full_shift(k, d)


def build_golden_mean() -> ShiftSpec:
    return ShiftSpec(
        "golden-mean", 1, Alphabet(("0", "1")),
        (ForbiddenPattern((((0,), 2), ((1,), 2))),), (1,),
        doc=("Golden mean shift: binary sequences without two adjacent 1s.",),
    )


def build_hard_squares() -> ShiftSpec:
    return ShiftSpec(
        "hard-squares", 2, Alphabet(("0", "1")),
        (ForbiddenPattern((((0, 0), 2), ((1, 0), 2))), ForbiddenPattern((((0, 0), 2), ((0, 1), 2)))),
        (1, 1),
        doc=("Hard squares: no two 1s horizontally or vertically adjacent.",),
    )


def build_golden_mean_rows() -> ShiftSpec:
    """Z^2 shift constant along x and golden mean along y (entropy calibration)."""
    return ShiftSpec(
        "golden-mean-rows", 2, Alphabet(("0", "1")),
        (
            ForbiddenPattern((((0, 0), 1), ((1, 0), 2))),
            ForbiddenPattern((((0, 0), 2), ((1, 0), 1))),
            ForbiddenPattern((((0, 0), 2), ((0, 1), 2))),
        ),
        (1, 1),
        doc=("Rows constant along x; golden mean along y.",),
    )


class SunnySideUp(CustomValidator):
    """At most one 1 anywhere; extending by 0 keeps a pattern valid."""

    name = "sunny-side-up"
    fill = 0

    def check(self, assignment: Mapping[Coord, int]) -> bool:
        ones = 0
        for s in assignment.values():
            if s == 1:
                ones += 1
                if ones > 1:
                    return False
        return True

    def check_torus(self, torus: TorusConfig) -> bool:
        # a periodic point with a 1 has infinitely many
        return all(s == 0 for s in torus.data)


register_validator(SunnySideUp.name, SunnySideUp)


def build_sunny_side_up(d: int = 1) -> ShiftSpec:
    return ShiftSpec(
        "sunny-side-up" if d == 1 else f"sunny-side-up-d{d}", d, Alphabet(("0", "1")), (), (1,) * d,
        doc=("Sunny-side-up: at most one 1 in the whole configuration (not of finite type).",),
        validator=SunnySideUp(),
    )


# ---------------------------------------------------------------- worm precursor


# name: (faces W, E, S, N; image symbol); face labels n = none, b = blue, r = red
_WORM_TILES = (
    ("white", ("n", "n", "n", "n"), "white"),
    ("lineB", ("n", "n", "b", "b"), "line"),
    ("lineR", ("n", "n", "r", "r"), "line"),
    ("cornerRD", ("n", "b", "r", "n"), "cornerSE"),
    ("cornerRU", ("n", "r", "n", "r"), "cornerNE"),
    ("cornerBD", ("r", "n", "b", "n"), "cornerSW"),
    ("cornerBU", ("b", "n", "n", "b"), "cornerNW"),
)


def build_worm_precursor_wang() -> ShiftSpec:
    names = tuple(t[0] for t in _WORM_TILES)
    faces = tuple(t[1] for t in _WORM_TILES)
    attrs = tuple(
        (("image", t[2]), ("color", _worm_color(t[0]))) for t in _WORM_TILES
    )
    return ShiftSpec(
        "worm-precursor", 2, Alphabet(names, faces, attrs), (), (1, 1), wang_mode=True,
        doc=(
            "Worm precursor: 7 Wang tiles, faces listed as W,E,S,N.",
            "Labels: n = no line, b = blue line, r = red line at the edge midpoint.",
            "A worm runs red in its left column and blue in its right column;",
            "horizontal jogs use the pairs (cornerRD, cornerBU) and (cornerRU, cornerBD).",
            "The image attribute is the colour-erasing factor map onto the Worm Shift.",
        ),
    )


def _worm_color(name: str) -> str:
    if name == "white":
        return "none"
    if name.startswith("line"):
        return "blue" if name.endswith("B") else "red"
    return "red" if name[6] == "R" else "blue"


# ---------------------------------------------------------------- X_struct

_COLOR = "br"  # 0 = blue, 1 = red


def _edge(*parts) -> str:
    return "-".join(p if isinstance(p, str) else _COLOR[p] for p in parts)


def x_struct_tiles() -> list[tuple[str, tuple[str, str, str, str], dict]]:
    """The tile table: (name, faces W,E,S,N, attributes).

    Wire edges list their segments bottom-to-top on vertical faces and
    left-to-right on horizontal faces; G and W are gray and white stretches.
    """
    W, G = "W", "G"
    tiles = [
        ("white", (W, W, W, W), {"kind": "white"}),
        ("gray", (G, G, G, G), {"kind": "gray"}),
        ("diag", (G, W, W, G), {"kind": "diag"}),
    ]

    def wire(name, faces, sw, se, nw, ne, shape):
        tiles.append((name, faces, {"kind": "wire", "shape": shape, "SW": sw, "SE": se, "NW": nw, "NE": ne}))

    c2 = list(itertools.product((0, 1), repeat=2))
    c3 = list(itertools.product((0, 1), repeat=3))
    for a, b in c2:
        wire(f"V.{_COLOR[a]}{_COLOR[b]}", (W, G, _edge(W, a, b, G), _edge(W, a, b, G)), a, b, a, b, "V")
    for a, b in c2:
        wire(f"H.{_COLOR[a]}{_COLOR[b]}", (_edge(G, a, b, W), _edge(G, a, b, W), G, W), a, a, b, b, "H")
    for a, b, c, d in itertools.product((0, 1), repeat=4):
        wire(f"X.{_COLOR[a]}{_COLOR[b]}{_COLOR[c]}{_COLOR[d]}",
             (_edge(G, a, b, W), _edge(G, c, d, W), _edge(W, a, c, G), _edge(W, b, d, G)), a, c, b, d, "X")
    for s, b, d in c3:
        wire(f"T7.{_COLOR[s]}{_COLOR[b]}{_COLOR[d]}",
             (_edge(G, s, b, W), _edge(G, s, d, W), G, _edge(W, b, d, G)), s, s, b, d, "T7")
    for a, c, s in c3:
        wire(f"T8.{_COLOR[a]}{_COLOR[c]}{_COLOR[s]}",
             (_edge(G, a, s, W), _edge(G, c, s, W), _edge(W, a, c, G), W), a, c, s, s, "T8")
    for s, c, d in c3:
        wire(f"T9.{_COLOR[s]}{_COLOR[c]}{_COLOR[d]}",
             (W, _edge(G, c, d, W), _edge(W, s, c, G), _edge(W, s, d, G)), s, c, s, d, "T9")
    for a, b, s in c3:
        wire(f"T10.{_COLOR[a]}{_COLOR[b]}{_COLOR[s]}",
             (_edge(G, a, b, W), G, _edge(W, a, s, G), _edge(W, b, s, G)), a, s, b, s, "T10")
    return tiles


_ATTR_ORDER = ("kind", "shape", "SW", "SE", "NW", "NE")


def build_x_struct_wang() -> ShiftSpec:
    tiles = x_struct_tiles()
    names = tuple(t[0] for t in tiles)
    faces = tuple(t[1] for t in tiles)
    attrs = tuple(tuple((k, t[2][k]) for k in _ATTR_ORDER if k in t[2]) for t in tiles)
    return ShiftSpec(
        "x-struct", 2, Alphabet(names, faces, attrs), (), (1, 1), wang_mode=True,
        doc=(
            "X_struct: 59 Wang tiles (white, gray, diagonal and 56 wire tiles). Faces: W,E,S,N.",
            "Edge labels: W white, G gray; wire edges are '-'-joined stretches,",
            "bottom-to-top on vertical faces and left-to-right on horizontal faces,",
            "with b = blue wire and r = red wire.",
            "Every region is a square split by its SW-NE diagonal: gray above-left, white below-right.",
            "Wire shapes: V vertical pair, H horizontal pair, X cross of four L pieces,",
            "T7/T8 a horizontal straight wire plus two L pieces above/below,",
            "T9/T10 a vertical straight wire plus two L pieces right/left.",
            "Corner values SW, SE, NW, NE: 0 = blue, 1 = red.",
        ),
    )


# ---------------------------------------------------------------- Good Wave Shift


def build_good_wave() -> ShiftSpec:
    """Z^3 shift over (X_struct tile) x (empty e / cube c), rules compiled to cylinders."""
    xs = compile_wang(build_x_struct_wang())
    base = xs.alphabet
    nt = len(base)
    names = []
    attrs = []
    for t in range(nt):
        for cube in (0, 1):
            names.append(f"{base.names[t]}/{'c' if cube else 'e'}")
            attrs.append(base.attrs[t] + (("cube", cube),))  # type: ignore[index]
    alpha = Alphabet(tuple(names), None, tuple(attrs))

    def sym(t: int, cube: int) -> int:
        return 2 * t + cube

    def lift(tile_mask: int, cubes=(0, 1)) -> int:
        m = 0
        for t in range(nt):
            if (tile_mask >> t) & 1:
                for cb in cubes:
                    m |= 1 << sym(t, cb)
        return m

    all_tiles = (1 << nt) - 1
    white_t = 1 << base.index("white")
    nonwhite_t = all_tiles & ~white_t
    wire_t = base.mask_of(lambda t: base.attr(t, "kind") == "wire")

    def wire_where(**cond) -> int:
        return base.mask_of(lambda t: base.attr(t, "kind") == "wire"
                            and all(base.attr(t, k) == v for k, v in cond.items()))

    CUBE = lift(all_tiles, (1,))
    EMPTY = lift(all_tiles, (0,))
    NONWHITE = lift(nonwhite_t)
    classes = [("cube", CUBE), ("empty", EMPTY), ("nonwhite", NONWHITE)]

    rules: list[ForbiddenPattern] = []
    o = (0, 0, 0)

    def rule(label, *cells):
        acc: dict[Coord, int] = {}
        for c, m in cells:
            acc[c] = acc.get(c, -1) & m
        if any(m == 0 for m in acc.values()):
            raise AssertionError(f"rule {label} can never fire")
        rules.append(ForbiddenPattern(tuple(acc.items()), label))

    # rule 1: each z-plane is an X_struct configuration
    for fp in xs.forbidden:
        rule(fp.label, *(((c[0], c[1], 0), lift(m)) for c, m in fp.cells))
    # rule 2: a non-white tile forces white at z+1 and z+2
    for dz in (1, 2):
        rule(f"tiles-above{dz}", (o, NONWHITE), ((0, 0, dz), NONWHITE))
    # rule 3: a cube forces empty at z+1 and z+2
    for dz in (1, 2):
        rule(f"cubes-above{dz}", (o, CUBE), ((0, 0, dz), CUBE))
    # rule 4: exactly one cube among the three z-offsets of each lateral neighbour
    for axis in (0, 1):
        for sign in (1, -1):
            e = unit(3, axis, sign)
            tag = ("x", "y")[axis] + ("+" if sign > 0 else "-")
            nbr = [add(e, (0, 0, dz)) for dz in (-1, 0, 1)]
            rule(f"neighbour-none{tag}", (o, CUBE), *((c, EMPTY) for c in nbr))
            for c1, c2 in itertools.combinations(nbr, 2):
                rule(f"neighbour-two{tag}", (o, CUBE), (c1, CUBE), (c2, CUBE))
    # rule 5: a non-white tile needs a cube at z or z+1
    rule("tile-needs-cube", (o, NONWHITE & EMPTY), ((0, 0, 1), EMPTY))
    # rule 6: corner values place the cubes around a wire tile
    for corner, (dx, dy) in (("SW", (0, 0)), ("SE", (1, 0)), ("NW", (0, 1)), ("NE", (1, 1))):
        for v in (0, 1):
            rule(f"corner-{corner}{v}", (o, lift(wire_where(**{corner: v}))), ((dx, dy, v), EMPTY))
    # rule 7: a height step between lateral neighbours needs the matching wire tile
    steps = (
        ("step-x-up", (1, 0, 1), (0, 0, 0), wire_where(SW=0, SE=1)),
        ("step-x-down", (1, 0, -1), (0, 0, -1), wire_where(SW=1, SE=0)),
        ("step-y-up", (0, 1, 1), (0, 0, 0), wire_where(SW=0, NW=1)),
        ("step-y-down", (0, 1, -1), (0, 0, -1), wire_where(SW=1, NW=0)),
    )
    for label, nb, tile_at, good in steps:
        rule(label, (o, CUBE), (nb, CUBE), (tile_at, lift(all_tiles & ~good)))
    assert wire_t
    return ShiftSpec(
        "good-wave", 3, alpha, tuple(rules), (1, 1, 2), classes=tuple(classes),
        doc=(
            "Good Wave Shift: Z^3 over (X_struct tile)/(e empty | c cube).",
            "Rule families (labels): wang* per-plane tile matching; tiles-above*: non-white",
            "forces white at z+1, z+2; cubes-above*: cube forces empty at z+1, z+2;",
            "neighbour-none*/neighbour-two*: exactly one cube among z-1..z+1 of each lateral",
            "neighbour of a cube; tile-needs-cube: non-white needs a cube at z or z+1;",
            "corner-*: a wire tile puts cubes at its corners at height z + corner value;",
            "step-*: a height step between lateral neighbours needs the matching wire tile.",
        ),
    )


# ---------------------------------------------------------------- shipped files

_DATA_BUILDERS: dict[str, Callable[[], ShiftSpec]] = {
    "golden-mean": build_golden_mean,
    "hard-squares": build_hard_squares,
    "golden-mean-rows": build_golden_mean_rows,
    "sunny-side-up": build_sunny_side_up,
    "worm-precursor": build_worm_precursor_wang,
    "x-struct": build_x_struct_wang,
    "good-wave": build_good_wave,
}


def data_file_name(name: str) -> str:
    return f"{name}.v1.sft"


def shipped_text(name: str) -> str:
    return resources.files("sftkit").joinpath("data", data_file_name(name)).read_text(encoding="utf-8")


@functools.lru_cache(maxsize=None)
def load_shipped(name: str) -> ShiftSpec:
    """Load a shipped spec; Wang-mode files are compiled on load."""
    if name not in _DATA_BUILDERS:
        raise InvalidInput(f"no shipped shift named {name!r}")
    spec = loads_spec(shipped_text(name))
    return compile_wang(spec) if spec.wang_mode else spec


def regenerate(directory) -> list[str]:
    import os

    written = []
    for name, builder in _DATA_BUILDERS.items():
        path = os.path.join(directory, data_file_name(name))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps_spec(builder()))
        written.append(path)
    return written


def golden_mean() -> ShiftSpec:
    return load_shipped("golden-mean")


def hard_squares() -> ShiftSpec:
    return load_shipped("hard-squares")


def golden_mean_rows() -> ShiftSpec:
    return load_shipped("golden-mean-rows")


def sunny_side_up() -> ShiftSpec:
    return load_shipped("sunny-side-up")


def worm_precursor() -> ShiftSpec:
    return load_shipped("worm-precursor")


def worm_shift_code() -> BlockCode:
    return one_block_code_from_attr(worm_precursor(), "image", "erase-colour")


@functools.lru_cache(maxsize=None)
def worm_shift() -> SoficShift:
    return SoficShift(worm_precursor(), worm_shift_code(), "worm-shift")


def x_struct() -> ShiftSpec:
    return load_shipped("x-struct")


def good_wave() -> ShiftSpec:
    return load_shipped("good-wave")


BUILTIN = {
    "golden-mean": golden_mean,
    "hard-squares": hard_squares,
    "golden-mean-rows": golden_mean_rows,
    "sunny-side-up": sunny_side_up,
    "worm-precursor": worm_precursor,
    "worm-shift": worm_shift,
    "x-struct": x_struct,
    "good-wave": good_wave,
}


def builtin(name: str):
    """Named shift lookup used by the CLI (also accepts full-K-shift-dD)."""
    if name in BUILTIN:
        return BUILTIN[name]()
    if name.startswith("full-"):
        try:
            _, k, rest = name.split("-", 2)
            d = int(rest.split("-d")[1]) if "-d" in rest else 1
            return full_shift(int(k), d)
        except (ValueError, IndexError):
            pass
    raise InvalidInput(f"unknown shift {name!r}")


# ---------------------------------------------------------------- handy configurations


def gw_symbol(spec: ShiftSpec, tile: str, cube: bool) -> int:
    return spec.alphabet.index(f"{tile}/{'c' if cube else 'e'}")


def flat_wave_torus(periods, level: int = 0, spec: ShiftSpec | None = None) -> TorusConfig:
    """X_GW torus with white tiles everywhere and cubes exactly on plane ``level``."""
    spec = spec or good_wave()
    blank = gw_symbol(spec, "white", False)
    cube = gw_symbol(spec, "white", True)
    pz = periods[2]
    return TorusConfig.from_function(periods, lambda c: cube if (c[2] - level) % pz == 0 else blank)


def blank_pattern(spec: ShiftSpec, support: Support) -> Pattern:
    return Pattern.constant(support, 0)


def straight_worm(spec: ShiftSpec, column: int, color: str, support: Support) -> Pattern:
    """Precursor pattern with one straight worm line in ``column``."""
    line = spec.alphabet.index("lineB" if color == "blue" else "lineR")
    white = spec.alphabet.index("white")
    return Pattern(((c, line if c[0] == column else white) for c in support), support.dim)


def main(argv=None) -> int:
    import argparse
    import os

    ap = argparse.ArgumentParser(prog="python -m sftkit.zoo")
    ap.add_argument("--regenerate", action="store_true", help="rewrite the shipped data files")
    args = ap.parse_args(argv)
    if args.regenerate:
        here = os.path.join(os.path.dirname(__file__), "data")
        os.makedirs(here, exist_ok=True)
        for p in regenerate(here):
            print(p)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())


__all__ = [
    "BlockCode", "SoficShift", "SunnySideUp", "SupportTooSmall", "apply_code", "build_good_wave",
    "build_x_struct_wang", "builtin", "flat_wave_torus", "full_shift", "golden_mean", "golden_mean_rows",
    "good_wave", "hard_squares", "identity_code", "load_shipped", "straight_worm", "sunny_side_up",
    "worm_precursor", "worm_shift", "worm_shift_code", "x_struct", "x_struct_tiles", "box",
]

"""Deterministic SVG and PPM renders of 2D patterns and 3D z-slice sheets.

Glyphs follow the symbol names and face labels:

* Wang tiles with multi-segment faces (wire tiles) draw each wire piece as
  an axis-aligned path in its segment colour over a white/gray ground;
* other Wang tiles draw a stub from every non-ground face to the centre;
* worm image symbols (``line``, ``cornerXY``) draw strokes to the named faces;
* ``tile/c`` symbols overlay a cube, red when it lies on a wave crest;
* anything else is a flat colour from a fixed palette.
"""

from __future__ import annotations

from .core import InvalidInput, Pattern, TorusConfig

CELL = 24
GAP = 12
LABEL = 16

PALETTE = ("#ffffff", "#1f1f1f", "#3b6fd8", "#d83b3b", "#3bb273", "#e0a030", "#8e44ad", "#16a5a5",
           "#7f7f7f", "#c27ba0")
SEGMENT = {"b": "#2057c8", "r": "#d02020"}
GROUND = {"W": "#ffffff", "G": "#b8b8b8"}
CUBE = "#404040"
CREST = "#e02020"
STROKE = "#202020"


class UnsupportedDimension(InvalidInput):
    pass


def _hex(c: str) -> tuple[int, int, int]:
    return int(c[1:3], 16), int(c[3:5], 16), int(c[5:7], 16)


# ---------------------------------------------------------------- glyphs
# Primitives are in cell-local integer pixels with y growing downwards:
# ("rect", x, y, w, h, colour) and ("tri", ((x, y), (x, y), (x, y)), colour).


def _face_point(face: int, frac: float) -> tuple[int, int]:
    """Point on face W/E/S/N at fraction ``frac`` (bottom-to-top, left-to-right)."""
    t = int(round(frac * CELL))
    return {0: (0, CELL - t), 1: (CELL, CELL - t), 2: (t, CELL), 3: (t, 0)}[face]


def _seg(a, b, colour: str, width: int = 3) -> list[tuple]:
    (x0, y0), (x1, y1) = a, b
    h = width // 2
    if y0 == y1:
        x0, x1 = sorted((x0, x1))
        return [("rect", x0, y0 - h, x1 - x0 + width - h, width, colour)]
    y0, y1 = sorted((y0, y1))
    return [("rect", x0 - h, y0, width, y1 - y0 + width - h, colour)]


def _path(a, b, faces, colour: str) -> list[tuple]:
    """Axis-aligned path between two face points (an L or a Z shape)."""
    (fa, pa), (fb, pb) = (faces[0], a), (faces[1], b)
    if fa in (0, 1) and fb in (0, 1):
        mid = CELL // 2
        return _seg(pa, (mid, pa[1]), colour) + _seg((mid, pa[1]), (mid, pb[1]), colour) + \
            _seg((mid, pb[1]), pb, colour)
    if fa in (2, 3) and fb in (2, 3):
        mid = CELL // 2
        return _seg(pa, (pa[0], mid), colour) + _seg((pa[0], mid), (pb[0], mid), colour) + \
            _seg((pb[0], mid), pb, colour)
    if fa in (0, 1):
        corner = (pb[0], pa[1])
    else:
        corner = (pa[0], pb[1])
    return _seg(pa, corner, colour) + _seg(corner, pb, colour)


def _stub(face: int, colour: str) -> list[tuple]:
    c = CELL // 2
    return _seg(_face_point(face, 0.5), (c, c), colour, 4)


class _Glyphs:
    def __init__(self, spec):
        self.spec = spec
        al = spec.alphabet
        self.names = al.names
        self.faces = getattr(al, "faces", None)
        self.cache: dict[tuple[int, bool], list[tuple]] = {}
        ground = set()
        if self.faces:
            for fs in self.faces:
                if len(set(fs)) == 1:
                    ground.add(fs[0])
        self.ground = ground
        labels = sorted({lab for fs in self.faces or () for lab in fs if "-" not in lab} - ground)
        self.label_colour = {lab: SEGMENT.get(lab, PALETTE[2 + i % (len(PALETTE) - 2)])
                             for i, lab in enumerate(labels)}

    def glyph(self, s: int, crest: bool = False) -> list[tuple]:
        key = (s, crest)
        if key not in self.cache:
            self.cache[key] = self._build(s, crest)
        return self.cache[key]

    def _build(self, s: int, crest: bool) -> list[tuple]:
        name = self.names[s]
        cube = False
        if "/" in name:
            name, flag = name.rsplit("/", 1)
            cube = flag == "c"
        out = self._tile(name, s)
        if cube:
            q = CELL // 4
            out.append(("rect", q, q, CELL - 2 * q, CELL - 2 * q, STROKE))
            out.append(("rect", q + 2, q + 2, CELL - 2 * q - 4, CELL - 2 * q - 4, CREST if crest else CUBE))
        return out

    def _tile(self, name: str, s: int) -> list[tuple]:
        if "/" in self.names[s]:
            faces = _tile_faces(name)
        else:
            faces = self.faces[s] if self.faces else None
        if faces is None:
            return self._named(name, s)
        if any("-" in lab for lab in faces) or all(lab in GROUND for lab in faces):
            return _wire_tile(name, faces)
        out = [("rect", 0, 0, CELL, CELL, "#ffffff")]
        for fi, lab in enumerate(faces):
            if lab not in self.ground:
                out += _stub(fi, self.label_colour.get(lab, STROKE))
        return out

    def _named(self, name: str, s: int) -> list[tuple]:
        out = [("rect", 0, 0, CELL, CELL, "#ffffff")]
        if name == "line":
            return out + _stub(2, STROKE) + _stub(3, STROKE)
        if name.startswith("corner") and len(name) == 8:
            idx = {"W": 0, "E": 1, "S": 2, "N": 3}
            for ch in name[6:]:
                out += _stub(idx[ch], STROKE)
            return out
        if name == "white":
            return out
        return [("rect", 0, 0, CELL, CELL, PALETTE[s % len(PALETTE)])]


_XS_FACES: dict[str, tuple] | None = None


def _tile_faces(tile: str):
    """Faces of an X_struct tile by name (for X_GW symbols, which carry no faces)."""
    global _XS_FACES
    if _XS_FACES is None:
        from . import zoo

        _XS_FACES = {nm: f for nm, f, _ in zoo.x_struct_tiles()}
    return _XS_FACES.get(tile)


def _wire_tile(name: str, faces) -> list[tuple]:
    ground = [("rect", 0, 0, CELL, CELL, GROUND["W"])]
    kinds = [lab.split("-") for lab in faces]
    plain = [k[0] for k in kinds if len(k) == 1]
    if name == "diag":
        ground.append(("tri", ((0, 0), (CELL, 0), (0, CELL)), GROUND["G"]))
    elif plain and all(p == "G" for p in plain) and len(plain) == 4:
        ground = [("rect", 0, 0, CELL, CELL, GROUND["G"])]
    elif "." in name:
        # gray on the side named G; wire tiles have one or two gray faces
        for fi, parts in enumerate(kinds):
            if parts == ["G"]:
                h = CELL // 2
                ground.append({0: ("rect", 0, 0, h, CELL, GROUND["G"]), 1: ("rect", h, 0, CELL - h, CELL, GROUND["G"]),
                               2: ("rect", 0, h, CELL, CELL - h, GROUND["G"]), 3: ("rect", 0, 0, CELL, h, GROUND["G"])}[fi])
    out = list(ground)
    if "." not in name:
        return out
    pieces = _pair_slots(name)
    for colour, (a, b) in pieces:
        pa = _face_point(a[0], (a[1] + 0.5) / a[2])
        pb = _face_point(b[0], (b[1] + 0.5) / b[2])
        out += _path(pa, pb, (a[0], b[0]), SEGMENT[colour])
    return out


def _pair_slots(name: str):
    """Match face slots into wire pieces using the colour-flip trick on names."""
    shape, cols = name.split(".")
    base = _tile_faces(name)
    out = []
    for j, c in enumerate(cols):
        flip = cols[:j] + ("r" if c == "b" else "b") + cols[j + 1:]
        other = _tile_faces(f"{shape}.{flip}")
        ends = []
        for fi, (f1, f2) in enumerate(zip(base, other)):
            p1, p2 = f1.split("-"), f2.split("-")
            for si, (x, y) in enumerate(zip(p1, p2)):
                if x != y:
                    ends.append((fi, si, len(p1)))
        for e in ends[1:]:
            out.append((c, (ends[0], e)))
    return out


# ---------------------------------------------------------------- scenes


def _cells_2d(obj):
    if isinstance(obj, TorusConfig):
        return obj.as_pattern()
    return obj


def _sheets(obj, planes):
    """List of (title, {(x, y): symbol}, {(x, y)} crest) per sheet."""
    p = _cells_2d(obj)
    if p.dim == 2:
        return [("", {c: s for c, s in p.items()})]
    if p.dim != 3:
        raise UnsupportedDimension(f"cannot render dimension {p.dim}")
    zs = sorted({c[2] for c in p.cells()})
    if planes is not None:
        zs = [z for z in planes if z in set(zs)] if not isinstance(obj, TorusConfig) else list(planes)
    out = []
    for z in zs:
        if isinstance(obj, TorusConfig):
            lo = obj.lo()
            sheet = {(x, y): obj[(x, y, z)] for x in range(lo[0], lo[0] + obj.periods[0])
                     for y in range(lo[1], lo[1] + obj.periods[1])}
        else:
            sheet = {(c[0], c[1]): s for c, s in p.items() if c[2] == z}
        out.append((f"z={z}", sheet))
    return out


def default_planes(spec, t: TorusConfig) -> list[int] | None:
    """Four planes around the first wave of an X_GW torus (its crest view)."""
    if t.dim != 3 or not spec.alphabet.names[0].endswith("/e"):
        return None
    from .claims import extract_waves

    waves = extract_waves(t, spec)
    if not waves:
        return None
    k = waves[0].base
    return [k - 2, k - 1, k, k + 1]


def _crest_cells(spec, obj) -> set:
    if not isinstance(obj, TorusConfig) or obj.dim != 3 or not spec.alphabet.names[0].endswith("/e"):
        return set()
    from .claims import extract_waves

    out = set()
    for w in extract_waves(obj, spec):
        if w.amplitude > 0:
            out.update(obj.wrap(c) for c in w.crest)
    return out


def scene(spec, obj, planes=None):
    """Primitives in page pixels plus the page size."""
    if isinstance(obj, TorusConfig) and obj.dim == 3 and planes is None:
        planes = default_planes(spec, obj)
    crest = _crest_cells(spec, obj)
    wrap = obj.wrap if isinstance(obj, TorusConfig) else (lambda c: c)
    sheets = _sheets(obj, planes)
    glyphs = _Glyphs(spec)
    prims = []
    texts = []
    x_off = 0
    height = 0
    top = LABEL if len(sheets) > 1 else 0
    for title, cells in sheets:
        xs = [c[0] for c in cells]
        ys = [c[1] for c in cells]
        if not cells:
            continue
        x0, y1 = min(xs), max(ys)
        w = (max(xs) - x0 + 1) * CELL
        h = (y1 - min(ys) + 1) * CELL
        z = int(title[2:]) if title else None
        for (x, y), s in sorted(cells.items()):
            px = x_off + (x - x0) * CELL
            py = top + (y1 - y) * CELL
            on_crest = z is not None and wrap((x, y, z)) in crest
            for prim in glyphs.glyph(s, on_crest):
                if prim[0] == "rect":
                    prims.append(("rect", px + prim[1], py + prim[2], prim[3], prim[4], prim[5]))
                else:
                    prims.append(("tri", tuple((px + a, py + b) for a, b in prim[1]), prim[2]))
        if title:
            texts.append((x_off + 2, LABEL - 4, title))
        x_off += w + GAP
        height = max(height, top + h)
    return prims, texts, max(x_off - GAP, 1), max(height, 1)


def render_svg(spec, obj, planes=None) -> str:
    prims, texts, W, H = scene(spec, obj, planes)
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
             f'<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>']
    for p in prims:
        if p[0] == "rect":
            lines.append(f'<rect x="{p[1]}" y="{p[2]}" width="{p[3]}" height="{p[4]}" fill="{p[5]}"/>')
        else:
            pts = " ".join(f"{a},{b}" for a, b in p[1])
            lines.append(f'<polygon points="{pts}" fill="{p[2]}"/>')
    for x, y, t in texts:
        lines.append(f'<text x="{x}" y="{y}" font-family="monospace" font-size="12">{t}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _inside(tri, x: float, y: float) -> bool:
    (ax, ay), (bx, by), (cx, cy) = tri
    d1 = (x - bx) * (ay - by) - (ax - bx) * (y - by)
    d2 = (x - cx) * (by - cy) - (bx - cx) * (y - cy)
    d3 = (x - ax) * (cy - ay) - (cx - ax) * (y - ay)
    neg = d1 < 0 or d2 < 0 or d3 < 0
    pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (neg and pos)


def render_ppm(spec, obj, planes=None) -> bytes:
    """Binary PPM (P6); sheet titles are omitted."""
    import numpy as np

    prims, _, W, H = scene(spec, obj, planes)
    img = np.full((H, W, 3), 255, dtype=np.uint8)
    for p in prims:
        if p[0] == "rect":
            _, x, y, w, h, c = p
            img[max(y, 0):max(y + h, 0), max(x, 0):max(x + w, 0)] = _hex(c)
        else:
            tri, c = p[1], _hex(p[2])
            xs = [a for a, _ in tri]
            ys = [b for _, b in tri]
            for y in range(min(ys), max(ys)):
                for x in range(min(xs), max(xs)):
                    if _inside(tri, x + 0.5, y + 0.5):
                        img[y, x] = c
    return f"P6\n{W} {H}\n255\n".encode() + img.tobytes()


def render(spec, obj: Pattern | TorusConfig, fmt: str = "svg", planes=None) -> bytes:
    if fmt == "svg":
        return render_svg(spec, obj, planes).encode()
    if fmt == "ppm":
        return render_ppm(spec, obj, planes)
    raise InvalidInput(f"unknown render format {fmt!r}")


__all__ = ["UnsupportedDimension", "default_planes", "render", "render_ppm", "render_svg", "scene"]

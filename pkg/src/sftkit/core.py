"""Lattice geometry, alphabets, shift specifications and local validity.

Forbidden patterns are stored as *cylinders*: each cell of a forbidden
pattern carries a set of symbols (a bitmask) instead of a single symbol.
A placement is a violation when every cell's symbol lies in its set.  A
cylinder with singleton sets is an ordinary forbidden pattern; wider sets
keep rule families such as "a non-white tile below a non-white tile"
compact.  ``ForbiddenPattern.expand`` recovers the explicit patterns.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

Coord = tuple[int, ...]

FORMAT_VERSION = 1


class SftError(Exception):
    """Base class for all library errors."""


class InvalidInput(SftError):
    pass


class SpecFormatError(InvalidInput):
    pass


class MissingFaceLabels(InvalidInput):
    pass


class SymbolOutOfRange(InvalidInput):
    pass


# ---------------------------------------------------------------- geometry


def add(a: Coord, b: Coord) -> Coord:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Coord, b: Coord) -> Coord:
    return tuple(x - y for x, y in zip(a, b))


def neg(a: Coord) -> Coord:
    return tuple(-x for x in a)


def unit(d: int, axis: int, sign: int = 1) -> Coord:
    return tuple(sign if i == axis else 0 for i in range(d))


class Support:
    """Finite set of lattice cells kept in lexicographic order."""

    __slots__ = ("cells", "_set", "dim")

    def __init__(self, cells: Iterable[Coord], dim: int | None = None):
        cs = sorted({tuple(c) for c in cells})
        dims = {len(c) for c in cs}
        if len(dims) > 1:
            raise InvalidInput("cells of mixed dimension")
        if dim is None:
            if not dims:
                raise InvalidInput("empty support needs an explicit dimension")
            dim = dims.pop()
        elif dims and dims != {dim}:
            raise InvalidInput(f"cells are not {dim}-dimensional")
        self.cells: tuple[Coord, ...] = tuple(cs)
        self._set = frozenset(cs)
        self.dim = dim

    def __iter__(self) -> Iterator[Coord]:
        return iter(self.cells)

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, c) -> bool:
        return c in self._set

    def __eq__(self, other) -> bool:
        return isinstance(other, Support) and self.dim == other.dim and self.cells == other.cells

    def __hash__(self) -> int:
        return hash((self.dim, self.cells))

    def __repr__(self) -> str:
        if len(self.cells) <= 6:
            return f"Support({list(self.cells)})"
        return f"Support(<{len(self.cells)} cells, bounds {self.bounds()}>)"

    def translate(self, v: Coord) -> Support:
        return Support((add(c, v) for c in self.cells), self.dim)

    def union(self, other: Support) -> Support:
        return Support(itertools.chain(self.cells, other.cells), self.dim)

    def difference(self, other: Support) -> Support:
        return Support((c for c in self.cells if c not in other), self.dim)

    def issubset(self, other: Support) -> bool:
        return self._set <= other._set

    def bounds(self) -> tuple[Coord, Coord]:
        if not self.cells:
            raise InvalidInput("empty support has no bounds")
        lo = tuple(min(c[i] for c in self.cells) for i in range(self.dim))
        hi = tuple(max(c[i] for c in self.cells) for i in range(self.dim))
        return lo, hi

    def radius(self) -> int:
        """Smallest n with the support inside box(d, n)."""
        return max((max(abs(x) for x in c) for c in self.cells), default=0)

    def expand(self, m: int) -> Support:
        """Cells within sup-distance m of the support."""
        if m == 0:
            return self
        offs = list(itertools.product(range(-m, m + 1), repeat=self.dim))
        return Support((add(c, o) for c in self.cells for o in offs), self.dim)


def box(d: int, n: int) -> Support:
    if d < 1 or n < 0:
        raise InvalidInput(f"box needs d >= 1 and n >= 0, got d={d} n={n}")
    return Support(itertools.product(range(-n, n + 1), repeat=d), d)


def rect(lo: Coord, hi: Coord) -> Support:
    """The lattice rectangle lo <= c <= hi (inclusive)."""
    return Support(itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))), len(lo))


# ---------------------------------------------------------------- alphabet

_NAME_RE = re.compile(r"^[A-Za-z0-9_.+\-/*<>^~!?']+$")
Attr = int | str


@dataclass(frozen=True)
class Alphabet:
    names: tuple[str, ...]
    faces: tuple[tuple[str, ...], ...] | None = None
    attrs: tuple[tuple[tuple[str, Attr], ...], ...] | None = None

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise InvalidInput("duplicate symbol names")
        for nm in self.names:
            if not _NAME_RE.match(nm):
                raise InvalidInput(f"bad symbol name {nm!r}")
        if self.faces is not None and len(self.faces) != len(self.names):
            raise InvalidInput("face table length differs from symbol count")
        if self.attrs is not None and len(self.attrs) != len(self.names):
            raise InvalidInput("attribute table length differs from symbol count")
        object.__setattr__(self, "_index", {nm: i for i, nm in enumerate(self.names)})

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]  # type: ignore[attr-defined]
        except KeyError:
            raise SymbolOutOfRange(f"unknown symbol {name!r}") from None

    def attr(self, sym: int, key: str, default: Attr | None = None) -> Attr | None:
        if self.attrs is None:
            return default
        for k, v in self.attrs[sym]:
            if k == key:
                return v
        return default

    @property
    def full_mask(self) -> int:
        return (1 << len(self.names)) - 1

    def mask_of(self, pred: Callable[[int], bool]) -> int:
        m = 0
        for i in range(len(self.names)):
            if pred(i):
                m |= 1 << i
        return m


def mask_members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


# ---------------------------------------------------------------- patterns


class Pattern:
    """Immutable map from a finite support to symbol indices."""

    __slots__ = ("_cells", "dim", "_hash")

    def __init__(self, cells: Mapping[Coord, int] | Iterable[tuple[Coord, int]], dim: int | None = None):
        items = cells.items() if isinstance(cells, Mapping) else cells
        d: dict[Coord, int] = {}
        for c, s in items:
            d[tuple(c)] = int(s)
        if dim is None:
            if not d:
                raise InvalidInput("empty pattern needs an explicit dimension")
            dim = len(next(iter(d)))
        for c in d:
            if len(c) != dim:
                raise InvalidInput("pattern cells of mixed dimension")
        self._cells = dict(sorted(d.items()))
        self.dim = dim
        self._hash = None

    @property
    def support(self) -> Support:
        return Support(self._cells.keys(), self.dim)

    def items(self):
        return self._cells.items()

    def cells(self):
        return self._cells.keys()

    def symbols(self) -> tuple[int, ...]:
        return tuple(self._cells.values())

    def __getitem__(self, c: Coord) -> int:
        return self._cells[c]

    def get(self, c: Coord, default=None):
        return self._cells.get(c, default)

    def __contains__(self, c) -> bool:
        return c in self._cells

    def __len__(self) -> int:
        return len(self._cells)

    def __eq__(self, other) -> bool:
        return isinstance(other, Pattern) and self.dim == other.dim and self._cells == other._cells

    def __lt__(self, other: Pattern) -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self):
        return (tuple(self._cells.keys()), tuple(self._cells.values()))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.dim, tuple(self._cells.items())))
        return self._hash

    def __repr__(self) -> str:
        if len(self._cells) <= 8:
            return f"Pattern({self._cells})"
        return f"Pattern(<{len(self._cells)} cells>)"

    def translate(self, v: Coord) -> Pattern:
        return Pattern(((add(c, v), s) for c, s in self._cells.items()), self.dim)

    def restrict(self, support: Iterable[Coord]) -> Pattern:
        return Pattern(((c, self._cells[c]) for c in support if c in self._cells), self.dim)

    def merge(self, other: Pattern) -> Pattern:
        """Union of two patterns; they must agree on common cells."""
        out = dict(self._cells)
        for c, s in other.items():
            if out.setdefault(c, s) != s:
                raise InvalidInput(f"patterns disagree at {c}")
        return Pattern(out, self.dim)

    def map_symbols(self, f: Callable[[int], int]) -> Pattern:
        return Pattern(((c, f(s)) for c, s in self._cells.items()), self.dim)

    def differing_cells(self, other: Pattern) -> Support:
        cells = set(self._cells) | set(other._cells)
        return Support((c for c in cells if self.get(c) != other.get(c)), self.dim)

    @classmethod
    def constant(cls, support: Support, sym: int) -> Pattern:
        return cls(((c, sym) for c in support), support.dim)

    @classmethod
    def from_word(cls, word: Sequence[int], start: int = 0) -> Pattern:
        """One-dimensional helper: symbols placed at start, start+1, ..."""
        return cls((((start + i,), s) for i, s in enumerate(word)), 1)


def translate(p: Pattern, v: Coord) -> Pattern:
    return p.translate(v)


@dataclass(frozen=True)
class ForbiddenPattern:
    """A cylinder: cells (offset, symbol mask); forbidden when all cells match."""

    cells: tuple[tuple[Coord, int], ...]
    label: str | None = None

    def __post_init__(self):
        if not self.cells:
            raise InvalidInput("forbidden pattern with empty support")
        object.__setattr__(self, "cells", tuple(sorted(self.cells)))
        offs = [c for c, _ in self.cells]
        if len(set(offs)) != len(offs):
            raise InvalidInput("forbidden pattern repeats a cell")

    @property
    def dim(self) -> int:
        return len(self.cells[0][0])

    def extent(self) -> tuple[int, ...]:
        offs = [c for c, _ in self.cells]
        return tuple(max(o[i] for o in offs) - min(o[i] for o in offs) + 1 for i in range(self.dim))

    def expand(self) -> list[Pattern]:
        """The explicit patterns this cylinder stands for."""
        offs = [c for c, _ in self.cells]
        choices = [mask_members(m) for _, m in self.cells]
        return [Pattern(zip(offs, combo), self.dim) for combo in itertools.product(*choices)]

    def size(self) -> int:
        n = 1
        for _, m in self.cells:
            n *= m.bit_count()
        return n

    @classmethod
    def from_pattern(cls, p: Pattern, label: str | None = None) -> ForbiddenPattern:
        return cls(tuple((c, 1 << s) for c, s in p.items()), label)


# ---------------------------------------------------------------- specs


class CustomValidator:
    """Predicate-based shift presentation for subshifts not of finite type.

    Subclasses implement ``check`` (local validity of a finite pattern) and
    ``check_torus``.  ``check`` must be translation invariant and monotone
    under restriction.  When ``fill`` is set, every valid pattern extended by
    the fill symbol everywhere else is a point of the shift; open-window
    witnesses are then certifying.
    """

    name = "custom"
    fill: int | None = None

    def check(self, assignment: Mapping[Coord, int]) -> bool:
        raise NotImplementedError

    def check_torus(self, torus: TorusConfig) -> bool:
        raise NotImplementedError


_VALIDATORS: dict[str, Callable[[], CustomValidator]] = {}


def register_validator(name: str, factory: Callable[[], CustomValidator]) -> None:
    """Make a validator available to the spec loader under ``name``."""
    _VALIDATORS[name] = factory


@dataclass(frozen=True)
class ShiftSpec:
    name: str
    dimension: int
    alphabet: Alphabet
    forbidden: tuple[ForbiddenPattern, ...] = ()
    rule_radius: tuple[int, ...] = ()
    wang_mode: bool = False
    classes: tuple[tuple[str, int], ...] = ()
    doc: tuple[str, ...] = ()
    validator: CustomValidator | None = field(default=None, compare=False)

    def __post_init__(self):
        d = self.dimension
        if d < 1:
            raise InvalidInput("dimension must be >= 1")
        rr = self.rule_radius
        if not rr:
            rr = (1,) * d
        elif len(rr) == 1 and d > 1:
            rr = rr * d
        if len(rr) != d or any(r < 0 for r in rr):
            raise InvalidInput("rule_radius must give one non-negative entry per axis")
        object.__setattr__(self, "rule_radius", tuple(rr))
        object.__setattr__(self, "forbidden", tuple(self.forbidden))
        full = self.alphabet.full_mask
        for fp in self.forbidden:
            if fp.dim != d:
                raise InvalidInput("forbidden pattern dimension mismatch")
            for _, m in fp.cells:
                if m <= 0 or m & ~full:
                    raise SymbolOutOfRange("forbidden pattern uses a symbol outside the alphabet")
            ext = fp.extent()
            if any(e > 2 * r + 1 for e, r in zip(ext, rr)):
                raise InvalidInput(f"forbidden pattern extent {ext} exceeds rule radius {rr}")
        if self.wang_mode:
            _check_faces(self)

    @property
    def k(self) -> int:
        return len(self.alphabet)

    def span(self) -> tuple[int, ...]:
        """Largest extent of any rule along each axis (1 when there are none)."""
        out = [1] * self.dimension
        for fp in self.forbidden:
            for i, e in enumerate(fp.extent()):
                out[i] = max(out[i], e)
        return tuple(out)

    def class_mask(self, name: str) -> int:
        for nm, m in self.classes:
            if nm == name:
                return m
        raise InvalidInput(f"unknown symbol class {name!r}")

    def explicit_forbidden(self) -> list[Pattern]:
        return [p for fp in self.forbidden for p in fp.expand()]


def _check_faces(spec: ShiftSpec) -> None:
    faces = spec.alphabet.faces
    if faces is None:
        raise MissingFaceLabels("wang_mode set but the alphabet has no face labels")
    for nm, f in zip(spec.alphabet.names, faces):
        if f is None or len(f) != 2 * spec.dimension or any(x is None or x == "" for x in f):
            raise MissingFaceLabels(f"symbol {nm!r} lacks some of its {2 * spec.dimension} face labels")


def compile_wang(spec: ShiftSpec) -> ShiftSpec:
    """Replace face-label matching by forbidden dominoes.

    Face order is (towards -e_0, towards +e_0, towards -e_1, ...).  For each
    axis i and each label L on a +e_i face we forbid (+face = L) at 0 beside
    (-face != L) at +e_i; these cylinders are exactly the mismatched dominoes.
    """
    if not spec.wang_mode:
        raise InvalidInput("spec is not in wang mode")
    _check_faces(spec)
    faces = spec.alphabet.faces
    assert faces is not None
    d = spec.dimension
    zero = (0,) * d
    rules = list(spec.forbidden)
    for axis in range(d):
        labels = sorted({f[2 * axis + 1] for f in faces})
        for lab in labels:
            left = spec.alphabet.mask_of(lambda s: faces[s][2 * axis + 1] == lab)
            right = spec.alphabet.mask_of(lambda s: faces[s][2 * axis] != lab)
            if right:
                rules.append(ForbiddenPattern(((zero, left), (unit(d, axis), right)), f"wang{axis}:{lab}"))
    rr = tuple(max(r, 1) for r in spec.rule_radius)
    return ShiftSpec(spec.name, d, spec.alphabet, tuple(rules), rr, False, spec.classes, spec.doc, spec.validator)


def faces_match(spec: ShiftSpec, p: Pattern) -> bool:
    """Direct Wang check: every adjacent pair inside p has matching faces."""
    faces = spec.alphabet.faces
    if faces is None:
        raise MissingFaceLabels("alphabet has no face labels")
    for c, s in p.items():
        for axis in range(spec.dimension):
            nb = p.get(add(c, unit(spec.dimension, axis)))
            if nb is not None and faces[s][2 * axis + 1] != faces[nb][2 * axis]:
                return False
    return True


# ---------------------------------------------------------------- validity


def _check_symbols(spec: ShiftSpec, syms: Iterable[int]) -> None:
    k = spec.k
    for s in syms:
        if not 0 <= s < k:
            raise SymbolOutOfRange(f"symbol index {s} outside alphabet of size {k}")


def violations(spec: ShiftSpec, p: Pattern, limit: int | None = None) -> list[tuple[int, Coord]]:
    """(rule index, translation) for every forbidden placement inside p."""
    if spec.wang_mode:
        raise InvalidInput("compile the Wang spec before validating")
    _check_symbols(spec, p.symbols())
    if p.dim != spec.dimension:
        raise InvalidInput("pattern dimension differs from spec")
    cells = p._cells
    out = []
    for ri, fp in enumerate(spec.forbidden):
        (o0, m0), rest = fp.cells[0], fp.cells[1:]
        for c, s in cells.items():
            if not (m0 >> s) & 1:
                continue
            t = sub(c, o0)
            for o, m in rest:
                v = cells.get(add(t, o))
                if v is None or not (m >> v) & 1:
                    break
            else:
                out.append((ri, t))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def validate_pattern(spec: ShiftSpec, p: Pattern) -> bool:
    if violations(spec, p, limit=1):
        return False
    if spec.validator is not None:
        return spec.validator.check(p._cells)
    return True


# ---------------------------------------------------------------- tori


class TorusConfig:
    """Fully periodic configuration given by its fundamental domain.

    The domain is centred: along axis i it covers lo_i .. lo_i + P_i - 1 with
    lo_i = -(P_i // 2).  ``data`` lists symbols for the domain cells in
    lexicographic order, and x_c = data[index(wrap(c))].
    """

    __slots__ = ("periods", "data", "dim", "_lo", "_strides")

    def __init__(self, periods: Sequence[int], data: Sequence[int]):
        self.periods = tuple(int(p) for p in periods)
        if not self.periods or any(p < 1 for p in self.periods):
            raise InvalidInput("periods must be positive")
        n = 1
        for p in self.periods:
            n *= p
        if len(data) != n:
            raise InvalidInput(f"torus data has {len(data)} entries, expected {n}")
        self.data = tuple(int(s) for s in data)
        self.dim = len(self.periods)
        self._lo = tuple(-(p // 2) for p in self.periods)
        strides = []
        acc = 1
        for p in reversed(self.periods):
            strides.append(acc)
            acc *= p
        self._strides = tuple(reversed(strides))

    def domain(self) -> Support:
        return rect(self._lo, tuple(lo + p - 1 for lo, p in zip(self._lo, self.periods)))

    def lo(self) -> Coord:
        return self._lo

    def wrap(self, c: Coord) -> Coord:
        return tuple((x - lo) % p + lo for x, lo, p in zip(c, self._lo, self.periods))

    def index(self, c: Coord) -> int:
        i = 0
        for x, lo, p, st in zip(c, self._lo, self.periods, self._strides):
            i += ((x - lo) % p) * st
        return i

    def __getitem__(self, c: Coord) -> int:
        return self.data[self.index(c)]

    def restrict(self, support: Iterable[Coord]) -> Pattern:
        return Pattern(((c, self[c]) for c in support), self.dim)

    def as_pattern(self) -> Pattern:
        return self.restrict(self.domain())

    def __eq__(self, other) -> bool:
        return isinstance(other, TorusConfig) and self.periods == other.periods and self.data == other.data

    def __hash__(self) -> int:
        return hash((self.periods, self.data))

    def __repr__(self) -> str:
        return f"TorusConfig(periods={self.periods})"

    @classmethod
    def from_function(cls, periods: Sequence[int], f: Callable[[Coord], int]) -> TorusConfig:
        lo = tuple(-(p // 2) for p in periods)
        dom = rect(lo, tuple(a + p - 1 for a, p in zip(lo, periods)))
        return cls(periods, [f(c) for c in dom])

    @classmethod
    def constant(cls, periods: Sequence[int], sym: int) -> TorusConfig:
        n = 1
        for p in periods:
            n *= p
        return cls(periods, [sym] * n)


def torus_violations(spec: ShiftSpec, t: TorusConfig, limit: int | None = None) -> list[tuple[int, Coord]]:
    if t.dim != spec.dimension:
        raise InvalidInput("torus dimension differs from spec")
    _check_symbols(spec, set(t.data))
    out = []
    dom = t.domain().cells
    data = t.data
    for ri, fp in enumerate(spec.forbidden):
        for tr in dom:
            for o, m in fp.cells:
                if not (m >> data[t.index(add(tr, o))]) & 1:
                    break
            else:
                out.append((ri, tr))
                if limit is not None and len(out) >= limit:
                    return out
    return out


def validate_torus(spec: ShiftSpec, t: TorusConfig) -> bool:
    """True iff the periodic configuration violates no rule anywhere."""
    if spec.wang_mode:
        raise InvalidInput("compile the Wang spec before validating")
    if torus_violations(spec, t, limit=1):
        return False
    if spec.validator is not None:
        return spec.validator.check_torus(t)
    return True


# ---------------------------------------------------------------- file formats


def _fmt_coord(c: Coord) -> str:
    return ",".join(str(x) for x in c)


def _parse_coord(s: str, d: int | None = None) -> Coord:
    try:
        c = tuple(int(x) for x in s.split(","))
    except ValueError:
        raise SpecFormatError(f"bad coordinate {s!r}") from None
    if d is not None and len(c) != d:
        raise SpecFormatError(f"coordinate {s!r} is not {d}-dimensional")
    return c


def _fmt_attr(v: Attr) -> str:
    return str(v)


def _parse_attr(s: str) -> Attr:
    if re.fullmatch(r"-?\d+", s):
        return int(s)
    return s


def _fmt_mask(spec: ShiftSpec, m: int) -> str:
    if m.bit_count() == 1:
        return spec.alphabet.names[m.bit_length() - 1]
    for nm, cm in spec.classes:
        if cm == m:
            return "@" + nm
    return "|".join(spec.alphabet.names[s] for s in mask_members(m))


def _split_line(line: str) -> list[str]:
    return line.split()


def dumps_spec(spec: ShiftSpec) -> str:
    """Canonical text form of a spec (see README for the grammar)."""
    lines = [f"# {x}" if x else "#" for x in spec.doc]
    lines.append(f"sft {FORMAT_VERSION}")
    lines.append(f"name {spec.name}")
    lines.append(f"dimension {spec.dimension}")
    lines.append(f"rule_radius {_fmt_coord(spec.rule_radius)}")
    lines.append(f"wang {int(spec.wang_mode)}")
    if spec.validator is not None:
        lines.append(f"validator {spec.validator.name}")
    al = spec.alphabet
    for i, nm in enumerate(al.names):
        parts = ["symbol", nm]
        if al.faces is not None:
            parts.append("faces=" + ",".join(al.faces[i]))
        if al.attrs is not None:
            parts.extend(f"{k}={_fmt_attr(v)}" for k, v in al.attrs[i])
        lines.append(" ".join(parts))
    for nm, m in spec.classes:
        lines.append(" ".join(["class", nm] + [al.names[s] for s in mask_members(m)]))
    for fp in spec.forbidden:
        parts = ["forbid"]
        if fp.label:
            parts.append(f"label={fp.label}")
        parts.extend(f"{_fmt_coord(c)}:{_fmt_mask(spec, m)}" for c, m in fp.cells)
        lines.append(" ".join(parts))
    lines.append("end")
    return "\n".join(lines) + "\n"


def loads_spec(text: str) -> ShiftSpec:
    doc: list[str] = []
    header: dict[str, str] = {}
    names: list[str] = []
    faces: list[tuple[str, ...] | None] = []
    attrs: list[tuple[tuple[str, Attr], ...]] = []
    class_lines: list[tuple[int, list[str]]] = []
    forbid_lines: list[tuple[int, list[str]]] = []
    seen_body = False
    ended = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if not seen_body:
                doc.append(line[2:] if line.startswith("# ") else line[1:])
            continue
        if ended:
            raise SpecFormatError(f"line {lineno}: content after 'end'")
        seen_body = True
        toks = _split_line(line)
        kw = toks[0]
        if kw in ("sft", "name", "dimension", "rule_radius", "wang", "validator"):
            if len(toks) != 2:
                raise SpecFormatError(f"line {lineno}: '{kw}' takes one value")
            if kw in header:
                raise SpecFormatError(f"line {lineno}: duplicate '{kw}'")
            header[kw] = toks[1]
        elif kw == "symbol":
            if len(toks) < 2:
                raise SpecFormatError(f"line {lineno}: symbol needs a name")
            names.append(toks[1])
            f = None
            a = []
            for t in toks[2:]:
                if "=" not in t:
                    raise SpecFormatError(f"line {lineno}: expected key=value, got {t!r}")
                k, v = t.split("=", 1)
                if k == "faces":
                    f = tuple(v.split(","))
                else:
                    a.append((k, _parse_attr(v)))
            faces.append(f)
            attrs.append(tuple(a))
        elif kw == "class":
            class_lines.append((lineno, toks[1:]))
        elif kw == "forbid":
            forbid_lines.append((lineno, toks[1:]))
        elif kw == "end":
            ended = True
        else:
            raise SpecFormatError(f"line {lineno}: unknown keyword {kw!r}")
    for kw in ("sft", "name", "dimension"):
        if kw not in header:
            raise SpecFormatError(f"missing header field '{kw}'")
    if header["sft"] != str(FORMAT_VERSION):
        raise SpecFormatError(f"unsupported format version {header['sft']}")
    if not ended:
        raise SpecFormatError("missing 'end' line")
    try:
        d = int(header["dimension"])
    except ValueError:
        raise SpecFormatError("dimension must be an integer") from None
    rr = _parse_coord(header.get("rule_radius", ",".join(["1"] * d)))
    wang = header.get("wang", "0")
    if wang not in ("0", "1"):
        raise SpecFormatError("wang must be 0 or 1")
    if not names:
        raise SpecFormatError("no symbols declared")
    if any(f is not None for f in faces) and any(f is None for f in faces):
        missing = [n for n, f in zip(names, faces) if f is None]
        raise MissingFaceLabels(f"symbols without face labels: {' '.join(missing[:5])}")
    try:
        alphabet = Alphabet(
            tuple(names),
            tuple(faces) if faces and faces[0] is not None else None,  # type: ignore[arg-type]
            tuple(attrs) if any(attrs) else None,
        )
    except InvalidInput as e:
        raise SpecFormatError(str(e)) from None
    classes: list[tuple[str, int]] = []
    cmap: dict[str, int] = {}
    for lineno, toks in class_lines:
        if len(toks) < 2:
            raise SpecFormatError(f"line {lineno}: class needs a name and members")
        m = 0
        for s in toks[1:]:
            try:
                m |= 1 << alphabet.index(s)
            except SymbolOutOfRange as e:
                raise SpecFormatError(f"line {lineno}: {e}") from None
        classes.append((toks[0], m))
        cmap[toks[0]] = m

    def parse_set(tok: str, lineno: int) -> int:
        if tok.startswith("@"):
            if tok[1:] not in cmap:
                raise SpecFormatError(f"line {lineno}: unknown class {tok}")
            return cmap[tok[1:]]
        m = 0
        for s in tok.split("|"):
            try:
                m |= 1 << alphabet.index(s)
            except SymbolOutOfRange as e:
                raise SpecFormatError(f"line {lineno}: {e}") from None
        return m

    rules = []
    for lineno, toks in forbid_lines:
        label = None
        cells = []
        for t in toks:
            if t.startswith("label="):
                label = t[6:]
                continue
            if ":" not in t:
                raise SpecFormatError(f"line {lineno}: expected offset:symbols, got {t!r}")
            c, s = t.split(":", 1)
            cells.append((_parse_coord(c, d), parse_set(s, lineno)))
        try:
            rules.append(ForbiddenPattern(tuple(cells), label))
        except InvalidInput as e:
            raise SpecFormatError(f"line {lineno}: {e}") from None
    validator = None
    if "validator" in header:
        factory = _VALIDATORS.get(header["validator"])
        if factory is None:
            raise SpecFormatError(f"unknown validator {header['validator']!r}")
        validator = factory()
    try:
        return ShiftSpec(header["name"], d, alphabet, tuple(rules), rr, wang == "1", tuple(classes), tuple(doc),
                         validator)
    except SpecFormatError:
        raise
    except InvalidInput as e:
        raise SpecFormatError(str(e)) from None


def load_spec(path) -> ShiftSpec:
    with open(path, encoding="utf-8") as fh:
        return loads_spec(fh.read())


def save_spec(spec: ShiftSpec, path) -> None:
    _atomic_write(path, dumps_spec(spec))


def dumps_pattern(spec: ShiftSpec, p: Pattern) -> str:
    lines = [f"pattern {FORMAT_VERSION}", f"shift {spec.name}", f"dimension {p.dim}", f"cells {len(p)}"]
    names = spec.alphabet.names
    lines.extend(f"{_fmt_coord(c)} {names[s]}" for c, s in p.items())
    return "\n".join(lines) + "\n"


def loads_pattern(spec: ShiftSpec, text: str) -> Pattern:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    hdr = {}
    i = 0
    while i < len(lines) and len(hdr) < 4:
        toks = lines[i].split()
        if toks[0] not in ("pattern", "shift", "dimension", "cells") or len(toks) != 2:
            break
        hdr[toks[0]] = toks[1]
        i += 1
    if hdr.get("pattern") != str(FORMAT_VERSION) or "dimension" not in hdr or "cells" not in hdr:
        raise SpecFormatError("bad pattern header")
    d = int(hdr["dimension"])
    body = lines[i:]
    if len(body) != int(hdr["cells"]):
        raise SpecFormatError(f"pattern declares {hdr['cells']} cells but lists {len(body)}")
    cells = {}
    for ln in body:
        toks = ln.split()
        if len(toks) != 2:
            raise SpecFormatError(f"bad pattern line {ln!r}")
        c = _parse_coord(toks[0], d)
        if c in cells:
            raise SpecFormatError(f"duplicate cell {toks[0]}")
        try:
            cells[c] = spec.alphabet.index(toks[1])
        except SymbolOutOfRange as e:
            raise SpecFormatError(str(e)) from None
    return Pattern(cells, d)


def dumps_torus(spec: ShiftSpec, t: TorusConfig) -> str:
    names = spec.alphabet.names
    lines = [f"torus {FORMAT_VERSION}", f"shift {spec.name}", f"periods {_fmt_coord(t.periods)}"]
    run = t.periods[-1]
    for i in range(0, len(t.data), run):
        lines.append(" ".join(names[s] for s in t.data[i:i + run]))
    return "\n".join(lines) + "\n"


def loads_torus(spec: ShiftSpec, text: str) -> TorusConfig:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if len(lines) < 3 or lines[0] != f"torus {FORMAT_VERSION}" or not lines[2].startswith("periods "):
        raise SpecFormatError("bad torus header")
    periods = _parse_coord(lines[2].split()[1])
    data = []
    for ln in lines[3:]:
        toks = ln.split()
        if len(toks) != periods[-1]:
            raise SpecFormatError("torus row length differs from the last period")
        try:
            data.extend(spec.alphabet.index(s) for s in toks)
        except SymbolOutOfRange as e:
            raise SpecFormatError(str(e)) from None
    try:
        return TorusConfig(periods, data)
    except InvalidInput as e:
        raise SpecFormatError(str(e)) from None


def _atomic_write(path, text: str) -> None:
    import os
    import tempfile

    path = os.fspath(path)
    dirname = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=dirname, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


atomic_write = _atomic_write

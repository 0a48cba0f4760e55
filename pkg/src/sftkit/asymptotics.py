"""Exchangeability witnesses, obstructions, exchangeability graphs and BCE profiles.

Two patterns p, q on a support F are exchangeable when some asymptotic pair
(x, y) has x|F = p and y|F = q.  Searches are run in coordinates centred on
the bounding box of F, so every result is invariant under translating F.

* A torus witness is a pair of periodic configurations with periods
  ``2(r+m)+1`` that agree on the fundamental domain outside ``K = box(d, r)``.
  When ``m`` is at least the rule span minus one, replacing the first
  configuration by the second on K gives a genuine asymptotic pair, so the
  witness certifies exchangeability.
* Shifts given by a validator with a fill symbol (sunny-side-up) get open
  witnesses: p and q padded by the fill symbol, which are points by contract.
* Non-exchangeability is only asserted through registered obstructions.
  A failed search yields :class:`NoWitnessUpTo`, which says nothing beyond
  the parameters it was run with.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

from .core import (
    Coord,
    InvalidInput,
    Pattern,
    ShiftSpec,
    SftError,
    Support,
    TorusConfig,
    add,
    box,
    neg,
    validate_pattern,
    validate_torus,
)
from .solver import (
    BudgetExhausted,
    SearchBudget,
    complete_torus,
    cover_of,
    enumerate_language,
    extend,
    fibers_of,
    joint_torus,
)


class UnknownObstructionKind(SftError):
    pass


class VertexNotFound(InvalidInput):
    pass


class CapExceeded(SftError):
    pass


# ---------------------------------------------------------------- parameters


@dataclass(frozen=True)
class ExchangeabilityParams:
    """Search parameters; ``None`` means "derive from the shift and support".

    Defaults: ``r`` is the centred radius of F plus one and ``m`` is the
    largest rule extent minus one.
    """

    r: int | None = None
    m: int | None = None
    witness_mode: str = "torus"
    budget: SearchBudget = SearchBudget(max_nodes=200_000)

    def resolve(self, spec, F: Support) -> tuple[int, int]:
        R = centred(F)[1].radius()
        r = R + 1 if self.r is None else self.r
        if r < R:
            raise InvalidInput(f"agreement radius {r} does not cover the support (needs {R})")
        if self.m is None:
            cov = cover_of(spec)
            m = max(cov.span()) - 1 if cov.forbidden else 0
        else:
            m = self.m
        if m < 0:
            raise InvalidInput("margin must be non-negative")
        return r, m

    def to_dict(self) -> dict:
        return {"r": self.r, "m": self.m, "witness_mode": self.witness_mode,
                "max_nodes": self.budget.max_nodes, "seed": self.budget.seed}


def centred(F: Support) -> tuple[Coord, Support]:
    """(offset c, F - c) with c the floor-centre of F's bounding box."""
    lo, hi = F.bounds()
    c = tuple((a + b) // 2 for a, b in zip(lo, hi))
    return c, F.translate(neg(c))


# ---------------------------------------------------------------- outcomes


@dataclass(frozen=True)
class Witness:
    """A pair of configurations exhibiting exchangeability.

    ``left``/``right`` live in centred coordinates; the pattern pair they
    realise is ``(p, q)`` translated by ``-offset``.  For sofic shifts they
    are configurations of the cover.
    """

    kind: str                      # "torus-pair" | "open-pair"
    left: TorusConfig | Pattern
    right: TorusConfig | Pattern
    support: Support
    K: Support
    offset: Coord
    certifying: bool = True

    @property
    def differing_cells(self) -> Support:
        if isinstance(self.left, TorusConfig):
            dom = self.left.domain().cells
            diff = [c for c in dom if self.left[c] != self.right[c]]
        else:
            diff = list(self.left.differing_cells(self.right))
        return Support((add(c, self.offset) for c in diff), self.support.dim)

    def swapped(self) -> Witness:
        return Witness(self.kind, self.right, self.left, self.support, self.K, self.offset, self.certifying)

    def to_dict(self, spec) -> dict:
        names = cover_of(spec).alphabet.names

        def layer(x):
            if isinstance(x, TorusConfig):
                return {"periods": list(x.periods), "data": [names[s] for s in x.data]}
            return {"cells": [[list(c), names[s]] for c, s in x.items()]}

        return {
            "kind": self.kind,
            "certifying": self.certifying,
            "offset": list(self.offset),
            "K": [list(b) for b in self.K.bounds()],
            "differing_cells": [list(c) for c in self.differing_cells],
            "left": layer(self.left),
            "right": layer(self.right),
        }


@dataclass(frozen=True)
class NoWitnessUpTo:
    """The search at (r, m) was exhaustive and found nothing; not a proof."""

    r: int
    m: int
    periods: tuple[int, ...]
    mode: str = "torus"

    def to_dict(self) -> dict:
        return {"kind": "no-witness", "r": self.r, "m": self.m, "periods": list(self.periods),
                "mode": self.mode}


@dataclass(frozen=True)
class Obstruction:
    """A replayable proof that two patterns are not exchangeable.

    ``side`` names the pattern carrying the marked cell ("left" is p).
    """

    kind: str
    side: str
    data: tuple[tuple[str, object], ...]

    def get(self, key: str):
        return dict(self.data)[key]

    def with_data(self, **changes) -> Obstruction:
        d = dict(self.data)
        d.update(changes)
        return Obstruction(self.kind, self.side, tuple(sorted(d.items())))

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "side": self.side}
        for k, v in self.data:
            out[k] = list(v) if isinstance(v, tuple) else v
        return out


@dataclass(frozen=True)
class Obstructed:
    obstruction: Obstruction

    def to_dict(self) -> dict:
        return {"kind": "obstructed", "obstruction": self.obstruction.to_dict()}


# ---------------------------------------------------------------- obstruction registry


@dataclass(frozen=True)
class ObstructionKind:
    name: str
    shifts: frozenset[str]
    find: Callable          # (spec, a, b) -> dict | None, a carries the marked cell
    check: Callable         # (spec, data, a, b) -> bool


_REGISTRY: dict[str, ObstructionKind] = {}


def register_obstruction(kind: ObstructionKind) -> None:
    _REGISTRY[kind.name] = kind


def obstruction_kinds(spec) -> list[ObstructionKind]:
    return [k for k in _REGISTRY.values() if spec.name in k.shifts]


def _names(spec) -> tuple[str, ...]:
    return spec.alphabet.names


def _is_white(spec, s: int) -> bool:
    return _names(spec)[s] == "white"


def _worm_find(spec, a: Pattern, b: Pattern):
    for u, s in a.items():
        if _is_white(spec, s):
            continue
        band = [(x,) + u[1:] for x in range(u[0] - 2, u[0] + 3)]
        if all(c in b and _is_white(spec, b[c]) for c in band):
            return {"cell": u, "band": (u[0] - 2, u[0] + 2)}
    return None


def _worm_check(spec, data, a: Pattern, b: Pattern) -> bool:
    u = tuple(data["cell"])
    lo, hi = data["band"]
    if u not in a or _is_white(spec, a[u]):
        return False
    # any worm through u stays within two columns, hence within u.x +- 2 on u's row
    if lo > u[0] - 2 or hi < u[0] + 2:
        return False
    return all((x,) + u[1:] in b and _is_white(spec, b[(x,) + u[1:]]) for x in range(lo, hi + 1))


def _has_cube(spec, s: int) -> bool:
    return _names(spec)[s].endswith("/c")


def _wave_find(spec, a: Pattern, b: Pattern):
    for w, s in a.items():
        if not _has_cube(spec, s):
            continue
        col = [w[:-1] + (z,) for z in range(w[-1] - 2, w[-1] + 3)]
        if all(c in b and not _has_cube(spec, b[c]) for c in col):
            return {"cell": w, "zrange": (w[-1] - 2, w[-1] + 2)}
    return None


def _wave_check(spec, data, a: Pattern, b: Pattern) -> bool:
    w = tuple(data["cell"])
    lo, hi = data["zrange"]
    if w not in a or not _has_cube(spec, a[w]):
        return False
    # good waves have height oscillation at most 1, so the partner's wave
    # crosses w's column within two planes of w
    if lo > w[-1] - 2 or hi < w[-1] + 2:
        return False
    return all(w[:-1] + (z,) in b and not _has_cube(spec, b[w[:-1] + (z,)]) for z in range(lo, hi + 1))


register_obstruction(ObstructionKind("worm-column", frozenset({"worm-shift", "worm-precursor"}),
                                     _worm_find, _worm_check))
register_obstruction(ObstructionKind("wave-presence", frozenset({"good-wave"}), _wave_find, _wave_check))


def find_obstruction(spec, p: Pattern, q: Pattern) -> Obstruction | None:
    for kind in obstruction_kinds(spec):
        for side, (a, b) in (("left", (p, q)), ("right", (q, p))):
            data = kind.find(spec, a, b)
            if data is not None:
                return Obstruction(kind.name, side, tuple(sorted(data.items())))
    return None


def check_obstruction(spec, obstruction: Obstruction, p: Pattern, q: Pattern) -> bool:
    """Replay an obstruction certificate against the pattern pair (p, q)."""
    kind = _REGISTRY.get(obstruction.kind)
    if kind is None or spec.name not in kind.shifts:
        raise UnknownObstructionKind(f"no obstruction {obstruction.kind!r} registered for {spec.name}")
    a, b = (p, q) if obstruction.side == "left" else (q, p)
    try:
        return bool(kind.check(spec, dict(obstruction.data), a, b))
    except (KeyError, TypeError, ValueError):
        return False


# ---------------------------------------------------------------- witness checking


def _image_symbol(spec, s: int) -> int:
    return spec.code.rule((s,)) if fibers_of(spec) is not None else s


def check_witness(spec, w: Witness, p: Pattern, q: Pattern) -> bool:
    """Independent replay: layer validity, restrictions and equality off K.

    Uses only the core validators, never the search engine.
    """
    cov = cover_of(spec)
    if p.support != w.support or q.support != w.support:
        return False
    pc, qc = p.translate(neg(w.offset)), q.translate(neg(w.offset))
    if not pc.support.issubset(w.K):
        return False
    if w.kind == "torus-pair":
        L, R = w.left, w.right
        if not (isinstance(L, TorusConfig) and isinstance(R, TorusConfig)) or L.periods != R.periods:
            return False
        dom = L.domain()
        if not w.K.issubset(dom):
            return False
        # rule placements meeting K must not wrap around the torus
        klo, khi = w.K.bounds()
        dlo, dhi = dom.bounds()
        span = cov.span()
        for i in range(cov.dimension):
            if klo[i] - (span[i] - 1) < dlo[i] or khi[i] + (span[i] - 1) > dhi[i]:
                return False
        if not (validate_torus(cov, L) and validate_torus(cov, R)):
            return False
        if any(L[c] != R[c] for c in dom.cells if c not in w.K):
            return False
        get_l, get_r = L.__getitem__, R.__getitem__
    elif w.kind == "open-pair":
        L, R = w.left, w.right
        if not (isinstance(L, Pattern) and isinstance(R, Pattern)) or L.support != R.support:
            return False
        if not pc.support.issubset(L.support):
            return False
        if not (validate_pattern(cov, L) and validate_pattern(cov, R)):
            return False
        if any(L[c] != R[c] for c in L.cells() if c not in w.K):
            return False
        if w.certifying and (cov.validator is None or cov.validator.fill is None):
            return False
        get_l, get_r = L.__getitem__, R.__getitem__
    else:
        return False
    return (all(_image_symbol(spec, get_l(c)) == s for c, s in pc.items())
            and all(_image_symbol(spec, get_r(c)) == s for c, s in qc.items()))


# ---------------------------------------------------------------- exchangeable


def _check_member(spec, p: Pattern) -> None:
    cov = cover_of(spec)
    if p.dim != cov.dimension:
        raise InvalidInput("pattern dimension differs from the shift")
    if fibers_of(spec) is not None:
        if extend(spec, p, p.support) is None:
            raise InvalidInput("pattern is not locally valid")
    elif not validate_pattern(cov, p):
        raise InvalidInput("pattern is not locally valid")


def _fill_witness(spec, pc: Pattern, qc: Pattern, K: Support, offset, F) -> Witness:
    fill = spec.validator.fill
    L = Pattern({c: pc.get(c, fill) for c in K}, K.dim)
    R = Pattern({c: qc.get(c, fill) for c in K}, K.dim)
    return Witness("open-pair", L, R, F, K, offset, True)


def exchangeable(spec, p: Pattern, q: Pattern, params: ExchangeabilityParams = ExchangeabilityParams(),
                 check_members: bool = True):
    """Witness, Obstructed or NoWitnessUpTo for the pair (p, q).

    Raises BudgetExhausted when the search runs out of budget.
    """
    if p.support != q.support:
        raise InvalidInput("p and q must share a support")
    if check_members:
        _check_member(spec, p)
        _check_member(spec, q)
    F = p.support
    r, m = params.resolve(spec, F)
    offset, Fc = centred(F)
    pc, qc = p.translate(neg(offset)), q.translate(neg(offset))
    K = box(F.dim, r)
    cov = cover_of(spec)
    periods = (2 * (r + m) + 1,) * F.dim
    if cov.validator is not None:
        if cov.validator.fill is None:
            raise InvalidInput("validator shifts need a fill symbol for witnesses")
        w = _fill_witness(cov, pc, qc, K, offset, F)
        if validate_pattern(cov, w.left) and validate_pattern(cov, w.right):
            return w
        return NoWitnessUpTo(r, m, periods, "open")
    if p != q:
        ob = find_obstruction(spec, p, q)
        if ob is not None:
            return Obstructed(ob)
    if params.witness_mode == "open":
        return _open_witness(spec, pc, qc, K, r, m, offset, F, params)
    if p == q:
        t = complete_torus(spec, pc, periods, params.budget)
        if t is None:
            return NoWitnessUpTo(r, m, periods)
        return Witness("torus-pair", t, t, F, K, offset, True)
    flip = qc.sort_key() < pc.sort_key()
    a, b = (qc, pc) if flip else (pc, qc)
    res = joint_torus(spec, a, b, K, periods, params.budget)
    if res is None:
        return NoWitnessUpTo(r, m, periods)
    w = Witness("torus-pair", res[0], res[1], F, K, offset, True)
    return w.swapped() if flip else w


def _open_witness(spec, pc, qc, K, r, m, offset, F, params):
    from .solver import joint_extend

    target = box(F.dim, r + m)
    res = joint_extend(spec, pc, qc, K, target, params.budget)
    if res is None:
        return NoWitnessUpTo(r, m, (2 * (r + m) + 1,) * F.dim, "open")
    return Witness("open-pair", res[0], res[1], F, K, offset, False)


# ---------------------------------------------------------------- graphs


@dataclass
class ExchangeabilityGraph:
    support: Support
    vertices: list[Pattern]
    params: ExchangeabilityParams
    strategy: str
    edges: dict[tuple[int, int], Witness] = field(default_factory=dict)
    obstructions: dict[tuple[int, int], Obstruction] = field(default_factory=dict)
    unknown: dict[tuple[int, int], str] = field(default_factory=dict)
    truncated: bool = False

    def index(self, p: Pattern) -> int:
        try:
            return self._index[p]
        except AttributeError:
            self._index = {v: i for i, v in enumerate(self.vertices)}
            return self.index(p)
        except KeyError:
            raise VertexNotFound("pattern is not a vertex of this graph") from None

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.vertices]
        for i, j in sorted(self.edges):
            if i != j:
                adj[i].append(j)
                adj[j].append(i)
        return adj

    def components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen = [False] * len(self.vertices)
        comps = []
        for s in range(len(self.vertices)):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [], deque([s])
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
            comps.append(sorted(comp))
        return comps

    def is_complete(self) -> bool:
        n = len(self.vertices)
        return len([e for e in self.edges if e[0] != e[1]]) == n * (n - 1) // 2

    def to_dot(self, spec) -> str:
        return graph_to_dot(self, spec)

    def to_json(self, spec) -> str:
        return graph_to_json(self, spec)


def pattern_label(spec, p: Pattern) -> str:
    names = spec.alphabet.names
    if p.dim == 1:
        return " ".join(names[s] for s in p.symbols())
    return ";".join(f"{','.join(map(str, c))}:{names[s]}" for c, s in p.items())


def _classify(spec, g: ExchangeabilityGraph, i: int, j: int, cache: dict | None) -> None:
    p, q = g.vertices[i], g.vertices[j]
    key = None
    if cache is not None:
        off = centred(g.support)[0]
        key = (spec.name, g.params, p.translate(neg(off)), q.translate(neg(off)))
        hit = cache.get(key)
    else:
        hit = None
    try:
        res = hit if hit is not None else exchangeable(spec, p, q, g.params, check_members=False)
    except BudgetExhausted:
        g.unknown[(i, j)] = "budget"
        return
    if cache is not None and hit is None and not isinstance(res, Obstructed):
        cache[key] = res
    if isinstance(res, Witness):
        if hit is not None:
            off = centred(g.support)[0]
            res = Witness(res.kind, res.left, res.right, g.support, res.K, off, res.certifying)
        g.edges[(i, j)] = res
    elif isinstance(res, Obstructed):
        g.obstructions[(i, j)] = res.obstruction
    else:
        g.unknown[(i, j)] = "no-witness"


def exchangeability_graph(spec, F: Support, params: ExchangeabilityParams = ExchangeabilityParams(),
                          strategy: str = "complete", cap: int = 2000, sample: int = 500,
                          seed: int = 0, cache: dict | None = None,
                          vertices: list[Pattern] | None = None) -> ExchangeabilityGraph:
    """Classify pattern pairs over F.

    Strategies: ``complete`` classifies every pair; ``components`` skips pairs
    already joined by witness edges, so cross-component pairs are all
    classified but diameters are not exact; ``sample`` classifies a seeded
    random subset of pairs.
    """
    if vertices is None:
        r, m = params.resolve(spec, F)
        lang = enumerate_language(spec, F, m, cap=cap + 1)
        if len(lang) > cap:
            raise CapExceeded(f"language on F has more than {cap} patterns")
        vertices = list(lang)
    g = ExchangeabilityGraph(F, list(vertices), params, strategy)
    n = len(g.vertices)
    if strategy == "complete":
        for i, j in combinations(range(n), 2):
            _classify(spec, g, i, j, cache)
    elif strategy == "components":
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in combinations(range(n), 2):
            if find(i) == find(j):
                continue
            _classify(spec, g, i, j, cache)
            if (i, j) in g.edges:
                parent[find(i)] = find(j)
    elif strategy == "sample":
        rng = random.Random(seed)
        pairs = list(combinations(range(n), 2))
        chosen = sorted(rng.sample(pairs, min(sample, len(pairs))))
        for i, j in chosen:
            _classify(spec, g, i, j, cache)
        g.truncated = len(chosen) < len(pairs)
    else:
        raise InvalidInput(f"unknown strategy {strategy!r}")
    return g


def _bfs(adj: list[list[int]], s: int) -> list[int]:
    dist = [-1] * len(adj)
    dist[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def chain_distance(graph: ExchangeabilityGraph, p: Pattern, q: Pattern) -> int | None:
    """Exact BFS distance over witness edges; None when p and q are in different components."""
    i, j = graph.index(p), graph.index(q)
    d = _bfs(graph.adjacency(), i)[j]
    return None if d < 0 else d


def chain_path(graph: ExchangeabilityGraph, p: Pattern, q: Pattern) -> list[Pattern] | None:
    """A shortest chain p = r_0, ..., r_n = q, or None."""
    i, j = graph.index(p), graph.index(q)
    adj = graph.adjacency()
    prev = {i: None}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        if u == j:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if j not in prev:
        return None
    path = []
    u = j
    while u is not None:
        path.append(graph.vertices[u])
        u = prev[u]
    return path[::-1]


# ---------------------------------------------------------------- BCE profiles


@dataclass
class BceProfile:
    records: list[dict]
    params: ExchangeabilityParams

    def max_diameters(self) -> list[int]:
        return [r["max_diameter"] for r in self.records]

    def to_json(self) -> str:
        return json.dumps({"params": self.params.to_dict(), "records": self.records}, sort_keys=True, indent=1)


def component_diameters(graph: ExchangeabilityGraph) -> list[int]:
    adj = graph.adjacency()
    out = []
    for comp in graph.components():
        out.append(max(max(_bfs(adj, s)[v] for v in comp) for s in comp))
    return out


def bce_profile(spec, supports: list[Support], params: ExchangeabilityParams = ExchangeabilityParams(),
                cap: int = 2000, cache: dict | None = None) -> BceProfile:
    """Per support: vertex count, components and within-component diameters."""
    records = []
    for F in supports:
        g = exchangeability_graph(spec, F, params, "complete", cap=cap, cache=cache)
        diam = component_diameters(g)
        records.append({
            "support": [list(c) for c in F.cells],
            "vertices": len(g.vertices),
            "components": len(diam),
            "diameters": diam,
            "max_diameter": max(diam, default=0),
            "obstructed_pairs": len(g.obstructions),
            "unknown_pairs": len(g.unknown),
        })
    return BceProfile(records, params)


# ---------------------------------------------------------------- export


def graph_to_dot(g: ExchangeabilityGraph, spec) -> str:
    lines = ["graph exchangeability {", "  node [shape=box, fontname=monospace];"]
    for i, v in enumerate(g.vertices):
        label = pattern_label(spec, v).replace('"', '\\"')
        lines.append(f'  v{i} [label="{label}"];')
    for (i, j), w in sorted(g.edges.items()):
        lines.append(f'  v{i} -- v{j} [label="{w.kind}"];')
    for (i, j), ob in sorted(g.obstructions.items()):
        lines.append(f'  v{i} -- v{j} [style=dashed, color=red, constraint=false, label="{ob.kind}"];')
    for (i, j), why in sorted(g.unknown.items()):
        lines.append(f'  v{i} -- v{j} [style=dotted, color=gray, constraint=false, label="{why}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_dict(g: ExchangeabilityGraph, spec) -> dict:
    return {
        "shift": spec.name,
        "support": [list(c) for c in g.support.cells],
        "strategy": g.strategy,
        "params": g.params.to_dict(),
        "truncated": g.truncated,
        "vertices": [pattern_label(spec, v) for v in g.vertices],
        "edges": [{"u": i, "v": j, "witness": w.to_dict(spec)} for (i, j), w in sorted(g.edges.items())],
        "obstructions": [{"u": i, "v": j, **ob.to_dict()} for (i, j), ob in sorted(g.obstructions.items())],
        "unknown": [{"u": i, "v": j, "reason": why} for (i, j), why in sorted(g.unknown.items())],
        "components": g.components(),
    }


def graph_to_json(g: ExchangeabilityGraph, spec) -> str:
    return json.dumps(graph_to_dict(g, spec), sort_keys=True, indent=1)


__all__ = [
    "BceProfile", "CapExceeded", "ExchangeabilityGraph", "ExchangeabilityParams", "NoWitnessUpTo",
    "Obstructed", "Obstruction", "ObstructionKind", "UnknownObstructionKind", "VertexNotFound", "Witness",
    "bce_profile", "centred", "chain_distance", "chain_path", "check_obstruction", "check_witness",
    "component_diameters", "exchangeability_graph", "exchangeable", "find_obstruction", "graph_to_dot",
    "graph_to_json", "pattern_label", "register_obstruction",
]

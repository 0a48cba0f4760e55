"""Backtracking search with unit propagation over forbidden cylinders.

Each forbidden placement becomes a clause "not (x_1 in S_1 and ... and
x_k in S_k)" over cell variables whose domains are symbol bitmasks.  A
clause whose literals are all entailed is a conflict; when exactly one
literal is still open, that variable loses the symbols in its set.

Search picks the open variable with the smallest domain (ties broken by
canonical cell order) and tries values in ascending order, or in a seeded
shuffled order when sampling.  ``None`` results always mean the search
space was refuted exhaustively; running out of budget raises
``BudgetExhausted`` instead.
"""

from __future__ import annotations

import random
import sys
import time
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .core import (
    Coord,
    InvalidInput,
    Pattern,
    SftError,
    ShiftSpec,
    Support,
    TorusConfig,
    add,
    mask_members,
    rect,
    sub,
    validate_pattern,
    validate_torus,
    violations,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

__all__ = [
    "BudgetExhausted",
    "Language",
    "SearchBudget",
    "SearchStats",
    "TorusConfig",
    "complete_torus",
    "count_language",
    "enumerate_language",
    "extend",
    "joint_extend",
    "joint_torus",
    "sample_language",
    "solve_open",
    "solve_torus",
]


@dataclass(frozen=True)
class SearchBudget:
    max_nodes: int | None = 2_000_000
    max_millis: int | None = None
    seed: int = 0

    def with_seed(self, seed: int) -> SearchBudget:
        return SearchBudget(self.max_nodes, self.max_millis, seed)


UNLIMITED = SearchBudget(None, None, 0)


@dataclass
class SearchStats:
    nodes: int = 0
    propagations: int = 0
    refutations: int = 0
    trace: list[str] | None = None

    def lines(self) -> list[str]:
        return [f"nodes {self.nodes}", f"propagations {self.propagations}", f"refutation_leaves {self.refutations}"]


class BudgetExhausted(SftError):
    def __init__(self, message: str, stats: SearchStats | None = None, lower_bound: int | None = None):
        super().__init__(message)
        self.stats = stats
        self.lower_bound = lower_bound


class Language(list):
    """Canonically sorted patterns; ``truncated`` is set when the cap was hit."""

    def __init__(self, items: Iterable[Pattern] = (), *, support: Support | None = None,
                 margin: int = 0, truncated: bool = False):
        super().__init__(items)
        self.support = support
        self.margin = margin
        self.truncated = truncated


# ---------------------------------------------------------------- shift adapters


def cover_of(shift) -> ShiftSpec:
    """The SFT (or validator spec) actually searched; sofic shifts expose ``.cover``."""
    return getattr(shift, "cover", shift)


def fibers_of(shift) -> tuple[int, ...] | None:
    """Per image symbol, the mask of cover symbols mapping to it (None for plain specs)."""
    return getattr(shift, "fibers", None)


def _pin_masks(shift, p: Pattern | None) -> dict[Coord, int]:
    if p is None:
        return {}
    fib = fibers_of(shift)
    k = len(fib) if fib is not None else cover_of(shift).k
    out = {}
    for c, s in p.items():
        if not 0 <= s < k:
            from .core import SymbolOutOfRange

            raise SymbolOutOfRange(f"symbol index {s} outside alphabet of size {k}")
        out[c] = fib[s] if fib is not None else 1 << s
    return out


# ---------------------------------------------------------------- CSP


def _merge(lits: Iterable[tuple[int, int]]) -> tuple[int, ...] | None:
    acc: dict[int, int] = {}
    for v, m in lits:
        acc[v] = acc.get(v, -1) & m
    flat = []
    for v in sorted(acc):
        if acc[v] == 0:
            return None  # can never fire
        flat.extend((v, acc[v]))
    return tuple(flat)


class Csp:
    """Variables with bitmask domains and forbidden-conjunction clauses."""

    def __init__(self, nvars: int, full: int):
        self.nvars = nvars
        self.full = full
        self.domains = [full] * nvars
        self._clauses: set[tuple[int, ...]] = set()
        self.failed = False
        self.validator = None
        self.var_coord: list[Coord] = []

    def restrict(self, v: int, mask: int) -> None:
        self.domains[v] &= mask
        if not self.domains[v]:
            self.failed = True

    def add_clause(self, lits: Iterable[tuple[int, int]]) -> None:
        cl = _merge(lits)
        if cl is None:
            return
        if len(cl) == 2:
            self.restrict(cl[0], ~cl[1])
        else:
            self._clauses.add(cl)

    def finish(self) -> None:
        self.clauses = sorted(self._clauses)
        self.watch: list[list[int]] = [[] for _ in range(self.nvars)]
        for ci, cl in enumerate(self.clauses):
            for j in range(0, len(cl), 2):
                self.watch[cl[j]].append(ci)


def _placements_open(spec: ShiftSpec, var_of: Mapping[Coord, int]) -> Iterator[list[tuple[int, int]]]:
    for fp in spec.forbidden:
        o0 = fp.cells[0][0]
        for c in var_of:
            t = sub(c, o0)
            lits = []
            for o, m in fp.cells:
                v = var_of.get(add(t, o))
                if v is None:
                    break
                lits.append((v, m))
            else:
                yield lits


def _placements_torus(spec: ShiftSpec, geom: TorusConfig, var_at) -> Iterator[list[tuple[int, int]]]:
    dom = geom.domain().cells
    for fp in spec.forbidden:
        for t in dom:
            yield [(var_at(add(t, o)), m) for o, m in fp.cells]


def _torus_geom(periods: Sequence[int]) -> TorusConfig:
    return TorusConfig.constant(periods, 0)


# ---------------------------------------------------------------- engine


class _Engine:
    def __init__(self, csp: Csp, budget: SearchBudget, stats: SearchStats | None, randomize: bool = False):
        self.csp = csp
        self.clauses = csp.clauses
        self.watch = csp.watch
        self.budget = budget
        self.stats = stats if stats is not None else SearchStats()
        self.rng = random.Random(budget.seed) if randomize else None
        self.deadline = None
        if budget.max_millis is not None:
            self.deadline = time.monotonic() + budget.max_millis / 1000.0
        self.validator = csp.validator

    def tick(self) -> None:
        st = self.stats
        st.nodes += 1
        b = self.budget
        if b.max_nodes is not None and st.nodes > b.max_nodes:
            raise BudgetExhausted(f"node budget {b.max_nodes} exhausted", st)
        if self.deadline is not None and st.nodes % 256 == 0 and time.monotonic() > self.deadline:
            raise BudgetExhausted(f"time budget {b.max_millis} ms exhausted", st)

    def propagate(self, dom: list[int], queue: list[int]) -> bool:
        clauses = self.clauses
        watch = self.watch
        props = 0
        while queue:
            v = queue.pop()
            for ci in watch[v]:
                cl = clauses[ci]
                free_v = -1
                free_m = 0
                nfree = 0
                i = 0
                n = len(cl)
                while i < n:
                    u = cl[i]
                    m = cl[i + 1]
                    d = dom[u]
                    if not d & m:
                        nfree = 2
                        break
                    if d & ~m:
                        nfree += 1
                        if nfree > 1:
                            break
                        free_v = u
                        free_m = m
                    i += 2
                if nfree > 1:
                    continue
                if nfree == 0:
                    self.stats.propagations += props
                    return False
                dom[free_v] &= ~free_m
                props += 1
                queue.append(free_v)
        self.stats.propagations += props
        if self.validator is not None:
            return self.validator(dom)
        return True

    def initial(self) -> list[int] | None:
        dom = list(self.csp.domains)
        if self.csp.failed or any(d == 0 for d in dom):
            return None
        if not self.propagate(dom, list(range(len(dom)))):
            return None
        return dom

    @staticmethod
    def pick(dom: list[int], scope: Sequence[int]) -> int:
        best = -1
        bc = 1 << 30
        for v in scope:
            c = dom[v].bit_count()
            if 1 < c < bc:
                best = v
                bc = c
                if c == 2:
                    break
        return best

    def order(self, mask: int) -> list[int]:
        vals = mask_members(mask)
        if self.rng is not None:
            self.rng.shuffle(vals)
        return vals

    def solve(self, dom: list[int], scope: Sequence[int]) -> list[int] | None:
        """First assignment of every variable in scope (depth-first)."""
        v = self.pick(dom, scope)
        if v < 0:
            return dom
        for s in self.order(dom[v]):
            self.tick()
            nd = dom.copy()
            nd[v] = 1 << s
            if self.propagate(nd, [v]):
                r = self.solve(nd, scope)
                if r is not None:
                    return r
            else:
                self.stats.refutations += 1
        return None

    def branch_classes(self, dom: list[int], out: Sequence[int], classes: Sequence[int] | None,
                       scope: Sequence[int]) -> Iterator[list[int]]:
        """Yield one extendable state per distinct class assignment of ``out``.

        ``classes`` partitions the alphabet (None = singletons).  Each yielded
        state has every output variable inside a single class and is known to
        extend to a full assignment of ``scope``.
        """
        v = -1
        bc = 1 << 30
        for u in out:
            d = dom[u]
            if classes is None:
                c = d.bit_count()
                if 1 < c < bc:
                    v, bc = u, c
            else:
                parts = sum(1 for cm in classes if d & cm)
                if 1 < parts < bc:
                    v, bc = u, parts
        if v < 0:
            if self.solve(dom.copy(), scope) is not None:
                yield dom
            return
        if classes is None:
            options = [1 << s for s in self.order(dom[v])]
        else:
            options = [cm for cm in classes if dom[v] & cm]
            if self.rng is not None:
                self.rng.shuffle(options)
        for opt in options:
            self.tick()
            nd = dom.copy()
            nd[v] &= opt
            if self.propagate(nd, [v]):
                yield from self.branch_classes(nd, out, classes, scope)
            else:
                self.stats.refutations += 1


def _components(dom: list[int], clauses, watch, nvars: int) -> list[list[int]]:
    """Connected components of open variables linked by still-live clauses."""
    open_v = [v for v in range(nvars) if dom[v].bit_count() > 1]
    seen = {}
    comps = []
    for root in open_v:
        if root in seen:
            continue
        comp = [root]
        seen[root] = True
        stack = [root]
        while stack:
            v = stack.pop()
            for ci in watch[v]:
                cl = clauses[ci]
                live = True
                for j in range(0, len(cl), 2):
                    if not dom[cl[j]] & cl[j + 1]:
                        live = False
                        break
                if not live:
                    continue
                for j in range(0, len(cl), 2):
                    u = cl[j]
                    if u not in seen and dom[u].bit_count() > 1:
                        seen[u] = True
                        comp.append(u)
                        stack.append(u)
        comps.append(sorted(comp))
    return comps


# ---------------------------------------------------------------- problem builders


def _validator_hook(spec: ShiftSpec, coords: Sequence[Coord]):
    val = spec.validator
    if val is None:
        return None

    def hook(dom: list[int]) -> bool:
        assigned = {}
        for v, d in enumerate(dom):
            if d & (d - 1) == 0:
                assigned[coords[v]] = d.bit_length() - 1
        return val.check(assigned)

    return hook


def build_open(spec: ShiftSpec, target: Support, pins: Mapping[Coord, int]) -> Csp:
    cells = target.cells
    var_of = {c: i for i, c in enumerate(cells)}
    csp = Csp(len(cells), spec.alphabet.full_mask)
    csp.var_coord = list(cells)
    for c, m in pins.items():
        if c not in var_of:
            raise InvalidInput(f"pinned cell {c} lies outside the target support")
        csp.restrict(var_of[c], m)
    for lits in _placements_open(spec, var_of):
        csp.add_clause(lits)
    csp.validator = _validator_hook(spec, csp.var_coord)
    csp.finish()
    return csp


def build_torus(spec: ShiftSpec, periods: Sequence[int], pins: Mapping[Coord, int]) -> tuple[Csp, TorusConfig]:
    geom = _torus_geom(periods)
    dom = geom.domain()
    csp = Csp(len(dom), spec.alphabet.full_mask)
    csp.var_coord = list(dom.cells)
    for c, m in pins.items():
        if c not in dom:
            raise InvalidInput(f"pinned cell {c} lies outside the fundamental domain")
        csp.restrict(geom.index(c), m)
    for lits in _placements_torus(spec, geom, geom.index):
        csp.add_clause(lits)
    if spec.validator is not None:
        csp.validator = _torus_validator_hook(spec, periods, csp.var_coord)
    csp.finish()
    return csp, geom


def _torus_validator_hook(spec: ShiftSpec, periods, coords):
    val = spec.validator

    def hook(dom: list[int]) -> bool:
        if any(d & (d - 1) for d in dom):
            assigned = {coords[v]: d.bit_length() - 1 for v, d in enumerate(dom) if d & (d - 1) == 0}
            return val.check(assigned)
        return val.check_torus(TorusConfig(periods, [d.bit_length() - 1 for d in dom]))

    return hook


def _stamp(stats: SearchStats | None, what: str) -> None:
    if stats is not None and stats.trace is not None:
        stats.trace.append(f"{what} nodes={stats.nodes} propagations={stats.propagations} "
                           f"refutation_leaves={stats.refutations}")


# ---------------------------------------------------------------- public API


def _check_locally_valid(spec: ShiftSpec, p: Pattern) -> None:
    if not validate_pattern(spec, p):
        raise InvalidInput("input pattern violates the shift's local rules")


def solve_open(spec: ShiftSpec, target: Support, pins: Mapping[Coord, int],
               budget: SearchBudget = SearchBudget(), stats: SearchStats | None = None,
               randomize: bool = False) -> Pattern | None:
    """Locally valid pattern on target with each pinned cell inside its mask."""
    csp = build_open(spec, target, pins)
    eng = _Engine(csp, budget, stats, randomize)
    dom = eng.initial()
    res = None if dom is None else eng.solve(dom, range(csp.nvars))
    _stamp(eng.stats, "solve_open")
    if res is None:
        return None
    return Pattern(((c, res[i].bit_length() - 1) for i, c in enumerate(csp.var_coord)), target.dim)


def solve_torus(spec: ShiftSpec, periods: Sequence[int], pins: Mapping[Coord, int],
                budget: SearchBudget = SearchBudget(), stats: SearchStats | None = None,
                randomize: bool = False) -> TorusConfig | None:
    csp, geom = build_torus(spec, periods, pins)
    eng = _Engine(csp, budget, stats, randomize)
    dom = eng.initial()
    res = None if dom is None else eng.solve(dom, range(csp.nvars))
    _stamp(eng.stats, "solve_torus")
    if res is None:
        return None
    return TorusConfig(periods, [d.bit_length() - 1 for d in res])


def extend(spec, p: Pattern, target: Support, budget: SearchBudget = SearchBudget(),
           stats: SearchStats | None = None) -> Pattern | None:
    """Locally valid pattern on target agreeing with p, or None if refuted.

    For a sofic shift the result is a cover pattern whose image agrees with p.
    """
    cov = cover_of(spec)
    if fibers_of(spec) is None:
        _check_locally_valid(cov, p)
    if not p.support.issubset(target):
        raise InvalidInput("pattern support is not inside the target")
    return solve_open(cov, target, _pin_masks(spec, p), budget, stats)


def complete_torus(spec, p: Pattern, periods: Sequence[int], budget: SearchBudget = SearchBudget(),
                   stats: SearchStats | None = None, randomize: bool = False) -> TorusConfig | None:
    """Periodic configuration with the given periods restricting to p, or None.

    p keeps its own coordinates; they must lie in the centred fundamental
    domain.  Periods smaller than the rule span are allowed: wrapped cells
    simply alias.
    """
    cov = cover_of(spec)
    if fibers_of(spec) is None:
        _check_locally_valid(cov, p)
    if len(periods) != cov.dimension:
        raise InvalidInput("one period per axis required")
    geom = _torus_geom(periods)
    if not p.support.issubset(geom.domain()):
        raise InvalidInput("pattern does not fit inside the fundamental domain")
    t = solve_torus(cov, periods, _pin_masks(spec, p), budget, stats, randomize)
    if t is not None and not validate_torus(cov, t):  # pragma: no cover - soundness guard
        raise AssertionError("solver produced an invalid torus")
    return t


def enumerate_tori(spec, periods: Sequence[int], pins: Mapping[Coord, int] | None = None,
                   budget: SearchBudget = SearchBudget(), stats: SearchStats | None = None) -> Iterator[TorusConfig]:
    """Every valid torus with the given periods (pins are cell -> symbol mask), in search order."""
    cov = cover_of(spec)
    csp, _ = build_torus(cov, periods, pins or {})
    eng = _Engine(csp, budget, stats)
    dom = eng.initial()
    if dom is None:
        return
    allv = range(csp.nvars)
    for st in eng.branch_classes(dom, allv, None, allv):
        yield TorusConfig(periods, [d.bit_length() - 1 for d in st])
    _stamp(eng.stats, "enumerate_tori")


def _layer_vars(cells: Sequence[Coord], K: Support) -> tuple[dict[Coord, int], dict[Coord, int], int]:
    a = {c: i for i, c in enumerate(cells)}
    b = dict(a)
    n = len(cells)
    for c in cells:
        if c in K:
            b[c] = n
            n += 1
    return a, b, n


def _joint_csp(spec: ShiftSpec, cells: Sequence[Coord], K: Support, pins_a, pins_b, fixed,
               placements) -> tuple[Csp, dict, dict]:
    va, vb, n = _layer_vars(cells, K)
    csp = Csp(n, spec.alphabet.full_mask)
    coords = [None] * n
    for c, i in va.items():
        coords[i] = c
    for c, i in vb.items():
        coords[i] = c
    csp.var_coord = coords  # type: ignore[assignment]
    for var_of, pins in ((va, pins_a), (vb, pins_b)):
        for c, m in pins.items():
            if c not in var_of:
                raise InvalidInput(f"pinned cell {c} outside the search window")
            csp.restrict(var_of[c], m)
        for c, m in fixed.items():
            if c in var_of:
                csp.restrict(var_of[c], m)
        for lits in placements(var_of):
            csp.add_clause(lits)
    csp.finish()
    return csp, va, vb


def joint_extend(spec, p: Pattern, q: Pattern, K: Support, target: Support,
                 budget: SearchBudget = SearchBudget(), fixed: Pattern | None = None,
                 stats: SearchStats | None = None) -> tuple[Pattern, Pattern] | None:
    """Two locally valid patterns on target, equal off K, restricting to p and q.

    ``fixed`` pins extra cells in both layers (e.g. a white boundary).  Cells
    outside K share one variable, so equality there is structural.
    """
    cov = cover_of(spec)
    if p.support != q.support:
        raise InvalidInput("p and q must share a support")
    if not p.support.issubset(K) or not K.issubset(target):
        raise InvalidInput("need support(p) within K within target")
    if fibers_of(spec) is None:
        _check_locally_valid(cov, p)
        _check_locally_valid(cov, q)
    if cov.validator is not None:
        raise InvalidInput("joint search needs a finite-type spec")
    fx = _pin_masks(spec, fixed)

    def placements(var_of):
        return _placements_open(cov, var_of)

    csp, va, vb = _joint_csp(cov, target.cells, K, _pin_masks(spec, p), _pin_masks(spec, q), fx, placements)
    eng = _Engine(csp, budget, stats)
    dom = eng.initial()
    res = None if dom is None else eng.solve(dom, range(csp.nvars))
    _stamp(eng.stats, "joint_extend")
    if res is None:
        return None
    pa = Pattern(((c, res[i].bit_length() - 1) for c, i in va.items()), target.dim)
    pb = Pattern(((c, res[i].bit_length() - 1) for c, i in vb.items()), target.dim)
    return pa, pb


def joint_torus(spec, p: Pattern, q: Pattern, K: Support, periods: Sequence[int],
                budget: SearchBudget = SearchBudget(), stats: SearchStats | None = None,
                randomize: bool = False) -> tuple[TorusConfig, TorusConfig] | None:
    """Two tori with the given periods, equal on the domain off K, restricting to p, q."""
    cov = cover_of(spec)
    geom = _torus_geom(periods)
    dom_cells = geom.domain().cells
    if not K.issubset(geom.domain()):
        raise InvalidInput("K does not fit inside the fundamental domain")
    if cov.validator is not None:
        raise InvalidInput("torus joint search needs a finite-type spec")

    def placements(var_of):
        for lits in _placements_torus(cov, geom, lambda c: var_of[geom.wrap(c)]):
            yield lits

    csp, va, vb = _joint_csp(cov, dom_cells, K, _pin_masks(spec, p), _pin_masks(spec, q), {}, placements)
    eng = _Engine(csp, budget, stats, randomize)
    dom = eng.initial()
    res = None if dom is None else eng.solve(dom, range(csp.nvars))
    _stamp(eng.stats, "joint_torus")
    if res is None:
        return None
    ta = TorusConfig(periods, [res[va[c]].bit_length() - 1 for c in dom_cells])
    tb = TorusConfig(periods, [res[vb[c]].bit_length() - 1 for c in dom_cells])
    return ta, tb


def _language_csp(spec, F: Support, m: int) -> tuple[Csp, list[int], tuple[int, ...] | None]:
    cov = cover_of(spec)
    if m < 0:
        raise InvalidInput("margin must be non-negative")
    if F.dim != cov.dimension:
        raise InvalidInput("support dimension differs from spec")
    target = F.expand(m)
    csp = build_open(cov, target, {})
    index = {c: i for i, c in enumerate(csp.var_coord)}
    out = [index[c] for c in F.cells]
    return csp, out, fibers_of(spec)


def _project(spec, csp: Csp, dom: list[int], F: Support) -> Pattern:
    fib = fibers_of(spec)
    index = {c: i for i, c in enumerate(csp.var_coord)}
    if fib is None:
        return Pattern(((c, dom[index[c]].bit_length() - 1) for c in F.cells), F.dim)
    out = []
    for c in F.cells:
        d = dom[index[c]]
        out.append((c, next(i for i, fm in enumerate(fib) if fm & d)))
    return Pattern(out, F.dim)


def enumerate_language(spec, F: Support, m: int = 0, budget: SearchBudget = SearchBudget(),
                       cap: int | None = None, stats: SearchStats | None = None) -> Language:
    """All patterns on F extending to a locally valid pattern on F grown by m."""
    csp, out, fib = _language_csp(spec, F, m)
    eng = _Engine(csp, budget, stats)
    dom = eng.initial()
    found: list[Pattern] = []
    truncated = False
    if dom is not None:
        for st in eng.branch_classes(dom, out, fib, range(csp.nvars)):
            if cap is not None and len(found) >= cap:
                truncated = True
                break
            found.append(_project(spec, csp, st, F))
    _stamp(eng.stats, "enumerate_language")
    found.sort(key=Pattern.sort_key)
    return Language(found, support=F, margin=m, truncated=truncated)


def sample_language(spec, F: Support, m: int, count: int, seed: int = 0,
                    budget: SearchBudget = SearchBudget(), max_draws: int | None = None) -> Language:
    """Up to ``count`` distinct patterns of L_F^m drawn by randomized search.

    Draws are not uniform; they are reproducible for a fixed seed.
    """
    csp, out, fib = _language_csp(spec, F, m)
    found: dict[Pattern, None] = {}
    draws = 0
    limit = max_draws if max_draws is not None else 20 * count
    rng = random.Random(seed)
    while len(found) < count and draws < limit:
        draws += 1
        eng = _Engine(csp, budget.with_seed(rng.randrange(1 << 62)), None, randomize=True)
        dom = eng.initial()
        if dom is None:
            break
        for st in eng.branch_classes(dom, out, fib, range(csp.nvars)):
            found.setdefault(_project(spec, csp, st, F))
            break
    items = sorted(found, key=Pattern.sort_key)
    return Language(items, support=F, margin=m, truncated=len(found) < count)


def count_language(spec, F: Support, m: int = 0, budget: SearchBudget = SearchBudget(),
                   stats: SearchStats | None = None) -> int:
    """|L_F^m| as an exact integer.

    The root state is split into independent components; variables touched
    by no live clause contribute their domain size directly.
    """
    csp, out, fib = _language_csp(spec, F, m)
    eng = _Engine(csp, budget, stats)
    dom = eng.initial()
    if dom is None:
        return 0
    out_set = set(out)
    if csp.validator is not None:
        comps = [list(range(csp.nvars))]
    else:
        comps = _components(dom, csp.clauses, csp.watch, csp.nvars)
    for comp in comps:  # every component must be satisfiable on its own
        if eng.solve(dom.copy(), comp) is None:
            return 0
    total = 1
    for comp in comps:
        cout = [v for v in comp if v in out_set]
        if not cout:
            continue
        if len(comp) == 1 and csp.validator is None:
            d = dom[comp[0]]
            total *= d.bit_count() if fib is None else sum(1 for fm in fib if fm & d)
            continue
        n = 0
        try:
            for _ in eng.branch_classes(dom.copy(), cout, fib, comp):
                n += 1
        except BudgetExhausted as e:
            e.lower_bound = total * n
            raise
        total *= n
    _stamp(eng.stats, "count_language")
    return total


def brute_force_language(spec, F: Support, m: int = 0) -> list[Pattern]:
    """Oracle: filter every assignment of F grown by m through validate_pattern."""
    import itertools

    cov = cover_of(spec)
    target = F.expand(m)
    cells = target.cells
    found = set()
    fib = fibers_of(spec)
    image = None
    if fib is not None:
        image = {}
        for i, fm in enumerate(fib):
            for s in mask_members(fm):
                image[s] = i
    for combo in itertools.product(range(cov.k), repeat=len(cells)):
        p = Pattern(zip(cells, combo), target.dim)
        if violations(cov, p, limit=1):
            continue
        if cov.validator is not None and not cov.validator.check(dict(zip(cells, combo))):
            continue
        r = p.restrict(F.cells)
        if image is not None:
            r = r.map_symbols(image.__getitem__)
        found.add(r)
    return sorted(found, key=Pattern.sort_key)


def sup_box(lo: Coord, hi: Coord) -> Support:
    return rect(lo, hi)

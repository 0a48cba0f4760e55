"""Entropy bounds from box counts and strip transfer operators.

All values are in nats per cell.

Strip estimates treat axis 0 as the row direction and axis 1 as the transfer
direction.  For width w, ``T_w`` is the 0/1 operator on locally valid rows of
w cells with ``T_w[a, b] = 1`` when row b may sit directly above row a.  Then
``log lambda(T_w) / w`` is an upper bound for the entropy.

When the rules are invariant under transposition and under reflection of the
transfer axis, every ``T_n`` is symmetric and the partition functions satisfy
``Z(n, k) = Z(k, n)``.  The spectral inequality
``1' T^(2q+1) 1 <= lambda(T) * 1' T^(2q) 1`` then gives
``h >= log(lambda_(j+1) / lambda_j)`` for every odd j, which is the lower bound
reported as ``lower_kind="reflection"``.  Without those symmetries the only
bound available is the trivial one, 0.

A one-dimensional shift is lifted onto the transfer axis with free rows, so
``lambda(T_w) = lambda(A)^w`` and both bounds equal ``log lambda(A)``
(``lower_kind="exact-1d"``).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import sparse

from .core import InvalidInput, SftError, ShiftSpec, box
from .solver import SearchBudget, count_language

DENSE_LIMIT = 1 << 14
DEFAULT_MAX_STATES = 200_000


class StateSpaceTooLarge(SftError):
    """The row state space exceeds the configured limit."""


class NotConverged(SftError):
    """Power iteration did not reach the requested tolerance."""


@dataclass
class EntropyEstimate:
    upper: float
    lower: float
    method: str
    n: int | None = None
    w: int | None = None
    m: int = 0
    count: int | None = None
    eigenvalue: float | None = None
    states: int | None = None
    lower_kind: str = "trivial"
    periodic_estimate: float | None = None
    residual: float | None = None
    iterations: int | None = None
    table: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise SftError(f"bracketing violated: lower {self.lower} > upper {self.upper}")

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.count is not None:
            d["count"] = str(self.count)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------- box counts


def _log_count_per_cell(count: int, cells: int) -> float:
    """log(count) / cells, exact when count is a perfect cells-th power."""
    guess = round(math.exp(math.log(count) / cells))
    for root in (guess - 1, guess, guess + 1):
        if root > 0 and root**cells == count:
            return math.log(root)
    return math.log(count) / cells


def entropy_upper_box(spec, n: int, m: int = 0, budget: SearchBudget = SearchBudget()) -> EntropyEstimate:
    """Upper bound ``log |L_{F_n}^m| / |F_n|`` with ``F_n = box(d, n)``."""
    if n < 0 or m < 0:
        raise InvalidInput("n and m must be non-negative")
    d = spec.dimension if isinstance(spec, ShiftSpec) else spec.cover.dimension
    F = box(d, n)
    count = count_language(spec, F, m, budget)
    if count == 0:
        raise InvalidInput(f"the language on box({d},{n}) is empty")
    return EntropyEstimate(_log_count_per_cell(count, len(F)), 0.0, "box-count", n=n, m=m, count=count)


# ---------------------------------------------------------------- rows and operators


@dataclass(frozen=True)
class _Rules:
    row: tuple[tuple[tuple[int, int], ...], ...]          # ((dx, mask), ...)
    pair: tuple[tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]], ...]
    k: int


def _split_rules(spec: ShiftSpec) -> _Rules:
    if spec.dimension != 2:
        raise InvalidInput("strip transfer needs a two-dimensional shift")
    if spec.validator is not None:
        raise InvalidInput("strip transfer needs a shift of finite type without a custom validator")
    row, pair = [], []
    for fp in spec.forbidden:
        x0 = min(c[0] for c, _ in fp.cells)
        y0 = min(c[1] for c, _ in fp.cells)
        cells = [((c[0] - x0, c[1] - y0), msk) for c, msk in fp.cells]
        ys = {c[1] for c, _ in cells}
        if max(ys) > 1:
            raise InvalidInput("strip transfer needs rules of height at most 2 along the transfer axis")
        if ys == {0}:
            row.append(tuple((c[0], msk) for c, msk in cells))
        else:
            lo = tuple((c[0], msk) for c, msk in cells if c[1] == 0)
            hi = tuple((c[0], msk) for c, msk in cells if c[1] == 1)
            pair.append((lo, hi))
    return _Rules(tuple(row), tuple(pair), spec.k)


def _placements(cells, w: int, cyclic: bool):
    """Column masks of each placement of a rule (wrapped cells are intersected)."""
    width = max(dx for part in cells for dx, _ in part) + 1
    starts = range(w) if cyclic else range(w - width + 1)
    for x0 in starts:
        merged = []
        for part in cells:
            cols: dict[int, int] = {}
            for dx, msk in part:
                col = (x0 + dx) % w if cyclic else x0 + dx
                cols[col] = cols.get(col, -1) & msk
            merged.append(cols)
        yield x0, merged


def _member(lut_cache: dict, k: int, mask: int) -> np.ndarray:
    arr = lut_cache.get(mask)
    if arr is None:
        arr = np.array([(mask >> s) & 1 for s in range(k)], dtype=bool)
        lut_cache[mask] = arr
    return arr


def _match(rows: np.ndarray, cols: dict[int, int], k: int, luts: dict) -> np.ndarray:
    ok = np.ones(len(rows), dtype=bool)
    for col, msk in cols.items():
        ok &= _member(luts, k, msk)[rows[:, col]]
    return ok


def valid_rows(spec: ShiftSpec, w: int, cyclic: bool = False,
               max_states: int = DEFAULT_MAX_STATES) -> np.ndarray:
    """Rows of width w (one per line, lexicographic) that avoid every one-row rule."""
    if w < 1:
        raise InvalidInput("strip width must be >= 1")
    rules = _split_rules(spec)
    k, luts = rules.k, {}
    rows = np.arange(k, dtype=np.int32).reshape(k, 1)
    for length in range(1, w + 1):
        if length > 1:
            rows = np.concatenate(
                [np.repeat(rows, k, axis=0), np.tile(np.arange(k, dtype=np.int32), len(rows))[:, None]],
                axis=1,
            )
        # prune with rules that end in the newest column
        bad = np.zeros(len(rows), dtype=bool)
        for rule in rules.row:
            width = max(dx for dx, _ in rule) + 1
            if width > length:
                continue
            x0 = length - width
            bad |= _match(rows, {x0 + dx: msk for dx, msk in rule}, k, luts)
        rows = rows[~bad]
        if len(rows) > max_states:
            raise StateSpaceTooLarge(f"more than {max_states} valid rows at width {length}")
    if cyclic:
        bad = np.zeros(len(rows), dtype=bool)
        for rule in rules.row:
            for _, (cols,) in _placements((rule,), w, True):
                bad |= _match(rows, cols, k, luts)
        rows = rows[~bad]
    return rows


def transfer_operator(spec: ShiftSpec, w: int, cyclic: bool = False,
                      max_states: int = DEFAULT_MAX_STATES):
    """(rows, T) with T dense below ``DENSE_LIMIT`` states and CSR above."""
    rules = _split_rules(spec)
    rows = valid_rows(spec, w, cyclic, max_states)
    R, k, luts = len(rows), rules.k, {}
    masks = []
    for lo, hi in rules.pair:
        for _, (clo, chi) in _placements((lo, hi), w, cyclic):
            masks.append((_match(rows, clo, k, luts), _match(rows, chi, k, luts)))
    if R <= DENSE_LIMIT:
        bad = np.zeros((R, R), dtype=bool)
        for a, b in masks:
            bad |= np.outer(a, b)
        return rows, (~bad).astype(np.float64)
    block = max(1, (1 << 24) // R)
    ri, ci = [], []
    for s in range(0, R, block):
        bad = np.zeros((min(block, R - s), R), dtype=bool)
        for a, b in masks:
            bad |= np.outer(a[s:s + block], b)
        r, c = np.nonzero(~bad)
        ri.append(r + s)
        ci.append(c)
    r, c = np.concatenate(ri), np.concatenate(ci)
    T = sparse.csr_matrix((np.ones(len(r)), (r, c)), shape=(R, R))
    return rows, T


def dominant_eigenvalue(A, seed: int = 0, tol: float = 1e-12, max_iter: int = 1_000_000,
                        residual_tol: float = 1e-10) -> tuple[float, np.ndarray, float, int]:
    """Perron eigenvalue of a non-negative matrix by shifted power iteration.

    Iterates with ``A + I`` so that periodic matrices still converge.  Returns
    (eigenvalue, unit eigenvector, residual, iterations); the residual is
    ``||Av - lambda v|| / ||v||`` scaled by ``max(1, lambda)``.
    """
    n = A.shape[0]
    if n == 0:
        return 0.0, np.zeros(0), 0.0, 0
    rng = np.random.default_rng(seed)
    v = rng.uniform(0.5, 1.5, n)
    v /= np.linalg.norm(v)
    lam_prev = -1.0
    for it in range(1, max_iter + 1):
        Av = A @ v
        lam = float(v @ Av)
        nxt = Av + v
        norm = np.linalg.norm(nxt)
        if norm == 0:
            return 0.0, v, 0.0, it
        nxt /= norm
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            res = float(np.linalg.norm(Av - lam * v)) / max(1.0, lam)
            if res <= residual_tol:
                return lam, v, res, it
        lam_prev = lam
        v = nxt
    raise NotConverged(f"power iteration did not converge in {max_iter} steps")


def strip_eigenvalue(spec: ShiftSpec, w: int, cyclic: bool = False, seed: int = 0,
                     max_states: int = DEFAULT_MAX_STATES, check_starts: bool = True):
    """(lambda, states, residual, iterations) for the width-w operator."""
    rows, T = transfer_operator(spec, w, cyclic, max_states)
    if len(rows) == 0:
        return 0.0, 0, 0.0, 0
    lam, _, res, it = dominant_eigenvalue(T, seed)
    if check_starts:
        lam2 = dominant_eigenvalue(T, seed + 1)[0]
        if abs(lam - lam2) > 1e-8 * max(1.0, lam):
            raise NotConverged(f"start vectors disagree: {lam} vs {lam2}")
    return lam, len(rows), res, it


# ---------------------------------------------------------------- symmetry


def _normalized(cells) -> tuple:
    lo = [min(c[i] for c, _ in cells) for i in range(2)]
    return tuple(sorted(((c[0] - lo[0], c[1] - lo[1]), s) for c, s in cells))


def reflection_symmetric(spec: ShiftSpec, limit: int = 100_000) -> bool:
    """True when the forbidden set is closed under transposition and y-reflection.

    This is a sufficient syntactic test on the expanded rule set.
    """
    if spec.dimension != 2 or spec.validator is not None:
        return False
    if sum(fp.size() for fp in spec.forbidden) > limit:
        return False
    pats = {_normalized(list(p.items())) for fp in spec.forbidden for p in fp.expand()}
    transposed = {_normalized([((c[1], c[0]), s) for c, s in p]) for p in pats}
    reflected = {_normalized([((c[0], -c[1]), s) for c, s in p]) for p in pats}
    return transposed == pats and reflected == pats


# ---------------------------------------------------------------- strip estimates


def periodic_strip_estimate(spec: ShiftSpec, w: int, seed: int = 0,
                            max_states: int = DEFAULT_MAX_STATES) -> float:
    """``log lambda / w`` for rows wrapped into a cycle of length w.

    A numerical estimate only: it is neither an upper nor a lower bound in general.
    """
    lam = strip_eigenvalue(spec, w, True, seed, max_states)[0]
    return math.log(lam) / w if lam > 0 else float("-inf")


def lift_1d(spec: ShiftSpec) -> ShiftSpec:
    """The 2D shift whose columns (along axis 1) are independent points of spec."""
    from dataclasses import replace

    from .core import ForbiddenPattern

    forb = tuple(ForbiddenPattern(tuple(((0, c[0]), m) for c, m in fp.cells), fp.label) for fp in spec.forbidden)
    return replace(spec, name=f"{spec.name}-lifted", dimension=2, forbidden=forb, rule_radius=(), wang_mode=False)


def strip_transfer_entropy(spec: ShiftSpec, w: int, seed: int = 0,
                           max_states: int = DEFAULT_MAX_STATES,
                           periodic: bool = True) -> EntropyEstimate:
    """Strip bounds at width w (see the module docstring for the lower bound)."""
    if not isinstance(spec, ShiftSpec):
        raise InvalidInput("strip transfer needs a shift of finite type")
    if spec.dimension == 1 and spec.validator is None:
        lam, states, res, it = strip_eigenvalue(lift_1d(spec), w, False, seed, max_states)
        if lam <= 0:
            raise InvalidInput("the shift is empty")
        h = math.log(lam) / w
        return EntropyEstimate(h, h, "strip-transfer", w=w, eigenvalue=lam, states=states,
                               lower_kind="exact-1d", residual=res, iterations=it)
    lam, states, res, it = strip_eigenvalue(spec, w, False, seed, max_states)
    if lam <= 0:
        raise InvalidInput(f"no valid strip of width {w}")
    upper = math.log(lam) / w
    lower, kind = 0.0, "trivial"
    if reflection_symmetric(spec):
        lams = {}

        def lam_at(j: int) -> float:
            if j not in lams:
                lams[j] = lam if j == w else strip_eigenvalue(spec, j, False, seed, max_states)[0]
            return lams[j]

        best = max(math.log(lam_at(j + 1) / lam_at(j)) for j in range(1, w + 1, 2))
        lower, kind = max(0.0, best), "reflection"
    est = None
    if periodic:
        try:
            est = periodic_strip_estimate(spec, w, seed, max_states)
        except InvalidInput:
            est = None
    return EntropyEstimate(
        upper, min(lower, upper), "strip-transfer", w=w, eigenvalue=lam, states=states,
        lower_kind=kind, periodic_estimate=est, residual=res, iterations=it,
    )


def strip_table(spec: ShiftSpec, widths, seed: int = 0, max_states: int = DEFAULT_MAX_STATES) -> list[dict]:
    """Convergence table: one row per width with both bounds."""
    out = []
    for w in widths:
        e = strip_transfer_entropy(spec, w, seed, max_states)
        out.append({"w": w, "lower": e.lower, "upper": e.upper, "gap": e.upper - e.lower,
                    "lower_kind": e.lower_kind, "states": e.states})
    return out


__all__ = [
    "EntropyEstimate", "StateSpaceTooLarge", "NotConverged", "entropy_upper_box", "valid_rows",
    "transfer_operator", "dominant_eigenvalue", "strip_eigenvalue", "reflection_symmetric",
    "periodic_strip_estimate", "strip_transfer_entropy", "strip_table",
]

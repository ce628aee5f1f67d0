"""Entropy of a flow from exact cotrajectory codimension traces.

For a good subspace U with zeroed coordinate set S, membership of a window
vector v in the n-step cotrajectory is the vanishing of the discrete part
and the S-coordinates of v, phi(v), ..., phi^(n-1)(v).  Those constraints
are rows of powers of the window matrix, so the codimension trace is the
rank growth of an accumulating constraint stack: each step multiplies the
previous constraint block by the window matrix once and inserts the new
rows into a running echelon form.

The estimate is exact: values are integers, lower bounds are fractions,
and there are no tolerances anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NotInvertible, TooLarge, WindowTooSmall
from .linalg import Matrix, Subspace, inverse, kernel
from .model import (
    Flow,
    GoodSubspace,
    _flow_from_window,
    compose_flow,
    default_window,
    guarantee_window,
    truncate,
)

__all__ = [
    "EngineConfig",
    "CodimTrace",
    "HStarResult",
    "EntropyEstimate",
    "cotrajectory",
    "codim_sequence",
    "chain_traces",
    "h_star",
    "ent_star",
    "brute_force_codim",
    "power_flow",
    "conjugate_flow",
    "entropy_report",
    "report_csv_rows",
]


@dataclass(frozen=True)
class EngineConfig:
    """Knobs of the estimator; defaults match the command-line driver."""

    n_max: int = 64
    streak: int = 5
    m_max: int = 8
    window_slack: int = 4
    window: int | None = None

    def __post_init__(self):
        if self.n_max < self.streak + 1:
            raise ValueError("n_max must exceed the required streak length")
        if min(self.n_max, self.streak, self.m_max + 1, self.window_slack + 1) < 1:
            raise ValueError("config values must be non-negative")


DEFAULT_CONFIG = EngineConfig()


@dataclass(frozen=True)
class CodimTrace:
    """Codimensions of the cotrajectories of one good subspace."""

    u: GoodSubspace
    values: tuple[int, ...]
    windows: tuple[int, ...]

    def first_differences(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.values, self.values[1:]))

    def is_monotone(self) -> bool:
        return all(d >= 0 for d in self.first_differences())

    def is_subadditive(self) -> bool:
        """Subadditivity of a_i := c_{i+1} (the shifted sequence with
        a_0 = 0), which is what makes the limit of c_n / n exist.  The
        unshifted values are not subadditive: the one-dimensional shift has
        c_n = n - 1, and c_{n+m} = n + m - 1 > c_n + c_m."""
        a = self.values  # a[i] = c_{i+1}, a[0] = 0
        n = len(a)
        return all(
            a[i + j] <= a[i] + a[j] for i in range(1, n) for j in range(1, n - i)
        )


class _EchelonStack:
    """Row-echelon rank tracker with cheap scalar-row inserts.

    Pivot rows are kept normalized but not mutually reduced; the final
    kernel computation canonicalizes, so this never leaks non-canonical
    data.  Insert cost is one vector operation per pivot the incoming row
    touches.
    """

    def __init__(self, field, dim: int):
        self.field = field
        self.dim = dim
        self.rows = np.zeros((min(dim, 64), dim), dtype=np.int64)
        self.pivot_row: dict[int, int] = {}

    @property
    def rank(self) -> int:
        return len(self.pivot_row)

    def insert(self, row: np.ndarray) -> None:
        field = self.field
        row = row.astype(np.int64, copy=True)
        while True:
            nz = np.nonzero(row)[0]
            if nz.size == 0:
                return
            lead = int(nz[0])
            holder = self.pivot_row.get(lead)
            if holder is None:
                pv = int(row[lead])
                if pv != 1:
                    row = field.arr_mul(np.int64(field.inv(pv)), row)
                r = self.rank
                if r == self.rows.shape[0]:
                    self.rows = np.concatenate([self.rows, np.zeros_like(self.rows)], axis=0)
                self.rows[r] = row
                self.pivot_row[lead] = r
                return
            row[lead:] = field.arr_sub(
                row[lead:], field.arr_mul(row[lead], self.rows[holder, lead:])
            )

    def matrix(self) -> Matrix:
        return Matrix(self.field, self.rows[: self.rank].copy())


class _PackedStack:
    """Characteristic-2 echelon tracker on bit-packed digit planes.

    A row is one Python integer per prime-field digit, bit j holding the
    digit at coordinate j, so an elimination is a handful of wide XORs and
    the per-pivot loop runs at integer speed.
    """

    def __init__(self, field, dim: int):
        assert field.p == 2
        self.field = field
        self.dim = dim
        self.d = field.d
        self.pivot_row: dict[int, tuple[int, ...]] = {}
        # cached nonzero scalar multiples of pivot rows, keyed by coefficient
        self._multiples: dict[int, dict[int, tuple[int, ...]]] = {}
        # positions where x^(d+t) reduces to, per overflow degree t
        if field.d > 1:
            self._red_bits = [
                tuple(int(s) for s in np.nonzero(field._red[t])[0])
                for t in range(field.d - 1)
            ]
        else:
            self._red_bits = []

    @property
    def rank(self) -> int:
        return len(self.pivot_row)

    def pack(self, row: np.ndarray) -> tuple[int, ...]:
        return tuple(
            int.from_bytes(
                np.packbits((row >> i) & 1, bitorder="little").tobytes(), "little"
            )
            for i in range(self.d)
        )

    def _scale(self, coeff_bits: tuple[int, ...], planes: tuple[int, ...]) -> tuple[int, ...]:
        d = self.d
        raw = [0] * (2 * d - 1)
        for i, bit in enumerate(coeff_bits):
            if bit:
                for j in range(d):
                    raw[i + j] ^= planes[j]
        out = raw[:d]
        for t, targets in enumerate(self._red_bits):
            hi = raw[d + t]
            if hi:
                for s in targets:
                    out[s] ^= hi
        return tuple(out)

    def insert(self, row: np.ndarray) -> None:
        self.insert_packed(self.pack(row))

    def insert_packed(self, planes: tuple[int, ...]) -> None:
        field = self.field
        d = self.d
        while True:
            mask = 0
            for p in planes:
                mask |= p
            if not mask:
                return
            lead = (mask & -mask).bit_length() - 1
            holder = self.pivot_row.get(lead)
            code = 0
            for i, p in enumerate(planes):
                code |= ((p >> lead) & 1) << i
            if holder is None:
                if code != 1:
                    inv_bits = tuple((field.inv(code) >> i) & 1 for i in range(d))
                    planes = self._scale(inv_bits, planes)
                self.pivot_row[lead] = planes
                self._multiples[lead] = {1: planes}
                return
            cache = self._multiples[lead]
            delta = cache.get(code)
            if delta is None:
                coeff = tuple((code >> i) & 1 for i in range(d))
                delta = self._scale(coeff, holder)
                cache[code] = delta
            planes = tuple(p ^ q for p, q in zip(planes, delta))

    def matrix(self) -> Matrix:
        rows = []
        nbytes = (self.dim + 7) // 8
        for _, planes in sorted(self.pivot_row.items()):
            code = np.zeros(self.dim, dtype=np.int64)
            for i, plane in enumerate(planes):
                bits = np.unpackbits(
                    np.frombuffer(plane.to_bytes(nbytes, "little"), dtype=np.uint8),
                    bitorder="little",
                )[: self.dim]
                code += bits.astype(np.int64) << i
            rows.append(code)
        if not rows:
            return Matrix.zeros(self.field, 0, self.dim)
        return Matrix(self.field, np.stack(rows))


class _PackedStackPrime:
    """GF(2) echelon tracker: one bit-packed integer per row, XOR inserts."""

    def __init__(self, field, dim: int):
        assert field.p == 2 and field.d == 1
        self.field = field
        self.dim = dim
        self.pivot_row: dict[int, int] = {}

    @property
    def rank(self) -> int:
        return len(self.pivot_row)

    def insert(self, row: np.ndarray) -> None:
        packed = int.from_bytes(
            np.packbits(row.astype(np.uint8), bitorder="little").tobytes(), "little"
        )
        pivot_row = self.pivot_row
        while packed:
            lead = (packed & -packed).bit_length() - 1
            holder = pivot_row.get(lead)
            if holder is None:
                pivot_row[lead] = packed
                return
            packed ^= holder

    def matrix(self) -> Matrix:
        nbytes = (self.dim + 7) // 8
        rows = [
            np.unpackbits(
                np.frombuffer(packed.to_bytes(nbytes, "little"), dtype=np.uint8),
                bitorder="little",
            )[: self.dim].astype(np.int64)
            for _, packed in sorted(self.pivot_row.items())
        ]
        if not rows:
            return Matrix.zeros(self.field, 0, self.dim)
        return Matrix(self.field, np.stack(rows))


def _make_stack(field, dim: int):
    if field.p == 2:
        return _PackedStackPrime(field, dim) if field.d == 1 else _PackedStack(field, dim)
    return _EchelonStack(field, dim)


def _dead_indices(flow: Flow, u: GoodSubspace) -> list[int]:
    d = flow.discrete_dim
    return list(range(d)) + [d + i for i in sorted(u.zero_set)]


def _resolve_window(flow: Flow, u: GoodSubspace, n: int, cfg: EngineConfig) -> int:
    if cfg.window is None:
        return default_window(flow, u, n, cfg.window_slack)
    need = guarantee_window(flow, u.extent, n)
    if cfg.window < need:
        raise WindowTooSmall(
            f"pinned window {cfg.window} is below the exactness bound {need} "
            f"for zero extent {u.extent} and depth {n}"
        )
    return cfg.window


def _trace_steps(flow: Flow, u: GoodSubspace, n_max: int, window: int):
    """Yield (n, codim of C_n, constraint stack) for n = 1..n_max.

    Constraint rows at step n read at most ``n * bandwidth`` past the dead
    coordinates, so each step multiplies only the supported column block.
    """
    mat, _ = truncate(flow, window)
    field = flow.field
    prepared = field.prepare_right(mat.data)
    dead = _dead_indices(flow, u)
    dim = mat.rows
    reach = flow.endo.bandwidth
    stack = _make_stack(field, dim)
    block = np.zeros((len(dead), dim), dtype=np.int64)
    block[np.arange(len(dead)), dead] = 1
    support = min(dim, (max(dead) + 1 if dead else 0))
    for n in range(1, n_max + 1):
        for row in block:
            stack.insert(row)
        yield n, stack.rank - len(dead), stack
        if n < n_max:
            grown = min(dim, support + reach)
            nxt = np.zeros((len(dead), dim), dtype=np.int64)
            nxt[:, :grown] = field.matmul_prepared(block[:, :support], prepared, grown)
            block = nxt
            support = grown


def codim_sequence(
    flow: Flow, u: GoodSubspace, n_max: int, cfg: EngineConfig = DEFAULT_CONFIG
) -> CodimTrace:
    """Trace of codim_U(C_n) for n = 1..n_max, computed in one window."""
    window = _resolve_window(flow, u, n_max, cfg)
    values = [c for _, c, _ in _trace_steps(flow, u, n_max, window)]
    return CodimTrace(u, tuple(values), (window,) * n_max)


def chain_traces(flow: Flow, n_max: int, cfg: EngineConfig = DEFAULT_CONFIG) -> list[CodimTrace]:
    """Traces for the whole chain U_0, ..., U_{m_max} in one pass.

    The constraint rows of a smaller chain member are a prefix of the rows
    of the largest one, so a single sequence of row-block products feeds
    one rank tracker per member.  All members share the window certified
    for the largest, which is sound by window independence.
    """
    top = GoodSubspace.principal(cfg.m_max)
    window = _resolve_window(flow, top, n_max, cfg)
    mat, _ = truncate(flow, window)
    field = flow.field
    prepared = field.prepare_right(mat.data)
    d = flow.discrete_dim
    dead_top = _dead_indices(flow, top)
    dim = mat.rows
    reach = flow.endo.bandwidth
    stacks = [_make_stack(field, dim) for _ in range(cfg.m_max + 1)]
    values: list[list[int]] = [[] for _ in range(cfg.m_max + 1)]
    block = np.zeros((len(dead_top), dim), dtype=np.int64)
    block[np.arange(len(dead_top)), dead_top] = 1
    support = min(dim, (max(dead_top) + 1 if dead_top else 0))
    for n in range(1, n_max + 1):
        for m, stack in enumerate(stacks):
            for row in block[: d + m]:
                stack.insert(row)
            values[m].append(stack.rank - (d + m))
        if n < n_max:
            grown = min(dim, support + reach)
            nxt = np.zeros((len(dead_top), dim), dtype=np.int64)
            nxt[:, :grown] = field.matmul_prepared(block[:, :support], prepared, grown)
            block = nxt
            support = grown
    return [
        CodimTrace(GoodSubspace.principal(m), tuple(vals), (window,) * n_max)
        for m, vals in enumerate(values)
    ]


def cotrajectory(
    flow: Flow, u: GoodSubspace, n: int, cfg: EngineConfig = DEFAULT_CONFIG
) -> Subspace:
    """The n-step cotrajectory inside its certified window, canonical."""
    if n < 1:
        raise ValueError("cotrajectory depth must be at least 1")
    window = _resolve_window(flow, u, n, cfg)
    return cotrajectory_run(flow, u, n, window)[-1]


def cotrajectory_run(flow: Flow, u: GoodSubspace, n_max: int, window: int) -> list[Subspace]:
    """Cotrajectories for every n = 1..n_max at a pinned window."""
    out = []
    for _, _, stack in _trace_steps(flow, u, n_max, window):
        out.append(kernel(stack.matrix()))
    return out


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HStarResult:
    """Stabilized growth rate of one codimension trace, or a lower bound."""

    value: int | None
    lower_bound: Fraction
    trace: CodimTrace
    streak: int
    subadditive: bool

    @property
    def resolved(self) -> bool:
        return self.value is not None


def _terminal_streak(diffs: Sequence[int]) -> int:
    if not diffs:
        return 0
    run = 1
    for a, b in zip(reversed(diffs[:-1]), reversed(diffs)):
        if a != b:
            break
        run += 1
    return run


def _evaluate_trace(trace: CodimTrace, cfg: EngineConfig) -> HStarResult:
    diffs = trace.first_differences()
    streak = _terminal_streak(diffs)
    subadditive = trace.is_subadditive()
    lower = Fraction(trace.values[-1], len(trace.values))
    if subadditive and streak >= cfg.streak:
        return HStarResult(diffs[-1], lower, trace, streak, subadditive)
    return HStarResult(None, lower, trace, streak, subadditive)


def h_star(flow: Flow, u: GoodSubspace, cfg: EngineConfig = DEFAULT_CONFIG) -> HStarResult:
    """Growth rate of the codimension trace over a single good subspace.

    Resolves to the final first difference when the last ``cfg.streak``
    differences agree; for the representable flows the differences are
    eventually constant, so the constant equals the limit of c_n / n.
    Otherwise reports the exact lower bound c_N / N and stays unresolved.
    A subadditivity violation (impossible for true traces) also forces the
    unresolved path so a broken fixture can never resolve wrongly.
    """
    return _evaluate_trace(codim_sequence(flow, u, cfg.n_max, cfg), cfg)


@dataclass(frozen=True)
class EntropyEstimate:
    """Entropy over the principal chain of good subspaces.

    ``value`` is None while unresolved; the uniform-entropy conversion is
    reported as the exact pair (value, field order).
    """

    value: int | None
    per_u: tuple[tuple[int, HStarResult], ...]
    field_order: int
    lower_bound: Fraction

    @property
    def resolved(self) -> bool:
        return self.value is not None

    @property
    def h_top_pair(self) -> tuple[int | None, int]:
        return (self.value, self.field_order)

    @property
    def min_streak(self) -> int:
        return min(res.streak for _, res in self.per_u)


def ent_star(flow: Flow, cfg: EngineConfig = DEFAULT_CONFIG) -> EntropyEstimate:
    """Entropy estimate: supremum of per-subspace rates over U_0, ..., U_M.

    The principal chain is a local basis at zero, so its supremum equals
    the supremum over all linearly compact open subspaces.  The estimate is
    unresolved when any chain member is unresolved or when the per-member
    rates are still strictly increasing at the last member.
    """
    traces = chain_traces(flow, cfg.n_max, cfg)
    per_u = tuple((m, _evaluate_trace(trace, cfg)) for m, trace in enumerate(traces))
    results = [res for _, res in per_u]
    bounds = [res.lower_bound if res.value is None else Fraction(res.value) for res in results]
    lower = max(bounds)
    if all(res.resolved for res in results):
        values = [res.value for res in results]
        still_growing = len(values) >= 2 and values[-1] > values[-2]
        if not still_growing:
            return EntropyEstimate(max(values), tuple(per_u), flow.field.q, lower)
    return EntropyEstimate(None, tuple(per_u), flow.field.q, lower)


# ---------------------------------------------------------------------------
# independent oracle
# ---------------------------------------------------------------------------

_ORACLE_CAP = 4096


def brute_force_codim(flow: Flow, u: GoodSubspace, n: int, window: int) -> int:
    """Cotrajectory codimension by exhaustive window enumeration.

    Independent of the subspace machinery: every window vector is tested
    for membership by applying the truncated matrix repeatedly and reading
    the dead coordinates.  GF(2) only, at most 4096 vectors.
    """
    field = flow.field
    if field.q != 2:
        raise TooLarge("the enumeration oracle only runs over GF(2)")
    size = flow.discrete_dim + window
    if 2**size > _ORACLE_CAP:
        raise TooLarge(f"2^{size} window vectors exceed the cap of {_ORACLE_CAP}")
    if u.extent > window:
        raise TooLarge("window does not contain the zero set")
    mat, _ = truncate(flow, window)
    dead = _dead_indices(flow, u)
    count = 1 << size
    vectors = (np.arange(count, dtype=np.int64)[:, None] >> np.arange(size)) & 1
    alive = np.ones(count, dtype=bool)
    current = vectors
    if dead:
        alive &= ~current[:, dead].any(axis=1)
    members_u = int(alive.sum())
    for _ in range(n - 1):
        current = (current.astype(np.float64) @ mat.data.T.astype(np.float64)).astype(np.int64) % 2
        if dead:
            alive &= ~current[:, dead].any(axis=1)
    members_c = int(alive.sum())
    dim_u = members_u.bit_length() - 1
    dim_c = members_c.bit_length() - 1
    assert members_u == 1 << dim_u and members_c == 1 << dim_c
    return dim_u - dim_c


# ---------------------------------------------------------------------------
# flow algebra used by the entropy laws
# ---------------------------------------------------------------------------


def power_flow(flow: Flow, k: int) -> Flow:
    """The flow iterating the endomorphism k times."""
    if k < 1:
        raise ValueError("power must be at least 1")
    if k == 1:
        return flow
    out = flow
    for _ in range(k - 1):
        out = compose_flow(flow, out)
    return Flow(out.shape, out.endo, label=f"{flow.label}^{k}")


def conjugate_flow(flow: Flow, a: Matrix) -> Flow:
    """Conjugate by an invertible matrix acting on the discrete part plus a
    leading compact window, extended by the identity elsewhere."""
    if a.field != flow.field:
        raise NotInvertible("conjugator lives over a different field")
    if a.rows != a.cols or a.rows < flow.discrete_dim:
        raise NotInvertible("conjugator must be square and cover the discrete part")
    a_inv = inverse(a)  # raises NotInvertible when singular
    d = flow.discrete_dim
    w = a.rows - d
    endo = flow.endo
    boundary = max(
        endo.prefix_rows,
        endo.dc.rows,
        w + max(0, -endo.min_offset),
        -endo.min_offset,
        1,
    )
    wide = boundary + max(endo.max_offset, 0) + max(endo.prefix_cols, endo.cd.cols, w) + 4
    mat, _ = truncate(flow, wide)
    size = d + wide
    big = np.eye(size, dtype=np.int64)
    big[: d + w, : d + w] = a.data
    big_inv = np.eye(size, dtype=np.int64)
    big_inv[: d + w, : d + w] = a_inv.data
    prod = flow.field.arr_matmul(flow.field.arr_matmul(big, mat.data), big_inv)
    return _flow_from_window(
        flow.shape,
        [dict(p) for p in endo.stencil],
        boundary,
        prod,
        wide,
        label=f"conj({flow.label})",
    )


# ---------------------------------------------------------------------------
# report objects
# ---------------------------------------------------------------------------


def _fraction_pair(f: Fraction) -> list[int]:
    return [f.numerator, f.denominator]


def entropy_report(flow: Flow, estimate: EntropyEstimate, cfg: EngineConfig) -> dict:
    """JSON-ready report: label, field, per-subspace traces, value, and the
    uniform-entropy factor as an exact pair plus a display decimal."""
    import math

    decimal = (
        f"{estimate.value * math.log(estimate.field_order):.12f}"
        if estimate.resolved
        else None
    )
    return {
        "flow": flow.label,
        "field": flow.field.descriptor,
        "resolved": estimate.resolved,
        "value": estimate.value,
        "lower_bound": _fraction_pair(estimate.lower_bound),
        "h_top": {
            "ent_star": estimate.value,
            "field_order": estimate.field_order,
            "log_value": decimal,
        },
        "per_u": [
            {
                "m": m,
                "window": res.trace.windows[0],
                "codims": list(res.trace.values),
                "h_star": res.value,
                "lower_bound": _fraction_pair(res.lower_bound),
                "streak": res.streak,
                "subadditive": res.subadditive,
            }
            for m, res in estimate.per_u
        ],
        "config": {
            "n_max": cfg.n_max,
            "streak": cfg.streak,
            "m_max": cfg.m_max,
            "window_slack": cfg.window_slack,
        },
    }


def field_label(field) -> str:
    """Deterministic one-cell rendering of a field for CSV output."""
    return f"GF({field.q})"


def report_csv_rows(flow: Flow, estimate: EntropyEstimate) -> list[list]:
    rows = []
    label = field_label(flow.field)
    for m, res in estimate.per_u:
        for n, c in enumerate(res.trace.values, start=1):
            rows.append([flow.label, label, m, n, c, res.trace.windows[n - 1]])
    return rows

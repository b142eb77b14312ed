"""One coded time step end to end: placement, download, compute, decode.

Two schemes split each worker's coded product into per-group sub-tasks.
Scheme 1 keeps a whole coded copy of the stationary matrix on every machine
and splits the per-step download column-wise, trading storage for cheap
downloads. Scheme 2 splits the stored matrix row-wise across groups and
ships one whole coded download per machine, trading download for small
storage. Both decode each group's block from any 2L-1 of its 2L+S-1
results, so up to S stragglers per group are never waited on.

All phase functions are pure; a results multiset decodes to the same output
regardless of arrival order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import matrix as mx
from .assignment import Assignment, cyclic, group_size, heterogeneous, validate
from .cost import CostReport
from .field import PrimeField
from .lagrange import EvalPoints, InsufficientResultsError, encode_blocks, interpolate_eval
from .matrix import FieldMatrix, OpCounter

CYCLIC = "cyclic"
HETEROGENEOUS = "heterogeneous"
ASSIGNMENT_RULES = (CYCLIC, HETEROGENEOUS)


class DecodeFailureError(RuntimeError):
    """A group fell below the 2L-1 surviving results needed to decode."""

    def __init__(self, group: int, survivors: int, needed: int):
        self.group = group
        super().__init__(
            f"group {group}: only {survivors} surviving results, need {needed}"
        )


@dataclass(frozen=True)
class SystemParams:
    """Static description of the system and task dimensions.

    rows x inner is the stationary matrix, inner x cols the per-step one.
    `parts` is the coding split L, `stragglers` the per-group tolerance S,
    `preemptions` the elasticity tolerance P.
    """

    machines: int
    parts: int
    stragglers: int
    preemptions: int
    field: PrimeField
    rows: int
    inner: int
    cols: int
    speeds: tuple[Fraction, ...]
    points: EvalPoints

    def __post_init__(self) -> None:
        n, L, S, P = self.machines, self.parts, self.stragglers, self.preemptions
        if L < 1:
            raise ValueError(f"parts must be >= 1: {L}")
        if S < 0:
            raise ValueError(f"stragglers must be >= 0: {S}")
        if min(self.rows, self.inner, self.cols) < 1:
            raise ValueError(f"dimensions must be positive: {self.rows}x{self.inner}x{self.cols}")
        m = group_size(L, S)
        if not 0 <= P <= n - m:
            raise ValueError(
                f"preemptions must lie in [0, {n - m}] so every realization "
                f"keeps {m} machines: {P}"
            )
        if len(self.speeds) != n:
            raise ValueError(f"{n} machines but {len(self.speeds)} speeds")
        if any(s <= 0 for s in self.speeds):
            raise ValueError("speeds must be positive")
        if len(self.points.betas) != L or len(self.points.alphas) != n:
            raise ValueError("evaluation points sized for a different system")

    @classmethod
    def build(
        cls,
        machines: int,
        parts: int,
        stragglers: int = 0,
        preemptions: int = 0,
        modulus: int = 1993,
        rows: int = 6,
        inner: int = 6,
        cols: int = 6,
        speeds: Sequence[Fraction | int | str] | None = None,
    ) -> "SystemParams":
        fld = PrimeField(modulus)
        if speeds is None:
            speed_t = (Fraction(1),) * machines
        else:
            speed_t = tuple(Fraction(s) for s in speeds)
        return cls(
            machines=machines,
            parts=parts,
            stragglers=stragglers,
            preemptions=preemptions,
            field=fld,
            rows=rows,
            inner=inner,
            cols=cols,
            speeds=speed_t,
            points=EvalPoints.default(fld, parts, machines),
        )

    @property
    def group_size(self) -> int:
        return group_size(self.parts, self.stragglers)

    @property
    def recovery_threshold(self) -> int:
        return 2 * self.parts - 1

    def all_machines(self) -> tuple[int, ...]:
        return tuple(range(1, self.machines + 1))


@dataclass(frozen=True)
class StoredShare:
    """Coded block kept by one machine; group is None for a whole-poly share."""

    machine: int
    group: int | None
    block: FieldMatrix


@dataclass(frozen=True)
class DownloadShare:
    machine: int
    group: int | None
    block: FieldMatrix


@dataclass(frozen=True)
class TaskResult:
    machine: int
    group: int
    product: FieldMatrix


# ---------------------------------------------------------------------------
# padding: the coding layer needs inner % L == 0 and every cumulative gamma
# boundary to land on an integer row/column count. Inputs are zero-padded to
# the least sufficient size and the decode output cropped back.

def padded_inner(inner: int, parts: int) -> int:
    return parts * math.ceil(inner / parts)

def padded_extent(base: int, gammas: Sequence[Fraction]) -> int:
    denom = 1
    cum = Fraction(0)
    for g in gammas:
        cum += g
        denom = math.lcm(denom, cum.denominator)
    return denom * math.ceil(Fraction(base, denom))

def gamma_slices(extent: int, gammas: Sequence[Fraction]) -> list[tuple[int, int]]:
    """Half-open index ranges splitting `extent` proportionally to gammas."""
    slices = []
    cum = Fraction(0)
    start = 0
    for g in gammas:
        cum += g
        stop = extent * cum
        if stop.denominator != 1:
            raise mx.DimensionError(
                f"extent {extent} is not divisible at cumulative fraction {cum}"
            )
        slices.append((start, int(stop)))
        start = int(stop)
    return slices


def build_assignment(rule: str, machines: Sequence[int], params: SystemParams) -> Assignment:
    if rule == CYCLIC:
        return cyclic(machines, params.parts, params.stragglers)
    if rule == HETEROGENEOUS:
        speeds = [params.speeds[n - 1] for n in machines]
        return heterogeneous(machines, speeds, params.parts, params.stragglers)
    raise ValueError(f"unknown assignment rule {rule!r}")


def _split_parts(m: FieldMatrix, parts: int, axis: str) -> list[FieldMatrix]:
    extent = m.rows if axis == mx.ROW else m.cols
    return mx.split(m, mx.BlockPartition.equal(axis, extent, parts))


# ---------------------------------------------------------------------------
# reference path: every machine computes its whole coded product and any
# 2L-1 results reconstruct the full output. Used as a cross-check oracle.

def lcc_baseline(
    a: FieldMatrix,
    b: FieldMatrix,
    params: SystemParams,
    responding: Iterable[int],
) -> FieldMatrix:
    need = params.recovery_threshold
    chosen = sorted(set(responding))
    if len(chosen) < need:
        raise InsufficientResultsError(f"{len(chosen)} results, need {need}")
    chosen = chosen[:need]
    L = params.parts
    v_pad = padded_inner(params.inner, L)
    a_p = mx.pad_to(a, a.rows, v_pad)
    b_p = mx.pad_to(b, v_pad, b.cols)
    a_blocks = _split_parts(a_p, L, mx.COL)
    b_blocks = _split_parts(b_p, L, mx.ROW)
    results = []
    for n in chosen:
        at = params.points.alpha_for(n)
        coded_a = encode_blocks(a_blocks, params.points, at)
        coded_b = encode_blocks(b_blocks, params.points, at)
        results.append((at, mx.matmul(coded_a, coded_b)))
    total = None
    for beta in params.points.betas:
        term = interpolate_eval(results, beta)
        total = term if total is None else mx.add(total, term)
    return total


# ---------------------------------------------------------------------------
# Scheme 1: whole coded storage, column-split downloads.

def scheme1_place_storage(
    a: FieldMatrix,
    params: SystemParams,
    machines: Sequence[int] | None = None,
    counter: OpCounter | None = None,
) -> list[StoredShare]:
    """One coded copy (1/L of the stationary matrix) per machine."""
    if a.cols % params.parts != 0:
        raise mx.DimensionError(f"columns {a.cols} not divisible by {params.parts}")
    blocks = _split_parts(a, params.parts, mx.COL)
    targets = machines if machines is not None else params.all_machines()
    return [
        StoredShare(n, None, encode_blocks(blocks, params.points, params.points.alpha_for(n), counter))
        for n in targets
    ]


def scheme1_downloads(
    b: FieldMatrix,
    assignment: Assignment,
    params: SystemParams,
    counter: OpCounter | None = None,
) -> list[DownloadShare]:
    """Per membership (n, g): the g-th column slice of the coded download."""
    L = params.parts
    if b.rows % L != 0:
        raise mx.DimensionError(f"rows {b.rows} not divisible by {L}")
    bad = validate(assignment, assignment.machines, L, params.stragglers)
    if bad:
        raise ValueError(f"invalid assignment: {bad}")
    b_blocks = _split_parts(b, L, mx.ROW)
    shares = []
    for g, ((start, stop), members) in enumerate(
        zip(gamma_slices(b.cols, assignment.gammas), assignment.groups), start=1
    ):
        group_blocks = [mx.col_slice(blk, start, stop) for blk in b_blocks]
        for n in members:
            coded = encode_blocks(group_blocks, params.points, params.points.alpha_for(n), counter)
            shares.append(DownloadShare(n, g, coded))
    return shares


def scheme1_compute(
    storage: Sequence[StoredShare],
    downloads: Sequence[DownloadShare],
    counter: OpCounter | None = None,
) -> list[TaskResult]:
    stored = {s.machine: s.block for s in storage}
    return [
        TaskResult(d.machine, d.group, mx.matmul(stored[d.machine], d.block, counter))
        for d in downloads
    ]


def scheme1_decode(
    results: Sequence[TaskResult],
    assignment: Assignment,
    params: SystemParams,
    stragglers: Iterable[int] = (),
    counter: OpCounter | None = None,
) -> FieldMatrix:
    """Recover each group's column block from 2L-1 of its results, then join."""
    blocks = _decode_groups(results, assignment, params, stragglers, counter)
    out = mx.concat(blocks, mx.COL)
    return mx.crop(out, params.rows, params.cols)


# ---------------------------------------------------------------------------
# Scheme 2: row-split coded storage, whole coded downloads.

def scheme2_place_storage(
    a: FieldMatrix,
    assignment: Assignment,
    params: SystemParams,
    counter: OpCounter | None = None,
) -> list[StoredShare]:
    """Per membership (n, g): a coded copy of the g-th row slice of each part."""
    L = params.parts
    if a.cols % L != 0:
        raise mx.DimensionError(f"columns {a.cols} not divisible by {L}")
    bad = validate(assignment, assignment.machines, L, params.stragglers)
    if bad:
        raise ValueError(f"invalid assignment: {bad}")
    a_blocks = _split_parts(a, L, mx.COL)
    shares = []
    for g, ((start, stop), members) in enumerate(
        zip(gamma_slices(a.rows, assignment.gammas), assignment.groups), start=1
    ):
        group_blocks = [mx.row_slice(blk, start, stop) for blk in a_blocks]
        for n in members:
            coded = encode_blocks(group_blocks, params.points, params.points.alpha_for(n), counter)
            shares.append(StoredShare(n, g, coded))
    return shares


def scheme2_download(
    b: FieldMatrix,
    params: SystemParams,
    machines: Sequence[int] | None = None,
    counter: OpCounter | None = None,
) -> list[DownloadShare]:
    """One whole coded download (1/L of the per-step matrix) per machine."""
    L = params.parts
    if b.rows % L != 0:
        raise mx.DimensionError(f"rows {b.rows} not divisible by {L}")
    b_blocks = _split_parts(b, L, mx.ROW)
    targets = machines if machines is not None else params.all_machines()
    return [
        DownloadShare(n, None, encode_blocks(b_blocks, params.points, params.points.alpha_for(n), counter))
        for n in targets
    ]


def scheme2_compute(
    storage: Sequence[StoredShare],
    downloads: Sequence[DownloadShare],
    counter: OpCounter | None = None,
) -> list[TaskResult]:
    downloaded = {d.machine: d.block for d in downloads}
    return [
        TaskResult(s.machine, s.group, mx.matmul(s.block, downloaded[s.machine], counter))
        for s in storage
    ]


def scheme2_decode(
    results: Sequence[TaskResult],
    assignment: Assignment,
    params: SystemParams,
    stragglers: Iterable[int] = (),
    counter: OpCounter | None = None,
) -> FieldMatrix:
    """Recover each group's row block from 2L-1 of its results, then stack."""
    blocks = _decode_groups(results, assignment, params, stragglers, counter)
    out = mx.concat(blocks, mx.ROW)
    return mx.crop(out, params.rows, params.cols)


def _decode_groups(
    results: Sequence[TaskResult],
    assignment: Assignment,
    params: SystemParams,
    stragglers: Iterable[int],
    counter: OpCounter | None,
) -> list[FieldMatrix]:
    """Per group: sum of the product polynomial evaluated at every beta.

    The 2L-1 survivors with the smallest machine ids are used, so decoding
    is deterministic and independent of result arrival order. Any group with
    fewer survivors raises DecodeFailureError naming it.
    """
    dead = set(stragglers)
    need = params.recovery_threshold
    by_key = {(r.group, r.machine): r.product for r in results}
    blocks = []
    for g, members in enumerate(assignment.groups, start=1):
        survivors = sorted(
            n for n in members if n not in dead and (g, n) in by_key
        )
        if len(survivors) < need:
            raise DecodeFailureError(g, len(survivors), need)
        chosen = survivors[:need]
        evals = [(params.points.alpha_for(n), by_key[(g, n)]) for n in chosen]
        block = None
        for beta in params.points.betas:
            term = interpolate_eval(evals, beta, counter)
            block = term if block is None else mx.add(block, term)
        blocks.append(block)
    return blocks


# ---------------------------------------------------------------------------
# measured execution

@dataclass(frozen=True)
class MeasuredRun:
    """Decoded product plus instrumented per-step costs.

    Per-machine metrics are averaged over the participating machines (under
    a cyclic assignment every machine sees identical counts, matching the
    closed forms); decoding MACs are totals at the master. Storage is
    normalized by the ORIGINAL rows x inner size, so the fractions equal the
    closed forms exactly only when no padding was required.
    """

    product: FieldMatrix
    report: CostReport


def run_scheme(
    scheme_id: int,
    a: FieldMatrix,
    b: FieldMatrix,
    params: SystemParams,
    assignment: Assignment,
    stragglers: Iterable[int] = (),
) -> MeasuredRun:
    """Execute all four phases of one scheme and measure every cost."""
    if scheme_id not in (1, 2):
        raise ValueError(f"scheme must be 1 or 2: {scheme_id}")
    if (a.rows, a.cols) != (params.rows, params.inner):
        raise mx.DimensionError("stationary matrix does not match params")
    if (b.rows, b.cols) != (params.inner, params.cols):
        raise mx.DimensionError("per-step matrix does not match params")
    dead = set(stragglers)
    machines = assignment.machines
    L = params.parts
    v_pad = padded_inner(params.inner, L)
    if scheme_id == 1:
        r_pad = padded_extent(params.cols, assignment.gammas)
        q_pad = params.rows
    else:
        q_pad = padded_extent(params.rows, assignment.gammas)
        r_pad = params.cols
    a_p = mx.pad_to(a, q_pad, v_pad)
    b_p = mx.pad_to(b, v_pad, r_pad)

    enc = OpCounter()
    comp = OpCounter()
    dec = OpCounter()
    if scheme_id == 1:
        storage = scheme1_place_storage(a_p, params, machines=machines, counter=enc)
        downloads = scheme1_downloads(b_p, assignment, params, counter=enc)
        produced = scheme1_compute(storage, downloads, counter=comp)
        kept = [r for r in produced if r.machine not in dead]
        product = scheme1_decode(kept, assignment, params, dead, counter=dec)
    else:
        storage = scheme2_place_storage(a_p, assignment, params, counter=enc)
        downloads = scheme2_download(b_p, params, machines=machines, counter=enc)
        produced = scheme2_compute(storage, downloads, counter=comp)
        kept = [r for r in produced if r.machine not in dead]
        product = scheme2_decode(kept, assignment, params, dead, counter=dec)

    nt = len(machines)
    stored_elems = sum(s.block.size for s in storage)
    downloaded_elems = sum(d.block.size for d in downloads)
    uploaded_elems = sum(r.product.size for r in kept)
    report = CostReport(
        storage_fraction=Fraction(stored_elems, nt) / (params.rows * params.inner),
        encoding=Fraction(enc.macs, nt),
        download=Fraction(downloaded_elems, nt),
        computing=Fraction(comp.macs, nt),
        upload=Fraction(uploaded_elems, nt),
        decoding=Fraction(dec.macs),
    )
    return MeasuredRun(product=product, report=report)

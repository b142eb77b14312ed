"""Storage sharing: row-split the stationary matrix across two configurations.

A single scheme only hits storage sizes with an integer split factor. Giving
the top lambda fraction of the rows to one (scheme, L) configuration and the
rest to another interpolates between those sizes. Metrics that scale with
the row count combine lambda-weighted; the download and the per-step half of
the encoding cost do not depend on the row count, so both branches pay them
in full (their rows simply sum). At lambda in {0, 1} the empty branch does
no work at all and contributes nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from . import matrix as mx
from .cost import SCHEME_1, SCHEME_2, CostReport, table_row
from .lagrange import EvalPoints
from .matrix import FieldMatrix
from .scheme import MeasuredRun, SystemParams, build_assignment, run_scheme

_ROW_IDS = {1: SCHEME_1, 2: SCHEME_2}


@dataclass(frozen=True)
class SharingConfig:
    """Which two schemes share storage, and on what grid.

    With scheme_i == scheme_j the split factors walk down (L, L-1) pairs
    from l_prime to (3, 2); across schemes both branches use l_prime.
    """

    scheme_i: int
    scheme_j: int
    l_prime: int
    lambda_grid: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.scheme_i not in (1, 2) or self.scheme_j not in (1, 2):
            raise ValueError("schemes must be 1 or 2")
        floor = 3 if self.scheme_i == self.scheme_j else 1
        if self.l_prime < floor:
            raise ValueError(f"l_prime must be >= {floor}: {self.l_prime}")
        if not self.lambda_grid:
            raise ValueError("empty lambda grid")
        if any(not 0 <= lam <= 1 for lam in self.lambda_grid):
            raise ValueError("lambda values must lie in [0, 1]")

    def pairs(self) -> list[tuple[int, int]]:
        if self.scheme_i == self.scheme_j:
            return [(L, L - 1) for L in range(self.l_prime, 2, -1)]
        return [(self.l_prime, self.l_prime)]


def default_lambda_grid(points: int = 21) -> tuple[Fraction, ...]:
    """Uniform grid from 1 down to 0."""
    if points < 2:
        raise ValueError("need at least the two endpoint lambdas")
    return tuple(Fraction(points - 1 - k, points - 1) for k in range(points))


def shared_cost_row(
    scheme_i: int,
    parts_i: int,
    scheme_j: int,
    parts_j: int,
    lam: Fraction,
    stragglers: int,
    n_avail: int,
    rows: int,
    inner: int,
    cols: int,
) -> CostReport:
    """Closed-form costs of the shared system at one lambda.

    Each branch is costed at its own row count (lam * rows and
    (1 - lam) * rows); summing the branch rows applies the lambda weighting
    exactly to the row-scaling metrics and the plain sum to the rest.
    Storage is re-normalized to the full matrix.
    """
    lam = Fraction(lam)
    branches = []
    if lam > 0:
        branches.append((_ROW_IDS[scheme_i], parts_i, lam))
    if lam < 1:
        branches.append((_ROW_IDS[scheme_j], parts_j, 1 - lam))
    reports = [
        (table_row(row_id, parts, stragglers, n_avail, frac * rows, inner, cols), frac)
        for row_id, parts, frac in branches
    ]
    return CostReport(
        storage_fraction=sum(
            (rep.storage_fraction * frac for rep, frac in reports), Fraction(0)
        ),
        encoding=sum((rep.encoding for rep, _ in reports), Fraction(0)),
        download=sum((rep.download for rep, _ in reports), Fraction(0)),
        computing=sum((rep.computing for rep, _ in reports), Fraction(0)),
        upload=sum((rep.upload for rep, _ in reports), Fraction(0)),
        decoding=sum((rep.decoding for rep, _ in reports), Fraction(0)),
    )


def run_shared(
    a: FieldMatrix,
    b: FieldMatrix,
    scheme_i: int,
    parts_i: int,
    scheme_j: int,
    parts_j: int,
    lam: Fraction,
    params: SystemParams,
    rule: str,
) -> MeasuredRun:
    """Execute both branches on their row slices and stack the products.

    params describes the full system; its `parts` field is ignored in favor
    of the branch split factors. Rows are zero-padded up to the least count
    that lambda splits integrally, and the output cropped back.
    """
    lam = Fraction(lam)
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda outside [0, 1]: {lam}")
    q = params.rows
    q_pad = lam.denominator * math.ceil(Fraction(q, lam.denominator))
    a_p = mx.pad_to(a, q_pad, params.inner)
    top_rows = int(lam * q_pad)
    pieces = []
    reports = []
    for scheme_id, parts, r0, r1 in (
        (scheme_i, parts_i, 0, top_rows),
        (scheme_j, parts_j, top_rows, q_pad),
    ):
        if r1 == r0:
            continue
        branch_params = replace(
            params,
            parts=parts,
            rows=r1 - r0,
            points=EvalPoints.default(params.field, parts, params.machines),
        )
        assignment = build_assignment(rule, params.all_machines(), branch_params)
        run = run_scheme(
            scheme_id, mx.row_slice(a_p, r0, r1), b, branch_params, assignment
        )
        pieces.append(run.product)
        reports.append((run.report, Fraction(r1 - r0, 1)))
    product = mx.crop(mx.concat(pieces, mx.ROW), q, params.cols)
    full = q * params.inner
    report = CostReport(
        storage_fraction=sum(
            (rep.storage_fraction * rows_i * params.inner / full for rep, rows_i in reports),
            Fraction(0),
        ),
        encoding=sum((rep.encoding for rep, _ in reports), Fraction(0)),
        download=sum((rep.download for rep, _ in reports), Fraction(0)),
        computing=sum((rep.computing for rep, _ in reports), Fraction(0)),
        upload=sum((rep.upload for rep, _ in reports), Fraction(0)),
        decoding=sum((rep.decoding for rep, _ in reports), Fraction(0)),
    )
    return MeasuredRun(product=product, report=report)


@dataclass(frozen=True)
class SweepRow:
    parts_pair: tuple[int, int]
    lam: Fraction
    stragglers: int
    report: CostReport


def sweep_curves(
    cfg: SharingConfig,
    stragglers_values: Sequence[int],
    n_avail: int,
    rows: int,
    inner: int,
    cols: int,
) -> list[SweepRow]:
    """One analytic row per (L pair, lambda, S) grid point.

    Consumers wanting a single trade-off frontier should take the
    non-dominated subset; interior lambdas of a pair pay both branches'
    downloads and are dominated there by the pure endpoints.
    """
    out = []
    for s in stragglers_values:
        for li, lj in cfg.pairs():
            for lam in cfg.lambda_grid:
                report = shared_cost_row(
                    cfg.scheme_i, li, cfg.scheme_j, lj, lam, s, n_avail, rows, inner, cols
                )
                out.append(SweepRow((li, lj), Fraction(lam), s, report))
    return out


def storage_span(rows_out: Sequence[SweepRow]) -> tuple[Fraction, Fraction]:
    fractions = [r.report.storage_fraction for r in rows_out]
    return min(fractions), max(fractions)

"""Closed-form per-step cost model, in field-element units.

Six metrics per configuration: storage size per machine (as a fraction of
the stationary input matrix), master-side encoding MACs per machine,
download and upload cost per machine in field elements, computing MACs per
machine, and decoding MACs at the master. The two coded-storage schemes are
joined by four reference rows kept only for comparison curves; those rows
are transcribed, not re-derived, and are never executed end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .assignment import InfeasibleSystemError, group_size

Exact = Union[Fraction, int]

SCHEME_1 = "scheme1"
SCHEME_2 = "scheme2"
# Reference rows: MDS-coded storage with uncoded download (matrix-vector),
# full replicated storage with coded download, partial uncoded storage with
# coded download, and MDS-coded storage and download for matrix products.
ROW_MDS_VECTOR = "mds_vector"
ROW_FULL_STORAGE = "full_storage"
ROW_PARTIAL_STORAGE = "partial_storage"
ROW_MDS_MATMUL = "mds_matmul"

ALL_ROWS = (
    SCHEME_1,
    SCHEME_2,
    ROW_MDS_VECTOR,
    ROW_FULL_STORAGE,
    ROW_PARTIAL_STORAGE,
    ROW_MDS_MATMUL,
)

METRICS = ("storage_fraction", "encoding", "download", "computing", "upload", "decoding")


@dataclass(frozen=True)
class CostReport:
    """Exact per-step costs. decoding is None for the constant-time row."""

    storage_fraction: Fraction
    encoding: Fraction
    download: Fraction
    computing: Fraction
    upload: Fraction
    decoding: Fraction | None

    def metric(self, name: str) -> Fraction | None:
        return getattr(self, name)


def table_row(
    row_id: str,
    parts: int,
    stragglers: int,
    n_avail: int,
    rows: Exact,
    inner: Exact,
    cols: Exact,
) -> CostReport:
    """Evaluate one scheme's six cost formulas exactly.

    rows/inner/cols are the dimensions of the rows x inner stationary matrix
    and the inner x cols per-step matrix; they may be non-integer rationals
    (used by the storage-sharing combination rules).
    """
    L, S, nt = parts, stragglers, n_avail
    q, v, r = Fraction(rows), Fraction(inner), Fraction(cols)
    if L < 1 or S < 0 or nt < 1:
        raise ValueError(f"bad parameters L={L}, S={S}, N_t={nt}")
    if q < 0 or v <= 0 or r <= 0:
        raise ValueError(f"bad dimensions {q}x{v}x{r}")
    m = group_size(L, S)
    if row_id in (SCHEME_1, SCHEME_2):
        if m > nt:
            raise InfeasibleSystemError(f"group size {m} exceeds {nt} machines")
        computing = q * v * r * m / (L * nt)
        upload = q * r * m / nt
        decoding = q * r * L * (2 * L - 1)
        if row_id == SCHEME_1:
            return CostReport(
                storage_fraction=Fraction(1, L),
                encoding=q * v + v * r * m / nt,
                download=v * r * m / (L * nt),
                computing=computing,
                upload=upload,
                decoding=decoding,
            )
        return CostReport(
            storage_fraction=Fraction(m, L * nt),
            encoding=q * v * m / nt + v * r,
            download=v * r / L,
            computing=computing,
            upload=upload,
            decoding=decoding,
        )
    if row_id in (ROW_MDS_VECTOR, ROW_FULL_STORAGE, ROW_PARTIAL_STORAGE):
        if L + S > nt:
            raise InfeasibleSystemError(f"recovery set {L + S} exceeds {nt} machines")
        computing = q * v * r * (L + S) / (L * nt)
        upload = q * r * (L + S) / (L * nt)
        decoding = q * r * L
        if row_id == ROW_MDS_VECTOR:
            return CostReport(Fraction(1, L), q * v, v * r, computing, upload, decoding)
        if row_id == ROW_FULL_STORAGE:
            return CostReport(
                Fraction(1), v * r * (L + S) / nt, v * r * (L + S) / (L * nt),
                computing, upload, decoding,
            )
        return CostReport(
            Fraction(L + S, nt), v * r, v * r / L, computing, upload, decoding
        )
    if row_id == ROW_MDS_MATMUL:
        if S != 0:
            raise InfeasibleSystemError("the MDS matrix-product row tolerates no stragglers")
        if L > nt:
            raise InfeasibleSystemError(f"need {L} machines, have {nt}")
        return CostReport(
            storage_fraction=Fraction(1, L),
            encoding=q * v + v * r * L / nt,
            download=v * r / nt,
            computing=q * v * r / nt,
            upload=q * r * L,
            decoding=None,  # constant-time lookup; not modeled as a MAC count
        )
    raise ValueError(f"unknown cost row {row_id!r}")


def check_measured(
    expected: CostReport, measured: CostReport, tolerance: Exact = 0
) -> str | None:
    """Compare an instrumented run against the closed forms.

    Element counts and MAC counts must agree exactly (tolerance 0) under a
    cyclic assignment with divisible dimensions. Returns None when every
    column matches, else a message naming the first discrepant column.
    """
    tol = Fraction(tolerance)
    for name in METRICS:
        want = expected.metric(name)
        got = measured.metric(name)
        if want is None or got is None:
            if want != got:
                return f"{name}: expected {want}, measured {got}"
            continue
        if abs(want - got) > tol:
            return f"{name}: expected {want}, measured {got}"
    return None

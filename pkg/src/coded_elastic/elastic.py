"""Elasticity across time steps: availability realizations and union storage.

With up to P machines preempted, the set of possible available sets is
every subset of the N machines of size at least N - P. Storage placed
before the first step must serve all of them, so each machine keeps the
union of its per-realization placements. Scheme 1 placements do not depend
on the realization, so the union collapses to a single share; Scheme 2
shares are tagged by (realization, group) and deduplicated by content.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from . import matrix as mx
from .assignment import Assignment
from .cost import CostReport
from .matrix import FieldMatrix, OpCounter
from .scheme import (
    ASSIGNMENT_RULES,
    SystemParams,
    build_assignment,
    padded_extent,
    padded_inner,
    scheme1_compute,
    scheme1_decode,
    scheme1_downloads,
    scheme1_place_storage,
    scheme2_compute,
    scheme2_decode,
    scheme2_download,
    scheme2_place_storage,
)

DEFAULT_ENUMERATION_CAP = 100_000


class RealizationSpaceTooLargeError(ValueError):
    """The availability realization space exceeds the enumeration cap."""


@dataclass(frozen=True)
class AvailabilityRealization:
    available: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "available", tuple(sorted(self.available)))


def realization_count(machines: int, preemptions: int) -> int:
    """Number of available sets: sum of C(N, i) for i = 0..P."""
    if not 0 <= preemptions <= machines:
        raise ValueError(f"preemptions must lie in [0, {machines}]: {preemptions}")
    return sum(math.comb(machines, i) for i in range(preemptions + 1))


def enumerate_realizations(
    machines: int, preemptions: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[tuple[int, ...]]:
    """All available sets, size-descending then lexicographic."""
    total = realization_count(machines, preemptions)
    if total > cap:
        raise RealizationSpaceTooLargeError(
            f"{total} realizations exceed the cap of {cap}; "
            "sample realizations instead of materializing the union"
        )
    everyone = range(1, machines + 1)
    out: list[tuple[int, ...]] = []
    for missing in range(preemptions + 1):
        size = machines - missing
        out.extend(combinations(everyone, size))
    return out


@dataclass
class UnionStorage:
    """Per-machine stored shares covering every availability realization."""

    params: SystemParams
    scheme_id: int
    rule: str
    # machine -> tag -> block. Scheme 1 tag: ("whole",). Scheme 2 tag:
    # (realization, group).
    shares: dict[int, dict[tuple, FieldMatrix]]
    assignments: dict[tuple[int, ...], Assignment]
    raw_elements: dict[int, int]

    def storage_fraction(self, machine: int, dedup: bool = True) -> Fraction:
        """Stored elements over the stationary matrix size.

        dedup counts content-identical blocks once (they need only one
        physical copy); raw counts every per-realization share.
        """
        full = self.params.rows * self.params.inner
        if dedup:
            distinct = {blk for blk in self.shares.get(machine, {}).values()}
            return Fraction(sum(b.size for b in distinct), full)
        return Fraction(self.raw_elements.get(machine, 0), full)


def build_union_storage(
    a: FieldMatrix,
    params: SystemParams,
    scheme_id: int,
    rule: str,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> UnionStorage:
    """Place storage once so that any realization in the space can run."""
    if scheme_id not in (1, 2):
        raise ValueError(f"scheme must be 1 or 2: {scheme_id}")
    if rule not in ASSIGNMENT_RULES:
        raise ValueError(f"unknown assignment rule {rule!r}")
    if (a.rows, a.cols) != (params.rows, params.inner):
        raise mx.DimensionError("stationary matrix does not match params")
    realizations = enumerate_realizations(params.machines, params.preemptions, cap)
    v_pad = padded_inner(params.inner, params.parts)
    shares: dict[int, dict[tuple, FieldMatrix]] = {n: {} for n in params.all_machines()}
    raw: dict[int, int] = {n: 0 for n in params.all_machines()}
    assignments: dict[tuple[int, ...], Assignment] = {}

    if scheme_id == 1:
        a_p = mx.pad_to(a, params.rows, v_pad)
        for share in scheme1_place_storage(a_p, params):
            shares[share.machine][("whole",)] = share.block
            raw[share.machine] += share.block.size
        for avail in realizations:
            assignments[avail] = build_assignment(rule, avail, params)
        return UnionStorage(params, scheme_id, rule, shares, assignments, raw)

    for avail in realizations:
        assignment = build_assignment(rule, avail, params)
        assignments[avail] = assignment
        q_pad = padded_extent(params.rows, assignment.gammas)
        a_p = mx.pad_to(a, q_pad, v_pad)
        for share in scheme2_place_storage(a_p, assignment, params):
            shares[share.machine][(avail, share.group)] = share.block
            raw[share.machine] += share.block.size
    return UnionStorage(params, scheme_id, rule, shares, assignments, raw)


def run_step(
    storage: UnionStorage,
    b: FieldMatrix,
    realization: Sequence[int],
    stragglers: Iterable[int] = (),
) -> tuple[FieldMatrix, CostReport]:
    """Run one time step on a realized available set using placed storage.

    Returns the exact product and the measured per-step costs. The encoding
    metric covers only this step's download encodes; storage encoding was
    paid once when the union was built.
    """
    from .scheme import StoredShare

    params = storage.params
    avail = tuple(sorted(realization))
    if not set(avail) <= set(params.all_machines()):
        raise ValueError(f"realization {avail} contains unknown machines")
    if len(avail) < params.machines - params.preemptions:
        raise ValueError(
            f"realization of size {len(avail)} below the guaranteed floor "
            f"{params.machines - params.preemptions}"
        )
    assignment = storage.assignments.get(avail)
    if assignment is None:
        assignment = build_assignment(storage.rule, avail, params)
    dead = set(stragglers)
    L = params.parts
    v_pad = padded_inner(params.inner, L)
    enc = OpCounter()
    comp = OpCounter()
    dec = OpCounter()

    if storage.scheme_id == 1:
        r_pad = padded_extent(params.cols, assignment.gammas)
        b_p = mx.pad_to(b, v_pad, r_pad)
        stored = [
            StoredShare(n, None, storage.shares[n][("whole",)]) for n in avail
        ]
        downloads = scheme1_downloads(b_p, assignment, params, counter=enc)
        produced = scheme1_compute(stored, downloads, counter=comp)
        kept = [r for r in produced if r.machine not in dead]
        product = scheme1_decode(kept, assignment, params, dead, counter=dec)
    else:
        b_p = mx.pad_to(b, v_pad, params.cols)
        stored = []
        for n in avail:
            for tag, blk in storage.shares[n].items():
                if tag[0] == avail:
                    stored.append(StoredShare(n, tag[1], blk))
        downloads = scheme2_download(b_p, params, machines=avail, counter=enc)
        produced = scheme2_compute(stored, downloads, counter=comp)
        kept = [r for r in produced if r.machine not in dead]
        product = scheme2_decode(kept, assignment, params, dead, counter=dec)

    nt = len(avail)
    report = CostReport(
        storage_fraction=Fraction(sum(s.block.size for s in stored), nt)
        / (params.rows * params.inner),
        encoding=Fraction(enc.macs, nt),
        download=Fraction(sum(d.block.size for d in downloads), nt),
        computing=Fraction(comp.macs, nt),
        upload=Fraction(sum(r.product.size for r in kept), nt),
        decoding=Fraction(dec.macs),
    )
    return product, report

"""Computation assignments: per-group work fractions and machine groups.

An assignment over the available machines is a vector of fractions gamma
summing to 1 plus, for each fraction, a group of exactly 2L+S-1 machines
that will compute that slice of the task. The cyclic rule gives uniform
fractions with sliding windows; the heterogeneous rule gives each machine
a load proportional to its speed, capped at 1.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Speed = Fraction | int


class InfeasibleSystemError(ValueError):
    """Too few machines for the requested group size 2L+S-1."""


def group_size(parts: int, stragglers: int) -> int:
    return 2 * parts + stragglers - 1


@dataclass(frozen=True)
class Assignment:
    """Work fractions and machine groups for one time step."""

    machines: tuple[int, ...]
    group_size: int
    gammas: tuple[Fraction, ...]
    groups: tuple[tuple[int, ...], ...]

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def groups_of(self, machine: int) -> list[int]:
        """1-based indices of the groups containing a machine."""
        return [g + 1 for g, members in enumerate(self.groups) if machine in members]


@dataclass(frozen=True)
class MachineLoad:
    machine: int
    load: Fraction


def cyclic(machines: Sequence[int], parts: int, stragglers: int) -> Assignment:
    """Uniform fractions 1/N_t with sliding windows of width 2L+S-1.

    Group g (1-based) holds the machines at positions g, g+1, ...,
    g+2L+S-2 of the given ordering, wrapping modulo N_t.
    """
    nt = len(machines)
    m = group_size(parts, stragglers)
    if nt < m:
        raise InfeasibleSystemError(f"need at least {m} machines, have {nt}")
    groups = []
    for g in range(nt):
        members = sorted(machines[(g + k) % nt] for k in range(m))
        groups.append(tuple(members))
    return Assignment(
        machines=tuple(machines),
        group_size=m,
        gammas=(Fraction(1, nt),) * nt,
        groups=tuple(groups),
    )


def water_filling_loads(speeds: Sequence[Speed], total: int) -> tuple[Fraction, ...]:
    """Loads l_n = min(1, tau * s_n) with sum(l_n) = total, solved exactly.

    tau is found on the correct segment of the piecewise-linear function by
    sorting the saturation breakpoints 1/s_n, so no iterative tolerance is
    involved. Requires len(speeds) >= total.
    """
    n = len(speeds)
    if n < total:
        raise InfeasibleSystemError(f"cannot spread load {total} over {n} machines")
    fr = [Fraction(s) for s in speeds]
    if any(s <= 0 for s in fr):
        raise ValueError("speeds must be positive")
    if n == total:
        return (Fraction(1),) * n
    order = sorted(range(n), key=lambda i: fr[i], reverse=True)
    # k machines saturated at load 1: tau = (total - k) / sum of remaining speeds
    suffix = [Fraction(0)] * (n + 1)
    for idx in range(n - 1, -1, -1):
        suffix[idx] = suffix[idx + 1] + fr[order[idx]]
    for k in range(n):
        remaining = suffix[k]
        tau = Fraction(total - k, 1) / remaining
        sat_ok = k == 0 or tau * fr[order[k - 1]] >= 1
        unsat_ok = tau * fr[order[k]] <= 1
        if sat_ok and unsat_ok:
            return tuple(min(Fraction(1), tau * s) for s in fr)
    raise AssertionError("water-filling equation has no segment solution")


def heterogeneous(
    machines: Sequence[int], speeds: Sequence[Speed], parts: int, stragglers: int
) -> Assignment:
    """Speed-proportional loads realized as groups of exactly 2L+S-1 machines.

    The water-filled loads are laid end to end (largest first) around a strip
    of 2L+S-1 unit-height columns; every horizontal level of the strip then
    shows 2L+S-1 distinct machines, and cutting at all block boundaries
    yields the groups with gamma_g equal to each band's height. Loads never
    exceed 1, so no machine can face itself across a column seam.
    """
    nt = len(machines)
    if len(speeds) != nt:
        raise ValueError(f"{nt} machines but {len(speeds)} speeds")
    m = group_size(parts, stragglers)
    loads = water_filling_loads(speeds, m)
    order = sorted(range(nt), key=lambda i: (-loads[i], machines[i]))
    starts: list[Fraction] = [Fraction(0)]
    for idx in order:
        starts.append(starts[-1] + loads[idx])
    assert starts[-1] == m
    cuts = sorted({x - int(x) for x in starts[:-1]} | {Fraction(0)})
    cuts.append(Fraction(1))
    groups = []
    gammas = []
    for lo, hi in zip(cuts, cuts[1:]):
        if hi == lo:
            continue
        members = []
        for col in range(m):
            pos = col + lo
            owner = bisect_right(starts, pos) - 1
            members.append(machines[order[owner]])
        members_t = tuple(sorted(members))
        if len(set(members_t)) != m:
            raise AssertionError("strip construction produced a repeated machine")
        groups.append(members_t)
        gammas.append(hi - lo)
    return Assignment(
        machines=tuple(machines),
        group_size=m,
        gammas=tuple(gammas),
        groups=tuple(groups),
    )


def validate(
    a: Assignment, machines: Sequence[int], parts: int, stragglers: int
) -> str | None:
    """Check every assignment invariant; return the first violation or None."""
    m = group_size(parts, stragglers)
    if a.group_size != m:
        return f"group_size is {a.group_size}, expected {m}"
    if len(a.gammas) != len(a.groups):
        return f"{len(a.gammas)} fractions but {len(a.groups)} groups"
    if sum(a.gammas) != 1:
        return f"fractions sum to {sum(a.gammas)}, not 1"
    machine_set = set(machines)
    for g, (gamma, members) in enumerate(zip(a.gammas, a.groups), start=1):
        if not 0 <= gamma <= 1:
            return f"group {g}: fraction {gamma} outside [0, 1]"
        if len(set(members)) != len(members):
            return f"group {g}: repeated machine"
        if len(members) != m:
            return f"group {g}: size {len(members)}, expected {m}"
        if not set(members) <= machine_set:
            return f"group {g}: members outside the available set"
    return None


def loads(a: Assignment) -> list[MachineLoad]:
    """Per-machine total fraction; sums to 2L+S-1 across machines."""
    acc = {n: Fraction(0) for n in a.machines}
    for gamma, members in zip(a.gammas, a.groups):
        for n in members:
            acc[n] += gamma
    return [MachineLoad(n, acc[n]) for n in a.machines]

"""Monte-Carlo timing study of assignment rules under elasticity.

Each iteration draws an available set uniformly over all realizations with
at most P machines preempted, builds the per-rule machine loads, and turns
them into finish times with a configurable timing model. The master only
waits for the (N_t - S) fastest machines, so the step time is that order
statistic. All rules see the same draws within an iteration, which makes
per-iteration gains well defined (and exactly zero whenever every machine
carries a full load).

With the default noiseless model every quantity is an exact rational, so
means are bit-reproducible and independent of aggregation order.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .assignment import InfeasibleSystemError, group_size, water_filling_loads
from .elastic import realization_count
from .scheme import ASSIGNMENT_RULES, CYCLIC, HETEROGENEOUS

_KEY_STRIDE = 1_000_003  # mixes (seed, P, S, iteration) into one RNG key


@dataclass(frozen=True)
class ShiftedExponential:
    """Additive noise: shift + Exp(rate) seconds per machine per step."""

    shift: float
    rate: float

    def __post_init__(self) -> None:
        if self.shift < 0 or self.rate <= 0:
            raise ValueError(f"need shift >= 0 and rate > 0: {self}")

    def draw(self, rng: random.Random) -> float:
        return self.shift + rng.expovariate(self.rate)


@dataclass(frozen=True)
class TimingModel:
    """Deterministic map from (loads, draws) to machine finish times.

    time = base_time_per_load * load / speed, plus a noise draw if noise is
    configured, times straggler_slowdown for the S machines sampled as
    stragglers (only when the slowdown is not 1).
    """

    base_time_per_load: Fraction = Fraction(1)
    noise: ShiftedExponential | None = None
    straggler_slowdown: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.base_time_per_load <= 0:
            raise ValueError("base_time_per_load must be positive")
        if self.straggler_slowdown < 1:
            raise ValueError("straggler_slowdown must be >= 1")

    @property
    def deterministic_loads(self) -> bool:
        return self.noise is None and self.straggler_slowdown == 1


@dataclass(frozen=True)
class SimCell:
    """Aggregated result for one (P, rule, S) combination."""

    preemptions: int
    rule: str
    stragglers: int
    mean_time: Fraction | float
    gain_vs_cyclic: Fraction | float
    size_histogram: dict[int, int]


@dataclass(frozen=True)
class IterationSample:
    n_avail: int
    times: dict[str, Fraction | float]


@dataclass(frozen=True)
class RunStats:
    cells: tuple[SimCell, ...]
    samples: dict[tuple[int, int], list[IterationSample]] | None = None

    def cell(self, preemptions: int, rule: str, stragglers: int) -> SimCell:
        for c in self.cells:
            if (c.preemptions, c.rule, c.stragglers) == (preemptions, rule, stragglers):
                return c
        raise KeyError((preemptions, rule, stragglers))


def sample_realization(
    machines: int, preemptions: int, rng: random.Random
) -> tuple[int, ...]:
    """One available set, uniform over all realizations without materializing them.

    The preempted count k is drawn with probability C(N, k) / |realizations|,
    then a uniform (N - k)-subset of the machines is taken.
    """
    total = realization_count(machines, preemptions)
    u = rng.random() * total
    acc = 0
    missing = preemptions
    for k in range(preemptions + 1):
        acc += math.comb(machines, k)
        if u < acc:
            missing = k
            break
    kept = machines - missing
    return tuple(sorted(rng.sample(range(1, machines + 1), kept)))


def _machine_loads(rule: str, speeds: Sequence[Fraction], m: int) -> list[Fraction]:
    nt = len(speeds)
    if rule == CYCLIC:
        return [Fraction(m, nt)] * nt
    if rule == HETEROGENEOUS:
        return list(water_filling_loads(speeds, m))
    raise ValueError(f"unknown assignment rule {rule!r}")


def simulate(
    machines: int,
    parts: int,
    speeds: Sequence[Fraction | int | str],
    p_values: Sequence[int],
    s_values: Sequence[int],
    rules: Sequence[str] = ASSIGNMENT_RULES,
    iters: int = 5000,
    seed: int = 0,
    model: TimingModel = TimingModel(),
    keep_samples: bool = False,
) -> RunStats:
    """Mean step time per (P, rule, S) over uniformly drawn realizations."""
    speed_v = tuple(Fraction(s) for s in speeds)
    if len(speed_v) != machines:
        raise ValueError(f"{machines} machines but {len(speed_v)} speeds")
    if any(s <= 0 for s in speed_v):
        raise ValueError("speeds must be positive")
    for rule in rules:
        if rule not in ASSIGNMENT_RULES:
            raise ValueError(f"unknown assignment rule {rule!r}")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    for p in p_values:
        for s in s_values:
            if group_size(parts, s) > machines - p:
                raise InfeasibleSystemError(
                    f"P={p}, S={s}: group size {group_size(parts, s)} exceeds "
                    f"the guaranteed {machines - p} available machines"
                )
    eval_rules = tuple(dict.fromkeys((*rules, CYCLIC)))
    cells: list[SimCell] = []
    samples: dict[tuple[int, int], list[IterationSample]] = {}
    base = model.base_time_per_load

    for p in p_values:
        for s in s_values:
            m = group_size(parts, s)
            hist: dict[int, int] = {}
            sums: dict[str, Fraction] = {r: Fraction(0) for r in eval_rules}
            float_parts: dict[str, list[float]] = {r: [] for r in eval_rules}
            cell_samples: list[IterationSample] = []
            memo: dict[tuple[Fraction, ...], dict[str, Fraction]] = {}
            for it in range(iters):
                key = ((seed * _KEY_STRIDE + p) * _KEY_STRIDE + s) * _KEY_STRIDE + it
                rng = random.Random(key)
                avail = sample_realization(machines, p, rng)
                nt = len(avail)
                hist[nt] = hist.get(nt, 0) + 1
                avail_speeds = tuple(speed_v[n - 1] for n in avail)
                slow_idx: frozenset[int] = frozenset()
                if model.straggler_slowdown != 1 and s > 0:
                    slow_idx = frozenset(rng.sample(range(nt), s))
                noise_draws = None
                if model.noise is not None:
                    noise_draws = [model.noise.draw(rng) for _ in range(nt)]

                if model.deterministic_loads and avail_speeds in memo:
                    times_by_rule = memo[avail_speeds]
                else:
                    times_by_rule = {}
                    for rule in eval_rules:
                        loads = _machine_loads(rule, avail_speeds, m)
                        times: list[Fraction | float] = []
                        for i, (speed, load) in enumerate(zip(avail_speeds, loads)):
                            t: Fraction | float = base * load / speed
                            if noise_draws is not None:
                                t = float(t) + noise_draws[i]
                            if i in slow_idx:
                                t = t * model.straggler_slowdown
                            times.append(t)
                        times.sort()
                        times_by_rule[rule] = times[nt - s - 1]
                    if model.deterministic_loads:
                        memo[avail_speeds] = times_by_rule

                for rule in eval_rules:
                    t = times_by_rule[rule]
                    if isinstance(t, Fraction):
                        sums[rule] += t
                    else:
                        float_parts[rule].append(t)
                if keep_samples:
                    cell_samples.append(IterationSample(nt, dict(times_by_rule)))

            means: dict[str, Fraction | float] = {}
            for rule in eval_rules:
                if float_parts[rule]:
                    means[rule] = (float(sums[rule]) + math.fsum(float_parts[rule])) / iters
                else:
                    means[rule] = sums[rule] / iters
            for rule in rules:
                mean = means[rule]
                cyc = means[CYCLIC]
                if isinstance(mean, Fraction) and isinstance(cyc, Fraction):
                    gain: Fraction | float = (cyc - mean) / cyc if cyc else Fraction(0)
                else:
                    gain = (float(cyc) - float(mean)) / float(cyc) if cyc else 0.0
                cells.append(SimCell(p, rule, s, mean, gain, dict(hist)))
            if keep_samples:
                samples[(p, s)] = cell_samples

    return RunStats(tuple(cells), samples if keep_samples else None)

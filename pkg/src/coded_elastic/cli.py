"""Batch command line: verification runs, cost tables, sweeps, simulations.

Every data-producing command emits CSV with a leading `# config: {...}`
comment recording the effective configuration, so a fixed seed reproduces
output byte for byte. Options may come from a JSON config file
(--config PATH, keys named like the long flags) with command-line flags
taking precedence. Exit codes: 0 success, 1 verification failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
from dataclasses import dataclass, fields as dc_fields
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import matrix as mx
from .assignment import group_size
from .cost import ALL_ROWS, SCHEME_1, SCHEME_2, table_row
from .matrix import FieldMatrix
from .scheme import (
    ASSIGNMENT_RULES,
    CYCLIC,
    DecodeFailureError,
    HETEROGENEOUS,
    SystemParams,
    build_assignment,
    gamma_slices,
    padded_extent,
    padded_inner,
    scheme1_compute,
    scheme1_downloads,
    scheme1_place_storage,
    scheme1_decode,
    scheme2_compute,
    scheme2_decode,
    scheme2_download,
    scheme2_place_storage,
    lcc_baseline,
)
from .sharing import SharingConfig, default_lambda_grid, sweep_curves
from .sim import ShiftedExponential, TimingModel, simulate

# verify exercises speed diversity even when the user gives no speeds
_SPEED_PATTERN = ("1", "3/2", "2")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class RunConfig:
    """Effective options for one command (file values overridden by flags)."""

    machines: int = 9
    parts: int = 2
    stragglers: int = 0
    modulus: int = 1993
    rows: int = 6
    inner: int = 6
    cols: int = 6
    speeds: tuple[str, ...] | None = None
    n_avail: int | None = None
    scheme: str = "all"
    assignment: str = "both"
    cost_rows: tuple[str, ...] = ALL_ROWS
    scheme_i: int = 1
    scheme_j: int = 1
    l_prime: int = 9
    lambda_points: int = 21
    s_values: tuple[int, ...] = (0,)
    p_values: tuple[int, ...] = (0,)
    iters: int = 5000
    seed: int = 0
    base_time: str = "1"
    noise_shift: float | None = None
    noise_rate: float | None = None
    slowdown: str = "1"
    max_parts: int = 3
    max_stragglers: int = 2
    max_machines: int = 9
    inject_fault: int | None = None
    out: str | None = None

    def note(self) -> dict:
        data = {}
        for f in dc_fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            data[f.name] = v
        return data


def _positive(cfg: RunConfig, *names: str) -> None:
    for name in names:
        v = getattr(cfg, name)
        if not isinstance(v, int) or v < 1:
            raise ConfigError(f"{name}: must be a positive integer, got {v!r}")


def _non_negative(cfg: RunConfig, *names: str) -> None:
    for name in names:
        v = getattr(cfg, name)
        if not isinstance(v, int) or v < 0:
            raise ConfigError(f"{name}: must be a non-negative integer, got {v!r}")


def _speeds_for(cfg: RunConfig, count: int) -> tuple[Fraction, ...]:
    if cfg.speeds is None:
        return tuple(Fraction(_SPEED_PATTERN[i % len(_SPEED_PATTERN)]) for i in range(count))
    try:
        speeds = tuple(Fraction(s) for s in cfg.speeds)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"speeds: not a rational number list ({e})")
    if len(speeds) != count:
        raise ConfigError(f"speeds: expected {count} entries, got {len(speeds)}")
    if any(s <= 0 for s in speeds):
        raise ConfigError("speeds: must all be positive")
    return speeds


def _timing_model(cfg: RunConfig) -> TimingModel:
    try:
        base = Fraction(cfg.base_time)
        slow = Fraction(cfg.slowdown)
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"base_time/slowdown: not rational ({e})")
    noise = None
    if (cfg.noise_shift is None) != (cfg.noise_rate is None):
        raise ConfigError("noise_shift/noise_rate: give both or neither")
    if cfg.noise_shift is not None:
        try:
            noise = ShiftedExponential(cfg.noise_shift, cfg.noise_rate)
        except ValueError as e:
            raise ConfigError(f"noise_shift/noise_rate: {e}")
    try:
        return TimingModel(base, noise, slow)
    except ValueError as e:
        raise ConfigError(f"timing model: {e}")


def _frac_str(x: Fraction | None) -> str:
    if x is None:
        return "O(1)"
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _dec_str(x: Fraction | float | None) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _emit(cfg: RunConfig, header: Sequence[str], rows: Sequence[Sequence[str]]) -> None:
    lines = ["# config: " + json.dumps(cfg.note(), sort_keys=True)]
    lines.append(",".join(header))
    lines.extend(",".join(row) for row in rows)
    text = "\n".join(lines) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# verify

def _verify_grid(cfg: RunConfig) -> list[str]:
    schemes = ("lcc", "1", "2") if cfg.scheme == "all" else (cfg.scheme,)
    rules = ASSIGNMENT_RULES if cfg.assignment == "both" else (cfg.assignment,)
    failures: list[str] = []
    rng = random.Random(cfg.seed)
    for parts in range(1, cfg.max_parts + 1):
        for stragglers in range(0, cfg.max_stragglers + 1):
            m = group_size(parts, stragglers)
            for n in range(m, cfg.max_machines + 1):
                params = SystemParams.build(
                    machines=n,
                    parts=parts,
                    stragglers=stragglers,
                    modulus=cfg.modulus,
                    rows=cfg.rows,
                    inner=cfg.inner,
                    cols=cfg.cols,
                    speeds=_speeds_for(cfg, n),
                )
                a = FieldMatrix.random(params.field, params.rows, params.inner, rng)
                b = FieldMatrix.random(params.field, params.inner, params.cols, rng)
                expected = mx.matmul(a, b)
                for scheme in schemes:
                    if scheme == "lcc":
                        failures.extend(_verify_lcc(params, a, b, expected))
                        continue
                    for rule in rules:
                        failures.extend(
                            _verify_coded(
                                int(scheme), rule, params, a, b, expected, cfg.inject_fault
                            )
                        )
    return failures


def _verify_lcc(params, a, b, expected) -> list[str]:
    label = f"lcc L={params.parts} N={params.machines}"
    everyone = params.all_machines()
    need = params.recovery_threshold
    out = []
    for responding in (everyone, everyone[:need], everyone[-need:]):
        got = lcc_baseline(a, b, params, responding)
        if got != expected:
            out.append(f"{label} responding={responding}: product mismatch")
    return out


def _verify_coded(scheme_id, rule, params, a, b, expected, inject_fault) -> list[str]:
    label = (
        f"scheme {scheme_id} {rule} L={params.parts} S={params.stragglers} "
        f"N={params.machines}"
    )
    machines = params.all_machines()
    assignment = build_assignment(rule, machines, params)
    v_pad = padded_inner(params.inner, params.parts)
    if scheme_id == 1:
        r_pad = padded_extent(params.cols, assignment.gammas)
        a_p = mx.pad_to(a, params.rows, v_pad)
        b_p = mx.pad_to(b, v_pad, r_pad)
        storage = scheme1_place_storage(a_p, params, machines=machines)
        downloads = scheme1_downloads(b_p, assignment, params)
        results = scheme1_compute(storage, downloads)
        decode = scheme1_decode
        spans = gamma_slices(r_pad, assignment.gammas)
        block_of = lambda g: mx.col_slice(  # noqa: E731 - local helper
            expected, min(spans[g - 1][0], params.cols), min(spans[g - 1][1], params.cols)
        )
        got_block_of = lambda got, g: mx.col_slice(  # noqa: E731
            got, min(spans[g - 1][0], params.cols), min(spans[g - 1][1], params.cols)
        )
    else:
        q_pad = padded_extent(params.rows, assignment.gammas)
        a_p = mx.pad_to(a, q_pad, v_pad)
        b_p = mx.pad_to(b, v_pad, params.cols)
        storage = scheme2_place_storage(a_p, assignment, params)
        downloads = scheme2_download(b_p, params, machines=machines)
        results = scheme2_compute(storage, downloads)
        decode = scheme2_decode
        spans = gamma_slices(q_pad, assignment.gammas)
        block_of = lambda g: mx.row_slice(  # noqa: E731
            expected, min(spans[g - 1][0], params.rows), min(spans[g - 1][1], params.rows)
        )
        got_block_of = lambda got, g: mx.row_slice(  # noqa: E731
            got, min(spans[g - 1][0], params.rows), min(spans[g - 1][1], params.rows)
        )

    if inject_fault is not None and inject_fault <= assignment.n_groups:
        corrupted = []
        flipped = False
        for r in results:
            if not flipped and r.group == inject_fault and r.product.size:
                data = list(r.product.data)
                data[0] ^= 1
                corrupted.append(
                    type(r)(r.machine, r.group, FieldMatrix(r.product.field, r.product.rows, r.product.cols, data))
                )
                flipped = True
            else:
                corrupted.append(r)
        results = corrupted

    out = []
    for dead in itertools.combinations(machines, params.stragglers):
        kept = [r for r in results if r.machine not in dead]
        try:
            got = decode(kept, assignment, params, dead)
        except DecodeFailureError as e:
            out.append(f"{label} stragglers={dead}: decode failed for group {e.group}")
            continue
        if got != expected:
            bad = [
                g
                for g in range(1, assignment.n_groups + 1)
                if got_block_of(got, g) != block_of(g)
            ]
            out.append(f"{label} stragglers={dead}: mismatch in group(s) {bad}")
    return out


def cmd_verify(cfg: RunConfig) -> int:
    _positive(cfg, "machines", "parts", "rows", "inner", "cols", "max_parts", "max_machines")
    _non_negative(cfg, "max_stragglers", "seed")
    if cfg.scheme not in ("all", "1", "2", "lcc"):
        raise ConfigError(f"scheme: must be one of 1, 2, lcc, all; got {cfg.scheme!r}")
    if cfg.assignment not in ("both",) + ASSIGNMENT_RULES:
        raise ConfigError(f"assignment: must be cyclic, heterogeneous or both; got {cfg.assignment!r}")
    if group_size(cfg.max_parts, cfg.max_stragglers) > cfg.max_machines:
        raise ConfigError(
            "max_machines: grid is empty because group size "
            f"{group_size(cfg.max_parts, cfg.max_stragglers)} exceeds it"
        )
    failures = _verify_grid(cfg)
    for line in failures:
        print(f"FAIL {line}")
    if failures:
        print(f"verification failed: {len(failures)} mismatch(es)")
        return 1
    print("verification passed: decode equals the plain product on the whole grid")
    return 0


# ---------------------------------------------------------------------------
# cost

def cmd_cost(cfg: RunConfig) -> int:
    _positive(cfg, "parts", "rows", "inner", "cols")
    _non_negative(cfg, "stragglers")
    nt = cfg.n_avail if cfg.n_avail is not None else cfg.machines
    if nt < 1:
        raise ConfigError(f"n_avail: must be positive, got {nt}")
    unknown = [r for r in cfg.cost_rows if r not in ALL_ROWS]
    if unknown:
        raise ConfigError(f"cost_rows: unknown row(s) {unknown}; valid: {list(ALL_ROWS)}")
    header = [
        "scheme", "L", "S", "N_t", "q", "v", "r",
        "storage", "encoding", "download", "computing", "upload", "decoding",
        "storage_dec", "encoding_dec", "download_dec", "computing_dec",
        "upload_dec", "decoding_dec",
    ]
    rows_out = []
    for row_id in cfg.cost_rows:
        try:
            rep = table_row(row_id, cfg.parts, cfg.stragglers, nt, cfg.rows, cfg.inner, cfg.cols)
        except ValueError as e:
            raise ConfigError(f"cost_rows: {row_id}: {e}")
        metrics = [rep.storage_fraction, rep.encoding, rep.download, rep.computing, rep.upload, rep.decoding]
        rows_out.append(
            [row_id, str(cfg.parts), str(cfg.stragglers), str(nt),
             str(cfg.rows), str(cfg.inner), str(cfg.cols)]
            + [_frac_str(v) for v in metrics]
            + [_dec_str(v) for v in metrics]
        )
    _emit(cfg, header, rows_out)
    return 0


# ---------------------------------------------------------------------------
# sweep

def cmd_sweep(cfg: RunConfig) -> int:
    _positive(cfg, "rows", "inner", "cols", "l_prime")
    nt = cfg.n_avail if cfg.n_avail is not None else cfg.machines
    if nt < 1:
        raise ConfigError(f"n_avail: must be positive, got {nt}")
    if cfg.lambda_points < 2:
        raise ConfigError(f"lambda_points: need at least 2, got {cfg.lambda_points}")
    if any(s < 0 for s in cfg.s_values):
        raise ConfigError(f"s_values: must be non-negative, got {list(cfg.s_values)}")
    try:
        share = SharingConfig(
            cfg.scheme_i, cfg.scheme_j, cfg.l_prime, default_lambda_grid(cfg.lambda_points)
        )
    except ValueError as e:
        raise ConfigError(f"scheme_i/scheme_j/l_prime: {e}")
    for s in cfg.s_values:
        worst = max(group_size(li, s) for li, _ in share.pairs())
        if worst > nt:
            raise ConfigError(f"s_values: S={s} needs {worst} machines, n_avail is {nt}")
    rows_out = []
    for row in sweep_curves(share, cfg.s_values, nt, cfg.rows, cfg.inner, cfg.cols):
        rep = row.report
        rows_out.append(
            [
                f"{row.parts_pair[0]}-{row.parts_pair[1]}",
                _dec_str(row.lam),
                str(row.stragglers),
                _dec_str(rep.storage_fraction),
                _dec_str(rep.download),
                _dec_str(rep.computing),
                _dec_str(rep.upload),
                _dec_str(rep.decoding),
            ]
        )
    header = ["L_pair", "lambda", "S", "storage_fraction", "download", "computing", "upload", "decoding"]
    _emit(cfg, header, rows_out)
    return 0


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(cfg: RunConfig) -> int:
    _positive(cfg, "machines", "parts", "iters")
    _non_negative(cfg, "seed")
    if not cfg.p_values:
        raise ConfigError("p_values: empty")
    if any(p < 0 for p in cfg.p_values):
        raise ConfigError(f"p_values: must be non-negative, got {list(cfg.p_values)}")
    if any(s < 0 for s in cfg.s_values):
        raise ConfigError(f"s_values: must be non-negative, got {list(cfg.s_values)}")
    rules = ASSIGNMENT_RULES if cfg.assignment == "both" else (cfg.assignment,)
    if cfg.assignment not in ("both",) + ASSIGNMENT_RULES:
        raise ConfigError(f"assignment: must be cyclic, heterogeneous or both; got {cfg.assignment!r}")
    speeds = _speeds_for(cfg, cfg.machines)
    model = _timing_model(cfg)
    for p in cfg.p_values:
        for s in cfg.s_values:
            if group_size(cfg.parts, s) > cfg.machines - p:
                raise ConfigError(
                    f"p_values/s_values: P={p}, S={s} infeasible; group size "
                    f"{group_size(cfg.parts, s)} exceeds {cfg.machines - p} machines"
                )
    stats = simulate(
        machines=cfg.machines,
        parts=cfg.parts,
        speeds=speeds,
        p_values=cfg.p_values,
        s_values=cfg.s_values,
        rules=rules,
        iters=cfg.iters,
        seed=cfg.seed,
        model=model,
    )
    rows_out = [
        [str(c.preemptions), c.rule, str(c.stragglers), _dec_str(c.mean_time), _dec_str(c.gain_vs_cyclic)]
        for c in stats.cells
    ]
    _emit(cfg, ["P", "assignment", "S", "mean_time", "gain_vs_cyclic"], rows_out)
    return 0


# ---------------------------------------------------------------------------
# argument plumbing

def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip() != "")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coded-elastic",
        description="Coded elastic matrix multiplication: verification, cost tables, "
        "storage-sharing sweeps, and timing simulations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="JSON file with defaults for any flag")
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
        p.add_argument("--out", type=str, help="output path (default stdout)")

    pv = sub.add_parser("verify", help="check decode == plain product over a parameter grid")
    common(pv)
    pv.add_argument("--scheme", choices=["1", "2", "lcc", "all"])
    pv.add_argument("--assignment", choices=["cyclic", "heterogeneous", "both"])
    pv.add_argument("--max-parts", dest="max_parts", type=int)
    pv.add_argument("--max-stragglers", dest="max_stragglers", type=int)
    pv.add_argument("--max-machines", dest="max_machines", type=int)
    pv.add_argument("--modulus", type=int)
    pv.add_argument("--rows", type=int)
    pv.add_argument("--inner", type=int)
    pv.add_argument("--cols", type=int)
    pv.add_argument("--speeds", type=_str_list)
    pv.add_argument("--inject-fault", dest="inject_fault", type=int,
                    help="corrupt one result of this group id (for testing the checker)")
    pv.set_defaults(func=cmd_verify)

    pc = sub.add_parser("cost", help="closed-form cost table rows")
    common(pc)
    pc.add_argument("--parts", "--l", dest="parts", type=int)
    pc.add_argument("--stragglers", "--s", dest="stragglers", type=int)
    pc.add_argument("--n-avail", dest="n_avail", type=int)
    pc.add_argument("--rows", type=int)
    pc.add_argument("--inner", type=int)
    pc.add_argument("--cols", type=int)
    pc.add_argument("--cost-rows", dest="cost_rows", type=_str_list,
                    help=f"comma-separated rows from {', '.join(ALL_ROWS)}")
    pc.set_defaults(func=cmd_cost)

    ps = sub.add_parser("sweep", help="storage-sharing trade-off curves")
    common(ps)
    ps.add_argument("--scheme-i", dest="scheme_i", type=int)
    ps.add_argument("--scheme-j", dest="scheme_j", type=int)
    ps.add_argument("--l-prime", dest="l_prime", type=int)
    ps.add_argument("--lambda-points", dest="lambda_points", type=int)
    ps.add_argument("--s-values", dest="s_values", type=_int_list)
    ps.add_argument("--n-avail", dest="n_avail", type=int)
    ps.add_argument("--rows", type=int)
    ps.add_argument("--inner", type=int)
    ps.add_argument("--cols", type=int)
    ps.set_defaults(func=cmd_sweep)

    pm = sub.add_parser("simulate", help="Monte-Carlo step times under elasticity")
    common(pm)
    pm.add_argument("--machines", "--n", dest="machines", type=int)
    pm.add_argument("--parts", "--l", dest="parts", type=int)
    pm.add_argument("--s-values", dest="s_values", type=_int_list)
    pm.add_argument("--p-values", dest="p_values", type=_int_list)
    pm.add_argument("--speeds", type=_str_list)
    pm.add_argument("--iters", type=int)
    pm.add_argument("--assignment", choices=["cyclic", "heterogeneous", "both"])
    pm.add_argument("--base-time", dest="base_time", type=str)
    pm.add_argument("--noise-shift", dest="noise_shift", type=float)
    pm.add_argument("--noise-rate", dest="noise_rate", type=float)
    pm.add_argument("--slowdown", type=str)
    pm.set_defaults(func=cmd_simulate)

    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    """File values (if any) overridden by explicitly given flags."""
    cfg = RunConfig()
    known = {f.name: f for f in dc_fields(RunConfig)}
    if args.config is not None:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"config: cannot read {args.config}: {e}")
        if not isinstance(raw, dict):
            raise ConfigError("config: top level must be a JSON object")
        for key, value in raw.items():
            if key not in known:
                raise ConfigError(f"config: unknown field {key!r}")
            if isinstance(value, list):
                value = tuple(str(v) if key == "speeds" else v for v in value)
            setattr(cfg, key, value)
    for key in known:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            setattr(cfg, key, flag_value)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        return args.func(cfg)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``seclat {eval,sweep,optimize,thresholds,simulate}``.

Exit codes: 0 success, 1 I/O failure, 2 invalid arguments or infeasible problem.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from seclat import latency
from seclat.errors import DomainError, InfeasibleError, InfiniteLatencyError, NoThresholdError
from seclat.fbl import LinkParams, db_to_linear, effective_secure_rate, esp, linear_to_db
from seclat.optimizer import (
    SolverConfig,
    blocklength_threshold,
    gamma_threshold,
    gamma_threshold_lhs,
    joint_optimize,
    optimal_blocklength,
    optimal_snr,
    threshold_h,
)
from seclat.simulator import SimulationConfig, run_with_traces

SCHEMA_VERSION = "1"
SWEEP_HEADER = [
    "axis_value", "p_b", "p_e", "p_d_raw", "p_d", "esp", "esp_floor", "avg_sl_s", "baseline_latency_s",
]
DEFAULT_SLOT_MS = 1.0 / 120.0


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return format(float(x), ".12g")


def _finite_or_none(x):
    return x if x is None or math.isfinite(x) else None


# ---------------------------------------------------------------------------
# parser


def _common(p):
    g = p.add_argument_group("link parameters")
    g.add_argument("--payload-bits", type=int, default=64, help="payload D in bits (default 64)")
    g.add_argument("--blocklength", type=int, help="blocklength L in channel uses")
    g.add_argument("--snr-db", type=float, help="SNR at Bob and Eve (dB)")
    g.add_argument("--snr-bob-db", type=float, help="SNR at Bob (dB), overrides --snr-db")
    g.add_argument("--snr-eve-db", type=float, help="SNR at Eve (dB), overrides --snr-db")
    g.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="packet generation probability per idle slot (default 1)")
    g.add_argument("--slot-ms", type=float, default=DEFAULT_SLOT_MS, help="slot duration in ms (default 1/120)")
    g.add_argument("--symbol-rate", type=float, default=1.0, help="symbols per second (default 1)")
    g.add_argument("--noise-dbm", type=float, default=-114.0, help="noise power, recorded as metadata only")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--config", help="flat JSON file of flag values; explicit flags win")


def build_parser():
    parser = argparse.ArgumentParser(prog="seclat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate one configuration")
    _common(p)

    p = sub.add_parser("sweep", help="sweep one axis and write CSV")
    _common(p)
    p.add_argument("--axis", choices=["blocklength", "snr_db", "lambda"])
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--step", type=float)
    grp.add_argument("--num", type=int)

    p = sub.add_parser("optimize", help="optimal L, SNR, or both")
    _common(p)
    p.add_argument("--mode", choices=["L", "gamma", "joint"])
    p.add_argument("--l-max", type=int, default=1000)
    p.add_argument("--gamma-min-db", type=float, default=-30.0)
    p.add_argument("--gamma-max-db", type=float, default=30.0)
    p.add_argument("--tol-gamma", type=float, default=1e-9)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--taylor-terms", type=int, help="use the truncated series for P_e in the stationarity equation")

    p = sub.add_parser("thresholds", help="SNR and blocklength saturation thresholds")
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo of the retransmission process")
    _common(p)
    p.add_argument("--horizon", type=int, default=1_000_000, help="slots per replication")
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--min-expected-successes", type=float, default=100.0)
    p.add_argument("--trace", help="write a per-packet CSV trace of replication 0 here")
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise UsageError(f"--config: cannot read {known.config}: {exc}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"--config: invalid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise UsageError("--config: expected a flat JSON object")
    values = {}
    for key, val in cfg.items():
        dest = key.lstrip("-").replace("-", "_")
        values["lam" if dest == "lambda" else dest] = val
    subparsers = parser._subparsers._group_actions[0].choices
    for sp in subparsers.values():
        dests = {a.dest for a in sp._actions}
        unknown = set(values) - dests
        if unknown:
            raise UsageError(f"--config: unknown keys {sorted(unknown)}")
        sp.set_defaults(**values)


# ---------------------------------------------------------------------------
# helpers


def _snrs(args, required=True):
    bob = args.snr_bob_db if args.snr_bob_db is not None else args.snr_db
    eve = args.snr_eve_db if args.snr_eve_db is not None else args.snr_db
    if required and (bob is None or eve is None):
        raise UsageError("--snr-db (or both --snr-bob-db and --snr-eve-db) is required")
    return bob, eve


def _require(args, *names):
    for name in names:
        if getattr(args, name.lstrip("-").replace("-", "_")) is None:
            raise UsageError(f"{name} is required")


def _slot_s(args):
    if not args.slot_ms > 0:
        raise UsageError("--slot-ms must be > 0")
    return args.slot_ms / 1000.0


def _link(args, blocklength=None, snr_bob_db=None, snr_eve_db=None, lam=None):
    bob, eve = _snrs(args)
    try:
        return LinkParams(
            payload_bits=args.payload_bits,
            blocklength=blocklength if blocklength is not None else args.blocklength,
            snr_bob=db_to_linear(snr_bob_db if snr_bob_db is not None else bob),
            snr_eve=db_to_linear(snr_eve_db if snr_eve_db is not None else eve),
            slot_duration=_slot_s(args),
            gen_prob=lam if lam is not None else args.lam,
            symbol_rate=args.symbol_rate,
        )
    except DomainError as exc:
        raise UsageError(str(exc))


def _latencies(probs, lam, slot):
    try:
        sl = latency.average_sl(probs.p_esp, lam, slot)
    except InfiniteLatencyError:
        sl = math.inf
    try:
        base = latency.baseline_latency(1.0 - probs.p_bob_err, lam, slot)
    except InfiniteLatencyError:
        base = math.inf
    return sl, base


def _row(axis_value, link):
    probs = esp(link)
    sl, base = _latencies(probs, link.gen_prob, link.slot_duration)
    return [axis_value, probs.p_bob_err, probs.p_eve_err, probs.p_detect_raw, probs.p_detect,
            probs.p_esp, probs.p_esp_floor, sl, base]


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, (float, int, np.floating, np.integer)) else v for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args):
    _require(args, "--blocklength")
    link = _link(args)
    probs = esp(link)
    sl, base = _latencies(probs, link.gen_prob, link.slot_duration)
    rec = dict(zip(SWEEP_HEADER[1:], _row(None, link)[1:]))
    rec["effective_secure_rate_bps"] = effective_secure_rate(link)
    if probs.p_esp >= latency.ESP_ZERO:
        rec["mean_attempt_time_s"] = latency.mean_attempt_time(probs.p_esp, link.slot_duration)
        rec["arrival_rate_per_s"] = latency.arrival_rate(probs.p_esp, link.gen_prob, link.slot_duration)
        rec["mean_area_s2"] = latency.mean_area(probs.p_esp, link.slot_duration)
    rec["mean_wait_s"] = latency.mean_wait(link.gen_prob, link.slot_duration)
    if args.format == "csv":
        _emit(_csv(list(rec), [list(rec.values())]), args.out)
    else:
        payload = {"schema_version": SCHEMA_VERSION, "params": _params(args)}
        payload.update({k: _finite_or_none(v) for k, v in rec.items()})
        _emit(_json(payload), args.out)


def _params(args):
    bob, eve = _snrs(args, required=False)
    return {
        "payload_bits": args.payload_bits,
        "blocklength": args.blocklength,
        "snr_bob_db": bob,
        "snr_eve_db": eve,
        "lambda": args.lam,
        "slot_ms": args.slot_ms,
        "symbol_rate": args.symbol_rate,
        "noise_dbm": args.noise_dbm,
    }


def sweep_grid(start, stop, step=None, num=None):
    if step is None and num is None:
        raise UsageError("one of --step or --num is required")
    if step is not None:
        if step == 0 or (stop - start) / step < 0:
            raise UsageError("--step must move from --start towards --stop")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        grid = start + step * np.arange(count)
    else:
        if num < 1:
            raise UsageError("--num must be >= 1")
        grid = np.linspace(start, stop, num)
    return grid


def sweep_rows(args):
    _require(args, "--axis", "--start", "--stop")
    grid = sweep_grid(args.start, args.stop, args.step, args.num)
    rows = []
    for v in grid:
        if args.axis == "blocklength":
            if v != round(v):
                raise UsageError("blocklength sweep needs integer grid points")
            rows.append(_row(int(round(v)), _link(args, blocklength=int(round(v)))))
        elif args.axis == "snr_db":
            _require(args, "--blocklength")
            args_snr = argparse.Namespace(**{**vars(args), "snr_db": v, "snr_bob_db": None, "snr_eve_db": None})
            rows.append(_row(float(v), _link(args_snr)))
        else:
            _require(args, "--blocklength")
            rows.append(_row(float(v), _link(args, lam=float(v))))
    return rows


def cmd_sweep(args):
    _emit(_csv(SWEEP_HEADER, sweep_rows(args)), args.out)


def cmd_optimize(args):
    _require(args, "--mode")
    lo, hi = db_to_linear(args.gamma_min_db), db_to_linear(args.gamma_max_db)
    cfg = SolverConfig(l_max=args.l_max, gamma_bounds=(lo, hi), tol_gamma=args.tol_gamma,
                       max_iters=args.max_iters, taylor_terms=args.taylor_terms)
    slot = _slot_s(args)
    try:
        cfg.validate(args.payload_bits)
        if args.mode == "L":
            bob, _ = _snrs(args)
            res = optimal_blocklength(db_to_linear(bob), args.payload_bits, cfg, args.lam, slot)
            extra = {"blocklength": res.variable}
        elif args.mode == "gamma":
            _require(args, "--blocklength")
            res = optimal_snr(args.blocklength, args.payload_bits, cfg, args.lam, slot)
            extra = {"snr_db": linear_to_db(res.variable)}
        else:
            res = joint_optimize(args.payload_bits, cfg, args.lam, slot)
            extra = {"snr_db": linear_to_db(res.variable[0]), "blocklength": res.variable[1]}
    except (InfeasibleError, DomainError) as exc:
        raise UsageError(str(exc))
    out = {"schema_version": SCHEMA_VERSION, "mode": args.mode, "payload_bits": args.payload_bits}
    out.update(extra)
    out["result"] = _jsonable(res.to_dict())
    _emit(_json(out), args.out)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def cmd_thresholds(args):
    d = args.payload_bits
    try:
        g_t = gamma_threshold(d)
        l_t = blocklength_threshold(d)
    except NoThresholdError as exc:
        raise UsageError(str(exc))
    rhs = (d * math.log(2) - 4) / (d * math.log(2))
    out = {
        "schema_version": SCHEMA_VERSION,
        "payload_bits": d,
        "gamma_t_linear": g_t,
        "gamma_t_db": linear_to_db(g_t),
        "gamma_t_residual": gamma_threshold_lhs(g_t) - rhs,
        "l_t": l_t,
        "l_t_residual": threshold_h(l_t, d) - (d * math.log(2) - 4),
    }
    _emit(_json(out), args.out)


def cmd_simulate(args):
    _require(args, "--blocklength")
    link = _link(args)
    try:
        cfg = SimulationConfig(link, args.horizon, seed=args.seed, replications=args.replications,
                               min_expected_successes=args.min_expected_successes, workers=args.workers)
        probs = cfg.security()
        analytic = latency.average_sl(probs.p_esp, link.gen_prob, link.slot_duration)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report, traces = run_with_traces(cfg)
    except (DomainError, InfiniteLatencyError) as exc:
        raise UsageError(str(exc))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    spread = report.std_error > 1e-9 * abs(analytic)
    z = (report.empirical_avg_sl - analytic) / report.std_error if spread else math.nan
    out = {
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "params": _params(args),
        "horizon_slots": args.horizon,
        "replications": args.replications,
        "p_esp": probs.p_esp,
        "report": _jsonable(report.to_dict()),
        "analytic_avg_sl_s": analytic,
        "z_score": _finite_or_none(z),
        "comparison": _compare(report, analytic, z),
    }
    if args.trace:
        t = traces[0]
        rows = zip(range(len(t.attempts)), t.wait_slots, t.start_slot, t.attempts,
                   t.attempts * link.slot_duration)
        with open(args.trace, "w", newline="") as fh:
            fh.write(_csv(["packet", "wait_slots", "start_slot", "attempts", "sl_s"], rows))
    _emit(_json(out), args.out)


def _compare(report, analytic, z):
    if report.std_error > 1e-9 * abs(analytic):
        return "pass" if abs(z) <= 3.0 else "fail"
    # a degenerate trace (every cycle identical) has zero spread
    return "pass" if math.isclose(report.empirical_avg_sl, analytic, rel_tol=1e-3) else "fail"


COMMANDS = {
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "thresholds": cmd_thresholds,
    "simulate": cmd_simulate,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"seclat: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"seclat: I/O error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

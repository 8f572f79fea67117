"""Command-line front end.

Parameters come from flags, an optional ``key=value`` scenario file
(``--scenario``) and figure presets (``--preset``), with that precedence.
Results are CSV on stdout, or in ``--output``; when ``--output`` is absent
and ``EDTQUEUE_OUTPUT_DIR`` is set, ``<dir>/<subcommand>.csv`` is written.

Exit codes: 0 success, 2 invalid arguments, 3 numeric or simulation
failure, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys

import numpy as np

from .channel import ChannelParams, SensingStrategy
from .edt import edt_pdf_continuous, edt_pmf_periodic
from .errors import DomainError, NumericFailure, SimulationError
from .random_ttr import RandomTtrLaw, RayleighTtrSpec
from .service import moments_poff_continuous, moments_poff_periodic, moments_pon_continuous, \
    moments_pon_periodic, p_on_type2, solve_scenario
from .sim import SimConfig, sample_edt, simulate_queue
from .sim.core import EmpiricalDistribution
from . import validation

__all__ = ["main", "run_subcommand", "build_parser", "db_to_linear", "OUTPUT_DIR_ENV"]

OUTPUT_DIR_ENV = "EDTQUEUE_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

_PRESET_KEYS = {"ttr": "ttr", "lam": "lam", "mu": "mu", "ts": "ts", "h": "h", "w": "w",
                "oneshot": "oneshot"}


class UsageError(Exception):
    pass


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# Argument handling
# --------------------------------------------------------------------------

def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v > 0.0):
        raise argparse.ArgumentTypeError(f"must be finite and > 0: {text!r}")
    return v


def _channel_args(p, ttr=True):
    if ttr:
        p.add_argument("--ttr", type=_positive_float, help="transmission time")
    p.add_argument("--lambda", dest="lam", type=_positive_float, help="mean PU busy period")
    p.add_argument("--mu", type=_positive_float, help="mean PU idle period")
    p.add_argument("--ts", type=_positive_float, help="sensing period (omit for continuous)")


def _common(p):
    p.add_argument("--preset", choices=sorted(validation.PRESETS), help="figure parameters")
    p.add_argument("--scenario", help="key=value file; flags override it")
    p.add_argument("--output", help="CSV path (default: stdout or $%s)" % OUTPUT_DIR_ENV)


def _random_args(p):
    p.add_argument("--h", type=_positive_float, help="packet size in bits")
    p.add_argument("--w", type=_positive_float, help="bandwidth")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--snr-db", type=float, help="mean SNR in dB")
    g.add_argument("--snr", type=_positive_float, help="mean SNR, linear")
    p.add_argument("--oneshot", action="store_true", default=None,
                   help="packet needs a single idle period")


def _sim_args(p):
    p.add_argument("--samples", type=int, help="samples or packets (total over replicas)")
    p.add_argument("--seed", type=int, help="64-bit seed")
    p.add_argument("--replicas", type=int, help="independent RNG substreams")
    p.add_argument("--workers", type=int, help="threads running replicas")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edtqueue",
                                     description="Extended delivery time and secondary queue delay "
                                                 "under opportunistic spectrum access.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("edt-pdf", help="continuous-sensing EDT law (atom + density)")
    _channel_args(p)
    _common(p)
    p.add_argument("--points", type=int, help="density grid points (default 500)")
    p.add_argument("--t-max", type=_positive_float, help="grid end (default: 99.99% quantile)")

    p = sub.add_parser("edt-pmf", help="periodic-sensing EDT PMF")
    _channel_args(p)
    _common(p)

    p = sub.add_parser("edt-random", help="EDT density for a Rayleigh-random transmission time")
    _channel_args(p, ttr=False)
    _random_args(p)
    _common(p)
    p.add_argument("--points", type=int, help="grid points (default 400)")
    p.add_argument("--t-max", type=_positive_float, help="grid end (default 40)")

    p = sub.add_parser("moments", help="service-time moments and P_on,2")
    _channel_args(p)
    _common(p)
    p.add_argument("--psi", type=_positive_float, help="mean interarrival time for P_on,2")

    p = sub.add_parser("queue", help="two-type and conventional M/G/1 delay over a psi sweep")
    _channel_args(p)
    _common(p)
    p.add_argument("--psi", type=_positive_float, nargs="+", help="mean interarrival time(s)")

    p = sub.add_parser("simulate", help="Monte-Carlo EDT law, or a queue run with --psi")
    _channel_args(p)
    _random_args(p)
    _common(p)
    _sim_args(p)
    p.add_argument("--psi", type=_positive_float, help="run the queue with this mean interarrival")
    p.add_argument("--bins", type=int, help="histogram bins (default 200)")

    p = sub.add_parser("validate", help="analytic-vs-simulation report, one PASS/FAIL per criterion")
    p.add_argument("--preset", choices=sorted(validation.PRESETS), help="validate one figure")
    p.add_argument("--criteria", nargs="+", choices=list(validation.CRITERIA),
                   help="criteria to run (default: all)")
    p.add_argument("--lambda-scale", type=_positive_float,
                   help="scale the analytic busy mean in fig4 (negative control)")
    p.add_argument("--output", help="write the report here as well")
    _sim_args(p)
    return parser


def _read_scenario(path) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read scenario file: {exc}") from None
    for i, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{i}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_").lower()] = value
    return values


def _apply_defaults(parser, args, argv):
    """Fill unset options from the scenario file, then from the preset."""
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    if getattr(args, "scenario", None):
        for key, text in _read_scenario(args.scenario).items():
            dest = {"lambda": "lam"}.get(key, key)
            if dest not in actions:
                raise UsageError(f"unknown scenario key {key!r}")
            if getattr(args, dest) is not None:
                continue
            act = actions[dest]
            try:
                if act.nargs == "+":
                    value = [act.type(t) for t in text.replace(",", " ").split()]
                elif act.type is not None:
                    value = act.type(text)
                elif act.const is True:
                    value = text.lower() in ("1", "true", "yes")
                else:
                    value = text
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"scenario key {key}: {exc}") from None
            setattr(args, dest, value)
    preset = getattr(args, "preset", None)
    if preset and args.command != "validate":
        for key, val in validation.PRESETS[preset].items():
            dest = _PRESET_KEYS.get(key)
            if dest in actions and getattr(args, dest) is None:
                setattr(args, dest, val)
            if key == "snr" and "snr" in actions and args.snr is None and args.snr_db is None:
                args.snr = val
            if key == "psi" and "psi" in actions and args.psi is None:
                args.psi = list(val) if actions["psi"].nargs == "+" else val[0]
            if key == "ts_list" and "ts" in actions and args.ts is None:
                args.ts = val[-1]


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + {"lam": "lambda"}.get(n, n).replace("_", "-") for n in missing)
        raise UsageError(f"missing required parameter(s): {flags}")


def _channel(args):
    _require(args, "lam", "mu")
    return ChannelParams(args.lam, args.mu)


def _sensing(args):
    return SensingStrategy.periodic(args.ts) if args.ts is not None else \
        SensingStrategy.continuous()


def _rayleigh(args):
    _require(args, "h", "w")
    if args.snr_db is not None:
        snr = db_to_linear(args.snr_db)
    elif args.snr is not None:
        snr = args.snr
    else:
        raise UsageError("missing required parameter: --snr-db or --snr")
    return RayleighTtrSpec(args.h, args.w, snr)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------

def _cmd_edt_pdf(args):
    _require(args, "ttr")
    params = _channel(args)
    if args.ts is not None:
        raise UsageError("edt-pdf is the continuous-sensing law; use edt-pmf with --ts")
    law = edt_pdf_continuous(args.ttr, params)
    t_max = args.t_max or _quantile(law, 0.9999)
    n = args.points or 500
    t = np.linspace(args.ttr, t_max, n)
    rows = [("atom", loc, mass) for loc, mass in law.atoms]
    rows += [("density", ti, fi) for ti, fi in zip(t, law.pdf(t))]
    return _write_csv(("kind", "t", "value"), rows)


def _quantile(law, q):
    from scipy.optimize import brentq

    return brentq(lambda t: law.cdf(t) - q, law.support_low, law.support_high)


def _cmd_edt_pmf(args):
    _require(args, "ttr", "ts")
    pmf = edt_pmf_periodic(args.ttr, _channel(args), args.ts)
    return _write_csv(("n", "t", "prob"),
                      ((n, t, p) for n, (t, p) in enumerate(zip(pmf.support, pmf.probs))))


def _cmd_edt_random(args):
    law = RandomTtrLaw(_rayleigh(args), _channel(args), _sensing(args),
                       oneshot=bool(args.oneshot))
    t = np.linspace(0.0, args.t_max or 40.0, (args.points or 400) + 1)[1:]
    return _write_csv(("t", "density"), zip(t, np.asarray(law.pdf(t), dtype=float)))


def _cmd_moments(args):
    _require(args, "ttr")
    params = _channel(args)
    rows = [("pon_continuous", *_pair(moments_pon_continuous(args.ttr, params))),
            ("poff_continuous", *_pair(moments_poff_continuous(args.ttr, params)))]
    if args.ts is not None:
        rows += [("pon_periodic", *_pair(moments_pon_periodic(args.ttr, params, args.ts))),
                 ("poff_periodic", *_pair(moments_poff_periodic(args.ttr, params, args.ts)))]
    if args.psi is not None:
        rows.append(("p_on_type2", p_on_type2(params, args.psi), ""))
    return _write_csv(("quantity", "m1", "m2"), rows)


def _pair(m):
    return m.m1, m.m2


def _cmd_queue(args):
    _require(args, "ttr", "psi")
    params, sensing = _channel(args), _sensing(args)
    rows = []
    for psi in args.psi:
        sol, conv = solve_scenario(args.ttr, params, sensing, psi)
        rows.append((psi, sol.e_st, sol.e_st2, sol.p0, sol.e_q, sol.e_nq, sol.e_d, conv))
    return _write_csv(("psi", "e_st", "e_st2", "p0", "e_q", "e_nq", "e_d_two_type",
                       "e_d_conventional"), rows)


def _sim_config(args, ttr):
    return SimConfig(_channel(args), _sensing(args), ttr,
                     n_samples=args.samples or 1_000_000, seed=0 if args.seed is None else args.seed,
                     replicas=args.replicas or 1, workers=args.workers or 1,
                     oneshot=bool(args.oneshot))


def _cmd_simulate(args):
    if args.psi is not None:
        _require(args, "ttr")
        cfg = _sim_config(args, args.ttr)
        r = simulate_queue(cfg, args.psi, cfg.n_samples)
        header = ("psi", "mean_delay", "mean_delay_se", "mean_queue_wait", "mean_queue_len",
                  "mean_queue_len_se", "p0", "type1_fraction", "type1_m1", "type1_m2",
                  "type2_m1", "type2_m2", "type2_busy_fraction", "unstable")
        return _write_csv(header, [(args.psi, r.mean_delay, r.mean_delay_se, r.mean_queue_wait,
                                    r.mean_queue_len, r.mean_queue_len_se, r.p0_empirical,
                                    r.type1_fraction, *r.type1_service, *r.type2_service,
                                    r.type2_busy_fraction, r.unstable)])
    ttr = args.ttr if args.h is None else _rayleigh(args)
    if ttr is None:
        raise UsageError("give --ttr or a Rayleigh transmission time (--h, --w, --snr-db)")
    emp = EmpiricalDistribution.from_samples(sample_edt(_sim_config(args, ttr)).edt,
                                             n_bins=args.bins or 200)
    rows = [("atom", v, c / emp.n) for v, c in sorted(emp.atom_candidates.items())]
    mids = emp.low + emp.width * (np.arange(len(emp.counts)) + 0.5)
    rows += [("density", t, c / (emp.n * emp.width)) for t, c in zip(mids, emp.counts)]
    return _write_csv(("kind", "t", "value"), rows)


_PRESET_CRITERIA = {"fig4": ["fig4"], "fig5": ["fig5"], "fig6": ["fig6"], "fig7": ["fig7-8"],
                    "fig8": ["fig7-8"], "fig9": ["fig9"], "fig10": ["fig10"]}


def _cmd_validate(args):
    keys = args.criteria or (_PRESET_CRITERIA[args.preset] if args.preset else None)
    options = {}
    if args.samples is not None:
        options.update(n_samples=args.samples, n_packets=args.samples)
    if args.seed is not None:
        options["seed"] = args.seed
    if args.workers is not None:
        options["workers"] = args.workers
    if args.lambda_scale is not None:
        options["lambda_scale"] = args.lambda_scale
    if args.preset in ("fig7", "fig8"):
        options["figures"] = (args.preset,)
    results = validation.run_criteria(keys, **options)
    return validation.format_report(results) + "\n", all(r.passed for r in results)


_COMMANDS = {"edt-pdf": _cmd_edt_pdf, "edt-pmf": _cmd_edt_pmf, "edt-random": _cmd_edt_random,
             "moments": _cmd_moments, "queue": _cmd_queue, "simulate": _cmd_simulate,
             "validate": _cmd_validate}


def _emit(text, args):
    path = args.output
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        ext = "txt" if args.command == "validate" else "csv"
        path = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{args.command}.{ext}")
    if path is None or args.command == "validate":
        sys.stdout.write(text)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _apply_defaults(parser, args, argv)
        out = _COMMANDS[args.command](args)
        ok = True
        if isinstance(out, tuple):
            out, ok = out
        _emit(out, args)
        return EXIT_OK if ok else EXIT_VALIDATION
    except (UsageError, DomainError) as exc:
        print(f"edtqueue: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailure, SimulationError) as exc:
        print(f"edtqueue: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


run_subcommand = main

if __name__ == "__main__":
    sys.exit(main())

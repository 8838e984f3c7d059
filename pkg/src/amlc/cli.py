"""Command-line frontend.

Subcommands: sample, spectrum, decode, bound, confidence (alias
confidence-run), mindist-lb.  Every run is deterministic given its full
argument list; the effective configuration is echoed into each artifact
(a leading '#' comment for CSVs, an embedded object for JSON reports).
Flags override values from an optional JSON --config file.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import codes, confidence as conf
from .bp import bp_decode
from .certificate import amlc_check
from .channel import ChannelModel, bsc, llr, mbios_from_csv, transmit
from .ds2 import overall_bound, write_bound_csv
from .lp import DEFAULT_GAP_TOL, lp_decode, min_distance_lb


def _parse_channel(text: str) -> ChannelModel:
    """'bsc:p' or a path to a channel-table CSV."""
    if text.startswith("bsc:"):
        return bsc(float(text.split(":", 1)[1]))
    if os.path.exists(text):
        return mbios_from_csv(text)
    raise ValueError(f"channel {text!r}: expected 'bsc:<p>' or a CSV path")


def _prepend_comment(path: str, payload: dict) -> None:
    with open(path) as fh:
        body = fh.read()
    with open(path, "w") as fh:
        fh.write("# config: " + json.dumps(payload, sort_keys=True) + "\n" + body)


def _ensemble(args) -> codes.EnsembleSpec:
    return codes.EnsembleSpec(n_vars=args.n, var_degree=args.var_degree,
                              check_degree=args.check_degree)


def _echo(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sample(args) -> int:
    spec = _ensemble(args)
    h = codes.sample_regular_code(spec, rng_seed=args.seed)
    codes.write_alist(h, args.out)
    info = {"n": spec.n_vars, "checks": spec.n_checks, "seed": args.seed,
            "attempts": h.sample_attempts, "out": args.out}
    if args.with_lb:
        info["min_distance_lb"] = min_distance_lb(h)
    print(json.dumps(info, sort_keys=True))
    return 0


def cmd_spectrum(args) -> int:
    spec = _ensemble(args)
    table = codes.avg_distance_spectrum(spec)
    if args.gamma is not None:
        table = codes.expurgate_spectrum(table, args.gamma, doubling=True)
    codes.write_spectrum_csv(table, args.out)
    _prepend_comment(args.out, _echo(args, ("n", "var_degree", "check_degree",
                                            "gamma")))
    print(f"wrote {args.out}")
    return 0


def cmd_decode(args) -> int:
    h = codes.read_alist(args.alist)
    ch = _parse_channel(args.channel)
    zero = np.zeros(h.n_vars, dtype=np.int64)
    outputs = transmit(zero, ch, rng_seed=args.seed)
    llrs = llr(ch, outputs)
    bp = bp_decode(h, llrs, max_iterations=args.bp_max_iters)
    lp = lp_decode(h, llrs, mode=args.lp_mode, gap_tol=args.lp_gap_tol)
    verdict = amlc_check(bp, lp, llrs, args.delta, h)
    print(json.dumps({
        "holds": verdict.holds,
        "gap": verdict.gap,
        "bp_codeword": verdict.is_codeword,
        "bp_converged": bp.converged,
        "bp_iterations": bp.iterations_used,
        "lp_objective": lp.objective,
        "lp_integral": lp.is_integral,
        "lp_certified_gap": lp.certified_gap,
        "config": _echo(args, ("alist", "channel", "seed", "delta",
                               "bp_max_iters", "lp_mode", "lp_gap_tol")),
    }, sort_keys=True))
    return 0


def cmd_bound(args) -> int:
    spec = _ensemble(args)
    spectrum = codes.avg_distance_spectrum(spec)
    p_grid = [float(x) for x in args.p_grid.split(",")]
    deltas = [float(x) for x in args.deltas.split(",")]
    lines = ["p,delta,ln_bound"]
    for p in p_grid:
        ch = bsc(p)
        for d in deltas:
            table = overall_bound(d, args.gamma, ch, spectrum)
            lines.append("%.17g,%.17g,%.17g" % (p, d, table.total))
    body = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body)
        _prepend_comment(args.out, _echo(args, ("n", "var_degree",
                                                "check_degree", "gamma",
                                                "p_grid", "deltas")))
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(body)
    return 0


def cmd_confidence(args) -> int:
    cfg = conf.ExperimentConfig(
        ensemble=_ensemble(args),
        channel=_parse_channel(args.channel),
        delta=args.delta,
        gamma=args.gamma,
        trials=args.trials,
        master_seed=args.seed,
        bp_max_iterations=args.bp_max_iters,
        lp_mode=args.lp_mode,
        lp_gap_tol=args.lp_gap_tol,
        workers=args.workers,
    )
    report = conf.run_algorithm1(cfg)
    if args.trials_out:
        conf.write_trial_csv(report.records, args.trials_out)
        _prepend_comment(args.trials_out,
                         _echo(args, ("n", "var_degree", "check_degree",
                                      "channel", "delta", "gamma", "trials",
                                      "seed", "workers")))
    if args.bound_out:
        write_bound_csv(report.ds2_table, args.bound_out)
    payload = conf.report_to_dict(report)
    if args.report_out:
        with open(args.report_out, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    print(json.dumps({k: payload[k] for k in
                      ("trials", "failures", "epsilon",
                       "log2_confidence_deficit", "status")}, sort_keys=True))
    return 0   # an "error" verdict is still a completed computation


def cmd_mindist_lb(args) -> int:
    h = codes.read_alist(args.alist)
    lb = min_distance_lb(h, stop_at=args.stop_at)
    print(json.dumps({"min_distance_lb": lb, "alist": args.alist,
                      "stop_at": args.stop_at}))
    return 0


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _add_ensemble_flags(p, n_default=None):
    p.add_argument("--n", type=int, default=n_default, required=n_default is None)
    p.add_argument("--var-degree", type=int, default=3)
    p.add_argument("--check-degree", type=int, default=4)


def _add_decoder_flags(p):
    p.add_argument("--bp-max-iters", type=int, default=100)
    p.add_argument("--lp-mode", choices=("auto", "explicit", "adaptive"),
                   default="auto")
    p.add_argument("--lp-gap-tol", type=float, default=DEFAULT_GAP_TOL)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="amlc",
        description="LDPC certificate pipeline: sampling, decoding, "
                    "distance bounds, error bounds, confidence runs.")
    top.add_argument("--config", help="JSON file of flag defaults; "
                                      "explicit flags win")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a regular code, write alist")
    _add_ensemble_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--with-lb", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("spectrum", help="ensemble-average distance spectrum CSV")
    _add_ensemble_flags(p)
    p.add_argument("--gamma", type=int, default=None,
                   help="expurgate to min distance > gamma (doubling on)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("decode", help="one all-zero-word decode + certificate")
    p.add_argument("--alist", required=True)
    p.add_argument("--channel", required=True, help="'bsc:<p>' or CSV path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=float, default=0.0)
    _add_decoder_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("bound", help="(p, delta, ln_bound) sweep CSV")
    _add_ensemble_flags(p, n_default=1000)
    p.add_argument("--gamma", type=int, default=20)
    p.add_argument("--p-grid", default="0.06,0.08,0.10,0.12,0.14")
    p.add_argument("--deltas", default="0,5,10,20")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bound)

    for name in ("confidence", "confidence-run"):
        p = sub.add_parser(name, help="Monte Carlo confidence harness")
        _add_ensemble_flags(p)
        p.add_argument("--channel", required=True, help="'bsc:<p>' or CSV path")
        p.add_argument("--delta", type=float, default=0.0)
        p.add_argument("--gamma", type=int, default=0)
        p.add_argument("--trials", type=int, required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int,
                       default=int(os.environ.get("AMLC_WORKERS", "1")))
        _add_decoder_flags(p)
        p.add_argument("--report-out", default=None)
        p.add_argument("--trials-out", default=None)
        p.add_argument("--bound-out", default=None)
        p.set_defaults(func=cmd_confidence)

    p = sub.add_parser("mindist-lb", help="LP lower bound on minimum distance")
    p.add_argument("--alist", required=True)
    p.add_argument("--stop-at", type=int, default=None)
    p.set_defaults(func=cmd_mindist_lb)
    return top


def _apply_config_file(parser, argv):
    """Pre-scan for --config and install its values as subparser defaults."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if not known.config:
        return argv
    with open(known.config) as fh:
        loaded = json.load(fh)
    if not isinstance(loaded, dict):
        raise ValueError(f"{known.config}: config must be a JSON object")
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            usable = {}
            for a in sp._actions:
                if a.dest in loaded:
                    usable[a.dest] = loaded[a.dest]
                    a.required = False   # a config value satisfies it
            sp.set_defaults(**usable)
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"amlc: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end for sweeps, bound tables and self checks.

Artifacts (CSV or JSON) go to --out when given, otherwise to stdout. With
--out, a short human-readable summary is printed instead, with NMSE shown
both linear and in dB. Uplink SNR points come from the config's
snr_grid_db (dB, noise power 10^(-snr/10)); the downlink operating point
is part of the config, not the sweep.
"""

import argparse
import math
import sys

from . import harness
from ._backend import backend_name


def _add_common(parser):
    parser.add_argument("--config", metavar="PATH",
                        help="flat 'key = value' config file")
    parser.add_argument("--seed", type=int, metavar="S",
                        help="override master_seed")
    parser.add_argument("--trials", type=int, metavar="T",
                        help="override trial count")
    parser.add_argument("--out", metavar="PATH",
                        help="write the artifact here instead of stdout")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="artifact format (default csv)")


def _resolve_config(args):
    cfg = harness.load_config(args.config) if args.config \
        else harness.ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if overrides:
        merged = cfg.to_dict()
        merged.update(overrides)
        cfg = harness.ExperimentConfig.from_dict(merged)
    return cfg


def _print_summary(result):
    for row in result.rows:
        bits = [f"snr {row.snr_db:g} dB", f"{row.estimator:>12s}"]
        if row.mean_nmse is not None:
            db = (10.0 * math.log10(row.mean_nmse)
                  if row.mean_nmse > 0 else -math.inf)
            bits.append(f"nmse {row.mean_nmse:.6g} ({db:.2f} dB)"
                        f" +- {row.nmse_ci95:.3g}")
        if row.mean_sum_rate is not None:
            bits.append(f"sum rate {row.mean_sum_rate:.4f} bits/s/Hz")
        print("  ".join(bits))


def _deliver(result, args):
    if args.out:
        harness.emit(result, args.format, args.out)
        if isinstance(result, harness.SweepResult):
            _print_summary(result)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(harness.render(result, args.format))
    return 0


def _cmd_nmse(args):
    return _deliver(harness.run_nmse_sweep(_resolve_config(args)), args)


def _cmd_sumrate(args):
    return _deliver(harness.run_sumrate_sweep(_resolve_config(args)), args)


def _parse_int_list(text, flag):
    try:
        values = [int(p) for p in text.replace(",", " ").split()]
    except ValueError:
        raise harness.ConfigError(flag, f"expected integers, got {text!r}") from None
    if not values:
        raise harness.ConfigError(flag, "empty list")
    return values


def _cmd_bound_table(args):
    cfg = _resolve_config(args)
    n_list = _parse_int_list(args.n_list, "--n-list") if args.n_list \
        else [cfg.N]
    v_list = _parse_int_list(args.v_list, "--v-list") if args.v_list \
        else [2, 4, 8]
    return _deliver(harness.run_bound_table(n_list, v_list), args)


def _cmd_validate(args):
    cfg = _resolve_config(args)
    print(f"backend: {backend_name()}")
    outcomes = harness.validate_invariants(cfg)
    for oc in outcomes:
        print(f"{'PASS' if oc.passed else 'FAIL'} {oc.name}: {oc.detail}")
    n_bad = sum(not oc.passed for oc in outcomes)
    print(f"{len(outcomes) - n_bad}/{len(outcomes)} checks passed")
    return 1 if n_bad else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="beamspace-sd",
        description="Beamspace channel estimation experiments (support "
                    "detection vs orthogonal matching pursuit).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nmse-sweep",
                       help="estimation NMSE vs uplink SNR for SD and OMP")
    _add_common(p)
    p.set_defaults(func=_cmd_nmse)

    p = sub.add_parser("sumrate-sweep",
                       help="downlink ZF sum rate vs uplink SNR (sd, omp, "
                            "perfect, full_digital)")
    _add_common(p)
    p.set_defaults(func=_cmd_sumrate)

    p = sub.add_parser("bound-table",
                       help="captured-power lower bound vs synthesized "
                            "worst case per (N, V)")
    _add_common(p)
    p.add_argument("--n-list", metavar="N1,N2,...",
                   help="antenna counts (default: config N)")
    p.add_argument("--v-list", metavar="V1,V2,...",
                   help="window sizes, even (default: 2,4,8)")
    p.set_defaults(func=_cmd_bound_table)

    p = sub.add_parser("validate", help="run the invariant self-check suite")
    _add_common(p)
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except harness.ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

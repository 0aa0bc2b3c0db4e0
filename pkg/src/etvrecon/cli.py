"""Command-line entry point.

Subcommands: reconstruct, denoise, phase, verify, mask.  Exit codes:
0 success, 1 solver abort, 2 config error, 3 verification failure.
"""

import argparse
import os
import sys

import numpy as np

from .harness import (
    ConfigError,
    load_config,
    phase_transition,
    run_experiment,
    verify_theory,
)
from .solvers import SolverAbort
from .transforms import radial_mask, save_mask, variable_density_mask


def _parse_grid(text, cast):
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise ConfigError("empty grid %r" % (text,))
    return [cast(p) for p in parts]


def _cmd_reconstruct(args, model=None):
    cfg = load_config(args.config)
    if model is not None:
        cfg.model = model
    if args.model:
        cfg.model = args.model
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.out_dir = args.out
    cfg.validate()
    reports = run_experiment(cfg)
    for i, rep in enumerate(reports):
        print(
            "trial %d: rel_err=%s ssim=%s outer=%d wall=%.1fs"
            % (
                i,
                "n/a" if rep.relative_error is None else "%.3e" % rep.relative_error,
                "n/a" if rep.ssim is None else "%.4f" % rep.ssim,
                rep.iterations_used,
                rep.wall_time,
            )
        )
    print("artifacts written to %s" % cfg.out_dir)
    return 0


def _cmd_phase(args):
    alphas = _parse_grid(args.alpha_grid, float)
    lines = _parse_grid(args.m_grid, int)
    out = args.out or "results"
    rates = phase_transition(
        alphas,
        lines,
        trials=args.trials,
        seed=args.seed or 0,
        n_side=args.n_side,
        out_dir=out,
        threads=args.threads,
    )
    for a, row in zip(alphas, rates):
        print("alpha=%.2f  " % a + "  ".join("%.2f" % v for v in row))
    print("matrix written to %s" % out)
    return 0


def _cmd_verify(args):
    sizes = _parse_grid(args.sizes, int)
    out = args.out
    report_path = os.path.join(out, "theory_report.txt") if out else None
    if out:
        os.makedirs(out, exist_ok=True)
    passed, results = verify_theory(sizes, out_path=report_path)
    for n, checks in results.items():
        for name, entry in checks.items():
            print(
                "N=%d %s: %s (value %.6g, bound %.6g)"
                % (n, name, "PASS" if entry["passed"] else "FAIL",
                   entry["value"], entry["bound"])
            )
    print("overall: %s" % ("PASS" if passed else "FAIL"))
    return 0 if passed else 3


def _cmd_mask(args):
    if args.kind == "radial":
        mask, weights = radial_mask(args.n_side, args.lines), None
    elif args.kind == "variable_density":
        mask, weights = variable_density_mask(args.n_side, args.m, args.cap, seed=args.seed or 0)
    else:
        raise ConfigError("unknown mask kind %r" % (args.kind,))
    save_mask(args.out, mask, weights)
    print(
        "wrote %s: N=%d m=%d rate=%.4f"
        % (args.out, mask.n_side, len(mask), mask.sampling_rate)
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="etvrecon",
        description="Enhanced-TV image reconstruction from subsampled Fourier data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("reconstruct", "run a reconstruction experiment from a config file"),
        ("denoise", "run a denoising experiment from a config file"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="experiment config (INI)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--model", default=None,
                       help="model override (tv, tva_tvi, enhanced_tv, denoise)")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("phase", help="phase-transition sweep over (alpha, lines)")
    p.add_argument("--alpha-grid", default="0.7 1.2 1.7 2.2 2.7")
    p.add_argument("--m-grid", default="3 4 5 6 7 8 9 10 11 12",
                   help="radial line counts")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--n-side", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("verify", help="run the lemma/property verification suites")
    p.add_argument("--sizes", default="8 16", help="grid sizes (powers of two)")
    p.add_argument("--out", default=None)

    p = sub.add_parser("mask", help="generate and save a sampling mask")
    p.add_argument("--kind", default="radial", choices=["radial", "variable_density"])
    p.add_argument("--n-side", type=int, required=True)
    p.add_argument("--lines", type=int, default=7)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--cap", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="mask file path")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "reconstruct":
            return _cmd_reconstruct(args)
        if args.command == "denoise":
            return _cmd_reconstruct(args, model="denoise")
        if args.command == "phase":
            return _cmd_phase(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "mask":
            return _cmd_mask(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except SolverAbort as exc:
        print("solver abort: %s" % exc, file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())

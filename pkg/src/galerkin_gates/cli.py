"""Command-line front end: ``galerkin-gates <subcommand> ...``."""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from pathlib import Path

from . import bounds, models
from .config import load_config
from .errors import ConfigError, DomainError, NumericalError
from .scenario import certify, emit_outputs, is_finite_report, numeric_summary, run_scenario

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
THREADS_ENV = "GALERKIN_GATES_THREADS"

logger = logging.getLogger("galerkin_gates")


def _print_json(data) -> None:
    print(json.dumps(data, indent=2, sort_keys=True))


def _thread_limit():
    value = os.environ.get(THREADS_ENV)
    if not value:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {value!r}")
    return threadpool_limits(limits=n)


def _load(args):
    cfg = load_config(args.config)
    changes = {}
    if getattr(args, "resonant_periods", False):
        changes["resonant_periods"] = True
    if getattr(args, "literal_spectrum", False):
        changes["literal_spectrum"] = True
    if getattr(args, "sample_every", None) is not None:
        changes["sample_every"] = args.sample_every
    if getattr(args, "N", None) is not None:
        changes["N"] = args.N
    return cfg.with_overrides(**changes) if changes else cfg


def cmd_simulate(args) -> int:
    cfg = _load(args)
    if cfg.literal_spectrum:
        logger.info("using the unscaled spectrum lambda_k = k^2/2 and unscaled couplings")
    report, traj = run_scenario(cfg)
    out = Path(args.out or cfg.output.get("directory", f"out/{cfg.name}"))
    stem = cfg.name + ("_resonant" if cfg.resonant_periods else "") + (
        "_literal" if cfg.literal_spectrum else ""
    )
    paths = emit_outputs(traj, report, out, stem)
    summary = numeric_summary(report)
    summary["outputs"] = [str(p) for p in paths]
    _print_json(summary)
    return EXIT_OK if is_finite_report(report) else EXIT_NUMERICAL


def cmd_bounds(args) -> int:
    N, K = args.N, args.K
    if args.model == "oscillator":
        data = {
            "model": "oscillator",
            "N": N,
            "K": K,
            "truncation_bound": bounds.oscillator_truncation_bound(N, K),
            "tail_coefficient": bounds.oscillator_tail_coefficient(N, K),
        }
    else:
        tails = {f"tail_phi{j}": bounds.well_tail_bound(j, N) for j in (1, 2, 3)}
        third = bounds.well_projected_tail_bound(N, "third_column")
        cols = bounds.well_projected_tail_bound(N, "columns")
        data = {
            "model": "well",
            "N": N,
            "K": K,
            **tails,
            "projected_tail_third_column": third,
            "projected_tail_columns": cols,
            "K_times_tail_third_column": K * third,
            "K_times_tail_columns": K * cols,
        }
        if args.commutator_sup is not None:
            data["certificate"] = bounds.total_error_bound(
                K, third, args.commutator_sup, models.QuantumModel.well().b_norm_bound, N=N
            ).to_dict()
    _print_json(data)
    return EXIT_OK


def cmd_min_dim(args) -> int:
    if args.model == "oscillator":
        N = bounds.minimal_oscillator_dimension(args.K, args.eps)
        value = bounds.oscillator_truncation_bound(N, args.K)
    else:
        N = bounds.minimal_well_dimension(args.K, args.eps, args.tail_form)
        value = args.K * bounds.well_projected_tail_bound(N, args.tail_form)
    _print_json({"model": args.model, "K": args.K, "eps": args.eps, "N": N, "bound_at_N": value})
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = _load(args)
    _print_json(certify(cfg, commutator_sup=args.commutator_sup, K=args.K))
    return EXIT_OK


def cmd_check_chain(args) -> int:
    if args.model == "oscillator":
        model = models.QuantumModel.oscillator(
            eta=args.eta, eigenvalue_scale=args.eigenvalue_scale, perturbation=args.perturbation
        )
    else:
        model = models.QuantumModel.well(eigenvalue_scale=args.eigenvalue_scale)
    chain = models.nearest_neighbour_chain(args.depth)
    rep = models.check_chain(model, chain, args.depth, args.tol)
    _print_json(
        {
            "model": args.model,
            "depth": args.depth,
            "couples_all": rep.couples_all,
            "non_resonant": rep.non_resonant,
            "n_violations": len(rep.resonance_violations),
            "violations": [
                {"link": list(s), "pair": list(t), "gap": g}
                for s, t, g in rep.resonance_violations[: args.max_listed]
            ],
        }
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="galerkin-gates",
        description="Galerkin simulation and truncation certificates for bilinear quantum gates.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a scenario and write CSV + JSON outputs")
    s.add_argument("config", help="TOML file or bundled scenario name")
    s.add_argument("--out", help="output directory (default: [output].directory)")
    s.add_argument("--resonant-periods", action="store_true",
                   help="replace pulse-train periods by 2*pi/gap of their transition")
    s.add_argument("--literal-spectrum", action="store_true",
                   help="use eigenvalues k^2/2 and unscaled couplings")
    s.add_argument("--sample-every", type=float)
    s.add_argument("--N", type=int, help="override the Galerkin dimension")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bounds", help="evaluate truncation bounds")
    b.add_argument("--model", choices=["oscillator", "well"], required=True)
    b.add_argument("--N", type=int, required=True)
    b.add_argument("--K", type=float, required=True)
    b.add_argument("--commutator-sup", type=float, help="well only: assemble a certificate")
    b.set_defaults(func=cmd_bounds)

    m = sub.add_parser("min-dim", help="smallest Galerkin dimension meeting a tolerance")
    m.add_argument("--K", type=float, required=True)
    m.add_argument("--eps", type=float, required=True)
    m.add_argument("--model", choices=["oscillator", "well"], default="oscillator")
    m.add_argument("--tail-form", choices=["third_column", "columns"], default="third_column")
    m.set_defaults(func=cmd_min_dim)

    c = sub.add_parser("certify", help="bounds-only certificate for a scenario")
    c.add_argument("config")
    c.add_argument("--commutator-sup", type=float)
    c.add_argument("--K", type=float)
    c.add_argument("--N", type=int)
    c.add_argument("--literal-spectrum", action="store_true")
    c.set_defaults(func=cmd_certify)

    q = sub.add_parser("check-chain", help="connectedness / non-resonance of {(n, n+1)}")
    q.add_argument("--model", choices=["oscillator", "well"], required=True)
    q.add_argument("--depth", type=int, required=True)
    q.add_argument("--eta", type=float, default=1.0)
    q.add_argument("--eigenvalue-scale", type=float, default=1.0)
    q.add_argument("--perturbation", default="inverse_eigenvalue",
                   choices=[p.value for p in models.Perturbation])
    q.add_argument("--tol", type=float, default=1e-9)
    q.add_argument("--max-listed", type=int, default=20)
    q.set_defaults(func=cmd_check_chain)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        with _thread_limit():
            return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .diagnostics import homogeneous_identifiability, sbm_identifiability_constant
from .errors import ConfigError, GraphonGameError
from .estimator import estimate, model_equilibrium_fn
from .functionspace import interpolate_equilibrium
from .game import LQSBM
from .harness import (
    load_config,
    run_experiment,
    summarize_quantiles,
    write_quantiles_csv,
    write_records_csv,
    write_timings_csv,
)
from .sampling import observe, sample_network, solve_network_game, write_network


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _parse_eta(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def _config_pi(config):
    return config.graphon.pi if isinstance(config.game, LQSBM) else None


def _load_valid_config(path):
    config = load_config(path)
    problems = config.validate()
    if problems:
        raise ConfigError("; ".join(problems))
    return config


def cmd_validate(args) -> int:
    config = load_config(args.config)
    problems = config.validate()
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return 1
    print("ok")
    return 0


def cmd_solve(args) -> int:
    config = _load_valid_config(args.config)
    eta = _parse_eta(args.eta) if args.eta else np.asarray(config.eta_true, float)
    fn = model_equilibrium_fn(config.graphon, config.game, eta)
    if args.samples:
        grid = (np.arange(args.samples) + 0.5) / args.samples
        lines = [_fmt(v) for v in fn(grid)]
    else:
        lines = [
            f"{_fmt(left)} {_fmt(right)} {_fmt(value)}"
            for left, right, value in zip(
                fn.breakpoints[:-1], fn.breakpoints[1:], fn.values
            )
        ]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sample(args) -> int:
    config = _load_valid_config(args.config)
    n = args.n or config.n_list[0]
    seed = args.seed if args.seed is not None else config.master_seed
    net = sample_network(config.graphon, n, seed)
    prefix = args.out or "network"
    edges_path = f"{prefix}_edges.txt"
    labels_path = f"{prefix}_labels.txt"
    write_network(net, edges_path, labels_path)
    print(f"wrote {edges_path} and {labels_path} (N={n}, seed={seed})")
    return 0


def cmd_estimate(args) -> int:
    config = _load_valid_config(args.config)
    if args.observation:
        values = np.atleast_1d(np.loadtxt(args.observation, dtype=float))
        obs = interpolate_equilibrium(values)
    else:
        n = args.n or config.n_list[0]
        seed = args.seed if args.seed is not None else config.master_seed
        net = sample_network(config.graphon, n, seed)
        neq = solve_network_game(
            net, config.game, config.eta_true,
            tol=config.solver.tol, max_iter=config.solver.max_iter,
            pi=_config_pi(config),
        )
        obs = observe(net, neq)
    result = estimate(obs, config.graphon, config.game, config.optimizer)
    print("eta_hat = " + ",".join(_fmt(v) for v in result.eta_hat))
    print(f"objective = {_fmt(result.objective)}")
    print(f"gradient_norm = {_fmt(result.gradient_norm)}")
    print(f"hessian_min_eig = {_fmt(result.hessian_min_eig)}")
    print(f"converged = {'true' if result.converged else 'false'}")
    return 0


def cmd_experiment(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.master_seed = args.seed
    out = args.out or config.output
    records = run_experiment(config)
    n_params = config.game.xi.dim
    write_records_csv(records, out, n_params)
    rows = summarize_quantiles(records)
    write_quantiles_csv(rows, f"{out}.quantiles.csv")
    write_timings_csv(records, f"{out}.timings.csv")
    print(f"wrote {len(records)} records to {out}")
    for n in sorted({r.n for r in records}):
        errs = np.array([r.err_inf for r in records if r.n == n])
        print(f"N={n}: median err_inf = {_fmt(np.median(errs))}")
    return 0


def cmd_diagnose(args) -> int:
    config = _load_valid_config(args.config)
    eta = np.asarray(config.eta_true, dtype=float)
    if isinstance(config.game, LQSBM):
        g = config.graphon
        report = sbm_identifiability_constant(g.q, g.pi, config.game.theta1, eta)
    else:
        report = homogeneous_identifiability(config.graphon, eta)
    print(f"identifiable = {'true' if report.identifiable else 'false'}")
    if report.constant is not None:
        print(f"constant = {_fmt(report.constant)}")
    if report.gamma is not None:
        print(f"gamma = {_fmt(report.gamma)}")
    for key in sorted(report.detail):
        print(f"{key} = {_fmt(report.detail[key])}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to a YAML config")
    common.add_argument(
        "--seed", type=int, default=None, help="override the master seed"
    )
    common.add_argument("--out", default=None, help="output path or prefix")

    parser = argparse.ArgumentParser(
        prog="graphon-games",
        description=(
            "Equilibria of graphon games and parameter estimation from "
            "observed equilibrium play."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common]).set_defaults(func=cmd_validate)

    p_solve = sub.add_parser("solve", parents=[common])
    p_solve.add_argument("--eta", default=None, help="comma-separated parameters")
    p_solve.add_argument(
        "--samples", type=int, default=0,
        help="emit this many grid samples instead of the piecewise form",
    )
    p_solve.set_defaults(func=cmd_solve)

    p_sample = sub.add_parser("sample", parents=[common])
    p_sample.add_argument("--n", type=int, default=None, help="network size")
    p_sample.set_defaults(func=cmd_sample)

    p_est = sub.add_parser("estimate", parents=[common])
    p_est.add_argument(
        "--observation", default=None,
        help="file with one observed strategy per line; omit to sample fresh",
    )
    p_est.add_argument("--n", type=int, default=None, help="network size")
    p_est.set_defaults(func=cmd_estimate)

    sub.add_parser("experiment", parents=[common]).set_defaults(func=cmd_experiment)
    sub.add_parser("diagnose", parents=[common]).set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GraphonGameError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

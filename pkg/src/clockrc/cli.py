"""Command-line front end.

Every CSV starts with a ``# config:`` comment echoing the full configuration,
then a header row.  Exit status: 0 success, 1 a verification failed or an
invariant was violated, 2 invalid configuration or size guard exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from clockrc import domination, mcmc, oracle, percolation, reflection
from clockrc.clock import build_weight_table
from clockrc.errors import DomainError, InvariantViolation, SizeGuardError
from clockrc.lattice import identify_boundary

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class ConfigError(Exception):
    pass


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clockrc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path, help="TOML file with option defaults (flags win)")
        p.add_argument("--output", "-o", type=Path, help="write to file instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $CLOCKRC_THREADS or logical cores)")
        return p

    p = add("oracle-verify", "exhaustive checks on the small-graph corpus")
    p.add_argument("--corpus", default="default")
    p.add_argument("--q", type=int, nargs="+", default=[2, 3, 4, 5])
    p.add_argument("--beta", type=float, nargs="+", default=[0.25, 1.0, 4.0])

    p = add("injection-verify", "run the reflection injection over the corpus")
    p.add_argument("--corpus", default="default")
    p.add_argument("--q", type=int, nargs="+", default=[2, 3, 4, 5])
    p.add_argument("--dump", type=Path, help="JSON file for failure traces")

    p = add("beta0", "inverse of the domination threshold curve")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)

    p = add("beta0-bound", "closed-form upper bound on the threshold")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--pc", type=float, required=True)
    p.add_argument("--eps", type=float, default=1e-3)

    p = add("phi-curve", "sample the threshold curve")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--beta-min", type=float, default=0.01)
    p.add_argument("--beta-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=200)

    p = add("percolate", "bond percolation estimates on boxes")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--estimate-pc", action="store_true",
                   help="also estimate p_c from crossing probabilities (d=2)")
    p.add_argument("--n-list", type=int, nargs="+", default=None)

    p = add("simulate", "heat-bath estimate of the boundary-induced spin excess")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--sweeps", type=int, default=10_000)
    p.add_argument("--burnin", type=int, default=1000)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--quench-samples", type=int, default=1)
    p.add_argument("--init", choices=["boundary", "random"], default="boundary")

    p = add("weight-table", "dump the level table as JSON")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    return parser


def _load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad TOML in {path}: {exc}") from exc


def parse_args(argv=None) -> argparse.Namespace:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is not None:
        cfg = _load_config(known.config)
        subparsers = parser._subparsers._group_actions[0].choices
        command = next((a for a in argv if a in subparsers), None)
        if command is not None:
            sub = subparsers[command]
            actions = {a.dest: a for a in sub._actions}
            keys = {k.replace("-", "_"): v for k, v in cfg.items()}
            unknown = set(keys) - set(actions) - {"command"}
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            keys.pop("command", None)
            for dest in keys:
                actions[dest].required = False
            sub.set_defaults(**keys)
    return parser.parse_args(argv)


def validate(args) -> None:
    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    cmd = args.command
    need(args.threads is None or args.threads >= 1, "--threads must be >= 1")
    need(0 <= args.seed < 2**64, "--seed must be a 64-bit unsigned integer")
    if hasattr(args, "q"):
        qs = args.q if isinstance(args.q, list) else [args.q]
        need(all(q >= 2 for q in qs), "--q must be >= 2")
    if cmd == "oracle-verify":
        need(all(b > 0 for b in args.beta), "--beta must be positive")
    if cmd == "beta0":
        need(0 < args.rho < 1, "--rho must lie in (0, 1)")
    if cmd == "beta0-bound":
        need(args.d >= 1, "--d must be >= 1")
        need(0 < args.pc < args.p <= 1, "need 0 < pc < p <= 1")
        need(args.eps > 0 and args.pc / args.p + args.eps < 1, "--eps out of range")
    if cmd == "phi-curve":
        need(0 < args.beta_min < args.beta_max, "need 0 < beta-min < beta-max")
        need(args.points >= 2, "--points must be >= 2")
    if cmd == "percolate":
        need(0 <= args.p <= 1, "--p must lie in [0, 1]")
        need(args.n >= 1 and args.d >= 1 and args.samples >= 1, "--n, --d, --samples must be positive")
        need(not args.estimate_pc or args.d == 2, "--estimate-pc needs d = 2")
    if cmd == "simulate":
        need(args.beta > 0, "--beta must be positive")
        need(0 < args.p <= 1, "--p must lie in (0, 1]")
        need(args.n >= 1 and args.d >= 1, "--n and --d must be positive")
        need(args.thin >= 1 and args.burnin >= 0, "--thin >= 1, --burnin >= 0")
        need(args.sweeps >= 100 * args.thin, "--sweeps must give at least 100 samples")
        need(args.quench_samples >= 1, "--quench-samples must be >= 1")
    if cmd == "weight-table":
        need(args.beta > 0, "--beta must be positive")


def config_echo(args) -> str:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())}
    return "# config: " + json.dumps(cfg, sort_keys=True)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def render_csv(args, header, rows) -> str:
    buf = io.StringIO()
    buf.write(config_echo(args) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# ------------------------------------------------------------------ commands


def cmd_oracle_verify(args):
    graphs = oracle.load_corpus(args.corpus)
    header = ["graph", "q", "beta", "es_dev_phi", "es_dev_mu", "z_dev", "i14_max_dev",
              "i15_min_slack", "lemma_violations", "alpha_min_slack", "pass"]
    rows, ok = [], True
    for gi, g in enumerate(graphs):
        for q in args.q:
            for beta in args.beta:
                wt = build_weight_table(q, beta)
                dist = oracle.enumerate_all(g, wt)
                es = oracle.verify_es_marginals(g, wt, dist)
                i14 = max(oracle.verify_i14(g, wt, x, a, dist).deviation
                          for x in range(g.n_vertices) for a in range(q))
                i15 = min(oracle.verify_positive_correlations(g, wt, x, dist).slack for x in range(g.n_vertices))
                lem = oracle.lemma_violations(dist)
                alpha = domination.verify_alpha_bound(g, wt, dist).slack
                passed = es.passed and i14 <= oracle.TOL and i15 >= -oracle.TOL and lem == 0 and alpha >= -oracle.TOL
                ok &= passed
                rows.append([gi, q, beta, es.dev_phi, es.dev_mu, es.dev_Z, i14, i15, lem, alpha, passed])
    return render_csv(args, header, rows), ok


def cmd_injection_verify(args):
    graphs = oracle.load_corpus(args.corpus)
    header = ["graph", "q", "x", "pairs", "not_injective", "image_outside", "boundary_hits",
              "hemisphere_failures", "lemma_disagreements", "pass"]
    rows, dumps, ok = [], [], True
    for gi, g in enumerate(graphs):
        g = identify_boundary(g)
        for q in args.q:
            wt = build_weight_table(q, 1.0)  # compatibility does not depend on beta
            for x in g.free_vertices:
                rep = reflection.sweep_injection(g, wt, int(x))
                ok &= rep.passed
                dumps.extend(rep.failures)
                rows.append([gi, q, int(x), rep.pairs, rep.not_injective, rep.image_outside,
                             rep.boundary_hits, rep.hemisphere_failures, rep.lemma_disagreements, rep.passed])
    if args.dump is not None:
        args.dump.write_text(json.dumps(dumps, indent=1) + "\n")
    return render_csv(args, header, rows), ok


def cmd_beta0(args):
    b = domination.beta0(args.rho, args.q)
    return render_csv(args, ["q", "rho", "beta0", "varphi_at_beta0"],
                      [[args.q, args.rho, b, domination.varphi(b, args.q)]]), True


def cmd_beta0_bound(args):
    ratio = args.pc / args.p
    rows = [[args.q, args.d, args.p, args.pc,
             domination.beta0_upper_bound(args.p, args.q, args.d, args.pc),
             domination.beta0(ratio, args.q),
             domination.beta0(ratio + args.eps, args.q)]]
    header = ["q", "d", "p", "pc", "bound", "beta0_at_pc_over_p", "beta0_at_pc_over_p_plus_eps"]
    return render_csv(args, header, rows), True


def cmd_phi_curve(args):
    curve = domination.threshold_curve(args.q, args.beta_min, args.beta_max, args.points)
    if not curve.increasing:
        raise InvariantViolation("threshold curve is not increasing")
    return render_csv(args, ["beta", "varphi"], curve.to_csv_rows()), True


def cmd_percolate(args):
    rng = make_rng(args.seed)
    est = percolation.estimate_connection(args.p, args.n, args.d, args.samples, rng)
    header = ["p", "n", "d", "samples", "estimate", "stderr"]
    rows = [[est.p, est.n, args.d, est.samples, est.estimate, est.stderr]]
    if args.estimate_pc:
        pc = percolation.estimate_pc(args.n_list or [args.n], args.samples, rng)
        header.append("pc_estimate")
        rows[0].append(pc)
    return render_csv(args, header, rows), True


def cmd_simulate(args):
    rng = make_rng(args.seed)
    rep = mcmc.estimate_coexistence(args.q, args.beta, args.p, args.n, args.d, args.sweeps, args.burnin, rng,
                                    quench_samples=args.quench_samples, thin=args.thin, init=args.init,
                                    threads=args.threads or mcmc.default_threads())
    header = ["replica", "delta", "stderr", "connection", "connection_stderr", "i15_flag",
              "converged", "open_fraction", "samples"]
    rows = [[r.replica, r.delta, r.delta_se, r.connection, r.connection_se, r.i15_flag, r.converged,
             r.open_fraction, r.samples] for r in rep.replicas]
    rows.append(["all", rep.delta, rep.delta_se, rep.connection, rep.connection_se, rep.i15_flag,
                 rep.converged, "", sum(r.samples for r in rep.replicas)])
    return render_csv(args, header, rows), rep.converged


def cmd_weight_table(args):
    wt = build_weight_table(args.q, args.beta)
    return json.dumps(wt.to_json(), indent=1) + "\n", True


COMMANDS = {
    "oracle-verify": cmd_oracle_verify,
    "injection-verify": cmd_injection_verify,
    "beta0": cmd_beta0,
    "beta0-bound": cmd_beta0_bound,
    "phi-curve": cmd_phi_curve,
    "percolate": cmd_percolate,
    "simulate": cmd_simulate,
    "weight-table": cmd_weight_table,
}


def run(args) -> int:
    try:
        validate(args)
        text, ok = COMMANDS[args.command](args)
    except (ConfigError, SizeGuardError, DomainError) as exc:
        print(f"clockrc: error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"clockrc: invariant violated: {exc}", file=sys.stderr)
        return 1
    if args.output is not None:
        args.output.write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"clockrc: error: {exc}", file=sys.stderr)
        return 2
    return run(args)


if __name__ == "__main__":
    sys.exit(main())

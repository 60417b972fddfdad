"""Command-line entry point: ``dagsel <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import sys

from . import io
from .bayes import DagPriorSpec, PriorSpec, dag_posterior
from .equivalence import cpdag, distribution_equivalence_class, res_cpdag
from .graph import Dag, enumerate_dags
from .harness import SCALES, resolve, run_experiment, summarize
from .oracle import check_unique_identifiability, classify
from .scm import nongaussian_set, sample_dataset
from .specs import PACKAGED, get_spec
from .working import fit_lad


def _nodes(text: str) -> frozenset:
    """Parse a 1-based node list such as ``1,2,5``."""
    if not text.strip():
        return frozenset()
    return frozenset(int(t) - 1 for t in text.split(",") if t.strip())


def _spec(args):
    if args.config:
        return io.spec_from_dict(io.load_yaml(args.config)["scm"])
    return get_spec(args.spec)


def cmd_simulate(args):
    data = sample_dataset(_spec(args), args.n, args.seed)
    if args.out:
        io.write_dataset(args.out, data)
    else:
        w = csv.writer(sys.stdout)
        w.writerow([f"X{j + 1}" for j in range(data.p)])
        w.writerows([[io.fmt(v) for v in row] for row in data.values])


def cmd_fit(args):
    data = io.read_dataset(args.data)
    fit = fit_lad(data, Dag.parse(args.dag))
    w = csv.writer(sys.stdout)
    w.writerow(["kind", "node", "parent", "value"])
    for nf in fit.nodes:
        for k, c in zip(nf.parents, nf.coef):
            w.writerow(["coef", nf.node + 1, k + 1, io.fmt(c)])
        w.writerow(["theta", nf.node + 1, "", io.fmt(nf.theta)])
    w.writerow(["max_loglik", "", "", io.fmt(fit.max_loglik)])


def cmd_posterior(args):
    data = io.read_dataset(args.data)
    if args.prior == "uniform":
        dag_prior = DagPriorSpec()
    else:
        dag_prior = DagPriorSpec("complexity", alpha=args.alpha, d=args.d, gap_sigma=args.gap_sigma)
    table = dag_posterior(
        data, enumerate_dags(data.p), PriorSpec(), dag_prior, args.mc_samples, args.seed
    )
    w = csv.writer(sys.stdout)
    w.writerow(["dag", "log_marginal", "log_prior", "posterior"])
    for r in table:
        w.writerow([str(r.dag), io.fmt(r.log_marginal), io.fmt(r.log_prior), io.fmt(r.posterior)])


def cmd_cpdag(args):
    print(cpdag(Dag.parse(args.dag)))


def cmd_rescpdag(args):
    print(res_cpdag(Dag.parse(args.dag), _nodes(args.ng)))


def cmd_declass(args):
    for g in sorted(distribution_equivalence_class(Dag.parse(args.dag), _nodes(args.ng)), key=lambda g: g.parents):
        print(g)


def cmd_enumerate(args):
    for g in enumerate_dags(args.p):
        print(g)


def cmd_oracle(args):
    spec = _spec(args)
    rep = classify(spec, args.n_mc, args.tol_sigma, args.seed)
    ident, cond = check_unique_identifiability(spec, args.n_mc, args.seed)

    def names(s):
        return "[" + " | ".join(str(g) for g in sorted(s, key=lambda g: g.parents)) + "]"

    print(f"true_dag: {spec.dag}")
    print(f"nongaussian: {','.join(str(j + 1) for j in sorted(nongaussian_set(spec)))}")
    print(f"risk_class: {names(rep.bar_e_star)}")
    print(f"minimal_risk_class: {names(rep.bar_e_star_r)}")
    print(f"equal_size_risk_class: {names(rep.e_star)}")
    print(f"distribution_class: {names(rep.graphical_class)}")
    print(f"agrees: {str(rep.agrees).lower()}")
    print(f"uniquely_identifiable: {str(ident).lower()}" + (f" ({cond})" if cond else ""))
    if rep.marginal:
        print(f"marginal_separation: {names(rep.marginal)}")
    if args.table:
        with open(args.table, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["dag", "risk", "delta", "delta_se", "psi"])
            for r in rep.gaps:
                w.writerow([str(r.dag), io.fmt(r.risk), io.fmt(r.delta), io.fmt(r.delta_se), r.psi])


def cmd_experiment(args):
    cfg = resolve(args.study, args.config, args.scale, args.seed, args.out)
    if cfg.output_dir is None:
        cfg = resolve(args.study, args.config, args.scale, args.seed, f"results/{cfg.name}")
    res = run_experiment(cfg, workers=args.workers)
    print(f"{len(res.rows)} replicate rows, {len(res.failures)} failures -> {res.output_dir}")
    for q, n, count, mean, q1, med, q3 in summarize(cfg, res.rows):
        print(f"{q:16s} n={n:<6d} median={med:.4f} iqr=[{q1:.4f}, {q3:.4f}] mean={mean:.4f}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dagsel", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def spec_args(p):
        p.add_argument("--spec", default="study1", choices=sorted(PACKAGED))
        p.add_argument("--config", help="YAML file with an 'scm' section (overrides --spec)")

    p = sub.add_parser("simulate", help="sample a dataset from a packaged or configured SEM")
    spec_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="LAD fit of the working model for one DAG")
    p.add_argument("--data", required=True)
    p.add_argument("--dag", required=True, help="e.g. 'p=3; edges=1->2,2->3'")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("posterior", help="posterior over all DAGs for a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--prior", choices=("uniform", "complexity"), default="uniform")
    p.add_argument("--alpha", type=float, default=0.99)
    p.add_argument("--d", type=float, default=None, help="fixed d_n (estimated from data if omitted)")
    p.add_argument("--gap-sigma", type=float, default=3.0)
    p.add_argument("--mc-samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_posterior)

    for name, func, help_text in (
        ("cpdag", cmd_cpdag, "CPDAG of a DAG"),
        ("rescpdag", cmd_rescpdag, "restricted CPDAG given non-Gaussian nodes"),
        ("declass", cmd_declass, "distribution equivalence class"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--dag", required=True)
        if name != "cpdag":
            p.add_argument("--ng", default="", help="1-based non-Gaussian nodes, e.g. '1,3'")
        p.set_defaults(func=func)

    p = sub.add_parser("enumerate", help="list all DAGs on p nodes")
    p.add_argument("--p", type=int, required=True)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("oracle", help="risk-equivalence classes vs the graphical class")
    spec_args(p)
    p.add_argument("--n-mc", type=int, default=10**6)
    p.add_argument("--tol-sigma", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--table", help="write the per-DAG risk-gap table to this CSV")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("experiment", help="run a replicated simulation study")
    p.add_argument("--study", choices=("1", "2a", "2b", "3"))
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--scale", choices=sorted(SCALES))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

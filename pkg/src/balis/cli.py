"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 size-guard violation.
A missing --seed falls back to the BALIS_SEED environment variable and
otherwise to a fresh value printed on stderr so the run stays replayable.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

from . import experiments, moments
from .errors import ConfigError, GuardError
from .graph import generate_graph, load_graph, save_graph
from .greedy import TwoStageGreedy
from .ogp import (
    ForbiddenTupleQuery,
    build_family,
    count_forbidden_tuples,
    estimate_success_probability,
    overlap_histogram,
)
from .oracle import count_balanced_independent_sets, max_balanced_independent_set
from .params import Params, compute_thresholds
from .runtime import ArrivalPolicy
from .seeds import Seed


def _gamma_value(text: str) -> float:
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("BALIS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"BALIS_SEED must be an integer, got {env!r}") from exc
    fresh = secrets.randbits(63)
    print(f"seed: generated master seed {fresh} (pass --seed {fresh} to replay)",
          file=sys.stderr)
    return fresh


@contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fp = open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise ConfigError(f"cannot write output path {path!r}: {exc}") from exc
    with fp:
        yield fp


def _emit_json(obj, path: str | None) -> None:
    with _output(path) as fp:
        fp.write(json.dumps(obj, indent=2) + "\n")


def _params(args, *, allow_degenerate_p: bool = False) -> Params:
    if not allow_degenerate_p and not 0.0 < args.p < 1.0:
        raise ConfigError(f"this command needs p in (0, 1), got {args.p}")
    return Params(args.n, args.p, args.gamma, args.epsilon, args.mu)


def _graph_for(args, params: Params, master: int):
    if getattr(args, "infile", None):
        return load_graph(args.infile)
    return generate_graph(params, Seed(master).derive("graph"))


def _add_model_args(sp, *, need_epsilon: bool = True) -> None:
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--gamma", type=_gamma_value, required=True)
    if need_epsilon:
        sp.add_argument("--epsilon", type=float, required=True)
    else:
        sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--mu", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balis",
        description="Balanced independent sets in dense random bipartite graphs: "
                    "two-stage online greedy, exact small-n oracles, moment formulas, "
                    "and correlated-family experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("thresholds", help="size targets derived from (n, p, gamma, epsilon)")
    _add_model_args(sp)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("gen", help="sample a graph and write the v1 graph file")
    _add_model_args(sp, need_epsilon=False)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("greedy", help="seeded batch of two-stage greedy trials (JSONL)")
    _add_model_args(sp)
    sp.add_argument("--policy", choices=experiments.POLICY_CHOICES, default="uniform-random")
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None,
                    help="trial parallelism (default: serial)")
    sp.add_argument("--only-trial", type=int, default=None,
                    help="replay a single trial index from its seed path")
    sp.add_argument("--out", default=None)
    sp.add_argument("--tf-hist", default=None, help="write a T_f histogram CSV")

    sp = sub.add_parser("oracle", help="exact maximum balanced independent set (small n)")
    _add_model_args(sp, need_epsilon=False)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--in", dest="infile", default=None,
                    help="read a graph file instead of sampling")
    sp.add_argument("--z", default=None, help="comma-separated sizes to count, e.g. 2,3,4")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("count", help="exact number of balanced independent sets of one size")
    _add_model_args(sp, need_epsilon=False)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--in", dest="infile", default=None)
    sp.add_argument("--alpha", type=int, required=True)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("moments", help="first/second moment formulas and the overlap grid")
    _add_model_args(sp)
    sp.add_argument("--alpha", type=int, default=None)
    sp.add_argument("--threshold", type=float, default=1.0)
    sp.add_argument("--q-grid", default=None, help="write the q grid as CSV")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("overlaps", help="pairwise overlap histogram via exact enumeration")
    _add_model_args(sp, need_epsilon=False)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--in", dest="infile", default=None)
    sp.add_argument("--alpha", type=int, required=True)
    sp.add_argument("--slack", type=int, default=0)
    sp.add_argument("--max-sets", type=int, default=5000)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("ogp", help="correlated-family experiments")
    ogp_sub = sp.add_subparsers(dest="ogp_command", required=True)

    fsp = ogp_sub.add_parser("family", help="build a family and dump the copies as graph files")
    _add_model_args(fsp)
    fsp.add_argument("--seed", type=int, default=None)
    fsp.add_argument("--T", type=int, required=True)
    fsp.add_argument("--m", type=int, required=True)
    fsp.add_argument("--policy", choices=experiments.POLICY_CHOICES, default="uniform-random")
    fsp.add_argument("--out-dir", required=True)

    ssp = ogp_sub.add_parser("success", help="Monte Carlo estimate of the all-copies event")
    _add_model_args(ssp)
    ssp.add_argument("--seed", type=int, default=None)
    ssp.add_argument("--m", type=int, required=True)
    ssp.add_argument("--k", type=int, default=None,
                     help="target size (default: ceil((1+epsilon) * alpha_comp))")
    ssp.add_argument("--trials", type=int, required=True)
    ssp.add_argument("--policy", choices=experiments.POLICY_CHOICES, default="uniform-random")
    ssp.add_argument("--out", default=None)

    xsp = ogp_sub.add_parser("forbidden", help="exact forbidden-tuple count (tiny n)")
    _add_model_args(xsp)
    xsp.add_argument("--seed", type=int, default=None)
    xsp.add_argument("--T", type=int, required=True)
    xsp.add_argument("--m", type=int, required=True)
    xsp.add_argument("--a", required=True, help="comma-separated per-copy sizes, e.g. 4,4")
    xsp.add_argument("--beta", type=int, required=True)
    xsp.add_argument("--eta", choices=("L", "R"), default=None,
                     help="default: the majority side of the base run")
    xsp.add_argument("--tau-target", type=int, default=None)
    xsp.add_argument("--policy", choices=experiments.POLICY_CHOICES, default="uniform-random")
    xsp.add_argument("--skip-membership-check", action="store_true")
    xsp.add_argument("--out", default=None)

    osp = ogp_sub.add_parser("overlaps", help="alias of the top-level overlaps command")
    _add_model_args(osp, need_epsilon=False)
    osp.add_argument("--seed", type=int, default=None)
    osp.add_argument("--in", dest="infile", default=None)
    osp.add_argument("--alpha", type=int, required=True)
    osp.add_argument("--slack", type=int, default=0)
    osp.add_argument("--max-sets", type=int, default=5000)
    osp.add_argument("--out", default=None)

    sp = sub.add_parser("sweep", help="cartesian parameter sweep; one aggregate CSV row per point")
    _add_model_args(sp)
    sp.add_argument("--vary", action="append", default=[],
                    help="sweep axis key=v1,v2,... (repeatable)")
    sp.add_argument("--policy", choices=experiments.POLICY_CHOICES, default="uniform-random")
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--max-points", type=int, default=512)
    sp.add_argument("--plot-csv", default=None, help="also emit a size-vs-n plot CSV")
    sp.add_argument("--out", default=None)

    return parser


def _cmd_thresholds(args) -> int:
    th = compute_thresholds(_params(args))
    _emit_json(
        {
            "alpha_stat": th.alpha_stat,
            "alpha_comp": th.alpha_comp,
            "t1": th.t1,
            "t2": th.t2,
            "tau_target": th.tau_target,
        },
        args.out,
    )
    return 0


def _cmd_gen(args) -> int:
    params = _params(args, allow_degenerate_p=True)
    master = _resolve_seed(args.seed)
    g = generate_graph(params, Seed(master).derive("graph"))
    save_graph(g, args.out)
    print(f"wrote {args.out}: n={g.n} edges={g.edge_count()}", file=sys.stderr)
    return 0


def _cmd_greedy(args) -> int:
    exp = experiments.GreedyExperiment(
        n=args.n, p=args.p, gamma=args.gamma, epsilon=args.epsilon, mu=args.mu,
        policy=args.policy, trials=args.trials, k=args.k,
    )
    master = _resolve_seed(args.seed)
    if args.only_trial is not None:
        record = experiments.run_trial(exp, master, args.only_trial)
        with _output(args.out) as fp:
            experiments.write_jsonl([record], fp)
        return 0
    t0 = time.perf_counter()
    records = experiments.run_batch(exp, master, workers=args.workers or 1)
    agg = experiments.aggregate_records(exp, records)
    agg["wall_clock_s"] = round(time.perf_counter() - t0, 6)
    lines = [experiments.config_record(exp, master)] + records + [agg]
    with _output(args.out) as fp:
        experiments.write_jsonl(lines, fp)
    if args.tf_hist:
        header, rows = experiments.emit_plot_data(records, "Tf-histogram")
        with _output(args.tf_hist) as fp:
            experiments.write_csv(header, rows, fp)
    return 0


def _cmd_oracle(args) -> int:
    params = _params(args, allow_degenerate_p=True)
    master = _resolve_seed(args.seed)
    g = _graph_for(args, params, master)
    result = max_balanced_independent_set(g, args.gamma)
    payload = {
        "max_size": result.max_size,
        "witness_L": result.witness.l_ids(),
        "witness_R": result.witness.r_ids(),
    }
    if args.z:
        alphas = [int(a) for a in args.z.split(",") if a.strip()]
        payload["Z"] = {
            str(a): count_balanced_independent_sets(g, args.gamma, a) for a in alphas
        }
    _emit_json(payload, args.out)
    return 0


def _cmd_count(args) -> int:
    params = _params(args, allow_degenerate_p=True)
    master = _resolve_seed(args.seed)
    g = _graph_for(args, params, master)
    count = count_balanced_independent_sets(g, args.gamma, args.alpha)
    _emit_json({"alpha": args.alpha, "count": count}, args.out)
    return 0


def _cmd_moments(args) -> int:
    report = moments.build_moment_report(
        args.n, args.p, args.gamma, args.epsilon, alpha=args.alpha, threshold=args.threshold
    )
    _emit_json(
        {
            "alpha": report.alpha,
            "logE": report.log_first_moment,
            "ratio": report.ratio,
            "crossing": report.crossing_alpha,
        },
        args.out,
    )
    if args.q_grid:
        header, rows = experiments.emit_plot_data(report.q_grid, "q-grid")
        with _output(args.q_grid) as fp:
            experiments.write_csv(header, rows, fp)
    return 0


def _cmd_overlaps(args) -> int:
    params = _params(args, allow_degenerate_p=True)
    master = _resolve_seed(args.seed)
    g = _graph_for(args, params, master)
    hist = overlap_histogram(g, args.gamma, args.alpha, args.slack, max_sets=args.max_sets)
    header, rows = experiments.emit_plot_data(hist, "overlap-heatmap")
    with _output(args.out) as fp:
        experiments.write_csv(header, rows, fp)
    return 0


def _cmd_ogp_family(args) -> int:
    params = _params(args)
    master = _resolve_seed(args.seed)
    seed = Seed(master)
    g = generate_graph(params, seed.derive("graph"))
    family = build_family(
        g, TwoStageGreedy(), ArrivalPolicy(args.policy, args.n), params, args.T, args.m, seed
    )
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {args.out_dir!r}: {exc}") from exc
    paths = []
    for i, copy in enumerate(family.copies, start=1):
        path = out_dir / f"copy{i}.graph"
        save_graph(copy, path)
        paths.append(str(path))
    _emit_json(
        {
            "T": family.T,
            "m": family.m,
            "exposed_L": family.ledger.exposed_l_ids(),
            "exposed_R": family.ledger.exposed_r_ids(),
            "copies": paths,
        },
        str(out_dir / "family.json"),
    )
    print(f"wrote {family.m} copies to {out_dir}", file=sys.stderr)
    return 0


def _cmd_ogp_success(args) -> int:
    params = _params(args)
    master = _resolve_seed(args.seed)
    k = args.k
    if k is None:
        import math

        th = compute_thresholds(params)
        k = math.ceil((1.0 + params.epsilon) * th.alpha_comp)
    est = estimate_success_probability(
        params, TwoStageGreedy(), ArrivalPolicy(args.policy, args.n),
        args.m, k, args.trials, Seed(master),
    )
    _emit_json(
        {
            "p_hat_S": est.p_hat_s,
            "p_hat_E": est.p_hat_e,
            "stderr_S": est.stderr_s,
            "stderr_E": est.stderr_e,
            "trials": est.trials,
            "m": est.m,
            "k": est.k,
        },
        args.out,
    )
    return 0


def _cmd_ogp_forbidden(args) -> int:
    params = _params(args)
    master = _resolve_seed(args.seed)
    seed = Seed(master)
    g = generate_graph(params, seed.derive("graph"))
    policy = ArrivalPolicy(args.policy, args.n)
    algorithm = TwoStageGreedy()
    run_seed = seed.derive("run")
    from .runtime import run_online

    trace = run_online(g, algorithm, policy, params, run_seed)
    family = build_family(
        g, algorithm, policy, params, args.T, args.m, seed,
        run_seed=run_seed, base_trace=trace,
    )
    th = compute_thresholds(params)
    tau_target = args.tau_target if args.tau_target is not None else th.tau_target
    eta = args.eta if args.eta is not None else trace.majority_side
    sizes = tuple(int(a) for a in args.a.split(",") if a.strip())
    query = ForbiddenTupleQuery(a=sizes, beta=args.beta, eta=eta)
    if not args.skip_membership_check:
        query.validate_membership(params, th.alpha_comp)
    count = count_forbidden_tuples(family, query, params.gamma, tau_target)
    _emit_json(
        {"count": count, "eta": eta, "tau_target": tau_target, "T": args.T, "a": list(sizes)},
        args.out,
    )
    return 0


def _cmd_sweep(args) -> int:
    base = experiments.GreedyExperiment(
        n=args.n, p=args.p, gamma=args.gamma, epsilon=args.epsilon, mu=args.mu,
        policy=args.policy, trials=args.trials,
    )
    if not args.vary:
        raise ConfigError("empty sweep")
    vary: dict[str, list] = {}
    for spec in args.vary:
        key, values = experiments.parse_vary(spec)
        vary[key] = values
    master = _resolve_seed(args.seed)
    fieldnames, rows = experiments.sweep(
        base, vary, master, max_points=args.max_points, workers=args.workers or 1
    )
    with _output(args.out) as fp:
        experiments.write_csv(fieldnames, rows, fp)
    if args.plot_csv:
        header, prows = experiments.emit_plot_data(rows, "size-vs-n")
        with _output(args.plot_csv) as fp:
            experiments.write_csv(header, prows, fp)
    return 0


_HANDLERS = {
    "thresholds": _cmd_thresholds,
    "gen": _cmd_gen,
    "greedy": _cmd_greedy,
    "oracle": _cmd_oracle,
    "count": _cmd_count,
    "moments": _cmd_moments,
    "overlaps": _cmd_overlaps,
    "sweep": _cmd_sweep,
}

_OGP_HANDLERS = {
    "family": _cmd_ogp_family,
    "success": _cmd_ogp_success,
    "forbidden": _cmd_ogp_forbidden,
    "overlaps": _cmd_overlaps,
}


def run_command(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "ogp":
            return _OGP_HANDLERS[args.ogp_command](args)
        return _HANDLERS[args.command](args)
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> None:
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))

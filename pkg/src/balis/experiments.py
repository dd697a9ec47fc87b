"""Trial orchestration: seeded batches, aggregation, sweeps, and flat-file output.

Every trial is a pure function of (experiment config, master seed, trial
index), so batches can fan out to a process pool and still merge back in
trial-index order with byte-identical results. JSONL carries per-trial
records; CSV carries aggregate/plot tables. Timing lives only in the
aggregate record, isolated under its own key.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

from .errors import ConfigError
from .graph import generate_graph
from .greedy import two_stage
from .params import Params, compute_thresholds
from .runtime import ArrivalPolicy
from .seeds import Seed

POLICY_CHOICES = ("uniform-random", "l-first", "r-first", "alternating")


@dataclass(frozen=True)
class GreedyExperiment:
    n: int
    p: float
    gamma: float
    epsilon: float
    mu: float | None = None
    policy: str = "uniform-random"
    trials: int = 1
    k: int | None = None  # success size; defaults to t1 + t2

    def __post_init__(self) -> None:
        if self.policy not in POLICY_CHOICES:
            raise ConfigError(f"policy must be one of {POLICY_CHOICES}, got {self.policy!r}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")

    def params(self) -> Params:
        return Params(self.n, self.p, self.gamma, self.epsilon, self.mu)


def run_trial(exp: GreedyExperiment, master: int, index: int) -> dict:
    """One seeded greedy trial; replayable from (exp, master, index) alone."""
    params = exp.params()
    thresholds = compute_thresholds(params)
    trial_seed = Seed(master).derive("trial", index)
    g = generate_graph(params, trial_seed.derive("graph"))
    policy = ArrivalPolicy(exp.policy, exp.n)
    trace = two_stage(g, policy, params, trial_seed.derive("run"))
    final = trace.final_set
    k = exp.k if exp.k is not None else thresholds.t1 + thresholds.t2
    return {
        "trial": index,
        "seed_path": [["trial", index]],
        "final_size": final.size,
        "size_l": final.l_size,
        "size_r": final.r_size,
        "T_f": trace.stage_one_end,
        "T_b": trace.stage_two_end,
        "tau": trace.threshold_time,
        "majority": trace.majority_side,
        "balanced": final.is_balanced(exp.gamma),
        "independent": final.is_independent_in(g),
        "reached_k": final.size >= k,
    }


def _trial_worker(args: tuple) -> dict:
    exp_fields, master, index = args
    return run_trial(GreedyExperiment(**exp_fields), master, index)


def run_batch(exp: GreedyExperiment, master: int, *, workers: int = 1) -> list[dict]:
    """All trials of the experiment, in trial-index order regardless of the
    worker count."""
    if workers is None or workers <= 1:
        return [run_trial(exp, master, i) for i in range(exp.trials)]
    fields = asdict(exp)
    jobs = [(fields, master, i) for i in range(exp.trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_worker, jobs, chunksize=max(1, exp.trials // (8 * workers))))


def _quantile(sorted_vals: list, q: float) -> float:
    if not sorted_vals:
        return math.nan
    pos = q * (len(sorted_vals) - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    if lo == hi:
        return float(sorted_vals[lo])
    w = pos - lo
    return float(sorted_vals[lo]) * (1 - w) + float(sorted_vals[hi]) * w


def aggregate_records(exp: GreedyExperiment, records: list[dict]) -> dict:
    sizes = sorted(r["final_size"] for r in records)
    count = len(records)
    mean = sum(sizes) / count
    var = sum((s - mean) ** 2 for s in sizes) / count
    complete = sum(1 for r in records if r["T_b"] <= 2 * exp.n)
    return {
        "record": "aggregate",
        "trials": count,
        "mean_final_size": mean,
        "stderr_final_size": (var / count) ** 0.5,
        "q25_final_size": _quantile(sizes, 0.25),
        "median_final_size": _quantile(sizes, 0.5),
        "q75_final_size": _quantile(sizes, 0.75),
        "reached_k_frac": sum(r["reached_k"] for r in records) / count,
        "independent_frac": sum(r["independent"] for r in records) / count,
        "complete_frac": complete / count,
        "mean_T_f": sum(r["T_f"] for r in records) / count,
    }


def config_record(exp: GreedyExperiment, master: int, command: str = "greedy") -> dict:
    rec = {"record": "config", "command": command, "master_seed": master}
    for f in exp.__dataclass_fields__:
        rec[f] = getattr(exp, f)
    return rec


def write_jsonl(records: list[dict], fp) -> None:
    for rec in records:
        fp.write(json.dumps(rec, separators=(",", ":")) + "\n")


# -- parameter sweeps --------------------------------------------------------

_VARY_TYPES = {
    "n": int,
    "p": float,
    "gamma": float,
    "epsilon": float,
    "mu": float,
    "trials": int,
    "policy": str,
}


def parse_vary(spec: str) -> tuple[str, list]:
    """Parse one 'key=v1,v2,...' sweep axis."""
    if "=" not in spec:
        raise ConfigError(f"vary spec must look like key=v1,v2,..., got {spec!r}")
    key, _, values = spec.partition("=")
    key = key.strip()
    if key not in _VARY_TYPES:
        raise ConfigError(f"unknown sweep key {key!r}; choose from {sorted(_VARY_TYPES)}")
    caster = _VARY_TYPES[key]
    parsed = [caster(v.strip()) for v in values.split(",") if v.strip()]
    if not parsed:
        raise ConfigError("empty sweep")
    return key, parsed


def sweep(
    base: GreedyExperiment,
    vary: dict[str, list],
    master: int,
    *,
    max_points: int = 512,
    workers: int = 1,
) -> tuple[list[str], list[dict]]:
    """Cartesian grid over the vary axes; one aggregate row per grid point.

    Each point gets the sub-seed ("point", index) of the master, so the whole
    table is reproducible from the master seed alone.
    """
    if not vary:
        raise ConfigError("empty sweep")
    keys = list(vary)
    combos = list(itertools.product(*(vary[k] for k in keys)))
    if not combos:
        raise ConfigError("empty sweep")
    if len(combos) > max_points:
        raise ConfigError(f"grid too large: {len(combos)} points exceeds the cap {max_points}")
    rows = []
    for idx, combo in enumerate(combos):
        exp = replace(base, **dict(zip(keys, combo)))
        point_master = Seed(master).derive("point", idx).value
        records = run_batch(exp, point_master, workers=workers)
        agg = aggregate_records(exp, records)
        row = {k: v for k, v in zip(keys, combo)}
        row["point_index"] = idx
        row.update((k, v) for k, v in agg.items() if k != "record")
        rows.append(row)
    fieldnames = keys + ["point_index"] + [
        k for k in rows[0] if k not in keys and k != "point_index"
    ]
    return fieldnames, rows


# -- plot-data emission -------------------------------------------------------

PLOT_KINDS = ("size-vs-n", "Tf-histogram", "overlap-heatmap", "q-grid")


def emit_plot_data(records, kind: str) -> tuple[list[str], list[list]]:
    """Flatten records into (header, rows) for a plotting CSV; no rendering."""
    if kind == "size-vs-n":
        try:
            rows = [[r["n"], r["mean_final_size"], r["stderr_final_size"]] for r in records]
        except (KeyError, TypeError) as exc:
            raise ConfigError("size-vs-n needs sweep rows varying n") from exc
        return ["n", "mean_size", "stderr"], rows
    if kind == "Tf-histogram":
        try:
            counts: dict[int, int] = {}
            for r in records:
                counts[r["T_f"]] = counts.get(r["T_f"], 0) + 1
        except (KeyError, TypeError) as exc:
            raise ConfigError("Tf-histogram needs trial records") from exc
        return ["T_f", "count"], [[t, c] for t, c in sorted(counts.items())]
    if kind == "overlap-heatmap":
        rows = [[i1, i2, count] for (i1, i2), count in sorted(records.items())]
        return ["i1", "i2", "count"], rows
    if kind == "q-grid":
        rows = [[i1, i2, q] for (i1, i2), q in sorted(records.items())]
        return ["i1", "i2", "q"], rows
    raise ConfigError(f"unknown plot kind {kind!r}; choose from {PLOT_KINDS}")


def write_csv(fieldnames: list[str], rows, fp) -> None:
    fp.write(",".join(str(f) for f in fieldnames) + "\n")
    for row in rows:
        if isinstance(row, dict):
            fp.write(",".join(_csv_cell(row[f]) for f in fieldnames) + "\n")
        else:
            fp.write(",".join(_csv_cell(v) for v in row) + "\n")


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def elapsed_since(t0: float) -> float:
    return time.perf_counter() - t0

"""Command-line front end.

Subcommands: generate (sample block-model graphs to edge-list files),
simulate (one run on one graph, JSON result on stdout), embed (positions to
CSV), resample (embedding-based redraws of a graph), experiment (batch runs
from a config file), summarize (aggregate a records CSV).

Exit codes: 2 for unusable flags or configs, 1 for runtime failures, with a
message on stderr either way.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .abm import SimConfig, run_simulation
from .experiments import (ConfigError, ExperimentConfig, read_records_csv,
                          run_experiment, write_records_csv)
from .graph import read_edge_list, write_edge_list
from .recipes import RecipeTable, default_recipe_table
from .sbm import (BlockMatrix, ConnectivityExhausted, SbmParams,
                  edge_probability_matrix, sample_connected, sample_er)
from .spectral import ase, lse, resample, write_embedding_csv
from .stats import EmpiricalDistribution, summarize


def _default_jobs() -> int:
    env = os.environ.get("POTIONS_JOBS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _add_common(p, seed=True, out=False, jobs=False):
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed")
    if out:
        p.add_argument("--out", required=True, help="output directory")
    if jobs:
        p.add_argument("--jobs", type=int, default=_default_jobs(),
                       help="worker processes (env POTIONS_JOBS)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="potionslab",
        description="Block-model networks, the innovation game, and "
                    "spectral resampling diagnostics.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample block-model graphs")
    g.add_argument("--n", type=int, default=12, help="per-block size (N=2n)")
    g.add_argument("--a", type=float, required=True)
    g.add_argument("--b", type=float, required=True)
    g.add_argument("--c", type=float, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--allow-disconnected", action="store_true")
    g.add_argument("--max-tries", type=int, default=1000)
    _add_common(g, out=True)

    s = sub.add_parser("simulate", help="one simulation on one graph")
    s.add_argument("--graph", required=True, help="edge-list file")
    s.add_argument("--max-steps", default="1000",
                   help="step limit, or 'none' to run to discovery")
    s.add_argument("--table", help="recipe table JSON")
    s.add_argument("--engine", choices=["compiled", "python"],
                   default="compiled")
    s.add_argument("--trajectory", action="store_true",
                   help="include per-step mean/max score series")
    _add_common(s)

    e = sub.add_parser("embed", help="spectral embedding to CSV")
    e.add_argument("--graph", required=True)
    e.add_argument("--kind", choices=["ase", "lse"], required=True)
    e.add_argument("--d", type=int, help="dimension (default: automatic)")
    e.add_argument("--out", help="output CSV (default stdout)")

    r = sub.add_parser("resample", help="embedding-based graph redraws")
    r.add_argument("--graph", required=True)
    r.add_argument("--kind", choices=["ase", "lse"], required=True)
    r.add_argument("--count", type=int, default=1)
    r.add_argument("--max-tries", type=int, default=1000)
    _add_common(r, out=True)

    x = sub.add_parser("experiment", help="batch experiment from a config")
    x.add_argument("--config", required=True, help="experiment JSON")
    x.add_argument("--seed", type=int, help="override the config seed")
    _add_common(x, seed=False, out=True, jobs=True)

    m = sub.add_parser("summarize", help="aggregate a records CSV")
    m.add_argument("--records", required=True)
    m.add_argument("--out", help="output CSV (default stdout)")

    return ap


def _load_table(path):
    return default_recipe_table() if path is None else RecipeTable.from_json(path)


def cmd_generate(args) -> int:
    params = SbmParams(args.n, BlockMatrix(args.a, args.b, args.c))
    p = edge_probability_matrix(params)
    rng = np.random.default_rng(args.seed)
    os.makedirs(args.out, exist_ok=True)
    rejects = 0
    for i in range(args.count):
        if args.allow_disconnected:
            g = sample_er(p, rng, labels=params.membership)
        else:
            cs = sample_connected(p, rng, args.max_tries,
                                  labels=params.membership)
            g, rejects = cs.graph, rejects + cs.rejects
        path = os.path.join(args.out, f"net_{i:04d}.edges")
        write_edge_list(g, path)
        print(path)
    print(f"rejected draws: {rejects}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    g = read_edge_list(args.graph)
    max_steps = None if args.max_steps.lower() == "none" else int(args.max_steps)
    cfg = SimConfig(seed=args.seed, max_steps=max_steps,
                    record_trajectory=args.trajectory)
    result = run_simulation(g, cfg, _load_table(args.table), engine=args.engine)
    print(json.dumps(result.to_dict()))
    return 0


def cmd_embed(args) -> int:
    g = read_edge_list(args.graph)
    emb = ase(g, args.d) if args.kind == "ase" else lse(g, args.d)
    write_embedding_csv(emb, args.out or "/dev/stdout")
    return 0


def cmd_resample(args) -> int:
    g = read_edge_list(args.graph)
    rng = np.random.default_rng(args.seed)
    os.makedirs(args.out, exist_ok=True)
    manifest = []
    for i in range(args.count):
        draw = resample(g, args.kind.upper(), rng, args.max_tries)
        path = os.path.join(args.out, f"resample_{args.kind}_{i:04d}.edges")
        write_edge_list(draw.graph, path)
        entry = draw.model.manifest()
        entry.update({"path": path, "rejected_draws": draw.rejects})
        manifest.append(entry)
        print(path)
    mpath = os.path.join(args.out, f"resample_{args.kind}_manifest.json")
    with open(mpath, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return 0


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig.from_json(args.config)
    if args.seed is not None:
        cfg = ExperimentConfig.from_json({**cfg.echo(), "seed": args.seed})
    if cfg.mode == "spectral" and cfg.resamples_per_embedding == 0:
        print("warning: resamples_per_embedding is 0; no distance rows "
              "will be produced", file=sys.stderr)
    result = run_experiment(cfg, jobs=args.jobs, out_dir=args.out)
    skipped = result.manifest["diagnostics"]["skipped_networks"]
    if skipped:
        print(f"warning: skipped {len(skipped)} base network(s) after "
              f"exhausting connectivity retries", file=sys.stderr)
    print(result.paths["records"])
    return 0


def cmd_summarize(args) -> int:
    records = read_records_csv(args.records)
    if not records:
        print("error: empty records file", file=sys.stderr)
        return 1
    groups = {}
    for r in records:
        key = (r["experiment"], r["family"], r["b"], r["theta"], r["source"])
        groups.setdefault(key, []).append(r)
    fields = ("experiment", "family", "b", "theta", "source", "count",
              "censored_count", "mean", "median", "q1", "q3", "min", "max")
    rows = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], float(k[2]),
                                             float(k[3]), k[4])):
        grp = groups[key]
        dts = [float(r["discovery_time"]) for r in grp
               if r["discovery_time"] != ""]
        censored = sum(int(r["censored"]) for r in grp)
        row = dict(zip(("experiment", "family", "b", "theta", "source"), key))
        if dts:
            row.update(summarize(EmpiricalDistribution(np.asarray(dts),
                                                       censored)))
        else:
            row.update({"count": 0, "censored_count": censored})
        rows.append({k: row.get(k, "") for k in fields})
    out = args.out or "/dev/stdout"
    write_records_csv(rows, out, fields=fields)
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "embed": cmd_embed,
    "resample": cmd_resample,
    "experiment": cmd_experiment,
    "summarize": cmd_summarize,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ConnectivityExhausted as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

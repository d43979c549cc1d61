"""Batch experiment orchestration: parameter sweeps, seeding, persistence.

Two modes. Family mode sweeps a theta grid (optionally several inter-block
b rows), samples connected networks at each point, runs the game on each,
and records one row per simulation. Spectral mode additionally embeds each
base network (adjacency and Laplacian variants), draws density-adjusted
resamples from each embedding, runs the game once per resample, and records
the earth mover's distance between the base and resampled discovery-time
distributions per network and kind.

Determinism contract: every random decision draws from a seed derived by
SeedSequence from (master seed, row index, theta index, network id, sim id,
purpose code). Tasks are independent, results are sorted canonically before
writing, so the records file is byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Optional, Sequence

import numpy as np

from . import __version__ as _version
from .abm import SimConfig, run_simulation
from .graph import Graph
from .recipes import RecipeTable, default_recipe_table
from .sbm import (BlockMatrix, ConnectivityExhausted, SbmFamily, SbmParams,
                  classify_structure, edge_probability_matrix, family_point,
                  FAMILY_DELTAS, DEFAULT_THETA_GRIDS, DEFAULT_BASES,
                  sample_connected)
from .spectral import resample
from .stats import EmpiricalDistribution, emd_1d, summarize

__all__ = [
    "ExperimentConfig", "ConfigError", "RunResult", "run_family_experiment",
    "run_spectral_experiment", "run_experiment", "bootstrap_mean_diff",
    "RECORD_FIELDS", "EMD_FIELDS", "write_records_csv", "read_records_csv",
]

RECORD_FIELDS = ("experiment", "family", "theta", "a", "b", "c", "structure",
                 "network_id", "sim_id", "source", "discovery_time",
                 "censored", "steps_run", "seed")
EMD_FIELDS = ("experiment", "theta", "network_id", "kind", "emd",
              "n_base_sims", "n_resamples")

# purpose codes for seed derivation
_P_NETWORK = 0
_P_BASE_SIM = 1
_P_DRAW = {"ASE": 2, "LSE": 3}
_P_RESAMPLE_SIM = {"ASE": 4, "LSE": 5}
_SOURCE_ORDER = {"base": 0, "ASE": 1, "LSE": 2}


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI maps this to exit code 2)."""


def derive_seed(master: int, *fields: int) -> int:
    """Stable per-task seed; collision-resistant across the field tuple."""
    entropy = [master & 0xFFFFFFFFFFFFFFFF] + [int(f) for f in fields]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved experiment description.

    b_rows applies to family M1 style sweeps where several inter-block
    levels share one curve; None means a single row at base.b.
    """

    mode: str = "family"                # "family" or "spectral"
    family_id: str = "M1"
    n: int = 12
    base: tuple = (0.75, 0.05, 0.05)
    b_rows: Optional[tuple] = None
    thetas: tuple = ()
    networks_per_theta: int = 500
    sims_per_network: int = 1
    resamples_per_embedding: int = 100
    max_steps: Optional[int] = None     # None: run to discovery (hard ceiling)
    master_seed: int = 0
    max_tries: int = 1000
    experiment_id: str = ""
    table_path: Optional[str] = None

    def __post_init__(self):
        if self.mode not in ("family", "spectral"):
            raise ConfigError(f"mode must be family or spectral, got {self.mode!r}")
        if self.family_id not in FAMILY_DELTAS:
            raise ConfigError(f"unknown family {self.family_id!r}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if not self.thetas:
            object.__setattr__(self, "thetas",
                               DEFAULT_THETA_GRIDS[self.family_id])
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "base", tuple(float(v) for v in self.base))
        if self.b_rows is not None:
            rows = tuple(float(b) for b in self.b_rows)
            if not rows:
                raise ConfigError("b_rows may not be empty")
            object.__setattr__(self, "b_rows", rows)
        if self.networks_per_theta < 1 or self.sims_per_network < 1:
            raise ConfigError("counts must be >= 1")
        if self.mode == "spectral" and self.resamples_per_embedding < 0:
            raise ConfigError("resamples_per_embedding must be >= 0")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1 or null")
        if self.max_tries < 1:
            raise ConfigError("max_tries must be >= 1")
        if not self.experiment_id:
            object.__setattr__(self, "experiment_id",
                               self.family_id if self.mode == "family"
                               else "spectral")
        # every (row, theta) must stay a valid family point
        for b0 in (self.b_rows or (self.base[1],)):
            fam = self._family_for_row(b0)
            for t in self.thetas:
                family_point(fam, t)

    def _family_for_row(self, b0: float) -> SbmFamily:
        base = BlockMatrix(self.base[0], b0, self.base[2])
        return SbmFamily(base, FAMILY_DELTAS[self.family_id],
                         max(self.thetas), self.family_id)

    @property
    def rows(self) -> tuple:
        return self.b_rows if self.b_rows is not None else (self.base[1],)

    def load_table(self) -> RecipeTable:
        if self.table_path is None:
            return default_recipe_table()
        return RecipeTable.from_json(self.table_path)

    @classmethod
    def from_json(cls, source) -> "ExperimentConfig":
        if isinstance(source, dict):
            doc = dict(source)
        else:
            try:
                with open(source) as fh:
                    doc = json.load(fh)
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigError(f"cannot read config: {e}") from e
        known = {
            "experiment": "experiment_id", "mode": "mode", "family": "family_id",
            "n": "n", "base": "base", "b_rows": "b_rows", "theta": "thetas",
            "networks_per_theta": "networks_per_theta",
            "sims_per_network": "sims_per_network",
            "resamples_per_embedding": "resamples_per_embedding",
            "max_steps": "max_steps", "seed": "master_seed",
            "max_tries": "max_tries", "recipe_table": "table_path",
            "delta": None,  # accepted, validated against the family
        }
        kwargs = {}
        for key, val in doc.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if known[key] is not None:
                kwargs[known[key]] = val
        cfg = cls(**kwargs)
        if "delta" in doc and tuple(float(d) for d in doc["delta"]) != \
                FAMILY_DELTAS[cfg.family_id]:
            raise ConfigError(
                f"delta {doc['delta']} does not match family {cfg.family_id}")
        return cfg

    def echo(self) -> dict:
        return {
            "experiment": self.experiment_id, "mode": self.mode,
            "family": self.family_id, "n": self.n, "base": list(self.base),
            "delta": list(FAMILY_DELTAS[self.family_id]),
            "b_rows": None if self.b_rows is None else list(self.b_rows),
            "theta": list(self.thetas),
            "networks_per_theta": self.networks_per_theta,
            "sims_per_network": self.sims_per_network,
            "resamples_per_embedding": self.resamples_per_embedding,
            "max_steps": self.max_steps, "seed": self.master_seed,
            "max_tries": self.max_tries, "recipe_table": self.table_path,
        }


def _fmt(x: float) -> str:
    return repr(round(float(x), 10))


def _record(cfg, bm, theta, net_id, sim_id, source, result) -> dict:
    return {
        "experiment": cfg.experiment_id,
        "family": cfg.family_id,
        "theta": _fmt(theta),
        "a": _fmt(bm.a), "b": _fmt(bm.b), "c": _fmt(bm.c),
        "structure": classify_structure(bm),
        "network_id": net_id,
        "sim_id": sim_id,
        "source": source,
        "discovery_time": "" if result.discovery_time is None
                          else result.discovery_time,
        "censored": int(result.censored),
        "steps_run": result.steps_run,
        "seed": result.seed,
    }


# ---------------------------------------------------------------------------
# family mode

def _family_task(args):
    """One (row, theta, network): sample a connected net, run the sims."""
    cfg, row_idx, theta_idx, net_id = args
    table = cfg.load_table()
    b0 = cfg.rows[row_idx]
    bm = family_point(cfg._family_for_row(b0), cfg.thetas[theta_idx])
    params = SbmParams(cfg.n, bm)
    net_seed = derive_seed(cfg.master_seed, row_idx, theta_idx, net_id,
                           0, _P_NETWORK)
    rng = np.random.default_rng(net_seed)
    try:
        cs = sample_connected(edge_probability_matrix(params), rng,
                              cfg.max_tries, labels=params.membership)
    except ConnectivityExhausted as e:
        e.args = (f"{e.args[0]} sampling network {net_id} at "
                  f"b={_fmt(b0)} theta={_fmt(cfg.thetas[theta_idx])}",)
        raise
    records = []
    for sim_id in range(cfg.sims_per_network):
        seed = derive_seed(cfg.master_seed, row_idx, theta_idx, net_id,
                           sim_id, _P_BASE_SIM)
        result = run_simulation(cs.graph, SimConfig(seed=seed,
                                                    max_steps=cfg.max_steps),
                                table)
        records.append(_record(cfg, bm, cfg.thetas[theta_idx], net_id,
                               sim_id, "base", result))
    return {"records": records, "net_rejects": cs.rejects,
            "censored": sum(r["censored"] for r in records)}


def _family_tasks(cfg):
    tasks = []
    net_id = 0
    for row_idx in range(len(cfg.rows)):
        for theta_idx in range(len(cfg.thetas)):
            for _ in range(cfg.networks_per_theta):
                tasks.append((cfg, row_idx, theta_idx, net_id))
                net_id += 1
    return tasks


# ---------------------------------------------------------------------------
# spectral mode

def _spectral_task(args):
    """One (theta, base network): base sims, both resampling kinds, EMDs."""
    cfg, row_idx, theta_idx, net_id = args
    table = cfg.load_table()
    theta = cfg.thetas[theta_idx]
    bm = family_point(cfg._family_for_row(cfg.rows[row_idx]), theta)
    params = SbmParams(cfg.n, bm)
    net_seed = derive_seed(cfg.master_seed, row_idx, theta_idx, net_id,
                           0, _P_NETWORK)
    rng = np.random.default_rng(net_seed)
    cs = sample_connected(edge_probability_matrix(params), rng, cfg.max_tries,
                          labels=params.membership)
    g = cs.graph
    out = {"records": [], "emd": [], "net_rejects": cs.rejects,
           "resample_rejects": 0, "clipped": 0, "censored": 0,
           "skipped": None}

    base_dts = []
    base_records = []
    for sim_id in range(cfg.sims_per_network):
        seed = derive_seed(cfg.master_seed, row_idx, theta_idx, net_id,
                           sim_id, _P_BASE_SIM)
        result = run_simulation(g, SimConfig(seed=seed, max_steps=cfg.max_steps),
                                table)
        base_records.append(_record(cfg, bm, theta, net_id, sim_id, "base",
                                    result))
        if result.discovery_time is not None:
            base_dts.append(result.discovery_time)

    kind_records = []
    emd_rows = []
    for kind in ("ASE", "LSE"):
        dts = []
        n_done = 0
        for rs_id in range(cfg.resamples_per_embedding):
            draw_seed = derive_seed(cfg.master_seed, row_idx, theta_idx,
                                    net_id, rs_id, _P_DRAW[kind])
            try:
                draw = resample(g, kind, np.random.default_rng(draw_seed),
                                cfg.max_tries)
            except ConnectivityExhausted as e:
                # informative outcome for dense-core bases: skip the whole
                # base network, report the counts
                out["skipped"] = {"theta": _fmt(theta), "network_id": net_id,
                                  "kind": kind, "rejects": e.rejects}
                out["resample_rejects"] += e.rejects
                return out
            out["resample_rejects"] += draw.rejects
            out["clipped"] += draw.model.clipped
            seed = derive_seed(cfg.master_seed, row_idx, theta_idx, net_id,
                               rs_id, _P_RESAMPLE_SIM[kind])
            result = run_simulation(draw.graph,
                                    SimConfig(seed=seed, max_steps=cfg.max_steps),
                                    table)
            kind_records.append(_record(cfg, bm, theta, net_id, rs_id, kind,
                                        result))
            n_done += 1
            if result.discovery_time is not None:
                dts.append(result.discovery_time)
        if dts and base_dts:
            emd_rows.append({
                "experiment": cfg.experiment_id, "theta": _fmt(theta),
                "network_id": net_id, "kind": kind,
                "emd": repr(float(emd_1d(base_dts, dts))),
                "n_base_sims": len(base_dts), "n_resamples": len(dts),
            })

    records = base_records + kind_records
    out["records"] = records
    out["emd"] = emd_rows
    out["censored"] = sum(r["censored"] for r in records)
    return out


# ---------------------------------------------------------------------------
# shared driver

@dataclass
class RunResult:
    records: list
    emd_rows: list
    manifest: dict
    paths: dict = field(default_factory=dict)


def _map_tasks(task_fn, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [task_fn(t) for t in tasks]
    with Pool(processes=jobs) as pool:
        return pool.map(task_fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs)))


def _sort_records(records):
    records.sort(key=lambda r: (r["experiment"], r["family"], float(r["b"]),
                                float(r["theta"]), _SOURCE_ORDER[r["source"]],
                                r["network_id"], r["sim_id"]))
    return records


def _aggregates(records) -> list:
    """summarize() per (family, b, theta, source) group, censored counted."""
    groups = {}
    for r in records:
        key = (r["family"], r["b"], r["theta"], r["source"])
        groups.setdefault(key, []).append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[0], float(k[1]), float(k[2]),
                                             _SOURCE_ORDER[k[3]])):
        rows = groups[key]
        dts = [int(r["discovery_time"]) for r in rows
               if r["discovery_time"] != ""]
        censored = sum(int(r["censored"]) for r in rows)
        entry = {"family": key[0], "b": key[1], "theta": key[2],
                 "source": key[3]}
        if dts:
            entry.update(summarize(EmpiricalDistribution(np.asarray(dts, float),
                                                         censored)))
        else:
            entry.update({"count": 0, "censored_count": censored})
        out.append(entry)
    return out


def write_records_csv(records, path, fields=RECORD_FIELDS) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(fields), lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r)


def read_records_csv(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _finish(cfg, results, t0, out_dir, jobs) -> RunResult:
    records = []
    emd_rows = []
    net_rejects = 0
    resample_rejects = 0
    clipped = 0
    censored = 0
    skipped = []
    for res in results:
        if res.get("skipped"):
            skipped.append(res["skipped"])
            resample_rejects += res["resample_rejects"]
            net_rejects += res["net_rejects"]
            continue
        records.extend(res["records"])
        emd_rows.extend(res.get("emd", []))
        net_rejects += res["net_rejects"]
        resample_rejects += res.get("resample_rejects", 0)
        clipped += res.get("clipped", 0)
        censored += res["censored"]
    _sort_records(records)
    emd_rows.sort(key=lambda r: (float(r["theta"]), r["network_id"], r["kind"]))
    manifest = {
        "experiment": cfg.experiment_id,
        "mode": cfg.mode,
        "version": _version,
        "config": cfg.echo(),
        "jobs": jobs,
        "wall_clock_seconds": round(time.time() - t0, 3),
        "n_records": len(records),
        "aggregates": _aggregates(records),
        "diagnostics": {
            "network_rejects": net_rejects,
            "resample_rejects": resample_rejects,
            "clipped_entries": clipped,
            "censored_runs": censored,
            "skipped_networks": skipped,
        },
    }
    paths = {}
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        paths["records"] = os.path.join(out_dir, "records.csv")
        write_records_csv(records, paths["records"])
        if cfg.mode == "spectral":
            paths["emd"] = os.path.join(out_dir, "emd.csv")
            write_records_csv(emd_rows, paths["emd"], fields=EMD_FIELDS)
        paths["manifest"] = os.path.join(out_dir, "manifest.json")
        with open(paths["manifest"], "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    return RunResult(records, emd_rows, manifest, paths)


def run_family_experiment(cfg: ExperimentConfig, jobs: int = 1,
                          out_dir=None) -> RunResult:
    if cfg.mode != "family":
        raise ConfigError("config mode is not 'family'")
    t0 = time.time()
    results = _map_tasks(_family_task, _family_tasks(cfg), jobs)
    return _finish(cfg, results, t0, out_dir, jobs)


def run_spectral_experiment(cfg: ExperimentConfig, jobs: int = 1,
                            out_dir=None) -> RunResult:
    if cfg.mode != "spectral":
        raise ConfigError("config mode is not 'spectral'")
    t0 = time.time()
    results = _map_tasks(_spectral_task, _family_tasks(cfg), jobs)
    return _finish(cfg, results, t0, out_dir, jobs)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1, out_dir=None) -> RunResult:
    if cfg.mode == "family":
        return run_family_experiment(cfg, jobs, out_dir)
    return run_spectral_experiment(cfg, jobs, out_dir)


def bootstrap_mean_diff(a, b, iters: int = 10000, rng=None) -> dict:
    """One-sided bootstrap evidence for mean(a) < mean(b).

    p_one_sided is the bootstrap probability that the resampled mean of `a`
    is at least that of `b` (mid-p on exact ties), so separated supports in
    the hypothesized direction give p near 0 and identical inputs give p
    near 0.5.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("empty input")
    if iters < 1000:
        raise ValueError("need at least 1000 bootstrap iterations")
    gen = rng if isinstance(rng, np.random.Generator) \
        else np.random.default_rng(rng)
    means_a = a[gen.integers(0, a.size, (iters, a.size))].mean(axis=1)
    means_b = b[gen.integers(0, b.size, (iters, b.size))].mean(axis=1)
    d = means_a - means_b
    p = float(np.mean(d > 0) + 0.5 * np.mean(d == 0))
    return {"diff": float(a.mean() - b.mean()), "p_one_sided": p}

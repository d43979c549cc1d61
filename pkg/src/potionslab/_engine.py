"""Compiled simulation engine.

Same model as the step()/select_items() reference semantics in abm.py, run
as one jitted loop over flat arrays: CSR adjacency, a dense triad->product
lookup cube, inventories as fixed-capacity rows. One call = one full
simulation, seeded once at entry, so results are a pure function of
(graph, table, seed, limits) regardless of process or scheduling.

The random stream here is numba's own MT19937; it intentionally does not
match the python engine's stream. Equality of the two engines is
distributional and is asserted in the tests.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .abm import SimConfig, SimResult
from .graph import Graph
from .recipes import RecipeTable

# Dense K^3 lookup stays small only for modest item universes; 128^3 int16
# is 4 MB, which is the accepted ceiling.
MAX_ITEMS = 128


def compile_graph(g: Graph):
    """CSR neighbor arrays (indptr, indices), int64, neighbors sorted."""
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    chunks = []
    for i in range(g.n):
        nb = g.neighbor_list(i)
        indptr[i + 1] = indptr[i] + len(nb)
        chunks.extend(nb)
    return indptr, np.asarray(chunks, dtype=np.int64)


def compile_table(table: RecipeTable):
    """Flat arrays for the kernel; cached on the table object."""
    cached = getattr(table, "_compiled", None)
    if cached is not None:
        return cached
    ids = list(table.items.keys())
    if len(ids) > MAX_ITEMS:
        raise ValueError(f"compiled engine supports at most {MAX_ITEMS} items")
    index = {iid: i for i, iid in enumerate(ids)}
    k = len(ids)
    scores = np.array([float(table.items[i].score) for i in ids])
    lut = np.full(k * k * k, -1, dtype=np.int16)
    for inputs, product in table.recipes.items():
        i0, i1, i2 = sorted(index[x] for x in inputs)
        lut[(i0 * k + i1) * k + i2] = index[product]
    cross_req = np.array(sorted(index[x] for x in table.crossover_contains),
                         dtype=np.int64)
    xprod = index[table.crossover_product]
    init_idx = np.array([index[i] for i in table.initial_items], dtype=np.int64)
    compiled = (scores, lut, cross_req, np.int64(xprod), init_idx, np.int64(k))
    table._compiled = compiled
    return compiled


@njit(cache=True)
def _simulate(indptr, indices, scores, lut, cross_req, xprod, init_idx,
              n_items, seed, max_steps, record_traj):
    np.random.seed(seed)
    n = indptr.shape[0] - 1
    inv = np.zeros((n, n_items), dtype=np.int64)
    inv_len = np.zeros(n, dtype=np.int64)
    has = np.zeros((n, n_items), dtype=np.uint8)
    weight = np.zeros(n)            # sum of scores in inventory
    agent_score = np.zeros(n, dtype=np.int64)
    n_init = init_idx.shape[0]
    for ag in range(n):
        for ii in range(n_init):
            it = init_idx[ii]
            inv[ag, ii] = it
            has[ag, it] = 1
            weight[ag] += scores[it]
            s = np.int64(scores[it])
            if s > agent_score[ag]:
                agent_score[ag] = s
        inv_len[ag] = n_init

    traj_len = max_steps if record_traj else 0
    mean_traj = np.zeros(traj_len)
    max_traj = np.zeros(traj_len, dtype=np.int64)

    order = np.arange(n)
    picks = np.empty(3, dtype=np.int64)
    discovery = np.int64(-1)
    steps_run = np.int64(0)

    for t in range(1, max_steps + 1):
        # Fisher-Yates for a fresh uniform order each step
        for i in range(n - 1, 0, -1):
            j = np.random.randint(0, i + 1)
            tmp = order[i]
            order[i] = order[j]
            order[j] = tmp

        found = False
        for oi in range(n):
            focal = order[oi]
            deg = indptr[focal + 1] - indptr[focal]
            partner = indices[indptr[focal] + np.random.randint(0, deg)]
            k = 1 if np.random.random() < 0.5 else 2

            npk = 0
            for side in range(2):
                ag = focal if side == 0 else partner
                want = k if side == 0 else 3 - k
                side_start = npk
                total = weight[ag]
                for _d in range(want):
                    r = np.random.random() * total
                    acc = 0.0
                    chosen = np.int64(-1)
                    for ii in range(inv_len[ag]):
                        it = inv[ag, ii]
                        mine = False
                        for pj in range(side_start, npk):
                            if picks[pj] == it:
                                mine = True
                                break
                        if mine:
                            continue
                        acc += scores[it]
                        if r < acc:
                            chosen = it
                            break
                    if chosen == -1:
                        # float-edge fallback: last eligible item
                        for ii in range(inv_len[ag] - 1, -1, -1):
                            it = inv[ag, ii]
                            mine = False
                            for pj in range(side_start, npk):
                                if picks[pj] == it:
                                    mine = True
                                    break
                            if not mine:
                                chosen = it
                                break
                    picks[npk] = chosen
                    npk += 1
                    total -= scores[chosen]

            a0 = picks[0]
            a1 = picks[1]
            a2 = picks[2]
            if a0 > a1:
                tmp = a0
                a0 = a1
                a1 = tmp
            if a1 > a2:
                tmp = a1
                a1 = a2
                a2 = tmp
            if a0 > a1:
                tmp = a0
                a0 = a1
                a1 = tmp
            if a0 == a1 or a1 == a2:
                continue  # duplicate across the dyad: nothing happens

            prod = np.int64(lut[(a0 * n_items + a1) * n_items + a2])
            if prod < 0:
                contains_all = True
                for ci in range(cross_req.shape[0]):
                    cid = cross_req[ci]
                    if a0 != cid and a1 != cid and a2 != cid:
                        contains_all = False
                        break
                if contains_all:
                    prod = xprod
                else:
                    continue

            # one-hop diffusion: dyad first, then neighbors of either member
            ps = np.int64(scores[prod])
            for side in range(2):
                ag = focal if side == 0 else partner
                if has[ag, prod] == 0:
                    has[ag, prod] = 1
                    inv[ag, inv_len[ag]] = prod
                    inv_len[ag] += 1
                    weight[ag] += scores[prod]
                    if ps > agent_score[ag]:
                        agent_score[ag] = ps
            for side in range(2):
                ag = focal if side == 0 else partner
                for jj in range(indptr[ag], indptr[ag + 1]):
                    nb = indices[jj]
                    if has[nb, prod] == 0:
                        has[nb, prod] = 1
                        inv[nb, inv_len[nb]] = prod
                        inv_len[nb] += 1
                        weight[nb] += scores[prod]
                        if ps > agent_score[nb]:
                            agent_score[nb] = ps

            if prod == xprod:
                found = True

        steps_run = np.int64(t)
        if record_traj:
            acc_s = 0.0
            mx = np.int64(0)
            for ag in range(n):
                acc_s += agent_score[ag]
                if agent_score[ag] > mx:
                    mx = agent_score[ag]
            mean_traj[t - 1] = acc_s / n
            max_traj[t - 1] = mx
        if found:
            discovery = np.int64(t)
            break

    return discovery, steps_run, agent_score, mean_traj, max_traj


def derive_kernel_seed(seed: int) -> int:
    """Map an arbitrary integer seed into the kernel's 32-bit seed space."""
    # mask: entropy values must be nonnegative, seeds may be signed
    return int(np.random.SeedSequence(
        [seed & 0xFFFFFFFFFFFFFFFF]).generate_state(1)[0])


def run_compiled(g: Graph, cfg: SimConfig, table: RecipeTable) -> SimResult:
    indptr, indices = compile_graph(g)
    scores, lut, cross_req, xprod, init_idx, n_items = compile_table(table)
    limit = cfg.step_limit
    discovery, steps_run, final_scores, mean_traj, max_traj = _simulate(
        indptr, indices, scores, lut, cross_req, xprod, init_idx, n_items,
        derive_kernel_seed(cfg.seed), np.int64(limit), cfg.record_trajectory)
    discovery = None if discovery < 0 else int(discovery)
    steps = int(steps_run)
    return SimResult(
        discovery_time=discovery,
        censored=discovery is None,
        steps_run=steps,
        final_scores=[int(s) for s in final_scores],
        seed=cfg.seed,
        engine="compiled",
        mean_scores=[float(x) for x in mean_traj[:steps]] if cfg.record_trajectory else None,
        max_scores=[int(x) for x in max_traj[:steps]] if cfg.record_trajectory else None,
    )

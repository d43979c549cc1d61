"""The innovation game: dyads combine three items against a recipe table.

Each discrete time step, every agent acts as focal exactly once, in a fresh
random order. The focal agent picks a partner uniformly from its neighbors,
chooses k in {1,2} uniformly, draws k items from its own inventory and the
partner draws 3-k from theirs (score-weighted, without replacement within
each side), and the triad is checked against the table. A product spreads
immediately to the dyad and to every neighbor of either member, one hop, no
cascade. The first production of the crossover item ends the run; its
1-based step index is the discovery time.

The functions in this module are the readable reference semantics and
operate on plain Python state with a stdlib random.Random. `run_simulation`
defaults to a compiled engine with identical behavior (see _engine); the
pure-Python path stays available via engine="python" and the test suite
holds the two to the same distributions.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .graph import Graph
from .recipes import Item, RecipeTable, default_recipe_table

__all__ = [
    "AgentState", "SimConfig", "SimResult", "StepEvents", "Attempt",
    "init_population", "select_partner", "select_items",
    "attempt_combination", "diffuse", "step", "run_simulation",
    "HARD_STEP_CEILING",
]

# Unlimited runs still stop somewhere; hitting this ceiling reports the run
# as censored rather than truncating silently.
HARD_STEP_CEILING = 1_000_000


class AgentState:
    """Inventory (insertion-ordered, no duplicates) plus the running score.

    Score is always the maximum item score in the inventory; items are never
    removed, so it is nondecreasing.
    """

    __slots__ = ("inventory", "_has", "score")

    def __init__(self, initial_items: Sequence[str], table: RecipeTable):
        self.inventory = list(initial_items)
        self._has = set(initial_items)
        if len(self._has) != len(self.inventory):
            raise ValueError("duplicate items in initial inventory")
        self.score = max(table.score(i) for i in self.inventory)

    def has(self, item_id: str) -> bool:
        return item_id in self._has

    def add(self, item: Item) -> bool:
        """Add if absent; returns True when the item is new to this agent."""
        if item.id in self._has:
            return False
        self.inventory.append(item.id)
        self._has.add(item.id)
        if item.score > self.score:
            self.score = item.score
        return True


@dataclass(frozen=True)
class SimConfig:
    """max_steps=None means run to discovery (subject to the hard ceiling)."""

    seed: int
    max_steps: Optional[int] = 1000
    record_trajectory: bool = False

    def __post_init__(self):
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1 (or None for unlimited)")

    @property
    def step_limit(self) -> int:
        if self.max_steps is None:
            return HARD_STEP_CEILING
        return min(self.max_steps, HARD_STEP_CEILING)


@dataclass(frozen=True)
class Attempt:
    focal: int
    partner: int
    items: tuple
    product: Optional[str]
    new_receivers: int


@dataclass
class StepEvents:
    attempts: list = field(default_factory=list)

    @property
    def products(self) -> list:
        return [a.product for a in self.attempts if a.product is not None]

    def crossover_found(self, table: RecipeTable) -> bool:
        return any(p == table.crossover_product for p in self.products)


@dataclass
class SimResult:
    discovery_time: Optional[int]
    censored: bool
    steps_run: int
    final_scores: list
    seed: int
    engine: str
    mean_scores: Optional[list] = None
    max_scores: Optional[list] = None

    def to_dict(self) -> dict:
        d = {
            "discovery_time": self.discovery_time,
            "censored": self.censored,
            "steps_run": self.steps_run,
            "final_scores": self.final_scores,
            "seed": self.seed,
            "engine": self.engine,
        }
        if self.mean_scores is not None:
            d["mean_scores"] = self.mean_scores
            d["max_scores"] = self.max_scores
        return d


def init_population(g: Graph, table: Optional[RecipeTable] = None) -> list:
    """One agent per node, each holding exactly the tier-0 items."""
    if table is None:
        table = default_recipe_table()
    if g.n < 2:
        raise ValueError("need at least two agents")
    if any(d == 0 for d in g.degrees()):
        raise ValueError("isolated node: partner selection undefined")
    initial = table.initial_items
    return [AgentState(initial, table) for _ in range(g.n)]


def select_partner(g: Graph, focal: int, rng: random.Random) -> int:
    nbrs = g.neighbor_list(focal)
    if not nbrs:
        raise ValueError(f"node {focal} has no neighbors")
    return nbrs[rng.randrange(len(nbrs))]


def select_items(inventory: Sequence[str], k: int, rng: random.Random,
                 table: RecipeTable) -> list:
    """k sequential score-weighted draws without replacement.

    At each draw, P(item) = score / (sum of scores of items not yet drawn
    from this inventory).
    """
    if k > len(inventory):
        raise ValueError(f"cannot draw {k} items from inventory of "
                         f"{len(inventory)}")
    picked = []
    remaining = list(inventory)
    total = float(sum(table.score(i) for i in remaining))
    for _ in range(k):
        r = rng.random() * total
        acc = 0.0
        chosen_idx = len(remaining) - 1  # float-edge fallback: last item
        for idx, iid in enumerate(remaining):
            acc += table.score(iid)
            if r < acc:
                chosen_idx = idx
                break
        iid = remaining.pop(chosen_idx)
        picked.append(iid)
        total -= table.score(iid)
    return picked


def attempt_combination(items: Sequence[str], table: RecipeTable) -> Optional[Item]:
    """Product of the dyad's 3 items, or None (duplicates included)."""
    return table.lookup(items)


def diffuse(item: Item, dyad: tuple, g: Graph, states: Sequence[AgentState]) -> int:
    """One-hop spread: the dyad, then every neighbor of either member.

    Idempotent per agent; returns how many agents newly received the item.
    """
    focal, partner = dyad
    new = 0
    for ag in (focal, partner):
        if states[ag].add(item):
            new += 1
    for ag in (focal, partner):
        for nb in g.neighbor_list(ag):
            if states[nb].add(item):
                new += 1
    return new


def step(g: Graph, states: Sequence[AgentState], table: RecipeTable,
         rng: random.Random) -> StepEvents:
    """One time step: every agent focal once, fresh random order, effects
    applied as they happen (later actors see earlier products)."""
    order = list(range(g.n))
    rng.shuffle(order)
    events = StepEvents()
    for focal in order:
        partner = select_partner(g, focal, rng)
        k = 1 if rng.random() < 0.5 else 2
        picks = select_items(states[focal].inventory, k, rng, table)
        picks += select_items(states[partner].inventory, 3 - k, rng, table)
        product = attempt_combination(picks, table)
        new = 0
        if product is not None:
            new = diffuse(product, (focal, partner), g, states)
        events.attempts.append(Attempt(focal, partner, tuple(picks),
                                       None if product is None else product.id,
                                       new))
    return events


def _run_python(g: Graph, cfg: SimConfig, table: RecipeTable) -> SimResult:
    rng = random.Random(cfg.seed)
    states = init_population(g, table)
    limit = cfg.step_limit
    mean_traj = [] if cfg.record_trajectory else None
    max_traj = [] if cfg.record_trajectory else None
    discovery = None
    steps_run = 0
    for t in range(1, limit + 1):
        events = step(g, states, table, rng)
        steps_run = t
        if cfg.record_trajectory:
            scores = [s.score for s in states]
            mean_traj.append(sum(scores) / len(scores))
            max_traj.append(max(scores))
        if events.crossover_found(table):
            discovery = t
            break
    return SimResult(
        discovery_time=discovery,
        censored=discovery is None,
        steps_run=steps_run,
        final_scores=[s.score for s in states],
        seed=cfg.seed,
        engine="python",
        mean_scores=mean_traj,
        max_scores=max_traj,
    )


def run_simulation(g: Graph, cfg: SimConfig,
                   table: Optional[RecipeTable] = None,
                   engine: str = "compiled") -> SimResult:
    """Run to the first crossover or to the step limit (censored).

    Deterministic given (graph, seed, table, config, engine). The two
    engines implement the same model with independent random streams, so
    they agree in distribution, not run-by-run.
    """
    if table is None:
        table = default_recipe_table()
    if not g.is_connected():
        raise ValueError("graph must be connected")
    if engine == "python":
        return _run_python(g, cfg, table)
    if engine == "compiled":
        from . import _engine
        return _engine.run_compiled(g, cfg, table)
    raise ValueError(f"unknown engine {engine!r}")

"""Item universe and combination rules for the innovation game.

Two parallel trajectories (A and B) each ladder through three innovations on
top of three starting items; combining the top items of both trajectories
yields the final crossover item, which ends a simulation. The default ladder
below is a documented stand-in for the original experiment's combination
lists (which are not public): each innovation combines the two most recent
prior items of its trajectory with the previous innovation. A custom table
can be loaded from JSON, so a different ladder drops in without code changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

__all__ = ["Item", "RecipeTable", "default_recipe_table"]

TIER_SCORES = {1: 48, 2: 109, 3: 188}
CROSSOVER_SCORE = 358
INITIAL_SCORES = (6, 8, 10)


@dataclass(frozen=True)
class Item:
    id: str
    trajectory: str  # "A", "B", or "Crossover"
    tier: int
    score: int

    def __post_init__(self):
        if self.tier < 0:
            raise ValueError("tier must be >= 0")
        if self.score <= 0:
            raise ValueError("score must be positive")
        if self.trajectory not in ("A", "B", "Crossover"):
            raise ValueError(f"bad trajectory {self.trajectory!r}")


class RecipeTable:
    """Immutable lookup from unordered item triads to product items.

    Regular recipes are exact three-item sets. The crossover rule is
    containment-based: any triad of distinct items that includes every id in
    `crossover_contains` produces the crossover item. Duplicated items in a
    triad never produce anything.
    """

    def __init__(self, items: Iterable[Item],
                 recipes: Mapping[frozenset, str],
                 crossover_contains: Iterable[str],
                 crossover_product: str):
        self.items = {it.id: it for it in items}
        if len(self.items) < 3:
            raise ValueError("need at least three items")
        self.recipes = {frozenset(k): v for k, v in recipes.items()}
        self.crossover_contains = frozenset(crossover_contains)
        self.crossover_product = crossover_product
        self._validate()

    def _validate(self):
        produced = {}
        for inputs, product in self.recipes.items():
            if len(inputs) != 3:
                raise ValueError(f"recipe inputs must be 3 distinct items: {set(inputs)}")
            for iid in inputs:
                if iid not in self.items:
                    raise ValueError(f"recipe input {iid!r} is not an item")
            if product not in self.items:
                raise ValueError(f"recipe product {product!r} is not an item")
            if self.items[product].tier == 0:
                raise ValueError(f"recipe may not produce initial item {product!r}")
            if product in produced:
                raise ValueError(f"{product!r} has more than one producing recipe")
            produced[product] = inputs
        if not (1 <= len(self.crossover_contains) <= 3):
            raise ValueError("crossover rule must name 1-3 items")
        for iid in self.crossover_contains:
            if iid not in self.items:
                raise ValueError(f"crossover input {iid!r} is not an item")
        if self.crossover_product not in self.items:
            raise ValueError("crossover product is not an item")
        if self.items[self.crossover_product].tier == 0:
            raise ValueError("crossover may not produce an initial item")
        if self.crossover_product in produced:
            raise ValueError("crossover product also has a regular recipe")

    @property
    def initial_items(self) -> tuple:
        """Tier-0 item ids in a fixed order (the starting inventory)."""
        return tuple(iid for iid, it in sorted(self.items.items())
                     if it.tier == 0)

    def score(self, item_id: str) -> int:
        return self.items[item_id].score

    def lookup(self, triad: Iterable[str]) -> Optional[Item]:
        """Product of a 3-item combination, or None.

        None for duplicates, and for triads matching nothing. Order of the
        triad never matters.
        """
        ids = list(triad)
        if len(ids) != 3:
            raise ValueError("a combination has exactly 3 items")
        key = frozenset(ids)
        if len(key) != 3:
            return None  # duplicate within the dyad's picks
        product = self.recipes.get(key)
        if product is not None:
            return self.items[product]
        if self.crossover_contains <= key:
            return self.items[self.crossover_product]
        return None

    def to_json(self, path) -> None:
        doc = {
            "items": [
                {"id": it.id, "trajectory": it.trajectory,
                 "tier": it.tier, "score": it.score}
                for _, it in sorted(self.items.items())
            ],
            "recipes": [
                {"inputs": sorted(inputs), "product": product}
                for inputs, product in sorted(
                    self.recipes.items(), key=lambda kv: (kv[1], sorted(kv[0])))
            ],
            "crossover": {
                "contains": sorted(self.crossover_contains),
                "product": self.crossover_product,
                "score": self.items[self.crossover_product].score,
            },
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, source) -> "RecipeTable":
        """Load from a path or an already-parsed dict."""
        if isinstance(source, dict):
            doc = source
        else:
            with open(source) as fh:
                doc = json.load(fh)
        items = [Item(d["id"], d["trajectory"], int(d["tier"]), int(d["score"]))
                 for d in doc["items"]]
        recipes = {frozenset(d["inputs"]): d["product"] for d in doc["recipes"]}
        cross = doc["crossover"]
        table = cls(items, recipes, cross["contains"], cross["product"])
        if "score" in cross and table.items[cross["product"]].score != cross["score"]:
            raise ValueError("crossover score disagrees with its item entry")
        return table

    def __eq__(self, other):
        if not isinstance(other, RecipeTable):
            return NotImplemented
        return (self.items == other.items and self.recipes == other.recipes
                and self.crossover_contains == other.crossover_contains
                and self.crossover_product == other.crossover_product)


def default_recipe_table() -> RecipeTable:
    """The two-trajectory ladder used everywhere unless a table is supplied.

    Starting items a1,a2,a3 / b1,b2,b3 score 6/8/10. Tier k combines the two
    most recent prior items with the previous innovation:
    {a1,a2,a3}->a4(48), {a2,a3,a4}->a5(109), {a3,a4,a5}->a6(188), same for B.
    Any distinct triad containing both a6 and b6 -> xfinal(358).
    """
    items = []
    for traj, prefix in (("A", "a"), ("B", "b")):
        for i, s in enumerate(INITIAL_SCORES, start=1):
            items.append(Item(f"{prefix}{i}", traj, 0, s))
        for tier in (1, 2, 3):
            items.append(Item(f"{prefix}{tier + 3}", traj, tier,
                              TIER_SCORES[tier]))
    items.append(Item("xfinal", "Crossover", 4, CROSSOVER_SCORE))
    recipes = {}
    for prefix in ("a", "b"):
        for tier in (1, 2, 3):
            top = tier + 3
            inputs = frozenset(f"{prefix}{k}" for k in (top - 3, top - 2, top - 1))
            recipes[inputs] = f"{prefix}{top}"
    return RecipeTable(items, recipes, ("a6", "b6"), "xfinal")

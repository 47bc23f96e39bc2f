"""Branching Levy genealogies materialized breadth-first in flat arrays.

Node i has a parent index (-1 for the root), a birth time, a death time (inf
when the node is still alive at the horizon t), its rank among its siblings,
its generation, the motion increment X_{u,t} over its lifetime clipped to
[0, t], and the position at the end of that lifetime. Children always carry
larger indices than their parent.
"""
import csv
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, TextIO

import numpy as np

from ..branching import BranchingConfig
from ..errors import PopulationExplosionError
from ..levy_motion import MotionSpec, sample_increment
from ..rng import RandomStream

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParticleTree:
    t: float
    parent: np.ndarray
    birth: np.ndarray
    death: np.ndarray
    rank: np.ndarray
    generation: np.ndarray
    increment: np.ndarray
    position: np.ndarray

    @property
    def size(self) -> int:
        return int(self.parent.size)

    @property
    def alive(self) -> np.ndarray:
        return np.isinf(self.death)

    @property
    def leaves(self) -> np.ndarray:
        """Indices of the alive set L_t."""
        return np.flatnonzero(self.alive)

    @property
    def population(self) -> int:
        return int(np.count_nonzero(self.alive))

    @property
    def extinct(self) -> bool:
        return self.population == 0

    def label(self, node: int) -> str:
        """Ulam-Harris label: 'o' for the root, '1.2' for the second child of the first child."""
        ranks: List[str] = []
        while self.parent[node] >= 0:
            ranks.append(str(int(self.rank[node]) + 1))
            node = int(self.parent[node])
        return ".".join(reversed(ranks)) or "o"

    def ancestors(self, node: int) -> np.ndarray:
        """The chain I_v from the root down to ``node``, inclusive."""
        chain = [node]
        while self.parent[chain[-1]] >= 0:
            chain.append(int(self.parent[chain[-1]]))
        return np.array(chain[::-1], dtype=np.int64)

    def chain_sum(self, node: int) -> float:
        return float(np.sum(self.increment[self.ancestors(node)]))

    def levels(self) -> List[np.ndarray]:
        """Node indices grouped by generation, root first."""
        return [np.flatnonzero(self.generation == g) for g in range(int(self.generation.max()) + 1)]


def simulate_tree(cfg: BranchingConfig, motion: MotionSpec, t: float, rng: RandomStream) -> ParticleTree:
    """Exact simulation of the genealogy and the motion increments up to time t."""
    if t < 0:
        raise ValueError(f"Time must be nonnegative, got {t}")
    parents, births, deaths, ranks, generations, increments, positions = [], [], [], [], [], [], []
    frontier_parent = np.array([-1], dtype=np.int64)
    frontier_birth = np.zeros(1)
    frontier_rank = np.zeros(1, dtype=np.int64)
    frontier_start = np.zeros(1)
    offset, generation, alive_total = 0, 0, 0
    while frontier_birth.size:
        n = frontier_birth.size
        death = frontier_birth + rng.exponential(1.0 / cfg.beta, n)
        survives = death > t
        tau = np.minimum(death, t) - frontier_birth
        increment = sample_increment(motion, tau, rng)
        position = frontier_start + increment

        parents.append(frontier_parent)
        births.append(frontier_birth)
        deaths.append(np.where(survives, math.inf, death))
        ranks.append(frontier_rank)
        generations.append(np.full(n, generation, dtype=np.int64))
        increments.append(increment)
        positions.append(position)

        alive_total += int(np.count_nonzero(survives))
        splitting = np.flatnonzero(~survives)
        counts = cfg.offspring.sample(rng, splitting.size)
        total = int(counts.sum())
        if alive_total + total > cfg.population_cap:
            raise PopulationExplosionError(alive_total + total, cfg.population_cap)
        frontier_parent = np.repeat(offset + splitting, counts)
        frontier_birth = np.repeat(death[splitting], counts)
        frontier_start = np.repeat(position[splitting], counts)
        frontier_rank = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
        offset += n
        generation += 1

    return ParticleTree(
        t=float(t),
        parent=np.concatenate(parents),
        birth=np.concatenate(births),
        death=np.concatenate(deaths),
        rank=np.concatenate(ranks),
        generation=np.concatenate(generations),
        increment=np.concatenate(increments),
        position=np.concatenate(positions),
    )


def spine_leaf(tree: ParticleTree) -> Optional[int]:
    """Follow the first child from the root; the alive leaf reached, or None if that line died out."""
    first_child = np.full(tree.size, -1, dtype=np.int64)
    is_first = (tree.rank == 0) & (tree.parent >= 0)
    first_child[tree.parent[is_first]] = np.flatnonzero(is_first)
    node = 0
    while first_child[node] >= 0:
        node = int(first_child[node])
    return node if tree.alive[node] else None


def uniform_leaf(tree: ParticleTree, rng: RandomStream) -> Optional[int]:
    """Uniformly chosen alive leaf. Its position law is size-biased; diagnostic use only."""
    leaves = tree.leaves
    if leaves.size == 0:
        return None
    return int(rng.choice(leaves))


def many_to_one_count(tree: ParticleTree, s: float) -> int:
    """Number of alive leaves born no later than t - s."""
    return int(np.count_nonzero(tree.alive & (tree.birth <= tree.t - s)))


def many_to_one_mean(cfg: BranchingConfig, t: float, s: float) -> float:
    """E of many_to_one_count: particles alive at t - s whose lifetime outlasts the remaining s."""
    if not 0 <= s <= t:
        raise ValueError(f"Need 0 <= s <= t, got s={s}, t={t}")
    return math.exp(cfg.lam * (t - s) - cfg.beta * s)



def generation_profile(tree: ParticleTree) -> np.ndarray:
    """n_t^v for every alive leaf v."""
    return tree.generation[tree.alive]


def subtree_leaf_counts(tree: ParticleTree) -> np.ndarray:
    """Number of alive leaves in the subtree of every node (the node itself included)."""
    counts = tree.alive.astype(np.int64)
    for level in reversed(tree.levels()[1:]):
        np.add.at(counts, tree.parent[level], counts[level])
    return counts


def _format(x: float) -> str:
    return format(float(x), ".17g")


def dump_tree(tree: ParticleTree, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["label", "parent", "birth", "death", "increment"])
    for node in range(tree.size):
        parent = int(tree.parent[node])
        writer.writerow(
            [
                tree.label(node),
                tree.label(parent) if parent >= 0 else "",
                _format(tree.birth[node]),
                _format(tree.death[node]),
                _format(tree.increment[node]),
            ]
        )

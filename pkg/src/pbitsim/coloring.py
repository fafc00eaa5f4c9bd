"""Conflict graphs and greedy colourings that define parallel update groups.

Two variables conflict when they co-occur in any term of order >= 2: updating
them simultaneously from one snapshot would let one update read the other's
stale value inside a shared term. A colour class (group) is therefore a set
of variables whose drives can be computed and applied in parallel.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, PbitError
from .model import Clamp, EnergyModel, full_clamp_mask


@dataclass(frozen=True)
class ConflictGraph:
    num_vars: int
    neighbours: tuple[np.ndarray, ...]  # per-vertex sorted neighbour ids

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.neighbours], dtype=np.int64)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.num_vars else 0

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbours[u]
        i = np.searchsorted(nb, v)
        return i < len(nb) and nb[i] == v


@dataclass(frozen=True)
class GroupPlan:
    """Partition of the free variables into conflict-free update groups."""

    groups: tuple[np.ndarray, ...]
    num_free: int

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def avg_group_size(self) -> float:
        return self.num_free / self.num_groups if self.num_groups else 0.0

    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]


def _adjacency_from_pairs(num_vars: int, pairs: Iterable[tuple[int, int]]) -> ConflictGraph:
    adj: list[set[int]] = [set() for _ in range(num_vars)]
    for u, v in pairs:
        if u == v:
            continue
        adj[u].add(v)
        adj[v].add(u)
    neighbours = tuple(np.array(sorted(a), dtype=np.int32) for a in adj)
    return ConflictGraph(num_vars, neighbours)


def build_conflict_graph(model: EnergyModel, clamp: np.ndarray | None = None) -> ConflictGraph:
    """Conflict graph of an energy model, ignoring clamped variables.

    Clamped variables are isolated: they never join a group, and pairs they
    form with free variables impose no constraint (their value is frozen).
    """
    if clamp is None:
        clamp = full_clamp_mask(model.num_vars)
    clamp = np.asarray(clamp, dtype=np.int8)
    if clamp.shape != (model.num_vars,):
        raise DimensionError("clamp mask length does not match model")
    free = clamp == Clamp.FREE

    def pairs():
        for tup, _ in model.terms:
            if len(tup) < 2:
                continue
            fv = [v for v in tup if free[v]]
            for i in range(len(fv)):
                for j in range(i + 1, len(fv)):
                    yield fv[i], fv[j]

    return _adjacency_from_pairs(model.num_vars, pairs())


def conflict_graph_from_cliques(num_vars: int, cliques: Iterable[Sequence[int]]) -> ConflictGraph:
    """Conflict graph of a hypergraph: every hyperedge becomes a clique.

    Equivalent to build_conflict_graph on the expanded hitting-set model
    (the top-order term of each edge already spans the whole edge), but
    avoids the exponential term expansion for large edges.
    """

    def pairs():
        for cl in cliques:
            cl = sorted(set(cl))
            for i in range(len(cl)):
                for j in range(i + 1, len(cl)):
                    yield cl[i], cl[j]

    return _adjacency_from_pairs(num_vars, pairs())


def greedy_colour(g: ConflictGraph, clamp: np.ndarray | None = None) -> GroupPlan:
    """Deterministic greedy colouring: vertices in descending-degree order
    (ties broken by ascending index), each taking the smallest colour not
    used by a neighbour. Uses at most max_degree + 1 colours."""
    if clamp is None:
        clamp = full_clamp_mask(g.num_vars)
    clamp = np.asarray(clamp, dtype=np.int8)
    free = clamp == Clamp.FREE
    degrees = g.degrees
    order = sorted(np.flatnonzero(free), key=lambda v: (-degrees[v], v))
    colour = np.full(g.num_vars, -1, dtype=np.int64)
    for v in order:
        taken = {colour[w] for w in g.neighbours[v] if colour[w] >= 0}
        c = 0
        while c in taken:
            c += 1
        colour[v] = c
    n_colours = int(colour.max()) + 1 if order else 0
    groups = tuple(
        np.flatnonzero(colour == c).astype(np.int32) for c in range(n_colours)
    )
    return GroupPlan(groups=groups, num_free=int(free.sum()))


def plan_for(model: EnergyModel, clamp: np.ndarray | None = None) -> GroupPlan:
    """Convenience: conflict graph + greedy colouring in one call."""
    return greedy_colour(build_conflict_graph(model, clamp), clamp)


def verify_plan(g: ConflictGraph, plan: GroupPlan) -> None:
    """Raise if any group contains a conflicting pair (exhaustive check)."""
    seen: set[int] = set()
    for gi, grp in enumerate(plan.groups):
        for a in range(len(grp)):
            u = int(grp[a])
            if u in seen:
                raise PbitError(f"variable {u} appears in more than one group")
            seen.add(u)
            for b in range(a + 1, len(grp)):
                if g.has_edge(u, int(grp[b])):
                    raise PbitError(f"group {gi} contains conflicting pair ({u}, {int(grp[b])})")
    if len(seen) != plan.num_free:
        raise PbitError("groups do not partition the free variables")


def chromatic_estimate(n: int, p: float) -> float:
    """Asymptotic chromatic number of a dense random graph G(n, p):
    n * ln(1/(1-p)) / (2 ln n)."""
    if not 0.0 < p < 1.0:
        raise DimensionError("edge probability must lie strictly between 0 and 1")
    if n < 2:
        raise DimensionError("need n >= 2")
    return n * math.log(1.0 / (1.0 - p)) / (2.0 * math.log(n))


def group_count_sweep(
    num_vars: int,
    k_range: Sequence[int],
    m_range: Sequence[int],
    samples: int,
    seed: int,
) -> list[dict]:
    """Mean/std group counts of random k-uniform hypergraphs on a (k, m) grid.

    Each sample draws m distinct k-subsets of the vertex set, builds the
    clique conflict graph and greedy-colours it. Rows are dicts with keys
    k, m, mean_groups, std_groups.
    """
    from .hitting_set import gen_hypergraph  # deferred: avoids import cycle

    if not len(k_range) or not len(m_range):
        raise DimensionError("k_range and m_range must be non-empty")
    root = np.random.SeedSequence(seed)
    rows = []
    for k in k_range:
        for m in m_range:
            counts = []
            for child in root.spawn(samples):
                h = gen_hypergraph(num_vars, m, k, rng=np.random.default_rng(child))
                g = conflict_graph_from_cliques(num_vars, h.edges)
                counts.append(greedy_colour(g).num_groups)
            counts = np.asarray(counts, dtype=np.float64)
            rows.append(
                {
                    "k": k,
                    "m": m,
                    "mean_groups": float(counts.mean()),
                    "std_groups": float(counts.std()),
                }
            )
    return rows


def sweep_to_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["k", "m", "mean_groups", "std_groups"])
        writer.writeheader()
        writer.writerows(rows)

"""Order reduction and connectivity reduction.

quadratise: rewrite every term of order > 2 by iterated pairwise
substitution y = s_a * s_b, enforced with the penalty
strength * (s_a s_b - 2(s_a + s_b) y + 3 y), which is 0 exactly when y is
the product and at least `strength` otherwise. Substituted pairs are shared
globally, so a single order-k term costs k-2 auxiliaries.

sparsify: replace each node of degree d > k by a ferromagnetic chain of
ceil((d-2)/(k-2)) copies; interior copies keep 2 slots for chain links,
endpoints 1, so every physical node respects the neighbour budget k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EncodingError, InfeasibleError
from .model import EnergyModel
from .spinglass import IsingInstance


@dataclass(frozen=True)
class QuadratisationResult:
    model: EnergyModel  # max_order <= 2
    num_original_vars: int
    aux_pairs: dict[int, tuple[int, int]]  # aux id -> the pair it replaces
    strengths: dict[int, float]  # aux id -> penalty strength used

    @property
    def aux_count(self) -> int:
        return len(self.aux_pairs)

    def project(self, state) -> np.ndarray:
        """Drop the auxiliary block, keeping the original variables."""
        return np.asarray(state)[: self.num_original_vars]

    def lift(self, state) -> np.ndarray:
        """Extend an original-variable state with consistent auxiliaries."""
        s = list(np.asarray(state, dtype=np.uint8))
        for aux in sorted(self.aux_pairs):
            a, b = self.aux_pairs[aux]
            s.append(s[a] & s[b])
        return np.asarray(s, dtype=np.uint8)


def rosenberg_penalty(a: int, b: int, y: int) -> int:
    """a*b - 2(a+b)y + 3y for bits; 0 iff y == a*b, else >= 1."""
    return a * b - 2 * (a + b) * y + 3 * y


def quadratise(model: EnergyModel, strength: float | None = None) -> QuadratisationResult:
    """Reduce to order <= 2. With strength=None each auxiliary gets
    1 + 2 * sum |coeff| over the terms whose reduction chain uses it, which
    is enough for minima of the quadratic model to project onto minima of
    the original."""
    if strength is not None and strength <= 0:
        raise EncodingError("penalty strength must be positive")
    next_var = model.num_vars
    pair_to_aux: dict[tuple[int, int], int] = {}
    aux_pairs: dict[int, tuple[int, int]] = {}
    touching: dict[int, float] = {}
    out_terms: list[tuple[float, tuple[int, ...]]] = []

    for tup, coeff in model.terms:
        if len(tup) <= 2:
            out_terms.append((coeff, tup))
            continue
        current = tup[0]
        for nxt in tup[1:-1]:
            pair = (min(current, nxt), max(current, nxt))
            aux = pair_to_aux.get(pair)
            if aux is None:
                aux = next_var
                next_var += 1
                pair_to_aux[pair] = aux
                aux_pairs[aux] = pair
                touching[aux] = 0.0
            touching[aux] += abs(coeff)
            current = aux
        out_terms.append((coeff, tuple(sorted((current, tup[-1])))))

    strengths: dict[int, float] = {}
    for aux, (a, b) in aux_pairs.items():
        s = strength if strength is not None else 1.0 + 2.0 * touching[aux]
        strengths[aux] = s
        out_terms.append((s, tuple(sorted((a, b)))))
        out_terms.append((-2.0 * s, tuple(sorted((a, aux)))))
        out_terms.append((-2.0 * s, tuple(sorted((b, aux)))))
        out_terms.append((3.0 * s, (aux,)))

    return QuadratisationResult(
        model=EnergyModel(next_var, out_terms),
        num_original_vars=model.num_vars,
        aux_pairs=aux_pairs,
        strengths=strengths,
    )


# -- copy-node sparsification ------------------------------------------------


@dataclass(frozen=True)
class SparsifiedGraph:
    num_nodes: int
    edges: tuple[tuple[int, int, float], ...]  # original couplings, re-homed
    chain_edges: tuple[tuple[int, int], ...]  # ferromagnetic copy links
    chains: dict[int, tuple[int, ...]]  # logical node -> its physical copies
    ferro_strength: float
    budget: int

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        for u, v in self.chain_edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def as_ising(self) -> IsingInstance:
        couplings: dict[tuple[int, int], float] = {}
        for u, v, w in self.edges:
            key = (min(u, v), max(u, v))
            couplings[key] = couplings.get(key, 0.0) + w
        for u, v in self.chain_edges:
            key = (min(u, v), max(u, v))
            couplings[key] = couplings.get(key, 0.0) + self.ferro_strength
        return IsingInstance(self.num_nodes, couplings)

    def logical_state(self, sigma) -> np.ndarray | None:
        """Project a physical spin vector; None when some chain disagrees."""
        sigma = np.asarray(sigma)
        out = np.empty(len(self.chains), dtype=sigma.dtype)
        for logical, copies in self.chains.items():
            vals = sigma[list(copies)]
            if not (vals == vals[0]).all():
                return None
            out[logical] = vals[0]
        return out


def _chain_length(degree: int, budget: int) -> int:
    if degree <= budget:
        return 1
    return math.ceil((degree - 2) / (budget - 2))


def sparsify(
    num_nodes: int,
    edges,
    budget: int,
    ferro_strength: float | None = None,
) -> SparsifiedGraph:
    """Limit every physical degree to `budget` by splitting hot nodes into
    copy chains. Original edges are dealt to chain slots in edge order,
    cycling over copies with free capacity."""
    if budget < 3:
        raise InfeasibleError("chains need a neighbour budget of at least 3")
    edges = [(int(u), int(v), float(w)) for u, v, w in edges]
    for u, v, _ in edges:
        if not (0 <= u < num_nodes and 0 <= v < num_nodes) or u == v:
            raise DimensionError(f"bad edge ({u}, {v})")
    if ferro_strength is None:
        wmax = max((abs(w) for _, _, w in edges), default=1.0)
        ferro_strength = 2.0 * wmax * (budget - 1)

    degree = np.zeros(num_nodes, dtype=np.int64)
    for u, v, _ in edges:
        degree[u] += 1
        degree[v] += 1

    chains: dict[int, tuple[int, ...]] = {}
    capacity: dict[int, list[int]] = {}  # logical -> per-copy free slots
    next_id = 0
    chain_edges: list[tuple[int, int]] = []
    for node in range(num_nodes):
        c = _chain_length(int(degree[node]), budget)
        ids = tuple(range(next_id, next_id + c))
        next_id += c
        chains[node] = ids
        if c == 1:
            capacity[node] = [budget]
        else:
            caps = [budget - 2] * c
            caps[0] = budget - 1
            caps[-1] = budget - 1
            capacity[node] = caps
        chain_edges.extend((ids[i], ids[i + 1]) for i in range(c - 1))

    cursor = {node: 0 for node in range(num_nodes)}

    def next_slot(node: int) -> int:
        caps = capacity[node]
        for _ in range(len(caps)):
            i = cursor[node]
            cursor[node] = (i + 1) % len(caps)
            if caps[i] > 0:
                caps[i] -= 1
                return chains[node][i]
        raise InfeasibleError(f"chain capacity exhausted for node {node}")  # unreachable

    new_edges = [(next_slot(u), next_slot(v), w) for u, v, w in edges]
    return SparsifiedGraph(
        num_nodes=next_id,
        edges=tuple(new_edges),
        chain_edges=tuple(chain_edges),
        chains=chains,
        ferro_strength=float(ferro_strength),
        budget=budget,
    )


def sparsify_ising(inst: IsingInstance, budget: int, ferro_strength: float | None = None) -> SparsifiedGraph:
    edges = [(i, j, w) for (i, j), w in sorted(inst.couplings.items())]
    return sparsify(inst.num_spins, edges, budget, ferro_strength)


@dataclass(frozen=True)
class GrowthMetrics:
    r_N: float  # vertex growth |V(G_S)| / |V(G)|
    r_S: float  # max-degree reduction max_deg(G) / max_deg(G_S)
    density_orig: float
    density_new: float


def graph_density(num_vertices: int, num_edges: int) -> float:
    """Directed-pair normalisation: 2|E| / (V(V-1)); an Erdős–Rényi graph
    with edge probability p has expected density p."""
    if num_vertices < 2:
        return 0.0
    return 2.0 * num_edges / (num_vertices * (num_vertices - 1))


def _max_degree(num_vertices: int, edges) -> int:
    deg = np.zeros(num_vertices, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return int(deg.max()) if num_vertices else 0


def growth_metrics(
    orig_num_vertices: int,
    orig_edges,
    new_num_vertices: int,
    new_edges,
) -> GrowthMetrics:
    orig_pairs = [(u, v) for u, v, *_ in orig_edges]
    new_pairs = [(u, v) for u, v, *_ in new_edges]
    d_orig = _max_degree(orig_num_vertices, orig_pairs)
    d_new = _max_degree(new_num_vertices, new_pairs)
    return GrowthMetrics(
        r_N=new_num_vertices / orig_num_vertices,
        r_S=d_orig / d_new if d_new else 1.0,
        density_orig=graph_density(orig_num_vertices, len(orig_pairs)),
        density_new=graph_density(new_num_vertices, len(new_pairs)),
    )


def metrics_for_sparsification(inst_num_nodes: int, edges, sg: SparsifiedGraph) -> GrowthMetrics:
    all_new = [(u, v) for u, v, _ in sg.edges] + list(sg.chain_edges)
    return growth_metrics(inst_num_nodes, edges, sg.num_nodes, all_new)

"""Random hypergraphs and the hitting-set energy encoding.

The energy of a choice s in {0,1}^N over a hypergraph with edge set R is

    E(s) = A * sum_{r in R} prod_{v in r} (1 - s_v)  +  B * sum_v s_v,

with A > B > 0 so every ground state is a minimum-size hitting set: each
uncovered edge costs A, each chosen vertex costs B. Expanding the products
makes this a polynomial whose order equals the hypergraph dimension.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DimensionError, EncodingError, InfeasibleError, PbitError
from .model import EnergyModel, all_state_energies

MAX_EXPANSION_ORDER = 16  # 2^k terms per edge; refuse runaway expansions


@dataclass(frozen=True)
class Hypergraph:
    num_vertices: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for e in self.edges:
            if not e:
                raise DimensionError("empty hyperedge")
            if e[0] < 0 or e[-1] >= self.num_vertices or list(e) != sorted(set(e)):
                raise DimensionError(f"bad hyperedge {e!r}")

    @property
    def dimension(self) -> int:
        return max((len(e) for e in self.edges), default=0)

    def edges_containing(self, v: int) -> list[tuple[int, ...]]:
        return [e for e in self.edges if v in e]


@dataclass(frozen=True)
class HittingSetSolution:
    chosen: frozenset[int]
    valid: bool

    @property
    def size(self) -> int:
        return len(self.chosen)


def gen_hypergraph(
    num_vertices: int,
    num_edges: int,
    k: int,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
) -> Hypergraph:
    """m distinct k-uniform edges, each a uniform sample of k vertices.

    An edge identical to one already drawn is resampled; isolated vertices
    are allowed.
    """
    if k > num_vertices:
        raise InfeasibleError(f"edge size {k} exceeds {num_vertices} vertices")
    if k < 1 or num_edges < 0:
        raise InfeasibleError("need k >= 1 and m >= 0")
    if num_edges > comb(num_vertices, k):
        raise InfeasibleError(f"cannot draw {num_edges} distinct edges of size {k}")
    if rng is None:
        rng = np.random.default_rng(seed)
    edges: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    while len(edges) < num_edges:
        e = tuple(sorted(rng.choice(num_vertices, size=k, replace=False).tolist()))
        if e not in seen:
            seen.add(e)
            edges.append(e)
    return Hypergraph(num_vertices, tuple(edges))


def encode_hitting_set(h: Hypergraph, A: float = 13.0, B: float = 9.0) -> EnergyModel:
    """Expand the penalty products into multilinear terms.

    prod_{v in r}(1 - s_v) = sum over subsets T of r of (-1)^|T| prod s_v.
    """
    if not A > B > 0:
        raise EncodingError(f"need A > B > 0 for valid covers; got A={A}, B={B}")
    if h.dimension > MAX_EXPANSION_ORDER:
        raise EncodingError(
            f"dimension {h.dimension} would expand to 2^{h.dimension} terms per edge"
        )
    terms: list[tuple[float, tuple[int, ...]]] = []
    for r in h.edges:
        for size in range(len(r) + 1):
            sign = -1.0 if size % 2 else 1.0
            for sub in itertools.combinations(r, size):
                terms.append((sign * A, sub))
    for v in range(h.num_vertices):
        terms.append((B, (v,)))
    return EnergyModel(h.num_vertices, terms)


def hs_update_drive(h: Hypergraph, A: float, B: float, s, vertex: int) -> float:
    """Analytic drive A * sum over edges containing the vertex of
    prod_{v != vertex}(1 - s_v), minus B; products abort on a zero factor."""
    if not 0 <= vertex < h.num_vertices:
        raise DimensionError(f"vertex {vertex} out of range")
    s = np.asarray(s)
    total = 0.0
    for r in h.edges:
        if vertex not in r:
            continue
        prod = 1.0
        for v in r:
            if v == vertex:
                continue
            if s[v]:
                prod = 0.0
                break
        total += prod
    return A * total - B


def greedy_reference(h: Hypergraph) -> HittingSetSolution:
    """Pick the vertex covering the most uncovered edges until all are hit;
    ties go to the lowest index. Always returns a valid cover."""
    uncovered = set(range(len(h.edges)))
    cover_count = np.zeros(h.num_vertices, dtype=np.int64)
    incident: list[list[int]] = [[] for _ in range(h.num_vertices)]
    for i, e in enumerate(h.edges):
        for v in e:
            incident[v].append(i)
            cover_count[v] += 1
    chosen = set()
    while uncovered:
        v = int(np.argmax(cover_count))  # argmax takes the first (lowest) index
        if cover_count[v] == 0:
            raise PbitError("uncoverable edges remain")  # unreachable: edges are non-empty
        chosen.add(v)
        for i in list(incident[v]):
            if i in uncovered:
                uncovered.discard(i)
                for w in h.edges[i]:
                    cover_count[w] -= 1
    return HittingSetSolution(frozenset(chosen), True)


def solution_from_state(h: Hypergraph, state) -> HittingSetSolution:
    chosen = frozenset(int(v) for v in np.flatnonzero(np.asarray(state)))
    return HittingSetSolution(chosen, is_valid_cover(h, chosen))


def is_valid_cover(h: Hypergraph, chosen) -> bool:
    chosen = set(chosen)
    return all(any(v in chosen for v in e) for e in h.edges)


def hs_quality(found: HittingSetSolution, ref: HittingSetSolution) -> float:
    """Size ratio found/reference; < 1 is possible against a heuristic
    reference."""
    if not (found.valid and ref.valid):
        raise PbitError("quality is only defined for valid covers")
    if ref.size == 0:
        return 1.0 if found.size == 0 else float("inf")
    return found.size / ref.size


def brute_force_min_cover(h: Hypergraph, limit: int = 20) -> HittingSetSolution:
    """Exact minimum hitting set by enumeration over 2^N subsets."""
    n = h.num_vertices
    if n > limit:
        raise DimensionError(f"brute force limited to N <= {limit}")
    idx = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(1 << n, dtype=bool)
    for e in h.edges:
        mask = 0
        for v in e:
            mask |= 1 << v
        ok &= (idx & mask) != 0
    sizes = np.bitwise_count(idx)
    sizes = np.where(ok, sizes, n + 1)
    best = int(np.argmin(sizes))
    chosen = frozenset(v for v in range(n) if best >> v & 1)
    return HittingSetSolution(chosen, True)


def model_ground_states(h: Hypergraph, A: float, B: float, limit: int = 20):
    """All minimum-energy states of the encoded model (enumeration oracle)."""
    model = encode_hitting_set(h, A, B)
    if model.num_vars > limit:
        raise DimensionError(f"enumeration limited to N <= {limit}")
    energies = all_state_energies(model)
    emin = energies.min()
    states = np.flatnonzero(energies == emin)
    return float(emin), [
        frozenset(v for v in range(h.num_vertices) if i >> v & 1) for i in states
    ]


# -- hypergraph file format: first line "N m", then one edge per line -------


def save_hypergraph(h: Hypergraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{h.num_vertices} {len(h.edges)}\n")
        for e in h.edges:
            fh.write(" ".join(map(str, e)) + "\n")


def load_hypergraph(path) -> Hypergraph:
    from .errors import FileFormatError

    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise FileFormatError(f"{path}: expected header 'N m'")
        n, m = int(header[0]), int(header[1])
        edges = []
        for line in fh:
            fields = line.split()
            if fields:
                edges.append(tuple(sorted(int(f) for f in fields)))
    if len(edges) != m:
        raise FileFormatError(f"{path}: header promises {m} edges, found {len(edges)}")
    return Hypergraph(n, tuple(edges))

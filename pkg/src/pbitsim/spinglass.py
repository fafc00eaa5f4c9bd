"""Erdős–Rényi spin glasses: generation, bipolar/binary mapping, baselines.

The bipolar Hamiltonian  H = -sum_{i<j} J_ij σ_i σ_j - sum_i h_i σ_i  with
σ in {-1,+1} maps onto binary variables via σ = 2s - 1:

    Q_ij = -4 J_ij,   b_i = 2 sum_{j != i} J_ij - 2 h_i,
    C    = -sum_{i<j} J_ij + sum_i h_i,

so binary energies equal bipolar energies state for state (exactly, in
integer arithmetic for ±1 couplings).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coloring import plan_for
from .errors import CapacityError, DimensionError, FileFormatError
from .model import EnergyModel, all_state_energies
from .solve import PtConfig, run_pt


@dataclass(frozen=True)
class IsingInstance:
    num_spins: int
    couplings: dict[tuple[int, int], float]  # keys (i, j) with i < j
    fields: np.ndarray = None

    def __post_init__(self):
        if self.fields is None:
            object.__setattr__(self, "fields", np.zeros(self.num_spins))
        for (i, j) in self.couplings:
            if not (0 <= i < j < self.num_spins):
                raise DimensionError(f"coupling key ({i}, {j}) is not upper-triangular in range")
        if len(self.fields) != self.num_spins:
            raise DimensionError("fields length != num_spins")

    @property
    def num_edges(self) -> int:
        return len(self.couplings)


@dataclass(frozen=True)
class ErSpec:
    num_spins: int
    edge_prob: float
    # couplings are drawn uniformly from {-1, +1}

    def __post_init__(self):
        if not 0.0 <= self.edge_prob <= 1.0:
            raise DimensionError("edge probability must be in [0, 1]")


def gen_er(spec: ErSpec, seed: int | None = None, rng: np.random.Generator | None = None) -> IsingInstance:
    """Each unordered pair appears independently with probability p; present
    edges carry J = ±1 equiprobably; fields are zero."""
    if rng is None:
        rng = np.random.default_rng(seed)
    n = spec.num_spins
    iu, ju = np.triu_indices(n, k=1)
    present = rng.random(len(iu)) < spec.edge_prob
    signs = np.where(rng.random(len(iu)) < 0.5, 1.0, -1.0)
    couplings = {
        (int(i), int(j)): float(s)
        for i, j, keep, s in zip(iu, ju, present, signs)
        if keep
    }
    return IsingInstance(n, couplings)


def ising_energy(inst: IsingInstance, sigma) -> float:
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (inst.num_spins,):
        raise DimensionError("spin vector length mismatch")
    e = -float(np.dot(inst.fields, sigma))
    for (i, j), J in inst.couplings.items():
        e -= J * sigma[i] * sigma[j]
    return e


def ising_to_qubo(inst: IsingInstance) -> EnergyModel:
    """Binary model whose energies equal the bipolar energies exactly
    (constant offset included)."""
    terms: list[tuple[float, tuple[int, ...]]] = []
    row_sum = np.zeros(inst.num_spins)
    for (i, j), J in inst.couplings.items():
        terms.append((-4.0 * J, (i, j)))
        row_sum[i] += J
        row_sum[j] += J
    for i in range(inst.num_spins):
        b = 2.0 * row_sum[i] - 2.0 * inst.fields[i]
        if b:
            terms.append((b, (i,)))
    const = -sum(inst.couplings.values()) + float(inst.fields.sum())
    if const:
        terms.append((const, ()))
    return EnergyModel(inst.num_spins, terms)


def sg_update_drive(model: EnergyModel, s, k: int) -> float:
    """-(sum_j Q_kj s_j + b_k) read off the quadratic model's incident terms."""
    if not 0 <= k < model.num_vars:
        raise DimensionError(f"index {k} out of range")
    s = np.asarray(s)
    acc = 0.0
    for t in model.terms_containing(k):
        tup, coeff = model.terms[t]
        if len(tup) == 1:
            acc += coeff  # b_k
        elif len(tup) == 2:
            other = tup[0] if tup[1] == k else tup[1]
            if s[other]:
                acc += coeff
        else:
            raise DimensionError("sg_update_drive needs a quadratic model")
    return -acc


def spins_to_bits(sigma) -> np.ndarray:
    return ((np.asarray(sigma) + 1) // 2).astype(np.uint8)


def bits_to_spins(s) -> np.ndarray:
    return (2 * np.asarray(s, dtype=np.int64) - 1).astype(np.int8)


def brute_force_ground(inst: IsingInstance, limit: int = 24) -> tuple[float, np.ndarray]:
    """Exact minimum bipolar energy and one minimising spin vector."""
    if inst.num_spins > limit:
        raise CapacityError(f"brute force limited to N <= {limit}")
    energies = all_state_energies(ising_to_qubo(inst))
    i = int(np.argmin(energies))
    bits = np.array([(i >> v) & 1 for v in range(inst.num_spins)], dtype=np.uint8)
    return float(energies[i]), bits_to_spins(bits)


# Long-PT baseline settings, keyed by the largest size they apply to:
# (beta range, swap interval, replicas, iterations, repeats)
BASELINE_SETTINGS = (
    (500, (1.0, 5.0, 10, 10, 3000, 20)),
    (1024, (0.3, 10.0, 10, 20, 3000, 20)),
)


def baseline_config(n: int, seed: int = 0) -> PtConfig:
    for upper, (b0, b1, swap, repls, iters, reps) in BASELINE_SETTINGS:
        if n <= upper:
            return PtConfig(
                beta_start=b0, beta_end=b1, replicas=repls, iters=iters,
                swap_interval=swap, repeats=reps, seed=seed,
            )
    b0, b1, swap, repls, iters, reps = BASELINE_SETTINGS[-1][1]
    return PtConfig(
        beta_start=b0, beta_end=b1, replicas=repls, iters=iters,
        swap_interval=swap, repeats=reps, seed=seed,
    )


@dataclass(frozen=True)
class ReferenceEnergy:
    energy: float
    provenance: str  # "brute-force" | "long-pt"


def pt_baseline(
    inst: IsingInstance,
    cfg: PtConfig | None = None,
    seed: int = 0,
    threads: int = 1,
    brute_force_limit: int = 24,
) -> ReferenceEnergy:
    """Reference ground-state energy: exact enumeration when feasible, else a
    long parallel-tempering run. The provenance travels with the value."""
    if inst.num_spins <= brute_force_limit:
        e, _ = brute_force_ground(inst)
        return ReferenceEnergy(e, "brute-force")
    model = ising_to_qubo(inst)
    plan = plan_for(model)
    if cfg is None:
        cfg = baseline_config(inst.num_spins, seed)
    res = run_pt(model, plan, cfg, threads=threads)
    return ReferenceEnergy(res.best_energy, "long-pt")


# -- instance files: header "N", couplings "i j J", fields "field i h" ------


def save_instance(inst: IsingInstance, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{inst.num_spins}\n")
        for (i, j), J in sorted(inst.couplings.items()):
            fh.write(f"{i} {j} {J!r}\n")
        for i, h in enumerate(inst.fields):
            if h:
                fh.write(f"field {i} {float(h)!r}\n")


def load_instance(path) -> IsingInstance:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 1:
            raise FileFormatError(f"{path}: expected a single-integer 'N' header")
        n = int(header[0])
        couplings = {}
        fields = np.zeros(n)
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "field":
                fields[int(parts[1])] = float(parts[2])
            elif len(parts) == 3:
                i, j = sorted((int(parts[0]), int(parts[1])))
                couplings[(i, j)] = float(parts[2])
            else:
                raise FileFormatError(f"{path}:{lineno}: unparseable line {line!r}")
    return IsingInstance(n, couplings, fields)

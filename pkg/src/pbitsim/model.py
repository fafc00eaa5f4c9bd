"""Sparse multilinear binary energy models and the p-bit update rule.

An energy function is a polynomial over variables s_v in {0, 1},

    E(s) = sum_t  c_t * prod_{v in t} s_v,

stored as a sorted list of (coefficient, variable-tuple) terms. The empty
tuple holds the constant offset. Sign conventions live in the coefficients;
the encoders bake in whatever minus signs their formulation needs.
"""

from __future__ import annotations

import math
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, DimensionError, FileFormatError

EXACT_ENUM_LIMIT = 24  # hard cap for 2^N enumeration routines


class Clamp(IntEnum):
    FREE = -1
    ZERO = 0
    ONE = 1


class EnergyModel:
    """Immutable container for a multilinear binary energy function.

    Duplicate variable tuples are merged at construction; tuples are kept
    strictly increasing and the term list is sorted, so equal polynomials
    have equal representations.
    """

    __slots__ = ("num_vars", "terms", "max_order", "_flat", "_var_index")

    def __init__(self, num_vars: int, terms: Iterable[tuple[float, Sequence[int]]]):
        if num_vars < 0:
            raise DimensionError("num_vars must be non-negative")
        merged: dict[tuple[int, ...], float] = {}
        for coeff, vs in terms:
            tup = tuple(vs)
            if any(b <= a for a, b in zip(tup, tup[1:])):
                tup = tuple(sorted(set(tup)))
                if len(tup) != len(vs):
                    raise DimensionError(f"repeated variable in term {vs!r}")
            if tup and (tup[0] < 0 or tup[-1] >= num_vars):
                raise DimensionError(f"term {tup!r} references variable outside 0..{num_vars - 1}")
            merged[tup] = merged.get(tup, 0.0) + float(coeff)
        object.__setattr__(self, "num_vars", int(num_vars))
        object.__setattr__(self, "terms", tuple(sorted(merged.items())))
        object.__setattr__(self, "max_order", max((len(t) for t, _ in self.terms), default=0))
        object.__setattr__(self, "_flat", None)
        object.__setattr__(self, "_var_index", None)

    def __setattr__(self, name, value):
        raise AttributeError("EnergyModel is immutable")

    def __repr__(self):
        return f"EnergyModel(num_vars={self.num_vars}, n_terms={len(self.terms)}, max_order={self.max_order})"

    def __eq__(self, other):
        return (
            isinstance(other, EnergyModel)
            and self.num_vars == other.num_vars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.num_vars, self.terms))

    @property
    def constant(self) -> float:
        return self.terms[0][1] if self.terms and self.terms[0][0] == () else 0.0

    def flat_arrays(self):
        """CSR-style views consumed by the sampling kernels.

        Returns (coeffs, t_off, t_vars, v_off, v_terms): term coefficients,
        term->variable segments, and the per-variable incidence index
        (variable -> ids of terms containing it).
        """
        if self._flat is None:
            n_terms = len(self.terms)
            coeffs = np.empty(n_terms, dtype=np.float64)
            t_off = np.zeros(n_terms + 1, dtype=np.int64)
            chunks = []
            incidence: list[list[int]] = [[] for _ in range(self.num_vars)]
            for i, (tup, c) in enumerate(self.terms):
                coeffs[i] = c
                t_off[i + 1] = t_off[i] + len(tup)
                chunks.extend(tup)
                for v in tup:
                    incidence[v].append(i)
            t_vars = np.asarray(chunks, dtype=np.int32)
            v_off = np.zeros(self.num_vars + 1, dtype=np.int64)
            v_chunks = []
            for v, ids in enumerate(incidence):
                v_off[v + 1] = v_off[v] + len(ids)
                v_chunks.extend(ids)
            v_terms = np.asarray(v_chunks, dtype=np.int32)
            for a in (coeffs, t_off, t_vars, v_off, v_terms):
                a.flags.writeable = False
            object.__setattr__(self, "_flat", (coeffs, t_off, t_vars, v_off, v_terms))
        return self._flat

    def terms_containing(self, v: int) -> list[int]:
        """Ids (into self.terms) of terms containing variable v."""
        if not 0 <= v < self.num_vars:
            raise DimensionError(f"variable {v} outside 0..{self.num_vars - 1}")
        if self._var_index is None:
            idx: list[list[int]] = [[] for _ in range(self.num_vars)]
            for i, (tup, _) in enumerate(self.terms):
                for w in tup:
                    idx[w].append(i)
            object.__setattr__(self, "_var_index", idx)
        return self._var_index[v]


def as_state(model: EnergyModel, bits: Sequence[int]) -> np.ndarray:
    """Validate and convert a bit sequence into the canonical state array."""
    s = np.asarray(bits, dtype=np.uint8)
    if s.ndim != 1 or s.shape[0] != model.num_vars:
        raise DimensionError(f"state length {s.shape} does not match num_vars={model.num_vars}")
    if s.size and s.max() > 1:
        raise DimensionError("state entries must be 0 or 1")
    return s


def full_clamp_mask(num_vars: int) -> np.ndarray:
    """All-free clamp mask."""
    return np.full(num_vars, Clamp.FREE, dtype=np.int8)


def free_variables(clamp: np.ndarray) -> np.ndarray:
    return np.flatnonzero(clamp == Clamp.FREE).astype(np.int32)


def eval_energy(model: EnergyModel, s: Sequence[int]) -> float:
    """Exact energy of a state: sum of coeff * prod of the term's bits."""
    state = as_state(model, s)
    coeffs, t_off, t_vars, _, _ = model.flat_arrays()
    if len(coeffs) == 0:
        return 0.0
    total = 0.0
    lengths = np.diff(t_off)
    nonconst = lengths > 0
    if nonconst.any():
        sf = state.astype(np.float64)
        starts = t_off[:-1][nonconst]
        prods = np.multiply.reduceat(sf[t_vars], starts)
        total += float(np.dot(coeffs[nonconst], prods))
    const = ~nonconst
    if const.any():
        total += float(coeffs[const].sum())
    return total


def update_drive(model: EnergyModel, s: Sequence[int], k: int) -> float:
    """E(s | s_k = 0) - E(s | s_k = 1), from incident terms only.

    Each term containing k contributes -coeff * prod_{v in term, v != k} s_v;
    the product aborts on the first zero factor.
    """
    state = as_state(model, s)
    drive = 0.0
    for t in model.terms_containing(k):
        tup, coeff = model.terms[t]
        prod = coeff
        for v in tup:
            if v == k:
                continue
            if state[v] == 0:
                prod = 0.0
                break
        drive -= prod
    return drive


def pbit_update(drive: float, beta: float, u: float) -> int:
    """Gibbs-exact stochastic binary update.

    Returns 1 iff u < sigmoid(beta * drive), so P(s=1) = sigma(beta*I)
    reproduces the Boltzmann conditional for a binary variable.
    """
    if beta < 0:
        raise DimensionError("beta must be non-negative")
    return 1 if u < sigmoid(beta * drive) else 0


def sigmoid(x: float) -> float:
    # math.exp overflows for x < -709; clamp to the saturated value instead.
    if x < -709.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-x))


def all_state_energies(model: EnergyModel, limit: int = EXACT_ENUM_LIMIT) -> np.ndarray:
    """Energies of all 2^N states; index bit v holds s_v.

    Enumeration oracle used by the exact-Boltzmann table and brute-force
    minimisers; guarded by `limit`.
    """
    n = model.num_vars
    if n > limit:
        raise CapacityError(f"exact enumeration needs N <= {limit}, got {n}")
    idx = np.arange(1 << n, dtype=np.int64)
    energies = np.zeros(1 << n, dtype=np.float64)
    for tup, coeff in model.terms:
        if not tup:
            energies += coeff
            continue
        mask = 0
        for v in tup:
            mask |= 1 << v
        energies[(idx & mask) == mask] += coeff
    return energies


def exact_boltzmann(model: EnergyModel, beta: float) -> np.ndarray:
    """Boltzmann probabilities p(s) = exp(-beta E(s)) / Z over all 2^N states."""
    energies = all_state_energies(model)
    logw = -beta * energies
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def state_index(s: Sequence[int]) -> int:
    """Pack a bit vector into the enumeration index (bit v = s_v)."""
    out = 0
    for v, b in enumerate(s):
        if b:
            out |= 1 << v
    return out


def brute_force_minimum(model: EnergyModel) -> tuple[float, np.ndarray]:
    """Exact minimum energy and one minimising state (lowest index wins)."""
    energies = all_state_energies(model)
    i = int(np.argmin(energies))
    bits = np.array([(i >> v) & 1 for v in range(model.num_vars)], dtype=np.uint8)
    return float(energies[i]), bits


# -- plain-text model format -------------------------------------------------
#
# Header `hubo <N>`, then one term per line: `coeff v1 v2 ... vk` (a constant
# term carries no indices). repr() round-trips float64 exactly, so save/load
# is value-exact.


def save_hubo(model: EnergyModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"hubo {model.num_vars}\n")
        for tup, coeff in model.terms:
            if tup:
                fh.write(f"{coeff!r} {' '.join(map(str, tup))}\n")
            else:
                fh.write(f"{coeff!r}\n")


def load_hubo(path) -> EnergyModel:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "hubo":
            raise FileFormatError(f"{path}: expected header 'hubo <N>'")
        try:
            n = int(header[1])
        except ValueError as exc:
            raise FileFormatError(f"{path}: bad variable count {header[1]!r}") from exc
        terms = []
        for lineno, line in enumerate(fh, start=2):
            fields = line.split()
            if not fields:
                continue
            try:
                coeff = float(fields[0])
                tup = tuple(int(f) for f in fields[1:])
            except ValueError as exc:
                raise FileFormatError(f"{path}:{lineno}: unparseable term {line!r}") from exc
            terms.append((coeff, tup))
    return EnergyModel(n, terms)

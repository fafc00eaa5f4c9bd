"""Pure-Python sampling kernels (fallback when the compiled extension is
unavailable).

Both backends follow the same random-stream contract so results are
bit-identical for a given numpy Generator seed (see kernel.py). Scalar
probabilities deliberately go through math.exp, which is the same libm exp
the compiled kernel calls.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"


def _sigmoid(x: float) -> float:
    if x < -709.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-x))


def _drive(coeffs, t_off, t_vars, v_off, v_terms, state, v: int) -> float:
    """E(s|s_v=0) - E(s|s_v=1): minus the sum of incident term products."""
    d = 0.0
    for t in v_terms[v_off[v] : v_off[v + 1]]:
        prod = coeffs[t]
        for w in t_vars[t_off[t] : t_off[t + 1]]:
            if w != v and state[w] == 0:
                prod = 0.0
                break
        d -= prod
    return d


def _update_group(coeffs, t_off, t_vars, v_off, v_terms, state, members, beta, rng, energy):
    """One parallel group update: all drives from the pre-update snapshot,
    then one uniform per member in ascending-variable order."""
    drives = [_drive(coeffs, t_off, t_vars, v_off, v_terms, state, int(v)) for v in members]
    us = rng.random(len(members))
    for j, v in enumerate(members):
        b = 1 if us[j] < _sigmoid(beta * drives[j]) else 0
        old = state[v]
        if b != old:
            energy += -drives[j] if b == 1 else drives[j]
            state[v] = b
    return energy


def sa_loop(coeffs, t_off, t_vars, v_off, v_terms, g_off, g_vars, state, energy0, betas, rng, round_robin=False):
    """Simulated annealing: one group update per iteration at betas[t].

    Returns (best_energy, best_state, best_so_far trajectory).
    """
    n_iters = len(betas)
    n_groups = len(g_off) - 1
    energy = float(energy0)
    best_e = energy
    best_state = state.copy()
    traj = np.empty(n_iters, dtype=np.float64)
    for t in range(n_iters):
        if n_groups > 0:
            if round_robin:
                g = t % n_groups
            else:
                g = int(rng.random() * n_groups)
            members = g_vars[g_off[g] : g_off[g + 1]]
            energy = _update_group(
                coeffs, t_off, t_vars, v_off, v_terms, state, members, betas[t], rng, energy
            )
            if energy < best_e:
                best_e = energy
                best_state[:] = state
        traj[t] = best_e
    return best_e, best_state, traj


def pt_loop(
    coeffs, t_off, t_vars, v_off, v_terms, g_off, g_vars,
    states, energies, replica_betas, n_iters, swap_interval, rng, round_robin=False,
):
    """Parallel tempering: replicas updated in index order each iteration;
    adjacent pairs proposed for state exchange every swap_interval iterations.

    Returns (best_energy, best_state, best_so_far trajectory).
    """
    n_groups = len(g_off) - 1
    n_replicas = len(replica_betas)
    energies = np.asarray(energies, dtype=np.float64).copy()
    best_r = int(np.argmin(energies))
    best_e = float(energies[best_r])
    best_state = states[best_r].copy()
    traj = np.empty(n_iters, dtype=np.float64)
    for t in range(n_iters):
        for r in range(n_replicas):
            if n_groups == 0:
                continue
            if round_robin:
                g = t % n_groups
            else:
                g = int(rng.random() * n_groups)
            members = g_vars[g_off[g] : g_off[g + 1]]
            energies[r] = _update_group(
                coeffs, t_off, t_vars, v_off, v_terms,
                states[r], members, replica_betas[r], rng, energies[r],
            )
            if energies[r] < best_e:
                best_e = float(energies[r])
                best_state[:] = states[r]
        if swap_interval > 0 and (t + 1) % swap_interval == 0:
            for i in range(n_replicas - 1):
                x = (replica_betas[i + 1] - replica_betas[i]) * (energies[i + 1] - energies[i])
                p = 1.0 if x >= 0.0 else math.exp(x)
                if rng.random() < p:
                    tmp = states[i].copy()
                    states[i][:] = states[i + 1]
                    states[i + 1][:] = tmp
                    energies[i], energies[i + 1] = energies[i + 1], energies[i]
        traj[t] = best_e
    return best_e, best_state, traj


def gibbs_counts(coeffs, t_off, t_vars, v_off, v_terms, free, state, beta, n_samples, burn_in, rng):
    """Single-site Gibbs sampler; returns visit counts over all 2^n states
    recorded after each post-burn-in step (index bit v holds s_v)."""
    n = len(state)
    counts = np.zeros(1 << n, dtype=np.int64)
    idx = 0
    for v in range(n):
        if state[v]:
            idx |= 1 << v
    n_free = len(free)
    for step in range(burn_in + n_samples):
        v = int(free[int(rng.random() * n_free)])
        d = _drive(coeffs, t_off, t_vars, v_off, v_terms, state, v)
        b = 1 if rng.random() < _sigmoid(beta * d) else 0
        if b != state[v]:
            state[v] = b
            idx ^= 1 << v
        if step >= burn_in:
            counts[idx] += 1
    return counts


def pt_counts(
    coeffs, t_off, t_vars, v_off, v_terms, g_off, g_vars,
    states, energies, replica_betas, n_iters, swap_interval, burn_in, rng,
):
    """pt_loop variant that also tallies per-iteration replica states,
    pooled over replicas, after burn_in iterations."""
    n = states.shape[1]
    n_groups = len(g_off) - 1
    n_replicas = len(replica_betas)
    energies = np.asarray(energies, dtype=np.float64).copy()
    counts = np.zeros(1 << n, dtype=np.int64)
    idxs = [0] * n_replicas
    for r in range(n_replicas):
        for v in range(n):
            if states[r][v]:
                idxs[r] |= 1 << v
    for t in range(n_iters):
        for r in range(n_replicas):
            if n_groups == 0:
                continue
            g = int(rng.random() * n_groups)
            members = g_vars[g_off[g] : g_off[g + 1]]
            drives = [_drive(coeffs, t_off, t_vars, v_off, v_terms, states[r], int(v)) for v in members]
            us = rng.random(len(members))
            for j, v in enumerate(members):
                b = 1 if us[j] < _sigmoid(replica_betas[r] * drives[j]) else 0
                if b != states[r][v]:
                    energies[r] += -drives[j] if b == 1 else drives[j]
                    states[r][v] = b
                    idxs[r] ^= 1 << v
        if swap_interval > 0 and (t + 1) % swap_interval == 0:
            for i in range(n_replicas - 1):
                x = (replica_betas[i + 1] - replica_betas[i]) * (energies[i + 1] - energies[i])
                p = 1.0 if x >= 0.0 else math.exp(x)
                if rng.random() < p:
                    tmp = states[i].copy()
                    states[i][:] = states[i + 1]
                    states[i + 1][:] = tmp
                    energies[i], energies[i + 1] = energies[i + 1], energies[i]
                    idxs[i], idxs[i + 1] = idxs[i + 1], idxs[i]
        if t >= burn_in:
            for r in range(n_replicas):
                counts[idxs[r]] += 1
    return counts

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernels.

Mirrors _kernel_py step for step: same update order, same random-stream
consumption (raw next_double from the Generator's bit generator, which is
exactly what Generator.random() consumes), same libm exp. Results are
bit-identical between the two backends for a given seed.
"""

from libc.math cimport exp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid

import numpy as np

cimport numpy as cnp
from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND_NAME = "compiled"

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_bitgen(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("rng does not expose a BitGenerator capsule")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


cdef inline double _sigmoid(double x) noexcept nogil:
    if x < -709.0:
        return 0.0
    return 1.0 / (1.0 + exp(-x))


cdef inline double _drive(
    const double[::1] coeffs, const long long[::1] t_off, const int[::1] t_vars,
    const long long[::1] v_off, const int[::1] v_terms,
    const unsigned char[::1] state, Py_ssize_t v,
) noexcept nogil:
    cdef double d = 0.0, prod
    cdef Py_ssize_t it, t, iw, w
    for it in range(v_off[v], v_off[v + 1]):
        t = v_terms[it]
        prod = coeffs[t]
        for iw in range(t_off[t], t_off[t + 1]):
            w = t_vars[iw]
            if w != v and state[w] == 0:
                prod = 0.0
                break
        d -= prod
    return d


cdef inline double _update_group(
    const double[::1] coeffs, const long long[::1] t_off, const int[::1] t_vars,
    const long long[::1] v_off, const int[::1] v_terms,
    unsigned char[::1] state, const int[::1] g_vars,
    Py_ssize_t lo, Py_ssize_t hi, double beta,
    bitgen_t *rng, double energy, double[::1] drives,
) noexcept nogil:
    cdef Py_ssize_t j, v
    cdef double u, b
    for j in range(lo, hi):
        drives[j - lo] = _drive(coeffs, t_off, t_vars, v_off, v_terms, state, g_vars[j])
    for j in range(lo, hi):
        v = g_vars[j]
        u = rng.next_double(rng.state)
        b = 1.0 if u < _sigmoid(beta * drives[j - lo]) else 0.0
        if <unsigned char> b != state[v]:
            energy += -drives[j - lo] if b == 1.0 else drives[j - lo]
            state[v] = <unsigned char> b
    return energy


def sa_loop(
    const double[::1] coeffs, const long long[::1] t_off, const int[::1] t_vars,
    const long long[::1] v_off, const int[::1] v_terms,
    const long long[::1] g_off, const int[::1] g_vars,
    unsigned char[::1] state, double energy0, const double[::1] betas,
    object rng, bint round_robin=False,
):
    cdef Py_ssize_t n_iters = betas.shape[0]
    cdef Py_ssize_t n_groups = g_off.shape[0] - 1
    cdef Py_ssize_t n = state.shape[0]
    cdef bitgen_t *bg = _bitgen(rng)
    cdef double energy = energy0, best_e = energy0
    best_state_arr = np.asarray(state).copy()
    traj_arr = np.empty(n_iters, dtype=np.float64)
    drives_arr = np.empty(max(n, 1), dtype=np.float64)
    cdef unsigned char[::1] best_state = best_state_arr
    cdef double[::1] traj = traj_arr
    cdef double[::1] drives = drives_arr
    cdef Py_ssize_t t, g, i
    with rng.bit_generator.lock, nogil:
        for t in range(n_iters):
            if n_groups > 0:
                if round_robin:
                    g = t % n_groups
                else:
                    g = <Py_ssize_t> (bg.next_double(bg.state) * n_groups)
                energy = _update_group(
                    coeffs, t_off, t_vars, v_off, v_terms, state, g_vars,
                    g_off[g], g_off[g + 1], betas[t], bg, energy, drives,
                )
                if energy < best_e:
                    best_e = energy
                    for i in range(n):
                        best_state[i] = state[i]
            traj[t] = best_e
    return best_e, best_state_arr, traj_arr


def pt_loop(
    const double[::1] coeffs, const long long[::1] t_off, const int[::1] t_vars,
    const long long[::1] v_off, const int[::1] v_terms,
    const long long[::1] g_off, const int[::1] g_vars,
    unsigned char[:, ::1] states, object energies_in, const double[::1] replica_betas,
    Py_ssize_t n_iters, Py_ssize_t swap_interval, object rng, bint round_robin=False,
):
    cdef Py_ssize_t n_groups = g_off.shape[0] - 1
    cdef Py_ssize_t n_replicas = replica_betas.shape[0]
    cdef Py_ssize_t n = states.shape[1]
    cdef bitgen_t *bg = _bitgen(rng)
    energies_arr = np.asarray(energies_in, dtype=np.float64).copy()
    cdef double[::1] energies = energies_arr
    cdef Py_ssize_t best_r = int(np.argmin(energies_arr))
    cdef double best_e = energies[best_r]
    best_state_arr = np.asarray(states[best_r]).copy()
    traj_arr = np.empty(n_iters, dtype=np.float64)
    tmp_arr = np.empty(n, dtype=np.uint8)
    drives_arr = np.empty(max(n, 1), dtype=np.float64)
    cdef unsigned char[::1] best_state = best_state_arr
    cdef unsigned char[::1] tmp = tmp_arr
    cdef double[::1] traj = traj_arr
    cdef double[::1] drives = drives_arr
    cdef Py_ssize_t t, r, g, i
    cdef double x, p, e_swap
    with rng.bit_generator.lock, nogil:
        for t in range(n_iters):
            for r in range(n_replicas):
                if n_groups == 0:
                    continue
                if round_robin:
                    g = t % n_groups
                else:
                    g = <Py_ssize_t> (bg.next_double(bg.state) * n_groups)
                energies[r] = _update_group(
                    coeffs, t_off, t_vars, v_off, v_terms, states[r], g_vars,
                    g_off[g], g_off[g + 1], replica_betas[r], bg, energies[r], drives,
                )
                if energies[r] < best_e:
                    best_e = energies[r]
                    for i in range(n):
                        best_state[i] = states[r][i]
            if swap_interval > 0 and (t + 1) % swap_interval == 0:
                for r in range(n_replicas - 1):
                    x = (replica_betas[r + 1] - replica_betas[r]) * (energies[r + 1] - energies[r])
                    p = 1.0 if x >= 0.0 else exp(x)
                    if bg.next_double(bg.state) < p:
                        for i in range(n):
                            tmp[i] = states[r][i]
                            states[r][i] = states[r + 1][i]
                            states[r + 1][i] = tmp[i]
                        e_swap = energies[r]
                        energies[r] = energies[r + 1]
                        energies[r + 1] = e_swap
            traj[t] = best_e
    return best_e, best_state_arr, traj_arr


def gibbs_counts(
    const double[::1] coeffs, const long long[::1] t_off, const int[::1] t_vars,
    const long long[::1] v_off, const int[::1] v_terms,
    const int[::1] free, unsigned char[::1] state, double beta,
    Py_ssize_t n_samples, Py_ssize_t burn_in, object rng,
):
    cdef Py_ssize_t n = state.shape[0]
    cdef Py_ssize_t n_free = free.shape[0]
    cdef bitgen_t *bg = _bitgen(rng)
    counts_arr = np.zeros(1 << n, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    cdef long long idx = 0
    cdef Py_ssize_t v, step
    cdef double d
    cdef unsigned char b
    for v in range(n):
        if state[v]:
            idx |= <long long> 1 << v
    with rng.bit_generator.lock, nogil:
        for step in range(burn_in + n_samples):
            v = free[<Py_ssize_t> (bg.next_double(bg.state) * n_free)]
            d = _drive(coeffs, t_off, t_vars, v_off, v_terms, state, v)
            b = 1 if bg.next_double(bg.state) < _sigmoid(beta * d) else 0
            if b != state[v]:
                state[v] = b
                idx ^= <long long> 1 << v
            if step >= burn_in:
                counts[idx] += 1
    return counts_arr


def pt_counts(
    const double[::1] coeffs, const long long[::1] t_off, const int[::1] t_vars,
    const long long[::1] v_off, const int[::1] v_terms,
    const long long[::1] g_off, const int[::1] g_vars,
    unsigned char[:, ::1] states, object energies_in, const double[::1] replica_betas,
    Py_ssize_t n_iters, Py_ssize_t swap_interval, Py_ssize_t burn_in, object rng,
):
    cdef Py_ssize_t n_groups = g_off.shape[0] - 1
    cdef Py_ssize_t n_replicas = replica_betas.shape[0]
    cdef Py_ssize_t n = states.shape[1]
    cdef bitgen_t *bg = _bitgen(rng)
    energies_arr = np.asarray(energies_in, dtype=np.float64).copy()
    cdef double[::1] energies = energies_arr
    counts_arr = np.zeros(1 << n, dtype=np.int64)
    cdef long long[::1] counts = counts_arr
    idxs_arr = np.zeros(n_replicas, dtype=np.int64)
    cdef long long[::1] idxs = idxs_arr
    tmp_arr = np.empty(n, dtype=np.uint8)
    drives_arr = np.empty(max(n, 1), dtype=np.float64)
    cdef unsigned char[::1] tmp = tmp_arr
    cdef double[::1] drives = drives_arr
    cdef Py_ssize_t t, r, g, i, j, v, lo, hi
    cdef double x, p, u, e_swap
    cdef long long idx_swap
    cdef unsigned char b
    for r in range(n_replicas):
        for v in range(n):
            if states[r][v]:
                idxs[r] |= <long long> 1 << v
    with rng.bit_generator.lock, nogil:
        for t in range(n_iters):
            for r in range(n_replicas):
                if n_groups == 0:
                    continue
                g = <Py_ssize_t> (bg.next_double(bg.state) * n_groups)
                lo = g_off[g]
                hi = g_off[g + 1]
                for j in range(lo, hi):
                    drives[j - lo] = _drive(coeffs, t_off, t_vars, v_off, v_terms, states[r], g_vars[j])
                for j in range(lo, hi):
                    v = g_vars[j]
                    u = bg.next_double(bg.state)
                    b = 1 if u < _sigmoid(replica_betas[r] * drives[j - lo]) else 0
                    if b != states[r][v]:
                        energies[r] += -drives[j - lo] if b == 1 else drives[j - lo]
                        states[r][v] = b
                        idxs[r] ^= <long long> 1 << v
            if swap_interval > 0 and (t + 1) % swap_interval == 0:
                for r in range(n_replicas - 1):
                    x = (replica_betas[r + 1] - replica_betas[r]) * (energies[r + 1] - energies[r])
                    p = 1.0 if x >= 0.0 else exp(x)
                    if bg.next_double(bg.state) < p:
                        for i in range(n):
                            tmp[i] = states[r][i]
                            states[r][i] = states[r + 1][i]
                            states[r + 1][i] = tmp[i]
                        e_swap = energies[r]
                        energies[r] = energies[r + 1]
                        energies[r + 1] = e_swap
                        idx_swap = idxs[r]
                        idxs[r] = idxs[r + 1]
                        idxs[r + 1] = idx_swap
            if t >= burn_in:
                for r in range(n_replicas):
                    counts[idxs[r]] += 1
    return counts_arr

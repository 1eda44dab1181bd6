"""Compiled per-trajectory kernels for the three-well positive-P equations.

The state of one trajectory is a length-6 complex array
(alpha1, alpha1+, alpha2, alpha2+, alpha3, alpha3+).
"""
import cmath
import math

import numpy as np

from src.model.moments import moment_layout
from src.simulators.jit import njit, prange
from src.simulators.rng import gaussian_pair, step_normals, uniform_pair

MOMENT_SIZE = moment_layout(3).size
STATE_SIZE = 6
SCHEME_EULER = 0
SCHEME_MIDPOINT = 1
ZERO = np.uint64(0)
TWO_PI = 2.0 * math.pi


@njit(cache=True)
def drift_into(y, J, chi, out):
    """Ito drift of all six amplitudes."""
    a1, p1, a2, p2, a3, p3 = y[0], y[1], y[2], y[3], y[4], y[5]
    out[0] = -2j * chi * p1 * a1 * a1 - 1j * J * a2
    out[1] = 2j * chi * p1 * p1 * a1 + 1j * J * p2
    out[2] = -2j * chi * p2 * a2 * a2 - 1j * J * (a1 + a3)
    out[3] = 2j * chi * p2 * p2 * a2 + 1j * J * (p1 + p3)
    out[4] = -2j * chi * p3 * a3 * a3 - 1j * J * a2
    out[5] = 2j * chi * p3 * p3 * a3 + 1j * J * p2


@njit(cache=True)
def noise_into(y, root_minus, root_plus, out):
    for j in range(3):
        out[2 * j] = root_minus * y[2 * j]
        out[2 * j + 1] = root_plus * y[2 * j + 1]


@njit(cache=True)
def stratonovich_drift_into(y, J, chi, out):
    """Drift with the -1/2 B dB correction, used by the midpoint scheme."""
    drift_into(y, J, chi, out)
    for j in range(3):
        out[2 * j] += 1j * chi * y[2 * j]
        out[2 * j + 1] -= 1j * chi * y[2 * j + 1]


@njit(cache=True)
def euler_step(y, dt, eta, J, chi, root_minus, root_plus, drift, noise, out):
    """One Ito Euler-Maruyama step; out may alias y."""
    drift_into(y, J, chi, drift)
    noise_into(y, root_minus, root_plus, noise)
    sq = math.sqrt(dt)
    for k in range(STATE_SIZE):
        out[k] = y[k] + drift[k] * dt + noise[k] * eta[k] * sq


@njit(cache=True)
def midpoint_step(y, dt, eta, J, chi, root_minus, root_plus, iterations, mid, drift, noise, out):
    """Semi-implicit midpoint step solved by fixed-point iteration; out may alias y."""
    sq = math.sqrt(dt)
    for k in range(STATE_SIZE):
        mid[k] = y[k]
    for _ in range(iterations):
        stratonovich_drift_into(mid, J, chi, drift)
        noise_into(mid, root_minus, root_plus, noise)
        for k in range(STATE_SIZE):
            mid[k] = y[k] + 0.5 * (drift[k] * dt + noise[k] * eta[k] * sq)
    for k in range(STATE_SIZE):
        out[k] = 2.0 * mid[k] - y[k]


@njit(cache=True)
def is_diverged(y, bound):
    for k in range(STATE_SIZE):
        value = y[k]
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            return True
        if abs(value) > bound:
            return True
    return False


@njit(cache=True)
def sample_initial_into(y, fock, n_atoms, k0, k1, tlo, thi):
    """Draw the t = 0 amplitudes; counter word 0 is reserved for this."""
    for k in range(STATE_SIZE):
        y[k] = 0j
    if n_atoms <= 0.0:
        return
    if not fock:
        root = math.sqrt(n_atoms)
        y[2] = root + 0j
        y[3] = root + 0j
        return
    n_uniforms = int(n_atoms) + 1
    n_pairs = (n_uniforms + 1) // 2
    total = 0.0
    used = 0
    for p in range(n_pairs):
        u1, u2 = uniform_pair(k0, k1, ZERO, np.uint64(p), tlo, thi)
        total -= math.log(1.0 - u1)
        used += 1
        if used < n_uniforms:
            total -= math.log(1.0 - u2)
            used += 1
    phase, _ = uniform_pair(k0, k1, ZERO, np.uint64(n_pairs), tlo, thi)
    x, v = gaussian_pair(k0, k1, ZERO, np.uint64(n_pairs + 1), tlo, thi)
    gamma = math.sqrt(total) * cmath.exp(1j * TWO_PI * phase)
    delta = (x + 1j * v) / math.sqrt(2.0)
    y[2] = gamma + delta
    y[3] = gamma.conjugate() - delta.conjugate()


@njit(cache=True)
def record_products(y, row):
    """Write the sampled products of one state into a flat moment row."""
    for j in range(3):
        row[j] = y[2 * j]
        row[3 + j] = y[2 * j + 1]
    for i in range(3):
        for j in range(3):
            row[6 + 3 * i + j] = y[2 * i + 1] * y[2 * j]
    idx = 15
    for i in range(3):
        for j in range(i, 3):
            row[idx] = y[2 * i] * y[2 * j]
            row[idx + 6] = y[2 * i + 1] * y[2 * j + 1]
            idx += 1
    for j in range(3):
        n_j = y[2 * j + 1] * y[2 * j]
        row[27 + j] = n_j * n_j
    idx = 30
    for i in range(3):
        for j in range(i + 1, 3):
            row[idx] = (y[2 * i + 1] * y[2 * i]) * (y[2 * j + 1] * y[2 * j])
            idx += 1


@njit(cache=True)
def integrate_trajectory(traj, k0, k1, J, chi, n_atoms, fock, dt, steps_per_sample, n_grid,
                         bound, scheme, iterations, root_minus, root_plus, buffer):
    """Integrate one trajectory into buffer (n_grid, K); False if it diverged."""
    tlo = np.uint64(traj & 0xFFFFFFFF)
    thi = np.uint64(traj >> 32)
    y = np.empty(STATE_SIZE, dtype=np.complex128)
    mid = np.empty(STATE_SIZE, dtype=np.complex128)
    drift = np.empty(STATE_SIZE, dtype=np.complex128)
    noise = np.empty(STATE_SIZE, dtype=np.complex128)
    eta = np.zeros(STATE_SIZE, dtype=np.float64)
    noisy = chi != 0.0

    sample_initial_into(y, fock, n_atoms, k0, k1, tlo, thi)
    record_products(y, buffer[0])
    step = 0
    for g in range(1, n_grid):
        for _ in range(steps_per_sample):
            step += 1
            if noisy:
                step_normals(k0, k1, np.uint64(step), tlo, thi, eta)
            if scheme == SCHEME_EULER:
                euler_step(y, dt, eta, J, chi, root_minus, root_plus, drift, noise, y)
            else:
                midpoint_step(y, dt, eta, J, chi, root_minus, root_plus, iterations,
                              mid, drift, noise, y)
            if is_diverged(y, bound):
                return False
        record_products(y, buffer[g])
    return True


@njit(parallel=True, cache=True)
def integrate_blocks(first_block, n_blocks, block_size, n_traj, k0, k1, J, chi, n_atoms, fock,
                     dt, steps_per_sample, n_grid, bound, scheme, iterations,
                     root_minus, root_plus):
    """Per-block Kahan sums of the sampled products.

    Returns (sums (n_blocks, n_grid, K), used (n_blocks,), diverged (n_blocks,)).
    Each block is summed serially in trajectory order, so the result does not
    depend on how blocks are spread over threads.
    """
    sums = np.zeros((n_blocks, n_grid, MOMENT_SIZE), dtype=np.complex128)
    used = np.zeros(n_blocks, dtype=np.int64)
    diverged = np.zeros(n_blocks, dtype=np.int64)
    for b in prange(n_blocks):
        start = (first_block + b) * block_size
        stop = min(start + block_size, n_traj)
        buffer = np.zeros((n_grid, MOMENT_SIZE), dtype=np.complex128)
        compensation = np.zeros((n_grid, MOMENT_SIZE), dtype=np.complex128)
        n_used = 0
        n_bad = 0
        for traj in range(start, stop):
            ok = integrate_trajectory(traj, k0, k1, J, chi, n_atoms, fock, dt, steps_per_sample,
                                      n_grid, bound, scheme, iterations, root_minus, root_plus,
                                      buffer)
            if not ok:
                n_bad += 1
                continue
            n_used += 1
            for g in range(n_grid):
                for k in range(MOMENT_SIZE):
                    term = buffer[g, k] - compensation[g, k]
                    total = sums[b, g, k] + term
                    compensation[g, k] = (total - sums[b, g, k]) - term
                    sums[b, g, k] = total
        used[b] = n_used
        diverged[b] = n_bad
    return sums, used, diverged

"""Counter-based Philox4x32-10 random streams, one per trajectory.

The 64-bit run seed is the key; the 128-bit counter is
(step, draw, trajectory low word, trajectory high word). Step 0 is reserved
for initial-state sampling and integration step n uses counter n, so any draw
of trajectory k is a pure function of (seed, k, step, draw).
"""
import math

import numpy as np

from src.simulators.jit import njit

PHILOX_M0 = np.uint64(0xD2511F53)
PHILOX_M1 = np.uint64(0xCD9E8D57)
PHILOX_W0 = np.uint64(0x9E3779B9)
PHILOX_W1 = np.uint64(0xBB67AE85)
MASK32 = np.uint64(0xFFFFFFFF)
SHIFT32 = np.uint64(32)
SHIFT5 = np.uint64(5)
SHIFT6 = np.uint64(6)
INV_2_53 = 1.0 / 9007199254740992.0
TWO_PI = 2.0 * math.pi
PHILOX_ROUNDS = 10


@njit(cache=True)
def philox4x32(c0, c1, c2, c3, k0, k1):
    """Ten Philox rounds on a 4x32-bit counter; all arguments are uint64 holding 32 bits."""
    for _ in range(PHILOX_ROUNDS):
        p0 = c0 * PHILOX_M0
        p1 = c2 * PHILOX_M1
        hi0 = p0 >> SHIFT32
        lo0 = p0 & MASK32
        hi1 = p1 >> SHIFT32
        lo1 = p1 & MASK32
        c0 = (hi1 ^ c1 ^ k0) & MASK32
        c1 = lo1
        c2 = (hi0 ^ c3 ^ k1) & MASK32
        c3 = lo0
        k0 = (k0 + PHILOX_W0) & MASK32
        k1 = (k1 + PHILOX_W1) & MASK32
    return c0, c1, c2, c3


@njit(cache=True)
def uniform53(hi, lo):
    """Uniform double in [0, 1) from two 32-bit words."""
    return (np.float64(hi >> SHIFT5) * 67108864.0 + np.float64(lo >> SHIFT6)) * INV_2_53


@njit(cache=True)
def uniform_pair(k0, k1, counter, draw, tlo, thi):
    r0, r1, r2, r3 = philox4x32(counter, draw, tlo, thi, k0, k1)
    return uniform53(r0, r1), uniform53(r2, r3)


@njit(cache=True)
def gaussian_pair(k0, k1, counter, draw, tlo, thi):
    """Two independent standard normals by the Box-Muller transform."""
    u1, u2 = uniform_pair(k0, k1, counter, draw, tlo, thi)
    radius = math.sqrt(-2.0 * math.log(1.0 - u1))
    angle = TWO_PI * u2
    return radius * math.cos(angle), radius * math.sin(angle)


@njit(cache=True)
def step_normals(k0, k1, counter, tlo, thi, out):
    """Fill out[0:6] with the six noises of one integration step."""
    for d in range(3):
        z0, z1 = gaussian_pair(k0, k1, counter, np.uint64(d), tlo, thi)
        out[2 * d] = z0
        out[2 * d + 1] = z1


def seed_key(seed: int):
    """Split a 64-bit seed into the two Philox key words."""
    return np.uint64(seed & 0xFFFFFFFF), np.uint64((seed >> 32) & 0xFFFFFFFF)


def trajectory_words(index: int):
    return np.uint64(index & 0xFFFFFFFF), np.uint64((index >> 32) & 0xFFFFFFFF)


class TrajectoryStream:
    """Random stream of a single trajectory, addressed by step and draw."""

    def __init__(self, seed: int, index: int):
        self.seed = seed
        self.index = index
        self.k0, self.k1 = seed_key(seed)
        self.tlo, self.thi = trajectory_words(index)

    def uniforms(self, counter: int, draw: int):
        return uniform_pair(self.k0, self.k1, np.uint64(counter), np.uint64(draw), self.tlo, self.thi)

    def normals(self, step: int) -> np.ndarray:
        """The six standard normals driving integration step `step` (1-based)."""
        out = np.zeros(6)
        step_normals(self.k0, self.k1, np.uint64(step), self.tlo, self.thi, out)
        return out

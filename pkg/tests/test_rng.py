import numpy as np
import pytest

from src.simulators.rng import (
    TrajectoryStream,
    philox4x32,
    seed_key,
    trajectory_words,
    uniform53,
)

M0, M1 = 0xD2511F53, 0xCD9E8D57
W0, W1 = 0x9E3779B9, 0xBB67AE85


def reference_philox(counter, key):
    """Philox4x32-10 on plain Python integers."""
    c0, c1, c2, c3 = counter
    k0, k1 = key
    for _ in range(10):
        p0 = c0 * M0
        p1 = c2 * M1
        c0, c1, c2, c3 = ((p1 >> 32) ^ c1 ^ k0) & 0xFFFFFFFF, p1 & 0xFFFFFFFF, \
            ((p0 >> 32) ^ c3 ^ k1) & 0xFFFFFFFF, p0 & 0xFFFFFFFF
        k0 = (k0 + W0) & 0xFFFFFFFF
        k1 = (k1 + W1) & 0xFFFFFFFF
    return c0, c1, c2, c3


def compiled_philox(counter, key):
    words = [np.uint64(w) for w in counter] + [np.uint64(w) for w in key]
    return tuple(int(w) for w in philox4x32(*words))


class TestPhilox:
    @pytest.mark.parametrize('counter,key,expected', [
        ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
        ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
         (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
    ])
    def test_known_answers(self, counter, key, expected):
        assert compiled_philox(counter, key) == expected

    def test_matches_integer_reference(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            counter = tuple(int(w) for w in rng.integers(0, 2 ** 32, size=4))
            key = tuple(int(w) for w in rng.integers(0, 2 ** 32, size=2))
            assert compiled_philox(counter, key) == reference_philox(counter, key)

    def test_outputs_fit_32_bits(self):
        words = compiled_philox((0xFFFFFFFF,) * 4, (0xFFFFFFFF, 0xFFFFFFFF))
        assert all(0 <= w < 2 ** 32 for w in words)


def test_uniform53_range():
    assert uniform53(np.uint64(0), np.uint64(0)) == 0.0
    top = uniform53(np.uint64(0xFFFFFFFF), np.uint64(0xFFFFFFFF))
    assert top < 1.0
    assert top == pytest.approx(1.0 - 2.0 ** -53, abs=0)


def test_key_and_trajectory_words():
    assert tuple(int(w) for w in seed_key(0x0123456789ABCDEF)) == (0x89ABCDEF, 0x01234567)
    assert tuple(int(w) for w in trajectory_words(2 ** 32 + 5)) == (5, 1)


class TestTrajectoryStream:
    def test_same_address_same_draws(self):
        a = TrajectoryStream(seed=42, index=17)
        b = TrajectoryStream(seed=42, index=17)
        np.testing.assert_array_equal(a.normals(3), b.normals(3))
        assert a.uniforms(0, 1) == b.uniforms(0, 1)

    def test_draws_do_not_depend_on_order(self):
        stream = TrajectoryStream(seed=42, index=0)
        late_first = stream.normals(100)
        stream.normals(1)
        np.testing.assert_array_equal(stream.normals(100), late_first)

    def test_streams_differ(self):
        base = TrajectoryStream(seed=42, index=0).normals(1)
        assert not np.array_equal(base, TrajectoryStream(seed=42, index=1).normals(1))
        assert not np.array_equal(base, TrajectoryStream(seed=43, index=0).normals(1))
        assert not np.array_equal(base, TrajectoryStream(seed=42, index=0).normals(2))

    def test_normal_statistics(self):
        stream = TrajectoryStream(seed=2024, index=3)
        draws = np.concatenate([stream.normals(step) for step in range(1, 5001)])
        assert draws.size == 30000
        assert abs(draws.mean()) < 5 / np.sqrt(draws.size)
        assert draws.var() == pytest.approx(1.0, abs=0.05)
        assert abs(np.corrcoef(draws[:-1], draws[1:])[0, 1]) < 0.05

    def test_uniforms_in_unit_interval(self):
        stream = TrajectoryStream(seed=1, index=0)
        values = np.array([stream.uniforms(0, draw) for draw in range(2000)]).ravel()
        assert values.min() >= 0.0
        assert values.max() < 1.0
        assert values.mean() == pytest.approx(0.5, abs=0.03)

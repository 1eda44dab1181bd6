import cmath
import math

import numpy as np
import pytest

from src.analyzers.analytic import analytic_report
from src.analyzers.criteria import criteria_report
from src.errors import DivergenceError
from src.model.config import SystemConfig
from src.simulators import kernels, ppsim
from src.simulators.oracle import FockBasis, evolve_series, fock_initial_state
from src.simulators.rng import TrajectoryStream


def config(**overrides):
    values = dict(J=1.0, chi=0.0, n_atoms=200, initial_state='fock', t_max=1.0, n_traj=256, seed=7)
    values.update(overrides)
    return SystemConfig(**values)


def state(alpha, alpha_plus=None):
    alpha = np.asarray(alpha, dtype=complex)
    plus = np.conj(alpha) if alpha_plus is None else np.asarray(alpha_plus, dtype=complex)
    return ppsim.TrajectoryState(alpha=alpha, alpha_plus=plus)


class TestTrajectoryState:
    def test_vector_round_trip(self):
        s = state([1, 2j, 3], [4, 5, -6j])
        np.testing.assert_array_equal(s.to_vector(), [1, 4, 2j, 5, 3, -6j])
        np.testing.assert_array_equal(ppsim.TrajectoryState.from_vector(s.to_vector()).alpha, s.alpha)

    def test_finite(self):
        assert state([1, 2, 3]).is_finite()
        assert not state([1, np.nan, 3]).is_finite()

    def test_noise_vector_shape(self):
        with pytest.raises(ValueError):
            ppsim.NoiseVector(np.zeros(4))


class TestDrift:
    def test_tunneling(self):
        d = ppsim.drift(state([0, math.sqrt(200), 0]), config())
        assert d[0] == pytest.approx(-1j * math.sqrt(200))
        assert d[1] == pytest.approx(1j * math.sqrt(200))
        assert d[2] == 0

    def test_collisions(self):
        d = ppsim.drift(state([1, 0, 0], [1, 0, 0]), config(J=0.0, chi=1e-3))
        assert d[0] == pytest.approx(-2e-3j)
        assert d[1] == pytest.approx(2e-3j)

    def test_vacuum_is_fixed(self):
        assert not np.any(ppsim.drift(state([0, 0, 0]), config(chi=0.5)))


class TestNoise:
    def test_principal_roots(self):
        minus, plus = ppsim.noise_roots(1e-3)
        assert minus == pytest.approx(math.sqrt(2e-3) * cmath.exp(-1j * math.pi / 4))
        assert plus == pytest.approx(math.sqrt(2e-3) * cmath.exp(1j * math.pi / 4))
        assert minus ** 2 == pytest.approx(-2e-3j)

    def test_amplitudes(self):
        amplitudes = ppsim.noise_amplitudes(state([1, 0, 0], [1, 0, 0]), config(chi=1e-3))
        assert amplitudes[0] == pytest.approx(math.sqrt(2e-3) * cmath.exp(-1j * math.pi / 4))
        assert not np.any(amplitudes[2:])

    def test_vanishes_without_collisions(self):
        assert not np.any(ppsim.noise_amplitudes(state([1, 2, 3]), config()))


class TestStep:
    def test_vacuum_stays_vacuum(self):
        noise = ppsim.NoiseVector(np.ones(6))
        out = ppsim.step(state([0, 0, 0]), 1e-3, noise, config(chi=0.1))
        assert not np.any(out.to_vector())
        assert out.t == pytest.approx(1e-3)

    def test_linear_euler(self):
        s = state([0.3, 2.0, -0.1j])
        out = ppsim.step(s, 1e-2, ppsim.NoiseVector(), config())
        expected = s.to_vector() + 1e-2 * ppsim.drift(s, config())
        np.testing.assert_allclose(out.to_vector(), expected)

    def test_rejects_bad_step(self):
        with pytest.raises(ValueError):
            ppsim.step(state([0, 1, 0]), 0.0, ppsim.NoiseVector(), config())

    def test_divergence_flag(self):
        s = state([0, 1e9, 0])
        assert ppsim.step(s, 1e-3, ppsim.NoiseVector(), config(n_atoms=1)).diverged


class TestInitialSampling:
    def test_coherent_is_deterministic(self):
        sampled = ppsim.sample_initial(config(initial_state='coherent'), TrajectoryStream(7, 3))
        np.testing.assert_allclose(sampled.to_vector(), [0, 0, math.sqrt(200), math.sqrt(200), 0, 0])

    def test_vacuum(self):
        sampled = ppsim.sample_initial(config(n_atoms=0), TrajectoryStream(7, 0))
        assert not np.any(sampled.to_vector())

    def test_outer_wells_empty(self):
        sampled = ppsim.sample_initial(config(), TrajectoryStream(7, 11))
        assert sampled.alpha[0] == 0 and sampled.alpha_plus[2] == 0

    def test_reproducible(self):
        a = ppsim.sample_initial(config(), TrajectoryStream(7, 11))
        b = ppsim.sample_initial(config(), TrajectoryStream(7, 11))
        np.testing.assert_array_equal(a.to_vector(), b.to_vector())

    @pytest.mark.parametrize('n', [1, 20])
    def test_fock_moments(self, n):
        system = config(n_atoms=n)
        samples = np.array([
            ppsim.sample_initial(system, TrajectoryStream(11, k)).to_vector() for k in range(4000)
        ])
        number = samples[:, 3] * samples[:, 2]
        for values, target in ((number, n), (number ** 2, n * (n - 1)), (samples[:, 2], 0)):
            error = values.std() / math.sqrt(values.size)
            assert abs(values.mean() - target) < 5 * error


class TestMomentAccumulator:
    def test_matches_direct_computation(self):
        rng = np.random.default_rng(3)
        used = np.array([128, 128, 128, 64, 0])
        means = rng.normal(size=(5, 2, 4)) + 1j * rng.normal(size=(5, 2, 4))
        sums = means * used[:, None, None]

        accumulator = ppsim.MomentAccumulator(2, 4)
        accumulator.add_chunk(sums[:2], used[:2], np.zeros(2, dtype=int))
        accumulator.add_chunk(sums[2:], used[2:], np.array([0, 0, 3]))

        populated = used > 0
        weights = used[populated].astype(float)
        split = np.concatenate([means.real, means.imag], axis=-1)[populated]
        mean = np.einsum('b,bti->ti', weights, split) / weights.sum()
        deviation = split - mean
        m2 = np.einsum('b,bti,btj->tij', weights, deviation, deviation)

        np.testing.assert_allclose(accumulator.values(), mean[:, :4] + 1j * mean[:, 4:])
        np.testing.assert_allclose(accumulator.covariance(), m2 / 3 / weights.sum())
        assert accumulator.count == 448
        assert accumulator.diverged == 3

    def test_single_block_has_no_errors(self, caplog):
        accumulator = ppsim.MomentAccumulator(1, 2)
        accumulator.add_chunk(np.ones((1, 1, 2)), np.array([5]), np.array([0]))
        assert np.all(np.isnan(accumulator.covariance()))
        assert 'standard errors are undefined' in caplog.text


class TestEnsemble:
    def test_classical_coherent_trajectory(self):
        system = config(initial_state='coherent', n_traj=1)
        moments = ppsim.run_ensemble(system)
        assert moments.n_traj_used == 1
        expected = analytic_report(system)
        populations = [moments.view.population(j) for j in (1, 2, 3)]
        for j, values in enumerate(populations, start=1):
            np.testing.assert_allclose(values, expected[f'N{j}'], atol=1e-2)

    def test_euler_scheme_agrees(self):
        system = config(initial_state='coherent', n_traj=1, scheme='euler', dt=1e-4)
        moments = ppsim.integrate_single(system)
        np.testing.assert_allclose(moments.view.population(2), analytic_report(system)['N2'], atol=0.1)

    def test_reproducible_for_any_thread_count(self):
        a = ppsim.run_ensemble(config(chi=0.1, n_atoms=4, n_traj=300, t_max=0.2, workers=1))
        b = ppsim.run_ensemble(config(chi=0.1, n_atoms=4, n_traj=300, t_max=0.2, workers=2))
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.covariance, b.covariance)

    def test_seed_changes_result(self):
        a = ppsim.run_ensemble(config(chi=0.1, n_atoms=4, n_traj=200, t_max=0.1))
        b = ppsim.run_ensemble(config(chi=0.1, n_atoms=4, n_traj=200, t_max=0.1, seed=8))
        assert not np.array_equal(a.values, b.values)

    def test_too_many_divergences(self, monkeypatch):
        def diverging(first, count, block_size, n_traj, *args):
            n_grid = args[8]
            used = np.full(count, block_size)
            diverged = np.zeros(count, dtype=np.int64)
            diverged[0] = 10
            used[0] -= 10
            return np.zeros((count, n_grid, kernels.MOMENT_SIZE), dtype=complex), used, diverged

        monkeypatch.setattr(kernels, 'integrate_blocks', diverging)
        with pytest.raises(DivergenceError):
            ppsim.run_ensemble(config(n_traj=256))


@pytest.mark.slow
def test_fock_ensemble_matches_closed_forms():
    system = config(n_atoms=20, n_traj=20000, t_max=2.5, grid_step=0.05)
    report = criteria_report(ppsim.run_ensemble(system))
    expected = analytic_report(system)
    for name in ('N1', 'N2', 'N3', 'xi13'):
        error = report.errors[name]
        assert np.all(np.abs(report.values[name] - expected[name]) <= 5 * error + 1e-9), name


@pytest.mark.slow
def test_collisional_ensemble_matches_oracle():
    system = config(n_atoms=4, chi=0.1, n_traj=20000, t_max=1.0, grid_step=0.05)
    report = criteria_report(ppsim.run_ensemble(system))
    exact = criteria_report(
        evolve_series(fock_initial_state(FockBasis(4)), system.time_grid(), system.J, system.chi)
    ).values
    for name in ('N1', 'N2', 'N3'):
        error = report.errors[name]
        assert np.all(np.abs(report.values[name] - exact[name]) <= 5 * error + 1e-9), name


def window_peak(time, values, errors, centre, half_width=0.6):
    """Largest value inside [centre - half_width, centre + half_width] and its standard error."""
    inside = np.flatnonzero(np.abs(time - centre) <= half_width)
    k = inside[np.argmax(values[inside])]
    return values[k], errors[k]


@pytest.mark.slow
def test_fock_ensemble_at_full_trajectory_count():
    system = config(n_traj=100_000, t_max=2.5, grid_step=0.1)
    report = criteria_report(ppsim.run_ensemble(system))
    expected = analytic_report(system)
    for name in ('N1', 'N2', 'N3', 'VN1m3', 'xi13'):
        error = report.errors[name]
        assert np.all(np.abs(report.values[name] - expected[name]) <= 3 * error + 1e-9), name
    peak = np.argmax(expected['xi13'])
    assert report.errors['xi13'][peak] < 2


@pytest.mark.slow
def test_collisions_degrade_number_correlations():
    fock = config(chi=1e-3, n_traj=16384, t_max=6.0, grid_step=0.05)
    report = criteria_report(ppsim.run_ensemble(fock))
    time, xi, se = report.time, report.values['xi13'], report.errors['xi13']
    period = math.pi / fock.omega.omega
    first, first_se = window_peak(time, xi, se, 0.5 * period)
    third, third_se = window_peak(time, xi, se, 2.5 * period)
    assert first > 3 * first_se
    assert first - third > 3 * math.hypot(first_se, third_se)

    coherent = config(chi=1e-3, initial_state='coherent', n_traj=4096, t_max=6.0, grid_step=0.1)
    report = criteria_report(ppsim.run_ensemble(coherent))
    assert np.all(report.values['xi13'] <= 3 * report.errors['xi13'] + 1e-9)


@pytest.mark.slow
def test_duan_simon_violation_is_short_lived():
    system = config(chi=1e-3, initial_state='coherent', n_traj=4096, t_max=8.0, grid_step=0.05)
    report = criteria_report(ppsim.run_ensemble(system))
    time, ds, se = report.time, report.values['DSm13'], report.errors['DSm13']
    first_oscillation = np.flatnonzero(time <= math.pi / system.omega.omega)
    k = first_oscillation[np.argmin(ds[first_oscillation])]
    assert ds[k] < 4 - 3 * se[k]
    assert np.all(ds[time > 5.0] > 4)


@pytest.mark.slow
def test_halving_the_step_leaves_populations_unchanged():
    coarse = ppsim.run_ensemble(config(n_atoms=4, chi=0.1, n_traj=20000, t_max=1.0, grid_step=0.5))
    fine = ppsim.run_ensemble(
        config(n_atoms=4, chi=0.1, n_traj=20000, t_max=1.0, grid_step=0.5, dt=5e-4, seed=8))
    coarse_report = criteria_report(coarse)
    fine_report = criteria_report(fine)
    for name in ('N1', 'N2', 'N3'):
        difference = abs(coarse_report.values[name][-1] - fine_report.values[name][-1])
        combined = math.hypot(coarse_report.errors[name][-1], fine_report.errors[name][-1])
        assert difference < 3 * combined, name


@pytest.mark.slow
def test_standard_errors_shrink_with_trajectory_count():
    small = criteria_report(ppsim.run_ensemble(config(n_atoms=4, chi=0.1, n_traj=16384, grid_step=0.1)))
    large = criteria_report(ppsim.run_ensemble(config(n_atoms=4, chi=0.1, n_traj=65536, grid_step=0.1)))
    ratios = np.concatenate([
        small.errors[name][1:] / large.errors[name][1:] for name in ('N1', 'N2', 'N3')
    ])
    assert np.median(ratios) == pytest.approx(2.0, rel=0.2)


@pytest.mark.slow
def test_populations_stay_real_in_the_mean():
    moments = ppsim.run_ensemble(config(n_atoms=4, chi=0.1, n_traj=20000, grid_step=0.25))
    assert np.all(moments.imaginary_population_ratio() < 3)

import numpy as np
import pytest

from src.analyzers import criteria
from src.constants import SERIES_COLUMNS
from src.errors import DegenerateVarianceError
from src.model.moments import MomentSet, moment_layout

LAYOUT = moment_layout(3)


def product_moments(amplitudes=(0, 0, 0), occupations=(0, 0, 0), covariance=None):
    """Moments of independent wells, each coherent (amplitude) or Fock (occupation)."""
    values = np.zeros((1, LAYOUT.size), dtype=complex)
    alpha = [complex(a) for a in amplitudes]
    mean = [abs(a) ** 2 + n for a, n in zip(alpha, occupations)]
    for i in range(1, 4):
        a = alpha[i - 1]
        values[0, LAYOUT.a(i)] = a
        values[0, LAYOUT.adag(i)] = a.conjugate()
        n = occupations[i - 1]
        values[0, LAYOUT.factorial(i)] = abs(a) ** 4 + n * (n - 1)
        for j in range(1, 4):
            b = alpha[j - 1]
            values[0, LAYOUT.adag_a(i, j)] = mean[i - 1] if i == j else a.conjugate() * b
            if j >= i:
                values[0, LAYOUT.a_a(i, j)] = a * b
                values[0, LAYOUT.adag_adag(i, j)] = (a * b).conjugate()
            if j > i:
                values[0, LAYOUT.number_pair(i, j)] = mean[i - 1] * mean[j - 1]
    return MomentSet(time=[0.0], values=values, modes=3, covariance=covariance)


class TestVacuum:
    def test_witnesses(self):
        table = criteria.witness_table(product_moments())
        assert table['N1'][0] == 0
        assert table['VX1'][0] == 1
        assert table['DSp13'][0] == 4
        assert table['sigma13'][0] == 0
        assert table['zeta13'][0] == -0.25
        assert table['gamma13'][0] == 1

    def test_table_columns(self):
        assert list(criteria.witness_table(product_moments())) == SERIES_COLUMNS[1:]


class TestCoherentProduct:
    def test_no_correlations(self):
        m = product_moments(amplitudes=(1 + 2j, 3, -0.5j))
        assert criteria.hz_xi(m, 1, 3)[0] == pytest.approx(0, abs=1e-12)
        v1, v2, v3, v13 = criteria.number_variances(m)
        assert v1[0] == pytest.approx(5)
        assert v2[0] == pytest.approx(9)
        assert v13[0] == pytest.approx(5 + 0.25)

    def test_minimum_uncertainty(self):
        m = product_moments(amplitudes=(1 + 2j, 3, -0.5j))
        for j in (1, 2, 3):
            vx, vy = criteria.quadrature_variances(m, j)
            assert vx[0] == pytest.approx(1)
            assert vy[0] == pytest.approx(1)
        pair = criteria.quadrature_pair(m, 1, 3)
        assert pair.cov_x[0] == pytest.approx(0, abs=1e-12)
        assert pair.ds_plus[0] == pytest.approx(4)
        assert pair.gamma[0] == pytest.approx(1)


class TestFockProduct:
    def test_number_statistics(self):
        m = product_moments(occupations=(2, 0, 3))
        assert criteria.hz_xi(m, 1, 3)[0] == pytest.approx(-6)
        assert criteria.steering_sigma(m, 1, 3)[0] == pytest.approx(-7)
        assert criteria.steering_sigma(m, 3, 1)[0] == pytest.approx(-7.5)
        assert criteria.bell_zeta(m, 1, 3)[0] == pytest.approx(-8.75)
        assert all(v[0] == pytest.approx(0) for v in criteria.number_variances(m))

    def test_quadratures(self):
        m = product_moments(occupations=(2, 0, 3))
        assert criteria.quadrature_variances(m, 1)[0][0] == pytest.approx(5)
        assert criteria.quadrature_variances(m, 3)[1][0] == pytest.approx(7)
        pair = criteria.quadrature_pair(m, 1, 3)
        assert pair.ds_plus[0] == pytest.approx(24)
        assert pair.gamma[0] == pytest.approx(25)


def test_inferred_product_degenerate():
    with pytest.raises(DegenerateVarianceError):
        criteria.inferred_product(1.0, 0.0, 0.0, 1.0, 1.0, 0.0)


def test_inferred_product_removes_correlation():
    assert criteria.inferred_product(2.0, 2.0, 1.0, 2.0, 2.0, -1.0) == pytest.approx(2.25)


class TestDeltaMethod:
    def covariance(self, scale=1e-4):
        return np.eye(2 * LAYOUT.size)[None] * scale

    def test_linear_quantity(self):
        m = product_moments(occupations=(2, 0, 3), covariance=self.covariance())
        report = criteria.criteria_report(m)
        assert report.errors['N1'][0] == pytest.approx(1e-2, rel=1e-5)

    def test_quadratic_quantity(self):
        m = product_moments(occupations=(2, 0, 3), covariance=self.covariance())
        errors = criteria.delta_method_errors(
            m.values, m.covariance, 3, lambda v: {'square': v.population(1) ** 2})
        assert errors['square'][0] == pytest.approx(2 * 2 * 1e-2, rel=1e-5)

    def test_exact_moments_have_no_errors(self):
        report = criteria.criteria_report(product_moments(occupations=(1, 1, 1)))
        assert report.errors is None
        assert not any(name.endswith('_se') for name in report.columns())

    def test_columns_with_errors(self):
        report = criteria.criteria_report(
            product_moments(occupations=(1, 1, 1), covariance=self.covariance()))
        columns = report.columns()
        assert list(columns)[0] == 't'
        assert 'gamma13_se' in columns
        assert len(columns) == 1 + 2 * (len(SERIES_COLUMNS) - 1)

    def test_flags_negative_variance(self, caplog):
        m = product_moments(occupations=(2, 0, 3), covariance=self.covariance(1e-8))
        m.values[0, LAYOUT.factorial(1)] -= 1.0
        criteria.criteria_report(m)
        assert 'VN1 falls' in caplog.text


def test_requires_three_modes():
    m = MomentSet(time=[0.0], values=np.zeros((1, 17)), modes=2)
    with pytest.raises(ValueError):
        criteria.criteria_report(m)


def test_quadrature_block_covariances():
    block = criteria.quadrature_block(product_moments(occupations=(2, 0, 3)))
    assert block['VX1X3'][0] == pytest.approx(0)
    assert block['VY1Y2'][0] == pytest.approx(0)
    assert block['gamma12'][0] == pytest.approx(25)

import math

import numpy as np
import pytest

from ecoflux.errors import SolverError
from ecoflux.solver import IntegrationSpec, integrate
from ecoflux.solver.dormand_prince import B, C, E


def test_tableau_consistency():
    np.testing.assert_allclose(B.sum(), 1.0)
    np.testing.assert_allclose(E.sum(), 0.0, atol=1e-15)
    assert C[-1] == 1


def test_exponential_decay_on_grid():
    spec = IntegrationSpec.uniform(0.0, 5.0, 51, rtol=1e-10, atol=1e-12)
    result = integrate(lambda t, y: -y, [1.0, 2.0], spec)
    np.testing.assert_array_equal(result.grid, np.linspace(0, 5, 51))
    expected = np.exp(-result.grid)[:, np.newaxis] * [1.0, 2.0]
    np.testing.assert_allclose(result.values, expected, rtol=1e-8, atol=1e-12)
    assert result.values[0, 0] == 1.0
    assert result.stats.steps > 0
    assert result.stats.rhs_evaluations >= 6 * result.stats.steps


def test_dense_output_independent_of_sampling():
    rhs = lambda t, y: np.array([y[1], -y[0]])
    coarse = integrate(rhs, [0.0, 1.0], IntegrationSpec.uniform(0, 10, 3))
    fine = integrate(rhs, [0.0, 1.0], IntegrationSpec.uniform(0, 10, 1001))
    np.testing.assert_allclose(coarse.values[-1], fine.values[-1], atol=1e-12)
    np.testing.assert_allclose(fine.values[:, 0], np.sin(fine.grid), atol=1e-6)
    # The step count does not depend on the number of samples
    assert coarse.stats.steps == fine.stats.steps


def test_time_dependent_rhs():
    spec = IntegrationSpec.uniform(0.0, 2.0, 21)
    result = integrate(lambda t, y: np.array([math.cos(t)]), [0.0], spec)
    np.testing.assert_allclose(result.values[:, 0], np.sin(result.grid), atol=1e-7)


def test_non_finite_rhs_raises_with_time():
    def rhs(t, y):
        return np.array([math.inf if t > 1 else 1.0])

    with pytest.raises(SolverError) as info:
        integrate(rhs, [0.0], IntegrationSpec(0.0, 2.0))
    assert 0 <= info.value.t <= 1


def test_step_limit():
    spec = IntegrationSpec(0.0, 100.0, max_steps=5, max_step=0.1)
    with pytest.raises(SolverError, match='limit'):
        integrate(lambda t, y: -y, [1.0], spec)


def test_blow_up_is_reported():
    spec = IntegrationSpec(0.0, 2.0)
    with pytest.raises(SolverError):
        # y' = y^2, y(0) = 1 has a pole at t = 1
        integrate(lambda t, y: y**2, [1.0], spec)


def test_clipping_removes_small_negatives():
    spec = IntegrationSpec.uniform(0.0, 1.0, 11, atol=1e-6, nonneg_clip=True)
    result = integrate(lambda t, y: np.array([-1e-7]), [0.0], spec)
    assert np.all(result.values >= 0)
    unclipped = integrate(
        lambda t, y: np.array([-1e-7]), [0.0], IntegrationSpec.uniform(0, 1, 11)
    )
    assert unclipped.values[-1, 0] < 0


@pytest.mark.parametrize(
    'kwargs',
    [
        dict(t0=1.0, t1=1.0),
        dict(t0=0.0, t1=1.0, rtol=0),
        dict(t0=0.0, t1=1.0, max_step=-1),
        dict(t0=0.0, t1=1.0, sample_grid=[0.5, 0.2]),
        dict(t0=0.0, t1=1.0, sample_grid=[0.0, 2.0]),
        dict(t0=0.0, t1=math.inf),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        IntegrationSpec(**kwargs)


def test_restricted_keeps_inner_grid():
    spec = IntegrationSpec.uniform(0.0, 1.0, 11)
    part = spec.restricted(0.25, 0.75)
    np.testing.assert_allclose(part.sample_grid, [0.3, 0.4, 0.5, 0.6, 0.7])
    assert part.rtol == spec.rtol
    with pytest.raises(ValueError):
        part.sample_grid[0] = 0.0


def oscillator(t, y):
    return np.array([y[1], -y[0]])


def test_dense_output_matches_stepping_to_each_sample():
    spec = IntegrationSpec.uniform(0.0, 10.0, 11)
    dense = integrate(oscillator, [0.0, 1.0], spec)
    bound = 5 * (spec.atol + spec.rtol * np.abs(dense.values).max())
    for i in range(len(dense.grid) - 1):
        # Restarted from each sample, the run ends on a step at the next one
        part = integrate(
            oscillator,
            dense.values[i],
            IntegrationSpec(dense.grid[i], dense.grid[i + 1]),
        )
        np.testing.assert_allclose(part.values[-1], dense.values[i + 1], atol=bound)


def test_tighter_tolerances_give_smaller_errors():
    errors = []
    for rtol in [1e-5, 1e-7, 1e-9]:
        spec = IntegrationSpec.uniform(0.0, 10.0, 101, rtol=rtol, atol=rtol / 100)
        result = integrate(oscillator, [0.0, 1.0], spec)
        errors.append(np.abs(result.values[:, 0] - np.sin(result.grid)).max())
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-7


def test_quadrature_as_augmented_state():
    # x' = 1 - x from zero, with its running integral e' = x
    spec = IntegrationSpec.uniform(0.0, 5.0, 51, rtol=1e-10, atol=1e-12)
    result = integrate(lambda t, y: np.array([1 - y[0], y[0]]), [0.0, 0.0], spec)
    np.testing.assert_allclose(result.values[:, 0], 1 - np.exp(-result.grid), atol=1e-9)
    assert result.values[-1, 1] - result.values[0, 1] == pytest.approx(
        4 + math.exp(-5), abs=1e-8
    )

import numpy as np
import pytest

from ecoflux.diact import COMPOSITE, SIMPLE, diact_field
from ecoflux.interactions import (
    COMMENSALISM,
    COMPETITION,
    EXPLOITATION,
    NEUTRALISM,
    PAIRWISE,
    Thresholds,
    classify_pair,
    diact_sign_strength,
    global_scale_strengths,
    resolve_induction,
)
from ecoflux.model import parse_model
from ecoflux.partition import solve_decomposed
from ecoflux.solver import IntegrationSpec

SHARED_DONOR = """
[model]
n = 3

[inputs]
1 = 1

[flows]
2<-1 = 1
3<-1 = {second}

[outputs]
2 = 1
3 = 1

[initial]
1 = 1
"""


def shared_donor_system(second):
    model = parse_model(SHARED_DONOR.format(second=second))
    system = solve_decomposed(model, IntegrationSpec.uniform(0.0, 5.0, 51))
    return diact_field(system, variants=('d', 'i', 't')), system


def test_hallam_consumer_exploits_producer(hallam):
    field = diact_field(hallam, kinds=(COMPOSITE,))
    result = classify_pair(field, hallam, (1, 2))
    labels = result.labels()
    assert labels[0] == 'neutralism(2,3)'
    assert set(labels[1:]) == {'exploitation(3,2)'}
    assert result.verdicts() == ['neutralism(2,3)', 'exploitation(3,2)']
    assert np.all(result.exploiter[1:] == 2)
    assert np.all((result.strength[1:] > 0) & (result.strength[1:] <= 1))
    assert result.fired[0] == (NEUTRALISM,)


def test_sign_and_strength(hallam):
    field = diact_field(hallam, kinds=(COMPOSITE,))
    late = hallam.grid > 0
    direct = diact_sign_strength(field, hallam, (2, 1), 'd')
    assert np.all(direct.sign[late] == 1)
    assert direct.sign[0] == 0
    assert np.all((direct.strength[late] > 0) & (direct.strength[late] < 1))
    pairwise = diact_sign_strength(field, hallam, (2, 1), 'd', scale=PAIRWISE)
    np.testing.assert_allclose(pairwise.strength[late], 1.0)
    reverse = diact_sign_strength(field, hallam, (1, 2), 'd')
    np.testing.assert_array_equal(reverse.sign, -direct.sign)
    with pytest.raises(ValueError, match='scale'):
        diact_sign_strength(field, hallam, (2, 1), 'd', scale='local')
    with pytest.raises(ValueError, match='distinct'):
        diact_sign_strength(field, hallam, (1, 1), 'd')


@pytest.mark.parametrize(
    'second, verdict', [(1, COMPETITION), (0.01, COMMENSALISM)]
)
def test_shared_donor(second, verdict):
    field, system = shared_donor_system(second)
    result = classify_pair(field, system, (1, 2))
    assert set(result.verdict[1:]) == {verdict}
    assert np.all(result.donor[1:] == 0)


def test_custom_thresholds_give_mixed_verdicts():
    field, system = shared_donor_system(0.5)
    # mu = 1/3 falls between the default cut-offs
    result = classify_pair(field, system, (1, 2))
    assert set(result.verdict[1:]) == {'mixed'}
    np.testing.assert_allclose(result.strength[1:], 1 / 3)
    strict = classify_pair(field, system, (1, 2), Thresholds(0.3, 0.1))
    assert set(strict.verdict[1:]) == {COMMENSALISM}


def test_hippe_net_exploitation(hippe):
    field = diact_field(hippe, kinds=(COMPOSITE,))
    result = classify_pair(field, hippe, (0, 1))
    assert result.labels()[-1] == 'net exploitation(2,1)'
    assert EXPLOITATION not in result.verdict


def test_thresholds_and_inductions():
    with pytest.raises(ValueError):
        Thresholds(commensalism=0.2, competition=0.5)
    with pytest.raises(ValueError):
        Thresholds(commensalism=1.5)
    assert resolve_induction('single-input') == SIMPLE
    assert resolve_induction('initial-stocks') == 0
    with pytest.raises(ValueError, match='all-inputs'):
        resolve_induction('everything')


def test_global_strengths(hallam):
    field = diact_field(hallam, kinds=(COMPOSITE,))
    forward = global_scale_strengths(field, hallam, (2, 1))
    backward = global_scale_strengths(field, hallam, (1, 2))
    np.testing.assert_allclose(forward.mutualism, backward.mutualism)
    assert np.all(forward.exploitation_inward[1:] > 0)
    np.testing.assert_array_equal(backward.exploitation_inward, 0.0)

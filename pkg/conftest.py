import pytest

from ecoflux.diact import COMPOSITE, SIMPLE, VARIANTS, DiactFlowIntegralBlock
from ecoflux.diact import diact_storages
from ecoflux.model import load_fixture
from ecoflux.partition import ExposureBlock, SystemTotalsBlock, solve_decomposed
from ecoflux.solver import IntegrationSpec


def fixture_spec(model, **overrides):
    s = model.simulate
    settings = dict(
        t0=s.t0, t1=s.t1, samples=s.samples, rtol=s.rtol, atol=s.atol
    )
    settings.update(overrides)
    t0, t1, samples = settings.pop('t0'), settings.pop('t1'), settings.pop('samples')
    return IntegrationSpec.uniform(t0, t1, samples, **settings)


def standard_blocks(n):
    return [
        ExposureBlock(n),
        SystemTotalsBlock(),
        DiactFlowIntegralBlock(n, VARIANTS, (COMPOSITE, SIMPLE)),
    ]


@pytest.fixture(scope='session')
def hippe_model():
    return load_fixture('hippe')


@pytest.fixture(scope='session')
def hippe(hippe_model):
    return solve_decomposed(
        hippe_model, fixture_spec(hippe_model), standard_blocks(hippe_model.n)
    )


@pytest.fixture(scope='session')
def hippe_periodic_model():
    return load_fixture('hippe_periodic')


@pytest.fixture(scope='session')
def hippe_periodic(hippe_periodic_model):
    model = hippe_periodic_model
    return solve_decomposed(model, fixture_spec(model), standard_blocks(model.n))


@pytest.fixture(scope='session')
def hallam_model():
    return load_fixture('hallam')


@pytest.fixture(scope='session')
def hallam(hallam_model):
    model = hallam_model
    return solve_decomposed(model, fixture_spec(model), standard_blocks(model.n))


@pytest.fixture(scope='session')
def chain_model():
    return load_fixture('chain')


@pytest.fixture(scope='session')
def chain(chain_model):
    """The chain model with every diact storage tracked"""
    model = chain_model
    return diact_storages(
        model,
        fixture_spec(model),
        VARIANTS,
        (COMPOSITE, SIMPLE),
        blocks=standard_blocks(model.n),
    )

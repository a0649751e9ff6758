import numpy as np
import pytest

from ecoflux.diact import (
    COMPOSITE,
    SIMPLE,
    VARIANTS,
    check_kind,
    diact_field,
    diact_flows,
    diact_matrices,
    diact_subflows,
)


def test_hippe_direct_distribution(hippe):
    dm = diact_matrices(hippe)
    expected = np.array([[0, 2 / 7], [4 / 5, 0]])
    N_d = dm.N['d'][1:]
    np.testing.assert_allclose(N_d, np.broadcast_to(expected, N_d.shape))


def test_initial_columns_are_masked(hippe, hallam):
    for system in (hippe, hallam):
        dm = diact_matrices(system)
        assert dm.masked[0].all()
        assert not dm.masked[1:].any()
        for variant in VARIANTS:
            np.testing.assert_array_equal(dm.N[variant][0], 0.0)


def test_variant_identities(hallam):
    dm = diact_matrices(hallam)
    for kind in (COMPOSITE, SIMPLE, 0, 2):
        d, i, a, c, t = (diact_flows(dm, v, kind) for v in VARIANTS)
        np.testing.assert_allclose(d + i, t, atol=1e-12)
        np.testing.assert_allclose(a + c, t, atol=1e-12)


def test_subflows_add_up_to_composite(hallam):
    dm = diact_matrices(hallam)
    parts = sum(diact_subflows(dm, l, 't') for l in range(1, hallam.n + 1))
    composite = diact_flows(dm, 't', COMPOSITE)
    np.testing.assert_allclose(parts, composite, rtol=1e-10, atol=1e-14)


def test_direct_composite_and_initial_flows_make_the_actual_flows(hippe):
    dm = diact_matrices(hippe)
    total = diact_flows(dm, 'd', COMPOSITE) + diact_subflows(dm, 0, 'd')
    np.testing.assert_allclose(total[1:], hippe.F[1:], rtol=1e-10)


def test_periodic_initial_cycling_subflow(hippe_periodic):
    dm = diact_matrices(hippe_periodic)
    t = hippe_periodic.grid
    e1, e2, e3 = np.exp(t), np.exp(2 * t), np.exp(3 * t)
    numerator = (
        36 * np.exp(-t) + 80 * e2 - 100 * e1 - 16 * e2 * np.cos(t) + 8 * e2 * np.sin(t)
    )
    denominator = 9 + 50 * e2 - 70 * e3 + 11 * e3 * np.cos(t) - 13 * e3 * np.sin(t)
    expected = -numerator / denominator
    window = (t >= 0.5) & (t <= 10)
    cycling = diact_subflows(dm, 0, 'c')[:, 0, 0]
    np.testing.assert_allclose(cycling[window], expected[window], atol=1e-6)


def test_chain_has_no_cycling(chain):
    field = diact_field(chain)
    np.testing.assert_allclose(field.flow('c', COMPOSITE), 0.0, atol=1e-9)
    np.testing.assert_allclose(field.flow('a'), field.flow('t'), atol=1e-9)
    np.testing.assert_allclose(field.flow('d')[-1], [[0, 0], [1, 0]], atol=1e-6)


def rk4_direct_storage(h, t_end, every):
    """Hand-rolled RK4 for x1' = 1 - x1, s' = x1 - s from zero, keeping every
    `every`-th step"""

    def f(x1, s):
        return 1.0 - x1, x1 - s

    values = [0.0]
    x1 = s = 0.0
    for step in range(1, round(t_end / h) + 1):
        k1 = f(x1, s)
        k2 = f(x1 + h / 2 * k1[0], s + h / 2 * k1[1])
        k3 = f(x1 + h / 2 * k2[0], s + h / 2 * k2[1])
        k4 = f(x1 + h * k3[0], s + h * k3[1])
        x1 += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        s += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if step % every == 0:
            values.append(s)
    return np.array(values)


def test_chain_diact_storages_match_rk4(chain):
    field = diact_field(chain)
    h = 1e-4
    spacing = chain.grid[1] - chain.grid[0]
    every = round(spacing / h)
    within = chain.grid <= 10.0 + 1e-9
    oracle = rk4_direct_storage(h, 10.0, every)
    assert len(oracle) == np.count_nonzero(within)
    # Every flow of the chain is direct and none of it cycles
    for variant in ('d', 'a', 't'):
        storage = field.storage(variant, COMPOSITE)[within, 1, 0]
        np.testing.assert_allclose(storage, oracle, atol=1e-5)
    for variant in ('i', 'c'):
        np.testing.assert_allclose(field.storage(variant, COMPOSITE), 0.0, atol=1e-9)


@pytest.mark.parametrize('name', ['hippe', 'hippe_periodic', 'hallam', 'chain'])
def test_diact_flows_are_nonnegative(request, name):
    system = request.getfixturevalue(name)
    dm = diact_matrices(system)
    for variant in VARIANTS:
        assert dm.N[variant].min() >= -1e-10
    field = diact_field(system)
    for kind in (COMPOSITE, SIMPLE, *range(system.n + 1)):
        for variant in VARIANTS:
            assert np.nanmin(field.flow(variant, kind)) >= -1e-9


def test_diact_storages_are_nonnegative(chain):
    field = diact_field(chain)
    assert field.storages
    for storage in field.storages.values():
        assert storage.min() >= -1e-9
    for integral in field.storage_integrals.values():
        assert np.diff(integral, axis=0).min() >= -1e-8


def test_untracked_storage(hallam):
    field = diact_field(hallam, variants=('d',), kinds=(COMPOSITE,))
    assert not field.has_storage('d', COMPOSITE)
    with pytest.raises(KeyError, match='not tracked'):
        field.storage('d')


def test_consumer_receives_transfer_flow(hallam):
    field = diact_field(hallam, variants=('t',), kinds=(COMPOSITE,))
    flows = field.flow('t')[:, 2, 1]
    assert np.all(flows[hallam.grid > 0.5] > 0)


@pytest.mark.parametrize('kind', ['other', 4, -1, True])
def test_bad_kinds(kind):
    with pytest.raises(ValueError):
        check_kind(kind, 3)

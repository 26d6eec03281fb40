import itertools
import math
import pytest
import numpy as np

from reflectmc.core import graph, models, potentials


def test_potts_weights():
    m = models.potts_model(graph.path(2), 2, math.log(2))
    assert models.edge_weight(m, 0, 1, 1) == pytest.approx(2.0)
    assert models.edge_weight(m, 0, 0, 1) == pytest.approx(1.0)
    assert m.free_vertices == [0, 1]


def test_potts_pinned():
    m = models.potts_model(graph.complete(3, [0]), 3, 1.0, boundary_label=2)
    assert m.site_weights[0].tolist() == [0.0, 0.0, 1.0]
    assert m.free_vertices == [1, 2]
    with pytest.raises(ValueError, match="Boundary label 3"):
        models.potts_model(graph.complete(3, [0]), 3, 1.0, boundary_label=3)


@pytest.mark.parametrize(
    "q, beta, error",
    [
        (  # ts0 - single label
            1,
            1.0,
            "q >= 2",
        ),
        (  # ts1 - infinite coupling
            2,
            np.inf,
            "finite beta",
        ),
    ],
)
def test_potts_invalid(q, beta, error):
    with pytest.raises(ValueError, match=error):
        models.potts_model(graph.path(2), q, beta)


def test_discrete_invalid():
    g = graph.path(2)
    with pytest.raises(ValueError, match="symmetric"):
        models.discrete_model(g, [[1.0, 2.0], [1.0, 1.0]])
    with pytest.raises(ValueError, match="non-negative"):
        models.discrete_model(g, [[1.0, -1.0], [-1.0, 1.0]])
    with pytest.raises(ValueError, match="Site weights of shape"):
        models.discrete_model(g, np.eye(2), np.ones((3, 2)))


def test_hammock_weight():
    m = models.surface_model(graph.path(2, [0]), potentials.hammock())
    assert models.edge_weight(m, 0, 0.3, 1.5) == 0.0
    assert models.edge_weight(m, 0, 0.3, 1.2) == 1.0


def test_spin_weight():
    m = models.spin_on_model(graph.path(2), 2, potentials.linear_spin(1.0))
    e1 = np.array([1.0, 0.0])
    assert models.edge_weight(m, 0, e1, -e1) == pytest.approx(math.exp(-1.0))


@pytest.mark.parametrize(
    "model",
    [
        (  # ts0 - potts
            models.potts_model(graph.cycle(5), 3, 0.7)
        ),
        (  # ts1 - surface
            models.surface_model(graph.grid(4, 4), potentials.quadratic_lipschitz())
        ),
        (  # ts2 - spin
            models.spin_on_model(graph.cycle(5), 3, potentials.linear_spin(1.3))
        ),
    ],
)
def test_h_symmetric(model):
    rng = np.random.default_rng(0)
    E = model.graph.edge_count
    for _ in range(10**4 // E + 1):
        if isinstance(model, models.DiscreteModel):
            a, b = rng.integers(model.q, size=(2, E))
        elif isinstance(model, models.HeightModel):
            a, b = rng.uniform(-1, 1, size=(2, E))
        else:
            a, b = rng.normal(size=(2, E, model.n))
            a /= np.linalg.norm(a, axis=-1, keepdims=True)
            b /= np.linalg.norm(b, axis=-1, keepdims=True)
        assert np.array_equal(model.log_h(a, b), model.log_h(b, a))


def test_surface_invalid():
    U = potentials.hammock()
    with pytest.raises(ValueError, match="non-empty boundary"):
        models.surface_model(graph.path(3), U)
    with pytest.raises(ValueError, match="component must contain"):
        models.surface_model(graph.build_graph(4, [(0, 1), (2, 3)], [0]), U)
    with pytest.raises(ValueError, match="attested finite"):
        flat = potentials.Potential(name="flat", func=lambda x: 0.0 * x)
        models.surface_model(graph.path(3, [0]), flat)
    with pytest.raises(ValueError, match="radii must be positive"):
        models.hammock_mixture_model(graph.path(3, [0]), [1.0, 0.0])


def test_lipschitz_excess():
    m = models.surface_model(graph.path(3, [0]), potentials.hammock())
    assert m.lipschitz_excess(np.array([0.0, 0.5, 1.7])) == pytest.approx(0.2)
    mt = models.hammock_mixture_model(m.graph, [0.5, 2.0])
    assert mt.lipschitz_excess(np.array([0.0, 0.5, 1.7])) == pytest.approx(0.0)


def test_product():
    g = graph.path(3, [0])
    U = potentials.quadratic_lipschitz()
    a = models.surface_model(g, U, 0.0)
    b = models.surface_model(g, U, 0.5)
    p = models.product_model(a, b)
    phi = np.array([[0.0, 0.5], [0.2, 0.4], [0.1, 0.3]])
    ref = a.log_density(phi[:, 0]) + b.log_density(phi[:, 1])
    assert p.log_density(phi) == pytest.approx(ref)
    with pytest.raises(ValueError, match="same graph"):
        models.product_model(a, models.surface_model(graph.path(4, [0]), U))
    with pytest.raises(ValueError, match="share the potential"):
        models.product_model(a, models.surface_model(g, potentials.hammock()))


def lazy_walk(S):
    P = np.zeros((S, S))
    for i in range(S):
        P[i, i] = 0.5
        P[i, (i + 1) % S] += 0.25
        P[i, (i - 1) % S] += 0.25
    return P


@pytest.mark.parametrize(
    "S, n",
    [
        (  # ts0 - lazy walk on Z_6, four steps
            6,
            4,
        ),
        (  # ts1 - lazy walk on Z_3, two steps
            3,
            2,
        ),
    ],
)
def test_markov_path_density(S, n):
    P = lazy_walk(S)
    pi = np.full(S, 1 / S)
    mu = np.arange(1, S + 1) / (S * (S + 1) / 2)
    m = models.markov_chain_model(P, pi, mu, n)
    assert m.n_steps == n
    for path in itertools.product(range(S), repeat=n + 1):
        x = np.array(path)
        ref = mu[x[0]] * np.prod(P[x[:-1], x[1:]])
        dens = math.exp(m.log_density(x)) if ref > 0 else 0.0
        assert dens == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_markov_invalid():
    P = lazy_walk(3)
    pi = np.full(3, 1 / 3)
    mu = np.array([1.0, 0.0, 0.0])
    with pytest.raises(ValueError, match="not stochastic"):
        models.markov_chain_model(P * 2, pi, mu, 2)
    with pytest.raises(ValueError, match="Detailed balance"):
        models.markov_chain_model(P, np.array([0.5, 0.25, 0.25]), mu, 2)
    with pytest.raises(ValueError, match="non-negative"):
        models.markov_chain_model(P, pi, mu, -1)


def test_ising_as_discrete():
    m = models.spin_on_model(graph.path(2, [0]), 1, potentials.linear_spin(math.log(2)))
    d = models.ising_as_discrete(m)
    assert d.weights[0].tolist() == pytest.approx([[2.0, 0.5], [0.5, 2.0]])
    with pytest.raises(ValueError, match="n = 1"):
        models.ising_as_discrete(models.spin_on_model(graph.path(2), 2, m.potential))


def test_sample_hammock_radii():
    g = graph.path(4, [0])
    m = models.surface_model(g, potentials.quadratic_lipschitz())
    phi = np.array([0.0, 0.5, 0.2, -0.3])
    rng = np.random.default_rng(5)
    for _ in range(100):
        t = models.sample_hammock_radii(m, phi, rng).radii
        assert np.all(t >= np.abs(np.diff(phi)))
        assert np.all(t <= 1.0)
    h = models.surface_model(g, potentials.hammock())
    assert np.all(models.sample_hammock_radii(h, phi, rng).radii == 1.0)
    bad = models.surface_model(g, potentials.inverted_quadratic_lipschitz())
    with pytest.raises(ValueError, match="not monotone"):
        models.sample_hammock_radii(bad, phi, rng)

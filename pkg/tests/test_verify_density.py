import pytest
import numpy as np

from reflectmc.core import graph, models, potentials
from reflectmc.core.samplers import ChainSettings
from reflectmc.verify.density import (
    cap_masses,
    check_density_monotonicity,
    check_surface_density_monotonicity,
    isotonic_distance,
)
from reflectmc.verify.verdicts import overall


def test_cap_masses():
    edges = np.linspace(-1.0, 1.0, 11)
    m3 = cap_masses(edges, 3)
    assert m3 == pytest.approx(np.full(10, 0.1), abs=1e-12)
    m2 = cap_masses(edges, 2)
    assert m2.sum() == pytest.approx(1.0)
    assert m2[0] > m2[4]
    assert m2 == pytest.approx(m2[::-1])


def test_isotonic_distance():
    mass = np.ones(3)
    assert isotonic_distance(np.array([0.1, 0.3, 0.6]), mass, True) == 0.0
    p = np.array([0.3, 0.1, 0.6])
    assert isotonic_distance(p, mass, True) == pytest.approx(0.2)
    assert isotonic_distance(p, mass, False) > 0.2


@pytest.mark.parametrize(
    "g, vertex",
    [
        (graph.complete(3, [0]), 2),  # ts0 - triangle
        (graph.grid(3, 3, [0]), 8),  # ts1 - far corner of a grid
        (graph.path(5, [2]), 0),  # ts2 - boundary in the middle
    ],
)
def test_density_ising_exact(g, vertex):
    m = models.spin_on_model(g, 1, potentials.linear_spin(0.8))
    verdicts = check_density_monotonicity(m, ChainSettings(), vertex=vertex)
    assert [v.name for v in verdicts] == ["density-monotone-exact", "ising-embedding"]
    assert verdicts[0].estimate > 0.5
    assert overall(verdicts) == "pass"


def test_density_ising_zero_beta():
    m = models.spin_on_model(graph.path(3, [0]), 1, potentials.linear_spin(0.0))
    verdicts = check_density_monotonicity(m, ChainSettings(), vertex=2)
    assert verdicts[0].estimate == pytest.approx(0.5, abs=1e-12)
    assert overall(verdicts) == "pass"


def test_density_spin():
    m = models.spin_on_model(graph.grid(3, 3, [0]), 3, potentials.linear_spin(1.0))
    settings = ChainSettings(burn_in_sweeps=200, n_samples=3000, seed=4)
    verdicts = check_density_monotonicity(m, settings, vertex=8, n_bins=10)
    assert len(verdicts) == 1
    assert verdicts[0].name == "density-monotone"
    assert verdicts[0].status == "pass"


@pytest.mark.parametrize(
    "model, vertex, error, match",
    [
        (  # ts0 - boundary vertex
            models.spin_on_model(graph.path(3, [0]), 2, potentials.linear_spin(1.0)),
            0,
            ValueError,
            "boundary vertex",
        ),
        (  # ts1 - increasing potential
            models.spin_on_model(graph.path(3, [0]), 2, potentials.linear_spin(-1.0)),
            2,
            ValueError,
            "not non-increasing",
        ),
        (  # ts2 - surface model
            models.surface_model(graph.path(3, [0]), potentials.hammock()),
            2,
            TypeError,
            "spin model",
        ),
    ],
)
def test_density_invalid(model, vertex, error, match):
    with pytest.raises(error, match=match):
        check_density_monotonicity(model, ChainSettings(), vertex=vertex)


@pytest.mark.parametrize(
    "potential",
    [
        potentials.quadratic(),  # ts0 - unbounded support
        potentials.quadratic_lipschitz(),  # ts1 - Lipschitz
    ],
)
def test_surface_density(potential):
    m = models.surface_model(graph.path(6, [0]), potential)
    settings = ChainSettings(burn_in_sweeps=200, n_samples=4000, thinning=2, seed=5)
    verdicts = check_surface_density_monotonicity(m, settings, vertex=5)
    assert len(verdicts) == 1
    assert verdicts[0].status == "pass"


def test_surface_density_invalid():
    m = models.surface_model(graph.path(3, [0]), potentials.hammock())
    with pytest.raises(ValueError, match="boundary vertex"):
        check_surface_density_monotonicity(m, ChainSettings(), vertex=0)
    s = models.spin_on_model(graph.path(3, [0]), 2, potentials.linear_spin(1.0))
    with pytest.raises(TypeError, match="surface model"):
        check_surface_density_monotonicity(s, ChainSettings(), vertex=1)

import math
import pytest
import numpy as np

from reflectmc.core import graph, models, oracle, potentials, reflections
from reflectmc.core.oracle import AbsTail, Barrier, Extremal, Interval, RadiusAtom


def ising_k3(beta):
    return models.potts_model(graph.complete(3), 2, beta)


def test_enumerate_single_edge():
    m = models.potts_model(graph.path(2), 2, math.log(2))
    law = oracle.enumerate_exact(m)
    assert len(law) == 4
    agree = sum(p for phi, p in zip(law.support, law.probability) if phi[0] == phi[1])
    assert agree == pytest.approx(2 / 3, abs=1e-15)


def test_enumerate_pinned():
    m = models.potts_model(graph.complete(3, [0]), 3, 1.0, boundary_label=2)
    law = oracle.enumerate_exact(m)
    assert len(law) == 9
    assert np.all(law.support[:, 0] == 2)


def test_enumerate_overflow():
    m = models.potts_model(graph.grid(3, 3, "none"), 2, 0.5)
    with pytest.raises(oracle.OracleOverflowError, match="exceed the limit"):
        oracle.enumerate_exact(m, limit=100)
    with pytest.raises(oracle.OracleOverflowError):
        oracle.enumerate_joint_es(
            m, reflections.discrete_involution([1, 0]), limit=1000
        )


def test_exact_law_normalised():
    with pytest.raises(ValueError, match="sum to"):
        oracle.ExactLaw(
            support=np.zeros((2, 1), dtype=int), probability=np.array([0.5, 0.4])
        )


def test_joint_es_k3():
    m = ising_k3(math.log(2))
    tau = reflections.discrete_involution([1, 0])
    joint = oracle.enumerate_joint_es(m, tau)
    assert len(joint) == 64
    assert math.fsum(joint.probability) == pytest.approx(1.0, abs=1e-14)
    exact = oracle.enumerate_exact(m)
    marginal = joint.marginal()
    for phi, p in zip(exact.support, exact.probability):
        assert marginal.probability_of(phi) == pytest.approx(p, abs=1e-14)
    df = joint.to_frame()
    assert list(df.columns) == [
        "phi[0]",
        "phi[1]",
        "phi[2]",
        "omega[0]",
        "omega[1]",
        "omega[2]",
        "probability",
    ]


def test_joint_es_free():
    m = models.potts_model(graph.complete(3), 2, 0.0)
    joint = oracle.enumerate_joint_es(m, reflections.discrete_involution([1, 0]))
    open_mass = math.fsum(p for w, p in zip(joint.bonds, joint.probability) if w.any())
    assert open_mass == 0.0


@pytest.mark.parametrize(
    "model, table",
    [
        (  # ts0 - ferromagnetic Ising on K3
            ising_k3(math.log(2)),
            [1, 0],
        ),
        (  # ts1 - antiferromagnetic Ising on K3
            ising_k3(-math.log(2)),
            [1, 0],
        ),
        (  # ts2 - Potts q=3 on a pinned path, swap of 1 and 2
            models.potts_model(graph.path(4, [0]), 3, 1.0),
            [0, 2, 1],
        ),
        (  # ts3 - Potts q=3 on pinned K3, swap of 0 and 1
            models.potts_model(graph.complete(3, [0]), 3, 1.0),
            [1, 0, 2],
        ),
    ],
)
def test_flip_invariance(model, table):
    tau = reflections.discrete_involution(table)
    joint = oracle.enumerate_joint_es(model, tau)
    g = model.graph
    for x in range(g.vertex_count):
        assert oracle.pushforward_equals(joint, oracle.flip_at(g, tau, x)) < 1e-12
    sw = oracle.swendsen_wang_outcomes(g, tau)
    assert oracle.pushforward_equals(joint, sw, keep_bonds=False) < 1e-12


def test_flip_set_invariance():
    m = models.potts_model(graph.path(4, [0]), 2, math.log(2))
    tau = reflections.discrete_involution([1, 0])
    joint = oracle.enumerate_joint_es(m, tau)
    for W in ([], [1], [2, 3], [0, 2], [0, 1, 2, 3]):
        assert oracle.pushforward_equals(
            joint, oracle.flip_set(m.graph, tau, W)
        ) < 1e-12


def test_pushforward_trivial():
    m = models.potts_model(graph.path(3, [0]), 2, 1.0)
    tau = reflections.discrete_involution([1, 0])
    joint = oracle.enumerate_joint_es(m, tau)
    assert oracle.pushforward_equals(joint, lambda phi, omega: phi) == 0.0
    assert oracle.pushforward_equals(joint, oracle.flip_at(m.graph, tau, 0)) == 0.0
    with pytest.raises(ValueError, match="with bonds"):
        oracle.pushforward_equals(oracle.enumerate_exact(m), lambda phi, omega: phi)


def test_flip_breaks_asymmetric_site_measure():
    m = models.discrete_model(
        graph.path(3, [0]),
        np.ones((3, 3)) + np.eye(3),
        site_weights=[1.0, 1.0, 3.0],
        boundary_label=1,
    )
    tau = reflections.discrete_involution([2, 1, 0])
    joint = oracle.enumerate_joint_es(m, tau)
    assert oracle.pushforward_equals(joint, oracle.flip_at(m.graph, tau, 2)) > 1e-3


@pytest.fixture(scope="module")
def hammock_path():
    m = models.surface_model(graph.path(3, [0]), potentials.hammock())
    queries = [
        AbsTail(2, 1.0),
        Interval(2, 1.0, 2.0),
        Barrier(2, 1.0),
        Extremal(((0, 1), (1, 2)), 0.1),
        RadiusAtom(1),
    ]
    return oracle.path_quadrature(m, queries, step=1e-3, self_check=True), queries


def test_quadrature_hammock_path(hammock_path):
    law, queries = hammock_path
    p = law.probabilities
    assert p[queries[0]] == pytest.approx(0.25, abs=5e-3)
    assert p[queries[1]] == pytest.approx(0.125, abs=5e-3)
    assert p[queries[2]] == pytest.approx(0.125, abs=5e-3)
    assert p[queries[3]] == pytest.approx(0.01, abs=2e-3)
    assert p[queries[4]] == pytest.approx(1.0, abs=1e-9)
    assert law.discrepancy is not None and law.discrepancy < 5e-3


def test_quadrature_marginals(hammock_path):
    law, _ = hammock_path
    x = law.heights
    assert law.marginals[0][np.argmin(np.abs(x))] == pytest.approx(1.0)
    mean2 = float(np.sum(x * law.marginals[2]))
    assert mean2 == pytest.approx(0.0, abs=1e-9)
    var1 = float(np.sum(x**2 * law.marginals[1]))
    assert var1 == pytest.approx(1 / 3, abs=5e-3)
    df = law.to_frame()
    assert list(df.columns) == ["height", "phi[0]", "phi[1]", "phi[2]"]


@pytest.mark.parametrize(
    "epsilon",
    [
        0.1,  # ts0
        0.05,  # ts1
    ],
)
def test_quadrature_single_edge(epsilon):
    m = models.surface_model(graph.path(2, [0]), potentials.hammock())
    q = Extremal(((0, 1),), epsilon)
    law = oracle.path_quadrature(m, [q], step=1e-3)
    assert law.probabilities[q] == pytest.approx(epsilon, abs=2e-3)


def test_quadrature_needs_tree():
    m = models.surface_model(graph.grid(4, 4), potentials.hammock())
    with pytest.raises(ValueError, match="tree after contraction"):
        oracle.path_quadrature(m)
    d = models.potts_model(graph.path(2), 2, 1.0)
    with pytest.raises(TypeError, match="surface model"):
        oracle.path_quadrature(d)


def test_interval_weights():
    x = np.array([0.0, 1.0, 2.0])
    w = oracle.interval_weights(x, 1.0, [(0.5, 2.0)])
    assert w.tolist() == pytest.approx([0.0, 1.0, 0.5])

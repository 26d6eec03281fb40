import math
import pytest
import numpy as np

from reflectmc.core import graph, models, potentials
from reflectmc.core.samplers import ChainSettings, Involution
from reflectmc.verify.invariance import (
    check_flip_invariance_exact,
    check_lemma1_continuous,
)
from reflectmc.verify.verdicts import overall


@pytest.mark.parametrize(
    "model, involutions",
    [
        (  # ts0 - pinned Potts on a triangle
            models.potts_model(graph.complete(3, [0]), 3, 1.0),
            [[1, 0, 2], [0, 2, 1]],
        ),
        (  # ts1 - Ising on a path, default transposition
            models.potts_model(graph.path(4, [0]), 2, math.log(2)),
            None,
        ),
        (  # ts2 - antiferromagnet
            models.potts_model(graph.complete(3, [0]), 2, -0.7),
            [[1, 0]],
        ),
    ],
)
def test_flip_invariance_exact(model, involutions):
    verdicts = check_flip_invariance_exact(model, involutions=involutions)
    n = 1 if involutions is None else len(involutions)
    assert len(verdicts) == 4 * n
    assert overall(verdicts) == "pass"
    assert {v.claim for v in verdicts} == {"flip-invariance", "es-marginal"}


def test_flip_invariance_settings_involutions():
    m = models.potts_model(graph.complete(3, [0]), 3, 0.5)
    settings = ChainSettings(involutions=[Involution(table=[2, 1, 0])])
    verdicts = check_flip_invariance_exact(m, settings, subsets=False)
    assert [v.name for v in verdicts] == [
        "flip-component[2,1,0]",
        "swendsen-wang[2,1,0]",
        "es-marginal[2,1,0]",
    ]
    assert overall(verdicts) == "pass"


def test_flip_invariance_asymmetric_site_measure():
    m = models.discrete_model(
        graph.path(3, [0]),
        np.ones((3, 3)) + np.eye(3),
        site_weights=[1.0, 1.0, 3.0],
        boundary_label=1,
    )
    verdicts = check_flip_invariance_exact(m, involutions=[[2, 1, 0]])
    assert overall(verdicts) == "fail"
    flip = [v for v in verdicts if v.name == "flip-component[2,1,0]"][0]
    assert flip.status == "fail"
    assert flip.estimate > 1e-3


def test_flip_invariance_needs_discrete():
    m = models.surface_model(graph.path(3, [0]), potentials.hammock())
    with pytest.raises(TypeError, match="discrete model"):
        check_flip_invariance_exact(m)


def test_flip_invariance_multiple_boundary(caplog):
    m = models.potts_model(graph.path(4, [0, 3]), 2, 1.0)
    verdicts = check_flip_invariance_exact(m)
    assert "Skipping component-or-complement" in caplog.text
    assert len(verdicts) == 3
    assert overall(verdicts) == "pass"


def test_lemma1_continuous_identity():
    m = models.surface_model(graph.path(4, [0]), potentials.hammock())
    settings = ChainSettings(burn_in_sweeps=20, n_samples=200, seed=3, window=1.0)
    verdicts = check_lemma1_continuous(m, settings, identity=True)
    assert len(verdicts) == 4
    for v in verdicts:
        assert v.estimate == 1.0
        assert v.status == "pass"


def test_lemma1_continuous_hammock():
    m = models.surface_model(graph.path(4, [0]), potentials.hammock())
    settings = ChainSettings(
        burn_in_sweeps=200,
        n_samples=1000,
        thinning=2,
        seed=11,
        window=1.5,
        move_mix=[{"kind": "single_site"}, {"kind": "wolff_cluster"}],
    )
    verdicts = check_lemma1_continuous(m, settings)
    assert [v.name for v in verdicts] == [
        "wolff-ks[phi[1]]",
        "wolff-ks[phi[2]]",
        "wolff-ks[phi[3]]",
        "wolff-ks[global]",
    ]
    assert overall(verdicts) == "pass"


@pytest.mark.parametrize(
    "model, names",
    [
        (  # ts0 - hammock on a framed grid
            models.surface_model(graph.grid(5, 5), potentials.hammock()),
            ["phi[6]", "phi[12]", "phi[18]", "global"],
        ),
        (  # ts1 - spin O(2) on a grid pinned at a corner
            models.spin_on_model(graph.grid(4, 4, [0]), 2, potentials.linear_spin(1.0)),
            ["phi[1]", "phi[8]", "phi[15]", "global"],
        ),
    ],
)
def test_lemma1_continuous_grids(model, names):
    settings = ChainSettings(
        burn_in_sweeps=200,
        n_samples=1500,
        thinning=2,
        seed=12,
        window=1.5,
        move_mix=[{"kind": "single_site"}, {"kind": "wolff_cluster"}],
    )
    verdicts = check_lemma1_continuous(model, settings)
    assert [v.name for v in verdicts] == [f"wolff-ks[{n}]" for n in names]
    assert {v.claim for v in verdicts} == {"flip-invariance"}
    assert overall(verdicts) == "pass"

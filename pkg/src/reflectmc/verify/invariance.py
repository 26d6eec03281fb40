"""
.. codeauthor::
    reflectmc authors

Invariance of the :math:`\\tau`-Edwards-Sokal coupling under cluster flips.

For discrete models, :func:`check_flip_invariance_exact` compares the exact joint law
of :math:`(\\varphi, \\omega)` with its image under the flip of the cluster of each
fixed vertex, under the component-or-complement flip of every vertex set, and under
the Swendsen-Wang flip. For continuous models, :func:`check_lemma1_continuous`
compares equilibrium samples before and after one single-cluster move with
two-sample Kolmogorov-Smirnov tests.

.. rubric:: Functions

.. autosummary::

    check_flip_invariance_exact
    check_lemma1_continuous

"""

import itertools
import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.stats import ks_2samp

from reflectmc.core.models import DiscreteModel, ModelSpec
from reflectmc.core.oracle import (
    ORACLE_LIMIT,
    enumerate_exact,
    enumerate_joint_es,
    flip_at,
    flip_set,
    pushforward_equals,
    swendsen_wang_outcomes,
)
from reflectmc.core.reflections import discrete_involution
from reflectmc.core.samplers import ChainSettings, global_observable, wolff_step
from reflectmc.verify.sampling import (
    aux_rng,
    equilibrium_samples,
    scalar_view,
    spread,
    stacked,
)
from reflectmc.verify.verdicts import EXACT_TOL, TestVerdict, judge

logger = logging.getLogger(__name__)

KS_ALPHA = 1e-3


def _tables(model: DiscreteModel, settings, involutions) -> list[list[int]]:
    if involutions is not None:
        return [list(t) for t in involutions]
    if settings is not None and settings.involutions is not None:
        return [list(i.table) for i in settings.involutions]
    t = list(range(model.q))
    t[0], t[1] = 1, 0
    return [t]


def _law_distance(a, b) -> float:
    pa = {phi.tobytes(): p for phi, p in zip(a.support, a.probability)}
    pb = {phi.tobytes(): p for phi, p in zip(b.support, b.probability)}
    return max(abs(pa.get(k, 0.0) - pb.get(k, 0.0)) for k in set(pa) | set(pb))


def check_flip_invariance_exact(
    model: DiscreteModel,
    settings: Optional[ChainSettings] = None,
    *,
    replicas: int = 1,
    threads: Optional[int] = None,
    involutions: Optional[Sequence[Sequence[int]]] = None,
    vertices: Optional[Sequence[int]] = None,
    subsets: bool = True,
    swendsen_wang: bool = True,
    limit: int = ORACLE_LIMIT,
) -> list[TestVerdict]:
    """
    Exact invariance of the joint law under cluster flips.

    Parameters
    ----------
    model
        A discrete model within the oracle limit.

    settings
        Unused apart from providing default involutions.

    involutions
        Label permutations to be used as reflections. Defaults to the involutions of
        ``settings``, or to the transposition of labels ``0`` and ``1``.

    vertices
        Vertices whose cluster is flipped, defaults to all vertices.

    subsets
        Also check the component-or-complement flip for every vertex set. Needs a
        single boundary vertex.

    swendsen_wang
        Also check the Swendsen-Wang flip on the law of :math:`\\varphi`.

    Returns
    -------
    verdicts: list[TestVerdict]
        One verdict per involution and kind of flip; the estimate is the sup-norm
        distance between the laws.

    """
    if not isinstance(model, DiscreteModel):
        raise TypeError(
            f"Exact flip invariance needs a discrete model, got {type(model).__name__}."
        )
    graph = model.graph
    vertices = list(range(graph.vertex_count)) if vertices is None else list(vertices)
    exact = enumerate_exact(model, limit)
    verdicts = []
    for table in _tables(model, settings, involutions):
        tau = discrete_involution(table)
        tag = ",".join(str(t) for t in table)
        joint = enumerate_joint_es(model, tau, limit)
        n = len(joint)

        dist = max(
            (pushforward_equals(joint, flip_at(graph, tau, x)) for x in vertices),
            default=0.0,
        )
        verdicts.append(
            judge(
                f"flip-component[{tag}]",
                "flip-invariance",
                dist,
                0.0,
                EXACT_TOL,
                "<=",
                n,
            )
        )

        if subsets and len(graph.boundary) == 1:
            dist = 0.0
            for r in range(graph.vertex_count + 1):
                for W in itertools.combinations(range(graph.vertex_count), r):
                    dist = max(dist, pushforward_equals(joint, flip_set(graph, tau, W)))
            verdicts.append(
                judge(
                    f"flip-component-or-complement[{tag}]",
                    "flip-invariance",
                    dist,
                    0.0,
                    EXACT_TOL,
                    "<=",
                    n,
                )
            )
        elif subsets:
            logger.warning(
                "Skipping component-or-complement flips: the boundary has %d vertices.",
                len(graph.boundary),
            )

        if swendsen_wang:
            dist = pushforward_equals(
                joint, swendsen_wang_outcomes(graph, tau), keep_bonds=False
            )
            verdicts.append(
                judge(
                    f"swendsen-wang[{tag}]",
                    "flip-invariance",
                    dist,
                    0.0,
                    EXACT_TOL,
                    "<=",
                    n,
                )
            )

        dist = _law_distance(joint.marginal(), exact)
        verdicts.append(
            judge(f"es-marginal[{tag}]", "es-marginal", dist, 0.0, EXACT_TOL, "<=", n)
        )
    return verdicts


def check_lemma1_continuous(
    model: ModelSpec,
    settings: ChainSettings,
    *,
    replicas: int = 1,
    threads: Optional[int] = None,
    vertices: Optional[Sequence[int]] = None,
    alpha: float = KS_ALPHA,
    identity: bool = False,
) -> list[TestVerdict]:
    """
    Statistical invariance of the equilibrium law under one single-cluster move.

    Every stored sample is moved once by :func:`~reflectmc.core.samplers.wolff_step`,
    with the reflection law of ``settings``. The samples before and after the move are
    compared by two-sample Kolmogorov-Smirnov tests on three vertices and on the
    global observable, each at level ``alpha / 4``.

    Parameters
    ----------
    vertices
        Vertices to compare, defaults to three non-boundary vertices spread over the
        graph.

    identity
        Compare the samples with themselves; the statistics are then zero.

    """
    batches = equilibrium_samples(model, settings, replicas, threads)
    before = stacked(batches)
    if identity:
        after = before.copy()
    else:
        rng = aux_rng(settings)
        after = np.stack([wolff_step(model, phi, settings, rng) for phi in before])
    if vertices is None:
        vertices = spread(model.graph.interior, 3)
    observables = {
        f"phi[{v}]": (lambda s, v=v: scalar_view(model, s, v)) for v in vertices
    }
    observables["global"] = lambda s: np.array([global_observable(model, p) for p in s])
    level = alpha / len(observables)
    verdicts = []
    for name, func in observables.items():
        res = ks_2samp(func(before), func(after))
        p = 1.0 if math.isnan(res.pvalue) else float(res.pvalue)
        verdicts.append(
            judge(
                f"wolff-ks[{name}]",
                "flip-invariance",
                p,
                0.0,
                level,
                ">=",
                len(before),
                settings.seed,
                note=f"KS statistic {res.statistic:.4g}",
            )
        )
    return verdicts

"""
.. codeauthor::
    reflectmc authors

One-sidedness of the open clusters of the :math:`\\tau`-Edwards-Sokal coupling.

Monotone surface potentials, non-increasing spin potentials and convex potentials
under cluster swapping all produce clusters that lie on one side of the reflection;
this is the property all the inequalities rely on. A model without it, such as a
surface with a non-monotone potential, produces violations.

.. rubric:: Functions

.. autosummary::

    check_cluster_sides
    count_side_violations

"""

import logging
from typing import Optional

import numpy as np

from reflectmc.core.models import ModelSpec
from reflectmc.core.reflections import cluster_side_check, sample_bonds
from reflectmc.core.samplers import ChainSettings, draw_reflection
from reflectmc.verify.sampling import aux_rng, equilibrium_samples, stacked
from reflectmc.verify.verdicts import TestVerdict, judge

logger = logging.getLogger(__name__)


def count_side_violations(
    model: ModelSpec,
    settings: ChainSettings,
    samples: np.ndarray,
    rng: np.random.Generator,
) -> tuple[int, int]:
    """
    Number of sampled :math:`(\\varphi, \\omega)` pairs with a two-sided cluster.

    For every configuration a reflection is drawn from the law of ``settings`` and
    the bonds are sampled given the configuration.

    Returns
    -------
    (violations, pairs): tuple[int, int]

    """
    bad = 0
    for phi in samples:
        reflection = draw_reflection(model, settings, rng)
        omega = sample_bonds(model, reflection, phi, rng)
        report = cluster_side_check(model, reflection, phi, omega)
        bad += int(not report.ok)
    if bad > 0:
        logger.debug("%d of %d pairs have two-sided clusters.", bad, len(samples))
    return bad, len(samples)


def check_cluster_sides(
    model: ModelSpec,
    settings: ChainSettings,
    *,
    replicas: int = 1,
    threads: Optional[int] = None,
    pairs: Optional[int] = None,
    bonds_per_sample: int = 1,
) -> list[TestVerdict]:
    """
    Checks that no sampled cluster crosses the reflection.

    Parameters
    ----------
    pairs
        Number of stored samples used, defaults to all of them.

    bonds_per_sample
        Number of independent reflections and bond configurations drawn for every
        stored sample.

    """
    if bonds_per_sample < 1:
        raise ValueError(
            f"Need at least one bond draw per sample, got {bonds_per_sample}."
        )
    samples = stacked(equilibrium_samples(model, settings, replicas, threads))
    if pairs is not None:
        samples = samples[:pairs]
    samples = np.repeat(samples, bonds_per_sample, axis=0)
    bad, total = count_side_violations(model, settings, samples, aux_rng(settings, 1))
    return [
        judge(
            "cluster-sides",
            "cluster-one-sided",
            bad,
            0.0,
            0.0,
            "~=",
            total,
            settings.seed,
            f"{bad} of {total} pairs with a two-sided cluster",
        )
    ]

"""
.. codeauthor::
    reflectmc authors

Hammock-mixture representation of monotone surfaces.

A surface with monotone potential :math:`U` is a mixture, over independent per-edge
radii :math:`t_e` with law given by the Stieltjes measure of :math:`e^{-U}`, of uniform
Lipschitz surfaces with :math:`|\\nabla_e\\varphi| \\le t_e`. Alternating a draw of the
radii given :math:`\\varphi` with a sweep of the uniform surface given the radii
therefore leaves the law of :math:`\\varphi` unchanged.

.. rubric:: Functions

.. autosummary::

    check_mixture_decomposition

"""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.stats import ks_2samp

from reflectmc.core.graph import contract_boundary, is_tree
from reflectmc.core.models import (
    HeightModel,
    hammock_mixture_model,
    sample_hammock_radii,
)
from reflectmc.core.oracle import Interval, RadiusAtom, path_quadrature
from reflectmc.core.samplers import ChainSettings, batch_means, single_site_sweep
from reflectmc.verify.sampling import aux_rng, equilibrium_samples, spread
from reflectmc.verify.verdicts import TestVerdict, judge

logger = logging.getLogger(__name__)

KS_ALPHA = 1e-3
ATOM_TOL = 1e-12


def remix(
    model: HeightModel,
    phi: np.ndarray,
    rng: np.random.Generator,
    sweeps: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """
    One alternation :math:`\\varphi \\to t \\to \\varphi'`.

    Returns
    -------
    (phi, radii): tuple[np.ndarray, np.ndarray]

    """
    radii = sample_hammock_radii(model, phi, rng)
    inner = hammock_mixture_model(model.graph, radii, model.boundary_height)
    for _ in range(sweeps):
        phi = single_site_sweep(inner, phi, rng)
    return phi, radii.radii


def check_mixture_decomposition(
    model: HeightModel,
    settings: ChainSettings,
    *,
    replicas: int = 1,
    threads: Optional[int] = None,
    vertices: Optional[Sequence[int]] = None,
    sweeps: int = 1,
    alpha: float = KS_ALPHA,
    oracle_points: Optional[Sequence[float]] = None,
    atom_edge: Optional[int] = None,
) -> list[TestVerdict]:
    """
    Consistency of the hammock-mixture alternation with direct sampling.

    Parameters
    ----------
    model
        Surface model with a monotone potential of finite mixing mass.

    vertices
        Vertices compared by two-sample Kolmogorov-Smirnov tests at level
        ``alpha / len(vertices)``; defaults to three vertices off the boundary.

    sweeps
        Number of sweeps of the uniform surface per alternation.

    oracle_points
        Heights :math:`x` at which :math:`P(\\varphi_v < x)` of the alternated samples
        is compared with :func:`~reflectmc.core.oracle.path_quadrature`, for every
        compared vertex; needs a tree after contracting the boundary.

    atom_edge
        Edge at which the probability of the maximal radius is compared with the
        quadrature oracle.

    Returns
    -------
    verdicts: list[TestVerdict]

    """
    if not isinstance(model, HeightModel):
        raise TypeError(
            f"Mixture decomposition needs a surface model, got {type(model).__name__}."
        )
    if not model.potential.is_monotone:
        raise ValueError(f"Potential '{model.potential.name}' is not monotone.")
    if not model.potential.is_lipschitz_support:
        logger.warning(
            "Potential '%s' has unbounded support; its mixing measure must be finite.",
            model.potential.name,
        )
    batches = equilibrium_samples(model, settings, replicas, threads)
    rng = aux_rng(settings, 3)
    direct = []
    mixed = []
    radii = []
    for b in batches:
        out = [remix(model, phi, rng, sweeps) for phi in b.samples]
        direct.append(b.samples)
        mixed.append(np.stack([o[0] for o in out]))
        radii.append(np.stack([o[1] for o in out]))
    before = np.concatenate(direct)
    after = np.concatenate(mixed)
    n = len(before)
    seed = settings.seed
    if vertices is None:
        vertices = spread(model.graph.interior, 3)
    level = alpha / max(len(vertices), 1)
    verdicts = []
    for v in vertices:
        res = ks_2samp(before[:, v], after[:, v])
        p = 1.0 if math.isnan(res.pvalue) else float(res.pvalue)
        verdicts.append(
            judge(
                f"mixture-ks[phi[{v}]]",
                "mixture-decomposition",
                p,
                0.0,
                level,
                ">=",
                n,
                seed,
                f"KS statistic {res.statistic:.4g}",
            )
        )

    queries = []
    if oracle_points or atom_edge is not None:
        if not is_tree(contract_boundary(model.graph)):
            raise ValueError(
                "Quadrature oracle needs a tree after contracting the boundary."
            )
        points = oracle_points or []
        queries = [Interval(v, -np.inf, x) for v in vertices for x in points]
        if atom_edge is not None:
            queries.append(RadiusAtom(int(atom_edge)))
        law = path_quadrature(model, queries, self_check=True)
        for q in queries:
            if isinstance(q, Interval):
                hits = [(m[:, q.vertex] < q.hi).astype(float) for m in mixed]
                est, se = batch_means(hits)
                name = f"mixture-oracle[phi[{q.vertex}] < {q.hi:g}]"
            else:
                top = model.scale([q.edge])[0] * model.potential.support
                hits = [(r[:, q.edge] >= top - ATOM_TOL).astype(float) for r in radii]
                est, se = batch_means(hits)
                name = f"mixture-atom[{q.edge}]"
            verdicts.append(
                judge(
                    name,
                    "mixture-decomposition",
                    est,
                    se,
                    law.probabilities[q],
                    "~=",
                    n,
                    seed,
                    f"quadrature step {law.step:g}",
                )
            )
    return verdicts

"""
.. codeauthor::
    reflectmc authors

Monotone densities.

In a spin :math:`O(n)` model with non-increasing potential and boundary spins at
:math:`e_1`, the density of :math:`\\varphi_v` with respect to the uniform measure on
the sphere is a non-decreasing function of :math:`\\langle\\varphi_v, e_1\\rangle`. In a
random surface with monotone potential, :math:`|\\varphi_x|` has a non-increasing
density.

Both claims are tested through the weighted :math:`L^1` distance between a histogram
estimate of the density and its isotonic regression, computed with
:func:`scipy.optimize.isotonic_regression`. Spin histograms are reweighted by the
exact uniform mass of each bin, from the regularised incomplete beta function.

.. rubric:: Functions

.. autosummary::

    check_density_monotonicity
    check_surface_density_monotonicity

"""

import itertools
import logging
import math
from typing import Optional

import numpy as np
from scipy.optimize import isotonic_regression
from scipy.special import betainc

from reflectmc.core.models import (
    HeightModel,
    SphereModel,
    ising_as_discrete,
    spin_on_model,
)
from reflectmc.core.oracle import ORACLE_LIMIT, OracleOverflowError, enumerate_exact
from reflectmc.core.potentials import linear_spin
from reflectmc.core.samplers import ChainSettings, batch_means
from reflectmc.verify.sampling import aux_rng, equilibrium_samples, estimate, stacked
from reflectmc.verify.verdicts import EXACT_TOL, TestVerdict, judge

logger = logging.getLogger(__name__)

NULL_FACTOR = 3.0
BOOTSTRAP = 1000
BOOTSTRAP_LEVEL = 0.999


def cap_masses(edges: np.ndarray, n: int) -> np.ndarray:
    """Uniform-sphere mass of each bin of :math:`\\langle\\varphi, e_1\\rangle`."""
    a = 0.5 * (n - 1)
    cdf = betainc(a, a, np.clip((1.0 + edges) / 2.0, 0.0, 1.0))
    return np.diff(cdf)


def isotonic_distance(p: np.ndarray, mass: np.ndarray, increasing: bool) -> float:
    """
    Weighted :math:`L^1` distance between the density ``p / mass`` and the nearest
    monotone density, weighted by ``mass``.
    """
    keep = mass > 0
    d = p[keep] / mass[keep]
    fit = isotonic_regression(d, weights=mass[keep], increasing=increasing).x
    return float(np.sum(mass[keep] * np.abs(d - fit)))


def _spin_histogram(samples: np.ndarray, vertex: int, edges: np.ndarray) -> np.ndarray:
    t = np.clip(samples[:, vertex, 0], -1.0, 1.0)
    counts, _ = np.histogram(t, bins=edges)
    return counts / max(t.size, 1)


def _ising_direct(model: SphereModel, vertex: int) -> float:
    """:math:`P(\\varphi_v = +1)` by summation over all :math:`\\pm1` configurations."""
    graph = model.graph
    free = graph.interior
    if 2 ** len(free) > ORACLE_LIMIT:
        raise OracleOverflowError(f"2^{len(free)} configurations exceed the limit.")
    logw = []
    plus = []
    for signs in itertools.product([1.0, -1.0], repeat=len(free)):
        phi = np.ones((graph.vertex_count, 1))
        phi[free, 0] = signs
        logw.append(model.log_density(phi))
        plus.append(phi[vertex, 0] > 0)
    logw = np.array(logw)
    w = np.exp(logw - logw.max())
    return math.fsum(w[np.array(plus)]) / math.fsum(w)


def _ising_exact(model: SphereModel, vertex: int) -> list[TestVerdict]:
    law = enumerate_exact(ising_as_discrete(model))
    p_plus = math.fsum(law.probability[law.support[:, vertex] == 0])
    direct = _ising_direct(model, vertex)
    return [
        judge(
            "density-monotone-exact",
            "spin-density-monotone",
            p_plus,
            0.0,
            0.5,
            ">=",
            len(law),
            None,
            "P(phi_v = +1) >= 1/2",
        ),
        judge(
            "ising-embedding",
            "spin-density-monotone",
            p_plus,
            0.0,
            direct,
            "~=",
            len(law),
            None,
            "discrete enumeration against direct summation",
        ),
    ]


def check_density_monotonicity(
    model: SphereModel,
    settings: ChainSettings,
    *,
    replicas: int = 1,
    threads: Optional[int] = None,
    vertex: int = 0,
    n_bins: int = 20,
) -> list[TestVerdict]:
    """
    Monotonicity of the density of a spin in the direction of the boundary spins.

    For :math:`n = 1` the claim reads :math:`P(\\varphi_v = +1) \\ge 1/2` and is checked
    exactly by enumeration, cross-checked against a direct summation over
    :math:`\\pm1` configurations; graphs beyond the oracle limit fall back to sampling.

    For :math:`n \\ge 2` the isotonic distance of the reweighted histogram of
    :math:`\\langle\\varphi_v, e_1\\rangle` has to stay below :data:`NULL_FACTOR` times
    the larger of the increasing and decreasing isotonic distances of a
    :math:`\\beta = 0` run with the same settings and binning.

    Parameters
    ----------
    model
        Spin model with a non-increasing potential.

    vertex
        Non-boundary vertex :math:`v`.

    n_bins
        Number of bins of :math:`[-1, 1]`.

    Returns
    -------
    verdicts: list[TestVerdict]

    """
    if not isinstance(model, SphereModel):
        raise TypeError(
            f"Density monotonicity needs a spin model, got {type(model).__name__}."
        )
    if model.n < 1:
        raise ValueError(f"Spin dimension must be >= 1, got {model.n}.")
    if vertex in model.graph.boundary:
        raise ValueError(f"Vertex {vertex} is a boundary vertex.")
    if not model.potential.is_non_increasing:
        raise ValueError(
            f"Spin potential '{model.potential.name}' is not non-increasing."
        )
    if model.n == 1:
        try:
            return _ising_exact(model, vertex)
        except OracleOverflowError:
            logger.warning("Graph too large for enumeration, sampling the n = 1 model.")
        batches = equilibrium_samples(model, settings, replicas, threads)
        p, se, n = estimate(batches, lambda s: (s[:, vertex, 0] > 0).astype(float))
        return [
            judge(
                "density-monotone",
                "spin-density-monotone",
                p,
                se,
                0.5,
                ">=",
                n,
                settings.seed,
                "P(phi_v = +1) >= 1/2",
            )
        ]

    edges = np.linspace(-1.0, 1.0, n_bins + 1)
    mass = cap_masses(edges, model.n)
    samples = stacked(equilibrium_samples(model, settings, replicas, threads))
    dist = isotonic_distance(_spin_histogram(samples, vertex, edges), mass, True)

    null = spin_on_model(model.graph, model.n, linear_spin(0.0))
    ns = stacked(equilibrium_samples(null, settings, replicas, threads))
    p0 = _spin_histogram(ns, vertex, edges)
    null_dist = max(
        isotonic_distance(p0, mass, True), isotonic_distance(p0, mass, False)
    )
    threshold = NULL_FACTOR * null_dist
    logger.info("Isotonic distance %.4g, null distance %.4g.", dist, null_dist)
    return [
        judge(
            "density-monotone",
            "spin-density-monotone",
            dist,
            0.0,
            threshold,
            "<=",
            len(samples),
            settings.seed,
            f"null distance {null_dist:.4g}",
        )
    ]


def check_surface_density_monotonicity(
    model: HeightModel,
    settings: ChainSettings,
    *,
    replicas: int = 1,
    threads: Optional[int] = None,
    vertex: int = 0,
    n_bins: int = 20,
) -> list[TestVerdict]:
    """
    Monotonicity of the density of :math:`|\\varphi_x|`.

    The histogram of :math:`|\\varphi_x|` on :math:`[0, \\max|\\varphi_x|]` is fitted
    by a non-increasing density. The threshold for the isotonic distance is the
    :data:`BOOTSTRAP_LEVEL` quantile of the distances of :data:`BOOTSTRAP` multinomial
    resamples from the fitted density, each of the effective sample size estimated by
    batch means.

    Parameters
    ----------
    model
        Surface model with a monotone potential.

    vertex
        Non-boundary vertex :math:`x`.

    n_bins
        Number of bins.

    Returns
    -------
    verdicts: list[TestVerdict]

    """
    if not isinstance(model, HeightModel):
        raise TypeError(
            f"Surface density needs a surface model, got {type(model).__name__}."
        )
    if vertex in model.graph.boundary:
        raise ValueError(f"Vertex {vertex} is a boundary vertex.")
    if not model.potential.is_monotone:
        logger.warning("Potential '%s' is not monotone.", model.potential.name)
    batches = equilibrium_samples(model, settings, replicas, threads)
    values = [np.abs(b.samples[:, vertex] - model.boundary_height) for b in batches]
    a = np.concatenate(values)
    top = float(a.max())
    if not top > 0:
        raise ValueError(f"Heights at vertex {vertex} are all at the boundary height.")
    edges = np.linspace(0.0, top, n_bins + 1)
    edges[-1] = np.nextafter(top, np.inf)
    width = np.diff(edges)
    counts, _ = np.histogram(a, bins=edges)
    p = counts / a.size
    dist = isotonic_distance(p, width, False)

    _, se = batch_means(values)
    var = float(np.var(a))
    n_eff = a.size if not se > 0 else int(min(a.size, max(var / se**2, n_bins)))
    fit = isotonic_regression(p / width, weights=width, increasing=False).x
    q = np.clip(fit * width, 0.0, None)
    q /= q.sum()
    rng = aux_rng(settings, 2)
    boot = [
        isotonic_distance(rng.multinomial(n_eff, q) / n_eff, width, False)
        for _ in range(BOOTSTRAP)
    ]
    threshold = float(np.quantile(boot, BOOTSTRAP_LEVEL))
    threshold = max(threshold, EXACT_TOL)
    logger.info("Isotonic distance %.4g, bootstrap threshold %.4g.", dist, threshold)
    return [
        judge(
            "surface-density-monotone",
            "surface-density-monotone",
            dist,
            0.0,
            threshold,
            "<=",
            a.size,
            settings.seed,
            f"effective sample size {n_eff}",
        )
    ]

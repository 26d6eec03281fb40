"""
.. codeauthor::
    reflectmc authors

Equilibrium samples shared between the checks of a suite, and estimators on them.

"""

import logging
from typing import Callable, Optional

import numpy as np

from reflectmc.core.models import ModelSpec, SphereModel, ProductModel
from reflectmc.core.samplers import (
    ChainSettings,
    SampleBatch,
    batch_means,
    replica_seed,
    run_replicas,
)

logger = logging.getLogger(__name__)

_cache: dict = {}

AUX_STREAM = 2**32


def clear_cache() -> None:
    """"""
    _cache.clear()


def equilibrium_samples(
    model: ModelSpec,
    settings: ChainSettings,
    replicas: int = 1,
    threads: Optional[int] = None,
) -> list[SampleBatch]:
    """
    Replica batches of ``model`` under ``settings``, computed once per
    model, settings and replica count.
    """
    key = (id(model), settings.model_dump_json(), replicas)
    if key not in _cache:
        logger.debug("Sampling %d replicas of %s.", replicas, type(model).__name__)
        _cache[key] = (model, run_replicas(model, settings, replicas, threads))
    return _cache[key][1]


def aux_rng(settings: ChainSettings, stream: int = 0) -> np.random.Generator:
    """Generator for the randomness of a check, independent of the chains."""
    return np.random.default_rng(replica_seed(settings.seed, AUX_STREAM + stream))


def estimate(
    batches: list[SampleBatch],
    func: Callable[[np.ndarray], np.ndarray],
) -> tuple[float, float, int]:
    """
    Mean of a per-sample statistic with its batch-means standard error.

    Parameters
    ----------
    batches
        Replica batches.

    func
        Maps the stacked samples of one replica to one value per sample.

    Returns
    -------
    (mean, std_error, n_samples): tuple[float, float, int]

    """
    values = [np.asarray(func(b.samples), dtype=float) for b in batches]
    mean, se = batch_means(values)
    return mean, se, int(sum(v.size for v in values))


def stacked(batches: list[SampleBatch]) -> np.ndarray:
    """All samples of all replicas, in replica order."""
    return np.concatenate([b.samples for b in batches])


def scalar_view(model: ModelSpec, samples: np.ndarray, vertex: int) -> np.ndarray:
    """
    A real observable at ``vertex``: the height, the first spin coordinate, or the
    difference of the two copies of a product.
    """
    if isinstance(model, SphereModel):
        return samples[:, vertex, 0]
    if isinstance(model, ProductModel):
        return samples[:, vertex, 0] - samples[:, vertex, 1]
    return samples[:, vertex].astype(float)


def spread(vertices: list[int], k: int) -> list[int]:
    """Up to ``k`` vertices spread evenly over the list."""
    if len(vertices) <= k:
        return list(vertices)
    idx = np.linspace(0, len(vertices) - 1, k).round().astype(int)
    return [vertices[i] for i in idx]

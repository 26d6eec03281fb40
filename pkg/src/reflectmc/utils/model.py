"""
.. codeauthor::
    reflectmc authors

Construction of graphs, potentials and models from the `recipe` blocks in
:mod:`reflectmc.utils.schema`.

"""

import logging

from reflectmc.core import graph as graphs
from reflectmc.core.graph import Graph
from reflectmc.core.models import (
    ModelSpec,
    discrete_model,
    markov_chain_model,
    potts_model,
    product_model,
    spin_on_model,
    surface_model,
)
from reflectmc.core.potentials import Potential, by_name, linear_spin
from reflectmc.utils import schema
from reflectmc.utils.load import load_edges, load_potential

logger = logging.getLogger(__name__)


def build_graph(spec: schema.GraphSpec) -> Graph:
    """"""
    boundary = spec.boundary
    if spec.kind == "grid":
        return graphs.grid(
            spec.width, spec.height, "frame" if boundary is None else boundary
        )
    if spec.kind == "file":
        return load_edges(spec.path, spec.n, boundary)
    boundary = boundary or []
    if spec.kind == "path":
        return graphs.path(spec.n, boundary)
    elif spec.kind == "cycle":
        return graphs.cycle(spec.n, boundary)
    elif spec.kind == "complete":
        return graphs.complete(spec.n, boundary)
    elif spec.kind == "tree":
        return graphs.random_tree(spec.n, spec.seed, boundary)
    elif spec.kind == "edges":
        return graphs.build_graph(spec.n, spec.edges, boundary)


def build_potential(spec: schema.PotentialSpec) -> Potential:
    """"""
    if spec.name is not None:
        return by_name(spec.name)
    return load_potential(spec.table)


def build_model(spec) -> ModelSpec:
    """
    Builds the model described by a `recipe` model block.

    Parameters
    ----------
    spec
        One of the model blocks of :mod:`reflectmc.utils.schema`.

    Returns
    -------
    model: ModelSpec

    """
    logger.debug("building a '%s' model", spec.family)
    if spec.family == "potts":
        return potts_model(
            build_graph(spec.graph), spec.q, spec.beta, spec.boundary_label
        )
    elif spec.family == "discrete":
        return discrete_model(
            build_graph(spec.graph),
            spec.weights,
            spec.site_weights,
            spec.boundary_label,
        )
    elif spec.family == "surface":
        return surface_model(
            build_graph(spec.graph),
            build_potential(spec.potential),
            spec.boundary_height,
        )
    elif spec.family == "spin":
        return spin_on_model(build_graph(spec.graph), spec.n, linear_spin(spec.beta))
    elif spec.family == "product":
        first = build_model(spec.first)
        second = build_model(spec.second.model_copy(update={"graph": spec.first.graph}))
        return product_model(first, second)
    elif spec.family == "markov":
        return markov_chain_model(
            spec.transition, spec.stationary, spec.initial, spec.n_steps
        )
    raise ValueError(f"Unknown model family '{spec.family}'.")

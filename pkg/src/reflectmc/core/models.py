"""
.. codeauthor::
    reflectmc authors

Model families of the general framework

.. math::

    d\\mu(\\varphi) \\propto \\prod_{\\{v,w\\}\\in E} h_{\\{v,w\\}}(\\varphi_v, \\varphi_w)
    \\prod_{v\\in V} d\\lambda_v(\\varphi_v),

with single-site measures :math:`\\lambda_v` and symmetric edge interactions
:math:`h`. Boundary vertices carry point masses at their pinned value.

Configurations are :class:`numpy.ndarray` objects with the vertex as the leading
axis: integer labels of shape ``(V,)`` for discrete models, heights of shape ``(V,)``,
unit vectors of shape ``(V, n)`` for spins, and shape ``(V, 2, ...)`` for products.

.. rubric:: Functions

.. autosummary::

    potts_model
    discrete_model
    surface_model
    hammock_mixture_model
    spin_on_model
    product_model
    markov_chain_model
    ising_as_discrete
    edge_weight
    sample_hammock_radii

"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from reflectmc.core.graph import Graph, path, components_meet_boundary
from reflectmc.core.potentials import Potential, SpinPotential, hammock

logger = logging.getLogger(__name__)

MARKOV_TOL = 1e-12
UNIT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Base class of all models; holds the graph."""

    graph: Graph

    def log_h(self, a: np.ndarray, b: np.ndarray, edges=None) -> np.ndarray:
        """
        Logarithm of the edge interaction, vectorised over edges.

        ``a`` and ``b`` hold the states at the two endpoints of each edge listed in
        ``edges`` (all edges by default), in the order of :attr:`Graph.edges`.
        """
        raise NotImplementedError

    def endpoint_states(self, phi: np.ndarray):
        """States at the first and second endpoint of every edge."""
        ea = self.graph.edge_array
        return phi[ea[:, 0]], phi[ea[:, 1]]

    def log_density(self, phi: np.ndarray) -> float:
        """Unnormalised log-density with respect to the reference measures."""
        a, b = self.endpoint_states(phi)
        return float(np.sum(self.log_h(a, b)))


@dataclass(frozen=True, eq=False)
class DiscreteModel(ModelSpec):
    """
    Finite state space :math:`\\{0, \\ldots, q-1\\}` with per-edge weight matrices and
    per-vertex site weights.
    """

    q: int
    weights: np.ndarray
    site_weights: np.ndarray
    name: str = "discrete"

    def __post_init__(self):
        E, V, q = self.graph.edge_count, self.graph.vertex_count, self.q
        if self.weights.shape != (E, q, q):
            raise ValueError(
                f"Edge weights of shape {self.weights.shape} do not match {(E, q, q)}."
            )
        if self.site_weights.shape != (V, q):
            raise ValueError(
                f"Site weights of shape {self.site_weights.shape} "
                f"do not match {(V, q)}."
            )
        for arr, what in ((self.weights, "Edge"), (self.site_weights, "Site")):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"{what} weights must be finite and non-negative.")
        if not np.array_equal(self.weights, np.swapaxes(self.weights, 1, 2)):
            raise ValueError("Edge weights must be symmetric matrices.")
        if np.any(self.site_weights.sum(axis=1) <= 0):
            raise ValueError("Every vertex needs a site measure with positive mass.")

    @property
    def free_vertices(self) -> list[int]:
        """Vertices whose site measure is not a point mass."""
        nz = np.count_nonzero(self.site_weights, axis=1)
        return [int(v) for v in np.flatnonzero(nz > 1)]

    def h(self, a, b, edges=None) -> np.ndarray:
        e = np.arange(self.graph.edge_count) if edges is None else np.asarray(edges)
        return self.weights[e, np.asarray(a), np.asarray(b)]

    def log_h(self, a, b, edges=None) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.h(a, b, edges))

    def log_density(self, phi: np.ndarray) -> float:
        with np.errstate(divide="ignore"):
            site = np.log(self.site_weights[np.arange(self.graph.vertex_count), phi])
        return super().log_density(phi) + float(np.sum(site))


@dataclass(frozen=True, eq=False)
class MarkovChainModel(DiscreteModel):
    """A reversible Markov chain path, seen as a discrete model on a path graph."""

    transition: Optional[np.ndarray] = None
    stationary: Optional[np.ndarray] = None
    initial: Optional[np.ndarray] = None

    @property
    def n_steps(self) -> int:
        return self.graph.vertex_count - 1


@dataclass(frozen=True, eq=False)
class HeightModel(ModelSpec):
    """
    Random surface with potential :math:`U`, pinned at ``boundary_height`` on the
    boundary. Optional per-edge ``radii`` :math:`t_e` rescale the potential as
    :math:`U(x / t_e)`.
    """

    potential: Potential
    boundary_height: float = 0.0
    radii: Optional[np.ndarray] = None

    def scale(self, edges=None) -> np.ndarray:
        if self.radii is None:
            n = self.graph.edge_count if edges is None else len(np.atleast_1d(edges))
            return np.ones(n)
        return self.radii if edges is None else self.radii[np.asarray(edges)]

    def log_h(self, a, b, edges=None) -> np.ndarray:
        d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))
        return -self.potential(d / self.scale(edges))

    def lipschitz_excess(self, phi: np.ndarray) -> float:
        """Largest value of :math:`|\\nabla_e\\varphi| - t_e` over all edges."""
        if self.graph.edge_count == 0:
            return -np.inf
        a, b = self.endpoint_states(phi)
        return float(np.max(np.abs(a - b) - self.scale()))


@dataclass(frozen=True, eq=False)
class SphereModel(ModelSpec):
    """Spin :math:`O(n)` model, boundary spins pinned at :math:`e_1`."""

    n: int
    potential: SpinPotential

    def log_h(self, a, b, edges=None) -> np.ndarray:
        r = np.clip(np.sum(np.asarray(a) * np.asarray(b), axis=-1), -1.0, 1.0)
        return -self.potential(r)


@dataclass(frozen=True, eq=False)
class ProductModel(ModelSpec):
    """Two coupled copies on the same graph, states stacked along axis 1."""

    first: ModelSpec
    second: ModelSpec

    def log_h(self, a, b, edges=None) -> np.ndarray:
        a, b = np.asarray(a), np.asarray(b)
        return self.first.log_h(a[:, 0], b[:, 0], edges) + self.second.log_h(
            a[:, 1], b[:, 1], edges
        )

    def log_density(self, phi: np.ndarray) -> float:
        return self.first.log_density(phi[:, 0]) + self.second.log_density(phi[:, 1])


@dataclass(frozen=True)
class HammockRadii:
    """Per-edge Lipschitz bounds :math:`t_e > 0`."""

    radii: np.ndarray

    def __post_init__(self):
        if np.any(~(self.radii > 0)):
            raise ValueError("Hammock radii must be positive.")


def _pin(site: np.ndarray, graph: Graph, label: int) -> np.ndarray:
    q = site.shape[1]
    if not 0 <= label < q:
        raise ValueError(f"Boundary label {label} outside of 0..{q - 1}.")
    site = site.copy()
    for b in graph.boundary:
        site[b] = 0.0
        site[b, label] = 1.0
    return site


def discrete_model(
    graph: Graph,
    weights,
    site_weights=None,
    boundary_label: int = 0,
    name: str = "discrete",
) -> DiscreteModel:
    """
    Generic finite-state model.

    Parameters
    ----------
    graph
        The graph.

    weights
        Symmetric interaction matrix of shape ``(q, q)`` shared by all edges, or an
        array of shape ``(E, q, q)``.

    site_weights
        Site measure of shape ``(q,)`` shared by all non-boundary vertices, or of
        shape ``(V, q)``. Defaults to the counting measure.

    boundary_label
        Label at which boundary vertices are pinned.

    """
    w = np.asarray(weights, dtype=float)
    q = w.shape[-1]
    if w.ndim == 2:
        w = np.broadcast_to(w, (graph.edge_count, q, q)).copy()
    if site_weights is None:
        site_weights = np.ones(q)
    s = np.asarray(site_weights, dtype=float)
    if s.ndim == 1:
        s = np.broadcast_to(s, (graph.vertex_count, q)).copy()
    return DiscreteModel(
        graph=graph,
        q=q,
        weights=w,
        site_weights=_pin(s, graph, boundary_label),
        name=name,
    )


def potts_model(
    graph: Graph,
    q: int,
    beta: float,
    boundary_label: int = 0,
) -> DiscreteModel:
    """
    Potts model with :math:`h(a, b) = \\exp(\\beta\\delta_{a,b})`.

    Negative ``beta`` gives the antiferromagnet. Boundary vertices, if any, are
    pinned at ``boundary_label``.

    """
    if q < 2:
        raise ValueError(f"Potts model needs q >= 2, got {q}.")
    if not np.isfinite(beta):
        raise ValueError(f"Potts model needs a finite beta, got {beta}.")
    w = np.exp(beta * np.eye(q))
    return discrete_model(graph, w, None, boundary_label, name=f"potts(q={q})")


def surface_model(
    graph: Graph,
    potential: Potential,
    boundary_height: float = 0.0,
    radii=None,
) -> HeightModel:
    """
    Random surface model with density :math:`\\exp(-\\sum_e U(\\nabla_e\\varphi))`.

    Parameters
    ----------
    graph
        Graph with a non-empty boundary; every connected component has to contain a
        boundary vertex.

    potential
        The potential. Non-Lipschitz potentials need ``attested_finite``.

    boundary_height
        The pinned boundary value.

    radii
        Optional per-edge scales.

    """
    if len(graph.boundary) == 0:
        raise ValueError("Surface model needs a non-empty boundary.")
    if not (potential.is_lipschitz_support or potential.attested_finite):
        raise ValueError(
            f"Potential '{potential.name}' needs an attested finite partition function."
        )
    if not components_meet_boundary(graph):
        raise ValueError("Every connected component must contain a boundary vertex.")
    if not np.isfinite(boundary_height):
        raise ValueError(f"Boundary height must be finite, got {boundary_height}.")
    if radii is not None:
        radii = HammockRadii(np.asarray(radii, dtype=float)).radii
        if radii.shape != (graph.edge_count,):
            raise ValueError("Radii must be given for every edge.")
    return HeightModel(
        graph=graph,
        potential=potential,
        boundary_height=float(boundary_height),
        radii=radii,
    )


def hammock_mixture_model(
    graph: Graph,
    radii,
    boundary_height: float = 0.0,
) -> HeightModel:
    """
    Uniform measure on functions with :math:`|\\nabla_e\\varphi|\\le t_e`, the
    mixture component :math:`\\mu_t`.
    """
    if isinstance(radii, HammockRadii):
        radii = radii.radii
    return surface_model(graph, hammock(), boundary_height, radii=radii)


def spin_on_model(graph: Graph, n: int, potential: SpinPotential) -> SphereModel:
    """Spin :math:`O(n)` model with weight :math:`\\exp(-U(\\langle a, b\\rangle))`."""
    if n < 1:
        raise ValueError(f"Spin dimension must be >= 1, got {n}.")
    return SphereModel(graph=graph, n=int(n), potential=potential)


def product_model(first: ModelSpec, second: ModelSpec) -> ProductModel:
    """
    Product of two models sharing the graph, the interaction and the site measures
    off the boundary; the boundary values may differ.
    """
    g1, g2 = first.graph, second.graph
    if g1.vertex_count != g2.vertex_count or g1.edges != g2.edges:
        raise ValueError("Product factors must live on the same graph.")
    if type(first) is not type(second):
        raise ValueError(
            f"Cannot pair a {type(first).__name__} with a {type(second).__name__}."
        )
    if isinstance(first, DiscreteModel):
        inner = g1.interior
        if first.q != second.q or not np.array_equal(first.weights, second.weights):
            raise ValueError("Product factors must share the edge interaction.")
        if not np.array_equal(first.site_weights[inner], second.site_weights[inner]):
            raise ValueError("Product factors must share the site measures off V0.")
    elif isinstance(first, HeightModel):
        if first.potential is not second.potential and (
            first.potential.name != second.potential.name
        ):
            raise ValueError("Product factors must share the potential.")
        if not np.array_equal(first.scale(), second.scale()):
            raise ValueError("Product factors must share the edge radii.")
    elif isinstance(first, SphereModel):
        r = np.linspace(-1, 1, 201)
        if first.n != second.n or not np.array_equal(
            first.potential(r), second.potential(r)
        ):
            raise ValueError("Product factors must share n and the spin potential.")
    else:
        raise ValueError(f"Unsupported product factor {type(first).__name__}.")
    return ProductModel(graph=g1, first=first, second=second)


def markov_chain_model(
    transition,
    stationary,
    initial,
    n_steps: int,
) -> MarkovChainModel:
    """
    Path of a reversible Markov chain as a discrete model.

    The model lives on the path ``0 - 1 - ... - n_steps`` with boundary
    :math:`\\{0\\}`, :math:`\\lambda_0 = \\mu`, :math:`\\lambda_j = \\pi` otherwise and
    :math:`h(a, b) = P(a, b) / \\pi(b)`, so that the path law is
    :math:`\\mu(x_0)\\prod_j P(x_{j-1}, x_j)`.

    Parameters
    ----------
    transition
        Row-stochastic matrix :math:`P`.

    stationary
        Strictly positive stationary law :math:`\\pi`.

    initial
        Initial law :math:`\\mu`.

    n_steps
        Number of steps :math:`n`.

    """
    P = np.asarray(transition, dtype=float)
    pi = np.asarray(stationary, dtype=float)
    mu = np.asarray(initial, dtype=float)
    S = pi.size
    if P.shape != (S, S) or mu.shape != (S,):
        raise ValueError(
            "Transition, stationary and initial laws have mismatched sizes."
        )
    if n_steps < 0:
        raise ValueError(f"Number of steps must be non-negative, got {n_steps}.")
    if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1) > MARKOV_TOL):
        raise ValueError("Transition matrix is not stochastic.")
    if np.any(pi <= 0):
        raise ValueError("Stationary law must be strictly positive.")
    if np.any(mu < 0) or abs(mu.sum() - 1) > MARKOV_TOL:
        raise ValueError("Initial law must be a probability vector.")
    flux = pi[:, None] * P
    bad = np.argwhere(np.abs(flux - flux.T) > MARKOV_TOL)
    if bad.size > 0:
        a, b = bad[0]
        raise ValueError(
            f"Detailed balance fails for states ({a}, {b}): "
            f"{flux[a, b]} != {flux[b, a]}."
        )
    H = P / pi[None, :]
    H = 0.5 * (H + H.T)
    graph = path(n_steps + 1, boundary=[0])
    site = np.broadcast_to(pi, (n_steps + 1, S)).copy()
    site[0] = mu
    return MarkovChainModel(
        graph=graph,
        q=S,
        weights=np.broadcast_to(H, (graph.edge_count, S, S)).copy(),
        site_weights=site,
        name="markov",
        transition=P,
        stationary=pi,
        initial=mu,
    )


def ising_as_discrete(model: SphereModel) -> DiscreteModel:
    """
    The :math:`n = 1` spin model as a two-label discrete model; label ``0`` is
    :math:`+1` and label ``1`` is :math:`-1`.
    """
    if model.n != 1:
        raise ValueError(f"Only the n = 1 spin model is discrete, got n = {model.n}.")
    s = np.array([1.0, -1.0])
    w = np.exp(-model.potential(np.outer(s, s)))
    return discrete_model(model.graph, w, None, boundary_label=0, name="ising")


def edge_weight(model: ModelSpec, edge: int, a, b) -> float:
    """
    The interaction :math:`h_e(a, b)` of a single edge.

    Parameters
    ----------
    model
        The model.

    edge
        Edge index.

    a, b
        Single-site states.

    Returns
    -------
    h: float
        Non-negative, possibly zero.

    """
    if isinstance(model, DiscreteModel):
        return float(model.weights[edge, int(a), int(b)])
    a = np.asarray(a)[None]
    b = np.asarray(b)[None]
    return float(np.exp(model.log_h(a, b, [edge])[0]))


def sample_hammock_radii(
    model: HeightModel,
    phi: np.ndarray,
    rng: np.random.Generator,
) -> HammockRadii:
    """
    Samples the per-edge radii :math:`t_e` of the hammock-mixture representation,
    independently from :math:`\\lambda_U` conditioned on :math:`t_e > |\\nabla_e\\varphi|`.

    Parameters
    ----------
    model
        Surface model with a monotone potential.

    phi
        Configuration with positive density.

    rng
        Random number generator.

    Returns
    -------
    radii: HammockRadii

    """
    if not model.potential.is_monotone:
        raise ValueError(
            f"Potential '{model.potential.name}' is not monotone; no mixture exists."
        )
    a, b = model.endpoint_states(phi)
    grad = np.abs(a - b)
    c = model.potential.survival(grad)
    if np.any(c <= 0):
        raise ValueError("Configuration has zero density: cannot sample radii.")
    u = c * (1.0 - rng.random(grad.size))
    t = np.maximum(model.potential.inverse_survival(u), grad)
    t[t == 0] = np.finfo(float).tiny
    return HammockRadii(t)

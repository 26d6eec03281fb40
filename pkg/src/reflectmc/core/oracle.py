"""
.. codeauthor::
    reflectmc authors

Ground truth for small instances.

Discrete models are enumerated exactly: :func:`enumerate_exact` gives the law of
:math:`\\varphi`, :func:`enumerate_joint_es` the joint law of :math:`(\\varphi,\\omega)`
under the :math:`\\tau`-Edwards-Sokal coupling, and :func:`pushforward_equals`
measures how far a transformation moves such a law. Probabilities are accumulated
with :func:`math.fsum` and normalised by a single final division.

Surfaces on graphs that become trees once the boundary is contracted are handled by
:func:`path_quadrature`: heights are discretised on a uniform grid and the marginals
and event probabilities are obtained by leaf-to-root convolution of the edge
kernels, using :func:`scipy.signal.fftconvolve`.

.. rubric:: Functions

.. autosummary::

    enumerate_exact
    enumerate_joint_es
    pushforward_equals
    flip_at
    flip_set
    swendsen_wang_outcomes
    path_quadrature

"""

import itertools
import logging
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.signal import fftconvolve

from reflectmc.core.graph import (
    Graph,
    boundary_components,
    connected_components,
    contract_boundary,
    is_tree,
)
from reflectmc.core.models import DiscreteModel, HeightModel
from reflectmc.core.reflections import (
    Reflection,
    bond_probabilities,
    flip_component,
    flip_component_or_complement,
    flip_components,
)

logger = logging.getLogger(__name__)

ORACLE_LIMIT = 10**7
NORM_TOL = 1e-12


class OracleOverflowError(RuntimeError):
    """The requested enumeration exceeds the oracle limit."""


@dataclass
class ExactLaw:
    """
    Exact law on an enumerated support.

    ``support`` holds one configuration per row; ``bonds``, if present, the bond
    configuration paired with it.
    """

    support: np.ndarray
    probability: np.ndarray
    bonds: Optional[np.ndarray] = None

    def __post_init__(self):
        if np.any(self.probability < 0):
            raise ValueError("Probabilities must be non-negative.")
        total = math.fsum(self.probability)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"Probabilities sum to {total}, not 1.")

    def __len__(self) -> int:
        return len(self.probability)

    def marginal(self) -> "ExactLaw":
        """The law of the configuration alone, summing out the bonds."""
        if self.bonds is None:
            return self
        acc = defaultdict(list)
        first = {}
        for phi, p in zip(self.support, self.probability):
            key = phi.tobytes()
            acc[key].append(p)
            first.setdefault(key, phi)
        keys = list(first)
        return ExactLaw(
            support=np.array([first[k] for k in keys]),
            probability=np.array([math.fsum(acc[k]) for k in keys]),
        )

    def probability_of(self, phi: np.ndarray) -> float:
        """Total probability of a configuration."""
        phi = np.asarray(phi, dtype=self.support.dtype)
        hit = np.all(self.support.reshape(len(self), -1) == phi.ravel(), axis=1)
        return math.fsum(self.probability[hit])

    def to_frame(self) -> pd.DataFrame:
        """Tabulates the law in ``phi[v]``, ``omega[e]`` and ``probability`` columns."""
        sup = self.support.reshape(len(self), -1)
        data = {f"phi[{v}]": sup[:, v] for v in range(sup.shape[1])}
        if self.bonds is not None:
            for e in range(self.bonds.shape[1]):
                data[f"omega[{e}]"] = self.bonds[:, e].astype(int)
        data["probability"] = self.probability
        return pd.DataFrame(data)


def _supports(model: DiscreteModel) -> list[np.ndarray]:
    return [np.flatnonzero(row > 0) for row in model.site_weights]


def _count(model: DiscreteModel) -> int:
    return math.prod(len(s) for s in _supports(model))


def enumerate_exact(model: DiscreteModel, limit: int = ORACLE_LIMIT) -> ExactLaw:
    """
    Exact law of a discrete model.

    Parameters
    ----------
    model
        A discrete model.

    limit
        Largest admissible number of configurations.

    Returns
    -------
    law: ExactLaw

    """
    if not isinstance(model, DiscreteModel):
        raise TypeError(
            f"Exact enumeration needs a discrete model, got {type(model).__name__}."
        )
    count = _count(model)
    if count > limit:
        raise OracleOverflowError(
            f"{count} configurations exceed the limit of {limit}."
        )
    V = model.graph.vertex_count
    configs = np.array(list(itertools.product(*_supports(model))), dtype=int)
    configs = configs.reshape(count, V)
    weight = np.prod(model.site_weights[np.arange(V), configs], axis=1)
    ea = model.graph.edge_array
    if len(ea) > 0:
        E = np.arange(len(ea))
        weight = weight * np.prod(
            model.weights[E, configs[:, ea[:, 0]], configs[:, ea[:, 1]]], axis=1
        )
    Z = math.fsum(weight)
    if not Z > 0:
        raise ValueError("Model has zero partition function.")
    logger.debug("Enumerated %d configurations, Z = %.12g.", count, Z)
    return ExactLaw(support=configs, probability=weight / Z)


def enumerate_joint_es(
    model: DiscreteModel,
    reflection: Reflection,
    limit: int = ORACLE_LIMIT,
) -> ExactLaw:
    """
    Exact joint law of :math:`(\\varphi, \\omega)` under the :math:`\\tau`-Edwards-Sokal
    coupling.

    Every configuration is paired with all :math:`2^{|E|}` bond configurations, so
    that the table has ``len(enumerate_exact(model)) * 2**E`` rows.

    """
    E = model.graph.edge_count
    count = _count(model) * 2**E
    if count > limit:
        raise OracleOverflowError(f"{count} joint states exceed the limit of {limit}.")
    law = enumerate_exact(model, limit)
    bits = np.array(list(itertools.product([False, True], repeat=E)), dtype=bool)
    bits = bits.reshape(2**E, E)
    support = []
    bonds = []
    prob = []
    for phi, p in zip(law.support, law.probability):
        pe = bond_probabilities(model, reflection, phi)
        factor = np.prod(np.where(bits, pe, 1.0 - pe), axis=1)
        support.append(np.repeat(phi[None], len(bits), axis=0))
        bonds.append(bits)
        prob.append(p * factor)
    return ExactLaw(
        support=np.concatenate(support),
        probability=np.concatenate(prob),
        bonds=np.concatenate(bonds),
    )


Transformation = Callable[[np.ndarray, np.ndarray], Union[np.ndarray, list]]


def pushforward_equals(
    law: ExactLaw,
    transformation: Transformation,
    keep_bonds: bool = True,
) -> float:
    """
    Sup-norm distance between a joint law and its image under a transformation.

    Parameters
    ----------
    law
        Joint law of :math:`(\\varphi, \\omega)`.

    transformation
        Maps ``(phi, omega)`` to a new configuration, or to a list of
        ``(configuration, probability)`` pairs for randomised transformations. The
        bonds are kept.

    keep_bonds
        If ``False``, only the laws of the configurations are compared.

    Returns
    -------
    distance: float

    """
    if law.bonds is None:
        raise ValueError("Pushforward needs a joint law with bonds.")
    orig = defaultdict(list)
    pushed = defaultdict(list)

    def key(phi, omega):
        return (phi.tobytes(), omega.tobytes() if keep_bonds else b"")

    for phi, omega, p in zip(law.support, law.bonds, law.probability):
        if p == 0:
            continue
        orig[key(phi, omega)].append(p)
        out = transformation(phi, omega)
        if isinstance(out, list):
            for psi, w in out:
                pushed[key(np.asarray(psi, dtype=phi.dtype), omega)].append(p * w)
        else:
            pushed[key(np.asarray(out, dtype=phi.dtype), omega)].append(p)
    keys = set(orig) | set(pushed)
    return max(
        (abs(math.fsum(orig.get(k, [])) - math.fsum(pushed.get(k, []))) for k in keys),
        default=0.0,
    )


def flip_at(graph: Graph, reflection: Reflection, x: int) -> Transformation:
    """The transformation flipping the cluster of a fixed vertex ``x``."""
    return lambda phi, omega: flip_component(graph, phi, omega, reflection, x)


def flip_set(graph: Graph, reflection: Reflection, W: Sequence[int]) -> Transformation:
    """The component-or-complement flip of a fixed vertex set ``W``."""
    def flip(phi, omega):
        return flip_component_or_complement(graph, phi, omega, reflection, W)

    return flip


def swendsen_wang_outcomes(graph: Graph, reflection: Reflection) -> Transformation:
    """
    The Swendsen-Wang flip as a randomised transformation, listing every outcome of
    the fair coins with its probability.
    """

    def transform(phi, omega):
        partition = connected_components(graph, omega)
        free = np.flatnonzero(~boundary_components(graph, partition))
        w = 0.5 ** len(free)
        out = []
        for coins in itertools.product([False, True], repeat=len(free)):
            chosen = np.zeros(partition.component_count, dtype=bool)
            chosen[free] = coins
            out.append((flip_components(graph, phi, partition, chosen, reflection), w))
        return out

    return transform


class Interval(NamedTuple):
    """:math:`P(lo < \\varphi_v < hi)`."""

    vertex: int
    lo: float
    hi: float


class AbsTail(NamedTuple):
    """:math:`P(|\\varphi_v| \\ge m)`."""

    vertex: int
    level: float


class Barrier(NamedTuple):
    """
    :math:`P(V_0 \\not\\leftrightarrow^{\\varphi<m} v, \\varphi_v\\in D)` with ``D`` a
    union of open intervals; an empty ``within`` means :math:`D = \\mathbb{R}`.
    """

    vertex: int
    level: float
    within: tuple = ()


class Extremal(NamedTuple):
    """:math:`|\\varphi_v - \\varphi_w| \\ge 1 - \\varepsilon` on all listed edges."""

    edges: tuple
    epsilon: float


class RadiusAtom(NamedTuple):
    """Probability that the sampled hammock radius of edge ``edge`` is maximal."""

    edge: int


Query = Union[Interval, AbsTail, Barrier, Extremal, RadiusAtom]


@dataclass
class GridLaw:
    """
    Discretised marginals and event probabilities of a surface.

    ``marginals`` maps each vertex to the masses on ``heights``.
    """

    heights: np.ndarray
    step: float
    box: float
    marginals: dict[int, np.ndarray]
    probabilities: dict = field(default_factory=dict)
    discrepancy: Optional[float] = None

    def __post_init__(self):
        for v, m in self.marginals.items():
            if abs(m.sum() - 1.0) > 1e-10:
                raise ValueError(f"Marginal of vertex {v} sums to {m.sum()}.")

    def to_frame(self) -> pd.DataFrame:
        data = {"height": self.heights}
        for v in sorted(self.marginals):
            data[f"phi[{v}]"] = self.marginals[v]
        return pd.DataFrame(data)


def interval_weights(x: np.ndarray, step: float, intervals) -> np.ndarray:
    """Fraction of each grid cell :math:`[x - \\delta/2, x + \\delta/2]` covered by a
    union of disjoint open intervals."""
    w = np.zeros_like(x)
    for lo, hi in intervals:
        cover = np.minimum(x + step / 2, hi) - np.maximum(x - step / 2, lo)
        w += np.clip(cover / step, 0.0, 1.0)
    return np.minimum(w, 1.0)


class _Tree:
    def __init__(self, model: HeightModel):
        graph = model.graph
        contracted, vmap = contract_boundary(graph, return_map=True)
        if not is_tree(contracted):
            raise ValueError(
                "Quadrature needs a graph which is a tree after contraction."
            )
        self.vmap = vmap
        self.root = contracted.vertex_count - 1
        groups = defaultdict(list)
        for ei, (u, w) in enumerate(graph.edges):
            a, b = int(vmap[u]), int(vmap[w])
            if a != b:
                groups[(min(a, b), max(a, b))].append(ei)
        self.parent = {}
        self.edges = {}
        self.children = defaultdict(list)
        self.order = [self.root]
        queue = deque([self.root])
        seen = {self.root}
        while queue:
            u = queue.popleft()
            for _, w in contracted.incidence[u]:
                if w not in seen:
                    seen.add(w)
                    self.parent[w] = u
                    self.edges[w] = groups[(min(u, w), max(u, w))]
                    self.children[u].append(w)
                    self.order.append(w)
                    queue.append(w)

    def path_to_root(self, v: int) -> list[int]:
        out = []
        while v != self.root:
            out.append(v)
            v = self.parent[v]
        return out


class _Quadrature:
    def __init__(self, model: HeightModel, step: float, box: float):
        self.model = model
        self.tree = _Tree(model)
        self.step = step
        self.N = int(math.ceil(box / step))
        self.x = model.boundary_height + step * np.arange(-self.N, self.N + 1)
        U = model.potential
        scale = model.scale()
        if U.is_lipschitz_support:
            reach = float(scale.max()) * U.support
        else:
            reach = 2.0 * box
        K = min(2 * self.N, int(math.ceil(reach / step)) + 1)
        self.offsets = step * np.arange(-K, K + 1)
        self.scale = scale
        self.base = {v: self.kernel(es) for v, es in self.tree.edges.items()}
        self.logZ, self.up = self.upward(self.base, {})

    def edge_kernel(self, e: int, epsilon: Optional[float] = None) -> np.ndarray:
        U = self.model.potential
        out = np.zeros_like(self.offsets)
        for shift in (-self.step / 4, self.step / 4):
            y = np.abs(self.offsets + shift)
            g = U.survival(y / self.scale[e])
            if epsilon is not None:
                g = np.where(y >= 1.0 - epsilon, g, 0.0)
            out += 0.5 * g
        return out

    def atom_kernel(self, e: int) -> np.ndarray:
        U = self.model.potential
        top = self.scale[e] * U.support
        out = np.zeros_like(self.offsets)
        for shift in (-self.step / 4, self.step / 4):
            y = np.abs(self.offsets + shift)
            out += 0.5 * np.where(y <= top, float(U.survival(U.support)), 0.0)
        return out

    def kernel(self, edges, special: Optional[dict] = None) -> np.ndarray:
        special = special or {}
        k = np.ones_like(self.offsets)
        for e in edges:
            k = k * (special[e] if e in special else self.edge_kernel(e))
        return k

    def upward(self, kernels: dict, masks: dict):
        msg = {}
        logs = {}
        tree = self.tree
        for v in reversed(tree.order[1:]):
            f = masks.get(v, 1.0) * np.ones_like(self.x)
            ls = 0.0
            for c in tree.children[v]:
                f = f * msg[c]
                ls += logs[c]
            m = np.maximum(fftconvolve(f, kernels[v], mode="same"), 0.0)
            s = m.max()
            if s > 0:
                msg[v] = m / s
                logs[v] = ls + math.log(s)
            else:
                msg[v] = m
                logs[v] = -math.inf
        val = 1.0
        ls = 0.0
        for c in tree.children[tree.root]:
            val *= msg[c][self.N]
            ls += logs[c]
        logZ = math.log(val) + ls if val > 0 and ls > -math.inf else -math.inf
        return logZ, msg

    def probability(self, kernels: dict, masks: dict) -> float:
        logZ, _ = self.upward(kernels, masks)
        if logZ == -math.inf:
            return 0.0
        return float(math.exp(logZ - self.logZ))

    def marginals(self) -> dict[int, np.ndarray]:
        tree = self.tree
        down = {}
        spike = np.zeros_like(self.x)
        spike[self.N] = 1.0
        out = {tree.root: spike}
        for v in tree.order[1:]:
            p = tree.parent[v]
            h = spike if p == tree.root else down[p]
            for s in tree.children[p]:
                if s != v:
                    h = h * self.up[s]
            g = np.maximum(fftconvolve(h, self.base[v], mode="same"), 0.0)
            down[v] = g / g.max()
            m = down[v] * self._below(v)
            out[v] = m / m.sum()
        return out

    def _below(self, v: int) -> np.ndarray:
        f = np.ones_like(self.x)
        for c in self.tree.children[v]:
            f = f * self.up[c]
        return f


def path_quadrature(
    model: HeightModel,
    queries: Sequence[Query] = (),
    step: float = 5e-4,
    box: Optional[float] = None,
    self_check: bool = False,
) -> GridLaw:
    """
    Grid quadrature for surfaces on trees.

    Parameters
    ----------
    model
        Surface model whose graph is a tree once the boundary is contracted.

    queries
        Event probabilities to be computed.

    step
        Grid step :math:`\\delta`.

    box
        Half-width :math:`H` of the height window around the boundary height,
        defaults to the number of vertices times the largest edge radius.

    self_check
        Also run at :math:`\\delta/2` and record the largest difference of the query
        probabilities as ``discrepancy``.

    Returns
    -------
    law: GridLaw

    """
    if not isinstance(model, HeightModel):
        raise TypeError(
            f"Quadrature needs a surface model, got {type(model).__name__}."
        )
    if box is None:
        box = model.graph.vertex_count * float(np.max(model.scale(), initial=1.0))
    quad = _Quadrature(model, step, box)
    tree = quad.tree
    vmap = tree.vmap
    local = quad.marginals()
    marginals = {v: local[int(vmap[v])] for v in range(model.graph.vertex_count)}
    x = quad.x
    probs = {}
    for q in queries:
        if isinstance(q, Interval):
            p = float(
                np.sum(marginals[q.vertex] * interval_weights(x, step, [(q.lo, q.hi)]))
            )
        elif isinstance(q, AbsTail):
            inner = interval_weights(x, step, [(-q.level, q.level)])
            p = float(1.0 - np.sum(marginals[q.vertex] * inner))
        elif isinstance(q, Barrier):
            wD = (
                interval_weights(x, step, q.within)
                if len(q.within) > 0
                else np.ones_like(x)
            )
            pD = float(np.sum(marginals[q.vertex] * wD))
            if model.boundary_height >= q.level:
                p = pD
            elif q.vertex in model.graph.boundary:
                p = 0.0
            else:
                below = interval_weights(x, step, [(-np.inf, q.level)])
                v = int(vmap[q.vertex])
                masks = {u: below for u in tree.path_to_root(v)}
                masks[v] = below * wD
                p = pD - quad.probability(quad.base, masks)
        elif isinstance(q, Extremal):
            special = {}
            for a, b in q.edges:
                e = model.graph.edges.index((min(a, b), max(a, b)))
                special[e] = quad.edge_kernel(e, q.epsilon)
            if any(vmap[a] == vmap[b] for a, b in q.edges):
                p = 0.0
            else:
                kernels = {v: quad.kernel(es, special) for v, es in tree.edges.items()}
                p = quad.probability(kernels, {})
        elif isinstance(q, RadiusAtom):
            a, b = model.graph.edges[q.edge]
            if vmap[a] == vmap[b]:
                p = float(model.potential.survival(model.potential.support)) / float(
                    model.potential.survival(0.0)
                )
            else:
                special = {q.edge: quad.atom_kernel(q.edge)}
                kernels = {v: quad.kernel(es, special) for v, es in tree.edges.items()}
                p = quad.probability(kernels, {})
        else:
            raise TypeError(f"Unknown quadrature query {q!r}.")
        probs[q] = min(max(p, 0.0), 1.0)
    law = GridLaw(
        heights=x, step=step, box=box, marginals=marginals, probabilities=probs
    )
    if self_check and len(queries) > 0:
        fine = path_quadrature(model, queries, step / 2, box)
        law.discrepancy = max(abs(probs[q] - fine.probabilities[q]) for q in queries)
        if law.discrepancy > 10 * step:
            logger.warning(
                "Quadrature at step %g and %g differs by %g.",
                step,
                step / 2,
                law.discrepancy,
            )
    return law

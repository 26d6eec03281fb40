"""
.. codeauthor::
    reflectmc authors

Reflections :math:`\\tau` of the single-site state space, the
:math:`\\tau`-Edwards-Sokal bond coupling and the cluster flips built on it.

Given a configuration :math:`\\varphi`, each edge is opened independently with
probability

.. math::

    p_{v,w}(\\varphi) = \\max\\left(1 - \\frac{h(\\tau(\\varphi_v), \\varphi_w)}
    {h(\\varphi_v, \\varphi_w)}, 0\\right),

with the conventions :math:`0/0 := 1` and :math:`t/0 := \\infty`. Applying
:math:`\\tau` to an open cluster not touching the boundary preserves the joint law
of :math:`(\\varphi, \\omega)`.

Site-measure preservation is an analytic property of each family (Lebesgue measure
under :math:`x\\mapsto 2m-x`, sphere measure under isometries, counting measure under
permutations, product measure under the swap) and is not checked at runtime.

.. rubric:: Functions

.. autosummary::

    surface_reflection
    spin_reflection
    swap_reflection
    discrete_involution
    bond_probabilities
    bond_probability
    sample_bonds
    flip_component
    flip_component_or_complement
    swendsen_wang_flip
    cluster_side_check

"""

import logging
from dataclasses import dataclass, field

import numpy as np

from reflectmc.core.graph import (
    Graph,
    BondConfig,
    Partition,
    boundary_components,
    check_bonds,
    connected_components,
)
from reflectmc.core.models import (
    ModelSpec,
    DiscreteModel,
    HeightModel,
    SphereModel,
    ProductModel,
)

logger = logging.getLogger(__name__)


class Reflection:
    """Involution of the single-site state space, vectorised over the leading axis."""

    def apply(self, states: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, states):
        return self.apply(np.asarray(states))


@dataclass(frozen=True)
class SurfaceReflection(Reflection):
    """:math:`\\tau_m(a) = 2m - a`."""

    m: float

    def apply(self, states):
        return 2.0 * self.m - np.asarray(states, dtype=float)


@dataclass(frozen=True, eq=False)
class SpinReflection(Reflection):
    """:math:`\\tau_a(b) = b - 2\\langle a, b\\rangle a`, renormalised."""

    a: np.ndarray

    def apply(self, states):
        b = np.asarray(states, dtype=float)
        out = b - 2.0 * (b @ self.a)[..., None] * self.a
        return out / np.linalg.norm(out, axis=-1, keepdims=True)


@dataclass(frozen=True)
class SwapReflection(Reflection):
    """:math:`\\tau((a_1, a_2)) = (a_2, a_1)` on product states."""

    def apply(self, states):
        s = np.asarray(states)
        if s.ndim < 2 or s.shape[1] != 2:
            raise ValueError(
                f"Swap needs pair states of shape (k, 2, ...), got {s.shape}."
            )
        return s[:, ::-1].copy()


@dataclass(frozen=True, eq=False)
class DiscreteInvolution(Reflection):
    """Self-inverse permutation of the labels ``0 .. q-1``."""

    table: np.ndarray = field(default_factory=lambda: np.arange(2))

    def apply(self, states):
        return self.table[np.asarray(states, dtype=int)]


def surface_reflection(m: float) -> SurfaceReflection:
    """Reflection of heights around the level ``m``."""
    if not np.isfinite(m):
        raise ValueError(f"Reflection level must be finite, got {m}.")
    return SurfaceReflection(float(m))


def spin_reflection(a) -> SpinReflection:
    """Reflection of spins in the hyperplane orthogonal to the unit vector ``a``."""
    a = np.asarray(a, dtype=float).ravel()
    if abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise ValueError(
            f"Spin reflection needs a unit vector, got norm {np.linalg.norm(a)}."
        )
    return SpinReflection(a)


def swap_reflection() -> SwapReflection:
    """The swap of the two copies of a product model."""
    return SwapReflection()


def discrete_involution(permutation) -> DiscreteInvolution:
    """
    Reflection applying a permutation table of the labels.

    Parameters
    ----------
    permutation
        Table ``t`` with ``t[t[a]] == a`` for all labels ``a``.

    """
    t = np.asarray(permutation, dtype=int)
    if t.ndim != 1 or not np.array_equal(np.sort(t), np.arange(t.size)):
        raise ValueError(f"Table {t.tolist()} is not a permutation.")
    if not np.array_equal(t[t], np.arange(t.size)):
        raise ValueError(f"Permutation {t.tolist()} is not an involution.")
    return DiscreteInvolution(t)


def bond_probabilities(
    model: ModelSpec,
    reflection: Reflection,
    phi: np.ndarray,
) -> np.ndarray:
    """
    Bond probabilities :math:`p_e(\\varphi)` of all edges.

    Discrete models are evaluated in linear space and only divide where the
    denominator exceeds the numerator; all other models are evaluated in log-space
    as :math:`-\\mathrm{expm1}(\\log h_\\tau - \\log h)`.

    """
    a, b = model.endpoint_states(phi)
    ta = reflection(a)
    if isinstance(model, DiscreteModel):
        hv = model.h(a, b)
        ht = model.h(ta, b)
        p = np.zeros(hv.shape)
        np.divide(ht, hv, out=p, where=ht < hv)
        return np.where(ht < hv, 1.0 - p, 0.0)
    lv = model.log_h(a, b)
    lt = model.log_h(ta, b)
    p = np.zeros(lv.shape)
    with np.errstate(invalid="ignore"):
        go = lt < lv
        np.subtract(lt, lv, out=p, where=go)
    return np.where(go, -np.expm1(p), 0.0)


def bond_probability(
    model: ModelSpec,
    reflection: Reflection,
    edge: int,
    phi: np.ndarray,
) -> float:
    """Bond probability of a single edge; see :func:`bond_probabilities`."""
    return float(bond_probabilities(model, reflection, phi)[edge])


def sample_bonds(
    model: ModelSpec,
    reflection: Reflection,
    phi: np.ndarray,
    rng: np.random.Generator,
) -> BondConfig:
    """Independent Bernoulli bonds with the probabilities :func:`bond_probabilities`."""
    p = bond_probabilities(model, reflection, phi)
    return rng.random(p.size) < p


def _flip(phi: np.ndarray, mask: np.ndarray, reflection: Reflection) -> np.ndarray:
    out = phi.copy()
    if mask.any():
        out[mask] = reflection(phi[mask])
    return out


def flip_component(
    graph: Graph,
    phi: np.ndarray,
    omega: BondConfig,
    reflection: Reflection,
    x: int,
) -> np.ndarray:
    """
    Applies :math:`\\tau` to the open cluster of ``x``, unless it meets the boundary.

    Returns
    -------
    phi: np.ndarray
        A new configuration.

    """
    partition = connected_components(graph, omega)
    cid = partition.component_id[x]
    if boundary_components(graph, partition)[cid]:
        return phi.copy()
    return _flip(phi, partition.component_id == cid, reflection)


def flip_component_or_complement(
    graph: Graph,
    phi: np.ndarray,
    omega: BondConfig,
    reflection: Reflection,
    W,
) -> np.ndarray:
    """
    Flips the clusters of a vertex set ``W``, or everything else.

    If the union of the open clusters of ``W`` misses the boundary vertex
    :math:`v_0`, :math:`\\tau` is applied to that union; otherwise it is applied to
    all vertices not connected to ``W``.

    Parameters
    ----------
    graph
        Graph with a single boundary vertex.

    W
        Vertex set, possibly empty.

    """
    if len(graph.boundary) != 1:
        raise ValueError(
            f"Component-or-complement flip needs a single boundary vertex, "
            f"got {len(graph.boundary)}."
        )
    W = list(W)
    if len(W) == 0:
        return phi.copy()
    (v0,) = graph.boundary
    partition = connected_components(graph, omega)
    seeds = np.unique(partition.component_id[W])
    closure = np.isin(partition.component_id, seeds)
    if closure[v0]:
        return _flip(phi, ~closure, reflection)
    return _flip(phi, closure, reflection)


def flip_components(
    graph: Graph,
    phi: np.ndarray,
    partition: Partition,
    chosen: np.ndarray,
    reflection: Reflection,
) -> np.ndarray:
    """Flips the components marked in ``chosen``, skipping those meeting the boundary."""
    chosen = chosen & ~boundary_components(graph, partition)
    return _flip(phi, chosen[partition.component_id], reflection)


def swendsen_wang_flip(
    graph: Graph,
    phi: np.ndarray,
    omega: BondConfig,
    reflection: Reflection,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Applies :math:`\\tau` with probability 1/2, independently, to every open cluster
    not meeting the boundary.
    """
    partition = connected_components(graph, omega)
    coins = rng.random(partition.component_count) < 0.5
    return flip_components(graph, phi, partition, coins, reflection)


@dataclass
class SideReport:
    """Clusters of a configuration that are not one-sided."""

    violations: list[int]
    component_count: int

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0


def cluster_side_check(
    model: ModelSpec,
    reflection: Reflection,
    phi: np.ndarray,
    omega: BondConfig,
) -> SideReport:
    """
    Checks that every open cluster lies on one side of the reflection.

    Supported pairs are a surface model with :class:`SurfaceReflection` (sign of
    :math:`\\varphi - m`), a spin model with :class:`SpinReflection` (sign of
    :math:`\\langle a, \\varphi\\rangle`) and a product of surface models with
    :class:`SwapReflection` (sign of :math:`\\varphi^1 - \\varphi^2`).

    Returns
    -------
    report: SideReport

    """
    if isinstance(model, HeightModel) and isinstance(reflection, SurfaceReflection):
        side = np.sign(np.asarray(phi, dtype=float) - reflection.m)
        expected = model.potential.is_monotone
    elif isinstance(model, SphereModel) and isinstance(reflection, SpinReflection):
        side = np.sign(np.asarray(phi, dtype=float) @ reflection.a)
        expected = model.potential.is_non_increasing
    elif (
        isinstance(model, ProductModel)
        and isinstance(model.first, HeightModel)
        and isinstance(reflection, SwapReflection)
    ):
        side = np.sign(phi[:, 0] - phi[:, 1])
        expected = model.first.potential.is_convex
    else:
        raise TypeError(
            f"No side criterion for {type(model).__name__} with "
            f"{type(reflection).__name__}."
        )
    if not expected:
        logger.warning(
            "Model does not carry the property guaranteeing one-sided clusters; "
            "violations are expected."
        )
    omega = check_bonds(model.graph, omega)
    partition = connected_components(model.graph, omega)
    violations = []
    for cid in range(partition.component_count):
        s = side[partition.component_id == cid]
        if s.size > 1 and np.ptp(s) > 0:
            violations.append(cid)
    return SideReport(violations=violations, component_count=partition.component_count)

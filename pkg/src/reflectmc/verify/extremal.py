"""
.. codeauthor::
    reflectmc authors

Extremal gradients of Lipschitz surfaces.

For a set of :math:`k` edges and :math:`0 < \\varepsilon \\le 1/8`, the probability that
all of them have :math:`|\\nabla_e\\varphi| \\ge 1 - \\varepsilon` is bounded by
:math:`(C(\\Delta)\\delta(U, \\varepsilon))^{k / C(\\Delta)}` with
:math:`C(\\Delta) = 2^{10\\Delta + 2}` and

.. math::

    \\delta(U, \\varepsilon) = \\varepsilon \\exp\\left(-U(1-\\varepsilon) + U(0)
    + \\Delta(U(3/4) - U(0))\\right).

The constant makes the bound vacuous on every graph of practical size, so
:func:`check_extremal_gradients` also checks the exact value :math:`\\varepsilon^k` of
the uniform Lipschitz surface on trees, monotonicity in :math:`\\varepsilon` and decay
in :math:`k`.

.. rubric:: Functions

.. autosummary::

    check_extremal_gradients

"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from reflectmc.core.graph import Graph, contract_boundary, is_tree
from reflectmc.core.models import HeightModel
from reflectmc.core.potentials import Potential
from reflectmc.core.samplers import ChainSettings
from reflectmc.verify.sampling import aux_rng, equilibrium_samples, estimate, stacked
from reflectmc.verify.sides import count_side_violations
from reflectmc.verify.verdicts import TestVerdict, judge

logger = logging.getLogger(__name__)

EPSILON_MAX = 0.125


@dataclass(frozen=True)
class ExtremalSpec:
    """Oriented edges :math:`(v_i, w_i)` and the tolerance :math:`\\varepsilon`."""

    oriented_edges: tuple
    epsilon: float

    def __post_init__(self):
        if not 0 < self.epsilon <= EPSILON_MAX:
            raise ValueError(f"Epsilon must lie in (0, 1/8], got {self.epsilon}.")
        edges = tuple((int(v), int(w)) for v, w in self.oriented_edges)
        unordered = {(min(v, w), max(v, w)) for v, w in edges}
        if len(unordered) != len(edges):
            raise ValueError(f"Edges {list(edges)} are not distinct.")
        if len(edges) == 0:
            raise ValueError("At least one edge is required.")
        object.__setattr__(self, "oriented_edges", edges)

    @property
    def k(self) -> int:
        return len(self.oriented_edges)

    def edge_indices(self, graph: Graph) -> list[int]:
        out = []
        for v, w in self.oriented_edges:
            key = (min(v, w), max(v, w))
            if key not in graph.edges:
                raise ValueError(f"({v}, {w}) is not an edge of the graph.")
            out.append(graph.edges.index(key))
        return out

    def log_delta(self, potential: Potential, degree: int) -> float:
        """:math:`\\log\\delta(U, \\varepsilon)` for the maximal degree ``degree``."""
        u0, u34, u1 = (float(potential(x)) for x in (0.0, 0.75, 1.0 - self.epsilon))
        return math.log(self.epsilon) - u1 + u0 + degree * (u34 - u0)

    def log_bound(self, potential: Potential, degree: int) -> float:
        """Logarithm of :math:`(C\\delta)^{k/C}` with :math:`C = 2^{10\\Delta+2}`."""
        log_c = (10 * degree + 2) * math.log(2)
        return self.k / math.exp(log_c) * (log_c + self.log_delta(potential, degree))


def max_degrees(graph: Graph) -> tuple[int, int]:
    """Maximal degree over all vertices and over vertices off the boundary."""
    deg = graph.degrees
    inner = deg[~graph.boundary_mask]
    return int(deg.max(initial=0)), int(inner.max(initial=0))


def tree_exact(graph: Graph) -> bool:
    """
    ``True`` if the gradients of the uniform Lipschitz surface along the edges off
    the boundary are independent, i.e. the contracted graph is a tree without merged
    edges.
    """
    if len(graph.boundary) == 0:
        return False
    contracted = contract_boundary(graph)
    bnd = graph.boundary
    inner = sum(1 for u, w in graph.edges if not (u in bnd and w in bnd))
    return is_tree(contracted) and contracted.edge_count == inner


def _extremal(samples: np.ndarray, edges, epsilon: float) -> np.ndarray:
    ea = np.asarray(edges, dtype=int).reshape(-1, 2)
    grad = np.abs(samples[:, ea[:, 0]] - samples[:, ea[:, 1]])
    return np.all(grad >= 1.0 - epsilon, axis=1).astype(float)


def check_extremal_gradients(
    model: HeightModel,
    settings: ChainSettings,
    *,
    replicas: int = 1,
    threads: Optional[int] = None,
    edges: Sequence[Sequence[int]] = (),
    epsilon: float = 0.1,
    epsilon_grid: Optional[Sequence[float]] = None,
    exponent: Optional[int] = None,
    side_pairs: int = 200,
) -> list[TestVerdict]:
    """
    Extremal-gradient probabilities of a Lipschitz surface.

    Parameters
    ----------
    model
        Surface model with a monotone Lipschitz potential and a non-empty boundary.

    edges
        Oriented edges :math:`(v_i, w_i)`.

    epsilon
        The tolerance :math:`\\varepsilon \\in (0, 1/8]`.

    epsilon_grid
        Tolerances for the monotonicity check, defaults to ``epsilon`` times
        ``[0.25, 0.5, 1]``.

    exponent
        Power of :math:`\\varepsilon` used as the exact target on trees, defaults to the
        number of edges.

    side_pairs
        Number of samples on which cluster one-sidedness is checked.

    Returns
    -------
    verdicts: list[TestVerdict]

    """
    spec = ExtremalSpec(tuple(tuple(e) for e in edges), epsilon)
    if not isinstance(model, HeightModel):
        raise TypeError(
            f"Extremal gradients need a surface model, got {type(model).__name__}."
        )
    U = model.potential
    if not (U.is_monotone and U.is_lipschitz_support):
        raise ValueError(
            f"Potential '{U.name}' is not monotone with Lipschitz support."
        )
    if len(model.graph.boundary) == 0:
        raise ValueError("Extremal gradients need a non-empty boundary.")
    spec.edge_indices(model.graph)
    batches = equilibrium_samples(model, settings, replicas, threads)
    seed = settings.seed
    verdicts = []

    est, se, n = estimate(
        batches, lambda s: _extremal(s, spec.oriented_edges, spec.epsilon)
    )
    deg_all, deg_off = max_degrees(model.graph)
    bounds = {d: spec.log_bound(U, d) for d in {deg_all, deg_off}}
    best = min(bounds, key=bounds.get)
    bound = math.exp(min(bounds[best], 0.0))
    note = f"max degree {best}"
    if bounds[best] >= 0:
        note += ", vacuous"
        logger.warning(
            "Extremal-gradient bound with max degree %d is vacuous (log-bound %.3g).",
            best,
            bounds[best],
        )
    verdicts.append(
        judge(
            "extremal-bound",
            "extremal-gradient-bound",
            est,
            se,
            bound,
            "<=",
            n,
            seed,
            note,
        )
    )

    if U.name == "hammock" and model.radii is None and tree_exact(model.graph):
        k = spec.k if exponent is None else exponent
        verdicts.append(
            judge(
                "extremal-tree-exact",
                "extremal-tree-exact",
                est,
                se,
                spec.epsilon**k,
                "~=",
                n,
                seed,
                f"epsilon^{k}",
            )
        )

    grid = sorted(epsilon_grid or [spec.epsilon * f for f in (0.25, 0.5, 1.0)])
    for e in grid:
        ExtremalSpec(spec.oriented_edges, e)
    edges = spec.oriented_edges
    probs = [
        estimate(batches, lambda s, e=e: _extremal(s, edges, e)) for e in grid
    ]
    rise = [(b[0] - a[0], math.hypot(a[1], b[1])) for a, b in zip(probs, probs[1:])]
    worst = min(rise, key=lambda r: r[0], default=(0.0, 0.0))
    verdicts.append(
        judge(
            "extremal-monotone-epsilon",
            "extremal-monotone-epsilon",
            worst[0],
            worst[1],
            0.0,
            ">=",
            n,
            seed,
            "smallest increase over " + ", ".join(f"{e:g}" for e in grid),
        )
    )

    if spec.k > 1:
        prefix = [
            estimate(batches, lambda s, j=j: _extremal(s, edges[:j], spec.epsilon))
            for j in range(1, spec.k + 1)
        ]
        drop = [
            (a[0] - b[0], math.hypot(a[1], b[1])) for a, b in zip(prefix, prefix[1:])
        ]
        worst = min(drop, key=lambda r: r[0])
        rates = ", ".join(f"{p[0] ** (1 / (j + 1)):.4g}" for j, p in enumerate(prefix))
        verdicts.append(
            judge(
                "extremal-decay-k",
                "extremal-decay-k",
                worst[0],
                worst[1],
                0.0,
                ">=",
                n,
                seed,
                f"per-edge rates {rates}",
            )
        )

    if side_pairs > 0:
        samples = stacked(batches)[:side_pairs]
        bad, total = count_side_violations(
            model, settings, samples, aux_rng(settings, 1)
        )
        verdicts.append(
            judge(
                "extremal-sides", "cluster-one-sided", bad, 0.0, 0.0, "~=", total, seed
            )
        )
    return verdicts

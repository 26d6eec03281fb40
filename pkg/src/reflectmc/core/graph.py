"""
.. codeauthor::
    reflectmc authors

Finite simple graphs with a distinguished boundary set :math:`V_0`, the bond
configurations :math:`\\omega` living on their edges, and the two connectivity
notions used throughout :mod:`reflectmc`: connectivity through open bonds, and
connectivity through vertices whose heights lie below (or above) a level.

Vertices are dense integer indices and every edge keeps the position it had when
the graph was built, so that a :class:`BondConfig` is simply a boolean array aligned
with :attr:`Graph.edges`.

.. rubric:: Functions

.. autosummary::

    build_graph
    with_boundary
    path
    cycle
    grid
    complete
    random_tree
    contract_boundary
    connected_components
    reaches_boundary
    level_connected
    is_tree

"""

import logging
from collections import deque
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Union

import numpy as np

logger = logging.getLogger(__name__)

BondConfig = np.ndarray
"""One boolean per edge, indexed consistently with :attr:`Graph.edges`."""


@dataclass(frozen=True, eq=False)
class Graph:
    """
    A finite simple graph with boundary vertices.

    Use :func:`build_graph` or one of the generators to construct validated
    instances.

    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    boundary: frozenset[int]

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an ``(E, 2)`` integer array."""
        return np.array(self.edges, dtype=int).reshape(-1, 2)

    @cached_property
    def incidence(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per vertex, the ``(edge index, neighbour)`` pairs in edge order."""
        inc = [[] for _ in range(self.vertex_count)]
        for ei, (u, v) in enumerate(self.edges):
            inc[u].append((ei, v))
            inc[v].append((ei, u))
        return tuple(tuple(i) for i in inc)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(i) for i in self.incidence], dtype=int)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.vertex_count, dtype=bool)
        mask[list(self.boundary)] = True
        return mask

    @property
    def interior(self) -> list[int]:
        """Vertices not in the boundary, in increasing order."""
        return [v for v in range(self.vertex_count) if v not in self.boundary]


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Vertex partition into :math:`\\omega`-connected components.

    Component ids are contiguous and numbered in order of their smallest vertex.

    """

    component_id: np.ndarray
    component_count: int

    def members(self, cid: int) -> np.ndarray:
        return np.flatnonzero(self.component_id == cid)


def build_graph(
    vertex_count: int,
    edges: Iterable[Iterable[int]],
    boundary: Iterable[int] = (),
) -> Graph:
    """
    Validated graph constructor.

    Parameters
    ----------
    vertex_count
        Number of vertices, labelled ``0 .. vertex_count - 1``.

    edges
        Unordered vertex pairs. The order given here fixes the edge indices.

    boundary
        The boundary set :math:`V_0`, possibly empty.

    Returns
    -------
    graph: Graph

    """
    if vertex_count < 0:
        raise ValueError(f"Vertex count must be non-negative, got {vertex_count}.")
    seen = set()
    norm = []
    for edge in edges:
        u, v = (int(i) for i in edge)
        if u == v:
            raise ValueError(f"Self-loop at vertex {u} is not allowed.")
        for i in (u, v):
            if i < 0 or i >= vertex_count:
                raise ValueError(
                    f"Edge ({u}, {v}) references vertex {i} outside of "
                    f"0..{vertex_count - 1}."
                )
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ValueError(f"Duplicate edge {key}.")
        seen.add(key)
        norm.append(key)
    bset = frozenset(int(b) for b in boundary)
    for b in bset:
        if b < 0 or b >= vertex_count:
            raise ValueError(f"Boundary vertex {b} outside of 0..{vertex_count - 1}.")
    return Graph(vertex_count=vertex_count, edges=tuple(norm), boundary=bset)


def with_boundary(graph: Graph, boundary: Iterable[int]) -> Graph:
    """Returns a copy of ``graph`` with the boundary set replaced."""
    return build_graph(graph.vertex_count, graph.edges, boundary)


def path(n: int, boundary: Iterable[int] = ()) -> Graph:
    """Path graph on ``n`` vertices ``0 - 1 - ... - (n-1)``."""
    return build_graph(n, [(i, i + 1) for i in range(n - 1)], boundary)


def cycle(n: int, boundary: Iterable[int] = ()) -> Graph:
    """Cycle graph on ``n >= 3`` vertices."""
    if n < 3:
        raise ValueError(f"A simple cycle needs at least 3 vertices, got {n}.")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)], boundary)


def grid(
    width: int,
    height: int,
    boundary: Union[str, Iterable[int]] = "frame",
) -> Graph:
    """
    Rectangular grid graph.

    Vertex ``(x, y)`` has index ``y * width + x``. Horizontal edges are listed
    first, row by row, followed by the vertical edges.

    Parameters
    ----------
    width, height
        Grid dimensions.

    boundary
        Either ``"frame"`` (the outer frame of the grid), ``"none"``, or an explicit
        list of vertex indices.

    """
    edges = []
    for y in range(height):
        for x in range(width - 1):
            edges.append((y * width + x, y * width + x + 1))
    for y in range(height - 1):
        for x in range(width):
            edges.append((y * width + x, (y + 1) * width + x))
    if isinstance(boundary, str):
        if boundary == "frame":
            bset = [
                y * width + x
                for y in range(height)
                for x in range(width)
                if x in {0, width - 1} or y in {0, height - 1}
            ]
        elif boundary == "none":
            bset = []
        else:
            raise ValueError(f"Unknown grid boundary '{boundary}'.")
    else:
        bset = boundary
    return build_graph(width * height, edges, bset)


def complete(n: int, boundary: Iterable[int] = ()) -> Graph:
    """Complete graph :math:`K_n`."""
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return build_graph(n, edges, boundary)


def random_tree(n: int, seed: int, boundary: Iterable[int] = ()) -> Graph:
    """
    Random recursive tree: vertex ``i`` attaches to a uniformly chosen earlier
    vertex.
    """
    rng = np.random.default_rng(seed)
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    return build_graph(n, edges, boundary)


def contract_boundary(graph: Graph, return_map: bool = False):
    """
    Identifies all boundary vertices into a single vertex :math:`v_0`.

    Non-boundary vertices are renumbered in increasing order and :math:`v_0` is
    appended as the last vertex. Edges between boundary vertices disappear and
    parallel edges created by the identification are merged.

    Parameters
    ----------
    graph
        Graph with a non-empty boundary.

    return_map
        If ``True``, also return the array mapping old vertex indices to new ones.

    Returns
    -------
    contracted: Graph
        The contracted graph with boundary :math:`\\{v_0\\}`.

    """
    if len(graph.boundary) == 0:
        raise ValueError("Cannot contract an empty boundary.")
    interior = graph.interior
    vmap = np.empty(graph.vertex_count, dtype=int)
    vmap[interior] = np.arange(len(interior))
    v0 = len(interior)
    vmap[list(graph.boundary)] = v0
    edges = []
    seen = set()
    for u, v in graph.edges:
        a, b = int(vmap[u]), int(vmap[v])
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key not in seen:
            seen.add(key)
            edges.append(key)
    contracted = build_graph(v0 + 1, edges, [v0])
    if return_map:
        return contracted, vmap
    return contracted


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.size[rx] < self.size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        self.size[rx] += self.size[ry]


def check_bonds(graph: Graph, omega: BondConfig) -> np.ndarray:
    """"""
    omega = np.asarray(omega, dtype=bool)
    if omega.shape != (graph.edge_count,):
        raise ValueError(
            f"Bond configuration of shape {omega.shape} does not match "
            f"{graph.edge_count} edges."
        )
    return omega


def connected_components(graph: Graph, omega: BondConfig) -> Partition:
    """
    Partition of the vertices by open bonds.

    Parameters
    ----------
    graph
        The graph.

    omega
        Open (``True``) and closed (``False``) bonds, one per edge.

    Returns
    -------
    partition: Partition

    """
    omega = check_bonds(graph, omega)
    uf = _UnionFind(graph.vertex_count)
    for ei in np.flatnonzero(omega):
        u, v = graph.edges[ei]
        uf.union(u, v)
    ids = np.empty(graph.vertex_count, dtype=int)
    relabel = {}
    for v in range(graph.vertex_count):
        root = uf.find(v)
        if root not in relabel:
            relabel[root] = len(relabel)
        ids[v] = relabel[root]
    return Partition(component_id=ids, component_count=len(relabel))


def boundary_components(graph: Graph, partition: Partition) -> np.ndarray:
    """Boolean mask over component ids: ``True`` if the component meets the boundary."""
    touch = np.zeros(partition.component_count, dtype=bool)
    touch[partition.component_id[graph.boundary_mask]] = True
    return touch


def reaches_boundary(graph: Graph, omega: BondConfig, vertex: int) -> bool:
    """``True`` iff the open cluster of ``vertex`` intersects the boundary."""
    if vertex in graph.boundary:
        return True
    partition = connected_components(graph, omega)
    return bool(boundary_components(graph, partition)[partition.component_id[vertex]])


def level_connected(
    graph: Graph,
    heights: np.ndarray,
    level: float,
    mode: str,
    target: int,
) -> bool:
    """
    Level-set connectivity between the boundary and a target vertex.

    Parameters
    ----------
    graph
        The graph.

    heights
        Real heights, one per vertex.

    level
        The threshold :math:`m`.

    mode
        ``"below"`` requires :math:`\\varphi < m` on every vertex of the path,
        ``"above"`` requires :math:`\\varphi > m`.

    target
        The vertex to be reached. It has to satisfy the constraint itself.

    Returns
    -------
    connected: bool

    """
    heights = np.asarray(heights, dtype=float)
    if mode == "below":
        ok = heights < level
    elif mode == "above":
        ok = heights > level
    else:
        raise ValueError(f"Unknown level-connectivity mode '{mode}'.")
    if not ok[target]:
        return False
    seen = np.zeros(graph.vertex_count, dtype=bool)
    queue = deque()
    for b in graph.boundary:
        if ok[b]:
            seen[b] = True
            queue.append(b)
    while queue:
        u = queue.popleft()
        if u == target:
            return True
        for _, w in graph.incidence[u]:
            if ok[w] and not seen[w]:
                seen[w] = True
                queue.append(w)
    return False


def is_tree(graph: Graph) -> bool:
    """``True`` iff the graph is connected and acyclic."""
    if graph.vertex_count == 0:
        return False
    if graph.edge_count != graph.vertex_count - 1:
        return False
    partition = connected_components(graph, np.ones(graph.edge_count, dtype=bool))
    return partition.component_count == 1


def components_meet_boundary(graph: Graph) -> bool:
    """``True`` iff every connected component of the graph contains a boundary vertex."""
    partition = connected_components(graph, np.ones(graph.edge_count, dtype=bool))
    return bool(boundary_components(graph, partition).all())

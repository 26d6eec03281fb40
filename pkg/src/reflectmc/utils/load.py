"""
.. codeauthor::
    reflectmc authors

Loaders for the files referenced by a `recipe`.

Edge lists are text files: a first line with the number of vertices, then one edge
``u v`` per line, then a line ``boundary: i j k ...`` listing :math:`V_0`. Blank lines
and lines starting with ``#`` are ignored. Without the first line, the number of
vertices is one more than the largest index; without the ``boundary:`` line, the
boundary is empty.

Tabulated potentials are CSV files with two columns, :math:`x` and :math:`U(x)`,
where :math:`U` may be ``inf``. The columns are either named ``x`` and ``u`` or
given without a header line.

"""

import logging
import os
from typing import Iterable, Optional

import pandas as pd

from reflectmc.core.graph import Graph, build_graph
from reflectmc.core.potentials import Potential, tabulated

logger = logging.getLogger(__name__)


def _parse_edges(path: str) -> tuple[Optional[int], list, Optional[list]]:
    count = None
    edges = []
    boundary = None
    with open(path, "r") as f:
        lines = f.readlines()
    for ln, line in enumerate(lines, start=1):
        line = line.strip()
        if line == "" or line.startswith("#"):
            continue
        if line.lower().startswith("boundary:"):
            if boundary is not None:
                raise ValueError(f"'{path}', line {ln}: second 'boundary:' line.")
            try:
                boundary = [int(i) for i in line.split(":", 1)[1].split()]
            except ValueError as e:
                raise ValueError(f"'{path}', line {ln}: invalid boundary.") from e
            continue
        parts = line.split()
        try:
            values = [int(p) for p in parts]
        except ValueError as e:
            raise ValueError(f"'{path}', line {ln}: expected integers.") from e
        if len(values) == 1 and count is None and len(edges) == 0:
            count = values[0]
        elif len(values) == 2 and boundary is None:
            edges.append((values[0], values[1]))
        else:
            raise ValueError(f"'{path}', line {ln}: expected an edge 'u v'.")
    return count, edges, boundary


def load_edges(
    path: str,
    vertex_count: Optional[int] = None,
    boundary: Optional[Iterable[int]] = None,
) -> Graph:
    """
    Loads a graph from an edge-list file.

    Parameters
    ----------
    path
        Path to the edge list.

    vertex_count
        Overrides the number of vertices given in the file.

    boundary
        Overrides the ``boundary:`` line of the file.

    """
    assert os.path.exists(path), f"Provided 'path' '{path}' does not exist."
    assert os.path.isfile(path), f"Provided 'path' '{path}' is not a file."
    logger.debug("loading edge list from '%s'", path)
    count, edges, file_boundary = _parse_edges(path)
    if vertex_count is None:
        vertex_count = count
    if vertex_count is None:
        vertex_count = max((max(e) for e in edges), default=-1) + 1
    if boundary is None:
        boundary = file_boundary or []
    return build_graph(vertex_count, edges, boundary)


def load_potential(path: str, name: Optional[str] = None) -> Potential:
    """"""
    assert os.path.exists(path), f"Provided 'path' '{path}' does not exist."
    assert os.path.isfile(path), f"Provided 'path' '{path}' is not a file."
    logger.debug("loading tabulated potential from '%s'", path)
    first = pd.read_csv(path, header=None, nrows=1).iloc[0]
    if pd.to_numeric(first, errors="coerce").notna().all():
        df = pd.read_csv(path, header=None)
        if df.shape[1] != 2:
            raise ValueError(
                f"Potential table '{path}' needs two columns, got {df.shape[1]}."
            )
        df.columns = ["x", "u"]
    else:
        df = pd.read_csv(path)
        if not {"x", "u"} <= set(df.columns):
            raise ValueError(
                f"Potential table '{path}' needs the columns 'x' and 'u'."
            )
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    return tabulated(df["x"].to_numpy(float), df["u"].to_numpy(float), name)

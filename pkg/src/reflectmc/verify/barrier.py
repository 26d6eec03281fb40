"""
.. codeauthor::
    reflectmc authors

Reflection principle for random surfaces.

The height barrier between the boundary and a vertex :math:`v` is the event that every
path from the boundary to :math:`v` visits a vertex with :math:`\\varphi \\ge m`. For
monotone potentials and :math:`m \\ge 0`,

.. math::

    \\tfrac12 P(|\\varphi_v| \\ge m) \\le P(\\mathrm{barrier}) \\le P(|\\varphi_v| \\ge m),

and :math:`P(\\mathrm{barrier}) \\ge P(|\\varphi_v| \\ge m) - P(\\varphi_v \\in (m, m+1))`
if the potential has Lipschitz support. More generally
:math:`P(\\mathrm{barrier}, \\varphi_v \\in D) \\le P(\\varphi_v \\in 2m - D)` for every
:math:`D`, and :math:`P(\\mathrm{barrier}, \\varphi_v \\in D) \\ge P(\\varphi_v \\in 2m + 1 - D)`
for :math:`D \\subseteq (-\\infty, m]` under the Lipschitz condition.

Heights and levels are measured relative to the boundary height. Every estimate
averages a sample with its mirror image around the boundary height, which has the
same law; on a path the tight bounds then hold sample by sample.

.. rubric:: Functions

.. autosummary::

    check_reflection_principle

"""

import logging
from typing import Optional, Sequence

import numpy as np

from reflectmc.core.graph import contract_boundary, is_tree, level_connected
from reflectmc.core.models import HeightModel
from reflectmc.core.oracle import Barrier, Interval, path_quadrature
from reflectmc.core.samplers import ChainSettings
from reflectmc.verify.sampling import aux_rng, equilibrium_samples, estimate, stacked
from reflectmc.verify.sides import count_side_violations
from reflectmc.verify.verdicts import TestVerdict, judge

logger = logging.getLogger(__name__)


def _union(intervals) -> tuple:
    out = tuple((float(lo), float(hi)) for lo, hi in intervals)
    for lo, hi in out:
        if not lo < hi:
            raise ValueError(f"Interval ({lo}, {hi}) is empty.")
    return out


def _within(x: np.ndarray, intervals) -> np.ndarray:
    hit = np.zeros(x.shape, dtype=bool)
    for lo, hi in intervals:
        hit |= (x > lo) & (x < hi)
    return hit


def _mirror(intervals, centre: float) -> tuple:
    """The image of an interval union under :math:`x \\mapsto 2c - x`."""
    return tuple((2 * centre - hi, 2 * centre - lo) for lo, hi in intervals)


def barrier_indicator(
    model: HeightModel,
    samples: np.ndarray,
    vertex: int,
    level: float,
) -> np.ndarray:
    """Per-sample indicator of the height barrier at ``level`` above the boundary."""
    m = model.boundary_height + level
    return np.array(
        [not level_connected(model.graph, phi, m, "below", vertex) for phi in samples],
        dtype=float,
    )


def check_reflection_principle(
    model: HeightModel,
    settings: ChainSettings,
    *,
    replicas: int = 1,
    threads: Optional[int] = None,
    vertex: int = 0,
    level: float = 0.0,
    intervals: Optional[Sequence[Sequence[Sequence[float]]]] = None,
    lower_intervals: Optional[Sequence[Sequence[Sequence[float]]]] = None,
    oracle: bool = False,
    side_pairs: int = 200,
) -> list[TestVerdict]:
    """
    Reflection-principle inequalities for the height barrier.

    Parameters
    ----------
    model
        Surface model with a monotone potential.

    vertex
        The vertex :math:`v`.

    level
        The level :math:`m \\ge 0`.

    intervals
        Interval unions :math:`D` for the generalised upper bound, each a list of
        ``[lo, hi]`` pairs.

    lower_intervals
        Interval unions :math:`D \\subseteq (-\\infty, m]` for the generalised lower
        bound; only used with Lipschitz potentials.

    oracle
        Compare the estimates with :func:`~reflectmc.core.oracle.path_quadrature`;
        needs a graph which is a tree after contracting the boundary.

    side_pairs
        Number of samples on which cluster one-sidedness is checked.

    Returns
    -------
    verdicts: list[TestVerdict]

    """
    if not isinstance(model, HeightModel):
        raise TypeError(
            f"Reflection principle needs a surface model, got {type(model).__name__}."
        )
    if level < 0:
        raise ValueError(f"Level must be non-negative, got {level}.")
    if not model.potential.is_monotone:
        raise ValueError(f"Potential '{model.potential.name}' is not monotone.")
    lipschitz = model.potential.is_lipschitz_support
    m = float(level)
    v = int(vertex)
    b0 = model.boundary_height
    batches = equilibrium_samples(model, settings, replicas, threads)
    seed = settings.seed
    cache = {}

    def parts(s, sign):
        key = (id(s), sign)
        if key not in cache:
            phi = s if sign > 0 else 2.0 * b0 - s
            x = phi[:, v] - b0
            cache[key] = (
                barrier_indicator(model, phi, v, m),
                (np.abs(x) >= m).astype(float),
                ((x > m) & (x < m + 1)).astype(float),
                x,
            )
        return cache[key]

    def est(func):
        return estimate(
            batches, lambda s: 0.5 * (func(*parts(s, 1)) + func(*parts(s, -1)))
        )

    verdicts = []
    pb, sb, n = est(lambda b, t, w, x: b)
    pt, st, _ = est(lambda b, t, w, x: t)
    pw, sw, _ = est(lambda b, t, w, x: w)
    logger.info(
        "Barrier %.4g +- %.2g, tail %.4g +- %.2g, strip %.4g +- %.2g.",
        pb,
        sb,
        pt,
        st,
        pw,
        sw,
    )

    d, sd, _ = est(lambda b, t, w, x: b - 0.5 * t)
    note = f"P(barrier) = {pb:.6g}, P(|phi| >= m) = {pt:.6g}"
    verdicts.append(
        judge("barrier-lower", "barrier-lower-bound", d, sd, 0.0, ">=", n, seed, note)
    )
    d, sd, _ = est(lambda b, t, w, x: b - t)
    verdicts.append(
        judge("barrier-upper", "barrier-upper-bound", d, sd, 0.0, "<=", n, seed)
    )
    if lipschitz:
        d, sd, _ = est(lambda b, t, w, x: b - t + w)
        note = f"P(phi in (m, m+1)) = {pw:.6g}"
        verdicts.append(
            judge(
                "barrier-lipschitz-lower",
                "barrier-lipschitz-bound",
                d,
                sd,
                0.0,
                ">=",
                n,
                seed,
                note,
            )
        )

    for i, D in enumerate(intervals or []):
        D = _union(D)
        mD = _mirror(D, m)
        d, sd, _ = est(lambda b, t, w, x: b * _within(x, D) - _within(x, mD))
        verdicts.append(
            judge(
                f"barrier-general-upper[{i}]",
                "barrier-general-upper",
                d,
                sd,
                0.0,
                "<=",
                n,
                seed,
                f"D = {list(D)}",
            )
        )
    if lower_intervals and not lipschitz:
        logger.warning("Skipping generalised lower bounds: potential is not Lipschitz.")
        lower_intervals = None
    for i, D in enumerate(lower_intervals or []):
        D = _union(D)
        if max(hi for _, hi in D) > m:
            raise ValueError(
                f"Interval union {list(D)} is not contained in (-inf, {m}]."
            )
        mD = _mirror(D, m + 0.5)
        d, sd, _ = est(lambda b, t, w, x: b * _within(x, D) - _within(x, mD))
        verdicts.append(
            judge(
                f"barrier-general-lower[{i}]",
                "barrier-general-lower",
                d,
                sd,
                0.0,
                ">=",
                n,
                seed,
                f"D = {list(D)}",
            )
        )

    if oracle:
        if not is_tree(contract_boundary(model.graph)):
            raise ValueError(
                "Quadrature oracle needs a tree after contracting the boundary."
            )
        inner = Interval(v, b0 - m, b0 + m)
        strip = Interval(v, b0 + m, b0 + m + 1)
        barrier = Barrier(v, b0 + m)
        law = path_quadrature(model, [barrier, inner, strip], self_check=True)
        targets = {
            "barrier": (pb, sb, law.probabilities[barrier]),
            "tail": (pt, st, 1.0 - law.probabilities[inner]),
            "strip": (pw, sw, law.probabilities[strip]),
        }
        for name, (p, s, target) in targets.items():
            verdicts.append(
                judge(
                    f"barrier-oracle[{name}]",
                    "barrier-oracle",
                    p,
                    s,
                    target,
                    "~=",
                    n,
                    seed,
                    f"quadrature step {law.step:g}",
                )
            )

    if side_pairs > 0:
        bad, total = count_side_violations(
            model, settings, stacked(batches)[:side_pairs], aux_rng(settings, 1)
        )
        verdicts.append(
            judge(
                "barrier-sides", "cluster-one-sided", bad, 0.0, 0.0, "~=", total, seed
            )
        )
    return verdicts

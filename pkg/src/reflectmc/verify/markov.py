"""
.. codeauthor::
    reflectmc authors

Reflections of reversible Markov chains.

A permutation :math:`\\tau` of the state space is a reflection of the path model of a
reversible chain started from :math:`\\mu` if it is an involution, preserves the
stationary law :math:`\\pi` and preserves the transition matrix,
:math:`P(\\tau a, \\tau b) = P(a, b)`. The path of the chain is then a discrete model on
the path graph with boundary :math:`\\{0\\}` and the cluster flips of the
:math:`\\tau`-Edwards-Sokal coupling preserve its joint law.

.. rubric:: Functions

.. autosummary::

    check_markov_reflection

"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from reflectmc.core.models import MarkovChainModel, markov_chain_model
from reflectmc.core.oracle import (
    ORACLE_LIMIT,
    OracleOverflowError,
    enumerate_exact,
    enumerate_joint_es,
    flip_at,
    pushforward_equals,
)
from reflectmc.core.reflections import discrete_involution
from reflectmc.core.samplers import ChainSettings
from reflectmc.verify.verdicts import EXACT_TOL, TestVerdict, judge

logger = logging.getLogger(__name__)


def path_law_distance(model: MarkovChainModel) -> float:
    """
    Sup-norm distance between the enumerated law of the path model and
    :math:`\\mu(x_0)\\prod_j P(x_{j-1}, x_j)`.
    """
    law = enumerate_exact(model)
    P, mu = model.transition, model.initial
    worst = 0.0
    for x, p in zip(law.support, law.probability):
        direct = mu[x[0]] * math.prod(P[a, b] for a, b in zip(x[:-1], x[1:]))
        worst = max(worst, abs(p - direct))
    return worst


def check_markov_reflection(
    model: MarkovChainModel,
    settings: Optional[ChainSettings] = None,
    *,
    replicas: int = 1,
    threads: Optional[int] = None,
    involution: Sequence[int] = (),
    n_steps: Optional[int] = None,
    limit: int = ORACLE_LIMIT,
) -> list[TestVerdict]:
    """
    Exact check of a reflection of a reversible Markov chain.

    Parameters
    ----------
    model
        Path model built by :func:`~reflectmc.core.models.markov_chain_model`.

    involution
        The permutation :math:`\\tau` as a table.

    n_steps
        Number of steps, defaults to the length of the model path.

    Returns
    -------
    verdicts: list[TestVerdict]
        The involution, stationarity and kernel conditions with the offending pair in
        the note, the path law and, if the conditions hold, the invariance of the joint
        law under the flip of the cluster of every vertex.

    """
    if not isinstance(model, MarkovChainModel):
        raise TypeError(
            f"Markov reflection needs a Markov chain model, got {type(model).__name__}."
        )
    if n_steps is not None and n_steps != model.n_steps:
        model = markov_chain_model(
            model.transition, model.stationary, model.initial, n_steps
        )
    S = model.q
    n = model.n_steps
    if S ** (n + 1) * 2**n > limit:
        raise OracleOverflowError(
            f"{S}^{n + 1} * 2^{n} joint states exceed the limit of {limit}."
        )
    tau = np.asarray(involution, dtype=int)
    if tau.shape != (S,) or np.any(tau < 0) or np.any(tau >= S):
        raise ValueError(f"Involution {tau.tolist()} is not a map of the {S} states.")
    P, pi = model.transition, model.stationary
    verdicts = []

    bad = np.flatnonzero(tau[tau] != np.arange(S))
    note = "" if bad.size == 0 else f"tau(tau({bad[0]})) = {tau[tau[bad[0]]]}"
    verdicts.append(
        judge(
            "markov-involution",
            "markov-reflection",
            bad.size,
            0.0,
            0.0,
            "~=",
            S,
            None,
            note,
        )
    )

    diff = np.abs(pi[tau] - pi)
    a = int(np.argmax(diff))
    note = "" if diff[a] <= EXACT_TOL else f"pi({tau[a]}) != pi({a})"
    verdicts.append(
        judge(
            "markov-stationary",
            "markov-reflection",
            diff[a],
            0.0,
            EXACT_TOL,
            "<=",
            S,
            None,
            note,
        )
    )

    diff = np.abs(P[np.ix_(tau, tau)] - P)
    a, b = np.unravel_index(int(np.argmax(diff)), diff.shape)
    note = "" if diff[a, b] <= EXACT_TOL else f"P({tau[a]}, {tau[b]}) != P({a}, {b})"
    verdicts.append(
        judge(
            "markov-kernel",
            "markov-reflection",
            diff[a, b],
            0.0,
            EXACT_TOL,
            "<=",
            S * S,
            None,
            note,
        )
    )

    verdicts.append(
        judge(
            "markov-path-law",
            "markov-path-law",
            path_law_distance(model),
            0.0,
            EXACT_TOL,
            "<=",
            S ** (n + 1),
        )
    )

    if any(v.status != "pass" for v in verdicts[:3]):
        logger.warning("Reflection conditions fail; skipping the pushforward check.")
        return verdicts
    reflection = discrete_involution(tau)
    joint = enumerate_joint_es(model, reflection, limit)
    flips = [flip_at(model.graph, reflection, x) for x in range(n + 1)]
    dist = max((pushforward_equals(joint, f) for f in flips), default=0.0)
    verdicts.append(
        judge("markov-flip", "flip-invariance", dist, 0.0, EXACT_TOL, "<=", len(joint))
    )
    return verdicts

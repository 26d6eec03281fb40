"""
.. codeauthor::
    reflectmc authors

Equilibrium samplers. Single-site sweeps are the ergodic baseline; the Wolff-type
and Swendsen-Wang-type cluster moves built on the :math:`\\tau`-Edwards-Sokal
coupling are mixed in according to :class:`ChainSettings`.

Every chain owns its :class:`numpy.random.Generator`. Replica ``r`` of a run with
master seed ``s`` uses the stream seeded by

.. code::

    np.random.SeedSequence(s, spawn_key=(r,)).generate_state(1, np.uint64)[0]

so that replicas are independent of each other and of the order in which they are
executed.

Reflection parameters (the level :math:`m`, the direction :math:`a`, the involution)
are drawn before the configuration is read.

.. rubric:: Functions

.. autosummary::

    single_site_sweep
    wolff_step
    sw_step
    run_chain
    run_replicas
    calibrate_burn_in
    batch_means

"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import singledispatch
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
)
from scipy.special import expit

from reflectmc.core.models import (
    ModelSpec,
    DiscreteModel,
    HeightModel,
    SphereModel,
    ProductModel,
)
from reflectmc.core.reflections import (
    Reflection,
    discrete_involution,
    flip_component,
    sample_bonds,
    spin_reflection,
    surface_reflection,
    swap_reflection,
    swendsen_wang_flip,
)

logger = logging.getLogger(__name__)

LIPSCHITZ_TOL = 1e-12
REJECTION_CAP = 10_000
MAX_DOUBLINGS = 8


class Move(BaseModel):
    """A move kind with its relative weight in the mix."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["single_site", "wolff_cluster", "swendsen_wang"]
    weight: PositiveFloat = 1.0


class Involution(BaseModel):
    """A label permutation used as a discrete reflection, with its weight."""

    model_config = ConfigDict(extra="forbid")

    table: list[NonNegativeInt]
    weight: PositiveFloat = 1.0


class ChainSettings(BaseModel):
    """
    Settings of a single chain.

    One step applies one move drawn from ``move_mix``; a ``single_site`` move is a
    full sweep. ``burn_in_sweeps`` steps are discarded, then a sample is stored after
    every ``thinning`` steps.
    """

    model_config = ConfigDict(extra="forbid")

    burn_in_sweeps: NonNegativeInt = 1000
    thinning: PositiveInt = 1
    n_samples: PositiveInt = 1000
    seed: int = Field(default=0, ge=0, lt=2**64)
    move_mix: list[Move] = Field(default_factory=lambda: [Move(kind="single_site")])
    window: PositiveFloat = 3.0
    """Surface reflection levels are uniform in ``boundary_height ± window``."""
    involutions: Optional[list[Involution]] = None
    """Discrete reflections; defaults to the transposition of labels 0 and 1."""
    metropolis_step: PositiveFloat = 0.5
    adaptive_burn_in: bool = False


@dataclass
class SampleBatch:
    """Stored samples of one chain, with their step indices and seed provenance."""

    samples: np.ndarray
    steps: np.ndarray
    replica: int
    seed: int

    def __len__(self) -> int:
        return len(self.steps)


def replica_seed(master: int, replica: int) -> int:
    """Seed of replica ``replica`` under the master seed ``master``."""
    ss = np.random.SeedSequence(master, spawn_key=(replica,))
    return int(ss.generate_state(1, np.uint64)[0])


@singledispatch
def initial_configuration(model: ModelSpec) -> np.ndarray:
    """Deterministic, boundary-consistent start of a chain."""
    raise TypeError(f"No initial configuration for {type(model).__name__}.")


@initial_configuration.register
def _(model: DiscreteModel) -> np.ndarray:
    return np.argmax(model.site_weights, axis=1).astype(int)


@initial_configuration.register
def _(model: HeightModel) -> np.ndarray:
    return np.full(model.graph.vertex_count, model.boundary_height)


@initial_configuration.register
def _(model: SphereModel) -> np.ndarray:
    phi = np.zeros((model.graph.vertex_count, model.n))
    phi[:, 0] = 1.0
    return phi


@initial_configuration.register
def _(model: ProductModel) -> np.ndarray:
    return np.stack(
        [initial_configuration(model.first), initial_configuration(model.second)],
        axis=1,
    )


def _count(stats: Optional[dict], accepted: bool) -> None:
    if stats is not None:
        stats["proposed"] = stats.get("proposed", 0) + 1
        stats["accepted"] = stats.get("accepted", 0) + int(accepted)


def assert_valid(model: ModelSpec, phi: np.ndarray) -> None:
    """Hard check of the almost-sure Lipschitz property of Lipschitz surfaces."""
    if isinstance(model, ProductModel):
        assert_valid(model.first, phi[:, 0])
        assert_valid(model.second, phi[:, 1])
    elif isinstance(model, HeightModel) and model.potential.is_lipschitz_support:
        excess = model.lipschitz_excess(phi)
        assert excess <= LIPSCHITZ_TOL, (
            f"Lipschitz constraint violated by {excess} after a move."
        )


@singledispatch
def single_site_sweep(
    model: ModelSpec,
    phi: np.ndarray,
    rng: np.random.Generator,
    step: float = 0.5,
    stats: Optional[dict] = None,
) -> np.ndarray:
    """
    One pass over the non-pinned vertices, in increasing order.

    Discrete models use exact heat-bath updates. Surfaces with a flat Lipschitz
    potential draw uniformly from the intersection of the neighbour intervals;
    other Lipschitz surfaces use rejection sampling from that interval, and
    non-Lipschitz surfaces use Metropolis moves of size ``step``. Spins use an exact
    heat-bath for :math:`n = 1` and Metropolis moves on the sphere otherwise.

    Parameters
    ----------
    model
        The model.

    phi
        Current configuration; not modified.

    rng
        Random number generator.

    step
        Metropolis proposal scale.

    stats
        Optional dictionary accumulating ``proposed`` and ``accepted`` Metropolis
        counts.

    Returns
    -------
    phi: np.ndarray
        The updated configuration.

    """
    raise TypeError(f"No single-site sweep for {type(model).__name__}.")


@single_site_sweep.register
def _(model: DiscreteModel, phi, rng, step=0.5, stats=None):
    phi = np.array(phi, dtype=int)
    inc = model.graph.incidence
    for v in model.free_vertices:
        w = model.site_weights[v].copy()
        for e, u in inc[v]:
            w *= model.weights[e, :, phi[u]]
        cw = np.cumsum(w)
        assert cw[-1] > 0, f"Empty conditional support at vertex {v}."
        label = np.searchsorted(cw, rng.random() * cw[-1], side="right")
        phi[v] = min(int(label), model.q - 1)
    return phi


def _rejection(U, centres, scales, lo, hi, floor, rng) -> float:
    """
    Draws from the conditional density on ``[lo, hi]`` by uniform proposals.

    The envelope is :math:`\\exp(-\\deg(v) \\min U)`, a global bound on the
    conditional density for monotone potentials. The density at the midpoint of the
    feasible interval is only a bound when the conditional is unimodal around it, which
    does not hold for all tabulated potentials.
    """
    deg = centres.size
    tries = 0
    while tries < REJECTION_CAP:
        y = lo + (hi - lo) * rng.random(32)
        logacc = -np.sum(U(np.abs(y[:, None] - centres) / scales), axis=1) + deg * floor
        hit = np.flatnonzero(np.log(rng.random(32)) < logacc)
        if hit.size > 0:
            return float(y[hit[0]])
        tries += 32
    raise RuntimeError(
        f"Rejection sampling failed after {REJECTION_CAP} proposals on [{lo}, {hi}]."
    )


@single_site_sweep.register
def _(model: HeightModel, phi, rng, step=0.5, stats=None):
    phi = np.array(phi, dtype=float)
    U = model.potential
    scale = model.scale()
    reach = scale * U.support
    inc = model.graph.incidence
    for v in model.graph.interior:
        es = np.array([e for e, _ in inc[v]], dtype=int)
        centres = phi[[u for _, u in inc[v]]]
        if U.is_lipschitz_support:
            lo = np.max(centres - reach[es])
            hi = np.min(centres + reach[es])
            if lo > hi:
                assert lo - hi <= LIPSCHITZ_TOL, (
                    f"Empty conditional support at vertex {v}: [{lo}, {hi}]."
                )
                lo = hi = 0.5 * (lo + hi)
            if U.is_flat:
                phi[v] = lo + (hi - lo) * rng.random()
            else:
                phi[v] = _rejection(U, centres, scale[es], lo, hi, U.floor, rng)
        else:
            y = phi[v] + step * rng.normal()
            new = -np.sum(U(np.abs(y - centres) / scale[es]))
            old = -np.sum(U(np.abs(phi[v] - centres) / scale[es]))
            accept = bool(np.log(rng.random()) < new - old)
            if accept:
                phi[v] = y
            _count(stats, accept)
    assert_valid(model, phi)
    return phi


@single_site_sweep.register
def _(model: SphereModel, phi, rng, step=0.5, stats=None):
    phi = np.array(phi, dtype=float)
    U = model.potential
    inc = model.graph.incidence
    for v in model.graph.interior:
        nb = phi[[u for _, u in inc[v]]]
        if model.n == 1:
            c = nb[:, 0]
            lp = -np.sum(U(c)) + np.sum(U(-c))
            phi[v, 0] = 1.0 if rng.random() < expit(lp) else -1.0
        else:
            a = phi[v]
            b = a + step * rng.normal(size=model.n)
            b /= np.linalg.norm(b)
            new = -np.sum(U(np.clip(nb @ b, -1, 1)))
            old = -np.sum(U(np.clip(nb @ a, -1, 1)))
            accept = bool(np.log(rng.random()) < new - old)
            if accept:
                phi[v] = b
            _count(stats, accept)
    return phi


@single_site_sweep.register
def _(model: ProductModel, phi, rng, step=0.5, stats=None):
    first = single_site_sweep(model.first, phi[:, 0], rng, step, stats)
    second = single_site_sweep(model.second, phi[:, 1], rng, step, stats)
    return np.stack([first, second], axis=1)


@singledispatch
def draw_reflection(
    model: ModelSpec,
    settings: ChainSettings,
    rng: np.random.Generator,
) -> Reflection:
    """Draws a reflection from the law configured in ``settings``."""
    raise TypeError(f"No reflection law for {type(model).__name__}.")


@draw_reflection.register
def _(model: HeightModel, settings, rng):
    c = model.boundary_height
    return surface_reflection(rng.uniform(c - settings.window, c + settings.window))


@draw_reflection.register
def _(model: SphereModel, settings, rng):
    g = rng.normal(size=model.n)
    return spin_reflection(g / np.linalg.norm(g))


@draw_reflection.register
def _(model: ProductModel, settings, rng):
    return swap_reflection()


@draw_reflection.register
def _(model: DiscreteModel, settings, rng):
    if settings.involutions is None:
        table = np.arange(model.q)
        if model.q >= 2:
            table[[0, 1]] = [1, 0]
        return discrete_involution(table)
    w = np.array([i.weight for i in settings.involutions])
    k = int(rng.choice(len(w), p=w / w.sum())) if len(w) > 1 else 0
    return discrete_involution(settings.involutions[k].table)


def wolff_step(
    model: ModelSpec,
    phi: np.ndarray,
    settings: ChainSettings,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Single-cluster move: draws :math:`\\tau`, a uniform vertex :math:`x` and the
    bonds :math:`\\omega`, then flips the open cluster of :math:`x`.
    """
    reflection = draw_reflection(model, settings, rng)
    x = int(rng.integers(model.graph.vertex_count))
    omega = sample_bonds(model, reflection, phi, rng)
    return flip_component(model.graph, phi, omega, reflection, x)


def sw_step(
    model: ModelSpec,
    phi: np.ndarray,
    settings: ChainSettings,
    rng: np.random.Generator,
) -> np.ndarray:
    """All-cluster move: draws :math:`\\tau` and :math:`\\omega`, then flips each
    free cluster with probability 1/2."""
    reflection = draw_reflection(model, settings, rng)
    omega = sample_bonds(model, reflection, phi, rng)
    return swendsen_wang_flip(model.graph, phi, omega, reflection, rng)


def run_chain(
    model: ModelSpec,
    settings: ChainSettings,
    observe: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    replica: int = 0,
) -> SampleBatch:
    """
    Runs one chain seeded by ``settings.seed``.

    Parameters
    ----------
    model
        The model.

    settings
        Chain settings.

    observe
        Optional function mapping a configuration to the stored observable. By
        default, configurations are stored.

    replica
        Replica index recorded in the batch.

    Returns
    -------
    batch: SampleBatch

    """
    rng = np.random.default_rng(settings.seed)
    kinds = [m.kind for m in settings.move_mix]
    weights = np.array([m.weight for m in settings.move_mix])
    stats = {}

    def advance(phi):
        if len(kinds) == 0:
            return phi
        if len(kinds) == 1:
            kind = kinds[0]
        else:
            kind = kinds[int(rng.choice(len(kinds), p=weights / weights.sum()))]
        if kind == "single_site":
            return single_site_sweep(model, phi, rng, settings.metropolis_step, stats)
        elif kind == "wolff_cluster":
            phi = wolff_step(model, phi, settings, rng)
        else:
            phi = sw_step(model, phi, settings, rng)
        assert_valid(model, phi)
        return phi

    phi = initial_configuration(model)
    for _ in range(settings.burn_in_sweeps):
        phi = advance(phi)
    step = settings.burn_in_sweeps
    samples = []
    steps = []
    for _ in range(settings.n_samples):
        for _ in range(settings.thinning):
            phi = advance(phi)
            step += 1
        samples.append(phi.copy() if observe is None else observe(phi))
        steps.append(step)
    if stats.get("proposed", 0) > 0:
        logger.debug(
            "Replica %d: Metropolis acceptance rate %.3f.",
            replica,
            stats["accepted"] / stats["proposed"],
        )
    return SampleBatch(
        samples=np.asarray(samples),
        steps=np.array(steps, dtype=int),
        replica=replica,
        seed=settings.seed,
    )


def global_observable(model: ModelSpec, phi: np.ndarray) -> float:
    """Mean height, mean label, or magnetisation along :math:`e_1`."""
    if isinstance(model, SphereModel):
        return float(np.mean(phi[:, 0]))
    return float(np.mean(phi))


def batch_means(values, n_batches: int = 20) -> tuple[float, float]:
    """
    Mean and batch-means standard error.

    Parameters
    ----------
    values
        A sequence of per-replica sample arrays (or a single array). Each replica is
        split into ``n_batches`` consecutive batches.

    Returns
    -------
    (mean, std_error): tuple[float, float]

    """
    if isinstance(values, np.ndarray) and values.ndim == 1:
        values = [values]
    means = []
    total = []
    for vals in values:
        vals = np.asarray(vals, dtype=float)
        total.append(vals)
        k = min(n_batches, vals.size)
        if k == 0:
            continue
        size = vals.size // k
        means.extend(vals[: k * size].reshape(k, size).mean(axis=1))
    allv = np.concatenate(total) if total else np.zeros(0)
    mean = float(allv.mean()) if allv.size > 0 else float("nan")
    if len(means) < 2:
        return mean, float("nan")
    return mean, float(np.std(means, ddof=1) / np.sqrt(len(means)))


def calibrate_burn_in(
    model: ModelSpec,
    settings: ChainSettings,
) -> int:
    """
    Doubles the burn-in until two pilot chains agree on the mean of
    :func:`global_observable` within three standard errors.
    """
    burn = max(settings.burn_in_sweeps, 1)
    pilot = settings.model_copy(
        update={"n_samples": min(settings.n_samples, 1000), "adaptive_burn_in": False}
    )

    def observe(phi):
        return global_observable(model, phi)

    for _ in range(MAX_DOUBLINGS):
        batches = []
        for k in range(2):
            s = pilot.model_copy(
                update={
                    "burn_in_sweeps": burn,
                    "seed": replica_seed(settings.seed, 2**31 + k),
                }
            )
            batches.append(run_chain(model, s, observe).samples)
        (ma, sa), (mb, sb) = batch_means(batches[0]), batch_means(batches[1])
        if abs(ma - mb) <= 3 * np.hypot(sa, sb):
            logger.debug("Burn-in of %d sweeps accepted.", burn)
            return burn
        logger.debug("Pilot means %.4g and %.4g disagree, doubling burn-in.", ma, mb)
        burn *= 2
    logger.warning("Burn-in calibration did not converge, using %d sweeps.", burn)
    return burn


def run_replicas(
    model: ModelSpec,
    settings: ChainSettings,
    n_replicas: int,
    threads: Optional[int] = None,
    observe: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> list[SampleBatch]:
    """
    Runs independent replicas, possibly concurrently.

    Parameters
    ----------
    model
        The model.

    settings
        Chain settings; ``settings.seed`` is the master seed.

    n_replicas
        Number of replicas, at least one.

    threads
        Maximum number of worker threads, defaults to the number of logical cores.

    observe
        Passed to :func:`run_chain`.

    Returns
    -------
    batches: list[SampleBatch]
        Ordered by replica index.

    """
    if n_replicas < 1:
        raise ValueError(f"Need at least one replica, got {n_replicas}.")
    if settings.adaptive_burn_in:
        burn = calibrate_burn_in(model, settings)
        settings = settings.model_copy(update={"burn_in_sweeps": burn})
    jobs = [
        (settings.model_copy(update={"seed": replica_seed(settings.seed, r)}), r)
        for r in range(n_replicas)
    ]
    workers = threads or os.cpu_count() or 1
    logger.debug("Running %d replicas on %d threads.", n_replicas, workers)

    def work(job):
        return run_chain(model, job[0], observe, job[1])

    with ThreadPoolExecutor(max_workers=workers) as ex:
        batches = list(ex.map(work, jobs))
    return sorted(batches, key=lambda b: b.replica)

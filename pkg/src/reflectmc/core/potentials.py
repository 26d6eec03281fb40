"""
.. codeauthor::
    reflectmc authors

Gradient potentials :math:`U` for random surfaces and interaction potentials for
spin :math:`O(n)` models.

A surface potential is an even function :math:`U:\\mathbb{R}\\to(-\\infty,\\infty]`
entering the density :math:`\\exp(-\\sum_e U(\\nabla_e\\varphi))`. The flags declared
by each constructor (monotone, Lipschitz support, convex) are spot-checked on a grid
with spacing ``1e-3`` over :math:`[-3, 3]`; they cannot be proven for black-box
functions, so the declared flags are what the samplers and checks rely on.

.. rubric:: Functions

.. autosummary::

    hammock
    quadratic_lipschitz
    quadratic
    inverted_quadratic_lipschitz
    tabulated
    linear_spin

"""

import logging
from dataclasses import dataclass, field
from functools import cache
from typing import Callable, Optional

import numpy as np

logger = logging.getLogger(__name__)

CHECK_GRID = np.round(np.arange(-3000, 3001) * 1e-3, 12)
GRID_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Potential:
    """
    Even gradient potential with declared properties.

    ``func`` is vectorised and may return ``np.inf``. ``survival_inverse``, if given,
    is the generalised inverse :math:`u\\mapsto\\inf\\{s: e^{-U(s)}\\le u\\}` used to
    sample hammock radii; otherwise it is obtained by bisection.

    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    is_monotone: bool = False
    is_lipschitz_support: bool = False
    is_convex: bool = False
    attested_finite: bool = False
    survival_inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None
    is_flat: bool = field(init=False)
    floor: float = field(init=False)

    def __post_init__(self):
        vals = self(CHECK_GRID)
        if np.any(vals == -np.inf) or np.any(np.isnan(vals)):
            raise ValueError(f"Potential '{self.name}' takes the value -inf or nan.")
        if not np.allclose(vals, vals[::-1], rtol=0, atol=GRID_TOL):
            raise ValueError(f"Potential '{self.name}' is not symmetric.")
        finite = np.isfinite(vals)
        if not finite.any():
            raise ValueError(f"Potential '{self.name}' is infinite on the check grid.")
        pos = CHECK_GRID >= 0
        if self.is_monotone:
            pv = vals[pos]
            if not np.all(pv[1:] >= pv[:-1] - GRID_TOL):
                raise ValueError(
                    f"Potential '{self.name}' is declared monotone but decreases "
                    "on [0, 3]."
                )
        if self.is_lipschitz_support:
            if np.any(np.isfinite(vals[np.abs(CHECK_GRID) > 1])):
                raise ValueError(
                    f"Potential '{self.name}' is declared Lipschitz but is finite "
                    "beyond |x| = 1."
                )
        if self.is_convex:
            fv = vals[finite]
            if fv.size > 2 and np.any(np.diff(fv, 2) < -1e-9):
                raise ValueError(
                    f"Potential '{self.name}' is declared convex but is not."
                )
        fv = vals[finite & pos]
        object.__setattr__(self, "is_flat", bool(np.ptp(fv) == 0.0))
        object.__setattr__(self, "floor", float(fv.min()))

    def __call__(self, x) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    @property
    def support(self) -> float:
        """Largest :math:`|x|` on the check grid with finite :math:`U(x)`."""
        vals = self(CHECK_GRID)
        return float(np.abs(CHECK_GRID[np.isfinite(vals)]).max())

    def survival(self, s) -> np.ndarray:
        """:math:`e^{-U(s)}`, with :math:`e^{-\\infty} = 0`."""
        return np.exp(-self(s))

    def inverse_survival(self, u) -> np.ndarray:
        """
        Generalised inverse :math:`\\inf\\{s\\ge 0: e^{-U(s)}\\le u\\}` for ``u`` in
        :math:`(0, e^{-U(0)}]`, using the right-continuous version of :math:`e^{-U}`.
        """
        u = np.asarray(u, dtype=float)
        if self.survival_inverse is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.asarray(self.survival_inverse(u), dtype=float)
        lo = np.zeros_like(u)
        hi = np.ones_like(u)
        for _ in range(64):
            grow = self.survival(hi) > u
            if not grow.any():
                break
            hi = np.where(grow, 2 * hi, hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = self.survival(mid) <= u
            hi = np.where(below, mid, hi)
            lo = np.where(below, lo, mid)
        return hi


def _hammock(x):
    return np.where(np.abs(x) <= 1.0, 0.0, np.inf)


@cache
def hammock() -> Potential:
    """:math:`U = 0` on :math:`[-1, 1]` and :math:`\\infty` elsewhere."""
    return Potential(
        name="hammock",
        func=_hammock,
        is_monotone=True,
        is_lipschitz_support=True,
        is_convex=True,
        attested_finite=True,
        survival_inverse=lambda u: np.ones_like(u),
    )


def _quadratic_lipschitz(x):
    return np.where(np.abs(x) <= 1.0, x * x, np.inf)


def quadratic_lipschitz() -> Potential:
    """:math:`U(x) = x^2` on :math:`[-1, 1]` and :math:`\\infty` elsewhere."""
    return Potential(
        name="quadratic_lipschitz",
        func=_quadratic_lipschitz,
        is_monotone=True,
        is_lipschitz_support=True,
        is_convex=True,
        attested_finite=True,
        survival_inverse=lambda u: np.minimum(np.sqrt(-np.log(u)), 1.0),
    )


def quadratic() -> Potential:
    """:math:`U(x) = x^2`; the finiteness of the partition function is attested."""
    return Potential(
        name="quadratic",
        func=lambda x: x * x,
        is_monotone=True,
        is_lipschitz_support=False,
        is_convex=True,
        attested_finite=True,
        survival_inverse=lambda u: np.sqrt(-np.log(u)),
    )


def inverted_quadratic_lipschitz() -> Potential:
    """
    :math:`U(x) = -x^2` on :math:`[-1, 1]` and :math:`\\infty` elsewhere. Not
    monotone: large gradients are favoured.
    """
    return Potential(
        name="inverted_quadratic_lipschitz",
        func=lambda x: np.where(np.abs(x) <= 1.0, -x * x, np.inf),
        is_monotone=False,
        is_lipschitz_support=True,
        is_convex=False,
        attested_finite=True,
    )


def tabulated(x, u, name: str = "tabulated") -> Potential:
    """
    Potential interpolated linearly from a table of :math:`(x, U(x))`, :math:`x\\ge 0`.

    The table is made non-decreasing by a running maximum, and :math:`U` is
    :math:`\\infty` beyond the last tabulated point.

    Parameters
    ----------
    x
        Non-negative abscissae, strictly increasing, starting at ``0``.

    u
        Potential values; ``inf`` is allowed.

    name
        Name of the potential.

    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.ndim != 1 or x.shape != u.shape or x.size < 2:
        raise ValueError("Tabulated potential needs two columns of equal length >= 2.")
    if x[0] != 0.0 or np.any(np.diff(x) <= 0):
        raise ValueError(
            "Tabulated abscissae must start at 0 and be strictly increasing."
        )
    mono = np.maximum.accumulate(u)
    if np.any(mono != u):
        logger.warning(
            "Tabulated potential '%s' is not monotone; clamped %d values.",
            name,
            int(np.count_nonzero(mono != u)),
        )
    fin = np.isfinite(mono)
    if not fin[0]:
        raise ValueError(f"Tabulated potential '{name}' is infinite at 0.")
    xf, uf = x[fin], mono[fin]
    xmax = xf[-1]

    def func(s):
        a = np.abs(s)
        return np.where(a <= xmax, np.interp(a, xf, uf), np.inf)

    d2 = np.diff(uf, 2) if uf.size > 2 else np.zeros(0)
    convex = bool(np.all(d2 >= -1e-12)) and np.allclose(np.diff(xf), xf[1] - xf[0])
    return Potential(
        name=name,
        func=func,
        is_monotone=True,
        is_lipschitz_support=bool(xmax <= 1.0),
        is_convex=convex,
        attested_finite=True,
    )


@dataclass(frozen=True, eq=False)
class SpinPotential:
    """
    Interaction potential :math:`U:[-1, 1]\\to\\mathbb{R}` of a spin model, entering
    the weight :math:`\\exp(-U(\\langle\\varphi_v,\\varphi_w\\rangle))`.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    is_non_increasing: bool = False

    def __post_init__(self):
        r = np.linspace(-1.0, 1.0, 2001)
        vals = self(r)
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"Spin potential '{self.name}' must be finite on [-1, 1].")
        if self.is_non_increasing and np.any(np.diff(vals) > GRID_TOL):
            raise ValueError(
                f"Spin potential '{self.name}' is declared non-increasing but is not."
            )

    def __call__(self, r) -> np.ndarray:
        return np.asarray(self.func(np.asarray(r, dtype=float)), dtype=float)


def linear_spin(beta: float) -> SpinPotential:
    """The standard spin potential :math:`U(r) = -\\beta r`."""
    if not np.isfinite(beta):
        raise ValueError(f"Inverse temperature must be finite, got {beta}.")
    return SpinPotential(
        name=f"linear_spin({beta})",
        func=lambda r: -beta * r,
        is_non_increasing=beta >= 0,
    )


def by_name(name: str) -> Potential:
    """Built-in surface potential selected by its name."""
    builtins = {
        "hammock": hammock,
        "quadratic_lipschitz": quadratic_lipschitz,
        "quadratic": quadratic,
        "inverted_quadratic_lipschitz": inverted_quadratic_lipschitz,
    }
    if name not in builtins:
        raise ValueError(
            f"Unknown potential '{name}', choose one of {sorted(builtins)}."
        )
    return builtins[name]()

"""
.. codeauthor::
    reflectmc authors

Verdict records and the tolerance policy shared by all checks.

Monte-Carlo estimates carry a batch-means standard error :math:`\\sigma`. Equality
targets pass when :math:`|z| \\le 4`. Inequality targets pass when the point estimate
satisfies them, are ``"inconclusive"`` when violated by less than :math:`4\\sigma`, and
fail otherwise. Exact checks have :math:`\\sigma = 0` and are compared with the
absolute tolerance :data:`EXACT_TOL`.

"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Literal, Optional

from uncertainties import ufloat

logger = logging.getLogger(__name__)

Z_LIMIT = 4.0
EXACT_TOL = 1e-12

Relation = Literal["<=", ">=", "~="]
Status = Literal["pass", "inconclusive", "fail"]


@dataclass
class TestVerdict:
    """Outcome of a single check."""

    __test__ = False

    name: str
    claim: str
    estimate: float
    std_error: float
    target: float
    relation: Relation
    z: Optional[float]
    status: Status
    n_samples: int
    seed: Optional[int]
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        """
        The record written to ``verdicts.json``: the fields, with ``std_error``
        stored as ``se`` and a boolean ``pass`` next to the three-valued ``status``.
        """
        ret = asdict(self)
        ret["se"] = ret.pop("std_error")
        ret["pass"] = self.passed
        for k in ("estimate", "se", "target", "z"):
            if ret[k] is not None and not math.isfinite(ret[k]):
                ret[k] = str(ret[k])
        return ret

    def to_ufloat(self):
        """The estimate with its standard error, for reporting."""
        se = self.std_error if math.isfinite(self.std_error) else 0.0
        return ufloat(self.estimate, se)


def _z(estimate: float, std_error: float, target: float) -> Optional[float]:
    if not std_error > 0 or not math.isfinite(std_error):
        return None
    diff = ufloat(estimate, std_error) - target
    return diff.n / diff.s


def judge(
    name: str,
    claim: str,
    estimate: float,
    std_error: float,
    target: float,
    relation: Relation,
    n_samples: int = 0,
    seed: Optional[int] = None,
    note: str = "",
) -> TestVerdict:
    """
    Applies the tolerance policy to an estimate.

    Parameters
    ----------
    name
        Name of the check, unique within a suite.

    claim
        Short tag of the property being checked, e.g. ``"barrier-upper-bound"``.

    estimate
        Point estimate.

    std_error
        Standard error, ``0`` for exact computations.

    target
        Bound or target value.

    relation
        One of ``"<="``, ``">="`` and ``"~="``.

    Returns
    -------
    verdict: TestVerdict

    """
    z = _z(estimate, std_error, target)
    if not math.isfinite(estimate):
        status = "fail"
    elif relation == "~=":
        if z is None:
            ok = abs(estimate - target) <= EXACT_TOL
        else:
            ok = abs(z) <= Z_LIMIT
        status = "pass" if ok else "fail"
    elif relation in {"<=", ">="}:
        excess = estimate - target if relation == "<=" else target - estimate
        if z is None:
            status = "pass" if excess <= EXACT_TOL else "fail"
        elif excess <= 0:
            status = "pass"
        elif excess < Z_LIMIT * std_error:
            status = "inconclusive"
        else:
            status = "fail"
    else:
        raise ValueError(f"Unknown relation '{relation}'.")
    if status != "pass":
        logger.warning(
            "Check '%s' is %s: estimate %.6g %s %.6g.",
            name,
            status,
            estimate,
            relation,
            target,
        )
    return TestVerdict(
        name=name,
        claim=claim,
        estimate=float(estimate),
        std_error=float(std_error),
        target=float(target),
        relation=relation,
        z=z,
        status=status,
        n_samples=int(n_samples),
        seed=seed,
        note=note,
    )


def overall(verdicts: list[TestVerdict]) -> Status:
    """The worst status of a list of verdicts."""
    statuses = {v.status for v in verdicts}
    if "fail" in statuses:
        return "fail"
    if "inconclusive" in statuses:
        return "inconclusive"
    return "pass"

"""
.. codeauthor::
    reflectmc authors

Writers of the run outputs, as configured by the ``output`` entry of the `recipe`:

- ``verdicts.json``, one record per check, with the timestamp as the only
  non-deterministic entry,
- ``summary.txt``, a fixed-width table of the verdicts,
- ``samples.csv``, the stored samples with ``replica`` and ``step`` columns,
- ``law.csv`` and ``joint.csv``, the exact laws of discrete models.

.. _reflectmc.recipe output:
.. autopydantic_model:: reflectmc.utils.schema.OutputSpec

"""

import datetime
import itertools
import json
import logging
import os
from typing import Optional

import numpy as np
import pandas as pd

from reflectmc.core.oracle import ExactLaw
from reflectmc.core.samplers import SampleBatch
from reflectmc.verify.verdicts import TestVerdict

logger = logging.getLogger(__name__)


def _folder(path: str) -> None:
    folder = os.path.dirname(path)
    if not (os.path.isdir(folder) or folder == ""):
        raise ValueError(f"Parent folder '{folder}' provided in 'path' does not exist.")


def save_verdicts(
    verdicts: list[TestVerdict],
    path: str,
    timestamp: Optional[str] = None,
) -> None:
    """"""
    _folder(path)
    if timestamp is None:
        timestamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    logger.debug("Writing verdicts into '%s'.", path)
    doc = {"timestamp": timestamp, "verdicts": [v.to_dict() for v in verdicts]}
    with open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def summary_table(verdicts: list[TestVerdict]) -> pd.DataFrame:
    """Verdicts as a table, estimates formatted with their standard errors."""
    rows = []
    for v in verdicts:
        if v.std_error > 0:
            est = f"{v.to_ufloat():.2uS}"
        else:
            est = f"{v.estimate:.6g}"
        rows.append(
            {
                "name": v.name,
                "claim": v.claim,
                "estimate": est,
                "relation": v.relation,
                "target": f"{v.target:.6g}",
                "z": "" if v.z is None else f"{v.z:.2f}",
                "status": v.status,
                "n_samples": v.n_samples,
                "seed": "" if v.seed is None else str(v.seed),
            }
        )
    return pd.DataFrame(rows, columns=list(rows[0]) if rows else None)


def save_summary(verdicts: list[TestVerdict], path: str) -> None:
    """"""
    _folder(path)
    logger.debug("Writing summary into '%s'.", path)
    with open(path, "w") as f:
        f.write(summary_table(verdicts).to_string(index=False))
        f.write("\n")


def samples_table(batches: list[SampleBatch]) -> pd.DataFrame:
    """Stored samples, one row each, with ``phi[v]`` or ``phi[v,i]`` columns."""
    frames = []
    for b in batches:
        s = np.asarray(b.samples)
        trailing = s.shape[2:]
        if trailing:
            flat = s.reshape(s.shape[0], -1)
            names = [
                "phi[" + ",".join(str(i) for i in (v, *idx)) + "]"
                for v in range(s.shape[1])
                for idx in itertools.product(*(range(t) for t in trailing))
            ]
        else:
            flat = s
            names = [f"phi[{v}]" for v in range(s.shape[1])]
        df = pd.DataFrame(flat, columns=names)
        df.insert(0, "step", b.steps)
        df.insert(0, "replica", b.replica)
        frames.append(df)
    return pd.concat(frames, ignore_index=True)


def save_samples(batches: list[SampleBatch], path: str) -> None:
    """"""
    _folder(path)
    logger.debug("Writing samples into '%s'.", path)
    samples_table(batches).to_csv(path, index=False)


def save_law(law: ExactLaw, path: str) -> None:
    """"""
    _folder(path)
    logger.debug("Writing exact law into '%s'.", path)
    law.to_frame().to_csv(path, index=False, float_format="%.17g")

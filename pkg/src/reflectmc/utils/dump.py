"""
.. codeauthor::
    reflectmc authors

The function :func:`reflectmc.utils.dump.dump` processes the ``enumerate`` entry of the
`recipe`, writing the exact law of a discrete model and, if a reflection is given,
the exact joint law of the :math:`\\tau`-Edwards-Sokal coupling.

.. _reflectmc.recipe enumerate:
.. autopydantic_model:: reflectmc.utils.schema.EnumerateSpec

"""

import logging
import os

from reflectmc.core.models import DiscreteModel, ModelSpec
from reflectmc.core.oracle import enumerate_exact, enumerate_joint_es
from reflectmc.core.reflections import discrete_involution
from reflectmc.utils.save import save_law
from reflectmc.utils.schema import EnumerateSpec

logger = logging.getLogger(__name__)


def dump(model: ModelSpec, spec: EnumerateSpec, directory: str) -> list[str]:
    """
    Writes ``law.csv`` and, with a reflection, ``joint.csv`` into ``directory``.

    Returns
    -------
    paths: list[str]
        The written files.

    """
    if not isinstance(model, DiscreteModel):
        raise ValueError(
            f"Only discrete models can be enumerated, got {type(model).__name__}."
        )
    paths = [os.path.join(directory, "law.csv")]
    law = enumerate_exact(model, spec.limit)
    logger.info("Exact law has %d configurations.", len(law))
    save_law(law, paths[0])
    if spec.reflection is not None:
        tau = discrete_involution(spec.reflection.involution)
        joint = enumerate_joint_es(model, tau, spec.limit)
        paths.append(os.path.join(directory, "joint.csv"))
        save_law(joint, paths[1])
    return paths

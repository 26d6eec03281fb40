"""
.. codeauthor::
    reflectmc authors

The function :func:`reflectmc.utils.verify.verify` processes the ``suites`` entries of
the `recipe`, calling checks from :mod:`reflectmc.verify` on the model.

.. _reflectmc.recipe suites:
.. autopydantic_model:: reflectmc.utils.schema.SuiteStep

.. warning::

    The ``using`` mapping is passed as keyword arguments to the check; lists given
    in the `recipe` arrive as :class:`list` objects.

"""

import importlib
import logging
from typing import Optional

from reflectmc.core.models import ModelSpec
from reflectmc.core.samplers import ChainSettings
from reflectmc.verify.verdicts import TestVerdict

logger = logging.getLogger(__name__)


def verify(
    model: ModelSpec,
    settings: ChainSettings,
    withstr: str,
    using: dict,
    replicas: int = 1,
    threads: Optional[int] = None,
) -> list[TestVerdict]:
    """"""
    split = withstr.split(".")
    modname = ".".join(split[:-1])
    funcname = split[-1]
    if not modname.startswith("reflectmc"):
        modname = f"reflectmc.verify.{modname}"
    try:
        m = importlib.import_module(modname)
        func = getattr(m, funcname)
    except (ImportError, AttributeError) as e:
        raise ValueError(f"Unknown check '{withstr}'.") from e
    logger.info("Running '%s'.", withstr)
    return func(model, settings, replicas=replicas, threads=threads, **using)

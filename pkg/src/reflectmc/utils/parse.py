"""
**parse**: YAML and JSON input handler
--------------------------------------

.. codeauthor::
    reflectmc authors

"""

import json
import logging
import os
from importlib import resources

import yaml
from packaging.version import Version

from reflectmc.utils.schema import Recipe

__latest_recipe__ = "1.0"
logger = logging.getLogger(__name__)

BUILTIN_SUITES = (
    "lemma1-exact",
    "lemma1-continuous",
    "theorem1-tree",
    "theorem2-path",
    "theorem2-grid",
    "theorem3-spin",
    "surface-density",
    "mixture",
    "markov-reflection",
    "cluster-sides",
)


def to_recipe(indict: dict) -> Recipe:
    """Validates a recipe dictionary and checks its version."""
    if not isinstance(indict, dict):
        raise ValueError(f"Recipe must be a mapping, got {type(indict).__name__}.")
    recipe = Recipe(**indict)
    if Version(recipe.version) > Version(__latest_recipe__):
        raise ValueError(
            f"Recipe version '{recipe.version}' is newer than the supported "
            f"'{__latest_recipe__}'."
        )
    return recipe


def parse(fn: str) -> Recipe:
    """
    Input file parsing function.

    Supports loading ``yaml`` and ``json`` files, validated by
    :class:`~reflectmc.utils.schema.Recipe`. Relative file paths within the recipe
    are resolved with respect to the current working directory.

    Parameters
    ----------
    fn
        Path to the filename to be parsed

    Returns
    -------
    ret: Recipe
        The validated recipe.

    """
    assert os.path.exists(fn) and os.path.isfile(fn), (
        f"provided file name '{fn}' does not exist or is not a valid file"
    )

    logger.debug("loading recipe from '%s'", fn)
    with open(fn, "r") as infile:
        if fn.endswith("yml") or fn.endswith("yaml"):
            indict = yaml.safe_load(infile)
        elif fn.endswith("json"):
            indict = json.load(infile)
        else:
            raise ValueError(f"File type of '{fn}' is not supported.")
    logger.debug("parsing loaded recipe dictionary")
    return to_recipe(indict)


def parse_builtin(name: str) -> Recipe:
    """Loads one of the packaged :data:`BUILTIN_SUITES`."""
    if name not in BUILTIN_SUITES:
        raise ValueError(
            f"Unknown suite '{name}', choose one of {list(BUILTIN_SUITES)}."
        )
    text = resources.files("reflectmc.recipes").joinpath(f"{name}.yaml").read_text()
    logger.debug("parsing built-in recipe '%s'", name)
    return to_recipe(yaml.safe_load(text))

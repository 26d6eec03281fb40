"""
reflectmc.main
==============

Module containing the execution functions for reflectmc.

"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from importlib import metadata
from typing import Optional

import yaml
from pydantic import ValidationError

from reflectmc.core.models import ModelSpec
from reflectmc.core.oracle import OracleOverflowError
from reflectmc.utils import (
    build_model,
    dump,
    parse,
    parse_builtin,
    save_samples,
    save_summary,
    save_verdicts,
    verify,
)
from reflectmc.utils.parse import BUILTIN_SUITES
from reflectmc.utils.schema import EnumerateSpec, Recipe
from reflectmc.verify.sampling import equilibrium_samples
from reflectmc.verify.verdicts import TestVerdict, overall

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONFIG = 64
EXIT_OVERFLOW = 65
EXIT_RUNTIME = 70


def override(
    recipe: Recipe,
    seed: Optional[int] = None,
    out: Optional[str] = None,
) -> Recipe:
    """Applies command-line overrides of the seed and the output directory."""
    if seed is not None:
        sampler = recipe.sampler.model_copy(update={"seed": seed})
        sampler = type(sampler).model_validate(sampler.model_dump())
        steps = [
            s.model_copy(update={"sampler": {**s.sampler, "seed": seed}})
            if "seed" in s.sampler
            else s
            for s in recipe.suites
        ]
        recipe = recipe.model_copy(update={"sampler": sampler, "suites": steps})
    if out is not None:
        output = recipe.output.model_copy(update={"directory": out})
        recipe = recipe.model_copy(update={"output": output})
    return recipe


def run(
    recipe: Recipe,
    model: Optional[ModelSpec] = None,
    threads: Optional[int] = None,
) -> list[TestVerdict]:
    """
    Main API execution function. Processes the entries of a validated `recipe`, in
    order:

    - ``model``, built with :func:`~reflectmc.utils.model.build_model`,
    - ``suites``, each processed by :func:`~reflectmc.utils.verify.verify`,
    - ``enumerate``, processed by :func:`~reflectmc.utils.dump.dump`,
    - ``output``, written by :mod:`~reflectmc.utils.save`.

    Parameters
    ----------
    recipe
        The recipe, from :func:`~reflectmc.utils.parse.parse`.

    model
        The model, if already built from ``recipe.model``.

    threads
        Maximum number of threads used for the replicas.

    Returns
    -------
    verdicts: list[TestVerdict]
        The verdicts of all suites.

    """
    logger.info("Processing 'model'.")
    if model is None:
        model = build_model(recipe.model)
    settings = recipe.sampler.settings()
    replicas = recipe.sampler.replicas

    logger.info("Processing 'suites'.")
    verdicts = []
    for step in recipe.suites:
        smodel = model if step.model is None else build_model(step.model)
        sampler = recipe.step_sampler(step)
        ret = verify(
            smodel,
            sampler.settings(),
            step.with_,
            step.using,
            sampler.replicas,
            threads,
        )
        if step.label is not None:
            ret = [replace(v, name=f"{step.label}/{v.name}") for v in ret]
        verdicts.extend(ret)

    outdir = recipe.output.directory
    os.makedirs(outdir, exist_ok=True)
    if recipe.enumerate is not None:
        logger.info("Processing 'enumerate'.")
        dump(model, recipe.enumerate, outdir)

    logger.info("Processing 'output'.")
    if len(recipe.suites) > 0:
        save_verdicts(verdicts, os.path.join(outdir, "verdicts.json"))
        save_summary(verdicts, os.path.join(outdir, "summary.txt"))
    if recipe.output.samples:
        batches = equilibrium_samples(model, settings, replicas, threads)
        save_samples(batches, os.path.join(outdir, "samples.csv"))
    return verdicts


def exit_code(verdicts: list[TestVerdict]) -> int:
    """``0`` if all verdicts pass, ``2`` if any is inconclusive, ``1`` on failure."""
    return {
        "pass": EXIT_PASS,
        "inconclusive": EXIT_INCONCLUSIVE,
        "fail": EXIT_FAIL,
    }[overall(verdicts)]


def _execute(recipe: Recipe, threads: Optional[int], enumerate_only: bool) -> int:
    try:
        model = build_model(recipe.model)
    except (ValueError, TypeError, AssertionError) as e:
        logger.error("Invalid model: %s", e)
        return EXIT_CONFIG
    try:
        if enumerate_only:
            os.makedirs(recipe.output.directory, exist_ok=True)
            dump(model, recipe.enumerate, recipe.output.directory)
            return EXIT_PASS
        verdicts = run(recipe, model, threads)
    except OracleOverflowError as e:
        logger.error("%s", e)
        return EXIT_OVERFLOW
    except (ValueError, TypeError) as e:
        logger.error("Invalid suite: %s", e)
        return EXIT_CONFIG
    except (AssertionError, RuntimeError) as e:
        logger.error("Run aborted: %s", e)
        return EXIT_RUNTIME
    return exit_code(verdicts)


def _load(path: str, seed: Optional[int], out: Optional[str]) -> Optional[Recipe]:
    try:
        return override(parse(path), seed, out)
    except (ValidationError, yaml.YAMLError, ValueError, AssertionError) as e:
        logger.error("Invalid recipe '%s': %s", path, e)
        return None


def cmd_run(
    config: str,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out: Optional[str] = None,
) -> int:
    """Runs the suites of a recipe file and returns the exit code."""
    recipe = _load(config, seed, out)
    if recipe is None:
        return EXIT_CONFIG
    return _execute(recipe, threads, enumerate_only=False)


def cmd_enumerate(
    config: str,
    out: Optional[str] = None,
) -> int:
    """Writes the exact law tables of the discrete model of a recipe file."""
    recipe = _load(config, None, out)
    if recipe is None:
        return EXIT_CONFIG
    if recipe.enumerate is None:
        recipe = recipe.model_copy(update={"enumerate": EnumerateSpec()})
    return _execute(recipe, None, enumerate_only=True)


def cmd_verify_builtin(
    suite: str,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out: Optional[str] = None,
) -> int:
    """Runs one of the packaged suites with the given seed."""
    if suite not in BUILTIN_SUITES:
        logger.error(
            "Unknown suite '%s', choose one of %s.", suite, list(BUILTIN_SUITES)
        )
        return EXIT_CONFIG
    recipe = override(parse_builtin(suite), seed, out)
    return _execute(recipe, threads, enumerate_only=False)


def run_with_arguments():
    """
    Main external execution function.

    This is the function executed when reflectmc is launched using the executable.
    It processes the ``--version`` command, sets the loglevel based on the number of
    ``-v/-q`` passed, and dispatches to :func:`cmd_run`, :func:`cmd_enumerate` or
    :func:`cmd_verify_builtin`. The process exits with their exit code.

    """
    parser = argparse.ArgumentParser(prog="reflectmc")
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s version {metadata.version('reflectmc')}",
    )

    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Increase verbosity by one level.",
    )

    parser.add_argument(
        "-q",
        "--quiet",
        action="count",
        default=0,
        help="Decrease verbosity by one level.",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    prun = sub.add_parser("run", help="Run the suites of a recipe.")
    prun.add_argument("--config", required=True, help="Recipe file (YAML or JSON).")

    penum = sub.add_parser("enumerate", help="Dump exact laws of a discrete model.")
    penum.add_argument("--config", required=True, help="Recipe file (YAML or JSON).")

    pver = sub.add_parser("verify", help="Run a built-in suite.")
    pver.add_argument(
        "--suite",
        required=True,
        help=f"Name of the suite, one of: {', '.join(BUILTIN_SUITES)}.",
    )

    for p in (prun, pver):
        p.add_argument("--seed", type=int, default=None, help="Master seed.")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help="Maximum number of threads, defaults to the number of logical cores.",
        )
    for p in (prun, penum, pver):
        p.add_argument("--out", default=None, help="Output directory.")

    args = parser.parse_args()

    loglevel = min(max(30 - (10 * args.verbose) + (10 * args.quiet), 10), 50)
    logging.basicConfig(level=loglevel)
    logging.debug(f"loglevel set to '{logging._levelToName[loglevel]}'")

    if args.command == "run":
        code = cmd_run(args.config, args.seed, args.threads, args.out)
    elif args.command == "enumerate":
        code = cmd_enumerate(args.config, args.out)
    else:
        code = cmd_verify_builtin(args.suite, args.seed, args.threads, args.out)
    sys.exit(code)

"""
Library of checks, selected in `recipes` by their dotted name, e.g.
``barrier.check_reflection_principle``.

Every check is called as ``func(model, settings, replicas=..., threads=...,
**using)`` and returns a list of :class:`~reflectmc.verify.verdicts.TestVerdict`.

"""

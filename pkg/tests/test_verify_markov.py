import pytest
import numpy as np

from reflectmc.core import graph, models
from reflectmc.core.oracle import OracleOverflowError
from reflectmc.verify.markov import check_markov_reflection, path_law_distance
from reflectmc.verify.verdicts import overall


def lazy_cycle(n_steps):
    P = 0.5 * np.eye(6) + 0.25 * (np.roll(np.eye(6), 1, 1) + np.roll(np.eye(6), -1, 1))
    return models.markov_chain_model(P, np.full(6, 1 / 6), np.eye(6)[0], n_steps)


def three_state(initial=(1.0, 0.0, 0.0), n_steps=3):
    P = [[0.5, 0.5, 0.0], [0.25, 0.5, 0.25], [0.0, 0.5, 0.5]]
    return models.markov_chain_model(P, [0.25, 0.5, 0.25], initial, n_steps)


def test_path_law_distance():
    assert path_law_distance(three_state()) < 1e-15
    assert path_law_distance(lazy_cycle(2)) < 1e-15


def test_markov_reflection_cycle():
    verdicts = check_markov_reflection(lazy_cycle(3), involution=[0, 5, 4, 3, 2, 1])
    assert [v.name for v in verdicts] == [
        "markov-involution",
        "markov-stationary",
        "markov-kernel",
        "markov-path-law",
        "markov-flip",
    ]
    assert overall(verdicts) == "pass"


def test_markov_reflection_n_steps_override():
    verdicts = check_markov_reflection(
        lazy_cycle(4), involution=[0, 5, 4, 3, 2, 1], n_steps=2
    )
    assert verdicts[-1].name == "markov-flip"
    assert verdicts[3].n_samples == 6**3
    assert overall(verdicts) == "pass"


@pytest.mark.parametrize(
    "involution, failing",
    [
        ([1, 0, 2], {"markov-stationary", "markov-kernel"}),  # ts0 - moves pi
        (  # ts1 - not an involution
            [1, 2, 0],
            {"markov-involution", "markov-stationary", "markov-kernel"},
        ),
    ],
)
def test_markov_reflection_fails(involution, failing):
    verdicts = check_markov_reflection(three_state(), involution=involution)
    assert {v.name for v in verdicts if v.status == "fail"} == failing
    assert "markov-flip" not in {v.name for v in verdicts}
    assert overall(verdicts) == "fail"


def test_markov_reflection_notes():
    verdicts = check_markov_reflection(three_state(), involution=[1, 0, 2])
    byname = {v.name: v for v in verdicts}
    assert byname["markov-stationary"].note.startswith("pi(")
    assert byname["markov-kernel"].note.startswith("P(")
    assert byname["markov-involution"].note == ""


def test_markov_reflection_symmetric():
    verdicts = check_markov_reflection(
        three_state(initial=(0.25, 0.5, 0.25)), involution=[2, 1, 0]
    )
    assert overall(verdicts) == "pass"


def test_markov_reflection_no_steps():
    verdicts = check_markov_reflection(three_state(n_steps=0), involution=[2, 1, 0])
    assert verdicts[-1].name == "markov-flip"
    assert verdicts[-1].estimate == 0.0
    assert overall(verdicts) == "pass"


@pytest.mark.parametrize(
    "model, kwargs, error, match",
    [
        (  # ts0 - wrong size
            three_state(),
            dict(involution=[1, 0]),
            ValueError,
            "is not a map",
        ),
        (  # ts1 - label out of range
            three_state(),
            dict(involution=[0, 1, 3]),
            ValueError,
            "is not a map",
        ),
        (  # ts2 - too many joint states
            three_state(),
            dict(involution=[2, 1, 0], limit=100),
            OracleOverflowError,
            "exceed the limit",
        ),
        (  # ts3 - not a Markov chain
            models.potts_model(graph.path(3, [0]), 2, 1.0),
            dict(involution=[1, 0]),
            TypeError,
            "Markov chain model",
        ),
    ],
)
def test_markov_reflection_invalid(model, kwargs, error, match):
    with pytest.raises(error, match=match):
        check_markov_reflection(model, **kwargs)

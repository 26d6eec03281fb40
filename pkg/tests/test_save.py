import pytest
import json
import os
import numpy as np
import pandas as pd

from reflectmc.core.oracle import ExactLaw
from reflectmc.core.samplers import SampleBatch
from reflectmc.utils.save import (
    save_law,
    save_samples,
    save_summary,
    save_verdicts,
    summary_table,
)
from reflectmc.verify.verdicts import judge


@pytest.fixture
def verdicts():
    return [
        judge("exact", "flip-invariance", 0.0, 0.0, 1e-12, "<=", 64, None),
        judge("sampled", "barrier-oracle", 0.5, 0.01, 0.52, "~=", 1000, 3, "a note"),
        judge("broken", "barrier-upper-bound", 0.3, 0.01, 0.2, "<=", 1000, 3),
    ]


def test_save_verdicts(verdicts, tmpdir):
    path = os.path.join(tmpdir, "verdicts.json")
    save_verdicts(verdicts, path, timestamp="2024-01-01T00:00:00+00:00")
    with open(path, "r") as f:
        doc = json.load(f)
    assert doc["timestamp"] == "2024-01-01T00:00:00+00:00"
    assert [v["status"] for v in doc["verdicts"]] == ["pass", "pass", "fail"]
    assert [v["pass"] for v in doc["verdicts"]] == [True, True, False]
    assert doc["verdicts"][1]["se"] == 0.01
    assert doc["verdicts"][1]["note"] == "a note"
    assert doc["verdicts"][0]["z"] is None


def test_save_verdicts_deterministic(verdicts, tmpdir):
    a = os.path.join(tmpdir, "a.json")
    b = os.path.join(tmpdir, "b.json")
    save_verdicts(verdicts, a)
    save_verdicts(verdicts, b)
    with open(a, "r") as fa, open(b, "r") as fb:
        da = json.load(fa)
        db = json.load(fb)
    da.pop("timestamp")
    db.pop("timestamp")
    assert da == db


def test_summary_table(verdicts):
    df = summary_table(verdicts)
    assert list(df["name"]) == ["exact", "sampled", "broken"]
    assert df["estimate"][0] == "0"
    assert df["estimate"][1] == "0.500(10)"
    assert df["z"][0] == ""
    assert df["z"][1] == "-2.00"
    assert df["seed"][0] == ""
    assert list(df["status"]) == ["pass", "pass", "fail"]


def test_save_summary(verdicts, tmpdir):
    path = os.path.join(tmpdir, "summary.txt")
    save_summary(verdicts, path)
    with open(path, "r") as f:
        lines = f.read().splitlines()
    assert len(lines) == 4
    assert lines[0].split()[0] == "name"
    assert "fail" in lines[3]


def test_save_samples_heights(tmpdir):
    batches = [
        SampleBatch(np.zeros((2, 3)), np.array([10, 20]), replica=0, seed=1),
        SampleBatch(np.ones((2, 3)), np.array([10, 20]), replica=1, seed=2),
    ]
    path = os.path.join(tmpdir, "samples.csv")
    save_samples(batches, path)
    df = pd.read_csv(path)
    assert list(df.columns) == ["replica", "step", "phi[0]", "phi[1]", "phi[2]"]
    assert list(df["replica"]) == [0, 0, 1, 1]
    assert list(df["step"]) == [10, 20, 10, 20]
    assert df["phi[2]"].iloc[-1] == 1.0


def test_save_samples_spins(tmpdir):
    s = np.zeros((1, 2, 3))
    s[0, 1, 2] = 1.0
    batches = [SampleBatch(s, np.array([5]), replica=0, seed=1)]
    path = os.path.join(tmpdir, "samples.csv")
    save_samples(batches, path)
    df = pd.read_csv(path)
    assert len(df.columns) == 2 + 6
    assert df["phi[1,2]"][0] == 1.0
    assert df["phi[0,0]"][0] == 0.0


def test_save_law(tmpdir):
    law = ExactLaw(
        support=np.array([[0, 0], [0, 1]]),
        probability=np.array([1 / 3, 2 / 3]),
        bonds=np.array([[True], [False]]),
    )
    path = os.path.join(tmpdir, "joint.csv")
    save_law(law, path)
    df = pd.read_csv(path)
    assert list(df.columns) == ["phi[0]", "phi[1]", "omega[0]", "probability"]
    assert df["probability"][0] == 1 / 3
    assert list(df["omega[0]"]) == [1, 0]


def test_save_missing_folder(verdicts, tmpdir):
    path = os.path.join(tmpdir, "missing", "verdicts.json")
    with pytest.raises(ValueError, match="does not exist"):
        save_verdicts(verdicts, path)

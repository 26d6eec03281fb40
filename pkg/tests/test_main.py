import pytest
import json
import os
import sys
import pandas as pd

import reflectmc
from reflectmc.main import (
    EXIT_CONFIG,
    EXIT_FAIL,
    EXIT_OVERFLOW,
    EXIT_PASS,
    cmd_enumerate,
    cmd_run,
    cmd_verify_builtin,
    exit_code,
    override,
)
from reflectmc.utils import parse
from reflectmc.verify.verdicts import judge


@pytest.mark.parametrize(
    "inpath, code",
    [
        ("potts_k3.yaml", EXIT_PASS),  # ts0 - exact flips on a pinned triangle
        ("malformed.yaml", EXIT_CONFIG),  # ts1 - not valid yaml
        ("wrong_exponent.yaml", EXIT_FAIL),  # ts2 - wrong exact target
        ("oversized.yaml", EXIT_OVERFLOW),  # ts3 - 3^25 configurations
        ("unknown_check.yaml", EXIT_CONFIG),  # ts4 - no such check
        ("bad_model.yaml", EXIT_CONFIG),  # ts5 - q = 1
        ("wrong_family.yaml", EXIT_CONFIG),  # ts6 - exact check on a surface
        ("missing.yaml", EXIT_CONFIG),  # ts7 - no file
    ],
)
def test_cmd_run(inpath, code, datadir):
    os.chdir(datadir)
    assert cmd_run(inpath) == code


def test_run_outputs(datadir):
    os.chdir(datadir)
    verdicts = reflectmc.run(parse("potts_k3.yaml"))
    assert len(verdicts) == 8
    assert os.path.isfile(os.path.join("out", "verdicts.json"))
    assert os.path.isfile(os.path.join("out", "summary.txt"))
    assert not os.path.exists(os.path.join("out", "samples.csv"))
    with open(os.path.join("out", "verdicts.json"), "r") as f:
        doc = json.load(f)
    assert [v["name"] for v in doc["verdicts"]] == [v.name for v in verdicts]


def test_run_samples(datadir):
    os.chdir(datadir)
    assert cmd_run("samples.yaml", seed=4, out="other") == EXIT_PASS
    df = pd.read_csv(os.path.join("other", "samples.csv"))
    assert len(df) == 100
    assert set(df["replica"]) == {0, 1}
    assert (df["phi[0]"] == 0.0).all()


def test_run_reproducible(datadir):
    os.chdir(datadir)
    docs = []
    for out in ("first", "second"):
        assert cmd_run("samples.yaml", out=out) == EXIT_PASS
        with open(os.path.join(out, "verdicts.json"), "r") as f:
            doc = json.load(f)
        doc.pop("timestamp")
        docs.append(doc)
        docs.append(pd.read_csv(os.path.join(out, "samples.csv")))
    assert docs[0] == docs[2]
    pd.testing.assert_frame_equal(docs[1], docs[3])


def test_cmd_enumerate(datadir):
    os.chdir(datadir)
    assert cmd_enumerate("enumerate_k3.yaml") == EXIT_PASS
    law = pd.read_csv(os.path.join("laws", "law.csv"))
    joint = pd.read_csv(os.path.join("laws", "joint.csv"))
    assert len(law) == 8
    assert len(joint) == 64
    assert law["probability"].sum() == pytest.approx(1.0, abs=1e-14)
    agree = law[(law["phi[0]"] == law["phi[1]"]) & (law["phi[1]"] == law["phi[2]"])]
    assert agree["probability"].sum() == pytest.approx(16 / 28, abs=1e-14)


def test_cmd_enumerate_default(datadir):
    os.chdir(datadir)
    assert cmd_enumerate("potts_k3.yaml", out="pinned") == EXIT_PASS
    assert len(pd.read_csv(os.path.join("pinned", "law.csv"))) == 9
    assert not os.path.exists(os.path.join("pinned", "joint.csv"))
    assert cmd_enumerate("wrong_family.yaml") == EXIT_CONFIG


def test_cmd_verify_builtin(datadir):
    os.chdir(datadir)
    assert cmd_verify_builtin("lemma1-exact", out="builtin") == EXIT_PASS
    assert os.path.isfile(os.path.join("builtin", "verdicts.json"))
    with open(os.path.join("builtin", "verdicts.json"), "r") as f:
        doc = json.load(f)
    assert len(doc["verdicts"]) == 32
    assert {v["name"].split("/")[0] for v in doc["verdicts"]} == {
        "potts-k3",
        "potts-p4",
        "ising-k3",
        "ising-k3-anti",
        "ising-p4",
        "ising-p4-anti",
    }
    assert all(v["pass"] for v in doc["verdicts"])
    assert cmd_verify_builtin("theorem4", out="builtin") == EXIT_CONFIG


def test_override(datadir):
    os.chdir(datadir)
    recipe = parse("samples.yaml")
    ret = override(recipe, seed=12, out="elsewhere")
    assert ret.sampler.seed == 12
    assert ret.sampler.replicas == 2
    assert ret.output.directory == "elsewhere"
    assert ret.output.samples is True
    assert recipe.sampler.seed == 9
    with pytest.raises(ValueError):
        override(recipe, seed=-1)


def test_exit_code():
    ok = judge("a", "c", 0.0, 0.0, 0.0, "~=")
    unsure = judge("b", "c", 0.21, 0.01, 0.20, "<=")
    bad = judge("c", "c", 1.0, 0.0, 0.0, "~=")
    assert exit_code([ok]) == 0
    assert exit_code([ok, unsure]) == 2
    assert exit_code([unsure, bad]) == 1


@pytest.mark.parametrize(
    "argv, code",
    [
        (["run", "--config", "potts_k3.yaml", "--out", "cli"], 0),  # ts0
        (["-q", "run", "--config", "malformed.yaml"], 64),  # ts1
        (["enumerate", "--config", "enumerate_k3.yaml"], 0),  # ts2
        (  # ts3 - built-in suite with a seed
            ["verify", "--suite", "lemma1-exact", "--seed", "3", "--out", "cli"],
            0,
        ),
    ],
)
def test_run_with_arguments(argv, code, datadir, monkeypatch):
    os.chdir(datadir)
    monkeypatch.setattr(sys, "argv", ["reflectmc", *argv])
    with pytest.raises(SystemExit) as e:
        reflectmc.run_with_arguments()
    assert e.value.code == code


def test_run_labelled_steps(datadir):
    os.chdir(datadir)
    verdicts = reflectmc.run(parse("steps.yaml"))
    kinds = ["flip-component", "flip-component-or-complement", "swendsen-wang"]
    kinds.append("es-marginal")
    assert [v.name for v in verdicts] == [
        *(f"potts-k3/{k}[1,0,2]" for k in kinds),
        *(f"ising-p4-anti/{k}[1,0]" for k in kinds),
    ]
    assert exit_code(verdicts) == EXIT_PASS
    with open(os.path.join("steps", "verdicts.json"), "r") as f:
        doc = json.load(f)
    assert all(v["pass"] for v in doc["verdicts"])


def test_override_steps(datadir):
    os.chdir(datadir)
    ret = override(parse("steps.yaml"), seed=12)
    assert ret.sampler.seed == 12
    assert ret.suites[0].sampler == {}
    assert ret.suites[1].sampler == {"seed": 12}

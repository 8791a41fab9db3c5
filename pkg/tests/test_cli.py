import json
import subprocess
import sys

import numpy as np
import pytest

from lipcap.cli import run
from lipcap.fileio import dumps, loads, scene_from_dict, scene_to_dict
from lipcap.geom import Disc, DyadicShape, ParametricDomain, Scene, Segment
from lipcap.measures import DiscreteMeasure

SLIT_PARAM = "slit:a0=0.5,q=0.5,c0=0.25,p=0.25"


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def segment_scene(tmp_path):
    return write(tmp_path, "seg.json", {"shapes": [{"type": "segment", "from": [0, 0], "to": [1, 0]}]})


def test_classify_slit():
    status, out = run(["classify", "--param", SLIT_PARAM, "--s", "-0.4", "--k", "0"])
    assert status == 0
    assert json.loads(out)["verdict"] == "Converges"


def test_content_of_empty_scene(tmp_path):
    path = write(tmp_path, "empty.json", {"shapes": []})
    status, out = run(["content", "--scene", path, "--beta", "0.5"])
    assert status == 0 and json.loads(out)["value"] == 0.0


def test_content_variants(segment_scene):
    _, out = run(["content", "--scene", segment_scene, "--beta", "0.5", "--depth", "6"])
    assert json.loads(out)["value"] == 1.0
    _, out = run(["content", "--scene", segment_scene, "--beta", "0.5", "--depth", "6", "--bracket"])
    d = json.loads(out)
    assert d["lower"] <= 1.0 <= d["upper"]
    _, out = run(["content", "--scene", segment_scene, "--beta", "0.5", "--depth", "6",
                  "--gauge", "ladder:eta=0.5,j=2"])
    assert json.loads(out)["value"] <= 1.0
    _, out = run(["content", "--scene", segment_scene, "--beta", "0.5", "--lower", "--J", "1"])
    assert json.loads(out)["kind"] == "LadderSequence"


def test_sweep_csv():
    status, out = run(["sweep", "--param", SLIT_PARAM, "--s-range", "-0.9:-0.1:0.1"])
    assert status == 0
    lines = out.splitlines()
    assert lines[0] == "s,verdict,sum"
    rows = [l.split(",") for l in lines[1:]]
    assert len(rows) == 9
    verdicts = {float(s): v for s, v, _ in rows}
    assert verdicts[-0.4] == "Converges" and verdicts[-0.5] == "Diverges"


def test_frostman_round_trip(segment_scene):
    status, out = run(["frostman", "--scene", segment_scene, "--beta", "0.5", "--depth", "5", "--check"])
    assert status == 0
    d = json.loads(out)
    mu = DiscreteMeasure.from_dict(d)
    assert mu.total == pytest.approx(1 / 8)
    assert d["growth"]["passes"]
    assert DiscreteMeasure.from_dict(loads(dumps(mu.to_dict()))) == mu


def test_poisson_norm_and_cauchy(tmp_path):
    path = write(tmp_path, "delta.json", {"atoms": [[0.0, 0.0, 1.0]]})
    status, out = run(["poisson-norm", "--measure", path, "--s", "-2"])
    assert status == 0
    assert json.loads(out)["value"] == pytest.approx(1 / np.pi, rel=1e-9)
    status, out = run(["cauchy", "--measure", path, "--at", "2,0"])
    assert json.loads(out)["value"] == pytest.approx([1 / (2 * np.pi), 0.0])
    status, out = run(["cauchy", "--measure", path, "--at", "-0.01,0", "--exclusion", "0.1"])
    assert status == 1 and json.loads(out)["error"] == "TooCloseToSupport"


def test_partition_summary(tmp_path):
    path = write(tmp_path, "sq.json", {"shapes": [{"type": "dyadic", "m": 1, "r": 1, "n": 2}]})
    status, out = run(["partition", "--scene", path, "--depth", "2", "--k", "2"])
    d = json.loads(out)
    assert status == 0 and d["atomCount"] == 1 and d["supportViolations"] == 0
    assert d["sumErrorMax"] <= 1e-9


def test_verify_subset():
    status, out = run(["verify", "--only", "1,2"])
    assert status == 0
    assert out.count("PASS") == 2


def test_usage_errors(tmp_path):
    assert run([])[0] == 2
    assert run(["classify", "--s", "-0.4"])[0] == 2
    assert run(["sweep", "--param", SLIT_PARAM, "--s-range", "nonsense"])[0] == 2
    assert run(["verify", "--only", "12"])[0] == 2
    assert run(["content", "--scene", str(tmp_path / "missing.json"), "--beta", "0.5"])[0] == 2


def test_computation_errors(tmp_path, segment_scene):
    status, out = run(["content", "--scene", segment_scene, "--beta", "1.5"])
    assert status == 1 and json.loads(out)["error"] == "BetaOutOfRange"
    status, out = run(["classify", "--param", "slit:a0=1,q=0.5,c0=1,p=0.25", "--s", "-0.4"])
    assert status == 1 and json.loads(out)["error"] == "ObstaclesOverlap"
    bad = write(tmp_path, "bad.json", {"shapes": [{"type": "hexagon"}]})
    assert run(["content", "--scene", bad, "--beta", "0.5"])[0] == 1


def test_deterministic_output(segment_scene):
    argv = ["frostman", "--scene", segment_scene, "--beta", "0.3", "--depth", "6", "--check"]
    assert run(argv)[1] == run(argv)[1]
    argv = ["classify", "--scene", segment_scene, "--s", "-0.4", "--nmax", "5", "--depth", "8"]
    assert run(argv)[1] == run(argv)[1]


def test_floats_keep_seventeen_digits():
    text = dumps({"x": 0.1, "n": 3.0})
    assert text == '{"x": 0.10000000000000001, "n": 3.0}'
    assert loads(text)["x"] == 0.1


def test_scene_round_trip():
    scene = Scene(shapes=(Segment((0.1, 0.2), (0.3, 0.4)), Disc((0.5, 0.5), 0.125),
                          DyadicShape(1, 2, 3)),
                  parametric=ParametricDomain("roadrunner", 0.5, 0.5, 0.25, 0.25), b=(0.25, 0.0))
    again = scene_from_dict(loads(dumps(scene_to_dict(scene))))
    assert again == scene


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lipcap", "classify", "--param", SLIT_PARAM,
                           "--s", "-0.6"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "Diverges"


def test_depth_cap_from_environment(monkeypatch, segment_scene):
    from lipcap.config import Config
    monkeypatch.setenv("LIPCAP_DEPTH_CAP", "6")
    assert Config().depth_cap == 6
    status, out = run(["content", "--scene", segment_scene, "--beta", "0.5", "--depth", "8"])
    assert status == 1 and json.loads(out)["error"] == "DepthTooLarge"
    monkeypatch.setenv("LIPCAP_DEPTH_CAP", "17")
    with pytest.raises(ValueError):
        Config()

import json

import numpy as np
import pytest

from boundarypath import shapes
from boundarypath.cli import build_parser, main
from boundarypath.meshio import save_mesh


@pytest.fixture
def cube_path(tmp_path):
    path = tmp_path / "cube.json"
    save_mesh(shapes.box_grid(2, 2, 2), path)
    return str(path)


def test_help_exits_zero(capsys):
    for argv in (["--help"], ["query", "--help"], ["simulate", "--help"]):
        with pytest.raises(SystemExit) as err:
            build_parser().parse_args(argv)
        assert err.value.code == 0


def test_query_cube_center(cube_path, capsys):
    rc = main(["query", cube_path, "0.5 0.5 0.5"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["results"][0]["distance"] == pytest.approx(0.5, abs=1e-9)


def test_query_writes_manifest_and_obj(cube_path, tmp_path):
    out = tmp_path / "run"
    obj = tmp_path / "paths.obj"
    rc = main(
        [
            "query",
            cube_path,
            "0.5 0.5 0.5",
            "0.2 0.3 0.4",
            "--out",
            str(out),
            "--path-obj",
            str(obj),
        ]
    )
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "query"
    text = obj.read_text()
    assert text.count("l ") == 2 and text.count("v ") == 4


def test_query_no_culling_same_result(cube_path, capsys):
    main(["query", cube_path, "0.3 0.4 0.5"])
    a = json.loads(capsys.readouterr().out)["results"][0]
    main(["query", cube_path, "0.3 0.4 0.5", "--no-culling"])
    b = json.loads(capsys.readouterr().out)["results"][0]
    assert a["distance"] == b["distance"] and a["result_point"] == b["result_point"]


def test_query_bad_point_exit_2(cube_path):
    assert main(["query", cube_path, "not-a-point"]) == 2


def test_query_missing_mesh_exit_2():
    assert main(["query", "/nonexistent/mesh.json", "0 0 0"]) == 2


def test_validate_clean(cube_path, capsys):
    rc = main(["validate", cube_path, "--samples", "10", "--seed", "3"])
    assert rc == 0
    assert "0 mismatches" in capsys.readouterr().out


def test_validate_deterministic(cube_path, tmp_path):
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        main(["validate", cube_path, "--samples", "8", "--seed", "9", "--out", str(out)])
        outs.append((out / "validate_report.json").read_text())
    assert outs[0] == outs[1]


def test_fuzz_budget_zero(capsys):
    rc = main(["fuzz", "--budget", "0"])
    assert rc == 0
    assert "0 iterations" in capsys.readouterr().out


def test_fuzz_short_run_clean(capsys):
    rc = main(["fuzz", "--iterations", "2", "--samples", "5", "--seed", "1"])
    assert rc == 0


def test_bench_culling_benefit(tmp_path, capsys):
    path = tmp_path / "folded.json"
    save_mesh(shapes.folded_strip(40, 3), path)
    rc = main(["bench", str(path), "--samples", "40", "--seed", "2"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    on = dict(zip(lines[0].split(","), lines[1].split(",")))
    off = dict(zip(lines[0].split(","), lines[2].split(",")))
    assert float(on["mean_traversals"]) < float(off["mean_traversals"])


def test_simulate_scene(tmp_path, capsys):
    save_mesh(shapes.box_grid(1, 1, 1), tmp_path / "box.json")
    scene = {
        "meshes": [
            {"path": "box.json"},
            {"path": "box.json", "translate": [0.85, 0.05, 0.02]},
        ],
        "config": {"dt": 0.01, "gravity": [0, 0, 0], "damping": 1.0},
    }
    (tmp_path / "scene.json").write_text(json.dumps(scene))
    out = tmp_path / "run"
    rc = main(["simulate", str(tmp_path / "scene.json"), "--substeps", "40", "--out", str(out)])
    assert rc == 0
    assert "final penetration count 0" in capsys.readouterr().out
    log = json.loads((out / "contact_log.json").read_text())
    assert len(log) == 40 and log[0]["constraint_count"] > 0


def test_convert_roundtrip_and_obj(cube_path, tmp_path):
    dst = tmp_path / "copy.json"
    assert main(["convert", cube_path, str(dst)]) == 0
    assert json.loads(dst.read_text())["dimension"] == 3
    obj = tmp_path / "boundary.obj"
    assert main(["convert", cube_path, str(obj)]) == 0
    assert obj.read_text().startswith("v ")


def test_env_override_seed(cube_path, tmp_path, monkeypatch):
    monkeypatch.setenv("BOUNDARYPATH_SEED", "77")
    out = tmp_path / "envrun"
    main(["validate", cube_path, "--samples", "5", "--out", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 77


def test_threads_same_output(cube_path, capsys):
    main(["query", cube_path, "0.5 0.5 0.5", "0.2 0.2 0.2", "--threads", "1"])
    a = capsys.readouterr().out
    main(["query", cube_path, "0.5 0.5 0.5", "0.2 0.2 0.2", "--threads", "4"])
    b = capsys.readouterr().out
    assert a == b

import json

import numpy as np
import pytest

from main import EXIT_DATA, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from src.formats import read_pointset, write_pointset
from src.sampling import PointSet


@pytest.fixture(autouse=True)
def log_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("SEPKIT_LOG_DIR", str(tmp_path / "logs"))


def _gen(tmp_path, name="points.csv", dist="ball", n=10, count=200, seed=1, extra=()):
    path = tmp_path / name
    assert main(["gen", "--dist", dist, "--n", str(n), "--count", str(count),
                 "--seed", str(seed), "--out", str(path), *extra]) == EXIT_OK
    return path


def _bound(capsys, *argv):
    capsys.readouterr()
    assert main(["bound", *argv]) == EXIT_OK
    return json.loads(capsys.readouterr().out)


def test_gen_writes_header_and_rows(tmp_path):
    path = _gen(tmp_path, count=25)
    lines = path.read_text().splitlines()
    assert lines[0] == "# sepkit pointset v1, n=10, kind=unit-ball, seed=1"
    assert len(lines) == 26
    assert all(len(line.split(",")) == 10 for line in lines[1:])


def test_gen_is_reproducible(tmp_path):
    first = _gen(tmp_path, name="a.csv", seed=7)
    second = _gen(tmp_path, name="b.csv", seed=7)
    assert first.read_bytes() == second.read_bytes()


def test_gen_cube_stays_in_unit_cube(tmp_path):
    points = read_pointset(_gen(tmp_path, dist="cube", n=5, count=500)).points
    assert points.min() >= 0.0
    assert points.max() <= 1.0


def test_gen_ellipsoid_needs_axes(tmp_path, capsys):
    code = main(["gen", "--dist", "ellipsoid", "--n", "2", "--count", "5",
                 "--out", str(tmp_path / "e.csv")])
    assert code == EXIT_USAGE
    assert "--axes" in capsys.readouterr().err


def test_bound_ball_single(capsys):
    document = _bound(capsys, "--theorem", "ball-single", "--n", "50", "--m", "100", "--r", "0.9")
    assert document["bound"] == "ball-single"
    assert document["value"] == pytest.approx(0.994846, abs=1e-6)
    assert "sepkit_version" in document


def test_bound_ball_single_one_point(capsys):
    document = _bound(capsys, "--theorem", "ball-single", "--n", "2", "--m", "1", "--r", "0.5")
    assert document["value"] == pytest.approx(0.75)


def test_bound_prop1(capsys):
    document = _bound(capsys, "--theorem", "prop1", "--n", "2000", "--eps", "0.1", "--theta", "0.01")
    assert document["value"] == pytest.approx(14.88, rel=1e-3)


def test_bound_missing_flag(capsys):
    code = main(["bound", "--theorem", "ball-single", "--n", "50", "--m", "100"])
    assert code == EXIT_USAGE
    assert "--r" in capsys.readouterr().err


def test_bound_out_of_range_parameter():
    assert main(["bound", "--theorem", "ball-single", "--n", "5", "--m", "10", "--r", "1.5"]) == EXIT_USAGE


def test_unknown_theorem_is_a_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["bound", "--theorem", "thm9"])
    assert excinfo.value.code == EXIT_USAGE


def test_simulate_passes_and_is_reproducible(tmp_path):
    argv = ["simulate", "--experiment", "ball", "--n", "50", "--m", "200", "--r", "0.9",
            "--trials", "300", "--seed", "3"]
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main([*argv, "--out", str(first)]) == EXIT_OK
    assert main([*argv, "--out", str(second), "--jobs", "2"]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    document = json.loads(first.read_text())
    assert document["verdict"] == "PASS"
    assert document["trials"] == 300


def test_simulate_single_trial(capsys):
    code = main(["simulate", "--experiment", "orth", "--n", "100", "--m", "3", "--eps", "0.5",
                 "--trials", "1"])
    assert code in (EXIT_OK, EXIT_FAIL)
    document = json.loads(capsys.readouterr().out)
    assert document["trials"] == 1


def test_simulate_fisher_on_cube_has_no_verdict(capsys):
    code = main(["simulate", "--experiment", "fisher", "--dist", "cube", "--n", "50", "--m", "100",
                 "--trials", "10", "--seed", "2"])
    assert code == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document["verdict"] == "N/A"
    assert document["bound_applicable"] is False
    assert "note" in document


def test_simulate_cube_rejects_angle_variant():
    code = main(["simulate", "--experiment", "cube", "--variant", "angle", "--n", "100",
                 "--m", "5", "--delta", "0.5", "--trials", "2"])
    assert code == EXIT_USAGE


def _labelled(tmp_path, errors=(3, 17, 90)):
    data = _gen(tmp_path, n=20, count=300, seed=5)
    error_file = tmp_path / "errors.txt"
    error_file.write_text("".join(f"{i}\n" for i in errors))
    return data, error_file


def test_fit_and_apply(tmp_path, capsys):
    data, errors = _labelled(tmp_path)
    model = tmp_path / "model.json"
    assert main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(model)]) == EXIT_OK
    assert "training_recall=1.0" in capsys.readouterr().out

    flags = tmp_path / "flags.csv"
    assert main(["apply", "--model", str(model), "--data", str(data), "--out", str(flags)]) == EXIT_OK
    lines = flags.read_text().splitlines()
    assert lines[0] == "index,flagged,fired_units,max_score"
    assert len(lines) == 301
    flagged = {int(line.split(",")[0]) for line in lines[1:] if line.split(",")[1] == "1"}
    assert {3, 17, 90} <= flagged


def test_fit_keep_clusters(tmp_path):
    data, errors = _labelled(tmp_path)
    kept, split = tmp_path / "kept.json", tmp_path / "split.json"
    base = ["fit", "--data", str(data), "--errors", str(errors), "--clusters", "1"]
    assert main([*base, "--out", str(kept), "--keep-clusters"]) == EXIT_OK
    assert main([*base, "--out", str(split)]) == EXIT_OK
    assert len(json.loads(kept.read_text())["units"]) == 1
    assert len(json.loads(split.read_text())["units"]) > 1


def test_fit_is_byte_identical(tmp_path):
    data, errors = _labelled(tmp_path)
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    for out in (first, second):
        assert main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(out)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert "fitted_at" not in json.loads(first.read_text())["meta"]


def test_fit_stamp(tmp_path):
    data, errors = _labelled(tmp_path)
    out = tmp_path / "model.json"
    assert main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(out), "--stamp"]) == EXIT_OK
    assert "fitted_at" in json.loads(out.read_text())["meta"]


def test_fit_rejects_empty_errors(tmp_path):
    data, errors = _labelled(tmp_path)
    errors.write_text("# nothing\n")
    code = main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(tmp_path / "m.json")])
    assert code == EXIT_USAGE


def test_fit_rejects_out_of_range_index(tmp_path):
    data, errors = _labelled(tmp_path, errors=(3, 300))
    code = main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(tmp_path / "m.json")])
    assert code == EXIT_USAGE


def test_fit_degenerate_data(tmp_path):
    data = tmp_path / "same.csv"
    write_pointset(data, PointSet(np.tile([1.0, 2.0, 3.0], (20, 1))))
    errors = tmp_path / "errors.txt"
    errors.write_text("0\n")
    code = main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(tmp_path / "m.json")])
    assert code == EXIT_FAIL


def test_apply_dimension_mismatch(tmp_path):
    data, errors = _labelled(tmp_path)
    model = tmp_path / "model.json"
    assert main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(model)]) == EXIT_OK
    other = _gen(tmp_path, name="other.csv", n=7, count=10)
    code = main(["apply", "--model", str(model), "--data", str(other), "--out", str(tmp_path / "f.csv")])
    assert code == EXIT_DATA


def test_cascade(tmp_path, capsys):
    data, errors = _labelled(tmp_path, errors=(3, 17))
    first = tmp_path / "stage0.json"
    assert main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(first)]) == EXIT_OK

    errors.write_text("3\n17\n42\n250\n")
    second = tmp_path / "stage1.json"
    capsys.readouterr()
    code = main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(second),
                 "--after", str(first)])
    assert code == EXIT_OK
    assert "training_recall=1.0" in capsys.readouterr().out

    flags = tmp_path / "flags.csv"
    code = main(["apply", "--model", str(first), "--model", str(second), "--data", str(data),
                 "--out", str(flags)])
    assert code == EXIT_OK
    lines = flags.read_text().splitlines()
    assert lines[0] == "index,flagged,fired_units,max_score,stage"
    rows = {int(line.split(",")[0]): line.split(",") for line in lines[1:]}
    for i in (3, 17, 42, 250):
        assert rows[i][1] == "1"
    assert rows[3][4] == "0"
    assert rows[42][4] in ("0", "1")


def test_cascade_with_nothing_left(tmp_path, capsys):
    data, errors = _labelled(tmp_path, errors=(3, 17))
    first = tmp_path / "stage0.json"
    assert main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(first)]) == EXIT_OK
    capsys.readouterr()
    second = tmp_path / "stage1.json"
    code = main(["fit", "--data", str(data), "--errors", str(errors), "--out", str(second),
                 "--after", str(first)])
    assert code == EXIT_OK
    assert "0 residual errors" in capsys.readouterr().out
    assert not second.exists()

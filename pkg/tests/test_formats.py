import json

import numpy as np
import pytest

from src.corrector import (
    LabeledData,
    apply,
    dumps_model,
    fit,
    load_model,
    save_model,
    training_recall,
)
from src.enums import DistributionKind
from src.errors import FormatError
from src.formats import (
    read_error_indices,
    read_pointset,
    write_flags_csv,
    write_pointset,
)
from src.sampling import DistributionSpec, sample


def test_pointset_round_trip(tmp_path):
    ps = sample(DistributionSpec.ball(7), 50, seed=12)
    path = tmp_path / "points.csv"
    write_pointset(path, ps)

    with open(path) as fp:
        header = fp.readline().strip()
    assert header == "# sepkit pointset v1, n=7, kind=unit-ball, seed=12"

    loaded = read_pointset(path)
    assert np.array_equal(loaded.points, ps.points)
    assert loaded.seed == 12
    assert loaded.kind == DistributionKind.BALL


@pytest.mark.parametrize(
    "spec",
    [
        DistributionSpec.cube(4),
        DistributionSpec.gaussian(4),
        DistributionSpec.ellipsoid(4, [2.0, 1.0, 1.0, 0.5]),
    ],
)
def test_pointset_rewrite_keeps_header_kind(tmp_path, spec):
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    write_pointset(first, sample(spec, 20, seed=3))
    loaded = read_pointset(first)
    assert loaded.kind == spec.kind
    assert loaded.subset([0, 1]).kind == spec.kind
    write_pointset(second, loaded)
    assert second.read_bytes() == first.read_bytes()


def test_pointset_without_header_is_external(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("1,2,3\n4,5,6\n")
    loaded = read_pointset(path)
    assert loaded.kind == DistributionKind.EXTERNAL
    assert loaded.points.shape == (2, 3)


def test_pointset_rejects_ragged_rows(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("1,2,3\n4,5\n")
    with pytest.raises(FormatError):
        read_pointset(path)


def test_pointset_rejects_header_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# sepkit pointset v1, n=3, kind=unit-ball, seed=1\n0.1,0.2\n")
    with pytest.raises(FormatError):
        read_pointset(path)


def test_error_indices(tmp_path):
    path = tmp_path / "errors.txt"
    path.write_text("3\n\n17  # mislabelled\n0\n")
    assert list(read_error_indices(path)) == [3, 17, 0]

    path.write_text("3\nfour\n")
    with pytest.raises(FormatError):
        read_error_indices(path)


def test_flags_csv(tmp_path):
    path = tmp_path / "flags.csv"
    write_flags_csv(path, [(0, True, (0, 2), 0.5), (1, False, (), -1.25)])
    assert path.read_text().splitlines() == [
        "index,flagged,fired_units,max_score",
        "0,1,0;2,0.5",
        "1,0,,-1.25",
    ]


def _model():
    ps = sample(DistributionSpec.ball(12), 300, seed=4)
    data = LabeledData(ps, [2, 40, 41, 200])
    return ps, fit(data)


def test_model_round_trip_is_byte_identical(tmp_path):
    ps, model = _model()
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert dumps_model(loaded) == dumps_model(model)
    for x in ps.points[:30]:
        assert apply(loaded, x) == apply(model, x)


def test_model_document_schema(tmp_path):
    _, model = _model()
    document = json.loads(dumps_model(model))
    assert document["version"] == "sepkit-model-1"
    assert document["n"] == 12
    assert len(document["H"]) == 12
    assert len(document["W"]) == document["m"]
    assert {"w", "c", "cluster_size", "beta1", "beta2"} <= set(document["units"][0])
    assert "sepkit_version" in document["meta"]
    assert "fitted_at" not in document["meta"]
    stamped = json.loads(dumps_model(model, fitted_at="2024-01-01T00:00:00"))
    assert stamped["meta"]["fitted_at"] == "2024-01-01T00:00:00"


def test_load_model_rejects_other_documents(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"version": "something-else"}))
    with pytest.raises(FormatError):
        load_model(path)
    path.write_text("{not json")
    with pytest.raises(FormatError):
        load_model(path)


def test_load_model_rejects_bad_shapes(tmp_path):
    _, model = _model()
    document = json.loads(dumps_model(model))
    document["W"] = document["W"][:-1]
    path = tmp_path / "model.json"
    path.write_text(json.dumps(document))
    with pytest.raises(FormatError):
        load_model(path)


def test_loaded_model_keeps_exact_training_recall(tmp_path):
    rng = np.random.default_rng(12)
    path = tmp_path / "model.json"
    for instance in range(50):
        ps = sample(DistributionSpec.ball(20), 300, seed=instance)
        errors = rng.choice(300, size=rng.integers(1, 11), replace=False)
        data = LabeledData(ps, errors)
        save_model(fit(data), path)
        assert training_recall(load_model(path), data) == 1.0


def test_fitted_and_loaded_arrays_share_layout(tmp_path):
    _, model = _model()
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    for fitted, reloaded in ((model.pipeline, loaded.pipeline), (model.units[0], loaded.units[0])):
        for name in ("mean", "H", "W", "w"):
            if hasattr(fitted, name):
                assert getattr(fitted, name).flags.c_contiguous
                assert getattr(reloaded, name).flags.c_contiguous

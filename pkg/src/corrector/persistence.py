import json
import logging

import numpy as np

from .. import __version__
from ..errors import FormatError
from ..utils import dumps_json
from .model import CorrectorModel, KnowledgeUnit
from .pipeline import PreprocessingPipeline

logger = logging.getLogger("Model Store")

MODEL_VERSION = "sepkit-model-1"


def model_to_dict(model: CorrectorModel, fitted_at=None):
    pipeline = model.pipeline
    meta = dict(model.meta)
    meta["pipeline"] = {
        "variance_fraction": pipeline.variance_fraction,
        "cond_cap": pipeline.cond_cap,
        "cond_capped": pipeline.cond_capped,
        "eigenvalues": pipeline.eigenvalues,
    }
    meta["sepkit_version"] = __version__
    if fitted_at is not None:
        meta["fitted_at"] = fitted_at
    return {
        "version": MODEL_VERSION,
        "n": pipeline.n,
        "m": pipeline.m,
        "mean": pipeline.mean,
        "H": pipeline.H,
        "W": pipeline.W,
        "ridge": pipeline.ridge,
        "units": [
            {
                "w": unit.w,
                "c": unit.c,
                "cluster_size": unit.cluster_size,
                "beta1": unit.beta1,
                "beta2": unit.beta2,
            }
            for unit in model.units
        ],
        "meta": meta,
    }


def dumps_model(model: CorrectorModel, fitted_at=None):
    """Model JSON; floats keep their shortest round-trip repr."""
    return dumps_json(model_to_dict(model, fitted_at))


def save_model(model: CorrectorModel, path, fitted_at=None):
    with open(path, "w") as fp:
        fp.write(dumps_model(model, fitted_at))
    logger.info(f"Model with {len(model.units)} unit(s) written to `{path}`")


def _matrix(document, key, shape, path):
    try:
        value = np.array(document[key], dtype=float)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(path, f"field `{key}` is missing or not numeric ({e})")
    if value.shape != shape:
        raise FormatError(path, f"field `{key}` has shape {value.shape}, expected {shape}")
    return value


def model_from_dict(document, path="<model>"):
    if not isinstance(document, dict) or document.get("version") != MODEL_VERSION:
        raise FormatError(path, f"not a `{MODEL_VERSION}` document")
    try:
        n = int(document["n"])
        m = int(document["m"])
        ridge = float(document["ridge"])
        units_data = list(document["units"])
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(path, f"missing or invalid header field ({e})")

    meta = dict(document.get("meta") or {})
    settings = meta.pop("pipeline", {})
    pipeline = PreprocessingPipeline(
        mean=_matrix(document, "mean", (n,), path),
        H=_matrix(document, "H", (n, m), path),
        W=_matrix(document, "W", (m, m), path),
        ridge=ridge,
        variance_fraction=float(settings.get("variance_fraction", 1.0)),
        cond_cap=float(settings.get("cond_cap", np.inf)),
        eigenvalues=np.array(settings.get("eigenvalues", np.ones(m)), dtype=float),
        cond_capped=bool(settings.get("cond_capped", False)),
    )
    units = []
    for i, unit in enumerate(units_data):
        try:
            units.append(
                KnowledgeUnit(
                    w=_matrix(unit, "w", (m,), path),
                    c=float(unit["c"]),
                    cluster_size=int(unit["cluster_size"]),
                    beta1=float(unit["beta1"]),
                    beta2=float(unit["beta2"]),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(path, f"unit {i} is malformed ({e})")
    meta.pop("sepkit_version", None)
    return CorrectorModel(pipeline=pipeline, units=tuple(units), meta=meta)


def load_model(path) -> CorrectorModel:
    try:
        with open(path) as fp:
            document = json.load(fp)
    except json.JSONDecodeError as e:
        raise FormatError(path, f"invalid JSON ({e})")
    model = model_from_dict(document, path)
    logger.debug(f"Loaded model from `{path}`: n={model.n}, m={model.m}")
    return model

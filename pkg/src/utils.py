import json
import math

import numpy as np

from .errors import ParameterError

# log magnitude above which a power term leaves the double range
LOG_OVERFLOW = 700.0
SEED_LIMIT = 2**64


def clamp_probability(value):
    if math.isnan(value):
        return 0.0
    return min(1.0, max(0.0, value))


def exp_or_inf(log_value):
    """exp() that saturates to inf instead of raising on overflow."""
    if log_value > LOG_OVERFLOW:
        return math.inf
    return math.exp(log_value)


def check_seed(seed, name="seed"):
    if isinstance(seed, (bool, float)) or not isinstance(seed, (int, np.integer)):
        raise ParameterError(name, f"must be an integer, got {seed!r}")
    if not 0 <= int(seed) < SEED_LIMIT:
        raise ParameterError(name, "must be a 64-bit unsigned integer")
    return int(seed)


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ParameterError(name, f"must be an integer, got {value!r}")
    if value < minimum:
        raise ParameterError(name, f"must be >= {minimum}, got {value}")
    return int(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        # JSON has no inf/nan
        if math.isinf(value) or math.isnan(value):
            return str(value)
        return value
    return obj


def dumps_json(obj):
    """Deterministic JSON text: sorted keys, round-trip float repr."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"

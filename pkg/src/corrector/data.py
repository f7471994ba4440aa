from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..sampling import PointSet


@dataclass(frozen=True, eq=False)
class LabeledData:
    """A point set and the 0-based indices of the rows labelled as errors."""

    points: PointSet
    errors: np.ndarray

    def __post_init__(self):
        points = self.points
        if not isinstance(points, PointSet):
            points = PointSet(points)
            object.__setattr__(self, "points", points)

        raw = np.asarray(self.errors).reshape(-1)
        if raw.size and not np.issubdtype(raw.dtype, np.integer):
            if not np.all(np.equal(np.mod(raw, 1), 0)):
                raise ParameterError("errors", "indices must be integers")
        errors = raw.astype(int)
        if errors.size and (errors.min() < 0 or errors.max() >= points.count):
            raise ParameterError(
                "errors", f"indices must lie in [0, {points.count - 1}]"
            )
        if np.unique(errors).size != errors.size:
            raise ParameterError("errors", "indices must be unique")
        errors = np.sort(errors)
        errors.setflags(write=False)
        object.__setattr__(self, "errors", errors)

    @property
    def error_mask(self):
        mask = np.zeros(self.points.count, dtype=bool)
        mask[self.errors] = True
        return mask

    @property
    def correct_indices(self):
        return np.flatnonzero(~self.error_mask)

    def with_errors(self, errors):
        return LabeledData(self.points, errors)

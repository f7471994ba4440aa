from enum import Enum


class DistributionKind(Enum):
    BALL = "unit-ball"
    SPHERE = "unit-sphere"
    CUBE = "unit-cube-product"
    GAUSSIAN = "gaussian"
    ELLIPSOID = "ellipsoid"
    EXTERNAL = "external"


# names accepted by `gen --dist`
CLI_DISTRIBUTIONS = {
    "ball": DistributionKind.BALL,
    "sphere": DistributionKind.SPHERE,
    "cube": DistributionKind.CUBE,
    "gauss": DistributionKind.GAUSSIAN,
    "ellipsoid": DistributionKind.ELLIPSOID,
}


class BallVariant(Enum):
    SINGLE = "single"
    ALL = "all"
    ANGLE = "angle"


class CubeVariant(Enum):
    SINGLE = "single"
    ALL = "all"


class Theorem(Enum):
    PROP1 = "prop1"
    BALL_SINGLE = "ball-single"
    BALL_ALL = "ball-all"
    BALL_ANGLE = "ball-angle"
    MAX_M_SINGLE = "max-m-single"
    MAX_M_ALL = "max-m-all"
    CUBE_SINGLE = "cube-single"
    CUBE_ALL = "cube-all"
    TUPLE = "tuple"


class Experiment(Enum):
    ORTH = "orth"
    BALL = "ball"
    CUBE = "cube"
    TUPLE = "tuple"
    FISHER = "fisher"
    COLLATERAL = "collateral"


class Verdict(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    # the bound does not cover the sampled law
    NOT_APPLICABLE = "N/A"


class CovarianceMode(Enum):
    EXACT = "exact"
    # one covariance of the whole whitened set for every unit; faster, not
    # what the fitting procedure prescribes
    GLOBAL = "global"

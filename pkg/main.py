import argparse
import logging
import sys
from datetime import datetime

from src import __version__
from src.bounds import (
    BallBoundQuery,
    CubeBoundQuery,
    TupleBoundQuery,
    ball_all_bound,
    ball_angle_bound,
    ball_single_bound,
    cube_all_bound,
    cube_single_bound,
    max_cardinality_all,
    max_cardinality_single,
    quasiorthogonal_set_size,
    tuple_bound,
)
from src.corrector import (
    CorrectorOptions,
    LabeledData,
    apply_many,
    cascade_apply_many,
    fit,
    load_model,
    residual_errors,
    save_model,
    training_recall,
)
from src.enums import (
    CLI_DISTRIBUTIONS,
    BallVariant,
    CovarianceMode,
    CubeVariant,
    DistributionKind,
    Experiment,
    Theorem,
    Verdict,
)
from src.errors import (
    DegenerateDataError,
    DimensionMismatchError,
    ParameterError,
    SepkitError,
)
from src.formats import (
    read_error_indices,
    read_pointset,
    write_flags_csv,
    write_json,
    write_pointset,
)
from src.logger import setup_logger
from src.sampling import DistributionSpec, radial_statistics, sample
from src.separability import (
    ball_experiment,
    collateral_sweep,
    cube_experiment,
    fisher_separability_experiment,
    orthogonality_experiment,
    tuple_experiment,
)
from src.utils import dumps_json

logger = logging.getLogger("CLI")

DEFAULT_SEED = 20170917
DEFAULT_TRIALS = 200

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_OPERATIONAL = 2
EXIT_USAGE = 64
EXIT_DATA = 65


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(value):
    try:
        return [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got `{value}`")


def _int_list(value):
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got `{value}`")


def _clusters(value):
    if value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected `auto` or an integer, got `{value}`")


def _require(args, *names):
    for name in names:
        if getattr(args, name.replace("-", "_")) is None:
            raise ParameterError(f"--{name}", f"is required for this {args.command} run")


def _emit(document, out=None):
    if out:
        write_json(out, document)
        logger.info(f"Wrote `{out}`")
    else:
        sys.stdout.write(dumps_json(document))


def cmd_gen(args):
    kind = CLI_DISTRIBUTIONS[args.dist]
    if kind == DistributionKind.ELLIPSOID:
        _require(args, "axes")
        spec = DistributionSpec.ellipsoid(args.n, args.axes)
    elif kind == DistributionKind.CUBE:
        spec = DistributionSpec.cube(args.n, variances=args.variance)
    elif kind == DistributionKind.GAUSSIAN:
        spec = DistributionSpec.gaussian(args.n, variances=args.variance)
    else:
        spec = DistributionSpec(kind, args.n)

    ps = sample(spec, args.count, args.seed)
    write_pointset(args.out, ps)
    stats = radial_statistics(ps)
    print(
        f"{ps.count} points, n={ps.dimension}, kind={ps.kind.value}, seed={ps.seed}, "
        f"min_norm={stats.min_norm:.6g}, max_norm={stats.max_norm:.6g}, "
        f"mean_square_norm={stats.mean_square_norm:.6g}"
    )
    return EXIT_OK


def _ball_query(args):
    _require(args, "n", "m", "r")
    return BallBoundQuery(args.n, args.m, args.r)


def _cube_query(args):
    _require(args, "n", "m", "delta")
    return CubeBoundQuery(args.n, args.m, args.delta, args.variance)


def _tuple_query(args):
    _require(args, "n", "m", "tuple-size", "beta1", "beta2")
    return TupleBoundQuery(args.n, args.m, args.tuple_size, args.beta1, args.beta2)


def _cap_args(args):
    _require(args, "n", "r", "theta")
    return args.n, args.r, args.theta


def _prop1(args):
    _require(args, "n", "eps", "theta")
    return quasiorthogonal_set_size(args.n, args.eps, args.theta)


BOUNDS = {
    Theorem.PROP1: _prop1,
    Theorem.BALL_SINGLE: lambda args: ball_single_bound(_ball_query(args)),
    Theorem.BALL_ALL: lambda args: ball_all_bound(_ball_query(args)),
    Theorem.BALL_ANGLE: lambda args: ball_angle_bound(_ball_query(args)),
    Theorem.MAX_M_SINGLE: lambda args: max_cardinality_single(*_cap_args(args)),
    Theorem.MAX_M_ALL: lambda args: max_cardinality_all(*_cap_args(args)),
    Theorem.CUBE_SINGLE: lambda args: cube_single_bound(_cube_query(args)),
    Theorem.CUBE_ALL: lambda args: cube_all_bound(_cube_query(args)),
    Theorem.TUPLE: lambda args: tuple_bound(_tuple_query(args)),
}


def cmd_bound(args):
    result = BOUNDS[Theorem(args.theorem)](args)
    document = result.to_dict()
    document["sepkit_version"] = __version__
    sys.stdout.write(dumps_json(document))
    return EXIT_OK


def _variant(args, enum):
    if args.variant is None:
        return enum.SINGLE
    try:
        return enum(args.variant)
    except ValueError:
        choices = ", ".join(v.value for v in enum)
        raise ParameterError("--variant", f"must be one of {choices} for {args.experiment}")


def _simulate_report(args):
    experiment = Experiment(args.experiment)
    common = {"trials": args.trials, "seed": args.seed, "jobs": args.jobs}
    if experiment == Experiment.ORTH:
        _require(args, "n", "m", "eps")
        return orthogonality_experiment(args.n, args.m, args.eps, **common)
    if experiment == Experiment.BALL:
        variant = _variant(args, BallVariant)
        return ball_experiment(_ball_query(args), variant, **common)
    if experiment == Experiment.CUBE:
        variant = _variant(args, CubeVariant)
        return cube_experiment(_cube_query(args), variant, **common)
    if experiment == Experiment.TUPLE:
        return tuple_experiment(_tuple_query(args), **common)
    if experiment == Experiment.FISHER:
        _require(args, "n", "m")
        kind = CLI_DISTRIBUTIONS[args.dist or "ball"]
        return fisher_separability_experiment(
            args.n, args.m, r=args.r if args.r is not None else 0.9, kind=kind, **common
        )
    _require(args, "n", "m", "errors")
    return collateral_sweep(args.n, args.m, args.errors, args.trials, args.seed)


def cmd_simulate(args):
    try:
        report = _simulate_report(args)
    except ParameterError:
        raise
    except (SepkitError, OSError) as e:
        logger.error(f"Simulation failed: {e}")
        return EXIT_OPERATIONAL
    _emit(report.to_dict(), args.out)
    if getattr(report, "verdict", Verdict.PASS) == Verdict.FAIL:
        return EXIT_FAIL
    return EXIT_OK


def cmd_fit(args):
    points = read_pointset(args.data)
    errors = read_error_indices(args.errors)
    if errors.size == 0:
        raise ParameterError("--errors", f"`{args.errors}` lists no error indices")
    data = LabeledData(points, errors)
    options = CorrectorOptions(
        clusters=args.clusters,
        beta_threshold=args.beta_threshold,
        variance_fraction=args.variance_fraction,
        cond_cap=args.cond_cap,
        margin=args.margin,
        covariance=CovarianceMode(args.covariance),
        ridge=args.ridge,
        split_clusters=not args.keep_clusters,
    )

    if args.after:
        models = [load_model(path) for path in args.after]
        residual = residual_errors(models, data)
        if residual.size == 0:
            print(f"0 residual errors after {len(models)} stage(s); no model written")
            return EXIT_OK
        logger.info(f"{residual.size}/{data.errors.size} errors left for this stage")
        data = data.with_errors(residual)

    model = fit(data, options)
    fitted_at = datetime.now().isoformat(timespec="seconds") if args.stamp else None
    save_model(model, args.out, fitted_at)
    recall = training_recall(model, data)
    sizes = ",".join(str(unit.cluster_size) for unit in model.units)
    print(
        f"n={model.n}, m={model.m}, units={len(model.units)}, "
        f"cluster_sizes=[{sizes}], training_recall={recall}"
    )
    return EXIT_OK


def cmd_apply(args):
    models = [load_model(path) for path in args.model]
    points = read_pointset(args.data)
    for path, model in zip(args.model, models):
        if model.n != points.dimension:
            raise DimensionMismatchError(model.n, points.dimension, f"model `{path}`")

    if len(models) == 1:
        decisions = apply_many(models[0], points.points)
        rows = [
            (i, d.flagged, d.fired_units, d.max_score) for i, d in enumerate(decisions)
        ]
        write_flags_csv(args.out, rows)
        flagged = sum(d.flagged for d in decisions)
    else:
        cascades = cascade_apply_many(models, points.points)
        rows = []
        for i, cascade in enumerate(cascades):
            fired = [
                f"{stage}:{unit}"
                for stage, decision in enumerate(cascade.stages)
                for unit in decision.fired_units
            ]
            max_score = max(d.max_score for d in cascade.stages)
            rows.append((i, cascade.flagged, fired, max_score, cascade.first_stage))
        write_flags_csv(args.out, rows, with_stage=True)
        flagged = sum(c.flagged for c in cascades)

    print(f"{flagged}/{points.count} rows flagged by {len(models)} model(s)")
    return EXIT_OK


def build_parser():
    parser = ArgumentParser(
        prog="sepkit",
        description="Stochastic separation bounds, Monte Carlo checks and Fisher AI correctors",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"sepkit {__version__}")
    parser.add_argument("--log-dir", help="Folder for log files (default: logs/ or $SEPKIT_LOG_DIR).")
    parser.add_argument("--verbose", action="store_true", help="Log debug messages to stderr.")

    subparsers = parser.add_subparsers(help="subcommands", dest="command", required=True)

    # Gen command
    gen_parser = subparsers.add_parser("gen", help="Sample a point set into a CSV file.", allow_abbrev=False)
    gen_parser.add_argument("--dist", choices=sorted(CLI_DISTRIBUTIONS), required=True, help="Distribution to sample.")
    gen_parser.add_argument("--n", type=int, required=True, help="Dimension.")
    gen_parser.add_argument("--count", type=int, required=True, help="Number of points.")
    gen_parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Master seed.")
    gen_parser.add_argument("--out", required=True, help="Output CSV path.")
    gen_parser.add_argument("--axes", type=_float_list, help="Ellipsoid semi-axes, comma-separated.")
    gen_parser.add_argument("--variance", type=_float_list, help="Per-coordinate variances (cube, gauss).")

    # Bound command
    bound_parser = subparsers.add_parser("bound", help="Evaluate a closed-form bound.", allow_abbrev=False)
    bound_parser.add_argument("--theorem", choices=[t.value for t in Theorem], required=True, help="Bound to evaluate.")
    _add_numeric_flags(bound_parser)

    # Simulate command
    simulate_parser = subparsers.add_parser(
        "simulate", help="Monte Carlo check of a separation event against its bound.", allow_abbrev=False
    )
    simulate_parser.add_argument("--experiment", choices=[e.value for e in Experiment], required=True, help="Event to simulate.")
    simulate_parser.add_argument("--variant", choices=[v.value for v in BallVariant], help="Event variant (ball, cube).")
    simulate_parser.add_argument("--dist", choices=sorted(CLI_DISTRIBUTIONS), help="Distribution for the fisher experiment.")
    simulate_parser.add_argument("--errors", type=_int_list, help="Error counts for the collateral sweep, comma-separated.")
    simulate_parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="Number of trials.")
    simulate_parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Master seed.")
    simulate_parser.add_argument("--jobs", type=int, default=1, help="Worker processes; output does not depend on it.")
    simulate_parser.add_argument("--out", help="Report JSON path (stdout if omitted).")
    _add_numeric_flags(simulate_parser)

    # Fit command
    fit_parser = subparsers.add_parser("fit", help="Fit a corrector to labelled errors.", allow_abbrev=False)
    fit_parser.add_argument("--data", required=True, help="Point-set CSV.")
    fit_parser.add_argument("--errors", required=True, help="File of 0-based error indices, one per line.")
    fit_parser.add_argument("--out", required=True, help="Output model JSON path.")
    fit_parser.add_argument("--clusters", type=_clusters, default="auto", help="Number of error clusters or `auto`.")
    fit_parser.add_argument("--beta-threshold", type=float, default=0.5, help="Minimum average correlation inside a cluster.")
    fit_parser.add_argument("--variance-fraction", type=float, default=0.999, help="Share of variance the projection keeps.")
    fit_parser.add_argument("--cond-cap", type=float, default=1e6, help="Largest condition number whitened without extra ridge.")
    fit_parser.add_argument("--margin", type=float, default=0.0, help="Threshold margin in standard deviations of the rest.")
    fit_parser.add_argument("--covariance", choices=[c.value for c in CovarianceMode], default="exact", help="Per-unit covariance of the rest.")
    fit_parser.add_argument("--ridge", type=float, help="Whitening ridge (default: 1e-10 * trace / m).")
    fit_parser.add_argument(
        "--keep-clusters", action="store_true", help="Keep explicit clusters below the threshold instead of splitting them."
    )
    fit_parser.add_argument("--stamp", action="store_true", help="Record the fitting time in the model.")
    fit_parser.add_argument(
        "--after", action="append", help="Fit a cascade stage on the errors these models miss (repeatable, in order)."
    )

    # Apply command
    apply_parser = subparsers.add_parser("apply", help="Flag points with one model or a cascade.", allow_abbrev=False)
    apply_parser.add_argument("--model", action="append", required=True, help="Model JSON (repeat for a cascade).")
    apply_parser.add_argument("--data", required=True, help="Point-set CSV.")
    apply_parser.add_argument("--out", required=True, help="Output flags CSV path.")

    return parser


def _add_numeric_flags(parser):
    parser.add_argument("--n", type=int, help="Dimension.")
    parser.add_argument("--m", type=int, help="Sample size M (N for orth).")
    parser.add_argument("--r", type=float, help="Radius threshold in (0, 1).")
    parser.add_argument("--eps", type=float, help="Orthogonality tolerance.")
    parser.add_argument("--theta", type=float, help="Allowed failure probability.")
    parser.add_argument("--delta", type=float, help="Cube shell half-width in (0, 2/3).")
    parser.add_argument("--variance", type=_float_list, help="Cube coordinate variances (default 1/12).")
    parser.add_argument("--tuple-size", type=int, help="Size m of the separated tuple.")
    parser.add_argument("--beta1", type=float, help="Upper correlation bound of the tuple.")
    parser.add_argument("--beta2", type=float, help="Lower correlation bound of the tuple.")


COMMANDS = {
    "gen": cmd_gen,
    "bound": cmd_bound,
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "apply": cmd_apply,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logger(args.log_dir, args.verbose)

    try:
        return COMMANDS[args.command](args)
    except DimensionMismatchError as e:
        logger.error(str(e))
        return EXIT_DATA
    except ParameterError as e:
        logger.error(str(e))
        return EXIT_USAGE
    except DegenerateDataError as e:
        logger.error(str(e))
        return EXIT_FAIL
    except (SepkitError, OSError) as e:
        logger.error(str(e))
        return EXIT_OPERATIONAL


if __name__ == "__main__":
    sys.exit(main())

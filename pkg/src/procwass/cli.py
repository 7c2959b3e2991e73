"""Command-line interface.

Subcommands: ``gaussian-dist``, ``empirical-dist``, ``recover``, ``simulate``
and ``selftest``. Reports are canonical JSON (schema ``procwass/1``) with
an embedded run manifest; all randomness comes from ``--seed``.

Exit codes: 0 ok, 2 parse error, 3 dimension mismatch, 4 not PSD,
5 solver did not converge.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    DimensionMismatch,
    NotConverged,
    NotPSD,
    ParseError,
    SingularCovariance,
)
from .gaussian import bures_w2, canonical_class, pw_gaussian
from .io import (
    SCHEMA,
    RunManifest,
    dumps_canonical,
    file_digest,
    load_gaussian,
    read_points_csv,
    write_plan_csv,
    write_points_csv,
)
from .linalg import random_orthogonal
from .procrustes import AlignConfig, pw_empirical
from .recovery import (
    ObservationSet,
    bootstrap_estimate,
    empirical_covariance,
    recovery_experiment,
    simulate_observations,
    sqrt_spectrum,
)
from .transport import DiscreteMeasure

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_DIMENSION = 3
EXIT_NOT_PSD = 4
EXIT_NOT_CONVERGED = 5


def _inputs(*paths):
    return [{"path": str(p), "sha256": file_digest(p)} for p in paths if p is not None]


def _report(command: str, params: dict, seed: int, inputs: list, body: dict) -> dict:
    manifest = RunManifest(command=command, params=params, seed=seed, inputs=inputs)
    return {"schema": SCHEMA, "command": command, "manifest": manifest.to_dict(), **body}


def _write(doc: dict, out) -> None:
    text = dumps_canonical(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _restrict(args) -> bool:
    return args.group == "special-orthogonal"


def cmd_gaussian_dist(args) -> int:
    g0 = load_gaussian(args.spec0)
    g1 = load_gaussian(args.spec1)
    if g0.dim != g1.dim:
        raise DimensionMismatch(f"{args.spec0} has dimension {g0.dim} but {args.spec1} has {g1.dim}")
    body = {
        "metric": args.metric,
        "mean_gap": float(np.linalg.norm(g0.mean - g1.mean)),
        "sqrt_spectra": [canonical_class(g).sqrt_eigenvalues for g in (g0, g1)],
    }
    if args.metric == "bures":
        body["distance"] = bures_w2(g0, g1)
    else:
        res = pw_gaussian(g0, g1, restrict_special=_restrict(args))
        body["distance"] = res.distance
        body["theta_star"] = res.theta_star.matrix
    params = {"metric": args.metric, "group": args.group}
    _write(_report("gaussian-dist", params, args.seed, _inputs(args.spec0, args.spec1), body), args.out)
    return EXIT_OK


def _load_measure(path, weights_col):
    pts, w = read_points_csv(path, weights_col)
    return DiscreteMeasure(pts, w)


def cmd_empirical_dist(args) -> int:
    X = _load_measure(args.file0, args.weights_col)
    Y = _load_measure(args.file1, args.weights_col)
    if X.dim != Y.dim:
        raise DimensionMismatch(f"{args.file0} has {X.dim} columns but {args.file1} has {Y.dim}")
    cfg = AlignConfig(
        restrict_special=_restrict(args),
        num_restarts=args.restarts,
        max_outer_iter=args.max_iter,
        rel_tol=args.tol,
        ot_backend=args.ot,
        epsilon=args.epsilon,
        seed=args.seed,
        screen_size=args.screen_size if args.screen_size > 0 else None,
    )
    res = pw_empirical(X, Y, cfg)
    body = {
        "distance": res.distance,
        "theta_star": res.theta_star.matrix,
        "translation": res.translation,
        "trace": list(res.trace),
        "converged": res.converged,
        "start": res.start,
        "n_points": [X.n, Y.n],
    }
    params = {
        "group": args.group,
        "ot": args.ot,
        "epsilon": args.epsilon,
        "restarts": args.restarts,
        "max_iter": args.max_iter,
        "tol": args.tol,
        "screen_size": args.screen_size,
        "weights_col": args.weights_col,
    }
    doc = _report("empirical-dist", params, args.seed, _inputs(args.file0, args.file1), body)
    _write(doc, args.out)
    if args.plan_out:
        write_plan_csv(res.plan.coupling, args.plan_out)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _class_doc(report) -> dict:
    doc = {
        "n": report.n_per_replicate,
        "replicates": report.replicates,
        "estimated_class": report.estimated_class.sqrt_eigenvalues,
        "per_replicate_sqrt_spectra": report.per_replicate_sqrt_spectra,
    }
    if report.true_class is not None:
        doc["true_class"] = report.true_class.sqrt_eigenvalues
        doc["class_error"] = report.class_error
        doc["per_replicate_errors"] = report.per_replicate_errors
        doc["mean_class_error"] = report.mean_class_error
        doc["std_class_error"] = report.std_class_error
    return doc


def _parse_grid(text: str) -> list[int]:
    try:
        grid = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ParseError(f"--n-grid must be a comma-separated list of integers, got {text!r}") from None
    if not grid or min(grid) < 1:
        raise ParseError("--n-grid entries must be positive integers")
    return grid


def cmd_recover(args) -> int:
    if (args.data is None) == (args.cov is None):
        raise ParseError("give exactly one of --data or --cov")
    if args.data is not None:
        pts, _ = read_points_csv(args.data)
        obs = ObservationSet(pts)
        B = args.bootstrap if args.bootstrap is not None else 100
        estimate, spectra = bootstrap_estimate(obs, B, args.seed, center=args.center)
        body = {
            "mode": "bootstrap",
            "n": obs.n,
            "bootstrap": B,
            "estimated_class": estimate.sqrt_eigenvalues,
            "plugin_class": sqrt_spectrum(empirical_covariance(obs, args.center)),
            "bootstrap_std": spectra.std(axis=0),
        }
        params = {"bootstrap": B, "center": args.center}
        _write(_report("recover", params, args.seed, _inputs(args.data), body), args.out)
        return EXIT_OK

    g = load_gaussian(args.cov)
    grid = _parse_grid(args.n_grid) if args.n_grid else [args.n]
    reports = recovery_experiment(g.cov, grid, args.replicates, args.seed, _restrict(args))
    body = {"mode": "simulate", "reports": [_class_doc(r) for r in reports]}
    params = {"n_grid": grid, "replicates": args.replicates, "group": args.group}
    _write(_report("recover", params, args.seed, _inputs(args.cov), body), args.out)
    sweep = args.sweep_out
    if sweep is None and args.out and args.n_grid:
        sweep = str(Path(args.out).with_suffix(".sweep.csv"))
    if sweep:
        rows = [
            (r.n_per_replicate, r.class_error, r.mean_class_error, r.std_class_error) for r in reports
        ]
        with open(sweep, "w") as fh:
            fh.write("n,class_error,mean_class_error,std_class_error\n")
            for n, ce, m, s in rows:
                fh.write(f"{n},{ce!r},{m!r},{s!r}\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    g = load_gaussian(args.cov)
    d = g.dim
    if args.identity_v:
        V = np.eye(d)
    else:
        V = random_orthogonal(d, args.seed, _restrict(args)).matrix
    obs = simulate_observations(g.cov, V, args.n, args.seed)
    params = {"n": args.n, "identity_v": args.identity_v, "group": args.group}
    manifest = RunManifest("simulate", params, args.seed, _inputs(args.cov)).to_dict()
    header = dumps_canonical({"schema": SCHEMA, "manifest": manifest, "V": V}).strip()
    if args.out:
        write_points_csv(obs.samples, args.out, comment=header)
    else:
        write_points_csv(obs.samples, sys.stdout, comment=header)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(seed=args.seed)
    passed = all(results.values())
    doc = _report("selftest", {}, args.seed, [], {"checks": results, "passed": passed})
    _write(doc, args.out)
    return EXIT_OK if passed else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument(
        "--group",
        choices=("orthogonal", "special-orthogonal"),
        default="orthogonal",
        help="optimize over O(d) (default) or SO(d)",
    )

    p = argparse.ArgumentParser(prog="procwass", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"procwass {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gaussian-dist", parents=[common], help="distance between two Gaussian specs")
    g.add_argument("spec0")
    g.add_argument("spec1")
    g.add_argument("--metric", choices=("bures", "pw"), default="pw")
    g.set_defaults(func=cmd_gaussian_dist)

    e = sub.add_parser("empirical-dist", parents=[common], help="distance between two CSV point clouds")
    e.add_argument("file0")
    e.add_argument("file1")
    e.add_argument("--ot", choices=("exact", "sinkhorn"), default="exact")
    e.add_argument("--epsilon", type=float, default=None)
    e.add_argument("--restarts", type=int, default=4)
    e.add_argument("--max-iter", type=int, default=200)
    e.add_argument("--tol", type=float, default=1e-9)
    e.add_argument("--screen-size", type=int, default=500, help="0 disables subsample screening")
    e.add_argument("--weights-col", type=int, default=None, help="column holding point weights, in both files")
    e.add_argument("--plan-out", help="write the optimal plan as sparse i,j,mass CSV")
    e.set_defaults(func=cmd_empirical_dist)

    r = sub.add_parser("recover", parents=[common], help="estimate a latent Gaussian class")
    r.add_argument("--data", help="CSV of observations")
    r.add_argument("--cov", help="Gaussian spec to simulate from")
    r.add_argument("--n", type=int, default=1000)
    r.add_argument("--n-grid", help="comma-separated sample sizes for a sweep")
    r.add_argument("--replicates", type=int, default=50)
    r.add_argument("--bootstrap", type=int, default=None, help="bootstrap resamples for --data")
    r.add_argument("--center", action="store_true", help="subtract the sample mean (--data)")
    r.add_argument("--sweep-out", help="CSV of n, class_error, mean and std per-replicate error")
    r.set_defaults(func=cmd_recover)

    s = sub.add_parser("simulate", parents=[common], help="sample r = V p with p ~ N(0, cov)")
    s.add_argument("--cov", required=True)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--identity-v", action="store_true", help="use V = I instead of a Haar draw")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("selftest", parents=[common], help="run the invariant checks")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"procwass: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DimensionMismatch as exc:
        print(f"procwass: dimension mismatch: {exc}", file=sys.stderr)
        return EXIT_DIMENSION
    except (NotPSD, SingularCovariance) as exc:
        print(f"procwass: not positive semi-definite: {exc}", file=sys.stderr)
        return EXIT_NOT_PSD
    except NotConverged as exc:
        print(f"procwass: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())

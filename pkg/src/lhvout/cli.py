"""Command-line entry point: ``lhvout <subcommand> ...``.

Reports are printed as ``KEY value`` lines.  Exit status is 0 on success,
1 on a domain error (bad input, failed invariant, counterexample found) and
2 on a usage error.
"""

import argparse
import logging
import os
import sys

import numpy as np

from . import bounds, conversion, fw, geometry, openq, polytope, quantum, verifier
from .behaviour import Scenario, read_behaviour, write_behaviour
from .errors import LhvOutError

DEFAULT_SEED = 0
THREADS_ENV = "LHVOUT_THREADS"


def _emit(key, value):
    if isinstance(value, bool):
        value = str(value).lower()
    elif isinstance(value, (float, np.floating)):
        value = repr(float(value))
    print(f"{key} {value}")


def _bound_text(value):
    # bounds of integer matrices are exact integers; print them without a decimal point
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _cmd_bound(args):
    M = bounds.read_bellm(args.matrix)
    if args.heuristic:
        _emit("L_LOWER", bounds.local_bound_heuristic(M, restarts=args.restarts, seed=args.seed)[0])
        return 0
    _emit("L", _bound_text(bounds.local_bound(M)))
    _emit("L_OUT", _bound_text(bounds.out_bound(M)))
    _emit("L_OUT_SYM", _bound_text(bounds.out_bound(bounds.symmetrize(M))))
    return 0


def _report_membership(res, prefix=""):
    _emit(prefix + "MEMBER", res.member)
    _emit(prefix + "DISTANCE", res.distance)
    if not res.member:
        _, offset, scale = polytope.normalize_inequality(res.inequality, res.polytope_bound, bound_to=2.0)
        _emit(prefix + "BOUND", 2.0)
        _emit(prefix + "VALUE", (res.behaviour_value - offset) / scale)
        _emit(prefix + "RAW_BOUND", res.polytope_bound)
        _emit(prefix + "RAW_VALUE", res.behaviour_value)


def _cmd_membership(args):
    b = read_behaviour(args.behaviour)
    kind = polytope.OUT if args.kind == "out" else polytope.LHV
    res = polytope.membership(b, kind, tol=args.tol)
    _emit("KIND", kind)
    _report_membership(res)
    if res.member and args.model_out:
        polytope.write_model(res.model, args.model_out)
    return 0


def _cmd_build(args):
    alice = quantum.read_measurements(args.alice, normalize=args.normalize)
    bob = quantum.read_measurements(args.bob, normalize=args.normalize)
    target = quantum.state_behaviour(quantum.werner_state(args.visibility), alice, bob)
    cfg = fw.FwConfig(max_iters=args.iters, eps_target=args.eps, lmo_mode=args.lmo,
                      restarts=args.restarts, seed=args.seed, variant=args.variant)
    res = fw.build(target, cfg)
    polytope.write_model(res.model, args.out)
    _emit("SEED", args.seed)
    _emit("EPSILON", res.epsilon)
    _emit("ITERATIONS", res.iterations)
    _emit("FW_GAP", res.fw_gap)
    _emit("STRATEGIES", len(res.model))
    return 0


def _cmd_verify(args):
    cert = verifier.certify(args.model, args.alice, args.bob, args.visibility, args.threshold)
    for line in cert.lines():
        print(line)
    return 0


def _cmd_geometry(args):
    ms = quantum.read_measurements(args.measurements, normalize=args.normalize)
    if args.double:
        ms = quantum.double_set(ms)
    if args.mode == "sphere":
        radius = geometry.sphere_radius(ms)
        facets = geometry.hull_facets(ms)
    else:
        radius = geometry.hemisphere_radius(ms)
        facets = geometry.hull_facets(ms, include_origin=True)
    _emit("POINTS", len(ms))
    _emit("RADIUS", radius)
    _emit("FACETS", len(facets))
    if args.spot_checks:
        fails = geometry.spot_check_radius(ms, radius, args.spot_checks, seed=args.seed,
                                           upper=args.mode == "hemisphere",
                                           include_origin=args.mode == "hemisphere")
        _emit("SPOT_CHECKS", args.spot_checks)
        _emit("SPOT_FAILURES", fails)
        return 1 if fails else 0
    return 0


def _cmd_convert(args):
    model = polytope.read_model(args.model)
    b = read_behaviour(args.behaviour)
    if model.scenario.shape != b.scenario.shape:
        raise LhvOutError("model and behaviour scenarios differ")
    if np.abs(polytope.mixture_table(model) - b.table).max() > args.tol:
        raise LhvOutError("model does not reproduce the behaviour")
    w = conversion.find_deterministic_input(b, args.tol)
    if w is None:
        raise LhvOutError("no Alice setting has a deterministic outcome")
    out = conversion.convert(model, w, args.tol)
    polytope.write_model(out, args.out)
    _emit("X_PRIME", w.x_prime)
    _emit("FIXED_OUTCOME", f"{w.fixed_outcome:+d}")
    _emit("RESIDUAL", float(np.abs(polytope.mixture_table(out) - b.table).max()))
    return 0


def _cmd_openq(args):
    s = Scenario(args.mx, args.my)
    if args.exhaustive_vertices:
        summary = openq.exhaustive_vertices(s, bundle_dir=args.bundle_dir)
    else:
        summary = openq.sweep(s, args.samples, seed=args.seed, bundle_dir=args.bundle_dir,
                              workers=args.threads)
        _emit("SEED", args.seed)
    for line in summary.lines():
        print(line)
    for path in summary.bundles:
        _emit("BUNDLE", path)
    return 1 if summary.counterexamples else 0


def _cmd_prbox(args):
    box = quantum.pr_box()
    model = quantum.pr_box_model()
    if args.out:
        write_behaviour(box, args.out)
    if args.model_out:
        polytope.write_model(model, args.model_out)
    if not (args.out or args.model_out or args.check):
        print("\n".join(f"{' '.join(repr(float(v)) for v in box.table[x, y].ravel())}"
                        for x in range(2) for y in range(2)))
    if args.check:
        err = float(np.abs(polytope.mixture_table(model) - box.table).max())
        _emit("MODEL_ERROR", err)
        _report_membership(polytope.membership(box, polytope.OUT), "OUT_")
        _report_membership(polytope.membership(box, polytope.LHV), "LHV_")
    return 0


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def make_parser():
    parser = argparse.ArgumentParser(prog="lhvout", description="Local and outcome-communication models.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--threads", type=_positive_int,
                        default=int(os.environ.get(THREADS_ENV, "1")),
                        help=f"worker cap (default 1, or ${THREADS_ENV})")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("bound", help="local, OUT and symmetrised bounds of a BELLM matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--heuristic", action="store_true", help="only a local-bound lower estimate")
    p.add_argument("--restarts", type=_positive_int, default=64)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("membership", help="LHV or OUT membership LP for a behaviour file")
    p.add_argument("--behaviour", required=True)
    p.add_argument("--kind", choices=("lhv", "out"), default="lhv")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--model-out", help="write the decomposition of a member here")
    p.set_defaults(func=_cmd_membership)

    p = sub.add_parser("build", help="Frank-Wolfe OUT model for a Werner state")
    p.add_argument("--state", choices=("werner",), default="werner")
    p.add_argument("--visibility", type=float, required=True)
    p.add_argument("--alice", required=True)
    p.add_argument("--bob", required=True)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--iters", type=_positive_int, default=1000)
    p.add_argument("--lmo", choices=("exact", "heuristic"), default="exact")
    p.add_argument("--restarts", type=_positive_int, default=16)
    p.add_argument("--variant", choices=("plain", "pairwise"), default="plain")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--normalize", action="store_true", help="rescale measurement rows to unit length")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("verify", help="certificate for a Werner-state model file")
    p.add_argument("--model", required=True)
    p.add_argument("--alice", required=True)
    p.add_argument("--bob", required=True)
    p.add_argument("--visibility", type=float, required=True)
    p.add_argument("--threshold", type=float, default=geometry.NONLOCALITY_THRESHOLD)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("geometry", help="inscribed radius of a measurement hull")
    p.add_argument("--measurements", required=True)
    p.add_argument("--mode", choices=("sphere", "hemisphere"), default="sphere")
    p.add_argument("--double", action="store_true", help="adjoin antipodes first")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--spot-checks", type=int, default=0, help="LP-test this many random directions")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=_cmd_geometry)

    p = sub.add_parser("convert", help="OUT model to LHV model via a deterministic Alice setting")
    p.add_argument("--model", required=True)
    p.add_argument("--behaviour", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("openq", help="search antipodal behaviours for OUT-but-not-LHV cases")
    p.add_argument("--mx", type=_positive_int, required=True, help="Alice settings before doubling")
    p.add_argument("--my", type=_positive_int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--exhaustive-vertices", action="store_true")
    p.add_argument("--bundle-dir", help="where counterexample bundles are written")
    p.set_defaults(func=_cmd_openq)

    p = sub.add_parser("prbox", help="emit the PR box and its OUT model")
    p.add_argument("--out", help="behaviour file to write")
    p.add_argument("--model-out", help="OUT model file to write")
    p.add_argument("--check", action="store_true", help="print the membership certificates")
    p.set_defaults(func=_cmd_prbox)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (LhvOutError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""``postsel`` command-line front end.

Every command prints one JSON document. Exit codes: 0 success, 2 invalid input
(bad flags, malformed JSON, violated invariant), 3 undefined result.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__, _backend
from . import serialize as ser
from .maximize import max_acceptance
from .construction import construct, extremal_subspaces, is_error_minimizing_equal, is_error_minimizing_unequal, max_c
from .errors import PostselError, UndefinedError, ValidationError
from .linalg import eig, relative_operator
from .metrics import classify, min_postselected_error, postselected_error, acceptance
from .oracle import LEMMAS, OracleConfig, check_lemma, oracle_max_acceptance, oracle_min_error
from .simulate import simulate
from .states import make_instance, validate_measurement

EXIT_OK, EXIT_INVALID, EXIT_UNDEFINED = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"usage: {message}")


def _read(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"{path}: cannot read ({exc.strerror})") from None
    return ser.loads(text, path)


def _overrides(args) -> dict:
    out = {}
    if args.tol_rank is not None:
        out["rank_tol"] = args.tol_rank
    if args.tol_cluster is not None:
        out["cluster_tol"] = args.tol_cluster
    return out


def _instance(args):
    if not args.inp:
        raise ValidationError("--in FILE is required")
    args.instance = ser.decode_instance(_read(args.inp), _overrides(args))
    return args.instance


def _measurement(args, inst):
    if not args.measurement:
        raise ValidationError("--measurement FILE is required")
    return ser.decode_measurement(_read(args.measurement), inst.tolerances, inst.dim)


def _membership(inst, m) -> dict:
    check = is_error_minimizing_equal if classify(inst).equal_support else is_error_minimizing_unequal
    res = check(inst, m, inst.tolerances.member_tol)
    return {"member": res.ok, "family": res.family, "violated": res.clause}


def _metrics(inst) -> dict:
    rep = min_postselected_error(inst)
    return {
        "e_s": rep.e_s,
        "case": rep.case.value,
        "xi": rep.xi,
        "p_star": list(rep.p_star) if rep.p_star else None,
        "r_max_rho_sigma": rep.r_max_rho_sigma,
        "r_max_sigma_rho": rep.r_max_sigma_rho,
    }


def _max_acc(inst) -> dict:
    res = max_acceptance(inst)

    def rep(r):
        if r is None:
            return None
        return {
            "a_rho": r.a_rho,
            "a_sigma": r.a_sigma,
            "c_r_star": r.c_r_star,
            "method": r.method.value,
            "measurement": ser.encode_measurement(r.achieving_measurement),
        }

    return {
        "case": res.case.value,
        "a_rho_max": res.a_rho_max,
        "a_sigma_max": res.a_sigma_max,
        "for_rho": rep(res.for_rho),
        "for_sigma": rep(res.for_sigma),
    }


# commands


def cmd_analyze(args) -> dict:
    inst = _instance(args)
    out = _metrics(inst)
    if classify(inst).equal_support:
        sub = extremal_subspaces(inst.rho, inst.sigma, inst.tolerances)
        out["rank_t_max"] = sub.t_max.rank
        out["rank_t_min"] = sub.t_min.rank
        out["relative_spectrum"] = eig(relative_operator(inst.rho, inst.sigma, inst.tolerances.rank_tol)).eigenvalues
    return out


def cmd_construct(args) -> dict:
    inst = _instance(args)
    if not args.params:
        raise ValidationError("--params FILE is required")
    params = ser.decode_params(_read(args.params), inst.dim)
    m = construct(inst, params)
    out = ser.encode_measurement(m)
    out["max_c"] = max_c(inst, params)
    return out


def cmd_check(args) -> dict:
    inst = _instance(args)
    m = _measurement(args, inst)
    a_r, a_s = acceptance(inst, m)
    e = postselected_error(inst, m)
    return {"e": e, "e_s": min_postselected_error(inst).e_s, "a_rho": a_r, "a_sigma": a_s, **_membership(inst, m)}


def cmd_max_acceptance(args) -> dict:
    return _max_acc(_instance(args))


def cmd_oracle(args) -> dict:
    inst = _instance(args)
    cfg = OracleConfig(trials=args.trials, seed=args.seed)
    rep = oracle_min_error(inst, cfg).to_dict()
    best_r, best_s = oracle_max_acceptance(inst, cfg)
    return {"min_error": rep, "max_acceptance_sampled": {"a_rho": best_r, "a_sigma": best_s}}


def cmd_simulate(args) -> dict:
    inst = _instance(args)
    m = _measurement(args, inst)
    if args.n < 1:
        raise ValidationError("--n must be >= 1")
    return {**simulate(inst, m, args.n, args.seed).to_dict(), "backend": _backend.BACKEND}


def cmd_verify_lemmas(args) -> dict:
    return {"lemmas": [check_lemma(name, args.dim, args.seed, args.trials).to_dict() for name in LEMMAS]}


def example_instances() -> dict:
    """Golden inputs: the three-level classical example and the qubit example."""
    out = {}
    for mu in (0.2, 0.5, 0.8):
        rho = np.diag([mu / 2, mu / 2, 1 - mu])
        sigma = np.diag([mu / 4, 3 * mu / 4, 1 - mu])
        out[f"example1_mu{mu}"] = make_instance(rho, sigma, 0.5)
    rho = np.array([[0.5, 0.25], [0.25, 0.5]])
    sigma = np.diag([0.75, 0.25])
    for p in (0.3, 0.4, 0.5, 0.6, 0.7):
        out[f"qubit_p{p}"] = make_instance(rho, sigma, p)
    return out


def cmd_examples(args) -> dict:
    out = {}
    for name, inst in example_instances().items():
        entry = {"instance": ser.encode_instance(inst), **_metrics(inst)}
        entry["max_acceptance"] = _max_acc(inst)
        if name.startswith("example1"):
            mu = float(name.split("mu")[1])
            m = validate_measurement(np.diag([1.0, 0.0, 0.0]), np.zeros((3, 3)))
            entry["optimal_measurement_error"] = postselected_error(inst, m)
            entry["optimal_measurement_acceptance"] = list(acceptance(inst, m))
            entry["mu"] = mu
        out[name] = entry
    return {"examples": out}


COMMANDS = {
    "analyze": cmd_analyze,
    "construct": cmd_construct,
    "check": cmd_check,
    "max-acceptance": cmd_max_acceptance,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "verify-lemmas": cmd_verify_lemmas,
    "examples": cmd_examples,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--in", dest="inp", metavar="FILE")
    common.add_argument("--measurement", metavar="FILE")
    common.add_argument("--params", metavar="FILE")
    common.add_argument("--out", metavar="FILE")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=2000)
    common.add_argument("--n", type=int, default=100_000)
    common.add_argument("--dim", type=int, default=3)
    common.add_argument("--tol-rank", type=float)
    common.add_argument("--tol-cluster", type=float)
    common.add_argument("--pretty", action="store_true")
    parser = _Parser(prog="postsel", description="Postselected two-state discrimination toolkit.")
    parser.add_argument("--version", action="version", version=f"postsel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _emit(payload: dict, args) -> None:
    text = ser.dumps(payload, args.pretty) + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValidationError(f"{args.out}: cannot write ({exc.strerror})") from None
    else:
        sys.stdout.write(text)


def _fail(code: int, kind: str, message: str) -> int:
    sys.stdout.write(ser.dumps({"error": kind, "message": message}) + "\n")
    sys.stderr.write(f"postsel: {kind}: {message}\n")
    return code


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as exc:
        return _fail(EXIT_INVALID, "UsageError", str(exc))
    try:
        payload = COMMANDS[args.command](args)
        inst = getattr(args, "instance", None)
        if inst is not None:
            payload["tolerances"] = inst.tolerances.to_dict()
        _emit(payload, args)
        return EXIT_OK
    except UndefinedError as exc:
        return _fail(EXIT_UNDEFINED, "Undefined", str(exc))
    except (ValidationError, PostselError) as exc:
        return _fail(EXIT_INVALID, type(exc).__name__, str(exc))
    except ValueError as exc:
        return _fail(EXIT_INVALID, "ValueError", str(exc))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

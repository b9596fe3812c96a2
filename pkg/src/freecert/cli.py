"""Command-line front end: certificates, extensions, completions,
falsification, GNS data, and Bell bounds over stable JSON formats.

Exit codes: 0 success, 2 mathematically negative answer (refutation,
falsification, failed verification), 1 input or usage errors. Every
randomized subcommand takes a seed and prints it back; reports are
byte-identical for identical inputs and seeds (wall time goes to stderr).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

import numpy as np

from . import selftest
from .algebra import element_from_json, element_to_json
from .bell import (
    BellFunctional,
    BellScenario,
    correlation_of,
    inner_bound,
    moment_instance,
    outer_bound,
)
from .certify import (
    NotCertified,
    TraceCertificate,
    certificate_from_json,
    certificate_to_json,
    certify_sos,
    certify_trace,
    falsify,
    verify_sos,
    verify_trace,
)
from .denselin import PartialBlockMatrix, complete_block, psd_floor
from .extendpt import PartialPositiveType, extend_to, partial_positive_type
from .gnsrep import gns
from .grounded import grounded_hull, grounded_set
from .sdpcore import instance_to_json
from .words import GroupSpec, format_word, parse_word

__all__ = ["main"]


class InputError(Exception):
    """Bad file contents or arguments; mapped to exit code 1."""


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from exc


def _digest(paths, extra=""):
    h = hashlib.sha256()
    for p in paths:
        try:
            with open(p, "rb") as fh:
                h.update(fh.read())
        except OSError as exc:
            raise InputError(f"{p}: {exc.strerror or exc}") from exc
    h.update(extra.encode())
    return h.hexdigest()


def _emit(report: dict, out_path: str | None):
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _parse_words(spec: GroupSpec, blob: str):
    try:
        return [parse_word(spec, tok.strip()) for tok in blob.split(",")
                if tok.strip()]
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _load_element(path):
    obj = _load_json(path)
    try:
        return element_from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _support_set(f, blob: str | None):
    if blob is None or blob == "auto":
        return grounded_hull(f.spec, f.terms.keys())
    words = _parse_words(f.spec, blob)
    try:
        return grounded_set(f.spec, set(words))
    except ValueError as exc:
        raise InputError(f"--support: {exc}") from exc


def _load_partial(path) -> PartialPositiveType:
    obj = _load_json(path)
    try:
        spec = GroupSpec.from_json(obj["group"])
        E = grounded_set(spec, {parse_word(spec, s) for s in obj["domain"]})
        values = {}
        for t in obj["values"]:
            values[parse_word(spec, t["word"])] = complex(
                float(t["re"]), float(t["im"]))
        return partial_positive_type(E, values)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _partial_to_json(g: PartialPositiveType) -> dict:
    values = [{"word": format_word(w), "re": v.real, "im": v.imag}
              for w, v in g.values.items()]
    values.sort(key=lambda t: t["word"])
    return {
        "group": g.spec.to_json(),
        "domain": [format_word(w) for w in g.E],
        "values": values,
    }


def _matrix_to_json(M):
    return [[[z.real, z.imag] for z in row] for row in np.atleast_2d(M)]


def _matrix_from_json(rows, what):
    try:
        M = np.array([[complex(e[0], e[1]) if isinstance(e, list) else complex(e)
                       for e in row] for row in rows], dtype=complex)
    except (TypeError, IndexError, ValueError) as exc:
        raise InputError(f"{what}: malformed matrix ({exc})") from exc
    if M.size == 0:
        return M.reshape((len(rows), 0) if rows else (0, 0))
    return M


def _load_functional(path):
    obj = _load_json(path)
    try:
        d, m = int(obj["d"]), int(obj["m"])
        coeff = np.asarray(obj["coeff"], dtype=float).reshape(d, d, m, m)
        return BellScenario(d, m), BellFunctional(coeff)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _cmd_certify(args, trace: bool):
    f = _load_element(args.input)
    E = _support_set(f, args.support)
    runner = certify_trace if trace else certify_sos
    try:
        result = runner(f, E, epsilon=args.epsilon, tol=args.tol)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if args.dump_sdp:
        _dump_sdp_for_certify(f, E, args, trace)
    report = {
        "command": "certify-trace" if trace else "certify",
        "inputs": _digest([args.input],
                          f"{args.support}|{args.epsilon}|{args.tol}"),
        "epsilon": args.epsilon,
        "tol": args.tol,
        "support": [format_word(w) for w in E],
    }
    if isinstance(result, NotCertified):
        report["certified"] = False
        report["solver"] = {
            "psd_residual": result.psd_residual,
            "affine_residual": result.affine_residual,
            "iterations": result.iterations,
            "message": result.message,
        }
        _emit(report, args.out)
        return 2
    report["certified"] = True
    report["residual"] = result.residual
    report["factors"] = len(result.factors)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(certificate_to_json(result), fh, indent=2,
                      sort_keys=True)
            fh.write("\n")
        report["certificate"] = args.out
        _emit(report, None)
    else:
        report["certificate"] = certificate_to_json(result)
        _emit(report, None)
    return 0


def _dump_sdp_for_certify(f, E, args, trace):
    from .certify import _gram_instance
    from .sdpcore import AffineConstraint, SdpInstance
    from .words import conjugacy_canonical, unit

    u = unit(E.spec)
    key_fn = conjugacy_canonical if trace else (lambda a: a)
    n, groups = _gram_instance(E, key_fn)
    if trace:
        sums = {}
        for w, c in f.terms.items():
            k = conjugacy_canonical(w)
            sums[k] = sums.get(k, 0j) + c
        sums[key_fn(u)] = sums.get(key_fn(u), 0j) + args.epsilon
        constraints = [AffineConstraint(tuple((i, j, 1.0) for i, j in pairs),
                                        sums.get(key, 0j))
                       for key, pairs in groups.items()]
    else:
        constraints = [AffineConstraint(
            tuple((i, j, 1.0) for i, j in pairs),
            f.coeff(key) + (args.epsilon if key == u else 0.0))
            for key, pairs in groups.items()]
    with open(args.dump_sdp, "w", encoding="utf-8") as fh:
        json.dump(instance_to_json(SdpInstance(n, constraints)), fh,
                  indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_verify(args):
    cert_obj = _load_json(args.cert)
    try:
        cert = certificate_from_json(cert_obj)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{args.cert}: {exc}") from exc
    f = _load_element(args.input)
    if isinstance(cert, TraceCertificate):
        residuals = verify_trace(cert, f)
        residual = max((abs(v) for v in residuals.values()), default=0.0)
        detail = {format_word(w): [v.real, v.imag]
                  for w, v in residuals.items()}
        report = {"command": "verify", "kind": "trace", "residual": residual,
                  "class_residuals": detail}
    else:
        residual = verify_sos(cert, f)
        report = {"command": "verify", "kind": "sos", "residual": residual}
    report["inputs"] = _digest([args.cert, args.input], str(args.tol))
    report["tol"] = args.tol
    report["ok"] = residual <= args.tol
    _emit(report, args.out)
    return 0 if residual <= args.tol else 2


def _cmd_extend(args):
    g = _load_partial(args.input)
    targets = _parse_words(g.spec, args.target)
    try:
        F = grounded_set(g.spec, g.E.as_set() | set(targets))
        out = extend_to(g, F)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = _partial_to_json(out)
    _emit(report, args.out)
    return 0


def _cmd_complete(args):
    obj = _load_json(args.blocks)
    try:
        P = PartialBlockMatrix(
            _matrix_from_json(obj["A"], "A"), _matrix_from_json(obj["X"], "X"),
            _matrix_from_json(obj["B"], "B"), _matrix_from_json(obj["Y"], "Y"),
            _matrix_from_json(obj["C"], "C"))
    except (KeyError, ValueError) as exc:
        raise InputError(f"{args.blocks}: {exc}") from exc
    try:
        Z, full = complete_block(P)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = {
        "command": "complete",
        "inputs": _digest([args.blocks]),
        "Z": _matrix_to_json(Z),
        "full": _matrix_to_json(full),
        "psd_floor": psd_floor(full),
    }
    _emit(report, args.out)
    return 0


def _cmd_falsify(args):
    f = _load_element(args.input)
    dims = [int(tok) for tok in args.dims.split(",") if tok.strip()]
    try:
        report = falsify(f, args.mode, dims, args.samples, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    falsified = report.worst < -10.0 * args.tol
    out = {
        "command": "falsify",
        "inputs": _digest([args.input],
                          f"{args.mode}|{args.dims}|{args.samples}|{args.seed}"),
        "mode": report.mode,
        "samples": report.samples,
        "dims": dims,
        "seed": args.seed,
        "worst": report.worst,
        "falsified": falsified,
        "witness_dim": report.witness.dim,
    }
    _emit(out, args.out)
    return 2 if falsified else 0


def _cmd_gns(args):
    g = _load_partial(args.input)
    try:
        data = gns(g)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    gens = {}
    for (i, sign), (L, mask) in sorted(data.gens.items()):
        gens[f"g{i}^{sign:+d}"] = {
            "matrix": _matrix_to_json(L),
            "mask": [bool(b) for b in mask],
        }
    report = {
        "command": "gns",
        "inputs": _digest([args.input]),
        "support": [format_word(w) for w in data.E],
        "rank": data.rank,
        "gram": _matrix_to_json(data.gram),
        "basis": _matrix_to_json(data.basis),
        "coords": _matrix_to_json(data.coords),
        "generators": gens,
    }
    _emit(report, args.out)
    return 0


def _cmd_bell_outer(args):
    scenario, functional = _load_functional(args.scenario)
    if args.dump_sdp:
        inst, _ = moment_instance(scenario, functional, args.level)
        with open(args.dump_sdp, "w", encoding="utf-8") as fh:
            json.dump(instance_to_json(inst), fh, indent=2, sort_keys=True)
            fh.write("\n")
    try:
        value, info = outer_bound(scenario, functional, args.level,
                                  tol=args.tol, return_info=True)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = {
        "command": "bell-outer",
        "inputs": _digest([args.scenario], f"{args.level}|{args.tol}"),
        "level": str(args.level),
        "tol": args.tol,
        "value": value,
        "solver": info,
    }
    _emit(report, args.out)
    return 0


def _cmd_bell_inner(args):
    scenario, functional = _load_functional(args.scenario)
    value, A, B, xi = inner_bound(scenario, functional, dim=args.dim,
                                  iters=args.iters, seed=args.seed,
                                  restarts=args.restarts)
    corr = correlation_of(A, B, xi)
    pvm_residual = max(
        float(np.max(np.abs(P @ P - P)))
        for fam in (A, B) for pvm in fam.settings for P in pvm)
    report = {
        "command": "bell-inner",
        "inputs": _digest([args.scenario],
                          f"{args.dim}|{args.restarts}|{args.seed}|{args.iters}"),
        "dim": args.dim,
        "restarts": args.restarts,
        "iters": args.iters,
        "seed": args.seed,
        "value": value,
        "pvm_residual": pvm_residual,
        "state_norm_error": abs(float(np.linalg.norm(xi)) - 1.0),
        "correlation": corr.data.tolist(),
        "alice": [[_matrix_to_json(P) for P in pvm] for pvm in A.settings],
        "bob": [[_matrix_to_json(Q) for Q in pvm] for pvm in B.settings],
        "state": [[z.real, z.imag] for z in np.asarray(xi).reshape(-1)],
    }
    _emit(report, args.out)
    return 0


def _cmd_selftest(args):
    ok = selftest.run_all(write=print)
    return 0 if ok else 2


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="freecert",
        description=("Positivity certificates in free group algebras and "
                     "bounds on quantum correlation sets"))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="sum-of-hermitian-squares certificate")
    p.add_argument("--input", required=True, help="element JSON file")
    p.add_argument("--support", default="auto",
                   help="comma-separated grounded support words, or 'auto'")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", help="certificate output path")
    p.add_argument("--dump-sdp", help="write the Gram SDP instance JSON")
    p.set_defaults(fn=lambda a: _cmd_certify(a, trace=False))

    p = sub.add_parser("certify-trace", help="tracial certificate")
    p.add_argument("--input", required=True)
    p.add_argument("--support", default="auto")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.add_argument("--dump-sdp")
    p.set_defaults(fn=lambda a: _cmd_certify(a, trace=True))

    p = sub.add_parser("verify", help="re-verify a certificate symbolically")
    p.add_argument("--cert", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("extend", help="positive-type extension on the tree")
    p.add_argument("--input", required=True,
                   help="partial function JSON with a 'domain' array")
    p.add_argument("--target", required=True,
                   help="comma-separated words to adjoin to the domain")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_extend)

    p = sub.add_parser("complete", help="three-block positive completion")
    p.add_argument("--blocks", required=True,
                   help="JSON file with blocks A, X, B, Y, C")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_complete)

    p = sub.add_parser("falsify", help="random-representation falsifier")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=("operator", "trace"), default="operator")
    p.add_argument("--dims", default="1,2,4")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_falsify)

    p = sub.add_parser("gns", help="truncated GNS data of a positive-type "
                                   "function")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_gns)

    p = sub.add_parser("bell-outer", help="moment hierarchy upper bound")
    p.add_argument("--scenario", required=True,
                   help="functional JSON: {d, m, coeff}")
    p.add_argument("--level", default="1ab")
    p.add_argument("--tol", type=float, default=2e-7)
    p.add_argument("--out")
    p.add_argument("--dump-sdp")
    p.set_defaults(fn=_cmd_bell_outer)

    p = sub.add_parser("bell-inner", help="see-saw lower bound")
    p.add_argument("--scenario", required=True)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_bell_inner)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.set_defaults(fn=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        code = args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wall time: {time.perf_counter() - start:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

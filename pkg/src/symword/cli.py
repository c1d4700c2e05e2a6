"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .explorer import classify_word, trace_search
from .genword import GenWordError, is_completely_invertible, parse_genword, solve_genword
from .matcore import MatrixError, PDMatrix, geometric_mean
from .pdm import PDMFormatError, read_pdm, write_pdm
from .reducer import Equation, EquationError, reduce_fully, reduce_word
from .solver import SolveOptions, SolveReport, solve
from .wordlang import WordSyntaxError, detect_power, evaluate, format_word, parse_word, shape

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2
_DEFAULTS = SolveOptions()


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def matrix_to_json(m):
    a = np.asarray(m)
    if np.iscomplexobj(a) and np.any(a.imag):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return np.real(a).tolist()


def report_to_json(r: SolveReport) -> dict:
    return {
        "solution": None if r.solution is None else matrix_to_json(r.solution.array),
        "relative_residual": r.relative_residual,
        "iterations": r.iterations,
        "residual_history": list(r.residual_history),
        "trail": r.trail.to_list(),
        "starts_used": r.starts_used,
        "dispersion": r.dispersion,
        "method": r.method,
        "converged": r.converged,
        **({"notes": r.notes} if r.notes else {}),
    }


def _load(path: Optional[str], flag: str, hermitian: bool = True, pd: bool = True):
    if path is None:
        raise InputError(f"{flag} is required")
    try:
        m = read_pdm(path, hermitian=hermitian)
    except FileNotFoundError:
        raise InputError(f"{flag}: file not found: {path}") from None
    except PDMFormatError as exc:
        raise InputError(f"{flag}: {exc}") from None
    if pd:
        try:
            return PDMatrix(m)
        except MatrixError as exc:
            raise InputError(f"{flag}: {path}: {exc}") from None
    return m


def _word(text: Optional[str]):
    if text is None:
        raise InputError("--word is required")
    try:
        return parse_word(text)
    except WordSyntaxError as exc:
        raise InputError(f"--word: {exc}") from None


def _options(args) -> SolveOptions:
    try:
        return SolveOptions(tol=args.tol, max_iters=args.max_iters, starts=args.starts, seed=args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _emit(args, payload: dict, text: str) -> None:
    if args.output == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _fmt_matrix(m) -> str:
    return np.array2string(np.asarray(m), precision=8, suppress_small=True, max_line_width=120)


def _report_text(r: SolveReport) -> str:
    lines = [
        f"method: {r.method}",
        f"converged: {r.converged}",
        f"relative residual: {r.relative_residual:.3e}",
        f"iterations: {r.iterations} (starts used: {r.starts_used})",
    ]
    if len(r.trail):
        lines.append("trail: " + ", ".join(json.dumps(s, sort_keys=True) for s in r.trail.to_list()))
    if r.solution is not None:
        lines += ["solution:", _fmt_matrix(r.solution.array)]
    return "\n".join(lines)


def _write_out(args, matrix, comment: str) -> None:
    if args.out:
        write_pdm(args.out, matrix, comment)


def cmd_solve(args) -> int:
    w = _word(args.word)
    b = _load(args.B, "--B")
    p = _load(args.P, "--P")
    try:
        eq = Equation(w, b, p)
    except (EquationError, MatrixError) as exc:
        raise InputError(str(exc)) from None
    r = solve(eq, _options(args))
    _emit(args, report_to_json(r), _report_text(r))
    if r.solution is not None and r.converged:
        _write_out(args, r.solution.array, f"solution of {format_word(w)} = P")
    return EXIT_OK if r.converged else EXIT_FAIL


def cmd_eval(args) -> int:
    w = _word(args.word)
    a = _load(args.A, "--A")
    b = _load(args.B, "--B")
    try:
        v = evaluate(w, a, b)
    except MatrixError as exc:
        raise InputError(str(exc)) from None
    arr = np.asarray(v)
    sym = isinstance(v, PDMatrix)
    _emit(args, {"word": format_word(w), "symmetric": sym, "value": matrix_to_json(arr)}, _fmt_matrix(arr))
    if args.out:
        if not sym:
            raise InputError("--out needs a symmetric word (PDM files hold Hermitian matrices)")
        _write_out(args, arr, f"value of {format_word(w)}")
    return EXIT_OK


def cmd_check(args) -> int:
    w = _word(args.word)
    sh = shape(w)
    base, k = detect_power(w)
    payload = {
        "word": format_word(w),
        "symmetric": sh.symmetric,
        "a_positive": sh.a_positive,
        "class": sh.class_number,
        "s_a": str(sh.s_a),
        "s_b_pos": str(sh.s_b_pos),
        "s_b_neg": str(sh.s_b_neg),
        "power": {"base": format_word(base), "k": k},
    }
    text = "\n".join(f"{key}: {val}" for key, val in payload.items())
    _emit(args, payload, text)
    return EXIT_OK


def cmd_reduce(args) -> int:
    w = _word(args.word)
    try:
        if args.B or args.P:
            eq, trail = reduce_fully(Equation(w, _load(args.B, "--B"), _load(args.P, "--P")))
            reduced = eq.word
            _write_out(args, eq.P.array, f"reduced right-hand side for {format_word(reduced)}")
        else:
            reduced, trail = reduce_word(w)
    except (EquationError, MatrixError) as exc:
        raise InputError(str(exc)) from None
    payload = {"word": format_word(w), "reduced": format_word(reduced), "trail": trail.to_list()}
    _emit(args, payload, f"{format_word(w)}  ->  {format_word(reduced)}\ntrail: {trail.to_list()}")
    return EXIT_OK


def cmd_geomean(args) -> int:
    c = _load(args.C, "--C")
    d = _load(args.D, "--D")
    try:
        g = geometric_mean(c, d)
    except MatrixError as exc:
        raise InputError(str(exc)) from None
    _emit(args, {"geometric_mean": matrix_to_json(g.array)}, _fmt_matrix(g.array))
    _write_out(args, g.array, "geometric mean C # D")
    return EXIT_OK


def cmd_fov(args) -> int:
    c = _load(args.C, "--C", hermitian=False, pd=False)
    cert = is_completely_invertible(c)
    text = (
        f"0 in F(C): {cert.contains_zero}\nmargin: {cert.margin:.6e}\n"
        f"theta*: {cert.theta_star:.12f}\ngrid points: {cert.grid_points}"
    )
    _emit(args, cert.to_dict(), text)
    return EXIT_OK


def cmd_trace_search(args) -> int:
    w = _word(args.word)
    try:
        cls = classify_word(w)
        rep = trace_search(w, n=args.n, trials=args.trials, seed=args.seed, cond_range=(args.cond_min, args.cond_max))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    payload = rep.to_dict()
    payload["class"] = cls.to_dict()
    text = (
        f"word: {format_word(w)} ({cls.tag})\ntrials: {rep.trials}, n = {rep.dimension}\n"
        f"min trace: {rep.min_trace:.6e} (negative in {rep.negative_count} trials)"
    )
    _emit(args, payload, text)
    if args.dump_witness:
        out = Path(args.dump_witness)
        out.mkdir(parents=True, exist_ok=True)
        write_pdm(out / "A.pdm", rep.witness[0], f"trace witness A for {format_word(w)}")
        write_pdm(out / "B.pdm", rep.witness[1], f"trace witness B for {format_word(w)}")
    return EXIT_OK


def cmd_gen_solve(args) -> int:
    if args.word is None:
        raise InputError("--word is required")
    try:
        w = parse_genword(args.word)
    except GenWordError as exc:
        raise InputError(f"--word: {exc}") from None
    coeffs = [_load(path, f"--C #{i + 1}", hermitian=False, pd=False) for i, path in enumerate(args.C or [])]
    p = _load(args.P, "--P")
    try:
        r = solve_genword(w, coeffs, p, _options(args))
    except (GenWordError, MatrixError) as exc:
        raise InputError(str(exc)) from None
    _emit(args, report_to_json(r), _report_text(r))
    if r.solution is not None and r.converged:
        _write_out(args, r.solution.array, f"solution of {args.word} = P")
    return EXIT_OK if r.converged else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", choices=("text", "json"), default="text")
    common.add_argument("--tol", type=float, default=_DEFAULTS.tol)
    common.add_argument("--max-iters", type=int, default=_DEFAULTS.max_iters)
    common.add_argument("--starts", type=int, default=_DEFAULTS.starts)
    common.add_argument("--seed", type=int, default=_DEFAULTS.seed)
    common.add_argument("--out", help="write the resulting matrix here (PDM v1)")

    parser = _Parser(prog="symword", description="Symmetric word equations in PD matrices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="solve S(A,B) = P for PD A")
    p.add_argument("--word")
    p.add_argument("--B")
    p.add_argument("--P")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", parents=[common], help="evaluate a word at PD A, B")
    p.add_argument("--word")
    p.add_argument("--A")
    p.add_argument("--B")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", parents=[common], help="structural properties of a word")
    p.add_argument("--word")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", parents=[common], help="reduce an equation to a simpler equivalent one")
    p.add_argument("--word")
    p.add_argument("--B")
    p.add_argument("--P")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("geomean", parents=[common], help="geometric mean C # D")
    p.add_argument("--C")
    p.add_argument("--D")
    p.set_defaults(func=cmd_geomean)

    p = sub.add_parser("fov", parents=[common], help="test whether 0 lies in the field of values of C")
    p.add_argument("--C")
    p.set_defaults(func=cmd_fov)

    p = sub.add_parser("trace-search", parents=[common], help="random search for negative word traces")
    p.add_argument("--word")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--cond-min", type=float, default=1.0)
    p.add_argument("--cond-max", type=float, default=1e3)
    p.add_argument("--dump-witness", metavar="DIR")
    p.set_defaults(func=cmd_trace_search)

    p = sub.add_parser("gen-solve", parents=[common], help="solve a generalized symmetric word equation")
    p.add_argument("--word")
    p.add_argument("--C", action="append", help="coefficient C_i (repeat in order C1, C2, ...)")
    p.add_argument("--P")
    p.set_defaults(func=cmd_gen_solve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

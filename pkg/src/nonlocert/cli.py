"""Command-line entry point.

Usage:
    nonlocert generate eq3 --N 4 --out eq3.json
    nonlocert certify eq3.json --json report.json
    nonlocert certify --family lemma1 --hint 0,1,2,3
    nonlocert inspect eq3.json --bipartition "0,1|2,3"

Exit codes: 0 certified, 1 not certified, 2 input error, 3 precondition
violation (e.g. a non-orthogonal set).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .certifier import certify, check_orthonormal, find_mes_witness
from .constructions import FAMILIES, build_family
from .errors import NonlocError, ParameterError, PreconditionError, ShapeError
from .opm import find_eliminator, opm_solution_space
from .partition import effective_frame
from .serialize import DocumentError, dumps_lines, dumps_report, load_stateset, stateset_to_document
from .tensor import Bipartition, regroup, schmidt
from .tolerances import ENV_VAR, Tolerances

EXIT_CERTIFIED, EXIT_NOT_CERTIFIED, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _family_params(args) -> dict:
    return {"N": args.N, "d": args.d, "k": args.k}


def _load(args):
    if getattr(args, "input", None):
        if args.family:
            raise ParameterError("give either an input document or --family, not both")
        return load_stateset(args.input)
    if not args.family:
        raise ParameterError("need an input document or --family")
    return build_family(args.family, **_family_params(args))


def _parse_hint(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ParameterError(f"cannot parse hint {text!r}; expected comma-separated state indices") from None


def _tolerances() -> Tolerances:
    try:
        return Tolerances.from_env()
    except ValueError as exc:
        raise ParameterError(f"{ENV_VAR}: {exc}") from None


def cmd_generate(args) -> int:
    states = build_family(args.family, **_family_params(args))
    text = dumps_lines(stateset_to_document(states))
    dims = "x".join(map(str, states.dims))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"{states.label}: {len(states)} states, dims {dims} -> {args.out}")
    else:
        sys.stdout.write(text)
        print(f"{states.label}: {len(states)} states, dims {dims}", file=sys.stderr)
    return 0


def _summary_line(entry) -> str:
    bip = str(entry.bipartition)
    if entry.witness is not None:
        w = entry.witness
        what = f"witness {list(w.member_indices)} r={w.effective_dim}" + (" (hint)" if entry.hinted else "")
    else:
        what = (
            f"no witness; frame {entry.diagnostics.frame_dims[0]}x{entry.diagnostics.frame_dims[1]}, "
            f"state ranks {sorted(set(entry.diagnostics.state_ranks))}"
        )
    opm = ""
    if entry.opm:
        parts = []
        for side, rep in entry.opm.items():
            p = f"{side}:{rep.space_dim}"
            if rep.eliminator is not None:
                p += f" elim{list(rep.eliminator.eliminated)}"
            parts.append(p)
        opm = "  opm " + " ".join(parts)
    return f"  {bip:<14} {entry.verdict:<12} {what}{opm}"


def cmd_certify(args) -> int:
    tol = _tolerances()
    states = _load(args)
    hints = [_parse_hint(h) for h in args.hint or ()]
    report = certify(states, hints=hints, skip_opm=args.skip_opm, tol=tol, workers=args.workers)
    params = ", ".join(f"{k}={v}" for k, v in report.params.items())
    print(f"set {report.label} ({params}): {report.n_states} states, dims {'x'.join(map(str, report.dims))}")
    for entry in report.entries:
        print(_summary_line(entry))
    n_ok = sum(e.verdict == "CERTIFIED" for e in report.entries)
    print(f"overall: {report.overall} ({n_ok}/{len(report.entries)} bipartitions certified)")
    print(report.premise)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(dumps_report(report))
    return EXIT_CERTIFIED if report.certified else EXIT_NOT_CERTIFIED


def cmd_inspect(args) -> int:
    tol = _tolerances()
    states = _load(args)
    try:
        bip = Bipartition.parse(args.bipartition, states.n_parties)
    except ShapeError as exc:
        raise ParameterError(str(exc)) from None
    print(f"set {states.label}: {len(states)} states, cut {bip}")
    for i, s in enumerate(states):
        sd = schmidt(regroup(s, bip), tol)
        vals = ", ".join(_fmt(v) for v in sd.singular_values[: max(sd.rank, 1)])
        print(f"  [{i}] {s.label:<16} rank {sd.rank}  schmidt ({vals})")
    full = effective_frame(states.states, bip, tol)
    print(f"frame of full set: {full.dim_a} x {full.dim_b}")
    if args.hint:
        for text in args.hint:
            hint = _parse_hint(text)
            ok = find_mes_witness(states, bip, hint, tol) is not None
            frame = effective_frame([states[i] for i in hint], bip, tol)
            print(f"frame of hint {list(hint)}: {frame.dim_a} x {frame.dim_b}  witness {'valid' if ok else 'invalid'}")
    w = find_mes_witness(states, bip, tol=tol)
    if w is None:
        print("search: no witness")
    else:
        print(f"search: witness {list(w.member_indices)} r={w.effective_dim}")
    if not args.skip_opm:
        check_orthonormal(states, tol)
        for side in ("A", "B"):
            rep = opm_solution_space(states, bip, side, tol)
            elim = find_eliminator(states, bip, side, rep, tol)
            extra = f", eliminator kills {list(elim.eliminated)}" if elim else ""
            print(f"opm side {side}: D={rep.grouped_dim} space_dim={rep.space_dim}{extra}")
    return 0


def _add_source(p):
    p.add_argument("input", nargs="?", help="state-set document (JSON)")
    p.add_argument("--family", choices=sorted(FAMILIES), help="build a named family instead of reading a document")
    _add_params(p)


def _add_params(p):
    p.add_argument("--N", type=int, help="number of qubits (eq3)")
    p.add_argument("--d", type=int, help="local dimension (thm3, thm4)")
    p.add_argument("--k", type=int, help="number of parties (thm4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocert", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a state-set document for a named family")
    g.add_argument("family", choices=sorted(FAMILIES))
    _add_params(g)
    g.add_argument("--out", "-o", help="output path (default: standard output)")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("certify", help="certify every bipartition of a state set")
    _add_source(c)
    c.add_argument("--hint", action="append", metavar="i,j,k",
                   help="0-based state indices to try as a witness first (repeatable)")
    c.add_argument("--json", metavar="PATH", help="write the full report document here")
    c.add_argument("--skip-opm", action="store_true", help="skip orthogonality-preserving measurement analysis")
    c.add_argument("--workers", type=int, default=None, help="evaluate bipartitions on this many threads")
    c.set_defaults(func=cmd_certify)

    i = sub.add_parser("inspect", help="per-state and frame data for one bipartition")
    _add_source(i)
    i.add_argument("--bipartition", required=True, metavar="SPEC", help='e.g. "0,1|2"')
    i.add_argument("--hint", action="append", metavar="i,j,k")
    i.add_argument("--skip-opm", action="store_true")
    i.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"error: malformed document at {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NonlocError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

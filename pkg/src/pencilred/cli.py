"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .commutativity import commute_check
from .defects import defect_profile
from .errors import InputError, PencilError
from .io import (
    canonical_dumps,
    input_digest,
    load_pencil,
    pencil_to_dict,
    read_json,
    save_pencil,
    save_report,
)
from .pencil import format_blocks, parse_blocks, synthesize
from .reduction import (
    OBS,
    PencilScale,
    is_control_irreducible,
    is_observation_irreducible,
    normalize_kind,
    reduce,
)
from .report import AnalysisReport, analyze, text_summary, tolerance_dict
from .saddle import SaddleSpec, inf_sup_constant, saddle_reduction_ladder, solve_saddle
from .spectrum import core_spectrum, reduce_to_ode, resolvent_member
from .subspace import Tolerance

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3


def _add_input(sp):
    sp.add_argument("--json", dest="json_path", help="pencil JSON file")
    sp.add_argument("--E", dest="E_path", help="Matrix Market file for E")
    sp.add_argument("--A", dest="A_path", help="Matrix Market file for A")


def _add_common(sp):
    sp.add_argument("--tol", type=float, default=1e-10, help="relative rank tolerance")
    sp.add_argument("--out", help="write the JSON report here")


def _tol(args) -> Tolerance:
    return Tolerance(rel=args.tol)


def _pencil(args):
    return load_pencil(args.json_path, args.E_path, args.A_path)


def _emit(rep: AnalysisReport, args, summary: str | None = None):
    if args.out:
        save_report(rep, args.out)
    fmt = getattr(args, "format", "text")
    if fmt == "json" and not args.out:
        sys.stdout.write(canonical_dumps(rep) + "\n")
    else:
        sys.stdout.write((summary if summary is not None else text_summary(rep)) + "\n")


def _base_report(p, tol) -> AnalysisReport:
    return AnalysisReport(input_digest=input_digest(p), shape=list(p.shape), tolerance=tolerance_dict(tol))


def _analyze_file(path: str, tol_rel: float, max_steps, out_dir: str) -> str:
    p = load_pencil(json_path=path)
    rep = analyze(p, Tolerance(rel=tol_rel), max_steps)
    target = Path(out_dir) / (Path(path).stem + ".report.json")
    save_report(rep, target)
    return str(target)


def cmd_analyze(args) -> int:
    tol = _tol(args)
    if args.batch:
        if not args.out:
            raise InputError("--batch needs --out DIR")
        Path(args.out).mkdir(parents=True, exist_ok=True)
        files = sorted(str(f) for f in Path(args.batch).glob("*.json"))
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            futs = [ex.submit(_analyze_file, f, tol.rel, args.max_steps, args.out) for f in files]
            for f in futs:
                sys.stdout.write(f.result() + "\n")
        return EXIT_OK
    p = _pencil(args)
    rep = analyze(p, tol, args.max_steps)
    _emit(rep, args)
    return EXIT_OK


def cmd_reduce(args) -> int:
    tol = _tol(args)
    p = _pencil(args)
    kind = normalize_kind(args.kind)
    if args.steps < 0:
        raise InputError("--steps must be nonnegative")
    sc = PencilScale.of(p)
    irreducible = is_observation_irreducible if kind == OBS else is_control_irreducible
    current = p
    dom = np.eye(p.n, dtype=p.E.dtype)
    codom = np.eye(p.m, dtype=p.E.dtype)
    steps = []
    for _ in range(args.steps):
        if irreducible(current, tol, sc):
            sys.stderr.write("warning: irreducible\n")
            break
        st = reduce(current, kind, tol, sc)
        steps.append(st.summary())
        dom, codom = dom @ st.dom_map, codom @ st.codom_map
        current = st.reduced
    rep = _base_report(p, tol)
    rep.reduce = {"kind": kind, "steps": steps, "dom_map": dom, "codom_map": codom,
                  "reduced_shape": list(current.shape)}
    if args.pencil_out:
        save_pencil(current, args.pencil_out)
    _emit(rep, args, f"{kind} x{len(steps)}: {p.shape} -> {current.shape}")
    return EXIT_OK


def cmd_commute(args) -> int:
    tol = _tol(args)
    p = _pencil(args)
    cert = commute_check(p, tol)
    rep = _base_report(p, tol)
    rep.commutativity = cert.to_dict()
    _emit(rep, args, f"equivalent={cert.equivalent} pivot_equivalences={cert.pivot_equivalences_hold}")
    return EXIT_OK


def _parse_lambdas(text: str) -> list[complex]:
    try:
        return [complex(t.strip().replace("i", "j")) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse lambda list {text!r}") from None


def _parse_grid(text: str) -> list[complex]:
    try:
        re0, re1, im0, im1, k = text.split(",")
        k = int(k)
        xs = np.linspace(float(re0), float(re1), k)
        ys = np.linspace(float(im0), float(im1), k)
    except ValueError:
        raise InputError("--grid expects re0,re1,im0,im1,count") from None
    return [complex(x, y) for y in ys for x in xs]


def cmd_spectrum(args) -> int:
    tol = _tol(args)
    p = _pencil(args)
    lams = []
    if args.lambdas:
        lams += _parse_lambdas(args.lambdas)
    if args.grid:
        lams += _parse_grid(args.grid)
    rep = _base_report(p, tol)
    sc = PencilScale.of(p)
    samples = [resolvent_member(p, lam, tol, sc) for lam in lams]
    rep.resolvent_samples = [s.to_dict() for s in samples]
    if defect_profile(p, tol).regular:
        rep.core_spectrum = [complex(z) for z in core_spectrum(p, tol)]
        rep.ode_extract = reduce_to_ode(p, tol).to_dict()
    else:
        rep.warnings.append("pencil is not regular; no core spectrum")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("re,im,sigma_min,member\n")
            for s in samples:
                fh.write(f"{s.lam.real!r},{s.lam.imag!r},{s.sigma_min!r},{int(s.member)}\n")
    members = sum(s.member for s in samples)
    _emit(rep, args, f"{members}/{len(samples)} samples in the resolvent set")
    return EXIT_OK


def cmd_saddle(args) -> int:
    tol = _tol(args)
    spec = SaddleSpec.load(args.spec)
    rep = AnalysisReport(tolerance=tolerance_dict(tol))
    section = {}
    lines = []
    if args.infsup or not (args.solve or args.ladder):
        r = inf_sup_constant(spec, tol)
        section["infsup"] = r.to_dict()
        lines.append(f"beta={r.beta!r} satisfied={r.satisfied}")
    if args.ladder:
        section["ladder"] = saddle_reduction_ladder(spec, tol).to_dict()
    if args.solve:
        f = np.asarray(read_json(args.solve), dtype=float)
        sol = solve_saddle(spec, f, tol)
        section["solve"] = sol.to_dict()
        lines.append(f"invertible={sol.verdict['invertible']}")
    rep.saddle = section
    _emit(rep, args, " ".join(lines))
    return EXIT_OK


def cmd_synth(args) -> int:
    blocks = parse_blocks(args.blocks)
    p = synthesize(blocks, scramble=args.scramble, seed=args.seed)
    extra = {"blocks": format_blocks(blocks), "seed": args.seed, "scramble": args.scramble}
    if args.out:
        save_pencil(p, args.out, extra)
    else:
        d = pencil_to_dict(p)
        d.update(extra)
        sys.stdout.write(canonical_dumps(d) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pencilred", description="Reduction analysis of matrix pencils (E, A).")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", help="full analysis report")
    _add_input(sp)
    _add_common(sp)
    sp.add_argument("--max-steps", type=int, default=None)
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.add_argument("--batch", help="analyze every *.json in this directory")
    sp.add_argument("--jobs", type=int, default=None, help="worker processes for --batch")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("reduce", help="apply reductions of one kind")
    _add_input(sp)
    _add_common(sp)
    sp.add_argument("--kind", required=True, choices=("obs", "ctrl", "observation", "control"))
    sp.add_argument("--steps", type=int, default=1)
    sp.add_argument("--pencil-out", help="write the reduced pencil (.json or Matrix Market stem)")
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("commute", help="identify the two mixed reductions")
    _add_input(sp)
    _add_common(sp)
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.set_defaults(func=cmd_commute)

    sp = sub.add_parser("spectrum", help="resolvent samples and core spectrum")
    _add_input(sp)
    _add_common(sp)
    sp.add_argument("--lambdas", help="comma separated complex values, e.g. 0,1+2j")
    sp.add_argument("--grid", help="re0,re1,im0,im1,count")
    sp.add_argument("--csv", help="write resolvent samples as CSV")
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("saddle", help="saddle-point analysis")
    sp.add_argument("--spec", required=True, help="SaddleSpec JSON")
    sp.add_argument("--infsup", action="store_true")
    sp.add_argument("--ladder", action="store_true")
    sp.add_argument("--solve", help="JSON list with the right-hand side")
    _add_common(sp)
    sp.add_argument("--format", choices=("json", "text"), default="text")
    sp.set_defaults(func=cmd_saddle)

    sp = sub.add_parser("synth", help="pencil from Kronecker blocks")
    sp.add_argument("--blocks", required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--scramble", action="store_true")
    sp.add_argument("--out", help="pencil JSON path (stdout if omitted)")
    sp.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, OSError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except PencilError as exc:
        sys.stderr.write(f"internal inconsistency: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

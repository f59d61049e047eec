"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 property
violation.  ``simulate`` additionally reports its outcome: 0 when the run
settles on an equilibrium, 10 for a limit cycle, 11 when inconclusive.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ChlorostatError, InvalidParameterError
from .io import csv_text, emit, header, json_text
from .presets import PRESET_NAMES, SWEEP_RANGES, format_params, load_params

EXIT_CYCLE = 10
EXIT_INCONCLUSIVE = 11


def _floats(text, n=None, name="value"):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise InvalidParameterError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise InvalidParameterError(f"{name}: expected {n} numbers")
    if not all(np.isfinite(vals)):
        raise InvalidParameterError(f"{name}: values must be finite")
    return vals


def _fmt(args, default):
    if args.format:
        return args.format
    if args.out and Path(args.out).suffix.lstrip(".") in ("csv", "json", "svg"):
        return Path(args.out).suffix.lstrip(".")
    return default


def cmd_equilibria(args, p, out):
    from .equilibria import enumerate_equilibria
    from .stability import classify

    k = None
    rows, records = [], []
    for e in enumerate_equilibria(p, k):
        r = classify(p, k, e, args.tol_hyperbolic)
        lifted = e.lifted
        row = [e.name, *e.x, *lifted[3:], r.n_pos, r.n_neg, r.label]
        if args.eigenvalues:
            for ev in r.eigenvalues:
                row += [float(np.real(ev)), float(np.imag(ev))]
        rows.append(row)
        records.append({"pattern": e.name, "x": e.x, "s": lifted[3:], "n_pos": r.n_pos,
                        "n_neg": r.n_neg, "label": r.label, "classification": r.classification,
                        "eigenvalues": list(r.eigenvalues), "provenance": e.provenance})
    head = header(p, args.seed)
    fmt = _fmt(args, "csv")
    if fmt == "json":
        emit(json_text(head, {"equilibria": records}), args.out, out)
    elif fmt == "csv":
        cols = ["pattern", "x0", "x1", "x2", "s0", "s1", "s2", "n_pos", "n_neg", "label"]
        if args.eigenvalues:
            cols += [f"ev{i}_{part}" for i in range(3) for part in ("re", "im")]
        emit(csv_text(head, cols, rows), args.out, out)
    else:
        raise InvalidParameterError("equilibria supports csv or json output")
    return 0


def cmd_attractors(args, p, out):
    from .dynamics.cycles import detect_bistability

    horizon = args.t_end if args.t_end is not None else 3e5
    rep = detect_bistability(p, None, samples=args.attractors, seed=args.seed, horizon=horizon,
                             tol=args.tol, jobs=args.jobs)
    body = {"attractors": [{"kind": a.kind, "label": a.label, "representative": a.representative,
                            "period": a.period, "fraction": a.fraction, "samples": a.samples}
                           for a in rep.attractors],
            "undecided": rep.undecided, "samples": rep.samples}
    emit(json_text(header(p, args.seed), body), args.out, out)
    print(f"attractors: {len(rep.attractors)}", file=sys.stderr)
    return 0


def cmd_simulate(args, p, out):
    from .dynamics.cycles import detect_cycle, interior_point
    from .svg import phase_portrait

    if args.attractors:
        return cmd_attractors(args, p, out)
    y0 = np.array(_floats(args.y0, None, "--y0")) if args.y0 else interior_point(p)
    if len(y0) not in (3, 6):
        raise InvalidParameterError("--y0 needs 3 (x) or 6 (x and s) components")
    t_end = args.t_end if args.t_end is not None else 3e5
    if t_end < 0:
        raise InvalidParameterError("--t-end must be non-negative")
    res = detect_cycle(p, None, y0, horizon=t_end, tol=args.tol, early_stop=not args.no_early_stop,
                       keep_trajectory=True)
    traj = res.trajectory
    summary = {"status": res.status, "t_final": res.t_final, "final": res.final,
               "n_peaks": len(res.peaks)}
    if res.cycle is not None:
        summary["cycle"] = {"period": res.cycle.period, "peak_height": res.cycle.peak_height,
                            "amplitude": res.cycle.amplitude,
                            "poincare_residual": res.cycle.poincare_residual}
    if res.equilibrium is not None:
        summary["equilibrium"] = {"name": res.equilibrium.name, "x": res.equilibrium.x}
    summary["diagnostics"] = {k: v for k, v in res.diagnostics.items()}
    head = header(p, args.seed, {"y0": list(map(float, y0)), "status": res.status})
    fmt = _fmt(args, "csv")
    if fmt == "csv":
        every = max(1, args.every)
        idx = list(range(0, len(traj.t), every))
        if idx[-1] != len(traj.t) - 1:
            idx.append(len(traj.t) - 1)
        rows = [[traj.t[i], *traj.y[i]] for i in idx] if t_end > 0 else []
        emit(csv_text(head, ["t", "x0", "x1", "x2", "s0", "s1", "s2"], rows), args.out, out)
    elif fmt == "json":
        emit(json_text(head, summary), args.out, out)
    elif fmt == "svg":
        emit(phase_portrait(traj, tuple(int(c) for c in args.axes)), args.out, out)
    if args.summary:
        Path(args.summary).write_text(json_text(head, summary))
    print(f"status: {res.status}", file=sys.stderr)
    if t_end == 0:
        return 0
    return {"equilibrium": 0, "cycle": EXIT_CYCLE}.get(res.status, EXIT_INCONCLUSIVE)


def cmd_hopf(args, p, out):
    from .bifurcation.hopf import hopf_polynomial, hopf_roots_and_transversality
    from .bifurcation.lyapunov import lyapunov_coefficient_l1
    from .errors import NotOnLocusError

    free = args.free or "u_h"
    if free not in ("u_f", "u_g", "u_h"):
        raise InvalidParameterError("--free must be u_f, u_g or u_h")
    window = tuple(_floats(args.window, 2, "--window")) if args.window else None
    hp = hopf_polynomial(p, None, free, window=window)
    roots = []
    for root, transversal in hopf_roots_and_transversality(hp):
        rec = {"root": root, "transversal": transversal}
        try:
            l1 = lyapunov_coefficient_l1(p.with_(**{free: root}), None, tol=1e-7)
            rec["l1"] = l1
            rec["criticality"] = "supercritical" if l1 < 0 else "subcritical"
        except NotOnLocusError as exc:
            rec["l1_error"] = str(exc)
        roots.append(rec)
    body = {"free_parameter": free, "degree": hp.degree, "coefficients": hp.coefficients,
            "window": hp.window, "holdout_residual": hp.holdout_residual, "roots": roots,
            "fixed": hp.fixed}
    emit(json_text(header(p, args.seed), body), args.out, out)
    return 0


def _range(args, p, name, which):
    text = args.range if which == 0 else args.range2
    if text:
        return tuple(_floats(text, 2, "--range" if which == 0 else "--range2"))
    src = SWEEP_RANGES.get(args.params, {})
    if name in src:
        return src[name]
    if name == "alpha":
        return (1e-3, 0.3)
    v = getattr(p, name)
    return (0.0, max(2 * v, 1.0))


def cmd_continue(args, p, out):
    from .bifurcation.continuation import continue_equilibria
    from .bifurcation.curves import trace_codim1_curve
    from .svg import branch_diagram, two_parameter_diagram

    names = [n.strip() for n in (args.free or "alpha").split(",")]
    head = header(p, args.seed, {"free": names})
    outputs = {}
    if len(names) == 1:
        rng = _range(args, p, names[0], 0)
        branches, events = continue_equilibria(p, None, names[0], rng)
        head["range"] = list(rng)
        rows = []
        for bi, b in enumerate(branches):
            for lam, x, r in zip(b.values, b.states, b.reports):
                rows.append([bi, "E" + b.pattern, lam, *x, r.n_pos if r else "", r.label if r else ""])
        outputs["csv"] = csv_text(head, ["branch", "pattern", names[0], "x0", "x1", "x2",
                                         "n_pos_eig", "label"], rows)
        outputs["json"] = json_text(head, {"events": [e.as_record() for e in events]})
        outputs["svg"] = branch_diagram(branches, events, args.component) if branches else \
            two_parameter_diagram([])
    elif len(names) == 2:
        ranges = (_range(args, p, names[0], 0), _range(args, p, names[1], 1))
        head["ranges"] = [list(r) for r in ranges]
        kind = args.kind
        curves = []
        if all(r[1] > r[0] for r in ranges):
            curves.append(trace_codim1_curve(p, None, kind, tuple(names), ranges,
                                             pattern=args.pattern))
        rows = [[c.kind, *v, *x, *(() if c.l1 is None else (c.l1[i], c.a1[i]))]
                for c in curves for i, (v, x) in enumerate(zip(c.values, c.states))]
        cols = ["kind", names[0], names[1], "x0", "x1", "x2"] + (["l1", "a1"] if kind == "hopf" else [])
        outputs["csv"] = csv_text(head, cols, rows)
        outputs["json"] = json_text(head, {
            "events": [pt.as_record() for c in curves for pt in c.points],
            "curves": [{"kind": c.kind, "pattern": c.pattern, "ends": list(c.stop_reasons),
                        "n_points": len(c.values)} for c in curves]})
        outputs["svg"] = two_parameter_diagram(curves)
    else:
        raise InvalidParameterError("--free takes one parameter or two comma-separated ones")
    if args.format:
        emit(outputs[args.format], args.out, out)
    elif args.out:
        base = Path(args.out)
        base = base.with_suffix("") if base.suffix in (".csv", ".json", ".svg") else base
        base.with_suffix(".csv").write_text(outputs["csv"])
        Path(str(base) + ".events.json").write_text(outputs["json"])
        base.with_suffix(".svg").write_text(outputs["svg"])
    else:
        emit(outputs["json"], None, out)
    return 0


def cmd_persistence(args, p, out):
    from .dynamics.persistence import persistence_check, verify_persistence_by_simulation

    v = persistence_check(p, None)
    body = {"matched_theorem": v.matched_theorem, "uniform_persistent": v.uniform_persistent,
            "signatures": {k: list(s) for k, s in v.signatures.items()}, "notes": v.notes}
    if args.simulate:
        t_end = args.t_end if args.t_end is not None else 20.0 / p.alpha
        sims = {}
        for T in (t_end, 2 * t_end):
            s = verify_persistence_by_simulation(p, None, samples=args.samples, t_end=T,
                                                 seed=args.seed, tol=args.tol)
            sims[repr(T)] = {"floors": s.floors, "passed": s.passed}
        body["simulation"] = sims
    emit(json_text(header(p, args.seed), body), args.out, out)
    return 0


def cmd_faces_check(args, p, out):
    from .dynamics.cycles import FACES, check_face_no_cycles
    from .errors import PropertyViolation

    faces = sorted(FACES) if args.face == "all" else [args.face]
    reports = {}
    for f in faces:
        r = check_face_no_cycles(p, None, f, samples=args.samples, seed=args.seed, tol=args.tol,
                                 horizon=args.t_end, jobs=args.jobs)
        reports[f] = {"samples": r.samples, "cycles": r.n_cycles, "equilibrium": r.n_equilibrium,
                      "inconclusive": r.n_inconclusive, "endpoints": r.endpoints}
    emit(json_text(header(p, args.seed), {"faces": reports}), args.out, out)
    if any(r["cycles"] for r in reports.values()):
        raise PropertyViolation("periodic orbit detected on a face")
    return 0


def cmd_scale_params(args, out):
    from dataclasses import fields

    from .kinetics import UnscaledParams, scale_parameters
    from .presets import REFERENCE_UNSCALED

    if args.unscaled in (None, "reference"):
        u = REFERENCE_UNSCALED
    else:
        path = Path(args.unscaled)
        if not path.is_file():
            raise InvalidParameterError(f"{args.unscaled!r} is not a readable file")
        names = {f.name for f in fields(UnscaledParams)}
        vals = {}
        for lineno, raw in enumerate(path.read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = (part.strip() for part in line.partition("="))
            if not sep or key not in names:
                raise InvalidParameterError(f"line {lineno}: expected '<unscaled name> = value'")
            try:
                vals[key] = float(val)
            except ValueError:
                raise InvalidParameterError(f"line {lineno}: {val!r} is not a number") from None
        try:
            u = UnscaledParams(**vals)
        except TypeError as exc:
            raise InvalidParameterError(str(exc)) from None
    p = scale_parameters(u)
    emit(f"# chlorostat {__version__} scaled parameters\n" + format_params(p) + "\n", args.out, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chlorostat", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"chlorostat {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", required=True,
                        help=f"parameter file or preset ({', '.join(PRESET_NAMES)})")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json", "svg"))
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-8, help="integration relative tolerance")
    common.add_argument("--t-end", type=float, default=None)
    common.add_argument("--jobs", type=int, default=1)
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("equilibria", parents=[common], help="list equilibria with stability")
    e.add_argument("--eigenvalues", action="store_true", help="append eigenvalue columns")
    e.add_argument("--tol-hyperbolic", type=float, default=1e-9)

    s = sub.add_parser("simulate", parents=[common], help="integrate and classify the long-run behaviour")
    s.add_argument("--y0", help="initial x0,x1,x2 (or all six components)")
    s.add_argument("--every", type=int, default=1, help="write every n-th step")
    s.add_argument("--axes", default="01", help="phase-portrait components for svg output")
    s.add_argument("--summary", help="also write a JSON run summary here")
    s.add_argument("--no-early-stop", action="store_true")
    s.add_argument("--attractors", type=int, default=0, metavar="N",
                   help="instead sample N interior starts and list the distinct attractors")

    h = sub.add_parser("hopf", parents=[common], help="Hopf polynomial in one inflow parameter")
    h.add_argument("--free", choices=("u_f", "u_g", "u_h"), default="u_h")
    h.add_argument("--window", help="lo,hi sampling window for the free parameter")

    c = sub.add_parser("continue", parents=[common], help="equilibrium branches or codim-1 curves")
    c.add_argument("--free", default="alpha", help="one parameter, or two comma-separated")
    c.add_argument("--range", help="lo,hi for the first free parameter")
    c.add_argument("--range2", help="lo,hi for the second free parameter")
    c.add_argument("--kind", choices=("hopf", "fold"), default="hopf")
    c.add_argument("--pattern", default="110", help="presence pattern of a fold curve")
    c.add_argument("--component", type=int, default=0, help="state component drawn in the diagram")

    pe = sub.add_parser("persistence", parents=[common], help="persistence verdict")
    pe.add_argument("--simulate", action="store_true", help="also run the simulation probe")
    pe.add_argument("--samples", type=int, default=50)

    f = sub.add_parser("faces-check", parents=[common], help="look for cycles on the faces of Omega")
    f.add_argument("--face", choices=("01", "02", "12", "all"), default="all")
    f.add_argument("--samples", type=int, default=100)

    sc = sub.add_parser("scale-params", help="dimensional to dimensionless parameters")
    sc.add_argument("unscaled", nargs="?", help="file of dimensional values, or 'reference'")
    sc.add_argument("--out")
    return ap


COMMANDS = {"equilibria": cmd_equilibria, "simulate": cmd_simulate, "hopf": cmd_hopf,
            "continue": cmd_continue, "persistence": cmd_persistence,
            "faces-check": cmd_faces_check}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.command == "scale-params":
            return cmd_scale_params(args, out)
        p = load_params(args.params)
        return COMMANDS[args.command](args, p, out)
    except ChlorostatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

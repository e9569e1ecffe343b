"""
Command-line front end.

Subcommands::

    semidirac simulate --config s.toml --output traj.csv
    semidirac verify-fw
    semidirac verify-curvature
    semidirac analyze --config s.toml --kind cyclotron
    semidirac compare-pauli --config s.toml

Exit codes: 0 success, 1 failed verification or analysis check,
2 scenario error, 3 physics precondition, 4 numerical failure.
"""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analyses
from .constants import PhysConstants
from .dynamics import RhsModel, integrate
from .errors import ScenarioError, SemiDiracError
from .fw_verify import verify_curvature, verify_fw
from .output import write_trajectory
from .scenario import ANALYSIS_KINDS, load_scenario


def _fmt_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ",".join(_fmt_value(x) for x in v) + "]"
    return str(v)


def format_records(rec, prefix=""):
    """``key=value`` lines, one per record entry."""
    return "".join(f"{prefix}{k}={_fmt_value(v)}\n" for k, v in rec.items())


def _emit(text, path):
    sys.stdout.write(text)
    if path:
        Path(path).write_text(text)


def _scenario(args):
    if not args.config:
        raise ScenarioError("--config is required")
    sc = load_scenario(args.config)
    return sc.with_overrides(hbar=args.hbar, tol=args.tol, model=args.model)


def _run(sc, model=None):
    model = sc.model if model is None else model
    return integrate(sc.initial, sc.field, model, sc.constants, **sc.integrator.kwargs())


def _sweep_point(sc):
    return _run(sc)


def _sweep_path(path, hbar):
    p = Path(path)
    return str(p.with_name(f"{p.stem}_hbar{hbar:g}{p.suffix}"))


def cmd_simulate(args):
    sc = _scenario(args)
    fmt = args.format or sc.output_format
    path = args.output or sc.output_path
    if not path:
        raise ScenarioError("no output path: pass --output or set output.path")
    points = sc.sweep()
    if len(points) == 1:
        trajs = [_run(points[0])]
        paths = [path]
    else:
        workers = max(1, args.workers)
        if workers > 1:
            with ProcessPoolExecutor(workers) as ex:
                trajs = list(ex.map(_sweep_point, points))
        else:
            trajs = [_run(p) for p in points]
        paths = [_sweep_path(path, p.constants.hbar) for p in points]
    for traj, out in zip(trajs, paths):
        write_trajectory(traj, out, fmt)
        print(f"wrote {out} samples={len(traj)} steps={traj.n_steps} rejected={traj.n_rejected}")
    return 0


def _checks_text(title, checks):
    lines = [f"# {title}"]
    for c in checks:
        lines.append(
            f"{c.name}={_fmt_value(c.value)} threshold{c.relation}{_fmt_value(c.threshold)} "
            f"status={'PASS' if c.passed else 'FAIL'}"
        )
    return "\n".join(lines) + "\n"


def _constants(args):
    return PhysConstants(hbar=1.0 if args.hbar is None else args.hbar)


def cmd_verify_fw(args):
    checks = verify_fw(_constants(args), n=args.n, seed=args.seed)
    _emit(_checks_text("verify-fw", checks), args.output)
    return 0 if all(c.passed for c in checks) else 1


def cmd_verify_curvature(args):
    checks = verify_curvature(_constants(args), n=args.n, seed=args.seed)
    _emit(_checks_text("verify-curvature", checks), args.output)
    return 0 if all(c.passed for c in checks) else 1


def run_analysis(kind, traj, traj_pauli=None, tolerance=None):
    kw = {} if tolerance is None else {"tolerance": tolerance}
    if kind == "spin-hall":
        return analyses.spin_hall_drift(traj, traj_pauli, **kw)
    if kind == "cyclotron":
        return analyses.cyclotron_shift(traj, traj_pauli, **kw)
    if kind == "monopole":
        return analyses.monopole_check(traj, **kw)
    if kind == "helicity":
        return analyses.helicity_drift(traj, **kw)
    raise ScenarioError(f"unknown analysis kind {kind!r}")


def _analysis_request(args, sc):
    req = dict(sc.analysis or {})
    if args.kind:
        req["kind"] = args.kind
    if "kind" not in req:
        raise ScenarioError("no analysis kind: pass --kind or set analysis.kind")
    return req


def cmd_analyze(args):
    sc = _scenario(args)
    req = _analysis_request(args, sc)
    traj = _run(sc)
    pauli = None
    if args.with_pauli and req["kind"] in ("spin-hall", "cyclotron"):
        pauli = _run(sc, RhsModel.PAULI_CANONICAL)
    rep = run_analysis(req["kind"], traj, pauli, req.get("tolerance"))
    rec = rep.to_records()
    if args.format == "json":
        text = json.dumps(rec, indent=1, default=_fmt_value) + "\n"
    else:
        text = f"# {rep.name}: {'PASS' if rep.passed else 'FAIL'}\n" + format_records(rec)
    _emit(text, args.output)
    return 0 if rep.passed else 1


def _final_state(traj):
    i = len(traj) - 1
    out = {"t": traj.t[i], "r": traj.r[i], "p": traj.p[i], "S": traj.S[i]}
    if traj.energy is not None:
        out["energy_drift"] = float(np.max(np.abs(traj.energy - traj.energy[0])))
    return out


def cmd_compare_pauli(args):
    sc = _scenario(args)
    full = _run(sc, RhsModel.BERRY_FULL)
    pauli = _run(sc, RhsModel.PAULI_CANONICAL)
    a, b = _final_state(full), _final_state(pauli)
    lines = ["# compare-pauli: berry_full vs pauli_canonical"]
    lines.append(f"{'quantity':<14}{'berry_full':>60}  {'pauli_canonical':>60}")
    for key in a:
        lines.append(f"{key:<14}{_fmt_value(a[key]):>60}  {_fmt_value(b[key]):>60}")
    lines.append(f"final_position_separation={_fmt_value(float(np.linalg.norm(full.r[-1] - pauli.r[-1])))}")
    status = 0
    kind = args.kind or (sc.analysis or {}).get("kind")
    if kind in ("spin-hall", "cyclotron"):
        rep = run_analysis(kind, full, pauli, (sc.analysis or {}).get("tolerance"))
        lines.append(f"# {rep.name}: {'PASS' if rep.passed else 'FAIL'}")
        lines.append(format_records(rep.to_records()).rstrip("\n"))
        status = 0 if rep.passed else 1
    _emit("\n".join(lines) + "\n", args.output)
    return status


def build_parser():
    ap = argparse.ArgumentParser(prog="semidirac", description=__doc__.strip().splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--config", help="TOML scenario file")
            p.add_argument("--model", choices=("berry", "pauli", "classical"))
            p.add_argument("--tol", type=float, help="override integrator relative tolerance")
        p.add_argument("--hbar", type=float, help="override hbar")
        p.add_argument("--output", help="output path")

    p = sub.add_parser("simulate", help="integrate a scenario and write the trajectory")
    common(p)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--workers", type=int, default=1, help="processes for an hbar sweep")
    p.set_defaults(func=cmd_simulate)

    for name, func in (("verify-fw", cmd_verify_fw), ("verify-curvature", cmd_verify_curvature)):
        p = sub.add_parser(name)
        common(p, scenario=False)
        p.add_argument("--n", type=int, default=100, help="number of random momenta")
        p.add_argument("--seed", type=int, default=20050101)
        p.set_defaults(func=func)

    p = sub.add_parser("analyze", help="simulate a scenario and extract an observable")
    common(p)
    p.add_argument("--kind", choices=ANALYSIS_KINDS)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--with-pauli", action="store_true", help="also run the Pauli model (spin-hall, cyclotron)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare-pauli", help="run a scenario under both models side by side")
    common(p)
    p.add_argument("--kind", choices=("spin-hall", "cyclotron"))
    p.set_defaults(func=cmd_compare_pauli)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SemiDiracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

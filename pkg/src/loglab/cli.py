"""Command-line front end: ``loglab {eval,verify,phase,diverge,flow,minimize}``.

Exit codes: 0 success, 1 verification failure, 2 invalid input.  Grid flags
use dotted names (``--grid.N``, ``--grid.R_max``); the default grid profile is
read from ``LOGLAB_GRID`` (``desk``, ``fast`` or ``fine``).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import io
from .closedforms import ClosedForm, FamilyError, default_grid_for
from .divergence import FamilyKind, FamilySpec, dyadic, measure_slope
from .flow import FlowConfig, default_flow_grid, flow_run, relative_l1
from .functionals import (FreeEnergyParams, SchrodingerParams, entropy, free_energy,
                          g_functional, interaction, interaction_planar, j_functional,
                          kinetic, log_moment, potential_moment, rho_log_rho,
                          schrodinger_energy)
from .grids import GridError, PlanarGrid, QuadratureError, sample_planar
from .groundstate import GroundStateError, MinimizeOptions, default_ground_grid, minimize
from .inequalities import parse_range, scan_phase_diagram
from .verify import run_suite

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2
GRID_ENV = "LOGLAB_GRID"
GRID_PROFILES = {"desk": (2048, 100.0), "fast": (512, 100.0), "fine": (4096, 200.0)}

DENSITY_NAMES = {"rho-star": "rho_star", "rho-eta": "rho_eta", "k-minimizer": "k_minimizer",
                 "gaussian": "gaussian", "annulus-bump": "annulus_bump",
                 "unit-ball-bump": "unit_ball_bump"}
FUNCTIONALS = ("entropy", "rho-log-rho", "potential-moment", "log-moment", "interaction",
               "interaction-planar", "free-energy", "g-functional", "j-functional",
               "kinetic", "schrodinger")
FAMILIES = {"scale-up": (FamilyKind.SCALE, 1), "scale-down": (FamilyKind.SCALE, -1),
            "translate": (FamilyKind.TRANSLATE, 1), "two-bubble": (FamilyKind.TWO_BUBBLE, -1),
            "lattice": (FamilyKind.LATTICE, 1), "zeta": (FamilyKind.ZETA_LIMIT, -1),
            "wave-scale": (FamilyKind.WAVE_SCALE, -1), "wave-translate": (FamilyKind.WAVE_TRANSLATE, 1),
            "wave-two-bubble": (FamilyKind.WAVE_TWO_BUBBLE, -1)}


class InputError(ValueError):
    """Invalid command-line input (exit code 2)."""


def parse_density(spec: str, M: float = 1.0) -> ClosedForm:
    """``name[:key=value,...]`` with keys ``eta``, ``a``, ``lambda``, ``scale``."""
    name, _, rest = spec.partition(":")
    if name not in DENSITY_NAMES:
        raise InputError(f"unknown density {name!r}; choose from {sorted(DENSITY_NAMES)}")
    kw = {}
    for item in filter(None, rest.split(",")):
        key, sep, val = item.partition("=")
        if not sep:
            raise InputError(f"density parameter {item!r} must be key=value")
        key = key.strip()
        if key not in ("eta", "a", "lambda", "lam", "scale"):
            raise InputError(f"unknown density parameter {key!r}")
        try:
            kw["lam" if key == "lambda" else key] = float(val)
        except ValueError as exc:
            raise InputError(f"density parameter {key} needs a number, got {val!r}") from exc
    scale = kw.pop("scale", 1.0)
    return ClosedForm(DENSITY_NAMES[name], M=M, **kw).scaled(scale)


def grid_settings(args) -> tuple[int, float]:
    profile = getattr(args, "grid.profile", None) or os.environ.get(GRID_ENV, "desk")
    if profile not in GRID_PROFILES:
        raise InputError(f"unknown grid profile {profile!r}; choose from {sorted(GRID_PROFILES)}")
    N, R = GRID_PROFILES[profile]
    N = getattr(args, "grid.N", None) or N
    R = getattr(args, "grid.R_max", None) or R
    return int(N), float(R)


def _add_grid(p):
    p.add_argument("--grid.N", type=int, default=None, help="radial nodes")
    p.add_argument("--grid.R_max", type=float, default=None, help="radial truncation radius")
    p.add_argument("--grid.profile", default=None, help=f"desk, fast or fine (env {GRID_ENV})")


def _config(args, command, params, grid, seed=0) -> io.RunConfig:
    outs = {k: v for k, v in (("out", getattr(args, "out", None)),
                              ("report", getattr(args, "report", None)),
                              ("profile", getattr(args, "profile", None))) if v}
    return io.RunConfig(command, params, grid, outs, seed)


# -- eval -------------------------------------------------------------------------------------


def _evaluate(fn: str, form: ClosedForm, args, N, R) -> float:
    grid = default_grid_for(form, N, R)
    M = args.M
    if fn in ("kinetic", "schrodinger"):
        u = form.wave_on_grid(grid)
        if fn == "kinetic":
            return kinetic(u)
        return schrodinger_energy(u, SchrodingerParams(args.alpha, args.beta, args.gamma, M))
    if fn == "interaction-planar":
        pg = PlanarGrid(args.h, args.L)
        return interaction_planar(sample_planar(form, (0.0, 0.0), pg))
    rho = form.on_grid(grid)
    if fn == "entropy":
        return entropy(rho, M)
    if fn == "rho-log-rho":
        return rho_log_rho(rho)
    if fn == "potential-moment":
        return potential_moment(rho)
    if fn == "log-moment":
        return log_moment(rho)
    if fn == "interaction":
        return interaction(rho)
    if fn == "free-energy":
        return free_energy(rho, FreeEnergyParams(args.a, args.b, args.c, M))
    if fn == "g-functional":
        return g_functional(rho, args.a)
    if fn == "j-functional":
        if not args.eta > 1:
            raise InputError("eta must exceed 1 (Lemma 2)")
        return j_functional(rho, args.eta)
    raise InputError(f"unknown functional {fn!r}")


def cmd_eval(args) -> int:
    N, R = grid_settings(args)
    form = parse_density(args.density, args.M)
    value = _evaluate(args.functional, form, args, N, R)
    print(f"{args.functional}[{form.label}] = {value:.10g}")
    if args.out:
        params = {k: getattr(args, k) for k in ("functional", "density", "M", "a", "b", "c", "eta",
                                                "alpha", "beta", "gamma")}
        io.write_json(args.out, {"value": value, "density": form.label},
                      _config(args, "eval", params, {"N": N, "R_max": R}))
    return EXIT_OK


# -- verify -----------------------------------------------------------------------------------


def cmd_verify(args) -> int:
    N, R = grid_settings(args)
    checks = run_suite(args.suite, N, R, args.seed)
    failed = [c for c in checks if not c.passed]
    for c in checks:
        flag = "PASS" if c.passed else "FAIL"
        line = f"{flag} {c.suite}: {c.name} value={c.value:.6g} expected={c.expected:.6g} tol={c.tolerance:g}"
        if "error" in c.details:
            line += f" error: {c.details['error']}"
        print(line)
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    if args.report:
        io.write_json(args.report, {"checks": [c.to_dict() for c in checks],
                                    "passed": not failed, "failed": [c.name for c in failed]},
                      _config(args, "verify", {"suite": args.suite}, {"N": N, "R_max": R}, args.seed))
    return EXIT_OK if not failed else EXIT_FAIL


# -- phase ------------------------------------------------------------------------------------


def cmd_phase(args) -> int:
    if args.which == "free-energy":
        scan = scan_phase_diagram("free_energy", args.a, args.b)
        params = {"which": "free_energy", "a": args.a, "b": args.b}
    else:
        scan = scan_phase_diagram("schrodinger", args.gamma, args.Mbeta, alpha=args.alpha, M=args.M)
        params = {"which": "schrodinger", "gamma": args.gamma, "M_beta": args.Mbeta,
                  "alpha": args.alpha, "M": args.M}
    rows = []
    for x, y, lab in scan.rows():
        lb = "" if lab.lower_bound is None else lab.lower_bound
        rows.append((x, y, lab.label, lb, lab.witness or "", lab.reason))
    counts = {}
    for r in rows:
        counts[r[2]] = counts.get(r[2], 0) + 1
    print(" ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    if args.out:
        io.write_csv(args.out, [scan.x_name, scan.y_name, "label", "lower_bound", "witness", "reason"],
                     rows, _config(args, "phase", params, {}))
    return EXIT_OK


# -- diverge ----------------------------------------------------------------------------------


def _family_spec(args, M) -> FamilySpec:
    kind, direction = FAMILIES[args.family]
    if args.params:
        members = tuple(float(v) for v in parse_range(args.params)) if ":" in args.params else tuple(
            float(v) for v in args.params.split(","))
    elif kind == FamilyKind.LATTICE:
        members = tuple(float(n) for n in range(2, 9))
    elif kind in (FamilyKind.TRANSLATE, FamilyKind.WAVE_TRANSLATE):
        members = tuple(10.0 * 2 ** k for k in range(7))
    elif kind in (FamilyKind.TWO_BUBBLE, FamilyKind.WAVE_TWO_BUBBLE, FamilyKind.ZETA_LIMIT):
        members = dyadic(2, 8, -1)
    else:
        members = dyadic(0, 6, direction)
    if kind in (FamilyKind.TWO_BUBBLE, FamilyKind.WAVE_TWO_BUBBLE) or (
            kind == FamilyKind.SCALE and direction < 0):
        base = ClosedForm.annulus_bump(M)
    elif kind == FamilyKind.LATTICE:
        base = ClosedForm.unit_ball_bump(M)
    elif kind in (FamilyKind.WAVE_SCALE, FamilyKind.WAVE_TRANSLATE):
        base = ClosedForm.gaussian(M)
    else:
        base = ClosedForm.rho_star(M)
    if args.base:
        base = parse_density(args.base, M)
    return FamilySpec(kind, members, base, eps=args.eps, A=args.A)


def cmd_diverge(args) -> int:
    spec = _family_spec(args, args.M)
    if spec.is_wave:
        fun = SchrodingerParams(args.alpha, args.beta, args.gamma, args.M)
    else:
        fun = FreeEnergyParams(args.a, args.b, args.c, args.M)
    est = measure_slope(spec, fun)
    ana = "n/a" if est.analytic_slope is None else f"{est.analytic_slope:.6g}"
    print(f"{est.family}: slope={est.slope:.6g} analytic={ana} "
          f"divergence_slope={est.divergence_slope:.6g} confirmed={est.confirmed}")
    if args.out:
        params = {"family": args.family, "params": list(spec.params), "eps": args.eps, "A": args.A,
                  "base": spec.base.label, "functional": io.jsonable(vars(fun))}
        io.write_json(args.out, est.to_dict(), _config(args, "diverge", params, {"N": spec.N}))
    return EXIT_OK


# -- flow ------------------------------------------------------------------------------------


def cmd_flow(args) -> int:
    p = FreeEnergyParams(args.a, args.b, args.c, args.M)
    grid = default_flow_grid(args.cells, args.R)
    cfg = FlowConfig(p, dt=args.dt, steps=args.steps, grid=grid, scheme=args.scheme)
    init = parse_density(args.init, args.M)
    state = flow_run(cfg, init)
    print(f"t={state.time:.6g} steps={state.steps} F={state.free_energy:.8g} "
          f"mass_drift={abs(state.mass - args.M) / args.M:.3g} ({state.message})")
    if args.compare:
        ref = parse_density(args.compare, args.M)
        print(f"relative L1 to {ref.label}: {relative_l1(state, ref):.3g}")
    config = _config(args, "flow", {"init": args.init, **cfg.describe()}, grid.describe())
    if args.out:
        io.write_csv(args.out, ["t", "F", "D", "mass"], state.history, config)
    if args.profile:
        io.write_csv(args.profile, ["r", "rho"], zip(state.mesh.r, state.values), config)
    return EXIT_OK


# -- minimize --------------------------------------------------------------------------------


def cmd_minimize(args) -> int:
    p = SchrodingerParams(args.alpha, args.beta, args.gamma, args.M)
    opts = MinimizeOptions(max_iter=args.max_iter, tol=args.tol, allow_unknown=args.allow_unknown,
                           grid=default_ground_grid(args.cells, args.R))
    rep = minimize(p, opts)
    print(f"E={rep.energy:.10g} theta={rep.theta:.6g} residual={rep.residual:.3g} "
          f"iterations={len(rep.trace) - 1} ({rep.message})")
    config = _config(args, "minimize", io.jsonable(vars(p)), opts.describe())
    if args.out:
        io.write_json(args.out, rep.to_dict(), config)
    if args.profile:
        io.write_csv(args.profile, ["r", "u"], zip(rep.mesh.r, rep.values), config)
    return EXIT_OK if rep.converged else EXIT_FAIL


# -- parser ----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="loglab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--M", type=float, default=1.0, help="mass")
        if out:
            p.add_argument("--out", default=None, help="output file")

    def energy_coeffs(p, a=0.0, b=0.0):
        p.add_argument("--a", type=float, default=a)
        p.add_argument("--b", type=float, default=b)
        p.add_argument("--c", type=float, default=1.0)

    def wave_coeffs(p):
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--beta", type=float, default=0.0)
        p.add_argument("--gamma", type=float, default=0.0)

    p = sub.add_parser("eval", help="evaluate a functional on a closed-form density")
    p.add_argument("--functional", required=True, choices=FUNCTIONALS)
    p.add_argument("--density", required=True, help="e.g. k-minimizer:a=0.5,lambda=1")
    p.add_argument("--eta", type=float, default=2.0)
    p.add_argument("--h", type=float, default=0.05, help="planar cell size")
    p.add_argument("--L", type=float, default=30.0, help="planar half-width")
    common(p)
    energy_coeffs(p)
    wave_coeffs(p)
    _add_grid(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", default="all",
                   choices=("equalities", "inequalities", "scaling", "identities", "all"))
    p.add_argument("--report", default=None, help="JSON report path")
    p.add_argument("--seed", type=int, default=0)
    _add_grid(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("phase", help="label a parameter rectangle")
    p.add_argument("--which", required=True, choices=("free-energy", "schrodinger"))
    p.add_argument("--a", default="-1:3:0.05")
    p.add_argument("--b", default="-3:3:0.05")
    p.add_argument("--gamma", default="-3:3:0.05")
    p.add_argument("--Mbeta", default="-3:3:0.05")
    p.add_argument("--alpha", type=float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("diverge", help="measure the energy slope along a family")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--params", default=None, help="members as start:stop:step or a comma list")
    p.add_argument("--base", default=None, help="override the base density")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--A", type=float, default=None)
    common(p)
    energy_coeffs(p)
    wave_coeffs(p)
    p.set_defaults(func=cmd_diverge)

    p = sub.add_parser("flow", help="run the gradient flow of F_{a,b}")
    energy_coeffs(p, a=2.0)
    p.add_argument("--init", default="gaussian")
    p.add_argument("--compare", default=None, help="density for an L1 comparison of the terminal state")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=4000)
    p.add_argument("--scheme", default="implicit", choices=("implicit", "explicit"))
    p.add_argument("--cells", type=int, default=400)
    p.add_argument("--R", type=float, default=100.0)
    p.add_argument("--profile", default=None, help="CSV of the terminal profile")
    common(p)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("minimize", help="ground state of the Schrödinger energy")
    wave_coeffs(p)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--allow-unknown", action="store_true")
    p.add_argument("--cells", type=int, default=600)
    p.add_argument("--R", type=float, default=30.0)
    p.add_argument("--profile", default=None, help="CSV of the minimizer")
    common(p)
    p.set_defaults(func=cmd_minimize)
    return ap


def _join_negative_values(argv):
    """``--a -1:3:0.05`` -> ``--a=-1:3:0.05`` so argparse does not read a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else ""
        if (tok.startswith("--") and "=" not in tok and len(nxt) > 1 and nxt[0] == "-"
                and (nxt[1].isdigit() or nxt[1] == ".")):
            out.append(f"{tok}={nxt}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    ap = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, FamilyError, GroundStateError, GridError, QuadratureError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

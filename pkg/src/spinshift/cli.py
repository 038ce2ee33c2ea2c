"""Command-line front end.

    spinshift eigs      axis spectrum kappa_p L / pi per lambda (CSV)
    spinshift shift     per-order eigenvalue table for each species
    spinshift sweep     shifts over grids of L, lambda and gradient strength (CSV)
    spinshift fid       simulated FID trace (CSV) and fit summary (JSON)
    spinshift comag     gyroscope error budget versus L (CSV) and at geometry.L (JSON)
    spinshift wallfit   1/T2(T) fit (JSON) and model curve (CSV)
    spinshift couplings debug dump of b_0a and b_tot_0a (CSV)

Exit codes: 0 ok, 2 configuration error, 3 solver error, 4 fit error.
"""

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .analytic import series_constants
from .comag import ComagError, budget_terms, characteristic_length_detail, systematic_errors
from .config import SCHEMA_VERSION, ConfigError, load_config, parse_config
from .coupling import CouplingError, assemble_couplings
from .domain import CellGeometry, LambdaRangeError
from .eigenbasis import EigenBasis, RootBracketError, approx_kappa, solve_axis_modes, \
    transcendental_residual
from .fields import build_field
from .io import provenance, read_csv, write_csv, write_json
from .perturbation import PerturbationError, solve
from .timedomain import FitError, IntegrationError, default_discard, fit_fid, simulate_fid
from .units import TWO_PI, celsius_to_kelvin
from .wallfit import T2Dataset, WallFitError, fit_t2_model

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_FIT = 0, 2, 3, 4

SOLVER_ERRORS = (RootBracketError, PerturbationError, IntegrationError, CouplingError,
                 ComagError, LambdaRangeError, np.linalg.LinAlgError, FloatingPointError)
FIT_ERRORS = (FitError, WallFitError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _header(cfg, command):
    return provenance(command, cfg.config_hash, {"schema_version": SCHEMA_VERSION})


def _out(args, cfg):
    return args.out if args.out is not None else cfg.section("output")["path"]


def _fmt(args, cfg):
    return args.format or cfg.section("output")["format"]


def _emit(args, cfg, command, columns, rows, payload=None):
    head = _header(cfg, command)
    path = _out(args, cfg)
    if _fmt(args, cfg) == "json":
        body = payload if payload is not None else {"columns": columns, "rows": rows}
        write_json(path, body, head)
    else:
        write_csv(path, columns, rows, head)


# ---------------------------------------------------------------- commands

def cmd_eigs(args, cfg):
    sec = cfg.section("eigs")
    lams = np.array(args.lam, dtype=float) if args.lam else sec["lambda"]
    N = args.N or sec["N"]
    L = sec["L"]
    rows = []
    for lam in lams:
        if lam < 0:
            raise ConfigError("lambda must be nonnegative")
        for m in solve_axis_modes(L, float(lam), N):
            x = m.kappa * L
            rows.append([float(lam), m.p, x / math.pi, approx_kappa(L, float(lam), m.p) * L / math.pi,
                         transcendental_residual(x, float(lam))])
    _emit(args, cfg, "eigs", ["lambda", "p", "kappaL_over_pi", "kappaL_over_pi_approx", "residual"],
          rows)
    return EXIT_OK


def _report_rows(species, report):
    rows = []
    for k in range(4):
        s = report.s0[k]
        shift = report.frequency_shift[k]
        rows.append([species.name, k, s.real, s.imag, shift, shift / TWO_PI * 1e3, s.real])
    return rows


def cmd_shift(args, cfg):
    sol = cfg.solver
    N = args.N or sol["N"]
    rows, payload = [], {"species": []}
    for sp in cfg.species:
        _, cs, rep = solve(sp, cfg.geometry, cfg.field, N=N, use_b_tot=sol["use_b_tot"],
                           method=sol["method"], sum_mode=sol["sum_mode"], hops=sol["hops"])
        rows += _report_rows(sp, rep)
        flags = list(rep.validity.flags) if rep.validity else []
        for f in flags:
            print(f"warning [{sp.name}]: {f}", file=sys.stderr)
        payload["species"].append({
            "name": sp.name, "s0": list(rep.s0), "frequency_shift_rad_s": list(rep.frequency_shift),
            "relaxation_per_s": list(rep.relaxation), "total_shift_rad_s": rep.shift,
            "truncation_error": rep.truncation_error, "n_modes": rep.n_modes,
            "coupling_choice": list(rep.coupling_choice), "validity_flags": flags,
            "validity": None if rep.validity is None else {
                "high_pressure": rep.validity.high_pressure,
                "fast_diffusion": rep.validity.fast_diffusion,
                "perturbation_smallness": rep.validity.perturbation_smallness},
        })
    _emit(args, cfg, "shift", ["species", "order", "s_re", "s_im", "shift_rad_s", "shift_mHz",
                               "relaxation_per_s"], rows, payload)
    return EXIT_OK


def _sweep_point(task):
    sp, L, lam, G, fld, sol = task
    field_model = build_field(fld["kind"], fld["B0"], G) if G is not None else fld["model"]
    species = sp if lam is None else sp.with_(lam=lam)
    _, _, rep = solve(species, CellGeometry(L), field_model, N=sol["N"],
                      use_b_tot=sol["use_b_tot"], method=sol["method"],
                      sum_mode=sol["sum_mode"], hops=sol["hops"])
    fs, rl = rep.frequency_shift, rep.relaxation
    return [fs[1], fs[2], fs[3], rep.shift, rl[0], rl[2], rep.truncation_error]


def cmd_sweep(args, cfg):
    sw, sol = cfg.section("sweep"), dict(cfg.solver)
    if args.N:
        sol["N"] = args.N
    Ls = sw["L"] if sw["L"] is not None else np.array([cfg.geometry.L])
    lams = sw["lambda"] if sw["lambda"] is not None else [None]
    Gs = sw["G"] if sw["G"] is not None else [None]
    fsec = cfg.section("field")
    if Gs[0] is not None and fsec["kind"] not in ("linear_gradient", "quadratic_gradient"):
        raise ConfigError("sweep.G requires a linear_gradient or quadratic_gradient field")
    fld = {"kind": fsec["kind"], "B0": cfg.field.B0, "model": cfg.field}
    tasks, keys = [], []
    for sp in cfg.species:
        for L in Ls:
            for lam in lams:
                for G in Gs:
                    tasks.append((sp, float(L), None if lam is None else float(lam),
                                  None if G is None else float(G), fld, sol))
                    keys.append([sp.name, float(L), sp.lam if lam is None else float(lam),
                                 cfg.field.strength if G is None else float(G)])
    workers = args.workers or sw["workers"]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, tasks))  # map keeps grid order
    else:
        results = [_sweep_point(t) for t in tasks]
    rows = [[i] + k + r for i, (k, r) in enumerate(zip(keys, results))]
    cols = ["index", "species", "L_cm", "lambda", "G", "shift1_rad_s", "shift2_rad_s",
            "shift3_rad_s", "shift_total_rad_s", "relax0_per_s", "relax2_per_s", "truncation_error"]
    _emit(args, cfg, "sweep", cols, rows)
    return EXIT_OK


def cmd_fid(args, cfg):
    fd, sol = cfg.section("fid"), cfg.solver
    sp = cfg.species_named(args.species) if args.species else cfg.species[0]
    L, D = cfg.geometry.L, sp.D
    N = fd["N"] or min(sol["N"], 30)
    basis = EigenBasis(L, sp.lam, N)
    transverse = fd["system"] == "full"
    # the full system needs the two-hop intermediate states that b_tot sums over
    hops = max(sol["hops"], 2) if transverse else sol["hops"]
    cs = assemble_couplings(basis, cfg.field, sp, hops=hops, transverse=transverse,
                            method=sol["method"], sum_mode=sol["sum_mode"])
    rate = sp.Gamma2c + 6 * sp.lam * D / L**2
    discard = fd["discard"] if fd["discard"] is not None else default_discard(L, D)
    t_end = fd["t_end"] or (discard + (12.0 / rate if rate > 0 else 100.0))
    if fd["dt"]:
        dt = fd["dt"]
    elif fd["frame"] == "lab":
        dt = TWO_PI / abs(sp.gamma * cfg.field.B0) / 20
    else:
        dt = min(t_end / 2000, 0.5)
    tr = simulate_fid(basis, cs, sp, cfg.field.B0, t_end, dt, system=fd["system"],
                      dressed=fd["dressed"], frame=fd["frame"], method=fd["method"])
    fit = fit_fid(tr, discard, max_residual=fd["max_residual"])
    head = _header(cfg, "fid")
    rows = [[t, s.real, s.imag] for t, s in zip(tr.times, tr.signal)]
    write_csv(_out(args, cfg), ["t_s", "re", "im"], rows, head)
    summary = {"species": sp.name, "frame": tr.frame, "omega_rad_s": fit.omega,
               "gamma2_per_s": fit.gamma2, "amplitude": fit.amplitude,
               "residual_rms": fit.residual_rms, "transient_discard_s": fit.transient_discard,
               "n_modes": cs.size, "dt_s": dt, "t_end_s": t_end}
    write_json(args.summary if args.summary else "-", summary, head)
    return EXIT_OK


def cmd_comag(args, cfg):
    if len(cfg.species) < 2:
        raise ConfigError("comag needs two species (129Xe first, 131Xe second)")
    s129, s131 = cfg.species[0], cfg.species[1]
    cm = cfg.section("comag")
    B0, G1, G2 = cfg.field.B0, cm["G1"], cm["G2"]
    detail = characteristic_length_detail(s129, s131, G2) if G2 != 0 else None
    rows = []
    for L in cm["L"]:
        lin1, q1, q3 = budget_terms(s129, s131, float(L), B0, G1, G2)
        rows.append([float(L), lin1 / TWO_PI, q1 / TWO_PI, q3 / TWO_PI])
    head = _header(cfg, "comag")
    if detail is not None:
        head["Lc_cm"] = repr(detail.Lc)
        head["Lc_external_cm"] = repr(detail.Lc_external)
    if detail is not None and detail.interpretations_differ:
        print(f"note: crossing length {detail.Lc:.4g} cm (self-consistent) vs "
              f"{detail.Lc_external:.4g} cm (inner L = 1 cm)", file=sys.stderr)
    write_csv(_out(args, cfg), ["L_cm", "dOmega_linG1_Hz", "dOmega_quadG1_Hz", "dOmega_quadG3_Hz"],
              rows, head)
    if args.json:
        fm = build_field("quadratic_gradient", B0, G2)
        bud = systematic_errors(s129, s131, cfg.geometry, fm, G1=G1, G2=G2)
        payload = {"L_cm": cfg.geometry.L, "B0_nT": B0, "G1": G1, "G2": G2,
                   "budget_rad_s": bud.as_dict(),
                   "budget_Hz": {k: bud.as_dict()[k] / TWO_PI for k in
                                 ("dOmega_linG_1st", "dOmega_quadG_1st", "dOmega_quadG_3rd", "total")},
                   "Lc_cm": None if detail is None else detail.Lc,
                   "Lc_external_cm": None if detail is None else detail.Lc_external,
                   "chi1": series_constants().chi1}
        write_json(args.json, payload, head)
    return EXIT_OK


def _load_t2_csv(path, species):
    try:
        _, cols, rows = read_csv(path)
    except (OSError, StopIteration) as exc:
        raise ConfigError(f"cannot read wallfit input {path}: {exc}") from exc
    need = ["T_C", "inv_T2", "sigma"]
    if any(c not in cols for c in need):
        raise ConfigError(f"wallfit input needs columns {need}, got {cols}")
    idx = [cols.index(c) for c in need]
    arr = np.array([[float(r[i]) for i in idx] for r in rows])
    try:
        return T2Dataset(celsius_to_kelvin(arr[:, 0]), arr[:, 1], arr[:, 2], species)
    except ValueError as exc:
        raise ConfigError(f"wallfit input: {exc}") from exc


def cmd_wallfit(args, cfg):
    wf = cfg.section("wallfit")
    path = args.input or wf["input"]
    if not path:
        raise ConfigError("wallfit needs --input or wallfit.input")
    data = _load_t2_csv(path, wf["species"])
    res = fit_t2_model(data, L=wf["L"], D=wf["D"], T_ref=wf["T_ref_K"])
    head = _header(cfg, "wallfit")
    write_json(args.json if args.json else "-", res.as_dict(), head)
    if args.curve:
        T = np.linspace(data.T.min(), data.T.max(), 61)
        gw, gc = res.Gamma_w(T), res.Gamma_collision(T)
        rows = [[t - 273.15, a + b, a, b] for t, a, b in zip(T, gw, gc)]
        write_csv(args.curve, ["T_C", "inv_T2_model", "Gamma_w", "Gamma_collision"], rows, head)
    return EXIT_OK


def cmd_couplings(args, cfg):
    sp = cfg.species_named(args.species) if args.species else cfg.species[0]
    sol = cfg.solver
    basis = EigenBasis(cfg.geometry.L, sp.lam, args.N or sol["N"])
    cs = assemble_couplings(basis, cfg.field, sp, hops=sol["hops"], method=sol["method"],
                            sum_mode=sol["sum_mode"])
    ksq = basis.kappa_sq_of(cs.modes)
    btot = cs.b_tot if cs.b_tot is not None else cs.b.astype(complex)
    rows = [[int(a[0]), int(a[1]), int(a[2]), k, cs.b[0, i], btot[0, i].real, btot[0, i].imag]
            for i, (a, k) in enumerate(zip(cs.modes, ksq))]
    _emit(args, cfg, "couplings", ["m", "n", "p", "kappa_sq", "b_0a", "b_tot_0a_re", "b_tot_0a_im"],
          rows)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    p = _Parser(prog="spinshift", description="Spectral solver for diffusing-spin frequency shifts.")
    p.add_argument("--version", action="version", version=f"spinshift {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON or YAML run configuration")
        sp.add_argument("--out", help="output path ('-' or omitted: stdout)")
        sp.add_argument("--format", choices=["csv", "json"], help="override output.format")
        return sp

    e = common(sub.add_parser("eigs", help="axis eigenvalue spectrum"))
    e.add_argument("--lambda", dest="lam", type=float, action="append",
                   help="wall parameter (repeatable)")
    e.add_argument("--N", type=int, help="modes per axis")
    e.set_defaults(func=cmd_eigs)

    s = common(sub.add_parser("shift", help="per-order eigenvalue corrections"))
    s.add_argument("--N", type=int)
    s.set_defaults(func=cmd_shift)

    w = common(sub.add_parser("sweep", help="grid scan over L, lambda, G"))
    w.add_argument("--N", type=int)
    w.add_argument("--workers", type=int, help="process pool size")
    w.set_defaults(func=cmd_sweep)

    f = common(sub.add_parser("fid", help="time-domain FID simulation and fit"))
    f.add_argument("--species", help="species name (default: first)")
    f.add_argument("--summary", help="fit summary JSON path (default stdout)")
    f.set_defaults(func=cmd_fid)

    c = common(sub.add_parser("comag", help="gyroscope systematic-error budget"))
    c.add_argument("--json", help="budget JSON path")
    c.set_defaults(func=cmd_comag)

    t = common(sub.add_parser("wallfit", help="fit 1/T2 versus temperature"))
    t.add_argument("--input", help="CSV with columns T_C, inv_T2, sigma")
    t.add_argument("--json", help="result JSON path (default stdout)")
    t.add_argument("--curve", help="model-curve CSV path")
    t.set_defaults(func=cmd_wallfit)

    d = common(sub.add_parser("couplings", help="debug dump of b_0a"))
    d.add_argument("--species")
    d.add_argument("--N", type=int)
    d.set_defaults(func=cmd_couplings)
    return p


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_CONFIG
        cfg = load_config(args.config) if args.config else parse_config({})
        if getattr(args, "N", None) is not None and args.N < 1:
            raise ConfigError("--N must be positive")
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FIT_ERRORS as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

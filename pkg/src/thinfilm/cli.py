"""Command-line interface.

Exit codes: 0 on success, 1 on numerical failure, 2 on configuration error.
The output directory is taken from --output-dir, then $THINFILM_OUTPUT_DIR,
then `output_dir` in the config file.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import acceptance, continuation, csvio, evolution, phase, stability, steady
from .config import parse_config
from .errors import ConfigError, ThinFilmError
from .model import HamiltonianParams, ModelParams, PeriodicProfile

log = logging.getLogger("thinfilm")

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2

# CLI flag -> config key for the shared physical and numerical options
_SHARED = {
    "g": float, "k0": float, "M": float, "K": float, "eps": float, "N": int,
    "max_modes": int, "grid": int, "ds": float, "ds_max": float, "max_steps": int,
    "rupture_threshold": float, "tol": float, "dt": float, "t_end": float,
    "snapshot_every": float, "amplitude": float, "seed": int,
}


def _add_options(parser, keys):
    for key in keys:
        flag = "--" + key.replace("_", "-")
        parser.add_argument(flag, dest=key, type=_SHARED[key], default=None)


def _config(args):
    text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
    base = parse_config(text)
    overrides = {k: getattr(args, k, None) for k in _SHARED}
    try:
        return base.replace(**overrides)
    except ConfigError as exc:
        raise ConfigError(f"command line: {exc}") from None


def _outdir(args, cfg):
    out = csvio.resolve_output_dir(args.output_dir, None if cfg.output_dir == "." else cfg.output_dir)
    (out / "config_resolved.txt").write_text(cfg.echo(), encoding="utf-8")
    return out


def _say(*parts):
    print(*parts)


def cmd_fixed_points(args, cfg):
    p = HamiltonianParams(cfg.g, cfg.resolved_M(), cfg.resolved_K())
    fp = phase.classify_fixed_points(p, phase.find_fixed_points(p))
    row = [fp.v_l, fp.v_u, fp.kind_l, fp.kind_u]
    header = ["v_l", "v_u", "kind_l", "kind_u"]
    if fp.v_l < fp.v_u:
        iv = phase.energy_interval(p, fp)
        row += [iv.E_min, iv.E_max, iv.has_homoclinic]
        header += ["E_min", "E_max", "has_homoclinic"]
    out = _outdir(args, cfg)
    csvio.write_csv(out / "fixed_points.csv", header, [row])
    for key, value in zip(header, row):
        _say(f"{key} = {csvio.fmt(value)}")


def _energy(args, p, fp):
    iv = phase.energy_interval(p, fp)
    if args.energy is not None:
        return args.energy
    return iv.E_min + args.energy_fraction * (iv.E_max - iv.E_min)


def cmd_period(args, cfg):
    p = HamiltonianParams(cfg.g, cfg.resolved_M(), cfg.resolved_K())
    fp = phase.find_fixed_points(p)
    E = _energy(args, p, fp)
    T = phase.period(E, p, fp=fp)
    tp = phase.turning_points(E, p, fp)
    _say(f"E = {csvio.fmt(E)}")
    _say(f"q0 = {csvio.fmt(tp.q0)}")
    _say(f"q1 = {csvio.fmt(tp.q1)}")
    _say(f"period = {csvio.fmt(T)}")


def cmd_phase_portrait(args, cfg):
    p = HamiltonianParams(cfg.g, cfg.resolved_M(), cfg.resolved_K())
    fp = phase.find_fixed_points(p)
    E = _energy(args, p, fp)
    tp = phase.turning_points(E, p, fp)
    T = phase.period(E, p, fp=fp)
    orbit = phase.integrate_orbit(tp.q1, 0.0, args.periods * T, cfg.dt, p)
    out = _outdir(args, cfg)
    csvio.write_csv(out / "orbit.csv", ("v", "w", "t"), zip(orbit.v, orbit.w, orbit.t))
    drift = np.max(np.abs(phase.hamiltonian(orbit.v, orbit.w, p) - phase.hamiltonian(tp.q1, 0.0, p)))
    _say(f"samples = {orbit.t.size}")
    _say(f"period = {csvio.fmt(T)}")
    _say(f"max_energy_drift = {drift:.3e}")
    if orbit.hit_boundary:
        _say("orbit reached the boundary v = -1")


def cmd_solve(args, cfg):
    if cfg.M is None:
        guess, M = continuation.local_predictor(cfg.k0, cfg.g, cfg.amplitude)
    else:
        M = cfg.M
        guess = PeriodicProfile(cfg.k0, [cfg.amplitude])
    guess = guess.resized(cfg.N)
    profile, info = steady.newton_solve(guess, M, cfg.g, tol=cfg.tol, max_modes=cfg.max_modes,
                                        full_output=True)
    bp = continuation.build_point(profile, M, cfg.g, 0.0, info.residual_norm)
    out = _outdir(args, cfg)
    csvio.write_profile(out / "profile.csv", profile)
    for key in ("M", "K", "min_h", "max_h", "l2_norm", "flux_residual", "residual"):
        _say(f"{key} = {csvio.fmt(getattr(bp, key))}")
    _say(f"newton_iterations = {info.iterations}")
    _say(f"modes = {info.N}")
    if np.max(np.abs(profile.coeffs)) <= steady.FLAT_LEVEL:
        _say(f"note: converged to the flat film; nontrivial states need M < M*(k0) = "
             f"{cfg.M_star_k0:g}")


def cmd_continue_branch(args, cfg):
    record = continuation.trace_branch(
        cfg.g, cfg.k0, ds=cfg.ds, max_steps=cfg.max_steps, rupture_threshold=cfg.rupture_threshold,
        ds_max=cfg.ds_max, N=cfg.N, max_modes=cfg.max_modes)
    if not args.no_eigs:
        record = stability.annotate_branch(record)
    out = _outdir(args, cfg)
    csvio.emit_branch(record, out)
    diag = continuation.detect_rupture(record, cfg.rupture_threshold)
    _say(f"points = {len(record)}")
    _say(f"termination = {record.termination}")
    _say(f"final_min_h = {csvio.fmt(record[-1].min_h)}")
    _say(f"final_M = {csvio.fmt(record[-1].M)}")
    _say(f"M_inf_estimate = {csvio.fmt(diag.M_inf)}")
    if record.termination == "step-failure":
        log.error("continuation stopped: step size underflow")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_spectrum(args, cfg):
    out = _outdir(args, cfg)
    if args.branch_file is None:
        p = ModelParams(cfg.g, cfg.resolved_M(), cfg.k0)
        report = stability.constant_state_spectrum(p)
        if report.unstable_band is not None:
            _say(f"unstable_band = ({report.unstable_band[0]:.17g}, {report.unstable_band[1]:.17g})")
        reports = [report]
        bp = None
    else:
        branch_dir = Path(args.branch_file).parent
        record = csvio.read_branch(branch_dir, g=cfg.g)
        bp = record[args.point_index]
        reports = [stability.periodic_state_spectrum(bp, args.n_eigs, cfg.g)]
    ev = reports[0].eigenvalues[:args.n_eigs]
    csvio.write_csv(out / "spectrum.csv", ("re", "im"), zip(ev.real, ev.imag))
    _say(f"leading = {csvio.fmt(reports[0].leading)}")
    if args.bloch_sweep:
        if bp is None:
            sweep = [stability.constant_state_spectrum(ModelParams(cfg.g, cfg.resolved_M(), cfg.k0),
                                                       bloch=mu)
                     for mu in cfg.k0 * np.arange(args.n_bloch) / args.n_bloch]
        else:
            sweep = stability.bloch_sweep(bp, cfg.g, args.n_bloch, args.n_eigs)
        rows = [(r.bloch, z.real, z.imag) for r in sweep for z in r.eigenvalues[:args.n_eigs]]
        csvio.write_csv(out / "bloch_sweep.csv", ("mu", "re", "im"), rows)
        _say(f"bloch_leading = {csvio.fmt(max(r.leading for r in sweep))}")


def _write_snapshots(out, x, snapshots, name):
    for idx, (_, values) in enumerate(snapshots):
        csvio.write_csv(out / f"snapshot_{idx:04d}.csv", ("x", name), zip(x, values))


def cmd_evolve(args, cfg):
    p = ModelParams(cfg.g, cfg.resolved_M(), cfg.k0)
    length = 2.0 * np.pi / cfg.k0
    x = -0.5 * length + length * np.arange(cfg.grid) / cfg.grid
    h0 = 1.0 + cfg.amplitude * np.cos(cfg.k0 * x)
    result = evolution.evolve(h0, p, cfg.t_end, dt=cfg.dt, snapshot_every=cfg.snapshot_every)
    out = _outdir(args, cfg)
    _write_snapshots(out, x, result.snapshots, "h")
    csvio.write_csv(out / "diagnostics.csv", ("t", "mass", "min_h", "max_mode", "blowup_indicator"),
                    result.diagnostics)
    _say(f"steps = {result.steps}")
    _say(f"t = {csvio.fmt(result.state.t)}")
    _say(f"min_h = {csvio.fmt(result.state.h.min())}")
    if result.halted:
        _say("halted: height floor reached (rupture onset)")


def cmd_amplitude(args, cfg):
    length = args.length
    X = length * np.arange(cfg.grid) / cfg.grid
    V0 = evolution.default_seed(X, length)
    dT = cfg.dt
    times, snaps, blew_up = evolution.evolve_sivashinsky(V0, cfg.g, cfg.t_end, dT, length)
    indicator = evolution.blowup_indicator(snaps, dT, length)
    every = max(1, int(round(cfg.snapshot_every / dT)))
    picked = list(range(0, len(snaps), every))
    out = _outdir(args, cfg)
    _write_snapshots(out, X, [(times[i], snaps[i]) for i in picked], "V")
    rows = []
    for i in picked:
        V = snaps[i]
        amp = max(evolution.mode_amplitude(V, l) for l in range(1, V.size // 2))
        rows.append((times[i], evolution.period_mass(V, length), V.min(), amp, indicator[i]))
    csvio.write_csv(out / "diagnostics.csv", ("t", "mass", "min_h", "max_mode", "blowup_indicator"),
                    rows)
    _say(f"T_reached = {csvio.fmt(times[-1])}")
    _say(f"blow_up = {blew_up}")
    if not args.no_compare and not blew_up:
        report = evolution.amplitude_correspondence(cfg.eps, cfg.g, V0, length=length,
                                                    T_end=cfg.t_end, dT=dT, n=cfg.grid)
        csvio.write_csv(out / "correspondence.csv", ("T", "discrepancy"),
                        zip(report.T, report.errors))
        _say(f"eps = {csvio.fmt(cfg.eps)}")
        _say(f"discrepancy = {csvio.fmt(report.discrepancy)}")


def cmd_verify(args, cfg):
    only = None if not args.only else {int(tok) for tok in args.only.split(",")}
    results = acceptance.run_all(cfg.seed, only)
    for res in results:
        print(res.line(), flush=True)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_NUMERICAL if failed else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="thinfilm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, keys, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--output-dir", default=None)
        _add_options(sp, keys)
        sp.set_defaults(func=func)
        return sp

    hp = ("g", "M", "K")
    add("fixed-points", cmd_fixed_points, hp, "fixed points and energy interval")
    for name, func, text in (("period", cmd_period, "orbit period at an energy level"),
                             ("phase-portrait", cmd_phase_portrait, "orbit samples v, w, t")):
        sp = add(name, func, hp + ("dt",), text)
        sp.add_argument("--energy", type=float, default=None)
        sp.add_argument("--energy-fraction", type=float, default=0.5,
                        help="position in (E_min, E_max) when --energy is absent")
        if name == "phase-portrait":
            sp.add_argument("--periods", type=float, default=1.0)
    add("solve", cmd_solve, ("g", "k0", "M", "amplitude", "N", "max_modes", "tol"),
        "Newton solve for a periodic steady state")
    sp = add("continue-branch", cmd_continue_branch,
             ("g", "k0", "ds", "ds_max", "max_steps", "rupture_threshold", "N", "max_modes"),
             "trace the bifurcation branch")
    sp.add_argument("--no-eigs", action="store_true", help="skip leading eigenvalues")
    sp = add("spectrum", cmd_spectrum, ("g", "k0", "M"), "linearised spectrum")
    sp.add_argument("--branch-file", default=None, help="branch.csv written by continue-branch")
    sp.add_argument("--point-index", type=int, default=1)
    sp.add_argument("--bloch-sweep", action="store_true")
    sp.add_argument("--n-bloch", type=int, default=8)
    sp.add_argument("--n-eigs", type=int, default=10)
    add("evolve", cmd_evolve, ("g", "k0", "M", "grid", "dt", "t_end", "snapshot_every", "amplitude"),
        "time-dependent thin-film evolution")
    sp = add("amplitude", cmd_amplitude, ("g", "eps", "grid", "dt", "t_end", "snapshot_every"),
             "amplitude equation run and comparison with the full equation")
    sp.add_argument("--length", type=float, default=4.0 * np.pi)
    sp.add_argument("--no-compare", action="store_true")
    sp = add("verify", cmd_verify, ("seed",), "run the acceptance suite")
    sp.add_argument("--only", default=None, help="comma-separated criterion numbers")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        code = args.func(args, cfg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ThinFilmError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())

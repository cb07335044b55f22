"""Command-line surface.

Every figure-level quantity of the simulation is reachable as a subcommand
emitting CSV (with a ``#`` metadata header echoing the effective
configuration) or JSON for channel tensors.  Flags mirror SimConfig field
names verbatim; ``--config FILE`` loads the same names from a flat
``key = value`` file, and flags win.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 precondition
violation.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import purify
from .bell import QubitPairState, bell_diag_state, rho_psi, werner_state
from .channels import load_channel, save_channel
from .config import SimConfig, build_config, load_config_file
from .errors import CavpurifyError, ConfigError, NumericalError, PreconditionError
from .fock import QuadratureSpec
from .jc import evolve_sequential, validate_regime
from .open_system import extract_channel
from .postselect import fidelity_star, ideal_m, quadrature_pdf, success_probability, w2_kraus

_GROUND = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)


def _write_lines(path, lines):
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _fmt(value) -> str:
    return repr(float(value))


def _header(config: SimConfig, command: str, extra=()):
    lines = [f"# cavpurify {command}", "# provenance: computed by cavpurify oracles"]
    lines += config.header_lines()
    lines += list(extra)
    return lines


def _evolved_ground_state(config: SimConfig):
    return evolve_sequential(
        _GROUND, config.alpha, config.gtau1, config.resolved_gtau2, config.resolved_n_f
    )


def cmd_qfunc(config: SimConfig, args) -> int:
    """Husimi Q of the field after both interactions, on an (x, p) grid."""
    from .fock import husimi_grid

    state = _evolved_ground_state(config)
    center = np.sqrt(2.0 * config.nbar)
    x0 = args.x_min if args.x_min is not None else center - 5.0
    x1 = args.x_max if args.x_max is not None else center + 3.0
    p0 = args.p_min if args.p_min is not None else -6.0
    p1 = args.p_max if args.p_max is not None else 6.0
    xs = np.arange(x0, x1 + args.grid_step / 2, args.grid_step)
    ps = np.arange(p0, p1 + args.grid_step / 2, args.grid_step)
    q = husimi_grid(state.components(), xs, ps)
    cell = args.grid_step**2 / 2.0  # d^2 beta = dx dp / 2
    lines = _header(config, "qfunc", [f"# grid_integral = {_fmt(q.sum() * cell)}"])
    lines.append("x,p,Q")
    for ix, x in enumerate(xs):
        for ip, p in enumerate(ps):
            lines.append(f"{_fmt(x)},{_fmt(p)},{_fmt(q[ix, ip])}")
    _write_lines(config.output, lines)
    return 0


def cmd_quad_dist(config: SimConfig, args) -> int:
    """Quadrature distribution P(p) of the evolved field."""
    state = _evolved_ground_state(config)
    half = np.sqrt(2.0 * config.nbar) + 6.0
    p0 = args.p_min if args.p_min is not None else -half
    p1 = args.p_max if args.p_max is not None else half
    grid = np.arange(p0, p1 + config.dp / 2, config.dp)
    pdf = quadrature_pdf(state, grid, theta=config.resolved_theta)
    ph = success_probability(
        state, window=config.p_window, dp=config.dp, theta=config.resolved_theta
    )
    lines = _header(config, "quad-dist", [f"# window_integral_P_H = {_fmt(ph)}"])
    lines.append("p,P")
    lines += [f"{_fmt(p)},{_fmt(v)}" for p, v in zip(grid, pdf)]
    _write_lines(config.output, lines)
    return 0


def cmd_fstar_sweep(config: SimConfig, args) -> int:
    """F*(g tau) for ground-state qubits over a list of nbar values."""
    nbars = [float(v) for v in args.nbar_list.split(",")]
    gtaus = np.arange(args.gtau_min, args.gtau_max + args.gtau_step / 2, args.gtau_step)
    spec = QuadratureSpec(config.resolved_theta, config.resolved_p)
    lines = _header(config, "fstar-sweep")
    lines.append("nbar,gtau,fstar")
    for nbar in nbars:
        sub = build_config(config.as_dict(), {"nbar": nbar})
        n_f = sub.resolved_n_f + args.pad
        if not any(validate_regime(nbar, gt).valid for gt in gtaus):
            print(f"# note: no gtau in range satisfies the validity window at nbar={nbar}",
                  file=sys.stderr)
        for gt in gtaus:
            state = evolve_sequential(_GROUND, sub.alpha, gt, gt, n_f)
            fs = fidelity_star(state, spec, _GROUND, sub.phi)
            lines.append(f"{_fmt(nbar)},{_fmt(gt)},{_fmt(fs)}")
    _write_lines(config.output, lines)
    return 0


def _parse_initial(text: str) -> QubitPairState:
    kind, _, rest = text.partition(":")
    try:
        values = [float(v) for v in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ConfigError(f"bad --initial value {text!r}") from exc
    if kind == "werner" and len(values) == 1:
        return werner_state(values[0])
    if kind == "psi" and len(values) == 1:
        return rho_psi(values[0])
    if kind == "bd" and len(values) == 4:
        return bell_diag_state(*values)
    raise ConfigError(
        f"--initial must be werner:F, psi:F or bd:F,F1,F2,F3, got {text!r}"
    )


def _resolve_backend(config: SimConfig, args):
    if args.backend == "ideal":
        return ideal_m(config.phi)
    if args.backend == "kraus":
        return w2_kraus(config)
    if args.backend == "channel-file":
        if not args.channel_file:
            raise ConfigError("--backend channel-file requires --channel-file PATH")
        return load_channel(args.channel_file)
    raise ConfigError(f"unknown backend {args.backend!r}")


def cmd_purify(config: SimConfig, args) -> int:
    """Iterate a purification protocol and tabulate the trajectory."""
    initial = _parse_initial(args.initial)
    backend = _resolve_backend(config, args)
    kwargs = {"iterations": args.iterations} if args.target is None else {"target": args.target}
    traj = purify.iterate(
        args.protocol,
        initial,
        backend,
        apply_final_rotation=not args.skip_final_rotation,
        **kwargs,
    )
    lines = _header(
        config,
        "purify",
        [f"# protocol = {args.protocol}", f"# backend = {args.backend}",
         f"# initial = {args.initial}"],
    )
    lines.append("iter,F,P_step,cumulative_pairs")
    for pt in traj.points:
        lines.append(
            f"{pt.iteration},{_fmt(pt.fidelity)},{_fmt(pt.success_probability)},"
            f"{_fmt(pt.cumulative_pairs)}"
        )
    _write_lines(config.output, lines)
    return 0


def cmd_channel(config: SimConfig, args) -> int:
    """Extract the lossy two-qubit channel and dump it as JSON with a validity report."""
    chan = extract_channel(config)
    report = chan.validity_report()
    if config.output is None:
        payload = chan.to_json_dict(metadata=config.as_dict())
        sys.stdout.write(json.dumps(payload, indent=1) + "\n")
    else:
        save_channel(chan, config.output, metadata=config.as_dict())
    sys.stderr.write(
        "validity: hermiticity_residual={hermiticity_residual:.3e} "
        "choi_min_eigenvalue={choi_min_eigenvalue:.3e} "
        "trace_weight={trace_weight:.6e}\n".format(**report)
    )
    return 0


def cmd_resources(config: SimConfig, args) -> int:
    """Iteration count and expected pair cost to reach a target fidelity."""
    rows = purify.resource_table(args.protocol, args.F0, args.target)
    lines = _header(
        config,
        "resources",
        [f"# protocol = {args.protocol}", f"# F0 = {args.F0}", f"# target = {args.target}"],
    )
    lines.append("N,F_N,NQ")
    for row in rows:
        lines.append(f"{row.iteration},{_fmt(row.fidelity)},{_fmt(row.pairs)}")
    _write_lines(config.output, lines)
    return 0


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--nbar", type=float)
    parser.add_argument("--phi", type=float)
    parser.add_argument("--gtau1", type=float)
    parser.add_argument("--gtau2", type=float)
    parser.add_argument("--gtau_f", type=float)
    parser.add_argument("--theta", type=float)
    parser.add_argument("--p", type=float)
    parser.add_argument("--p_window", type=float, nargs=2, metavar=("LO", "HI"))
    parser.add_argument("--kappa", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--n_T", type=float)
    parser.add_argument("--n_f", type=int)
    parser.add_argument("--dp", type=float)
    parser.add_argument("--rtol", type=float)
    parser.add_argument("--atol", type=float)
    parser.add_argument("--integrator", choices=["rk45", "krylov"])
    parser.add_argument("--workers", type=int)
    parser.add_argument("--output", help="output path (default stdout)")


def _config_from_args(args) -> SimConfig:
    file_values = load_config_file(args.config) if args.config else {}
    names = [
        "nbar", "phi", "gtau1", "gtau2", "gtau_f", "theta", "p", "p_window",
        "kappa", "gamma", "n_T", "n_f", "dp", "rtol", "atol", "integrator",
        "workers", "output",
    ]
    overrides = {}
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = tuple(value) if name == "p_window" else value
    return build_config(file_values, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavpurify", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    q = sub.add_parser("qfunc", help="Husimi Q of the evolved field on a grid")
    q.add_argument("--x-min", type=float, dest="x_min")
    q.add_argument("--x-max", type=float, dest="x_max")
    q.add_argument("--p-min", type=float, dest="p_min")
    q.add_argument("--p-max", type=float, dest="p_max")
    q.add_argument("--grid-step", type=float, default=0.05)
    q.set_defaults(func=cmd_qfunc)

    d = sub.add_parser("quad-dist", help="quadrature distribution P(p)")
    d.add_argument("--p-min", type=float, dest="p_min")
    d.add_argument("--p-max", type=float, dest="p_max")
    d.set_defaults(func=cmd_quad_dist)

    f = sub.add_parser("fstar-sweep", help="F* against g*tau for several nbar")
    f.add_argument("--nbar-list", default="10,50,100,200")
    f.add_argument("--gtau-min", type=float, default=0.2)
    f.add_argument("--gtau-max", type=float, default=4.0)
    f.add_argument("--gtau-step", type=float, default=0.1)
    f.add_argument("--pad", type=int, default=40,
                   help="extra Fock levels above the automatic cutoff")
    f.set_defaults(func=cmd_fstar_sweep)

    p = sub.add_parser("purify", help="run a purification protocol")
    p.add_argument("--protocol", choices=["aB", "aD"], required=True)
    p.add_argument("--backend", choices=["ideal", "kraus", "channel-file"], default="ideal")
    p.add_argument("--channel-file")
    p.add_argument("--initial", default="psi:0.7", help="werner:F | psi:F | bd:F,F1,F2,F3")
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--target", type=float)
    p.add_argument("--skip-final-rotation", action="store_true",
                   help="drop the stabilizing final rotation of protocol aD")
    p.set_defaults(func=cmd_purify)

    c = sub.add_parser("channel", help="extract the lossy channel tensor as JSON")
    c.set_defaults(func=cmd_channel)

    r = sub.add_parser("resources", help="pair cost to reach a target fidelity")
    r.add_argument("--protocol", choices=["aB", "aD"], default="aD")
    r.add_argument("--F0", type=float, required=True)
    r.add_argument("--target", type=float, required=True)
    r.set_defaults(func=cmd_resources)

    for sp in (q, d, f, p, c, r):
        _add_config_flags(sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        return args.func(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except PreconditionError as exc:
        print(f"precondition violation: {exc}", file=sys.stderr)
        return 4
    except CavpurifyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""``discordlab`` command-line interface.

Exit codes: 0 success, 1 input error, 2 optimizer non-convergence,
3 inconclusive theorem verdict.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .correlations import OptimizerOptions, diagonal_discord, discord
from .dynamics import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    BipartiteHamiltonian,
    ExchangeModelParams,
    exchange_propagator,
    exchange_sweep,
    flow_discord_ratio,
    summarize_sweep,
    theorem_check,
)
from .experiment import (
    ExperimentConfig,
    SynthParams,
    TraceError,
    analyze_trace,
    discord_rate_from_flux,
    fitted_curve,
    load_trace,
    save_trace,
    synthesize_trace,
)
from .states import K_B_SI, DensityMatrix, StateError, pure_state
from .svg import line_plot

log = logging.getLogger("discordlab")

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class InputError(Exception):
    pass


# -- parsing helpers ----------------------------------------------------------


def _matrix_from_json(obj, dim: int | None = None) -> np.ndarray:
    """Complex matrix from nested rows of ``[re, im]`` pairs or a flat row-major list."""
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 3 and arr.shape[2] == 2:
        m = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim == 2 and arr.shape[1] == 2:
        n = int(round(math.sqrt(arr.shape[0])))
        if n * n != arr.shape[0]:
            raise InputError(f"flat entry list of length {arr.shape[0]} is not square")
        m = (arr[:, 0] + 1j * arr[:, 1]).reshape(n, n)
    else:
        raise InputError("matrix entries must be [re, im] pairs")
    if dim is not None and m.shape != (dim, dim):
        raise InputError(f"matrix shape {m.shape} does not match expected dimension {dim}")
    return m


def _floats(spec: str, n_min: int, n_max: int) -> list[float]:
    try:
        vals = [float(x) for x in spec.split(",")]
    except ValueError:
        raise InputError(f"could not parse numbers from {spec!r}") from None
    if not n_min <= len(vals) <= n_max:
        raise InputError(f"expected {n_min}-{n_max} comma-separated numbers, got {spec!r}")
    return vals


def load_state(spec: str, boltzmann_constant: float = 1.0) -> DensityMatrix:
    """Builtin name (``builtin:...``) or path to a JSON state file."""
    if spec.startswith("builtin:"):
        name = spec[len("builtin:") :]
        if name == "bell":
            return pure_state([1, 0, 0, 1], (2, 2))
        if name == "product":
            return DensityMatrix(np.kron(np.diag([0.7, 0.3]), np.diag([0.6, 0.4])), (2, 2))
        if name == "classical":
            return DensityMatrix(np.diag([0.5, 0, 0, 0.5]), (2, 2))
        if name == "mixed":
            return DensityMatrix(np.eye(4) / 4, (2, 2))
        if name.startswith("thermal2q:"):
            ta, tb, omega, *rest = _floats(name[len("thermal2q:") :], 3, 4)
            p = ExchangeModelParams(omega=omega, gamma=1.0, t_a=ta, t_b=tb, boltzmann_constant=boltzmann_constant)
            rho = p.initial_state()
            if rest:
                u = exchange_propagator(p, rest[0])
                rho = DensityMatrix(u @ rho.mat @ u.conj().T, (2, 2))
            return rho
        raise InputError(f"unknown builtin state {name!r}")
    try:
        obj = json.loads(Path(spec).read_text())
        dims = tuple(int(d) for d in obj["dims"])
        mat = _matrix_from_json(obj["entries"], dims[0] * dims[1])
        return DensityMatrix(mat, dims)
    except (OSError, KeyError, TypeError, ValueError, InputError, StateError) as exc:
        raise InputError(f"malformed state file {spec}: {exc}") from None


def load_hamiltonian(spec: str, omega: float, gamma: float) -> BipartiteHamiltonian:
    if spec == "builtin:exchange":
        return ExchangeModelParams(omega=omega, gamma=gamma).hamiltonian()
    if spec == "builtin:local":
        h_loc = -0.5 * omega * SIGMA_Z
        return BipartiteHamiltonian(h_loc + 0.3 * SIGMA_X, h_loc + 0.2 * SIGMA_Y)
    if spec.startswith("builtin:"):
        raise InputError(f"unknown builtin Hamiltonian {spec!r}")
    try:
        obj = json.loads(Path(spec).read_text())
        da, db = (int(d) for d in obj["dims"])
        h_int = obj.get("h_int")
        return BipartiteHamiltonian(
            _matrix_from_json(obj["h_a"], da),
            _matrix_from_json(obj["h_b"], db),
            None if h_int is None else _matrix_from_json(h_int, da * db),
        )
    except (OSError, KeyError, TypeError, ValueError, InputError) as exc:
        raise InputError(f"malformed Hamiltonian file {spec}: {exc}") from None


def _t_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise InputError(f"--t-grid must be start:stop:num, got {spec!r}")
    try:
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InputError(f"--t-grid must be start:stop:num, got {spec!r}") from None
    if num < 1 or stop < start or start < 0:
        raise InputError(f"bad --t-grid {spec!r}")
    return np.linspace(start, stop, num)


def _boltzmann(args) -> float:
    return K_B_SI if args.units == "si" else 1.0


# -- output helpers -----------------------------------------------------------


def _clean(obj):
    """Replace non-finite floats with None so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2) + "\n")


def _write_manifest(args, argv, outputs: list[str]) -> None:
    params = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "tool": "discordlab",
        "version": __version__,
        "command": args.command,
        "argv": list(argv),
        "parameters": params,
        "outputs": outputs,
    }
    _write_json(Path(args.out) / f"manifest_{args.command}.json", manifest)


def _emit(obj) -> None:
    print(json.dumps(_clean(obj), indent=2))


# -- subcommands --------------------------------------------------------------


def cmd_discord(args, argv) -> int:
    rho = load_state(args.state, _boltzmann(args))
    if not rho.is_bipartite:
        raise InputError("state must be bipartite")
    opts = OptimizerOptions(seed=args.seed)
    if args.kind == "diag":
        report = diagonal_discord(rho, args.direction, opts)
    else:
        report = discord(rho, args.direction, opts)
    out = report.to_dict()
    _emit(out)
    out_dir = Path(args.out)
    _write_json(out_dir / "discord_report.json", out)
    _write_manifest(args, argv, ["discord_report.json"])
    return EXIT_OK if report.converged else EXIT_NONCONVERGED


def cmd_exchange_sweep(args, argv) -> int:
    p = ExchangeModelParams(args.omega, args.gamma, args.ta, args.tb, _boltzmann(args))
    opts = OptimizerOptions(seed=args.seed)
    points = exchange_sweep(p, args.points, optimized=not args.no_opt, opts=opts)
    summary = summarize_sweep(points, p)
    out_dir = Path(args.out)
    with (out_dir / "exchange_sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma_t", "E_A", "E_B", "d_diag_nats", "d_opt_nats", "mutual_info_nats"])
        for pt in points:
            d_opt = "nan" if pt.d_opt_ba is None else repr(pt.d_opt_ba)
            w.writerow([repr(pt.gamma_t), repr(pt.e_a), repr(pt.e_b), repr(pt.d_diag_ba), d_opt, repr(pt.mutual_info)])
    summ = {"parameters": {"t_a": args.ta, "t_b": args.tb, "omega": args.omega, "gamma": args.gamma, "points": args.points}}
    summ.update(summary.to_dict())
    _write_json(out_dir / "exchange_sweep_summary.json", summ)
    x = np.linspace(0.0, np.pi, len(points))
    e_b = np.array([pt.e_b - points[0].e_b for pt in points])
    d = np.array([pt.d_diag_ba for pt in points])
    scale = lambda v: v / np.max(np.abs(v)) if np.max(np.abs(v)) > 0 else v  # noqa: E731
    svg = line_plot(
        [("E_B - E_B(0) (normalized)", x, scale(e_b)), ("D_diag(B->A) (normalized)", x, scale(d))],
        title="Exchange model: energy transfer and diagonal discord",
        xlabel="gamma t",
        ylabel="normalized value",
    )
    (out_dir / "exchange_sweep.svg").write_text(svg)
    _write_manifest(args, argv, ["exchange_sweep.csv", "exchange_sweep_summary.json", "exchange_sweep.svg"])
    _emit(summ)
    return EXIT_OK


def cmd_flow_check(args, argv) -> int:
    if args.ta == args.tb:
        raise InputError("flow check needs T_A != T_B (the coefficient is singular)")
    k = _boltzmann(args)
    if args.omega is not None:
        omega = args.omega
    else:
        # SI: level spacing comparable to kT so the populations are not frozen
        omega = k * 0.5 * (args.ta + args.tb) if args.units == "si" else 1.0
    gamma = args.gamma if args.gamma is not None else omega
    p = ExchangeModelParams(omega, gamma, args.ta, args.tb, k)
    res = flow_discord_ratio(p, levels=args.levels)
    out = {
        "t_a": args.ta,
        "t_b": args.tb,
        "omega": omega,
        "gamma": gamma,
        "boltzmann_constant": k,
        "units": args.units,
        "coefficient_unit": "J per nat" if args.units == "si" else "energy units per nat",
        "tolerance": args.tol,
        "passed": res.relative_error <= args.tol,
    }
    out.update(res.to_dict())
    _write_json(Path(args.out) / "flow_check.json", out)
    _write_manifest(args, argv, ["flow_check.json"])
    _emit(out)
    return EXIT_OK if out["passed"] else EXIT_INPUT


def cmd_theorem_check(args, argv) -> int:
    k = _boltzmann(args)
    h = load_hamiltonian(args.hamiltonian, args.omega, args.gamma)
    if args.state is None:
        if h.dims != (2, 2):
            raise InputError("--state is required for non-qubit Hamiltonians")
        spec = f"builtin:thermal2q:{args.ta},{args.tb},{args.omega}"
    else:
        spec = args.state
    rho0 = load_state(spec, k)
    if rho0.dims != h.dims:
        raise InputError(f"state dims {rho0.dims} do not match Hamiltonian dims {h.dims}")
    verdict = theorem_check(rho0, h, _t_grid(args.t_grid), OptimizerOptions(seed=args.seed))
    out = verdict.to_dict()
    _write_json(Path(args.out) / "theorem_verdict.json", out)
    _write_manifest(args, argv, ["theorem_verdict.json"])
    _emit(out)
    if verdict.verdict in ("discord_generated", "product_evolution_verified"):
        return EXIT_OK
    return EXIT_INCONCLUSIVE


def _synth_params(args) -> SynthParams:
    return SynthParams(
        t_c=args.tc,
        tau=args.tau,
        delta_t0=args.delta_t0,
        substrate_temperature=args.tb,
        noise_sigma=args.noise,
        seed=args.seed,
        n=args.samples,
        duration=args.duration,
    )


def cmd_experiment(args, argv) -> int:
    out_dir = Path(args.out)
    config = ExperimentConfig(args.theta, args.heat_capacity, args.tb)
    if args.flux is not None:
        if args.ta is None:
            raise InputError("--flux requires --ta")
        report = discord_rate_from_flux(args.flux, args.ta, args.tb, config.boltzmann_constant, args.flux_kind)
        _write_json(out_dir / "discord_rate_report.json", report.to_dict())
        _write_manifest(args, argv, ["discord_rate_report.json"])
        _emit(report.to_dict())
        return EXIT_OK
    if args.synthesize:
        trace = synthesize_trace(_synth_params(args))
    elif args.trace:
        trace = load_trace(args.trace, args.peak_delta_t, args.time_unit)
    else:
        raise InputError("one of --trace, --synthesize or --flux is required")
    try:
        t_c, fit, report = analyze_trace(trace, config)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    curve = fitted_curve(trace, t_c, fit, config)
    with (out_dir / "experiment_fit.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "temp_fit_K"])
        for a, b in zip(trace.seconds, curve):
            if math.isfinite(b):
                w.writerow([repr(float(a)), repr(float(b))])
    temps = trace.temperatures(config.substrate_temperature)
    svg = line_plot(
        [("measured", trace.seconds * 1e12, temps), ("lumped-film fit", trace.seconds * 1e12, curve)],
        title="Surface temperature and Fourier-law tail fit",
        xlabel="time (ps)",
        ylabel="T_A (K)",
        markers=[False, True],
    )
    (out_dir / "experiment.svg").write_text(svg)
    _write_json(out_dir / "discord_rate_report.json", report.to_dict())
    _write_manifest(args, argv, ["discord_rate_report.json", "experiment_fit.csv", "experiment.svg"])
    _emit(report.to_dict())
    return EXIT_OK


def cmd_synth_data(args, argv) -> int:
    trace = synthesize_trace(_synth_params(args))
    path = Path(args.output) if args.output else Path(args.out) / "synthetic_trace.csv"
    save_trace(trace, path)
    _write_manifest(args, argv, [str(path)])
    _emit({"path": str(path), "samples": int(trace.t.size)})
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def _add_synth_flags(p):
    p.add_argument("--tc", type=float, default=60e-12, help="crossing time of the synthetic trace (s)")
    p.add_argument("--tau", type=float, default=1e-9, help="tail decay time (s)")
    p.add_argument("--delta-t0", type=float, default=0.2, help="temperature rise at the crossing (K)")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma (K)")
    p.add_argument("--samples", type=int, default=4000)
    p.add_argument("--duration", type=float, default=6e-9, help="trace length (s)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="discordlab_out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--units", choices=["si", "natural"], default="natural")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="discordlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discord", parents=[common], help="discord of a bipartite state")
    p.add_argument("--state", required=True, help="builtin:bell|product|classical|mixed|thermal2q:TA,TB,omega[,t] or JSON file")
    p.add_argument("--direction", choices=["a2b", "b2a"], default="b2a")
    p.add_argument("--kind", choices=["diag", "opt"], default="opt")
    p.set_defaults(func=cmd_discord)

    p = sub.add_parser("exchange-sweep", parents=[common], help="exchange-model trajectory over gamma t in [0, pi]")
    p.add_argument("--ta", type=float, default=2.0)
    p.add_argument("--tb", type=float, default=1.0)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--no-opt", action="store_true", help="skip the optimized-discord column")
    p.set_defaults(func=cmd_exchange_sweep)

    p = sub.add_parser("flow-check", parents=[common], help="short-time heat flow vs diagonal discord")
    p.add_argument("--ta", type=float, required=True)
    p.add_argument("--tb", type=float, required=True)
    p.add_argument("--omega", type=float, default=None, help="level spacing (default 1, or k(T_A+T_B)/2 J with --units si)")
    p.add_argument("--gamma", type=float, default=None, help="exchange rate (default omega)")
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_flow_check)

    p = sub.add_parser("theorem-check", parents=[common], help="does the evolution generate two-way discord?")
    p.add_argument("--hamiltonian", default="builtin:exchange", help="builtin:exchange|builtin:local or JSON file")
    p.add_argument("--state", default=None, help="initial state (default: thermal product at --ta/--tb)")
    p.add_argument("--ta", type=float, default=2.0)
    p.add_argument("--tb", type=float, default=1.0)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--t-grid", default="0:3:31", help="start:stop:num")
    p.set_defaults(func=cmd_theorem_check)

    p = sub.add_parser("experiment", parents=[common], help="discord-production rate from a temperature trace")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--trace", help="CSV with header time_s,temp_K or time_s,norm")
    src.add_argument("--synthesize", action="store_true")
    src.add_argument("--flux", type=float, default=None, help="use this flux/conductance directly")
    p.add_argument("--flux-kind", choices=["flux", "conductance"], default="flux")
    p.add_argument("--ta", type=float, default=None, help="film temperature for --flux (K)")
    p.add_argument("--peak-delta-T", dest="peak_delta_t", type=float, default=None)
    p.add_argument("--time-unit", type=float, default=1.0, help="seconds per trace time unit")
    p.add_argument("--theta", type=float, default=70e-9, help="film thickness (m)")
    p.add_argument("--heat-capacity", type=float, default=2.42e6, help="volumetric heat capacity (J m^-3 K^-1)")
    p.add_argument("--tb", type=float, default=300.0, help="substrate temperature (K)")
    _add_synth_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth-data", parents=[common], help="write a synthetic trace CSV")
    p.add_argument("--tb", type=float, default=300.0)
    p.add_argument("--output", default=None)
    _add_synth_flags(p)
    p.set_defaults(func=cmd_synth_data)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    Path(args.out).mkdir(parents=True, exist_ok=True)
    try:
        return args.func(args, argv)
    except (InputError, TraceError, StateError, ValueError) as exc:
        print(f"discordlab {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

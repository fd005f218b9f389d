"""Command-line entry point for reproducible runs.

Configuration comes from an optional JSON file (--config) with flag
overrides; flags always win.  Every command writes deterministic output:
rerunning with the same configuration reproduces a byte-identical data
section (only the '# generated=' header line changes).

Exit codes: 0 success, 2 validation error, 3 failure threshold not reached,
4 conformance failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analysis, oracle, protocol
from ._csvio import render_csv, write_text
from .chain_core import ChainSpec, build_sector_hamiltonian, diagonalize, transition_amplitudes
from .noise import NoiseParams
from .scheduler import Schedule, ThresholdNotReached, greedy_optimize, greedy_run, uniform_schedule

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_THRESHOLD = 3
EXIT_CONFORMANCE = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualrail",
        description="Conclusive state transfer through parallel spin chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--n", type=int, help="chain length")
        p.add_argument("--j-kelvin", type=float, dest="j_kelvin",
                       help="coupling J/k_B in Kelvin (enables ns columns)")
        p.add_argument("--delta", type=float, help="XXZ anisotropy (default 1)")
        p.add_argument("--b-field", type=float, dest="b_field", help="uniform z-field")
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("amplitude", help="end-to-end transfer probability over a time grid")
    common(p)
    p.add_argument("--t-max", type=float, dest="t_max", help="grid end, natural units")
    p.add_argument("--dt", type=float, help="grid step, natural units (default 0.01)")

    p = sub.add_parser("protocol", help="run the repeated-measurement protocol")
    common(p)
    p.add_argument("--schedule", help="'greedy', 'uniform', or a schedule JSON file")
    p.add_argument("--l-max", type=int, dest="l_max", help="number of measurements")
    p.add_argument("--p-target", type=float, dest="p_target",
                   help="stop when P(l) reaches this value (greedy only)")
    p.add_argument("--gamma", type=float, help="symmetric damping rate, natural units")
    p.add_argument("--gamma-ns", type=float, dest="gamma_ns",
                   help="symmetric damping rate in 1/ns (needs --j-kelvin)")
    p.add_argument("--gamma1-ns", type=float, dest="gamma1_ns",
                   help="rail-1 damping rate in 1/ns (needs --j-kelvin)")
    p.add_argument("--gamma2-ns", type=float, dest="gamma2_ns",
                   help="rail-2 damping rate in 1/ns (needs --j-kelvin)")

    p = sub.add_parser("optimize", help="emit a greedily optimized schedule as JSON")
    common(p)
    p.add_argument("--l-max", type=int, dest="l_max", help="number of intervals")

    p = sub.add_parser("fit", help="power-law fits of the scaling laws")
    common(p)
    p.add_argument("--fit", choices=("peak", "time"), help="which scaling law")

    p = sub.add_parser("figure", help="emit a figure dataset as CSV")
    common(p)
    p.add_argument("--fig", type=int, choices=(2, 3, 4), help="figure id")

    p = sub.add_parser("oracle-check", help="run the brute-force conformance suite")
    common(p)
    p.add_argument("--inject-sign-error", action="store_true",
                   help="debug: flip the hopping sign to prove the checks have power")

    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    config = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError("config file must hold a JSON object")
    merged = dict(config)
    for key, value in vars(args).items():
        if key in ("config", "command"):
            continue
        if value is not None and value is not False:
            merged[key] = value
    return merged


def _chain_spec(cfg: dict) -> ChainSpec:
    if "n" not in cfg:
        raise ValueError("chain length required (--n)")
    return ChainSpec(
        n_sites=int(cfg["n"]),
        anisotropy=float(cfg.get("delta", 1.0)),
        field=float(cfg.get("b_field", 0.0)),
    )


def _emit(text: str, out) -> None:
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def _time_columns(cfg: dict):
    """(header suffix, converter) for the optional ns column."""
    j_kelvin = cfg.get("j_kelvin")
    if j_kelvin is None:
        return (), lambda t: ()
    j_kelvin = float(j_kelvin)
    return ("_ns",), lambda t: (analysis.natural_time_to_ns(t, j_kelvin),)


def _cmd_amplitude(cfg: dict) -> int:
    spec = _chain_spec(cfg)
    dec = diagonalize(build_sector_hamiltonian(spec))
    dt = float(cfg.get("dt", 0.01))
    t_max = float(cfg.get("t_max", 1.5 * spec.n_sites))
    if dt <= 0 or t_max <= 0:
        raise ValueError("t grid needs positive --dt and --t-max")
    ts = np.arange(0.0, t_max + 0.5 * dt, dt)
    probs = np.abs(transition_amplitudes(dec, spec.n_sites, 1, ts)) ** 2
    ns_suffix, to_ns = _time_columns(cfg)
    columns = ("t_natural", *(f"t{s}" for s in ns_suffix), "p_transfer")
    rows = [(float(t), *to_ns(float(t)), float(p)) for t, p in zip(ts, probs)]
    meta = {"command": "amplitude", "n": spec.n_sites, "delta": spec.anisotropy,
            "b_field": spec.field}
    _emit(render_csv(columns, rows, meta), cfg.get("out"))
    return EXIT_OK


def _resolve_noise(cfg: dict):
    """NoiseParams from natural or laboratory-unit flags, or None."""
    j_kelvin = cfg.get("j_kelvin")
    if cfg.get("gamma1_ns") is not None or cfg.get("gamma2_ns") is not None:
        if cfg.get("gamma1_ns") is None or cfg.get("gamma2_ns") is None or j_kelvin is None:
            raise ValueError("asymmetric rates need --gamma1-ns, --gamma2-ns and --j-kelvin")
        return NoiseParams(
            gamma_1=analysis.gamma_ns_to_natural(float(cfg["gamma1_ns"]), float(j_kelvin)),
            gamma_2=analysis.gamma_ns_to_natural(float(cfg["gamma2_ns"]), float(j_kelvin)),
        )
    if cfg.get("gamma_ns") is not None:
        if j_kelvin is None:
            raise ValueError("--gamma-ns needs --j-kelvin")
        return NoiseParams(analysis.gamma_ns_to_natural(float(cfg["gamma_ns"]), float(j_kelvin)))
    if cfg.get("gamma") is not None:
        return NoiseParams(float(cfg["gamma"]))
    return None


def _cmd_protocol(cfg: dict) -> int:
    spec = _chain_spec(cfg)
    dec = diagonalize(build_sector_hamiltonian(spec))
    noise = _resolve_noise(cfg)
    source = str(cfg.get("schedule", "greedy"))
    l_max = int(cfg.get("l_max", 20))
    p_target = cfg.get("p_target")

    if source == "greedy":
        run = greedy_run(
            dec,
            l_max=l_max,
            p_target=float(p_target) if p_target is not None else None,
            gamma=noise.gamma if noise is not None else 0.0,
        )
        records = run.records
        if p_target is not None and records[-1].joint_failure > float(p_target):
            raise ThresholdNotReached(
                float(p_target), l_max, records[-1].joint_failure, records[-1].absolute_time
            )
    else:
        if p_target is not None:
            raise ValueError("--p-target requires --schedule greedy")
        if source == "uniform":
            schedule = uniform_schedule(spec.n_sites, l_max)
        else:
            schedule = Schedule.from_json(source)
        records = protocol.run_schedule(dec, schedule, noise=noise).records

    ns_suffix, to_ns = _time_columns(cfg)
    columns = (
        "l",
        "tau_l_natural", *(f"tau_l{s}" for s in ns_suffix),
        "t_abs_natural", *(f"t_abs{s}" for s in ns_suffix),
        "step_success", "P_l",
    )
    rows = [
        (r.index, r.interval, *to_ns(r.interval), r.absolute_time, *to_ns(r.absolute_time),
         r.step_success, r.joint_failure)
        for r in records
    ]
    meta = {"command": "protocol", "n": spec.n_sites, "schedule": source,
            "gamma_natural": noise.gamma_1 if noise is not None else 0.0}
    if noise is not None and not noise.symmetric:
        meta["gamma2_natural"] = noise.gamma_2
    _emit(render_csv(columns, rows, meta), cfg.get("out"))
    return EXIT_OK


def _cmd_optimize(cfg: dict) -> int:
    spec = _chain_spec(cfg)
    dec = diagonalize(build_sector_hamiltonian(spec))
    schedule = greedy_optimize(dec, l_max=int(cfg.get("l_max", 20)))
    text = schedule.to_json()
    _emit(text + "\n", cfg.get("out"))
    return EXIT_OK


def _cmd_fit(cfg: dict) -> int:
    kind = cfg.get("fit", "peak")
    if kind == "peak":
        fit = analysis.fit_peak_scaling(cfg.get("n_values", (20, 50, 100, 150, 200)))
    elif kind == "time":
        fit = analysis.fit_time_scaling(
            cfg.get("n_values", analysis.FIG3_N_SET),
            cfg.get("p_values", analysis.FIG3_P_SET),
        )
    else:
        raise ValueError(f"unknown fit kind {kind!r}")
    payload = {
        "fit": kind,
        "prefactor": fit.prefactor,
        "exponent": fit.exponent,
        "residual_rms": fit.residual_rms,
        "sample_range": list(fit.sample_range),
    }
    _emit(json.dumps(payload, indent=2) + "\n", cfg.get("out"))
    return EXIT_OK


def _cmd_figure(cfg: dict) -> int:
    if "fig" not in cfg:
        raise ValueError("figure id required (--fig 2|3|4)")
    dataset = analysis.reproduce_figure(int(cfg["fig"]))
    _emit(dataset.to_csv(), cfg.get("out"))
    return EXIT_OK


def _cmd_oracle_check(cfg: dict) -> int:
    report = oracle.conformance_report(
        inject_sign_error=bool(cfg.get("inject_sign_error", False))
    )
    text = json.dumps(report, indent=2) + "\n"
    _emit(text, cfg.get("out"))
    return EXIT_OK if report["passed"] else EXIT_CONFORMANCE


_COMMANDS = {
    "amplitude": _cmd_amplitude,
    "protocol": _cmd_protocol,
    "optimize": _cmd_optimize,
    "fit": _cmd_fit,
    "figure": _cmd_figure,
    "oracle-check": _cmd_oracle_check,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        return _COMMANDS[args.command](cfg)
    except ThresholdNotReached as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THRESHOLD
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Command-line interface.

Every command consumes one JSON config (defaults merged with an optional
file and ``--set`` overrides, unknown keys rejected by path) and emits
either CSV (sweeps, time series) or JSON (pole tables, reports).  Output
is deterministic: floats are printed in scientific notation with 17
significant digits, lines end with a bare newline, and each artifact
carries the SHA-256 of the effective config that produced it.

Exit codes: 0 success, 2 config error, 3 numerical or domain error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import barrier_transmission as bt
from . import closed_evolution as ce
from . import numerics
from . import open_system as osys
from .core import (ConstantForce, DeltaKick, GaussianPacket, HarmonicForce,
                   SystemParams, TabulatedForce, ZeroForce)
from .numerics import integrate_adaptive


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "system": {"omega": 1.0, "hbar": 1.0},
    "packet": {"x0": 0.0, "p0": 0.0, "sigma": 1.0},
    "force": {
        "kind": "zero",
        "amplitude": 0.0,
        "omega0": 1.0,
        "momentum": 0.0,
        "time": 0.0,
        "times": [],
        "values": [],
    },
    "bath": {"gamma": 0.5, "omega_d": 10.0, "kT": 1.0, "noise": "occupation"},
    "grid": {"x_min": -40.0, "x_max": 40.0, "n": 4096, "dt": 0.001},
    "evolve": {"t_max": 1.5, "samples": 16},
    "wavefunction": {"x_min": -10.0, "x_max": 10.0, "points": 401},
    "kick": {"momentum": 1.0, "time": 0.0},
    "tunnel": {"epsilon": 3.0, "beta_min": 0.05, "beta_max": 0.95, "points": 19},
    "barrier": {"xi0": -0.5, "forces": [-0.2, 0.0, 0.2],
                "xi_min": -1.5, "xi_max": 1.5, "points": 121},
    "open": {"t_max": 3.0, "samples": 31},
    "boundary": {"a_min": 0.5, "a_max": 20.0, "points": 100},
    "verify": {
        "grid_times": [0.5, 1.0, 1.5],
        "grid_tolerance": 1e-3,
        "green_cases": [{"omega_d": 10.0, "gamma": 0.5},
                        {"omega_d": 2.0, "gamma": 5.0}],
        "green_horizon_factor": 5.0,
        "green_dt": 5e-4,
        "green_tolerance": 1e-6,
        "tunnel_points": [{"epsilon": 10.0, "beta": 0.3, "tolerance": 0.15},
                          {"epsilon": 30.0, "beta": 0.2, "tolerance": 0.08}],
        "windowed_omega": 0.7,
        "windowed_t": 2.0,
        "windowed_tolerance": 1e-10,
    },
}


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

def _merge(defaults, override, path=""):
    if not isinstance(override, dict):
        raise ConfigError(f"config section '{path or '<root>'}' must be an object")
    merged = {}
    for key, default_value in defaults.items():
        here = f"{path}.{key}" if path else key
        if key not in override:
            merged[key] = copy.deepcopy(default_value)
        elif isinstance(default_value, dict):
            merged[key] = _merge(default_value, override[key], here)
        elif (isinstance(default_value, list) and default_value
              and isinstance(default_value[0], dict)):
            merged[key] = [_merge(default_value[0], item, f"{here}[{i}]")
                           for i, item in enumerate(override[key])]
        else:
            merged[key] = copy.deepcopy(override[key])
    for key in override:
        if key not in defaults:
            here = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config key '{here}'")
    return merged


def _apply_override(config, assignment: str):
    if "=" not in assignment:
        raise ConfigError(f"override '{assignment}' is not of the form path=value")
    dotted, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    keys = dotted.split(".")
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown config key '{dotted}'")
        node = node[key]
    last = keys[-1]
    if not isinstance(node, dict) or last not in node:
        raise ConfigError(f"unknown config key '{dotted}'")
    node[last] = value


def load_config(config_path: str | None, overrides) -> dict:
    file_cfg = {}
    if config_path is not None:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    merged = _merge(DEFAULT_CONFIG, file_cfg)
    for assignment in overrides or ():
        _apply_override(merged, assignment)
    return merged


def config_sha256(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _build_system(config) -> SystemParams:
    sec = config["system"]
    try:
        return SystemParams(omega=float(sec["omega"]), hbar=float(sec["hbar"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"system: {exc}") from exc


def _build_packet(config) -> GaussianPacket:
    sec = config["packet"]
    try:
        return GaussianPacket(x0=float(sec["x0"]), p0=float(sec["p0"]),
                              sigma=float(sec["sigma"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"packet: {exc}") from exc


def _build_force(config):
    sec = config["force"]
    kind = sec["kind"]
    try:
        if kind == "zero":
            return ZeroForce()
        if kind == "constant":
            return ConstantForce(amplitude=float(sec["amplitude"]))
        if kind == "harmonic":
            return HarmonicForce(amplitude=float(sec["amplitude"]),
                                 omega0=float(sec["omega0"]))
        if kind == "delta_kick":
            return DeltaKick(momentum=float(sec["momentum"]),
                             kick_time=float(sec["time"]))
        if kind == "tabulated":
            return TabulatedForce(times=tuple(sec["times"]),
                                  values=tuple(sec["values"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"force: {exc}") from exc
    raise ConfigError(f"force.kind: unknown kind '{kind}'")


def _build_bath(config) -> osys.BathParams:
    sec = config["bath"]
    if sec["noise"] not in (osys.OCCUPATION, osys.SYMMETRIZED, osys.CLASSICAL):
        raise ConfigError(f"bath.noise: unknown convention '{sec['noise']}'")
    try:
        return osys.BathParams(gamma=float(sec["gamma"]),
                               omega_d=float(sec["omega_d"]),
                               kT=float(sec["kT"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bath: {exc}") from exc


def _thread_cap() -> int:
    raw = os.environ.get("INVOSC_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigError(f"INVOSC_THREADS must be an integer, got {raw!r}") from exc
    if cap < 0:
        raise ConfigError("INVOSC_THREADS must be non-negative")
    if cap == 0:
        cap = os.cpu_count() or 1
    return cap


def _map_ordered(fn, items):
    """Apply fn over items, optionally threading; output order is fixed."""
    cap = _thread_cap()
    items = list(items)
    if cap <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(cap, len(items))) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Output formatting
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return f"{float(value):.16e}"


def render_csv(header, rows, cfg_hash: str) -> str:
    lines = [f"# config-sha256: {cfg_hash}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Shared measurement helpers
# ---------------------------------------------------------------------------

def _packet_moments(ev, params, packet):
    """Quadrature norm, mean, and central variance of the evolved density."""
    width = packet.sigma * abs(ev.gamma_factor)
    lo, hi = ev.xi - 12.0 * width, ev.xi + 12.0 * width

    def density(x):
        return abs(ce.evaluate(ev, params, packet, x)) ** 2

    norm = integrate_adaptive(density, lo, hi, abs_tol=1e-13, rel_tol=1e-11).value
    mean = integrate_adaptive(lambda x: x * density(x), lo, hi,
                              abs_tol=1e-13, rel_tol=1e-11).value / norm
    var = integrate_adaptive(lambda x: (x - mean) ** 2 * density(x), lo, hi,
                             abs_tol=1e-13, rel_tol=1e-11).value / norm
    return float(norm), float(mean), float(var)


def _evolution_rows(states, params, packet):
    rows = []
    for ev in states:
        norm, _, var = _packet_moments(ev, params, packet)
        rows.append([ev.t, ev.xi, ev.xi_dot, ev.gamma_factor.real,
                     ev.gamma_factor.imag, var, norm])
    return rows


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_evolve(config, out, wavefunction_path=None) -> int:
    params = _build_system(config)
    packet = _build_packet(config)
    force = _build_force(config)
    if isinstance(force, DeltaKick):
        raise ConfigError("force.kind: delta_kick is driven by the 'kick' command")
    sec = config["evolve"]
    t_max, samples = float(sec["t_max"]), int(sec["samples"])
    if samples < 1 or t_max < 0:
        raise ConfigError("evolve: t_max must be >= 0 and samples >= 1")
    times = np.linspace(0.0, t_max, samples)
    states = _map_ordered(lambda t: ce.evolve_gaussian(params, packet, force, float(t)),
                          times)
    rows = _evolution_rows(states, params, packet)
    cfg_hash = config_sha256(config)
    header = ["t", "xi", "xi_dot", "re_gamma", "im_gamma", "variance", "norm_check"]
    _emit(render_csv(header, rows, cfg_hash), out)
    if wavefunction_path is not None:
        wsec = config["wavefunction"]
        xs = np.linspace(float(wsec["x_min"]), float(wsec["x_max"]),
                         int(wsec["points"]))
        ev = states[-1]
        psi = ce.evaluate(ev, params, packet, xs)
        wrows = [[float(x), p.real, p.imag, abs(p) ** 2] for x, p in zip(xs, psi)]
        _emit(render_csv(["x", "re_psi", "im_psi", "density"], wrows, cfg_hash),
              wavefunction_path)
    return 0


def cmd_kick(config, out) -> int:
    params = _build_system(config)
    packet = _build_packet(config)
    if config["force"]["kind"] != "zero":
        raise ConfigError("force.kind: the kick scenario runs on the "
                          "stationary barrier; set force.kind to 'zero'")
    sec = config["kick"]
    p, t1 = float(sec["momentum"]), float(sec["time"])
    if t1 < 0:
        raise ConfigError("kick.time must be non-negative")
    esec = config["evolve"]
    times = np.linspace(0.0, float(esec["t_max"]), int(esec["samples"]))

    def state_at(t):
        t = float(t)
        if t < t1:
            return ce.evolve_gaussian(params, packet, ZeroForce(), t)
        return ce.delta_kick_at(params, packet, p, t1, t)

    states = _map_ordered(state_at, times)
    rows = _evolution_rows(states, params, packet)
    boosted = packet.p0 + p
    for row in rows:
        row.append(boosted)
    header = ["t", "xi", "xi_dot", "re_gamma", "im_gamma", "variance",
              "norm_check", "P"]
    _emit(render_csv(header, rows, config_sha256(config)), out)
    return 0


def cmd_tunnel(config, out, barrier_mode=False) -> int:
    cfg_hash = config_sha256(config)
    if barrier_mode:
        params = _build_system(config)
        sec = config["barrier"]
        xi0 = float(sec["xi0"])
        xis = np.linspace(float(sec["xi_min"]), float(sec["xi_max"]),
                          int(sec["points"]))
        rows = [[float(F), float(xi), bt.barrier_potential(params, xi0, float(F), float(xi))]
                for F in sec["forces"] for xi in xis]
        _emit(render_csv(["F", "xi", "V"], rows, cfg_hash), out)
        return 0

    sec = config["tunnel"]
    eps = float(sec["epsilon"])
    betas = np.linspace(float(sec["beta_min"]), float(sec["beta_max"]),
                        int(sec["points"]))
    warned = False

    def row_for(beta):
        beta = float(beta)
        w_j = bt.transmission_jwkb(eps, beta)
        w_e = bt.transmission_exact(eps, beta)
        w_q = bt.averaged_transmission(eps, beta)
        if 0.0 < beta < 1.0:
            a_pre = bt.asymptotic_prefactor(eps, beta)
            w_a = bt.averaged_transmission_asymptotic(eps, beta)
        else:
            a_pre = w_a = None
        return [beta, w_j, w_e, w_q, a_pre, w_a]

    rows = _map_ordered(row_for, betas)
    for row in rows:
        if row[4] is None and not warned:
            sys.stderr.write("warning: asymptotic columns left empty outside "
                             "0 < beta < 1\n")
            warned = True
    header = ["beta", "w_jwkb", "w_exact", "w_avg_quadrature", "A_prefactor",
              "w_avg_asymptotic"]
    _emit(render_csv(header, rows, cfg_hash), out)
    return 0


def _complex_pair(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def cmd_open_poles(config, out, boundary=None) -> int:
    cfg_hash = config_sha256(config)
    if boundary is not None:
        a_min, a_max, n = float(boundary[0]), float(boundary[1]), int(boundary[2])
        if not (0 < a_min < a_max) or n < 2:
            raise ConfigError("boundary sweep needs 0 < a_min < a_max and n >= 2")
        rows = [[a, osys.discriminant_boundary(float(a))]
                for a in np.linspace(a_min, a_max, n)]
        _emit(render_csv(["a", "b_critical"], rows, cfg_hash), out)
        return 0

    params = _build_system(config)
    bath = _build_bath(config)
    if bath.gamma <= 0:
        raise ConfigError("bath.gamma must be positive for the pole table")
    try:
        dec = osys.solve_poles(params, bath)
    except osys.DegeneratePolesError as exc:
        payload = {
            "config_sha256": cfg_hash,
            "a": exc.coefficients.a, "b": exc.coefficients.b,
            "q": exc.coefficients.q, "p": exc.coefficients.p,
            "D": exc.coefficients.D,
            "root_class": exc.root_class.value,
            "poles": [_complex_pair(s) for s in (exc.poles or ())],
            "error": str(exc),
        }
        _emit(render_json(payload), out)
        return 3
    sum_r = sum(dec.residues)
    sum_rs = sum(r * s for r, s in zip(dec.residues, dec.poles))
    sum_rs2 = sum(r * s * s for r, s in zip(dec.residues, dec.poles))
    payload = {
        "config_sha256": cfg_hash,
        "a": dec.coefficients.a, "b": dec.coefficients.b,
        "q": dec.coefficients.q, "p": dec.coefficients.p, "D": dec.coefficients.D,
        "root_class": dec.root_class.value,
        "poles": [_complex_pair(s) for s in dec.poles],
        "residues": [_complex_pair(r) for r in dec.residues],
        "sum_rules": {"sumR": abs(sum_r), "sumRs": sum_rs.real,
                      "sumRs2": abs(sum_rs2)},
    }
    _emit(render_json(payload), out)
    return 0


def cmd_open_evolve(config, out) -> int:
    params = _build_system(config)
    packet = _build_packet(config)
    bath = _build_bath(config)
    force = _build_force(config)
    if isinstance(force, DeltaKick):
        raise ConfigError("force.kind: delta_kick is not supported for the "
                          "open-system command")
    if bath.gamma <= 0:
        raise ConfigError("bath.gamma must be positive (undamped dynamics is "
                          "covered by the 'evolve' command)")
    convention = config["bath"]["noise"]
    dec = osys.solve_poles(params, bath)
    sec = config["open"]
    times = np.linspace(0.0, float(sec["t_max"]), int(sec["samples"]))
    sig2 = packet.sigma**2
    vp = params.hbar**2 / (4.0 * sig2)

    def row_for(t):
        t = float(t)
        g = osys.green_function(dec, t)
        gd = osys.green_derivative(dec, t)
        mean_x = osys.mean_trajectory(dec, packet.x0, packet.p0, force, t)
        dyn = sig2 * gd * gd + vp * g * g
        noise = osys.variance_noise_term(dec, bath, params, t,
                                         convention=convention,
                                         abs_tol=1e-10 * max(abs(dyn), 1e-30))
        return [t, g, gd, mean_x, dyn, noise, dyn + noise]

    rows = _map_ordered(row_for, times)
    header = ["t", "G", "G_dot", "mean_x", "variance_dynamic", "variance_noise",
              "variance_total"]
    _emit(render_csv(header, rows, config_sha256(config)), out)
    return 0


def cmd_verify(config, out) -> int:
    params = _build_system(config)
    packet = _build_packet(config)
    force = _build_force(config)
    if isinstance(force, DeltaKick):
        raise ConfigError("force.kind: delta_kick is not supported by verify")
    vsec = config["verify"]
    checks = []

    def add(name, deviation, tolerance):
        checks.append({"name": name, "deviation": float(deviation),
                       "tolerance": float(tolerance),
                       "passed": bool(deviation < tolerance)})

    # closed form against the split-step grid solver
    gsec = config["grid"]
    grid = numerics.grid_from_packet(packet, params, float(gsec["x_min"]),
                                     float(gsec["x_max"]), int(gsec["n"]))
    dt = float(gsec["dt"])
    xs = grid.x()
    for t in vsec["grid_times"]:
        t = float(t)
        grid = numerics.schrodinger_grid_evolve(params, grid, force, t, dt)
        ev = ce.evolve_gaussian(params, packet, force, t)
        ref = ce.evaluate(ev, params, packet, xs)
        dev = float(np.sqrt(np.sum(np.abs(grid.psi - ref) ** 2)
                            / np.sum(np.abs(ref) ** 2)))
        add(f"grid_closed_form_t{t:g}", dev, float(vsec["grid_tolerance"]))

    # residue-sum impulse response against the RK4 memory-kernel integrator
    horizon = float(vsec["green_horizon_factor"]) / params.omega
    for i, case in enumerate(vsec["green_cases"]):
        bath_case = osys.BathParams(gamma=float(case["gamma"]),
                                    omega_d=float(case["omega_d"]), kT=0.0)
        dec = osys.solve_poles(params, bath_case)
        ts, g_ode = numerics.langevin_ode_oracle(params, bath_case, horizon,
                                                 float(vsec["green_dt"]))
        g_res = osys.green_function(dec, ts)
        dev = float(np.max(np.abs(g_res - g_ode)) / np.max(np.abs(g_res)))
        add(f"green_residue_vs_ode_case{i}", dev, float(vsec["green_tolerance"]))

    # quasistatic asymptotics against the period-average quadrature
    for point in vsec["tunnel_points"]:
        eps, beta = float(point["epsilon"]), float(point["beta"])
        w_q = bt.averaged_transmission(eps, beta)
        w_a = bt.averaged_transmission_asymptotic(eps, beta)
        add(f"tunnel_asymptotic_eps{eps:g}_beta{beta:g}",
            abs(w_a - w_q) / w_q, float(point["tolerance"]))

    # windowed transform closed form against direct quadrature
    bath = _build_bath(config)
    if bath.gamma > 0:
        dec = osys.solve_poles(params, bath)
        w_probe = float(vsec["windowed_omega"]) * params.omega
        t_probe = float(vsec["windowed_t"]) / params.omega
        closed = osys.windowed_transform(dec, w_probe, t_probe)
        quad = integrate_adaptive(
            lambda t1: osys.green_function(dec, t1) * np.exp(-1j * w_probe * t1),
            0.0, t_probe, abs_tol=1e-13, rel_tol=1e-12).value
        add("windowed_transform_quadrature", abs(closed - quad),
            float(vsec["windowed_tolerance"]))

    payload = {
        "config_sha256": config_sha256(config),
        "checks": checks,
        "all_pass": all(c["passed"] for c in checks),
    }
    _emit(render_json(payload), out)
    return 0 if payload["all_pass"] else 4


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invosc",
        description="Driven inverted-oscillator dynamics: exact evolution, "
                    "quasistatic tunneling, and open-system pole machinery.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="PATH=VALUE", help="override a config entry")
        p.add_argument("--print-config", action="store_true",
                       help="print the effective config and exit")

    p = sub.add_parser("evolve", help="closed-system Gaussian evolution")
    common(p)
    p.add_argument("--wavefunction", metavar="PATH",
                   help="also dump psi(x) at the final sample time")

    common(sub.add_parser("kick", help="delta-kick scenario"))

    p = sub.add_parser("tunnel", help="transmission sweeps")
    common(p)
    p.add_argument("--barrier", action="store_true",
                   help="emit the barrier profile instead of the sweep")

    p = sub.add_parser("open-poles", help="transfer-function pole table")
    common(p)
    p.add_argument("--boundary", nargs=3, metavar=("A_MIN", "A_MAX", "N"),
                   help="emit the discriminant boundary curve b(a)")

    common(sub.add_parser("open-evolve", help="open-system time series"))
    common(sub.add_parser("verify", help="cross-oracle verification report"))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides)
        if args.print_config:
            sys.stdout.write(render_json(config))
            return 0
        if args.command == "evolve":
            return cmd_evolve(config, args.out, args.wavefunction)
        if args.command == "kick":
            return cmd_kick(config, args.out)
        if args.command == "tunnel":
            return cmd_tunnel(config, args.out, args.barrier)
        if args.command == "open-poles":
            return cmd_open_poles(config, args.out, args.boundary)
        if args.command == "open-evolve":
            return cmd_open_evolve(config, args.out)
        if args.command == "verify":
            return cmd_verify(config, args.out)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())

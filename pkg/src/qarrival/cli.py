"""Command-line entry point: ``qarrival {arrival,sweep,mc,shadow,validate}``.

Runs are described by a flat config file of dotted keys::

    packet.xi0 = -4
    packet.v = 4
    counter.alpha = 1
    grid.ymax = 400

``[section]`` headers are also accepted and prefix their keys. ``--set key=value``
overrides single entries. Every output file carries the resolved config and
the library version; all files are written atomically.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 statistical test
failure, 5 simulation domain violation, 1 failed validation checks.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
import warnings
from dataclasses import fields, replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .arrival import CounterArray, DeltaCounter, SingularSystemError, counter_amplitudes
from .dynamics import DimensionlessPacket
from .events import (
    SaturationError,
    detection_fraction_check,
    intensity_from_survival,
    ks_against_law,
    sample_first_events,
    sample_first_events_thinning,
)
from .inversion import AliasingError, invert_to_time, parseval_efficiency, sample_spectrum
from .lattice import (
    DomainEscapeWarning,
    ShadowConfig,
    atomic_write,
    load_shadow_config,
    point_counter_run,
    run_shadow,
    write_axial_csv,
    write_snapshot,
)
from .studies import BracketError, CounterResponse, alpha_opt_curve, efficiency_surface, golden_section_max, slopes

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC, EXIT_STAT, EXIT_DOMAIN = 0, 1, 2, 3, 4, 5

DEFAULTS: Dict[str, str] = {
    "packet.xi0": "-4",
    "packet.v": "4",
    "counter.xi": "0",
    "counter.alpha": "1",
    "counter.mode": "incoherent",
    "grid.ymax": "400",
    "grid.n": "16384",
    "grid.tau_max": "8",
    "grid.tau_n": "4097",
    "output.rescale": "false",
    "sweep.mode": "alpha-opt",
    "sweep.v": "2,4,8",
    "sweep.alpha": "0.25,0.5,1,1.25,1.5,2,4,8,16,32",
    "sweep.xi0": "",
    "sweep.alpha_min": "0.05",
    "sweep.alpha_max": "10",
    "sweep.alpha_n": "200",
    "sweep.tol": "1e-4",
    "mc.n": "100000",
    "mc.level": "0.01",
    "mc.method": "inverse",
    "mc.seed": "0",
    "shadow.mode": "2d",
    "shadow.config": "",
    "shadow.dx": "0.02",
    "shadow.t_end": "2.5",
    "shadow.length": "32",
    "shadow.escalate": "true",
}
_SHADOW_FIELDS = {f.name for f in fields(ShadowConfig)} - {"calibrated", "note"}
ALLOWED = set(DEFAULTS) | {f"shadow.{k}" for k in _SHADOW_FIELDS}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config


def parse_config_text(text: str) -> Dict[str, str]:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string("[__root__]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    out = dict(cp["__root__"])
    for sec in cp.sections():
        if sec != "__root__":
            out.update({f"{sec}.{k}": v for k, v in cp[sec].items()})
    return out


class RunConfig:
    """Resolved key-value config with typed accessors."""

    def __init__(self, values: Dict[str, str]):
        unknown = sorted(set(values) - ALLOWED)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        self.explicit = dict(values)
        self.values = {**DEFAULTS, **values}

    @classmethod
    def load(cls, path: Optional[str], overrides: List[str]) -> "RunConfig":
        vals: Dict[str, str] = {}
        if path:
            try:
                vals.update(parse_config_text(Path(path).read_text()))
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"--set expects key=value, got {item!r}")
            k, v = item.split("=", 1)
            vals[k.strip()] = v.strip()
        return cls(vals)

    def text(self, key: str) -> str:
        return self.values[key]

    def number(self, key: str) -> float:
        try:
            return float(self.values[key])
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {self.values[key]!r}") from None

    def integer(self, key: str) -> int:
        try:
            return int(self.values[key])
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {self.values[key]!r}") from None

    def flag(self, key: str) -> bool:
        v = self.values[key].strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean, got {self.values[key]!r}")

    def numbers(self, key: str) -> List[float]:
        try:
            return [float(x) for x in self.values[key].split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"{key} must be a comma-separated list of numbers") from None

    def set(self, key: str, value) -> None:
        self.values[key] = str(value)

    def echo(self) -> Dict[str, str]:
        return dict(sorted(self.values.items()))


# ---------------------------------------------------------------- output helpers


def _meta(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "version": __version__, "config": cfg.echo()}


def write_json(path: Path, payload: dict) -> None:
    atomic_write(path, (json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n").encode())


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o)}")


def write_csv(path: Path, meta: dict, header: str, rows) -> None:
    lines = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()]
    lines.append(header)
    lines += [",".join(_cell(x) for x in r) for r in rows]
    atomic_write(path, ("\n".join(lines) + "\n").encode())


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _packet(cfg: RunConfig) -> DimensionlessPacket:
    return DimensionlessPacket(cfg.number("packet.xi0"), cfg.number("packet.v"))


def _counters(cfg: RunConfig) -> CounterArray:
    xs, alphas = cfg.numbers("counter.xi"), cfg.numbers("counter.alpha")
    if len(alphas) == 1 and len(xs) > 1:
        alphas = alphas * len(xs)
    if len(xs) != len(alphas) or not xs:
        raise ConfigError("counter.xi and counter.alpha must list the same number of counters")
    try:
        return CounterArray(tuple(DeltaCounter(x, a) for x, a in zip(xs, alphas)), mode=cfg.text("counter.mode"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _tau(cfg: RunConfig) -> np.ndarray:
    n = cfg.integer("grid.tau_n")
    if n < 2 or cfg.number("grid.tau_max") <= 0:
        raise ConfigError("grid.tau_n must be >= 2 and grid.tau_max > 0")
    return np.linspace(0.0, cfg.number("grid.tau_max"), n)


# ---------------------------------------------------------------- commands


def cmd_arrival(cfg: RunConfig, out: Path, args) -> int:
    if args.rescale:
        cfg.set("output.rescale", "true")
    pk, arr = _packet(cfg), _counters(cfg)
    spec = sample_spectrum(lambda z: counter_amplitudes(pk, arr, z), cfg.number("grid.ymax"), cfg.integer("grid.n"))
    dist = invert_to_time(spec, _tau(cfg))
    rescale = cfg.flag("output.rescale")
    p, P = dist.p, dist.P_cum
    if rescale:
        if dist.mass <= 0:
            raise ZeroDivisionError("cannot rescale a distribution with zero mass")
        p, P = dist.normalized(), dist.P_cum / dist.mass
    meta = _meta(cfg, "arrival")
    write_csv(out / "arrival.csv", meta, "tau,p,P_cum", zip(dist.tau, p, P))
    mean = dist.mean() if dist.mass > 0 else None
    side = {
        **meta,
        "P_inf": dist.P_inf,
        "P_window": dist.mass,
        "parseval_gap": abs(dist.P_inf - dist.mass),
        "mean_tau": mean,
        "rescaled": rescale,
        "tail_mass": spec.tail_mass.sum(),
        "grids": {"ymax": spec.y_max, "n": spec.y.size, "tau_max": float(dist.tau[-1]), "tau_n": dist.tau.size},
    }
    write_json(out / "arrival.json", side)
    print(f"P_inf={dist.P_inf:.8f} window={dist.mass:.8f} mean_tau={mean if mean is None else round(mean, 6)}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path, args) -> int:
    if args.mode:
        cfg.set("sweep.mode", args.mode)
    if args.v:
        cfg.set("sweep.v", args.v)
    if args.alpha:
        cfg.set("sweep.alpha", args.alpha)
    mode = cfg.text("sweep.mode")
    ymax, n = cfg.number("grid.ymax"), cfg.integer("grid.n")
    meta = _meta(cfg, f"sweep/{mode}")
    xi0_txt = cfg.text("sweep.xi0")
    if mode == "alpha-opt":
        xi0 = float(xi0_txt) if xi0_txt else -4.0
        pts = alpha_opt_curve(cfg.numbers("sweep.v"), xi0=xi0, threads=args.threads, tol=cfg.number("sweep.tol"), y_max=ymax, n=n)
        sl = slopes(pts) if len(pts) > 1 else np.array([])
        write_csv(out / "alpha_opt.csv", meta, "v,alpha_opt,P_max", [(p.v, p.alpha, p.P_inf) for p in pts])
        write_json(out / "alpha_opt.json", {**meta, "xi0": xi0, "slopes": sl, "points": [vars(p) for p in pts]})
        for p in pts:
            print(f"v={p.v:g} alpha_opt={p.alpha:.5f} P_max={p.P_inf:.5f}")
        print("slopes: " + ", ".join(f"{s:.4f}" for s in sl))
    elif mode == "surface":
        xi0 = float(xi0_txt) if xi0_txt else 0.0
        vs, alphas = cfg.numbers("sweep.v"), cfg.numbers("sweep.alpha")
        rows = efficiency_surface(vs, alphas, xi0=xi0, threads=args.threads, y_max=ymax, n=n)
        meta["rows"], meta["columns"] = "v", "alpha"
        write_csv(out / "surface.csv", meta, "v\\alpha," + ",".join(_cell(a) for a in alphas), [[r[0].v] + [c.P_inf for c in r] for r in rows])
        print(f"surface {len(vs)}x{len(alphas)} written")
    elif mode == "static-alpha":
        resp = CounterResponse(DimensionlessPacket(float(xi0_txt) if xi0_txt else 0.0, 0.0), 0.0, ymax, n)
        lo, hi = cfg.number("sweep.alpha_min"), cfg.number("sweep.alpha_max")
        grid = np.linspace(lo, hi, cfg.integer("sweep.alpha_n"))
        curve = [(a, resp.efficiency(a)) for a in grid]
        a_opt, p_max = golden_section_max(resp.efficiency, lo, hi, cfg.number("sweep.tol"))
        write_csv(out / "static_alpha.csv", meta, "alpha,P_inf", curve)
        write_json(out / "static_alpha.json", {**meta, "alpha_opt": a_opt, "P_max": p_max})
        print(f"alpha_opt={a_opt:.5f} P_max={p_max:.6f}")
    else:
        raise ConfigError(f"sweep.mode must be alpha-opt, surface or static-alpha, got {mode!r}")
    return EXIT_OK


def cmd_mc(cfg: RunConfig, out: Path, args) -> int:
    if args.n is not None:
        cfg.set("mc.n", args.n)
    if args.seed is not None:
        cfg.set("mc.seed", args.seed)
    n, seed, level = cfg.integer("mc.n"), cfg.integer("mc.seed"), cfg.number("mc.level")
    if n < 0 or seed < 0:
        raise ConfigError("mc.n and mc.seed must be non-negative")
    pk, arr = _packet(cfg), _counters(cfg)
    spec = sample_spectrum(lambda z: counter_amplitudes(pk, arr, z), cfg.number("grid.ymax"), cfg.integer("grid.n"))
    dist = invert_to_time(spec, _tau(cfg))
    trace = intensity_from_survival(dist)
    method = cfg.text("mc.method")
    if method == "inverse":
        times = sample_first_events(trace, n, seed)
    elif method == "thinning":
        times = sample_first_events_thinning(trace, n, seed)
    else:
        raise ConfigError(f"mc.method must be inverse or thinning, got {method!r}")
    meta = _meta(cfg, "mc")
    write_csv(out / "samples.csv", meta, "index,detected,tau", ((i, int(not np.isnan(t)), None if np.isnan(t) else t) for i, t in enumerate(times)))
    summary = {**meta, "n": n, "seed": seed, "P_inf": dist.P_inf, "P_window": dist.mass}
    status = EXIT_OK
    if n == 0:
        summary["test"] = "skipped"
    else:
        frac, sigma, frac_ok = detection_fraction_check(times, dist.mass)
        summary.update({"detected_fraction": frac, "binomial_sigma": sigma, "fraction_ok": frac_ok})
        if np.any(~np.isnan(times)):
            ks = ks_against_law(times, dist, level)
            summary.update({"ks_statistic": ks.statistic, "ks_critical": ks.critical, "ks_pvalue": ks.pvalue, "ks_passed": ks.passed})
            ok = ks.passed and frac_ok
        else:
            ok = frac_ok
        summary["test"] = "PASS" if ok else "FAIL"
        status = EXIT_OK if ok else EXIT_STAT
    write_json(out / "mc.json", summary)
    print(f"mc n={n} seed={seed}: {summary['test']}")
    return status


def _shadow_config(cfg: RunConfig) -> ShadowConfig:
    base = load_shadow_config(cfg.text("shadow.config") or None)
    over = {}
    for k in _SHADOW_FIELDS:
        key = f"shadow.{k}"
        if key in cfg.explicit:
            raw = cfg.explicit[key]
            if k == "width":
                over[k] = tuple(cfg.numbers(key))
            elif k in ("n", "record_stride"):
                over[k] = cfg.integer(key)
            elif k == "dt":
                over[k] = None if raw.lower() in ("", "none") else cfg.number(key)
            else:
                over[k] = cfg.number(key)
    res = replace(base, **over)
    if over:
        res = replace(res, calibrated=False, note="modified from the calibrated config")
    return res


def cmd_shadow(cfg: RunConfig, out: Path, args) -> int:
    if args.mode:
        cfg.set("shadow.mode", args.mode)
    mode = cfg.text("shadow.mode")
    meta = _meta(cfg, f"shadow/{mode}")
    with warnings.catch_warnings():
        if cfg.flag("shadow.escalate"):
            warnings.simplefilter("error", DomainEscapeWarning)
        if mode == "2d":
            sc = _shadow_config(cfg)
            res = run_shadow(sc)
            rep = res.report
            extra = {"version": __version__, "config": cfg.echo()}
            write_snapshot(out / "monitored.snap", res.run.final, extra)
            write_snapshot(out / "free.snap", res.free.final, extra)
            write_axial_csv(out / "axial.csv", rep, [f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in meta.items()])
            write_csv(out / "arrival.csv", meta, "tau,p,P_cum", zip(res.run.distribution.tau, res.run.distribution.p, res.run.distribution.P_cum))
            report = {
                **meta,
                "shadow_config": sc.to_dict(),
                "P_inf": res.P_inf,
                "shadow_depth": rep.shadow_depth,
                "shadowed": rep.shadowed,
                "local_maximum": rep.local_maximum,
                "axial_peak_x": rep.axial_peak_x,
                "probe_x": rep.probe_x,
                "max_abs_difference": rep.max_abs_difference,
                "max_edge_mass": res.run.max_edge_mass,
            }
            write_json(out / "shadow.json", report)
            print(f"P_inf={res.P_inf:.5f} shadow_depth={rep.shadow_depth:.5g} local_maximum={rep.local_maximum}")
        elif mode == "1d":
            pk, arr = _packet(cfg), _counters(cfg)
            if len(arr) != 1:
                raise ConfigError("1d shadow mode takes a single counter")
            c = arr.counters[0]
            run = point_counter_run(pk.xi0, pk.v, c.alpha, cfg.number("shadow.dx"), cfg.number("shadow.t_end"), cfg.number("shadow.length"), c.xi_a)
            d = run.distribution
            sub = slice(None, None, max(1, d.tau.size // 2000))
            spec = sample_spectrum(lambda z: counter_amplitudes(pk, arr, z), cfg.number("grid.ymax"), cfg.integer("grid.n"))
            ref = invert_to_time(spec, d.tau[sub])
            scale = float(np.max(ref.p)) if np.max(ref.p) > 0 else 1.0
            err = float(np.max(np.abs(d.p[sub] - ref.p)) / scale)
            write_csv(out / "lattice_arrival.csv", meta, "tau,p_lattice,p_analytic", zip(ref.tau, d.p[sub], ref.p))
            write_json(out / "lattice_arrival.json", {**meta, "P_inf_lattice": d.P_inf, "P_inf_analytic": parseval_efficiency(spec), "sup_rel_error": err, "norm_identity": float(np.max(np.abs(run.norm_loss - run.integrated_rate)))})
            print(f"lattice vs analytic: sup relative error {err:.3e}")
        else:
            raise ConfigError(f"shadow.mode must be 2d or 1d, got {mode!r}")
    return EXIT_OK


def cmd_validate(cfg: RunConfig, out: Optional[Path], args) -> int:
    from .validation import run_checks

    select = [int(x) for x in args.only.split(",")] if args.only else None
    if select and any(not 1 <= i <= 9 for i in select):
        raise ConfigError("--only takes criterion numbers 1..9")
    results = []
    for r in run_checks(select):
        print(r.line(), flush=True)
        results.append(r)
    if args.out:
        write_json(out / "validate.json", {"version": __version__, "results": [vars(r) for r in results]})
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} passed")
    return EXIT_OK if passed == len(results) else EXIT_FAILED


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--config", default=d(None), help="flat key = value config file")
    p.add_argument("--out", default=d(None), help="output directory (default: current)")
    p.add_argument("--seed", type=int, default=d(None), help="random seed for stochastic commands")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads for sweeps")
    p.add_argument("--set", action="append", default=d([]), metavar="KEY=VALUE", help="override one config entry")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qarrival", description="Arrival-time distributions at absorbing detectors")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("arrival", help="arrival density for one or more delta counters")
    _common(p, True)
    p.add_argument("--rescale", action="store_true", help="write unit-mass curves")

    p = sub.add_parser("sweep", help="coupling optimisation and efficiency surfaces")
    _common(p, True)
    p.add_argument("--mode", choices=["alpha-opt", "surface", "static-alpha"])
    p.add_argument("--v", help="comma-separated velocities")
    p.add_argument("--alpha", help="comma-separated couplings (surface mode)")

    p = sub.add_parser("mc", help="Monte Carlo first-event times with KS test")
    _common(p, True)
    p.add_argument("--n", type=int, help="number of runs")

    p = sub.add_parser("shadow", help="grid simulation of an extended detector")
    _common(p, True)
    p.add_argument("--mode", choices=["2d", "1d"])

    p = sub.add_parser("validate", help="run the acceptance checks")
    _common(p, True)
    p.add_argument("--only", help="comma-separated criterion numbers")
    return ap


COMMANDS = {"arrival": cmd_arrival, "sweep": cmd_sweep, "mc": cmd_mc, "shadow": cmd_shadow, "validate": cmd_validate}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(args.config, args.set)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = Path(args.out) if args.out else Path(".")
        return COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainEscapeWarning as exc:
        print(f"domain violation: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (AliasingError, BracketError, SaturationError, SingularSystemError, OverflowError, FloatingPointError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

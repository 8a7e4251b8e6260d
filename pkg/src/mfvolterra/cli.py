"""mfvolterra command line: simulate | verify | localtime | tanaka.

Exit status: 0 success, 1 a verification check failed, 2 invalid
configuration, 3 numerical failure.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import analysis, io, tanaka, verify
from .errors import ConfigError, MFVolterraError
from .hurst import QuadratureSpec, TimeGrid, from_config
from .simulate import RandomSeed, sample_cholesky, sample_volterra

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

_BOUND = {"type": "number"}
CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["hurst"],
    "additionalProperties": False,
    "properties": {
        "hurst": {
            "type": "object",
            "required": ["shape"],
            "properties": {
                "shape": {"enum": ["constant", "sinusoidal", "affine-clamped", "table-interpolated"]},
                "H": _BOUND, "mean": _BOUND, "amplitude": _BOUND, "omega": _BOUND, "phase": _BOUND,
                "h0": _BOUND, "slope": _BOUND, "a": _BOUND, "b": _BOUND,
                "times": {"type": "array", "items": _BOUND},
                "values": {"type": "array", "items": _BOUND},
                "interpolation": {"enum": ["pchip", "linear"]},
            },
        },
        "T": {"type": "number"},
        "grid_size": {"type": "integer"},
        "n_paths": {"type": "integer"},
        "n_sub": {"type": "integer"},
        "seed": {"type": "integer", "minimum": 0},
        "method": {"enum": ["cholesky", "volterra"]},
        "covariance_method": {"enum": ["inner-product", "prop2-integral", "reduced"]},
        "quadrature": {
            "type": "object",
            "properties": {"abs_tol": _BOUND, "rel_tol": _BOUND,
                           "max_subdivisions": {"type": "integer"}},
            "additionalProperties": False,
        },
        "output_dir": {"type": "string"},
        "suites": {"type": "array", "items": {"enum": list(verify.SUITES) + ["all"]}},
        "localtime": {
            "type": "object",
            "properties": {"bin_width": {"type": ["number", "null"]},
                           "paths": {"type": "integer", "minimum": 1},
                           "checkpoints": {"type": "integer", "minimum": 1},
                           "levels": {"type": "array", "items": _BOUND},
                           "ensemble": {"type": "string"}},
            "additionalProperties": False,
        },
        "tanaka": {
            "type": "object",
            "properties": {k: {"type": "array", "items": _BOUND} for k in ("a", "eps", "t")},
            "additionalProperties": False,
        },
    },
}

DEFAULTS = {"T": 1.0, "grid_size": 65, "n_paths": 1000, "n_sub": 2048, "seed": 20240607,
            "method": "cholesky", "covariance_method": "inner-product", "output_dir": "mfvolterra-out",
            "suites": ["all"]}


class Campaign:
    """Validated configuration with the derived objects."""

    def __init__(self, raw):
        try:
            jsonschema.validate(raw, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "config"
            raise ConfigError(f"{where}: {exc.message}") from None
        cfg = {**DEFAULTS, **raw}
        hs = cfg["hurst"]
        for key in ("a", "b"):
            if key in hs and not 0.5 < hs[key] < 1.0:
                raise ConfigError(f"hurst.{key} = {hs[key]} violates the constraint 1/2 < {key} < 1 "
                                  "(Hurst values must lie in (1/2, 1))")
        if "a" in hs and "b" in hs and not hs["a"] < hs["b"]:
            raise ConfigError("hurst bounds must satisfy a < b")
        if not cfg["T"] > 0:
            raise ConfigError("T must be positive")
        if cfg["grid_size"] < 2:
            raise ConfigError("grid_size must be at least 2")
        if cfg["n_paths"] < 1:
            raise ConfigError("n_paths must be at least 1")
        if cfg["n_sub"] < cfg["grid_size"]:
            raise ConfigError("n_sub must be at least grid_size")
        try:
            self.h = from_config(hs, cfg["T"])
            self.q = QuadratureSpec(**cfg.get("quadrature", {}))
        except (ValueError, KeyError) as exc:
            msg = str(exc)
            if "(1/2, 1)" not in msg and "Hurst" in msg:
                msg += " (Hurst values must lie in (1/2, 1))"
            raise ConfigError(f"hurst: {msg}") from None
        for key in ("a", "b"):
            # explicit bounds must contain the function's own range
            if key in hs and ((key == "a" and self.h.a < hs["a"] - 1e-12)
                              or (key == "b" and self.h.b > hs["b"] + 1e-12)):
                raise ConfigError(f"hurst.{key} = {hs[key]} does not bound the Hurst function")
        self.cfg = cfg
        self.grid = TimeGrid.uniform(cfg["T"], cfg["grid_size"] - 1)
        self.seed = RandomSeed(cfg["seed"])

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls(raw)

    def ensemble(self, n_paths=None):
        n = self.cfg["n_paths"] if n_paths is None else n_paths
        if self.cfg["method"] == "volterra":
            return sample_volterra(self.grid, self.h, self.cfg["n_sub"], n, self.seed, self.q)
        return sample_cholesky(self.grid, self.h, n, self.seed, self.cfg["covariance_method"], self.q)


def _outdir(args, camp):
    d = Path(args.out or camp.cfg["output_dir"])
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_simulate(args, camp):
    t0 = time.perf_counter()
    ens = camp.ensemble()
    out = _outdir(args, camp)
    io.write_ensemble_csv(out / "ensemble.csv", ens)
    io.write_ensemble_binary(out / "ensemble.mfvl", ens)
    io.write_json(out / "manifest.json", {
        "config": camp.cfg, "seed": camp.seed.root, "method": ens.method,
        "n_paths": ens.n_paths, "n_times": len(ens.grid), "info": ens.info,
        "wall_time_s": time.perf_counter() - t0,
        "files": ["ensemble.csv", "ensemble.mfvl"]})
    print(f"wrote {ens.n_paths} paths x {len(ens.grid)} times to {out}")
    return EXIT_OK


def cmd_verify(args, camp):
    suites = [args.suite] if args.suite else camp.cfg["suites"]
    ctx = verify.make_context(camp.h, camp.cfg["T"], camp.cfg["grid_size"], camp.cfg["n_paths"],
                              camp.seed, camp.q, camp.cfg.get("tanaka"))
    try:
        report = verify.run_suites(suites, ctx)
    except ValueError as exc:
        if isinstance(exc, MFVolterraError):
            raise
        raise ConfigError(str(exc)) from None
    out = _outdir(args, camp)
    io.write_json(out / "verify.json", report)
    for c in report["checks"]:
        flag = "PASS" if c["pass"] else "FAIL"
        extra = f"  [{c['detail']}]" if c.get("detail") else ""
        print(f"{flag}  {c['suite']:<10} {c['name']}: value={c['value']} tol={c['tolerance']}{extra}")
    return EXIT_OK if report["passed"] else EXIT_FAILED


def _localtime_paths(camp, lt):
    """Paths for local-time analysis: an exported ensemble if configured, else fresh draws."""
    n = min(lt.get("paths", 1), camp.cfg["n_paths"])
    src = lt.get("ensemble")
    if src is None:
        return camp.ensemble(n).paths
    try:
        times, paths = io.read_ensemble(src)
    except OSError as exc:
        raise ConfigError(f"cannot read ensemble {src}: {exc}") from None
    if paths.shape[1] != len(camp.grid) or (times is not None and not np.allclose(times, camp.grid.times)):
        raise ConfigError(f"ensemble {src} does not match the configured grid")
    return paths[:n]


def cmd_localtime(args, camp):
    lt = camp.cfg.get("localtime", {})
    paths = _localtime_paths(camp, lt)
    k = lt.get("checkpoints", 5)
    idx = np.unique(np.linspace(0, len(camp.grid) - 1, k + 1).round().astype(int))
    cps = camp.grid.times[idx]
    levels = lt.get("levels", [0.0])
    weighted = camp.h.differentiable
    if not weighted:
        print("warning: Hurst function is not differentiable; weighted local time skipped",
              file=sys.stderr)
    out = _outdir(args, camp)
    summary = []
    for i, path in enumerate(paths):
        bins = analysis.default_bins(path, lt.get("bin_width"))
        est = analysis.local_time_binned(path, camp.grid, bins, cps)
        name = f"localtime_path{i}.csv"
        io.write_local_time_csv(out / name, est)
        entry = {"file": name, "bin_width": est.bin_width, "n_bins": est.density.shape[1],
                 "mass": (est.density @ np.diff(est.x_bins)).tolist(), "checkpoints": cps.tolist()}
        if weighted:
            inside = [a for a in levels if bins[0] <= a < bins[-1]]
            if inside:
                wlts = [tanaka.weighted_local_time(path, camp.grid, a, camp.h, bins, cps)
                        for a in inside]
                entry["weighted_file"] = f"weighted_path{i}.csv"
                io.write_weighted_local_time_csv(out / entry["weighted_file"], wlts)
            entry["levels_outside_range"] = [a for a in levels if a not in inside]
        summary.append(entry)
    io.write_json(out / "localtime.json", {"config": camp.cfg, "weighted": weighted, "paths": summary})
    print(f"wrote local times of {len(paths)} path(s) to {out}")
    return EXIT_OK


def cmd_tanaka(args, camp):
    lat = camp.cfg.get("tanaka", {})
    T = camp.cfg["T"]
    res = tanaka.tanaka_lattice(camp.h, lat.get("a", [-0.2, 0.0, 0.1]), lat.get("eps", [1e-2, 1e-3]),
                                lat.get("t", [0.5 * T, T]), camp.cfg["n_paths"], camp.seed, camp.q)
    out = _outdir(args, camp)
    rows = [r.as_dict() for r in res]
    io.write_json(out / "tanaka.json", rows)
    for r in rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'}  a={r['a']:g} eps={r['eps']:g} t={r['t']:g}  "
              f"mc={r['mc_mean']:.6g} +- {r['mc_se']:.2g}  deterministic={r['deterministic']:.6g}")
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAILED


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "localtime": cmd_localtime,
            "tanaka": cmd_tanaka}


def build_parser():
    p = argparse.ArgumentParser(prog="mfvolterra", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON campaign configuration")
    p.add_argument("--suite", choices=list(verify.SUITES) + ["all"],
                   help="verification suite (verify only; default from config)")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if "MFVOLTERRA_THREADS" in os.environ:
        try:
            if int(os.environ["MFVOLTERRA_THREADS"]) < 1:
                raise ValueError
        except ValueError:
            print("error: MFVOLTERRA_THREADS must be a positive integer", file=sys.stderr)
            return EXIT_CONFIG
    try:
        camp = Campaign.load(args.config)
        return COMMANDS[args.command](args, camp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (MFVolterraError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

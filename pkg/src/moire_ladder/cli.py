"""Command-line front end.

Five commands: ``spectrum`` (Bloch dispersions and finite-system
eigenvalues), ``phase-diagram`` (critical-gamma maps over the (v, w) plane),
``cluster`` (closed-form versus numeric cluster dynamics), ``evolve``
(probability trajectories for any built Hamiltonian), and ``moire``
(the full mismatched-chain pipeline).

Every command accepts a JSON config file (``--config``) whose keys mirror
the command's flags; explicit flags override the file.  Each run writes a
``manifest.json`` recording the resolved configuration and checksums of all
emitted files.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, dynamics, hamiltonian, lattice, spectra
from ._accel import backend
from .fileio import ManifestTimer, write_csv, write_manifest, write_pgm
from .linalg import EigenConvergenceError, ExpmOverflowError, eig

CONFIG_EXIT = 2
NUMERICAL_EXIT = 3


class ConfigError(ValueError):
    pass


def _parse_ratio(text) -> float:
    """Accept a plain float or a fraction like '1/301'."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    if "/" in s:
        num, den = s.split("/", 1)
        try:
            return float(num) / float(den)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad fraction {text!r}: {exc}") from exc
    try:
        return float(s)
    except ValueError as exc:
        raise ConfigError(f"bad number {text!r}") from exc


def _opt_float(text):
    if text is None or (isinstance(text, str) and text.lower() == "none"):
        return None
    return float(text)


# per-command parameter schema: name -> (caster, default)
SCHEMAS: dict[str, dict[str, tuple]] = {
    "spectrum": {
        "model": (str, None),
        "w": (float, 0.5),
        "v": (float, 0.1),
        "kappa": (float, 1.0),
        "kappa_prime": (float, 0.37),
        "gamma": (float, 0.0),
        "cells": (int, 20),
        "k_points": (int, 512),
        "finite": (bool, False),
        "format": (str, "both"),
    },
    "phase-diagram": {
        "model": (str, None),
        "v_min": (float, 0.0),
        "v_max": (float, 2.0),
        "w_min": (float, 0.0),
        "w_max": (float, 2.0),
        "resolution": (int, 101),
        "kappa": (float, 1.0),
        "kappa_prime": (float, 0.37),
        "k_points": (int, 512),
        "tolerance": (float, 1e-6),
        "gamma_max": (_opt_float, None),
        "coarse_steps": (int, 64),
        "method": (str, "bisect"),
        "format": (str, "both"),
    },
    "cluster": {
        "case": (int, 0),  # 0 = all four reference cases
        "cluster": (str, ""),
        "w": (float, 0.5),
        "gamma": (float, 0.395),
        "kappa": (float, 1.0),
        "t_max": (float, 30.0),
        "dt": (float, 0.01),
        "format": (str, "both"),
    },
    "evolve": {
        "model": (str, None),
        "w": (float, 0.5),
        "v": (float, 0.1),
        "kappa": (float, 1.0),
        "kappa_prime": (float, 0.37),
        "gamma": (float, 0.395),
        "cells": (int, 20),
        "sites": (int, 1210),
        "scale": (int, 1),
        "mismatch": (_parse_ratio, 1.0 / 301.0),
        "alpha": (float, 2.0),
        "kappa0": (float, 1.0),
        "cutoff": (float, 1e-8),
        "t_max": (float, 50.0),
        "dt_sample": (float, 0.05),
        "format": (str, "both"),
    },
    "moire": {
        "sites": (int, 1210),
        "scale": (int, 1),
        "mismatch": (_parse_ratio, 1.0 / 301.0),
        "alpha": (float, 2.0),
        "kappa0": (float, 1.0),
        "w": (float, 0.5),
        "v": (float, 0.1),
        "gamma": (float, 0.395),
        "cutoff": (float, 1e-8),
        "t_low": (float, 0.15),
        "t_high": (float, 0.35),
        "t_max": (float, 60.0),
        "dt_sample": (float, 0.05),
        "format": (str, "both"),
    },
}

LADDER_BUILDERS = {
    "tetramerized": hamiltonian.build_tetramerized,
    "dimerized": hamiltonian.build_dimerized,
    "crossover": hamiltonian.build_crossover,
}


def resolve_config(command: str, config_path, flag_values: dict) -> dict:
    """defaults <- config file <- explicit flags; strict about unknown keys."""
    schema = SCHEMAS[command]
    resolved = {key: default for key, (_, default) in schema.items()}
    if config_path is not None:
        try:
            raw = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in raw.items():
            if key not in schema:
                raise ConfigError(f"unknown config key {key!r} for {command}")
            caster = schema[key][0]
            resolved[key] = caster(value) if value is not None else None
    for key, value in flag_values.items():
        if value is None:
            continue
        caster = schema[key][0]
        resolved[key] = caster(value)
    _validate(command, resolved)
    return resolved


def _require(cond: bool, message: str):
    if not cond:
        raise ConfigError(message)


def _validate(command: str, cfg: dict):
    for key, value in cfg.items():
        if isinstance(value, float):
            _require(np.isfinite(value), f"{key} must be finite")
    fmt = cfg.get("format", "both")
    _require(fmt in ("csv", "pgm", "both"), f"format must be csv|pgm|both, got {fmt!r}")
    if command in ("spectrum", "phase-diagram"):
        _require(cfg["model"] in spectra.MODELS,
                 f"model must be one of {spectra.MODELS}, got {cfg['model']!r}")
    if command == "spectrum":
        _require(cfg["cells"] >= 2, "cells must be >= 2")
        _require(cfg["k_points"] >= 2, "k_points must be >= 2")
    if command == "phase-diagram":
        _require(cfg["resolution"] >= 2, "resolution must be >= 2")
        _require(cfg["v_max"] > cfg["v_min"], "v_max must exceed v_min")
        _require(cfg["w_max"] > cfg["w_min"], "w_max must exceed w_min")
        _require(cfg["k_points"] >= 64, "k_points must be >= 64")
        _require(cfg["tolerance"] > 0, "tolerance must be positive")
        _require(cfg["method"] in ("bisect", "analytic"),
                 "method must be bisect or analytic")
        if cfg["method"] == "analytic":
            _require(cfg["model"] != "crossover",
                     "the crossover model has no analytic gamma_c; use method=bisect")
    if command == "cluster":
        _require(0 <= cfg["case"] <= 4, "case must be 1..4 (0 = all)")
        _require(cfg["cluster"] in ("", "tetramer", "dimer"),
                 "cluster must be 'tetramer' or 'dimer'")
        _require(cfg["t_max"] > 0 and cfg["dt"] > 0, "t_max and dt must be positive")
        if cfg["cluster"] == "dimer":
            _require(cfg["kappa"] ** 2 > cfg["gamma"] ** 2,
                     "the dimer closed form needs kappa > gamma; "
                     "use the evolve command for the broken dimer")
    if command == "evolve":
        models = tuple(LADDER_BUILDERS) + ("tetramer-cluster", "dimer-cluster", "moire")
        _require(cfg["model"] in models, f"model must be one of {models}")
        _require(cfg["t_max"] >= 0 and cfg["dt_sample"] > 0,
                 "t_max must be >= 0 and dt_sample > 0")
    if command in ("evolve", "moire"):
        if command == "moire" or cfg.get("model") == "moire":
            _require(cfg["sites"] >= 2, "sites must be >= 2")
            _require(cfg["scale"] >= 1, "scale must be >= 1")
            _require(0 < cfg["mismatch"] < 1, "mismatch must lie in (0, 1)")
    if command == "moire":
        _require(0 < cfg["t_low"] < cfg["t_high"] < 0.5,
                 "thresholds must satisfy 0 < t_low < t_high < 0.5")


def _moire_spec(cfg: dict) -> lattice.MoireSpec:
    sites = 2 * max(1, round(cfg["sites"] / cfg["scale"] / 2))
    period = round(1.0 / cfg["mismatch"])
    if sites < 2 * period:
        raise ConfigError(
            f"scaled chain of {sites} sites holds fewer than two moire periods "
            f"(need >= {2 * period}); lower --scale or --mismatch"
        )
    return lattice.MoireSpec(
        n_sites_1=sites,
        mismatch=cfg["mismatch"],
        kappa0=cfg["kappa0"],
        alpha=cfg["alpha"],
        coupling_cutoff=cfg["cutoff"],
    )


def _want(fmt: str, kind: str) -> bool:
    return fmt in (kind, "both")


def cmd_spectrum(cfg: dict, outdir: Path, timer: ManifestTimer) -> list[Path]:
    p = hamiltonian.ModelParams(
        w=cfg["w"], v=cfg["v"], kappa=cfg["kappa"],
        kappa_prime=cfg["kappa_prime"], gamma=cfg["gamma"], cells=cfg["cells"],
    )
    kk = spectra.k_grid(cfg["k_points"])
    dispersion = {
        "tetramerized": spectra.dispersion_tetramer,
        "dimerized": spectra.dispersion_dimer,
        "crossover": spectra.dispersion_crossover,
    }[cfg["model"]](p, kk)
    coupling = cfg["kappa_prime"] if cfg["model"] == "crossover" else cfg["kappa"]
    threshold = spectra.REALITY_RTOL * max(abs(p.w), abs(p.v), abs(coupling))
    files = [outdir / "dispersion.csv"]
    dispersion.to_csv(files[0], nonreal_threshold=threshold)
    timer.extra["nonreal_bands"] = int(np.sum(np.abs(dispersion.bands.imag) > threshold))
    if cfg["finite"]:
        h = LADDER_BUILDERS[cfg["model"]](p)
        vals = eig(h, want_vectors=False).eigenvalues
        path = outdir / "eigenvalues.csv"
        write_csv(path, ["index", "re", "im"],
                  [np.arange(len(vals)), vals.real, vals.imag])
        files.append(path)
    return files


def cmd_phase_diagram(cfg: dict, outdir: Path, timer: ManifestTimer) -> list[Path]:
    v_values = np.linspace(cfg["v_min"], cfg["v_max"], cfg["resolution"])
    w_values = np.linspace(cfg["w_min"], cfg["w_max"], cfg["resolution"])
    coupling = cfg["kappa_prime"] if cfg["model"] == "crossover" else cfg["kappa"]
    grid = spectra.phase_diagram(
        cfg["model"], v_values, w_values, coupling=coupling,
        k_points=cfg["k_points"], tol=cfg["tolerance"],
        gamma_max=cfg["gamma_max"], coarse_steps=cfg["coarse_steps"],
        method=cfg["method"],
    )
    timer.extra["saturated_cells"] = grid.saturation_count
    files = []
    if _want(cfg["format"], "csv"):
        files.append(outdir / "phase_diagram.csv")
        grid.to_csv(files[-1])
    if _want(cfg["format"], "pgm"):
        files.append(outdir / "phase_diagram.pgm")
        grid.to_pgm(files[-1])
    return files


_CLUSTER_CASES = {
    1: ("tetramer", dict(w=0.5, gamma=0.395, kappa=1.0), "tetramer_oscillating"),
    2: ("tetramer", dict(w=0.5, gamma=0.505, kappa=1.0), "tetramer_growing"),
    3: ("tetramer", dict(w=0.5, gamma=0.5, kappa=1.0), "tetramer_ep"),
    4: ("dimer", dict(gamma=0.395, kappa=1.0), "dimer_oscillating"),
}


def _cluster_run(kind: str, params: dict, t_max: float, dt: float):
    if kind == "tetramer":
        h = hamiltonian.tetramer_cluster(params["w"], params["gamma"], params["kappa"])
        psi0 = dynamics.uniform_state(4)
        traj = dynamics.evolve(h, psi0, t_max, dt)
        formula = dynamics.tetramer_probability(
            params["w"], params["gamma"], params["kappa"], traj.times)
    else:
        h = hamiltonian.dimer_cluster(params["kappa"], params["gamma"])
        psi0 = dynamics.uniform_state(2)
        traj = dynamics.evolve(h, psi0, t_max, dt)
        formula = dynamics.dimer_probability(params["kappa"], params["gamma"], traj.times)
    return traj.times, np.asarray(formula), traj.total_probability


def cmd_cluster(cfg: dict, outdir: Path, timer: ManifestTimer) -> list[Path]:
    if cfg["cluster"]:
        runs = [("custom_" + cfg["cluster"], cfg["cluster"],
                 dict(w=cfg["w"], gamma=cfg["gamma"], kappa=cfg["kappa"]))]
    elif cfg["case"]:
        kind, params, tag = _CLUSTER_CASES[cfg["case"]]
        runs = [(f"case{cfg['case']}_{tag}", kind, params)]
    else:
        runs = [(f"case{n}_{tag}", kind, params)
                for n, (kind, params, tag) in _CLUSTER_CASES.items()]
    files = []
    worst = 0.0
    for name, kind, params in runs:
        times, formula, numeric = _cluster_run(kind, params, cfg["t_max"], cfg["dt"])
        diff = np.abs(formula - numeric)
        worst = max(worst, float(diff.max()))
        path = outdir / f"cluster_{name}.csv"
        write_csv(path, ["t", "P_formula", "P_numeric", "abs_diff"],
                  [times, formula, numeric, diff])
        files.append(path)
    timer.extra["max_abs_diff"] = worst
    return files


def _trajectory_files(traj, cfg, outdir: Path, timer: ManifestTimer) -> list[Path]:
    files = []
    timer.extra["truncated"] = bool(traj.truncated)
    if _want(cfg["format"], "csv"):
        files.append(outdir / "trajectory_total.csv")
        write_csv(files[-1], ["t", "P_total"], [traj.times, traj.total_probability])
        nt, nj = traj.site_probability.shape
        files.append(outdir / "trajectory_sites.csv")
        write_csv(
            files[-1],
            ["t", "j", "P"],
            [np.repeat(traj.times, nj), np.tile(np.arange(1, nj + 1), nt),
             traj.site_probability.reshape(-1)],
        )
    if _want(cfg["format"], "pgm") and traj.site_probability.shape[0] > 1:
        files.append(outdir / "heatmap_global.pgm")
        write_pgm(files[-1], traj.site_probability, normalization="global")
        files.append(outdir / "heatmap_perslice.pgm")
        write_pgm(files[-1], traj.site_probability, normalization="rows")
    return files


def _build_evolve_system(cfg: dict):
    model = cfg["model"]
    if model in LADDER_BUILDERS:
        p = hamiltonian.ModelParams(
            w=cfg["w"], v=cfg["v"], kappa=cfg["kappa"],
            kappa_prime=cfg["kappa_prime"], gamma=cfg["gamma"], cells=cfg["cells"],
        )
        h = LADDER_BUILDERS[model](p)
        groups = hamiltonian.ladder_site_groups(cfg["cells"])
    elif model == "tetramer-cluster":
        h = hamiltonian.tetramer_cluster(cfg["w"], cfg["gamma"], cfg["kappa"])
        groups = hamiltonian.cluster_site_groups(2)
    elif model == "dimer-cluster":
        h = hamiltonian.dimer_cluster(cfg["kappa"], cfg["gamma"])
        groups = hamiltonian.cluster_site_groups(1)
    else:
        spec = _moire_spec(cfg)
        p = hamiltonian.ModelParams(w=cfg["w"], v=cfg["v"], gamma=cfg["gamma"])
        h = hamiltonian.build_moire(spec, p)
        groups = hamiltonian.moire_site_groups(spec)
    return h, groups


def cmd_evolve(cfg: dict, outdir: Path, timer: ManifestTimer) -> list[Path]:
    h, groups = _build_evolve_system(cfg)
    psi0 = dynamics.uniform_state(h.shape[0])
    traj = dynamics.evolve(h, psi0, cfg["t_max"], cfg["dt_sample"], site_groups=groups)
    return _trajectory_files(traj, cfg, outdir, timer)


def cmd_moire(cfg: dict, outdir: Path, timer: ManifestTimer) -> list[Path]:
    spec = _moire_spec(cfg)
    table = lattice.build_couplings(spec)
    labels = lattice.classify_regions(spec, table, (cfg["t_low"], cfg["t_high"]))
    p = hamiltonian.ModelParams(w=cfg["w"], v=cfg["v"], gamma=cfg["gamma"])
    h = hamiltonian.build_moire(spec, p, table)
    psi0 = dynamics.uniform_state(h.shape[0])
    traj = dynamics.evolve(h, psi0, cfg["t_max"], cfg["dt_sample"],
                           site_groups=hamiltonian.moire_site_groups(spec))
    files = []
    if _want(cfg["format"], "csv"):
        files.append(outdir / "couplings.csv")
        table.to_csv(files[-1])
        files.append(outdir / "regions.csv")
        labels.to_csv(files[-1])
        by_region = dynamics.region_probabilities(traj, labels)
        names = sorted(by_region)
        nt = len(traj.times)
        files.append(outdir / "region_probabilities.csv")
        write_csv(
            files[-1],
            ["t", "region", "P"],
            [np.repeat(traj.times, len(names)), np.tile(np.array(names), nt),
             np.stack([by_region[n] for n in names], axis=1).reshape(-1)],
        )
    files.extend(_trajectory_files(traj, cfg, outdir, timer))
    timer.extra["sites_chain1"] = spec.n_sites_1
    timer.extra["sites_chain2"] = spec.n_sites_2
    timer.extra["coupling_pairs"] = len(table)
    timer.extra["label_period"] = lattice.minimal_label_period(labels.labels)
    return files


COMMANDS = {
    "spectrum": cmd_spectrum,
    "phase-diagram": cmd_phase_diagram,
    "cluster": cmd_cluster,
    "evolve": cmd_evolve,
    "moire": cmd_moire,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moire-ladder",
        description="Spectra, phase diagrams, and probability dynamics of "
                    "non-Hermitian two-leg ladders with mismatched lattice constants.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in SCHEMAS.items():
        sp = sub.add_parser(command)
        sp.add_argument("--config", default=None, help="JSON config file")
        sp.add_argument("--out", default="out", help="output directory")
        for key, (caster, _) in schema.items():
            flag = "--" + key.replace("_", "-")
            if caster is bool:
                sp.add_argument(flag, dest=key, action="store_const", const=True,
                                default=None)
            elif caster in (_parse_ratio, _opt_float):
                sp.add_argument(flag, dest=key, default=None)
            else:
                sp.add_argument(flag, dest=key, type=caster, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    schema = SCHEMAS[command]
    flag_values = {key: getattr(args, key) for key in schema}
    try:
        cfg = resolve_config(command, args.config, flag_values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_EXIT
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    timer = ManifestTimer(command, cfg, __version__, backend())
    try:
        files = COMMANDS[command](cfg, outdir, timer)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return CONFIG_EXIT
    except (EigenConvergenceError, ExpmOverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    manifest_path = write_manifest(outdir / "manifest.json", timer.finish(files))
    for f in files + [manifest_path]:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())

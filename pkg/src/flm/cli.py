"""Config-driven experiment runner.

Every subcommand reads an optional JSON config, applies command-line
overrides, runs one job per seed and writes CSV files plus ``manifest.json``
into the output directory. Exit status: 0 on success, 2 on a bad config,
3 when every seed diverged.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import model as flm_model
from .ocp import (FIXED_DEFAULTS, VARYING_DEFAULTS, OcpConfig, cyclic, disk_centers, mape,
                  sample_disk, to_training_disk, train_ocp)
from .optim import AdamConfig, TrainConfig
from .pde import BEST_CONFIGS, DEFAULT_COUNTS, PROBLEMS, make_problem, solve, surface
from .pmp import ConvergenceError, solve_many
from .xlate import translate_model

log = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_DIVERGED = 3
KINDS = ("pde", "ocp", "bvp", "translate", "sweep")
FIXED_ICS = [[0.2, 0.2, 0.6], [0.5, 0.3, 0.2], [0.1, 0.6, 0.3]]


class ConfigError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: Path, header, rows) -> str:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path.name


def parse_seeds(text: str) -> list:
    """``"0..9"`` (inclusive), ``"0,3,5"`` or a single integer."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            seeds = list(range(int(lo), int(hi) + 1))
        else:
            seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse seeds {text!r}; use 0..9 or 0,1,2") from None
    if not seeds:
        raise ConfigError(f"empty seed list from {text!r}")
    return seeds


def aggregate(rows: list, keys) -> dict:
    """Mean and sample SD (0 for a single row) of each numeric key, skipping non-finite values."""
    out = {}
    for k in keys:
        vals = np.array([r[k] for r in rows if r.get(k) is not None], dtype=float)
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            out[k] = {"mean": None, "sd": None, "n": 0}
            continue
        sd = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
        out[k] = {"mean": float(vals.mean()), "sd": sd, "n": int(vals.size)}
    return out


# -- config handling ----------------------------------------------------------------

def _adam(d: dict | None, default: AdamConfig) -> AdamConfig:
    if not d:
        return default
    try:
        return AdamConfig(lr=float(d.get("lr", default.lr)),
                          beta1=float(d.get("beta1", default.beta1)),
                          beta2=float(d.get("beta2", default.beta2)),
                          eps=float(d.get("eps", default.eps)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad adam section: {exc}") from None


def _train(d: dict | None, default: TrainConfig) -> TrainConfig:
    d = d or {}
    try:
        return TrainConfig(max_epochs=int(d.get("max_epochs", default.max_epochs)),
                           loss_tol=float(d.get("loss_tol", default.loss_tol)),
                           log_every=int(d.get("log_every", default.log_every)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad train section: {exc}") from None


def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _problem(cfg) -> str:
    name = cfg.get("problem", "heat")
    if name not in PROBLEMS:
        raise ConfigError(f"unknown problem {name!r}; valid options: {', '.join(PROBLEMS)}")
    return name


def _seeds(cfg) -> list:
    seeds = cfg.get("seeds", [0])
    if isinstance(seeds, str):
        return parse_seeds(seeds)
    if not isinstance(seeds, list) or not seeds:
        raise ConfigError("seeds must be a non-empty list")
    return [int(s) for s in seeds]


def _pde_settings(cfg) -> dict:
    name = _problem(cfg)
    best = BEST_CONFIGS[name]
    N = int(cfg.get("N", best["N"]))
    if N < 1:
        raise ConfigError(f"N must be >= 1, got {N}")
    tr = cfg.get("train", {})
    phase1 = _train(tr, TrainConfig(10_000, 1e-4))
    phase2 = None
    if tr.get("phase2", True):
        phase2 = TrainConfig(int(tr.get("phase2_epochs", 30_000)),
                             float(tr.get("phase2_tol", 1e-8)),
                             log_every=phase1.log_every)
    counts = tuple(int(c) for c in cfg.get("counts", DEFAULT_COUNTS[name]))
    if len(counts) != 3 or min(counts) < 0:
        raise ConfigError(f"counts must be three non-negative integers, got {counts}")
    default_adam = AdamConfig(best["lr"], *best["betas"])
    return dict(name=name, N=N, adam=_adam(cfg.get("adam"), default_adam), counts=counts,
                phase1=phase1, phase2=phase2, grid_n=int(cfg.get("grid_n", 101)),
                reset_state=bool(tr.get("reset_state", False)),
                bias_std=float(cfg.get("bias_std", math.pi / 3)))


def _ocp_config(cfg) -> OcpConfig:
    kw = {k: cfg[k] for k in ("T", "r", "quad_n", "eval_n") if k in cfg}
    for k in ("mu1", "mu2"):
        if k in cfg:
            v = cfg[k]
            kw[k] = tuple(float(x) for x in (v if isinstance(v, list) else [v] * 3))
    try:
        return OcpConfig(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad OCP settings: {exc}") from None


def _ics(cfg, default):
    ics = np.asarray(cfg.get("ics", default), dtype=float)
    if ics.ndim != 2 or ics.shape[1] != 3:
        raise ConfigError("ics must be a list of 3-component initial conditions")
    if (np.abs(ics.sum(1) - 1) > 1e-9).any() or (ics <= 0).any():
        raise ConfigError("every initial condition must lie inside the open simplex")
    return ics


# -- per-seed jobs (module level so a process pool can pickle them) -------------------

def _pde_job(settings: dict, seed: int, out: str, artifacts: bool = True) -> dict:
    s = settings
    try:
        run = solve(s["name"], s["N"], s["adam"], seed=seed, counts=s["counts"],
                    phase1=s["phase1"], phase2=s["phase2"], grid_n=s["grid_n"],
                    reset_state=s["reset_state"], bias_std=s["bias_std"])
    except (FloatingPointError, ValueError) as exc:
        return {"seed": seed, "status": f"error: {exc}", "diverged": True}
    reports = [r for r in (run.phase1, run.phase2) if r is not None]
    diverged = any(r.stop_reason == "divergence" for r in reports)
    row = {"seed": seed, "mse": run.metrics.mse, "mae": run.metrics.mae,
           "max_err": run.metrics.max_err, "epochs": sum(r.epochs_run for r in reports),
           "phase1_epochs": run.phase1.epochs_run, "final_loss": reports[-1].final_loss,
           "wall_s": run.wall_s, "status": "diverged" if diverged else "ok",
           "diverged": diverged, "files": []}
    if artifacts:
        outp = Path(out)
        curve = [(i + 1, e, l) for i, r in enumerate(reports) for e, l in r.loss_curve]
        row["files"].append(write_csv(outp / f"loss_curve_{seed}.csv",
                                      ["phase", "epoch", "loss"], curve))
        problem = make_problem(s["name"])
        row["files"].append(write_csv(outp / f"surface_{seed}.csv",
                                      ["x", "y_or_t", "u_exact", "u_flm", "abs_err"],
                                      surface(run.model, problem, s["grid_n"])))
        ck = outp / f"checkpoint_{seed}.json"
        flm_model.save(run.model, ck)
        row["files"].append(ck.name)
    return row


def _pool_map(fn, jobs, threads: int):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        futs = [ex.submit(fn, *j) for j in jobs]
        return [f.result() for f in futs]


PDE_COLS = ["problem", "N", "lr", "beta1", "beta2", "seed", "mse", "mae", "max_err",
            "epochs", "wall_s", "status"]


def _pde_rows(settings, rows):
    a = settings["adam"]
    return [[settings["name"], settings["N"], a.lr, a.beta1, a.beta2, r["seed"],
             r.get("mse", math.nan), r.get("mae", math.nan), r.get("max_err", math.nan),
             r.get("epochs", 0), r.get("wall_s", math.nan), r["status"]] for r in rows]


# -- experiments -----------------------------------------------------------------------

def run_pde(cfg: dict, out: Path, threads: int = 1) -> dict:
    s = _pde_settings(cfg)
    seeds = _seeds(cfg)
    rows = _pool_map(_pde_job, [(s, sd, str(out)) for sd in seeds], threads)
    files = [write_csv(out / "metrics.csv", PDE_COLS, _pde_rows(s, rows))]
    for r in rows:
        files += r.pop("files", [])
    return {"seeds": rows, "files": files,
            "aggregate": aggregate(rows, ["mse", "mae", "max_err", "epochs",
                                          "phase1_epochs", "wall_s"]),
            "all_diverged": all(r["diverged"] for r in rows)}


def _ocp_job(mode, U_train, ocp_cfg, N, adam, train_cfg, seed, stages=None):
    return train_ocp(mode, U_train, cfg=ocp_cfg, N=N, adam=adam, train_cfg=train_cfg, seed=seed,
                     stages=stages)


def _stages(raw, default):
    if raw is None:
        return default
    try:
        stages = tuple((float(f), float(w)) for f, w in raw)
    except (TypeError, ValueError):
        raise ConfigError(f"stages must be a list of [mu_factor, share] pairs, got {raw!r}")
    if not stages or any(f <= 0 or w <= 0 for f, w in stages):
        raise ConfigError(f"stage factors and shares must be positive, got {raw!r}")
    return stages


def _trajectory_rows(sol, u0, k=0):
    t = sol.config.grid(sol.config.eval_n)
    u, _, g = sol.trajectories(to_training_disk(np.atleast_2d(u0), k)
                               if sol.mode == "varying" else np.atleast_2d(u0), t)
    u = cyclic(u[0], k) if sol.mode == "varying" else u[0]
    return [[ti, *ui, gi] for ti, ui, gi in zip(t, u, g[0])]


def run_ocp(cfg: dict, out: Path, threads: int = 1) -> dict:
    mode = cfg.get("mode", "fixed")
    if mode not in ("fixed", "varying"):
        raise ConfigError(f"mode must be 'fixed' or 'varying', got {mode!r}")
    seeds = _seeds(cfg)
    ocp_cfg = _ocp_config(cfg)
    defaults = FIXED_DEFAULTS if mode == "fixed" else VARYING_DEFAULTS
    N = int(cfg.get("N", defaults["N"]))
    adam = _adam(cfg.get("adam"), defaults["adam"])
    stages = _stages(cfg.get("stages"), defaults["stages"])
    train_cfg = _train(cfg.get("train"), TrainConfig(30_000, 1e-6, log_every=1000))
    pmp_kw = dict(tol=float(cfg.get("pmp_tol", 1e-8)), steps=int(cfg.get("pmp_steps", 2000)))
    files, rows, comparison = [], [], []

    if mode == "fixed":
        ics = _ics(cfg, FIXED_ICS)
        refs = [s.J_star for s in solve_many(ics, ocp_cfg, **pmp_kw)]
        jobs = [("fixed", u0, ocp_cfg, N, adam, train_cfg, sd, stages) for sd in seeds for u0 in ics]
        sols = _pool_map(_ocp_job, jobs, threads)
        for j, sd in enumerate(seeds):
            J_flm, diverged = [], False
            for i, u0 in enumerate(ics):
                sol = sols[j * len(ics) + i]
                diverged |= sol.train_report.stop_reason == "divergence"
                Jf = float(sol.objective_values(u0[None])[0])
                J_flm.append(Jf)
                comparison.append([sd, 0, *u0, Jf, refs[i], 100 * abs(Jf - refs[i]) / refs[i],
                                   abs(Jf - refs[i])])
                name = f"trajectory_{i}.csv" if len(seeds) == 1 else f"trajectory_{i}_seed{sd}.csv"
                files.append(write_csv(out / name, ["t", "u1", "u2", "u3", "gamma"],
                                       _trajectory_rows(sol, u0)))
            err = np.abs(np.array(J_flm) - refs)
            rows.append({"seed": sd, "mape": mape(J_flm, refs), "mae": float(err.mean()),
                         "max_pct_err": float((100 * err / np.array(refs)).max()),
                         "diverged": diverged, "status": "diverged" if diverged else "ok",
                         "wall_s": sum(sols[j * len(ics) + i].train_report.wall_s
                                       for i in range(len(ics)))})
    else:
        disk = cfg.get("disk", {})
        center = np.asarray(disk.get("center", [0.2, 0.2, 0.6]), dtype=float)
        radius = float(disk.get("radius", 0.15))
        n_train, n_test = int(disk.get("train", 250)), int(disk.get("test", 100))
        n_disks = int(disk.get("test_disks", 3))
        sample_seed = int(disk.get("sample_seed", 2024))
        try:
            U_train = sample_disk(center, radius, n_train, seed=(sample_seed, 0))
            centers = disk_centers(center, n_disks)
            tests = [sample_disk(c, radius, n_test, seed=(sample_seed, 1 + k))
                     for k, c in enumerate(centers)]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        refs = [np.array([s.J_star for s in solve_many(U, ocp_cfg, **pmp_kw)]) for U in tests]
        sols = _pool_map(_ocp_job, [("varying", U_train, ocp_cfg, N, adam, train_cfg, sd, stages)
                                    for sd in seeds], threads)
        for sd, sol in zip(seeds, sols):
            diverged = sol.train_report.stop_reason == "divergence"
            row = {"seed": sd, "diverged": diverged, "status": "diverged" if diverged else "ok",
                   "wall_s": sol.train_report.wall_s}
            for k, (U, ref) in enumerate(zip(tests, refs)):
                Jf = sol.objective_on_disk(U, k)
                comparison += [[sd, k, *u, a, b, 100 * abs(a - b) / b, abs(a - b)]
                               for u, a, b in zip(U, Jf, ref)]
                row[f"mape_disk{k}"] = mape(Jf, ref)
                row[f"mae_disk{k}"] = float(np.abs(Jf - ref).mean())
            row["mape"], row["mae"] = row["mape_disk0"], row["mae_disk0"]
            rows.append(row)
            for k, c in enumerate(centers):
                name = f"trajectory_{k}.csv" if len(seeds) == 1 else f"trajectory_{k}_seed{sd}.csv"
                files.append(write_csv(out / name, ["t", "u1", "u2", "u3", "gamma"],
                                       _trajectory_rows(sol, c, k)))
        for k in range(len(tests)):
            comparison += [["summary", k, math.nan, math.nan, math.nan, math.nan, math.nan,
                            r[f"mape_disk{k}"], r[f"mae_disk{k}"]] for r in rows]

    files.insert(0, write_csv(out / "objective_comparison.csv",
                              ["seed", "disk", "u01", "u02", "u03", "J_flm", "J_pmp", "pct_err",
                               "abs_err"], comparison))
    keys = sorted({k for r in rows for k in r if k.startswith(("mape", "mae", "max_pct"))})
    files.insert(0, write_csv(out / "metrics.csv", ["mode", "N", "seed", *keys, "wall_s", "status"],
                              [[mode, N, r["seed"], *[r.get(k, math.nan) for k in keys],
                                r["wall_s"], r["status"]] for r in rows]))
    return {"seeds": rows, "files": files, "aggregate": aggregate(rows, keys + ["wall_s"]),
            "all_diverged": all(r["diverged"] for r in rows)}


def run_bvp(cfg: dict, out: Path, threads: int = 1) -> dict:
    ocp_cfg = _ocp_config(cfg)
    ics = _ics(cfg, FIXED_ICS)
    try:
        sols = solve_many(ics, ocp_cfg, tol=float(cfg.get("tol", 1e-8)),
                          steps=int(cfg.get("steps", 2000)))
    except ConvergenceError as exc:
        return {"seeds": [], "files": [], "error": str(exc), "all_diverged": True}
    files = [write_csv(out / "j_star.csv", ["ic", "u01", "u02", "u03", "J_star", "residual_norm"],
                       [[i, *u0, s.J_star, s.residual_norm] for i, (u0, s) in enumerate(zip(ics, sols))])]
    for i, s in enumerate(sols):
        files.append(write_csv(out / f"trajectory_{i}.csv",
                               ["t", "u1", "u2", "u3", "lam1", "lam2", "lam3", "gamma"],
                               [[t, *u, *l, g] for t, u, l, g in zip(s.t, s.u, s.lam, s.gamma)]))
    return {"seeds": [], "files": files, "all_diverged": False,
            "references": [{"u0": u0.tolist(), "J_star": s.J_star,
                            "residual_norm": s.residual_norm} for u0, s in zip(ics, sols)]}


def run_translate(cfg: dict, out: Path, threads: int = 1) -> dict:
    ck = cfg.get("checkpoint")
    if not ck:
        raise ConfigError("translate needs a checkpoint path")
    try:
        model = flm_model.load(ck)
    except FileNotFoundError:
        raise ConfigError(f"checkpoint not found: {ck}") from None
    except flm_model.CheckpointError as exc:
        raise ConfigError(f"bad checkpoint {ck}: {exc}") from None
    m = model.m
    rows = [[idx, *n, k, mask, a] for idx, k, mask, a, n in translate_model(model)]
    name = write_csv(out / "coefficients.csv",
                     ["subnet", *[f"n{j + 1}" for j in range(m)], "k", "sine_mask", "a_k"], rows)
    return {"seeds": [], "files": [name], "all_diverged": False, "m": m, "N": model.N}


def run_sweep(cfg: dict, out: Path, threads: int = 1) -> dict:
    grid = cfg.get("grid")
    if not isinstance(grid, dict):
        raise ConfigError("sweep needs a 'grid' object with N, lr and betas axes")
    axes = {}
    for key in ("N", "lr", "betas"):
        vals = grid.get(key)
        if not isinstance(vals, list) or not vals:
            raise ConfigError(f"sweep grid axis {key!r} must be a non-empty list")
        axes[key] = vals
    for b in axes["betas"]:
        if not (isinstance(b, list) and len(b) == 2):
            raise ConfigError(f"each betas entry must be a pair, got {b!r}")
    seeds = _seeds(cfg)
    cells = []
    for N, lr, (b1, b2) in itertools.product(axes["N"], axes["lr"], axes["betas"]):
        c = dict(cfg, N=N, adam={"lr": lr, "beta1": b1, "beta2": b2})
        cells.append(_pde_settings(c))
    jobs = [(s, sd, str(out), False) for s in cells for sd in seeds]
    results = _pool_map(_pde_job, jobs, threads)
    rows, summary = [], []
    for ci, s in enumerate(cells):
        rs = results[ci * len(seeds):(ci + 1) * len(seeds)]
        rows += _pde_rows(s, rs)
        agg = aggregate(rs, ["mse", "mae", "max_err", "epochs"])
        summary.append({"N": s["N"], "lr": s["adam"].lr, "beta1": s["adam"].beta1,
                        "beta2": s["adam"].beta2, "aggregate": agg,
                        "diverged": sum(r["diverged"] for r in rs)})

    def rank(c):
        mse = c["aggregate"]["mse"]["mean"]
        ep = c["aggregate"]["epochs"]["mean"]
        return (math.inf if mse is None else mse, math.inf if ep is None else ep)

    best = min(range(len(summary)), key=lambda i: rank(summary[i]))
    files = [write_csv(out / "metrics.csv", PDE_COLS, rows)]
    files.append(write_csv(
        out / "cells.csv",
        ["N", "lr", "beta1", "beta2", "mse_mean", "mse_sd", "mae_mean", "mae_sd", "max_err_mean",
         "max_err_sd", "epochs_mean", "epochs_sd", "diverged", "best"],
        [[c["N"], c["lr"], c["beta1"], c["beta2"],
          *[c["aggregate"][k][q] if c["aggregate"][k][q] is not None else math.nan
            for k in ("mse", "mae", "max_err", "epochs") for q in ("mean", "sd")],
          c["diverged"], int(i == best)] for i, c in enumerate(summary)]))
    return {"seeds": [], "cells": summary, "best": summary[best], "files": files,
            "all_diverged": all(c["diverged"] == len(seeds) for c in summary)}


RUNNERS = {"pde": run_pde, "ocp": run_ocp, "bvp": run_bvp, "translate": run_translate,
           "sweep": run_sweep}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (AdamConfig, TrainConfig)):
        return asdict(obj)
    return obj


def execute(cfg: dict, out=None, threads: int = 1) -> dict:
    """Run an already-parsed config and write its manifest. Returns the manifest."""
    kind = cfg.get("kind")
    if kind not in RUNNERS:
        raise ConfigError(f"unknown experiment kind {kind!r}; valid options: {', '.join(KINDS)}")
    out = Path(out or os.environ.get("FLM_OUT") or cfg.get("out") or "flm_out")
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    result = RUNNERS[kind](cfg, out, threads)
    manifest = {"config": cfg, "out": str(out), "wall_s": time.perf_counter() - t0, **result}
    manifest["files"] = ["manifest.json", *result.get("files", [])]
    with open(out / "manifest.json", "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2)
    return manifest


def run(config_path, out=None, threads: int = 1) -> dict:
    return execute(load_config(config_path), out, threads)


def sweep(config_path, out=None, threads: int = 1) -> dict:
    cfg = load_config(config_path)
    cfg["kind"] = "sweep"
    return execute(cfg, out, threads)


SUBCOMMANDS = {"solve-pde": "pde", "solve-ocp": "ocp", "bvp-ref": "bvp",
               "translate-coeffs": "translate", "sweep": "sweep"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flm", description="Fourier Learning Machine experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--out", help="output directory (default: flm_out, or $FLM_OUT)")
        sp.add_argument("--seeds", help="e.g. 0..9 or 0,1,2")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for seeds")
        if name in ("solve-pde", "sweep"):
            sp.add_argument("--problem", help=f"one of {', '.join(PROBLEMS)}")
            sp.add_argument("--epochs", type=int, help="phase-1 epoch cap")
            sp.add_argument("--no-phase2", action="store_true")
        if name == "solve-pde":
            sp.add_argument("--N", type=int)
        if name == "solve-ocp":
            sp.add_argument("--mode", choices=("fixed", "varying"))
            sp.add_argument("--epochs", type=int)
        if name == "translate-coeffs":
            sp.add_argument("--checkpoint")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        cfg["kind"] = SUBCOMMANDS[args.command]
        if args.seeds:
            cfg["seeds"] = parse_seeds(args.seeds)
        if getattr(args, "problem", None):
            cfg["problem"] = args.problem
        if getattr(args, "N", None):
            cfg["N"] = args.N
        if getattr(args, "mode", None):
            cfg["mode"] = args.mode
        if getattr(args, "checkpoint", None):
            cfg["checkpoint"] = args.checkpoint
        if getattr(args, "epochs", None):
            cfg.setdefault("train", {})["max_epochs"] = args.epochs
        if getattr(args, "no_phase2", False):
            cfg.setdefault("train", {})["phase2"] = False
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        manifest = execute(cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if manifest.get("all_diverged"):
        print("every seed diverged", file=sys.stderr)
        return EXIT_DIVERGED
    print(f"wrote {len(manifest['files'])} files to {manifest['out']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

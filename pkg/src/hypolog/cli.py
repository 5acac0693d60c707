"""Reproducible experiment runner.

Every command resolves its configuration from defaults, an optional JSON
config document, and command-line flags (in that precedence order),
hashes the resolved configuration, and writes CSV/JSON artifacts that
embed the hash, seed, library version and the tolerance set in force.
Identical configuration and seed produce byte-identical artifacts except
for one isolated timestamp header line.

Exit codes: 0 success, 1 usage/configuration error (nothing written),
2 validation failure (an invariant check failed; artifacts are written
for inspection).

Commands: repr-validate, qms-spectrum, mlsi-estimate, cmlsi-table,
gradient-curve, kappa-lambda, transference-check, decay-trajectory,
prop-gradient-check, render.

Parallelism is capped by --threads (env fallback HYPOLOG_THREADS,
default 1); parallel sections use deterministic per-member sub-seeds and
order-independent reductions, so the thread count never changes results.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, gradest, mlsiopt, transfer
from .errors import HypologError, InvalidInput
from .numkit import EIGFLOOR
from .pwfun import random_function, random_positive_function
from .qms import (DensityMatrix, lindblad_generator, spectral_gap, verify_cp)
from .serialize import density_to_json
from .su2repr import build_generators, casimir, horizontal_eigenvalues, horizontal_symbol

DEFAULT_TOLERANCES = {
    "eigfloor": EIGFLOOR,
    "bracket_atol": 1e-10,
    "choi_min_eig": -1e-9,
    "trace_defect": 1e-10,
    "transference_exact": 1e-10,
    "transference_fd": 1e-6,
}


def _threads(config: dict) -> int:
    if config.get("threads"):
        return max(1, int(config["threads"]))
    return max(1, int(os.environ.get("HYPOLOG_THREADS", "1")))


def _parallel_map(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

def _config_hash(config: dict) -> str:
    stripped = {k: v for k, v in config.items() if k not in ("out",)}
    blob = json.dumps(stripped, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _meta(config: dict) -> dict:
    return {
        "schema": 1,
        "command": config["command"],
        "config_hash": _config_hash(config),
        "seed": config.get("seed"),
        "version": __version__,
        "tolerances": config.get("tolerances", DEFAULT_TOLERANCES),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
    }


def _write_json(path: Path, config: dict, results: dict) -> str:
    doc = {"meta": _meta(config), "results": results}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")
    return str(path)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, config: dict, header: list[str], rows: list[list],
               extra_comments: dict | None = None) -> str:
    meta = _meta(config)
    tol = json.dumps(meta["tolerances"], sort_keys=True, separators=(",", ":"))
    lines = ["# schema=1",
             f"# config_hash={meta['config_hash']} seed={meta['seed']} "
             f"version={meta['version']} tolerances={tol}"]
    for k, v in (extra_comments or {}).items():
        lines.append(f"# {k}={_fmt(v)}")
    lines.append(f"# timestamp={meta['timestamp']}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def _read_csv(path: str) -> tuple[dict, list[str], list[list[str]]]:
    comments: dict = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].strip().split():
                if "=" in token:
                    k, v = token.split("=", 1)
                    comments[k] = v
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    if header is None:
        raise InvalidInput(f"{path}: no header row")
    return comments, header, rows


def _curve_from_csv(path: str) -> gradest.GradientEstimateCurve:
    comments, header, rows = _read_csv(path)
    need = ["t", "C_hat", "stderr", "skipped"]
    missing = [c for c in need if c not in header]
    if missing:
        raise InvalidInput(f"{path}: missing columns {missing}")
    idx = {c: header.index(c) for c in need}
    return gradest.GradientEstimateCurve(
        times=np.array([float(r[idx["t"]]) for r in rows]),
        c_hat=np.array([float(r[idx["C_hat"]]) for r in rows]),
        stderr=np.array([float(r[idx["stderr"]]) for r in rows]),
        skipped=np.array([int(float(r[idx["skipped"]])) for r in rows]),
        ensemble_size=int(comments.get("ensemble", 0)),
        points=int(comments.get("points", 0)),
        m_max=int(comments.get("m_max", 0)),
        seed=int(comments.get("curve_seed", comments.get("seed", 0))))


# ---------------------------------------------------------------------------
# command implementations: each returns (results, ok, artifacts)
# ---------------------------------------------------------------------------

def _cmd_repr_validate(config: dict, out: Path):
    atol = config["tolerances"]["bracket_atol"]
    per_m = {}
    ok = True
    for m in range(1, config["m"] + 1):
        gen = build_generators(m)
        x, y, z = gen.as_tuple()
        resid = {
            "bracket_xy": float(np.abs(x @ y - y @ x - 2 * z).max()),
            "bracket_yz": float(np.abs(y @ z - z @ y - 2 * x).max()),
            "bracket_zx": float(np.abs(z @ x - x @ z - 2 * y).max()),
            "casimir": float(np.abs(casimir(gen) + (m * m - 1) * np.eye(m)).max()),
            "skew": max(float(np.abs(a + a.conj().T).max()) for a in (x, y, z)),
            "horizontal_diag": float(np.abs(
                np.diag(horizontal_symbol(gen)).real
                - horizontal_eigenvalues(m)).max()),
        }
        per_m[str(m)] = resid
        ok = ok and all(v <= atol for v in resid.values())
    results = {"per_m": per_m, "atol": atol, "all_within_atol": ok}
    return results, ok, [_write_json(out / "repr-validate.json", config, results)]


def _cmd_qms_spectrum(config: dict, out: Path):
    m, n = config["m"], config["n"]
    gen = build_generators(m)
    L = lindblad_generator(gen, n)
    w, _ = L.spectrum()
    results = {"m": m, "n": n, "dim": L.dim,
               "eigenvalues": [float(v) for v in w],
               "selfadjoint": L.is_selfadjoint(),
               "max_eigenvalue": float(w.max())}
    ok = results["selfadjoint"] and results["max_eigenvalue"] <= 1e-10
    try:
        results["gap"] = spectral_gap(L)
    except HypologError as exc:
        results["gap"] = None
        results["gap_error"] = str(exc)
    for t in (0.1, 1.0):
        rep = verify_cp(L, t)
        results[f"choi_min_eig_t{t}"] = rep["choi_min_eig"]
        results[f"trace_defect_t{t}"] = rep["trace_defect"]
        ok = ok and rep["choi_min_eig"] >= config["tolerances"]["choi_min_eig"]
        ok = ok and rep["trace_defect"] <= config["tolerances"]["trace_defect"]
    return results, ok, [_write_json(out / "qms-spectrum.json", config, results)]


def _cmd_mlsi_estimate(config: dict, out: Path):
    m, n = config["m"], config["n"]
    gen = build_generators(m)
    L = lindblad_generator(gen, n)
    est = mlsiopt.estimate_lambda(L, gen, n, multistarts=config["multistarts"],
                                  seed=config["seed"], budget=config["budget"])
    results = {"m": m, "n": n, "lambda_hat": est.lambda_hat, "gap": est.gap,
               "le_gap": est.le_gap, "argmin": density_to_json(est.argmin),
               "multistarts": est.multistarts, "budget": est.budget}
    if config.get("trace"):
        results["starts"] = est.starts
    return results, est.le_gap, [_write_json(out / "mlsi-estimate.json",
                                             config, results)]


def _cmd_cmlsi_table(config: dict, out: Path):
    rows = mlsiopt.cmlsi_table(config["m_list"], config["n_list"],
                               budget=config["budget"],
                               multistarts=config["multistarts"],
                               seed=config["seed"])
    header = ["m", "n", "lambda_hat", "gap", "starts", "budget", "seed"]
    table = [[r[k] for k in header] for r in rows]
    ok = all(r["le_gap"] for r in rows)
    return {"rows": rows}, ok, [
        _write_csv(out / "cmlsi-table.csv", config, header, table)]


def _time_grid(config: dict) -> np.ndarray:
    return gradest.default_time_grid(config["t_min"], config["t_max"],
                                     config["t_count"])


def _measure_curve(config: dict) -> gradest.GradientEstimateCurve:
    ctx = gradest.EstimationContext(config["m_max"], config["points"],
                                    config["seed"])
    # warm the per-member cache in parallel; reductions stay order-fixed
    _parallel_map(ctx.member, range(config["ensemble"]), _threads(config))
    rows = [gradest.estimate_constant(t, config["ensemble"], config["points"],
                                      config["m_max"], config["seed"],
                                      context=ctx)
            for t in _time_grid(config)]
    return gradest.GradientEstimateCurve(
        times=np.array([r["t"] for r in rows]),
        c_hat=np.array([r["c_hat"] for r in rows]),
        stderr=np.array([r["stderr"] for r in rows]),
        skipped=np.array([r["skipped"] for r in rows]),
        ensemble_size=config["ensemble"], points=config["points"],
        m_max=config["m_max"], seed=config["seed"])


def _curve_comments(curve: gradest.GradientEstimateCurve) -> dict:
    return {"ensemble": curve.ensemble_size, "points": curve.points,
            "m_max": curve.m_max, "curve_seed": curve.seed}


def _cmd_gradient_curve(config: dict, out: Path):
    curve = _measure_curve(config)
    rows = list(zip(curve.times, curve.c_hat, curve.stderr, curve.skipped))
    ok = bool(np.all(np.isfinite(curve.c_hat)) and np.all(curve.c_hat > 0))
    if curve.times[0] == 0.0:
        ok = ok and curve.c_hat[0] >= 0.95
    comments = _curve_comments(curve)
    comments["monotonicity_margin"] = curve.monotonicity_margin
    results = {"monotonicity_margin": curve.monotonicity_margin}
    return results, ok, [_write_csv(out / "gradient-curve.csv", config,
                                    ["t", "C_hat", "stderr", "skipped"], rows,
                                    extra_comments=comments)]


def _cmd_kappa_lambda(config: dict, out: Path):
    if config.get("curve"):
        curve = _curve_from_csv(config["curve"])
    else:
        curve = _measure_curve(config)
    est = gradest.kappa_and_lambda(curve, tail_from=config["tail_from"])
    best_eps, eps_table = gradest.lambda_eps_scan(curve, gap=config["gap"],
                                                  tail_from=config["tail_from"])
    results = est.to_dict()
    results["seeds"] = {"curve_seed": curve.seed,
                        "ensemble": curve.ensemble_size,
                        "points": curve.points, "m_max": curve.m_max}
    results["lambda_eps_best"] = best_eps.to_dict()
    results["lambda_eps_table"] = [e.to_dict() for e in eps_table]
    ok = est.lam > 0 and math.isfinite(est.kappa)
    return results, ok, [_write_json(out / "kappa-lambda.json", config, results)]


def _cmd_transference_check(config: dict, out: Path):
    m = config["m"]
    gen = build_generators(m)
    L = lindblad_generator(gen, 1)
    rho = DensityMatrix.random(m, config["seed"], min_eig=1e-3)
    gen_check = transfer.generator_transference_check(
        gen, rho.matrix, config["points"], seed=config["seed"])
    semi = transfer.semigroup_transference_check(
        gen, rho, L, [0.1, 1.0], config["points"], seed=config["seed"])
    ent = transfer.entropy_transference_check(
        gen, rho, L, [0.0, 0.5], min(config["points"], 50), seed=config["seed"])
    results = {"generator": gen_check, "semigroup": semi, "entropy": ent}
    tol = config["tolerances"]
    ok = (gen_check["max_residual_exact"] <= tol["transference_exact"]
          and gen_check["max_residual_fd"] <= tol["transference_fd"]
          and ent["max_deviation"] <= 1e-9)
    return results, ok, [_write_json(out / "transference-check.json",
                                     config, results)]


def _cmd_decay_trajectory(config: dict, out: Path):
    m, n = config["m"], config["n"]
    gen = build_generators(m)
    L = lindblad_generator(gen, n)
    d = m * n
    if config.get("p") is not None:
        if d != 2:
            raise InvalidInput("--p builds diag(p, 1-p); needs m*n = 2")
        rho0 = DensityMatrix(np.diag([config["p"], 1 - config["p"]]).astype(complex))
    else:
        rho0 = DensityMatrix.random(d, config["seed"], min_eig=1e-3)
    times = np.linspace(config["t_min"], config["t_max"], config["t_count"])
    if times[0] > 0:
        times = np.concatenate([[0.0], times])
    traj = mlsiopt.decay_trajectory(L, gen, rho0, times,
                                    lambda_hat=config.get("lambda_hat"))
    rows = list(zip(traj.times, traj.entropies, traj.fishers))
    extra = {}
    if config.get("lambda_hat") is not None:
        extra["lambda_hat"] = config["lambda_hat"]
    ok = traj.checks.get("envelope_ok", True)
    results = {"checks": traj.checks}
    return results, ok, [_write_csv(out / "decay-trajectory.csv", config,
                                    ["t", "entropy", "fisher"], rows,
                                    extra_comments=extra)]


def _cmd_prop_gradient_check(config: dict, out: Path):
    m_max, seed = config["m_max"], config["seed"]
    ctx = gradest.EstimationContext(m_max, config["points"], seed)
    results: dict = {"matrix_checks": [], "lieb_checks": []}
    ok = True
    for t in config["t_list"]:
        cert = gradest.estimate_constant(t, config["ensemble"],
                                         config["points"], m_max, seed,
                                         context=ctx)
        for n in config["n_list"]:
            fs = [random_function(m_max, seed=(seed, 40, n, i))
                  for i in range(n)]
            rep = gradest.matrix_gradient_check(fs, t, cert["c_hat"],
                                                config["points"], seed=seed)
            rep["certified_C"] = cert["c_hat"]
            results["matrix_checks"].append(rep)
            ok = ok and rep["min_margin"] >= -1e-6 * max(rep["scale"], 1.0)
        nv = config["n_list"][0]
        F = random_function(m_max, seed=(seed, 41), value_dim=nv)
        A = random_positive_function(m_max, nv, seed=(seed, 42))
        B = random_positive_function(m_max, nv, seed=(seed, 43))
        for s in config["s_list"]:
            rep = gradest.lieb_form_check(F, A, B, s, t, cert["c_hat"],
                                          config["points"], seed=seed)
            rep["certified_C"] = cert["c_hat"]
            results["lieb_checks"].append(rep)
            ok = ok and rep["relative_margin"] >= -3 * rep["relative_stderr"]
    return results, ok, [_write_json(out / "prop-gradient-check.json",
                                     config, results)]


def _cmd_render(config: dict, out: Path):
    from . import plots
    written = plots.render_csv(config["results"], str(out),
                               svg=config.get("svg", True))
    return {"plots": written}, True, written


# ---------------------------------------------------------------------------
# configuration plumbing
# ---------------------------------------------------------------------------

COMMANDS = {
    "repr-validate": (_cmd_repr_validate, {"m": 8}),
    "qms-spectrum": (_cmd_qms_spectrum, {"m": 2, "n": 1}),
    "mlsi-estimate": (_cmd_mlsi_estimate,
                      {"m": 2, "n": 1, "multistarts": 16, "budget": 2000,
                       "trace": False}),
    "cmlsi-table": (_cmd_cmlsi_table,
                    {"m_list": [2, 3], "n_list": [1, 2, 3],
                     "multistarts": 16, "budget": 2000}),
    "gradient-curve": (_cmd_gradient_curve,
                       {"m_max": 4, "ensemble": 64, "points": 2000,
                        "t_min": 0.01, "t_max": 3.0, "t_count": 40}),
    "kappa-lambda": (_cmd_kappa_lambda,
                     {"m_max": 4, "ensemble": 64, "points": 2000,
                      "t_min": 0.01, "t_max": 3.0, "t_count": 40,
                      "tail_from": 1.0, "gap": 2.0, "curve": None}),
    "transference-check": (_cmd_transference_check, {"m": 2, "points": 50}),
    "decay-trajectory": (_cmd_decay_trajectory,
                         {"m": 2, "n": 1, "p": None, "t_min": 0.0,
                          "t_max": 1.0, "t_count": 101, "lambda_hat": None}),
    "prop-gradient-check": (_cmd_prop_gradient_check,
                            {"m_max": 3, "ensemble": 16, "points": 600,
                             "t_list": [0.2, 1.0], "n_list": [2, 3],
                             "s_list": [0.25, 0.5, 0.75]}),
    "render": (_cmd_render, {"results": None, "svg": True}),
}

_GLOBAL_DEFAULTS = {"seed": 0, "out": "artifacts", "threads": None}


def resolve_config(command: str, file_config: dict | None,
                   overrides: dict) -> dict:
    if command not in COMMANDS:
        raise InvalidInput(f"unknown command {command!r}")
    config = dict(_GLOBAL_DEFAULTS)
    config["tolerances"] = dict(DEFAULT_TOLERANCES)
    config.update(COMMANDS[command][1])
    for source in (file_config or {}), overrides:
        for k, v in source.items():
            if v is None:
                continue
            if k == "tolerances":
                config["tolerances"].update(v)
            else:
                config[k] = v
    config["command"] = command
    unknown = set(config) - set(_GLOBAL_DEFAULTS) - set(COMMANDS[command][1]) \
        - {"command", "tolerances"}
    if unknown:
        raise InvalidInput(f"unknown config fields for {command}: {sorted(unknown)}")
    missing = [k for k, v in config.items()
               if v is None and k in ("results",)]
    if missing:
        raise InvalidInput(f"missing required config fields: {missing}")
    _typecheck_config(command, config)
    return config


_FIELD_TYPES = {
    int: (int,), float: (int, float), str: (str,), bool: (bool,),
    list: (list,),
}


def _typecheck_config(command: str, config: dict) -> None:
    reference = dict(_GLOBAL_DEFAULTS)
    reference.update(COMMANDS[command][1])
    bad = []
    for key, default in reference.items():
        value = config.get(key)
        if value is None or default is None:
            continue
        allowed = _FIELD_TYPES.get(type(default), (type(default),))
        if not isinstance(value, allowed) or isinstance(value, bool) != isinstance(default, bool):
            bad.append(f"{key}={value!r} (expected {type(default).__name__})")
    for key in ("seed", "threads"):
        value = config.get(key)
        if value is not None and not isinstance(value, int):
            bad.append(f"{key}={value!r} (expected int)")
    if bad:
        raise InvalidInput(f"config fields with wrong types: {', '.join(bad)}")


def run(config: dict) -> int:
    """Execute one resolved configuration; returns the exit code."""
    command = config["command"]
    runner = COMMANDS[command][0]
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    _, ok, artifacts = runner(config, out)
    for a in artifacts:
        print(a)
    return 0 if ok else 2


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypolog",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command")
    specs = {
        "repr-validate": [("--m", int, None)],
        "qms-spectrum": [("--m", int, None), ("--n", int, None)],
        "mlsi-estimate": [("--m", int, None), ("--n", int, None),
                          ("--multistarts", int, None), ("--budget", int, None),
                          ("--trace", "flag", None)],
        "cmlsi-table": [("--m-list", _int_list, "m_list"),
                        ("--n-list", _int_list, "n_list"),
                        ("--multistarts", int, None), ("--budget", int, None)],
        "gradient-curve": [("--m-max", int, "m_max"), ("--ensemble", int, None),
                           ("--points", int, None), ("--t-min", float, "t_min"),
                           ("--t-max", float, "t_max"),
                           ("--t-count", int, "t_count")],
        "kappa-lambda": [("--m-max", int, "m_max"), ("--ensemble", int, None),
                         ("--points", int, None), ("--t-min", float, "t_min"),
                         ("--t-max", float, "t_max"),
                         ("--t-count", int, "t_count"),
                         ("--tail-from", float, "tail_from"),
                         ("--gap", float, None), ("--curve", str, None)],
        "transference-check": [("--m", int, None), ("--points", int, None)],
        "decay-trajectory": [("--m", int, None), ("--n", int, None),
                             ("--p", float, None), ("--t-min", float, "t_min"),
                             ("--t-max", float, "t_max"),
                             ("--t-count", int, "t_count"),
                             ("--lambda-hat", float, "lambda_hat")],
        "prop-gradient-check": [("--m-max", int, "m_max"),
                                ("--ensemble", int, None),
                                ("--points", int, None),
                                ("--t-list", _float_list, "t_list"),
                                ("--n-list", _int_list, "n_list"),
                                ("--s-list", _float_list, "s_list")],
        "render": [("results", str, None), ("--svg", "flag", None)],
    }
    for name, flags in specs.items():
        sp = sub.add_parser(name)
        for flag, kind, dest in flags:
            dest = dest or flag.lstrip("-").replace("-", "_")
            if kind == "flag":
                sp.add_argument(flag, dest=dest, action="store_true",
                                default=None)
            elif not flag.startswith("-"):
                sp.add_argument(flag)
            else:
                sp.add_argument(flag, dest=dest, type=kind, default=None)
        sp.add_argument("--config", type=str, default=None)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--threads", type=int, default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        file_config = None
        cfg_path = getattr(args, "config", None)
        if cfg_path:
            file_config = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
            if not isinstance(file_config, dict):
                raise InvalidInput("config document must be a JSON object")
        overrides = {k: v for k, v in vars(args).items()
                     if k not in ("command", "config") and v is not None}
        config = resolve_config(args.command, file_config, overrides)
    except (InvalidInput, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return run(config)
    except InvalidInput as exc:
        # bad inputs discovered mid-run (missing files/columns, unusable
        # grids) are usage errors, not invariant failures
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except HypologError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

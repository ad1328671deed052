"""Command-line experiment runner.

Verbs: pretrain, train, scan-hessian, scan-scaling, bounds. Every command
reads a JSON config (schema in docs/config_schema.md), writes its outputs
plus a manifest.json into --out, and is deterministic given the seed:
re-running a manifest reproduces byte-identical CSV files.

Exit codes: 0 success, 2 config error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .calculus import hessian_spectrum_scan, scan_summary
from .gibbs import Target
from .operators import ANSATZ_KINDS, Ansatz, build_ansatz
from .pretrain import PretrainResult, embed, gf_fit, gl_fit, mf_fit
from .targets import Dataset, encode_dataset, fermionic_correlations, synth_dataset, xxz_target
from .trainer import (
    NOISE_KINDS,
    SCHEDULE_KINDS,
    NoiseModel,
    TrainingAborted,
    TrainingConfig,
    sgd_train,
    theorem_bounds,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

PRETRAIN_METHODS = ("mean_field", "gaussian_fermionic", "gl_1d", "gl_2d")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _require(cfg: dict, key: str, ctx: str):
    if key not in cfg:
        raise ConfigError(f"{ctx}: missing required key {key!r}")
    return cfg[key]


def load_config(path: Path, command: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"config root must be a JSON object, got {type(cfg).__name__}")
    if "command" in cfg and "config" in cfg:
        # a manifest from a previous run; re-running it must reproduce the outputs
        if cfg["command"] != command:
            raise ConfigError(
                f"manifest {path} was written by command {cfg['command']!r}, not {command!r}")
        cfg = cfg["config"]
    return cfg


def resolve_path(base_dir: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else (base_dir / p).resolve()


def build_target(tcfg: dict, base_dir: Path, seed: int) -> Target:
    kind = _require(tcfg, "kind", "target")
    try:
        if kind == "xxz":
            n = int(_require(tcfg, "n", "target.xxz"))
            return xxz_target(n, J=float(tcfg.get("J", -0.5)), Delta=float(tcfg.get("Delta", -0.7)),
                              h_z=float(tcfg.get("h_z", -0.8)),
                              periodic=bool(tcfg.get("periodic", False)))
        if kind == "dataset":
            path = resolve_path(base_dir, _require(tcfg, "path", "target.dataset"))
            try:
                return encode_dataset(Dataset.from_file(path))
            except FileNotFoundError:
                raise ConfigError(f"dataset file not found: {path}") from None
        if kind == "synthetic":
            n = int(_require(tcfg, "n", "target.synthetic"))
            M = int(_require(tcfg, "M", "target.synthetic"))
            ds = synth_dataset(n, M, seed=int(tcfg.get("seed", seed)),
                               model=tcfg.get("model", "pairwise_ising"),
                               p=float(tcfg.get("p", 0.5)), scale=float(tcfg.get("scale", 0.5)))
            target = encode_dataset(ds)
            target.meta.update({"kind": "synthetic",
                                "note": "synthetic stand-in dataset; supply target.kind=dataset for real data",
                                "model": tcfg.get("model", "pairwise_ising"),
                                "seed": int(tcfg.get("seed", seed)), "M": M})
            return target
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"target: {exc}") from None
    raise ConfigError(f"target.kind must be xxz, dataset, or synthetic, got {kind!r}")


def build_ansatz_cfg(acfg: dict) -> Ansatz:
    kind = _require(acfg, "kind", "ansatz")
    if kind not in ANSATZ_KINDS:
        raise ConfigError(f"ansatz.kind must be one of {ANSATZ_KINDS}, got {kind!r}")
    n = int(_require(acfg, "n", "ansatz"))
    dims = acfg.get("dims")
    per = acfg.get("periodic")
    try:
        return build_ansatz(kind, n, dims=tuple(dims) if dims else None,
                            periodic=tuple(per) if isinstance(per, list) else per)
    except ValueError as exc:
        raise ConfigError(f"ansatz: {exc}") from None


def build_noise(ncfg: dict) -> NoiseModel:
    kind = ncfg.get("kind", "exact")
    if kind not in NOISE_KINDS:
        raise ConfigError(f"noise.kind must be one of {NOISE_KINDS}, got {kind!r}")
    try:
        return NoiseModel(kind=kind, kappa=float(ncfg.get("kappa", 0.0)),
                          xi=float(ncfg.get("xi", 0.0)), shots=int(ncfg.get("shots", 0)))
    except ValueError as exc:
        raise ConfigError(f"noise: {exc}") from None


def check_schedule(scfg: dict) -> dict:
    kind = scfg.get("kind")
    if kind not in SCHEDULE_KINDS:
        raise ConfigError(f"schedule.kind must be one of {SCHEDULE_KINDS}, got {kind!r}")
    return scfg


# ---------------------------------------------------------------------------
# deterministic file output
# ---------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, header: tuple, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(out: Path, command: str, cfg: dict, seed: int) -> None:
    write_json(out / "manifest.json",
               {"command": command, "version": __version__, "seed": seed, "config": cfg})


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_pretrain(cfg: dict, out: Path, base_dir: Path, seed: int) -> None:
    target = build_target(_require(cfg, "target", "pretrain config"), base_dir, seed)
    n = target.n
    methods = cfg.get("methods", list(PRETRAIN_METHODS))
    bad = set(methods) - set(PRETRAIN_METHODS)
    if bad:
        raise ConfigError(f"unknown pretrain methods {sorted(bad)}")
    gl_cfg = cfg.get("gl", {})
    stop_tol = float(gl_cfg.get("stop_tol", 0.01))
    max_iters = int(gl_cfg.get("max_iters", 100_000))
    gamma_lr = gl_cfg.get("lr")

    baseline = n * np.log(2) + target.eta_entropy
    rows = [("none", baseline, 0)]
    for method in methods:
        if method == "mean_field":
            res = mf_fit(target)
        elif method == "gaussian_fermionic":
            res = gf_fit(fermionic_correlations(target), target=target)
        else:
            if method == "gl_1d":
                spec = {"kind": "gl_1d", "n": n, "periodic": gl_cfg.get("periodic_1d", True)}
            else:
                spec = {"kind": "gl_2d", "n": n, "dims": gl_cfg.get("dims_2d"),
                        "periodic": gl_cfg.get("periodic_2d")}
            ans = build_ansatz_cfg(spec)
            res = gl_fit(target, ans, gamma_lr=gamma_lr, stop_tol=stop_tol,
                         max_iters=max_iters, method=method)
        rows.append((method, res.achieved_entropy, res.iterations))
        write_json(out / f"pretrain_{method}.json", res.to_dict())
    write_csv(out / "pretrain_summary.csv", ("method", "entropy", "iterations"), rows)
    write_json(out / "summary.json", {
        "n": n, "baseline_entropy": float(baseline), "target": target.meta,
        "rows": [{"method": r[0], "entropy": float(r[1]), "iterations": int(r[2])} for r in rows],
    })


def _resolve_theta0(cfg: dict, ansatz: Ansatz, base_dir: Path) -> tuple[Ansatz, np.ndarray, dict]:
    spec = cfg.get("theta0", "zeros")
    info = {"theta0": "zeros"}
    if spec == "zeros":
        return ansatz, np.zeros(ansatz.m), info
    if isinstance(spec, list):
        theta0 = np.asarray(spec, dtype=float)
        if theta0.shape != (ansatz.m,):
            raise ConfigError(f"theta0 list has length {len(spec)}, ansatz has m={ansatz.m}")
        return ansatz, theta0, {"theta0": "explicit"}
    if isinstance(spec, dict) and "pretrain_file" in spec:
        path = resolve_path(base_dir, spec["pretrain_file"])
        try:
            with open(path) as fh:
                pre = PretrainResult.from_dict(json.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"pretrain file not found: {path}") from None
        if pre.sub_ansatz.n != ansatz.n:
            raise ConfigError(f"pretrain file is for n={pre.sub_ansatz.n}, ansatz has n={ansatz.n}")
        extensions = [t for t in ansatz.terms if t not in set(pre.sub_ansatz.terms)]
        full, theta0 = embed(pre, extensions)
        return full, theta0, {"theta0": "pretrain", "pretrain_method": pre.method,
                              "pretrain_file": str(path)}
    raise ConfigError("theta0 must be 'zeros', a list of floats, or {'pretrain_file': path}")


def cmd_train(cfg: dict, out: Path, base_dir: Path, seed: int) -> None:
    target = build_target(_require(cfg, "target", "train config"), base_dir, seed)
    ansatz = build_ansatz_cfg(_require(cfg, "ansatz", "train config"))
    if ansatz.n != target.n:
        raise ConfigError(f"ansatz n={ansatz.n} does not match target n={target.n}")
    ansatz, theta0, start_info = _resolve_theta0(cfg, ansatz, base_dir)
    noise = build_noise(cfg.get("noise", {"kind": "exact"}))
    schedule = check_schedule(_require(cfg, "schedule", "train config"))
    try:
        tc = TrainingConfig(
            ansatz=ansatz, theta0=theta0, target=target, noise=noise, schedule=schedule,
            epsilon=float(_require(cfg, "epsilon", "train config")),
            max_iters=int(_require(cfg, "max_iters", "train config")),
            seed=seed, record_every=int(cfg.get("record_every", 1)))
    except ValueError as exc:
        raise ConfigError(f"train config: {exc}") from None
    t0 = time.perf_counter()
    trace = sgd_train(tc)
    wall = time.perf_counter() - t0
    trace.write_csv(out / "trace.csv")
    summary = trace.summary()
    summary.update({"wall_time_s": wall, "n": ansatz.n, "m": ansatz.m,
                    "target": target.meta, **start_info})
    write_json(out / "summary.json", summary)
    write_json(out / "final_theta.json",
               {"terms": [t.letters for t in ansatz.terms],
                "theta": [float(x) for x in trace.final_theta]})


def cmd_scan_hessian(cfg: dict, out: Path, base_dir: Path, seed: int) -> None:
    kinds = cfg.get("kinds", ["gl_1d", "fully_connected"])
    bad = set(kinds) - set(ANSATZ_KINDS)
    if bad:
        raise ConfigError(f"unknown ansatz kinds {sorted(bad)}")
    n_list = [int(v) for v in _require(cfg, "n_list", "scan-hessian config")]
    mu_list = [float(v) for v in cfg.get("mu_list", [0.5, 1.0])]
    instances = int(cfg.get("instances", 25))
    periodic = cfg.get("periodic", False)
    records = []
    for kind in kinds:
        for mu in mu_list:
            try:
                records.extend(hessian_spectrum_scan(kind, n_list, mu, instances, seed,
                                                     periodic=periodic))
            except ValueError as exc:
                raise ConfigError(f"scan-hessian: {exc}") from None
    write_csv(out / "hessian_scan.csv",
              ("kind", "n", "mu", "instance", "min_eig", "max_eig"),
              ((r.kind, r.n, r.mu, r.instance, r.min_eig, r.max_eig) for r in records))
    write_json(out / "summary.json", {"groups": scan_summary(records), "seed": seed})


def cmd_scan_scaling(cfg: dict, out: Path, base_dir: Path, seed: int) -> None:
    mode = cfg.get("mode", "vs_n")
    if mode not in ("vs_n", "vs_eps"):
        raise ConfigError(f"scan-scaling mode must be vs_n or vs_eps, got {mode!r}")
    noise = build_noise(cfg.get("noise", {"kind": "gaussian",
                                          "kappa": float(np.sqrt(0.005)),
                                          "xi": float(np.sqrt(0.005))}))
    schedule = check_schedule(cfg.get("schedule", {"kind": "thm1"}))
    max_iters = int(cfg.get("max_iters", 200_000))
    ansatz_kind = cfg.get("ansatz_kind", "fully_connected")
    tcfg_base = cfg.get("target", {"kind": "xxz"})
    record_every = int(cfg.get("record_every", 1000))

    points = []
    if mode == "vs_n":
        xs = [int(v) for v in _require(cfg, "n_list", "scan-scaling config")]
    else:
        xs = [float(v) for v in _require(cfg, "eps_list", "scan-scaling config")]
        fixed_n = int(_require(cfg, "n", "scan-scaling config"))

    for k, x in enumerate(xs):
        n = int(x) if mode == "vs_n" else fixed_n
        eps = float(cfg.get("epsilon", 0.1)) if mode == "vs_n" else float(x)
        tcfg = dict(tcfg_base)
        tcfg["n"] = n
        target = build_target(tcfg, base_dir, seed)
        ansatz = build_ansatz(ansatz_kind, n)
        run_seed = int(np.random.SeedSequence([seed, k]).generate_state(1)[0])
        try:
            tc = TrainingConfig(ansatz=ansatz, theta0=np.zeros(ansatz.m), target=target,
                                noise=noise, schedule=schedule, epsilon=eps,
                                max_iters=max_iters, seed=run_seed, record_every=record_every)
        except ValueError as exc:
            raise ConfigError(f"scan-scaling config: {exc}") from None
        trace = sgd_train(tc)
        points.append({"x": x, "n": n, "m": ansatz.m, "epsilon": eps,
                       "iterations": trace.converged_at, "converged": trace.converged})

    good = [p for p in points if p["converged"] and p["iterations"] and p["iterations"] > 0]
    slope = None
    if len(good) >= 2:
        if mode == "vs_n":
            lx = np.log([p["n"] for p in good])
        else:
            lx = np.log([1.0 / p["epsilon"] for p in good])
        ly = np.log([p["iterations"] for p in good])
        slope = float(np.polyfit(lx, ly, 1)[0])

    if mode == "vs_n":
        write_csv(out / "scaling_scan.csv", ("n", "m", "iterations", "converged"),
                  ((p["n"], p["m"], p["iterations"] if p["iterations"] is not None else -1,
                    p["converged"]) for p in points))
    else:
        write_csv(out / "scaling_scan.csv", ("epsilon", "inv_epsilon", "iterations", "converged"),
                  ((p["epsilon"], 1.0 / p["epsilon"],
                    p["iterations"] if p["iterations"] is not None else -1,
                    p["converged"]) for p in points))
    write_json(out / "summary.json", {"mode": mode, "slope": slope, "points": points, "seed": seed})


def cmd_bounds(cfg: dict, out: Path, base_dir: Path, seed: int) -> None:
    try:
        report = theorem_bounds(
            m=int(_require(cfg, "m", "bounds config")),
            kappa=float(_require(cfg, "kappa", "bounds config")),
            xi=float(_require(cfg, "xi", "bounds config")),
            epsilon=float(_require(cfg, "epsilon", "bounds config")),
            delta0=float(_require(cfg, "delta0", "bounds config")),
            alpha=(float(cfg["alpha"]) if cfg.get("alpha") is not None else None),
            lambda_success=float(cfg.get("lambda_success", 0.99)),
            k_locality=(int(cfg["k_locality"]) if cfg.get("k_locality") is not None else None))
    except ValueError as exc:
        raise ConfigError(f"bounds config: {exc}") from None
    write_json(out / "bounds.json", report)
    print(json.dumps(report, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# --small presets (CI-sized runs)
# ---------------------------------------------------------------------------

def apply_small(command: str, cfg: dict) -> dict:
    cfg = copy.deepcopy(cfg)
    def shrink_target(t):
        if isinstance(t, dict) and t.get("kind") in ("xxz", "synthetic"):
            t["n"] = min(int(t.get("n", 4)), 4)
    if command == "pretrain":
        shrink_target(cfg.get("target"))
        cfg.setdefault("gl", {})
        cfg["gl"]["max_iters"] = min(int(cfg["gl"].get("max_iters", 100_000)), 5000)
        cfg["gl"].pop("dims_2d", None)
    elif command == "train":
        shrink_target(cfg.get("target"))
        if "ansatz" in cfg:
            cfg["ansatz"]["n"] = min(int(cfg["ansatz"].get("n", 4)), 4)
            cfg["ansatz"].pop("dims", None)
        cfg["max_iters"] = min(int(cfg.get("max_iters", 2000)), 2000)
    elif command == "scan-hessian":
        cfg["n_list"] = [n for n in cfg.get("n_list", [2, 3]) if n <= 3] or [2, 3]
        cfg["instances"] = min(int(cfg.get("instances", 25)), 5)
    elif command == "scan-scaling":
        if cfg.get("mode", "vs_n") == "vs_n":
            cfg["n_list"] = [n for n in cfg.get("n_list", [2, 3]) if n <= 3] or [2, 3]
        cfg["max_iters"] = min(int(cfg.get("max_iters", 20_000)), 20_000)
    return cfg


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS = {
    "pretrain": cmd_pretrain,
    "train": cmd_train,
    "scan-hessian": cmd_scan_hessian,
    "scan-scaling": cmd_scan_scaling,
    "bounds": cmd_bounds,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qbmlab", description="Quantum Boltzmann machine learning experiments")
    parser.add_argument("--version", action="version", version=f"qbmlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("pretrain", "run the pre-training strategies and a no-pretraining baseline"),
        ("train", "stochastic gradient descent on the relative entropy"),
        ("scan-hessian", "Hessian minimum-eigenvalue scan over random instances"),
        ("scan-scaling", "iterations-to-precision scan with a log-log slope fit"),
        ("bounds", "evaluate the closed-form iteration/sample-count bounds"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default="out", help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--small", action="store_true", help="CI preset: shrink sizes and caps")
    args = parser.parse_args(argv)

    try:
        cfg_path = Path(args.config)
        cfg = load_config(cfg_path, args.command)
        if args.small:
            cfg = apply_small(args.command, cfg)
        seed = args.seed if args.seed is not None else cfg.get("seed")
        if seed is None:
            raise ConfigError("a seed is mandatory: set 'seed' in the config or pass --seed")
        seed = int(seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_manifest(out, args.command, cfg, seed)
        COMMANDS[args.command](cfg, out, cfg_path.resolve().parent, seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingAborted as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Batch front-end: load specs, run verification pipelines, emit reports.

Every subcommand reads a JSON or TOML config, runs its pipeline, writes a
machine-readable JSON report (plus CSV tables where applicable), and exits
with 0 when all checks pass, 2 when a check fails, and 1 on bad input.
Reports embed the tolerances actually used, the seed, the worker count, and
the kernel backend, and are byte-stable for fixed inputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import fisher as fisher_mod
from . import holonomy as holonomy_mod
from . import measure as measure_mod
from . import sld as sld_mod
from . import stochastic as stochastic_mod
from .errors import QigkitError
from .families import evaluate, family_from_spec, velocities
from .space import ConfigurationSpace, grid_space

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_CHECK_FAILED = 2


def load_structured(path: str) -> dict:
    """Parse a JSON or TOML mapping by file extension."""
    if path.endswith(".toml"):
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path) as fh:
        return json.load(fh)


def _resolve_family(config: dict, base_dir: str):
    spec = dict(config.get("family", {}))
    if not spec:
        raise ValueError("config is missing the 'family' table")
    space = spec.get("space")
    if isinstance(space, str):
        with open(os.path.join(base_dir, space)) as fh:
            spec["space"] = json.loads(fh.read())
    if isinstance(spec.get("csv"), str):
        spec["csv"] = os.path.join(base_dir, spec["csv"])
    return family_from_spec(spec)


def _resolve_xs(config: dict, dim: int) -> np.ndarray:
    xs = np.asarray(config.get("xs", [[0.0] * dim]), dtype=float)
    if xs.ndim == 1:
        xs = xs[:, np.newaxis]
    if xs.shape[1] != dim:
        raise ValueError(f"'xs' entries have {xs.shape[1]} coordinates, family has {dim}")
    return xs


class Tolerances:
    """Defaults plus --tol-override NAME=VALUE entries; records what was used."""

    def __init__(self, overrides: dict):
        self.overrides = overrides
        self.used: dict = {}

    def get(self, name: str, default: float) -> float:
        value = float(self.overrides.get(name, default))
        self.used[name] = value
        return value


def _check(name: str, value: float, tolerance: float, **extra) -> dict:
    entry = {"name": name, "value": float(value), "tolerance": float(tolerance),
             "pass": bool(value <= tolerance)}
    entry.update(extra)
    return entry


def _write_report(report: dict, out_dir: str, csv_rows=None, csv_name=None,
                  csv_path=None) -> str:
    os.makedirs(out_dir, exist_ok=True)
    if csv_rows is not None:
        target = csv_path or os.path.join(out_dir, csv_name)
        with open(target, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerows(csv_rows)
    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def run_fisher(config, tols, env) -> tuple[dict, list]:
    family = _resolve_family(config, env["base_dir"])
    xs = _resolve_xs(config, family.dim)
    tol = tols.get("three-way", 1e-8)
    checks, rows = [], [["x" + str(i + 1) for i in range(family.dim)]
                        + [f"g{a + 1}{b + 1}" for a in range(family.dim)
                           for b in range(family.dim)] + ["method"]]
    for x in xs:
        psi = evaluate(family, x)
        vel = velocities(family, x)
        metrics = {
            "anticommutator": fisher_mod.qfi_anticommutator(family, x),
            "covariance": fisher_mod.qfi_covariance(vel, psi, family.constants),
            "overlap": fisher_mod.qfi_overlap(family, x),
        }
        for method, metric in metrics.items():
            rows.append(list(np.atleast_1d(x)) + list(metric.g.ravel()) + [method])
        gs = [m.g for m in metrics.values()]
        worst = max(float(np.max(np.abs(a - b))) for a in gs for b in gs)
        checks.append(_check("three-way-agreement", worst, tol, x=list(np.atleast_1d(x))))
    return {"checks": checks}, rows


def run_sld_check(config, tols, env) -> tuple[dict, None]:
    family = _resolve_family(config, env["base_dir"])
    xs = _resolve_xs(config, family.dim)
    t_equiv = tols.get("form-equivalence", 1e-9)
    t_resid = tols.get("defining-residual", 1e-9)
    t_sa = tols.get("self-adjoint", 1e-10)
    t_expect = tols.get("zero-expectation", 1e-10)
    checks = []
    exports = []
    for ix, x in enumerate(xs):
        psi = evaluate(family, x)
        vel = velocities(family, x)
        for mu in range(family.dim):
            canonical = sld_mod.sld_canonical(family, x, mu)
            from_eta = sld_mod.sld_eta(vel, psi, family.constants, mu)
            where = {"x": list(np.atleast_1d(x)), "axis": mu}
            checks.append(_check("form-equivalence",
                                 (canonical.op - from_eta.op).one_norm(), t_equiv, **where))
            checks.append(_check("defining-residual",
                                 sld_mod.sld_residual(from_eta, family, x, mu),
                                 t_resid, **where))
            checks.append(_check("self-adjoint", from_eta.op.selfadjoint_defect(),
                                 t_sa, **where))
            checks.append(_check("zero-expectation", abs(from_eta.op.expectation(psi)),
                                 t_expect, **where))
            if config.get("export_operators"):
                exports.append((f"sld_operator_x{ix}_mu{mu}.json", from_eta.export_dict()))
    return {"checks": checks, "exports": exports}, None


def run_holonomy(config, tols, env) -> tuple[dict, None]:
    family = _resolve_family(config, env["base_dir"])
    loop_spec = config.get("loop")
    if loop_spec is None:
        raise ValueError("config is missing the 'loop' table")
    if isinstance(loop_spec, str):
        loop_spec = load_structured(os.path.join(env["base_dir"], loop_spec))
    loop = holonomy_mod.loop_from_spec(loop_spec)
    im_tol = tols.get("im-part", 1e-6)
    report = holonomy_mod.compute_holonomy(family, loop, im_tol=im_tol)
    checks = [
        _check("im-part", report.im_defect, im_tol),
        _check("integral-vs-accumulate", abs(report.phase - report.oracle_phase),
               tols.get("oracle-match", 1e-6)),
        _check("sample-spread", report.phi_spread, tols.get("sample-spread", 1e-6)),
    ]
    return {"checks": checks, "holonomy": report.as_dict()}, None


def run_measure_invariance(config, tols, env) -> tuple[dict, None]:
    family = _resolve_family(config, env["base_dir"])
    xs = _resolve_xs(config, family.dim)
    w_spec = config.get("w", {"kind": "random", "seed": env["seed"], "bound": 1.0})
    if "values" in w_spec:
        change = measure_mod.MeasureChange(w_log=np.asarray(w_spec["values"], dtype=float),
                                           space=family.space)
    elif w_spec.get("kind") == "sine":
        phi = family.space.coords
        w = w_spec.get("amplitude", 0.3) * np.sin(w_spec.get("frequency", 1.0) * phi)
        change = measure_mod.MeasureChange(w_log=w, space=family.space)
    elif w_spec.get("kind") == "random":
        change = measure_mod.random_smooth_log_density(
            family.space, seed=int(w_spec.get("seed", env["seed"])),
            bound=float(w_spec.get("bound", 1.0)))
    else:
        raise ValueError(f"unknown measure-change spec {w_spec!r}")
    report = measure_mod.verify_measure_independence(family, xs, change)
    checks = [
        _check("unitarity", report.unitarity_defect, tols.get("unitarity", 1e-12)),
        _check("state-match", report.state_match_defect, tols.get("state-match", 1e-10)),
        _check("intertwining", report.intertwining_defect, tols.get("intertwining", 1e-9)),
        _check("metric", report.metric_defect, tols.get("metric", 1e-9)),
    ]
    return {"checks": checks, "defects": report.as_dict()}, None


def run_stochastic_average(config, tols, env, args) -> tuple[dict, list]:
    sigma_h = args.sigma_h if args.sigma_h is not None else float(config.get("sigma_h", 1.0))
    samples = args.samples if args.samples is not None else int(config.get("samples", 10000))
    action_name = args.action or config.get("action", "linear")
    action = stochastic_mod.toy_action(action_name, k_s0=float(config.get("k_s0", 0.0)))
    if "space" in config:
        sp = config["space"]
        space = (ConfigurationSpace.from_json(json.dumps(sp)) if "points" in sp
                 else grid_space(sp["lo"], sp["hi"], sp["n"],
                                 reference=sp.get("reference", "uniform")))
    else:
        space = grid_space(-3.0, 3.0, 61)
    xs = np.asarray(config.get("xs", [[0.0] * action.dim]), dtype=float)
    if xs.ndim == 1:
        xs = xs[:, np.newaxis]

    ensemble = stochastic_mod.gaussian_ensemble(sigma_h, samples, env["seed"])
    mc = stochastic_mod.averaged_amplitude(action, ensemble, space, xs,
                                           workers=env["workers"])
    oracle = stochastic_mod.cumulant_oracle(action, sigma_h, space, xs)
    err = np.abs(mc.values - oracle.values)
    bound = tols.get("clt-bound", 5.0 / np.sqrt(samples))
    checks = [_check("mc-vs-oracle", float(err.max()), bound)]
    rows = [["phi", "x", "re_k", "im_k", "abs_k",
             "re_oracle", "im_oracle", "abs_oracle", "abs_error"]]
    for j, x in enumerate(xs):
        for i, phi in enumerate(space.coords):
            k = mc.values[i, j]
            o = oracle.values[i, j]
            rows.append([phi, " ".join(map(str, x)), k.real, k.imag, abs(k),
                         o.real, o.imag, abs(o), abs(k - o)])
    extra = {"sigma_h": sigma_h, "samples": samples, "action": action_name,
             "backend": mc.backend}
    return {"checks": checks, "stochastic": extra}, rows


def _parse_tol_overrides(entries) -> dict:
    overrides = {}
    for entry in entries or []:
        name, sep, value = entry.partition("=")
        if not sep:
            raise ValueError(f"--tol-override expects NAME=VALUE, got {entry!r}")
        overrides[name] = float(value)
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qigkit",
                                     description="verification pipelines for weighted-grid "
                                                 "quantum information geometry")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fisher", "sld-check", "holonomy", "measure-invariance",
                 "stochastic-average"):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON or TOML run config")
        p.add_argument("--out", default="qigkit-out",
                       help="output directory (or .csv path for stochastic-average)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int,
                       default=int(os.environ.get("QIGKIT_WORKERS", "1")))
        p.add_argument("--tol-override", action="append", default=[],
                       metavar="NAME=VALUE")
        if name == "stochastic-average":
            p.add_argument("--sigma-h", type=float, default=None, dest="sigma_h")
            p.add_argument("--samples", type=int, default=None)
            p.add_argument("--action", default=None,
                           choices=["free", "linear", "bilinear", "planar"])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_structured(args.config) if args.config else {}
        base_dir = os.path.dirname(os.path.abspath(args.config)) if args.config else os.getcwd()
        tols = Tolerances(_parse_tol_overrides(args.tol_override))
        env = {"seed": args.seed, "workers": max(1, args.workers),
               "base_dir": base_dir, "backend": stochastic_mod.KERNEL_BACKEND}

        csv_rows = None
        if args.command == "fisher":
            body, csv_rows = run_fisher(config, tols, env)
            csv_name = "fisher.csv"
        elif args.command == "sld-check":
            body, csv_rows = run_sld_check(config, tols, env)
            csv_name = None
        elif args.command == "holonomy":
            body, csv_rows = run_holonomy(config, tols, env)
            csv_name = None
        elif args.command == "measure-invariance":
            body, csv_rows = run_measure_invariance(config, tols, env)
            csv_name = None
        else:
            body, csv_rows = run_stochastic_average(config, tols, env, args)
            csv_name = "stochastic_average.csv"
    except (QigkitError, ValueError, KeyError, TypeError, OSError,
            json.JSONDecodeError) as exc:
        where = f" (config: {args.config})" if args.config else ""
        print(f"qigkit {args.command}: invalid input{where}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT

    checks = body.pop("checks")
    exports = body.pop("exports", [])
    overall = all(c["pass"] for c in checks)
    report = {
        "command": args.command,
        "config": config,
        "environment": {"precision": "float64", "seed": args.seed,
                        "workers": env["workers"], "backend": env["backend"]},
        "tolerances": tols.used,
        "checks": checks,
        "overall": "pass" if overall else "fail",
    }
    report.update(body)

    out_dir, csv_path = args.out, None
    if args.out.endswith(".csv"):
        out_dir, csv_path = os.path.dirname(args.out) or ".", args.out
    path = _write_report(report, out_dir, csv_rows=csv_rows,
                         csv_name=csv_name, csv_path=csv_path)
    for name, payload in exports:
        with open(os.path.join(out_dir, name), "w") as fh:
            json.dump(payload, fh, sort_keys=True)
    print(f"{args.command}: {report['overall']} ({len(checks)} checks) -> {path}")
    return EXIT_OK if overall else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""
cli.py

Command line front end over JSON run configs.

  synthesize      plant + gain intervals + Delta  -> controller.json, feasibility.json
  simulate        switched linear closed loop      -> trajectory.csv (+ .events.json), report.json
  epidemic        SEIR / SAIR / SEAIR under the lockdown law -> compartments.csv, status timeline
  analyze-global  SEIR global analysis (optional V' certificate) -> global_report.json
  sweep           grid of epidemic runs -> run_XXX/ dirs + summary.csv
                  (--conjecture: random positive 2-D plants through the sliding controller)

Every run writes manifest.json (config hash, seed, version, files).
Exit codes: 0 success, 1 usage / validation error, 2 infeasible or failed certificate.
"""
import argparse
import copy
import hashlib
import itertools
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import jsonschema
import numpy as np
import pandas as pd
from fuzzywuzzy import process as fuzzy_process

import epidemics
import global_analysis
import sim
from linalg import Poly
from synthesis import (
    GainIntervals,
    GainSelector,
    Plant,
    SelectionPolicy,
    controller_from_dict,
    controller_to_dict,
    synthesize,
)

logger = logging.getLogger(__name__)

__version__ = "0.1.0"

# -------------------------
# Configuration
# -------------------------
DEFAULT_OUT = "out"
SUGGEST_SCORE = 60
CONJECTURE_DEFAULTS = {"n_plants": 20, "t_end": 100.0, "dt": 1e-2, "hysteresis_band": 1e-6,
                       "lam_range": [0.5, 2.0], "settle_tol": 0.05}
GRID_TARGET_KEYS = ("i0", "lam")
GRID_MODEL_KEYS = ("beta_lock", "beta_free", "delta", "epsilon", "eps1", "eps2")


class ConfigError(ValueError):
    """Run config is malformed, fails the schema, or names impossible values."""


# -------------------------
# schemas
# -------------------------
NUM = {"type": "number"}
POS = {"type": "number", "exclusiveMinimum": 0}
VEC = {"type": "array", "items": NUM, "minItems": 1}
SEED = {"type": "integer", "minimum": 0}


def _obj(properties: dict, required: Sequence[str] = ()) -> dict:
    return {"type": "object", "properties": properties, "required": list(required),
            "additionalProperties": False}


PLANT_SCHEMA = _obj({"F": {"type": "array", "items": VEC, "minItems": 1}, "g": VEC, "H": VEC},
                    ["F", "g", "H"])
GAINS_SCHEMA = _obj({k: NUM for k in ("i1_lo", "i1_hi", "i2_lo", "i2_hi")},
                    ["i1_lo", "i1_hi", "i2_lo", "i2_hi"])
SIM_SCHEMA = _obj({"t_end": POS, "dt": POS, "event_tol": POS, "hysteresis_band": NUM,
                   "sliding_window": POS, "sliding_sigma_tol": NUM}, ["t_end"])
SELECTOR_SCHEMA = _obj({"policy": {"enum": [p.value for p in SelectionPolicy]}, "trace": VEC})
MODEL_SCHEMA = _obj({"kind": {"enum": sorted(epidemics.MODELS)},
                     **{k: POS for k in GRID_MODEL_KEYS}},
                    ["kind", "beta_lock", "beta_free", "delta"])
TARGET_SCHEMA = _obj({"i0": POS, "lam": POS, "delta": VEC}, ["i0"])
GLOBAL_PARAMS_SCHEMA = _obj({k: POS for k in ("gamma_f", "gamma_l", "delta", "epsilon", "eps2", "lam", "i0")},
                            ["gamma_f", "gamma_l", "delta", "epsilon", "lam", "i0"])

SYNTH_PROPS = {
    "plant": PLANT_SCHEMA,
    "gains": GAINS_SCHEMA,
    "delta": VEC,
    "setpoint": POS,
    "normalize_index": {"type": "integer", "minimum": 0},
    "hysteresis_band": NUM,
    "seed": SEED,
}
EPIDEMIC_PROPS = {
    "model": MODEL_SCHEMA,
    "target": TARGET_SCHEMA,
    "x0": {"type": "object", "additionalProperties": NUM},
    "sim": SIM_SCHEMA,
    "seed": SEED,
}

SCHEMAS: Dict[str, dict] = {
    "synthesize": _obj(SYNTH_PROPS, ["plant", "gains", "delta", "setpoint"]),
    "simulate": _obj({**SYNTH_PROPS, "x0": VEC, "sim": SIM_SCHEMA, "selector": SELECTOR_SCHEMA,
                      "controller_file": {"type": "string"}}, ["plant", "x0", "sim"]),
    "epidemic": _obj(EPIDEMIC_PROPS, ["model", "target", "x0", "sim"]),
    "analyze-global": _obj({"params": GLOBAL_PARAMS_SCHEMA, "model": MODEL_SCHEMA, "target": TARGET_SCHEMA,
                            "S": {"type": "number", "minimum": 0, "maximum": 1},
                            "certify": {"type": "boolean"},
                            "grid_density": {"type": "integer", "minimum": 10},
                            "seed": SEED}),
    "sweep": _obj({"base": _obj(EPIDEMIC_PROPS, ["model", "target", "x0", "sim"]),
                   "grid": {"type": "object",
                            "propertyNames": {"enum": list(GRID_MODEL_KEYS + GRID_TARGET_KEYS)},
                            "additionalProperties": {"type": "array", "items": POS, "minItems": 1}},
                   "workers": {"type": "integer", "minimum": 1},
                   "conjecture": _obj({"n_plants": {"type": "integer", "minimum": 1}, "t_end": POS, "dt": POS,
                                       "hysteresis_band": NUM, "settle_tol": POS,
                                       "lam_range": {"type": "array", "items": POS,
                                                     "minItems": 2, "maxItems": 2}}),
                   "seed": SEED}),
}


# -------------------------
# config loading / validation
# -------------------------
def _suggest(key: str, allowed: Sequence[str]) -> str:
    if not allowed:
        return ""
    res = fuzzy_process.extractOne(key, list(allowed))
    if res and res[1] >= SUGGEST_SCORE:
        return f" (did you mean '{res[0]}'?)"
    return ""


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ConfigError(f"config {path} must hold a JSON object, got {type(config).__name__}")
    return config


def validate_config(config: dict, command: str) -> None:
    """Schema check; unknown keys are reported with the closest allowed key."""
    validator = jsonschema.Draft7Validator(SCHEMAS[command])
    problems = []
    for err in sorted(validator.iter_errors(config), key=lambda e: list(map(str, e.path))):
        where = "/".join(str(p) for p in err.path) or "<root>"
        if err.validator == "additionalProperties" and isinstance(err.instance, dict):
            allowed = list(err.schema.get("properties", {}))
            for key in err.instance:
                if key not in allowed:
                    problems.append(f"{where}: unknown key '{key}'{_suggest(key, allowed)}")
        else:
            problems.append(f"{where}: {err.message}")
    if problems:
        raise ConfigError(f"{command} config invalid:\n  " + "\n  ".join(problems))


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_json(path: str, obj) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
    return path


def write_manifest(out: str, command: str, config: dict, seed: int, files: List[str]) -> str:
    rel = sorted(os.path.relpath(f, out) for f in files)
    return _write_json(os.path.join(out, "manifest.json"), {
        "command": command,
        "config_sha256": config_hash(config),
        "seed": seed,
        "version": __version__,
        "files": rel,
    })


# -------------------------
# builders
# -------------------------
def _build(kind: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind}: {exc}") from None


def _plant(config: dict) -> Plant:
    return _build("plant", Plant, **config["plant"])


def _sim_config(config: dict) -> sim.SimConfig:
    return _build("sim", sim.SimConfig, **config["sim"])


def _model(d: dict):
    params = {k: v for k, v in d.items() if k != "kind"}
    return _build("model", epidemics.make_model, d["kind"], **params)


def _target(d: dict) -> epidemics.ControlTarget:
    if ("lam" in d) == ("delta" in d):
        raise ConfigError("target needs exactly one of 'lam' or 'delta'")
    if "lam" in d:
        return _build("target", epidemics.ControlTarget.first_order, d["i0"], d["lam"])
    return _build("target", epidemics.ControlTarget, d["i0"], Poly(tuple(d["delta"])))


def _trajectory_path(out: str, stem: str, fmt: str) -> str:
    return os.path.join(out, f"{stem}.{fmt}")


def _event_summary(traj: sim.Trajectory, cfg: sim.SimConfig) -> dict:
    """cfg is the resolved config the run actually used."""
    onset = traj.first_onset()
    return {
        "sim": cfg.to_dict(),
        "samples": len(traj.times),
        "events": len(traj.events),
        "crossings_before_onset": len(traj.crossings_before_onset()),
        "first_onset": onset.time if onset is not None else None,
        "sliding_intervals": [list(s) for s in traj.sliding_intervals()],
        "final_state": [float(v) for v in traj.states[-1]],
        "diagnostic": traj.diagnostic,
    }


# -------------------------
# subcommands
# -------------------------
def cmd_synthesize(config: dict, out: str, seed: int, fmt: str, args) -> int:
    plant = _plant(config)
    gains = _build("gains", GainIntervals, **config["gains"])
    delta = Poly(tuple(config["delta"]))
    kwargs = {"normalize_index": config.get("normalize_index")}
    if "hysteresis_band" in config:
        kwargs["hysteresis_band"] = config["hysteresis_band"]
    ctrl, report = synthesize(plant, gains, delta, config["setpoint"], **kwargs)

    files = [_write_json(os.path.join(out, "feasibility.json"), report.to_dict())]
    if ctrl is None:
        print(f"❌ Infeasible: {report.failure_reason.value} (det product {report.det_product:.6g})")
        write_manifest(out, "synthesize", config, seed, files)
        return 2
    files.append(_write_json(os.path.join(out, "controller.json"), controller_to_dict(ctrl)))
    write_manifest(out, "synthesize", config, seed, files)
    print(f"✅ Controller synthesized: gamma0={ctrl.gamma0:.6g}, K={[round(float(k), 6) for k in ctrl.K]}")
    return 0


def cmd_simulate(config: dict, out: str, seed: int, fmt: str, args) -> int:
    plant = _plant(config)
    files = []
    if "controller_file" in config:
        try:
            with open(config["controller_file"], encoding="utf-8") as fh:
                ctrl = controller_from_dict(json.load(fh))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load controller_file: {exc}") from None
        if ctrl.gains is None:
            raise ConfigError("controller_file carries no gain intervals")
        print(f"📂 Controller loaded from {config['controller_file']}")
    else:
        missing = [k for k in ("gains", "delta", "setpoint") if k not in config]
        if missing:
            raise ConfigError(f"simulate needs {missing} unless 'controller_file' is given")
        gains = _build("gains", GainIntervals, **config["gains"])
        kwargs = {"normalize_index": config.get("normalize_index")}
        if "hysteresis_band" in config:
            kwargs["hysteresis_band"] = config["hysteresis_band"]
        ctrl, report = synthesize(plant, gains, Poly(tuple(config["delta"])), config["setpoint"], **kwargs)
        files.append(_write_json(os.path.join(out, "feasibility.json"), report.to_dict()))
        if ctrl is None:
            print(f"❌ Infeasible: {report.failure_reason.value}")
            write_manifest(out, "simulate", config, seed, files)
            return 2
    files.append(_write_json(os.path.join(out, "controller.json"), controller_to_dict(ctrl)))

    sel = config.get("selector", {})
    selector = _build("selector", GainSelector, policy=sel.get("policy", SelectionPolicy.MIDPOINT.value),
                      seed=seed, trace=tuple(sel.get("trace", ())))
    cfg = _sim_config(config)
    traj = sim.simulate_switched_linear(plant, ctrl, selector, _build("x0", np.asarray, config["x0"], dtype=float), cfg)
    files.extend(sim.write_trajectory(traj, _trajectory_path(out, "trajectory", fmt), fmt=fmt))
    files.append(_write_json(os.path.join(out, "report.json"),
                             _event_summary(traj, cfg.resolved(ctrl.hysteresis_band))))
    write_manifest(out, "simulate", config, seed, files)

    if traj.truncated:
        print(f"⚠️ Simulation truncated: {traj.diagnostic}")
    onset = traj.first_onset()
    print(f"✅ Simulated {len(traj.times)} samples, {len(traj.events)} events"
          + (f", sliding from t={onset.time:.6g}" if onset else ""))
    return 0


def _epidemic_report(run: epidemics.EpidemicRun, x0: epidemics.EpidemicState, cfg: sim.SimConfig) -> dict:
    traj = run.trajectory
    report = _event_summary(traj, cfg.resolved())
    i_final = float(run.column("I")[-1])
    report.update({
        "model": run.model.name,
        "x0": x0.as_dict(),
        "i0": run.target.i0,
        "final_abs_deviation": abs(i_final - run.target.i0),
        "endgame_time": run.endgame_time,
        "status_changes": [[t, st.value] for t, st in run.status_changes()],
        "max_sum_drift": float(np.max(np.abs(traj.states.sum(axis=1) - 1.0))),
        "min_compartment": float(np.min(traj.states)),
    })
    return report


def _run_epidemic(config: dict, out: str, fmt: str) -> Tuple[epidemics.EpidemicRun, List[str]]:
    model = _model(config["model"])
    target = _target(config["target"])
    x0 = _build("x0", epidemics.initial_state, model, **config["x0"])
    cfg = _sim_config(config)
    run = _build("epidemic run", epidemics.simulate_epidemic, model, target, x0, cfg)
    files = list(sim.write_trajectory(run.trajectory, _trajectory_path(out, "compartments", fmt),
                                      names=model.compartments, fmt=fmt))
    timeline = pd.DataFrame(run.status_changes(), columns=["t", "status"])
    timeline["status"] = timeline["status"].map(lambda s: s.value)
    status_path = os.path.join(out, "status_timeline.csv")
    timeline.to_csv(status_path, index=False, float_format=sim.FLOAT_FORMAT)
    files.append(status_path)
    files.append(_write_json(os.path.join(out, "report.json"), _epidemic_report(run, x0, cfg)))
    return run, files


def cmd_epidemic(config: dict, out: str, seed: int, fmt: str, args) -> int:
    run, files = _run_epidemic(config, out, fmt)
    write_manifest(out, "epidemic", config, seed, files)
    traj = run.trajectory
    if traj.truncated:
        print(f"⚠️ Epidemic run truncated: {traj.diagnostic}")
    onset = traj.first_onset()
    print(f"✅ {run.model.name}: {len(traj.times)} samples, "
          f"sliding onset {'t=%.6g' % onset.time if onset else 'not reached'}, "
          f"final I={run.column('I')[-1]:.6g}")
    return 0


def cmd_analyze_global(config: dict, out: str, seed: int, fmt: str, args) -> int:
    if "params" in config:
        p = _build("params", global_analysis.GlobalParams, **config["params"])
    elif "model" in config and "target" in config:
        model = _model(config["model"])
        target = _target(config["target"])
        p = _build("global params", epidemics.global_params, model, target, config.get("S", 1.0))
    else:
        raise ConfigError("analyze-global needs 'params' or both 'model' and 'target'")

    certify = bool(config.get("certify", False))
    report = global_analysis.global_report(
        p, certify=certify, grid_density=config.get("grid_density", global_analysis.DEFAULT_GRID_DENSITY))
    files = [_write_json(os.path.join(out, "global_report.json"), global_analysis.report_to_dict(report))]
    write_manifest(out, "analyze-global", config, seed, files)

    print(f"✅ Regimes: free {report.regime_free.value}, lock {report.regime_lock.value}, "
          f"case {report.zone_case.value}")
    if certify:
        cert = report.certificate
        if cert is None:
            print("❌ Certificate not applicable (needs the SEIR reduction with lam > delta)")
            return 2
        if not cert.passed:
            print(f"❌ V' certificate failed: free max {cert.max_vdot_free:.3e}, lock max {cert.max_vdot_lock:.3e}")
            return 2
        print("✅ V' certificate passed")
    return 0


# -------------------------
# sweep
# -------------------------
def _apply_overrides(base: dict, overrides: Dict[str, float]) -> dict:
    cfg = copy.deepcopy(base)
    for key, value in overrides.items():
        if key in GRID_MODEL_KEYS:
            cfg["model"][key] = value
        elif key == "lam":
            cfg["target"].pop("delta", None)
            cfg["target"]["lam"] = value
        else:
            cfg["target"][key] = value
    return cfg


def _sweep_one(job) -> dict:
    idx, overrides, base, out, fmt = job
    run_dir = os.path.join(out, f"run_{idx:03d}")
    cfg = _apply_overrides(base, overrides)
    run, _ = _run_epidemic(cfg, run_dir, fmt)
    _write_json(os.path.join(run_dir, "config.json"), cfg)
    traj = run.trajectory
    onset = traj.first_onset()
    return {
        "run": f"run_{idx:03d}",
        **overrides,
        "convergence_time": onset.time if onset is not None else np.nan,
        "crossings": len(traj.crossings_before_onset()),
        "final_abs_deviation": abs(float(run.column("I")[-1]) - run.target.i0),
        "endgame_time": run.endgame_time if run.endgame_time is not None else np.nan,
        "diagnostic": traj.diagnostic or "",
    }


def _random_positive_plant(rng: np.random.Generator) -> Plant:
    """Metzler Hurwitz F, g = e1, H >= 0: a positive two-dimensional loop."""
    while True:
        a, d = rng.uniform(0.2, 1.0, size=2)
        b, c = rng.uniform(0.0, 0.5, size=2)
        if a * d - b * c > 1e-3 and c > 1e-3:
            break
    H = rng.uniform(0.0, 1.0, size=2)
    H[rng.integers(2)] += 0.1
    return Plant(F=[[-a, b], [c, -d]], g=[1.0, 0.0], H=H)


def conjecture_probe(settings: dict, seed: int) -> pd.DataFrame:
    """Random positive controllable 2-D plants under the sliding controller.

    Gains bracket the equilibrium gain gamma* with I1 = [0.2, 0.7] gamma*
    and I2 = [1.5, 3] gamma*; each row records whether the run slid to x_eq.
    """
    opts = {**CONJECTURE_DEFAULTS, **settings}
    rng = np.random.default_rng(seed)
    cfg = sim.SimConfig(t_end=opts["t_end"], dt=opts["dt"], hysteresis_band=opts["hysteresis_band"])
    rows = []
    while len(rows) < opts["n_plants"]:
        plant = _random_positive_plant(rng)
        d0 = float(np.linalg.det(plant.F))
        slope = float(np.linalg.det(plant.closed_loop(1.0))) - d0
        g_star = -d0 / slope
        gains = GainIntervals(0.2 * g_star, 0.7 * g_star, 1.5 * g_star, 3.0 * g_star)
        lam = float(rng.uniform(*opts["lam_range"]))
        ctrl, report = synthesize(plant, gains, Poly((lam, 1.0)), 1.0,
                                  hysteresis_band=opts["hysteresis_band"])
        if ctrl is None:
            logger.debug("conjecture: skipped plant (%s)", report.failure_reason.value)
            continue
        x0 = ctrl.x_eq * rng.uniform(0.0, 2.0, size=2)
        selector = GainSelector(SelectionPolicy.RANDOM_UNIFORM, seed=int(rng.integers(2 ** 32)))
        traj = sim.simulate_switched_linear(plant, ctrl, selector, x0, cfg)
        scan = global_analysis.scan_sliding_line(plant, ctrl.K, ctrl.x_eq,
                                                 0.5 * (gains.i1_lo + gains.i1_hi),
                                                 0.5 * (gains.i2_lo + gains.i2_hi))
        spans = traj.sliding_intervals()
        rel = float(np.linalg.norm(traj.states[-1] - ctrl.x_eq) / np.linalg.norm(ctrl.x_eq))
        slid = bool(spans) and spans[-1][1] >= traj.times[-1] and rel < opts["settle_tol"]
        onset = traj.first_onset()
        rows.append({
            "plant": len(rows),
            "F11": plant.F[0, 0], "F12": plant.F[0, 1], "F21": plant.F[1, 0], "F22": plant.F[1, 1],
            "H1": plant.H[0], "H2": plant.H[1],
            "gamma0": ctrl.gamma0,
            "lam": lam,
            "attractive_segments": len(scan.zone_intervals()),
            "onset_time": onset.time if onset is not None else np.nan,
            "crossings": len(traj.crossings_before_onset()),
            "final_rel_distance": rel,
            "slid": slid,
        })
    return pd.DataFrame(rows)


def cmd_sweep(config: dict, out: str, seed: int, fmt: str, args) -> int:
    if getattr(args, "conjecture", False):
        df = conjecture_probe(config.get("conjecture", {}), seed)
        csv_path = os.path.join(out, "conjecture.csv")
        os.makedirs(out, exist_ok=True)
        df.to_csv(csv_path, index=False, float_format=sim.FLOAT_FORMAT)
        failures = df.loc[~df["slid"], "plant"].astype(int).tolist()
        summary = {"n_plants": len(df), "all_slid": not failures, "failures": failures}
        files = [csv_path, _write_json(os.path.join(out, "conjecture.json"), summary)]
        write_manifest(out, "sweep", config, seed, files)
        print(("✅ Every positive plant slid to x_eq" if not failures
               else f"⚠️ {len(failures)} of {len(df)} plants did not slide: {failures}"))
        return 0

    if "base" not in config or "grid" not in config:
        raise ConfigError("sweep needs 'base' and 'grid' (or pass --conjecture)")
    keys = sorted(config["grid"])
    combos = list(itertools.product(*(config["grid"][k] for k in keys)))
    jobs = [(i, dict(zip(keys, combo)), config["base"], out, fmt) for i, combo in enumerate(combos)]
    print(f"🔄 Sweep: {len(jobs)} runs over {keys}")
    with ThreadPoolExecutor(max_workers=config.get("workers", 1)) as pool:
        rows = list(pool.map(_sweep_one, jobs))

    summary_path = os.path.join(out, "summary.csv")
    pd.DataFrame(rows).to_csv(summary_path, index=False, float_format=sim.FLOAT_FORMAT)
    files = [summary_path]
    for row in rows:
        run_dir = os.path.join(out, row["run"])
        files.extend(os.path.join(run_dir, f) for f in sorted(os.listdir(run_dir)))
    write_manifest(out, "sweep", config, seed, files)
    print(f"✅ Sweep done: summary at {summary_path}")
    return 0


COMMANDS = {
    "synthesize": cmd_synthesize,
    "simulate": cmd_simulate,
    "epidemic": cmd_epidemic,
    "analyze-global": cmd_analyze_global,
    "sweep": cmd_sweep,
}


# -------------------------
# entry point
# -------------------------
def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run config")
    common.add_argument("--out", default=DEFAULT_OUT, help="output directory")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (overrides config 'seed')")
    common.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv",
                        help="time-series output format")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(description="Sliding-mode control under constrained gains")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("synthesize", "simulate", "epidemic", "analyze-global"):
        sub.add_parser(name, parents=[common])
    sweep = sub.add_parser("sweep", parents=[common])
    sweep.add_argument("--conjecture", action="store_true",
                       help="probe random positive 2-D plants instead of the grid")
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = _parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config)
        validate_config(config, args.command)
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        if seed < 0:
            raise ConfigError(f"seed must be >= 0, got {seed}")
        return COMMANDS[args.command](config, args.out, seed, args.fmt, args)
    except ConfigError as exc:
        print(f"❌ {exc}")
        return 1
    except ValueError as exc:
        print(f"❌ {args.command} failed: {exc}")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

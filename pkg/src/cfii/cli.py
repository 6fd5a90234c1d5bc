"""Reproducible experiment driver.

Each subcommand runs one pipeline end to end and emits a single rectangular
table as CSV (default) or JSON:

    fi         Fisher information over a theta grid
    landscape  witness V and gain indicator G over a 2-D split grid
    certify    finite-shot witness certification (single point or sweep)
    adversary  Adam-with-restarts search for the saturation frontier
    rmse       Monte-Carlo MLE error versus sample size
    chain      analytic chain gain Gamma_K over (gamma, K)
    nsit-demo  NSIT-vs-witness separation example
    crossing   dephasing rate where the chain advantage disappears

CSV output carries '#'-prefixed metadata lines (tool version, command,
effective config, seed, wall clock) and 17-significant-digit floats; JSON
output is {"meta": ..., "columns": ..., "rows": ...} whose meta.config can be
written to a file and fed back via --config to reproduce the run.
Configuration precedence is CLI flags > config file > defaults.  Exit codes:
0 success, 2 configuration error, 3 numerical degeneracy.  The environment
variable CFII_THREADS caps worker parallelism (absent = auto).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .adversary import optimize_restarts
from .errors import CfiiError
from .estimate import (analytic_certification, certify_vk, mc_rmse,
                       sample_binary)
from .models import (BinaryModel, NoisyFringeModel, NoisyFringeParams,
                     QubitFringeModel, QubitPreparation)
from .witness import gamma_crossing, nsit_separation_demo

# Metadata key holding the only non-reproducible field; comparisons between
# runs must drop it.
WALLCLOCK_KEY = "wallclock"


class ConfigError(Exception):
    """Invalid command-line flags or config-file contents (exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Merged, validated settings for one command invocation."""

    command: str
    params: dict
    seed: int | None
    out: str | None
    fmt: str


@dataclass
class ResultTable:
    """Rectangular results plus a metadata block."""

    columns: list[str]
    rows: list[tuple]
    meta: dict = field(default_factory=dict)

    def render_csv(self) -> str:
        lines = [f"# {key}: {_fmt_meta(value)}"
                 for key, value in self.meta.items()]
        lines.append(",".join(self.columns))
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("ragged row in result table")
            lines.append(",".join(_fmt_csv(v) for v in row))
        return "\n".join(lines) + "\n"

    def render_json(self) -> str:
        doc = {
            "meta": self.meta,
            "columns": self.columns,
            "rows": [[_json_cell(v) for v in row] for row in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"


def _fmt_meta(value) -> str:
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    return str(value)


def _fmt_csv(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def _json_cell(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


# ---------------------------------------------------------------------------
# configuration

# per-command experiment parameters: key -> (type, default)
_SPECS: dict[str, dict[str, tuple[type, object]]] = {
    "fi": {
        "model": (str, "noisy"),
        "vartheta": (float, 0.0),
        "varphi": (float, math.pi / 2),
        "gamma": (float, 0.25),
        "eps_r": (float, 0.02),
        "vartheta0": (float, 0.0),
        "grid": (str, "0.05:6.25:200"),
    },
    "landscape": {
        "vartheta": (float, 0.7 * math.pi),
        "varphi": (float, 0.3 * math.pi),
        "grid": (str, "0.05:6.0:64"),
        "grid_cb": (str, ""),
        "clip_v": (float, 10.0),
        "clip_g": (float, 5.0),
    },
    "certify": {
        "gamma": (float, 0.25),
        "eps_r": (float, 0.02),
        "vartheta0": (float, 0.0),
        "k": (int, 4),
        "t_total": (float, math.pi / 2),
        "shots": (int, 1000),
        "se_mode": (str, "analytic-moment"),
        "gamma_grid": (str, ""),
        "shots_grid": (str, ""),
    },
    "adversary": {
        "l": (int, 5),
        "m": (int, 5),
        "restarts": (int, 36),
        "steps": (int, 2000),
        "lr": (float, 0.05),
    },
    "rmse": {
        "model": (str, "ideal"),
        "vartheta": (float, 0.0),
        "varphi": (float, math.pi / 2),
        "gamma": (float, 0.25),
        "eps_r": (float, 0.02),
        "vartheta0": (float, 0.0),
        "theta": (float, math.pi / 2),
        "n_grid": (str, "100:100000:7"),
        "reps": (int, 1000),
    },
    "chain": {
        "gamma_grid": (str, "0.0:0.6:25"),
        "k": (int, 4),
        "k_grid": (str, ""),
        "eps_r": (float, 0.02),
        "vartheta0": (float, 0.0),
        "t_total": (float, math.pi / 2),
    },
    "nsit-demo": {},
    "crossing": {
        "k": (int, 4),
        "t_total": (float, math.pi / 2),
        "eps_r": (float, 0.02),
        "vartheta0": (float, 0.0),
        "gamma_max": (float, 2.0),
    },
}

# commands that always draw samples and therefore require a seed;
# certify enforces it only in single-point mode
_STOCHASTIC = {"adversary", "rmse"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfii", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command, spec in _SPECS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", default=None)
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"),
                       default=argparse.SUPPRESS)
        for key, (typ, _default) in spec.items():
            p.add_argument("--" + key.replace("_", "-"), type=typ, dest=key,
                           default=argparse.SUPPRESS)
    return parser


def _load_config_file(path: str, command: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    allowed = set(_SPECS[command]) | {"seed", "format"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(
            f"unknown config keys for {command}: {sorted(unknown)}")
    return raw


def _coerce(command: str, key: str, value):
    if key == "seed":
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"seed must be an integer, got {value!r}")
        return value
    if key == "format":
        if value not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {value!r}")
        return value
    typ, _ = _SPECS[command][key]
    try:
        if typ is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError("not an integer")
            return int(value)
        if typ is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def build_config(argv: list[str]) -> ExperimentConfig:
    ns = _build_parser().parse_args(argv)
    command = ns.command
    merged: dict = {key: default
                    for key, (_t, default) in _SPECS[command].items()}
    merged.update({"seed": None, "format": "csv"})
    if ns.config:
        merged.update(_load_config_file(ns.config, command))
    for key, value in vars(ns).items():
        if key not in ("command", "config", "out"):
            merged[key] = value
    merged = {key: _coerce(command, key, value)
              for key, value in merged.items()}
    seed = merged.pop("seed")
    fmt = merged.pop("format")
    if command in _STOCHASTIC and seed is None:
        raise ConfigError(f"{command} is stochastic: --seed is required")
    return ExperimentConfig(command=command, params=merged, seed=seed,
                            out=ns.out, fmt=fmt)


def _parse_grid(spec: str, name: str) -> np.ndarray:
    a, b, n = _split_grid(spec, name)
    return np.linspace(a, b, n)


def _parse_int_geom_grid(spec: str, name: str) -> np.ndarray:
    a, b, n = _split_grid(spec, name)
    if a < 1 or b < a:
        raise ConfigError(f"{name} needs 1 <= A <= B")
    return np.unique(np.rint(np.geomspace(a, b, n)).astype(int))


def _parse_int_lin_grid(spec: str, name: str) -> np.ndarray:
    a, b, n = _split_grid(spec, name)
    return np.unique(np.rint(np.linspace(a, b, n)).astype(int))


def _split_grid(spec: str, name: str) -> tuple[float, float, int]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name} must look like A:B:N, got {spec!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {spec!r}") from exc
    if n < 2:
        raise ConfigError(f"{name} needs at least 2 points, got {n}")
    return a, b, n


def _child_seed(seed: int, *path: int) -> int:
    ss = np.random.SeedSequence(entropy=int(seed),
                                spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])


def _model_from(params: dict) -> BinaryModel:
    kind = params["model"]
    try:
        if kind == "ideal":
            return QubitFringeModel(QubitPreparation(
                vartheta=params["vartheta"], varphi=params["varphi"]))
        if kind == "noisy":
            return NoisyFringeModel(NoisyFringeParams(
                gamma=params["gamma"], epsilon_r=params["eps_r"],
                vartheta0=params["vartheta0"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"model must be ideal or noisy, got {kind!r}")


# ---------------------------------------------------------------------------
# commands

def cmd_fi(config: ExperimentConfig) -> ResultTable:
    params = config.params
    model = _model_from(params)
    thetas = _parse_grid(params["grid"], "--grid")
    if params["model"] == "noisy" and thetas[0] < 0.0:
        raise ConfigError("noisy fringe grids must start at theta >= 0")
    rows = [(float(t), float(model.z(t)), float(model.fi(t))) for t in thetas]
    return ResultTable(columns=["theta", "z", "fi"], rows=rows)


def cmd_landscape(config: ExperimentConfig) -> ResultTable:
    params = config.params
    try:
        prep = QubitPreparation(vartheta=params["vartheta"],
                                varphi=params["varphi"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    model = QubitFringeModel(prep)
    t_ac = _parse_grid(params["grid"], "--grid")
    t_cb = _parse_grid(params["grid_cb"] or params["grid"], "--grid-cb")

    ac = t_ac[:, None]
    cb = t_cb[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        f_end = model.fi(ac + cb)
        f_ac = np.broadcast_to(model.fi(t_ac)[:, None], f_end.shape)
        f_cb = np.broadcast_to(model.fi(t_cb)[None, :], f_end.shape)
        v = 1.0 / f_end - 1.0 / f_ac - 1.0 / f_cb
        f_cl = 1.0 / (1.0 / f_ac + 1.0 / f_cb)
        g = 0.5 * (np.log(f_cl) - np.log(f_end))
    v = np.clip(v, -params["clip_v"], params["clip_v"])
    g = np.clip(g, -params["clip_g"], params["clip_g"])

    rows = [(float(t_ac[i]), float(t_cb[j]), float(v[i, j]), float(g[i, j]))
            for i in range(t_ac.size) for j in range(t_cb.size)]
    return ResultTable(columns=["theta_ac", "theta_cb", "v", "g"], rows=rows)


def cmd_certify(config: ExperimentConfig) -> ResultTable:
    params = config.params
    if params["shots"] < 1:
        raise ConfigError(f"shots must be >= 1, got {params['shots']}")
    if params["k"] < 2:
        raise ConfigError(f"k must be >= 2, got {params['k']}")
    if params["se_mode"] not in ("analytic-moment", "empirical"):
        raise ConfigError(f"se-mode must be analytic-moment or empirical, "
                          f"got {params['se_mode']!r}")
    if params["gamma_grid"] or params["shots_grid"]:
        return _certify_sweep(params)
    if config.seed is None:
        raise ConfigError("single-point certify is stochastic: "
                          "--seed is required")
    return _certify_point(params, config.seed)


def _certify_point(params: dict, seed: int) -> ResultTable:
    k = params["k"]
    t_total = params["t_total"]
    n = params["shots"]
    model = NoisyFringeModel(NoisyFringeParams(
        gamma=params["gamma"], epsilon_r=params["eps_r"],
        vartheta0=params["vartheta0"]))
    endpoint = sample_binary(model, t_total, n, _child_seed(seed, 0))
    segments = [sample_binary(model, t_total / k, n, _child_seed(seed, 1 + j))
                for j in range(k)]
    report = certify_vk(endpoint, segments, model, se_mode=params["se_mode"])
    expected = analytic_certification(model, t_total, k, n)

    rows = [
        ("v_hat", report.v_hat),
        ("se", report.se),
        ("z", report.z),
        ("ci95_lo", report.ci95[0]),
        ("ci95_hi", report.ci95[1]),
        ("fi_hat_end", report.estimates[0].value),
    ]
    rows += [(f"fi_hat_seg_{j + 1}", report.estimates[1 + j].value)
             for j in range(k)]
    rows += [
        ("v_analytic", expected.v_hat),
        ("se_analytic", expected.se),
        ("z_analytic", expected.z),
    ]
    return ResultTable(columns=["quantity", "value"], rows=rows)


def _certify_sweep(params: dict) -> ResultTable:
    gammas = (_parse_grid(params["gamma_grid"], "--gamma-grid")
              if params["gamma_grid"] else np.array([params["gamma"]]))
    shots = (_parse_int_geom_grid(params["shots_grid"], "--shots-grid")
             if params["shots_grid"] else np.array([params["shots"]]))
    if np.any(gammas < 0.0):
        raise ConfigError("--gamma-grid must be nonnegative")
    rows = []
    for gamma in gammas:
        model = NoisyFringeModel(NoisyFringeParams(
            gamma=float(gamma), epsilon_r=params["eps_r"],
            vartheta0=params["vartheta0"]))
        for n in shots:
            rep = analytic_certification(model, params["t_total"],
                                         params["k"], int(n))
            rows.append((float(gamma), int(n), rep.v_hat, rep.se, rep.z,
                         int(rep.z >= 3.0), int(rep.z >= 5.0)))
    return ResultTable(
        columns=["gamma", "shots", "v_k", "se", "z", "z_ge_3", "z_ge_5"],
        rows=rows)


def cmd_adversary(config: ExperimentConfig) -> ResultTable:
    params = config.params
    if params["restarts"] < 1:
        raise ConfigError("restarts must be >= 1")
    if params["steps"] < 0:
        raise ConfigError("steps must be >= 0")
    if params["l"] < 2 or params["m"] < 2:
        raise ConfigError("adversary needs --l >= 2 and --m >= 2")
    result = optimize_restarts(params["l"], params["m"],
                               n_restarts=params["restarts"],
                               steps=params["steps"], lr=params["lr"],
                               seed=config.seed)
    gammas = np.asarray(result.restart_gammas)
    rows = [(r, float(g)) for r, g in enumerate(result.restart_gammas)]
    meta = {
        "summary_max": "%.17g" % gammas.max(),
        "summary_mean": "%.17g" % gammas.mean(),
        "summary_min": "%.17g" % gammas.min(),
        "max_evaluated": "%.17g" % result.max_evaluated,
    }
    return ResultTable(columns=["restart", "gamma_adv"], rows=rows, meta=meta)


def cmd_rmse(config: ExperimentConfig) -> ResultTable:
    params = config.params
    if params["reps"] < 1:
        raise ConfigError(f"reps must be >= 1, got {params['reps']}")
    model = _model_from(params)
    theta = params["theta"]
    f = float(model.fi(theta))
    if f <= 0.0:
        raise ConfigError("reference bounds undefined: FI is zero at theta")
    n_values = _parse_int_geom_grid(params["n_grid"], "--n-grid")
    vartheta = (params["vartheta"] if params["model"] == "ideal"
                else params["vartheta0"])
    rows = []
    for i, n in enumerate(n_values):
        rmse = mc_rmse(model, theta, int(n), params["reps"],
                       _child_seed(config.seed, i), vartheta=vartheta)
        crb = 1.0 / math.sqrt(n * f)
        rows.append((int(n), rmse, crb, math.sqrt(2.0) * crb))
    return ResultTable(columns=["n", "rmse", "crb", "crb_classical"],
                       rows=rows)


def cmd_chain(config: ExperimentConfig) -> ResultTable:
    params = config.params
    gammas = _parse_grid(params["gamma_grid"], "--gamma-grid")
    if np.any(gammas < 0.0):
        raise ConfigError("--gamma-grid must be nonnegative")
    if params["k_grid"]:
        ks = _parse_int_lin_grid(params["k_grid"], "--k-grid")
    else:
        ks = np.array([params["k"]])
    if np.any(ks < 2):
        raise ConfigError("chain needs k >= 2")
    t_total = params["t_total"]
    rows = []
    for k in ks:
        for gamma in gammas:
            model = NoisyFringeModel(NoisyFringeParams(
                gamma=float(gamma), epsilon_r=params["eps_r"],
                vartheta0=params["vartheta0"]))
            f_end = float(model.fi(t_total))
            f_seg = float(model.fi(t_total / k))
            f_benchmark = f_seg / k
            v_k = 1.0 / f_end - k / f_seg
            approx = k * math.exp(-2.0 * gamma * t_total * (1.0 - 1.0 / k))
            rows.append((int(k), float(gamma), f_end, f_seg, f_benchmark,
                         v_k, f_end / f_benchmark, approx))
    return ResultTable(
        columns=["k", "gamma", "f_end", "f_segment", "f_benchmark", "v_k",
                 "gamma_k", "gamma_k_midfringe"],
        rows=rows)


def cmd_nsit_demo(config: ExperimentConfig) -> ResultTable:
    nsit_holds, v = nsit_separation_demo()
    rows = [
        ("nsit_holds", 1.0 if nsit_holds else 0.0),
        ("v_path", v),
    ]
    return ResultTable(columns=["quantity", "value"], rows=rows)


def cmd_crossing(config: ExperimentConfig) -> ResultTable:
    params = config.params
    if params["k"] < 2:
        raise ConfigError("crossing needs k >= 2")
    if params["gamma_max"] <= 0.0:
        raise ConfigError("gamma-max must be > 0")
    base = NoisyFringeParams(gamma=0.0, epsilon_r=params["eps_r"],
                             vartheta0=params["vartheta0"])
    gamma_star = gamma_crossing(base, params["t_total"], params["k"],
                                gamma_range=(0.0, params["gamma_max"]))
    rows = [(params["k"], params["t_total"], params["eps_r"], gamma_star)]
    return ResultTable(columns=["k", "t_total", "eps_r", "gamma_star"],
                       rows=rows)


_COMMANDS = {
    "fi": cmd_fi,
    "landscape": cmd_landscape,
    "certify": cmd_certify,
    "adversary": cmd_adversary,
    "rmse": cmd_rmse,
    "chain": cmd_chain,
    "nsit-demo": cmd_nsit_demo,
    "crossing": cmd_crossing,
}


def execute(config: ExperimentConfig) -> ResultTable:
    """Run the configured command and attach the metadata block."""
    table = _COMMANDS[config.command](config)
    echo = dict(sorted(config.params.items()))
    echo["seed"] = config.seed
    meta = {
        "tool": f"cfii {__version__}",
        "command": config.command,
        "config": echo,
        "seed": config.seed if config.seed is not None else "none",
        WALLCLOCK_KEY: datetime.now(timezone.utc).isoformat(),
    }
    meta.update(table.meta)
    table.meta = meta
    return table


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = build_config(argv)
        table = execute(config)
        text = (table.render_json() if config.fmt == "json"
                else table.render_csv())
        if config.out:
            Path(config.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0
    except ConfigError as exc:
        print(f"cfii: config error: {exc}", file=sys.stderr)
        return 2
    except CfiiError as exc:
        print(f"cfii: numerical degeneracy: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

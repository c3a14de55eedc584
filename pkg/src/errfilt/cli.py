"""Command-line front end: config parsing, execution, sweeps, CSV/JSON output.

Runs are deterministic: identical config and seed produce byte-identical
output files.  Floats are printed with 17 significant digits so regression
diffs are exact.  ``--trials 0`` selects the analytic/exact paths only.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import classical as cl
from . import filtration as fl
from . import purification as pu
from .checks import compare_codecs, verify_formulas
from .codec import fourier_codec, hadamard_codec
from .errors import ConfigError, DimensionCapError, NumericalCheckError
from .noise import LengthModel, PhaseNoiseSpec

COMMANDS = ("filter", "series", "purify", "protocol1", "protocol2",
            "classical", "coherent", "compare-codecs", "thresholds",
            "sweep", "verify")

_META_KEYS = ("seed", "trials", "workers", "output", "format")


@dataclass(frozen=True)
class ParamSpec:
    kind: str                 # int | float | str | floatlist | choice
    required: bool = False
    default: object = None
    choices: tuple[str, ...] = ()
    check: object = None      # (value) -> error string or None


def _pos_int(v):
    return None if v >= 1 else "must be at least 1"


def _unit_interval(v):
    return None if 0.0 <= v <= 1.0 else "must lie in [0, 1]"


def _non_negative(v):
    return None if v >= 0 else "must be non-negative"


SCHEMAS: dict[str, dict[str, ParamSpec]] = {
    "filter": {
        "T": ParamSpec("int", required=True, check=_pos_int),
        "alpha2": ParamSpec("float", check=_unit_interval),
        "alphas": ParamSpec("floatlist"),
        "Q": ParamSpec("int", default=1, check=_pos_int),
        "codec": ParamSpec("choice", default="fourier",
                           choices=("fourier", "hadamard")),
        "sources": ParamSpec("int", default=2, check=_pos_int),
    },
    "series": {
        "T": ParamSpec("int", required=True, check=_pos_int),
        "Q": ParamSpec("int", default=2, check=_pos_int),
        "survival": ParamSpec("float", check=_unit_interval),
        "gamma": ParamSpec("float", check=_non_negative),
        "length": ParamSpec("float", check=_non_negative),
    },
    "purify": {
        "n": ParamSpec("int", required=True, check=_pos_int),
        "m": ParamSpec("int", required=True, check=_pos_int),
        "p": ParamSpec("float", required=True, check=_unit_interval),
        "decoder": ParamSpec("choice", default="fourier",
                             choices=("fourier", "hadamard")),
        "offset": ParamSpec("int", default=1, check=_pos_int),
    },
    "protocol1": {
        "S": ParamSpec("int", required=True, check=_pos_int),
        "R": ParamSpec("int", required=True, check=_pos_int),
        "p": ParamSpec("float", required=True, check=_unit_interval),
    },
    "protocol2": {
        "T": ParamSpec("int", required=True, check=_pos_int),
        "alpha2": ParamSpec("float", required=True, check=_unit_interval),
        "amps": ParamSpec("floatlist"),
        "S": ParamSpec("int", default=2, check=_pos_int),
    },
    "classical": {
        "T": ParamSpec("int", required=True, check=_pos_int),
        "kind": ParamSpec("choice", default="linear-phase",
                          choices=("linear-phase", "linear-amplitude",
                                   "nonlinear-phase")),
        "alpha2": ParamSpec("float", default=0.9, check=_unit_interval),
        "mu": ParamSpec("float", default=0.0),
        "sigma": ParamSpec("float", default=0.1, check=_non_negative),
        "var_phi": ParamSpec("float", default=0.25, check=_non_negative),
        "mean_phi": ParamSpec("float", default=0.0),
        "A": ParamSpec("float", default=1.0),
    },
    "coherent": {
        "T": ParamSpec("int", required=True, check=_pos_int),
        "alpha2": ParamSpec("float", required=True, check=_unit_interval),
        "phi": ParamSpec("float", default=0.0),
        "lam": ParamSpec("float", default=1.0),
    },
    "compare-codecs": {
        "T": ParamSpec("int", required=True, check=_pos_int),
    },
    "thresholds": {
        "fidelity": ParamSpec("float", required=True, check=_unit_interval),
    },
    "verify": {
        "subset": ParamSpec("str", default=""),
    },
}
# sweep wraps a base command; its own keys are the base command plus "run"
SCHEMAS["sweep"] = {"run": ParamSpec("choice", required=True,
                                     choices=tuple(c for c in COMMANDS
                                                   if c not in ("sweep", "verify")))}


@dataclass(frozen=True)
class SweepAxis:
    axis: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict
    seed: int = 1
    trials: int = 0
    workers: int = 1
    output: str = "-"
    fmt: str = "csv"
    sweep: tuple[SweepAxis, ...] = ()


def _parse_value(key: str, raw: str, spec: ParamSpec, where: str):
    try:
        if spec.kind == "int":
            value = int(raw)
        elif spec.kind == "float":
            value = float(raw)
        elif spec.kind == "floatlist":
            value = tuple(float(v) for v in raw.split(",") if v.strip())
        elif spec.kind == "choice":
            value = raw.strip()
            if value not in spec.choices:
                raise ConfigError(
                    f"{where}: {key} must be one of {', '.join(spec.choices)}")
        else:
            value = raw.strip()
    except ValueError as exc:
        raise ConfigError(f"{where}: invalid value for {key!r}: {raw!r}") from exc
    if spec.check is not None and spec.kind in ("int", "float"):
        msg = spec.check(value)
        if msg:
            raise ConfigError(f"{where}: {key} {msg} (got {raw})")
    return value


def _read_config_file(path: str) -> tuple[dict, dict, list[dict]]:
    """Returns (command params, meta params, sweep sections) as raw strings
    keyed with the line number where each appeared."""
    section = "command"
    cmd_params: dict[str, tuple[str, int]] = {}
    meta: dict[str, tuple[str, int]] = {}
    sweeps: list[dict[str, tuple[str, int]]] = []
    current_sweep: dict[str, tuple[str, int]] | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if text.startswith("[") and text.endswith("]"):
                name = text[1:-1].strip().lower()
                if name == "command":
                    section = "command"
                elif name in ("sweep", "sweep2", "sweep3"):
                    section = "sweep"
                    current_sweep = {}
                    sweeps.append(current_sweep)
                else:
                    raise ConfigError(f"line {lineno}: unknown section [{name}]")
                continue
            if "=" not in text:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, raw = (part.strip() for part in text.split("=", 1))
            if section == "sweep":
                current_sweep[key] = (raw, lineno)
            elif key in _META_KEYS:
                meta[key] = (raw, lineno)
            else:
                cmd_params[key] = (raw, lineno)
    if len(sweeps) > 3:
        raise ConfigError("at most 3 sweep axes are supported")
    return cmd_params, meta, sweeps


def _schema_for(command: str) -> dict[str, ParamSpec]:
    schema = dict(SCHEMAS[command])
    if command == "sweep":
        return schema  # base params validated against the wrapped command
    return schema


def _validate_params(command: str, raw_params: dict, allow_extra_schema=None
                     ) -> dict:
    schema = _schema_for(command)
    if command == "sweep":
        run_raw = raw_params.get("run")
        if run_raw is None:
            raise ConfigError("sweep requires run = <command>")
        schema = dict(schema)
        schema.update(SCHEMAS[_parse_value("run", run_raw[0], SCHEMAS["sweep"]["run"],
                                           _where(run_raw))])
    params = {}
    for key, (raw, lineno) in raw_params.items():
        if key not in schema:
            raise ConfigError(f"{_loc(lineno)}unknown key {key!r} for "
                              f"command {command!r}")
        params[key] = _parse_value(key, raw, schema[key], _loc(lineno).rstrip(": ")
                                   or "parameter")
    for key, spec in schema.items():
        if key not in params:
            if spec.required:
                raise ConfigError(f"missing required key {key!r} for "
                                  f"command {command!r}")
            if spec.default is not None:
                params[key] = spec.default
    return params


def _loc(lineno) -> str:
    return f"line {lineno}: " if lineno else ""


def _where(raw) -> str:
    return _loc(raw[1]).rstrip(": ") or "parameter"


def _parse_sweep(sections: list[dict], command: str) -> tuple[SweepAxis, ...]:
    base = SCHEMAS[command]
    axes = []
    for sec in sections:
        if "axis" not in sec:
            raise ConfigError("sweep section requires an axis key")
        axis_raw, axis_line = sec["axis"]
        axis = axis_raw.strip()
        if axis not in base or base[axis].kind not in ("int", "float"):
            raise ConfigError(f"{_loc(axis_line)}sweep axis {axis!r} is not a "
                              f"numeric parameter of {command!r}")
        if "values" in sec:
            values = tuple(float(v) for v in sec["values"][0].split(",") if v.strip())
        else:
            for need in ("start", "stop", "count"):
                if need not in sec:
                    raise ConfigError("sweep grid needs values or start/stop/count")
            start = float(sec["start"][0])
            stop = float(sec["stop"][0])
            count = int(sec["count"][0])
            if count < 2:
                raise ConfigError("sweep count must be at least 2")
            values = tuple(np.linspace(start, stop, count))
        if len(values) < 2:
            raise ConfigError("sweep needs at least 2 values")
        axes.append(SweepAxis(axis=axis, values=values))
    return tuple(axes)


def parse_config(path: str | None = None, cli_params: list[str] | None = None,
                 command: str | None = None, **meta_overrides) -> RunConfig:
    """Build a validated RunConfig from a config file and/or CLI parameters.

    CLI ``key=value`` entries override file values; unknown keys are rejected
    naming the offending line (file) or parameter (CLI).
    """
    raw_cmd: dict[str, tuple[str, int]] = {}
    raw_meta: dict[str, tuple[str, int]] = {}
    sweep_sections: list[dict] = []
    if path:
        raw_cmd, raw_meta, sweep_sections = _read_config_file(path)
    if "command" in raw_cmd:
        file_command = raw_cmd.pop("command")[0].strip()
        if command is not None and command != file_command:
            raise ConfigError(
                f"command {command!r} conflicts with config file {file_command!r}")
        command = file_command
    if command is None:
        raise ConfigError("no command given (positional argument or config file)")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    for entry in cli_params or []:
        if "=" not in entry:
            raise ConfigError(f"parameter {entry!r} is not of the form key=value")
        key, raw = (part.strip() for part in entry.split("=", 1))
        if key in _META_KEYS:
            raw_meta[key] = (raw, 0)
        else:
            raw_cmd[key] = (raw, 0)
    params = _validate_params(command, raw_cmd)
    sweep = ()
    if command == "sweep":
        sweep = _parse_sweep(sweep_sections, params["run"])
        if not sweep:
            raise ConfigError("sweep command requires at least one [sweep] section")
    meta = {}
    for key, (raw, lineno) in raw_meta.items():
        try:
            meta[key] = raw if key in ("output", "format") else int(raw)
        except ValueError as exc:
            raise ConfigError(f"{_loc(lineno)}invalid value for {key!r}") from exc
    meta.update({k: v for k, v in meta_overrides.items() if v is not None})
    fmt = meta.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    trials = meta.get("trials", 0)
    if trials < 0:
        raise ConfigError("trials must be non-negative")
    workers = meta.get("workers", 1)
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    return RunConfig(command=command, params=params, seed=meta.get("seed", 1),
                     trials=trials, workers=workers,
                     output=meta.get("output", "-"), fmt=fmt, sweep=sweep)


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parsing it back yields an equal RunConfig."""
    lines = ["[command]", f"command = {cfg.command}"]
    for key in sorted(cfg.params):
        value = cfg.params[key]
        if isinstance(value, tuple):
            value = ",".join(_fmt_number(v) for v in value)
        lines.append(f"{key} = {value}")
    lines += [f"seed = {cfg.seed}", f"trials = {cfg.trials}",
              f"workers = {cfg.workers}", f"format = {cfg.fmt}"]
    for ax in cfg.sweep:
        lines += ["[sweep]", f"axis = {ax.axis}",
                  "values = " + ",".join(_fmt_number(v) for v in ax.values)]
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()[:16]


def _fmt_number(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, int, float)):
        return _fmt_number(v)
    return str(v)


# -- per-command execution ----------------------------------------------------


def _filter_noise(params, t_tot):
    alphas = params.get("alphas")
    if alphas:
        if len(alphas) != t_tot:
            raise ConfigError(f"alphas must list {t_tot} values")
        return PhaseNoiseSpec.from_alphas(alphas)
    if "alpha2" not in params:
        raise ConfigError("filter needs alpha2 or alphas")
    return PhaseNoiseSpec.uniform(t_tot, alpha2=params["alpha2"])


def _run_filter(cfg: RunConfig, params, seed) -> list[dict]:
    make = fourier_codec if params["codec"] == "fourier" else hadamard_codec
    codec = make(params["T"], sources=params["sources"])
    fcfg = fl.FiltrationConfig(codec=codec,
                               noise=_filter_noise(params, codec.t_tot),
                               segments=params["Q"])
    out = fl.run_monte_carlo(fcfg, cfg.trials, seed, cfg.workers) \
        if cfg.trials > 0 else fl.run_exact(fcfg)
    return [{
        "T": params["T"], "Q": params["Q"], "alpha2": params.get("alpha2"),
        "p_success": out.p_success,
        "p_err_given_success": out.p_error_given_success,
        "fidelity": out.conditional_fidelity,
        "visibility": out.visibility,
        "se_p_success": out.stderr.get("p_success"),
        "se_fidelity": out.stderr.get("conditional_fidelity"),
        "se_visibility": out.stderr.get("visibility"),
    }]


def _run_series(cfg: RunConfig, params, seed) -> list[dict]:
    if "survival" in params and params["survival"] is not None:
        gamma, length = 1.0, -math.log(params["survival"])
    elif "gamma" in params and "length" in params:
        gamma, length = params["gamma"], params["length"]
    else:
        raise ConfigError("series needs survival or gamma and length")
    model = LengthModel(gamma, length)
    fcfg = fl.FiltrationConfig(codec=fourier_codec(params["T"]),
                               length_model=model, segments=params["Q"])
    out = fl.run_monte_carlo(fcfg, cfg.trials, seed, cfg.workers) \
        if cfg.trials > 0 else fl.run_exact(fcfg)
    closed = fl.series_error_analytic(gamma, length, params["Q"], params["T"])
    return [{
        "T": params["T"], "Q": params["Q"], "alpha2": model.survival(),
        "p_success": out.p_success,
        "p_err_given_success": out.p_error_given_success,
        "fidelity": out.conditional_fidelity,
        "p_err_closed_form": closed,
        "p_err_limit": fl.series_limit_analytic(math.sqrt(model.survival()),
                                                params["T"]),
        "se_p_success": out.stderr.get("p_success"),
    }]


def _run_purify(cfg: RunConfig, params, seed) -> list[dict]:
    kind = "fourier-conjugate-pair" if params["decoder"] == "fourier" \
        else "hadamard-pair"
    pcfg = pu.PurifyConfig(params["n"], params["m"], params["p"],
                           decoder_kind=kind, block_offset=params["offset"])
    out = pu.purify(pcfg)
    return [{
        "n": params["n"], "m": params["m"], "p": params["p"],
        "decoder_kind": kind,
        "F_m": pu.fidelity_unfiltered(params["m"], params["p"]),
        "F_prime": out.fidelity,
        "p_success": out.p_success,
        "p_total": out.p_success_total,
    }]


def _run_protocol1(cfg: RunConfig, params, seed) -> list[dict]:
    rep = pu.protocol1_run(params["S"], params["R"], params["p"])
    return [{
        "S": params["S"], "R": params["R"], "p": params["p"],
        "fidelity": rep.fidelity,
        "fidelity_closed_form": rep.closed_form,
        "p_success": rep.p_success,
        "y": rep.y_value,
        "condition3": rep.condition3_ok,
    }]


def _run_protocol2(cfg: RunConfig, params, seed) -> list[dict]:
    amps = params.get("amps")
    if amps:
        vec = np.array(amps, dtype=complex)
        norm = np.linalg.norm(vec)
        if norm <= 0:
            raise ConfigError("amps must not be all zero")
        vec = vec / norm
    else:
        s = params["S"]
        vec = np.full(s, 1.0 / math.sqrt(s), dtype=complex)
    alpha = math.sqrt(params["alpha2"])
    return [{
        "S": vec.size, "T": params["T"], "alpha2": params["alpha2"],
        "sum_quartic": float(np.sum(np.abs(vec) ** 4)),
        "fidelity": pu.protocol2_run(vec, alpha, params["T"]),
        "fidelity_closed_form": pu.protocol2_fidelity(vec, alpha, params["T"]),
    }]


def _classical_noise(params) -> cl.NoiseFunction:
    kind = params["kind"]
    if kind == "linear-phase":
        return cl.NoiseFunction.linear_phase(math.sqrt(params["alpha2"]))
    if kind == "linear-amplitude":
        return cl.NoiseFunction.linear_amplitude(params["mu"], params["sigma"])
    return cl.NoiseFunction.nonlinear_phase(math.sqrt(params["alpha2"]),
                                            var=params["var_phi"],
                                            nl_mean=params["mean_phi"])


def _run_classical(cfg: RunConfig, params, seed) -> list[dict]:
    nf = _classical_noise(params)
    amp, t = params["A"], params["T"]
    if cfg.trials > 0:
        out = cl.classical_moments(amp, t, nf, cfg.trials, seed, cfg.workers)
    else:
        mean = cl.mean_amplitude_analytic(amp, t, nf)
        out = cl.ClassicalOutcome(
            mean_amplitude=mean,
            mean_intensity=cl.mean_intensity_analytic(amp, t, nf),
            fluctuation=cl.fluctuation_analytic(amp, t, nf),
            visibility=cl.visibility_analytic_classical(amp, t, nf))
    return [{
        "T": t, "noise_kind": params["kind"], "A": amp,
        "mean_amp_re": out.mean_amplitude.real,
        "mean_amp_im": out.mean_amplitude.imag,
        "intensity": out.mean_intensity,
        "fluctuation": out.fluctuation,
        "visibility": out.visibility,
        "se_amp": out.stderr.get("mean_amplitude"),
        "se_intensity": out.stderr.get("mean_intensity"),
        "se_visibility": out.stderr.get("visibility"),
    }]


def _run_coherent(cfg: RunConfig, params, seed) -> list[dict]:
    ccfg = cl.CoherentConfig(lam=params["lam"], phi=params["phi"],
                             t=params["T"], alpha=math.sqrt(params["alpha2"]))
    row = {
        "T": params["T"], "alpha2": params["alpha2"], "phi": params["phi"],
        "current": cl.coherent_current(ccfg),
        "current_mc": None, "se_current": None,
    }
    if cfg.trials > 0:
        mc, se = cl.coherent_current_mc(ccfg, cfg.trials, seed, cfg.workers)
        row["current_mc"], row["se_current"] = mc, se
    return [row]


def _run_compare(cfg: RunConfig, params, seed) -> list[dict]:
    comparison = compare_codecs(params["T"])
    return [dict(T=params["T"], **row) for row in comparison.rows]


def _run_thresholds(cfg: RunConfig, params, seed) -> list[dict]:
    rep = fl.threshold_report(params["fidelity"])
    return [{
        "fidelity": params["fidelity"],
        "bb84_secure": rep.bb84_secure,
        "werner_entangled": rep.werner_entangled,
    }]


def _run_verify(cfg: RunConfig, params, seed) -> list[dict]:
    subset = params.get("subset") or None
    try:
        results = verify_formulas(subset=subset,
                                  trials=cfg.trials if cfg.trials > 0 else None)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = []
    failed = False
    for res in results:
        print(res.line())
        rows.append({"check": res.name, "passed": res.passed,
                     "detail": res.detail})
        failed |= not res.passed
    if failed:
        raise NumericalCheckError("one or more verification checks failed")
    return rows


_RUNNERS = {
    "filter": _run_filter,
    "series": _run_series,
    "purify": _run_purify,
    "protocol1": _run_protocol1,
    "protocol2": _run_protocol2,
    "classical": _run_classical,
    "coherent": _run_coherent,
    "compare-codecs": _run_compare,
    "thresholds": _run_thresholds,
    "verify": _run_verify,
}


def _run_sweep(cfg: RunConfig) -> list[dict]:
    base_command = cfg.params["run"]
    base_params = {k: v for k, v in cfg.params.items() if k != "run"}
    grids = [ax.values for ax in cfg.sweep]
    names = [ax.axis for ax in cfg.sweep]
    rows = []
    combos = [()]
    for grid in grids:
        combos = [prior + (v,) for prior in combos for v in grid]
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(combos))
    for combo, row_seed in zip(combos, seeds):
        params = dict(base_params)
        for name, value in zip(names, combo):
            spec = SCHEMAS[base_command][name]
            params[name] = int(round(value)) if spec.kind == "int" else value
        raw = {k: (_encode_raw(v), 0) for k, v in params.items()}
        checked = _validate_params(base_command, raw)
        for row in _RUNNERS[base_command](cfg, checked, row_seed):
            rows.append({**{n: v for n, v in zip(names, combo)}, **row})
    return rows


def _encode_raw(value) -> str:
    if isinstance(value, tuple):
        return ",".join(_fmt_number(v) for v in value)
    return _fmt_number(value) if isinstance(value, (int, float)) else str(value)


def execute(cfg: RunConfig) -> int:
    """Run a validated config and write the results file.  Returns the exit
    code: 0 ok, 2 config error, 3 dimension cap, 4 numerical check failure."""
    try:
        if cfg.command == "sweep":
            rows = _run_sweep(cfg)
        else:
            rows = _RUNNERS[cfg.command](cfg, cfg.params, cfg.seed)
        _write_output(cfg, rows)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DimensionCapError as exc:
        print(f"dimension cap exceeded: {exc}", file=sys.stderr)
        return 3
    except NumericalCheckError as exc:
        print(f"numerical check failed: {exc}", file=sys.stderr)
        return 4
    return 0


def _write_output(cfg: RunConfig, rows: list[dict]) -> None:
    meta = {
        "version": __version__,
        "command": cfg.command,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "trials": cfg.trials,
        "workers": cfg.workers,
    }
    if cfg.fmt == "json":
        body = json.dumps({"meta": meta, "rows": rows}, indent=2,
                          sort_keys=True, default=_fmt_cell) + "\n"
    else:
        buf = io.StringIO()
        for key, value in meta.items():
            buf.write(f"# {key}={value}\n")
        if rows:
            header = ["config_hash"] + list(rows[0].keys())
            buf.write(",".join(header) + "\n")
            for row in rows:
                cells = [meta["config_hash"]] + [_fmt_cell(v) for v in row.values()]
                buf.write(",".join(cells) + "\n")
        body = buf.getvalue()
    if cfg.output == "-":
        sys.stdout.write(body)
    else:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(body)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="errfilt",
        description="Simulate channel-multiplexed error filtration and "
                    "source-multiplexed purification over noisy channels.")
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="what to run (or use --config)")
    parser.add_argument("params", nargs="*", metavar="key=value",
                        help="command parameters")
    parser.add_argument("--config", help="config file path")
    parser.add_argument("--seed", type=int, default=None,
                        help="root RNG seed (default 1)")
    parser.add_argument("--trials", type=int, default=None,
                        help="Monte-Carlo samples; 0 = analytic/exact only")
    parser.add_argument("--workers", type=int, default=None,
                        help="independent Monte-Carlo streams")
    parser.add_argument("--output", default=None, help="output path (- = stdout)")
    parser.add_argument("--format", dest="fmt", choices=("csv", "json"),
                        default=None)
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(path=args.config, cli_params=args.params,
                           command=args.command, seed=args.seed,
                           trials=args.trials, workers=args.workers,
                           output=args.output, format=args.fmt)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())

"""Experiment configuration files: flat key-value text with sections.

The format is INI-style, parsed by configparser. Sections and keys:

    [grid]        n (or spacing)
    [time]        dt, horizon, record_stride
    [plant]       epsilon, q (number or "inf"), actuation, c
    [coefficient] model, plus model parameters (value, amplitude, rate,
                  phase, offset, spatial_amplitude, lambda_bar, phi, path)
    [trigger]     mode, R, eta, theta, mu (optional override)
    [kernel]      solver, tol, max_iter, refine
    [initial]     profile (bump | zero | family:<n>)
    [tables]      runs, variants, columns   (cmd_tables only)

Unknown sections or keys raise ConfigError so typos fail loudly.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from typing import Optional

from .closedloop import CoefficientSpec, KernelSolverKind, SimConfig
from .plant import Actuation, PlantConfig
from .trigger import TriggerMode, TriggerParams, scheduler_mu


class ConfigError(ValueError):
    pass


_KNOWN_KEYS = {
    "grid": {"n", "spacing"},
    "time": {"dt", "horizon", "record_stride"},
    "plant": {"epsilon", "q", "actuation", "c"},
    "coefficient": {"model", "value", "amplitude", "rate", "phase", "offset",
                    "spatial_amplitude", "lambda_bar", "phi", "path"},
    "trigger": {"mode", "r", "eta", "theta", "mu"},
    "kernel": {"solver", "tol", "max_iter", "refine"},
    "initial": {"profile"},
    "tables": {"runs", "variants", "columns", "workers", "histogram_bins"},
}


def _float(section, key, default=None):
    raw = section.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key {key!r} in [{section.name}]")
        return default
    raw = raw.strip().lower()
    if raw in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key {key!r} in [{section.name}]: not a number: {raw!r}") from None


@dataclass(frozen=True)
class TableSweep:
    """Scheduler variants (rows) and parameter columns for table emission."""

    runs: int
    variants: tuple          # ("static",) or ("dynamic", theta)
    columns: tuple           # (R, eta) pairs
    workers: int = 1
    histogram_bins: int = 20


@dataclass(frozen=True)
class RunManifest:
    """What the CLI was asked to do; runs are seedless and deterministic."""

    config_path: str
    out_dir: str
    subcommand: str
    initial_profile: str = "bump"
    deterministic: bool = True
    tables: Optional[TableSweep] = None


def load_config(path) -> tuple[SimConfig, str, Optional[TableSweep]]:
    """Parse a config file into (SimConfig, initial-profile name, table sweep)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from exc
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    for name in parser.sections():
        if name not in _KNOWN_KEYS:
            raise ConfigError(f"unknown section [{name}]")
        for key in parser[name]:
            if key not in _KNOWN_KEYS[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]")

    if "grid" not in parser:
        raise ConfigError("missing [grid] section")
    gsec = parser["grid"]
    if "n" in gsec:
        n = int(gsec["n"])
    elif "spacing" in gsec:
        n = int(round(1.0 / _float(gsec, "spacing"))) + 1
    else:
        raise ConfigError("[grid] needs n or spacing")

    if "time" not in parser:
        raise ConfigError("missing [time] section")
    tsec = parser["time"]
    dt = _float(tsec, "dt")
    horizon = _float(tsec, "horizon")
    stride = int(tsec.get("record_stride", "5"))

    for optional in ("plant", "kernel", "initial"):
        if optional not in parser:
            parser.add_section(optional)
    psec = parser["plant"]
    try:
        actuation = Actuation(psec.get("actuation", "dirichlet").lower())
    except ValueError:
        raise ConfigError("plant actuation must be dirichlet or neumann") from None
    try:
        plant = PlantConfig(epsilon=_float(psec, "epsilon", 1.0),
                            q=_float(psec, "q", math.inf),
                            actuation=actuation, c=_float(psec, "c", 0.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if "coefficient" not in parser:
        raise ConfigError("missing [coefficient] section")
    csec = parser["coefficient"]
    model = csec.get("model")
    if not model:
        raise ConfigError("[coefficient] needs a model name")
    params = {k: (csec[k] if k == "path" else float(csec[k]))
              for k in csec if k not in ("model",)}
    coefficient = CoefficientSpec(model, params)

    if "trigger" not in parser:
        raise ConfigError("missing [trigger] section")
    trsec = parser["trigger"]
    mode_raw = trsec.get("mode", "static").lower()
    try:
        mode = TriggerMode(mode_raw)
    except ValueError:
        raise ConfigError("trigger mode must be static or dynamic") from None
    R = _float(trsec, "r")
    mu = _float(trsec, "mu", 0.0) or scheduler_mu(plant)
    try:
        if mode is TriggerMode.STATIC:
            trig = TriggerParams.static(R=R, mu=mu)
        else:
            theta = _float(trsec, "theta")
            eta = _float(trsec, "eta", 0.0) or None
            trig = TriggerParams.dynamic(R=R, mu=mu, theta=theta, eta=eta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    ksec = parser["kernel"]
    try:
        solver = KernelSolverKind(ksec.get("solver", "numeric").lower())
    except ValueError:
        raise ConfigError("kernel solver must be closed-form or numeric") from None

    try:
        sim = SimConfig(
            n=n, dt=dt, horizon=horizon, plant=plant, coefficient=coefficient,
            trigger=trig, kernel_solver=solver, record_stride=stride,
            kernel_tol=_float(ksec, "tol", 1e-10),
            kernel_max_iter=int(ksec.get("max_iter", "200")),
            kernel_refine=int(ksec.get("refine", "8")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    profile = parser["initial"].get("profile", "bump")
    sweep = _parse_tables(parser["tables"]) if "tables" in parser else None
    return sim, profile, sweep


def _parse_tables(section) -> TableSweep:
    runs = int(section.get("runs", "100"))
    variants = []
    for token in section.get("variants", "static").split(","):
        token = token.strip().lower()
        if token == "static":
            variants.append(("static",))
        elif token.startswith("dynamic:"):
            variants.append(("dynamic", float(token.split(":", 1)[1])))
        else:
            raise ConfigError(f"bad variant {token!r}; use static or dynamic:<theta>")
    columns = []
    for token in section.get("columns", "").split(","):
        token = token.strip()
        if not token:
            continue
        parts = token.split(":")
        if len(parts) != 2:
            raise ConfigError(f"bad column {token!r}; use R:eta")
        columns.append((float(parts[0]), float(parts[1])))
    if not columns:
        raise ConfigError("[tables] needs at least one R:eta column")
    return TableSweep(runs=runs, variants=tuple(variants), columns=tuple(columns),
                      workers=int(section.get("workers", "1")),
                      histogram_bins=int(section.get("histogram_bins", "20")))

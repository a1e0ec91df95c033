"""Run configuration: a line-oriented ``key = value`` format with sections.

Grammar (documented in the README):

* blank lines and lines starting with ``#`` are ignored; ``#`` also starts a
  trailing comment,
* ``[section]`` opens a section; keys belong to the current section,
* ``key = value`` assigns; values are numbers, booleans (true/false),
  bare words, or 2-vectors written ``(a, b)``,
* ``probe`` may repeat inside ``[probes]``; every other key is single-valued,
* unknown sections or keys are errors; all errors are collected with their
  line numbers before parsing fails.

Every field has a default, so the empty file parses (with a warning listing
the defaulted fields).  ``serialize_config(parse_config(text))`` reparses to
an equal configuration.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = ["RunConfig", "ConfigError", "parse_config", "serialize_config"]


class ConfigError(ValueError):
    """Carries the full list of parse/validation errors."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class RunConfig:
    # kernel
    alpha: float = 2.0 / 3.0
    tau: float = 1.0
    gamma: float = 0.5
    # elastic
    mu: float = 1.0
    lam: float = 1.0
    rho: float = 3000.0
    # mesh
    nx: int = 8
    ny: int = 8
    lx: float = 1.0
    ly: float = 1.0
    # time
    t_final: float = 1.0
    steps: int = 32
    # loads (per-side constant tractions, constant volume load)
    f: tuple = (0.0, 0.0)
    g_left: tuple = (0.0, 0.0)
    g_right: tuple = (0.0, 0.0)
    g_bottom: tuple = (0.0, 0.0)
    g_top: tuple = (0.0, 0.0)
    # probes
    probes: tuple = ((1.0, 1.0),)
    # solver / modes
    method: str = "direct"
    cg_tol: float = 1e-10
    weights_mode: str = "closed_form"
    mass_lumping: bool = False
    # output
    out_dir: str = "out"

    def validate(self):
        """Constraint violations as (field, message) pairs."""
        errors = []
        if not (0.0 < self.alpha <= 1.0):
            errors.append(("alpha", f"alpha must be in (0, 1], got {self.alpha}"))
        if not self.tau > 0.0:
            errors.append(("tau", f"tau must be positive, got {self.tau}"))
        if not (0.0 <= self.gamma < 1.0):
            errors.append(("gamma", f"gamma must be in [0, 1), got {self.gamma}"))
        for name in ("mu", "lam", "rho"):
            if not getattr(self, name) > 0.0:
                errors.append((name, f"{name} must be positive"))
        for name in ("nx", "ny"):
            if getattr(self, name) < 1:
                errors.append((name, f"{name} must be >= 1"))
        for name in ("lx", "ly"):
            if getattr(self, name) <= 0.0:
                errors.append((name, f"{name} must be positive"))
        if self.t_final <= 0.0:
            errors.append(("t_final", "t_final must be positive"))
        if self.steps < 1:
            errors.append(("steps", "steps must be >= 1"))
        if self.method not in ("direct", "cg"):
            errors.append(("method",
                           f"method must be direct or cg, got {self.method}"))
        if self.weights_mode not in ("closed_form", "midpoint"):
            errors.append(("weights_mode",
                           "weights_mode must be closed_form or midpoint"))
        if not self.cg_tol > 0.0:
            errors.append(("cg_tol", "cg_tol must be positive"))
        return errors


_SCHEMA = {
    "kernel": {"alpha": float, "tau": float, "gamma": float},
    "elastic": {"mu": float, "lambda": float, "rho": float},
    "mesh": {"nx": int, "ny": int, "lx": float, "ly": float},
    "time": {"t_final": float, "steps": int, "dt": float},
    "loads": {"f": "vec", "g_left": "vec", "g_right": "vec",
              "g_bottom": "vec", "g_top": "vec"},
    "probes": {"probe": "vec"},
    "solver": {"method": str, "cg_tol": float, "weights_mode": str,
               "mass_lumping": bool},
    "output": {"dir": str},
}

_FIELD_OF = {("elastic", "lambda"): "lam", ("output", "dir"): "out_dir"}


def _parse_value(kind, raw, where, errors):
    raw = raw.strip()
    try:
        if kind == "vec":
            if not (raw.startswith("(") and raw.endswith(")")):
                raise ValueError("expected a vector like (0, -1)")
            parts = raw[1:-1].split(",")
            if len(parts) != 2:
                raise ValueError("expected exactly two components")
            return (float(parts[0]), float(parts[1]))
        if kind is bool:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError("expected a boolean")
        return kind(raw)
    except ValueError as err:
        errors.append(f"{where}: {err}")
        return None


def parse_config(text):
    """Parse and validate; raises ConfigError with every problem found."""
    errors = []
    assigned = {}
    line_of = {}
    probes = []
    section = None
    saw_dt = saw_steps = False
    dt_value = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in _SCHEMA:
                errors.append(f"line {lineno}: unknown section [{name}]")
                section = "__bad__"
            else:
                section = name
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key = value")
            continue
        key, _, raw = line.partition("=")
        key = key.strip().lower()
        if section is None:
            errors.append(f"line {lineno}: key {key!r} before any section")
            continue
        if section == "__bad__":
            continue
        schema = _SCHEMA[section]
        if key not in schema:
            errors.append(f"line {lineno}: unknown key {key!r} in [{section}]")
            continue
        value = _parse_value(schema[key], raw, f"line {lineno}: {key}", errors)
        if value is None:
            continue
        if section == "probes":
            probes.append(value)
            continue
        if section == "time" and key == "dt":
            saw_dt = True
            dt_value = value
            continue
        if section == "time" and key == "steps":
            saw_steps = True
        fname = _FIELD_OF.get((section, key), key)
        if fname in assigned:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        assigned[fname] = value
        line_of[fname] = lineno

    cfg = RunConfig()
    defaulted = [f for f in cfg.__dataclass_fields__
                 if f not in assigned and f != "probes"]
    if probes:
        assigned["probes"] = tuple(probes)
    else:
        defaulted.append("probes")
    cfg = replace(cfg, **assigned)
    if saw_dt:
        if saw_steps:
            errors.append("time: give either steps or dt, not both")
        elif dt_value is not None and dt_value > 0.0:
            cfg = replace(cfg, steps=int(round(cfg.t_final / dt_value)))
            defaulted = [f for f in defaulted if f != "steps"]
        else:
            errors.append("time: dt must be positive")
    for field_name, message in cfg.validate():
        if field_name in line_of:
            errors.append(f"line {line_of[field_name]}: {message}")
        else:
            errors.append(message)
    if errors:
        raise ConfigError(errors)
    if defaulted:
        warnings.warn("using defaults for: " + ", ".join(sorted(defaulted)),
                      stacklevel=2)
    return cfg


def serialize_config(cfg: RunConfig):
    def vec(v):
        return f"({v[0]!r}, {v[1]!r})"

    lines = [
        "[kernel]",
        f"alpha = {cfg.alpha!r}",
        f"tau = {cfg.tau!r}",
        f"gamma = {cfg.gamma!r}",
        "[elastic]",
        f"mu = {cfg.mu!r}",
        f"lambda = {cfg.lam!r}",
        f"rho = {cfg.rho!r}",
        "[mesh]",
        f"nx = {cfg.nx}",
        f"ny = {cfg.ny}",
        f"lx = {cfg.lx!r}",
        f"ly = {cfg.ly!r}",
        "[time]",
        f"t_final = {cfg.t_final!r}",
        f"steps = {cfg.steps}",
        "[loads]",
        f"f = {vec(cfg.f)}",
        f"g_left = {vec(cfg.g_left)}",
        f"g_right = {vec(cfg.g_right)}",
        f"g_bottom = {vec(cfg.g_bottom)}",
        f"g_top = {vec(cfg.g_top)}",
        "[probes]",
    ]
    lines += [f"probe = {vec(p)}" for p in cfg.probes]
    lines += [
        "[solver]",
        f"method = {cfg.method}",
        f"cg_tol = {cfg.cg_tol!r}",
        f"weights_mode = {cfg.weights_mode}",
        f"mass_lumping = {str(cfg.mass_lumping).lower()}",
        "[output]",
        f"dir = {cfg.out_dir}",
    ]
    return "\n".join(lines) + "\n"

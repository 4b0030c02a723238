"""Run configuration: a single JSON document per batch job.

All rates and frequencies are in units of the declared reference rate
(the fluctuator's total switching-rate scale for single runs, the fastest
member rate for ensembles).  An optional ``physical`` block (reference
rate in rad/s, temperature in kelvin) is converted to the dimensionless
bath temperature once at load time.  Parsing is fail-fast: every
referenced parameter is constructed (and therefore validated) before any
computation starts, and serialisation is canonical (sorted keys) so a
config round-trips bit-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .dephasing import DephasingConfig
from .ensemble import (DEFAULT_MODE, EnsembleSpec, FAITHFUL_MODE,
                       default_1f_ensemble)
from .errors import TlsDriveError
from .lindblad import (DEFAULT_THETA, DriveParams, TlsParams,
                       theta_from_physical)
from .sweep import SimParams, SweepPlan

FORMAT_VERSION = 1

MODES = ("simulate", "psd", "tphi", "grid", "eta-scan", "epsilon-scan",
         "ensemble", "classical-check")


class ConfigError(TlsDriveError, ValueError):
    """Configuration document rejected during validation."""


def _require(mapping: dict, key: str, ctx: str):
    if key not in mapping:
        raise ConfigError(f"missing required field {key!r} in {ctx}")
    return mapping[key]


def _no_unknown(mapping: dict, allowed: set, ctx: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)} in {ctx}")


def _theta(raw: dict) -> float:
    if "physical" in raw:
        phys = raw["physical"]
        _no_unknown(phys, {"gamma_rad_per_s", "temperature_k"}, "physical")
        return theta_from_physical(
            _require(phys, "temperature_k", "physical"),
            _require(phys, "gamma_rad_per_s", "physical"))
    return float(raw.get("theta", DEFAULT_THETA))


def parse_tls(raw: dict, ctx: str = "tls") -> TlsParams:
    _no_unknown(raw, {"gamma_relax", "kappa_excite", "gamma_total", "eta",
                      "epsilon", "delta", "theta", "physical"}, ctx)
    eta = float(raw.get("eta", 0.0))
    eps = float(raw.get("epsilon", 0.0))
    delta = float(raw.get("delta", 0.0))
    if "gamma_relax" in raw or "kappa_excite" in raw:
        return TlsParams(gamma_relax=float(_require(raw, "gamma_relax", ctx)),
                         kappa_excite=float(_require(raw, "kappa_excite", ctx)),
                         eta=eta, epsilon=eps, delta=delta)
    gamma_total = float(raw.get("gamma_total", 1.0))
    return TlsParams.with_detailed_balance(
        gamma_total=gamma_total, eta=eta, epsilon=eps, delta=delta,
        theta=_theta(raw))


def tls_to_dict(p: TlsParams) -> dict:
    return {"gamma_relax": p.gamma_relax, "kappa_excite": p.kappa_excite,
            "eta": p.eta, "epsilon": p.epsilon, "delta": p.delta}


def parse_drive(raw: dict, ctx: str = "drive") -> DriveParams:
    _no_unknown(raw, {"alpha_z", "alpha_x", "omega_d"}, ctx)
    return DriveParams(alpha_z=float(raw.get("alpha_z", 0.0)),
                       alpha_x=float(raw.get("alpha_x", 0.0)),
                       omega_d=float(raw.get("omega_d", 0.0)))


def drive_to_dict(d: DriveParams) -> dict:
    return {"alpha_z": d.alpha_z, "alpha_x": d.alpha_x, "omega_d": d.omega_d}


def parse_sim(raw: dict, ctx: str = "sim") -> SimParams:
    _no_unknown(raw, {"fs", "t_max"}, ctx)
    return SimParams(fs=float(raw.get("fs", 1.0e4)),
                     t_max=float(raw.get("t_max", 1.0e2)))


def sim_to_dict(s: SimParams) -> dict:
    return {"fs": s.fs, "t_max": s.t_max}


def parse_dephasing(raw: dict, ctx: str = "dephasing") -> DephasingConfig:
    _no_unknown(raw, {"c0", "window", "fixed_point_tol", "max_iter"}, ctx)
    return DephasingConfig(
        c0=float(raw.get("c0", 1.0)),
        window=raw.get("window", "gaussian_sinc"),
        fixed_point_tol=float(raw.get("fixed_point_tol", 1.0e-6)),
        max_iter=int(raw.get("max_iter", 100)))


def dephasing_to_dict(cfg: DephasingConfig) -> dict:
    return {"c0": cfg.c0, "window": cfg.window,
            "fixed_point_tol": cfg.fixed_point_tol,
            "max_iter": cfg.max_iter}


def parse_ensemble(raw: dict, ctx: str = "ensemble") -> EnsembleSpec:
    _no_unknown(raw, {"preset", "n_decades", "members", "drive", "gamma_mid",
                      "per_member_sim"}, ctx)
    if raw.get("preset") == "1f":
        spec = default_1f_ensemble(int(raw.get("n_decades", 7)))
    elif "members" in raw:
        members = tuple(parse_tls(m, f"{ctx}.members[{i}]")
                        for i, m in enumerate(raw["members"]))
        spec = EnsembleSpec(
            members=members,
            gamma_mid=raw.get("gamma_mid"),
            per_member_sim=tuple(tuple(w) for w in
                                 raw.get("per_member_sim", ())))
    else:
        raise ConfigError(f"{ctx} needs either preset='1f' or members=[...]")
    if "drive" in raw:
        spec = spec.with_drive(parse_drive(raw["drive"], f"{ctx}.drive"))
    return spec


def ensemble_to_dict(spec: EnsembleSpec) -> dict:
    out: dict[str, Any] = {
        "members": [tls_to_dict(m) for m in spec.members],
        "drive": drive_to_dict(spec.shared_drive),
    }
    if spec.gamma_mid is not None:
        out["gamma_mid"] = spec.gamma_mid
    if spec.per_member_sim:
        out["per_member_sim"] = [list(w) for w in spec.per_member_sim]
    return out


def parse_plan(raw: dict, ctx: str = "plan") -> SweepPlan:
    _no_unknown(raw, {"base", "ensemble", "alpha_z_values", "omega_d_values",
                      "alpha_x_ratio", "dephasing", "sim", "ensemble_mode"},
                ctx)
    if "ensemble" in raw:
        base = parse_ensemble(raw["ensemble"], f"{ctx}.ensemble")
    else:
        base = parse_tls(_require(raw, "base", ctx), f"{ctx}.base")
    kwargs: dict[str, Any] = {"base": base}
    if "alpha_z_values" in raw:
        kwargs["alpha_z_values"] = tuple(float(v)
                                         for v in raw["alpha_z_values"])
    if "omega_d_values" in raw:
        kwargs["omega_d_values"] = tuple(float(v)
                                         for v in raw["omega_d_values"])
    kwargs["alpha_x_ratio"] = float(raw.get("alpha_x_ratio", 0.5))
    if "dephasing" in raw:
        kwargs["dephasing"] = parse_dephasing(raw["dephasing"])
    if "sim" in raw:
        kwargs["sim"] = parse_sim(raw["sim"])
    mode = raw.get("ensemble_mode", FAITHFUL_MODE)
    if mode not in (DEFAULT_MODE, FAITHFUL_MODE):
        raise ConfigError(f"unknown ensemble_mode {mode!r}")
    kwargs["ensemble_mode"] = mode
    return SweepPlan(**kwargs)


def plan_to_dict(plan: SweepPlan) -> dict:
    out: dict[str, Any] = {
        "alpha_z_values": list(plan.alpha_z_values),
        "omega_d_values": list(plan.omega_d_values),
        "alpha_x_ratio": plan.alpha_x_ratio,
        "dephasing": dephasing_to_dict(plan.dephasing),
        "sim": sim_to_dict(plan.sim),
        "ensemble_mode": plan.ensemble_mode,
    }
    if isinstance(plan.base, EnsembleSpec):
        out["ensemble"] = ensemble_to_dict(plan.base)
    else:
        out["base"] = tls_to_dict(plan.base)
    return out


@dataclass
class RunConfig:
    """Validated batch-job description."""

    mode: str
    parameters: dict          # typed payload, keys depend on mode
    output_dir: str = "."
    format_version: int = FORMAT_VERSION
    plot: bool = True
    preset: str | None = None

    def to_dict(self) -> dict:
        par: dict[str, Any] = {}
        p = self.parameters
        for key, value in p.items():
            if isinstance(value, TlsParams):
                par[key] = tls_to_dict(value)
            elif isinstance(value, DriveParams):
                par[key] = drive_to_dict(value)
            elif isinstance(value, SimParams):
                par[key] = sim_to_dict(value)
            elif isinstance(value, DephasingConfig):
                par[key] = dephasing_to_dict(value)
            elif isinstance(value, EnsembleSpec):
                par[key] = ensemble_to_dict(value)
            elif isinstance(value, SweepPlan):
                par[key] = plan_to_dict(value)
            elif isinstance(value, tuple):
                par[key] = list(value)
            else:
                par[key] = value
        out = {"mode": self.mode, "parameters": par,
               "output_dir": self.output_dir,
               "format_version": self.format_version,
               "plot": self.plot}
        if self.preset:
            out["preset"] = self.preset
        return out


def serialize(config: RunConfig) -> str:
    """Canonical JSON (sorted keys) for hashing, manifests and round-trips."""
    return json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n"


_PARSERS = {
    "tls": parse_tls,
    "drive": parse_drive,
    "drives": None,      # handled inline
    "sim": parse_sim,
    "dephasing": parse_dephasing,
    "ensemble": parse_ensemble,
    "plan": parse_plan,
}

_MODE_FIELDS = {
    "simulate": {"tls", "drive", "sim"},
    "psd": {"tls", "drives", "sim", "include_undriven"},
    "tphi": {"tls", "drive", "sim", "dephasing"},
    "grid": {"plan"},
    "eta-scan": {"tls", "drive", "etas", "sim"},
    "epsilon-scan": {"tls", "epsilons", "plan"},
    "ensemble": {"ensemble", "ensemble_mode", "include_undriven"},
    "classical-check": {"w_total", "omega_d", "amplitudes", "n_seeds",
                        "fs", "t_max", "omega_cut", "seed0"},
}

_REQUIRED = {
    "simulate": {"tls"},
    "psd": {"tls"},
    "tphi": {"tls"},
    "grid": {"plan"},
    "eta-scan": {"tls", "drive", "etas"},
    "epsilon-scan": {"tls"},
    "ensemble": {"ensemble"},
    "classical-check": set(),
}


def parse(text: str) -> RunConfig:
    """Parse and validate a config document (or a manifest embedding one)."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    if "config" in raw and "mode" not in raw:
        raw = raw["config"]        # manifest file: rerun its embedded config
    mode = _require(raw, "mode", "config")
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODES}")
    version = int(raw.get("format_version", FORMAT_VERSION))
    if version != FORMAT_VERSION:
        raise ConfigError(f"unsupported format_version {version}")
    _no_unknown(raw, {"mode", "parameters", "output_dir", "format_version",
                      "plot", "preset"}, "config")
    raw_par = raw.get("parameters", {})
    if not isinstance(raw_par, dict):
        raise ConfigError("parameters must be a JSON object")
    allowed = _MODE_FIELDS[mode]
    _no_unknown(raw_par, allowed, f"parameters (mode={mode})")
    missing = _REQUIRED[mode] - set(raw_par)
    if missing:
        raise ConfigError(
            f"mode {mode!r} requires parameter(s) {sorted(missing)}")

    par: dict[str, Any] = {}
    for key, value in raw_par.items():
        if key == "drives":
            par[key] = tuple(parse_drive(d, f"drives[{i}]")
                             for i, d in enumerate(value))
        elif key in _PARSERS and _PARSERS[key] is not None:
            par[key] = _PARSERS[key](value)
        elif key in ("etas", "epsilons", "amplitudes"):
            par[key] = tuple(float(v) for v in value)
        elif key in ("n_seeds", "seed0"):
            par[key] = int(value)
        elif key in ("w_total", "omega_d", "fs", "t_max", "omega_cut"):
            par[key] = float(value)
        elif key == "include_undriven":
            par[key] = bool(value)
        elif key == "ensemble_mode":
            if value not in (DEFAULT_MODE, FAITHFUL_MODE):
                raise ConfigError(f"unknown ensemble_mode {value!r}")
            par[key] = value
        else:
            par[key] = value
    return RunConfig(mode=mode, parameters=par,
                     output_dir=raw.get("output_dir", "."),
                     format_version=version,
                     plot=bool(raw.get("plot", True)),
                     preset=raw.get("preset"))

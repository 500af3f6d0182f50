"""Run configuration: YAML schema parsing and validation.

A run file is a YAML mapping with a ``schema_version`` key and the
sections below.  Exactly one of ``hejd`` (explicit parameters) or
``target`` (model to be fitted, with a ``fit`` section) must be present
for pricing; ``fit``-only runs need ``target``.

Units are fixed once: rates and intensities are per year, ``strike`` and
``barrier`` are in currency, spots are given as percentages of
``contract.reference_spot``.

Parse errors name the offending key.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
import yaml

from .fitting import FitConfig
from .inversion import InversionConfig
from .mc import SimConfig
from .models import (
    HEJDParams,
    HyperExpModel,
    KoBoLModel,
    KouModel,
    MeixnerModel,
    NIGModel,
    TargetModel,
    vg_model,
)
from .transforms import ContractKind, ContractSpec

__all__ = ["SCHEMA_VERSION", "ConfigError", "RunConfig", "load_run_config",
           "parse_run_config", "hejd_params_to_mapping"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated run file."""

    hejd: Optional[HEJDParams]
    target: Optional[TargetModel]
    fit: Optional[FitConfig]
    contract: Optional[ContractSpec]
    spots: tuple[float, ...]
    spot_pcts: tuple[float, ...]
    reference_spot: Optional[float]
    inversion: InversionConfig
    mc: Optional[SimConfig]
    output_path: Optional[str]

    def pricing_model(self):
        if self.hejd is not None:
            return self.hejd
        raise ConfigError("pricing needs explicit [hejd] parameters or a prior fit")


def _require(section: dict, key: str, context: str):
    if key not in section:
        raise ConfigError(f"missing key '{context}.{key}'")
    return section[key]


def _number(section: dict, key: str, context: str, default=None):
    if key not in section:
        if default is not None:
            return default
        raise ConfigError(f"missing key '{context}.{key}'")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{context}.{key}' must be a number, got {value!r}")
    return float(value)


def _int(section: dict, key: str, context: str, default=None):
    if key not in section:
        if default is not None:
            return default
        raise ConfigError(f"missing key '{context}.{key}'")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"key '{context}.{key}' must be an integer, got {value!r}")
    return value


def _floats(section: dict, key: str, context: str):
    value = _require(section, key, context)
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"key '{context}.{key}' must be a non-empty list")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"key '{context}.{key}[{i}]' must be a number, got {v!r}")
        out.append(float(v))
    return tuple(out)


def _parse_hejd(section: dict) -> HEJDParams:
    try:
        return HEJDParams(
            mu=_number(section, "mu", "hejd"),
            sigma2=_number(section, "sigma2", "hejd"),
            lambda_plus=_number(section, "lambda_plus", "hejd"),
            lambda_minus=_number(section, "lambda_minus", "hejd"),
            p_plus=_floats(section, "p_plus", "hejd"),
            alpha_plus=_floats(section, "alpha_plus", "hejd"),
            p_minus=_floats(section, "p_minus", "hejd"),
            alpha_minus=_floats(section, "alpha_minus", "hejd"),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid 'hejd' section: {exc}") from exc


def _parse_target(section: dict) -> TargetModel:
    kind = str(_require(section, "kind", "target")).lower()
    sigma2 = _number(section, "sigma2", "target", default=0.0)
    drift = section.get("drift")
    if drift is not None:
        drift = float(drift)
    try:
        if kind == "kou":
            return KouModel(
                lambda_plus=_number(section, "lambda_plus", "target"),
                alpha_plus=_number(section, "alpha_plus", "target"),
                lambda_minus=_number(section, "lambda_minus", "target"),
                alpha_minus=_number(section, "alpha_minus", "target"),
                sigma2=sigma2, drift=drift,
            )
        if kind == "hyperexp":
            return HyperExpModel(
                lambda_plus=_number(section, "lambda_plus", "target"),
                p_plus=_floats(section, "p_plus", "target"),
                alpha_plus=_floats(section, "alpha_plus", "target"),
                lambda_minus=_number(section, "lambda_minus", "target"),
                p_minus=_floats(section, "p_minus", "target"),
                alpha_minus=_floats(section, "alpha_minus", "target"),
                sigma2=sigma2, drift=drift,
            )
        if kind == "kobol":
            return KoBoLModel(c=_number(section, "c", "target"),
                              m=_number(section, "m", "target"),
                              g=_number(section, "g", "target"),
                              y=_number(section, "y", "target"),
                              sigma2=sigma2, drift=drift)
        if kind == "vg":
            return vg_model(c=_number(section, "c", "target"),
                            g=_number(section, "g", "target"),
                            m=_number(section, "m", "target"),
                            sigma2=sigma2, drift=drift)
        if kind == "nig":
            return NIGModel(alpha=_number(section, "alpha", "target"),
                            beta=_number(section, "beta", "target"),
                            delta=_number(section, "delta", "target"),
                            c=_number(section, "c", "target", default=1.0),
                            sigma2=sigma2, drift=drift)
        if kind == "meixner":
            return MeixnerModel(delta=_number(section, "delta", "target"),
                                alpha=_number(section, "alpha", "target"),
                                beta=_number(section, "beta", "target"),
                                sigma2=sigma2, drift=drift)
    except ValueError as exc:
        raise ConfigError(f"invalid 'target' section: {exc}") from exc
    raise ConfigError(f"unknown 'target.kind' {kind!r}")


def _parse_fit(section: dict) -> FitConfig:
    gp = _floats(section, "alpha_plus_grid", "fit")
    gm = _floats(section, "alpha_minus_grid", "fit")
    weighting = str(section.get("weighting", "relative"))
    weights = tuple(section["weights"]) if "weights" in section else None
    try:
        if "x_grid" in section:
            return FitConfig(alpha_plus_grid=gp, alpha_minus_grid=gm,
                             x_grid=_floats(section, "x_grid", "fit"),
                             weighting=weighting, weights=weights)
        cfg = FitConfig.default(
            gp, gm,
            x_min=_number(section, "x_min", "fit", default=0.005),
            x_max=_number(section, "x_max", "fit", default=1.0),
            points_per_side=_int(section, "points_per_side", "fit", default=200),
        )
        if weighting != "relative" or weights is not None:
            cfg = FitConfig(alpha_plus_grid=gp, alpha_minus_grid=gm,
                            x_grid=cfg.x_grid, weighting=weighting, weights=weights)
        return cfg
    except ValueError as exc:
        raise ConfigError(f"invalid 'fit' section: {exc}") from exc


def _parse_contract(section: dict):
    kind_raw = str(_require(section, "kind", "contract")).lower()
    try:
        kind = ContractKind(kind_raw)
    except ValueError:
        raise ConfigError(f"unknown 'contract.kind' {kind_raw!r}") from None
    reference = _number(section, "reference_spot", "contract")
    pcts = _floats(section, "spot_pct", "contract")
    spots = tuple(p / 100.0 * reference for p in pcts)
    strike = section.get("strike")
    if strike is not None:
        strike = float(strike)
    try:
        contract = ContractSpec(
            kind=kind,
            s0=spots[0],
            barrier=_number(section, "barrier", "contract"),
            maturity=_number(section, "maturity", "contract"),
            rate=_number(section, "rate", "contract"),
            dividend=_number(section, "dividend", "contract", default=0.0),
            strike=strike,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid 'contract' section: {exc}") from exc
    return contract, spots, tuple(pcts), reference


def parse_run_config(raw: Any) -> RunConfig:
    """Validate a loaded YAML document into a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("run config must be a mapping")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"key 'schema_version' must be {SCHEMA_VERSION}, got {version!r}"
        )
    known = {"schema_version", "hejd", "target", "fit", "contract", "inversion",
             "mc", "output"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown top-level key {key!r}")

    hejd = _parse_hejd(raw["hejd"]) if "hejd" in raw else None
    target = _parse_target(raw["target"]) if "target" in raw else None
    fit = _parse_fit(raw["fit"]) if "fit" in raw else None
    if hejd is not None and target is not None:
        raise ConfigError("supply exactly one of 'hejd' or 'target', not both")
    if fit is not None and target is None:
        raise ConfigError("'fit' section needs a 'target' section")

    contract = spots = pcts = reference = None
    if "contract" in raw:
        contract, spots, pcts, reference = _parse_contract(raw["contract"])

    inv_raw = raw.get("inversion", {})
    if not isinstance(inv_raw, dict):
        raise ConfigError("'inversion' must be a mapping")
    try:
        inversion = InversionConfig(
            m=_int(inv_raw, "m", "inversion", default=15),
            n=_int(inv_raw, "n", "inversion", default=11),
            a=_number(inv_raw, "a", "inversion", default=18.4),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid 'inversion' section: {exc}") from exc

    mc = None
    if "mc" in raw:
        mc_raw = raw["mc"]
        if not isinstance(mc_raw, dict):
            raise ConfigError("'mc' must be a mapping")
        try:
            mc = SimConfig(
                n_paths=_int(mc_raw, "n_paths", "mc"),
                n_steps_per_year=_int(mc_raw, "n_steps_per_year", "mc"),
                seed=_int(mc_raw, "seed", "mc", default=0),
                antithetic=bool(mc_raw.get("antithetic", False)),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid 'mc' section: {exc}") from exc

    output = raw.get("output", {})
    if output and not isinstance(output, dict):
        raise ConfigError("'output' must be a mapping")
    output_path = output.get("path") if isinstance(output, dict) else None

    return RunConfig(
        hejd=hejd, target=target, fit=fit,
        contract=contract,
        spots=spots or (),
        spot_pcts=pcts or (),
        reference_spot=reference,
        inversion=inversion, mc=mc,
        output_path=output_path,
    )


def load_run_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError(f"not valid YAML: {exc}") from exc
    return parse_run_config(raw)


def hejd_params_to_mapping(params: HEJDParams) -> dict:
    """Full-precision mapping for re-ingestable parameter files."""
    return {
        "mu": float(params.mu),
        "sigma2": float(params.sigma2),
        "lambda_plus": float(params.lambda_plus),
        "p_plus": [float(v) for v in params.p_plus],
        "alpha_plus": [float(v) for v in params.alpha_plus],
        "lambda_minus": float(params.lambda_minus),
        "p_minus": [float(v) for v in params.p_minus],
        "alpha_minus": [float(v) for v in params.alpha_minus],
    }

"""Command-line front end.

Subcommands:

* ``fit``               -- approximate the target model, write a parameter
                           file that can be fed back as explicit ``hejd``
                           parameters.
* ``price``             -- value the contract over the spot grid (prices only).
* ``greeks``            -- prices plus delta, gamma, theta.
* ``mc-check``          -- transform prices against Monte Carlo estimates
                           with a pass/fail per row (3 standard errors).
* ``reproduce-tables``  -- run the built-in published-table configurations.

All machine output is CSV with a ``# schema_version=1`` first line and
full-precision floats; parameter files are YAML with the same schema as
the run config.  Exit codes: 0 success (individual rows may carry an
error column), 1 config error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import yaml

from . import presets
from .config import (
    SCHEMA_VERSION,
    ConfigError,
    RunConfig,
    hejd_params_to_mapping,
    load_run_config,
)
from .fitting import FitConfig, FitError, fit_model
from .greeks import GreekKind
from .inversion import InversionConfig, InversionError, ValuationRow, value_contract, value_grid
from .mc import SimConfig, mc_value_grid
from .models import HEJDParams
from .transforms import ContractKind, ContractSpec
from .wiener_hopf import RootCache

_ALL_GREEKS = (GreekKind.DELTA, GreekKind.GAMMA, GreekKind.THETA)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]):
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _resolve_params(cfg: RunConfig) -> HEJDParams:
    if cfg.hejd is not None:
        return cfg.hejd
    if cfg.target is None:
        raise ConfigError("config needs 'hejd' parameters or a 'target' model")
    if cfg.fit is None:
        raise ConfigError("fitting a 'target' model needs a 'fit' section")
    if cfg.contract is None:
        raise ConfigError("pricing needs a 'contract' section (for rate/dividend)")
    return fit_model(cfg.target, cfg.fit, cfg.contract.rate, cfg.contract.dividend)


def _grid_rows(cfg: RunConfig, params: HEJDParams, greeks, threads: int) -> list[ValuationRow]:
    if cfg.contract is None:
        raise ConfigError("config needs a 'contract' section")
    cache = RootCache()
    if threads <= 1 or len(cfg.spots) <= 1:
        return value_grid(cfg.contract, cfg.spots, params, cfg.inversion, greeks, cache)

    # warm the factorisation cache once, then fan rows out to threads
    rows: dict[int, ValuationRow] = {}
    first, *rest = range(len(cfg.spots))

    def run(i: int) -> ValuationRow:
        try:
            return value_contract(replace(cfg.contract, s0=cfg.spots[i]), params,
                                  cfg.inversion, greeks, cache)
        except (ValueError, ArithmeticError) as exc:
            return ValuationRow(spot=cfg.spots[i], error=str(exc))

    rows[first] = run(first)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for i, row in zip(rest, pool.map(run, rest)):
            rows[i] = row
    return [rows[i] for i in sorted(rows)]


def _valuation_csv(cfg: RunConfig, rows: list[ValuationRow], with_greeks: bool,
                   out_path: str):
    header = ["spot_pct", "spot", "price"]
    if with_greeks:
        header += ["delta", "gamma", "theta"]
    header += ["near_barrier", "error"]
    table = []
    for pct, row in zip(cfg.spot_pcts, rows):
        rec = [pct, row.spot, row.price]
        if with_greeks:
            rec += [row.delta, row.gamma, row.theta]
        rec += [row.near_barrier, row.error]
        table.append(rec)
    _write_csv(out_path, header, table)


def cmd_fit(cfg: RunConfig, out_path: str) -> int:
    if cfg.target is None or cfg.fit is None:
        raise ConfigError("'fit' command needs 'target' and 'fit' sections")
    rate = cfg.contract.rate if cfg.contract is not None else 0.0
    dividend = cfg.contract.dividend if cfg.contract is not None else 0.0
    params, report = fit_model(cfg.target, cfg.fit, rate, dividend, with_report=True)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "hejd": hejd_params_to_mapping(params),
        "fit_report": {
            "lambda_plus": report.lambda_plus,
            "lambda_minus": report.lambda_minus,
            "rmse": report.rmse,
            "tail_mass_error": report.tail_mass_error,
        },
    }
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(yaml.safe_dump(doc, sort_keys=False), encoding="utf-8")
    print(f"fit: lambda+={report.lambda_plus:.6g} lambda-={report.lambda_minus:.6g} "
          f"rmse={report.rmse:.6g} tail_mass_error={report.tail_mass_error:.6g} -> {out}")
    return 0


def cmd_price(cfg: RunConfig, out_path: str, threads: int, with_greeks: bool) -> int:
    params = _resolve_params(cfg)
    greeks = _ALL_GREEKS if with_greeks else ()
    rows = _grid_rows(cfg, params, greeks, threads)
    _valuation_csv(cfg, rows, with_greeks, out_path)
    flagged = sum(1 for r in rows if r.error)
    print(f"{'greeks' if with_greeks else 'price'}: {len(rows)} rows "
          f"({flagged} flagged) -> {out_path}")
    return 0


def cmd_mc_check(cfg: RunConfig, out_path: str, threads: int,
                 seed: Optional[int]) -> int:
    params = _resolve_params(cfg)
    if cfg.mc is None:
        raise ConfigError("'mc-check' needs an 'mc' section")
    if cfg.contract is None:
        raise ConfigError("'mc-check' needs a 'contract' section")
    sim = cfg.mc if seed is None else replace(cfg.mc, seed=seed)
    rows = _grid_rows(cfg, params, (), threads)
    estimates = mc_value_grid(cfg.contract, cfg.spots, params, sim)
    table = []
    n_pass = 0
    for pct, row, est in zip(cfg.spot_pcts, rows, estimates):
        if row.error or row.price is None:
            table.append([pct, row.spot, None, est.mean, est.std_error,
                          est.ci95_low, est.ci95_high, None, row.error])
            continue
        ok = abs(row.price - est.mean) <= 3.0 * est.std_error
        n_pass += ok
        table.append([pct, row.spot, row.price, est.mean, est.std_error,
                      est.ci95_low, est.ci95_high, ok, None])
    _write_csv(out_path, ["spot_pct", "spot", "transform_price", "mc_mean",
                          "mc_std_error", "ci95_low", "ci95_high", "pass", "error"],
               table)
    print(f"mc-check: {n_pass}/{len(table)} rows within 3 standard errors -> {out_path}")
    return 0


def _table_config(kind: ContractKind, params: HEJDParams, strike: Optional[float],
                  pcts: Sequence[float]) -> RunConfig:
    reference = presets.REFERENCE_SPOT
    spots = tuple(p / 100.0 * reference for p in pcts)
    contract = ContractSpec(kind=kind, s0=spots[0], barrier=0.6 * reference,
                            maturity=1.0, rate=0.03, dividend=0.0, strike=strike)
    return RunConfig(hejd=params, target=None, fit=None, contract=contract,
                     spots=spots, spot_pcts=tuple(float(p) for p in pcts),
                     reference_spot=reference, inversion=InversionConfig(),
                     mc=None, output_path=None)


def cmd_reproduce_tables(out_dir: str, threads: int) -> int:
    """Published-table sweeps.

    Emits two variants per table: one from the published fitted
    parameter sets taken verbatim, and one from a fresh fit of the
    published target models on the same exponent grids (suffix
    ``_refit``).  The README documents why the two differ.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    refits = {
        "nig": fit_model(presets.NIG_TARGET,
                         FitConfig.default(presets.NIG_FIT.alpha_plus,
                                           presets.NIG_FIT.alpha_minus),
                         r=0.03),
        "vg": fit_model(presets.VG_TARGET,
                        FitConfig.default(presets.VG_FIT.alpha_plus,
                                          presets.VG_FIT.alpha_minus),
                        r=0.03),
    }
    for name, kind, strike, pcts, published, refit in (
        ("table2_nig_dop", ContractKind.DOP, 3500.0, range(64, 124, 2),
         presets.NIG_FIT, refits["nig"]),
        ("table3_vg_adid", ContractKind.ADID, None, range(64, 128, 2),
         presets.VG_FIT, refits["vg"]),
    ):
        for suffix, params in (("", published), ("_refit", refit)):
            cfg = _table_config(kind, params, strike, pcts)
            rows = _grid_rows(cfg, params, _ALL_GREEKS, threads)
            _valuation_csv(cfg, rows, True, str(out / f"{name}{suffix}.csv"))
    print(f"reproduce-tables: wrote table2/table3 (published and _refit) under {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hejdbarrier",
        description="Barrier option prices and greeks under hyper-exponential "
                    "jump-diffusions via Laplace transforms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("fit", "price", "greeks", "mc-check"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run config (YAML)")
        p.add_argument("--out", required=True, help="output path")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=None,
                       help="override the mc section seed")
    p = sub.add_parser("reproduce-tables")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce-tables":
            return cmd_reproduce_tables(args.out, args.threads)
        cfg = load_run_config(args.config)
        out_path = args.out or cfg.output_path
        if args.command == "fit":
            return cmd_fit(cfg, out_path)
        if args.command == "price":
            return cmd_price(cfg, out_path, args.threads, with_greeks=False)
        if args.command == "greeks":
            return cmd_price(cfg, out_path, args.threads, with_greeks=True)
        if args.command == "mc-check":
            return cmd_mc_check(cfg, out_path, args.threads, args.seed)
        raise AssertionError(args.command)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (FitError, InversionError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Monte Carlo cross-check: path simulation and barrier estimators.

Simulators draw log-price paths on a uniform step grid:

* HEJD -- exact per-step sampling: Gaussian increment plus compound
  Poisson jumps from the exponential mixtures.  Jump epochs are drawn
  once per path over the horizon and binned to steps, which is
  distributionally identical to per-step Poisson counts and much
  cheaper.
* VG / NIG -- random time change of a Brownian motion by a gamma /
  inverse Gaussian subordinator, sampled exactly per step
  (``Generator.gamma`` and ``Generator.wald``).

The barrier is monitored at grid points only (no bridge correction), so
knock detection is biased low; the bias shrinks with the step count and
is part of the documented comparison baseline.

Randomness comes from the counter-based Philox generator keyed by
``(seed, block index)`` over fixed-size path blocks, so results are
reproducible and independent of any scheduling.

Paths are delivered to a ``sink(paths, dt)`` callback block by block
(``paths[i, 0] == 0``); :func:`collect_path_stats` is the standard sink,
reducing each path to its terminal value, extremes and first-passage
steps for a set of barrier levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .models import HEJDParams, KoBoLModel, NIGModel, TargetModel
from .transforms import ContractKind, ContractSpec

__all__ = [
    "SimConfig",
    "MCEstimate",
    "PathStats",
    "simulate_hejd",
    "simulate_vg",
    "simulate_nig",
    "collect_path_stats",
    "vg_martingale_drift",
    "nig_martingale_drift",
    "model_drift",
    "mc_value",
    "mc_value_grid",
    "mc_european_put",
    "mc_greek_fd",
]

_BLOCK_ELEMS = 4_000_000  # paths-by-steps elements per simulation block


@dataclass(frozen=True)
class SimConfig:
    """Simulation budget and seeding."""

    n_paths: int = 100_000
    n_steps_per_year: int = 5_000
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.n_steps_per_year < 1:
            raise ValueError("n_steps_per_year must be >= 1")


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with a 95% normal confidence interval."""

    mean: float
    std_error: float
    ci95_low: float
    ci95_high: float
    n_effective: int

    @staticmethod
    def from_samples(samples: np.ndarray) -> "MCEstimate":
        n = len(samples)
        mean = float(np.mean(samples))
        se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return MCEstimate(mean, se, mean - 1.96 * se, mean + 1.96 * se, n)


@dataclass
class PathStats:
    """Per-path reductions of one simulation run.

    ``first_passage_down[h]`` / ``first_passage_up[h]`` hold the grid
    index at which the path first reached the level (0 means at
    inception, i.e. the level was already breached), or -1 when it never
    did within the horizon.
    """

    terminal: np.ndarray
    minimum: np.ndarray
    maximum: np.ndarray
    first_passage_down: dict[float, np.ndarray]
    first_passage_up: dict[float, np.ndarray]
    n_steps: int
    dt: float


def _n_steps(t: float, config: SimConfig, override: Optional[int] = None) -> int:
    if override is not None:
        return max(1, int(override))
    return max(1, int(round(config.n_steps_per_year * t)))


def _block_sizes(n_paths: int, n_steps: int):
    block = max(128, min(n_paths, _BLOCK_ELEMS // (n_steps + 1)))
    start = 0
    while start < n_paths:
        yield min(block, n_paths - start)
        start += block


def _rng(config: SimConfig, block_index: int) -> np.random.Generator:
    key = np.array([config.seed & 0xFFFFFFFFFFFFFFFF, block_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


Sink = Callable[[np.ndarray, float], None]


def _emit(increments: np.ndarray, dt: float, sink: Sink):
    nb, n_steps = increments.shape
    paths = np.empty((nb, n_steps + 1))
    paths[:, 0] = 0.0
    np.cumsum(increments, axis=1, out=paths[:, 1:])
    sink(paths, dt)


def _mixture_jump_sum(rng, lam, p, alpha, t, nb, n_steps):
    """Per-(path, step) sums of one compound Poisson jump stream."""
    out = np.zeros(nb * n_steps)
    if lam <= 0.0 or not p:
        return out.reshape(nb, n_steps)
    counts = rng.poisson(lam * t, nb)
    total = int(counts.sum())
    if total:
        owner = np.repeat(np.arange(nb), counts)
        step = rng.integers(0, n_steps, total)
        comp = rng.choice(len(p), size=total, p=np.asarray(p))
        sizes = rng.standard_exponential(total) / np.asarray(alpha)[comp]
        np.add.at(out, owner * n_steps + step, sizes)
    return out.reshape(nb, n_steps)


def simulate_hejd(params: HEJDParams, t: float, config: SimConfig, sink: Sink,
                  n_steps: Optional[int] = None):
    """Stream HEJD log-price paths on the step grid into ``sink``."""
    n_steps = _n_steps(t, config, n_steps)
    dt = t / n_steps
    sig = math.sqrt(params.sigma2 * dt)
    for bi, nb in enumerate(_block_sizes(config.n_paths, n_steps)):
        rng = _rng(config, bi)
        if config.antithetic:
            half = (nb + 1) // 2
            z = rng.standard_normal((half, n_steps))
            z = np.concatenate([z, -z])[:nb]
        else:
            z = rng.standard_normal((nb, n_steps))
        inc = params.mu * dt + sig * z
        inc += _mixture_jump_sum(rng, params.lambda_plus, params.p_plus,
                                 params.alpha_plus, t, nb, n_steps)
        inc -= _mixture_jump_sum(rng, params.lambda_minus, params.p_minus,
                                 params.alpha_minus, t, nb, n_steps)
        _emit(inc, dt, sink)


def simulate_vg(c: float, g: float, m: float, drift: float, t: float,
                config: SimConfig, sink: Sink, sigma2: float = 0.0,
                n_steps: Optional[int] = None):
    """Stream variance gamma (plus optional Gaussian part) paths."""
    n_steps = _n_steps(t, config, n_steps)
    dt = t / n_steps
    nu = 1.0 / c
    theta = c * (g - m) / (g * m)
    svg = math.sqrt(2.0 * c / (g * m))
    sig = math.sqrt(sigma2 * dt)
    for bi, nb in enumerate(_block_sizes(config.n_paths, n_steps)):
        rng = _rng(config, bi)
        clock = rng.gamma(dt / nu, nu, (nb, n_steps))
        z = rng.standard_normal((nb, n_steps))
        inc = drift * dt + theta * clock + svg * np.sqrt(clock) * z
        if sigma2 > 0.0:
            inc += sig * rng.standard_normal((nb, n_steps))
        _emit(inc, dt, sink)


def simulate_nig(alpha: float, beta: float, delta: float, drift: float, t: float,
                 config: SimConfig, sink: Sink, sigma2: float = 0.0, c: float = 1.0,
                 n_steps: Optional[int] = None):
    """Stream normal inverse Gaussian (plus optional Gaussian part) paths.

    The overall intensity scale ``c`` multiplies the jump measure, which
    for NIG is the same as scaling ``delta``.
    """
    n_steps = _n_steps(t, config, n_steps)
    dt = t / n_steps
    dd = delta * c
    gam = math.sqrt(alpha * alpha - beta * beta)
    sig = math.sqrt(sigma2 * dt)
    for bi, nb in enumerate(_block_sizes(config.n_paths, n_steps)):
        rng = _rng(config, bi)
        clock = rng.wald(dd * dt / gam, (dd * dt) ** 2, (nb, n_steps))
        z = rng.standard_normal((nb, n_steps))
        inc = drift * dt + beta * clock + np.sqrt(clock) * z
        if sigma2 > 0.0:
            inc += sig * rng.standard_normal((nb, n_steps))
        _emit(inc, dt, sink)


# ---------------------------------------------------------------------------
# Martingale drifts of the simulated models
# ---------------------------------------------------------------------------

def vg_martingale_drift(c: float, g: float, m: float, r: float, d: float = 0.0,
                        sigma2: float = 0.0) -> float:
    if m <= 1.0:
        raise ValueError("VG martingale drift needs m > 1")
    return r - d - 0.5 * sigma2 - c * math.log(g * m / ((g + 1.0) * (m - 1.0)))


def nig_martingale_drift(alpha: float, beta: float, delta: float, r: float,
                         d: float = 0.0, sigma2: float = 0.0, c: float = 1.0) -> float:
    if alpha <= abs(beta + 1.0):
        raise ValueError("NIG martingale drift needs alpha > |beta + 1|")
    gam = math.sqrt(alpha * alpha - beta * beta)
    return r - d - 0.5 * sigma2 - c * delta * (gam - math.sqrt(alpha * alpha - (beta + 1.0) ** 2))


Model = Union[HEJDParams, TargetModel]


def model_drift(model: Model, r: float, d: float) -> float:
    """Drift used in simulation: explicit when given, else martingale."""
    if isinstance(model, HEJDParams):
        return model.mu
    if model.drift is not None:
        return model.drift
    if isinstance(model, KoBoLModel):
        if model.y != 0.0:
            raise ValueError("only the y == 0 (variance gamma) case is simulated")
        return vg_martingale_drift(model.c, model.g, model.m, r, d, model.sigma2)
    if isinstance(model, NIGModel):
        return nig_martingale_drift(model.alpha, model.beta, model.delta, r, d,
                                    model.sigma2, model.c)
    raise TypeError(f"no simulator for {type(model).__name__}")


def _simulate(model: Model, drift: float, t: float, config: SimConfig, sink: Sink,
              n_steps: Optional[int] = None):
    if isinstance(model, HEJDParams):
        simulate_hejd(model, t, config, sink, n_steps)
    elif isinstance(model, KoBoLModel):
        simulate_vg(model.c, model.g, model.m, drift, t, config, sink, model.sigma2,
                    n_steps)
    elif isinstance(model, NIGModel):
        simulate_nig(model.alpha, model.beta, model.delta, drift, t, config, sink,
                     model.sigma2, model.c, n_steps)
    else:
        raise TypeError(f"no simulator for {type(model).__name__}")


class _StatsSink:
    def __init__(self, down: Sequence[float], up: Sequence[float]):
        self.down = tuple(down)
        self.up = tuple(up)
        self._terminal = []
        self._minimum = []
        self._maximum = []
        self._fp_down = {h: [] for h in self.down}
        self._fp_up = {h: [] for h in self.up}

    def __call__(self, paths: np.ndarray, dt: float):
        self._terminal.append(paths[:, -1].copy())
        self._minimum.append(paths.min(axis=1))
        self._maximum.append(paths.max(axis=1))
        for h, acc in self._fp_down.items():
            acc.append(_first_passage(paths, h, down=True))
        for h, acc in self._fp_up.items():
            acc.append(_first_passage(paths, h, down=False))

    def finish(self, n_steps: int, dt: float) -> PathStats:
        return PathStats(
            terminal=np.concatenate(self._terminal),
            minimum=np.concatenate(self._minimum),
            maximum=np.concatenate(self._maximum),
            first_passage_down={h: np.concatenate(a) for h, a in self._fp_down.items()},
            first_passage_up={h: np.concatenate(a) for h, a in self._fp_up.items()},
            n_steps=n_steps,
            dt=dt,
        )


def _first_passage(paths: np.ndarray, level: float, down: bool) -> np.ndarray:
    hit = paths <= level if down else paths >= level
    idx = np.argmax(hit, axis=1)
    ever = hit[np.arange(len(paths)), idx]
    return np.where(ever, idx, -1).astype(np.int64)


def collect_path_stats(model: Model, t: float, r: float, d: float, config: SimConfig,
                       down_levels: Sequence[float] = (),
                       up_levels: Sequence[float] = (),
                       n_steps: Optional[int] = None) -> PathStats:
    """Simulate once and reduce every path to the quantities estimators use."""
    drift = model_drift(model, r, d)
    sink = _StatsSink(down_levels, up_levels)
    n_steps = _n_steps(t, config, n_steps)
    _simulate(model, drift, t, config, sink, n_steps)
    return sink.finish(n_steps, t / n_steps)


# ---------------------------------------------------------------------------
# Contract estimators
# ---------------------------------------------------------------------------

def _payoffs(contract: ContractSpec, stats: PathStats, s0: Optional[float] = None) -> np.ndarray:
    """Discounted payoff per path; ``s0`` overrides the contract spot
    (common-random-numbers bumping)."""
    s0 = contract.s0 if s0 is None else s0
    r, t = contract.rate, contract.maturity
    h = math.log(contract.barrier / s0)
    kind = contract.kind
    disc = math.exp(-r * t)
    if kind in (ContractKind.EDID, ContractKind.EDOD, ContractKind.DOP, ContractKind.DIP):
        knocked = stats.minimum <= h
        if kind == ContractKind.EDID:
            return disc * knocked.astype(float)
        if kind == ContractKind.EDOD:
            return disc * (~knocked).astype(float)
        put = np.maximum(contract.strike - s0 * np.exp(stats.terminal), 0.0)
        if kind == ContractKind.DOP:
            return disc * put * ~knocked
        return disc * put * knocked
    if kind == ContractKind.ADID:
        fp = _lookup_fp(stats.first_passage_down, h)
        return np.where(fp >= 0, np.exp(-r * fp * stats.dt), 0.0)
    if kind == ContractKind.EUID:
        return disc * (stats.maximum >= h).astype(float)
    if kind == ContractKind.AUID:
        fp = _lookup_fp(stats.first_passage_up, h)
        return np.where(fp >= 0, np.exp(-r * fp * stats.dt), 0.0)
    raise ValueError(f"no estimator for {kind.value}")


def _lookup_fp(table: dict[float, np.ndarray], h: float) -> np.ndarray:
    for level, fp in table.items():
        if abs(level - h) <= 1e-12 * max(1.0, abs(h)):
            return fp
    raise KeyError(f"no first-passage record for level {h}; simulate with it in the level set")


def _levels_for(contract: ContractSpec, spots: Iterable[float]):
    down, up = set(), set()
    for s0 in spots:
        h = math.log(contract.barrier / s0)
        if contract.kind in (ContractKind.EUID, ContractKind.AUID):
            up.add(h)
        else:
            down.add(h)
    return sorted(down), sorted(up)


def mc_value(contract: ContractSpec, model: Model, config: SimConfig) -> MCEstimate:
    """Discounted-payoff estimate with barrier monitoring on the step grid."""
    down, up = _levels_for(contract, [contract.s0])
    stats = collect_path_stats(model, contract.maturity, contract.rate,
                               contract.dividend, config, down, up)
    return MCEstimate.from_samples(_payoffs(contract, stats))


def mc_value_grid(contract: ContractSpec, spots: Sequence[float], model: Model,
                  config: SimConfig) -> list[MCEstimate]:
    """Estimates at several spots from a single shared simulation."""
    down, up = _levels_for(contract, spots)
    stats = collect_path_stats(model, contract.maturity, contract.rate,
                               contract.dividend, config, down, up)
    return [MCEstimate.from_samples(_payoffs(replace(contract, s0=s), stats)) for s in spots]


def mc_european_put(s0: float, strike: float, maturity: float, rate: float,
                    dividend: float, model: Model, config: SimConfig) -> MCEstimate:
    """Plain European put estimate (no barrier monitoring needed)."""
    stats = collect_path_stats(model, maturity, rate, dividend, config)
    payoff = math.exp(-rate * maturity) * np.maximum(strike - s0 * np.exp(stats.terminal), 0.0)
    return MCEstimate.from_samples(payoff)


def mc_greek_fd(contract: ContractSpec, model: Model, config: SimConfig,
                kind, bump: float = 0.01) -> MCEstimate:
    """Finite-difference greek with common random numbers.

    Delta and gamma revalue the same paths at bumped spots; theta couples
    two simulations through the same seed and step count.  ``bump`` is
    relative (spot for delta/gamma, maturity for theta).
    """
    from .greeks import GreekKind

    kind = GreekKind(kind)
    if bump <= 0.0:
        raise ValueError("bump must be positive")
    if kind in (GreekKind.DELTA, GreekKind.GAMMA):
        s_up, s_dn = contract.s0 * (1.0 + bump), contract.s0 * (1.0 - bump)
        is_up_contract = contract.kind in (ContractKind.EUID, ContractKind.AUID)
        if not is_up_contract and s_dn <= contract.barrier:
            raise ValueError(
                f"spot bump {bump} crosses the barrier (S0*(1-bump) = {s_dn} <= H = "
                f"{contract.barrier}); use a smaller bump"
            )
        if is_up_contract and s_up >= contract.barrier:
            raise ValueError(
                f"spot bump {bump} crosses the barrier (S0*(1+bump) >= H); use a smaller bump"
            )
        spots = [s_up, s_dn] if kind == GreekKind.DELTA else [s_up, contract.s0, s_dn]
        down, up = _levels_for(contract, spots)
        stats = collect_path_stats(model, contract.maturity, contract.rate,
                                   contract.dividend, config, down, up)
        f_up = _payoffs(contract, stats, s_up)
        f_dn = _payoffs(contract, stats, s_dn)
        if kind == GreekKind.DELTA:
            samples = (f_up - f_dn) / (2.0 * bump * contract.s0)
        else:
            f_0 = _payoffs(contract, stats, contract.s0)
            samples = (f_up - 2.0 * f_0 + f_dn) / (bump * contract.s0) ** 2
        return MCEstimate.from_samples(samples)

    # theta: bump the maturity, keep the step count of the base contract so
    # the two runs consume the same random stream (tight CRN coupling)
    base_steps = _n_steps(contract.maturity, config)
    samples = []
    for sign in (+1.0, -1.0):
        t_b = contract.maturity * (1.0 + sign * bump)
        c_b_ = replace(contract, maturity=t_b)
        down, up = _levels_for(c_b_, [contract.s0])
        stats = collect_path_stats(model, t_b, contract.rate, contract.dividend,
                                   config, down, up, n_steps=base_steps)
        samples.append(_payoffs(c_b_, stats))
    diff = (samples[0] - samples[1]) / (2.0 * bump * contract.maturity)
    return MCEstimate.from_samples(diff)

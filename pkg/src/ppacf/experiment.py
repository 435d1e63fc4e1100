"""Monte-Carlo power and accuracy studies over simulated series."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import substream
from .acf import autocorrelogram
from .bounds import DEFAULT_MC_DRAWS, attach_bounds
from .core import bin_series, make_bin_grid
from .errors import InvalidArgumentError, NumericalError
from .lgcp import SimulationDesign, simulate_series
from .oracle import population_rho, rho_tilde

__all__ = ["ExperimentReport", "run_replicate", "run_experiment"]


@dataclass
class ExperimentReport:
    """Per-lag summaries; index ``i`` refers to lag ``i + 1``."""

    latent: dict
    n: int
    d: int
    max_lag: int
    alpha: float
    replicates: int
    seed: int | None
    rho_tilde: np.ndarray
    mean_rho_hat: np.ndarray
    mean_abs_error: np.ndarray
    exceedance: np.ndarray
    n_ok: int
    n_failed: int
    failures: dict[str, int] = field(default_factory=dict)
    population_rho: np.ndarray | None = None
    rho_hat: np.ndarray | None = None
    bounds: np.ndarray | None = None

    @property
    def lags(self) -> np.ndarray:
        return np.arange(1, self.max_lag + 1)

    def rows(self) -> list[dict]:
        out = []
        for i, k in enumerate(self.lags):
            row = {
                "n": self.n,
                "lag": int(k),
                "rho_tilde": float(self.rho_tilde[i]),
                "mean_rho_hat": float(self.mean_rho_hat[i]),
                "mean_abs_error": float(self.mean_abs_error[i]),
                "exceedance": float(self.exceedance[i]),
            }
            if self.population_rho is not None:
                row["population_rho"] = float(self.population_rho[i])
            out.append(row)
        return out


def run_replicate(design: SimulationDesign, d: int, max_lag: int, alpha: float | None,
                  mc_draws: int, seed, floor: float | None = None):
    """One replicate: simulate, bin, estimate and (optionally) bound.

    Returns ``(rho_hat, bound)``; ``bound`` is NaN when ``alpha`` is None.
    """
    series = simulate_series(design, substream(seed, 0))
    Y = bin_series(series, make_bin_grid(design.basis.region, d))
    acf = autocorrelogram(Y, max_lag, floor=floor)
    if alpha is None:
        return acf.rho_hat, np.nan
    acf = attach_bounds(acf, Y, alpha, mc_draws, substream(seed, 1))
    return acf.rho_hat, float(acf.upper_bounds[0])


def _run_chunk(args):
    design, d, max_lag, alpha, mc_draws, seed, floor, reps = args
    rhos = np.full((len(reps), max_lag), np.nan)
    ubs = np.full(len(reps), np.nan)
    failures: dict[str, int] = {}
    for i, r in enumerate(reps):
        try:
            rhos[i], ubs[i] = run_replicate(design, d, max_lag, alpha, mc_draws,
                                            substream(seed, r), floor)
        except NumericalError as exc:
            name = type(exc).__name__
            failures[name] = failures.get(name, 0) + 1
    return rhos, ubs, failures


def run_experiment(design: SimulationDesign, d: int = 5, max_lag: int = 10,
                   replicates: int = 500, alpha: float | None = 0.10, seed: int = 0,
                   mc_draws: int = DEFAULT_MC_DRAWS, *, floor: float | None = None,
                   with_population: bool = False, keep_draws: bool = False,
                   workers: int = 1) -> ExperimentReport:
    """Replicate ``design`` and summarise the autocorrelograms lag by lag.

    Replicate ``r`` is seeded from substream ``(seed, r)`` so the report does
    not depend on ``workers``. Replicates failing with a numerical
    degeneracy (sparse counts, nonpositive trace) are counted, not fatal.
    ``alpha=None`` skips the bounds and leaves exceedance rates as NaN.
    """
    if replicates < 1:
        raise InvalidArgumentError("replicates must be >= 1")
    if not 1 <= max_lag <= design.n - 1:
        raise InvalidArgumentError("max_lag must be in 1..n-1")
    reps = np.arange(replicates)
    if workers > 1:
        chunks = np.array_split(reps, workers)
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_chunk, [
                (design, d, max_lag, alpha, mc_draws, seed, floor, c) for c in chunks
            ]))
    else:
        parts = [_run_chunk((design, d, max_lag, alpha, mc_draws, seed, floor, reps))]
    rhos = np.vstack([p[0] for p in parts])
    ubs = np.concatenate([p[1] for p in parts])
    failures: dict[str, int] = {}
    for p in parts:
        for name, c in p[2].items():
            failures[name] = failures.get(name, 0) + c

    ok = ~np.isnan(rhos).any(axis=1)
    n_ok = int(ok.sum())
    lags = range(1, max_lag + 1)
    rt = np.array([rho_tilde(design.latent, k) for k in lags])
    good = rhos[ok]
    with np.errstate(invalid="ignore"):
        mean_rho = good.mean(axis=0) if n_ok else np.full(max_lag, np.nan)
        mae = np.abs(good - rt).mean(axis=0) if n_ok else np.full(max_lag, np.nan)
        if alpha is None or not n_ok:
            exceed = np.full(max_lag, np.nan)
        else:
            exceed = (good >= ubs[ok][:, None]).mean(axis=0)
    pop = None
    if with_population:
        grid = make_bin_grid(design.basis.region, d)
        pop = population_rho(design.latent, design.basis, grid, lags)
    return ExperimentReport(
        latent=design.latent.describe(), n=design.n, d=d, max_lag=max_lag, alpha=alpha,
        replicates=replicates, seed=seed, rho_tilde=rt, mean_rho_hat=mean_rho,
        mean_abs_error=mae, exceedance=exceed, n_ok=n_ok, n_failed=replicates - n_ok,
        failures=failures, population_rho=pop,
        rho_hat=rhos if keep_draws else None, bounds=ubs if keep_draws else None,
    )


def with_n(design: SimulationDesign, n: int) -> SimulationDesign:
    return replace(design, n=int(n))

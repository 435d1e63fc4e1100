"""Binned moment estimators and the sample autocorrelogram.

With ``Y`` the ``n x d`` bin-count matrix, the estimators are

    nu_hat   = column means of Y
    C_0      = (1/n) sum_t Y_t Y_t^T - diag(nu_hat)
    C_k      = (1/(n-k)) sum_{t<=n-k} Y_t Y_{t+k}^T           (k >= 1)
    Gamma_k  = log(C_k / (nu_hat nu_hat^T))                    (entrywise)
    rho_k    = ||Gamma_k||_F / tr(Gamma_0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import BinnedCountSeries
from .errors import (
    DegenerateBinError,
    DegenerateVarianceError,
    InvalidArgumentError,
    NonpositiveCovarianceError,
    NumericalError,
)

__all__ = [
    "DEFAULT_FLOOR",
    "MomentEstimates",
    "Autocorrelogram",
    "count_matrix",
    "mean_counts",
    "autocov_c0",
    "autocov_ck",
    "moment_estimates",
    "gamma_hat",
    "rho_hat",
    "autocorrelogram",
]

DEFAULT_FLOOR = 1e-8
TRACE_MIN = 1e-10


# fsum is correctly rounded, so norms and traces do not depend on the order
# of the bins; relabelling cells leaves rho_k bit-for-bit unchanged.
def _frobenius(M) -> float:
    sq = np.square(np.asarray(M, dtype=float)).ravel()
    return math.sqrt(math.fsum(sq))


def _trace(M) -> float:
    return math.fsum(np.diag(np.asarray(M, dtype=float)))


def count_matrix(Y) -> np.ndarray:
    """Return the raw ``n x d`` array from a BinnedCountSeries or array-like."""
    y = Y.counts if isinstance(Y, BinnedCountSeries) else np.asarray(Y)
    if y.ndim != 2:
        raise InvalidArgumentError("count matrix must be 2-dimensional (n x d)")
    if y.shape[0] < 1 or y.shape[1] < 1:
        raise InvalidArgumentError("count matrix must have n >= 1 rows and d >= 1 columns")
    return y


def _cross_sum(a, b):
    # Exact for integer counts: products and sums stay in int64.
    if np.issubdtype(a.dtype, np.integer) and np.issubdtype(b.dtype, np.integer):
        return (a.astype(np.int64).T @ b.astype(np.int64)).astype(float)
    return np.einsum("ti,tj->ij", a.astype(float), b.astype(float))


def mean_counts(Y) -> np.ndarray:
    y = count_matrix(Y)
    return y.sum(axis=0) / y.shape[0]


def autocov_c0(Y) -> np.ndarray:
    y = count_matrix(Y)
    c0 = _cross_sum(y, y) / y.shape[0] - np.diag(mean_counts(y))
    return (c0 + c0.T) / 2


def autocov_ck(Y, k: int) -> np.ndarray:
    y = count_matrix(Y)
    n = y.shape[0]
    if k == 0:
        return autocov_c0(y)
    if not 1 <= k <= n - 1:
        raise InvalidArgumentError(f"lag k={k} must satisfy 1 <= k <= n-1 = {n - 1}")
    return _cross_sum(y[: n - k], y[k:]) / (n - k)


@dataclass(frozen=True)
class MomentEstimates:
    nu_hat: np.ndarray
    C_hat: dict[int, np.ndarray]
    n: int
    d: int


def moment_estimates(Y, max_lag: int) -> MomentEstimates:
    y = count_matrix(Y)
    cs = {k: autocov_ck(y, k) for k in range(max_lag + 1)}
    return MomentEstimates(mean_counts(y), cs, y.shape[0], y.shape[1])


def gamma_hat(nu_hat, C_k, *, floor: float | None = None, lag: int | None = None) -> np.ndarray:
    """Entrywise ``log(C_k[j, j'] / (nu_j nu_j'))``.

    With ``floor`` set, ratios are clamped from below at ``floor`` instead of
    raising on nonpositive entries.
    """
    nu = np.asarray(nu_hat, dtype=float)
    C = np.asarray(C_k, dtype=float)
    bad = np.flatnonzero(~(nu > 0))
    if bad.size:
        raise DegenerateBinError(int(bad[0]), float(nu[bad[0]]), lag=lag)
    ratio = C / np.outer(nu, nu)
    if floor is not None:
        ratio = np.maximum(ratio, floor)
    else:
        bad = np.argwhere(~(ratio > 0))
        if bad.size:
            j, jp = (int(v) for v in bad[0])
            raise NonpositiveCovarianceError((j, jp), float(ratio[j, jp]), lag=lag)
    return np.log(ratio)


def rho_hat(Gamma_k, Gamma_0) -> float:
    tr = _trace(Gamma_0)
    if not tr > TRACE_MIN:
        raise DegenerateVarianceError(
            f"trace of Gamma_0 is {tr!r}; the estimated log-intensity variance is not positive"
        )
    return _frobenius(Gamma_k) / tr


@dataclass(frozen=True, eq=False)
class Autocorrelogram:
    """Sample autocorrelations for lags ``1..K``.

    ``rho_hat[i]`` and ``upper_bounds[i]`` refer to lag ``i + 1``.
    """

    rho_hat: np.ndarray
    trace_gamma0: float
    upper_bounds: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def lags(self) -> np.ndarray:
        return np.arange(1, len(self.rho_hat) + 1)

    @property
    def max_lag(self) -> int:
        return len(self.rho_hat)

    def significant(self) -> np.ndarray:
        """Boolean mask of lags whose estimate reaches the upper bound."""
        if self.upper_bounds is None:
            raise InvalidArgumentError("autocorrelogram has no bounds attached")
        return self.rho_hat >= self.upper_bounds


def autocorrelogram(Y, max_lag: int, *, floor: float | None = None) -> Autocorrelogram:
    y = count_matrix(Y)
    n, d = y.shape
    if not 1 <= max_lag <= n - 1:
        raise InvalidArgumentError(f"max_lag={max_lag} must satisfy 1 <= K <= n-1 = {n - 1}")
    nu = mean_counts(y)
    try:
        g0 = gamma_hat(nu, autocov_c0(y), floor=floor, lag=0)
        tr0 = _trace(g0)
        if not tr0 > TRACE_MIN:
            raise DegenerateVarianceError(
                f"trace of Gamma_0 is {tr0!r}; the estimated log-intensity variance is not positive",
                lag=0,
            )
    except NumericalError as exc:
        exc.lag = 0
        raise
    rho = np.empty(max_lag)
    for k in range(1, max_lag + 1):
        try:
            gk = gamma_hat(nu, autocov_ck(y, k), floor=floor, lag=k)
        except NumericalError as exc:
            exc.lag = k
            raise
        rho[k - 1] = _frobenius(gk) / tr0
    meta = {"n": n, "d": d, "K": max_lag, "alpha": None, "mc_draws": None,
            "seed": None, "floor": floor}
    return Autocorrelogram(rho, tr0, None, meta)

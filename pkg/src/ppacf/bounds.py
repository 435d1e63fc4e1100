"""Monte-Carlo upper bounds for the sample autocorrelations under independence.

Under temporal independence ``n * rho_k^2`` converges in law to
``Z^T B Omega B^T Z / tr(Gamma_0)^2`` with ``Z ~ N(0, I_{d^2})``, for every
lag ``k >= 1``. ``B`` and ``Omega`` are assembled from the mean count vector
``nu`` and the count covariance ``Omega11``.

Kronecker products follow ``numpy.kron``:
``kron(A, B)[i*q + k, j*s + l] = A[i, j] * B[k, l]``. Both ``B`` and ``Omega``
use it, so vec-indices pair consistently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from ._rng import generator
from .acf import Autocorrelogram, count_matrix
from .errors import InvalidArgumentError, NumericalError

__all__ = [
    "DEFAULT_MC_DRAWS",
    "NullDistParams",
    "QuadFormSampler",
    "build_B",
    "build_Omega",
    "estimate_null_params",
    "sample_null_statistic",
    "null_quantile",
    "attach_bounds",
]

DEFAULT_MC_DRAWS = 100_000
# Draws are generated in fixed-size blocks, each from its own substream keyed
# by block index, so results do not depend on how blocks are scheduled.
_BLOCK = 8192
_SYM_TOL = 1e-10
_CLIP_WARN = 1e-8


def _positive_nu(nu):
    nu = np.asarray(nu, dtype=float).ravel()
    if nu.size == 0 or not np.all(nu > 0):
        raise InvalidArgumentError("nu must be a nonempty vector of positive entries")
    return nu


def build_B(nu) -> np.ndarray:
    """``[B1 | B2]`` with ``B1 = -(1 (x) diag(1/nu)) - (diag(1/nu) (x) 1)``
    and ``B2 = diag(1/nu (x) 1/nu)``."""
    nu = _positive_nu(nu)
    d = nu.size
    inv = 1.0 / nu
    ones = np.ones((d, 1))
    B1 = -np.kron(ones, np.diag(inv)) - np.kron(np.diag(inv), ones)
    B2 = np.diag(np.kron(inv, inv))
    return np.hstack([B1, B2])


def build_Omega(nu, Omega11) -> np.ndarray:
    nu = np.asarray(nu, dtype=float).ravel()
    W = np.asarray(Omega11, dtype=float)
    d = nu.size
    if W.shape != (d, d):
        raise InvalidArgumentError(f"Omega11 must be {d}x{d}, got {W.shape}")
    if np.max(np.abs(W - W.T), initial=0.0) > _SYM_TOL:
        raise InvalidArgumentError("Omega11 must be symmetric")
    col = nu[:, None]
    row = nu[None, :]
    eye = np.eye(d)
    nnT = col @ row
    O12 = np.kron(row, W) + np.kron(W, row)
    O22 = (
        np.kron(W, W)
        + np.kron(W, nnT)
        + np.kron(nnT, W)
        + np.kron(col, eye) @ W @ np.kron(eye, row)
        + np.kron(eye, col) @ W @ np.kron(row, eye)
    )
    return np.block([[W, O12], [O12.T, O22]])


@dataclass(frozen=True)
class NullDistParams:
    nu: np.ndarray
    Omega11: np.ndarray
    trace_Gamma0: float
    n: int

    def __post_init__(self):
        _positive_nu(self.nu)
        W = np.asarray(self.Omega11, dtype=float)
        if np.max(np.abs(W - W.T), initial=0.0) > _SYM_TOL:
            raise InvalidArgumentError("Omega11 must be symmetric")
        if np.any(np.diag(W) < 0):
            raise InvalidArgumentError("Omega11 must have a nonnegative diagonal")
        if not self.trace_Gamma0 > 0:
            raise InvalidArgumentError("trace_Gamma0 must be positive")
        if int(self.n) < 1:
            raise InvalidArgumentError("n must be positive")


class QuadFormSampler:
    """Draws of ``scale * Z^T M Z`` with ``M = B Omega B^T``.

    ``M`` is diagonalised once; each draw is then a weighted sum of
    independent chi-square(1) variables with the eigenvalues as weights.
    Negative eigenvalues from sampling noise in ``Omega`` are clipped at 0.
    """

    def __init__(self, B, Omega, scale: float = 1.0):
        self.B = np.asarray(B, dtype=float)
        self.Omega = np.asarray(Omega, dtype=float)
        self.scale = float(scale)
        m = self.B.shape[1]
        if self.Omega.shape != (m, m):
            raise InvalidArgumentError("Omega shape does not match the columns of B")

    @classmethod
    def from_params(cls, params: NullDistParams) -> QuadFormSampler:
        return cls(
            build_B(params.nu),
            build_Omega(params.nu, params.Omega11),
            1.0 / params.trace_Gamma0**2,
        )

    @cached_property
    def M(self) -> np.ndarray:
        M = self.B @ self.Omega @ self.B.T
        return (M + M.T) / 2

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        M = self.scale * self.M
        if not np.all(np.isfinite(M)):
            raise NumericalError("quadratic-form matrix has non-finite entries")
        try:
            lam = np.linalg.eigvalsh(M)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigendecomposition failed: {exc}") from exc
        neg = -lam[lam < 0].sum()
        total = np.abs(lam).sum()
        if total > 0 and neg > _CLIP_WARN * total:
            warnings.warn(
                f"clipped negative eigenvalue mass {neg:.3g} ({neg / total:.2e} of total)",
                RuntimeWarning,
                stacklevel=2,
            )
        return np.clip(lam, 0.0, None)

    @property
    def mean(self) -> float:
        """Exact expectation of one draw (after clipping)."""
        return float(self.eigenvalues.sum())

    def sample(self, size: int, seed) -> np.ndarray:
        """``size`` draws, deterministic in ``(size, seed)``."""
        lam = self.eigenvalues
        out = np.empty(int(size))
        for b, start in enumerate(range(0, int(size), _BLOCK)):
            stop = min(start + _BLOCK, int(size))
            z = generator(seed, b).standard_normal((stop - start, lam.size))
            out[start:stop] = (z * z) @ lam
        return out


def sample_null_statistic(sampler: QuadFormSampler, seed, size: int | None = None):
    """One draw (or ``size`` draws) of the limiting null statistic."""
    if size is None:
        return float(sampler.sample(1, seed)[0])
    return sampler.sample(size, seed)


def null_quantile(params: NullDistParams, alpha: float, mc_draws: int = DEFAULT_MC_DRAWS,
                  seed=0) -> float:
    """Upper bound ``sqrt(q_{1-alpha} / n)`` shared by every lag ``k >= 1``."""
    if not 0 < alpha < 1:
        raise InvalidArgumentError(f"alpha must be in (0, 1), got {alpha}")
    if int(mc_draws) < 1000:
        raise InvalidArgumentError(f"mc_draws must be at least 1000, got {mc_draws}")
    sampler = QuadFormSampler.from_params(params)
    draws = sampler.sample(int(mc_draws), seed)
    q = float(np.quantile(draws, 1.0 - alpha))
    return float(np.sqrt(q / params.n))


def estimate_null_params(Y, trace_gamma0: float) -> NullDistParams:
    """Sample mean and 1/n-normalised sample covariance of the count vectors."""
    y = count_matrix(Y).astype(float)
    nu = y.mean(axis=0)
    r = y - nu
    W = r.T @ r / y.shape[0]
    return NullDistParams(nu, (W + W.T) / 2, float(trace_gamma0), y.shape[0])


def attach_bounds(acf: Autocorrelogram, Y, alpha: float = 0.05,
                  mc_draws: int = DEFAULT_MC_DRAWS, seed=0) -> Autocorrelogram:
    params = estimate_null_params(Y, acf.trace_gamma0)
    if params.n != acf.meta.get("n", params.n):
        raise InvalidArgumentError("count matrix does not match the autocorrelogram")
    ub = null_quantile(params, alpha, mc_draws, seed)
    meta = dict(acf.meta, alpha=alpha, mc_draws=int(mc_draws),
                seed=seed if isinstance(seed, (int, type(None))) else str(seed))
    return replace(acf, upper_bounds=np.full(acf.max_lag, ub), meta=meta)

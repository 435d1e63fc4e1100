"""Closed-form and quadrature population quantities.

For ``G_t(s) = mu(s) + U_t . phi(s)`` with ``Sigma_k = E[U_t U_{t+k}^T]``:

    gamma_k(s, s') = phi(s)^T Sigma_k phi(s')
    nu(s)          = exp(mu(s) + gamma_0(s, s) / 2)
    c_k(s, s')     = nu(s) nu(s') exp(gamma_k(s, s'))

The functional autocorrelation is ``||Sigma_k||_F / tr(Sigma_0)``; the binned
limit of the sample autocorrelation replaces ``gamma_k`` by the log-ratio of
cell-integrated moments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .core import BinGrid, Region
from .errors import InvalidArgumentError, NumericalError
from .latent import AUTOREGRESSIVE, LatentModelSpec
from .lgcp import BasisSpec

__all__ = [
    "PopulationMoments",
    "moments_from_log_gaussian",
    "log_gaussian_from_moments",
    "finite_dim_gamma",
    "sigma_k",
    "sigma0",
    "rho_tilde",
    "simpson_rule",
    "integrate",
    "expected_total_count",
    "largest_likely_count",
    "population_rho",
    "population_rho_k",
]

_LYAP_TOL = 1e-14
_LYAP_MAXITER = 100_000


@dataclass(frozen=True)
class PopulationMoments:
    """Intensity moments and their log-Gaussian counterparts, as functions."""

    nu: Callable
    c_k: Callable
    mu: Callable
    gamma_k: Callable
    v0: Callable


def moments_from_log_gaussian(mu: Callable, gamma: Callable) -> PopulationMoments:
    """Moments of ``exp(G)`` from the mean ``mu(s)`` and autocovariance
    ``gamma(k, s, s')`` of a stationary Gaussian ``G``."""

    def v0(s):
        return gamma(0, s, s)

    def nu(s):
        return np.exp(mu(s) + 0.5 * gamma(0, s, s))

    def c_k(k, s, sp):
        return nu(s) * nu(sp) * np.exp(gamma(k, s, sp))

    return PopulationMoments(nu, c_k, mu, gamma, v0)


def log_gaussian_from_moments(nu: Callable, c_k: Callable) -> tuple[Callable, Callable]:
    """Inverse map: ``mu = 2 log nu - log c_0(s, s) / 2`` and
    ``gamma_k = log(c_k / (nu nu'))``."""

    def mu(s):
        return 2.0 * np.log(nu(s)) - 0.5 * np.log(c_k(0, s, s))

    def gamma(k, s, sp):
        return np.log(c_k(k, s, sp) / (nu(s) * nu(sp)))

    return mu, gamma


def sigma0(spec: LatentModelSpec) -> np.ndarray:
    """Stationary covariance ``Sigma_0`` of the latent series."""
    V, C = spec.V, spec.coef
    if spec.family == "wn":
        return V.copy()
    if spec.family not in AUTOREGRESSIVE:
        return V + C @ V @ C.T
    if spec.p == 1:
        return V / (1.0 - C**2)
    # Fixed point of S = A S A^T + V.
    S = V.copy()
    for _ in range(_LYAP_MAXITER):
        nxt = C @ S @ C.T + V
        if np.max(np.abs(nxt - S)) < _LYAP_TOL * max(1.0, np.max(np.abs(nxt))):
            return nxt
        S = nxt
    raise NumericalError("Sigma_0 fixed-point iteration did not converge")


def sigma_k(spec: LatentModelSpec, k: int) -> np.ndarray:
    """``Sigma_k = E[U_t U_{t+k}^T]``; negative ``k`` gives ``Sigma_{|k|}^T``."""
    k = int(k)
    if k < 0:
        return sigma_k(spec, -k).T
    S0 = sigma0(spec)
    if k == 0:
        return S0
    zero = np.zeros_like(S0)
    L = spec.lag
    if spec.family == "wn" or k % L:
        return zero
    m = k // L
    if spec.family in AUTOREGRESSIVE:
        return S0 @ np.linalg.matrix_power(spec.coef, m).T
    return spec.V @ spec.coef.T if m == 1 else zero


def rho_tilde(spec: LatentModelSpec, k: int) -> float:
    """Functional autocorrelation ``||Sigma_k||_F / tr(Sigma_0)``."""
    return float(np.linalg.norm(sigma_k(spec, k), "fro") / np.trace(sigma0(spec)))


def finite_dim_gamma(spec: LatentModelSpec, basis: BasisSpec) -> Callable:
    """``gamma(k, s, s') = phi(s)^T Sigma_k phi(s')`` evaluated pointwise."""

    def gamma(k, s, sp):
        a = basis.phi_matrix(np.atleast_1d(s) if basis.region.dim == 1 else np.atleast_2d(s))
        b = basis.phi_matrix(np.atleast_1d(sp) if basis.region.dim == 1 else np.atleast_2d(sp))
        out = np.einsum("ip,pq,iq->i", a, sigma_k(spec, k), b)
        return out[0] if np.ndim(s) == 0 else out

    return gamma


def simpson_rule(a: float, b: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite Simpson rule with ``m`` (odd) points."""
    if m < 3 or m % 2 == 0:
        raise InvalidArgumentError("Simpson's rule needs an odd number of points >= 3")
    x = np.linspace(a, b, m)
    w = np.ones(m)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return x, w * (b - a) / (m - 1) / 3.0


def _cell_rule(cell: Region, m: int):
    if cell.dim == 1:
        return simpson_rule(cell.lo[0], cell.hi[0], m)
    x, wx = simpson_rule(cell.lo[0], cell.hi[0], m)
    y, wy = simpson_rule(cell.lo[1], cell.hi[1], m)
    gx, gy = np.meshgrid(x, y)
    return np.column_stack([gx.ravel(), gy.ravel()]), np.outer(wy, wx).ravel()


def integrate(f: Callable, region: Region, points: int = 4097) -> float:
    """Composite (tensor-product) Simpson integral of a vectorised ``f``."""
    s, w = _cell_rule(region, points)
    return float(w @ np.asarray(f(s), dtype=float))


def expected_total_count(spec: LatentModelSpec, basis: BasisSpec, points: int = 4097) -> float:
    """``int nu(s) ds`` over the basis region."""
    S0 = sigma0(spec)

    def nu(s):
        phi = basis.phi_matrix(s)
        return np.exp(basis.mu_values(s) + 0.5 * np.einsum("ip,pq,iq->i", phi, S0, phi))

    return integrate(nu, basis.region, points)


def largest_likely_count(basis: BasisSpec, sigma0_scalar: float = 1.0, points: int = 4097) -> float:
    """``int exp(mu + 2 sqrt(sigma_0) phi) ds`` for a one-function basis."""
    if basis.p != 1:
        raise InvalidArgumentError("defined for one-dimensional latent models only")
    root = np.sqrt(sigma0_scalar)
    return integrate(
        lambda s: np.exp(basis.mu_values(s) + 2 * root * basis.phi_matrix(s)[:, 0]),
        basis.region,
        points,
    )


def _default_points(grid: BinGrid) -> int:
    return 513 if grid.region.dim == 1 else 17


def _binned_gammas(spec, basis, grid, lags, m):
    if basis.region != grid.region:
        raise InvalidArgumentError("basis and grid regions differ")
    rules = [_cell_rule(c, m) for c in grid.cells()]
    s = np.concatenate([r[0] for r in rules])
    w = np.concatenate([r[1] for r in rules])
    owner = np.repeat(np.arange(grid.d), [len(r[1]) for r in rules])
    S = np.zeros((len(w), grid.d))
    S[np.arange(len(w)), owner] = 1.0
    phi = basis.phi_matrix(s)
    S0 = sigma0(spec)
    nu_s = np.exp(basis.mu_values(s) + 0.5 * np.einsum("ip,pq,iq->i", phi, S0, phi))
    A = S * (w * nu_s)[:, None]
    nu = A.sum(axis=0)
    out = {}
    for k in lags:
        # log(C / nu nu^T) = log1p(A^T expm1(gamma) A / nu nu^T), accurate for small gamma
        E = np.expm1(phi @ sigma_k(spec, k) @ phi.T)
        excess = (A.T @ E @ A) / np.outer(nu, nu)
        if np.any(excess <= -1) or not np.all(np.isfinite(excess)):
            raise NumericalError(f"binned moments not positive at lag {k}")
        out[k] = np.log1p(excess)
    return out


def population_rho(spec: LatentModelSpec, basis: BasisSpec, grid: BinGrid,
                   lags: Iterable[int], points: int | None = None,
                   check: bool = True, rtol: float = 1e-8) -> np.ndarray:
    """Binned population autocorrelations ``||Gamma_k||_F / tr(Gamma_0)``.

    Cell integrals use a tensor-product composite Simpson rule with ``points``
    nodes per axis per cell. With ``check`` the result is compared against
    the rule on half as many panels and a NumericalError is raised when the
    two disagree by more than ``rtol``.
    """
    lags = [int(k) for k in lags]
    if any(k < 1 for k in lags):
        raise InvalidArgumentError("lags must be >= 1")
    m = points or _default_points(grid)

    def rho(m):
        g = _binned_gammas(spec, basis, grid, [0] + lags, m)
        tr = np.trace(g[0])
        if not tr > 0:
            raise NumericalError("population trace of Gamma_0 is not positive")
        return np.array([np.linalg.norm(g[k], "fro") / tr for k in lags])

    fine = rho(m)
    if check:
        coarse = rho((m + 1) // 2 | 1)
        err = np.abs(fine - coarse)
        if np.any(err > rtol * np.abs(fine) + 1e-13):
            raise NumericalError(
                f"quadrature not converged: max change {err.max():.3g} on halving the grid"
            )
    return fine


def population_rho_k(spec: LatentModelSpec, basis: BasisSpec, grid: BinGrid, k: int,
                     points: int | None = None, check: bool = True) -> float:
    return float(population_rho(spec, basis, grid, [k], points, check)[0])

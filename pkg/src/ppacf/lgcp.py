"""Log-Gaussian Cox process series with finite-dimensional latent structure.

Day ``t`` has log-intensity ``G_t(s) = mu(s) + U_t . phi(s)`` and, given
``G_t``, an inhomogeneous Poisson pattern with intensity ``exp(G_t)``.
Patterns are drawn by thinning a dominating homogeneous process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._rng import generator
from .core import PointPattern, PointPatternSeries, Region, _as_points
from .errors import InvalidArgumentError, NumericalError
from .latent import LatentModelSpec, default_burn_in, simulate_latent

__all__ = [
    "Constant",
    "SineMode",
    "BasisSpec",
    "default_basis",
    "intensity_at",
    "sample_poisson",
    "SimulationDesign",
    "simulate_series",
]

SUP_GRID_1D = 4096
SUP_GRID_2D = 256
SUP_SAFETY = 1.001
_SUP_ROWS = 256


@dataclass(frozen=True)
class Constant:
    """``s -> value``; picklable, unlike a lambda."""

    value: float

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        shape = s.shape if s.ndim <= 1 else s.shape[:-1]
        return np.full(shape, self.value)


@dataclass(frozen=True)
class SineMode:
    """``s -> amplitude * sin(2 pi frequency s)`` on an interval."""

    amplitude: float = math.sqrt(2.0)
    frequency: float = 1.0

    def __call__(self, s):
        return self.amplitude * np.sin(2 * np.pi * self.frequency * np.asarray(s, dtype=float))


@dataclass(frozen=True)
class BasisSpec:
    """Mean log-intensity ``mu`` and ``p`` orthonormal functions ``phi``.

    Every callable is vectorised: it takes an array of points (shape ``(m,)``
    on an interval, ``(m, 2)`` on a rectangle) and returns shape ``(m,)``.
    """

    mu: Callable
    phi: tuple[Callable, ...]
    region: Region

    def __post_init__(self):
        phi = tuple(self.phi) if isinstance(self.phi, Sequence) else (self.phi,)
        if not phi:
            raise InvalidArgumentError("basis needs at least one function")
        object.__setattr__(self, "phi", phi)

    @property
    def p(self) -> int:
        return len(self.phi)

    def phi_matrix(self, s) -> np.ndarray:
        """``(m, p)`` matrix of basis values."""
        s = _as_points(s, self.region.dim)
        return np.column_stack([np.broadcast_to(f(s), (len(s),)) for f in self.phi])

    def mu_values(self, s) -> np.ndarray:
        s = _as_points(s, self.region.dim)
        return np.broadcast_to(np.asarray(self.mu(s), dtype=float), (len(s),))

    def log_intensity(self, U, s) -> np.ndarray:
        """``mu(s) + U . phi(s)``; for ``U`` of shape ``(n, p)`` returns ``(n, m)``."""
        U = np.asarray(U, dtype=float)
        return self.mu_values(s) + U @ self.phi_matrix(s).T

    def sup_grid(self) -> np.ndarray:
        r = self.region
        if r.dim == 1:
            return np.linspace(r.lo[0], r.hi[0], SUP_GRID_1D)
        xs = np.linspace(r.lo[0], r.hi[0], SUP_GRID_2D)
        ys = np.linspace(r.lo[1], r.hi[1], SUP_GRID_2D)
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


def default_basis() -> BasisSpec:
    """``mu = 3`` and ``phi(s) = sqrt(2) sin(2 pi s)`` on ``[0, 1]``."""
    return BasisSpec(Constant(3.0), (SineMode(),), Region.interval(0.0, 1.0))


def intensity_at(basis: BasisSpec, U_t, s) -> np.ndarray | float:
    """``exp(mu(s) + U_t . phi(s))`` at one point or an array of points."""
    scalar = np.ndim(s) == 0 or (basis.region.dim == 2 and np.ndim(s) == 1)
    pts = _as_points(np.atleast_1d(s) if basis.region.dim == 1 else np.atleast_2d(s),
                     basis.region.dim)
    if not np.all(basis.region.contains(pts)):
        raise InvalidArgumentError("intensity requested outside the basis region")
    U = np.asarray(U_t, dtype=float).reshape(1, basis.p)
    lam = np.exp(basis.log_intensity(U, pts)[0])
    return float(lam[0]) if scalar else lam


def _uniform(region, size, rng):
    if region.dim == 1:
        return rng.uniform(region.lo[0], region.hi[0], size)
    return np.column_stack([
        rng.uniform(region.lo[0], region.hi[0], size),
        rng.uniform(region.lo[1], region.hi[1], size),
    ])


def _thin(basis: BasisSpec, U, rng) -> tuple[list[np.ndarray], dict]:
    """Thinning for every row of ``U`` (shape ``(n, p)``)."""
    region = basis.region
    grid = basis.sup_grid()
    mu_g, phi_g = basis.mu_values(grid), basis.phi_matrix(grid).T
    G_sup = np.concatenate([
        (mu_g + U[i:i + _SUP_ROWS] @ phi_g).max(axis=1)
        for i in range(0, len(U), _SUP_ROWS)
    ])
    lam_max = np.exp(G_sup) * SUP_SAFETY
    if not np.all(np.isfinite(lam_max)):
        raise NumericalError("intensity is not finite on the region")
    n_cand = rng.poisson(lam_max * region.measure)
    owner = np.repeat(np.arange(len(U)), n_cand)
    cand = _uniform(region, int(n_cand.sum()), rng)
    accept_u = rng.uniform(size=len(owner))
    if len(owner):
        phi = basis.phi_matrix(cand)
        G = basis.mu_values(cand) + np.einsum("ij,ij->i", phi, U[owner])
        keep = accept_u * lam_max[owner] < np.exp(G)
    else:
        keep = np.zeros(0, dtype=bool)
    accepted = np.bincount(owner[keep], minlength=len(U))
    pieces = np.split(cand[keep], np.cumsum(accepted)[:-1])
    stats = {"candidates": int(n_cand.sum()), "accepted": int(keep.sum()),
             "lam_max": lam_max}
    return pieces, stats


def sample_poisson(basis: BasisSpec, U_t, seed=None, *, return_stats=False):
    """One inhomogeneous Poisson pattern with intensity ``exp(mu + U_t . phi)``."""
    rng = generator(seed)
    U = np.asarray(U_t, dtype=float).reshape(1, basis.p)
    pieces, stats = _thin(basis, U, rng)
    pattern = PointPattern(pieces[0], basis.region)
    return (pattern, stats) if return_stats else pattern


@dataclass(frozen=True)
class SimulationDesign:
    basis: BasisSpec
    latent: LatentModelSpec
    n: int
    burn_in: int | None = None
    seed: int | None = None

    def __post_init__(self):
        if int(self.n) < 1:
            raise InvalidArgumentError("n must be positive")
        if self.latent.p != self.basis.p:
            raise InvalidArgumentError(
                f"latent dimension {self.latent.p} does not match basis size {self.basis.p}"
            )
        if self.burn_in is not None and int(self.burn_in) < 0:
            raise InvalidArgumentError("burn_in must be nonnegative")

    @property
    def effective_burn_in(self) -> int:
        return default_burn_in(self.latent) if self.burn_in is None else int(self.burn_in)


def simulate_series(design: SimulationDesign, seed=None, *, return_latent=False):
    """Latent path, then conditionally independent Poisson patterns.

    ``seed`` overrides ``design.seed`` (it may be a SeedSequence).
    """
    seed = design.seed if seed is None else seed
    U = simulate_latent(design.latent, design.n, design.effective_burn_in,
                        generator(seed, 0))
    pieces, _ = _thin(design.basis, U, generator(seed, 1))
    series = PointPatternSeries(tuple(PointPattern(p, design.basis.region) for p in pieces))
    return (series, U) if return_latent else series

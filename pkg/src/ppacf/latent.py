"""Latent p-variate time series driving the log-intensity.

Families (``Z_t`` i.i.d. ``N(0, V)``):

    wn    U_t = Z_t
    ar1   U_t = A U_{t-1} + Z_t
    ma1   U_t = Z_t + B Z_{t-1}
    sar1  U_t = A U_{t-tau} + Z_t
    sma1  U_t = Z_t + B Z_{t-tau}
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from ._rng import generator
from .errors import InvalidArgumentError

__all__ = [
    "FAMILIES",
    "LatentModelSpec",
    "normalize_noise_variance",
    "default_burn_in",
    "simulate_latent",
]

FAMILIES = ("wn", "ar1", "ma1", "sar1", "sma1")
AUTOREGRESSIVE = ("ar1", "sar1")
MOVING_AVERAGE = ("ma1", "sma1")


def normalize_noise_variance(family: str, coeff: float = 0.0) -> float:
    """Noise variance ``v`` giving unit latent variance for a scalar model."""
    family = family.lower()
    if family == "wn":
        return 1.0
    if family in AUTOREGRESSIVE:
        if not abs(coeff) < 1:
            raise InvalidArgumentError(f"|a| must be < 1 for {family}, got {coeff}")
        return 1.0 - coeff**2
    if family in MOVING_AVERAGE:
        if not np.isfinite(coeff):
            raise InvalidArgumentError("b must be finite")
        return 1.0 / (1.0 + coeff**2)
    raise InvalidArgumentError(f"unknown family {family!r}")


def _matrix(x, p=None):
    m = np.atleast_2d(np.asarray(x, dtype=float))
    if m.shape[0] != m.shape[1]:
        raise InvalidArgumentError("coefficient and covariance matrices must be square")
    if p is not None and m.shape[0] != p:
        raise InvalidArgumentError(f"expected a {p}x{p} matrix, got {m.shape}")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class LatentModelSpec:
    """A latent model family with its coefficient matrix and noise covariance.

    ``coef`` is ``A`` for the autoregressive families, ``B`` for the
    moving-average ones and ignored for white noise.
    """

    family: str
    V: np.ndarray
    coef: np.ndarray | None = None
    tau: int = 1

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in FAMILIES:
            raise InvalidArgumentError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "family", fam)
        V = _matrix(self.V)
        p = V.shape[0]
        if not np.allclose(V, V.T, atol=1e-12) or np.linalg.eigvalsh(V).min() <= 0:
            raise InvalidArgumentError("V must be symmetric positive definite")
        object.__setattr__(self, "V", V)
        coef = _matrix(self.coef if self.coef is not None else np.zeros((p, p)), p)
        object.__setattr__(self, "coef", coef)
        if fam in AUTOREGRESSIVE and not np.linalg.norm(coef, "fro") < 1:
            raise InvalidArgumentError("autoregressive models need ||A||_F < 1")
        tau = int(self.tau)
        if fam in ("sar1", "sma1"):
            if tau < 2:
                raise InvalidArgumentError("seasonal models need tau >= 2")
        elif fam in ("ar1", "ma1"):
            tau = 1
        object.__setattr__(self, "tau", tau)

    @property
    def p(self) -> int:
        return self.V.shape[0]

    @property
    def lag(self) -> int:
        """Step of the recursion (1, or tau for seasonal families)."""
        return self.tau if self.family in ("sar1", "sma1") else 1

    @classmethod
    def white_noise(cls, v=1.0) -> LatentModelSpec:
        return cls("wn", v)

    @classmethod
    def ar1(cls, a, v=None) -> LatentModelSpec:
        if v is None:
            v = normalize_noise_variance("ar1", a)
        return cls("ar1", v, a)

    @classmethod
    def ma1(cls, b, v=None) -> LatentModelSpec:
        if v is None:
            v = normalize_noise_variance("ma1", b)
        return cls("ma1", v, b)

    @classmethod
    def sar1(cls, a, tau=5, v=None) -> LatentModelSpec:
        if v is None:
            v = normalize_noise_variance("sar1", a)
        return cls("sar1", v, a, tau)

    @classmethod
    def sma1(cls, b, tau=5, v=None) -> LatentModelSpec:
        if v is None:
            v = normalize_noise_variance("sma1", b)
        return cls("sma1", v, b, tau)

    @classmethod
    def scalar(cls, family: str, coeff: float = 0.0, tau: int = 5, v=None) -> LatentModelSpec:
        """Scalar model with the unit-variance normalisation by default."""
        family = family.lower()
        if v is None:
            v = normalize_noise_variance(family, coeff)
        if family == "wn":
            return cls.white_noise(v)
        return cls(family, v, coeff, tau)

    def describe(self) -> dict:
        out = {"family": self.family, "p": self.p}
        if self.p == 1:
            out["v"] = float(self.V[0, 0])
            if self.family in AUTOREGRESSIVE:
                out["a"] = float(self.coef[0, 0])
            elif self.family in MOVING_AVERAGE:
                out["b"] = float(self.coef[0, 0])
        if self.family in ("sar1", "sma1"):
            out["tau"] = self.tau
        return out


def default_burn_in(spec: LatentModelSpec) -> int:
    """Warm-up length for a path started from the zero state.

    Autoregressive: smallest ``m`` with ``||A||_F^ceil(m / lag) < 1e-8``.
    Moving average: one lag of noise history. White noise: none.
    """
    if spec.family == "wn":
        return 0
    if spec.family in MOVING_AVERAGE:
        return spec.lag
    r = float(np.linalg.norm(spec.coef, "fro"))
    if r == 0:
        return 1
    steps = math.floor(math.log(1e-8) / math.log(r)) + 1
    return (steps - 1) * spec.lag + 1


def _noise(spec, size, rng):
    z = rng.standard_normal((size, spec.p))
    if spec.p == 1:
        return z * math.sqrt(spec.V[0, 0])
    return z @ np.linalg.cholesky(spec.V).T


def simulate_latent(spec: LatentModelSpec, n: int, burn_in: int | None = None,
                    seed=None) -> np.ndarray:
    """Stationary sample path ``U_1..U_n`` as an ``(n, p)`` array."""
    if int(n) < 1:
        raise InvalidArgumentError("n must be positive")
    if burn_in is None:
        burn_in = default_burn_in(spec)
    if int(burn_in) < 0:
        raise InvalidArgumentError("burn_in must be nonnegative")
    rng = generator(seed)
    total = int(n) + int(burn_in)
    z = _noise(spec, total, rng)
    L = spec.lag
    if spec.family == "wn":
        u = z
    elif spec.p == 1:
        c = spec.coef[0, 0]
        poly = np.zeros(L + 1)
        poly[0] = 1.0
        if spec.family in AUTOREGRESSIVE:
            poly[L] = -c
            u = signal.lfilter([1.0], poly, z[:, 0])[:, None]
        else:
            poly[L] = c
            u = signal.lfilter(poly, [1.0], z[:, 0])[:, None]
    elif spec.family in AUTOREGRESSIVE:
        u = z.copy()
        A = spec.coef
        for t in range(L, total):
            u[t] += A @ u[t - L]
    else:
        u = z.copy()
        u[L:] += z[:-L] @ spec.coef.T
    return u[int(burn_in):]

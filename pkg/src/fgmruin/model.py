"""Risk-model primitives: claims, inter-arrival laws, and FGM dependence.

The surplus process is U(t) = u + c t - sum of claims up to t.  Claim
amounts X are exponential with rate alpha.  Inter-claim times W are either
exponential (classical compound Poisson) or Erlang(2, beta).  Each claim
amount depends on the inter-claim time that precedes it through a
Farlie-Gumbel-Morgenstern (FGM) copula with parameter theta in [-1, 1]:

    C(u, v) = u v + theta * u v (1 - u)(1 - v)

so the joint density of (X, W) factorizes into the independent part plus a
theta correction built from the auxiliary densities

    h(x) = f_X(x) (1 - 2 F_X(x)),    k(t) = f_W(t) (1 - 2 F_W(t)).

Laplace transforms of f_X and h are exposed both as point evaluations and
as exact rational functions; the rational form is what the solvers build
their cleared transforms from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InputError, LoadingError
from .polyexp import Polynomial, RationalFn

__all__ = [
    "FgmParam",
    "ExpClaim",
    "ExpPoisson",
    "Erlang2",
    "InterArrival",
    "ModelSpec",
    "fgm_cdf",
    "fgm_density",
    "joint_density",
    "h_aux",
    "k_aux",
    "f_tilde",
    "h_tilde",
    "f_tilde_rational",
    "h_tilde_rational",
    "conditional_grade",
    "sample_pair",
    "sample_pairs",
]


@dataclass(frozen=True)
class FgmParam:
    """FGM copula parameter, valid on [-1, 1]."""

    theta: float

    def __post_init__(self):
        if not (-1.0 <= self.theta <= 1.0) or not math.isfinite(self.theta):
            raise InputError(f"FGM parameter must lie in [-1, 1], got {self.theta!r}")


def _theta_of(theta: Union[float, FgmParam]) -> float:
    if isinstance(theta, FgmParam):
        return theta.theta
    return FgmParam(float(theta)).theta


@dataclass(frozen=True)
class ExpClaim:
    """Exponential claim size with rate alpha (mean 1/alpha)."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0.0) or not math.isfinite(self.alpha):
            raise InputError(f"claim rate alpha must be positive, got {self.alpha!r}")

    @property
    def mean(self) -> float:
        return 1.0 / self.alpha

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0.0, self.alpha * np.exp(-self.alpha * x), 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0.0, -np.expm1(-self.alpha * x), 0.0)
        return float(out) if out.ndim == 0 else out

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q < 0.0) | (q >= 1.0)):
            raise InputError("claim quantile needs q in [0, 1)")
        out = -np.log1p(-q) / self.alpha
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ExpPoisson:
    """Exponential inter-arrival times with rate lam (Poisson claim counts)."""

    lam: float

    def __post_init__(self):
        if not (self.lam > 0.0) or not math.isfinite(self.lam):
            raise InputError(f"arrival rate lam must be positive, got {self.lam!r}")

    @property
    def mean(self) -> float:
        return 1.0 / self.lam

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t >= 0.0, self.lam * np.exp(-self.lam * t), 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t >= 0.0, -np.expm1(-self.lam * t), 0.0)
        return float(out) if out.ndim == 0 else out

    def ppf(self, v):
        v = np.asarray(v, dtype=float)
        if np.any((v < 0.0) | (v >= 1.0)):
            raise InputError("arrival quantile needs v in [0, 1)")
        out = -np.log1p(-v) / self.lam
        return float(out) if out.ndim == 0 else out


# Newton tolerance and iteration cap for the Erlang(2) quantile.
_ERLANG_PPF_TOL = 1e-12
_ERLANG_PPF_MAXIT = 100


def _erlang2_z_from_y(y):
    """Solve z - log(1 + z) = y for z >= 0, vectorized.

    Seeds with the series sqrt(2y)(1 + sqrt(2y)/3) near zero and the
    iterated fixed point y + log(1 + .) elsewhere, then applies Newton
    steps; the residual after four steps is far below 1e-12 relative.
    """
    y = np.asarray(y, dtype=float)
    w = np.sqrt(2.0 * y)
    z_small = w + w * w / 3.0
    z_big = y + np.log1p(y + np.log1p(y))
    z = np.where(y < 0.5, z_small, z_big)
    for _ in range(4):
        g = z - np.log1p(z) - y
        # g'(z) = z / (1 + z); guard the removable z = 0 point.
        denom = np.where(z > 0.0, z, 1.0)
        z = np.maximum(z - g * (1.0 + z) / denom, 0.0)
    return z


@dataclass(frozen=True)
class Erlang2:
    """Erlang(2, beta) inter-arrival times: density beta^2 t exp(-beta t)."""

    beta: float

    def __post_init__(self):
        if not (self.beta > 0.0) or not math.isfinite(self.beta):
            raise InputError(f"arrival rate beta must be positive, got {self.beta!r}")

    @property
    def mean(self) -> float:
        return 2.0 / self.beta

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t >= 0.0, self.beta**2 * t * np.exp(-self.beta * t), 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        bt = self.beta * np.maximum(t, 0.0)
        out = np.where(t >= 0.0, 1.0 - np.exp(-bt) * (1.0 + bt), 0.0)
        return float(out) if out.ndim == 0 else out

    def ppf(self, v):
        """Quantile via Newton on the cdf with a bisection fallback."""
        scalar = np.isscalar(v) or np.asarray(v).ndim == 0
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if np.any((v < 0.0) | (v >= 1.0)):
            raise InputError("arrival quantile needs v in [0, 1)")
        y = -np.log1p(-v)
        z = _erlang2_z_from_y(y)
        t = z / self.beta
        # Newton polish on F directly; falls back to bisection for any
        # element that has not met tolerance (not expected in practice).
        for _ in range(3):
            resid = self.cdf(t) - v
            if np.all(np.abs(resid) <= _ERLANG_PPF_TOL):
                break
            pdf = np.maximum(self.pdf(t), 1e-300)
            t = np.maximum(t - resid / pdf, 0.0)
        bad = np.abs(self.cdf(t) - v) > _ERLANG_PPF_TOL
        if np.any(bad):
            t[bad] = [self._ppf_bisect(float(vi)) for vi in v[bad]]
        return float(t[0]) if scalar else t

    def _ppf_bisect(self, v: float) -> float:
        lo, hi = 0.0, 1.0
        while self.cdf(hi) < v:
            hi *= 2.0
        for _ in range(_ERLANG_PPF_MAXIT):
            mid = 0.5 * (lo + hi)
            if self.cdf(mid) < v:
                lo = mid
            else:
                hi = mid
            if hi - lo <= _ERLANG_PPF_TOL * max(1.0, hi):
                break
        return 0.5 * (lo + hi)


InterArrival = Union[ExpPoisson, Erlang2]


@dataclass(frozen=True)
class ModelSpec:
    """Full model: premium rate, claim law, arrival law, FGM dependence.

    Construction enforces the positive loading (net profit) condition
    c * E[W] > E[X]; without it ruin is certain and the solvers'
    assumptions fail.
    """

    c: float
    claim: ExpClaim
    arrival: InterArrival
    copula: FgmParam

    def __post_init__(self):
        if not (self.c > 0.0) or not math.isfinite(self.c):
            raise InputError(f"premium rate c must be positive, got {self.c!r}")
        if self.c * self.arrival.mean <= self.claim.mean:
            raise LoadingError(
                "positive loading violated: c * E[W] = "
                f"{self.c * self.arrival.mean:.6g} <= E[X] = {self.claim.mean:.6g}"
            )

    @property
    def theta(self) -> float:
        return self.copula.theta

    @property
    def m1(self) -> float:
        return self.claim.mean


def fgm_cdf(u, v, theta: Union[float, FgmParam]):
    """FGM copula C(u, v) = u v + theta u v (1-u)(1-v) on [0, 1]^2."""
    th = _theta_of(theta)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)) or np.any((v < 0.0) | (v > 1.0)):
        raise InputError("copula arguments must lie in [0, 1]")
    out = u * v * (1.0 + th * (1.0 - u) * (1.0 - v))
    return float(out) if out.ndim == 0 else out


def fgm_density(u, v, theta: Union[float, FgmParam]):
    """FGM copula density 1 + theta (1-2u)(1-2v); nonnegative for |theta|<=1."""
    th = _theta_of(theta)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)) or np.any((v < 0.0) | (v > 1.0)):
        raise InputError("copula arguments must lie in [0, 1]")
    out = 1.0 + th * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)
    return float(out) if out.ndim == 0 else out


def joint_density(x, t, model: ModelSpec):
    """Joint density of (claim amount, preceding inter-claim time).

    f(x, t) = f_X(x) f_W(t) [1 + theta (1 - 2 F_X(x)) (1 - 2 F_W(t))]
    on the nonnegative quadrant.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x < 0.0) or np.any(t < 0.0):
        raise InputError("joint density arguments must be nonnegative")
    fx = model.claim.pdf(x)
    fw = model.arrival.pdf(t)
    corr = 1.0 + model.theta * (1.0 - 2.0 * model.claim.cdf(x)) * (
        1.0 - 2.0 * model.arrival.cdf(t)
    )
    out = np.asarray(fx * fw * corr)
    return float(out) if out.ndim == 0 else out


def h_aux(x, claim: ExpClaim):
    """Auxiliary claim density h(x) = f_X(x)(1 - 2 F_X(x)).

    For the exponential claim this is 2 alpha e^{-2 alpha x} - alpha
    e^{-alpha x}: a signed combination of two exponentials that integrates
    to zero and changes sign at the claim median.
    """
    a = claim.alpha
    x = np.asarray(x, dtype=float)
    out = np.where(
        x >= 0.0, 2.0 * a * np.exp(-2.0 * a * x) - a * np.exp(-a * x), 0.0
    )
    return float(out) if out.ndim == 0 else out


def k_aux(t, arrival: InterArrival):
    """Auxiliary arrival density k(t) = f_W(t)(1 - 2 F_W(t))."""
    t = np.asarray(t, dtype=float)
    out = np.asarray(arrival.pdf(t) * (1.0 - 2.0 * arrival.cdf(t)))
    return float(out) if out.ndim == 0 else out


def f_tilde(s, claim: ExpClaim):
    """Laplace transform of f_X at s: alpha / (alpha + s)."""
    a = claim.alpha
    s = np.asarray(s)
    if np.any(np.abs(s + a) < 1e-12 * max(1.0, a)):
        raise InputError("transform pole: s = -alpha")
    out = a / (a + s)
    return complex(out) if out.ndim == 0 else out


def h_tilde(s, claim: ExpClaim):
    """Laplace transform of h at s: 2a/(2a+s) - a/(a+s) = a s / ((a+s)(2a+s))."""
    a = claim.alpha
    s = np.asarray(s)
    if np.any(np.abs(s + a) < 1e-12 * max(1.0, a)) or np.any(
        np.abs(s + 2.0 * a) < 1e-12 * max(1.0, a)
    ):
        raise InputError("transform pole: s in {-alpha, -2 alpha}")
    out = 2.0 * a / (2.0 * a + s) - a / (a + s)
    return complex(out) if out.ndim == 0 else out


def f_tilde_rational(claim: ExpClaim) -> RationalFn:
    """Exact rational form alpha / (alpha + s)."""
    a = claim.alpha
    return RationalFn(Polynomial((a,)), Polynomial((a, 1.0)))


def h_tilde_rational(claim: ExpClaim) -> RationalFn:
    """Exact rational form alpha s / ((alpha + s)(2 alpha + s))."""
    a = claim.alpha
    den = Polynomial((a, 1.0)) * Polynomial((2.0 * a, 1.0))
    return RationalFn(Polynomial((0.0, a)), den)


def conditional_grade(p, a):
    """Solve g + a g(1 - g) = p for the grade g in [0, 1].

    This inverts the conditional copula CDF of the claim grade given the
    arrival grade, where a = theta (1 - 2 v).  The quadratic is solved in
    the subtraction-free branch g = 2p / (1 + a + sqrt((1+a)^2 - 4 a p)),
    which stays stable as a -> 0; |a| < 1e-12 short-circuits to g = p.
    """
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    disc = np.sqrt(np.maximum((1.0 + a) ** 2 - 4.0 * a * p, 0.0))
    denom = 1.0 + a + disc
    small = np.abs(a) < 1e-12
    out = np.where(small, p, 2.0 * p / np.where(denom != 0.0, denom, 1.0))
    return float(out) if out.ndim == 0 else out


def sample_pairs(model: ModelSpec, rng: np.random.Generator, n: int):
    """Draw n dependent (w, x) pairs by conditional inversion.

    Steps: v ~ U(0,1) gives w = F_W^{-1}(v); p ~ U(0,1) gives the claim
    grade from the conditional copula, and x = F_X^{-1}(grade).
    """
    if n < 0:
        raise InputError("sample count must be nonnegative")
    v = rng.random(n)
    w = model.arrival.ppf(v)
    p = rng.random(n)
    a = model.theta * (1.0 - 2.0 * v)
    g = conditional_grade(p, a)
    x = -np.log1p(-g) / model.claim.alpha
    return w, x


def sample_pair(model: ModelSpec, rng: np.random.Generator) -> tuple[float, float]:
    """Draw one dependent (inter-claim time, claim amount) pair."""
    w, x = sample_pairs(model, rng, 1)
    return float(w[0]), float(x[0])

"""Survival probabilities for the dependent compound Poisson model.

The survival probability phi(u) of the surplus process with exponential
inter-claim times satisfies a second-order integro-differential equation
whose Laplace transform is rational once the claim transforms are cleared.
With f~ = alpha/(alpha+s) and h~ = alpha s/((alpha+s)(2 alpha+s)), the
cleared denominator is the quartic

    D(s) = (c^2 s^2 - 3 lam c s + 2 lam^2)(alpha+s)(2 alpha+s)
           - 2 lam^2 alpha (2 alpha+s) + lam c alpha s (2 alpha+s)
           + theta lam c alpha s^2

with D(0) = 0, and the numerator is affine in the unknown phi(0):

    N(s) = phi(0) c^2 s (alpha+s)(2 alpha+s)
           + (-2 lam c + 2 lam^2 m1)(alpha+s)(2 alpha+s).

phi(0) is pinned by boundedness: the transform must be analytic in the
right half-plane, so the numerator has to vanish at every root of D with
positive real part.  Partial fractions over the remaining poles then give
phi(u) in closed form as a constant plus decaying exponentials; the
constant equals N(0)/D'(0) = 1 identically, which is checked rather than
assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, StructuralError
from .model import ExpPoisson, ModelSpec
from .polyexp import (
    ExpSum,
    ParametricRational,
    Polynomial,
    RootClass,
    RootSet,
    partial_fractions,
    poly_roots,
)

__all__ = ["ClassicalSolution", "classical_lt", "solve_phi0", "survival_classical"]

# Boundary-value candidates from distinct growing roots must agree to this
# relative spread; disagreement means the transform assembly is wrong.
_PHI0_SPREAD_TOL = 1e-6

# Residues below this relative threshold are structural zeros: eliminated
# growing poles and the spurious -2 alpha pole the clearing introduces at
# theta = 0.
_RESIDUE_DROP_REL = 1e-8

# The zero-pole residue equals 1 analytically; the assembled value must
# agree to this tolerance.
_CONSTANT_TOL = 1e-8


def classical_lt(model: ModelSpec) -> ParametricRational:
    """Cleared Laplace transform of phi for exponential inter-claim times.

    Returns the transform as a ratio with numerator affine in phi(0); the
    denominator constant term, zero by construction, is snapped exactly.
    """
    if not isinstance(model.arrival, ExpPoisson):
        raise InputError("classical solver needs exponential inter-claim times")
    a = model.claim.alpha
    lam = model.arrival.lam
    c = model.c
    th = model.theta
    s = Polynomial((0.0, 1.0))
    q = Polynomial((a, 1.0)) * Polynomial((2.0 * a, 1.0))
    den = (
        Polynomial((2.0 * lam**2, -3.0 * lam * c, c**2)) * q
        - (2.0 * lam**2 * a) * Polynomial((2.0 * a, 1.0))
        + (lam * c * a) * (s * Polynomial((2.0 * a, 1.0)))
        + (th * lam * c * a) * Polynomial((0.0, 0.0, 1.0))
    ).shifted_zero_constant()
    num_const = (-2.0 * lam * c + 2.0 * lam**2 * model.m1) * q
    num_slope = (c**2) * (s * q)
    return ParametricRational(num_const, num_slope, den)


def _eliminate_growing(lt: ParametricRational, roots: RootSet, spread_tol: float):
    """Parameter value killing the numerator at every growing root.

    Each growing root g yields the candidate -num_const(g)/num_slope(g);
    candidates must agree to ``spread_tol`` relative spread and their mean
    is returned together with the candidate list.
    """
    growing = roots.distinct(RootClass.GROWING)
    if not growing:
        raise StructuralError("no growing denominator root to eliminate")
    cands = []
    for r in growing:
        slope = complex(lt.num_slope(r.value))
        if slope == 0:
            raise StructuralError(f"degenerate elimination at root {r.value!r}")
        cands.append(-complex(lt.num_const(r.value)) / slope)
    vals = np.asarray(cands)
    center = float(np.mean(vals.real))
    spread = float(np.max(np.abs(vals - center)))
    if spread > spread_tol * max(1.0, abs(center)):
        raise StructuralError(
            f"growing-root eliminations disagree: spread {spread:.3e} "
            f"around {center:.6g}"
        )
    return center, tuple(cands)


def _collect_terms(pairs, roots: RootSet, expected_constant: float | None):
    """Split (pole, residue) pairs into a constant and decaying terms.

    Growing poles must carry negligible residue (the elimination already
    zeroed them); negligible decaying residues are dropped as spurious
    clearing artifacts.  Terms come back ordered slowest decay first.
    """
    by_class = {r.value: r.klass for r in roots.distinct()}
    scale = max(abs(res) for _, res in pairs)
    constant = 0.0
    terms = []
    for pole, res in pairs:
        klass = by_class[pole]
        if klass is RootClass.ZERO:
            if abs(res.imag) > 1e-9 * max(1.0, abs(res)):
                raise StructuralError("zero pole produced a complex constant")
            constant += res.real
        elif abs(res) <= _RESIDUE_DROP_REL * scale:
            continue
        elif klass is RootClass.GROWING:
            raise StructuralError(
                f"growing pole {pole!r} kept residue {res!r} after elimination"
            )
        else:
            terms.append((res, pole))
    if expected_constant is not None and abs(constant - expected_constant) > max(
        _CONSTANT_TOL, _CONSTANT_TOL * abs(expected_constant)
    ):
        raise StructuralError(
            f"zero-pole residue {constant!r} differs from the expected "
            f"constant {expected_constant!r}"
        )
    terms.sort(key=lambda t: -t[1].real)
    return constant, tuple(terms)


@dataclass(frozen=True)
class ClassicalSolution:
    """Closed-form survival probability for the compound Poisson model.

    Attributes:
        model: Input model.
        phi0: Survival probability at zero initial surplus.
        phi: Exponential-sum form of phi(u), valid for u >= 0.
        roots: Roots of the cleared transform denominator.
        phi0_candidates: Per-growing-root elimination values (diagnostic;
            they agree to the spread tolerance whenever solving succeeds).
    """

    model: ModelSpec
    phi0: float
    phi: ExpSum
    roots: RootSet
    phi0_candidates: tuple[complex, ...]

    def __call__(self, u):
        return self.phi(u)


def solve_phi0(model: ModelSpec) -> float:
    """Survival probability at zero surplus, via growing-root elimination."""
    lt = classical_lt(model)
    roots = poly_roots(lt.den)
    phi0, _ = _eliminate_growing(lt, roots, _PHI0_SPREAD_TOL)
    return phi0


def survival_classical(model: ModelSpec) -> ClassicalSolution:
    """Closed-form phi(u) for the dependent compound Poisson model.

    Raises:
        InputError: If the arrival law is not exponential.
        StructuralError: If root elimination or inversion fails one of the
            internal consistency gates.
    """
    lt = classical_lt(model)
    roots = poly_roots(lt.den)
    phi0, cands = _eliminate_growing(lt, roots, _PHI0_SPREAD_TOL)
    if not (0.0 < phi0 < 1.0):
        raise StructuralError(f"survival at zero fell outside (0, 1): {phi0!r}")
    pairs = partial_fractions(lt.with_param(phi0), roots)
    constant, terms = _collect_terms(pairs, roots, expected_constant=1.0)
    phi = ExpSum(constant, terms)
    return ClassicalSolution(model, phi0, phi, roots, cands)

"""Polynomial algebra, rational functions, and exponential-sum inversion.

The survival solvers work with Laplace transforms that are rational in s
after clearing denominators.  This module supplies the shared machinery:

* ``Polynomial``: dense real polynomials with ascending coefficients.
* ``RationalFn`` and ``ParametricRational``: ratios of polynomials, the
  latter with a numerator that is affine in one scalar parameter.
* ``poly_roots``: companion-matrix root finding with Newton polishing,
  multiplicity clustering, conjugate symmetrization, and sign-of-real-part
  classification.
* ``partial_fractions`` / ``ExpSum``: simple-pole expansion and the
  resulting inverse transform, a constant plus a sum of complex
  exponentials closed under conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, StructuralError, UnsupportedStructureError

__all__ = [
    "Polynomial",
    "RationalFn",
    "ParametricRational",
    "RootClass",
    "Root",
    "RootSet",
    "poly_roots",
    "partial_fractions",
    "ExpSum",
    "expsum_eval",
    "invert_rational",
]

# Classification tolerance: |root| below this is the zero root, and the
# real part must clear it before a root counts as growing or decaying.
ZERO_CLASS_EPS = 1e-9

# Conjugate partners must agree to this tolerance before symmetrization.
CONJUGATE_TOL = 1e-9

# Eigenvalue output of a multiple root scatters like eps**(1/m); this
# relative radius merges those clusters while keeping genuinely distinct
# roots (separated by ~1e-1 in the solver pipelines) apart.
_CLUSTER_TOL = 2e-5


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial with ascending coefficients c[0] + c[1] s + ...

    Trailing zero coefficients are stripped at construction so that the
    leading coefficient is nonzero for any nonzero polynomial.
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float]):
        cs = [float(c) for c in coeffs]
        if not cs:
            raise InputError("polynomial needs at least one coefficient")
        while len(cs) > 1 and cs[-1] == 0.0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    @property
    def coeff_scale(self) -> float:
        return max(abs(c) for c in self.coeffs)

    @classmethod
    def from_roots(cls, roots: Sequence[complex], leading: float = 1.0) -> "Polynomial":
        """Monic-from-roots constructor scaled by ``leading``.

        Complex roots must occur in conjugate pairs so the product has
        real coefficients.
        """
        desc = np.atleast_1d(np.poly(np.asarray(roots, dtype=complex)))
        if np.max(np.abs(desc.imag)) > 1e-9 * max(1.0, np.max(np.abs(desc))):
            raise StructuralError("roots are not closed under conjugation")
        return cls((leading * desc.real)[::-1])

    def __call__(self, s):
        return np.polyval(self.coeffs[::-1], s)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return Polynomial(a)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(np.asarray(self.coeffs) * float(other))

    __rmul__ = __mul__

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((0.0,))
        cs = np.asarray(self.coeffs)
        return Polynomial(cs[1:] * np.arange(1, len(cs)))

    def shifted_zero_constant(self, rel_tol: float = 1e-9) -> "Polynomial":
        """Return a copy with the constant coefficient snapped to zero.

        Used by the solvers whose cleared denominators vanish at s = 0 by
        construction; the assembled constant must already be negligible.
        """
        c0 = self.coeffs[0]
        if abs(c0) > rel_tol * self.coeff_scale:
            raise StructuralError(
                f"constant coefficient {c0!r} is not negligible against scale "
                f"{self.coeff_scale!r}"
            )
        return Polynomial((0.0,) + self.coeffs[1:])


class RootClass(Enum):
    """Sign-of-real-part classification of a transform pole."""

    ZERO = "zero"
    DECAYING = "decaying"
    GROWING = "growing"


@dataclass(frozen=True)
class Root:
    value: complex
    multiplicity: int
    klass: RootClass


@dataclass(frozen=True)
class RootSet:
    """Roots of a real polynomial with multiplicities and classes.

    Invariant: multiplicities sum to the source polynomial degree, and
    non-real roots occur in exactly conjugate pairs.
    """

    roots: tuple[Root, ...]
    source_degree: int

    def values(self, klass: RootClass | None = None) -> list[complex]:
        return [r.value for r in self.roots for _ in range(r.multiplicity)
                if klass is None or r.klass is klass]

    def distinct(self, klass: RootClass | None = None) -> list[Root]:
        return [r for r in self.roots if klass is None or r.klass is klass]

    @property
    def max_multiplicity(self) -> int:
        return max(r.multiplicity for r in self.roots)


def _classify(value: complex) -> RootClass:
    if abs(value) < ZERO_CLASS_EPS:
        return RootClass.ZERO
    if value.real < -ZERO_CLASS_EPS:
        return RootClass.DECAYING
    # Purely oscillatory poles (|Re| <= eps, |value| >= eps) do not vanish
    # at infinity, so they are grouped with the growing class.
    return RootClass.GROWING


def _polish(p: Polynomial, z: complex, multiplicity: int) -> complex:
    """Safeguarded Newton steps on the (m-1)th derivative."""
    q = p
    for _ in range(multiplicity - 1):
        q = q.derivative()
    dq = q.derivative()
    for _ in range(2):
        fz = complex(q(z))
        dfz = complex(dq(z))
        if dfz == 0:
            break
        step = z - fz / dfz
        if abs(q(step)) <= abs(fz):
            z = step
    return z


def poly_roots(p: Polynomial, cluster_tol: float = _CLUSTER_TOL) -> RootSet:
    """Roots via companion-matrix eigenvalues with polishing.

    Nearby eigenvalues (within ``cluster_tol`` relative) are merged into a
    single root of higher multiplicity, non-real roots are symmetrized into
    exact conjugate pairs, and each root is classified by the sign of its
    real part with tolerance 1e-9.
    """
    if p.degree < 1:
        raise InputError("root finding needs degree >= 1")
    raw = np.roots(p.coeffs[::-1])

    # Greedy union of eigenvalues within the cluster radius.
    clusters: list[list[complex]] = []
    for z in sorted(raw, key=lambda w: (w.real, w.imag)):
        for cl in clusters:
            if abs(z - cl[0]) <= cluster_tol * max(1.0, abs(z), abs(cl[0])):
                cl.append(z)
                break
        else:
            clusters.append([complex(z)])

    polished: list[tuple[complex, int]] = []
    for cl in clusters:
        center = complex(np.mean(cl))
        polished.append((_polish(p, center, len(cl)), len(cl)))

    # Realify near-real roots, then enforce exact conjugate pairing.
    out: list[tuple[complex, int]] = []
    for z, m in polished:
        if abs(z.imag) <= CONJUGATE_TOL * max(1.0, abs(z)):
            out.append((complex(z.real, 0.0), m))
        else:
            out.append((z, m))
    paired: list[tuple[complex, int]] = []
    used = [False] * len(out)
    for i, (z, m) in enumerate(out):
        if used[i]:
            continue
        used[i] = True
        if z.imag == 0.0:
            paired.append((z, m))
            continue
        partner = None
        for j in range(i + 1, len(out)):
            if used[j]:
                continue
            w, mw = out[j]
            if mw == m and abs(w - z.conjugate()) <= CONJUGATE_TOL * max(1.0, abs(z)):
                partner = j
                break
        if partner is None:
            raise StructuralError(f"complex root {z!r} has no conjugate partner")
        used[partner] = True
        w = out[partner][0]
        sym = complex(0.5 * (z.real + w.real), 0.5 * (z.imag - w.imag))
        if sym.imag < 0:
            sym = sym.conjugate()
        paired.append((sym, m))
        paired.append((sym.conjugate(), m))

    roots = tuple(Root(z, m, _classify(z)) for z, m in paired)
    total = sum(r.multiplicity for r in roots)
    if total != p.degree:
        raise StructuralError(
            f"root multiplicities sum to {total}, expected degree {p.degree}"
        )
    return RootSet(roots, p.degree)


@dataclass(frozen=True)
class RationalFn:
    """Ratio of two real polynomials."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero:
            raise InputError("rational function needs a nonzero denominator")

    def __call__(self, s):
        return self.num(s) / self.den(s)

    def cancelled(self, tol: float = 1e-9) -> "RationalFn":
        """Remove numerator/denominator root pairs that coincide within tol.

        Rebuilds both polynomials from their surviving roots; intended for
        cosmetic simplification, the solvers rely on residue thresholds
        instead.
        """
        if self.num.is_zero or self.num.degree == 0 or self.den.degree == 0:
            return self
        nroots = list(np.roots(self.num.coeffs[::-1]))
        droots = list(np.roots(self.den.coeffs[::-1]))
        kept_d = []
        for d in droots:
            hit = None
            for i, nz in enumerate(nroots):
                if abs(d - nz) <= tol * max(1.0, abs(d)):
                    hit = i
                    break
            if hit is None:
                kept_d.append(d)
            else:
                nroots.pop(hit)
        if len(kept_d) == len(droots):
            return self
        lead_n = self.num.coeffs[-1]
        lead_d = self.den.coeffs[-1]
        num = Polynomial.from_roots(_pair_up(nroots), lead_n) if nroots else Polynomial((lead_n,))
        den = Polynomial.from_roots(_pair_up(kept_d), lead_d) if kept_d else Polynomial((lead_d,))
        return RationalFn(num, den)


def _pair_up(roots: Sequence[complex]) -> list[complex]:
    """Symmetrize a conjugate-closed root list against rounding noise."""
    out = []
    left = list(roots)
    while left:
        z = left.pop()
        if abs(z.imag) <= 1e-9 * max(1.0, abs(z)):
            out.append(complex(z.real, 0.0))
            continue
        best, dist = None, np.inf
        for i, w in enumerate(left):
            d = abs(w - z.conjugate())
            if d < dist:
                best, dist = i, d
        if best is None or dist > 1e-7 * max(1.0, abs(z)):
            raise StructuralError("cannot pair complex roots for real rebuild")
        w = left.pop(best)
        sym = complex(0.5 * (z.real + w.real), 0.5 * (z.imag - w.imag))
        out.extend([sym, sym.conjugate()])
    return out


@dataclass(frozen=True)
class ParametricRational:
    """Rational function whose numerator is affine in one parameter.

    Represents (num_const(s) + p * num_slope(s)) / den(s) for a scalar
    parameter p, which the survival solvers use with p equal to the
    unknown survival probability at zero.
    """

    num_const: Polynomial
    num_slope: Polynomial
    den: Polynomial

    def with_param(self, p: float) -> RationalFn:
        return RationalFn(self.num_const + float(p) * self.num_slope, self.den)

    def __call__(self, s, p: float):
        return (self.num_const(s) + float(p) * self.num_slope(s)) / self.den(s)


def partial_fractions(
    f: RationalFn, roots: RootSet | None = None
) -> tuple[tuple[complex, complex], ...]:
    """Simple-pole partial fractions of a strictly proper rational function.

    Returns (pole, residue) pairs with residues num(pole) / den'(pole).
    Repeated poles are rejected; the solvers never produce them on their
    supported inputs.
    """
    if f.num.degree >= f.den.degree:
        raise InputError("partial fractions require deg(num) < deg(den)")
    if roots is None:
        roots = poly_roots(f.den)
    if roots.max_multiplicity > 1:
        raise UnsupportedStructureError("repeated poles are not supported")
    dden = f.den.derivative()
    pairs = []
    for r in roots.distinct():
        res = complex(f.num(r.value)) / complex(dden(r.value))
        pairs.append((r.value, res))
    return tuple(pairs)


@dataclass(frozen=True)
class ExpSum:
    """constant + sum of coef * exp(rate * u) with conjugate-closed terms."""

    constant: float
    terms: tuple[tuple[complex, complex], ...]

    def __post_init__(self):
        unmatched = []
        for coef, rate in self.terms:
            if abs(rate.imag) <= CONJUGATE_TOL * max(1.0, abs(rate)):
                if abs(coef.imag) > 1e-9 * max(1.0, abs(coef)):
                    raise StructuralError(
                        f"real-rate term has complex coefficient {coef!r}"
                    )
                continue
            unmatched.append((coef, rate))
        while unmatched:
            coef, rate = unmatched.pop()
            partner = None
            for i, (c2, r2) in enumerate(unmatched):
                if (
                    abs(r2 - rate.conjugate()) <= CONJUGATE_TOL * max(1.0, abs(rate))
                    and abs(c2 - coef.conjugate()) <= 1e-7 * max(1.0, abs(coef))
                ):
                    partner = i
                    break
            if partner is None:
                raise StructuralError(
                    f"complex term with rate {rate!r} lacks a conjugate partner"
                )
            unmatched.pop(partner)

    def __call__(self, u):
        return expsum_eval(self, u)


def expsum_eval(e: ExpSum, u):
    """Evaluate an ExpSum at u (scalar or array), returning real values.

    The conjugate-pair imaginary residue must stay below 1e-10 relative to
    the magnitude of the result; it is checked and discarded.
    """
    uu = np.asarray(u, dtype=float)
    total = np.full(uu.shape, complex(e.constant), dtype=complex)
    for coef, rate in e.terms:
        total = total + coef * np.exp(rate * uu)
    scale = np.maximum(1.0, np.abs(total.real))
    if np.any(np.abs(total.imag) > 1e-10 * scale):
        raise StructuralError("imaginary residue exceeds tolerance in ExpSum eval")
    out = total.real
    if np.isscalar(u) or uu.ndim == 0:
        return float(out)
    return out


def invert_rational(f: RationalFn, roots: RootSet | None = None) -> ExpSum:
    """Inverse Laplace transform of a strictly proper simple-pole rational.

    Poles classified as zero feed the constant; every other pole carries a
    coef * exp(pole * u) term.
    """
    if roots is None:
        roots = poly_roots(f.den)
    pairs = partial_fractions(f, roots)
    by_class = {r.value: r.klass for r in roots.distinct()}
    constant = 0.0
    terms = []
    for pole, res in pairs:
        if by_class[pole] is RootClass.ZERO:
            if abs(res.imag) > 1e-9 * max(1.0, abs(res)):
                raise StructuralError("zero pole produced a complex constant")
            constant += res.real
        else:
            terms.append((res, pole))
    return ExpSum(constant, tuple(terms))

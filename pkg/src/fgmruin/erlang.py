"""Survival probabilities for the dependent Erlang(2) renewal risk model.

With Erlang(2, beta) inter-claim times the survival probability delta(u)
satisfies a second-order equation whose Laplace transform involves the
claim transforms f~ and h~ together with kernel corrections carrying
powers of 1/(2 beta - c s).  Clearing all denominators yields a degree-7
identity with denominator

    D(s) = (c^2 s^2 - 2 beta c s + beta^2)(2 beta - c s)^3 (alpha+s)(2 alpha+s)
           - beta^2 alpha (2 alpha+s)(2 beta - c s)^3
           - theta alpha s [beta^2 (2 beta - c s)^3 + 4 beta^5
                            - sigma 6 beta^4 (2 beta - c s)]

and numerator

    N(s) = delta(0) c^2 s (2 beta - c s)^3 (alpha+s)(2 alpha+s)
           + w (2 beta - c s)^3 (alpha+s)(2 alpha+s)
           + theta (alpha+s)(2 alpha+s)
             [k0 + k1 (2 beta - c s) + k2 (2 beta - c s)^2]

where w collects first-derivative boundary data of delta at zero and the
quadratic bracket collects the constants introduced by the operator
responsible for the 1/(2 beta - c s) kernels.  The sign sigma of the
last kernel correction in D is ambiguous between two candidate
conventions, kept as ``SignVariant.PLUS`` (sigma = +1) and
``SignVariant.MINUS`` (sigma = -1); simulation singles out PLUS (see
``sign_variant_report``), so it is the default.

D has a zero root, two roots with negative real part, and four with
positive real part.  Boundedness of delta forces a vanishing coefficient
at every growing root and delta(inf) = 1 pins the zero-pole residue:
five linear conditions in the five unknowns delta(0), w, k0, k1, k2.
``GrowthElimination`` selects how they are imposed:

  * INDIVIDUAL (default): solve the five-by-five system exactly so each
    growing coefficient vanishes separately; the result agrees with
    simulation to Monte Carlo precision.
  * POOLED: freeze w at its independence value -2 beta c + beta^2 m1,
    drop the quadratic bracket, and require only that the growing
    residues sum to zero, which is the same as asking the truncated
    inversion to reproduce its own initial value.  The neglected
    boundary terms bias delta by a few parts in a thousand near
    |theta| = 1.  This mode is the convention behind the bundled
    worked-example reference values and is kept for reproducing them
    and for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InputError, StructuralError
from .model import Erlang2, ModelSpec
from .polyexp import (
    ExpSum,
    ParametricRational,
    Polynomial,
    RationalFn,
    RootClass,
    RootSet,
    partial_fractions,
    poly_roots,
)

__all__ = [
    "SignVariant",
    "DEFAULT_SIGN_VARIANT",
    "GrowthElimination",
    "DEFAULT_ELIMINATION",
    "ErlangSolution",
    "VariantRow",
    "VariantReport",
    "erlang_lt",
    "solve_delta0",
    "survival_erlang2",
    "sign_variant_report",
    "select_sign_variant",
]

# Below this |theta| the dependence corrections sit under double-precision
# noise and the independent-claims clearing (which avoids a triple kernel
# root) is exact for practical purposes.
_SMALL_THETA = 1e-9

# Surviving growing-term coefficients (the pooled aggregate, or every
# individual residue) must vanish up to roundoff after elimination.
_AGGREGATE_TOL = 1e-7

# The inverted solution must reproduce delta(0) at u = 0.
_CONSISTENCY_TOL = 1e-5

# The zero-pole residue equals 1 analytically for a consistent inversion.
_CONSTANT_TOL = 1e-6

# Spurious clearing poles carry residues at roundoff level only.
_RESIDUE_DROP_REL = 1e-8

# Equilibrated boundary-constant systems must be solved to this relative
# accuracy, and their solutions must be real to this relative level.
_SYSTEM_TOL = 1e-8
_REALNESS_TOL = 1e-7


class SignVariant(Enum):
    """Sign of the 6 beta^4 kernel correction in the transform denominator."""

    PLUS = "plus"
    MINUS = "minus"

    @property
    def sigma(self) -> float:
        return 1.0 if self is SignVariant.PLUS else -1.0


DEFAULT_SIGN_VARIANT = SignVariant.PLUS


class GrowthElimination(Enum):
    """How the growing exponentials of the inversion are eliminated.

    INDIVIDUAL recovers the boundary constants w, k0, k1, k2 together
    with delta(0) so that every growing coefficient vanishes on its own.
    POOLED freezes the boundary constants at their independence values
    and zeroes only the sum of the growing residues, reproducing the
    bundled worked-example reference values at the cost of a small bias.
    """

    INDIVIDUAL = "individual"
    POOLED = "pooled"


DEFAULT_ELIMINATION = GrowthElimination.INDIVIDUAL


def _cleared_parts(model: ModelSpec, variant: SignVariant):
    """Denominator and numerator basis columns of the cleared transform.

    The basis columns multiply, in order, delta(0), w, k0, k1, k2.  For
    |theta| below 1e-9 the theta corrections are dropped and the
    transform is cleared by (alpha + s) alone, which keeps the kernel
    root at 2 beta / c out of the denominator entirely; only the
    delta(0) and w columns remain in that branch.
    """
    if not isinstance(model.arrival, Erlang2):
        raise InputError("Erlang solver needs Erlang(2) inter-claim times")
    a = model.claim.alpha
    beta = model.arrival.beta
    c = model.c
    th = model.theta
    s = Polynomial((0.0, 1.0))
    base2 = Polynomial((beta**2, -2.0 * beta * c, c**2))
    lin_a = Polynomial((a, 1.0))

    if abs(th) < _SMALL_THETA:
        den = (base2 * lin_a - Polynomial((beta**2 * a,))).shifted_zero_constant()
        return den, ((c**2) * (s * lin_a), lin_a)

    lin_2a = Polynomial((2.0 * a, 1.0))
    ker = Polynomial((2.0 * beta, -c))
    ker3 = ker * ker * ker
    cof = ker3 * lin_a * lin_2a
    q = lin_a * lin_2a
    den = (
        base2 * cof
        - (beta**2 * a) * (lin_2a * ker3)
        - (th * a)
        * (
            s
            * (
                (beta**2) * ker3
                + Polynomial((4.0 * beta**5,))
                - (variant.sigma * 6.0 * beta**4) * ker
            )
        )
    ).shifted_zero_constant()
    basis = (
        (c**2) * (s * cof),
        cof,
        th * q,
        th * (q * ker),
        th * (q * ker * ker),
    )
    return den, basis


def _independence_w(model: ModelSpec) -> float:
    # Value w takes when claim sizes and inter-claim times are independent.
    beta = model.arrival.beta
    return -2.0 * beta * model.c + beta**2 * model.m1


def erlang_lt(
    model: ModelSpec, variant: SignVariant = DEFAULT_SIGN_VARIANT
) -> ParametricRational:
    """Cleared Laplace transform of delta, affine in delta(0).

    The numerator follows the POOLED convention: w is frozen at its
    independence value and the quadratic boundary bracket is dropped,
    leaving delta(0) as the single free parameter.
    """
    den, basis = _cleared_parts(model, variant)
    return ParametricRational(_independence_w(model) * basis[1], basis[0], den)


def _affine_candidates(
    lt: ParametricRational, roots: RootSet
) -> tuple[complex, ...]:
    """delta(0) demanded by each growing root alone under frozen boundary terms.

    Mutually inconsistent whenever theta != 0 because the frozen terms
    leave per-root defects; the spread measures the pooled-mode bias.
    """
    dden = lt.den.derivative()
    cands = []
    for r in roots.distinct(RootClass.GROWING):
        dv = complex(dden(r.value))
        ns = complex(lt.num_slope(r.value))
        if dv != 0 and ns != 0:
            cands.append(-complex(lt.num_const(r.value)) / ns)
    return tuple(cands)


def _delta0_pooled(lt: ParametricRational, roots: RootSet) -> float:
    """delta(0) from the aggregate zero-sum of growing residues."""
    growing = roots.distinct(RootClass.GROWING)
    if not growing:
        raise StructuralError("no growing denominator root to eliminate")
    dden = lt.den.derivative()
    s_const = 0.0 + 0.0j
    s_slope = 0.0 + 0.0j
    for r in growing:
        dv = complex(dden(r.value))
        if dv == 0:
            raise StructuralError(f"repeated growing root at {r.value!r}")
        s_const += complex(lt.num_const(r.value)) / dv
        s_slope += complex(lt.num_slope(r.value)) / dv
    scale = max(abs(s_const), abs(s_slope))
    if scale == 0 or abs(s_slope) <= 1e-12 * scale:
        raise StructuralError("degenerate aggregate elimination")
    if max(abs(s_const.imag), abs(s_slope.imag)) > _AGGREGATE_TOL * scale:
        raise StructuralError("aggregate residue sums are not real")
    return -s_const.real / s_slope.real


def _boundary_constants(den: Polynomial, basis, roots: RootSet) -> np.ndarray:
    """Solve for (delta(0), w, k...) so every growing coefficient vanishes.

    One equation per growing root plus the zero-pole normalization
    N(0) = D'(0); generically square, solved by least squares otherwise
    with a hard residual gate either way.
    """
    growing = roots.distinct(RootClass.GROWING)
    if not growing:
        raise StructuralError("no growing denominator root to eliminate")
    points = [complex(r.value) for r in growing] + [0.0 + 0.0j]
    rows = np.array([[complex(p(pt)) for p in basis] for pt in points])
    rhs = np.zeros(len(points), dtype=complex)
    rhs[-1] = complex(den.derivative()(0.0))
    row_scale = np.max(np.abs(rows), axis=1)
    if np.any(row_scale == 0.0):
        raise StructuralError("degenerate boundary-constant row")
    rows = rows / row_scale[:, None]
    rhs = rhs / row_scale
    if rows.shape[0] == rows.shape[1]:
        try:
            x = np.linalg.solve(rows, rhs)
        except np.linalg.LinAlgError as exc:
            raise StructuralError(
                f"boundary-constant system is singular: {exc}"
            ) from exc
    else:
        x = np.linalg.lstsq(rows, rhs, rcond=None)[0]
    x_scale = max(1.0, float(np.max(np.abs(x))))
    residual = float(np.max(np.abs(rows @ x - rhs)))
    if residual > _SYSTEM_TOL * x_scale:
        raise StructuralError(
            f"boundary-constant system left residual {residual:.3e}"
        )
    if float(np.max(np.abs(x.imag))) > _REALNESS_TOL * x_scale:
        raise StructuralError("boundary constants are not real")
    return x.real


def _numerator(basis, weights) -> Polynomial:
    num = Polynomial((0.0,))
    for wgt, p in zip(weights, basis):
        num = num + float(wgt) * p
    return num


@dataclass(frozen=True)
class _Assembled:
    """Inversion pieces shared by solve_delta0 and survival_erlang2."""

    roots: RootSet
    delta0: float
    candidates: tuple[complex, ...]
    boundary: tuple[float, ...] | None
    constant: complex
    terms: tuple[tuple[complex, complex], ...]
    growing: tuple[tuple[complex, complex], ...]
    scale: float


def _collect(fraction: RationalFn, roots: RootSet):
    """Classify the partial-fraction expansion by root class."""
    pairs = partial_fractions(fraction, roots)
    by_class = {r.value: r.klass for r in roots.distinct()}
    scale = max(abs(res) for _, res in pairs)
    constant = 0.0 + 0.0j
    growing = []
    terms = []
    for pole, res in pairs:
        klass = by_class[pole]
        if klass is RootClass.ZERO:
            constant += res
        elif klass is RootClass.GROWING:
            growing.append((pole, res))
        elif abs(res) > _RESIDUE_DROP_REL * scale:
            terms.append((res, pole))
    terms.sort(key=lambda t: -t[1].real)
    return constant, tuple(terms), tuple(growing), scale


def _build(
    model: ModelSpec, variant: SignVariant, elimination: GrowthElimination
) -> _Assembled:
    den, basis = _cleared_parts(model, variant)
    roots = poly_roots(den)
    lt = ParametricRational(_independence_w(model) * basis[1], basis[0], den)
    candidates = _affine_candidates(lt, roots)
    if elimination is GrowthElimination.POOLED:
        delta0 = _delta0_pooled(lt, roots)
        boundary = None
        fraction = lt.with_param(delta0)
    else:
        x = _boundary_constants(den, basis, roots)
        delta0 = float(x[0])
        boundary = tuple(float(v) for v in x[1:])
        fraction = RationalFn(_numerator(basis, x), den)
    constant, terms, growing, scale = _collect(fraction, roots)
    return _Assembled(
        roots, delta0, candidates, boundary, constant, terms, growing, scale
    )


def solve_delta0(
    model: ModelSpec,
    variant: SignVariant = DEFAULT_SIGN_VARIANT,
    elimination: GrowthElimination = DEFAULT_ELIMINATION,
) -> tuple[float, float]:
    """Survival probability at zero surplus and its initial-value residual.

    The residual is |delta(0+) - delta(0)| of the inversion with growing
    terms removed.  The solution-shape gates of survival_erlang2 are not
    applied here, so under POOLED elimination even the inconsistent sign
    variant yields a candidate value for comparison reports.  INDIVIDUAL
    elimination can still raise StructuralError when its linear system
    is unsolvable, which happens for the inconsistent variant at some
    theta (more growing roots than boundary unknowns).
    """
    parts = _build(model, variant, elimination)
    at_zero = parts.constant + sum(res for res, _ in parts.terms)
    return parts.delta0, abs(at_zero - parts.delta0)


@dataclass(frozen=True)
class ErlangSolution:
    """Closed-form survival probability for the Erlang(2) renewal model.

    Attributes:
        model: Input model.
        variant: Sign variant the transform was built with.
        elimination: How the growing exponentials were removed.
        delta0: Survival probability at zero initial surplus.
        delta: Exponential-sum form of delta(u) for u >= 0.
        roots: Roots of the cleared transform denominator.
        delta0_candidates: Values demanded by each growing root alone
            with the boundary terms frozen at their independence values;
            their spread is the bias the POOLED mode accepts.
        boundary_constants: (w, k0, k1, k2) recovered by INDIVIDUAL
            elimination (just (w,) in the small-theta branch); None
            under POOLED.
        consistency_residual: |delta(0+) - delta0| of the assembled
            form, the initial-value defect left by elimination.
    """

    model: ModelSpec
    variant: SignVariant
    elimination: GrowthElimination
    delta0: float
    delta: ExpSum
    roots: RootSet
    delta0_candidates: tuple[complex, ...]
    boundary_constants: tuple[float, ...] | None
    consistency_residual: float

    def __call__(self, u):
        return self.delta(u)


def survival_erlang2(
    model: ModelSpec,
    variant: SignVariant = DEFAULT_SIGN_VARIANT,
    elimination: GrowthElimination = DEFAULT_ELIMINATION,
) -> ErlangSolution:
    """Closed-form delta(u) for the dependent Erlang(2) renewal model.

    Raises:
        InputError: If the arrival law is not Erlang(2).
        StructuralError: If the inversion violates an internal check.
            Under POOLED elimination the inconsistent sign variant fails
            the tends-to-1 gate by design; under INDIVIDUAL elimination
            both variants assemble cleanly and sign_variant_report is
            the arbiter between them.
    """
    parts = _build(model, variant, elimination)
    if not (0.0 < parts.delta0 < 1.0):
        raise StructuralError(
            f"survival at zero fell outside (0, 1): {parts.delta0!r}"
        )
    if elimination is GrowthElimination.POOLED:
        growing_sum = sum(res for _, res in parts.growing)
        if abs(growing_sum) > _AGGREGATE_TOL * max(1.0, parts.scale):
            raise StructuralError(
                f"growing residues sum to {growing_sum!r} after elimination"
            )
    else:
        worst = max((abs(res) for _, res in parts.growing), default=0.0)
        if worst > _AGGREGATE_TOL * max(1.0, parts.scale):
            raise StructuralError(
                f"a growing residue of size {worst:.3e} survived elimination"
            )
    if abs(parts.constant.imag) > 1e-9 * max(1.0, abs(parts.constant)):
        raise StructuralError("zero pole produced a complex constant")
    constant = parts.constant.real
    if abs(constant - 1.0) > _CONSTANT_TOL:
        raise StructuralError(
            f"inverted solution tends to {constant!r}, not 1; the "
            f"{variant.value} sign variant is not self-consistent"
        )
    delta = ExpSum(constant, parts.terms)
    residual = abs(delta(0.0) - parts.delta0)
    if residual > _CONSISTENCY_TOL:
        raise StructuralError(
            f"initial-value defect {residual:.3e} exceeds {_CONSISTENCY_TOL:.0e}"
        )
    return ErlangSolution(
        model,
        variant,
        elimination,
        parts.delta0,
        delta,
        parts.roots,
        parts.candidates,
        parts.boundary,
        residual,
    )


@dataclass(frozen=True)
class VariantRow:
    """One sign variant's boundary value against the simulated benchmark.

    Attributes:
        variant: Sign variant the candidate was computed under.
        delta0: Candidate survival probability at zero surplus.
        z_score: (delta0 - simulated) / simulated stderr.
        consistent: Whether |z_score| stayed within the acceptance band.
        elimination: Elimination that produced the candidate.  The exact
            INDIVIDUAL system can be unsolvable for an inconsistent
            variant (at some theta it has more growing roots than
            boundary unknowns); the row then falls back to the POOLED
            candidate so the comparison still shows a number.
    """

    variant: SignVariant
    delta0: float
    z_score: float
    consistent: bool
    elimination: GrowthElimination


@dataclass(frozen=True)
class VariantReport:
    """Simulation adjudication between the two sign variants.

    Attributes:
        model: Input model.
        n: Paths simulated.
        seed: Simulation seed.
        mc_value: Simulated survival probability at zero surplus.
        mc_stderr: Its standard error.
        rows: Per-variant boundary values, z-scores, and verdicts.
        selected: The single consistent variant, or None if the comparison
            was ambiguous (both or neither within the acceptance band).
    """

    model: ModelSpec
    n: int
    seed: int
    mc_value: float
    mc_stderr: float
    rows: tuple[VariantRow, ...]
    selected: SignVariant | None


def sign_variant_report(
    model: ModelSpec,
    n: int = 500_000,
    seed: int = 0,
    z_crit: float = 4.0,
    workers: int = 1,
    elimination: GrowthElimination = DEFAULT_ELIMINATION,
) -> VariantReport:
    """Compare both sign variants against one simulation of delta(0).

    For |theta| below 1e-9 the variants coincide and PLUS is selected
    without simulating.
    """
    from .simulate import estimate_survival

    if abs(model.theta) < _SMALL_THETA:
        value, _ = solve_delta0(model, DEFAULT_SIGN_VARIANT, elimination)
        rows = tuple(
            VariantRow(v, value, 0.0, True, elimination) for v in SignVariant
        )
        return VariantReport(model, 0, seed, math.nan, math.nan, rows,
                             DEFAULT_SIGN_VARIANT)

    est = estimate_survival(model, 0.0, n=n, seed=seed, workers=workers)
    rows = []
    for v in SignVariant:
        used = elimination
        try:
            d0, _ = solve_delta0(model, v, elimination)
        except StructuralError:
            if elimination is GrowthElimination.POOLED:
                raise
            used = GrowthElimination.POOLED
            d0, _ = solve_delta0(model, v, used)
        z = (d0 - est.value) / est.stderr
        rows.append(VariantRow(v, d0, z, bool(abs(z) <= z_crit), used))
    consistent = [r.variant for r in rows if r.consistent]
    selected = consistent[0] if len(consistent) == 1 else None
    return VariantReport(model, n, seed, est.value, est.stderr, tuple(rows),
                         selected)


def select_sign_variant(
    model: ModelSpec,
    n: int = 500_000,
    seed: int = 0,
    workers: int = 1,
    elimination: GrowthElimination = DEFAULT_ELIMINATION,
) -> SignVariant:
    """The single sign variant consistent with simulation.

    Raises:
        StructuralError: If both or neither variant matches the simulated
            boundary value, leaving no unambiguous choice.
    """
    report = sign_variant_report(
        model, n=n, seed=seed, workers=workers, elimination=elimination
    )
    if report.selected is None:
        raise StructuralError(
            "sign variant comparison was ambiguous: "
            + ", ".join(
                f"{r.variant.value} z={r.z_score:+.2f}" for r in report.rows
            )
        )
    return report.selected

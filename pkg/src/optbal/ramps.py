"""Ramp functions: catalog, exact high-order derivatives, and hypothesis checks.

All catalog ramps share the construction

    rho(theta) = f(theta) / (f(theta) + f(1 - theta)),

which forces rho(0) = 0, rho(1) = 1 and the symmetry
rho(theta) + rho(1 - theta) = 1.  The algebraic family uses
f(theta) = theta^k; its endpoint derivatives vanish through order k - 1
only.  The exponential family uses f(theta) = exp(-1/theta); all its
endpoint derivatives vanish, which is the hypothesis behind the
super-algebraic accuracy of the balance procedure.

Derivatives are computed by truncated Taylor arithmetic (exact
recurrences), never by finite differences; differencing is reserved for
test oracles.  Near the endpoints the exponential family underflows in
naive evaluation, so endpoint values and derivatives are returned as
their analytic one-sided limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, DomainError
from .jets import Jet

#: maximum derivative order served by ramp_deriv
MAX_DERIV_ORDER = 12

# family codes shared with the compiled kernels
ALGEBRAIC = 0
EXPONENTIAL = 1
CONSTANT_ONE = 2


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"ramp argument must lie in [0, 1], got {theta}")
    return theta


def _check_order(order: int) -> int:
    order = int(order)
    if order < 0:
        raise DomainError(f"derivative order must be >= 0, got {order}")
    if order > MAX_DERIV_ORDER:
        raise CapabilityError(
            f"ramp derivatives implemented up to order {MAX_DERIV_ORDER}, got {order}"
        )
    return order


class RampSpec:
    """Common interface of the ramp catalog."""

    name: str = "?"

    def eval(self, theta: float) -> float:
        raise NotImplementedError

    def deriv(self, theta: float, order: int) -> float:
        raise NotImplementedError

    def eval_jet(self, theta_jet):
        """Evaluate on a jet-valued argument; used by the slow-field recursion."""
        from .jets import base_value, compose, nilpotency

        if not isinstance(theta_jet, Jet):
            return self.eval(theta_jet)
        theta0 = base_value(theta_jet)
        need = nilpotency(theta_jet)
        derivs = [self.deriv(theta0, m) for m in range(need + 1)]
        return compose(derivs, theta_jet)

    def packed(self):
        """(family_code, k) for the compiled kernels."""
        raise NotImplementedError

    def __repr__(self):
        return f"<ramp {self.name}>"


@dataclass(frozen=True, repr=False)
class AlgebraicRamp(RampSpec):
    """rho built from f(theta) = theta^k; accuracy order limited to k."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"algebraic ramp exponent must be >= 1, got {self.k}")

    @property
    def name(self) -> str:
        return f"algebraic:{self.k}"

    def eval(self, theta: float) -> float:
        theta = _check_theta(theta)
        a = theta ** self.k
        b = (1.0 - theta) ** self.k
        return a / (a + b)

    def _series(self, theta: float, order: int) -> Jet:
        t = Jet.variable(theta, order)
        num = t ** self.k
        den = num + (1.0 - t) ** self.k
        return num / den

    def deriv(self, theta: float, order: int) -> float:
        theta = _check_theta(theta)
        order = _check_order(order)
        if order == 0:
            return self.eval(theta)
        return self._series(theta, order).derivative(order)

    def packed(self):
        return ALGEBRAIC, float(self.k)


@dataclass(frozen=True, repr=False)
class ExponentialRamp(RampSpec):
    """rho built from f(theta) = exp(-1/theta); all endpoint derivatives vanish.

    Evaluated through the equivalent logistic form
    rho = 1 / (1 + exp(u)) with u = 1/theta - 1/(1-theta), picking the
    branch that never overflows.
    """

    @property
    def name(self) -> str:
        return "exponential"

    def eval(self, theta: float) -> float:
        theta = _check_theta(theta)
        if theta == 0.0:
            return 0.0
        if theta == 1.0:
            return 1.0
        u = 1.0 / theta - 1.0 / (1.0 - theta)
        if u >= 0.0:
            v = math.exp(-u)
            return v / (1.0 + v)
        return 1.0 / (1.0 + math.exp(u))

    def _series(self, theta: float, order: int) -> Jet:
        t = Jet.variable(theta, order)
        u = 1.0 / t - 1.0 / (1.0 - t)
        if u.value >= 0.0:
            v = (-u).exp()
            return v / (1.0 + v)
        return 1.0 / (1.0 + u.exp())

    def deriv(self, theta: float, order: int) -> float:
        theta = _check_theta(theta)
        order = _check_order(order)
        if order == 0:
            return self.eval(theta)
        if theta == 0.0 or theta == 1.0:
            return 0.0
        return self._series(theta, order).derivative(order)

    def packed(self):
        return EXPONENTIAL, 0.0


@dataclass(frozen=True, repr=False)
class ConstantOneRamp(RampSpec):
    """rho identically 1: the un-ramped override.

    Not part of the user catalog (it violates rho(0) = 0); it exists so the
    ramped machinery can be collapsed onto the autonomous one in tests and
    in the initial-guess flow.
    """

    @property
    def name(self) -> str:
        return "one"

    def eval(self, theta: float) -> float:
        return 1.0

    def deriv(self, theta: float, order: int) -> float:
        order = _check_order(order)
        return 1.0 if order == 0 else 0.0

    def packed(self):
        return CONSTANT_ONE, 0.0


def make_ramp(name: str) -> RampSpec:
    """Parse a catalog name: 'algebraic:k' or 'exponential'."""
    name = name.strip()
    if name == "exponential":
        return ExponentialRamp()
    if name.startswith("algebraic:"):
        try:
            k = int(name.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"bad algebraic ramp spec '{name}'") from None
        return AlgebraicRamp(k)
    raise DomainError(f"unknown ramp '{name}' (expected 'algebraic:k' or 'exponential')")


def ramp_eval(ramp: RampSpec, theta: float) -> float:
    return ramp.eval(theta)


def ramp_deriv(ramp: RampSpec, theta: float, order: int) -> float:
    return ramp.deriv(theta, order)


# ---------------------------------------------------------------------------
# Hypothesis checks.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderConditionReport:
    """Endpoint derivative values of a ramp through order n."""

    ramp: str
    n: int
    tol: float
    derivs_at_0: tuple
    derivs_at_1: tuple
    satisfied: bool


def check_order_condition(ramp: RampSpec, n: int, tol: float = 1e-9) -> OrderConditionReport:
    """True iff |rho^(i)(0)| and |rho^(i)(1)| are <= tol for i = 1..n."""
    if n < 0:
        raise DomainError(f"order-condition index must be >= 0, got {n}")
    d0 = tuple(ramp.deriv(0.0, i) for i in range(1, n + 1))
    d1 = tuple(ramp.deriv(1.0, i) for i in range(1, n + 1))
    ok = all(abs(v) <= tol for v in d0) and all(abs(v) <= tol for v in d1)
    return OrderConditionReport(ramp.name, n, tol, d0, d1, ok)


@dataclass(frozen=True)
class GevreyRow:
    n: int
    sup: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.sup

    @property
    def ok(self) -> bool:
        return self.sup <= self.bound


@dataclass(frozen=True)
class GevreyReport:
    lam: float
    eta: float
    rows: tuple
    passed: bool


def _bump_derivative_polys(n_max: int):
    """Integer coefficient arrays P_n with d^n/dx^n exp(-1/x) = exp(-1/x) P_n(1/x).

    Recurrence from d/dx: P_{n+1}(u) = u^2 (P_n(u) - P_n'(u)).
    """
    polys = [[1]]
    for _ in range(n_max):
        c = polys[-1]
        new = [0] * (len(c) + 2)
        for j, cj in enumerate(c):
            new[j + 2] += cj          # u^2 * P_n
            if j >= 1:
                new[j + 1] -= j * cj  # -u^2 * P_n'
        polys.append(new)
    return polys


def check_gevrey2_bound(n_max: int, lam: float = 1.0 / 3.0) -> GevreyReport:
    """Grid check of sup |d^n/dx^n exp(-1/x)| <= (n+1)!^2 / eta^(n+1).

    eta = lam (1 - lam) / (1 + lam)^2 comes from a Cauchy-circle argument
    that requires lam in (0, 1/2).  The derivatives are evaluated in the
    closed form exp(-1/x) P_n(1/x) with exact integer polynomials P_n.
    """
    if not 0.0 < lam < 0.5:
        raise DomainError(f"lambda must lie in (0, 1/2), got {lam}")
    n_max = int(n_max)
    if not 2 <= n_max <= 10:
        raise CapabilityError(f"n_max must lie in [2, 10], got {n_max}")
    eta = lam * (1.0 - lam) / (1.0 + lam) ** 2
    polys = _bump_derivative_polys(n_max)

    # sup over x>0 equals sup over u=1/x>0 of exp(-u)|P_n(u)|; the maxima sit
    # at moderate u (roughly the polynomial degree), so a dense linear grid
    # with generous range finds them.
    u = np.linspace(1e-6, max(40.0, 6.0 * n_max + 10.0), 20001)
    rows = []
    for n in range(n_max + 1):
        coeffs = polys[n]
        val = np.zeros_like(u)
        for j in range(len(coeffs) - 1, -1, -1):
            val = val * u + float(coeffs[j])
        sup = float(np.max(np.abs(np.exp(-u) * val)))
        bound = math.factorial(n + 1) ** 2 / eta ** (n + 1)
        rows.append(GevreyRow(n, sup, bound))
    return GevreyReport(lam, eta, tuple(rows), all(r.ok for r in rows))


@dataclass(frozen=True)
class EnvelopeReport:
    ramp: str
    n_max: int
    c: float
    eta: float
    sups: tuple
    covered: bool


def fit_gevrey_envelope(ramp: RampSpec, n_max: int = 10) -> EnvelopeReport:
    """Fit C, eta so that sup |rho^(n)| <= C (n+1)!^2 / eta^(n+1) for n <= n_max.

    This is the numerical stand-in for the ramp itself being of Gevrey
    class 2: the fitted envelope has the (n!)^2 shape, and the report
    records how tightly the measured derivative suprema sit under it.
    """
    if n_max > MAX_DERIV_ORDER:
        raise CapabilityError(f"envelope fit limited to order {MAX_DERIV_ORDER}")
    grid = np.concatenate([
        np.logspace(-4, -1, 40),
        np.linspace(0.0, 1.0, 2001)[1:-1],
        1.0 - np.logspace(-4, -1, 40),
    ])
    sups = []
    for n in range(1, n_max + 1):
        sup = max(abs(ramp.deriv(float(th), n)) for th in grid)
        sups.append(sup)
    ns = np.arange(1, n_max + 1)
    y = np.array([math.log(s) - 2.0 * math.lgamma(n + 2) for s, n in zip(sups, ns)])
    slope, intercept = np.polyfit(ns + 1.0, y, 1)
    eta = math.exp(-slope)
    # raise C until every measured supremum is covered
    c = max(
        s * eta ** (n + 1) / math.exp(2.0 * math.lgamma(n + 2))
        for s, n in zip(sups, ns)
    )
    c = max(c, math.exp(intercept))
    covered = all(
        s <= c * math.exp(2.0 * math.lgamma(n + 2)) / eta ** (n + 1) * (1 + 1e-12)
        for s, n in zip(sups, ns)
    )
    return EnvelopeReport(ramp.name, n_max, c, eta, tuple(sups), covered)

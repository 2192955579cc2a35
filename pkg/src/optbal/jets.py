"""Truncated Taylor (jet) arithmetic for exact derivatives of composite maps.

A :class:`Jet` stores Taylor coefficients [c0, c1, ..., cm] of a function
of one formal variable, truncated at order m.  Coefficients may be floats
or again Jets, so directional derivatives nest: evaluating a map on
order-1 jets whose coefficients are order-1 jets yields mixed second
derivatives, and so on.

Each jet carries the ``level`` of the lifting context that created it.
Binary operations combine jets of equal level coefficient-wise and treat
anything of lower level (or a plain number) as a scalar constant; this is
what keeps simultaneous perturbations in independent directions from
being conflated.  Every lift site must request a fresh level via
:func:`fresh_level`.

Used in two places: high-order ramp derivatives (univariate, float
coefficients) and Jacobian-vector products in the slow-field recursions
(order-1 jets, nested).
"""

from __future__ import annotations

import itertools
import math

from .errors import CapabilityError, ConfigurationError

#: hard cap on truncation order; coefficients beyond this accumulate rounding
#: noise faster than they carry information for the catalog functions.
MAX_ORDER = 16

_level_counter = itertools.count(1)


def fresh_level() -> int:
    """A new, strictly increasing lifting level."""
    return next(_level_counter)


class Jet:
    """Truncated univariate Taylor value with coefficients in an arbitrary ring."""

    __slots__ = ("coeffs", "level")

    def __init__(self, coeffs, level: int = 0):
        coeffs = list(coeffs)
        if not coeffs:
            raise ConfigurationError("a jet needs at least the order-0 coefficient")
        if len(coeffs) - 1 > MAX_ORDER:
            raise CapabilityError(f"jet order {len(coeffs) - 1} exceeds maximum {MAX_ORDER}")
        self.coeffs = coeffs
        self.level = level

    @classmethod
    def variable(cls, x0, order: int = 1, level: int | None = None) -> "Jet":
        """The identity function at base point x0, truncated at ``order``."""
        if order < 1:
            raise ConfigurationError("a jet variable needs order >= 1")
        if level is None:
            level = fresh_level()
        return cls([x0, 1.0] + [0.0] * (order - 1), level)

    @classmethod
    def constant(cls, c, order: int, level: int = 0) -> "Jet":
        return cls([c] + [0.0] * order, level)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self):
        """Order-0 projection: plain evaluation."""
        return self.coeffs[0]

    def derivative(self, i: int):
        """i-th derivative at the base point: i! * c_i."""
        if i > self.order:
            raise CapabilityError(f"jet of order {self.order} holds no order-{i} derivative")
        return math.factorial(i) * self.coeffs[i]

    # -- ring operations ----------------------------------------------------
    #
    # Dispatch pattern: if the other operand is a jet of strictly higher
    # level, hand the operation to it (this operand is one of its scalars);
    # equal levels combine coefficient-wise; everything else is a scalar.

    def _same(self, other) -> bool:
        if isinstance(other, Jet) and other.level == self.level:
            if other.order != self.order:
                raise ConfigurationError(
                    f"jet order mismatch at level {self.level}: {self.order} vs {other.order}"
                )
            return True
        return False

    @staticmethod
    def _higher(self, other) -> bool:
        return isinstance(other, Jet) and other.level > self.level

    def __add__(self, other):
        if Jet._higher(self, other):
            return other.__add__(self)
        if self._same(other):
            return Jet([a + b for a, b in zip(self.coeffs, other.coeffs)], self.level)
        out = list(self.coeffs)
        out[0] = out[0] + other
        return Jet(out, self.level)

    __radd__ = __add__

    def __sub__(self, other):
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __neg__(self):
        return Jet([-c for c in self.coeffs], self.level)

    def __mul__(self, other):
        if Jet._higher(self, other):
            return other.__mul__(self)
        if self._same(other):
            n = self.order
            out = []
            for k in range(n + 1):
                acc = self.coeffs[0] * other.coeffs[k]
                for i in range(1, k + 1):
                    acc = acc + self.coeffs[i] * other.coeffs[k - i]
                out.append(acc)
            return Jet(out, self.level)
        return Jet([c * other for c in self.coeffs], self.level)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ConfigurationError("jets support non-negative integer powers only")
        out = Jet.constant(1.0, self.order, self.level)
        for _ in range(n):
            out = out * self
        return out

    def __truediv__(self, other):
        if Jet._higher(self, other):
            return other.__rtruediv__(self)
        if self._same(other):
            n = self.order
            b0 = other.coeffs[0]
            out = [self.coeffs[0] / b0]
            for k in range(1, n + 1):
                acc = self.coeffs[k]
                for j in range(1, k + 1):
                    acc = acc - other.coeffs[j] * out[k - j]
                out.append(acc / b0)
            return Jet(out, self.level)
        return Jet([c / other for c in self.coeffs], self.level)

    def __rtruediv__(self, other):
        return Jet.constant(other, self.order, self.level).__truediv__(self)

    def exp(self) -> "Jet":
        """Series exponential: e_k = (1/k) sum_{j=1..k} j a_j e_{k-j}."""
        a = self.coeffs
        e0 = math.exp(a[0]) if isinstance(a[0], (int, float)) else a[0].exp()
        out = [e0]
        for k in range(1, self.order + 1):
            acc = (1 * a[1]) * out[k - 1]
            for j in range(2, k + 1):
                acc = acc + (j * a[j]) * out[k - j]
            out.append(acc * (1.0 / k))
        return Jet(out, self.level)

    def __repr__(self):
        return f"Jet(level={self.level}, {self.coeffs!r})"


def base_value(x):
    """Recursively unwrap to the float base point."""
    while isinstance(x, Jet):
        x = x.coeffs[0]
    return float(x)


def nilpotency(x) -> int:
    """Upper bound on the truncation order of the increment x - base_value(x)."""
    if not isinstance(x, Jet):
        return 0
    return x.order + max(nilpotency(c) for c in x.coeffs)


def compose(derivs, x):
    """Evaluate f on a jet x given derivatives [f(x0), f'(x0), ...] at the base point.

    ``derivs`` must extend at least to the nilpotency order of x; higher
    entries would multiply vanishing powers anyway.  Exact because the
    increment is nilpotent.
    """
    if not isinstance(x, Jet):
        return derivs[0]
    depth = nilpotency(x)
    if depth >= len(derivs):
        raise CapabilityError(
            f"need {depth + 1} derivative values to compose with this jet, got {len(derivs)}"
        )
    delta = x - base_value(x)
    out = 0.0 * x + derivs[0]
    power = None
    fact = 1.0
    for m in range(1, depth + 1):
        power = delta if power is None else power * delta
        fact *= m
        out = out + (derivs[m] / fact) * power
    return out


def jvp(fun, x, v):
    """Value and directional derivative of a vector map: (f(x), Df(x) v).

    ``fun`` maps a list of ring elements to a list of ring elements; the
    entries of x and v may themselves be jets, which is how nested
    derivatives arise.
    """
    level = fresh_level()
    lifted = [Jet([xi, vi], level) for xi, vi in zip(x, v)]
    out = fun(lifted)
    vals = []
    dots = []
    for o in out:
        if isinstance(o, Jet) and o.level == level:
            vals.append(o.coeffs[0])
            dots.append(o.coeffs[1])
        else:
            vals.append(o)
            dots.append(0.0 * o)
    return vals, dots

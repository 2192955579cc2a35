"""Recursive slow vector fields for the autonomous and the ramped system.

Autonomous family (drives dq/dt = G_n(q)):

    g_0(q) = -J grad V(q)
    g_k(q) = -J sum_{i+j=k-1} D g_i(q) g_j(q)
    G_n(q) = eps * sum_{i=0}^{n} g_i(q) eps^i

Ramped family (time-dependent through rho evaluated at tau/a, tau the
slow time):

    f_0(q, tau) = -rho(tau/a) J grad V(q)
    f_k(q, tau) = -J d/dtau f_{k-1}(q, tau)
                  - J sum_{i+j=k-1} D f_i(q, tau) f_j(q, tau)
    F_n(q, tau) = sum_{i=0}^{n} f_i(q, tau) eps^i

Note the differing prefactor conventions: G_n carries a leading eps, F_n
does not (it enters through w = p - eps * F_{n+1}).  With rho identically
one, eps * F_n collapses onto G_n.

Jacobian-vector products D g_i(q) v and the tau-derivative are both
realized with nested jets; for the polynomial potential catalog they are
exact up to rounding.
"""

from __future__ import annotations

import numpy as np

from .errors import CapabilityError, DomainError
from .jets import Jet, fresh_level, jvp
from .model import Potential, apply_J_generic, validate_epsilon
from .ramps import RampSpec

#: highest autonomous coefficient order; term count grows combinatorially
#: beyond this and nothing downstream needs it.
MAX_G_ORDER = 4
#: the ramped recursion is needed one order deeper (it feeds F_{n+1}).
MAX_F_ORDER = 5


class SlowField:
    """Bound evaluator for the slow-field coefficient recursions.

    Construction binds the potential and (for the ramped family) the ramp
    with its slow horizon ``a``.  Evaluation methods are read-only and safe
    to call concurrently once the instance exists.
    """

    def __init__(self, potential: Potential, ramp: RampSpec | None = None,
                 a: float | None = None):
        self.potential = potential
        self.ramp = ramp
        if ramp is not None:
            if a is None or a <= 0.0:
                raise DomainError(f"ramped slow field needs a slow horizon a > 0, got {a}")
            self.a = float(a)
        else:
            self.a = None

    # -- autonomous family ---------------------------------------------------

    def _g(self, k: int, q):
        if k == 0:
            grad = self.potential.gradient_generic(q)
            return [-x for x in apply_J_generic(grad)]
        acc = None
        for i in range(k):
            gj = self._g(k - 1 - i, q)
            _, dgi = jvp(lambda x: self._g(i, x), q, gj)
            acc = dgi if acc is None else [a + b for a, b in zip(acc, dgi)]
        return [-x for x in apply_J_generic(acc)]

    def g(self, k: int, q) -> np.ndarray:
        """Coefficient g_k at a phase-space base point q."""
        if not 0 <= k <= MAX_G_ORDER:
            raise CapabilityError(f"g_k implemented for 0 <= k <= {MAX_G_ORDER}, got {k}")
        out = self._g(k, [float(x) for x in q])
        return np.array(out, dtype=float)

    def G(self, n: int, q, eps: float) -> np.ndarray:
        """Slow vector field G_n(q) = eps * sum g_i(q) eps^i."""
        if not 0 <= n <= MAX_G_ORDER:
            raise CapabilityError(f"G_n implemented for 0 <= n <= {MAX_G_ORDER}, got {n}")
        eps = validate_epsilon(eps)
        ql = [float(x) for x in q]
        total = np.zeros(len(ql))
        for i in range(n + 1):
            total += np.array(self._g(i, ql)) * eps ** i
        return eps * total

    # -- ramped family ---------------------------------------------------------

    def _require_ramp(self):
        if self.ramp is None:
            raise DomainError("this SlowField was built without a ramp")

    def _f(self, k: int, q, tau):
        if k == 0:
            rho = self.ramp.eval_jet(tau / self.a)
            grad = self.potential.gradient_generic(q)
            return [-x for x in apply_J_generic([rho * gi for gi in grad])]
        # tau-derivative of f_{k-1} via a dual in tau
        level = fresh_level()
        tau_jet = Jet([tau, 1.0], level)
        prev = self._f(k - 1, q, tau_jet)
        dtau = [
            o.coeffs[1] if isinstance(o, Jet) and o.level == level else 0.0 * o
            for o in prev
        ]
        acc = dtau
        for i in range(k):
            fj = self._f(k - 1 - i, q, tau)
            _, dfi = jvp(lambda x: self._f(i, x, tau), q, fj)
            acc = [a + b for a, b in zip(acc, dfi)]
        return [-x for x in apply_J_generic(acc)]

    def f(self, k: int, q, tau: float) -> np.ndarray:
        """Ramped coefficient f_k(q, tau) with tau in slow time, 0 <= tau <= a."""
        self._require_ramp()
        if not 0 <= k <= MAX_F_ORDER:
            raise CapabilityError(f"f_k implemented for 0 <= k <= {MAX_F_ORDER}, got {k}")
        tau = float(tau)
        if not 0.0 <= tau <= self.a:
            raise DomainError(f"slow time {tau} outside [0, {self.a}]")
        out = self._f(k, [float(x) for x in q], tau)
        return np.array(out, dtype=float)

    def F(self, n: int, q, tau: float, eps: float) -> np.ndarray:
        """Ramped slow field F_n(q, tau) = sum f_i(q, tau) eps^i (no eps prefactor)."""
        self._require_ramp()
        if not 0 <= n <= MAX_F_ORDER:
            raise CapabilityError(f"F_n implemented for 0 <= n <= {MAX_F_ORDER}, got {n}")
        eps = validate_epsilon(eps)
        tau = float(tau)
        if not 0.0 <= tau <= self.a:
            raise DomainError(f"slow time {tau} outside [0, {self.a}]")
        ql = [float(x) for x in q]
        total = np.zeros(len(ql))
        for i in range(n + 1):
            total += np.array(self._f(i, ql, tau)) * eps ** i
        return total


# -- module-level wrappers matching the operation contracts -------------------

def slow_coeff_g(k: int, q, potential: Potential) -> np.ndarray:
    return SlowField(potential).g(k, q)


def slow_field_G(n: int, q, eps: float, potential: Potential) -> np.ndarray:
    return SlowField(potential).G(n, q, eps)


def ramped_coeff_f(k: int, q, tau: float, ramp: RampSpec, a: float,
                   potential: Potential) -> np.ndarray:
    return SlowField(potential, ramp, a).f(k, q, tau)


def ramped_field_F(n: int, q, tau: float, eps: float, ramp: RampSpec, a: float,
                   potential: Potential) -> np.ndarray:
    return SlowField(potential, ramp, a).F(n, q, tau, eps)

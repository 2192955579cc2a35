"""Time integration of the full, ramped, and slow systems.

Two fixed-step schemes: classical RK4 and a Strang splitting whose linear
half (the fast rotation together with the induced position drift) is the
exact flow.  Fixed steps are deliberate: the imbalance diagnostics
difference nearly equal states from separate runs, and adaptive stepping
would inject run-to-run noise into that difference.

The full and ramped systems dispatch to compiled kernels
(:mod:`optbal._kernels`); the slow systems evaluate their vector fields
through the jet recursion and integrate in plain Python, which is cheap
because slow trajectories take O(1/eps) coarse steps.

Backward integration is forward integration of the time-reversed vector
field, so every scheme works unchanged in either direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (ConfigurationError, DomainError, IntegrationError,
                     ResourceError)
from .model import Potential, State, apply_J, validate_epsilon
from .ramps import RampSpec
from .slowfield import SlowField

#: hard ceiling on the step size; the fast rotation has O(1) frequency
MAX_DT = 0.1

_SCHEMES = {"rk4": _kernels.SCHEME_RK4, "splitting": _kernels.SCHEME_STRANG}


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "rk4"
    dt: float = 0.01
    direction: str = "auto"
    sample_stride: int | None = None
    budget: int = 10_000_000

    def __post_init__(self):
        if self.scheme not in _SCHEMES:
            raise ConfigurationError(f"unknown scheme '{self.scheme}'")
        if not 0.0 < self.dt <= MAX_DT:
            raise ConfigurationError(
                f"dt must lie in (0, {MAX_DT}] (fast frequency is O(1)), got {self.dt}"
            )
        if self.direction not in ("auto", "forward", "backward"):
            raise ConfigurationError(f"bad direction '{self.direction}'")
        if self.sample_stride is not None and self.sample_stride < 1:
            raise ConfigurationError("sample_stride must be >= 1")
        if self.budget < 1:
            raise ConfigurationError("step budget must be positive")


# ---------------------------------------------------------------------------
# Systems.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FullSystem:
    """dq = p, dp = Jp - eps grad V(q)."""

    eps: float
    potential: Potential

    def __post_init__(self):
        validate_epsilon(self.eps)

    label = "full"

    def rhs(self, t, q, p):
        return p.copy(), apply_J(p) - self.eps * self.potential.gradient(q)

    def kernel_args(self):
        coeffs, powers = self.potential.packed()
        return self.eps, 1.0, 2, 0.0, coeffs, powers

    def time_domain(self):
        return None


@dataclass(frozen=True)
class RampedSystem:
    """dq = p, dp = Jp - eps rho(t/T) grad V(q), for t in [0, T]."""

    eps: float
    potential: Potential
    ramp: RampSpec
    T: float

    def __post_init__(self):
        validate_epsilon(self.eps)
        if self.T <= 0.0:
            raise ConfigurationError(f"ramp time T must be positive, got {self.T}")

    label = "ramped"

    def rhs(self, t, q, p):
        theta = min(max(t / self.T, 0.0), 1.0)
        rho = self.ramp.eval(theta)
        return p.copy(), apply_J(p) - (self.eps * rho) * self.potential.gradient(q)

    def kernel_args(self):
        rcode, rk = self.ramp.packed()
        coeffs, powers = self.potential.packed()
        return self.eps, self.T, rcode, rk, coeffs, powers

    def time_domain(self):
        return 0.0, self.T


@dataclass(frozen=True)
class SlowSystem:
    """dq = G_n(q), dp = 0: the autonomous slow flow in fast-time units."""

    n: int
    eps: float
    potential: Potential

    def __post_init__(self):
        validate_epsilon(self.eps)
        object.__setattr__(self, "_field", SlowField(self.potential))

    label = "slow-G"

    def rhs(self, t, q, p):
        return self._field.G(self.n, q, self.eps), np.zeros_like(p)

    def kernel_args(self):
        return None

    def time_domain(self):
        return None


@dataclass(frozen=True)
class RampedSlowSystem:
    """dq = eps F_n(q, eps t), dp = 0: the ramped slow flow, t in [0, a/eps]."""

    n: int
    eps: float
    potential: Potential
    ramp: RampSpec
    a: float

    def __post_init__(self):
        validate_epsilon(self.eps)
        if self.a <= 0.0:
            raise ConfigurationError(f"slow horizon a must be positive, got {self.a}")
        object.__setattr__(self, "_field", SlowField(self.potential, self.ramp, self.a))

    label = "ramped-F"

    def rhs(self, t, q, p):
        tau = min(max(self.eps * t, 0.0), self.a)
        dq = self.eps * self._field.F(self.n, q, tau, self.eps)
        return dq, np.zeros_like(p)

    def kernel_args(self):
        return None

    def time_domain(self):
        return 0.0, self.a / self.eps


# ---------------------------------------------------------------------------
# Trajectories.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: times[i] pairs with (qs[i], ps[i])."""

    times: np.ndarray
    qs: np.ndarray
    ps: np.ndarray
    meta: dict

    def __len__(self):
        return self.times.shape[0]

    def state(self, i: int) -> State:
        return State(self.qs[i], self.ps[i])

    @property
    def final(self) -> State:
        return self.state(len(self) - 1)

    @property
    def final_time(self) -> float:
        return float(self.times[-1])


def rotate_exact(p: np.ndarray, t: float) -> np.ndarray:
    """exp(J t) p: simultaneous rotation of the (i, i+d) planes."""
    p = np.asarray(p, dtype=float)
    return math.cos(t) * p + math.sin(t) * apply_J(p)


# ---------------------------------------------------------------------------
# Stepping.
# ---------------------------------------------------------------------------

def _rk4_step(system, t, q, p, h):
    k1q, k1p = system.rhs(t, q, p)
    k2q, k2p = system.rhs(t + 0.5 * h, q + 0.5 * h * k1q, p + 0.5 * h * k1p)
    k3q, k3p = system.rhs(t + 0.5 * h, q + 0.5 * h * k2q, p + 0.5 * h * k2p)
    k4q, k4p = system.rhs(t + h, q + h * k3q, p + h * k3p)
    qn = q + (h / 6.0) * (k1q + 2.0 * (k2q + k3q) + k4q)
    pn = p + (h / 6.0) * (k1p + 2.0 * (k2p + k3p) + k4p)
    return qn, pn


def _strang_step(system, t, q, p, h):
    if not isinstance(system, (FullSystem, RampedSystem)):
        raise ConfigurationError("the splitting scheme applies to the full/ramped systems only")
    half = 0.5 * h
    pr = rotate_exact(p, half)
    q = q - apply_J(pr - p)
    if isinstance(system, RampedSystem):
        theta = min(max((t + half) / system.T, 0.0), 1.0)
        rho = system.ramp.eval(theta)
    else:
        rho = 1.0
    p = pr - (h * system.eps * rho) * system.potential.gradient(q)
    pr = rotate_exact(p, half)
    q = q - apply_J(pr - p)
    return q, pr


def step(s: State, t: float, cfg: IntegratorConfig, system) -> State:
    """One step of the configured scheme from (t, s)."""
    h = cfg.dt if cfg.direction != "backward" else -cfg.dt
    if cfg.scheme == "rk4":
        qn, pn = _rk4_step(system, t, s.q, s.p, h)
    else:
        qn, pn = _strang_step(system, t, s.q, s.p, h)
    if not (np.all(np.isfinite(qn)) and np.all(np.isfinite(pn))):
        raise IntegrationError("non-finite state after step", time=t, state=s)
    return State(qn, pn)


def _check_span(system, t0, t1):
    dom = system.time_domain()
    if dom is None:
        return
    lo, hi = dom
    slack = 1e-9 * max(1.0, abs(hi))
    if min(t0, t1) < lo - slack or max(t0, t1) > hi + slack:
        raise DomainError(
            f"integration span [{t0}, {t1}] outside the system's time domain [{lo}, {hi}]"
        )


def _plan(t0, t1, cfg):
    length = abs(t1 - t0)
    sign = 1.0 if t1 >= t0 else -1.0
    if cfg.direction == "forward" and sign < 0:
        raise ConfigurationError("config direction is forward but t1 < t0")
    if cfg.direction == "backward" and sign > 0:
        raise ConfigurationError("config direction is backward but t1 > t0")
    nsteps = int(length / cfg.dt) + 1
    if nsteps > cfg.budget:
        raise ResourceError(
            f"integration needs ~{nsteps} steps, exceeding the budget {cfg.budget}"
        )
    return length, sign


def integrate(s0: State, t0: float, t1: float, cfg: IntegratorConfig, system) -> Trajectory:
    """Trajectory from t0 to t1; the final time is hit exactly.

    Samples every ``cfg.sample_stride`` steps (default: every step).
    """
    meta = {"scheme": cfg.scheme, "dt": cfg.dt, "system": system.label}
    if t1 == t0:
        return Trajectory(np.array([t0]), s0.q[None, :].copy(), s0.p[None, :].copy(), meta)
    _check_span(system, t0, t1)
    length, sign = _plan(t0, t1, cfg)
    stride = cfg.sample_stride or 1

    kargs = system.kernel_args()
    if kargs is not None:
        eps, t_ramp, rcode, rk, coeffs, powers = kargs
        n = _kernels.sample_count(length, cfg.dt, stride)
        out_t = np.empty(n)
        out_q = np.empty((n, s0.q.shape[0]))
        out_p = np.empty((n, s0.p.shape[0]))
        q = s0.q.copy()
        p = s0.p.copy()
        status, ns, sigma = _kernels.propagate_sampled(
            q, p, t0, sign, length, cfg.dt, _SCHEMES[cfg.scheme],
            eps, t_ramp, rcode, rk, coeffs, powers, stride, out_t, out_q, out_p,
        )
        if status != _kernels.STATUS_OK:
            raise IntegrationError(
                f"state blew up at t={t0 + sign * sigma}", time=t0 + sign * sigma
            )
        out_t[ns - 1] = t1
        return Trajectory(out_t[:ns].copy(), out_q[:ns].copy(), out_p[:ns].copy(), meta)

    # pure-Python path (slow systems)
    n_full = int(length / cfg.dt)
    h_last = length - n_full * cfg.dt
    if h_last <= 0.0:
        h_last = 0.0
    total = n_full + (1 if h_last > 0.0 else 0)
    times = [t0]
    qs = [s0.q.copy()]
    ps = [s0.p.copy()]
    q, p = s0.q.copy(), s0.p.copy()
    for k in range(total):
        sigma = k * cfg.dt
        h = cfg.dt if k < n_full else h_last
        t = t0 + sign * sigma
        if cfg.scheme == "rk4":
            q, p = _rk4_step(system, t, q, p, sign * h)
        else:
            q, p = _strang_step(system, t, q, p, sign * h)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise IntegrationError("state blew up", time=t, state=None)
        done = k + 1
        if done == total or done % stride == 0:
            times.append(t1 if done == total else t0 + sign * done * cfg.dt)
            qs.append(q.copy())
            ps.append(p.copy())
    return Trajectory(np.array(times), np.array(qs), np.array(ps), meta)


def propagate_endpoint(s0: State, t0: float, t1: float, cfg: IntegratorConfig, system) -> State:
    """Endpoint of the trajectory, without storing samples."""
    if t1 == t0:
        return s0
    _check_span(system, t0, t1)
    length, sign = _plan(t0, t1, cfg)
    kargs = system.kernel_args()
    if kargs is not None:
        eps, t_ramp, rcode, rk, coeffs, powers = kargs
        q = s0.q.copy()
        p = s0.p.copy()
        status, sigma = _kernels.propagate(
            q, p, t0, sign, length, cfg.dt, _SCHEMES[cfg.scheme],
            eps, t_ramp, rcode, rk, coeffs, powers,
        )
        if status != _kernels.STATUS_OK:
            raise IntegrationError(
                f"state blew up at t={t0 + sign * sigma}", time=t0 + sign * sigma
            )
        return State(q, p)
    traj = integrate(s0, t0, t1, cfg, system)
    return traj.final

"""Boundary value solvers for optimal balance.

The problem: given a base point q*, find the fiber momentum p* such that
the ramped system run over [0, T] with p(0) = 0 ends at q(T) = q*.  Then
p* = p(T).  The initial condition pins the trajectory to the trivial slow
subspace of the linear regime; the terminal condition pins the base point
in the fully nonlinear regime.

Two solvers:

* simple shooting on the 2d unknowns q(0), with a finite-difference
  Jacobian refreshed each iteration, and
* back-and-forth nudging: integrate forward, reset q(T) to q*, integrate
  backward, reset p(0) to 0, repeat until the sweep-to-sweep change dies.

Shooting additionally applies a first-order boundary correction to the
returned p*: the achieved endpoint misses q* by up to ``tol``, and
projecting that miss through the endpoint Jacobian removes an
O(tol)-sized bias from p* that would otherwise become the floor of the
imbalance diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _ddkernels
from .errors import ConfigurationError, IntegrationError, SolverError
from .integrate import (MAX_DT, IntegratorConfig, RampedSystem,
                        propagate_endpoint, integrate, Trajectory)
from .model import Potential, State, apply_J, validate_epsilon
from .ramps import RampSpec

#: below this eps, "auto" precision switches the shooting pipeline to
#: double-double state arithmetic: the diagnosed imbalances fall through
#: the float64 accumulation floor (~1e-15) there.
AUTO_EXTENDED_BELOW = 5e-3


@dataclass(frozen=True)
class BalanceProblem:
    """One instance of the balance BVP, solver settings included."""

    q_star: np.ndarray
    eps: float
    ramp: RampSpec
    a: float
    potential: Potential
    solver: str = "shooting"
    tol: float = 1e-10
    max_iter: int = 40
    relaxation: float = 1.0
    scheme: str = "rk4"
    dt: float | None = None          # None: calibrate per instance
    calibration_target: float = 1e-10
    budget: int = 10_000_000
    correct_boundary: bool = True
    precision: str = "auto"          # double | extended | auto

    def __post_init__(self):
        validate_epsilon(self.eps)
        q = np.asarray(self.q_star, dtype=float)
        if q.ndim != 1 or q.shape[0] < 2 or q.shape[0] % 2:
            raise ConfigurationError(f"q_star must be a vector in R^(2d), got shape {q.shape}")
        q = q.copy()
        q.flags.writeable = False
        object.__setattr__(self, "q_star", q)
        if self.a <= 0.0:
            raise ConfigurationError(f"slow horizon a must be positive, got {self.a}")
        if self.tol <= 0.0:
            raise ConfigurationError(f"tolerance must be positive, got {self.tol}")
        if self.solver not in ("shooting", "nudging"):
            raise ConfigurationError(f"unknown solver '{self.solver}'")
        if not 0.0 < self.relaxation <= 1.0:
            raise ConfigurationError(f"relaxation must lie in (0, 1], got {self.relaxation}")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if self.dt is not None and not 0.0 < self.dt <= MAX_DT:
            raise ConfigurationError(f"dt must lie in (0, {MAX_DT}], got {self.dt}")
        if self.precision not in ("double", "extended", "auto"):
            raise ConfigurationError(f"unknown precision '{self.precision}'")

    @property
    def T(self) -> float:
        """Ramp time in fast-time units."""
        return self.a / self.eps

    def resolved_precision(self) -> str:
        if self.precision == "auto":
            return "extended" if self.eps < AUTO_EXTENDED_BELOW else "double"
        return self.precision

    def system(self) -> RampedSystem:
        return RampedSystem(self.eps, self.potential, self.ramp, self.T)

    def config(self, dt: float) -> IntegratorConfig:
        return IntegratorConfig(scheme=self.scheme, dt=dt, budget=self.budget)


@dataclass(frozen=True)
class BalanceResult:
    p_star: np.ndarray
    q0: np.ndarray
    residual: float
    iterations: int
    dt: float
    trajectory: Trajectory | None = None
    #: low word of p_star when solved in extended precision
    p_star_lo: np.ndarray | None = None


def initial_guess(q_star, prob: BalanceProblem) -> np.ndarray:
    """Shooting start for q(0): leading-order slow flow run backward.

    Integrates dq/dtau = -rho(tau/a) J grad V(q) from tau = a down to 0
    starting at q*.  The flow is independent of eps, so one guess serves a
    whole eps-sweep.
    """
    q = np.asarray(q_star, dtype=float).copy()
    nsteps = 400
    h = prob.a / nsteps

    def rhs(tau, y):
        rho = prob.ramp.eval(min(max(tau / prob.a, 0.0), 1.0))
        return -rho * apply_J(prob.potential.gradient(y))

    tau = prob.a
    for _ in range(nsteps):
        k1 = rhs(tau, q)
        k2 = rhs(tau - 0.5 * h, q - 0.5 * h * k1)
        k3 = rhs(tau - 0.5 * h, q - 0.5 * h * k2)
        k4 = rhs(tau - h, q - h * k3)
        q = q - (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        tau -= h
    return q


def calibrate_dt(prob: BalanceProblem, q0: np.ndarray | None = None) -> float:
    """Pick the step so the endpoint moves by <= calibration_target under halving.

    Runs the ramped system from the initial-guess state, which is the
    trajectory class the solver will see: balanced, so its effective
    smoothness is set by the slow scales rather than the fast frequency.
    """
    if prob.dt is not None:
        return prob.dt
    if q0 is None:
        q0 = initial_guess(prob.q_star, prob)
    system = prob.system()
    s0 = State(q0, np.zeros_like(q0))
    dt = 0.05
    prev = propagate_endpoint(s0, 0.0, prob.T, prob.config(dt), system)
    for _ in range(10):
        half = propagate_endpoint(s0, 0.0, prob.T, prob.config(dt / 2.0), system)
        err = max(np.max(np.abs(half.q - prev.q)), np.max(np.abs(half.p - prev.p)))
        if err <= prob.calibration_target:
            return dt
        dt /= 2.0
        prev = half
    return dt


def _endpoint(prob, q0, dt):
    s0 = State(q0, np.zeros_like(q0))
    end = propagate_endpoint(s0, 0.0, prob.T, prob.config(dt), prob.system())
    return end.q, end.p


def shoot(prob: BalanceProblem, want_trajectory: bool = False) -> BalanceResult:
    """Simple shooting with a finite-difference Jacobian on q(0).

    p(0) = 0 is hard-wired, so the unknown is the 2d-vector q(0) and the
    residual is q(T) - q*.
    """
    dt = calibrate_dt(prob)
    q_star = prob.q_star
    q0 = initial_guess(q_star, prob)
    qT, pT = _endpoint(prob, q0, dt)
    r = qT - q_star
    rnorm = float(np.linalg.norm(r))
    iterations = 1
    best = (rnorm, q0.copy(), pT.copy(), r.copy())
    history = [rnorm]
    jac_q = jac_p = None

    while rnorm > prob.tol and iterations < prob.max_iter:
        # fresh forward-difference Jacobian of the shooting map, plus the
        # endpoint-momentum rows used by the boundary correction
        m = q0.shape[0]
        h = 1e-7 * (1.0 + float(np.linalg.norm(q0)))
        jac_q = np.empty((m, m))
        jac_p = np.empty((m, m))
        for i in range(m):
            qp = q0.copy()
            qp[i] += h
            qTi, pTi = _endpoint(prob, qp, dt)
            jac_q[:, i] = (qTi - qT) / h
            jac_p[:, i] = (pTi - pT) / h
        try:
            delta = np.linalg.solve(jac_q, -r)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular shooting Jacobian: {exc}",
                              best_residual=best[0], history=history) from exc

        # damped update: halve the step while it does not reduce the residual
        lam = 1.0
        improved = False
        for _ in range(6):
            q_try = q0 + lam * delta
            qT_try, pT_try = _endpoint(prob, q_try, dt)
            r_try = qT_try - q_star
            rn_try = float(np.linalg.norm(r_try))
            if rn_try < rnorm:
                improved = True
                break
            lam *= 0.5
        iterations += 1
        if not improved:
            break
        q0, qT, pT, r, rnorm = q_try, qT_try, pT_try, r_try, rn_try
        history.append(rnorm)
        if rnorm < best[0]:
            best = (rnorm, q0.copy(), pT.copy(), r.copy())

    rnorm, q0, pT, r = best
    if rnorm > prob.tol:
        raise SolverError(
            f"shooting stalled at residual {rnorm:.3e} (tol {prob.tol:.1e}) "
            f"after {iterations} iterations",
            best_residual=rnorm, history=history,
        )

    p_star = pT.copy()
    if prob.correct_boundary and rnorm > 0.0:
        if jac_q is None:
            m = q0.shape[0]
            h = 1e-7 * (1.0 + float(np.linalg.norm(q0)))
            jac_q = np.empty((m, m))
            jac_p = np.empty((m, m))
            for i in range(m):
                qp = q0.copy()
                qp[i] += h
                qTi, pTi = _endpoint(prob, qp, dt)
                jac_q[:, i] = (qTi - (q_star + r)) / h
                jac_p[:, i] = (pTi - pT) / h
        try:
            p_star = pT + jac_p @ np.linalg.solve(jac_q, -r)
        except np.linalg.LinAlgError:
            p_star = pT.copy()

    traj = None
    if want_trajectory:
        s0 = State(q0, np.zeros_like(q0))
        cfg = replace_stride(prob.config(dt), max(1, int(round(1.0 / dt))))
        traj = integrate(s0, 0.0, prob.T, cfg, prob.system())
    return BalanceResult(p_star, q0, rnorm, iterations, dt, traj)


def replace_stride(cfg: IntegratorConfig, stride: int) -> IntegratorConfig:
    return IntegratorConfig(scheme=cfg.scheme, dt=cfg.dt, direction=cfg.direction,
                            sample_stride=stride, budget=cfg.budget)


def nudge(prob: BalanceProblem, want_trajectory: bool = False) -> BalanceResult:
    """Back-and-forth nudging: alternate forward/backward runs, resetting
    q(T) <- q* after the forward leg and p(0) <- 0 after the backward leg.

    Stops when the change in (q0, p*) between sweeps drops to tol.  The
    residual reported is that change, not a boundary mismatch.
    """
    dt = calibrate_dt(prob)
    system = prob.system()
    cfg = prob.config(dt)
    q_star = prob.q_star
    gamma = prob.relaxation

    q0 = initial_guess(q_star, prob)
    prev_pstar = None
    history = []
    for sweep in range(1, prob.max_iter + 1):
        end = propagate_endpoint(State(q0, np.zeros_like(q0)), 0.0, prob.T, cfg, system)
        p_star = end.p.copy()
        q_reset = gamma * q_star + (1.0 - gamma) * end.q
        back = propagate_endpoint(State(q_reset, p_star), prob.T, 0.0, cfg, system)
        q0_new = back.q.copy()

        change = float(np.max(np.abs(q0_new - q0)))
        if prev_pstar is not None:
            change = max(change, float(np.max(np.abs(p_star - prev_pstar))))
        history.append(change)
        if change <= prob.tol:
            traj = None
            if want_trajectory:
                scfg = replace_stride(cfg, max(1, int(round(1.0 / dt))))
                traj = integrate(State(q0, np.zeros_like(q0)), 0.0, prob.T, scfg, system)
            return BalanceResult(p_star, q0, change, sweep, dt, traj)
        prev_pstar = p_star
        q0 = q0_new

    raise SolverError(
        f"nudging did not converge within {prob.max_iter} sweeps "
        f"(last change {history[-1]:.3e})",
        best_residual=min(history), history=history,
    )


def _endpoint_dd(prob, dt, q0hi, q0lo):
    """Ramped-system endpoint in double-double state arithmetic."""
    eps, t_ramp, rcode, rk, coeffs, powers = prob.system().kernel_args()
    m = q0hi.shape[0]
    qhi = q0hi.copy()
    qlo = q0lo.copy()
    phi = np.zeros(m)
    plo = np.zeros(m)
    scheme = 1 if prob.scheme == "splitting" else 0
    status, sigma = _ddkernels.dd_propagate(
        qhi, qlo, phi, plo, 0.0, 1.0, prob.T, dt, scheme,
        eps, t_ramp, rcode, rk, coeffs, powers)
    if status != _ddkernels.STATUS_OK:
        raise IntegrationError(f"state blew up at t={sigma}", time=sigma)
    return qhi, qlo, phi, plo


def shoot_extended(prob: BalanceProblem, qstar_hi=None, qstar_lo=None) -> BalanceResult:
    """Shooting with double-double propagation and target.

    Needed when downstream diagnostics difference momenta at the 1e-20 ..
    1e-30 level.  The Newton residual is pushed far below prob.tol (to
    ~1e-24) so that no boundary-mismatch bias survives at those scales;
    the target q* itself may carry a low word from a previous extended
    propagation.
    """
    dt = calibrate_dt(prob)
    if qstar_hi is None:
        qstar_hi = np.asarray(prob.q_star, dtype=float)
        qstar_lo = np.zeros_like(qstar_hi)
    q0hi = initial_guess(qstar_hi, prob)
    q0lo = np.zeros_like(q0hi)

    def residual(qh, ql):
        qTh, qTl, pTh, pTl = _endpoint_dd(prob, dt, qh, ql)
        rhi, rlo = _ddkernels.ddv_sub(qTh, qTl, qstar_hi, qstar_lo)
        return rhi + rlo, (qTh, qTl, pTh, pTl)

    polish = 1e-24
    r, end = residual(q0hi, q0lo)
    rnorm = float(np.linalg.norm(r))
    iterations = 1
    best = (rnorm, q0hi.copy(), q0lo.copy(), end, r.copy())
    history = [rnorm]
    max_iter = prob.max_iter + 8   # a few extra polish iterations

    while rnorm > polish and iterations < max_iter:
        m = q0hi.shape[0]
        h = 1e-7 * (1.0 + float(np.linalg.norm(q0hi)))
        jac_q = np.empty((m, m))
        jac_p = np.empty((m, m))
        qT = end[0] + end[1]
        pT = end[2] + end[3]
        for i in range(m):
            qp = q0hi.copy()
            qp[i] += h
            _, endi = residual(qp, q0lo)
            jac_q[:, i] = ((endi[0] - end[0]) + (endi[1] - end[1])) / h
            jac_p[:, i] = ((endi[2] - end[2]) + (endi[3] - end[3])) / h
        try:
            delta = np.linalg.solve(jac_q, -r)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular shooting Jacobian: {exc}",
                              best_residual=best[0], history=history) from exc
        lam = 1.0
        improved = False
        for _ in range(6):
            qh_try, ql_try = _ddkernels.ddv_two_sum(
                q0hi, q0lo, lam * delta, np.zeros_like(delta))
            r_try, end_try = residual(qh_try, ql_try)
            rn_try = float(np.linalg.norm(r_try))
            if rn_try < rnorm:
                improved = True
                break
            lam *= 0.5
        iterations += 1
        if not improved:
            break
        q0hi, q0lo, r, rnorm, end = qh_try, ql_try, r_try, rn_try, end_try
        history.append(rnorm)
        if rnorm < best[0]:
            best = (rnorm, q0hi.copy(), q0lo.copy(), end, r.copy())

    rnorm, q0hi, q0lo, end, r = best
    if rnorm > prob.tol:
        raise SolverError(
            f"extended shooting stalled at residual {rnorm:.3e} (tol {prob.tol:.1e})",
            best_residual=rnorm, history=history,
        )
    return BalanceResult(end[2].copy(), q0hi, rnorm, iterations, dt,
                         None, p_star_lo=end[3].copy())


def solve_balance(prob: BalanceProblem, want_trajectory: bool = False) -> BalanceResult:
    """Dispatch on prob.solver (and precision, for shooting)."""
    if prob.solver == "nudging":
        return nudge(prob, want_trajectory)
    if prob.resolved_precision() == "extended" and not want_trajectory:
        return shoot_extended(prob)
    return shoot(prob, want_trajectory)

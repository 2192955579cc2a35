"""Phase-space types, the symplectic operator J, potentials, and system right-hand sides.

The model is the fast-slow system

    dq/dt = p
    dp/dt = J p - eps * V'(q)

on R^{2d} x R^{2d}, together with its ramped variant where the potential
term is switched on by a monotone ramp rho(t/T).  The block convention

    J = [[0, I_d], [-I_d, 0]]

is fixed once here; everything downstream (exact rotations, slow vector
fields) derives from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, EvaluationError


def validate_epsilon(eps: float) -> float:
    """Check the scale-separation parameter: 0 < eps <= 1."""
    eps = float(eps)
    if not np.isfinite(eps) or eps <= 0.0 or eps > 1.0:
        raise ConfigurationError(f"epsilon must lie in (0, 1], got {eps}")
    return eps


def _as_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ConfigurationError(f"{name} must be a 1-d real vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class State:
    """Phase-space point: positions q and momenta p, both in R^{2d}."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = _as_vector(self.q, "q")
        p = _as_vector(self.p, "p")
        if q.shape != p.shape:
            raise ConfigurationError(f"q and p must have equal length, got {q.shape} vs {p.shape}")
        n = q.shape[0]
        if n < 2 or n % 2 != 0:
            raise ConfigurationError(f"state vectors must have even length 2d >= 2, got {n}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise EvaluationError("non-finite component in state", point=(q, p))
        q = q.copy()
        p = p.copy()
        q.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def dim(self) -> int:
        """The d in R^{2d}."""
        return self.q.shape[0] // 2


def apply_J(v: np.ndarray) -> np.ndarray:
    """Apply the canonical symplectic matrix: J(v1, v2) = (v2, -v1) blockwise.

    J is antisymmetric and J^2 = -I.
    """
    v = _as_vector(v, "v")
    n = v.shape[0]
    if n < 2 or n % 2 != 0:
        raise ConfigurationError(f"J acts on even-length vectors, got length {n}")
    d = n // 2
    out = np.empty_like(v)
    out[:d] = v[d:]
    out[d:] = -v[:d]
    return out


def apply_J_generic(v):
    """apply_J on a list of arbitrary ring elements (jets), same block convention."""
    n = len(v)
    d = n // 2
    return [v[d + i] for i in range(d)] + [-v[i] for i in range(d)]


# ---------------------------------------------------------------------------
# Potentials.  The catalog is polynomial throughout: gradients are exact for
# floats and for jet-valued inputs, and every member packs into plain arrays
# for the compiled integration kernels.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Potential:
    """Multivariate polynomial potential V(q) on R^{2d}.

    ``terms`` maps monomials to coefficients: each entry is
    (coefficient, exponents) with one exponent per coordinate of q.
    """

    dim: int
    tag: str
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError(f"potential dimension d must be >= 1, got {self.dim}")
        norm = []
        for coeff, powers in self.terms:
            powers = tuple(int(e) for e in powers)
            if len(powers) != 2 * self.dim:
                raise ConfigurationError(
                    f"term exponents must have length 2d={2 * self.dim}, got {len(powers)}"
                )
            if any(e < 0 for e in powers):
                raise ConfigurationError("monomial exponents must be non-negative")
            norm.append((float(coeff), powers))
        object.__setattr__(self, "terms", tuple(norm))

    @property
    def ncoords(self) -> int:
        return 2 * self.dim

    def value(self, q: np.ndarray) -> float:
        q = _as_vector(q, "q")
        self._check_len(q.shape[0])
        total = 0.0
        for coeff, powers in self.terms:
            mono = coeff
            for x, e in zip(q, powers):
                if e:
                    mono *= x ** e
            total += mono
        return float(total)

    def gradient(self, q: np.ndarray) -> np.ndarray:
        q = _as_vector(q, "q")
        self._check_len(q.shape[0])
        out = np.zeros_like(q)
        for coeff, powers in self.terms:
            for j, ej in enumerate(powers):
                if ej == 0:
                    continue
                g = coeff * ej
                for i, ei in enumerate(powers):
                    e = ei - 1 if i == j else ei
                    for _ in range(e):
                        g = g * q[i]
                out[j] += g
        if not np.all(np.isfinite(out)):
            raise EvaluationError("non-finite gradient", point=q)
        return out

    def gradient_generic(self, q):
        """Gradient on a list of ring elements (floats or jets); exact for polynomials."""
        self._check_len(len(q))
        out = [0.0] * len(q)
        for coeff, powers in self.terms:
            for j, ej in enumerate(powers):
                if ej == 0:
                    continue
                g = coeff * ej
                for i, ei in enumerate(powers):
                    e = ei - 1 if i == j else ei
                    for _ in range(e):
                        g = g * q[i]
                out[j] = out[j] + g
        return out

    def packed(self):
        """(coeffs, powers) arrays for the compiled kernels."""
        ncoef = len(self.terms)
        coeffs = np.zeros(ncoef, dtype=np.float64)
        powers = np.zeros((ncoef, self.ncoords), dtype=np.int64)
        for i, (coeff, pw) in enumerate(self.terms):
            coeffs[i] = coeff
            powers[i, :] = pw
        return coeffs, powers

    def _check_len(self, n: int):
        if n != self.ncoords:
            raise ConfigurationError(
                f"potential '{self.tag}' expects vectors of length {self.ncoords}, got {n}"
            )


def quartic_aniso() -> Potential:
    """Anisotropic quartic well V(q) = (3/4) q1^4 + (1/4) q2^4, d=1."""
    return Potential(dim=1, tag="quartic-aniso",
                     terms=((0.75, (4, 0)), (0.25, (0, 4))))


def harmonic(dim: int = 1) -> Potential:
    """Isotropic harmonic well V(q) = |q|^2 / 2."""
    terms = []
    for i in range(2 * dim):
        powers = [0] * (2 * dim)
        powers[i] = 2
        terms.append((0.5, tuple(powers)))
    return Potential(dim=dim, tag="harmonic", terms=tuple(terms))


def zero_potential(dim: int = 1) -> Potential:
    """V identically zero; the system is the trivial linear fast-slow system."""
    return Potential(dim=dim, tag="zero", terms=())


def polynomial(dim: int, terms) -> Potential:
    """Custom polynomial potential from a coefficient table."""
    return Potential(dim=dim, tag="custom-polynomial", terms=tuple(terms))


def make_potential(name: str, dim: int = 1, terms=None) -> Potential:
    """Catalog lookup by tag, as used in CLI configs."""
    if name == "quartic-aniso":
        return quartic_aniso()
    if name == "harmonic":
        return harmonic(dim)
    if name == "zero":
        return zero_potential(dim)
    if name == "custom-polynomial":
        if terms is None:
            raise ConfigurationError("custom-polynomial requires a coefficient table")
        return polynomial(dim, terms)
    raise ConfigurationError(f"unknown potential '{name}'")


# ---------------------------------------------------------------------------
# Right-hand sides and the conserved energy.
# ---------------------------------------------------------------------------

def full_rhs(s: State, eps: float, potential: Potential):
    """(dq, dp) of the full system: dq = p, dp = Jp - eps * grad V(q)."""
    eps = validate_epsilon(eps)
    dp = apply_J(s.p) - eps * potential.gradient(s.q)
    return s.p.copy(), dp


def ramped_rhs(s: State, t: float, eps: float, T: float, ramp, potential: Potential):
    """(dq, dp) of the ramped system: dp = Jp - eps * rho(t/T) * grad V(q)."""
    eps = validate_epsilon(eps)
    if T <= 0.0:
        raise ConfigurationError(f"ramp time T must be positive, got {T}")
    if t < 0.0 or t > T:
        raise DomainError(f"time {t} outside ramp interval [0, {T}]")
    rho = ramp.eval(t / T)
    dp = apply_J(s.p) - (eps * rho) * potential.gradient(s.q)
    return s.p.copy(), dp


def energy(s: State, eps: float, potential: Potential) -> float:
    """Conserved functional of the full system: E = |p|^2 / 2 + eps * V(q).

    dE/dt = p . Jp = 0 along solutions, by antisymmetry of J.
    """
    eps = validate_epsilon(eps)
    return 0.5 * float(np.dot(s.p, s.p)) + eps * potential.value(s.q)

"""Closed Euclidean trajectories and canonical fluctuation solutions.

Everything is expressed in reduced units hbar = m = omega = k_B = 1, so a
problem is fixed by the coupling g, the dimension D and the dimensionless
inverse temperature Theta.  The Euclidean motion runs in the inverted
potential; for an attractive central well the closed trajectory of
time-of-flight Theta is radial, dips to a turning radius at Theta/2 and
returns to its endpoint.

Two potentials have closed forms:

* harmonic, V = r^2/2: r_c(t) = r0 cosh(t - Theta/2)/cosh(Theta/2);
* single-well quartic, U = q^2/2 + q^4/4: q_c(t) = q_t nc(u_t, k) with
  u_t = sqrt(1+q_t^2) (t - Theta/2) and k^2 = (2+q_t^2)/(2(1+q_t^2)),
  so the modulus always lives in (1/sqrt(2), 1].

The canonical solutions of the longitudinal fluctuation equation
(-d^2/dt^2 + U''(q_c)) f = 0 are f_a = dq_c/dt and
f_b = f_a int_0^t f_a^-2; for the transverse equation
(-d^2/dt^2 + U'(q_c)/q_c) f = 0 they are f_a = q_c and
f_b = q_c int_0^t q_c^-2.  Both pairs have unit Wronskian and f_b(0) = 0,
which makes every determinant and Green's function downstream
denominator-free.  The antiderivatives are evaluated in closed form with
Jacobi epsilon functions; the divergent cn dn/sn piece of the
longitudinal antiderivative is folded algebraically into the prefactor
(sn dn/cn^2) (-cn dn/sn) = -dn^2/cn, so the midpoint t = Theta/2 where
f_a vanishes needs no series expansion.

A generic shooting solver is included purely as a numerical oracle for
the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .elliptic import complete_K, jacobi_epsilon, jacobi_sn_cn_dn
from .errors import ConvergenceError, DegenerateError, DomainError, PoleError

_BISECT_MAX = 200
_BISECT_RTOL = 1e-13


@dataclass(frozen=True)
class ReducedParams:
    """Dimensionless problem specification: coupling g, dimension D,
    inverse temperature Theta (temperature is T = 1/Theta)."""

    g: float
    D: int
    Theta: float

    def __post_init__(self):
        if self.g < 0.0:
            raise DomainError(f"coupling g={self.g!r} must be >= 0")
        if int(self.D) != self.D or self.D < 1:
            raise DomainError(f"dimension D={self.D!r} must be a positive integer")
        if not (self.Theta > 0.0 and math.isfinite(self.Theta)):
            raise DomainError(f"Theta={self.Theta!r} must be positive and finite")

    @property
    def T(self) -> float:
        return 1.0 / self.Theta


def _check_time(theta: float, Theta: float) -> float:
    # tolerate roundoff-level overshoot from adaptive steppers
    slack = 1e-9 * max(1.0, Theta)
    if not (-slack <= theta <= Theta + slack):
        raise DomainError(f"theta={theta!r} outside [0, {Theta}]")
    return min(max(theta, 0.0), Theta)


def harmonic_trajectory(r0: float, Theta: float, theta: float) -> float:
    """r0 cosh(theta - Theta/2)/cosh(Theta/2), the closed harmonic path."""
    if Theta <= 0.0:
        raise DomainError(f"Theta={Theta!r} must be positive")
    if r0 < 0.0:
        raise DomainError(f"r0={r0!r} must be >= 0")
    theta = _check_time(theta, Theta)
    # exp form keeps the ratio finite for large Theta
    x = abs(theta - 0.5 * Theta)
    y = 0.5 * Theta
    return r0 * math.exp(x - y) * (1.0 + math.exp(-2.0 * x)) / (1.0 + math.exp(-2.0 * y))


def harmonic_action(r0: float, Theta: float) -> float:
    """Euclidean action of the closed harmonic path, r0^2 tanh(Theta/2)."""
    if Theta <= 0.0:
        raise DomainError(f"Theta={Theta!r} must be positive")
    if r0 < 0.0:
        raise DomainError(f"r0={r0!r} must be >= 0")
    return r0 * r0 * math.tanh(0.5 * Theta)


# ---------------------------------------------------------------------------
# Quartic well, reduced form U(q) = q^2/2 + q^4/4.
# ---------------------------------------------------------------------------

def _modulus_sq_complement(q_t: float) -> float:
    # 1 - k^2 = q_t^2 / (2 (1 + q_t^2)), exact in q_t
    return q_t * q_t / (2.0 * (1.0 + q_t * q_t))


@dataclass(frozen=True)
class QuarticPath:
    """A closed trajectory of the quartic well, labelled by its turning
    value q_t and period Theta.

    Carries the elliptic modulus k (and m1 = 1 - k^2 formed exactly from
    q_t), the frequency scale s = sqrt(1 + q_t^2), the half-period
    argument u_T = s Theta / 2 and the endpoint q0 = q_t nc(u_T, k)."""

    q_t: float
    Theta: float
    k: float
    s: float
    q0: float
    m1: float = field(repr=False)
    u_T: float = field(repr=False)

    def u_of(self, theta: float) -> float:
        return self.s * (theta - 0.5 * self.Theta)

    def position(self, theta: float) -> float:
        theta = _check_time(theta, self.Theta)
        if self.q_t == 0.0:
            return 0.0
        _, cn, _ = jacobi_sn_cn_dn(self.u_of(theta), self.k, self.m1)
        return self.q_t / cn

    def velocity(self, theta: float) -> float:
        theta = _check_time(theta, self.Theta)
        if self.q_t == 0.0:
            return 0.0
        sn, cn, dn = jacobi_sn_cn_dn(self.u_of(theta), self.k, self.m1)
        return self.q_t * self.s * sn * dn / (cn * cn)


def quartic_path_from_qt(q_t: float, Theta: float) -> QuarticPath:
    """Build the quartic path with turning value q_t and period Theta.

    Raises PoleError when sqrt(1+q_t^2) Theta/2 >= K(k), i.e. when the
    endpoint q0 would sit at or beyond the pole of nc."""
    if q_t < 0.0 or not math.isfinite(q_t):
        raise DomainError(f"q_t={q_t!r} must be finite and >= 0")
    if Theta <= 0.0 or not math.isfinite(Theta):
        raise DomainError(f"Theta={Theta!r} must be positive and finite")
    m1 = _modulus_sq_complement(q_t)
    k = math.sqrt((2.0 + q_t * q_t) / (2.0 + 2.0 * q_t * q_t))
    s = math.sqrt(1.0 + q_t * q_t)
    u_T = 0.5 * s * Theta
    if q_t == 0.0:
        return QuarticPath(0.0, Theta, 1.0, 1.0, 0.0, 0.0, u_T)
    big_k = complete_K(k, m1=m1)
    if u_T >= big_k:
        raise PoleError(
            f"q_t={q_t}, Theta={Theta}: argument u={u_T:.6g} reaches the "
            f"nc pole at K={big_k:.6g}; the endpoint q0 is unbounded")
    _, cn, _ = jacobi_sn_cn_dn(u_T, k, m1)
    return QuarticPath(q_t, Theta, k, s, q_t / cn, m1, u_T)


def _pole_gap(q_t: float, Theta: float) -> float:
    # sqrt(1+q_t^2) Theta/2 - K(k(q_t)); the pole-free domain is gap < 0
    m1 = _modulus_sq_complement(q_t)
    k = math.sqrt((2.0 + q_t * q_t) / (2.0 + 2.0 * q_t * q_t))
    return 0.5 * math.sqrt(1.0 + q_t * q_t) * Theta - complete_K(k, m1=m1)


def q_theta_max(Theta: float) -> float:
    """Largest admissible turning value q_Theta at fixed Theta, the root of
    sqrt(1+q_t^2) Theta/2 = K(k(q_t)).  Below it paths are pole-free; as
    q_t -> q_Theta the endpoint q0 diverges."""
    if Theta <= 0.0 or not math.isfinite(Theta):
        raise DomainError(f"Theta={Theta!r} must be positive and finite")
    lo = 0.0  # gap(0+) = Theta/2 - inf < 0
    hi = 1.0
    for _ in range(200):
        if _pole_gap(hi, Theta) > 0.0:
            break
        hi *= 2.0
    else:  # pragma: no cover - gap grows like q_t Theta/2
        raise ConvergenceError(f"no pole crossing bracketed below q_t={hi}")
    for _ in range(_BISECT_MAX):
        mid = 0.5 * (lo + hi)
        if _pole_gap(mid, Theta) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= _BISECT_RTOL * hi:
            break
    return 0.5 * (lo + hi)


def invert_endpoint(q0: float, Theta: float) -> float:
    """Turning value q_t in [0, q_Theta) whose path ends at q0; inverts
    q0 = q_t nc(u_T, k) by bisection (the map is strictly increasing and
    onto [0, inf))."""
    if q0 < 0.0 or not math.isfinite(q0):
        raise DomainError(f"q0={q0!r} must be finite and >= 0")
    if q0 == 0.0:
        return 0.0
    q_cap = q_theta_max(Theta)
    lo, hi = 0.0, q_cap * (1.0 - 1e-15)

    def endpoint(q_t: float) -> float:
        try:
            return quartic_path_from_qt(q_t, Theta).q0
        except PoleError:
            return math.inf

    for _ in range(_BISECT_MAX):
        mid = 0.5 * (lo + hi)
        gap = endpoint(mid) - q0
        if abs(gap) <= 1e-12 * (1.0 + q0):
            return mid
        if gap > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(hi, 1e-300):
            break
    return 0.5 * (lo + hi)


def quartic_action(path: QuarticPath) -> float:
    """Dimensionless Euclidean action I[q_c] of a quartic path (the
    physical action is (m^2 w^3 / lambda) I)."""
    qt = path.q_t
    if qt == 0.0:
        return 0.0
    u = path.u_T
    s = path.s
    sn, cn, dn = jacobi_sn_cn_dn(u, path.k, path.m1)
    eps = jacobi_epsilon(u, path.k, path.m1)
    nc2 = 1.0 / (cn * cn)
    qt2 = qt * qt
    boundary = sn * (1.0 + 0.5 * qt2 * nc2) * math.sqrt(1.0 + 0.5 * qt2 * (1.0 + nc2))
    return (path.Theta * (0.5 * qt2 + 0.25 * qt2 * qt2)
            + (4.0 / 3.0) * (-s * (eps + 0.5 * qt2 * u) + boundary))


# ---------------------------------------------------------------------------
# Canonical solutions of the fluctuation equations.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalPair:
    """Two independent solutions (f_a, f_b) of a fluctuation equation with
    unit Wronskian and f_b(0) = 0, plus their time derivatives."""

    fa: Callable[[float], float]
    fb: Callable[[float], float]
    fa_dot: Callable[[float], float]
    fb_dot: Callable[[float], float]

    def eval(self, theta: float) -> tuple[float, float, float, float]:
        return (self.fa(theta), self.fb(theta),
                self.fa_dot(theta), self.fb_dot(theta))

    def wronskian(self, theta: float) -> float:
        fa, fb, fad, fbd = self.eval(theta)
        return fa * fbd - fad * fb


def harmonic_canonical_pair() -> CanonicalPair:
    """(cosh, sinh): canonical pair of -d^2/dt^2 + 1 (both harmonic
    channels, since r^-1 V' = V'' for a quadratic well)."""
    return CanonicalPair(math.cosh, math.sinh, math.sinh, math.cosh)


def _pair_coefficients(path: QuarticPath):
    k2 = path.k * path.k
    m1 = path.m1
    return k2, m1


def canonical_longitudinal(path: QuarticPath) -> CanonicalPair:
    """Canonical pair of the longitudinal operator -d^2/dt^2 + U''(q_c).

    f_a = dq_c/dt vanishes at the midpoint, where the closed-form
    antiderivative in f_b has a compensating cn dn/sn divergence; the
    product is evaluated in the folded form -dn^2/cn, which is exact."""
    qt, s, Th = path.q_t, path.s, path.Theta
    if qt == 0.0:
        raise DegenerateError("q_t = 0: dq_c/dt vanishes identically; "
                              "use the harmonic pair instead")
    k, m1 = path.k, path.m1
    k2 = k * k
    u0 = -path.u_T

    def antider_reg(u, sn, cn, dn, eps):
        # int cn^4/(sn dn)^-2 du  minus its singular -cn dn/sn piece
        return (-m1 * u + (2.0 * m1 - 1.0) * eps) / k2 - m1 * sn * cn / dn

    sn0, cn0, dn0 = jacobi_sn_cn_dn(u0, k, m1)
    eps0 = jacobi_epsilon(u0, k, m1)
    f_const = antider_reg(u0, sn0, cn0, dn0, eps0) - cn0 * dn0 / sn0

    def slope(u, sn, cn, dn):
        return sn * dn / (cn * cn)

    def slope_prime(u, cn):
        nc = 1.0 / cn
        return (2.0 * k2 - 1.0) * nc + 2.0 * m1 * nc ** 3

    def fa(theta: float) -> float:
        u = path.u_of(theta)
        sn, cn, dn = jacobi_sn_cn_dn(u, k, m1)
        return qt * s * slope(u, sn, cn, dn)

    def fa_dot(theta: float) -> float:
        u = path.u_of(theta)
        _, cn, _ = jacobi_sn_cn_dn(u, k, m1)
        return qt * s * s * slope_prime(u, cn)

    def fb(theta: float) -> float:
        u = path.u_of(theta)
        sn, cn, dn = jacobi_sn_cn_dn(u, k, m1)
        eps = jacobi_epsilon(u, k, m1)
        g = antider_reg(u, sn, cn, dn, eps)
        return (slope(u, sn, cn, dn) * (g - f_const) - dn * dn / cn) / (qt * s * s)

    def fb_dot(theta: float) -> float:
        u = path.u_of(theta)
        sn, cn, dn = jacobi_sn_cn_dn(u, k, m1)
        eps = jacobi_epsilon(u, k, m1)
        g = antider_reg(u, sn, cn, dn, eps)
        # G' - dn^2 + 2 k^2 cn^2 collapses to an explicit O(m1) factor;
        # the raw three-term form cancels catastrophically deep in the
        # k -> 1 tail where cn^2 ~ dn^2 ~ e^{-2u}
        cross = -slope(u, sn, cn, dn) * m1 * (cn * cn * (1.0 + 2.0 * k2)
                                              + 2.0 * m1) / (dn * dn)
        return (slope_prime(u, cn) * (g - f_const) + cross) / (qt * s)

    return CanonicalPair(fa, fb, fa_dot, fb_dot)


def canonical_transverse(path: QuarticPath) -> CanonicalPair:
    """Canonical pair of the transverse operator -d^2/dt^2 + U'(q_c)/q_c;
    f_a is the trajectory itself."""
    qt, s = path.q_t, path.s
    if qt == 0.0:
        raise DegenerateError("q_t = 0: transverse pair degenerates; "
                              "use the harmonic pair instead")
    k, m1 = path.k, path.m1
    k2 = k * k
    u0 = -path.u_T

    def psi(u, eps):
        return eps - m1 * u

    psi0 = psi(u0, jacobi_epsilon(u0, k, m1))

    def fa(theta: float) -> float:
        u = path.u_of(theta)
        _, cn, _ = jacobi_sn_cn_dn(u, k, m1)
        return qt / cn

    def fa_dot(theta: float) -> float:
        u = path.u_of(theta)
        sn, cn, dn = jacobi_sn_cn_dn(u, k, m1)
        return qt * s * sn * dn / (cn * cn)

    def fb(theta: float) -> float:
        u = path.u_of(theta)
        _, cn, _ = jacobi_sn_cn_dn(u, k, m1)
        eps = jacobi_epsilon(u, k, m1)
        return (psi(u, eps) - psi0) / (cn * k2 * qt * s)

    def fb_dot(theta: float) -> float:
        u = path.u_of(theta)
        sn, cn, dn = jacobi_sn_cn_dn(u, k, m1)
        eps = jacobi_epsilon(u, k, m1)
        slope = sn * dn / (cn * cn)
        return (slope * (psi(u, eps) - psi0) + k2 * cn) / (k2 * qt)

    return CanonicalPair(fa, fb, fa_dot, fb_dot)


# ---------------------------------------------------------------------------
# Potentials and the shooting oracle.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialPotential:
    """Attractive central potential V(r), smooth at the origin, given by
    its radial profile and first two derivatives."""

    v: Callable[[float], float]
    dv: Callable[[float], float]
    d2v: Callable[[float], float]

    def gradient(self, x: np.ndarray) -> np.ndarray:
        r = float(np.linalg.norm(x))
        if r < 1e-14:
            return np.zeros_like(x)
        return (self.dv(r) / r) * x

    def hessian(self, x: np.ndarray) -> np.ndarray:
        # dd_ij V = (V'/r) delta_ij + (V'' - V'/r) x_i x_j / r^2
        d = len(x)
        r = float(np.linalg.norm(x))
        if r < 1e-14:
            return self.d2v(0.0) * np.eye(d)
        n = np.asarray(x, dtype=float) / r
        radial = self.dv(r) / r
        return radial * np.eye(d) + (self.d2v(r) - radial) * np.outer(n, n)


def harmonic_well() -> RadialPotential:
    return RadialPotential(lambda r: 0.5 * r * r, lambda r: r, lambda r: 1.0)


def quartic_well() -> RadialPotential:
    """Reduced single-well quartic potential U(q) = q^2/2 + q^4/4."""
    return RadialPotential(lambda q: 0.5 * q * q + 0.25 * q ** 4,
                           lambda q: q + q ** 3,
                           lambda q: 1.0 + 3.0 * q * q)


@dataclass(frozen=True)
class ShootResult:
    """Radial trajectory found by shooting: sample grid, initial slope and
    achieved boundary residual.  Calling it evaluates the dense solution."""

    theta: np.ndarray
    r: np.ndarray
    v0: float
    residual: float
    _sol: object = field(repr=False)

    def __call__(self, theta: float) -> float:
        return float(self._sol.sol(theta)[0])


def shoot_radial_path(potential: RadialPotential, r0: float, Theta: float,
                      n_samples: int = 256) -> ShootResult:
    """Solve d^2r/dt^2 = V'(r) with r(0) = r(Theta) = r0 by shooting on the
    initial slope.  Verification oracle only; the closed forms above are
    the production path."""
    if Theta <= 0.0:
        raise DomainError(f"Theta={Theta!r} must be positive")
    if r0 < 0.0:
        raise DomainError(f"r0={r0!r} must be >= 0")
    grid = np.linspace(0.0, Theta, n_samples)
    if r0 == 0.0:
        sol = solve_ivp(lambda t, y: [y[1], 0.0], (0.0, Theta), [0.0, 0.0],
                        dense_output=True, rtol=1e-12, atol=1e-12)
        return ShootResult(grid, np.zeros_like(grid), 0.0, 0.0, sol)

    def integrate(v: float):
        return solve_ivp(lambda t, y: [y[1], potential.dv(y[0])],
                         (0.0, Theta), [r0, v], dense_output=True,
                         rtol=1e-12, atol=1e-12)

    def miss(v: float) -> float:
        return integrate(v).y[0, -1] - r0

    v_hi = 0.0
    v_lo = -max(1.0, r0)
    for _ in range(60):
        if miss(v_lo) < 0.0:
            break
        v_lo *= 2.0
    else:
        raise ConvergenceError(
            f"shooting failed to bracket a returning path for r0={r0}, "
            f"Theta={Theta}; tried initial slopes in [{v_lo}, 0]")
    v0 = brentq(miss, v_lo, v_hi, xtol=1e-13, rtol=8.9e-16)
    sol = integrate(v0)
    residual = abs(sol.y[0, -1] - r0)
    if residual > 1e-9:
        raise ConvergenceError(
            f"shooting residual {residual:.3e} exceeds 1e-9 for r0={r0}, "
            f"Theta={Theta}")
    return ShootResult(grid, sol.sol(grid)[0], v0, residual, sol)

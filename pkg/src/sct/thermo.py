"""Partition functions and specific heat in reduced units.

Assembles the pieces of the quadratic (one-loop) approximation

    Z2 = (2 pi^{D/2} / Gamma(D/2)) int dq0 q0^{D-1} e^{-S} Delta^{-1/2},

together with the exact harmonic result, the classical phase-space
integral and a Bohr-Sommerfeld reference spectrum, all as functions of
the dimensionless inverse temperature Theta.

For the quartic well the q0 integral is transformed to the turning value
q_t on [0, q_Theta), with the Jacobian identity

    dq0/dq_t = U'(q_t) Delta_l / (4 pi sqrt(2 [U(q0) - U(q_t)]))

evaluated in a factored form whose q_t -> 0 limit is cosh(Theta/2)
exactly.  The integrand vanishes at the q_Theta endpoint (the action
grows without bound there), so the quadrature is cut where the integrand
has dropped ~40 e-folds below its peak and the remainder is controlled
by an analytic tail bound that is reported, never silently added.

Specific heat is C = Theta^2 d^2(ln Z)/dTheta^2, computed from ln Z with
a five-point stencil plus one Richardson step; the error estimate rides
along with the value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (
    ConvergenceError,
    DomainError,
    QuadratureError,
    TruncationError,
)
from .fluctuations import (
    _det_longitudinal_closed,
    _det_transverse_closed,
    det_longitudinal,
    det_transverse,
    omega_kernel,
)
from .paths import (
    QuarticPath,
    ReducedParams,
    harmonic_action,
    harmonic_canonical_pair,
    q_theta_max,
    quartic_action,
    quartic_path_from_qt,
)
from .elliptic import jacobi_sn_cn_dn

_TWO_PI = 2.0 * math.pi

# Gamma(D/2) exactly for the dimensions that actually occur; the general
# formula only kicks in past D = 12.
_SQRT_PI = math.sqrt(math.pi)
_GAMMA_HALF_TABLE = {
    1: _SQRT_PI, 2: 1.0, 3: _SQRT_PI / 2.0, 4: 1.0,
    5: 3.0 * _SQRT_PI / 4.0, 6: 2.0, 7: 15.0 * _SQRT_PI / 8.0, 8: 6.0,
    9: 105.0 * _SQRT_PI / 16.0, 10: 24.0,
    11: 945.0 * _SQRT_PI / 32.0, 12: 120.0,
}


def gamma_half(D: int) -> float:
    """Gamma(D/2) for positive integer D."""
    if D in _GAMMA_HALF_TABLE:
        return _GAMMA_HALF_TABLE[D]
    return math.gamma(0.5 * D)


def _angular_prefactor(D: int) -> float:
    # surface of the unit (D-1)-sphere
    return 2.0 * math.pi ** (0.5 * D) / gamma_half(D)


def ln_z_harmonic(D: int, Theta: float) -> float:
    """ln of the harmonic partition function, -D ln(2 sinh(Theta/2)),
    evaluated in log space so large Theta cannot overflow."""
    if Theta <= 0.0:
        raise DomainError(f"Theta={Theta!r} must be positive")
    if D < 1:
        raise DomainError(f"D={D!r} must be >= 1")
    return -D * (0.5 * Theta + math.log1p(-math.exp(-Theta)))


def z_harmonic(D: int, Theta: float) -> float:
    """Harmonic partition function [2 sinh(Theta/2)]^-D."""
    return math.exp(ln_z_harmonic(D, Theta))


def z2_harmonic_integral(D: int, Theta: float, tol: float = 1e-10) -> float:
    """End-to-end pipeline check: the radial one-loop integral with the
    harmonic action and determinant must reproduce z_harmonic exactly
    (the quadratic approximation is exact for a quadratic well)."""
    if Theta <= 0.0:
        raise DomainError(f"Theta={Theta!r} must be positive")
    det_l = _TWO_PI * omega_kernel(harmonic_canonical_pair()).eval(0.0, Theta)

    def integrand(r):
        return r ** (D - 1) * math.exp(-harmonic_action(r, Theta))

    val, err = quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=tol, limit=200)
    if err > 10.0 * tol * abs(val):
        raise QuadratureError(
            f"harmonic radial integral: error estimate {err:.3e} above tolerance")
    return _angular_prefactor(D) * val * det_l ** (-0.5 * D)


def jacobian_dq0_dqt(path: QuarticPath) -> float:
    """dq0/dq_t at fixed Theta from the determinant identity.  The
    factored form divides out U'(q_t) ~ q_t against sqrt(U(q0) - U(q_t)),
    so q_t = 0 returns the harmonic limit cosh(Theta/2) exactly."""
    qt = path.q_t
    det_l = (_TWO_PI * math.sinh(path.Theta) if qt == 0.0
             else _det_longitudinal_closed(path))
    sn, cn, _ = jacobi_sn_cn_dn(path.u_T, path.k, path.m1)
    nc2 = 1.0 / (cn * cn)
    # sqrt(2 [U(q0)-U(q_t)]) = q_t (sn/cn) sqrt(1 + q_t^2 (nc^2 + 1) / 2)
    # and U'(q_t) = q_t (1 + q_t^2); one q_t cancels.
    slope_factor = (sn / cn) * math.sqrt(1.0 + 0.5 * qt * qt * (nc2 + 1.0))
    return (1.0 + qt * qt) * det_l / (2.0 * _TWO_PI * slope_factor)


def _z2_quartic_integrand(params: ReducedParams, check_routes: bool):
    g, D = params.g, params.D
    Theta = params.Theta

    def integrand(qt: float) -> float:
        path = quartic_path_from_qt(qt, Theta)
        if check_routes and qt > 0.0:
            det_l = det_longitudinal(path)
            det_t = det_transverse(path)
        else:
            det_l = (_TWO_PI * math.sinh(Theta) if qt == 0.0
                     else _det_longitudinal_closed(path))
            det_t = (det_l if qt == 0.0 else _det_transverse_closed(path))
        act = quartic_action(path)
        jac = jacobian_dq0_dqt(path)
        return (jac * path.q0 ** (D - 1) * math.exp(-act / g)
                / math.sqrt(det_l * det_t ** (D - 1)))

    return integrand


def _quartic_u(q: float) -> float:
    return 0.5 * q * q + 0.25 * q ** 4


def _tail_bound(params: ReducedParams, q_cut: float) -> float:
    """Bound on the neglected [q_cut, q_Theta) piece, written as a q0
    integral.  Along the fixed-Theta family U(q0) - U(q_t) never
    decreases (dq_t/dq0 < 1 and U' is increasing), so
    dI/dq0 >= 2 sqrt(2 [U(q0(q_cut)) - U(q_cut)]) on the whole tail, and
    the determinants only grow; the integrand is dominated by a decaying
    exponential with polynomial prefactor (closed form below)."""
    g, D = params.g, params.D
    path = quartic_path_from_qt(q_cut, params.Theta)
    q0 = path.q0
    gap = _quartic_u(q0) - _quartic_u(q_cut)
    if gap <= 0.0:
        return math.inf
    decay = 2.0 * math.sqrt(2.0 * gap) / g
    det_l = _det_longitudinal_closed(path)
    det_t = _det_transverse_closed(path)
    log_front = -quartic_action(path) / g - 0.5 * (math.log(det_l)
                                                   + (D - 1) * math.log(det_t))
    if log_front < -700.0:
        return 0.0
    poly = sum(math.comb(D - 1, j) * q0 ** (D - 1 - j) * math.factorial(j)
               / decay ** (j + 1) for j in range(D))
    return math.exp(log_front) * poly


def z2_quartic(params: ReducedParams, tol: float = 1e-7) -> float:
    """One-loop partition function of the quartic well: the q_t integral
    of jacobian * q0^(D-1) * exp(-I/g) * (Delta_l Delta_t^(D-1))^(-1/2)
    over [0, q_Theta), times the angular and coupling prefactors."""
    if params.g <= 0.0:
        raise DomainError(f"g={params.g!r} must be positive (use z_harmonic at g=0)")
    g, D, Theta = params.g, params.D, params.Theta
    q_cap = q_theta_max(Theta)
    f_scan = _z2_quartic_integrand(params, check_routes=False)
    f_checked = _z2_quartic_integrand(params, check_routes=True)

    # locate the peak and the ~40 e-fold cutoff on a scan grid that covers
    # both the weak-coupling scale sqrt(g/sinh Theta) and the full window
    sigma = (math.sqrt(g / math.sinh(Theta)) if Theta < 700.0
             else math.sqrt(2.0 * g) * math.exp(-0.5 * Theta))
    scan = np.unique(np.concatenate([
        np.geomspace(min(1e-3 * sigma, 1e-4 * q_cap), min(20.0 * sigma, 0.999 * q_cap), 40),
        np.linspace(1e-4 * q_cap, 0.9995 * q_cap, 80),
    ]))
    with np.errstate(over="ignore", under="ignore"):
        logs = []
        for q in scan:
            val = f_scan(float(q))
            logs.append(math.log(val) if val > 0.0 else -math.inf)
    logs = np.asarray(logs)
    i_peak = int(np.argmax(logs))
    log_peak = logs[i_peak]
    if not math.isfinite(log_peak):
        raise QuadratureError("quartic integrand vanished on the scan grid")
    q_peak = float(scan[i_peak])

    above = np.nonzero((scan > q_peak) & (logs < log_peak - 40.0))[0]
    q_cut = float(scan[above[0]]) if above.size else 0.9995 * q_cap

    inner = [q for q in (q_peak, 0.5 * q_cut, 2.0 * sigma) if 0.0 < q < q_cut]
    val, err = quad(f_checked, 0.0, q_cut, points=sorted(set(inner)) or None,
                    limit=200, epsabs=0.0, epsrel=0.5 * tol)
    if val <= 0.0 or err > tol * val:
        raise QuadratureError(
            f"quartic q_t quadrature achieved {err:.3e} on value {val:.6e}, "
            f"requested relative {tol:.1e}")
    tail = _tail_bound(params, q_cut)
    if tail > tol * val:
        raise QuadratureError(
            f"tail bound {tail:.3e} beyond q_t={q_cut:.6g} exceeds tolerance "
            f"{tol:.1e} on value {val:.6e}")
    return _angular_prefactor(D) * g ** (-0.5 * D) * val


def ln_z2_quartic(params: ReducedParams, tol: float = 1e-7) -> float:
    return math.log(z2_quartic(params, tol))


def z_classical(params: ReducedParams, tol: float = 1e-10) -> float:
    """Classical partition function (2 pi Theta)^(-D/2) int d^D x e^(-Theta V),
    radial form; V(r) = r^2/2 + g r^4/4 in reduced units."""
    g, D, Theta = params.g, params.D, params.Theta

    def integrand(r):
        return r ** (D - 1) * math.exp(-Theta * (0.5 * r * r + 0.25 * g * r ** 4))

    val, err = quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=tol, limit=200)
    if err > 10.0 * tol * abs(val):
        raise QuadratureError(
            f"classical integral: error estimate {err:.3e} above tolerance")
    return (_TWO_PI * Theta) ** (-0.5 * D) * _angular_prefactor(D) * val


def ln_z_classical(params: ReducedParams, tol: float = 1e-10) -> float:
    return math.log(z_classical(params, tol))


# ---------------------------------------------------------------------------
# Bohr-Sommerfeld reference spectrum (one dimension).
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)
# mapped once onto [0, pi/2]
_GL_PHI = 0.25 * math.pi * (_GL_NODES + 1.0)
_GL_W = 0.25 * math.pi * _GL_WEIGHTS
_GL_COS2 = np.cos(_GL_PHI) ** 2
_GL_1PSIN2 = 1.0 + np.sin(_GL_PHI) ** 2


def _phase_integral(energy: float, g: float) -> float:
    """Closed-orbit phase integral of p = sqrt(2 [E - V(x)]) for
    V = x^2/2 + g x^4/4.  The substitution x = x_+ sin(phi) removes the
    turning-point singularity: the integrand becomes
    4 x_+^2 cos^2(phi) sqrt(1 + g x_+^2 (1 + sin^2 phi)/2), analytic on
    [0, pi/2], so fixed Gauss-Legendre converges spectrally."""
    if energy <= 0.0:
        return 0.0
    # x_+^2 = (sqrt(1+4gE)-1)/g without small-g cancellation
    xp2 = 4.0 * energy / (1.0 + math.sqrt(1.0 + 4.0 * g * energy))
    vals = _GL_COS2 * np.sqrt(1.0 + 0.5 * g * xp2 * _GL_1PSIN2)
    return 4.0 * xp2 * float(np.dot(_GL_W, vals))


@dataclass(frozen=True)
class WkbSpectrum:
    """Bohr-Sommerfeld levels E_0..E_{n_max} of the one-dimensional
    quartic well, each solving  (phase integral)(E_n) = 2 pi (n + 1/2)."""

    levels: tuple
    g: float
    n_max: int

    def __post_init__(self):
        if len(self.levels) != self.n_max + 1:
            raise DomainError("level count does not match n_max")
        if self.levels[0] <= 0.0:
            raise DomainError("ground state must be positive")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise DomainError("levels must be strictly increasing")


def wkb_levels(g: float, n_max: int) -> WkbSpectrum:
    """Solve the Bohr-Sommerfeld condition for levels 0..n_max (D = 1)."""
    if g < 0.0:
        raise DomainError(f"g={g!r} must be >= 0")
    if n_max < 0:
        raise DomainError(f"n_max={n_max!r} must be >= 0")
    from scipy.optimize import brentq

    levels = []
    lo = 1e-12
    for n in range(n_max + 1):
        target = _TWO_PI * (n + 0.5)
        hi = max(2.0 * (n + 1.0), lo * 2.0)
        for _ in range(200):
            if _phase_integral(hi, g) > target:
                break
            hi *= 2.0
        else:
            raise ConvergenceError(
                f"level {n}: no bracket; phase integral is "
                f"{_phase_integral(lo, g):.6e} at E={lo:.3e} and "
                f"{_phase_integral(hi, g):.6e} at E={hi:.3e}")
        energy = brentq(lambda e: _phase_integral(e, g) - target, lo, hi,
                        xtol=1e-13, rtol=8.9e-16)
        resid = abs(_phase_integral(energy, g) - target)
        if resid > 1e-9:
            raise ConvergenceError(
                f"level {n}: quantization residual {resid:.3e} above 1e-9")
        levels.append(energy)
        lo = energy
    return WkbSpectrum(tuple(levels), g, n_max)


def z_wkb(spectrum: WkbSpectrum, Theta: float) -> float:
    """Partition sum over the Bohr-Sommerfeld spectrum.  Raises
    TruncationError unless the first omitted level (bounded below by
    linear extrapolation; level spacing never decreases for this well)
    would contribute less than 1e-16 of the partial sum."""
    if Theta <= 0.0:
        raise DomainError(f"Theta={Theta!r} must be positive")
    energies = np.asarray(spectrum.levels)
    e0 = energies[0]
    partial = float(np.exp(-Theta * (energies - e0)).sum())
    if len(energies) >= 2:
        e_next = 2.0 * energies[-1] - energies[-2]
    else:
        e_next = energies[-1] + 1.0
    if math.exp(-Theta * (e_next - e0)) >= 1e-16 * partial:
        raise TruncationError(
            f"spectrum truncated at n_max={spectrum.n_max} is too short at "
            f"Theta={Theta}: next level ~{e_next:.4g} still contributes")
    return math.exp(-Theta * e0) * partial


# ---------------------------------------------------------------------------
# Specific heat and temperature curves.
# ---------------------------------------------------------------------------

def specific_heat(lnz, Theta: float, rel_step: float = 1e-3,
                  min_step: float = 1e-4, target_err: float | None = None):
    """C = Theta^2 d^2(ln Z)/dTheta^2 by a five-point stencil at step
    h = max(rel_step * Theta, min_step), Richardson-extrapolated once.
    Returns (C, error_estimate); raises ConvergenceError if a requested
    target error cannot be met (noisy ln Z / collapsed step)."""
    if Theta <= 0.0:
        raise DomainError(f"Theta={Theta!r} must be positive")
    h = max(rel_step * Theta, min_step)
    h = min(h, 0.249 * Theta)
    f0 = lnz(Theta)

    def stencil(hh: float) -> float:
        return (-lnz(Theta - 2 * hh) + 16.0 * lnz(Theta - hh) - 30.0 * f0
                + 16.0 * lnz(Theta + hh) - lnz(Theta + 2 * hh)) / (12.0 * hh * hh)

    d_h = stencil(h)
    d_h2 = stencil(0.5 * h)
    richardson = (16.0 * d_h2 - d_h) / 15.0
    noise_floor = 1e-14 * max(1.0, abs(f0)) / (0.25 * h * h)
    err = Theta * Theta * (abs(richardson - d_h2) + noise_floor)
    value = Theta * Theta * richardson
    if target_err is not None and err > target_err:
        raise ConvergenceError(
            f"specific heat error estimate {err:.3e} exceeds requested "
            f"{target_err:.3e} at Theta={Theta} (ln Z too noisy for step {h:.1e})")
    return value, err


@dataclass(frozen=True)
class ThermoCurve:
    """Temperature grid with ln Z, specific heat and its error estimate."""

    T_grid: tuple
    lnZ: tuple
    C: tuple
    C_err: tuple

    def __post_init__(self):
        n = len(self.T_grid)
        if any(len(x) != n for x in (self.lnZ, self.C, self.C_err)):
            raise DomainError("curve columns must have equal length")
        if any(b <= a for a, b in zip(self.T_grid, self.T_grid[1:])):
            raise DomainError("temperature grid must be strictly increasing")


def thermo_curve(lnz, T_grid) -> ThermoCurve:
    """Evaluate ln Z and C on a caller-supplied temperature grid
    (the library never invents grids)."""
    ts, lnzs, cs, errs = [], [], [], []
    for T in T_grid:
        if T <= 0.0:
            raise DomainError(f"temperature {T!r} must be positive")
        Theta = 1.0 / T
        c, c_err = specific_heat(lnz, Theta)
        ts.append(float(T))
        lnzs.append(lnz(Theta))
        cs.append(c)
        errs.append(c_err)
    return ThermoCurve(tuple(ts), tuple(lnzs), tuple(cs), tuple(errs))

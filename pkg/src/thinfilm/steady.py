"""Even-cosine collocation of the nonlocal steady problem

    F(v, M) = v'' - g v + M omega(v) - M K(v) = 0,   K(v) = mean of omega(v),

with Newton iteration, plus an independent shooting solver on the
Hamiltonian ODE used as an oracle.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import root

from . import spectral
from .errors import ConvergenceError, NoSolutionError, PositivityError
from .model import (
    HamiltonianParams,
    ModelParams,
    PeriodicProfile,
    mass_constant_K,
    omega,
    omega_prime,
    potential_G,
    profile_flux,
)

log = logging.getLogger(__name__)

DEFAULT_MODES = 64
MAX_MODES = 512
POSITIVITY_FLOOR = 1e-6
TAIL_RATIO = 1e-10
FLUX_TOL = 1e-8


@dataclass(frozen=True)
class CollocationSystem:
    """Discrete F(., M) on N cosine modes collocated at n_c >= 2N+1 points."""

    k0: float
    N: int
    g: float = 1.0
    n_c: int = None

    def __post_init__(self):
        if self.n_c is None:
            object.__setattr__(self, "n_c", 4 * self.N)
        if self.n_c < 2 * self.N + 1:
            raise ValueError("need at least 2N+1 collocation points")

    @cached_property
    def ell(self):
        return np.arange(1, self.N + 1)

    @cached_property
    def stiffness(self):
        return (self.k0 * self.ell) ** 2

    @cached_property
    def cosines(self):
        return spectral.cosine_matrix(self.k0, self.N, self.n_c)

    def values(self, a):
        v = spectral.cosine_samples(a, self.k0, self.n_c)
        hmin = 1.0 + v.min()
        if not hmin > 0:
            raise PositivityError(f"min(1 + v) = {hmin:.3e} on the collocation grid")
        return v

    def residual(self, a, M):
        v = self.values(a)
        f = -self.g * v + M * omega(v)
        f -= f.mean()  # the M K(v) term
        return -self.stiffness * a + spectral.cosine_coefficients(f, self.N)

    def residual_M(self, a):
        """Partial derivative of the residual with respect to M."""
        w = omega(self.values(a))
        return spectral.cosine_coefficients(w - w.mean(), self.N)

    def jacobian(self, a, M):
        v = self.values(a)
        q = -self.g + M * omega_prime(v)
        qc = q[:, None] * self.cosines
        qc -= qc.mean(axis=0)  # rank-one period average from K(v)
        jac = (2.0 / self.n_c) * self.cosines.T @ qc
        jac[np.diag_indices(self.N)] -= self.stiffness
        return jac


def _system(profile, g, n_c=None):
    return CollocationSystem(profile.k0, profile.N, g, n_c)


def residual(v, M, g=1.0, n_c=None):
    """Cosine coefficients (modes 1..N) of F(v, M); the mean mode is zero."""
    return _system(v, g, n_c).residual(v.coeffs, M)


def jacobian(v, M, g=1.0, n_c=None):
    """Dense N x N linearisation of `residual` in coefficient space."""
    return _system(v, g, n_c).jacobian(v.coeffs, M)


def flux_residual(profile, M, g=1.0):
    """Sup norm of the stationary flux of h = 1 + v."""
    _, flux = profile_flux(profile, ModelParams(g, M, profile.k0))
    return float(np.max(np.abs(flux)))


FLAT_LEVEL = 1e-13


def tail_ratio(coeffs):
    """|last coefficient| / largest; 0 for a flat (round-off level) profile."""
    peak = np.max(np.abs(coeffs))
    return 0.0 if peak <= FLAT_LEVEL else abs(coeffs[-1]) / peak


@dataclass
class NewtonInfo:
    iterations: int
    residual_norm: float
    N: int


def _newton_fixed_N(system, a, M, tol, max_iter, floor):
    a = np.array(a, dtype=float)
    r = system.residual(a, M)
    for it in range(max_iter + 1):
        rnorm = np.max(np.abs(r))
        if rnorm < tol:
            return a, it, rnorm
        if it == max_iter:
            break
        delta = np.linalg.solve(system.jacobian(a, M), -r)
        lam = 1.0
        for _ in range(40):
            trial = a + lam * delta
            vmin = spectral.cosine_samples(trial, system.k0, system.n_c).min()
            if 1.0 + vmin > floor:
                break
            lam *= 0.5
        else:
            raise PositivityError("Newton step collapsed below the positivity floor")
        a = trial
        r = system.residual(a, M)
        log.debug("newton it=%d |r|=%.3e lambda=%g", it + 1, np.max(np.abs(r)), lam)
    raise ConvergenceError(f"Newton did not reach |r| < {tol:g} in {max_iter} iterations "
                           f"(|r| = {rnorm:.3e})")


def newton_solve(guess, M, g=1.0, *, tol=1e-11, max_iter=50, adapt=True,
                 max_modes=MAX_MODES, floor=POSITIVITY_FLOOR, full_output=False):
    """Damped Newton on F(., M) = 0 starting from `guess`.

    Steps that push min(1+v) below `floor` are halved. With `adapt`, N is
    doubled (up to `max_modes`) while the last coefficient exceeds 1e-10 of
    the largest or the stationary flux exceeds FLUX_TOL.
    """
    guess.check_positive(floor=floor)
    profile = guess
    total = 0
    while True:
        system = CollocationSystem(profile.k0, profile.N, g)
        a, its, rnorm = _newton_fixed_N(system, profile.coeffs, M, tol, max_iter, floor)
        total += its
        profile = PeriodicProfile(profile.k0, a)
        if not adapt or 2 * profile.N > max_modes:
            break
        if tail_ratio(a) <= TAIL_RATIO and flux_residual(profile, M, g) <= FLUX_TOL:
            break
        log.info("doubling modes %d -> %d", profile.N, 2 * profile.N)
        profile = profile.resized(2 * profile.N)
    if full_output:
        return profile, NewtonInfo(total, rnorm, profile.N)
    return profile


def predictor_amplitude(M, g, k0):
    """Invert M = M*(k0) - c s^2 for the leading cosine amplitude."""
    c = (g + k0 ** 2) * (8.0 * g + 41.0 * k0 ** 2) / (12.0 * k0 ** 2)
    gap = 4.0 * g + 4.0 * k0 ** 2 - M
    return np.sqrt(gap / c) if gap > 0 else 0.0


def _half_orbit(K, q1, M, params, rtol=1e-13, atol=1e-14, dense=False):
    g = params.g

    def rhs(x, y):
        v, w, _ = y
        if v <= -1.0:
            return [w, np.inf, v]
        return [w, g * v - M * omega(v) + M * K, v]

    return solve_ivp(rhs, (0.0, np.pi / params.k0), [q1, 0.0, 0.0], method="DOP853",
                     rtol=rtol, atol=atol, dense_output=dense)


def _shoot(M, p_model, K, q1, scale):
    """Root-find (K, q1) from the given guess; returns (K, q1) or None."""
    x0 = np.array([K, q1])
    weights = np.array([scale * scale, scale])

    def equations(z):
        K, q1 = x0 + weights * z
        if q1 <= -1.0:
            return [1e3, 1e3]
        sol = _half_orbit(K, q1, M, p_model)
        if sol.status != 0:
            return [1e3, 1e3]
        _, w_end, m_end = sol.y[:, -1]
        return [w_end / scale, m_end / scale]

    res = root(equations, np.zeros(2), method="hybr", options={"xtol": 1e-14})
    resid = np.max(np.abs(equations(res.x)))
    K, q1 = x0 + weights * res.x
    if (not res.success and resid > 1e-10) or abs(q1) < 1e-3 * scale:
        return None
    return K, q1


def shoot_solution(M, p_model, amplitude_hint=None, N=DEFAULT_MODES, homotopy_steps=40):
    """Independent oracle: shoot the Hamiltonian ODE from the maximum (q1, 0).

    Unknowns are the integration constant K and the turning point q1 (which
    fixes the energy E = G(q1)). The half orbit must reach w = 0 exactly at
    x = pi/k0 with zero mean. If the direct solve from the amplitude hint
    fails, M is walked down from just below M*(k0) to the target, reusing
    each solution as the next guess. Returns (profile, K, E).
    """
    if M >= p_model.M_star_k0:
        raise NoSolutionError(
            f"no small periodic orbits of period 2 pi/k0 for M >= M*(k0) = {p_model.M_star_k0}")
    g, k0 = p_model.g, p_model.k0
    s = amplitude_hint if amplitude_hint is not None else predictor_amplitude(M, g, k0)
    if not s > 0:
        raise NoSolutionError("amplitude hint must be positive")
    found = _shoot(M, p_model, mass_constant_K(PeriodicProfile(k0, [s]), 256), s, s)
    if found is None:
        log.info("direct shooting failed at M=%g; continuing in M from onset", M)
        # uniform steps in sqrt(M*(k0) - M), which is roughly the amplitude
        s0 = min(s, 0.05)
        top = p_model.M_star_k0
        sigmas = np.linspace(np.sqrt(top - max(predictor_M(s0, g, k0), M)), np.sqrt(top - M),
                             homotopy_steps)
        history = [(mass_constant_K(PeriodicProfile(k0, [s0]), 256), s0)]
        for i, sigma in enumerate(sigmas):
            Mi = top - sigma * sigma
            guess = history[-1]
            if len(history) >= 2:
                guess = tuple(2 * np.array(history[-1]) - np.array(history[-2]))
            found = _shoot(Mi, ModelParams(g, Mi, k0), guess[0], guess[1], max(guess[1], s0))
            if found is None:
                raise NoSolutionError(f"shooting homotopy failed at M = {Mi:.6g}")
            history.append(found)
    if found is None:
        raise NoSolutionError("shooting failed")
    K, q1 = found
    sol = _half_orbit(K, q1, M, p_model, dense=True)
    n = 4 * N
    x = spectral.grid(k0, n)
    v = sol.sol(np.abs(x))[0]
    profile = PeriodicProfile(k0, spectral.cosine_coefficients(v, N))
    E = float(potential_G(q1, HamiltonianParams(g, M, min(K, 0.5 + np.log(0.5))), 0))
    return profile, float(K), E


def predictor_M(s, g, k0):
    """M on the local parabola M*(k0) - c s^2."""
    c = (g + k0 ** 2) * (8.0 * g + 41.0 * k0 ** 2) / (12.0 * k0 ** 2)
    return 4.0 * g + 4.0 * k0 ** 2 - c * s * s

"""Phase-plane analysis of the planar Hamiltonian system v' = w, w' = -G'(v)."""

from dataclasses import dataclass, replace

import math

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NoSolutionError, OutOfRangeError
from .model import (
    K0,
    FixedPointPair,
    _boundary_log_term,
    hamiltonian,
    omega,
    potential_G,
)

ROOT_TOL = 1e-13
MAX_ITER = 200
DEGENERATE_TOL = 1e-10

_GL_CACHE = {}


@dataclass(frozen=True)
class EnergyInterval:
    E_min: float
    E_max: float
    has_homoclinic: bool


@dataclass(frozen=True)
class TurningPoints:
    q0: float
    q1: float


@dataclass
class Orbit:
    t: np.ndarray
    v: np.ndarray
    w: np.ndarray
    hit_boundary: bool = False


def _fixed_point_equation(v, p):
    # zero exactly at fixed points; positive between v_l and v_u
    return omega(v) - p.K - (p.g / p.M) * v


def _polish(v, p, lo, hi):
    """Newton polish of a bracketed root of the fixed-point equation."""
    for _ in range(MAX_ITER):
        f = _fixed_point_equation(v, p)
        df = 1.0 / ((1.0 + v) * (2.0 + v) ** 2) - p.g / p.M
        if df == 0.0:
            break
        step = f / df
        nv = v - step
        if not lo <= nv <= hi:
            break
        v = nv
        if abs(step) <= ROOT_TOL * max(1.0, abs(v)):
            break
    return v


def _bracketed_root(p, lo, hi):
    v = brentq(_fixed_point_equation, lo, hi, args=(p,), xtol=1e-15, rtol=1e-15,
               maxiter=MAX_ITER)
    return _polish(v, p, lo, hi)


def _lower_bracket(p):
    # phi -> -inf as v -> -1; step towards -1 until the sign flips
    for exponent in range(1, 300):
        lo = -1.0 + 10.0 ** (-exponent)
        if lo <= -1.0:
            break
        if _fixed_point_equation(lo, p) < 0:
            return lo
    raise NoSolutionError("lower fixed point is closer to -1 than double precision resolves")


def _upper_bracket(p, start):
    hi = max(2.0 * abs(start), 1.0)
    for _ in range(MAX_ITER):
        if _fixed_point_equation(hi, p) < 0:
            return hi
        hi *= 2.0
    raise NoSolutionError("no sign change found for the upper fixed point")


def find_fixed_points(p):
    """Both solutions v_l <= 0 <= v_u of (g/M) v = omega(v) - K."""
    if p.K > K0 + 1e-15:
        raise DomainError("fixed points require K <= K0")
    slope_gap = 0.25 - p.g / p.M  # omega'(0) - g/M
    at_k0 = abs(p.K - K0) <= 1e-15
    if at_k0 and abs(p.M - 4.0 * p.g) < 1e-12:
        return FixedPointPair(0.0, 0.0)
    if at_k0:
        if slope_gap > 0:
            # tangent line below omega near 0+, the second root sits above 0
            lo = 1e-8
            while _fixed_point_equation(lo, p) <= 0 and lo > 1e-300:
                lo *= 0.5
            return FixedPointPair(0.0, float(_bracketed_root(p, lo, _upper_bracket(p, lo))))
        hi = -1e-8
        while _fixed_point_equation(hi, p) <= 0 and hi < -1e-300:
            hi *= 0.5
        return FixedPointPair(float(_bracketed_root(p, _lower_bracket(p), hi)), 0.0)
    v_l = _bracketed_root(p, _lower_bracket(p), 0.0)
    v_u = _bracketed_root(p, 0.0, _upper_bracket(p, 1.0))
    return FixedPointPair(float(v_l), float(v_u))


def _kind(curvature, positive, negative):
    if abs(curvature) < DEGENERATE_TOL:
        return "degenerate"
    return positive if curvature > 0 else negative


def classify_fixed_points(p, fp):
    """Tag the lower point as center-minimum and the upper one as saddle via G''."""
    g2_l = potential_G(fp.v_l, p, 2)
    g2_u = potential_G(fp.v_u, p, 2)
    return replace(
        fp,
        kind_l=_kind(g2_l, "center-minimum", "saddle"),
        kind_u=_kind(g2_u, "center-minimum", "saddle"),
    )


def linearization_eigenvalues(g, M):
    """Eigenvalues +-sqrt(g - M/4) of the system linearised at the origin."""
    root = np.sqrt(complex(g - 0.25 * M))
    return root, -root


def energy_interval(p, fp=None):
    fp = find_fixed_points(p) if fp is None else fp
    if not fp.v_l < fp.v_u:
        raise DomainError("energy interval is empty when v_l == v_u")
    e_min = float(hamiltonian(fp.v_l, 0.0, p))
    e_boundary = float(hamiltonian(-1.0, 0.0, p))
    e_saddle = float(hamiltonian(fp.v_u, 0.0, p))
    return EnergyInterval(e_min, min(e_boundary, e_saddle), e_boundary >= e_saddle)


def homoclinic_gap(p):
    """H(-1, 0) - H(v_u, 0); a homoclinic orbit exists iff this is >= 0."""
    fp = find_fixed_points(p)
    return float(hamiltonian(-1.0, 0.0, p) - hamiltonian(fp.v_u, 0.0, p))


def _solve_level(E, p, lo, hi):
    f = lambda q: potential_G(q, p, 0) - E
    q = brentq(f, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=MAX_ITER)
    # one Newton correction tightens |G(q) - E| to round-off
    if q > -1.0:
        d = potential_G(q, p, 1)
        if d != 0.0:
            nq = q - f(q) / d
            if lo <= nq <= hi and abs(f(nq)) < abs(f(q)):
                q = nq
    return q


def turning_points(E, p, fp=None, interval=None):
    """Lower/upper roots of G(q) = E bracketing the center v_l."""
    fp = find_fixed_points(p) if fp is None else fp
    interval = energy_interval(p, fp) if interval is None else interval
    if not interval.E_min < E < interval.E_max:
        raise OutOfRangeError(
            f"E = {E!r} outside ({interval.E_min!r}, {interval.E_max!r})")
    q0 = _solve_level(E, p, -1.0, fp.v_l)
    q1 = _solve_level(E, p, fp.v_l, fp.v_u)
    return TurningPoints(float(q0), float(q1))


def _gauss_legendre(n):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        # map [-1, 1] -> [0, pi/2]
        _GL_CACHE[n] = (0.25 * np.pi * (x + 1.0), 0.25 * np.pi * w)
    return _GL_CACHE[n]


def period(E, p, n_nodes=200, fp=None):
    """Period sqrt(2) * int_{q0}^{q1} dv / sqrt(E - G(v)).

    The substitution v = q0 + (q1 - q0) sin^2(theta) removes both
    inverse-square-root endpoint singularities.
    """
    fp = find_fixed_points(p) if fp is None else fp
    tp = turning_points(E, p, fp)
    theta, weights = _gauss_legendre(n_nodes)
    s, c = np.sin(theta), np.cos(theta)
    width = tp.q1 - tp.q0
    v = tp.q0 + width * s ** 2
    gap = E - potential_G(v, p, 0)
    integrand = 2.0 * width * s * c / np.sqrt(np.maximum(gap, np.finfo(float).tiny))
    return float(np.sqrt(2.0) * np.sum(weights * integrand))


# Minimum-error two-stage splitting coefficient; b = 1/2 gives plain
# Stormer-Verlet with two half-size kicks per stage.
_BAB2_B = 0.1931833275037836


def integrate_orbit(v0, w0, t_end, dt, p, scheme="bab2"):
    """Fixed-step second-order symplectic integration of (v, w).

    `scheme` is "bab2" (default, kick-drift-kick-drift-kick with the
    minimum-error weight) or "verlet" (velocity Verlet). Stops early and
    sets `hit_boundary` if v drops to -1 + 1e-12.
    """
    if not v0 > -1:
        raise DomainError("orbit must start inside v > -1")
    nsteps = int(np.ceil(t_end / dt - 1e-12))
    t = np.empty(nsteps + 1)
    v = np.empty(nsteps + 1)
    w = np.empty(nsteps + 1)
    t[0], v[0], w[0] = 0.0, v0, w0
    g, M, MK = p.g, p.M, p.M * p.K

    def force(q):
        # -G'(q), scalar fast path
        if q <= -1.0:
            raise DomainError("orbit left the phase space")
        return g * q - M * (1.0 / (2.0 + q) + math.log1p(q) - math.log(2.0 + q)) + MK

    vk, wk = float(v0), float(w0)
    floor = -1.0 + 1e-12
    for k in range(nsteps):
        if scheme == "verlet":
            wk += 0.5 * dt * force(vk)
            vk += dt * wk
            if vk <= floor:
                return Orbit(t[:k + 1], v[:k + 1], w[:k + 1], hit_boundary=True)
            wk += 0.5 * dt * force(vk)
        elif scheme == "bab2":
            b = _BAB2_B
            wk += b * dt * force(vk)
            vk += 0.5 * dt * wk
            if vk <= floor:
                return Orbit(t[:k + 1], v[:k + 1], w[:k + 1], hit_boundary=True)
            wk += (1.0 - 2.0 * b) * dt * force(vk)
            vk += 0.5 * dt * wk
            if vk <= floor:
                return Orbit(t[:k + 1], v[:k + 1], w[:k + 1], hit_boundary=True)
            wk += b * dt * force(vk)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        t[k + 1], v[k + 1], w[k + 1] = (k + 1) * dt, vk, wk
    return Orbit(t, v, w)


def time_of_flight(orbit, p):
    """Time between the first and third zero of w (one full revolution).

    Crossing times use cubic Hermite interpolation with w' = -G'(v).
    """
    w = orbit.w
    crossings = []
    for k in range(1, len(w)):
        if (w[k - 1] < 0 <= w[k]) or (w[k - 1] > 0 >= w[k]):
            crossings.append(_hermite_zero(orbit, k - 1, p))
    # orbits started at a turning point have w = 0 at t = 0
    if w[0] == 0.0:
        crossings.insert(0, orbit.t[0])
    if len(crossings) < 3:
        raise NoSolutionError("orbit too short to contain a full revolution")
    return crossings[2] - crossings[0]


def _hermite_zero(orbit, k, p):
    t0, t1 = orbit.t[k], orbit.t[k + 1]
    h = t1 - t0
    y0, y1 = orbit.w[k], orbit.w[k + 1]
    d0 = -potential_G(orbit.v[k], p, 1) * h
    d1 = -potential_G(orbit.v[k + 1], p, 1) * h
    tau = y0 / (y0 - y1)
    for _ in range(50):
        h00 = 2 * tau ** 3 - 3 * tau ** 2 + 1
        h10 = tau ** 3 - 2 * tau ** 2 + tau
        h01 = -2 * tau ** 3 + 3 * tau ** 2
        h11 = tau ** 3 - tau ** 2
        f = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1
        df = ((6 * tau ** 2 - 6 * tau) * y0 + (3 * tau ** 2 - 4 * tau + 1) * d0
              + (-6 * tau ** 2 + 6 * tau) * y1 + (3 * tau ** 2 - 2 * tau) * d1)
        step = f / df
        tau -= step
        if abs(step) < 1e-15:
            break
    return t0 + tau * h


def v_max_infinity(K):
    """Right root of G_inf(v) = G_inf(-1) for G_inf(v) = (1+v)log((1+v)/(2+v)) - K v."""
    if not K < 0:
        raise DomainError("v_max_infinity needs K < 0")
    eK = np.exp(K)
    return -(2.0 * eK - 1.0) / (eK - 1.0)


def g_infinity(v, K):
    """Large-M limit G/M -> (1+v) log((1+v)/(2+v)) - K v."""
    v = np.asarray(v, dtype=float)
    return _boundary_log_term(v) - K * v

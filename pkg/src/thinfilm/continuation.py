"""Pseudo-arclength continuation of the periodic branch from the pitchfork at
M*(k0) = 4g + 4k0^2 towards film rupture, with branch diagnostics."""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import spectral
from .errors import ConvergenceError, PositivityError, StepFailure
from .model import K0, ModelParams, PeriodicProfile, mass_constant_K, profile_flux
from .steady import (
    DEFAULT_MODES,
    FLUX_TOL,
    MAX_MODES,
    POSITIVITY_FLOOR,
    TAIL_RATIO,
    CollocationSystem,
    tail_ratio,
)

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-11
MIN_DS = 1e-8
EASY_ITERATIONS = 3


@dataclass
class BranchPoint:
    s: float
    M: float
    K: float
    profile: PeriodicProfile
    min_h: float
    max_h: float
    l2_norm: float
    h2_norm: float
    flux_residual: float
    leading_eig: float = float("nan")
    residual: float = 0.0
    amplitude: float = 0.0

    @property
    def k0(self):
        return self.profile.k0


@dataclass
class BranchRecord:
    points: list = field(default_factory=list)
    termination: str = "user-bound"
    g: float = 1.0
    k0: float = 1.0

    def __len__(self):
        return len(self.points)

    def __getitem__(self, idx):
        return self.points[idx]

    def column(self, name):
        return np.array([getattr(p, name) for p in self.points])


def local_predictor(k0, g, s):
    """Leading-order branch v = s cos(k0 x), M = M*(k0) - c s^2."""
    c = (g + k0 ** 2) * (8.0 * g + 41.0 * k0 ** 2) / (12.0 * k0 ** 2)
    M = 4.0 * g + 4.0 * k0 ** 2 - c * s ** 2
    return PeriodicProfile(k0, [s]), M


def sobolev_norms(profile):
    """L2 and H2 norms of v over one period, computed from the coefficients."""
    a2 = profile.coeffs ** 2
    kl = profile.k0 * np.arange(1, profile.N + 1)
    half = 0.5 * profile.period
    l2 = np.sqrt(half * a2.sum())
    h2 = np.sqrt(half * np.sum(a2 * (1.0 + kl ** 2 + kl ** 4)))
    return float(l2), float(h2)


def build_point(profile, M, g, s, residual_norm=0.0):
    """Evaluate the diagnostics of a converged solution."""
    _, v = profile.sample()
    l2, h2 = sobolev_norms(profile)
    _, flux = profile_flux(profile, ModelParams(g, M, profile.k0))
    return BranchPoint(
        s=float(s), M=float(M), K=mass_constant_K(profile), profile=profile,
        min_h=float(1.0 + v.min()), max_h=float(1.0 + v.max()), l2_norm=l2, h2_norm=h2,
        flux_residual=float(np.max(np.abs(flux))), residual=float(residual_norm),
        amplitude=float(profile.coeffs[0]),
    )


def _pack(point):
    return np.append(point.profile.coeffs, point.M)


def _extended_jacobian(system, u):
    a, M = u[:-1], u[-1]
    return np.column_stack([system.jacobian(a, M), system.residual_M(a)])


def branch_tangent(point, g, previous=None):
    """Unit null vector of [F_v | F_M], oriented along `previous` (or +a_1)."""
    system = CollocationSystem(point.k0, point.profile.N, g)
    u = _pack(point)
    ext = _extended_jacobian(system, u)
    ref = np.zeros(u.size) if previous is None else previous
    if previous is None:
        ref[0] = 1.0
    rhs = np.zeros(u.size)
    rhs[-1] = 1.0
    t = np.linalg.solve(np.vstack([ext, ref]), rhs)
    t /= np.linalg.norm(t)
    return t if t @ ref >= 0 else -t


def _under_resolved(point):
    # h^3 d^3/dx^3 amplifies the spectral tail, so check the flux as well
    return tail_ratio(point.profile.coeffs) > TAIL_RATIO or point.flux_residual > FLUX_TOL


def _pad(vec, N):
    """Zero-pad the coefficient part of an (a, M) vector to N modes."""
    out = np.zeros(N + 1)
    out[:vec.size - 1] = vec[:-1]
    out[-1] = vec[-1]
    return out


def _correct(system, u_start, u_anchor, tangent, ds, tol, max_iter):
    """Newton on [F(u); t.(u - u_anchor) - ds] = 0."""
    u = u_start.copy()
    for it in range(1, max_iter + 1):
        a, M = u[:-1], u[-1]
        r = system.residual(a, M)
        c = tangent @ (u - u_anchor) - ds
        if np.max(np.abs(r)) < tol and abs(c) < 1e-12 and it > 1:
            return u, it - 1, np.max(np.abs(r))
        mat = np.vstack([_extended_jacobian(system, u), tangent])
        delta = np.linalg.solve(mat, -np.append(r, c))
        u = u + delta
        vmin = spectral.cosine_samples(u[:-1], system.k0, system.n_c).min()
        if not 1.0 + vmin > POSITIVITY_FLOOR:
            raise PositivityError("corrector left the positivity set")
    a, M = u[:-1], u[-1]
    r = system.residual(a, M)
    if np.max(np.abs(r)) < tol and abs(tangent @ (u - u_anchor) - ds) < 1e-12:
        return u, max_iter, np.max(np.abs(r))
    raise ConvergenceError("corrector did not converge")


@dataclass
class StepResult:
    point: BranchPoint
    tangent: np.ndarray
    ds: float
    iterations: int


def arclength_step(current, ds, g, tangent=None, *, tol=RESIDUAL_TOL, max_iter=12,
                   max_modes=MAX_MODES, min_ds=MIN_DS):
    """One pseudo-arclength step from a converged point.

    Tangent predictor, bordered Newton corrector; ds is halved on failure.
    The mode count is doubled after acceptance while the spectral tail is
    above 1e-10 of the largest coefficient.
    """
    if tangent is None:
        tangent = branch_tangent(current, g)
    u0 = _pack(current)
    while abs(ds) >= min_ds:
        system = CollocationSystem(current.k0, current.profile.N, g)
        try:
            u, its, rnorm = _correct(system, u0 + ds * tangent, u0, tangent, ds, tol, max_iter)
        except (ConvergenceError, PositivityError, np.linalg.LinAlgError) as exc:
            log.debug("step ds=%g failed (%s); halving", ds, exc)
            ds *= 0.5
            continue
        N = system.N
        point = build_point(PeriodicProfile(current.k0, u[:-1]), u[-1], g, current.s + ds, rnorm)
        while _under_resolved(point) and 2 * N <= max_modes:
            N *= 2
            log.info("branch point at M=%.6f: doubling modes to %d", u[-1], N)
            system = CollocationSystem(current.k0, N, g)
            u0p, tp = _pad(u0, N), _pad(tangent, N)
            u, extra, rnorm = _correct(system, _pad(u, N), u0p, tp, ds, tol, max_iter)
            its += extra
            point = build_point(PeriodicProfile(current.k0, u[:-1]), u[-1], g,
                                current.s + ds, rnorm)
        new_tangent = branch_tangent(point, g, _pad(tangent, N))
        return StepResult(point, new_tangent, ds, its)
    raise StepFailure(f"continuation step size fell below {min_ds:g}")


def initial_point(k0, g, s0, N=DEFAULT_MODES, tol=RESIDUAL_TOL):
    """Converge the branch point whose cos(k0 x) coefficient equals s0."""
    guess, M = local_predictor(k0, g, s0)
    system = CollocationSystem(k0, N, g)
    u = np.append(guess.resized(N).coeffs, M)
    for _ in range(30):
        a, M = u[:-1], u[-1]
        r = system.residual(a, M)
        if np.max(np.abs(r)) < tol:
            break
        ext = _extended_jacobian(system, u)
        pin = np.zeros(N + 1)
        pin[0] = 1.0
        delta = np.linalg.solve(np.vstack([ext, pin]), -np.append(r, 0.0))
        u = u + delta
    else:
        raise ConvergenceError("initial branch point did not converge")
    profile = PeriodicProfile(k0, u[:-1])
    s = float(np.hypot(s0, u[-1] - (4.0 * g + 4.0 * k0 ** 2)))
    return build_point(profile, u[-1], g, s, np.max(np.abs(r)))


def trivial_point(k0, g, N=DEFAULT_MODES):
    return build_point(PeriodicProfile.zero(k0, N), 4.0 * g + 4.0 * k0 ** 2, g, 0.0)


def trace_branch(g=1.0, k0=1.0, ds=0.01, max_steps=400, rupture_threshold=1e-2, *,
                 s0=None, ds_max=0.2, N=DEFAULT_MODES, max_modes=MAX_MODES, callback=None):
    """Follow the branch until min h < rupture_threshold, step failure, or max_steps.

    Point 0 is the bifurcation point itself (v = 0, M = M*(k0)).
    """
    s0 = ds if s0 is None else s0
    record = BranchRecord([trivial_point(k0, g, N)], g=g, k0=k0)
    point = initial_point(k0, g, s0, N)
    record.points.append(point)
    tangent = branch_tangent(point, g)
    easy = 0
    for _ in range(max_steps):
        if point.min_h < rupture_threshold:
            record.termination = "rupture-threshold"
            return record
        try:
            step = arclength_step(point, ds, g, tangent, max_modes=max_modes)
        except StepFailure:
            record.termination = "step-failure"
            return record
        point, tangent = step.point, step.tangent
        record.points.append(point)
        if callback is not None:
            callback(point)
        log.info("s=%.4f M=%.8f min_h=%.4e N=%d", point.s, point.M, point.min_h,
                 point.profile.N)
        easy = easy + 1 if step.iterations <= EASY_ITERATIONS and step.ds == ds else 0
        ds = step.ds
        if easy >= 3:
            ds = min(2.0 * ds, ds_max)
            easy = 0
    record.termination = ("rupture-threshold" if point.min_h < rupture_threshold
                          else "user-bound")
    return record


def monitor_nodal(v, tol=1e-10):
    """Cone check: v non-decreasing on (-pi/k0, 0), min at +-pi/k0, max at 0."""
    n = 8 * v.N
    x, vals = v.sample(n)
    _, slope = v.sample(n, order=1)
    half = n // 2  # index of x = 0
    if np.any(slope[1:half] < -tol):
        return False
    spread = max(np.max(np.abs(vals)), 1e-300)
    at_min = vals[0] <= vals.min() + 1e-13 * spread
    at_max = vals[half] >= vals.max() - 1e-13 * spread
    return bool(at_min and at_max)


def w2_inf(profile):
    return float(np.max(np.abs(profile.sample(order=2)[1])))


def w24_norm(profile):
    n = profile.default_grid()
    dx = profile.period / n
    total = sum(np.sum(profile.sample(n, order=k)[1] ** 4) for k in range(3))
    return float((total * dx) ** 0.25)


@dataclass
class RuptureDiagnosis:
    reached: bool
    index: int
    min_location: float
    location_error: float
    grid_spacing: float
    M_inf: float
    w2_inf: np.ndarray
    w24: np.ndarray


def minimum_location(profile):
    n = profile.default_grid()
    x, v = profile.sample(n)
    xm = x[np.argmin(v)]
    edge = np.pi / profile.k0
    err = min(abs(abs(xm) - edge), abs(xm + edge))
    return float(xm), float(err), profile.period / n


def detect_rupture(record, threshold=1e-2, fit_points=3):
    """First point with min h < threshold, location of the minimum, M
    extrapolated to min h = 0, and curvature growth diagnostics.

    The extrapolation evaluates at min h = 0 the polynomial through the last
    `fit_points` points (Richardson extrapolation on a non-uniform sequence).
    """
    if not record.points:
        raise ValueError("empty branch record")
    min_h = record.column("min_h")
    below = np.flatnonzero(min_h < threshold)
    reached = below.size > 0
    index = int(below[0]) if reached else int(np.argmin(min_h))
    xm, err, dx = minimum_location(record[index].profile)
    tail = slice(max(1, index + 1 - fit_points), index + 1)
    mh, Ms = min_h[tail], record.column("M")[tail]
    M_inf = float(np.polyfit(mh, Ms, mh.size - 1)[-1]) if mh.size >= 2 else float("nan")
    return RuptureDiagnosis(
        reached=reached, index=index, min_location=xm, location_error=err, grid_spacing=dx,
        M_inf=M_inf,
        w2_inf=np.array([w2_inf(p.profile) for p in record.points]),
        w24=np.array([w24_norm(p.profile) for p in record.points]),
    )


def nearest_to_min_h(record, level):
    """Index of the nontrivial point whose min h is closest to `level`."""
    mh = record.column("min_h")
    mh[0] = np.inf
    return int(np.argmin(np.abs(mh - level)))


@dataclass
class BoundsReport:
    M_l: float
    M_u: float
    K_l: float
    K_u: float
    ok: bool
    violations: list


def branch_bounds_check(record):
    """Empirical M range and K < K0 along all nontrivial points."""
    if not record.points:
        raise ValueError("empty branch record")
    Ms = record.column("M")
    Ks = record.column("K")
    violations = []
    if not (np.all(np.isfinite(Ms)) and Ms.min() > 0):
        violations.append("M not bounded away from 0")
    for i, K in enumerate(Ks[1:], start=1):
        if not K < K0 - 1e-12:
            violations.append(f"point {i}: K = {K!r} not below K0")
    nontrivial = Ks[1:] if Ks.size > 1 else Ks
    return BoundsReport(float(Ms.min()), float(Ms.max()), float(Ks.min()),
                        float(nontrivial.max()), not violations, violations)


def with_leading_eigs(record, values):
    """Return a copy of the record with the leading eigenvalues filled in."""
    pts = [replace(p, leading_eig=float(val)) for p, val in zip(record.points, values)]
    return BranchRecord(pts, record.termination, record.g, record.k0)

"""The twelve acceptance checks, each returning a CriterionResult.

Used by tests/test_acceptance.py and by `thinfilm verify`. Every check
includes its wall-clock budget in the pass condition.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import continuation, evolution, phase, stability, steady
from .model import K0, HamiltonianParams, ModelParams, PeriodicProfile, mass_constant_K


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.number:2d} {self.name}: {self.detail} "
                f"({self.seconds:.2f} s / {self.limit:g} s)")


CRITERIA = []


def criterion(number, name, limit):
    def wrap(fn):
        def run(seed=0):
            start = time.perf_counter()
            ok, detail = fn(seed)
            elapsed = time.perf_counter() - start
            return CriterionResult(number, name, bool(ok) and elapsed < limit, detail,
                                   elapsed, limit)
        run.number, run.name, run.limit = number, name, limit
        run.__name__ = fn.__name__
        CRITERIA.append(run)
        return run
    return wrap


@criterion(1, "critical Marangoni numbers", 1.0)
def critical_numbers(seed):
    M_star, M_star_k0 = stability.critical_marangoni(1.0, 1.0)
    jac = steady.jacobian(PeriodicProfile.zero(1.0, steady.DEFAULT_MODES), M_star_k0, 1.0)
    diag = np.abs(np.diag(jac))
    ok = M_star == 4.0 and M_star_k0 == 8.0 and diag[0] < 1e-10 and diag[1:].min() > 1.0
    return ok, f"M*={M_star}, M*(1)={M_star_k0}, |J_11|={diag[0]:.1e}, min other |J_ll|={diag[1:].min():.1f}"


def fitted_curvature(record, n_points=10):
    """d^2M/ds^2 at onset from M = M* + c2 a^2 + c4 a^4 + c6 a^6 in the
    leading cosine amplitude a over the first `n_points` branch points."""
    pts = record.points[:n_points]
    a = np.array([p.amplitude for p in pts])
    M = np.array([p.M for p in pts])
    M_star_k0 = 4.0 * record.g + 4.0 * record.k0 ** 2
    design = np.column_stack([a ** 2, a ** 4, a ** 6])
    coef, *_ = np.linalg.lstsq(design, M - M_star_k0, rcond=None)
    return 2.0 * coef[0]


@criterion(2, "subcritical curvature", 30.0)
def subcritical_curvature(seed):
    record = continuation.trace_branch(1.0, 1.0, max_steps=9)
    m2 = fitted_curvature(record)
    target = -49.0 / 3.0
    rel = abs(m2 - target) / abs(target)
    return rel < 0.05, f"M''(0)={m2:.5f} vs {target:.5f} (rel {rel:.1e})"


@criterion(3, "period limit", 1.0)
def period_limit(seed):
    p = HamiltonianParams(1.0, 8.0, K0)
    fp = phase.find_fixed_points(p)
    E_min = phase.energy_interval(p, fp).E_min
    T = phase.period(E_min + 1e-6, p, fp=fp)
    rel = abs(T - 2 * np.pi) / (2 * np.pi)
    return rel < 1e-3, f"period={T:.8f}, rel err {rel:.1e}"


@criterion(4, "oracle equivalence", 10.0)
def oracle_equivalence(seed):
    M = 7.9
    p = ModelParams(1.0, M, 1.0)
    shot, K, _ = steady.shoot_solution(M, p)
    guess = PeriodicProfile(1.0, [steady.predictor_amplitude(M, 1.0, 1.0)]).resized(64)
    newton = steady.newton_solve(guess, M, 1.0)
    x = np.linspace(-np.pi, np.pi, 2001)
    diff = np.max(np.abs(newton(x) - shot(x)))
    return diff < 1e-6, f"L-inf difference {diff:.2e} (K={K:.10f})"


@criterion(5, "Hamiltonian conservation", 1.0)
def hamiltonian_conservation(seed):
    p = HamiltonianParams(1.0, 8.0, K0)
    fp = phase.find_fixed_points(p)
    iv = phase.energy_interval(p, fp)
    E = 0.5 * (iv.E_min + iv.E_max)
    tp = phase.turning_points(E, p, fp, iv)
    T = phase.period(E, p, fp=fp)
    orbit = phase.integrate_orbit(tp.q1, 0.0, T, 1e-3, p)
    drift = np.max(np.abs(phase.hamiltonian(orbit.v, orbit.w, p) - E))
    return drift < 1e-8 and not orbit.hit_boundary, f"max |H - E| = {drift:.2e}"


def random_profile(rng, k0=1.0, floor=0.05, max_modes=8):
    """Random even mean-zero profile with min(1 + v) comfortably above `floor`."""
    N = int(rng.integers(1, max_modes + 1))
    coeffs = rng.normal(size=N) / np.arange(1, N + 1) ** 2
    profile = PeriodicProfile(k0, coeffs)
    lowest = -profile.sample(256)[1].min()
    target = rng.uniform(0.01, 1.0 - floor) * 0.999
    return PeriodicProfile(k0, coeffs * (target / lowest))


@criterion(6, "Jensen invariant", 5.0)
def jensen(seed):
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(1000):
        profile = random_profile(rng)
        assert profile.min_height(256) > 0.05
        worst = max(worst, mass_constant_K(profile) - K0)
    zero = abs(mass_constant_K(PeriodicProfile.zero(1.0, 8)) - K0)
    return worst < 0 and zero < 1e-14, f"max K - K0 = {worst:.2e}, |K(0) - K0| = {zero:.1e}"


def fd_jacobian_error(profile, M, g, rng, n_dir=10, h=1e-6):
    jac = steady.jacobian(profile, M, g)
    worst = 0.0
    for _ in range(n_dir):
        u = rng.normal(size=profile.N) / np.arange(1, profile.N + 1) ** 2
        up = PeriodicProfile(profile.k0, profile.coeffs + h * u)
        um = PeriodicProfile(profile.k0, profile.coeffs - h * u)
        fd = (steady.residual(up, M, g) - steady.residual(um, M, g)) / (2 * h)
        exact = jac @ u
        worst = max(worst, np.linalg.norm(fd - exact) / np.linalg.norm(exact))
    return worst


@criterion(7, "Jacobian correctness", 5.0)
def jacobian_correctness(seed):
    rng = np.random.default_rng(seed)
    errs = []
    for s0 in (0.05, 0.15, 0.3):
        bp = continuation.initial_point(1.0, 1.0, s0)
        errs.append(fd_jacobian_error(bp.profile, bp.M, 1.0, rng))
    worst = max(errs)
    return worst < 1e-6, "max relative FD error " + ", ".join(f"{e:.1e}" for e in errs)


@criterion(8, "branch to rupture", 300.0)
def branch_to_rupture(seed):
    record = continuation.trace_branch(1.0, 1.0, rupture_threshold=0.05)
    pts = record.points[1:]
    problems = []
    if record[-1].min_h >= 0.05:
        problems.append(f"min_h only reached {record[-1].min_h:.3g}")
    if max(p.residual for p in pts) >= 1e-11:
        problems.append("residual")
    flux = max(p.flux_residual for p in pts)
    if flux >= 1e-6:
        problems.append(f"flux {flux:.1e}")
    if not all(continuation.monitor_nodal(p.profile) for p in pts):
        problems.append("nodal monitor")
    if not all(p.K < K0 for p in pts):
        problems.append("K >= K0")
    loc_ok = True
    for p in pts:
        _, err, dx = continuation.minimum_location(p.profile)
        loc_ok &= err <= dx
    if not loc_ok:
        problems.append("minimum location")
    i_lo = continuation.nearest_to_min_h(record, 0.5)
    i_hi = continuation.nearest_to_min_h(record, 0.05)
    w2 = (continuation.w2_inf(record[i_lo].profile), continuation.w2_inf(record[i_hi].profile))
    w24 = (continuation.w24_norm(record[i_lo].profile), continuation.w24_norm(record[i_hi].profile))
    if not w2[1] > w2[0]:
        problems.append("max|v''| did not grow")
    if not w24[1] < 10 * w24[0]:
        problems.append("W^{2,4} grew tenfold")
    detail = (f"{len(record)} points, final min_h={record[-1].min_h:.4f} at M={record[-1].M:.4f}, "
              f"max flux {flux:.1e}, max|v''| {w2[0]:.2f}->{w2[1]:.2f}, "
              f"W24 {w24[0]:.2f}->{w24[1]:.2f}")
    if problems:
        detail += "; failed: " + ", ".join(problems)
    return not problems, detail


@criterion(9, "constant-state dispersion", 60.0)
def dispersion(seed):
    grow = evolution.measure_growth_rate(1, 8.5)
    decay = evolution.measure_growth_rate(2, 8.0)
    e1, e2 = abs(grow - 0.125) / 0.125, abs(decay + 12.0) / 12.0
    return e1 < 0.02 and e2 < 0.02, f"rate(l=1, M=8.5)={grow:.5f}, rate(l=2, M=8)={decay:.4f}"


def spectral_deviation_slope(amplitudes=(0.01, 0.02, 0.04)):
    devs = [stability.symbol_deviation(continuation.initial_point(1.0, 1.0, s)) for s in amplitudes]
    slope = np.polyfit(np.log(amplitudes), np.log(devs), 1)[0]
    return devs, slope


@criterion(10, "instability of small periodic states", 60.0)
def small_state_instability(seed):
    bp = continuation.initial_point(1.0, 1.0, 0.05)
    lead = stability.periodic_state_spectrum(bp, 3).leading
    devs, slope = spectral_deviation_slope()
    return lead > 0 and slope >= 0.8, (
        f"leading eig at s=0.05: {lead:.4e}; deviations {', '.join(f'{d:.2e}' for d in devs)}, "
        f"slope {slope:.2f}")


@criterion(11, "amplitude correspondence", 120.0)
def amplitude_correspondence(seed):
    d = {eps: evolution.amplitude_correspondence(eps).discrepancy for eps in (0.2, 0.1)}
    rates = {ell: evolution.measure_sivashinsky_rate(ell) for ell in (2, 3)}
    rate_ok = all(abs(r - (-ell ** 4 + ell ** 2)) / abs(-ell ** 4 + ell ** 2) < 0.02
                  for ell, r in rates.items())
    return d[0.1] < d[0.2] and rate_ok, (
        f"discrepancy eps=0.2: {d[0.2]:.3e}, eps=0.1: {d[0.1]:.3e}; "
        f"rates l=2: {rates[2]:.4f}, l=3: {rates[3]:.3f}")


@criterion(12, "mass conservation", 60.0)
def mass_conservation(seed):
    p = ModelParams(1.0, 8.5, 1.0)
    x = np.linspace(-np.pi, np.pi, evolution.DEFAULT_GRID, endpoint=False)
    h0 = 1.0 + 0.3 * np.cos(x) + 0.1 * np.sin(3 * x)
    result = evolution.evolve(h0, p, 1.0, dt=1e-4)
    m0 = result.diagnostics[0][1]
    drift = abs(result.state.mass - m0) / m0
    return drift < 1e-8 and result.steps >= 10_000, f"{result.steps} steps, relative drift {drift:.1e}"


def run_all(seed=0, only=None):
    results = []
    for run in CRITERIA:
        if only is None or run.number in only:
            results.append(run(seed))
    return results

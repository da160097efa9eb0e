import numpy as np
import pytest
from scipy.optimize import brentq

from thinfilm import phase
from thinfilm.errors import DomainError, OutOfRangeError
from thinfilm.model import K0, HamiltonianParams, hamiltonian, omega, potential_G


def test_degenerate_fixed_point():
    fp = phase.find_fixed_points(HamiltonianParams(1.0, 4.0, K0))
    assert fp.v_l == fp.v_u == 0.0


def test_fixed_points_above_threshold(hp8):
    fp = phase.find_fixed_points(hp8)
    assert fp.v_l == 0.0 and fp.v_u > 0
    # independent bisection on the scalar fixed-point equation
    f = lambda v: v / 8.0 - omega(v) + K0
    ref = brentq(f, 1e-8, 100.0, xtol=1e-15)
    assert fp.v_u == pytest.approx(ref, abs=1e-12)
    assert abs(f(fp.v_u)) < 1e-12


def test_fixed_points_below_threshold():
    fp = phase.find_fixed_points(HamiltonianParams(1.0, 2.0, K0))
    assert fp.v_l < 0 and fp.v_u == 0.0


def test_fixed_points_generic_K():
    p = HamiltonianParams(1.0, 8.0, -0.4)
    fp = phase.find_fixed_points(p)
    assert -1 < fp.v_l < 0 < fp.v_u
    for v in (fp.v_l, fp.v_u):
        assert abs(p.g / p.M * v - omega(v) + p.K) < 1e-13


def test_classification(hp8):
    fp = phase.classify_fixed_points(hp8, phase.find_fixed_points(hp8))
    assert fp.kind_l == "center-minimum" and fp.kind_u == "saddle"
    assert potential_G(0.0, hp8, 2) == pytest.approx(1.0)
    p4 = HamiltonianParams(1.0, 4.0, K0)
    assert phase.classify_fixed_points(p4, phase.find_fixed_points(p4)).kind_l == "degenerate"
    p = HamiltonianParams(1.0, 8.0, -0.4)
    fp = phase.classify_fixed_points(p, phase.find_fixed_points(p))
    assert (fp.kind_l, fp.kind_u) == ("center-minimum", "saddle")


def test_linearization_regimes():
    for M, kind in ((2.0, "real"), (4.0, "zero"), (8.0, "imaginary")):
        lam, mlam = phase.linearization_eigenvalues(1.0, M)
        assert lam == -mlam
        g2 = potential_G(0.0, HamiltonianParams(1.0, M, K0), 2)
        assert lam ** 2 == pytest.approx(-g2, abs=1e-15)
        if kind == "real":
            assert lam.imag == 0 and lam.real > 0
        elif kind == "zero":
            assert lam == 0
        else:
            assert lam.real == 0 and lam.imag > 0


def test_energy_interval(hp8):
    iv = phase.energy_interval(hp8)
    assert iv.E_min == pytest.approx(8 * np.log(0.5), rel=1e-15)
    assert iv.E_max > iv.E_min
    with pytest.raises(DomainError):
        phase.energy_interval(HamiltonianParams(1.0, 4.0, K0))


def test_homoclinic_flag_flips():
    gap = lambda K: phase.homoclinic_gap(HamiltonianParams(1.0, 8.0, K))
    K_star = brentq(gap, -0.4, K0, xtol=1e-14)
    above = phase.energy_interval(HamiltonianParams(1.0, 8.0, K_star + 1e-3))
    below = phase.energy_interval(HamiltonianParams(1.0, 8.0, K_star - 1e-3))
    assert above.has_homoclinic and not below.has_homoclinic


def test_turning_points_mid_energy(hp8):
    iv = phase.energy_interval(hp8)
    E = 0.5 * (iv.E_min + iv.E_max)
    tp = phase.turning_points(E, hp8)
    assert -1 < tp.q0 < 0 < tp.q1
    assert abs(potential_G(tp.q0, hp8) - E) < 1e-12
    assert abs(potential_G(tp.q1, hp8) - E) < 1e-12


def test_turning_points_shrink_to_center(hp8):
    iv = phase.energy_interval(hp8)
    widths = []
    for d in (1e-2, 1e-4, 1e-6):
        tp = phase.turning_points(iv.E_min + d, hp8)
        widths.append(tp.q1 - tp.q0)
    assert widths[0] > widths[1] > widths[2] and widths[2] < 1e-2


def test_turning_points_approach_saddle(hp8):
    iv = phase.energy_interval(hp8)
    fp = phase.find_fixed_points(hp8)
    assert iv.has_homoclinic
    tp = phase.turning_points(iv.E_max - 1e-10, hp8)
    assert fp.v_u - tp.q1 < 1e-3


def test_turning_points_out_of_range(hp8):
    iv = phase.energy_interval(hp8)
    for E in (iv.E_min, iv.E_max, iv.E_min - 1.0):
        with pytest.raises(OutOfRangeError):
            phase.turning_points(E, hp8)


def test_orbits_stay_in_well():
    p = HamiltonianParams(1.0, 8.0, -0.3)
    fp = phase.find_fixed_points(p)
    iv = phase.energy_interval(p, fp)
    for E in np.linspace(iv.E_min, iv.E_max - 1e-10, 12)[1:]:
        tp = phase.turning_points(E, p, fp, iv)
        assert tp.q0 > -1 and tp.q1 < fp.v_u


def test_period_limit_at_center(hp8):
    iv = phase.energy_interval(hp8)
    T = phase.period(iv.E_min + 1e-6, hp8)
    assert T == pytest.approx(2 * np.pi, rel=1e-3)


def test_period_grows_logarithmically_towards_homoclinic(hp8):
    iv = phase.energy_interval(hp8)
    gaps = np.array([1e-2, 1e-4, 1e-6, 1e-8])
    T = np.array([phase.period(iv.E_max - d, hp8) for d in gaps])
    assert np.all(np.diff(T) > 0)
    # each factor 100 in the gap adds a roughly constant increment
    inc = np.diff(T)
    assert np.allclose(inc[1:], inc[-1], rtol=0.05)


def test_period_increasing(hp8):
    iv = phase.energy_interval(hp8)
    Es = iv.E_min + (iv.E_max - iv.E_min) * np.linspace(0.01, 0.99, 15)
    assert np.all(np.diff([phase.period(E, hp8) for E in Es]) > 0)


def test_period_matches_time_of_flight():
    p = HamiltonianParams(1.0, 8.0, K0)
    fp = phase.find_fixed_points(p)
    iv = phase.energy_interval(p, fp)
    for frac in np.linspace(0.02, 0.95, 20):
        E = iv.E_min + frac * (iv.E_max - iv.E_min)
        tp = phase.turning_points(E, p, fp, iv)
        T = phase.period(E, p, fp=fp)
        orbit = phase.integrate_orbit(tp.q1, 0.0, 1.1 * T, 1e-3, p)
        assert phase.time_of_flight(orbit, p) == pytest.approx(T, rel=1e-6)


def test_orbit_at_fixed_point_is_stationary(hp8):
    orbit = phase.integrate_orbit(0.0, 0.0, 1.0, 1e-2, hp8)
    assert np.all(orbit.v == 0.0) and np.all(orbit.w == 0.0)


def test_orbit_returns_after_one_period(hp8):
    iv = phase.energy_interval(hp8)
    E = 0.5 * (iv.E_min + iv.E_max)
    tp = phase.turning_points(E, hp8)
    T = phase.period(E, hp8)
    dt = T / 10_000
    orbit = phase.integrate_orbit(tp.q1, 0.0, T, dt, hp8)
    assert orbit.t[-1] == pytest.approx(T)
    assert abs(orbit.v[-1] - tp.q1) < 1e-6 and abs(orbit.w[-1]) < 1e-6


@pytest.mark.parametrize("scheme,bound", [("bab2", 1e-8), ("verlet", 5e-8)])
def test_energy_drift(hp8, scheme, bound):
    iv = phase.energy_interval(hp8)
    E = 0.5 * (iv.E_min + iv.E_max)
    tp = phase.turning_points(E, hp8)
    orbit = phase.integrate_orbit(tp.q1, 0.0, phase.period(E, hp8), 1e-3, hp8, scheme=scheme)
    assert np.max(np.abs(hamiltonian(orbit.v, orbit.w, hp8) - E)) < bound


def test_energy_drift_is_second_order(hp8):
    iv = phase.energy_interval(hp8)
    E = 0.5 * (iv.E_min + iv.E_max)
    tp = phase.turning_points(E, hp8)
    T = phase.period(E, hp8)
    drift = []
    for dt in (4e-3, 2e-3):
        o = phase.integrate_orbit(tp.q1, 0.0, T, dt, hp8, scheme="verlet")
        drift.append(np.max(np.abs(hamiltonian(o.v, o.w, hp8) - E)))
    assert drift[0] / drift[1] == pytest.approx(4.0, rel=0.1)


def test_orbit_boundary_flag():
    p = HamiltonianParams(1.0, 8.0, -0.6)
    orbit = phase.integrate_orbit(0.0, -10.0, 5.0, 1e-3, p)
    assert orbit.hit_boundary and orbit.v[-1] > -1


def test_orbit_rejects_bad_start(hp8):
    with pytest.raises(DomainError):
        phase.integrate_orbit(-1.0, 0.0, 1.0, 0.1, hp8)
    with pytest.raises(ValueError):
        phase.integrate_orbit(0.1, 0.0, 1.0, 0.1, hp8, scheme="euler")


def test_v_max_infinity():
    eK = np.exp(-0.4)
    assert phase.v_max_infinity(-0.4) == pytest.approx((1 - 2 * eK) / (eK - 1), abs=1e-12)
    assert phase.v_max_infinity(-0.4) == pytest.approx(1.0331, abs=1e-3)
    assert abs(phase.v_max_infinity(-30.0) + 1.0) < 1e-8
    v = phase.v_max_infinity(K0)
    assert v > 0
    assert abs(phase.g_infinity(v, K0) - phase.g_infinity(-1.0, K0)) < 1e-10
    with pytest.raises(DomainError):
        phase.v_max_infinity(0.0)


def test_upper_fixed_point_grows_as_K_decreases():
    Ks = np.linspace(K0, -1.0, 12)
    vu = [phase.find_fixed_points(HamiltonianParams(1.0, 8.0, K)).v_u for K in Ks]
    assert np.all(np.diff(vu) > 0)

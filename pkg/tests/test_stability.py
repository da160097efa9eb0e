import numpy as np
import pytest

from thinfilm import continuation, stability
from thinfilm.errors import DomainError, ResolutionError
from thinfilm.model import ModelParams, PeriodicProfile


def test_symbol_examples():
    p = ModelParams(1.0, 8.0, 1.0)
    assert stability.constant_state_symbol(1.0, p) == 0.0
    assert stability.constant_state_symbol(2.0, p) == -12.0
    ell = np.linspace(0, 3, 30001)
    sym = stability.constant_state_symbol(ell, p)
    assert sym.max() == pytest.approx(0.25, abs=1e-8)
    assert ell[np.argmax(sym)] == pytest.approx(1 / np.sqrt(2), abs=1e-4)


def test_flat_film_stable_below_threshold():
    ell = np.linspace(0, 5, 501)
    for M in (1.0, 4.0):
        p = ModelParams(1.0, M, 1.0)
        assert np.all(stability.constant_state_symbol(ell, p) <= 0)
        assert stability.unstable_band(p) is None
    assert stability.unstable_band(ModelParams(1.0, 8.0, 1.0)) == (0.0, 1.0)


def test_critical_marangoni():
    assert stability.critical_marangoni(1.0, 1.0) == (4.0, 8.0)
    assert stability.critical_marangoni(2.0, 0.5) == (8.0, 9.0)
    with pytest.raises(DomainError):
        stability.critical_marangoni(-1.0, 1.0)


def test_constant_state_matrix_matches_symbol():
    p = ModelParams(1.0, 8.5, 1.0)
    n = 63
    _, A = stability.linearized_operator(PeriodicProfile.zero(1.0, 8), p.M, p.g, n)
    ev = np.sort(np.linalg.eigvals(A).real)
    sym = np.sort(stability.constant_state_spectrum(p, n).eigenvalues.real)
    assert np.max(np.abs(ev - sym) / np.maximum(1.0, np.abs(sym))) < 1e-8


def test_bloch_shift_constant_state():
    p = ModelParams(1.0, 8.5, 1.0)
    rep = stability.constant_state_spectrum(p, 63, bloch=0.5)
    assert rep.leading == pytest.approx(stability.constant_state_symbol(0.5, p))


def test_small_state_is_unstable():
    bp = continuation.initial_point(1.0, 1.0, 0.05)
    rep = stability.periodic_state_spectrum(bp, 5)
    assert rep.leading > 0
    assert np.all(np.diff(rep.eigenvalues.real) <= 0)


def test_zero_eigenvalues_and_translation_mode():
    bp = continuation.initial_point(1.0, 1.0, 0.2)
    rep = stability.periodic_state_spectrum(bp, 10)
    assert np.min(np.abs(rep.eigenvalues)) < 1e-8
    x, A = stability.linearized_operator(bp.profile, bp.M, 1.0, 63)
    hx = bp.profile(x, 1)
    assert np.max(np.abs(A @ hx)) < 1e-8 * np.max(np.abs(A))


def test_resolution_and_domain_errors(branch):
    bp = branch[continuation.nearest_to_min_h(branch, 0.1)]
    with pytest.raises(ResolutionError):
        stability.periodic_state_spectrum(bp, 3, n_grid=15)
    with pytest.raises(DomainError):
        stability.periodic_state_spectrum(branch[-1], 3)


def test_deviation_shrinks_with_amplitude():
    devs = [stability.symbol_deviation(continuation.initial_point(1.0, 1.0, s))
            for s in (0.04, 0.02)]
    assert devs[1] < devs[0] / 2


def test_bloch_sweep_length():
    bp = continuation.initial_point(1.0, 1.0, 0.1)
    reports = stability.bloch_sweep(bp, n_bloch=4, n_eigs=3)
    assert [r.bloch for r in reports] == [0.0, 0.25, 0.5, 0.75]
    assert reports[0].leading == pytest.approx(stability.periodic_state_spectrum(bp, 3).leading)


def test_annotate_branch(branch):
    small = continuation.BranchRecord(branch.points[:3] + branch.points[-1:], g=1.0, k0=1.0)
    out = stability.annotate_branch(small)
    vals = out.column("leading_eig")
    assert np.all(np.isfinite(vals[:3])) and np.isnan(vals[-1])

"""Linear stability of flat and periodic stationary films.

The flat film h = 1 has the symbol -l^4 + (M/4 - g) l^2. About a periodic
state h(x) the linearisation

    L u = -d/dx [ h^3 (u_xxx - g u_x) + 3 h^2 (h_xxx - g h_x) u
                  + M h^2/(1+h)^2 u_x + 2 M h h_x/(1+h)^3 u ]

is discretised by Fourier collocation on a full period (perturbations are
not assumed even) and its eigenvalues are computed densely.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import spectral
from .continuation import with_leading_eigs
from .errors import DomainError, ResolutionError
from .model import ModelParams

log = logging.getLogger(__name__)

GRID_SIZES = (63, 127, 255, 511)
TRAILING_ENERGY_TOL = 1e-8
MIN_HEIGHT = 0.05


@dataclass
class SpectrumReport:
    base_state: str
    eigenvalues: np.ndarray
    leading: float
    unstable_band: tuple = None
    bloch: float = 0.0

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex)
        self.eigenvalues = ev[np.argsort(-ev.real, kind="stable")]


def constant_state_symbol(ell, p):
    """Growth rate of exp(i l x) about h = 1."""
    ell = np.asarray(ell, dtype=float)
    return -ell ** 4 + (0.25 * p.M - p.g) * ell ** 2


def critical_marangoni(g, k0):
    """(M*, M*(k0)) = (4g, 4g + 4 k0^2)."""
    if not (g > 0 and k0 > 0):
        raise DomainError("g and k0 must be positive")
    return 4.0 * g, 4.0 * g + 4.0 * k0 ** 2


def unstable_band(p):
    """Open interval of wavenumbers l > 0 with a positive symbol, or None."""
    if p.M <= 4.0 * p.g:
        return None
    return (0.0, float(np.sqrt(0.25 * p.M - p.g)))


def mode_set(k0, n, bloch=0.0):
    """Wavenumbers carried by an n-point grid on one period 2 pi/k0."""
    return k0 * np.fft.fftfreq(n, d=1.0 / n) + bloch


def constant_state_spectrum(p, n=GRID_SIZES[0], bloch=0.0):
    """Symbol sampled on the discrete co-periodic (or Bloch-shifted) mode set."""
    ell = mode_set(p.k0, n, bloch)
    return SpectrumReport("constant", constant_state_symbol(ell, p).astype(complex),
                          float(np.max(constant_state_symbol(ell, p))), unstable_band(p), bloch)


def trailing_energy(profile, n):
    """Fraction of the coefficient energy above half the resolvable modes."""
    a2 = profile.coeffs ** 2
    total = a2.sum()
    if total == 0.0:
        return 0.0
    cut = (n - 1) // 4
    return float(a2[cut:].sum() / total)


def _height_data(profile, n):
    x = spectral.grid(profile.k0, n)
    h = 1.0 + profile(x)
    return x, h, profile(x, 1), profile(x, 3)


def linearized_operator(profile, M, g, n, bloch=0.0):
    """Dense collocation matrix of the linearisation at h = 1 + profile."""
    length = profile.period
    x, h, hx, hxxx = _height_data(profile, n)
    D1 = spectral.differentiation_matrix(n, length, 1, bloch)
    D3 = spectral.differentiation_matrix(n, length, 3, bloch)
    inner = (
        (h ** 3)[:, None] * (D3 - g * D1)
        + np.diag(3.0 * h ** 2 * (hxxx - g * hx))
        + (M * h ** 2 / (1.0 + h) ** 2)[:, None] * D1
        + np.diag(2.0 * M * h * hx / (1.0 + h) ** 3)
    )
    A = -D1 @ inner
    if bloch == 0.0:
        A = A.real
    return x, A


def _choose_grid(profile, n_grid):
    if n_grid is not None:
        frac = trailing_energy(profile, n_grid)
        if frac > TRAILING_ENERGY_TOL:
            raise ResolutionError(
                f"trailing-mode energy {frac:.2e} exceeds {TRAILING_ENERGY_TOL:g} on {n_grid} points")
        return n_grid
    for n in GRID_SIZES:
        if trailing_energy(profile, n) <= TRAILING_ENERGY_TOL:
            return n
    raise ResolutionError(
        f"profile not resolved on {GRID_SIZES[-1]} points "
        f"(trailing energy {trailing_energy(profile, GRID_SIZES[-1]):.2e})")


def periodic_state_spectrum(bp, n_eigs=10, g=1.0, bloch=0.0, n_grid=None, label=None):
    """Leading `n_eigs` eigenvalues of the linearisation about a branch point.

    The grid is the smallest of 63, 127, 255, 511 points on which the
    profile's trailing-mode energy is below 1e-8, unless `n_grid` is given.
    """
    if not bp.min_h > MIN_HEIGHT:
        raise DomainError(f"min h = {bp.min_h:.3g} is below the validated range {MIN_HEIGHT}")
    n = _choose_grid(bp.profile, n_grid)
    _, A = linearized_operator(bp.profile, bp.M, g, n, bloch)
    ev = np.linalg.eigvals(A)
    ev = ev[np.argsort(-ev.real, kind="stable")][:n_eigs]
    label = f"branch point s={bp.s:.6g}" if label is None else label
    return SpectrumReport(label, ev, float(ev[0].real), None, bloch)


def bloch_sweep(bp, g=1.0, n_bloch=8, n_eigs=10, n_grid=None):
    """Spectra for Bloch parameters mu in [0, k0) on a uniform sample."""
    mus = bp.k0 * np.arange(n_bloch) / n_bloch
    return [periodic_state_spectrum(bp, n_eigs, g, bloch=mu, n_grid=n_grid) for mu in mus]


def symbol_deviation(bp, g=1.0, n_match=9, n_grid=None):
    """Largest distance between matched leading eigenvalues and symbol values.

    The symbol is evaluated at the branch point's own M on the co-periodic
    mode set; eigenvalues and symbol values are paired by minimal total
    distance.
    """
    report = periodic_state_spectrum(bp, n_match, g, n_grid=n_grid)
    p = ModelParams(g, bp.M, bp.k0)
    sym = np.sort(constant_state_symbol(mode_set(bp.k0, 4 * n_match + 1), p))[::-1][:n_match]
    cost = np.abs(report.eigenvalues[:, None] - sym[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def annotate_branch(record, n_grid=None):
    """Copy of `record` with leading co-periodic eigenvalues filled in.

    Points with min h at or below 0.05 keep NaN.
    """
    values = []
    for bp in record.points:
        if bp.min_h > MIN_HEIGHT:
            try:
                values.append(periodic_state_spectrum(bp, 1, record.g, n_grid=n_grid).leading)
            except ResolutionError as exc:
                log.warning("skipping eigenvalue at s=%g: %s", bp.s, exc)
                values.append(float("nan"))
        else:
            values.append(float("nan"))
    return with_leading_eigs(record, values)

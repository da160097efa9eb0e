"""Time stepping of the thin-film equation and of its long-wave amplitude
equation.

Thin film, on one period with a uniform grid:

    h_t = -d/dx J(h),   J = h^3 (h_xxx - g h_x) + M h^2/(1+h)^2 h_x.

The step is stabilised IMEX: with A = max h^3, the term -A h_xxxx is taken
implicitly and -J_x + A h_xxxx explicitly, both in Fourier space. The zero
mode is untouched, so the discrete mass only changes by FFT round-off.

Amplitude equation (X = eps x, T = eps^4 t):

    V_T = -V_XXXX - V_XX - 2g (V V_X)_X,

stepped with the linear part implicit and the nonlinearity written as
-g (V^2)_XX.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import spectral
from .errors import BlowUpError, HeightFloorError, WindowNotReached
from .model import ModelParams

log = logging.getLogger(__name__)

HEIGHT_FLOOR = 1e-4
DEFAULT_GRID = 256
DEFAULT_DT = 1e-4
CFL_FRACTION = 0.1
OVERFLOW = 1e6


@dataclass
class EvolutionState:
    t: float
    h: np.ndarray
    dt: float
    mass: float
    length: float = 2.0 * np.pi

    @classmethod
    def from_height(cls, h, length=2.0 * np.pi, dt=DEFAULT_DT, t=0.0):
        h = np.array(h, dtype=float)
        if not np.all(h > 0):
            raise HeightFloorError("initial height is not positive")
        return cls(t, h, dt, period_mass(h, length), length)

    @property
    def x(self):
        n = self.h.size
        return -0.5 * self.length + self.length * np.arange(n) / n


def period_mass(h, length):
    # trapezoid rule on a periodic grid
    return float(np.sum(h) * length / h.size)


def _wavenumbers(n, length):
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)


def thin_film_flux(h, length, p):
    hx = spectral.derivative(h, length, 1)
    hxxx = spectral.derivative(h, length, 3)
    return h ** 3 * (hxxx - p.g * hx) + p.M * h ** 2 / (1.0 + h) ** 2 * hx


def flux_divergence(h, length, p):
    return spectral.derivative(thin_film_flux(h, length, p), length, 1)


def stable_dt(h, length, p, fraction=CFL_FRACTION):
    """Largest dt for which the explicit update moves h by at most
    `fraction` of its minimum."""
    rate = np.max(np.abs(flux_divergence(h, length, p)))
    return np.inf if rate == 0.0 else fraction * float(h.min()) / rate


def step_thin_film(state, dt, p, floor=HEIGHT_FLOOR):
    """Advance by min(dt, stable_dt). Raises HeightFloorError below `floor`."""
    h, length = state.h, state.length
    if not h.min() > floor:
        raise HeightFloorError(f"min h = {h.min():.3e} at t = {state.t:.6g}", state)
    div = flux_divergence(h, length, p)
    rate = np.max(np.abs(div))
    if rate > 0.0:
        dt = min(dt, CFL_FRACTION * float(h.min()) / rate)
    A = float(np.max(h ** 3))
    k4 = _wavenumbers(h.size, length) ** 4
    h_hat = np.fft.rfft(h)
    rhs = h_hat + dt * (np.fft.rfft(-div) + A * k4 * h_hat)
    rhs[0] = h_hat[0]
    h_new = np.fft.irfft(rhs / (1.0 + dt * A * k4), h.size)
    new = EvolutionState(state.t + dt, h_new, dt, period_mass(h_new, length), length)
    if not h_new.min() > floor:
        raise HeightFloorError(f"min h = {h_new.min():.3e} at t = {new.t:.6g}", new)
    return new


def mode_amplitude(f, ell):
    """Amplitude of the ell-th Fourier mode of periodic samples."""
    return float(2.0 * np.abs(np.fft.rfft(f)[ell]) / f.size)


@dataclass
class EvolutionResult:
    state: EvolutionState
    snapshots: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    halted: bool = False
    steps: int = 0


def evolve(h0, p, t_end, *, length=None, dt=DEFAULT_DT, snapshot_every=None,
           floor=HEIGHT_FLOOR):
    """Integrate the thin-film equation to `t_end`.

    Diagnostics rows are (t, mass, min_h, max |mode|, blowup_indicator);
    the indicator is the running integral of max |h_xx|^2. If the height
    floor is hit, the run stops and `halted` is set.
    """
    length = 2.0 * np.pi / p.k0 if length is None else length
    state = EvolutionState.from_height(h0, length, dt)
    result = EvolutionResult(state)
    indicator, curv = 0.0, _curvature_sup2(state.h, length)

    def record():
        amp = max(mode_amplitude(state.h, l) for l in range(1, state.h.size // 2))
        result.diagnostics.append((state.t, state.mass, float(state.h.min()), amp, indicator))
        result.snapshots.append((state.t, state.h.copy()))

    record()
    next_snap = snapshot_every if snapshot_every else np.inf
    while state.t < t_end - 1e-12 * max(1.0, t_end):
        try:
            new = step_thin_film(state, min(dt, t_end - state.t), p, floor)
        except HeightFloorError as exc:
            log.warning("evolution halted: %s", exc)
            result.halted = True
            if exc.state is not None and exc.state is not state:
                state = exc.state
            break
        new_curv = _curvature_sup2(new.h, length)
        indicator += 0.5 * (curv + new_curv) * new.dt
        state, curv = new, new_curv
        result.steps += 1
        if state.t >= next_snap - 1e-12:
            record()
            next_snap += snapshot_every
    if not result.snapshots or result.snapshots[-1][0] != state.t:
        record()
    result.state = state
    return result


def _curvature_sup2(f, length):
    return float(np.max(np.abs(spectral.derivative(f, length, 2))) ** 2)


def fit_rate(t, amp, lo, hi, min_samples=10):
    """Least-squares slope of log(amp) against t over samples with lo <= amp <= hi."""
    t, amp = np.asarray(t), np.asarray(amp)
    inside = (amp >= lo) & (amp <= hi)
    if inside.sum() < min_samples:
        raise WindowNotReached(f"only {int(inside.sum())} samples with amplitude in [{lo:g}, {hi:g}]")
    return float(np.polyfit(t[inside], np.log(amp[inside]), 1)[0])


def _track_mode(step, f, ell, dt, t_max, seed, upper, lower):
    """Step until the amplitude of mode ell leaves [lower, upper]."""
    times, amps = [0.0], [seed]
    t = 0.0
    while t < t_max:
        f = step(f, dt)
        if isinstance(f, EvolutionState):
            t, a = f.t, mode_amplitude(f.h, ell)
        else:
            t, a = t + dt, mode_amplitude(f, ell)
        times.append(t)
        amps.append(a)
        if a > upper or a < lower:
            break
    return np.array(times), np.array(amps)


def measure_growth_rate(ell, M, p=None, *, seed=1e-6, n=DEFAULT_GRID, dt=None, t_max=200.0):
    """Fitted exponential rate of a single seeded mode cos(ell k0 x) on h = 1.

    Growing modes are fitted while the amplitude lies in [seed, 1e-4].
    Decaying modes are fitted over the three decades below the seed. The
    default step is 1e-3 / ell^4, which resolves the mode's own time scale.
    """
    p = ModelParams(1.0, M, 1.0) if p is None else ModelParams(p.g, M, p.k0)
    length = 2.0 * np.pi / p.k0
    x = -0.5 * length + length * np.arange(n) / n
    dt = 1e-3 / ell ** 4 if dt is None else dt
    lower = 1e-3 * seed
    state = EvolutionState.from_height(1.0 + seed * np.cos(ell * p.k0 * x), length, dt)
    times, amps = _track_mode(lambda s, d: step_thin_film(s, d, p), state, ell, dt, t_max,
                              seed, 1e-4, lower)
    if amps[-1] >= seed:
        return fit_rate(times, amps, seed, 1e-4)
    return fit_rate(times, amps, lower, seed)


def sivashinsky_rhs(V, length, g):
    """Right-hand side of the amplitude equation, evaluated spectrally."""
    return (-spectral.derivative(V, length, 4) - spectral.derivative(V, length, 2)
            - 2.0 * g * spectral.derivative(V * spectral.derivative(V, length, 1), length, 1))


def step_sivashinsky(V, dt, g, length=2.0 * np.pi, overflow=OVERFLOW):
    """One linearly implicit step of the amplitude equation.

    Raises BlowUpError when max |V| exceeds `overflow`.
    """
    V = np.asarray(V, dtype=float)
    k = _wavenumbers(V.size, length)
    V_hat = np.fft.rfft(V)
    nonlinear = g * k ** 2 * np.fft.rfft(V * V)  # -g (V^2)_XX
    nonlinear[0] = 0.0
    V_new = np.fft.irfft((V_hat + dt * nonlinear) / (1.0 + dt * (k ** 4 - k ** 2)), V.size)
    peak = np.max(np.abs(V_new))
    if not peak <= overflow:
        raise BlowUpError(f"max |V| = {peak:.3e} exceeds {overflow:g}")
    return V_new


def evolve_sivashinsky(V0, g, T_end, dT, length=2.0 * np.pi, overflow=OVERFLOW):
    """Fixed-step trajectory (T, snapshots). Stops at blow-up; the last
    snapshot is then the final finite state and `blew_up` is True."""
    V = np.array(V0, dtype=float)
    times, snaps = [0.0], [V.copy()]
    nsteps = int(round(T_end / dT))
    blew_up = False
    for k in range(nsteps):
        try:
            V = step_sivashinsky(V, dT, g, length, overflow)
        except BlowUpError:
            blew_up = True
            break
        times.append((k + 1) * dT)
        snaps.append(V)
    return np.array(times), snaps, blew_up


def measure_sivashinsky_rate(ell, g=1.0, length=2.0 * np.pi, seed=1e-6, n=128, dT=None,
                             T_max=200.0):
    """Fitted linear rate of mode ell (wavenumber 2 pi ell/length).

    The default step is 1e-3 / max(1, K^4) for the mode's wavenumber K.
    """
    K = 2.0 * np.pi * ell / length
    dT = 1e-3 / max(1.0, K ** 4) if dT is None else dT
    X = length * np.arange(n) / n
    V = seed * np.cos(2.0 * np.pi * ell * X / length)
    lower = 1e-3 * seed
    times, amps = _track_mode(lambda f, d: step_sivashinsky(f, d, g, length), V, ell, dT,
                              T_max, seed, 1e-4, lower)
    if amps[-1] >= seed:
        return fit_rate(times, amps, seed, 1e-4)
    return fit_rate(times, amps, lower, seed)


def blowup_indicator(trajectory, dT, length=2.0 * np.pi):
    """Running integral of max |V_XX|^2 over equally spaced snapshots."""
    sup2 = np.array([_curvature_sup2(np.asarray(V, dtype=float), length) for V in trajectory])
    if sup2.size == 0:
        return sup2
    return cumulative_trapezoid(sup2, dx=dT, initial=0.0)


def default_seed(X, length):
    """Smooth mean-zero test datum on the amplitude domain."""
    q = 2.0 * np.pi / length
    return 0.7 * np.cos(q * X) + 0.3 * np.sin(2 * q * X) + 0.2 * np.cos(3 * q * X)


@dataclass
class AmplitudeReport:
    eps: float
    M: float
    discrepancy: float
    T: np.ndarray
    errors: np.ndarray
    amplitude: float


def amplitude_correspondence(eps, g=1.0, V0=None, *, length=4.0 * np.pi, T_end=1.0,
                             dT=1e-3, n=DEFAULT_GRID, n_compare=10):
    """Compare the full equation with the amplitude equation in scaled variables.

    The full equation runs at M = 4g + 4 eps^2 from h = 1 + eps^2 V0(eps x)
    on [0, length/eps). The amplitude equation runs from -V0 and its solution
    W is mapped back via V = -W. The discrepancy is the largest L-infinity
    difference of (h - 1)/eps^2 and V over `n_compare` equally spaced times
    in (0, T_end].
    """
    if not 0.0 < eps <= 0.3:
        raise ValueError("eps must lie in (0, 0.3]")
    X = length * np.arange(n) / n
    V0 = default_seed(X, length) if V0 is None else np.asarray(V0, dtype=float)
    M = 4.0 * g + 4.0 * eps ** 2
    p = ModelParams(g, M, 2.0 * np.pi * eps / length)
    L = length / eps
    state = EvolutionState.from_height(1.0 + eps ** 2 * V0, L, dT / eps ** 4)
    W = -V0.copy()
    nsteps = int(round(T_end / dT))
    every = max(1, nsteps // n_compare)
    Ts, errs = [], []
    for k in range(1, nsteps + 1):
        W = step_sivashinsky(W, dT, g, length)
        t_target = k * dT / eps ** 4
        while state.t < t_target * (1.0 - 1e-12):
            state = step_thin_film(state, t_target - state.t, p)
        if k % every == 0 or k == nsteps:
            Ts.append(k * dT)
            errs.append(float(np.max(np.abs((state.h - 1.0) / eps ** 2 + W))))
    errs = np.array(errs)
    return AmplitudeReport(eps, M, float(errs.max()) if errs.size else 0.0, np.array(Ts), errs,
                           float(np.max(np.abs(V0))))


def amplitude_residual(eps, g=1.0, V=None, length=4.0 * np.pi, n=DEFAULT_GRID):
    """max |h_t + J_x| / eps^6 for h = 1 + eps^2 V(eps x) with V_T taken from
    the amplitude equation written for V (nonlinearity +2g (V V_X)_X)."""
    X = length * np.arange(n) / n
    V = default_seed(X, length) if V is None else np.asarray(V, dtype=float)
    p = ModelParams(g, 4.0 * g + 4.0 * eps ** 2, 2.0 * np.pi * eps / length)
    V_T = -sivashinsky_rhs(-V, length, g)
    resid = eps ** 6 * V_T + flux_divergence(1.0 + eps ** 2 * V, length / eps, p)
    return float(np.max(np.abs(resid)) / eps ** 6)

"""Parameters, nonlinearities and conserved quantities of the stationary
thermocapillary thin-film problem.

Heights are written h = 1 + v. The steady equation integrated twice reads

    v'' = g v - M omega(v) + M K,   omega(v) = 1/(2+v) + log((1+v)/(2+v)),

and is the Hamiltonian system with H(v, w) = w^2/2 + G(v).
"""

from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import DomainError, PositivityError

#: K(0) = omega(0), the integration constant of the flat film h = 1.
K0 = 0.5 + np.log(0.5)

#: Below this height the term (1+v) log((1+v)/(2+v)) is replaced by its limit 0.
_BOUNDARY_EPS = 1e-300

MIN_QUADRATURE = 64


@dataclass(frozen=True)
class ModelParams:
    g: float = 1.0
    M: float = 8.0
    k0: float = 1.0

    def __post_init__(self):
        for name in ("g", "M", "k0"):
            value = getattr(self, name)
            if not value > 0:
                raise DomainError(f"{name} must be positive, got {value!r}")

    @property
    def M_star(self):
        return 4.0 * self.g

    @property
    def M_star_k0(self):
        return 4.0 * self.g + 4.0 * self.k0 ** 2


@dataclass(frozen=True)
class HamiltonianParams:
    g: float = 1.0
    M: float = 8.0
    K: float = K0

    def __post_init__(self):
        if not self.g > 0 or not self.M > 0:
            raise DomainError("g and M must be positive")
        if self.K > K0 + 1e-15:
            raise DomainError(f"K = {self.K!r} exceeds K0 = {K0!r}")


@dataclass(frozen=True)
class FixedPointPair:
    v_l: float
    v_u: float
    kind_l: str = "unclassified"
    kind_u: str = "unclassified"


@dataclass(frozen=True, eq=False)
class PeriodicProfile:
    """Even, mean-zero profile v(x) = sum_l a_l cos(l k0 x), l = 1..N."""

    k0: float
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float).ravel()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        if not self.k0 > 0:
            raise DomainError("k0 must be positive")

    @property
    def N(self):
        return self.coeffs.size

    @property
    def period(self):
        return 2.0 * np.pi / self.k0

    @classmethod
    def zero(cls, k0, N):
        return cls(k0, np.zeros(N))

    def resized(self, N):
        """Truncate or zero-pad to N modes."""
        out = np.zeros(N)
        m = min(N, self.N)
        out[:m] = self.coeffs[:m]
        return PeriodicProfile(self.k0, out)

    def __call__(self, x, order=0):
        x = np.asarray(x, dtype=float)
        arg = np.multiply.outer(x, self.k0 * np.arange(1, self.N + 1))
        kl = self.k0 * np.arange(1, self.N + 1)
        # d^p/dx^p cos = kl^p cos(arg + p pi/2)
        return (np.cos(arg + order * np.pi / 2) * kl ** order) @ self.coeffs

    def sample(self, n=None, order=0):
        """Return (x, d^order v) on the uniform grid of n points (default 8N)."""
        n = self.default_grid() if n is None else n
        return spectral.grid(self.k0, n), spectral.cosine_samples(self.coeffs, self.k0, n, order)

    def default_grid(self):
        return max(8 * self.N, 16)

    def min_height(self, n=None):
        return 1.0 + self.sample(n)[1].min()

    def is_positive(self, n=None, floor=0.0):
        return self.min_height(n) > floor

    def check_positive(self, n=None, floor=0.0):
        hmin = self.min_height(n)
        if not hmin > floor:
            raise PositivityError(f"min(1 + v) = {hmin:.3e} is not above {floor:g}")


def _require_above_minus_one(v, strict=True):
    v = np.asarray(v, dtype=float)
    bad = v <= -1 if strict else v < -1
    if np.any(bad) or np.any(np.isnan(v)):
        raise DomainError("v must satisfy v > -1" if strict else "v must satisfy v >= -1")
    return v


def omega(v):
    """omega(v) = 1/(2+v) + log((1+v)/(2+v)); strictly concave on (-1, inf)."""
    v = _require_above_minus_one(v)
    return 1.0 / (2.0 + v) + np.log1p(v) - np.log(2.0 + v)


def omega_prime(v):
    v = _require_above_minus_one(v)
    return 1.0 / ((1.0 + v) * (2.0 + v) ** 2)


def _boundary_log_term(v):
    # (1+v) log((1+v)/(2+v)), continuously extended by 0 at v = -1
    v = np.asarray(v, dtype=float)
    one_plus = 1.0 + v
    safe = np.where(one_plus < _BOUNDARY_EPS, 1.0, one_plus)
    val = safe * (np.log(safe) - np.log1p(safe))
    return np.where(one_plus < _BOUNDARY_EPS, 0.0, val)


def mass_constant_K(profile, n_quad=None):
    """Period average of omega(v); equals K0 iff v == 0 (Jensen).

    Uses the trapezoid rule on max(8N, 64) uniform points unless `n_quad`
    is given; the floor keeps few-mode profiles at round-off accuracy.
    """
    n = max(8 * profile.N, MIN_QUADRATURE) if n_quad is None else n_quad
    n = max(n, 2 * profile.N + 1)
    _, v = profile.sample(n)
    if np.min(v) <= -1:
        raise PositivityError(f"min(1 + v) = {1 + np.min(v):.3e} on quadrature grid")
    return float(np.mean(omega(v)))


def potential_G(v, p, order=0):
    """G(v) = -g v^2/2 + M (1+v) log((1+v)/(2+v)) - M K v and derivatives."""
    if order == 0:
        v = _require_above_minus_one(v, strict=False)
        return -0.5 * p.g * v ** 2 + p.M * _boundary_log_term(v) - p.M * p.K * v
    v = _require_above_minus_one(v)
    if order == 1:
        return -p.g * v + p.M * omega(v) - p.M * p.K
    if order == 2:
        return -p.g + p.M * omega_prime(v)
    raise ValueError(f"order must be 0, 1 or 2, got {order!r}")


def hamiltonian(v, w, p):
    """H(v, w) = w^2/2 + G(v); defined on the closed half-plane v >= -1."""
    return 0.5 * np.asarray(w, dtype=float) ** 2 + potential_G(v, p, 0)


def stationary_flux(h, dx_h, dx3_h, p):
    """Pointwise flux h^3 (h''' - g h') + M h^2/(1+h)^2 h'.

    Vanishes identically on stationary states with zero integration constant.
    """
    h = np.asarray(h, dtype=float)
    return h ** 3 * (dx3_h - p.g * dx_h) + p.M * h ** 2 / (1.0 + h) ** 2 * dx_h


def profile_flux(profile, p, n=None):
    """Sample the stationary flux of h = 1 + v with spectral derivatives."""
    x, v = profile.sample(n)
    _, v1 = profile.sample(len(x), order=1)
    _, v3 = profile.sample(len(x), order=3)
    return x, stationary_flux(1.0 + v, v1, v3, p)

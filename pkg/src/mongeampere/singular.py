"""Singular solutions of det D^2 u = 1 built from one-dimensional profiles.

Two constructions are covered. The first is the cylindrical ansatz
u = |x'|^(2-2/n) h(x_n) in dimension n >= 3, whose profile solves

    h'' = [c(n) / h^(n-2) + kappa h'^2] / h,   kappa = (2n-2)/(n-2),

with h(0) = 1, h'(0) = 0; h blows up at a finite parameter value, which
bounds the slab where the solution lives, and the gradient is only Holder
continuous (exponent 1 - 2/n) across the axis. The second lives on the
parabolic region {x2 > x1^2} in the plane, u = x2^(3/2) h(x2^(-1/2) x1) with

    h'' = 4 (1 + h'^2) / (3 h + t h'),

h(0) = 1, h'(0) = 0 on [-1, 1]; its second derivative u_22 degenerates like
x2^(-1/2) toward the origin even though the boundary values are C^{2,1}.

The structure constant c(n) is not hard-coded anywhere: it is recovered by a
finite-difference determinant oracle on the ansatz with quadratic test data,
which keeps the module self-validating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .checks import SymMatrix
from .errors import (
    IntegrationFailureError,
    InvalidSampleError,
    OutsideDomainError,
    SingularPointError,
    UnsupportedDimensionError,
)

_EPS = np.finfo(float).eps
# grid points are kept only while the ODE residual is certifiable in float64
_RESIDUAL_BUDGET = 1e-9
_AXIS_TOL = 1e-12


@dataclass(frozen=True)
class IntegrationConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    blow_up_threshold: float = 1e6
    grid_points: int = 2001
    t_max: float = 50.0

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.blow_up_threshold <= 1.0:
            raise ValueError("blow_up_threshold must exceed the initial height 1")
        if self.grid_points < 9:
            raise ValueError("grid_points must be at least 9")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")


@dataclass(frozen=True)
class ODEProfile:
    """Tabulated even profile h with derivatives on a symmetric grid."""

    grid: np.ndarray
    h: np.ndarray
    h_prime: np.ndarray
    h_double_prime: np.ndarray
    blow_up_time: float | None = None

    def __post_init__(self):
        arrays = {}
        for name in ("grid", "h", "h_prime", "h_double_prime"):
            a = np.ascontiguousarray(getattr(self, name), dtype=float).reshape(-1)
            a.setflags(write=False)
            arrays[name] = a
            object.__setattr__(self, name, a)
        m = len(arrays["grid"])
        if any(len(a) != m for a in arrays.values()) or m < 2:
            raise ValueError("profile arrays must share a length of at least 2")
        if not np.all(np.diff(arrays["grid"]) > 0.0):
            raise ValueError("grid must be strictly increasing")
        if np.any(arrays["h"] <= 0.0):
            raise ValueError("profile must stay positive")
        if np.any(arrays["h_double_prime"] < -1e-12):
            raise ValueError("profile must be convex")
        if self.blow_up_time is not None:
            object.__setattr__(self, "blow_up_time", float(self.blow_up_time))

    @property
    def t_min(self) -> float:
        return float(self.grid[0])

    @property
    def t_max(self) -> float:
        return float(self.grid[-1])

    def _splines(self):
        cached = getattr(self, "_spl", None)
        if cached is None:
            cached = (
                CubicHermiteSpline(self.grid, self.h, self.h_prime),
                CubicHermiteSpline(self.grid, self.h_prime, self.h_double_prime),
                CubicSpline(self.grid, self.h_double_prime),
            )
            object.__setattr__(self, "_spl", cached)
        return cached

    def sample(self, t: float) -> tuple[float, float, float]:
        """Interpolated (h, h', h'') at parameter t within the tabulated range."""
        t = float(t)
        lo, hi = self.t_min, self.t_max
        pad = 1e-12 * (1.0 + abs(hi))
        if t < lo - pad or t > hi + pad:
            raise OutsideDomainError(
                f"parameter {t} outside the tabulated range [{lo}, {hi}]"
            )
        t = min(max(t, lo), hi)
        s_h, s_hp, s_hpp = self._splines()
        return float(s_h(t)), float(s_hp(t)), float(s_hpp(t))


@dataclass(frozen=True)
class PointEval:
    """Value, gradient, and Hessian of a solution at one point.

    det_residual measures how far the Hessian determinant is from the
    right-hand side 1 of the equation.
    """

    value: float
    gradient: np.ndarray
    hessian: SymMatrix
    det_residual: float = field(init=False)

    def __post_init__(self):
        g = np.ascontiguousarray(self.gradient, dtype=float).reshape(-1)
        g.setflags(write=False)
        object.__setattr__(self, "gradient", g)
        det = float(np.linalg.det(self.hessian.array))
        object.__setattr__(self, "det_residual", abs(det - 1.0))


def _fd_hessian(func, x: np.ndarray, step: float) -> np.ndarray:
    """Central-difference Hessian, Richardson-combined over widths (s, 2s, 4s)
    for sixth-order accuracy."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    f0 = func(x)
    H = np.empty((n, n))

    def diag(i, s):
        e = np.zeros(n)
        e[i] = s
        return (func(x + e) - 2.0 * f0 + func(x - e)) / (s * s)

    def cross(i, j, s):
        ei = np.zeros(n)
        ej = np.zeros(n)
        ei[i] = s
        ej[j] = s
        return (
            func(x + ei + ej) - func(x + ei - ej) - func(x - ei + ej) + func(x - ei - ej)
        ) / (4.0 * s * s)

    for i in range(n):
        H[i, i] = (64.0 * diag(i, step) - 20.0 * diag(i, 2 * step) + diag(i, 4 * step)) / 45.0
        for j in range(i + 1, n):
            v = (64.0 * cross(i, j, step) - 20.0 * cross(i, j, 2 * step) + cross(i, j, 4 * step)) / 45.0
            H[i, j] = H[j, i] = v
    return H


@lru_cache(maxsize=None)
def pogorelov_constant(n: int, step: float = 0.02) -> float:
    """Structure constant c(n) in h^(n-2)(h h'' - kappa h'^2) = c(n).

    Recovered numerically: with quadratic test data h0(t) = 1 + t^2/2 the
    ansatz u = |x'|^(2-2/n) h0(x_n) has det D^2 u = Q / c(n) at any off-axis
    point, where Q = h0^(n-2)(h0 h0'' - kappa h0'^2) is explicit. A
    finite-difference determinant at one such point therefore pins c(n).
    """
    n = int(n)
    if n <= 2:
        raise UnsupportedDimensionError(
            "the cylindrical ansatz is singular only for n >= 3; in the plane "
            "solutions of the unit-determinant equation are strictly convex"
        )
    a = 2.0 - 2.0 / n
    kappa = (2.0 * n - 2.0) / (n - 2.0)
    t0 = 0.3
    xp = 0.5 + 0.3 * np.cos(np.arange(1.0, n))
    x0 = np.append(xp, t0)

    def u(x):
        r2 = float(np.dot(x[:-1], x[:-1]))
        return r2 ** (0.5 * a) * (1.0 + 0.5 * x[-1] * x[-1])

    det_fd = float(np.linalg.det(_fd_hessian(u, x0, float(step))))
    h0 = 1.0 + 0.5 * t0 * t0
    q = h0 ** (n - 2) * (h0 - kappa * t0 * t0)
    if det_fd <= 0.0:
        raise IntegrationFailureError("determinant oracle lost positivity")
    return q / det_fd


def _pogorelov_rhs(n: int, c: float, kappa: float):
    def rhs(t, y):
        h, hp = y
        return (hp, (c / h ** (n - 2) + kappa * hp * hp) / h)

    return rhs


def _symmetric_profile(t_half, h_half, hp_half, hpp_half, blow_up_time) -> ODEProfile:
    grid = np.concatenate([-t_half[:0:-1], t_half])
    return ODEProfile(
        grid,
        np.concatenate([h_half[:0:-1], h_half]),
        np.concatenate([-hp_half[:0:-1], hp_half]),
        np.concatenate([hpp_half[:0:-1], hpp_half]),
        blow_up_time,
    )


def integrate_pogorelov(n: int, config: IntegrationConfig | None = None) -> ODEProfile:
    """Integrate the cylindrical profile from t = 0 and reflect it evenly.

    Integration runs until h crosses config.blow_up_threshold (recorded, with
    an asymptotic tail correction, as blow_up_time) or until config.t_max.
    The tabulated grid stops slightly earlier, where the ODE residual is
    still certifiable at double precision: the stored h'' is the exact
    right-hand side of the stored (h, h'), so the residual at a grid point is
    pure rounding, of size about eps * kappa * h'^2 * h^(n-2), and points are
    kept only while eight times that estimate stays below 1e-9.
    """
    cfg = config or IntegrationConfig()
    c = pogorelov_constant(n)
    kappa = (2.0 * n - 2.0) / (n - 2.0)
    rhs = _pogorelov_rhs(n, c, kappa)

    def crossed(t, y):
        return y[0] - cfg.blow_up_threshold

    crossed.terminal = True
    crossed.direction = 1.0

    sol = solve_ivp(
        rhs,
        (0.0, cfg.t_max),
        (1.0, 0.0),
        method="RK45",
        rtol=cfg.rtol,
        atol=cfg.atol,
        dense_output=True,
        events=(crossed,),
    )
    blow_up_time = None
    t_end = float(sol.t[-1])
    if sol.t_events[0].size:
        t_cross = float(sol.t_events[0][0])
        h_cross, hp_cross = (float(v) for v in sol.sol(t_cross))
        # past the threshold h' ~ C h^kappa, so the remaining time to the
        # pole is the integral of dh/h', which telescopes to h/((kappa-1) h')
        blow_up_time = t_cross + h_cross / ((kappa - 1.0) * hp_cross)
        t_end = t_cross
    elif sol.status == -1:
        # the pole compresses the final doublings of h below the float
        # resolution of t, so the stepper can underflow just before the
        # threshold; with h' already superlinear the same tail formula
        # locates the pole from the last accepted state
        h_last, hp_last = float(sol.y[0, -1]), float(sol.y[1, -1])
        regime = min(1e3, cfg.blow_up_threshold)
        if h_last < regime:
            raise IntegrationFailureError(f"profile integration failed: {sol.message}")
        blow_up_time = t_end + h_last / ((kappa - 1.0) * hp_last)

    probe_t = np.linspace(0.0, t_end, 8193)
    probe_h, probe_hp = sol.sol(probe_t)
    noise = 8.0 * _EPS * (c + kappa * probe_hp**2 * probe_h ** (n - 2))
    bad = np.flatnonzero(noise > _RESIDUAL_BUDGET)
    t_cap = float(probe_t[bad[0] - 1]) if bad.size else t_end
    if t_cap <= 0.0:
        raise IntegrationFailureError("no representable grid before blow-up")

    m = (cfg.grid_points + 1) // 2
    t_half = np.linspace(0.0, t_cap, m)
    h_half, hp_half = sol.sol(t_half)
    hpp_half = (c / h_half ** (n - 2) + kappa * hp_half**2) / h_half
    return _symmetric_profile(t_half, h_half, hp_half, hpp_half, blow_up_time)


def pogorelov_eval(n: int, profile: ODEProfile, x) -> PointEval:
    """Evaluate u = |x'|^(2-2/n) h(x_n) with closed-form derivatives.

    The Hessian splits into tangential directions (eigenvalue a r^(a-2) h),
    and the radial/axial 2x2 block; everything is assembled in Cartesian
    form from h, h', h'' interpolated on the profile grid. On the axis the
    Hessian blows up, so evaluation there is refused.
    """
    if n <= 2:
        raise UnsupportedDimensionError("the cylindrical ansatz requires n >= 3")
    x = np.asarray(x, dtype=float).reshape(-1)
    if len(x) != n:
        raise ValueError(f"point must have {n} components")
    t = float(x[-1])
    xp = x[:-1]
    r2 = float(xp @ xp)
    r = math.sqrt(r2)
    h, hp, hpp = profile.sample(t)
    if r <= _AXIS_TOL * (1.0 + abs(t)):
        raise SingularPointError("second derivatives of the ansatz diverge on the axis")
    a = 2.0 - 2.0 / n

    ra = r**a
    value = ra * h
    grad = np.append(a * r ** (a - 2.0) * h * xp, ra * hp)
    H = np.empty((n, n))
    H[: n - 1, : n - 1] = a * r ** (a - 2.0) * h * np.eye(n - 1) + a * (a - 2.0) * r ** (
        a - 4.0
    ) * h * np.outer(xp, xp)
    H[: n - 1, n - 1] = H[n - 1, : n - 1] = a * r ** (a - 2.0) * hp * xp
    H[n - 1, n - 1] = ra * hpp
    return PointEval(value, grad, SymMatrix(H))


def _wang_rhs(t, y):
    h, hp = y
    return (hp, 4.0 * (1.0 + hp * hp) / (3.0 * h + t * hp))


def integrate_wang(config: IntegrationConfig | None = None) -> ODEProfile:
    """Integrate the parabolic-region profile on [0, 1] and reflect evenly.

    The profile only matters for |t| <= 1 (t is the similarity variable
    x1/sqrt(x2), bounded by 1 on the region), so integration always runs to
    t = 1 regardless of config.t_max.
    """
    cfg = config or IntegrationConfig()

    def degenerate(t, y):
        return 3.0 * y[0] + t * y[1] - 1e-9

    degenerate.terminal = True
    degenerate.direction = -1.0

    sol = solve_ivp(
        _wang_rhs,
        (0.0, 1.0),
        (1.0, 0.0),
        method="RK45",
        rtol=cfg.rtol,
        atol=cfg.atol,
        dense_output=True,
        events=(degenerate,),
    )
    if sol.t_events[0].size:
        raise IntegrationFailureError(
            "denominator 3h + t h' lost positivity; profile left the convex regime"
        )
    if sol.status != 0:
        raise IntegrationFailureError(f"profile integration failed: {sol.message}")

    m = (cfg.grid_points + 1) // 2
    t_half = np.linspace(0.0, 1.0, m)
    h_half, hp_half = sol.sol(t_half)
    hpp_half = 4.0 * (1.0 + hp_half**2) / (3.0 * h_half + t_half * hp_half)
    return _symmetric_profile(t_half, h_half, hp_half, hpp_half, None)


def wang_eval(profile: ODEProfile, x1: float, x2: float) -> PointEval:
    """Evaluate u = x2^(3/2) h(x2^(-1/2) x1) on the region {x2 >= x1^2, x2 > 0}.

    Derivatives by the chain rule with s = x1/sqrt(x2):
        u_1  = x2 h'(s)                 u_2  = sqrt(x2) (3 h - s h') / 2
        u_11 = sqrt(x2) h''             u_12 = h' - s h''/2
        u_22 = (3 h - 3 s h' + s^2 h'') / (4 sqrt(x2))
    so det D^2 u = h''(3h + s h')/4 - h'^2, which the profile equation makes 1.
    """
    x1 = float(x1)
    x2 = float(x2)
    pad = 1e-12 * (1.0 + x1 * x1)
    if x2 <= 0.0 or x1 * x1 > x2 + pad:
        raise OutsideDomainError(
            "point lies outside the parabolic region {x2 >= x1^2, x2 > 0}"
        )
    rx = math.sqrt(x2)
    s = min(max(x1 / rx, -1.0), 1.0)
    h, hp, hpp = profile.sample(s)

    value = x2 * rx * h
    u1 = x2 * hp
    u2 = 0.5 * rx * (3.0 * h - s * hp)
    u11 = rx * hpp
    u12 = hp - 0.5 * s * hpp
    u22 = 0.25 / rx * (3.0 * h - 3.0 * s * hp + s * s * hpp)
    return PointEval(value, np.array([u1, u2]), SymMatrix([[u11, u12], [u12, u22]]))


def fit_power_exponent(samples) -> float:
    """Least-squares slope of log y against log t for samples (t, y), all > 0."""
    pts = np.asarray([(float(t), float(y)) for t, y in samples], dtype=float)
    if len(pts) < 3:
        raise InvalidSampleError("need at least 3 samples to fit an exponent")
    if np.any(pts <= 0.0) or np.any(~np.isfinite(pts)):
        raise InvalidSampleError("samples must be finite and strictly positive")
    slope = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)[0]
    return float(slope)

r"""Pointwise geometry of warped products and their conformal deformations.

The ambient manifold is :math:`M = [r_0, \infty) \times S^n` with

.. math::

    \bar g = dr^2 + \lambda(r)^2 \sigma, \qquad \hat g = e^{2f} \bar g,

where :math:`\sigma` is the round metric in hyperspherical coordinates
:math:`(\theta_1, \dots, \theta_n)`, i.e.
:math:`\sigma = d\theta_1^2 + \sin^2\theta_1 d\theta_2^2 + \dots`.
All vectors are handled through their components in the coordinate frame
:math:`(\partial_r, \partial_{\theta_1}, \dots, \partial_{\theta_n})`.

Derivatives of :math:`\lambda` and :math:`f` always come from the scenario's
closed forms; finite differences only appear in the ``fd_*`` oracles, which
use function *values* alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    InconsistencyError,
    NonPositiveWarping,
    StepTooLarge,
)

__all__ = [
    "WarpingProfile",
    "ConformalFactor",
    "AmbientPoint",
    "TangentVector",
    "FiberCurvatureBand",
    "eval_warping",
    "psi_hat",
    "skew_T",
    "bar_ricci",
    "hat_ricci",
    "hat_scalar",
    "nu_psi_hat",
    "fd_curvature_oracle",
    "fd_scalar_oracle",
]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WarpingProfile:
    """Radial warping function with its first two derivatives.

    ``eval`` maps ``r`` (scalar or array) to ``(lam, dlam, ddlam)``.
    """

    eval: Callable
    r_min: float
    family_tag: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, r):
        return self.eval(r)


@dataclass(frozen=True)
class ConformalFactor:
    """Conformal factor depending on ``r`` and the polar angle ``theta_1``.

    ``polar_jet(r, theta)`` returns the six arrays
    ``(f, f_r, f_t, f_rr, f_rt, f_tt)``. Dependence on the remaining fiber
    angles is not supported, which keeps axisymmetric flows exact.
    """

    polar_jet: Callable
    family_tag: str = "zero"
    params: dict = field(default_factory=dict)
    support_radius: Optional[float] = None
    decay_params: Optional[tuple] = None
    radial: bool = True

    def value(self, r, theta):
        return self.polar_jet(r, theta)[0]

    def jet(self, r, angular):
        """Full coordinate 2-jet ``(f, grad, hess)`` at one point.

        ``angular`` has length n; the result lives in dimension n + 1.
        """
        m = len(angular) + 1
        theta = angular[0] if len(angular) else math.pi / 2
        f, fr, ft, frr, frt, ftt = (float(v) for v in self.polar_jet(r, theta))
        grad = np.zeros(m)
        hess = np.zeros((m, m))
        grad[0] = fr
        hess[0, 0] = frr
        if m > 1:
            grad[1] = ft
            hess[0, 1] = hess[1, 0] = frt
            hess[1, 1] = ftt
        return f, grad, hess


@dataclass(frozen=True)
class AmbientPoint:
    """A point ``(r, theta_1, ..., theta_n)``.

    An empty ``angular`` list stands for a rotationally symmetric evaluation;
    it is placed on the equator of every angle, which requires ``n``.
    """

    r: float
    angular: tuple = ()
    n: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "angular", tuple(float(a) for a in self.angular))
        if self.angular and self.n is not None and self.n != len(self.angular):
            raise DomainError("n does not match the number of angles")
        if not self.angular and self.n is None:
            object.__setattr__(self, "n", 2)

    @property
    def dim(self) -> int:
        return len(self.angular) if self.angular else int(self.n)

    def coords(self) -> np.ndarray:
        ang = self.angular if self.angular else (math.pi / 2,) * self.dim
        return np.array((self.r,) + tuple(ang), dtype=float)


@dataclass(frozen=True)
class TangentVector:
    v_r: float
    v_ang: tuple = ()
    norm_metric: str = "hat"

    @classmethod
    def from_array(cls, arr, norm_metric="hat"):
        arr = np.asarray(arr, dtype=float)
        return cls(float(arr[0]), tuple(float(a) for a in arr[1:]), norm_metric)

    def as_array(self, m: int) -> np.ndarray:
        out = np.zeros(m)
        out[0] = self.v_r
        out[1 : 1 + len(self.v_ang)] = self.v_ang
        return out


@dataclass(frozen=True)
class FiberCurvatureBand:
    rho1: float = 1.0
    rho2: float = 1.0

    def __post_init__(self):
        if self.rho1 > self.rho2:
            raise ValueError("rho1 must not exceed rho2")


# ---------------------------------------------------------------------------
# Profile and factor families
# ---------------------------------------------------------------------------


def euclidean_profile(r_min: float = 1e-3) -> WarpingProfile:
    def ev(r):
        r = np.asarray(r, dtype=float)
        return r, np.ones_like(r), np.zeros_like(r)

    return WarpingProfile(ev, r_min, "euclidean")


def hyperbolic_profile(r_min: float = 1e-3) -> WarpingProfile:
    def ev(r):
        r = np.asarray(r, dtype=float)
        return np.sinh(r), np.cosh(r), np.sinh(r)

    return WarpingProfile(ev, r_min, "hyperbolic")


def example1_profile(l: float, p: float, q: float, r_min: float = 0.1) -> WarpingProfile:
    """sinh(l r) + r**-p + exp(-q r)."""

    def ev(r):
        r = np.asarray(r, dtype=float)
        lam = np.sinh(l * r) + r ** (-p) + np.exp(-q * r)
        d1 = l * np.cosh(l * r) - p * r ** (-p - 1) - q * np.exp(-q * r)
        d2 = l * l * np.sinh(l * r) + p * (p + 1) * r ** (-p - 2) + q * q * np.exp(-q * r)
        return lam, d1, d2

    return WarpingProfile(ev, r_min, "example1", {"l": l, "p": p, "q": q})


def sqrt_profile(scale: float = 2.0, r_min: float = 0.0) -> WarpingProfile:
    """scale * sqrt(1 + r): increasing and strictly concave."""

    def ev(r):
        r = np.asarray(r, dtype=float)
        s = np.sqrt(1.0 + r)
        return scale * s, 0.5 * scale / s, -0.25 * scale / s**3

    return WarpingProfile(ev, r_min, "sqrt", {"scale": scale})


def custom_profile(expr: str, r_min: float) -> WarpingProfile:
    """Profile from a sympy expression in ``r``; derivatives are symbolic."""
    import sympy as sp

    r = sp.Symbol("r", positive=True)
    e = sp.sympify(expr, locals={"r": r})
    fns = [sp.lambdify(r, sp.diff(e, r, k), "numpy") for k in range(3)]

    def ev(x):
        x = np.asarray(x, dtype=float)
        return tuple(np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape).copy() for fn in fns)

    return WarpingProfile(ev, r_min, "custom", {"expr": expr})


def _zero_jet(r, theta):
    z = np.zeros(np.broadcast(np.asarray(r), np.asarray(theta)).shape)
    return z, z, z, z, z, z


def zero_factor() -> ConformalFactor:
    return ConformalFactor(_zero_jet, "zero", support_radius=0.0)


def constant_factor(c: float) -> ConformalFactor:
    def jet(r, theta):
        z = _zero_jet(r, theta)[0]
        return z + c, z, z, z, z, z

    return ConformalFactor(jet, "constant", {"c": c})


def log_factor() -> ConformalFactor:
    """f = log r (used as a test fixture)."""

    def jet(r, theta):
        r = np.asarray(r, dtype=float) + 0 * np.asarray(theta, dtype=float)
        z = np.zeros_like(r)
        return np.log(r), 1.0 / r, z, -1.0 / r**2, z, z

    return ConformalFactor(jet, "log")


def power_factor(a: float, m: float, eps: float = 0.0) -> ConformalFactor:
    """f = a r**-m (1 + eps cos theta)."""

    def jet(r, theta):
        r = np.asarray(r, dtype=float)
        th = np.asarray(theta, dtype=float)
        g = a * r ** (-m)
        gr = -m * g / r
        grr = m * (m + 1) * g / r**2
        c, s = np.cos(th), np.sin(th)
        ang = 1.0 + eps * c
        return g * ang, gr * ang, -eps * g * s, grr * ang, -eps * gr * s, -eps * g * c

    return ConformalFactor(
        jet, "power", {"a": a, "m": m, "eps": eps}, decay_params=None, radial=(eps == 0.0)
    )


def exp_factor(a: float, m: float, eps: float = 0.0) -> ConformalFactor:
    """f = a exp(-m r) (1 + eps cos theta)."""

    def jet(r, theta):
        r = np.asarray(r, dtype=float)
        th = np.asarray(theta, dtype=float)
        g = a * np.exp(-m * r)
        c, s = np.cos(th), np.sin(th)
        ang = 1.0 + eps * c
        return g * ang, -m * g * ang, -eps * g * s, m * m * g * ang, eps * m * g * s, -eps * g * c

    return ConformalFactor(jet, "exp", {"a": a, "m": m, "eps": eps}, radial=(eps == 0.0))


def bump_factor(a: float, center: float, width: float) -> ConformalFactor:
    """Radial smooth bump a*exp(-1/(1-s^2)), s = (r-center)/width, zero for |s| >= 1."""

    def jet(r, theta):
        r = np.asarray(r, dtype=float) + 0 * np.asarray(theta, dtype=float)
        s = (r - center) / width
        inside = np.abs(s) < 1.0
        si = np.where(inside, s, 0.0)
        q = 1.0 - si * si
        e = np.where(inside, a * np.exp(-1.0 / q), 0.0)
        # d/ds exp(-1/q) = exp(-1/q) * (-2s/q^2)
        d1s = -2.0 * si / q**2
        d2s = d1s**2 + (-2.0 / q**2 - 8.0 * si * si / q**3)
        z = np.zeros_like(r)
        return e, e * d1s / width, z, e * d2s / width**2, z, z

    return ConformalFactor(
        jet, "bump", {"a": a, "center": center, "width": width}, support_radius=center + width
    )


def custom_factor(expr: str) -> ConformalFactor:
    """Factor from a sympy expression in ``r`` and ``theta``."""
    import sympy as sp

    r, t = sp.symbols("r theta", real=True)
    e = sp.sympify(expr, locals={"r": r, "theta": t})
    parts = [e, sp.diff(e, r), sp.diff(e, t), sp.diff(e, r, 2), sp.diff(e, r, t), sp.diff(e, t, 2)]
    fns = [sp.lambdify((r, t), p, "numpy") for p in parts]

    def jet(x, th):
        x = np.asarray(x, dtype=float)
        th = np.asarray(th, dtype=float)
        shape = np.broadcast(x, th).shape
        return tuple(np.broadcast_to(np.asarray(fn(x, th), dtype=float), shape).copy() for fn in fns)

    return ConformalFactor(jet, "custom", {"expr": expr}, radial=not e.has(t))


# ---------------------------------------------------------------------------
# Frame: everything needed at one point
# ---------------------------------------------------------------------------


def eval_warping(profile: WarpingProfile, r: float):
    """Return ``(lam, dlam, ddlam)`` at ``r`` as floats."""
    if r < profile.r_min:
        raise DomainError(f"r={r} below r_min={profile.r_min}")
    lam, d1, d2 = (float(v) for v in profile.eval(r))
    if not (math.isfinite(lam) and math.isfinite(d1) and math.isfinite(d2)):
        raise DomainError(f"warping profile not finite at r={r}")
    if lam <= 0.0:
        raise NonPositiveWarping(f"lambda({r}) = {lam} <= 0")
    return lam, d1, d2


def _check_angles(x: np.ndarray):
    # all angles except the last are polar-type and must avoid the poles
    for a in x[1:-1]:
        if not 0.0 < a < math.pi:
            raise DomainError(f"polar angle {a} outside (0, pi)")


def _sphere_scales(x: np.ndarray):
    """s_k and the derivative table ds[j, k] = d s_k / d theta_j (1-based k)."""
    n = len(x) - 1
    s = np.ones(n + 1)
    ds = np.zeros((n + 1, n + 1))
    for k in range(2, n + 1):
        s[k] = s[k - 1] * math.sin(x[k - 1]) ** 2
    for k in range(1, n + 1):
        for j in range(1, k):
            ds[j, k] = 2.0 * s[k] / math.tan(x[j])
    return s, ds


def _diag_christoffel(d: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Christoffel symbols Gamma[a, b, c] of diag(d) given D[a, b] = d_a d_b."""
    m = len(d)
    G = np.zeros((m, m, m))
    for a in range(m):
        G[a, a, a] = D[a, a] / (2 * d[a])
        for b in range(m):
            if b == a:
                continue
            G[a, b, b] = -D[a, b] / (2 * d[a])
            G[b, a, b] = G[b, b, a] = D[a, b] / (2 * d[b])
    return G


class _Frame:
    """Cached pointwise data for one (profile, factor, point)."""

    def __init__(self, profile, factor, p: AmbientPoint):
        x = p.coords()
        self.x = x
        self.m = len(x)
        self.n = self.m - 1
        _check_angles(x)
        self.lam, self.dlam, self.ddlam = eval_warping(profile, x[0])
        s, ds = _sphere_scales(x)
        self.s = s
        d = self.lam**2 * s
        d[0] = 1.0
        self.gbar = d
        D = np.zeros((self.m, self.m))
        D[0, 1:] = 2 * self.lam * self.dlam * s[1:]
        D[1:, 1:] = self.lam**2 * ds[1:, 1:]
        self.Gbar = _diag_christoffel(d, D)
        self.f, self.df, self.ddf = factor.jet(x[0], tuple(x[1:]))
        self.e2f = math.exp(2 * self.f)
        self.ghat = self.e2f * d
        self.eta = np.zeros(self.m)
        self.eta[0] = self.lam
        # Hessian of f with respect to gbar
        self.hess_bar = self.ddf - np.einsum("cab,c->ab", self.Gbar, self.df)
        # Christoffel symbols of ghat
        dd = np.eye(self.m)
        self.Ghat = (
            self.Gbar
            + np.einsum("ab,c->abc", dd, self.df)
            + np.einsum("ac,b->abc", dd, self.df)
            - np.einsum("bc,a->abc", np.diag(d), self.df / d)
        )
        self.hess_hat = self.ddf - np.einsum("cab,c->ab", self.Ghat, self.df)

    # metric helpers -------------------------------------------------------

    def g(self, X, Y, metric="hat"):
        w = self.ghat if metric == "hat" else self.gbar
        return float(np.sum(w * X * Y))

    def norm(self, X, metric="hat"):
        return math.sqrt(max(self.g(X, X, metric), 0.0))

    def fiber(self, X):
        P = np.array(X, dtype=float)
        P[0] = 0.0
        return P

    def sigma(self, X, Y):
        return float(np.sum(self.s[1:] * X[1:] * Y[1:]))

    @property
    def grad_hat_f(self):
        return self.df / self.ghat

    @property
    def grad_bar_f(self):
        return self.df / self.gbar

    @property
    def grad_hat_f_sq(self):
        return float(np.sum(self.df**2 / self.ghat))

    @property
    def grad_bar_f_sq(self):
        return float(np.sum(self.df**2 / self.gbar))

    @property
    def lap_bar_f(self):
        return float(np.sum(np.diag(self.hess_bar) / self.gbar))

    @property
    def psi_hat(self):
        return self.dlam + self.lam * self.df[0]

    def cov_eta_grad_f(self):
        """nabla-hat_eta nabla-hat f as a coordinate vector."""
        return (self.hess_hat @ self.eta) / self.ghat

    def cov_eta_along(self, X):
        """nabla-hat_X eta computed straight from the Christoffel symbols."""
        out = np.einsum("abc,b,c->a", self.Ghat, X, self.eta)
        out[0] += X[0] * self.dlam
        return out

    def skew_T(self, X):
        return float(X @ self.df) * self.eta - self.g(X, self.eta) * self.grad_hat_f


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def _vec(V, m):
    if isinstance(V, TangentVector):
        return V.as_array(m)
    arr = np.asarray(V, dtype=float)
    if arr.shape != (m,):
        raise DomainError(f"vector of shape {arr.shape}, expected ({m},)")
    return arr


def frame(profile, factor, p: AmbientPoint) -> _Frame:
    return _Frame(profile, factor, p)


def psi_hat(profile, factor, p: AmbientPoint) -> float:
    """Conformal potential of eta for ghat: lambda' + eta(f)."""
    return _Frame(profile, factor, p).psi_hat


def skew_T(profile, factor, p: AmbientPoint, X) -> TangentVector:
    fr = _Frame(profile, factor, p)
    return TangentVector.from_array(fr.skew_T(_vec(X, fr.m)))


def _bar_ricci_frame(fr: _Frame, band: FiberCurvatureBand, X, Y):
    n = fr.n
    XP, YP = fr.fiber(X), fr.fiber(Y)
    base = -n * fr.ddlam / fr.lam * fr.g(X, Y, "bar") + (n - 1) * (
        fr.ddlam / fr.lam - (fr.dlam / fr.lam) ** 2
    ) * fr.g(XP, YP, "bar")
    sig = fr.sigma(XP, YP)
    vals = [base + (n - 1) * rho * sig for rho in (band.rho1, band.rho2)]
    return min(vals), max(vals)


def bar_ricci(profile, band, p: AmbientPoint, X, Y):
    """Ricci of gbar as an interval over the fiber curvature band."""
    fr = _Frame(profile, _ZERO, p)
    return _bar_ricci_frame(fr, band, _vec(X, fr.m), _vec(Y, fr.m))


def _conformal_ricci_correction(fr: _Frame, X, Y) -> float:
    n = fr.n
    Xf, Yf = float(X @ fr.df), float(Y @ fr.df)
    return (
        -(n - 1) * float(X @ fr.hess_bar @ Y)
        + (n - 1) * Xf * Yf
        - (fr.lap_bar_f + (n - 1) * fr.grad_bar_f_sq) * fr.g(X, Y, "bar")
    )


def hat_ricci_frame(fr: _Frame, band, X, Y):
    lo, hi = _bar_ricci_frame(fr, band, X, Y)
    c = _conformal_ricci_correction(fr, X, Y)
    return lo + c, hi + c


def hat_ricci(profile, factor, band, p: AmbientPoint, X, Y):
    fr = _Frame(profile, factor, p)
    return hat_ricci_frame(fr, band, _vec(X, fr.m), _vec(Y, fr.m))


def bar_scalar_frame(fr: _Frame, band):
    n = fr.n
    vals = [
        -2 * n * fr.ddlam / fr.lam + n * (n - 1) * (rho - fr.dlam**2) / fr.lam**2
        for rho in (band.rho1, band.rho2)
    ]
    return min(vals), max(vals)


def hat_scalar_frame(fr: _Frame, band):
    n = fr.n
    lo, hi = bar_scalar_frame(fr, band)
    corr = -2 * n * fr.lap_bar_f - n * (n - 1) * fr.grad_bar_f_sq
    k = math.exp(-2 * fr.f)
    return k * (lo + corr), k * (hi + corr)


def hat_scalar(profile, factor, band, p: AmbientPoint):
    return hat_scalar_frame(_Frame(profile, factor, p), band)


def g_field_frame(fr: _Frame) -> np.ndarray:
    r"""The vector field whose ghat-pairing with a unit normal is nu(psi-hat).

    .. math::

        \hat\nabla_\eta\hat\nabla f + (\lambda' + 2\eta(f))\hat\nabla f
        + e^{-2f}\lambda''\partial_r - |\hat\nabla f|^2\eta
    """
    out = fr.cov_eta_grad_f() + (fr.dlam + 2 * fr.lam * fr.df[0]) * fr.grad_hat_f
    out[0] += fr.ddlam / fr.e2f
    return out - fr.grad_hat_f_sq * fr.eta


def g_field_as_printed_frame(fr: _Frame) -> np.ndarray:
    """Same field with ``+ lambda' grad f + |grad f|^2 eta`` (differs by 2 T(grad f))."""
    out = fr.cov_eta_grad_f() + fr.dlam * fr.grad_hat_f
    out[0] += fr.ddlam / fr.e2f
    return out + fr.grad_hat_f_sq * fr.eta


def nu_psi_hat(profile, factor, p: AmbientPoint, nu, rtol: float = 1e-9) -> float:
    """Derivative of psi-hat along ``nu`` by two independent assemblies.

    The vector-field route pairs :func:`g_field_frame` with ``nu``; the
    decomposition route differentiates ``eta(f)`` in coordinates and adds
    ``e^{-2f} (lambda''/lambda) w``.
    """
    fr = _Frame(profile, factor, p)
    v = _vec(nu, fr.m)
    a = fr.g(g_field_frame(fr), v)
    # nu(eta(f)) with eta(f) = lam * f_r
    d_eta_f = v[0] * (fr.dlam * fr.df[0] + fr.lam * fr.ddf[0, 0]) + fr.lam * float(
        v[1:] @ fr.ddf[0, 1:]
    )
    w = fr.g(fr.eta, v)
    b = d_eta_f + fr.ddlam / fr.lam * w / fr.e2f
    scale = max(abs(a), abs(b), 1.0)
    if abs(a - b) > rtol * scale:
        raise InconsistencyError(f"nu(psi_hat) routes disagree: {a!r} vs {b!r}")
    return a


# ---------------------------------------------------------------------------
# Finite-difference curvature oracle (test-only)
# ---------------------------------------------------------------------------


def _hat_metric_matrix(profile, factor, x):
    lam = float(profile.eval(x[0])[0])
    theta = x[1] if len(x) > 1 else math.pi / 2
    f = float(factor.value(x[0], theta))
    g = np.empty(len(x))
    g[0] = 1.0
    sk = 1.0
    for k in range(1, len(x)):
        g[k] = lam * lam * sk
        sk *= math.sin(x[k]) ** 2
    return np.diag(math.exp(2 * f) * g)


def _fd_christoffel(profile, factor, x, h):
    m = len(x)
    g = _hat_metric_matrix(profile, factor, x)
    ginv = np.linalg.inv(g)
    dg = np.empty((m, m, m))  # dg[c, a, b] = d_c g_ab
    for c in range(m):
        e = np.zeros(m)
        e[c] = h
        dg[c] = (_hat_metric_matrix(profile, factor, x + e) - _hat_metric_matrix(profile, factor, x - e)) / (2 * h)
    # Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)
    t = np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg
    return 0.5 * np.einsum("ad,dbc->abc", ginv, t), g


def fd_ricci_tensor(profile, factor, p: AmbientPoint, h: float):
    """Brute-force Ricci tensor of ghat from nested central differences."""
    x = p.coords()
    m = len(x)
    if x[0] - 2 * h <= profile.r_min:
        raise DomainError("point too close to r_min for the requested step")
    G, g = _fd_christoffel(profile, factor, x, h)
    dG = np.empty((m, m, m, m))  # dG[e, a, b, c] = d_e Gamma^a_bc
    for e in range(m):
        de = np.zeros(m)
        de[e] = h
        Gp, _ = _fd_christoffel(profile, factor, x + de, h)
        Gm, _ = _fd_christoffel(profile, factor, x - de, h)
        dG[e] = (Gp - Gm) / (2 * h)
    ric = (
        np.einsum("aabd->bd", dG)
        - np.einsum("daba->bd", dG)
        + np.einsum("aae,ebd->bd", G, G)
        - np.einsum("ade,eba->bd", G, G)
    )
    return 0.5 * (ric + ric.T), g


def _richardson(fn, h, tol):
    coarse = fn(h)
    fine = fn(h / 2)
    scale = max(abs(fine), 1.0)
    if abs(coarse - fine) > 10 * tol * scale:
        raise StepTooLarge(f"h={h}: {coarse!r} vs {fine!r}")
    return (4 * fine - coarse) / 3


def fd_curvature_oracle(profile, factor, p: AmbientPoint, X, Y, h: float = 1e-3, tol: float = 1e-4) -> float:
    """Ricci(X, Y) of ghat via finite-difference Christoffel symbols."""
    if not 1e-6 <= h <= 1e-2:
        raise DomainError("h must lie in [1e-6, 1e-2]")
    m = p.dim + 1
    Xv, Yv = _vec(X, m), _vec(Y, m)
    return _richardson(lambda s: float(Xv @ fd_ricci_tensor(profile, factor, p, s)[0] @ Yv), h, tol)


def fd_scalar_oracle(profile, factor, p: AmbientPoint, h: float = 1e-3, tol: float = 1e-4) -> float:
    def scal(s):
        ric, g = fd_ricci_tensor(profile, factor, p, s)
        return float(np.trace(np.linalg.solve(g, ric)))

    return _richardson(scal, h, tol)


_ZERO = zero_factor()

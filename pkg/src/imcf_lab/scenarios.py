"""Catalogue of (warping, conformal factor, fiber band, initial surface) scenarios.

Every entry documents the certificate outcomes it is expected to produce;
``tests/test_scenarios.py`` re-runs the certifier and compares.

Conformal-factor parameter ranges below are the ones the certifier verified
on the default sampling plan; they are not claimed to be optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.special import eval_legendre

from . import metric_kernel as mk
from .errors import ParamOutOfRange, UnknownScenario
from .hypothesis_certifier import AsymptoticParams, ConeSpec, SamplingPlan


@dataclass(frozen=True)
class InitialSurface:
    """Radial graph F(theta) = r0 * (1 + amplitude * P_mode(cos theta))."""

    r0: float = 1.0
    amplitude: float = 0.0
    mode: int = 1

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.r0 * (1.0 + self.amplitude * eval_legendre(self.mode, np.cos(theta)))

    def derivative(self, theta):
        """dF/dtheta, from P_k'(x) = k (x P_k - P_{k-1}) / (x^2 - 1)."""
        theta = np.asarray(theta, dtype=float)
        k = self.mode
        x, s = np.cos(theta), np.sin(theta)
        if k == 0:
            return np.zeros_like(theta)
        # d/dtheta P_k(cos t) = -sin t P_k'(cos t) = k (x P_k - P_{k-1}) / sin t
        dP = k * (x * eval_legendre(k, x) - eval_legendre(k - 1, x)) / s
        return self.r0 * self.amplitude * dP


@dataclass(frozen=True)
class Scenario:
    id: str
    profile: mk.WarpingProfile
    factor: mk.ConformalFactor
    band: mk.FiberCurvatureBand
    n: int
    cone: ConeSpec
    initial: InitialSurface
    r_range: tuple = (1.0, 20.0)
    asymptotic_params: AsymptoticParams = AsymptoticParams()
    expected: dict = field(default_factory=dict)
    tags: tuple = ()
    params: dict = field(default_factory=dict)

    def default_plan(self, count: int = 40, cone_samples: int = 16, seed: int = 0) -> SamplingPlan:
        fiber = 1 if self.factor.radial else 7
        return SamplingPlan.uniform(self.r_range[0], self.r_range[1], count, cone_samples, seed, fiber)

    def initial_star_margin(self, samples: int = 2001) -> float:
        """min over Sigma_0 of w/|eta| - cos(theta1) (positive = strongly star-shaped)."""
        th = (np.arange(samples) + 0.5) * math.pi / samples
        F = self.initial(th)
        dF = self.initial.derivative(th)
        lam = self.profile.eval(F)[0]
        v = np.sqrt(1.0 + dF**2 / lam**2)
        return float(np.min(1.0 / v) - math.cos(self.cone.theta1))


def _check(cond, msg):
    if not cond:
        raise ParamOutOfRange(msg)


def _euclidean(p):
    return dict(
        profile=mk.euclidean_profile(),
        factor=mk.zero_factor(),
        expected={"lte": "PASS", "asymptotics": "FAIL", "G_cone_margin_zero": True},
    )


def _hyperbolic(p):
    return dict(
        profile=mk.hyperbolic_profile(),
        factor=mk.zero_factor(),
        expected={"lte": "PASS", "asymptotics": "PASS"},
    )


def _example1(p):
    n = p["n"]
    l, pp, q = p.get("l", 1.0), p.get("p", 0.5), p.get("q", 1.0)
    _check(0 < pp <= 1.0 / max(n - 1, 1), "example1 needs 0 < p <= 1/(n-1)")
    lim = math.sqrt(n * (n - 1))
    _check(0 < l <= lim and 0 < q <= lim, "example1 needs 0 < l, q <= sqrt(n(n-1))")
    return dict(
        profile=mk.example1_profile(l, pp, q),
        factor=mk.zero_factor(),
        expected={"lte": "PASS", "asymptotics": "FAIL"},
        tags=("R_hat>=-6",) if n == 2 else (),
        params={"l": l, "p": pp, "q": q},
    )


def _example2(p):
    return dict(
        profile=mk.sqrt_profile(p.get("scale", 2.0)),
        factor=mk.zero_factor(),
        expected={"lte": "FAIL", "asymptotics": "FAIL", "failing": ("G_cone",)},
    )


def _example3(p):
    a, m, eps = p.get("a", 0.2), p.get("m", 1.0), p.get("eps", 0.0)
    _check(a > 0 and m > 0, "example3 needs a > 0, m > 0")
    _check(abs(eps) <= 0.5, "example3 needs |eps| <= 0.5")
    return dict(
        profile=mk.euclidean_profile(),
        factor=mk.power_factor(a, m, eps),
        expected={"lte": "PASS", "asymptotics": "FAIL"},
        params={"a": a, "m": m, "eps": eps},
    )


def _example4(p):
    a, m, eps = p.get("a", -2.0), p.get("m", 4.0), p.get("eps", 0.3)
    _check(-3.0 <= a <= 0.0, "example4 needs -3 <= a <= 0")
    _check(m > 3.0, "example4 needs m > 3 so that the decay exponent exceeds 2 + beta")
    _check(abs(eps) <= 0.5, "example4 needs |eps| <= 0.5")
    return dict(
        profile=mk.hyperbolic_profile(),
        factor=mk.exp_factor(a, m, eps),
        expected={"lte": "PASS", "asymptotics": "PASS"},
        tags=("R_hat>=-6",),
        params={"a": a, "m": m, "eps": eps},
    )


def _hyperbolic_bump(p):
    a, c, w = p.get("a", -0.05), p.get("center", 3.0), p.get("width", 1.0)
    _check(abs(a) <= 0.1, "hyperbolic_bump needs |a| <= 0.1")
    return dict(
        profile=mk.hyperbolic_profile(),
        factor=mk.bump_factor(a, c, w),
        expected={"lte": "PASS", "asymptotics": "PASS"},
        params={"a": a, "center": c, "width": w},
        # f is supported where |eta| is already large, so C2 must absorb |eta|^alpha there
        asymptotic_params=AsymptoticParams(C2=1.0e6),
    )


def _constant(p):
    c = p.get("c", 0.3)
    return dict(
        profile=mk.euclidean_profile(),
        factor=mk.constant_factor(c),
        expected={"lte": "PASS", "asymptotics": "FAIL"},
        params={"c": c},
    )


_BUILDERS = {
    "euclidean": (_euclidean, {}),
    "hyperbolic_sphere": (_hyperbolic, {}),
    "hyperbolic_perturbed": (_hyperbolic, {"amplitude": 0.05}),
    "example1": (_example1, {}),
    "example1_perturbed": (_example1, {"amplitude": 0.05}),
    "example2_negative": (_example2, {}),
    "example3": (_example3, {}),
    "example4": (_example4, {}),
    "hyperbolic_bump": (_hyperbolic_bump, {}),
    "euclidean_constant_factor": (_constant, {}),
}

CATALOGUE = tuple(_BUILDERS)


def make_scenario(id: str, params: Optional[dict] = None) -> Scenario:
    """Build a catalogue scenario; ``params`` overrides the documented defaults.

    Common keys: ``n``, ``r0``, ``amplitude``, ``mode``, ``theta1``,
    ``theta2``, ``rho1``, ``rho2``, ``r_lo``, ``r_hi``.
    """
    if id not in _BUILDERS:
        raise UnknownScenario(id)
    builder, defaults = _BUILDERS[id]
    p = {"n": 2, "r0": 1.0, "amplitude": 0.0, "mode": 1, "theta1": math.pi / 6, "theta2": math.pi / 6}
    p.update(defaults)
    p.update(params or {})
    _check(int(p["n"]) >= 1, "n must be positive")
    p["n"] = int(p["n"])
    spec = builder(p)
    profile = spec["profile"]
    init = InitialSurface(float(p["r0"]), float(p["amplitude"]), int(p["mode"]))
    _check(init.r0 > profile.r_min, "r0 must exceed r_min")
    _check(p["n"] == 2 or init.amplitude == 0.0, "perturbed initial data needs n = 2")
    band = mk.FiberCurvatureBand(p.get("rho1", 1.0), p.get("rho2", 1.0))
    asym = p.get("asymptotic_params", spec.get("asymptotic_params", AsymptoticParams()))
    sc = Scenario(
        id=id,
        profile=profile,
        factor=spec["factor"],
        band=band,
        n=p["n"],
        cone=ConeSpec(p["theta1"], p["theta2"]),
        initial=init,
        r_range=(p.get("r_lo", 1.0), p.get("r_hi", 20.0)),
        asymptotic_params=asym,
        expected=spec["expected"],
        tags=spec.get("tags", ()),
        params=dict(spec.get("params", {})),
    )
    _check(sc.initial_star_margin() > 0, "initial surface is not strongly star-shaped at theta1")
    return sc


def with_initial(scenario: Scenario, **kw) -> Scenario:
    return replace(scenario, initial=replace(scenario.initial, **kw))

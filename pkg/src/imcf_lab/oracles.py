"""Randomized cross-validation of the analytic formulas against brute-force oracles.

Curvature: analytic bar/hat Ricci and hat scalar curvature against the
finite-difference Christoffel oracle. Graphs: analytic H_hat of axisymmetric
states against the divergence-of-normal oracle.

Relative errors are measured as |analytic - oracle| / max(|oracle|, 1); the
vectors are hat-unit, so curvature values are O(1) and this scale is natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import flow_engine as fe
from . import metric_kernel as mk
from .scenarios import make_scenario

ORACLE_TOL = 1e-4

# scenario id, extra params; all use the unit round fiber (band (1, 1))
CURVATURE_POOL = (
    ("hyperbolic_sphere", {}),
    ("example1", {}),
    ("example3", {"eps": 0.3}),
    ("example4", {}),
    ("hyperbolic_bump", {}),
    ("euclidean_constant_factor", {}),
)

SHAPE_POOL = ("hyperbolic_sphere", "euclidean", "example1", "example4", "example3")


@dataclass
class OracleRow:
    kind: str
    scenario_id: str
    point: tuple
    analytic: float
    oracle: float

    @property
    def rel_error(self) -> float:
        return abs(self.analytic - self.oracle) / max(abs(self.oracle), 1.0)

    def line(self) -> str:
        pt = ",".join(f"{c:.10g}" for c in self.point)
        return (f"{self.kind} {self.scenario_id} ({pt}) analytic={self.analytic:.17g} "
                f"oracle={self.oracle:.17g} rel={self.rel_error:.3e}")


def _unit(fr, rng):
    v = rng.standard_normal(fr.m)
    return v / fr.norm(v)


def curvature_samples(count: int = 100, seed: int = 0, n: int = 2) -> list:
    """``count`` rows cycling through bar Ricci, hat Ricci and hat scalar."""
    rng = np.random.default_rng(seed)
    rows = []
    kinds = ("bar_ricci", "hat_ricci", "hat_scalar")
    for k in range(count):
        sid, params = CURVATURE_POOL[int(rng.integers(len(CURVATURE_POOL)))]
        sc = make_scenario(sid, dict(params, n=n))
        r = float(rng.uniform(1.2, 5.0))
        ang = tuple(float(a) for a in rng.uniform(0.3, math.pi - 0.3, n - 1)) + (float(rng.uniform(0, 2 * math.pi)),)
        p = mk.AmbientPoint(r, ang)
        kind = kinds[k % 3]
        if kind == "bar_ricci":
            fr = mk.frame(sc.profile, mk.zero_factor(), p)
            X = _unit(fr, rng)
            a = mk.bar_ricci(sc.profile, sc.band, p, X, X)[0]
            o = mk.fd_curvature_oracle(sc.profile, mk.zero_factor(), p, X, X)
        elif kind == "hat_ricci":
            fr = mk.frame(sc.profile, sc.factor, p)
            X = _unit(fr, rng)
            a = mk.hat_ricci(sc.profile, sc.factor, sc.band, p, X, X)[0]
            o = mk.fd_curvature_oracle(sc.profile, sc.factor, p, X, X)
        else:
            a = mk.hat_scalar(sc.profile, sc.factor, sc.band, p)[0]
            o = mk.fd_scalar_oracle(sc.profile, sc.factor, p)
        rows.append(OracleRow(kind, sid, p.coords().tolist(), float(a), float(o)))
    return rows


def random_axisym_state(scenario, rng, N: int = 256) -> fe.FlowState:
    """Smooth graph r0 (1 + sum_k a_k P_k(cos theta)), k = 1..3, |a_k| <= 0.03."""
    from scipy.special import eval_legendre

    th = fe.polar_grid(N)
    r0 = float(rng.uniform(1.0, 3.0))
    F = np.ones(N)
    for k in (1, 2, 3):
        F += float(rng.uniform(-0.03, 0.03)) * eval_legendre(k, np.cos(th))
    return fe.FlowState("axisym", r0 * F, 0.0, th, 2, scenario.id)


def shape_samples(states: int = 20, seed: int = 0, nodes_per_state: int = 5, N: int = 256) -> list:
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(states):
        sid = SHAPE_POOL[int(rng.integers(len(SHAPE_POOL)))]
        sc = make_scenario(sid)
        st = random_axisym_state(sc, rng, N)
        geo = fe.graph_geometry(sc, st)
        for j in rng.integers(2, N - 2, nodes_per_state):
            o = fe.fd_shape_oracle(sc, st, int(j))
            rows.append(OracleRow("graph_H_hat", sid, (float(st.F[j]), float(st.theta[j])),
                                  float(geo.H_hat[j]), float(o)))
    return rows


def oracle_table(rows) -> str:
    worst = max((r.rel_error for r in rows), default=0.0)
    status = "PASS" if worst <= ORACLE_TOL else "FAIL"
    head = [f"# oracle rows={len(rows)} tol={ORACLE_TOL:g} worst_rel={worst:.3e} {status}"]
    return "\n".join(head + [r.line() for r in rows]) + "\n"

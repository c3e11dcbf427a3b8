"""Inverse mean curvature flow of radial graphs r = F(theta, t).

Two modes are implemented:

* ``rot_sym``: geodesic spheres r = F(t), any fiber dimension n, radial f.
* ``axisym``: n = 2 graphs depending on the polar angle only, on a half-cell
  offset grid theta_j = (j + 1/2) pi / N with zero-slope ghost cells at the
  poles. Spatial derivatives are second-order central differences.

Time stepping is explicit RK2 (midpoint).  Normal speed 1/H translates into
the graph speed dF/dt = v e^{-f} / H_hat, where v = sqrt(1 + F_theta^2 / lam^2).
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    CflViolation,
    DomainError,
    FlowHalt,
    NonMeanConvex,
    StarShapeLost,
    StepTooLarge,
)

MODES = ("rot_sym", "axisym", "full_s2")
CSV_COLUMNS = ("t", "w_min", "w_max", "eta_min", "eta_max", "H_min", "H_max", "u_max", "v_max", "k_max")


@dataclass
class FlowState:
    mode: str
    F: np.ndarray
    t: float = 0.0
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n: int = 2
    scenario_id: str = ""

    @property
    def N(self) -> int:
        return len(self.theta)

    @property
    def dtheta(self) -> float:
        return math.pi / self.N if self.N else 0.0

    def copy(self, **kw) -> "FlowState":
        kw.setdefault("F", np.array(self.F, dtype=float, copy=True))
        return replace(self, **kw)


def polar_grid(N: int) -> np.ndarray:
    return (np.arange(N) + 0.5) * math.pi / N


def initial_state(scenario, mode: str = "rot_sym", N: int = 64) -> FlowState:
    """Sample the scenario's initial surface in the requested mode."""
    if mode == "rot_sym":
        if scenario.initial.amplitude != 0.0:
            raise DomainError("rot_sym mode needs an unperturbed initial sphere")
        return FlowState("rot_sym", np.array([scenario.initial.r0]), 0.0, np.zeros(0), scenario.n, scenario.id)
    if mode == "axisym":
        if scenario.n != 2:
            raise DomainError("axisym mode is implemented for n = 2 only")
        th = polar_grid(N)
        return FlowState("axisym", np.asarray(scenario.initial(th), dtype=float), 0.0, th, 2, scenario.id)
    if mode == "full_s2":
        raise NotImplementedError("full_s2 mode is not implemented; use axisym")
    raise DomainError(f"unknown mode {mode!r}")


@dataclass
class NodeGeometry:
    """Per-node geometry of a graph; every field is an array over the nodes.

    ``nu`` holds the (r, theta) coordinate components of the hat-unit normal.
    """

    nu: np.ndarray
    H_bar: np.ndarray
    H_hat: np.ndarray
    v_bar: np.ndarray
    w: np.ndarray
    eta_norm_bar: np.ndarray
    eta_norm_hat: np.ndarray
    u: np.ndarray
    shape_eigen_max: np.ndarray
    psi_hat: np.ndarray
    speed: np.ndarray
    diffusion: np.ndarray
    f: np.ndarray


def _ghosted_derivatives(F: np.ndarray, h: float):
    G = np.concatenate(([F[0]], F, [F[-1]]))
    d1 = (G[2:] - G[:-2]) / (2.0 * h)
    d2 = (G[2:] - 2.0 * G[1:-1] + G[:-2]) / (h * h)
    return d1, d2


def _rot_sym_geometry(scenario, state: FlowState) -> NodeGeometry:
    if not scenario.factor.radial:
        raise DomainError("rot_sym mode needs a radial conformal factor")
    n = state.n
    F = np.asarray(state.F, dtype=float)
    lam, dlam, _ = scenario.profile.eval(F)
    f, fr = scenario.factor.polar_jet(F, math.pi / 2)[:2]
    f = np.broadcast_to(f, F.shape).astype(float)
    fr = np.broadcast_to(fr, F.shape).astype(float)
    psi = dlam + lam * fr
    ef = np.exp(f)
    H_bar = n * dlam / lam
    H_hat = n * psi / (ef * lam)
    w = ef * lam
    one = np.ones_like(F)
    with np.errstate(divide="ignore"):
        u = 1.0 / (H_hat * w)
    nu = np.stack([np.exp(-f), np.zeros_like(F)], axis=-1)
    return NodeGeometry(
        nu=nu, H_bar=H_bar, H_hat=H_hat, v_bar=one, w=w, eta_norm_bar=lam, eta_norm_hat=w,
        u=u, shape_eigen_max=H_hat**2 / n, psi_hat=psi, speed=lam / (n * psi),
        diffusion=np.zeros_like(F), f=f,
    )


def _axisym_geometry(scenario, state: FlowState) -> NodeGeometry:
    F = np.asarray(state.F, dtype=float)
    th = state.theta
    Fp, Fpp = _ghosted_derivatives(F, state.dtheta)
    lam, dlam, _ = scenario.profile.eval(F)
    f, fr, ft = scenario.factor.polar_jet(F, th)[:3]
    f = np.broadcast_to(f, F.shape).astype(float)
    fr = np.broadcast_to(fr, F.shape).astype(float)
    ft = np.broadcast_to(ft, F.shape).astype(float)
    cot = np.cos(th) / np.sin(th)
    lam2 = lam * lam
    v = np.sqrt(1.0 + Fp * Fp / lam2)
    H_bar = (2.0 * dlam / (lam * v) + Fp * Fp * dlam / (v**3 * lam**3)
             - cot * Fp / (lam2 * v) - Fpp / (lam2 * v**3))
    nu_f = (fr - Fp * ft / lam2) / v
    emf = np.exp(-f)
    H_hat = emf * (H_bar + 2.0 * nu_f)
    w = lam / (emf * v)
    with np.errstate(divide="ignore"):
        u = 1.0 / (H_hat * w)
    k_phi = dlam / (lam * v) - Fp * cot / (lam2 * v)
    k_theta = H_bar - k_phi
    kh = np.stack([emf * (k_phi + nu_f), emf * (k_theta + nu_f)])
    nu = np.stack([emf / v, -emf * Fp / (lam2 * v)], axis=-1)
    psi = dlam + lam * fr
    with np.errstate(divide="ignore"):
        speed = v * emf / H_hat
        diffusion = emf * emf / (H_hat**2 * lam2 * v * v)
    return NodeGeometry(
        nu=nu, H_bar=H_bar, H_hat=H_hat, v_bar=v, w=w, eta_norm_bar=lam, eta_norm_hat=lam / emf,
        u=u, shape_eigen_max=np.max(H_hat * kh, axis=0), psi_hat=psi, speed=speed,
        diffusion=diffusion, f=f,
    )


def graph_geometry(scenario, state: FlowState) -> NodeGeometry:
    """NodeGeometry at every node; raises NonMeanConvex if some H_hat <= 0."""
    if np.any(~np.isfinite(state.F)) or np.any(state.F <= scenario.profile.r_min):
        raise DomainError("graph left the domain r > r_min")
    if state.mode == "rot_sym":
        geo = _rot_sym_geometry(scenario, state)
    elif state.mode == "axisym":
        geo = _axisym_geometry(scenario, state)
    else:
        raise NotImplementedError(state.mode)
    if np.any(~(geo.H_hat > 0)):
        j = int(np.argmin(np.where(np.isfinite(geo.H_hat), geo.H_hat, -np.inf)))
        raise NonMeanConvex(f"H_hat = {geo.H_hat[j]:.6g} <= 0 at node {j}", state.t, state)
    return geo


def cfl_limit(state: FlowState, geo: NodeGeometry) -> float:
    """Largest stable explicit step, h^2 / (2 D) with D = d(speed)/d(F'')."""
    if state.mode == "rot_sym":
        return math.inf
    return float(state.dtheta**2 / (2.0 * np.max(geo.diffusion)))


def step(scenario, state: FlowState, dt: float, geo: Optional[NodeGeometry] = None) -> FlowState:
    """One RK2 midpoint step of size dt."""
    geo = geo if geo is not None else graph_geometry(scenario, state)
    lim = cfl_limit(state, geo)
    if dt > lim:
        raise CflViolation(f"dt = {dt:.6g} exceeds the stability limit {lim:.6g}", state.t, state)
    mid = state.copy(F=state.F + 0.5 * dt * geo.speed, t=state.t + 0.5 * dt)
    try:
        gmid = graph_geometry(scenario, mid)
    except FlowHalt as exc:
        exc.t = mid.t
        raise
    return state.copy(F=state.F + dt * gmid.speed, t=state.t + dt)


@dataclass
class FlowControls:
    safety: float = 0.2
    dt_max: float = 0.0025
    fixed_steps: Optional[int] = None  # uniform dt = T / fixed_steps when set
    record_every: int = 1
    checkpoint_times: tuple = ()
    checkpoint_dir: Optional[str] = None
    raise_on_halt: bool = True
    store_states: bool = False


@dataclass
class Trajectory:
    times: np.ndarray
    aggregates: dict
    scenario_id: str
    mode: str
    n: int
    tags: dict = field(default_factory=dict)
    states: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)
    halt: Optional[FlowHalt] = None
    initial: Optional[FlowState] = None
    final: Optional[FlowState] = None
    steps: int = 0

    def __getitem__(self, key):
        return self.aggregates[key]

    def to_csv(self, path) -> None:
        write_csv(self, path)


def _aggregate(geo: NodeGeometry, state: FlowState) -> dict:
    return {
        "F_min": float(np.min(state.F)), "F_max": float(np.max(state.F)),
        "w_min": float(np.min(geo.w)), "w_max": float(np.max(geo.w)),
        "eta_min": float(np.min(geo.eta_norm_bar)), "eta_max": float(np.max(geo.eta_norm_bar)),
        "H_min": float(np.min(geo.H_hat)), "H_max": float(np.max(geo.H_hat)),
        "u_max": float(np.max(geo.u)), "v_max": float(np.max(geo.v_bar)),
        "k_max": float(np.max(geo.shape_eigen_max)),
        # extras used by the monitors
        "etahat_min": float(np.min(geo.eta_norm_hat)), "etahat_max": float(np.max(geo.eta_norm_hat)),
        "psi_min": float(np.min(geo.psi_hat)), "psi_max": float(np.max(geo.psi_hat)),
        "f_min": float(np.min(geo.f)), "f_max": float(np.max(geo.f)),
        "star_min": float(np.min(geo.w / geo.eta_norm_hat)),
        "psi_over_H_min": float(np.min(geo.psi_hat / geo.H_hat)),
    }


def w_floor(scenario, geo0: NodeGeometry) -> float:
    """cos(theta1) * min over Sigma_0 of |eta|_hat."""
    return math.cos(scenario.cone.theta1) * float(np.min(geo0.eta_norm_hat))


def run(scenario, initial: FlowState, T: float, controls: Optional[FlowControls] = None,
        certificate=None) -> Trajectory:
    """Integrate from ``initial`` up to time ``T`` and record aggregates.

    ``certificate`` is an LTE CertificateReport; without one the run proceeds
    with a warning and the trajectory is tagged ``lte_certificate=absent``.
    """
    c = controls or FlowControls()
    if not T > 0:
        raise ValueError("T must be positive")
    if certificate is None:
        warnings.warn(f"no LTE certificate supplied for {scenario.id}", stacklevel=2)
        tag = "absent"
    else:
        tag = "PASS" if certificate.passed else "FAIL"
    state = initial.copy()
    geo = graph_geometry(scenario, state)
    floor = w_floor(scenario, geo)
    t0 = state.t
    times = [state.t]
    rows = {k: [v] for k, v in _aggregate(geo, state).items()}
    states = [state.copy()] if c.store_states else []
    checkpoints = []
    pending = sorted(tc for tc in c.checkpoint_times if t0 < tc <= t0 + T)
    halt = None
    steps = 0
    t_end = t0 + T
    fixed_dt = T / c.fixed_steps if c.fixed_steps else None
    while state.t < t_end - 1e-14 * max(1.0, abs(t_end)):
        if fixed_dt is not None:
            dt = fixed_dt
            if steps + 1 == c.fixed_steps:
                dt = t_end - state.t
        else:
            dt = min(c.dt_max, c.safety * cfl_limit(state, geo))
            if t_end - state.t <= dt * (1.0 + 1e-9):
                dt = t_end - state.t
        if pending:
            dt = min(dt, pending[0] - state.t)
        try:
            state = step(scenario, state, dt, geo)
            geo = graph_geometry(scenario, state)
            if np.min(geo.w) < floor:
                raise StarShapeLost(f"min w = {np.min(geo.w):.17g} fell below {floor:.17g}", state.t, state)
        except FlowHalt as exc:
            halt = exc
            if exc.t is None:
                exc.t = state.t
            break
        steps += 1
        if pending and state.t >= pending[0] - 1e-12:
            checkpoints.append(state.copy())
            if c.checkpoint_dir:
                write_checkpoint(state, os.path.join(c.checkpoint_dir, f"checkpoint_{len(checkpoints):03d}.txt"))
            pending.pop(0)
        if steps % c.record_every == 0 or state.t >= t_end - 1e-12:
            times.append(state.t)
            for k, v in _aggregate(geo, state).items():
                rows[k].append(v)
            if c.store_states:
                states.append(state.copy())
    traj = Trajectory(
        times=np.array(times), aggregates={k: np.array(v) for k, v in rows.items()},
        scenario_id=scenario.id, mode=initial.mode, n=initial.n,
        tags={"lte_certificate": tag, "w_floor": floor}, states=states, checkpoints=checkpoints,
        halt=halt, initial=initial.copy(), final=state, steps=steps,
    )
    if halt is not None:
        traj.tags["halt"] = type(halt).__name__
        if c.raise_on_halt:
            halt.state = traj
            raise halt
    return traj


# ---------------------------------------------------------------------------
# brute-force mean curvature oracle
# ---------------------------------------------------------------------------


def _interpolant(state: FlowState) -> CubicSpline:
    """Cubic spline of the grid values, evenly reflected across both poles."""
    th, F = state.theta, state.F
    k = min(8, len(th))
    x = np.concatenate((-th[:k][::-1], th, 2 * math.pi - th[::-1][:k]))
    y = np.concatenate((F[:k][::-1], F, F[::-1][:k]))
    return CubicSpline(x, y)


def fd_shape_oracle(scenario, state: FlowState, node: int, h: float = 1e-3, tol: float = 1e-4) -> float:
    """H_hat at ``node`` as div_hat of the unit normal field of the level sets of r - F(theta).

    Uses only metric values (lam and f, no derivatives of either); the
    divergence is a central difference in (r, theta), Richardson-extrapolated.
    """
    if state.mode != "axisym":
        raise DomainError("fd_shape_oracle needs an axisym state")
    if not 0 < node < state.N - 1:
        raise DomainError("fd_shape_oracle needs an interior node")
    spl = _interpolant(state)
    dspl = spl.derivative()
    prof, fac = scenario.profile, scenario.factor

    def flux(r, t):
        lam = float(prof.eval(r)[0])
        f = float(fac.value(r, t))
        Fp = float(dspl(t))
        e2 = math.exp(-2.0 * f)
        gr, gt = e2, -e2 * Fp / lam**2  # raised gradient of Phi = r - F(theta)
        norm = math.sqrt(e2 * (1.0 + Fp * Fp / lam**2))
        vol = math.exp(3.0 * f) * lam * lam * math.sin(t)
        return vol * gr / norm, vol * gt / norm, vol

    t0 = float(state.theta[node])
    r0 = float(spl(t0))

    def div(s):
        a = flux(r0 + s, t0)[0] - flux(r0 - s, t0)[0]
        b = flux(r0, t0 + s)[1] - flux(r0, t0 - s)[1]
        return (a + b) / (2.0 * s * flux(r0, t0)[2])

    coarse, fine = div(h), div(h / 2)
    if abs(coarse - fine) > 10.0 * tol * max(abs(fine), 1.0):
        raise StepTooLarge(f"oracle inconsistent at h={h}: {coarse} vs {fine}")
    return (4.0 * fine - coarse) / 3.0


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------


def write_checkpoint(state: FlowState, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"mode {state.mode}\nn {state.n}\nt {state.t:.17g}\nnodes {len(state.F)}\n")
        th = state.theta if state.N else np.zeros(len(state.F))
        for a, b in zip(th, state.F):
            fh.write(f"{a:.17g} {b:.17g}\n")


def read_checkpoint(path, scenario_id: str = "") -> FlowState:
    with open(path) as fh:
        head = {}
        for _ in range(4):
            k, v = fh.readline().split()
            head[k] = v
        data = np.loadtxt(fh, ndmin=2)
    mode = head["mode"]
    theta = data[:, 0] if mode == "axisym" else np.zeros(0)
    return FlowState(mode, data[:, 1].copy(), float(head["t"]), theta, int(head["n"]), scenario_id)


def write_csv(traj: Trajectory, path) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for i, t in enumerate(traj.times):
            vals = [t] + [traj.aggregates[k][i] for k in CSV_COLUMNS[1:]]
            fh.write(",".join(f"{x:.17g}" for x in vals) + "\n")

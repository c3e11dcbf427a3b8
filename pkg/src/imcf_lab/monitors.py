"""Quantitative bounds checked along a flow trajectory.

Each check returns a :class:`Verdict`. A check whose hypotheses were not
certified is reported ``SKIPPED(hypothesis_failed)`` and never asserted.

Envelope constants are fitted from certificate data and the t = 0 slice of
the trajectory; :class:`EnvelopeParams` records every value with its source.
Comparison ODEs are integrated on the trajectory's own time grid with the
coefficient frozen at its worse endpoint on each interval, which keeps the
integrated envelope on the safe side of the exact comparison solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import metric_kernel as mk
from .hypothesis_certifier import TailProfile, tail_profile

SLACK = 1e-6
U_SLACK = 1e-8
RESIDUAL_THRESHOLD = 1e-5


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "none"
    return f"{x:.17g}"


@dataclass
class Verdict:
    check_id: str
    status: str  # PASS, FAIL or SKIPPED(<reason>)
    margin: float = math.nan
    t_worst: float = math.nan
    certificate: str = "none"
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    observed: np.ndarray = field(default_factory=lambda: np.zeros(0))
    bound: np.ndarray = field(default_factory=lambda: np.zeros(0))
    margins: np.ndarray = field(default_factory=lambda: np.zeros(0))
    note: str = ""
    fitted: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    @property
    def skipped(self) -> bool:
        return self.status.startswith("SKIPPED")

    def line(self) -> str:
        s = f"{self.check_id}: {self.status} margin={_fmt(self.margin)} t_worst={_fmt(self.t_worst)}"
        if self.note:
            s += f" note={self.note}"
        return s

    def kv(self) -> list:
        out = [
            f"{self.check_id}.status={self.status}",
            f"{self.check_id}.margin={_fmt(self.margin)}",
            f"{self.check_id}.t_worst={_fmt(self.t_worst)}",
            f"{self.check_id}.certificate={self.certificate}",
        ]
        out += [f"{self.check_id}.fitted.{k}={_fmt(float(v))}" for k, v in sorted(self.fitted.items())]
        return out


# Backwards-friendly alias: a monitor series is a verdict with its arrays.
MonitorSeries = Verdict


@dataclass
class MonitorReport:
    scenario_id: str
    verdicts: list
    params: Optional["EnvelopeParams"] = None

    def __getitem__(self, check_id) -> Verdict:
        for v in self.verdicts:
            if v.check_id == check_id:
                return v
        raise KeyError(check_id)

    @property
    def passed(self) -> bool:
        """No asserted check failed (skipped checks do not count)."""
        return not any(v.status == "FAIL" for v in self.verdicts)

    def to_text(self) -> str:
        lines = [f"# monitors scenario={self.scenario_id}"]
        lines += [v.line() for v in self.verdicts]
        if self.params is not None:
            lines += [f"# {k} = {_fmt(float(val))} ({self.params.sources.get(k, 'derived')})"
                      for k, val in sorted(self.params.constants().items())]
        return "\n".join(lines) + "\n"

    def to_kv(self) -> str:
        lines = [f"scenario={self.scenario_id}", f"overall={'PASS' if self.passed else 'FAIL'}"]
        for v in self.verdicts:
            lines += v.kv()
        return "\n".join(lines) + "\n"


def skipped(check_id: str, certificate: str, reason: str = "hypothesis_failed", note: str = "") -> Verdict:
    return Verdict(check_id, f"SKIPPED({reason})", certificate=certificate, note=note)


def series_verdict(check_id, times, observed, bound, kind: str, certificate: str,
                   slack: float = SLACK, strict: bool = False, note: str = "", fitted=None) -> Verdict:
    """Relative margin series; ``kind`` is 'lower' (observed >= bound) or 'upper'."""
    times = np.asarray(times, float)
    observed = np.asarray(observed, float)
    bound = np.broadcast_to(np.asarray(bound, float), observed.shape)
    scale = np.maximum(np.abs(bound), 1e-300)
    diff = observed - bound if kind == "lower" else bound - observed
    margins = diff / scale
    i = int(np.argmin(margins))
    m = float(margins[i])
    ok = m > 0 if strict else m >= -slack
    return Verdict(check_id, "PASS" if ok else "FAIL", m, float(times[i]), certificate,
                   times, observed, np.array(bound), margins, note, dict(fitted or {}))


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


@dataclass
class EnvelopeParams:
    """Constants of the envelope bounds, each with a recorded source."""

    n: int
    delta1: float
    delta2: float
    theta1: float
    C: float
    alpha: float = 4.0
    beta: float = 1.0
    gamma: float = 4.0
    f_max: float = 0.0
    f_min: float = 0.0
    lte_passed: bool = False
    asym_passed: bool = False
    delta2_le_1: bool = False
    t0: dict = field(default_factory=dict)
    tail: Optional[TailProfile] = None
    C9: float = math.nan
    sources: dict = field(default_factory=dict)

    @classmethod
    def from_certificates(cls, scenario, traj, lte=None, asym=None, tail=None, delta_source="growth"):
        """Fit every constant from the certificates and the initial slice of ``traj``.

        ``delta_source='growth'`` takes the exponent bounds from the sampled
        range of lambda'/psi_hat, the rate that governs |eta|; ``'conformal'`` uses
        the range of e^f lambda'/psi_hat instead.
        """
        a = traj.aggregates
        n = traj.n
        src = {}
        fit = lte.fitted if lte is not None else {}
        if delta_source == "growth":
            d1, d2 = fit.get("growth1", 1.0), fit.get("growth2", 1.0)
            src["delta1"] = src["delta2"] = "certificate-fit: range of lambda'/psi_hat"
        elif delta_source == "conformal":
            d1, d2 = fit.get("delta1", 1.0), fit.get("delta2", 1.0)
            src["delta1"] = src["delta2"] = "certificate-fit: range of e^f lambda'/psi_hat"
        else:
            raise ValueError(f"unknown delta_source {delta_source!r}")
        ap = scenario.asymptotic_params
        t0 = {
            "H_min": a["H_min"][0], "H_max": a["H_max"][0], "w_min": a["w_min"][0], "w_max": a["w_max"][0],
            "eta_min": a["eta_min"][0], "eta_max": a["eta_max"][0], "etahat_min": a["etahat_min"][0],
            "u_max": a["u_max"][0],
        }
        src["C"] = "certificate-fit: -min Rc_hat(V,V) over the theta1 cone"
        src["C0"] = "explicit: (max H(0))^2 - n^2"
        src["C9"] = "fitted: sup_t Q(t) e^{k t/n} from the tail profile"
        for k in ("alpha", "beta", "gamma"):
            src[k] = "scenario asymptotic params"
        if tail is None and asym is not None and asym.passed:
            tail = tail_profile(scenario)
        p = cls(
            n=n, delta1=d1, delta2=d2, theta1=scenario.cone.theta1,
            C=fit.get("ricci_C_used", math.inf), alpha=ap.alpha, beta=ap.beta, gamma=ap.gamma,
            f_max=fit.get("f_max", 0.0), f_min=fit.get("f_min", 0.0),
            lte_passed=bool(lte is not None and lte.passed),
            asym_passed=bool(asym is not None and asym.passed and lte is not None and lte.passed),
            delta2_le_1=bool(lte is not None and lte.flags.get("delta2_le_1", False)),
            t0=t0, tail=tail, sources=src,
        )
        return p

    @property
    def C0(self) -> float:
        return self.t0["H_max"] ** 2 - self.n**2

    def constants(self) -> dict:
        out = {"delta1": self.delta1, "delta2": self.delta2, "C": self.C, "C0": self.C0,
               "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma}
        if not math.isnan(self.C9):
            out["C9"] = self.C9
        return out

    # envelopes ------------------------------------------------------------

    def eta_lo(self, t):
        return self.t0["eta_min"] * np.exp(self.delta1 * np.asarray(t, float) / self.n)

    def eta_hi(self, t):
        return self.t0["eta_max"] * np.exp(self.delta2 * np.asarray(t, float) / self.n)

    def w_hi(self, t):
        return math.exp(self.f_max) * self.eta_hi(t)

    def H_first_lower(self, t):
        """(min H)(min w) at t = 0 over the upper bound of w at time t."""
        return self.t0["H_min"] * self.t0["w_min"] / self.w_hi(t)

    def H_first_upper(self):
        return max(self.t0["H_max"], math.sqrt(max(self.C, 0.0) * self.n))

    def H_upper_literal(self, t, C: float = 0.0, exponent: float = 2.0, rate=None):
        """sqrt(n^2 + C e^{-rate t} + C0 e^{-exponent t}); rate defaults to alpha/n."""
        t = np.asarray(t, float)
        rate = self.alpha / self.n if rate is None else rate
        return np.sqrt(self.n**2 + C * np.exp(-rate * t) + self.C0 * np.exp(-exponent * t))

    def _tail(self, key, t):
        return self.tail.sup_beyond(key, float(self.eta_lo(t)))

    def H_asym_upper_sq(self, times):
        """Comparison solution of y' = (2/n)(n D(t) + n^2 - y), y(0) = max H(0)^2."""
        n = self.n
        y = [self.t0["H_max"] ** 2]
        for a, b in zip(times[:-1], times[1:]):
            K = n * self._tail("ricci_deficit", a)
            E = math.exp(-2.0 * (b - a) / n)
            y.append(n * n + K + (y[-1] - n * n - K) * E)
        return np.array(y)

    def u_asym_upper(self, times, Hsq):
        """Comparison solution of u' = -kappa(t) u + S(t), u(0) = max u(0)."""
        n = self.n
        u0 = self.t0["u_max"]
        u = [u0]
        for k, (a, b) in enumerate(zip(times[:-1], times[1:])):
            kappa = n * max(0.0, 1.0 - self._tail("warp_deficit", a)) / max(Hsq[k], Hsq[k + 1])
            S = n * self._tail("nu_eta_f", a) * u0**3 * float(self.w_hi(b))
            dt = b - a
            if kappa > 0:
                E = math.exp(-kappa * dt)
                u.append(S / kappa + (u[-1] - S / kappa) * E)
            else:
                u.append(u[-1] + S * dt)
        return np.array(u)

    def H_asym_lower(self, times):
        Hsq = self.H_asym_upper_sq(times)
        return 1.0 / (self.u_asym_upper(times, Hsq) * self.w_hi(times))

    def w_source(self, times, H_lo):
        """Q(t): the amount by which the support-function reaction can fall below w/n."""
        n = self.n
        out = []
        for t, h in zip(times, H_lo):
            D = self._tail("ricci_deficit", t)
            Wd = self._tail("warp_deficit", t)
            NF = self._tail("nu_eta_f", t)
            out.append(((D + n * Wd) * float(self.w_hi(t)) + n * NF) / h**2)
        return np.array(out)

    def w_lower(self, times, H_lo):
        """w(0) e^{t/n} - (n C9 / (k+1)) (e^{t/n} - e^{-k t/n}), k = alpha + gamma - 3 - 2 delta2 - beta.

        C9 is fitted as sup_t Q(t) e^{k t/n}; this is the exact solution of the
        comparison ODE w' = w/n - C9 e^{-k t/n}.
        """
        n = self.n
        times = np.asarray(times, float)
        k = self.alpha + self.gamma - 3.0 - 2.0 * self.delta2 - self.beta
        Q = self.w_source(times, H_lo)
        Q = np.maximum(Q, np.concatenate((Q[1:], Q[-1:])))
        self.C9 = float(np.max(Q * np.exp(k * times / n)))
        w0 = self.t0["w_min"]
        if self.C9 == 0.0:
            return w0 * np.exp(times / n), k
        return w0 * np.exp(times / n) - n * self.C9 / (k + 1.0) * (np.exp(times / n) - np.exp(-k * times / n)), k


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def check_w_floor(traj, theta1: float) -> Verdict:
    """min w(t) > cos(theta1) * min over Sigma_0 of |eta|_hat."""
    a = traj.aggregates
    floor = math.cos(theta1) * a["etahat_min"][0]
    return series_verdict("w_floor", traj.times, a["w_min"], floor, "lower", "initial-star-shape",
                          strict=True, fitted={"floor": floor})


def check_u_max(traj, params: EnvelopeParams) -> Verdict:
    """max u(t) <= max u(0) + 1e-8 and never increases faster than 1e-8 per unit time."""
    if not params.lte_passed:
        return skipped("u_max", "lte")
    t = traj.times
    u = traj.aggregates["u_max"]
    level = (u[0] + U_SLACK - u) / u[0]
    inc = np.concatenate(([math.inf], (U_SLACK * np.diff(t) - np.diff(u)) / u[0]))
    margins = np.minimum(level, inc)
    i = int(np.argmin(margins))
    m = float(margins[i])
    return Verdict("u_max", "PASS" if m >= 0 else "FAIL", m, float(t[i]), "lte", t, u,
                   np.full_like(u, u[0]), margins, fitted={"u0": u[0]})


def check_eta_growth(traj, params: EnvelopeParams) -> Verdict:
    """min|eta|(0) e^{delta1 t/n} <= |eta| <= max|eta|(0) e^{delta2 t/n}."""
    if not params.lte_passed:
        return skipped("eta_growth", "lte")
    t = traj.times
    a = traj.aggregates
    lo = series_verdict("eta_growth", t, a["eta_min"], params.eta_lo(t), "lower", "lte")
    hi = series_verdict("eta_growth", t, a["eta_max"], params.eta_hi(t), "upper", "lte")
    worst = lo if lo.margin <= hi.margin else hi
    worst.status = "PASS" if lo.passed and hi.passed else "FAIL"
    worst.fitted = {"delta1": params.delta1, "delta2": params.delta2,
                    "lower_margin": lo.margin, "upper_margin": hi.margin}
    return worst


def check_H_envelopes(traj, params: EnvelopeParams) -> list:
    """Four verdicts: first lower/upper bounds (LTE) and asymptotic upper/lower (asymptotics)."""
    t = traj.times
    a = traj.aggregates
    out = []
    if params.lte_passed:
        out.append(series_verdict("H_first_lower", t, a["H_min"], params.H_first_lower(t), "lower", "lte",
                                  fitted={"f_max": params.f_max, "delta2": params.delta2}))
        out.append(series_verdict("H_first_upper", t, a["H_max"], params.H_first_upper(), "upper", "lte",
                                  fitted={"C": params.C}))
    else:
        out += [skipped("H_first_lower", "lte"), skipped("H_first_upper", "lte")]
    if params.asym_passed and params.tail is not None:
        Hsq = params.H_asym_upper_sq(t)
        cover = params.tail.covers(float(params.eta_hi(t[-1])))
        note = "" if cover else "trajectory_beyond_certified_radius"
        out.append(series_verdict("H_asym_upper", t, a["H_max"], np.sqrt(Hsq), "upper", "asymptotics",
                                  note=note, fitted={"C0": params.C0}))
        out.append(series_verdict("H_asym_lower", t, a["H_min"], params.H_asym_lower(t), "lower",
                                  "asymptotics", note=note))
    else:
        out += [skipped("H_asym_upper", "asymptotics"), skipped("H_asym_lower", "asymptotics")]
    return out


def _best_H_lower(traj, params):
    t = traj.times
    lo = params.H_first_lower(t)
    if params.asym_passed and params.tail is not None:
        lo = np.maximum(lo, params.H_asym_lower(t))
    return lo


def check_w_lower_envelope(traj, params: EnvelopeParams) -> Verdict:
    if not (params.asym_passed and params.delta2_le_1 and params.tail is not None):
        return skipped("w_lower_envelope", "asymptotics")
    t = traj.times
    env, k = params.w_lower(t, _best_H_lower(traj, params))
    return series_verdict("w_lower_envelope", t, traj.aggregates["w_min"], env, "lower", "asymptotics",
                          fitted={"C9": params.C9, "k": k})


def check_gradient_bound(traj, params: EnvelopeParams, allow_lte_only: bool = False) -> Verdict:
    """max v_bar(t) <= e^{f_max} max|eta|(t) / (lower bound of w at t).

    With asymptotic hypotheses the w lower bound is the support-function
    envelope and the ratio stays bounded. ``allow_lte_only`` substitutes the
    star-shape floor cos(theta1) min|eta|_hat(0), valid on the run's horizon.
    """
    t = traj.times
    if params.asym_passed and params.delta2_le_1 and params.tail is not None:
        w_lo, _ = params.w_lower(t, _best_H_lower(traj, params))
        cert, note = "asymptotics", ""
    elif allow_lte_only and params.lte_passed:
        w_lo = np.full_like(t, math.cos(params.theta1) * params.t0["etahat_min"])
        cert, note = "lte", "lte_only_variant"
    else:
        return skipped("gradient_bound", "asymptotics")
    if np.any(w_lo <= 0):
        return Verdict("gradient_bound", "FAIL", -math.inf, float(t[int(np.argmin(w_lo))]), cert,
                       note="w_lower_bound_nonpositive")
    ratio = math.exp(params.f_max) * params.eta_hi(t) / w_lo
    C_fit = float(np.max(ratio))
    v = series_verdict("gradient_bound", t, traj.aggregates["v_max"], C_fit, "upper", cert, note=note,
                       fitted={"C_fit": C_fit})
    return v


def check_w_evolution_residual(traj, scenario=None, threshold: float = RESIDUAL_THRESHOLD) -> Verdict:
    """rot_sym only: integrated |dw/dt - psi_hat/H|, plus the right-hand-side assembly check."""
    if traj.mode != "rot_sym":
        return skipped("w_evolution_residual", "none", reason="not_rot_sym")
    t = traj.times
    a = traj.aggregates
    w = a["w_min"]
    dwdt = np.gradient(w, t, edge_order=2)
    target = a["psi_over_H_min"]
    res = np.abs(dwdt - target)
    l1 = float(np.sum(0.5 * (res[1:] + res[:-1]) * np.diff(t)))
    fitted = {"residual_l1": l1, "residual_max": float(np.max(res))}
    assembly = 0.0
    if scenario is not None:
        n = traj.n
        for F, H, psi_H in zip(a["F_max"], a["H_max"], target):
            p = mk.AmbientPoint(float(F), (math.pi / 2,) * n)
            fr = mk.frame(scenario.profile, scenario.factor, p)
            nu = np.zeros(fr.m)
            nu[0] = 1.0 / math.sqrt(fr.ghat[0])
            wv = fr.g(fr.eta, nu)
            rc = mk.hat_ricci_frame(fr, scenario.band, nu, nu)[0]
            nps = mk.nu_psi_hat(scenario.profile, scenario.factor, p, nu)
            rhs = (H * H / n * wv + rc * wv + n * nps) / (H * H)
            assembly = max(assembly, abs(rhs - psi_H) / max(abs(psi_H), 1.0))
        fitted["assembly_max"] = assembly
    margin = threshold - max(l1, assembly)
    i = int(np.argmax(res))
    return Verdict("w_evolution_residual", "PASS" if margin >= 0 else "FAIL", margin, float(t[i]), "none",
                   t, dwdt, target, threshold - res, fitted=fitted)


def run_monitors(traj, params: EnvelopeParams, scenario=None, allow_lte_only: bool = False) -> MonitorReport:
    verdicts = [
        check_w_floor(traj, params.theta1),
        check_u_max(traj, params),
        check_eta_growth(traj, params),
        *check_H_envelopes(traj, params),
        check_gradient_bound(traj, params, allow_lte_only),
        check_w_evolution_residual(traj, scenario),
        check_w_lower_envelope(traj, params),
    ]
    return MonitorReport(traj.scenario_id, verdicts, params)

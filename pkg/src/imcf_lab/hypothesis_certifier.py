"""Sampled certification of the long-time-existence and asymptotic hypotheses.

Certification is a falsification search: every condition is evaluated on a
deterministic sample of ambient points and cone vectors and the worst margin
is reported together with the point (and vector) where it occurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import metric_kernel as mk
from .errors import DegeneratePotential, ValidationError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# relative slack under which a cone margin still counts as non-negative
CONE_SLACK = 1e-12


@dataclass(frozen=True)
class ConeSpec:
    theta1: float
    theta2: float

    def __post_init__(self):
        for name in ("theta1", "theta2"):
            v = getattr(self, name)
            if not 0.0 <= v < math.pi / 2:
                raise ValidationError(name, "must lie in [0, pi/2)")

    @property
    def angle_sum(self) -> float:
        return self.theta1 + self.theta2

    @property
    def sum_ok(self) -> bool:
        return self.angle_sum <= math.pi / 2 + 1e-15

    @property
    def sum_on_boundary(self) -> bool:
        return abs(self.angle_sum - math.pi / 2) <= 1e-12


@dataclass(frozen=True)
class SamplingPlan:
    r_grid: tuple
    cone_samples: int = 16
    seed: int = 0
    fiber_points: int = 1

    def __post_init__(self):
        object.__setattr__(self, "r_grid", tuple(float(r) for r in self.r_grid))
        if len(self.r_grid) < 1 or any(b <= a for a, b in zip(self.r_grid, self.r_grid[1:])):
            raise ValidationError("r_grid", "must be strictly increasing")
        if self.cone_samples < 8:
            raise ValidationError("cone_samples", "must be at least 8")
        if self.fiber_points < 1:
            raise ValidationError("fiber_points", "must be positive")

    @classmethod
    def uniform(cls, r_lo, r_hi, count=40, cone_samples=16, seed=0, fiber_points=1):
        return cls(tuple(np.linspace(r_lo, r_hi, count)), cone_samples, seed, fiber_points)

    def doubled(self) -> "SamplingPlan":
        r = np.asarray(self.r_grid)
        mids = 0.5 * (r[1:] + r[:-1])
        grid = np.sort(np.concatenate([r, mids]))
        fp = 1 if self.fiber_points == 1 else 2 * self.fiber_points
        return replace(self, r_grid=tuple(grid), cone_samples=2 * self.cone_samples, fiber_points=fp)

    def describe(self) -> str:
        return (
            f"r=[{self.r_grid[0]:g},{self.r_grid[-1]:g}]x{len(self.r_grid)} "
            f"cone={self.cone_samples} fiber={self.fiber_points} seed={self.seed}"
        )


@dataclass(frozen=True)
class AsymptoticParams:
    alpha: float = 4.0
    beta: float = 1.0
    gamma: float = 4.0
    C1: float = 10.0
    C2: float = 10.0
    C3: float = 10.0
    C4: float = 10.0

    @property
    def flags(self) -> dict:
        return {
            "alpha_gt_2_plus_beta": self.alpha > 2 + self.beta,
            "gamma_gt_3": self.gamma > 3,
            "beta_gt_0": self.beta > 0,
        }


@dataclass
class ConditionRecord:
    condition_id: str
    margin: float
    passed: bool
    witness: Optional[tuple] = None
    fitted: Optional[float] = None
    note: str = ""

    def line(self) -> str:
        wit = "none" if self.witness is None else "(" + ",".join(f"{w:.10g}" for w in self.witness) + ")"
        verdict = "PASS" if self.passed else "FAIL"
        extra = "" if self.fitted is None else f" fitted={self.fitted:.17g}"
        return f"{self.condition_id}: margin={self.margin:.17g} witness={wit}{extra} {verdict}"


@dataclass
class CertificateReport:
    kind: str
    scenario_id: str
    records: list
    plan: SamplingPlan
    flags: dict = field(default_factory=dict)
    fitted: dict = field(default_factory=dict)
    timestamp: str = "none"

    @property
    def passed(self) -> bool:
        return all(rec.passed for rec in self.records)

    def __getitem__(self, cid) -> ConditionRecord:
        for rec in self.records:
            if rec.condition_id == cid:
                return rec
        raise KeyError(cid)

    def __contains__(self, cid):
        return any(rec.condition_id == cid for rec in self.records)

    def condition_passed(self, *cids) -> bool:
        return all(self[c].passed for c in cids)

    def to_text(self) -> str:
        lines = [
            f"# certificate={self.kind} scenario={self.scenario_id}",
            f"# plan {self.plan.describe()}",
            f"# timestamp={self.timestamp}",
        ]
        lines += [rec.line() for rec in self.records]
        for k in sorted(self.flags):
            lines.append(f"# flag {k}={self.flags[k]}")
        for k in sorted(self.fitted):
            lines.append(f"# fitted {k}={self.fitted[k]:.17g}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_kv(self) -> str:
        out = [
            f"certificate = {self.kind}",
            f"scenario = {self.scenario_id}",
            f"plan.r_lo = {self.plan.r_grid[0]!r}",
            f"plan.r_hi = {self.plan.r_grid[-1]!r}",
            f"plan.r_points = {len(self.plan.r_grid)}",
            f"plan.cone_samples = {self.plan.cone_samples}",
            f"plan.fiber_points = {self.plan.fiber_points}",
            f"plan.seed = {self.plan.seed}",
            f"timestamp = {self.timestamp}",
        ]
        for rec in self.records:
            p = f"condition.{rec.condition_id}"
            out.append(f"{p}.margin = {rec.margin!r}")
            out.append(f"{p}.pass = {int(rec.passed)}")
            if rec.witness is not None:
                out.append(f"{p}.witness = " + " ".join(repr(float(w)) for w in rec.witness))
            if rec.fitted is not None:
                out.append(f"{p}.fitted = {rec.fitted!r}")
        for k in sorted(self.flags):
            out.append(f"flag.{k} = {int(bool(self.flags[k]))}")
        for k in sorted(self.fitted):
            out.append(f"fitted.{k} = {self.fitted[k]!r}")
        out.append(f"overall = {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def fiber_sample_angles(n: int, count: int, seed: int = 0) -> list:
    """Polar angles of a Fibonacci-type sweep, kept off the poles."""
    if count == 1:
        return [tuple([math.pi / 2] * n)]
    pts = []
    shift = (seed * GOLDEN) % 1.0
    for j in range(count):
        polar = math.acos(1.0 - 2.0 * (j + 0.5) / count)
        azim = 2 * math.pi * ((j * GOLDEN + shift) % 1.0)
        ang = [polar] + [math.pi / 2] * (n - 2) + ([azim] if n >= 2 else [])
        pts.append(tuple(ang[:n]))
    return pts


def _fiber_orthonormal(fr) -> list:
    """ghat-orthonormal basis of the fiber directions at a frame."""
    basis = []
    for k in range(1, fr.m):
        e = np.zeros(fr.m)
        e[k] = 1.0 / math.sqrt(fr.ghat[k])
        basis.append(e)
    return basis


def cone_vectors(fr, theta1: float, count: int, seed: int = 0) -> list:
    """Deterministic ghat-unit vectors V with angle(V, eta) <= theta1.

    Half of the samples sit on the cone boundary, the rest fill the cap with
    area-uniform opening angles; the axis itself is always included.
    """
    e0 = np.zeros(fr.m)
    e0[0] = 1.0 / math.sqrt(fr.ghat[0])
    basis = _fiber_orthonormal(fr)
    n = len(basis)
    out = [e0]
    rng = np.random.default_rng(seed)
    shift = (seed * GOLDEN) % 1.0
    for k in range(count - 1):
        if k % 2 == 0:
            a = theta1
        else:
            a = theta1 * math.sqrt((k + 0.5) / count)
        if n == 1:
            u = basis[0] * (1.0 if (k // 2) % 2 == 0 else -1.0)
        elif n == 2:
            phi = 2 * math.pi * ((k * GOLDEN + shift) % 1.0)
            u = math.cos(phi) * basis[0] + math.sin(phi) * basis[1]
        else:
            c = rng.standard_normal(n)
            c /= np.linalg.norm(c)
            u = sum(ci * b for ci, b in zip(c, basis))
        out.append(math.cos(a) * e0 + math.sin(a) * u)
    return out


def sample_points(scenario, plan: SamplingPlan) -> list:
    angles = fiber_sample_angles(scenario.n, plan.fiber_points, plan.seed)
    return [mk.AmbientPoint(r, ang) for r in plan.r_grid for ang in angles]


# ---------------------------------------------------------------------------
# Hypothesis vector fields
# ---------------------------------------------------------------------------


def _frame(scenario, p):
    return mk.frame(scenario.profile, scenario.factor, p)


def cone_margin_frame(fr, vec, theta2: float) -> float:
    return fr.g(vec, fr.eta) - math.cos(theta2) * fr.norm(vec) * fr.norm(fr.eta)


def cone_margin(vec, p, theta2: float, scenario) -> float:
    """ghat(vec, eta) - cos(theta2) |vec| |eta|; zero vector gives 0."""
    fr = _frame(scenario, p)
    v = vec.as_array(fr.m) if isinstance(vec, mk.TangentVector) else np.asarray(vec, float)
    return cone_margin_frame(fr, v, theta2)


def _cone_ok(fr, vec, margin) -> bool:
    return margin >= -CONE_SLACK * fr.norm(vec) * fr.norm(fr.eta)


def eval_G(scenario, p) -> mk.TangentVector:
    return mk.TangentVector.from_array(mk.g_field_frame(_frame(scenario, p)))


def _J_candidates(fr, band, V):
    G = mk.g_field_frame(fr)
    lo, hi = mk.hat_ricci_frame(fr, band, V, V)
    return [G + (1.0 + rc) / fr.n * fr.eta for rc in (lo, hi)]


def _J_worst(fr, band, V, theta2):
    cands = _J_candidates(fr, band, V)
    margins = [cone_margin_frame(fr, J, theta2) for J in cands]
    i = int(np.argmin(margins))
    return cands[i], margins[i]


def eval_J(scenario, p, V, theta2: Optional[float] = None) -> mk.TangentVector:
    """The J field at ``p`` for the cone vector ``V``.

    The Ricci term uses the band endpoint that minimises the cone margin at
    angle ``theta2`` (the scenario's default when omitted).
    """
    fr = _frame(scenario, p)
    v = V.as_array(fr.m) if isinstance(V, mk.TangentVector) else np.asarray(V, float)
    t2 = scenario.cone.theta2 if theta2 is None else theta2
    J, _ = _J_worst(fr, scenario.band, v, t2)
    return mk.TangentVector.from_array(J)


def delta_ratio_frame(fr) -> float:
    if fr.psi_hat == 0.0:
        raise DegeneratePotential(f"psi_hat vanishes at r={fr.x[0]}")
    return math.exp(fr.f) * fr.dlam / fr.psi_hat


def delta_ratio(scenario, p) -> float:
    """e^f lambda' / (lambda' + eta(f))."""
    return delta_ratio_frame(_frame(scenario, p))


def growth_ratio_frame(fr) -> float:
    """lambda' / (lambda' + eta(f)): the rate that actually drives |eta| growth."""
    if fr.psi_hat == 0.0:
        raise DegeneratePotential(f"psi_hat vanishes at r={fr.x[0]}")
    return fr.dlam / fr.psi_hat


def growth_ratio(scenario, p) -> float:
    return growth_ratio_frame(_frame(scenario, p))


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


class _Worst:
    """Running minimum of a margin together with its witness."""

    def __init__(self):
        self.margin = math.inf
        self.witness = None
        self.ok = True

    def add(self, margin, witness, ok=None):
        if ok is None:
            ok = margin >= 0
        self.ok = self.ok and ok
        if margin < self.margin:
            self.margin = margin
            self.witness = witness


def _witness(fr, V=None):
    w = tuple(float(c) for c in fr.x)
    return w if V is None else w + tuple(float(c) for c in V)


def _lte_scan(scenario, cone: ConeSpec, plan: SamplingPlan):
    band = scenario.band
    n = scenario.n
    acc = {k: _Worst() for k in ("lambda_prime", "J_cone", "G_cone", "ricci")}
    deltas, growth, deficits, fvals = [], [], [], []
    degenerate = None
    for p in sample_points(scenario, plan):
        fr = _frame(scenario, p)
        fvals.append(fr.f)
        acc["lambda_prime"].add(fr.dlam, _witness(fr))
        G = mk.g_field_frame(fr)
        mG = cone_margin_frame(fr, G, cone.theta2)
        acc["G_cone"].add(mG, _witness(fr), _cone_ok(fr, G, mG))
        try:
            deltas.append((delta_ratio_frame(fr), _witness(fr)))
            growth.append(growth_ratio_frame(fr))
        except DegeneratePotential:
            degenerate = _witness(fr)
        for V in cone_vectors(fr, cone.theta1, plan.cone_samples, plan.seed):
            J, mJ = _J_worst(fr, band, V, cone.theta2)
            acc["J_cone"].add(mJ, _witness(fr, V), _cone_ok(fr, J, mJ))
            lo, _ = mk.hat_ricci_frame(fr, band, V, V)
            acc["ricci"].add(lo, _witness(fr, V))
            # reaction term of the support-function evolution beyond w/n
            deficits.append(lo * fr.g(fr.eta, V) + n * fr.g(G, V))
    return acc, deltas, growth, deficits, fvals, degenerate


def certify_lte(
    scenario,
    cone: Optional[ConeSpec] = None,
    plan: Optional[SamplingPlan] = None,
    delta_bounds: Optional[tuple] = None,
    ricci_C: Optional[float] = None,
    refine_check: bool = True,
) -> CertificateReport:
    """Certify the long-time-existence hypotheses on a sample.

    ``delta_bounds`` and ``ricci_C`` are the user's constants; when omitted the
    tightest values over the sample are fitted and the condition passes when
    the fitted value is admissible (positive and finite, resp. finite).
    """
    cone = cone or scenario.cone
    plan = plan or scenario.default_plan()
    acc, deltas, growth, deficits, fvals, degenerate = _lte_scan(scenario, cone, plan)
    records = [
        ConditionRecord("lambda_prime", acc["lambda_prime"].margin, acc["lambda_prime"].ok,
                        acc["lambda_prime"].witness),
        ConditionRecord("J_cone", acc["J_cone"].margin, acc["J_cone"].ok, acc["J_cone"].witness),
        ConditionRecord("G_cone", acc["G_cone"].margin, acc["G_cone"].ok, acc["G_cone"].witness),
    ]
    fitted = {}
    if degenerate is not None or not deltas:
        records.append(ConditionRecord("delta_ratio", -math.inf, False, degenerate,
                                       note="psi_hat vanishes"))
    else:
        vals = np.array([d for d, _ in deltas])
        d1, d2 = float(vals.min()), float(vals.max())
        fitted["delta1"], fitted["delta2"] = d1, d2
        fitted["growth1"], fitted["growth2"] = float(min(growth)), float(max(growth))
        lo_b, hi_b = delta_bounds if delta_bounds is not None else (d1, d2)
        margins = np.minimum(vals - lo_b, hi_b - vals)
        i = int(np.argmin(margins))
        ok = lo_b > 0 and math.isfinite(hi_b) and float(margins[i]) >= 0
        margin = float(margins[i])
        if delta_bounds is None:
            # fitted bounds enclose the sample by construction; what can fail is delta1 > 0
            i = int(np.argmin(vals))
            margin = d1
        records.append(ConditionRecord("delta_ratio", margin, ok, deltas[i][1], fitted=d2))
    rc_min = acc["ricci"].margin
    fitted["ricci_C"] = -rc_min
    C = ricci_C if ricci_C is not None else max(-rc_min, 0.0)
    records.append(ConditionRecord("ricci_lower", rc_min + C, rc_min + C >= 0 and math.isfinite(C),
                                   acc["ricci"].witness, fitted=-rc_min))
    records.append(ConditionRecord("angle_sum", math.pi / 2 - cone.angle_sum, cone.sum_ok, None,
                                   fitted=cone.angle_sum))
    fitted["ricci_C_used"] = C
    fitted["support_deficit"] = max(0.0, -min(deficits)) if deficits else 0.0
    fitted["f_max"] = max(fvals)
    fitted["f_min"] = min(fvals)
    flags = {
        "delta2_le_1": fitted.get("delta2", math.inf) <= 1.0 + 1e-12,
        "angle_sum_boundary": cone.sum_on_boundary,
        "angle_sum_strict": cone.angle_sum < math.pi / 2 - 1e-12,
    }
    report = CertificateReport("lte", scenario.id, records, plan, flags, fitted)
    if refine_check:
        fine = certify_lte(scenario, cone, plan.doubled(), delta_bounds, ricci_C, refine_check=False)
        stable = True
        for rec in report.records:
            a, b = rec.margin, fine[rec.condition_id].margin
            if math.isfinite(a) and math.isfinite(b) and abs(a - b) > 0.01 * max(abs(a), abs(b), 1e-300):
                stable = False
        report.flags["refinement_stable"] = stable
    return report


def f_c2_norm_frame(fr) -> float:
    """max(|f|, |grad f|, |Hess f|) measured in gbar."""
    grad = math.sqrt(fr.grad_bar_f_sq)
    H = fr.hess_bar
    hess = math.sqrt(float(np.sum(H * H / np.outer(fr.gbar, fr.gbar))))
    return max(abs(fr.f), grad, hess)


def _curvature_defect(fr, rho) -> float:
    """|lam lam'' + rho - lam'^2|, with cancellation noise below the rounding floor set to 0.

    For lam = sinh the terms are O(e^{2r}) and cancel exactly, so the raw
    difference is pure rounding error that the |eta|^alpha weight would amplify.
    """
    a, b = fr.lam * fr.ddlam, fr.dlam**2
    d = abs(a + rho - b)
    floor = 64.0 * np.finfo(float).eps * max(abs(a), b, abs(rho))
    return 0.0 if d <= floor else d


def certify_asymptotics(scenario, params: Optional[AsymptoticParams] = None,
                        plan: Optional[SamplingPlan] = None) -> CertificateReport:
    """Check the five decay conditions on the plan's radii and fit constants."""
    params = params or scenario.asymptotic_params
    plan = plan or scenario.default_plan()
    band = scenario.band
    a, b, g = params.alpha, params.beta, params.gamma
    fits = {k: _Worst() for k in ("C1", "C2", "C3", "C4")}
    angles = fiber_sample_angles(scenario.n, plan.fiber_points, plan.seed)
    for r in plan.r_grid:
        for ang in angles:
            fr = _frame(scenario, mk.AmbientPoint(r, ang))
            eta = fr.lam  # |eta| in gbar
            wit = _witness(fr)
            # constants are fitted as maxima; _Worst tracks minima, so negate
            fits["C1"].add(-fr.dlam / eta**b, wit)
            fits["C2"].add(-f_c2_norm_frame(fr) * eta**a, wit)
            fits["C3"].add(-max(0.0, 1.0 - fr.ddlam / fr.lam) * eta**g, wit)
            worst4 = max(_curvature_defect(fr, rho) for rho in (band.rho1, band.rho2))
            fits["C4"].add(-worst4 / fr.lam**2 * eta**a, wit)
    supplied = {"C1": params.C1, "C2": params.C2, "C3": params.C3, "C4": params.C4}
    names = {"C1": "lambda_prime_growth", "C2": "f_decay", "C3": "lambda_ratio", "C4": "curvature_decay"}
    records = [ConditionRecord("parameter_flags", 0.0, all(params.flags.values()), None,
                               note=",".join(k for k, v in params.flags.items() if not v))]
    fitted = {}
    for key in ("C1", "C2", "C3", "C4"):
        fit = -fits[key].margin
        fitted[key] = fit
        records.append(ConditionRecord(names[key], supplied[key] - fit, fit <= supplied[key],
                                       fits[key].witness, fitted=fit))
    records.insert(4, ConditionRecord("fiber_band", band.rho2 - band.rho1, band.rho1 <= band.rho2))
    flags = dict(params.flags)
    return CertificateReport("asymptotics", scenario.id, records, plan, flags, fitted)


def scalar_lower_bound(scenario, plan: Optional[SamplingPlan] = None):
    """Smallest sampled lower end of the hat scalar curvature interval, with its witness."""
    plan = plan or scenario.default_plan()
    worst = _Worst()
    for r in plan.r_grid:
        for ang in fiber_sample_angles(scenario.n, plan.fiber_points, plan.seed):
            fr = _frame(scenario, mk.AmbientPoint(r, ang))
            worst.add(mk.hat_scalar_frame(fr, scenario.band)[0], _witness(fr))
    return worst.margin, worst.witness


@dataclass
class TailProfile:
    """Per-radius worst values of the quantities the envelope monitors need.

    Rows follow ``r``; every column is a maximum over fiber samples and
    hat-unit normals inside the theta1 cone at that radius.
    """

    r: np.ndarray
    lam: np.ndarray
    columns: dict

    def sup_beyond(self, key: str, eta_lo: float) -> float:
        """max of column ``key`` over radii whose |eta| can reach ``eta_lo`` or more.

        The grid point just below ``eta_lo`` is included so the sup covers
        the gap between samples; beyond the last radius the last row is used.
        """
        i = int(np.searchsorted(self.lam, eta_lo, side="right")) - 1
        i = min(max(i, 0), len(self.r) - 1)
        return float(np.max(self.columns[key][i:]))

    def covers(self, eta: float) -> bool:
        return eta <= float(self.lam[-1])


def tail_profile(scenario, plan: Optional[SamplingPlan] = None) -> TailProfile:
    """Sample the coefficients entering the support-function and H comparisons.

    Columns: ``ricci_deficit`` = max(0, -(Rc_hat(nu,nu) + n)) at the worst band
    endpoint, ``ricci_excess`` = max(0, Rc_hat(nu,nu) + n), ``warp_deficit`` =
    max(0, 1 - e^{-2f} lam''/lam), ``nu_eta_f`` = |nu(eta(f))| / (1 + lam'),
    ``f_max``, ``f_min``, ``lam_prime``.
    """
    plan = plan or scenario.default_plan()
    n = scenario.n
    angles = fiber_sample_angles(n, plan.fiber_points, plan.seed)
    keys = ("ricci_deficit", "ricci_excess", "warp_deficit", "nu_eta_f", "f_max", "f_min", "lam_prime")
    cols = {k: [] for k in keys}
    lams = []
    for r in plan.r_grid:
        row = {k: -math.inf for k in keys}
        row["f_min"] = math.inf
        for ang in angles:
            fr = _frame(scenario, mk.AmbientPoint(r, ang))
            row["f_max"] = max(row["f_max"], fr.f)
            row["f_min"] = min(row["f_min"], fr.f)
            row["lam_prime"] = max(row["lam_prime"], fr.dlam)
            row["warp_deficit"] = max(row["warp_deficit"], 1.0 - fr.ddlam / (fr.lam * fr.e2f), 0.0)
            for V in cone_vectors(fr, scenario.cone.theta1, plan.cone_samples, plan.seed):
                lo, hi = mk.hat_ricci_frame(fr, scenario.band, V, V)
                row["ricci_deficit"] = max(row["ricci_deficit"], -(lo + n), 0.0)
                row["ricci_excess"] = max(row["ricci_excess"], hi + n, 0.0)
                d_eta_f = V[0] * (fr.dlam * fr.df[0] + fr.lam * fr.ddf[0, 0]) + fr.lam * float(V[1:] @ fr.ddf[0, 1:])
                row["nu_eta_f"] = max(row["nu_eta_f"], abs(d_eta_f) / (1.0 + fr.dlam))
        for k in keys:
            cols[k].append(row[k])
        lams.append(float(scenario.profile.eval(r)[0]))
    return TailProfile(np.asarray(plan.r_grid, float), np.array(lams), {k: np.array(v) for k, v in cols.items()})

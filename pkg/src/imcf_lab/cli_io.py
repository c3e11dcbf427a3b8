"""Configuration parsing, file output and the ``imcf-lab`` command line.

Config files are ``key = value`` lines with ``#`` comments. Unknown keys are
errors. Scenario parameters go under ``param.<name>`` and are passed to
:func:`make_scenario`; alternatively ``scenario`` may point to a scenario
file (see :func:`parse_scenario_file`).

Exit statuses: 0 when every asserted check passes, 1 when one fails, 2 on a
usage or configuration error.
"""

from __future__ import annotations

import argparse
import glob
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from typing import Optional

from . import flow_engine as fe
from . import metric_kernel as mk
from . import monitors as mo
from . import oracles
from .errors import ParamOutOfRange, ParseError, UnknownScenario, ValidationError
from .hypothesis_certifier import (
    AsymptoticParams,
    ConeSpec,
    SamplingPlan,
    certify_asymptotics,
    certify_lte,
    scalar_lower_bound,
)
from .scenarios import CATALOGUE, InitialSurface, Scenario, make_scenario

SUBCOMMANDS = ("certify", "run", "oracle", "report")
MODES = ("rot_sym", "axisym")
OUT_ENV = "IMCF_LAB_OUT"


@dataclass
class RunConfig:
    subcommand: str = "run"
    scenario: str = "euclidean"
    mode: str = "rot_sym"
    T: float = 1.0
    resolution: int = 64
    safety: float = 0.2
    dt_max: float = 0.0025
    steps: int = 0
    out: str = ""
    seed: int = 0
    plan_count: int = 40
    plan_cone_samples: int = 16
    assert_asymptotics: bool = False
    allow_lte_only: bool = False
    checkpoints: tuple = ()
    oracle_samples: int = 100
    oracle_states: int = 20
    params: dict = field(default_factory=dict)


# config key -> (field name, converter)
def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _times(s: str) -> tuple:
    s = s.strip()
    return tuple(float(x) for x in s.split(",")) if s else ()


_KEYS = {
    "subcommand": ("subcommand", str),
    "scenario": ("scenario", str),
    "mode": ("mode", str),
    "T": ("T", float),
    "resolution": ("resolution", int),
    "safety": ("safety", float),
    "dt_max": ("dt_max", float),
    "steps": ("steps", int),
    "out": ("out", str),
    "seed": ("seed", int),
    "plan.count": ("plan_count", int),
    "plan.cone_samples": ("plan_cone_samples", int),
    "assert_asymptotics": ("assert_asymptotics", _bool),
    "allow_lte_only": ("allow_lte_only", _bool),
    "checkpoints": ("checkpoints", _times),
    "oracle.samples": ("oracle_samples", int),
    "oracle.states": ("oracle_states", int),
}


def _split_lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {no}: expected 'key = value'", no)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError(f"line {no}: empty key", no)
        yield no, key, value


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.subcommand not in SUBCOMMANDS:
        raise ValidationError("subcommand", f"must be one of {', '.join(SUBCOMMANDS)}")
    if cfg.mode not in MODES:
        raise ValidationError("mode", f"must be one of {', '.join(MODES)}")
    if not (cfg.T > 0 and math.isfinite(cfg.T)):
        raise ValidationError("T", "must be positive")
    if cfg.resolution < 16:
        raise ValidationError("resolution", "must be at least 16")
    if not 0 < cfg.safety <= 0.5:
        raise ValidationError("safety", "must lie in (0, 0.5]")
    if not cfg.dt_max > 0:
        raise ValidationError("dt_max", "must be positive")
    if cfg.steps < 0:
        raise ValidationError("steps", "must be non-negative")
    if cfg.plan_count < 2:
        raise ValidationError("plan.count", "must be at least 2")
    if cfg.plan_cone_samples < 8:
        raise ValidationError("plan.cone_samples", "must be at least 8")
    if cfg.oracle_samples < 1 or cfg.oracle_states < 1:
        raise ValidationError("oracle.samples", "must be positive")
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config; unknown or repeated keys raise ParseError."""
    cfg = RunConfig()
    seen = set()
    for no, key, value in _split_lines(text):
        if key in seen:
            raise ParseError(f"line {no}: duplicate key {key!r}", no, key)
        seen.add(key)
        if key.startswith("param."):
            name = key[len("param."):]
            try:
                cfg.params[name] = float(value)
            except ValueError:
                raise ValidationError(key, f"not a number: {value!r}") from None
            continue
        if key not in _KEYS:
            raise ParseError(f"line {no}: unknown key {key!r}", no, key)
        attr, conv = _KEYS[key]
        try:
            setattr(cfg, attr, conv(value))
        except ValueError as exc:
            raise ValidationError(key, str(exc)) from None
    return validate(cfg)


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for key, (attr, conv) in _KEYS.items():
        v = getattr(cfg, attr)
        if conv is float:
            s = repr(float(v))
        elif conv is _bool:
            s = "true" if v else "false"
        elif conv is _times:
            s = ",".join(repr(float(x)) for x in v)
        else:
            s = str(v)
        lines.append(f"{key} = {s}")
    lines += [f"param.{k} = {v!r}" for k, v in sorted(cfg.params.items())]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

_PROFILE_KEYS = {"family", "l", "p", "q", "scale", "expr", "r_min"}
_FACTOR_KEYS = {"family", "a", "m", "eps", "c", "center", "width", "expr"}
_SCENARIO_TOP = {"id", "n", "base", "cone.theta1", "cone.theta2", "init.kind", "init.r0", "init.amplitude",
                 "init.mode", "fiber.rho1", "fiber.rho2", "plan.r_lo", "plan.r_hi", "asym.alpha", "asym.beta",
                 "asym.gamma", "asym.C1", "asym.C2", "asym.C3", "asym.C4"}


def _profile_from(d: dict) -> mk.WarpingProfile:
    fam = d.get("family", "euclidean")
    num = {k: float(v) for k, v in d.items() if k not in ("family", "expr")}
    if fam == "euclidean":
        return mk.euclidean_profile(**num)
    if fam == "hyperbolic":
        return mk.hyperbolic_profile(**num)
    if fam == "example1":
        return mk.example1_profile(**num)
    if fam == "sqrt":
        return mk.sqrt_profile(**num)
    if fam == "custom":
        return mk.custom_profile(d["expr"], num.get("r_min", 1e-3))
    raise ValidationError("lambda.family", f"unknown family {fam!r}")


def _factor_from(d: dict) -> mk.ConformalFactor:
    fam = d.get("family", "zero")
    num = {k: float(v) for k, v in d.items() if k not in ("family", "expr")}
    builders = {"zero": mk.zero_factor, "constant": mk.constant_factor, "log": mk.log_factor,
                "power": mk.power_factor, "exp": mk.exp_factor, "bump": mk.bump_factor}
    if fam == "custom":
        return mk.custom_factor(d["expr"])
    if fam not in builders:
        raise ValidationError("f.family", f"unknown family {fam!r}")
    return builders[fam](**num)


def parse_scenario_file(text: str) -> Scenario:
    """Scenario from ``lambda.*``, ``f.*``, ``cone.*``, ``init.*``, ``fiber.*`` keys.

    ``base = <catalogue id>`` starts from a catalogue entry and overrides the
    listed parts; without it every part defaults to the Euclidean model.
    """
    prof, fac, top = {}, {}, {}
    for no, key, value in _split_lines(text):
        if key.startswith("lambda."):
            sub = key[len("lambda."):]
            if sub not in _PROFILE_KEYS:
                raise ParseError(f"line {no}: unknown key {key!r}", no, key)
            prof[sub] = value
        elif key.startswith("f."):
            sub = key[len("f."):]
            if sub not in _FACTOR_KEYS:
                raise ParseError(f"line {no}: unknown key {key!r}", no, key)
            fac[sub] = value
        elif key in _SCENARIO_TOP:
            top[key] = value
        else:
            raise ParseError(f"line {no}: unknown key {key!r}", no, key)
    base = make_scenario(top.get("base", "euclidean"), {"n": float(top.get("n", 2))})
    try:
        profile = _profile_from(prof) if prof else base.profile
        factor = _factor_from(fac) if fac else base.factor
    except TypeError as exc:
        raise ValidationError("lambda/f", str(exc)) from None
    kind = top.get("init.kind", "sphere")
    if kind not in ("sphere", "perturbed"):
        raise ValidationError("init.kind", "must be sphere or perturbed")
    amp = float(top.get("init.amplitude", 0.05 if kind == "perturbed" else 0.0))
    if kind == "sphere" and amp != 0.0:
        raise ValidationError("init.amplitude", "a sphere has zero amplitude")
    init = InitialSurface(float(top.get("init.r0", base.initial.r0)), amp, int(float(top.get("init.mode", 1))))
    ap = base.asymptotic_params
    asym = AsymptoticParams(**{k: float(top.get(f"asym.{k}", getattr(ap, k)))
                               for k in ("alpha", "beta", "gamma", "C1", "C2", "C3", "C4")})
    sc = Scenario(
        id=top.get("id", "custom"),
        profile=profile,
        factor=factor,
        band=mk.FiberCurvatureBand(float(top.get("fiber.rho1", 1.0)), float(top.get("fiber.rho2", 1.0))),
        n=int(float(top.get("n", base.n))),
        cone=ConeSpec(float(top.get("cone.theta1", base.cone.theta1)), float(top.get("cone.theta2", base.cone.theta2))),
        initial=init,
        r_range=(float(top.get("plan.r_lo", base.r_range[0])), float(top.get("plan.r_hi", base.r_range[1]))),
        asymptotic_params=asym,
        expected={} if (prof or fac) else dict(base.expected),
    )
    if not sc.initial_star_margin() > 0:
        raise ParamOutOfRange("initial surface is not strongly star-shaped at theta1")
    return sc


def load_scenario(cfg: RunConfig) -> Scenario:
    if cfg.scenario in CATALOGUE:
        return make_scenario(cfg.scenario, cfg.params)
    if os.path.isfile(cfg.scenario):
        if cfg.params:
            raise ValidationError("param", "param.* keys only apply to catalogue scenarios")
        with open(cfg.scenario, encoding="utf-8") as fh:
            return parse_scenario_file(fh.read())
    raise UnknownScenario(cfg.scenario)


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def _write(out: str, name: str, text: str) -> str:
    path = os.path.join(out, name)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _plan(cfg: RunConfig, sc: Scenario) -> SamplingPlan:
    return sc.default_plan(cfg.plan_count, cfg.plan_cone_samples, cfg.seed)


def _certify(cfg, sc, out):
    plan = _plan(cfg, sc)
    lte = certify_lte(sc, plan=plan)
    asym = certify_asymptotics(sc, plan=plan)
    _write(out, "certificate_lte.txt", lte.to_text())
    _write(out, "certificate_lte.kv", lte.to_kv())
    _write(out, "certificate_asymptotics.txt", asym.to_text())
    _write(out, "certificate_asymptotics.kv", asym.to_kv())
    extra = []
    if any(t.startswith("R_hat") for t in sc.tags):
        low, wit = scalar_lower_bound(sc, plan)
        ok = low >= -6.0 * (1 + 1e-9)
        extra.append(f"R_hat_lower: margin={low + 6.0:.17g} value={low:.17g} {'PASS' if ok else 'FAIL'}")
    if extra:
        _write(out, "certificate_tags.txt", "\n".join(extra) + "\n")
    return lte, asym, extra


def _status_certify(cfg, lte, asym, extra) -> int:
    ok = lte.passed and all(line.endswith("PASS") for line in extra)
    if cfg.assert_asymptotics:
        ok = ok and asym.passed
    return 0 if ok else 1


def execute(cfg: RunConfig) -> int:
    """Run one subcommand; returns the exit status."""
    out = cfg.out or os.environ.get(OUT_ENV, "") or "imcf_lab_out"
    os.makedirs(out, exist_ok=True)
    if cfg.subcommand == "oracle":
        rows = oracles.curvature_samples(cfg.oracle_samples, cfg.seed)
        rows += oracles.shape_samples(cfg.oracle_states, cfg.seed)
        table = oracles.oracle_table(rows)
        _write(out, "oracle.txt", table)
        return 0 if table.split("\n", 1)[0].endswith("PASS") else 1
    if cfg.subcommand == "report":
        return _report(out)
    sc = load_scenario(cfg)
    lte, asym, extra = _certify(cfg, sc, out)
    if cfg.subcommand == "certify":
        return _status_certify(cfg, lte, asym, extra)
    # run
    state = fe.initial_state(sc, cfg.mode, cfg.resolution)
    controls = fe.FlowControls(
        safety=cfg.safety, dt_max=cfg.dt_max, fixed_steps=cfg.steps or None,
        checkpoint_times=cfg.checkpoints, checkpoint_dir=out if cfg.checkpoints else None,
        raise_on_halt=False,
    )
    traj = fe.run(sc, state, cfg.T, controls, certificate=lte)
    fe.write_csv(traj, os.path.join(out, "trajectory.csv"))
    fe.write_checkpoint(traj.final, os.path.join(out, "final_state.txt"))
    params = mo.EnvelopeParams.from_certificates(sc, traj, lte, asym)
    rep = mo.run_monitors(traj, params, sc, allow_lte_only=cfg.allow_lte_only)
    info = [f"scenario={sc.id}", f"mode={cfg.mode}", f"steps={traj.steps}", f"t_final={traj.final.t:.17g}"]
    info += [f"{k}={v}" for k, v in sorted(traj.tags.items())]
    if traj.halt is not None:
        info.append(f"halt_message={traj.halt}")
    _write(out, "run_info.txt", "\n".join(info) + "\n")
    _write(out, "monitors.txt", rep.to_text())
    _write(out, "monitors.kv", rep.to_kv())
    ok = lte.passed and rep.passed and traj.halt is None
    return 0 if ok else 1


_REPORT_ORDER = ("run_info.txt", "certificate_lte.txt", "certificate_asymptotics.txt", "certificate_tags.txt",
                 "monitors.txt", "oracle.txt")


def _report(out: str) -> int:
    parts = []
    failed = False
    for name in _REPORT_ORDER:
        path = os.path.join(out, name)
        if not os.path.exists(path):
            continue
        with open(path, encoding="utf-8") as fh:
            body = fh.read()
        if name == "oracle.txt":
            body = body.split("\n", 1)[0] + "\n"
        parts.append(f"== {name} ==\n{body}")
        for line in body.splitlines():
            if line.startswith("#") and not line.startswith("# oracle"):
                continue
            if " FAIL" in line or line.endswith("FAIL"):
                failed = True
    if not parts:
        raise FileNotFoundError(f"no outputs to summarise in {out}")
    csvs = sorted(glob.glob(os.path.join(out, "*.csv")))
    if csvs:
        parts.append("== files ==\n" + "\n".join(os.path.basename(p) for p in csvs) + "\n")
    _write(out, "summary.txt", "\n".join(parts))
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="imcf-lab", description="IMCF numerical lab")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", help="key = value config file")
    ap.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./imcf_lab_out)")
    ap.add_argument("--seed", type=int)
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        text = ""
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text)
        cfg.subcommand = args.subcommand
        if args.out:
            cfg.out = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        validate(cfg)
    except (ParseError, ValidationError, OSError) as exc:
        print(f"imcf-lab: config error: {exc}", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return execute(cfg)
    except (UnknownScenario, ParamOutOfRange, ValidationError, ParseError) as exc:
        print(f"imcf-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"imcf-lab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

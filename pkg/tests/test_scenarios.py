import math

import numpy as np
import pytest

from imcf_lab import hypothesis_certifier as hc
from imcf_lab import metric_kernel as mk
from imcf_lab.errors import ParamOutOfRange, UnknownScenario
from imcf_lab.scenarios import CATALOGUE, InitialSurface, make_scenario, with_initial


@pytest.mark.parametrize("sid", CATALOGUE)
def test_catalogue_expectations_match_certifier(sid):
    sc = make_scenario(sid)
    lte = hc.certify_lte(sc, refine_check=False)
    asym = hc.certify_asymptotics(sc)
    assert ("PASS" if lte.passed else "FAIL") == sc.expected["lte"]
    assert ("PASS" if asym.passed else "FAIL") == sc.expected["asymptotics"]
    for cid in sc.expected.get("failing", ()):
        assert not lte[cid].passed
    if sc.expected.get("G_cone_margin_zero"):
        assert lte["G_cone"].margin == 0.0


@pytest.mark.parametrize("sid", CATALOGUE)
def test_initial_surface_is_strongly_star_shaped(sid):
    assert make_scenario(sid).initial_star_margin() > 0


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        make_scenario("nope")


@pytest.mark.parametrize(
    "sid,params",
    [
        ("example1", {"p": 1.5}),
        ("example1", {"l": 2.0}),
        ("example1", {"q": 0.0}),
        ("example3", {"a": -0.1}),
        ("example4", {"m": 2.0}),
        ("hyperbolic_bump", {"a": 0.5}),
        ("euclidean", {"r0": 0.0}),
        ("hyperbolic_perturbed", {"amplitude": 0.9}),
        ("hyperbolic_perturbed", {"n": 3}),
    ],
)
def test_param_out_of_range(sid, params):
    with pytest.raises(ParamOutOfRange):
        make_scenario(sid, params)


def test_example1_profile_and_n_dependent_range():
    sc = make_scenario("example1")
    lam = mk.eval_warping(sc.profile, 2.0)[0]
    assert lam == pytest.approx(math.sinh(2.0) + 2.0**-0.5 + math.exp(-2.0), rel=1e-15)
    # n = 3 tightens p <= 1/(n-1) = 1/2 and widens l, q <= sqrt(6)
    make_scenario("example1", {"n": 3, "p": 0.5, "l": 2.0})
    with pytest.raises(ParamOutOfRange):
        make_scenario("example1", {"n": 3, "p": 0.6})


def test_example2_profile_is_increasing_and_concave():
    sc = make_scenario("example2_negative")
    lam, d1, d2 = sc.profile.eval(np.linspace(0.5, 20, 50))
    assert np.all(lam > 0) and np.all(d1 > 0) and np.all(d2 < 0)


def test_example3_closed_form_matches_G_margin():
    # lambda = r, radial f: G is radial, so its cone margin is (1 - cos theta2) g(G, eta)
    sc = make_scenario("example3")
    rep = hc.certify_lte(sc, refine_check=False)
    r = np.asarray(sc.default_plan().r_grid)
    _, f_r, _, f_rr, _, _ = sc.factor.polar_jet(r, math.pi / 2)
    closed = r * r * f_rr + r * f_r
    delta = float(closed.min())
    assert delta > 0
    want = (1.0 - math.cos(sc.cone.theta2)) * delta
    assert rep["G_cone"].margin == pytest.approx(want, rel=1e-9)


def test_example3_closed_form_for_power_family():
    # f = a r^-m: r^2 f_rr + r f_r = a m^2 r^-m
    for a, m in ((0.2, 1.0), (0.1, 2.0)):
        fac = mk.power_factor(a, m)
        r = np.array([1.0, 3.0, 7.5])
        _, f_r, _, f_rr, _, _ = fac.polar_jet(r, 1.0)
        assert np.allclose(r * r * f_rr + r * f_r, a * m * m * r**-m, rtol=1e-13)


@pytest.mark.parametrize("sid", [s for s in CATALOGUE if "R_hat>=-6" in make_scenario(s).tags])
def test_scalar_curvature_tags(sid):
    lo, witness = hc.scalar_lower_bound(make_scenario(sid))
    assert lo >= -6.0 - 1e-9, witness


def test_tagged_scenarios_exist():
    tagged = {s for s in CATALOGUE if "R_hat>=-6" in make_scenario(s).tags}
    assert {"example1", "example4"} <= tagged


def test_initial_surface_derivative():
    init = InitialSurface(1.3, 0.05, 2)
    th = np.linspace(0.2, 2.9, 7)
    h = 1e-6
    fd = (init(th + h) - init(th - h)) / (2 * h)
    assert np.allclose(init.derivative(th), fd, rtol=1e-7, atol=1e-9)


def test_with_initial_and_overrides():
    sc = make_scenario("hyperbolic_sphere", {"r0": 2.0, "theta1": 0.3, "rho1": 0.5})
    assert sc.initial.r0 == 2.0 and sc.cone.theta1 == 0.3 and sc.band.rho1 == 0.5
    sc2 = with_initial(sc, amplitude=0.02)
    assert sc2.initial.amplitude == 0.02 and sc2.initial.r0 == 2.0

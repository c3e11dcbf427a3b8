import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imcf_lab import cli_io
from imcf_lab.errors import ParseError, ParamOutOfRange, UnknownScenario, ValidationError


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ---------------------------------------------------------------- parsing


def test_parse_minimal_config_fills_defaults():
    cfg = cli_io.parse_config("subcommand = run\nscenario = euclidean\nT = 2.0")
    assert (cfg.subcommand, cfg.scenario, cfg.T) == ("run", "euclidean", 2.0)
    assert cfg.resolution == 64 and cfg.safety == 0.2 and cfg.mode == "rot_sym"


def test_parse_comments_params_and_lists():
    cfg = cli_io.parse_config("# header\nscenario = example1  # inline\nparam.p = 0.25\ncheckpoints = 0.5, 1.0\n"
                              "assert_asymptotics = yes\n")
    assert cfg.params == {"p": 0.25}
    assert cfg.checkpoints == (0.5, 1.0)
    assert cfg.assert_asymptotics is True


def test_validation_errors_name_the_key():
    with pytest.raises(ValidationError) as e:
        cli_io.parse_config("T = -1")
    assert e.value.key == "T"
    for text, key in (("resolution = 8", "resolution"), ("safety = 0.9", "safety"), ("mode = full", "mode"),
                      ("T = abc", "T"), ("param.l = big", "param.l")):
        with pytest.raises(ValidationError) as e:
            cli_io.parse_config(text)
        assert e.value.key == key


def test_parse_errors():
    with pytest.raises(ParseError) as e:
        cli_io.parse_config("T = 1\nunknown_key = 5")
    assert e.value.key == "unknown_key" and e.value.line == 2
    with pytest.raises(ParseError):
        cli_io.parse_config("T = 1\nT = 2")
    with pytest.raises(ParseError):
        cli_io.parse_config("no equals sign")


keys = st.sampled_from(["a", "l", "p", "amplitude", "r0"])


@settings(max_examples=50, deadline=None)
@given(
    T=st.floats(1e-3, 100),
    res=st.integers(16, 512),
    safety=st.floats(1e-3, 0.5),
    mode=st.sampled_from(["rot_sym", "axisym"]),
    sub=st.sampled_from(cli_io.SUBCOMMANDS),
    flags=st.booleans(),
    params=st.dictionaries(keys, st.floats(-5, 5), max_size=3),
    cps=st.lists(st.floats(0.01, 10), max_size=3),
)
def test_round_trip(T, res, safety, mode, sub, flags, params, cps):
    cfg = cli_io.RunConfig(subcommand=sub, mode=mode, T=T, resolution=res, safety=safety,
                           assert_asymptotics=flags, params=params, checkpoints=tuple(cps), out="o dir")
    assert cli_io.parse_config(cli_io.serialize_config(cfg)) == cfg


# ---------------------------------------------------------------- scenarios


def test_load_catalogue_and_errors():
    sc = cli_io.load_scenario(cli_io.parse_config("scenario = example1\nparam.l = 1.2"))
    assert sc.params["l"] == 1.2
    with pytest.raises(UnknownScenario):
        cli_io.load_scenario(cli_io.parse_config("scenario = nowhere"))
    with pytest.raises(ParamOutOfRange):
        cli_io.load_scenario(cli_io.parse_config("scenario = example1\nparam.p = 3"))


def test_scenario_file(tmp_path):
    path = write(tmp_path, "sc.txt", "id = mine\nlambda.family = custom\nlambda.expr = sinh(r) + r\n"
                                      "lambda.r_min = 0.01\nf.family = power\nf.a = 0.1\nf.m = 3\n"
                                      "init.kind = perturbed\ninit.r0 = 1.5\n")
    sc = cli_io.load_scenario(cli_io.parse_config(f"scenario = {path}"))
    assert sc.id == "mine" and sc.initial.amplitude == 0.05 and sc.initial.r0 == 1.5
    assert sc.profile.eval(1.0)[0] == pytest.approx(1.0 + 1.1752011936438014)
    with pytest.raises(ParseError):
        cli_io.parse_scenario_file("lambda.colour = red")
    with pytest.raises(ValidationError):
        cli_io.parse_scenario_file("f.family = wobbly")
    base = cli_io.parse_scenario_file("base = hyperbolic_sphere\ninit.r0 = 2")
    assert base.profile.family_tag == "hyperbolic" and base.expected["lte"] == "PASS"


# ---------------------------------------------------------------- execution


def run_cli(tmp_path, sub, config, *extra):
    cfgp = write(tmp_path, f"{sub}.cfg", config)
    out = str(tmp_path / "out")
    return cli_io.main([sub, "--config", cfgp, "--out", out, *extra]), out


def test_certify_euclidean(tmp_path):
    code, out = run_cli(tmp_path, "certify", "scenario = euclidean\n")
    assert code == 0
    text = open(os.path.join(out, "certificate_lte.txt")).read()
    assert "G_cone: margin=0 " in text and text.rstrip().endswith("overall: PASS")
    code, _ = run_cli(tmp_path, "certify", "scenario = euclidean\nassert_asymptotics = true\n")
    assert code == 1


def test_run_example2_exits_one(tmp_path):
    code, out = run_cli(tmp_path, "run", "scenario = example2_negative\nmode = axisym\nT = 0.1\nresolution = 32\n")
    assert code == 1
    cert = open(os.path.join(out, "certificate_lte.txt")).read()
    assert any(line.startswith("G_cone:") and line.endswith("FAIL") for line in cert.splitlines())
    assert "lte_certificate=FAIL" in open(os.path.join(out, "run_info.txt")).read()


def test_run_hyperbolic_csv_contract(tmp_path):
    code, out = run_cli(tmp_path, "run", "scenario = hyperbolic_sphere\nT = 4\n")
    assert code == 0
    header = open(os.path.join(out, "trajectory.csv")).readline().strip()
    assert header == "t,w_min,w_max,eta_min,eta_max,H_min,H_max,u_max,v_max,k_max"
    assert "w_floor: PASS" in open(os.path.join(out, "monitors.txt")).read()


def test_report_and_oracle(tmp_path):
    code, out = run_cli(tmp_path, "oracle", "oracle.samples = 6\noracle.states = 2\n")
    assert code == 0
    assert open(os.path.join(out, "oracle.txt")).readline().endswith("PASS\n")
    code, _ = run_cli(tmp_path, "report", "")
    assert code == 0
    assert os.path.exists(os.path.join(out, "summary.txt"))


def test_usage_errors_exit_two(tmp_path, capsys):
    assert run_cli(tmp_path, "run", "T = -1\n")[0] == 2
    assert run_cli(tmp_path, "run", "unknown_key = 5\n")[0] == 2
    assert run_cli(tmp_path, "run", "scenario = nowhere\n")[0] == 2
    assert cli_io.main(["fly"]) == 2
    assert cli_io.main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert cli_io.main(["report", "--out", str(tmp_path / "empty")]) == 2


def test_env_var_sets_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("IMCF_LAB_OUT", str(tmp_path / "envout"))
    cfgp = write(tmp_path, "c.cfg", "scenario = hyperbolic_sphere\n")
    assert cli_io.main(["certify", "--config", cfgp]) == 0
    assert os.path.exists(tmp_path / "envout" / "certificate_lte.txt")


def test_console_script_determinism(tmp_path):
    cfgp = write(tmp_path, "d.cfg", "scenario = hyperbolic_perturbed\nmode = axisym\nT = 0.3\nresolution = 32\n")
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        proc = subprocess.run([sys.executable, "-m", "imcf_lab.cli_io", "run", "--config", cfgp,
                               "--out", str(out), "--seed", "7"], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    names = sorted(os.listdir(outs[0]))
    assert names == sorted(os.listdir(outs[1]))
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_console_script_installed():
    import shutil

    exe = shutil.which("imcf-lab")
    assert exe is not None
    proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "certify" in proc.stdout

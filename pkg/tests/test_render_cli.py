import json
import subprocess
import sys

import pytest

from sftkit import cli, zoo
from sftkit.core import Pattern, TorusConfig, box, dumps_pattern, dumps_torus
from sftkit.render import UnsupportedDimension, render, render_ppm, render_svg


def run(*argv, env=None):
    proc = subprocess.run([sys.executable, "-m", "sftkit.cli", *argv], capture_output=True, text=True, env=env)
    return proc.returncode, proc.stdout, proc.stderr


# ---------------------------------------------------------------- render


def test_uniform_blue_cross_render():
    xs = zoo.x_struct()
    t = TorusConfig.constant((4, 4), xs.alphabet.index("X.bbbb"))
    svg = render_svg(xs, t)
    assert svg.startswith("<svg") and svg == render_svg(xs, t)
    assert "#d02020" not in svg


def test_ppm_header_and_size():
    xs = zoo.x_struct()
    t = TorusConfig.constant((2, 3), xs.alphabet.index("X.bbbb"))
    data = render_ppm(xs, t)
    assert data.startswith(b"P6\n48 72\n255\n")
    assert len(data) == len(b"P6\n48 72\n255\n") + 48 * 72 * 3


def test_worm_render_draws_line():
    ws = zoo.worm_shift()
    p = Pattern({(0, 0): ws.alphabet.index("line"), (1, 0): ws.alphabet.index("white")})
    assert "#202020" in render_svg(ws, p)


def test_good_wave_crest_render_has_four_sheets():
    from sftkit.claims import random_gw_torus

    gw = zoo.good_wave()
    t = random_gw_torus((3, 3, 7), seed=2)
    svg = render_svg(gw, t)
    assert svg.count(">z=") == 4
    assert render(gw, t, "ppm") == render(gw, t, "ppm")


def test_one_dimensional_render_is_unsupported():
    with pytest.raises(UnsupportedDimension):
        render_svg(zoo.golden_mean(), Pattern.from_word([0, 1]))


# ---------------------------------------------------------------- cli


def test_cli_entropy_golden_mean_strip():
    code, out, err = run("entropy", "--shift", "golden-mean", "--strip", "1")
    assert code == 0
    assert "upper 0.4812118251" in out
    assert err.startswith("# tool: sftkit")


def test_cli_malformed_spec_exits_one(tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("sft 1\nname x\ndimension two\n")
    code, out, err = run("validate", "--spec", str(bad))
    assert code == 1
    last = err.strip().splitlines()[-1]
    assert json.loads(last)["error"] == "SpecFormatError"


def test_cli_unknown_verb_is_input_error():
    code, _, err = run("frobnicate")
    assert code == 1 and json.loads(err.strip())["error"] == "InvalidInput"


def test_cli_budget_exhaustion_exit_code():
    code, _, err = run("count", "--shift", "hard-squares", "--box", "3", "--max-nodes", "5")
    assert code == 3
    assert json.loads(err.strip().splitlines()[-1])["error"] == "BudgetExhausted"


def test_cli_budget_from_environment():
    import os

    env = dict(os.environ, **{cli.BUDGET_ENV: "5"})
    code, _, _ = run("count", "--shift", "hard-squares", "--box", "3", env=env)
    assert code == 3


def test_cli_counterexample_exit_code():
    code, out, _ = run("claim", "periodic-density", "--shift", "golden-mean", "--n", "3", "--periods", "7")
    assert code == 2
    assert json.loads(out)["report"]["verdict"] == "counterexample"


def test_cli_enumerate_round_trip(tmp_path):
    out = tmp_path / "lang.json"
    assert run("enumerate", "--shift", "hard-squares", "--box", "1", "-o", str(out))[0] == 0
    doc = json.loads(out.read_text())
    assert doc["count"] == 63 and doc["header"]["shift"] == "hard-squares"
    assert run("validate", "--shift", "hard-squares", str(out))[0] == 0


def test_cli_rejects_invalid_pattern(tmp_path):
    gm = zoo.golden_mean()
    f = tmp_path / "p.pat"
    f.write_text(dumps_pattern(gm, Pattern.from_word([1, 1])))
    assert run("validate", "--shift", "golden-mean", str(f))[0] == 2


def test_cli_exchange_and_graph(tmp_path):
    fs = zoo.full_shift(2, 1)
    a, b = tmp_path / "a.pat", tmp_path / "b.pat"
    a.write_text(dumps_pattern(fs, Pattern.from_word([0, 1])))
    b.write_text(dumps_pattern(fs, Pattern.from_word([1, 1])))
    code, out, _ = run("exchange", "--shift", "full-2-shift-d1", str(a), str(b))
    assert code == 0 and json.loads(out)["outcome"] == "witness"
    code, out, _ = run("graph", "--shift", "golden-mean", "--box", "1", "--format", "dot")
    assert code == 0 and out.startswith("graph exchangeability")
    code, out, _ = run("bce", "--shift", "golden-mean", "--max-box", "1")
    assert code == 0 and json.loads(out)["records"][1]["max_diameter"] == 1


def test_cli_render_round_trip(tmp_path):
    gw = zoo.good_wave()
    tor = tmp_path / "flat.torus"
    assert run("export", "--shift", "good-wave", "--flat-wave", "3,3,5", "-o", str(tor))[0] == 0
    assert run("validate", "--shift", "good-wave", str(tor))[0] == 0
    svg, ppm = tmp_path / "a.svg", tmp_path / "a.ppm"
    assert run("render", "--shift", "good-wave", str(tor), "-o", str(svg))[0] == 0
    assert run("render", "--shift", "good-wave", str(tor), "-o", str(ppm))[0] == 0
    assert svg.read_text().startswith("<svg")
    assert ppm.read_bytes().startswith(b"P6")
    assert tor.read_text() == dumps_torus(gw, zoo.flat_wave_torus((3, 3, 5)))


def test_cli_export_spec_round_trip(tmp_path):
    f = tmp_path / "xs.sft"
    assert run("export", "--shift", "x-struct", "-o", str(f))[0] == 0
    code, out, _ = run("validate", "--spec", str(f))
    assert code == 0 and json.loads(out)["header"]["shift"] == "x-struct"


def test_cli_claim_good_wave():
    code, out, _ = run("claim", "good-wave", "--torus", "3,3,5")
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["verdict"] == "verified"
    assert doc["report"]["stats"]["tori"] == 5546


def test_header_has_reproducibility_fields():
    code, out, err = run("count", "--shift", "golden-mean", "--box", "2", "--seed", "4")
    assert code == 0
    h = json.loads(out)["header"]
    assert h["seed"] == 4 and h["spec"].startswith("sha256:") and h["tool"].startswith("sftkit")
    assert "# spec: " + h["spec"] in err


def test_main_returns_codes_in_process(capsys):
    assert cli.main(["count", "--shift", "golden-mean", "--box", "1"]) == 0
    assert cli.main(["count", "--shift", "nope", "--box", "1"]) == 1

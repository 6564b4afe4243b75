import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tridiag_edge.cli import main
from tridiag_edge.config import COMMAND_KEYS, COMMANDS, ConfigError, RunConfig, parse_config, parse_grid, render
from tridiag_edge.laws import PotentialLaw
from tridiag_edge.theory import f_of_lambda, rate_G, rate_H

TAIL = """[tail]
model = H
N = 1000
alpha = 0.5
law = pareto(1,2)
lambda = 3
trials = 10000
seed = 1
"""


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# schema=tridiag-edge/")
    return lines[0], list(csv.DictReader(lines[1:]))


# -- parse_config ------------------------------------------------------------------


def test_parse_minimal_tail():
    cfg = parse_config(TAIL)
    assert (cfg.command, cfg.model, cfg.N, cfg.alpha, cfg.lam, cfg.trials, cfg.seed) == ("tail", "H", 1000, 0.5, 3.0, 10000, 1)
    assert cfg.law == PotentialLaw.pareto(1, 2)


def test_parse_rejects_bad_law_naming_key():
    with pytest.raises(ConfigError) as info:
        parse_config(TAIL.replace("pareto(1,2)", "pareto(1,-2)"))
    assert info.value.key == "law" and info.value.line == 5


def test_parse_default_seed():
    cfg = parse_config(TAIL.replace("seed = 1\n", ""))
    assert cfg.seed == 0


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ConfigError) as info:
        parse_config("[tail]\nN = 10\nthis line is junk\n")
    assert info.value.line == 3
    with pytest.raises(ConfigError) as info:
        parse_config("[tail]\nN = 10\nbogus = 1\n")
    assert info.value.key == "bogus" and info.value.line == 3
    with pytest.raises(ConfigError) as info:
        parse_config("N = 10\n")
    assert info.value.line == 1


@pytest.mark.parametrize(
    "line, key",
    [("N = 1", "N"), ("alpha = -1", "alpha"), ("trials = 0", "trials"), ("seed = -3", "seed"), ("model = Q", "model"), ("format = xml", "format")],
)
def test_parse_domain_violations(line, key):
    with pytest.raises(ConfigError) as info:
        parse_config(f"[tail]\n{line}\n")
    assert info.value.key == key


def test_parse_rejects_key_of_other_command():
    with pytest.raises(ConfigError):
        parse_config("[spike-sweep]\nlambda = 3\n")


def test_parse_section_selection():
    text = TAIL + "\n[rate]\nlambda_grid = 2.5,3\n"
    assert parse_config(text, "rate").lambda_grid == (2.5, 3.0)
    with pytest.raises(ConfigError):
        parse_config(text)
    with pytest.raises(ConfigError):
        parse_config("[nosuch]\nN = 3\n")


def test_parse_grid():
    assert parse_grid("0.5:0.5:2") == (0.5, 1.0, 1.5, 2.0)
    assert parse_grid("2.1:0.1:2.4") == (2.1, 2.2, 2.3, 2.4)
    assert parse_grid("1, 2,3") == (1.0, 2.0, 3.0)
    with pytest.raises(ValueError):
        parse_grid("1:0:2")


# -- render round trip ----------------------------------------------------------------------

finite = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
laws = st.one_of(
    st.builds(PotentialLaw.weibull, finite, finite),
    st.builds(PotentialLaw.pareto, finite, finite),
    st.builds(PotentialLaw.constant, st.floats(-1e3, 1e3)),
    st.builds(PotentialLaw.signed, st.builds(PotentialLaw.pareto, finite, finite)),
)


@st.composite
def configs(draw):
    command = draw(st.sampled_from(COMMANDS))
    kw = dict(
        command=command,
        model=draw(st.sampled_from(["H", "G", "Gbeta"])),
        N=draw(st.integers(2, 10**6)),
        alpha=draw(st.floats(0, 5)),
        law=draw(laws),
        beta_ens=draw(finite),
        seed=draw(st.integers(0, 2**64 - 1)),
        workers=draw(st.integers(1, 64)),
        format=draw(st.sampled_from(["csv", "jsonl"])),
        out=draw(st.from_regex(r"[a-z0-9_./-]{0,20}", fullmatch=True)),
    )
    extra = {
        "trial": st.integers(0, 10**9),
        "top_d": st.integers(1, 10**4),
        "lam": st.floats(-10, 10),
        "trials": st.integers(1, 10**7),
        "power": st.one_of(st.none(), st.floats(-3, 3)),
        "threshold": st.floats(-10, 10),
        "M_grid": st.lists(finite, min_size=1, max_size=5).map(tuple),
        "lambda_grid": st.lists(st.floats(2.001, 50), min_size=1, max_size=5).map(tuple),
    }
    for key in COMMAND_KEYS[command]:
        field = "lam" if key == "lambda" else key
        kw[field] = draw(extra[field])
    return RunConfig(**kw)


@settings(max_examples=200, deadline=None)
@given(configs())
def test_render_round_trip(cfg):
    assert parse_config(render(cfg)) == cfg


# -- run ------------------------------------------------------------------------------------------------


def test_rate_command(tmp_path):
    out = tmp_path / "rate.csv"
    assert main(["rate", "--law", "weibull(1,2)", "--lambda-grid", "2.1:0.1:5", "--out", str(out)]) == 0
    head, rows = read_csv(out)
    assert "seed=0" in head
    assert len(rows) == 30
    for r in rows:
        lam = float(r["lambda"])
        assert float(r["rate_H"]) == rate_H(lam, 1, 2)
        assert float(r["rate_G"]) == rate_G(lam, 1, 2)
        assert float(r["f_lambda"]) == f_of_lambda(lam)
    manifest = json.loads((tmp_path / "rate.csv.manifest.json").read_text())
    assert manifest["config"]["law"] == "weibull(1.0,2.0)" and "wall_time_s" in manifest and manifest["version"]


def test_same_config_twice_is_byte_identical(tmp_path):
    cfg = tmp_path / "t.ini"
    cfg.write_text(TAIL.replace("trials = 10000", "trials = 300"))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["tail", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["tail", "--config", str(cfg), "--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_spike_sweep_command(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["spike-sweep", "--N", "2000", "--M-grid", "0.5:0.5:4", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert [float(r["M"]) for r in rows] == [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
    assert all(float(r["abs_err"]) <= 2e-2 for r in rows)


def test_jsonl_output_and_precision(tmp_path):
    out = tmp_path / "pp.jsonl"
    rc = main(["pointprocess", "--alpha", "1", "--law", "pareto(1,0.5)", "--N", "300", "--trials", "20", "--format", "jsonl", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    head = json.loads(lines[0])
    assert head["schema"] == "tridiag-edge/pointprocess/1" and head["seed"] == 0 and head["stream_ids"] == "0-19"
    recs = [json.loads(x) for x in lines[1:]]
    assert recs and set(recs[0]) == {"trial", "rank", "value"}
    raw = lines[1].split('"value": ')[1].rstrip("}")
    assert len(raw.replace("-", "").replace(".", "").split("e")[0].lstrip("0")) in (16, 17)


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--N", "30", "--top-d", "3"],
        ["spectrum", "--model", "G", "--N", "30"],
        ["distribution", "--N", "50", "--trials", "5", "--power", "auto"],
        ["coupling-check", "--N", "40", "--trials", "3"],
        ["tail", "--model", "G", "--N", "60", "--trials", "4", "--alpha", "1"],
    ],
)
def test_every_command_runs(tmp_path, argv):
    out = tmp_path / "o.csv"
    assert main(argv + ["--out", str(out)]) == 0
    head, rows = read_csv(out)
    assert rows


def test_config_error_exit_code_and_no_output(tmp_path, capsys):
    out = tmp_path / "x.csv"
    assert main(["tail", "--law", "pareto(1,-2)", "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "law" in err
    assert not out.exists()


def test_runtime_failure_removes_partial_files(tmp_path, capsys):
    out = tmp_path / "x.csv"
    # G model above the dense cap with many large potentials cannot be solved.
    rc = main(["tail", "--model", "G", "--N", "2001", "--alpha", "0", "--trials", "1", "--out", str(out)])
    assert rc == 1
    assert "failed" in capsys.readouterr().err
    assert list(tmp_path.iterdir()) == []


def test_success_is_silent_on_stderr(tmp_path, capsys):
    assert main(["rate", "--out", str(tmp_path / "r.csv")]) == 0
    assert capsys.readouterr().err == ""


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "t.ini"
    cfg.write_text(TAIL.replace("trials = 10000", "trials = 50"))
    out = tmp_path / "t.csv"
    assert main(["tail", "--config", str(cfg), "--seed", "9", "--lambda", "2.5", "--out", str(out)]) == 0
    head, rows = read_csv(out)
    assert "seed=9" in head and float(rows[0]["lambda"]) == 2.5 and rows[0]["trials"] == "50"


def test_missing_config_file(tmp_path):
    assert main(["tail", "--config", str(tmp_path / "nope.ini")]) == 2


def test_csv_rows_numeric(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["distribution", "--N", "40", "--trials", "4", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    vals = np.array([float(r["value"]) for r in rows])
    assert np.all(np.isfinite(vals))

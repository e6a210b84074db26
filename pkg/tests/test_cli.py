import json

import pytest

from mixpois.cli import main, parse_config
from mixpois.mixing import ConfigError

GAMMA = {"kind": "gamma", "shape": 2, "rate": 1}


def write(tmp_path, record, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(record))
    return str(p)


def test_pmf_table(tmp_path, capsys):
    cfg = write(tmp_path, {"model": {"mixing": {"kind": "degenerate", "value": 1}, "rho": 2},
                           "max_l": 3})
    assert main(["pmf", "--config", cfg, "--format", "csv"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "l,pmf,cumulative"
    assert lines[2].startswith("1,0.2706705664732254,")
    assert "\r" not in out


def test_moments_json(tmp_path, capsys):
    cfg = write(tmp_path, {"model": {"mixing": GAMMA, "rho": 3}, "order": 2})
    out_path = tmp_path / "m.json"
    assert main(["moments", "--config", cfg, "--out", str(out_path)]) == 0
    doc = json.loads(out_path.read_text())
    assert doc["schema_version"] == 1
    assert doc["columns"] == ["s", "factorial", "raw", "centered"]
    rows = {r[0]: dict(zip(doc["columns"], r)) for r in doc["rows"]}
    assert rows[2]["factorial"] == 54
    assert rows[1]["centered"] == 0


def test_centered_poly(capsys):
    assert main(["centered-poly", "--order", "6"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "x + 25x^2 + 15x^3"


def test_config_errors_exit_1(tmp_path, capsys):
    cfg = write(tmp_path, {"model": {"mixing": GAMMA}, "rho_schedul": [10]})
    assert main(["clt", "--config", cfg]) == 1
    assert "rho_schedul" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["clt", "--config", str(bad)]) == 1
    cfg = write(tmp_path, {"model": {"mixing": {"kind": "gamma", "shape": -1, "rate": 1}}},
                "neg.json")
    assert main(["pmf", "--config", cfg]) == 1
    cfg = write(tmp_path, {"command": "pmf"}, "cmd.json")
    assert main(["clt", "--config", cfg]) == 1


def test_failing_verdict_exit_2(tmp_path, capsys):
    # a lattice limit at small rho misses the KS threshold
    cfg = write(tmp_path, {"model": {"mixing": {"kind": "degenerate", "value": 1}},
                           "rho_schedule": [10], "N": 20000, "max_moment_order": 2})
    assert main(["clt", "--config", cfg, "--out", str(tmp_path / "r.json")]) == 2
    assert "1 failed" in capsys.readouterr().out


def test_experiment_rerun_is_byte_identical_and_echo_round_trips(tmp_path, capsys):
    cfg = write(tmp_path, {"model": {"mixing": {"kind": "zero_inflated", "p": 0.3,
                                                 "base": GAMMA}},
                           "rho_schedule": [10, 100], "N": 10000, "max_moment_order": 2})
    outs = []
    for i, fmt in enumerate(["json", "json", "csv", "csv"]):
        path = tmp_path / f"out{i}.{fmt}"
        code = main(["scaling", "--config", cfg, "--seed", "11", "--format", fmt,
                     "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] and outs[2] == outs[3]
    assert b"\r\n" not in outs[2]
    doc = json.loads(outs[0])
    echoed = doc["config"]
    assert echoed["seed"] == 11
    again = parse_config(echoed, "scaling")
    assert again.echo() == echoed


def test_seed_changes_output(tmp_path, capsys):
    cfg = write(tmp_path, {"model": {"mixing": GAMMA}, "rho_schedule": [10], "N": 5000,
                           "max_moment_order": 1})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["simulate", "--config", cfg, "--seed", "1", "--out", str(a)])
    main(["simulate", "--config", cfg, "--seed", "2", "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_parse_config_strict():
    with pytest.raises(ConfigError) as e:
        parse_config({"N": 1.5}, "simulate")
    assert e.value.field == "N"
    with pytest.raises(ConfigError):
        parse_config({"seed": 2 ** 64}, "simulate")
    with pytest.raises(ConfigError):
        parse_config({"format": "xml"}, "pmf")

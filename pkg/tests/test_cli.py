import copy
import json
import logging
from pathlib import Path

import pytest

import charts
from platehom import ParseError, ValidationError, parse_config
from platehom.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _cfg(**run):
    d = {"material": {"type": "laminate", "coeffs": [1.0, 4.0]}, "chart": copy.deepcopy(charts.CYLINDER)}
    if run:
        d["run"] = run
    return d


def _write(tmp_path, d, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(d))
    return str(p)


def _rows(path):
    return [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]


def test_defaults_filled():
    cfg = parse_config(json.dumps(_cfg()))
    assert cfg.run["eps"] == [1 / 8, 1 / 16, 1 / 32, 1 / 64]
    assert cfg.run["quadrature"]["richardson_tol"] == 1e-3
    assert cfg.chart["frame0"] == [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]


@pytest.mark.parametrize("name", ["cylinder_laminate", "laminate_e1", "cone", "mixed"])
def test_round_trip(name):
    cfg = parse_config((CONFIGS / f"{name}.json").read_text())
    assert parse_config(cfg.to_json()) == cfg


def test_det_bound_path():
    d = _cfg()
    d["chart"] = copy.deepcopy(charts.CONE)
    d["chart"]["s_hi"] = 0.6
    with pytest.raises(ValidationError) as ei:
        parse_config(json.dumps(d))
    assert (ei.value.path, ei.value.reason) == ("chart.s_hi", "det bound")


def test_non_coprime_direction_warns(caplog):
    with caplog.at_level(logging.WARNING):
        cfg = parse_config(json.dumps(_cfg(direction={"p": 2, "q": 2})))
    assert cfg.run["direction"] == {"p": 1, "q": 1}
    assert cfg.warnings and "normalized to (1,1)" in cfg.warnings[0]
    assert any("normalized" in r.message for r in caplog.records)


@pytest.mark.parametrize("text,path", [
    ("{not json", "$"),
    ("[1, 2]", "$"),
])
def test_parse_errors(text, path):
    with pytest.raises(ParseError) as ei:
        parse_config(text)
    assert ei.value.path == path


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d.pop("material"), "material"),
    (lambda d: d["material"].update(coeffs=[]), "material.coeffs"),
    (lambda d: d.setdefault("run", {}).update(eps=[0.1, -1]), "run.eps[1]"),
    (lambda d: d.setdefault("run", {}).update(bogus=1), "run.bogus"),
    (lambda d: d.setdefault("run", {}).update(quadrature={"richardson_tol": 0}), "run.quadrature.richardson_tol"),
    (lambda d: d.setdefault("run", {}).update(k=[0, 0]), "run.k"),
    (lambda d: d["chart"]["pieces"].append({"t_lo": 1.5, "t_hi": 2.0}), "chart.pieces[1].t_lo"),
])
def test_validation_paths(mutate, path):
    d = _cfg()
    mutate(d)
    with pytest.raises(ValidationError) as ei:
        parse_config(json.dumps(d))
    assert ei.value.path == path


def test_cell_command(tmp_path):
    assert main(["cell", "-c", str(CONFIGS / "laminate_e1.json"), "-o", str(tmp_path)]) == 0
    text = (tmp_path / "cell.csv").read_text()
    assert "# Q_av = 2.5\n" in text and "# Q_hom = 1.6" in text


def test_recover_command(tmp_path):
    assert main(["recover", "-c", str(CONFIGS / "cylinder_laminate.json"), "-o", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "recover.csv")
    assert rows[0] == "eps,E_eps,E_hom,rel_gap,l2_dist,bc_err"
    assert float(rows[-1].split(",")[3]) <= 0.02


def test_classify_command(tmp_path):
    assert main(["classify", "-c", str(CONFIGS / "cone.json"), "-o", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "classify.csv")
    assert rows[0] == "kind,direction,measure"
    assert "conical,,0.5" in rows


def test_energy_and_twoscale_commands(tmp_path):
    cfg = _write(tmp_path, _cfg(eps=[0.125, 0.0625]))
    assert main(["energy", "-c", cfg, "-o", str(tmp_path)]) == 0
    text = (tmp_path / "energy.csv").read_text()
    assert "# E_hom = 1.6" in text
    assert _rows(tmp_path / "energy.csv") == ["eps,E_eps", "0.125,1.6000000000000001", "0.0625,1.6000000000000001"]
    assert main(["twoscale", "-c", cfg, "-o", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "twoscale.csv")
    assert rows[0] == "eps,abs_M,arg_M" and len(rows) == 3


def test_mesh_flag(tmp_path):
    cfg = _write(tmp_path, _cfg(eps=[0.125]))
    mesh = tmp_path / "u.obj"
    assert main(["energy", "-c", cfg, "-o", str(tmp_path), "--mesh", str(mesh)]) == 0
    assert mesh.read_text().startswith("v ")


def test_exit_code_validation(tmp_path, capsys):
    d = _cfg()
    d["chart"] = copy.deepcopy(charts.CONE)
    d["chart"]["s_hi"] = 0.6
    assert main(["energy", "-c", _write(tmp_path, d)]) == 2
    assert "chart.s_hi: det bound" in capsys.readouterr().err
    assert main(["energy", "-c", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["energy", "-c", str(bad)]) == 2


def test_exit_code_quadrature(tmp_path):
    d = {"material": {"type": "random", "n": 3}, "chart": copy.deepcopy(charts.CONE),
         "run": {"eps": [0.1], "theta": "none"}}
    cfg = _write(tmp_path, d)
    assert main(["energy", "-c", cfg, "-o", str(tmp_path), "--richardson-tol", "1e-15", "--seed", "3"]) == 3


def test_seed_changes_random_material(tmp_path):
    d = {"material": {"type": "random", "n": 3}, "run": {"direction": {"p": 2, "q": 1}}}
    cfg = _write(tmp_path, d)
    outs = []
    for seed in ("1", "1", "2"):
        o = tmp_path / f"s{len(outs)}"
        assert main(["cell", "-c", cfg, "-o", str(o), "--seed", seed]) == 0
        outs.append((o / "cell.csv").read_bytes())
    assert outs[0] == outs[1] and outs[0] != outs[2]


def test_deterministic_across_threads(tmp_path):
    cfg = str(CONFIGS / "mixed.json")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["recover", "-c", cfg, "-o", str(a), "--threads", "1"]) == 0
    assert main(["recover", "-c", cfg, "-o", str(b), "--threads", "4"]) == 0
    assert (a / "recover.csv").read_bytes() == (b / "recover.csv").read_bytes()


def test_cli_overrides_echoed(tmp_path):
    cfg = _write(tmp_path, _cfg(eps=[0.125]))
    assert main(["energy", "-c", cfg, "-o", str(tmp_path), "--quad-nodes", "3"]) == 0
    head = (tmp_path / "energy.csv").read_text().splitlines()[0]
    echoed = json.loads(head.split("=", 1)[1])
    assert echoed["run"]["quadrature"]["nodes_per_cell"] == 3

import csv
import io
import json
from fractions import Fraction

import pytest

from galrtf.cli import DEFAULT_CONFIG, ConfigError, load_config, main
from galrtf.verify import SL2_CLOSED_FORMS


def run_json(capsys, argv):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


def write_config(tmp_path, cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


@pytest.mark.parametrize("t0, disc, cls", [("3", "-4", "elliptic"), ("0", "-4", "rss-nonelliptic"),
                                           ("1", "-4", "unipotent-plus"), ("-1", "5", "unipotent-minus")])
def test_classify(capsys, t0, disc, cls):
    code, out = run_json(capsys, ["classify", t0, disc])
    assert code == 0
    assert out["data"][0]["class"] == cls


def test_cones_csv_matches_closed_forms(tmp_path):
    out = tmp_path / "cones.csv"
    assert main(["cones", "--format", "csv", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == DEFAULT_CONFIG["grid"]["count"]
    for row in rows:
        H, X = Fraction(row["H"]), Fraction(row["X"])
        for (kind, P, Q), form in SL2_CLOSED_FORMS.items():
            value = form(H, X) if kind == "gamma" else form(H)
            assert Fraction(row[f"{kind}_{P}^{Q}"]) == value


def test_zeta_reports_the_pole(capsys):
    code, out = run_json(capsys, ["zeta"])
    assert code == 0
    assert any(r.get("pole") for r in out["values"])


def test_orbital_and_tori(capsys):
    code, out = run_json(capsys, ["orbital"])
    assert code == 0 and all(("skipped" in r) != ("provenance" in r) for r in out["data"])
    code, out = run_json(capsys, ["tori"])
    assert code == 0 and out["poisson"]["passed"] and out["classification"]["passed"]


def test_expand_is_deterministic_and_writes_csv(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["expand", "--out", str(a)]) == 0
    assert main(["expand", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv").exists()
    report = json.loads(a.read_text())
    assert {e["datum"]["class"] for e in report["reports"]} == {
        "elliptic", "rss-nonelliptic", "unipotent-plus", "unipotent-minus"}


def test_expand_single_datum(capsys):
    code, out = run_json(capsys, ["expand", "--t0", "2"])
    assert code == 0 and len(out["reports"]) == 1


def test_bad_prime_names_the_field(tmp_path, capsys):
    cfg = {"test_function": {"finite": [{"prime": 4, "basic": True}]}}
    code = main(["zeta", "--config", write_config(tmp_path, cfg)])
    assert code == 2
    assert "test_function.finite[0].prime" in capsys.readouterr().err


@pytest.mark.parametrize("cfg, field", [
    ({"T": "x"}, "T"),
    ({"grid": {"count": 0}}, "grid.count"),
    ({"unknown": 1}, "unknown"),
    ({"E_disc": 9}, "E_disc"),
])
def test_config_errors(tmp_path, capsys, cfg, field):
    code = main(["classify", "--config", write_config(tmp_path, cfg)])
    assert code == 2
    assert field in capsys.readouterr().err


def test_load_config_merges_overrides():
    cfg = load_config(None, {"seed": 5})
    assert cfg.seed == 5 and cfg.T == DEFAULT_CONFIG["T"]
    with pytest.raises(ConfigError):
        load_config(None, {"seed": "five"})


def test_missing_config_file(tmp_path, capsys):
    assert main(["zeta", "--config", str(tmp_path / "nope.json")]) == 1


def test_verify_subset(capsys):
    code, out = run_json(capsys, ["verify", "--only", "4", "7"])
    assert code == 0
    assert out["all_passed"]
    assert [r["number"] for r in out["criteria"]] == [4, 7]

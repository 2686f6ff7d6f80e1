import json
import math

import numpy as np
import pytest

from sivending import cli
from sivending.acceptance import Check
from sivending.documents import BUNDLED, DocumentError, bundled, dumps, from_dict, loads
from sivending.figures import fig3, fig5, fig7

FAST = ["--restarts", "1"]

ZS_DOC = {
    "name": "zs",
    "mode": "decoder",
    "p_x": [0.5, 0.5],
    "p_y_given_xa": [[[1, 0], [0.5, 0.5]], [[0.5, 0.5], [0, 1]]],
    "rho": [[0, 1], [1, 0]],
    "lambda": [0, 1],
    "d": 0.0,
    "c": [0.0, 1.0],
}


def hb(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def csv_rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


@pytest.mark.parametrize("name", BUNDLED)
def test_document_round_trip(name):
    doc = bundled(name)
    again = loads(dumps(doc))
    assert dumps(again) == dumps(doc)
    assert (again.mode, again.d, again.c) == (doc.mode, doc.d, doc.c)
    if doc.spec is not None:
        np.testing.assert_array_equal(again.spec.source_model.w, doc.spec.source_model.w)


def test_row_not_summing_to_one_is_named():
    bad = json.loads(json.dumps(ZS_DOC))
    bad["p_y_given_xa"][0][1] = [0.5, 0.3]
    with pytest.raises(DocumentError, match=r"p_y_given_xa\[0\]\[1\] sums to 0\.8"):
        from_dict(bad)


def test_small_rounding_is_renormalised(caplog):
    doc = json.loads(json.dumps(ZS_DOC))
    doc["p_x"] = [0.5, 0.5 + 5e-7]
    assert abs(from_dict(doc).spec.px.mass.sum() - 1.0) < 1e-15
    assert "renormalised" in caplog.text


def test_json_syntax_error_reports_position():
    with pytest.raises(DocumentError, match=r"line 2, column"):
        loads('{"mode": "decoder",\n "p_x": [0.5 0.5]}')


@pytest.mark.parametrize("patch, field", [({"mode": "telepathy"}, "mode"), ({"lambda": [0, 1, 2]}, "p_y_given_xa"),
                                          ({"c": [1.0, 0.0]}, "ascending"), ({"solver": {"speed": 9}}, "speed"),
                                          ({"p_x": [-0.5, 1.5]}, "negative")])
def test_document_validation(patch, field):
    with pytest.raises(DocumentError, match=field):
        from_dict({**ZS_DOC, **patch})


def test_unknown_bundled_name():
    with pytest.raises(DocumentError):
        bundled("nope")


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_instances_solve(name, capsys):
    assert cli.main(["solve", name, *FAST]) == 0
    out = capsys.readouterr().out
    header, rows = csv_rows(out)
    assert header[:2] == ["d", "c"] and rows
    assert "infeasible" not in out
    assert "# instance: " + name in out


def test_solve_values_and_json(capsys):
    assert cli.main(["solve", "zs_lossless", "--format", "json", *FAST]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["columns"][:3] == ["d", "c", "rate"]
    assert data["rows"][0][2] == pytest.approx(0.678072, abs=1e-5)


def test_solve_markov_value(capsys):
    assert cli.main(["solve", "markov_bsc", "--d", "0.05", "--c", "1"]) == 0
    _, rows = csv_rows(capsys.readouterr().out)
    assert float(rows[0][2]) == pytest.approx(hb(0.11) - hb(0.05), abs=1e-6)


def test_solve_is_deterministic(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["solve", "zs_cost", "--seed", "3", *FAST, "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_infeasible_points_are_marked(tmp_path, capsys):
    doc = {**ZS_DOC, "lambda": [0.2, 1.0], "c": [0.1, 1.0]}
    path = tmp_path / "doc.json"
    path.write_text(json.dumps(doc))
    assert cli.main(["solve", str(path), *FAST]) == 0
    _, rows = csv_rows(capsys.readouterr().out)
    assert rows[0][2] == "infeasible" and rows[1][2] != "infeasible"


def test_bad_input_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["solve", str(path)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert cli.main(["solve", str(tmp_path / "missing.json")]) == 2


def test_validate_exit_codes(monkeypatch, capsys):
    passing = [Check(1, "t", True, "", "")]
    monkeypatch.setattr(cli, "run_acceptance", lambda cfg, quick, echo: passing)
    assert cli.main(["validate", "--quick"]) == 0
    monkeypatch.setattr(cli, "run_acceptance", lambda cfg, quick, echo: passing + [Check(2, "u", False, "", "")])
    assert cli.main(["validate"]) == 1
    assert "1/2 criteria passed" in capsys.readouterr().out


def test_figure_command(capsys):
    assert cli.main(["figure", "fig7", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["columns"][0] == "d" and len(data["rows"]) == 50


def test_fig3_gap_at_half():
    _, rows = fig3(deltas=(0.5,))
    delta, gap, best, greedy = rows[0]
    assert greedy == pytest.approx(hb(1 / 3) * 0.75, abs=1e-9)
    assert gap == pytest.approx(0.01065, abs=1e-4)


def test_fig5_endpoints_and_convexity():
    _, rows = fig5(costs=(0.0, 0.5, 1.0))
    r0, rm, r1 = (r[1] for r in rows)
    assert r0 == pytest.approx(1 - hb(0.25), abs=1e-9)
    assert r1 == pytest.approx(0.0, abs=1e-12)
    assert rm < rows[1][2] - 1e-3


def test_fig7_matches_closed_form():
    cols, rows = fig7(distortions=(0.1, 0.2), costs=(0.0, 1.0))
    assert cols == ("d", "c=0", "c=1")
    assert rows[0][1] == pytest.approx(0.5 * math.log2(1 / (2 * 0.1)))
    assert rows[0][2] == pytest.approx(max(0.5 * math.log2(1 / (5 * 0.1)), 0.0))
    assert rows[1][2] == 0.0

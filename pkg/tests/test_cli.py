import json

import pytest

from hceclass.cli import main
from hceclass.formatting import parse, to_string


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _strings(node):
    if isinstance(node, dict):
        for v in node.values():
            yield from _strings(v)
    elif isinstance(node, list):
        for v in node:
            yield from _strings(v)
    elif isinstance(node, str):
        yield node


@pytest.mark.parametrize("cmd", ["commutator-table", "adjoint-table", "killing-form"])
def test_clean_tables_exit_zero(capsys, cmd):
    code, out, _ = run(capsys, cmd)
    assert code == 0
    assert "Y6" in out


@pytest.mark.parametrize("cmd", ["commutator-table", "killing-form", "optimal-system", "flows"])
def test_json_round_trip(capsys, cmd):
    _, out, _ = run(capsys, cmd, "--format", "json")
    data = json.loads(out)
    assert set(data) == {"stage", "basis", "tables", "deviations"}
    assert json.loads(json.dumps(data)) == data
    for b in data["basis"]:
        for text in b["coefficients"].values():
            assert to_string(parse(text)) == text


def test_basis_coefficients_pinned(capsys):
    _, out, _ = run(capsys, "killing-form", "--format", "json")
    y4 = json.loads(out)["basis"][3]["coefficients"]
    assert y4 == {"t": "2*t", "x": "x", "H": "-2*H"}


def test_normalize(capsys):
    code, out, _ = run(capsys, "normalize", "--vector", "5,0,0,1,0,1", "--format", "json")
    assert code == 0
    nf = json.loads(out)["tables"]["normal_form"]
    assert nf["representative"] == "A17"


@pytest.mark.parametrize("argv", [
    ["normalize", "--vector", "1,2"],
    ["normalize", "--vector", "a,b,c,d,e,f"],
    ["normalize", "--vector", "0,0,0,0,0,0"],
    ["normalize"],
    ["invariants", "--z", "24"],
    ["classify", "--alpha", "1.5"],
    ["symmetries", "--degree", "-1"],
    ["no-such-command"],
    [],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_bad_seed_is_usage_error(capsys, monkeypatch):
    monkeypatch.setenv("HCECLASS_SEED", "x12")
    code, _, err = run(capsys, "commutator-table")
    assert code == 2 and "HCECLASS_SEED" in err


def test_invariants_single(capsys):
    code, out, _ = run(capsys, "invariants", "--z", "4", "--format", "json")
    rows = json.loads(out)["tables"]["invariants"]
    assert rows[0]["no_invariant_equation"]
    assert code == 0


def test_classify_latex_row(capsys):
    code, out, _ = run(capsys, "classify", "--row", "1", "--format", "latex")
    assert code == 0
    assert out.count("&") == 4


def test_symmetries_text(capsys):
    code, out, _ = run(capsys, "symmetries", "--degree", "1")
    assert "X1 = d_t" in out


def test_strict_lists_misprints(capsys):
    code, out, _ = run(capsys, "symmetries", "--strict", "--format", "json")
    ids = [d["id"] for d in json.loads(out)["deviations"]]
    assert code == 1 and "characteristic/Q" in ids

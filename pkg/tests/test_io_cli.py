import json
import subprocess
import sys
from fractions import Fraction

import pytest

from gerbekit import io
from gerbekit.cli import main
from gerbekit.cochains import Q, Z
from gerbekit.errors import NotACocycleError, ParseError, ReferenceError_
from gerbekit.homology import cohomology


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_empty_workspace():
    ws = io.load([])
    assert len(ws) == 0
    assert all(ws.names(s) == [] for s in io.SECTIONS)


def test_single_corpus_file():
    ws = io.load([io.corpus_path("bz2.json")])
    assert ws.names("groupoids") == ["Z2"]
    assert ws.kind_of("bz2-half") == "gerbes"


def test_dangling_reference_names_offender(tmp_path, capsys):
    doc = {"schema": 1, "spaces": {"lost": {"type": "nerve", "groupoid": "nowhere", "truncation": 3}}}
    path = write(tmp_path, "bad.json", doc)
    with pytest.raises(ReferenceError_, match="nowhere"):
        io.load([path]).get("spaces", "lost")
    code, _, err = run_cli(capsys, "validate", "--no-corpus", "-f", path)
    assert code == 3 and "nowhere" in err


@pytest.mark.parametrize("text", ["{not json", json.dumps({"schema": 1, "spaces": {"x": {"type": "warp"}}}),
                                  json.dumps({"schema": 2})])
def test_parse_errors_exit_2(tmp_path, capsys, text):
    path = write(tmp_path, "broken.json", text)
    with pytest.raises(ParseError):
        io.load([path])
    code, _, _ = run_cli(capsys, "validate", "--no-corpus", "-f", path)
    assert code == 2


def test_invalid_gerbe_rejected_on_load():
    doc = {"schema": 1, "groupoids": {"Z2": {"type": "cyclic", "order": 2}},
           "spaces": {"b": {"type": "nerve", "groupoid": "Z2", "truncation": 4}},
           "gerbes": {"g": {"space": "b", "values": [[[[0, 1]], 2, "1/3"]]}}}
    with pytest.raises(NotACocycleError):
        io.loads(json.dumps(doc)).get("gerbes", "g")


def test_workspace_roundtrip(corpus):
    text = io.dumps(io.workspace_to_json(corpus))
    again = io.loads(text)
    for section in io.SECTIONS:
        assert corpus.names(section) == again.names(section)
        for name in corpus.names(section):
            assert again.get(section, name) == corpus.get(section, name), (section, name)
    assert io.dumps(io.workspace_to_json(again)) == text


def test_cochain_rows_roundtrip(corpus):
    c = corpus.get("cochains", "heisenberg-dd")
    rows = io.cochain_to_rows(c)
    assert io.cochain_from_rows(c.space, c.ring, c.degree, rows) == c


def test_cohomology_command(capsys):
    code, out, _ = run_cli(capsys, "cohomology", "--space", "bz2", "--ring", "Z", "--degree", "2")
    assert code == 0
    report = json.loads(out)
    assert report["free_rank"] == 0 and report["torsion"] == [2]


def test_dimension_and_dd_commands(capsys):
    code, out, _ = run_cli(capsys, "dimension", "--space", "circle-id")
    assert code == 0 and json.loads(out)["dimension"] == 1
    code, out, _ = run_cli(capsys, "dd", "--gerbe", "heisenberg")
    assert code == 0 and json.loads(out)["coordinates"] == [1]


def test_extension_command(capsys):
    code, out, _ = run_cli(capsys, "extension", "--gerbe", "bz2-half")
    report = json.loads(out)
    assert code == 0 and report["order"] == 4 and report["cyclic"]


def test_holonomy_of_non_flat_gerbe_exits_1(capsys):
    code, out, err = run_cli(capsys, "holonomy", "--gerbe", "heisenberg")
    assert code == 1
    assert json.loads(out)["error"] == "NotFlatError"


def test_non_integral_prequantization_exits_1(tmp_path, capsys, corpus):
    X = corpus.get("spaces", "s2-id")
    half = cohomology(X, Z, 2).generators[0].cast(Q) * Fraction(1, 2)
    doc = {"schema": 1, "cochains": {"half": io.cochain_to_json(half, "s2-id")}}
    path = write(tmp_path, "half.json", doc)
    code, out, _ = run_cli(capsys, "prequantize-bundle", "-f", path, "--cochain", "half")
    assert code == 1
    assert json.loads(out)["error"] == "NonIntegralClassError"


def test_out_file_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target in (a, b):
        code, _, _ = run_cli(capsys, "morita-compare", "--morphism", "hexagon-refinement", "--ring", "QmodZ",
                             "--max-degree", "2", "--out", str(target))
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    assert report


def test_tau_exactness_command(capsys):
    code, out, _ = run_cli(capsys, "tau-exactness", "--space", "bz2", "--n", "2")
    assert code == 0 and json.loads(out)["exact"] is True


def test_console_script_version():
    proc = subprocess.run([sys.executable, "-m", "gerbekit.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout


def test_corpus_report(capsys):
    code, out, _ = run_cli(capsys, "corpus-report")
    assert code == 0
    report = json.loads(out)
    assert report["gerbes"]["heisenberg"]["flat"] is False
    assert report["bundles"]["bz3-character"]["group"] == "Z/3"

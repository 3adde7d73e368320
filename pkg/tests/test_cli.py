import json

import pytest

from nctopos.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def write_json(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


K2 = {
    "at": {"V": ["u", "v"], "E": ["euu", "euv", "evu", "evv"]},
    "act": {"s": {"euu": "u", "euv": "u", "evu": "v", "evv": "v"},
            "t": {"euu": "u", "euv": "v", "evu": "u", "evv": "v"}},
}


def test_validate_builtin(capsys):
    code, rep = run(capsys, "validate")
    assert code == 0 and rep["ok"]


def test_validate_missing_file(capsys):
    code, rep = run(capsys, "validate", "--site", "/no/such/file.json")
    assert code == 2 and not rep["ok"]


def test_validate_broken_site(capsys, tmp_path):
    path = write_json(tmp_path, "broken.json", {
        "objects": ["A"],
        "arrows": [{"id": "e", "dom": "A", "cod": "A"}],
        "compose": {},  # missing e∘e
    })
    code, rep = run(capsys, "validate", "--site", path)
    assert code == 2
    assert "MissingComposite" in rep["error"]


def test_omega(capsys):
    code, rep = run(capsys, "omega")
    assert code == 0
    assert rep["sieve_counts"] == {"V": 2, "E": 5}


def test_enumerate_lt(capsys):
    code, rep = run(capsys, "enumerate-lt")
    assert code == 0 and rep["count"] == 4
    assert sorted(t["name"] for t in rep["topologies"]) == ["J1", "J2", "J3", "J4"]
    assert all(t["roundtrip_ok"] for t in rep["topologies"])


def test_build_classifier(capsys):
    code, rep = run(capsys, "build-classifier")
    assert code == 0 and rep["ok"]
    assert rep["sizes"] == {"V": 2, "E": 13}
    assert rep["tops"] == {"V": 1, "E": 4}


def test_build_classifier_unfused(capsys):
    code, rep = run(capsys, "build-classifier", "--fuse", "none")
    assert code == 0 and rep["sizes"] == {"V": 2, "E": 17}
    assert rep["tops"] == {"V": 1, "E": 8}


def test_enumerate_nclt(capsys):
    code, rep = run(capsys, "enumerate-nclt")
    assert code == 0 and rep["count"] == 16
    names = [t["name"] for t in rep["topologies"]]
    assert names[0] == "nclt:0000" and names[-1] == "nclt:1111"


def test_derive_ncgt(capsys):
    code, rep = run(capsys, "derive-ncgt", "--topology", "nclt:0110")
    assert code == 0
    assert rep["cover_counts"] == {"V": 1, "E": 6}


def test_derive_ncgt_unknown(capsys):
    code, rep = run(capsys, "derive-ncgt", "--topology", "nclt:9999")
    assert code == 2


def test_check_sheaf_classical(capsys, tmp_path):
    path = write_json(tmp_path, "k2.json", K2)
    code, rep = run(capsys, "check-sheaf", "--topology", "J2", "--presheaf", path)
    assert code == 0 and rep["is_sheaf"]


def test_check_sheaf_classical_failure(capsys, tmp_path):
    doc = {"at": {"V": ["u", "v"], "E": []}, "act": {"s": {}, "t": {}}}
    path = write_json(tmp_path, "e0.json", doc)
    code, rep = run(capsys, "check-sheaf", "--topology", "J2", "--presheaf", path)
    assert code == 1 and not rep["is_sheaf"]
    assert rep["witness"]["extensions"] == 0


def test_check_sheaf_slice(capsys, tmp_path):
    doc = {"vertices": ["x"],
           "edges": [{"id": "l", "src": "x", "dst": "x", "color": "ba"}]}
    path = write_json(tmp_path, "loop.json", doc)
    code, rep = run(capsys, "check-sheaf", "--topology", "nclt:1111",
                    "--presheaf", path)
    assert code == 0 and rep["is_sheaf"]


def test_check_sheaf_slice_t_rejected(capsys, tmp_path):
    doc = {"vertices": ["x"], "edges": [
        {"id": f"l{c}", "src": "x", "dst": "x", "color": c}
        for c in ("aa", "ab", "ba", "bb")]}
    path = write_json(tmp_path, "four.json", doc)
    code, rep = run(capsys, "check-sheaf", "--topology", "nclt:1111",
                    "--presheaf", path)
    assert code == 1 and not rep["is_sheaf"]


def test_enumerate_sheaves(capsys):
    code, rep = run(capsys, "enumerate-sheaves", "--topology", "nclt:1111")
    assert code == 0 and rep["count"] == 5


def test_terminal_search_nc(capsys):
    code, rep = run(capsys, "terminal-search", "--topology", "nclt:1111")
    assert code == 0 and rep["status"] == "no_terminal"
    assert len(rep["certificate"]) == 2
    colors = {e["color"] for s in rep["certificate"] for e in s["edges"]}
    assert len(colors) == 2


def test_terminal_search_j4(capsys):
    code, rep = run(capsys, "terminal-search", "--topology", "J4")
    assert code == 0 and rep["status"] == "terminal"


def test_export_dot(capsys, tmp_path):
    out = str(tmp_path / "dots")
    code, rep = run(capsys, "export-dot", "--dot", out)
    assert code == 0
    assert "H_E.dot" in rep["written"]
    assert (tmp_path / "dots" / "H_E.dot").exists()


def test_topology_from_file(capsys, tmp_path):
    doc = {"type": "grothendieck", "covers": {
        "V": [["id_V"]],
        "E": [["id_E", "s", "t"], ["s", "t"]],
    }}
    top = write_json(tmp_path, "j2.json", doc)
    k2 = write_json(tmp_path, "k2.json", K2)
    code, rep = run(capsys, "check-sheaf", "--topology", top, "--presheaf", k2)
    assert code == 0 and rep["is_sheaf"]


def test_unknown_topology_name(capsys):
    code, rep = run(capsys, "check-sheaf", "--topology", "J9")
    assert code == 2


def test_demo_is_deterministic(capsys):
    code1, rep1 = run(capsys, "demo")
    code2, rep2 = run(capsys, "demo")
    assert code1 == code2 == 0
    assert rep1 == rep2
    assert rep1["lawvere_count"] == 4
    assert rep1["nclt_count"] == 16
    assert rep1["classifier"]["fused"] == {"V": 2, "E": 13}
    assert rep1["sheaves"]["nclt:1111"]["terminal"] == "no_terminal"

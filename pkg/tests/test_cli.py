import csv
import hashlib
import json
import subprocess
import sys

import pytest

from ontocomply import cli
from ontocomply.cli import main
from ontocomply.crossalign import AlignmentSet
from ontocomply.embeddings import EmbeddingTable
from ontocomply.mismatch import read_answer_key
from ontocomply.rdf import load

SMALL = ["--walks", "2", "--walk-length", "6", "--dim", "8", "--epochs", "1"]


@pytest.fixture()
def paths(data_dir):
    d = data_dir
    return {
        "mkg": str(d / "mismatch_kg.nt"), "brick": str(d / "brick.ttl"), "rec": str(d / "rec.ttl"),
        "kg1": str(d / "brick_building.ttl"), "kg2": str(d / "rec_building.ttl"),
        "vectors": str(d / "vectors.txt"), "truth": str(d / "ground_truth.tsv"),
        "frag": d / "fragments",
    }


def digest(folder):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(folder.iterdir())}


def test_missing_file_exits_2_without_outputs(tmp_path, paths, capsys):
    out = tmp_path / "o"
    assert main(["check", str(tmp_path / "nope.ttl"), paths["brick"], "--out", str(out)]) == 2
    assert not out.exists()
    assert "no such file" in capsys.readouterr().err


def test_bad_option_value_exits_2(tmp_path, paths):
    assert main(["embed", paths["kg1"], "--dim", "0", "--out", str(tmp_path / "o")]) == 2
    assert main(["check", paths["mkg"], paths["brick"], "--max-level", "5", "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_internal_error_exits_1(tmp_path, paths, monkeypatch):
    def boom(args, outputs):
        outputs.text("partial.txt", "x")
        raise RuntimeError("boom")

    monkeypatch.setitem(cli.COMMANDS, "check", boom)
    out = tmp_path / "o"
    assert main(["check", paths["mkg"], paths["brick"], "--out", str(out)]) == 1
    assert not out.exists()


def test_check_level_one(tmp_path, paths):
    out = tmp_path / "o"
    assert main(["check", paths["mkg"], paths["brick"], "--max-level", "1", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["reshaped"]["confidence"] == 1.0
    assert report["config"]["max_level"] == 1
    rows = list(csv.DictReader((out / "matches.tsv").open(), delimiter="\t"))
    assert rows and all(r["level"] == "1" for r in rows)
    listed = report["matches"]
    assert [m["source"] for m in listed] == sorted(m["source"] for m in listed)
    assert {(m["source"], m["target"]) for m in listed} == {(r["source"], r["target"]) for r in rows}
    reshaped = load(out / "reshaped.nt", role="ontology")
    assert len(reshaped) > 0


def test_check_sweep_from_files(tmp_path, paths):
    out = tmp_path / "o"
    assert main(["check", paths["mkg"], paths["brick"], "--vectors", paths["vectors"], "--sweep", "--out", str(out)]) == 0
    levels = json.loads((out / "sweep.json").read_text())["levels"]
    assert [lv["max_level"] for lv in levels] == [1, 2, 3, 4]
    rates = [lv["reshaped"]["matching_rate"] for lv in levels]
    assert rates == sorted(rates)
    assert all(lv["reshaped"]["used_entity_rate"] > lv["original"]["used_entity_rate"] for lv in levels)
    rows = list(csv.DictReader((out / "sweep.csv").open()))
    assert len(rows) == 8
    assert [float(r["matching_rate"]) for r in rows if r["scope"] == "reshaped"] == rates
    assert (out / "sweep.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert len((out / "sweep.txt").read_text().splitlines()) == 10


def test_check_json_summary(tmp_path, paths, capsys):
    assert main(["check", paths["mkg"], paths["brick"], "--format", "json", "--out", str(tmp_path / "o")]) == 0
    assert "reshaped" in json.loads(capsys.readouterr().out)


def test_config_overrides_flags(tmp_path, paths):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"max-level": 1, "heuristic_threshold": 0.9}))
    out = tmp_path / "o"
    assert main(["check", paths["mkg"], paths["brick"], "--max-level", "4", "--config", str(cfg), "--out", str(out)]) == 0
    c = json.loads((out / "report.json").read_text())["config"]
    assert c["max_level"] == 1 and c["heuristic_threshold"] == 0.9
    for bad in ({"walks": 3}, {"max_level": 9}, {"heuristic_threshold": 2}, [1]):
        cfg.write_text(json.dumps(bad))
        assert main(["check", paths["mkg"], paths["brick"], "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()


def test_align_identical_inputs(tmp_path, paths):
    out = tmp_path / "o"
    args = ["align", paths["kg1"], paths["brick"], paths["kg1"], paths["brick"], "--vectors", paths["vectors"],
            "--model", "deepwalk", "--out", str(out)] + SMALL
    assert main(args) == 0
    al = AlignmentSet.read(out / "alignment.tsv")
    assert al.pairs and not al.predicted
    assert all(p.origin == "direct" and p.left == p.right for p in al.pairs)
    report = json.loads((tmp_path / "o" / "confidence.json").read_text())
    assert len(report["mu_cmatch"]) == len(al.pairs)
    sub = tmp_path / "c"
    assert main(["check", paths["kg1"], paths["brick"], "--vectors", paths["vectors"], "--out", str(sub)]) == 0
    kept = {t.subject for t in load(sub / "reshaped.nt").triples if t.subject.is_iri}
    assert kept <= {p.left for p in al.pairs}


def test_align_eval_shape_and_determinism(tmp_path, paths):
    args = ["align", paths["kg1"], paths["brick"], paths["kg2"], paths["rec"], "--vectors", paths["vectors"],
            "--eval", paths["truth"], "--seeds", "2"] + SMALL
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert digest(tmp_path / "a") == digest(tmp_path / "b")
    ev = json.loads((tmp_path / "a" / "eval.json").read_text())
    assert ev["seeds"] == [0, 1]
    cells = [(m, v, k) for m in ev["table"] for v in ev["table"][m] for k in ev["table"][m][v]]
    assert len(cells) == 18
    assert {c[0] for c in cells} == {"deepwalk", "node2vec", "struc2vec"}
    table = EmbeddingTable.read(tmp_path / "a" / "embeddings.txt")
    assert table.dim == 8
    AlignmentSet.read(tmp_path / "a" / "alignment.tsv")
    conf = json.loads((tmp_path / "a" / "confidence.json").read_text())
    assert conf["unbridged"] is False and len(conf["mu_within"]) == 2


def test_fragments_trio(tmp_path, paths):
    maps = [str(paths["frag"] / f"{n}.tsv") for n in ("brick", "rec", "bot_saref_sosa")]
    args = ["fragments", paths["kg1"], *maps, "--seeds", "2", "--levels", "1,2"] + SMALL
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert digest(tmp_path / "a") == digest(tmp_path / "b")
    crit = json.loads((tmp_path / "a" / "criteria.json").read_text())
    keyed = sorted(crit, key=lambda n: (-min(crit[n].values()), -sum(crit[n].values()) / len(crit[n]), n))
    sel = json.loads((tmp_path / "a" / "selection.json").read_text())
    assert sel["winner"] == keyed[0]
    acc = json.loads((tmp_path / "a" / "accuracy.json").read_text())
    assert set(acc) == set(crit) and all(set(v) == {"1", "2"} for v in acc.values())
    rows = list(csv.DictReader((tmp_path / "a" / "accuracy.csv").open()))
    assert len(rows) == 6 and all(0.0 <= float(r["mean"]) <= 1.0 for r in rows)


def test_fragments_single_mapping(tmp_path, paths):
    out = tmp_path / "o"
    assert main(["fragments", paths["kg1"], str(paths["frag"] / "rec.tsv"), "--seeds", "1", "--levels", "1",
                 "--out", str(out)] + SMALL) == 0
    assert json.loads((out / "selection.json").read_text())["winner"] == "rec"


def test_fragments_malformed_mapping(tmp_path, paths, capsys):
    bad = tmp_path / "bad.tsv"
    bad.write_text("http://a.org/x\thttp://b.org/x\nbroken line without tab\n")
    (tmp_path / "bad.ttl").write_text("<http://b.org/x> <http://b.org/x> <http://b.org/x> .\n")
    out = tmp_path / "o"
    assert main(["fragments", paths["kg1"], str(bad), "--out", str(out)]) == 2
    assert "bad.tsv:2" in capsys.readouterr().err
    assert not out.exists()


def test_gen_fixture_reproduces_bundle(tmp_path, paths, data_dir):
    out = tmp_path / "o"
    args = ["gen-fixture", paths["brick"], "--exact", "6", "--typo", "4", "--synonym", "3", "--structural", "2",
            "--seed", "21", "--vectors", paths["vectors"], "--synonyms", str(data_dir / "synonyms.tsv"),
            "--out", str(out)]
    assert main(args) == 0
    assert (out / "mismatch_kg.nt").read_bytes() == (data_dir / "mismatch_kg.nt").read_bytes()
    assert read_answer_key(out / "mismatch_key.tsv") == read_answer_key(data_dir / "mismatch_key.tsv")
    assert json.loads((out / "fixture.json").read_text())["plants"] == 15


def test_embed_outputs(tmp_path, paths):
    args = ["embed", paths["kg1"], "--dump-walks", "--reify", "--model", "node2vec", "--p", "0.5"] + SMALL
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert digest(tmp_path / "a") == digest(tmp_path / "b")
    table = EmbeddingTable.read(tmp_path / "a" / "embeddings.txt")
    walks = (tmp_path / "a" / "walks.txt").read_text().splitlines()
    assert len(walks) == 2 * len(table)
    training = json.loads((tmp_path / "a" / "training.json").read_text())
    assert len(training["loss_history"]) == 1 and training["config"]["p"] == 0.5


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "ontocomply", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "0.1.0" in r.stdout
    r = subprocess.run([sys.executable, "-m", "ontocomply", "check"], capture_output=True, text=True)
    assert r.returncode == 2

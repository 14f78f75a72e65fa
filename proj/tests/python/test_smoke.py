import json
import math
import os
import subprocess

import pytest

import tala


def test_metrics():
    kappa = tala.cohen_kappa(["PER", "O", "O", "LOC"], ["PER", "O", "LOC", "LOC"])
    assert kappa == pytest.approx(7 / 11, abs=1e-12)
    assert tala.pairwise_f1_no_o(["B-PER", "O", "O", "B-LOC"], ["B-PER", "O", "B-LOC", "B-LOC"]) == pytest.approx(0.8)
    p, r, f = tala.span_prf([(0, 2, "PER")], [(0, 2, "PER"), (3, 4, "LOC")])
    assert (p, r) == (0.5, 1.0)
    assert f == pytest.approx(2 / 3)
    mean, std = tala.aggregate_trials([1, 2, 3, 4, 5])
    assert mean == 3 and std == pytest.approx(math.sqrt(2.5), abs=1e-12)
    report = tala.iaa_report([["PER", "O"], ["PER", "O"], ["O", "O"]])
    assert len(report["pairs"]) == 3


def test_text_helpers():
    assert tala.tokenize("Ako si Juan.") == ["Ako", "si", "Juan", "."]
    assert tala.hash32("", 0) == 0
    assert tala.hash32("aso", 1) == 4006277061
    assert tala.spans_to_biluo(4, [(0, 2, "PER")]) == ["B-PER", "L-PER", "O", "O"]
    assert tala.biluo_to_spans(["O", "U-LOC"]) == [(1, 2, "LOC")]
    with pytest.raises(tala.DataError):
        tala.biluo_to_spans(["I-PER"])


def test_convert_and_config_errors():
    iob = "Juan\tB-PER\nCruz\tI-PER\n.\tO\n"
    record = json.loads(tala.convert(iob, "iob", "jsonl"))
    assert record["tokens"] == ["Juan", "Cruz", "."]
    assert record["ents"] == [{"start": 0, "end": 2, "label": "PER"}]
    with pytest.raises(tala.ConfigError):
        tala.normalize_config("[training]\nbogus = 1\n")
    with pytest.raises(tala.Error):
        tala.load("no-such-model", "/nonexistent")


def small_config(data, output):
    return f"""
[paths]
treebank = {data}/treebank.conllu
ner_train = {data}/ner.iob
textcat_train = {data}/textcat.jsonl
output = {output}

[components.tok2vec]
width = 16
embed_width = 16
depth = 1
rows = 200,50,100,50

[components.textcat]
enabled = true
buckets = 512

[training]
epochs = 3
"""


def test_train_load_apply(tmp_path):
    data = tmp_path / "data"
    tala.write_toy_corpus(str(data), 20, 1)
    model = tmp_path / "model"
    report = tala.train(small_config(data, model))
    assert set(report) >= {"tagger", "parser", "ner", "textcat"}

    nlp = tala.load(model)
    assert nlp.components == ["tagger", "parser", "ner", "textcat"]
    doc = nlp("Ako si Juan de la Cruz.")
    assert len(doc["tokens"]) >= 7
    assert len(doc["upos"]) == len(doc["tokens"])
    assert sum(doc["cats"].values()) == pytest.approx(1.0)
    assert nlp("")["tokens"] == []

    copy = tmp_path / "copy"
    nlp.save(copy)
    assert tala.load(copy)("Pumunta si Ana sa Cebu.") == nlp("Pumunta si Ana sa Cebu.")

    scores = nlp.evaluate(treebank=data / "treebank.conllu", ner=data / "ner.iob")
    assert 0.0 <= scores["tagger.acc"]["mean"] <= 1.0
    assert "convention" in scores["ner.f1"]


def test_cli_predict(tmp_path):
    cli = os.environ.get("TALA_CLI")
    if not cli:
        pytest.skip("TALA_CLI not set")
    data = tmp_path / "data"
    subprocess.run([cli, "toy-corpus", "-o", str(data), "-n", "15"], check=True)
    cfg = tmp_path / "run.cfg"
    cfg.write_text(small_config(data, tmp_path / "model"))
    subprocess.run([cli, "--config", str(cfg), "train"], check=True, capture_output=True)
    out = subprocess.run([cli, "predict", str(tmp_path / "model")], input="Kumain si Ana.\n",
                         check=True, capture_output=True, text=True)
    doc = json.loads(out.stdout.splitlines()[0])
    assert doc["tokens"] == ["Kumain", "si", "Ana", "."]
    bad = subprocess.run([cli, "--config", str(tmp_path / "missing.cfg"), "train"], capture_output=True)
    assert bad.returncode == 1

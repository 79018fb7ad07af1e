import os
import shutil

import pytest

from gerner.cli import main
from gerner.conll import bio_to_spans, read_conll
from gerner.tagger import load_model
from oracles import decode_iob1
from conftest import DATA


def test_no_arguments_is_usage_error(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_missing_required_flag():
    with pytest.raises(SystemExit) as exc:
        main(["convert", "a", "b"])
    assert exc.value.code == 2


def test_convert(tmp_path):
    src = tmp_path / "in.conll"
    src.write_text("EU I-ORG\nrejects O\nGerman I-MISC\ncall O\n\nPeter I-PER\nBlackburn I-PER\n"
                   "Paris I-LOC\nB B-LOC\n")
    assert main(["convert", "--scheme", "iob1:bio", str(src), str(tmp_path / "out.conll")]) == 0
    before = read_conll(src)
    after = read_conll(tmp_path / "out.conll")
    for a, b in zip(before, after):
        assert {tuple(s) for s in bio_to_spans(b.tags)} == decode_iob1(a.tags)
    assert after.sentences[1].tags == ["B-PER", "I-PER", "B-LOC", "B-LOC"]


def test_bad_input_reports_error(tmp_path, capsys):
    src = tmp_path / "in.conll"
    src.write_text("only\n")
    assert main(["convert", "--scheme", "iob1:bio", str(src), str(tmp_path / "o")]) == 1
    assert "line 1" in capsys.readouterr().err


def test_split_merge_adapt(tmp_path, sample_path):
    cols = "form,lemma,pos,ne"
    assert main(["split", "--columns", cols, sample_path, str(tmp_path / "s")]) == 0
    sizes = [len(read_conll(tmp_path / f"s.{p}.conll", cols.split(","))) for p in ("train", "dev", "test")]
    assert sizes == [80, 10, 10]
    assert main(["merge", "--columns", cols, str(tmp_path / "m.conll"),
                 f"{tmp_path / 's.dev.conll'}=dev", f"{tmp_path / 's.test.conll'}=test"]) == 0
    assert len(read_conll(tmp_path / "m.conll", cols.split(","))) == 20
    assert main(["adapt", os.path.join(DATA, "sample_manifest.ini"), str(tmp_path / "ad")]) == 0
    assert len(read_conll(tmp_path / "ad" / "train.conll", cols.split(","))) == 80


def test_normalize_embed_train_tag_eval(tmp_path, sample_path, capsys):
    norm = tmp_path / "corpus.txt"
    assert main(["normalize", "--mode", "annotated", "--variant", "lemma", sample_path, str(norm)]) == 0
    assert len(norm.read_text().splitlines()) == 100
    emb = tmp_path / "emb.txt"
    assert main(["embed", "--dim", "10", "--window", "2", "--min-count", "1", "--epochs", "2",
                 "--variant", "lemma", str(norm), str(emb)]) == 0
    model = tmp_path / "model.bin"
    cols = "form,lemma,pos,ne"
    assert main(["train", "--train", sample_path, "--dev", sample_path, "--embeddings", str(emb),
                 "--columns", cols, "--variant", "lemma", "--epochs", "2", "--word-dim", "10",
                 "--model", str(model)]) == 0
    assert load_model(model).config["variant"] == "lemma"
    out = tmp_path / "tagged.conll"
    assert main(["tag", "--model", str(model), sample_path, str(out)]) == 0
    tagged = read_conll(out, cols.split(","))
    assert [s.forms for s in tagged] == [s.forms for s in read_conll(sample_path, cols.split(","))]
    capsys.readouterr()
    assert main(["eval", "--columns", cols, str(out), sample_path]) == 0
    assert "processed" in capsys.readouterr().out


def test_train_rejects_variant_mismatch(tmp_path, sample_path, capsys):
    emb = tmp_path / "emb.txt"
    raw = os.path.join(DATA, "sample_raw.txt")
    norm = tmp_path / "lower.txt"
    assert main(["normalize", raw, str(norm)]) == 0
    assert main(["embed", "--dim", "10", "--window", "2", "--min-count", "1", "--epochs", "1",
                 str(norm), str(emb)]) == 0
    code = main(["train", "--train", sample_path, "--embeddings", str(emb), "--columns",
                 "form,lemma,pos,ne", "--variant", "lemma", "--word-dim", "10",
                 "--model", str(tmp_path / "m.bin")])
    assert code == 1
    assert "variant" in capsys.readouterr().err


def test_eval_merged(tmp_path, capsys):
    f = tmp_path / "merged.txt"
    f.write_text("Merkel B-PER B-PER\nsagte O O\n")
    assert main(["eval", "--merged", str(f)]) == 0
    assert "f1=100.00" in capsys.readouterr().out


def copy_sample(tmp_path):
    for name in os.listdir(DATA):
        shutil.copy(os.path.join(DATA, name), tmp_path / name)
    return tmp_path / "sample_experiment.ini"


def test_experiment_two_seeds(tmp_path):
    spec = copy_sample(tmp_path)
    out = tmp_path / "run"
    assert main(["experiment", str(spec), "--seeds", "1,2", "--output", str(out)]) == 0
    m1, m2 = (out / "seed1" / "model.bin").read_bytes(), (out / "seed2" / "model.bin").read_bytes()
    assert m1 != m2
    agg = (out / "aggregate.txt").read_text().splitlines()
    assert len(agg) == 1 and agg[0].startswith("sample: runs=2")
    assert (out / "scores.csv").read_text().startswith("data,embeddings,features,f1_mean")


def test_experiment_rejects_mismatched_embeddings(tmp_path, capsys):
    spec = copy_sample(tmp_path)
    raw = tmp_path / "sample_raw.txt"
    assert main(["normalize", str(raw), str(tmp_path / "lower.txt")]) == 0
    assert main(["embed", "--dim", "10", "--window", "2", "--min-count", "1", "--epochs", "1",
                 "--variant", "lower", str(tmp_path / "lower.txt"), str(tmp_path / "lower.emb")]) == 0
    text = spec.read_text()
    head, _, tail = text.partition("[embeddings]")
    spec.write_text(head + "[embeddings]\npath = lower.emb\n\n[tagger]" + tail.partition("[tagger]")[2])
    assert main(["experiment", str(spec)]) == 1
    assert "variant" in capsys.readouterr().err

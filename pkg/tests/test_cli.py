import json

import pytest

from conftest import FIXTURE_PRIORS, build_pipeline_fixture
from corpusforge.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTextCommands:
    def test_normalize(self, tmp_path, capsys):
        src = tmp_path / "in.txt"
        dst = tmp_path / "out.txt"
        src.write_text("﻿a \t b\n", encoding="utf-8")
        code, _, _ = run_cli(capsys, "normalize", str(src), str(dst))
        assert code == 0
        assert dst.read_text(encoding="utf-8") == "a b\n"

    def test_detect_file(self, tmp_path, capsys):
        path = tmp_path / "doc.txt"
        path.write_text("The committee will meet again on Thursday.\n",
                        encoding="utf-8")
        code, out, _ = run_cli(capsys, "detect", str(path))
        assert code == 0
        assert out.strip() == "en"

    def test_detect_string(self, capsys):
        code, out, _ = run_cli(capsys, "detect", "tá fáilte romhat agus maith",
                               "--string")
        assert code == 0
        assert out.startswith("ga\t")

    def test_split_sents(self, tmp_path, capsys):
        path = tmp_path / "doc.txt"
        path.write_text("Dr. Smith arrived. He left.\n", encoding="utf-8")
        code, out, _ = run_cli(capsys, "split-sents", str(path), "--lang", "en")
        assert code == 0
        assert out.splitlines() == ["Dr. Smith arrived.", "He left."]

    def test_train_profile(self, tmp_path, capsys):
        src = tmp_path / "mono.txt"
        src.write_text("the quick brown fox jumps over the lazy dog\n" * 5,
                       encoding="utf-8")
        out = tmp_path / "xx.tsv"
        code, _, _ = run_cli(capsys, "train-profile", "--input", str(src),
                             "--lang", "xx", "--output", str(out))
        assert code == 0
        assert "\t" in out.read_text(encoding="utf-8").splitlines()[0]


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        assert run_cli(capsys, "evaluate", "--hyp", "only")[0] == 1

    def test_unknown_command_is_1(self, capsys):
        assert run_cli(capsys, "frobnicate")[0] == 1

    def test_data_error_is_2(self, tmp_path, capsys):
        hyp = tmp_path / "h.txt"
        ref = tmp_path / "r.txt"
        hyp.write_text("a\nb\n", encoding="utf-8")
        ref.write_text("a\n", encoding="utf-8")
        code, _, err = run_cli(capsys, "evaluate", "--hyp", str(hyp),
                               "--ref", str(ref))
        assert code == 2
        assert "mismatch" in err


class TestEvaluate:
    def test_json_report(self, tmp_path, capsys):
        hyp = tmp_path / "h.txt"
        ref = tmp_path / "r.txt"
        hyp.write_text("the cat sat on the mat\n", encoding="utf-8")
        ref.write_text("the cat sat on the mat\n", encoding="utf-8")
        code, out, _ = run_cli(capsys, "evaluate", "--hyp", str(hyp),
                               "--ref", str(ref), "--lc")
        assert code == 0
        report = json.loads(out)
        assert report["bleu"] == pytest.approx(100.0)
        assert report["f1"] == 1.0


class TestSplitData:
    def test_outputs_six_files(self, tmp_path, capsys):
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text(
            "".join(f"src {i}\ttgt {i}\n" for i in range(20)), encoding="utf-8")
        out_dir = tmp_path / "splits"
        code, out, _ = run_cli(capsys, "split-data", "--pairs", str(pairs),
                               "--ratios", "0.8,0.1,0.1", "--seed", "3",
                               "--out-dir", str(out_dir))
        assert code == 0
        for name in ("train", "valid", "test"):
            assert (out_dir / f"{name}.src").exists()
            assert (out_dir / f"{name}.tgt").exists()
        assert len((out_dir / "train.src").read_text("utf-8").splitlines()) == 16


class TestSubwordCommands:
    def test_train_apply_detok_round_trip(self, tmp_path, capsys):
        src = tmp_path / "en.txt"
        tgt = tmp_path / "ga.txt"
        src.write_text("the cat sat\nthe dog ran\n", encoding="utf-8")
        tgt.write_text("rith an madra\nshuigh an cat\n", encoding="utf-8")
        model = tmp_path / "model.json"
        code, _, _ = run_cli(capsys, "train-subword", "--kind", "bpe",
                             "--vocab-size", "40",
                             "--src-corpus", str(src), "--tgt-corpus", str(tgt),
                             "--output", str(model))
        assert code == 0
        encoded = tmp_path / "enc.txt"
        decoded = tmp_path / "dec.txt"
        assert run_cli(capsys, "apply-subword", "--model", str(model),
                       "--input", str(src), "--output", str(encoded))[0] == 0
        assert run_cli(capsys, "detok", "--model", str(model),
                       "--input", str(encoded), "--output", str(decoded))[0] == 0
        assert decoded.read_text("utf-8") == src.read_text("utf-8")


class TestAnnotationCommands:
    def _store_with_judgements(self, tmp_path, capsys):
        corpus = tmp_path / "corpus.tsv"
        corpus.write_text(
            "".join(f"source {i}\treference {i}\n" for i in range(6)),
            encoding="utf-8")
        sys_a = tmp_path / "a.txt"
        sys_b = tmp_path / "b.txt"
        sys_a.write_text("".join(f"first cand {i}\n" for i in range(6)), "utf-8")
        sys_b.write_text("".join(f"second cand {i}\n" for i in range(6)), "utf-8")
        store = tmp_path / "store"
        code, out, _ = run_cli(capsys, "eval-set", "--corpus", str(corpus),
                               "--system", f"rnn={sys_a}",
                               "--system", f"transformer={sys_b}",
                               "-n", "2", "--seed", "5", "--store", str(store))
        assert code == 0

        from corpusforge.humaneval import SessionStore

        session_store = SessionStore(store)
        session = session_store.load("session")
        for annotator in ("a1", "a2"):
            for item in session.items:
                for label, _text in item.outputs:
                    session_store.append_record({
                        "session": "session", "segment_id": item.segment_id,
                        "blind_label": label, "annotator": annotator,
                        "kind": "sqm", "level": 5,
                    })
                session_store.append_record({
                    "session": "session", "segment_id": item.segment_id,
                    "blind_label": item.outputs[0][0], "annotator": annotator,
                    "kind": "mqm", "category": "fluency",
                    "sub_category": "grammar", "severity": "minor",
                })
        return store

    def test_reports(self, tmp_path, capsys):
        store = self._store_with_judgements(tmp_path, capsys)
        code, out, _ = run_cli(capsys, "mqm-report", "--store", str(store),
                               "--session", "session")
        assert code == 0
        mqm = json.loads(out)
        assert mqm["error_counts"]["grand_total"] == 4

        code, out, _ = run_cli(capsys, "kappa", "--store", str(store),
                               "--session", "session")
        assert code == 0
        kappa = json.loads(out)
        assert kappa["kappa"]["per_error_type"]["grammar"]["po"] == 1.0

        code, out, _ = run_cli(capsys, "sqm-report", "--store", str(store),
                               "--session", "session")
        assert code == 0
        sqm = json.loads(out)
        assert all(row["pooled_mean"] == 5.0 for row in sqm["sqm"].values())


class TestGreenReportCommand:
    def test_values(self, capsys):
        code, out, _ = run_cli(capsys, "green-report", "--power", "400",
                               "--util", "0.8", "--hours", "3.51",
                               "--grid", "324")
        assert code == 0
        doc = json.loads(out)
        assert doc["kwh_display"] == 1.1
        assert doc["kwh"] == pytest.approx(1.1232)

    def test_carbon_neutral(self, capsys):
        code, out, _ = run_cli(capsys, "green-report", "--power", "400",
                               "--hours", "2.0", "--grid", "324",
                               "--carbon-neutral")
        assert json.loads(out)["kgco2"] == 0.0


class TestHpoCommand:
    def test_random_and_lockin(self, tmp_path, capsys):
        space = tmp_path / "space.json"
        space.write_text(json.dumps(
            {"dims": [{"name": "x", "values": [1, 2, 3, 4, 5]}]}), "utf-8")
        script = tmp_path / "eval.py"
        script.write_text(
            "import json, sys\n"
            "cfg = json.load(open(sys.argv[1]))\n"
            "print(-(cfg['x'] - 3) ** 2)\n", "utf-8")
        code, out, _ = run_cli(capsys, "hpo", "random", "--space", str(space),
                               "--cmd", f"python3 {script}", "--trials", "12",
                               "--seed", "1", "--log", str(tmp_path / "log.jsonl"))
        assert code == 0
        assert json.loads(out)["best"]["config"]["x"] == 3
        code, out, _ = run_cli(capsys, "hpo", "lockin", "--space", str(space),
                               "--cmd", f"python3 {script}")
        assert code == 0
        assert json.loads(out)["best"]["config"]["x"] == 3


class TestBuildCorpusCommand:
    def test_config_file_run(self, tmp_path, capsys):
        build_pipeline_fixture(tmp_path / "input")
        cfg = {
            "src_dir": str(tmp_path / "input" / "en"),
            "tgt_dir": str(tmp_path / "input" / "ga"),
            "src_lang": "en", "tgt_lang": "ga",
            "out_dir": str(tmp_path / "out"), "run_label": "cli-run",
            "align": {"bead_priors": FIXTURE_PRIORS},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg), encoding="utf-8")
        code, out, _ = run_cli(capsys, "build-corpus", "--config", str(cfg_path))
        assert code == 0
        report = json.loads(out)
        assert report["stages"]["clean"]["removal_reasons"] == {
            "empty": 1, "no-alphabetic": 1, "wrong-language": 1}
        assert (tmp_path / "out" / "corpus.tsv").exists()


class TestAlignCommands:
    def test_align_sents_stdout_and_file(self, tmp_path, capsys):
        src = tmp_path / "src.txt"
        tgt = tmp_path / "tgt.txt"
        src.write_text("aaaa bbbb cccc.\ndddd eeee ffff.\n", encoding="utf-8")
        tgt.write_text("gggg hhhh iiii.\njjjj kkkk llll.\n", encoding="utf-8")
        code, out, _ = run_cli(capsys, "align-sents", "--src", str(src),
                               "--tgt", str(tgt))
        assert code == 0
        rows = [line.split("\t") for line in out.splitlines()]
        assert [r[2] for r in rows] == ["1-1", "1-1"]
        # stdout must survive for later commands in the same process
        code2, out2, _ = run_cli(capsys, "green-report", "--power", "100",
                                 "--hours", "1.0")
        assert code2 == 0 and out2

    def test_align_docs_json(self, tmp_path, capsys):
        build_pipeline_fixture(tmp_path / "input")
        code, out, _ = run_cli(capsys, "align-docs",
                               "--src-dir", str(tmp_path / "input" / "en"),
                               "--tgt-dir", str(tmp_path / "input" / "ga"),
                               "--src-lang", "en", "--tgt-lang", "ga")
        assert code == 0
        doc = json.loads(out)
        assert len(doc["mappings"]) == 2
        assert doc["unmatched"] == []

    def test_clean_command(self, tmp_path, capsys):
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text(
            "the committee met to review the budget\t"
            "bhuail an coiste le cheile chun an buisead a phle\n"
            "\tonly target here\n",
            encoding="utf-8")
        out = tmp_path / "kept.tsv"
        removed = tmp_path / "removed.jsonl"
        code, text, _ = run_cli(capsys, "clean", "--pairs", str(pairs),
                                "--src-lang", "en", "--tgt-lang", "ga",
                                "--output", str(out), "--removed", str(removed))
        assert code == 0
        assert "kept 1, removed 1" in text
        rec = json.loads(removed.read_text("utf-8").splitlines()[0])
        assert rec["reason"] == "empty"

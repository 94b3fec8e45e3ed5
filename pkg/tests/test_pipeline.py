import json
from pathlib import Path

import pytest

from conftest import FIXTURE_PRIORS, build_pipeline_fixture
from corpusforge.align import AlignConfig
from corpusforge.errors import ConfigError
from corpusforge.pipeline import PipelineConfig, PipelineError, run_pipeline


def _config(root: Path, out: Path, fixture_priors: bool = False,
             **extra) -> PipelineConfig:
    align = (AlignConfig(bead_priors=dict(FIXTURE_PRIORS))
             if fixture_priors else AlignConfig())
    return PipelineConfig(
        src_dir=str(root / "en"),
        tgt_dir=str(root / "ga"),
        src_lang="en",
        tgt_lang="ga",
        out_dir=str(out),
        run_label="test-run",
        align=align,
        split_ratios=(0.8, 0.1, 0.1),
        split_seed=13,
        **extra,
    )


CORPUS_ARTIFACTS = (
    "corpus.tsv", "removed.jsonl",
    "train.src", "train.tgt", "valid.src", "valid.tgt", "test.src", "test.tgt",
    "report.json", "docmap.json",
)


class TestSmallestPipeline:
    def test_two_mirrored_one_line_docs(self, tmp_path):
        (tmp_path / "en").mkdir()
        (tmp_path / "ga").mkdir()
        (tmp_path / "en" / "d.txt").write_text(
            "The committee will meet again to review the annual budget.\n",
            encoding="utf-8")
        (tmp_path / "ga" / "d.txt").write_text(
            "Beidh an coiste ag bualadh le chéile arís chun an buiséad a phlé.\n",
            encoding="utf-8")
        report = run_pipeline(_config(tmp_path, tmp_path / "out"))
        assert report["stages"]["clean"]["kept"] == 1
        assert report["stages"]["clean"]["removed"] == 0
        assert "skipped" in report["stages"]["split-data"]


class TestFixturePipeline:
    @pytest.fixture()
    def fixture_root(self, tmp_path):
        planted = build_pipeline_fixture(tmp_path / "input")
        return tmp_path, planted

    def test_planted_defects_in_removal_log(self, fixture_root):
        tmp_path, planted = fixture_root
        out = tmp_path / "out"
        report = run_pipeline(_config(tmp_path / "input", out, fixture_priors=True))
        reasons = report["stages"]["clean"]["removal_reasons"]
        for reason, count in planted.items():
            assert reasons.get(reason, 0) >= count, (reason, reasons)
        removed_lines = [json.loads(line) for line in
                         (out / "removed.jsonl").read_text("utf-8").splitlines()]
        assert len(removed_lines) == report["stages"]["clean"]["removed"]
        assert all(set(rec) == {"src", "tgt", "reason"} for rec in removed_lines)

    def test_rerun_byte_identical(self, fixture_root):
        tmp_path, _ = fixture_root
        out = tmp_path / "out"
        cfg = _config(tmp_path / "input", out, fixture_priors=True)
        run_pipeline(cfg)
        first = {name: (out / name).read_bytes() for name in CORPUS_ARTIFACTS}
        run_pipeline(cfg)
        for name in CORPUS_ARTIFACTS:
            assert (out / name).read_bytes() == first[name], \
                f"{name} differs between reruns"

    def test_subword_stage(self, fixture_root):
        tmp_path, _ = fixture_root
        out = tmp_path / "out"
        cfg = _config(tmp_path / "input", out, fixture_priors=True,
                      subword_kind="bpe", subword_vocab_size=80)
        report = run_pipeline(cfg)
        assert report["stages"]["train-subword"]["kind"] == "bpe"
        assert (out / "subword-bpe.json").exists()

    def test_lock_file_blocks_concurrent_run(self, fixture_root):
        tmp_path, _ = fixture_root
        out = tmp_path / "out"
        out.mkdir()
        (out / ".test-run.lock").touch()
        with pytest.raises(ConfigError, match="in progress"):
            run_pipeline(_config(tmp_path / "input", out))

    def test_run_log_has_green_report(self, fixture_root):
        from corpusforge.greenreport import EnergyProfile

        tmp_path, _ = fixture_root
        out = tmp_path / "out"
        cfg = _config(tmp_path / "input", out,
                      green=EnergyProfile(device_max_power_w=400.0,
                                          utilization=0.8,
                                          grid_intensity_gco2_per_kwh=324.0))
        run_pipeline(cfg)
        entries = [json.loads(line) for line in
                   (out / "run.log").read_text("utf-8").splitlines()]
        assert entries[-1]["green_report"]["profile"]["device_max_power_w"] == 400.0


class TestStageErrors:
    def test_wrong_language_aborts_at_detect(self, tmp_path):
        (tmp_path / "en").mkdir()
        (tmp_path / "ga").mkdir()
        english = ("The committee will meet again on Thursday to review "
                   "the annual budget for the region.\n")
        (tmp_path / "en" / "d.txt").write_text(english, encoding="utf-8")
        (tmp_path / "ga" / "d.txt").write_text(english, encoding="utf-8")
        with pytest.raises(PipelineError) as err:
            run_pipeline(_config(tmp_path, tmp_path / "out"))
        assert err.value.stage == "detect"
        assert "normalize" in err.value.partial_report["stages"]

    def test_missing_dir_aborts_at_normalize(self, tmp_path):
        with pytest.raises(PipelineError) as err:
            run_pipeline(_config(tmp_path / "absent", tmp_path / "out"))
        assert err.value.stage == "normalize"

    def test_same_language_config_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            PipelineConfig(src_dir="a", tgt_dir="b", src_lang="en",
                           tgt_lang="en", out_dir="o")


class TestConfigFile:
    def test_round_trip_from_json(self, tmp_path):
        doc = {
            "src_dir": "in/en", "tgt_dir": "in/ga",
            "src_lang": "en", "tgt_lang": "ga",
            "out_dir": "out", "run_label": "r1",
            "split": {"ratios": [0.6, 0.2, 0.2], "seed": 3},
            "subword": {"kind": "unigram", "vocab_size": 500},
            "align": {"doc_score_threshold": 0.3},
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc), encoding="utf-8")
        cfg = PipelineConfig.load(path)
        assert cfg.split_ratios == (0.6, 0.2, 0.2)
        assert cfg.subword_kind == "unigram"
        assert cfg.align.doc_score_threshold == 0.3
        assert isinstance(cfg.align, AlignConfig)

    def test_missing_field_reports(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"src_dir": "x"}), encoding="utf-8")
        with pytest.raises(ConfigError, match="missing field"):
            PipelineConfig.load(path)

"""End-to-end corpus build: collection inputs through validated splits.

Stages run in order (normalize, detect, split-sentences, align-docs,
align-sents, clean, split-data, optional train-subword), persisting
intermediates under the output directory. Corpus artifacts are fully
deterministic for a fixed config, inputs and seed; wall-clock metadata and
the energy report go to a separate run log so reruns stay byte-identical.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from corpusforge import subword as sw
from corpusforge.align import (
    AlignConfig,
    CLEANING_REASONS,
    SentencePair,
    align_documents,
    align_sentences,
    bead_to_pair,
    clean_pairs,
)
from corpusforge.datasplit import split_corpus
from corpusforge.errors import ConfigError, CorpusForgeError, DataError
from corpusforge.greenreport import EnergyProfile, make_report
from corpusforge.humaneval import SessionStore  # noqa: F401  (re-export for gateway)
from corpusforge.textprep import (
    AbbreviationList,
    Document,
    detect_file_language,
    load_profiles,
    split_sentences,
)

PACKAGED_DATA = Path(__file__).parent / "data"


class PipelineError(CorpusForgeError):
    """A stage failure; carries the stage name and the partial report."""

    exit_code = 2

    def __init__(self, stage: str, message: str, partial_report: dict):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage
        self.partial_report = partial_report


@dataclass
class PipelineConfig:
    src_dir: str
    tgt_dir: str
    src_lang: str
    tgt_lang: str
    out_dir: str
    run_label: str = "run"
    profiles_dir: str | None = None
    abbrev_files: dict[str, str] = field(default_factory=dict)
    align: AlignConfig = field(default_factory=AlignConfig)
    clean_rules: tuple[str, ...] = CLEANING_REASONS
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    split_seed: int = 13
    subword_kind: str | None = None
    subword_vocab_size: int = 16000
    subword_seed_multiplier: int = 4
    green: EnergyProfile | None = None

    def __post_init__(self) -> None:
        if self.src_lang == self.tgt_lang:
            raise ConfigError("source and target languages must differ")

    @classmethod
    def from_dict(cls, doc: dict) -> "PipelineConfig":
        align_doc = doc.get("align", {})
        align_cfg = AlignConfig(**align_doc) if align_doc else AlignConfig()
        split = doc.get("split", {})
        subword_doc = doc.get("subword") or {}
        green_doc = doc.get("green")
        green = None
        if green_doc:
            green = EnergyProfile(
                device_max_power_w=green_doc.get("power_w", 0.0),
                utilization=green_doc.get("utilization", 0.8),
                runtime_h=green_doc.get("runtime_h", 0.0),
                grid_intensity_gco2_per_kwh=green_doc.get("grid_intensity", 0.0),
                carbon_neutral=green_doc.get("carbon_neutral", False),
            )
        try:
            return cls(
                src_dir=doc["src_dir"],
                tgt_dir=doc["tgt_dir"],
                src_lang=doc["src_lang"],
                tgt_lang=doc["tgt_lang"],
                out_dir=doc["out_dir"],
                run_label=doc.get("run_label", "run"),
                profiles_dir=doc.get("profiles_dir"),
                abbrev_files=doc.get("abbrev_files", {}),
                align=align_cfg,
                clean_rules=tuple(doc.get("clean_rules", CLEANING_REASONS)),
                split_ratios=tuple(split.get("ratios", (0.8, 0.1, 0.1))),
                split_seed=split.get("seed", 13),
                subword_kind=subword_doc.get("kind"),
                subword_vocab_size=subword_doc.get("vocab_size", 16000),
                subword_seed_multiplier=subword_doc.get("seed_multiplier", 4),
                green=green,
            )
        except KeyError as exc:
            raise ConfigError(f"pipeline config missing field {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        doc = {
            "src_dir": self.src_dir,
            "tgt_dir": self.tgt_dir,
            "src_lang": self.src_lang,
            "tgt_lang": self.tgt_lang,
            "out_dir": self.out_dir,
            "run_label": self.run_label,
            "profiles_dir": self.profiles_dir,
            "abbrev_files": dict(self.abbrev_files),
            "clean_rules": list(self.clean_rules),
            "split": {"ratios": list(self.split_ratios), "seed": self.split_seed},
            "subword": {
                "kind": self.subword_kind,
                "vocab_size": self.subword_vocab_size,
                "seed_multiplier": self.subword_seed_multiplier,
            },
        }
        return doc


def _load_abbrevs(cfg: PipelineConfig, lang: str) -> AbbreviationList | None:
    override = cfg.abbrev_files.get(lang)
    if override:
        return AbbreviationList.load(override, lang=lang)
    packaged = PACKAGED_DATA / "abbrev" / f"{lang}.txt"
    if packaged.exists():
        return AbbreviationList.load(packaged, lang=lang)
    return None


def _write_lines(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def run_pipeline(cfg: PipelineConfig) -> dict:
    """Run the full corpus build; returns the (deterministic) run report."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lock_path = out / f".{cfg.run_label}.lock"
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        os.close(fd)
    except FileExistsError:
        raise ConfigError(
            f"run {cfg.run_label!r} already in progress (lock {lock_path})"
        ) from None
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.monotonic()
    try:
        report = _run_stages(cfg, out)
    finally:
        lock_path.unlink(missing_ok=True)

    elapsed_h = (time.monotonic() - t0) / 3600.0
    run_log = {
        "run_label": cfg.run_label,
        "started_at": started,
        "finished_at": datetime.now(timezone.utc).isoformat(),
        "elapsed_hours": elapsed_h,
    }
    if cfg.green is not None:
        profile = EnergyProfile(
            device_max_power_w=cfg.green.device_max_power_w,
            utilization=cfg.green.utilization,
            runtime_h=cfg.green.runtime_h or elapsed_h,
            grid_intensity_gco2_per_kwh=cfg.green.grid_intensity_gco2_per_kwh,
            carbon_neutral=cfg.green.carbon_neutral,
        )
        run_log["green_report"] = make_report(
            profile, label=cfg.run_label,
            started_at=started, finished_at=run_log["finished_at"],
        ).to_dict()
    with open(out / "run.log", "a", encoding="utf-8") as fh:
        fh.write(json.dumps(run_log, sort_keys=True) + "\n")
    return report


def _run_stages(cfg: PipelineConfig, out: Path) -> dict:
    stages: dict = {}
    artifacts: dict = {}
    report = {"run_label": cfg.run_label, "stages": stages, "artifacts": artifacts,
              "config": cfg.to_dict()}

    def fail(stage: str, exc: Exception) -> PipelineError:
        return PipelineError(stage, str(exc), report)

    # normalize: load documents (normalization happens at load)
    stage = "normalize"
    try:
        src_docs = _load_dir(cfg.src_dir)
        tgt_docs = _load_dir(cfg.tgt_dir)
        stages[stage] = {
            "src_docs": len(src_docs),
            "tgt_docs": len(tgt_docs),
            "src_lines": sum(len(d.lines) for d in src_docs),
            "tgt_lines": sum(len(d.lines) for d in tgt_docs),
        }
    except CorpusForgeError as exc:
        raise fail(stage, exc) from exc

    # detect: tag every document and check the expected language
    stage = "detect"
    try:
        profiles = load_profiles(cfg.profiles_dir or PACKAGED_DATA / "profiles")
        for doc, expected in [(d, cfg.src_lang) for d in src_docs] + [
            (d, cfg.tgt_lang) for d in tgt_docs
        ]:
            detected = detect_file_language(doc, profiles)
            if detected != expected:
                raise DataError(
                    f"document {doc.id} detected as {detected!r},"
                    f" expected {expected!r}"
                )
            doc.lang = expected
        stages[stage] = {"docs_tagged": len(src_docs) + len(tgt_docs)}
    except CorpusForgeError as exc:
        raise fail(stage, exc) from exc

    # split sentences
    stage = "split-sentences"
    try:
        abbrevs = {
            cfg.src_lang: _load_abbrevs(cfg, cfg.src_lang),
            cfg.tgt_lang: _load_abbrevs(cfg, cfg.tgt_lang),
        }
        sentences: dict[str, list[str]] = {}
        for doc in src_docs + tgt_docs:
            sents = split_sentences(doc, abbrevs[doc.lang])
            sentences[doc.id] = sents
            _write_lines(out / "sentences" / doc.lang / f"{doc.id}.txt", sents)
        stages[stage] = {
            "src_sentences": sum(len(sentences[d.id]) for d in src_docs),
            "tgt_sentences": sum(len(sentences[d.id]) for d in tgt_docs),
        }
        artifacts["sentences"] = "sentences/"
    except CorpusForgeError as exc:
        raise fail(stage, exc) from exc

    # document alignment
    stage = "align-docs"
    try:
        mappings, unmatched = align_documents(src_docs, tgt_docs, cfg.align)
        stages[stage] = {
            "mappings": len(mappings),
            "unmatched": sorted(unmatched),
            "iterations": {
                str(m.iteration): sum(
                    1 for x in mappings if x.iteration == m.iteration
                )
                for m in mappings
            },
        }
        docmap = [
            {"src": m.src_id, "tgt": m.tgt_id, "score": m.score,
             "iteration": m.iteration}
            for m in mappings
        ]
        with open(out / "docmap.json", "w", encoding="utf-8") as fh:
            json.dump(docmap, fh, ensure_ascii=False, indent=2, sort_keys=True)
        artifacts["docmap"] = "docmap.json"
    except CorpusForgeError as exc:
        raise fail(stage, exc) from exc

    # sentence alignment
    stage = "align-sents"
    try:
        pairs: list[SentencePair] = []
        category_counts: dict[str, int] = {}
        for mapping in mappings:
            src_sents = sentences[mapping.src_id]
            tgt_sents = sentences[mapping.tgt_id]
            beads = align_sentences(src_sents, tgt_sents, cfg.align)
            for bead_idx, bead in enumerate(beads):
                category_counts[bead.category] = (
                    category_counts.get(bead.category, 0) + 1
                )
                pairs.append(
                    bead_to_pair(
                        bead, src_sents, tgt_sents,
                        provenance=(mapping.src_id, mapping.tgt_id, bead_idx),
                    )
                )
        stages[stage] = {
            "beads": sum(category_counts.values()),
            "categories": dict(sorted(category_counts.items())),
        }
    except CorpusForgeError as exc:
        raise fail(stage, exc) from exc

    # cleaning
    stage = "clean"
    try:
        kept, removed = clean_pairs(
            pairs, cfg.src_lang, cfg.tgt_lang, cfg.align, profiles,
            rules=cfg.clean_rules,
        )
        reason_counts: dict[str, int] = {}
        with open(out / "removed.jsonl", "w", encoding="utf-8") as fh:
            for pair, reason in removed:
                reason_counts[reason] = reason_counts.get(reason, 0) + 1
                fh.write(
                    json.dumps(
                        {"src": pair.src, "tgt": pair.tgt, "reason": reason},
                        ensure_ascii=False, sort_keys=True,
                    )
                    + "\n"
                )
        with open(out / "corpus.tsv", "w", encoding="utf-8") as fh:
            for pair in kept:
                fh.write(f"{pair.src}\t{pair.tgt}\n")
        stages[stage] = {
            "kept": len(kept),
            "removed": len(removed),
            "removal_reasons": dict(sorted(reason_counts.items())),
        }
        artifacts["corpus"] = "corpus.tsv"
        artifacts["removed"] = "removed.jsonl"
    except CorpusForgeError as exc:
        raise fail(stage, exc) from exc

    # data splitting; tiny corpora (too small to give every part a line)
    # skip the stage instead of failing the whole build
    stage = "split-data"
    split = None
    try:
        min_needed = max(
            3,
            int(1 / min(r for r in cfg.split_ratios if r > 0)) + 1,
        )
        if len(kept) < min_needed:
            stages[stage] = {
                "skipped": f"{len(kept)} pairs is too few to split"
            }
        else:
            split = split_corpus(kept, cfg.split_ratios, cfg.split_seed)
            for name, part in (
                ("train", split.train), ("valid", split.valid),
                ("test", split.test),
            ):
                _write_lines(out / f"{name}.src", [p.src for p in part])
                _write_lines(out / f"{name}.tgt", [p.tgt for p in part])
            stages[stage] = {
                "train": len(split.train),
                "valid": len(split.valid),
                "test": len(split.test),
                "seed": cfg.split_seed,
            }
            artifacts["splits"] = [
                f"{name}.{side}"
                for name in ("train", "valid", "test")
                for side in ("src", "tgt")
            ]
    except CorpusForgeError as exc:
        raise fail(stage, exc) from exc

    # optional shared subword model on the training split (whole corpus when
    # the split was skipped)
    if cfg.subword_kind:
        stage = "train-subword"
        try:
            train_part = split.train if split is not None else kept
            text = sw.build_shared_training_text(
                [p.src for p in train_part], [p.tgt for p in train_part]
            )
            if cfg.subword_kind == "bpe":
                model = sw.train_bpe(text, cfg.subword_vocab_size)
            else:
                model = sw.train_unigram(
                    text, cfg.subword_vocab_size, cfg.subword_seed_multiplier
                )
            model_path = out / f"subword-{cfg.subword_kind}.json"
            sw.save_model(model, model_path)
            stages[stage] = {
                "kind": cfg.subword_kind,
                "vocab": len(model.vocab),
                "merges": len(model.merges),
            }
            artifacts["subword_model"] = model_path.name
        except CorpusForgeError as exc:
            raise fail(stage, exc) from exc

    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    artifacts["report"] = "report.json"
    return report


def _load_dir(directory: str) -> list[Document]:
    paths = sorted(Path(directory).glob("*.txt"))
    if not paths:
        raise DataError(f"no .txt documents in {directory}")
    # ids carry the directory name so same-named files on the two sides
    # (doc_a.txt under en/ and ga/) stay distinct
    docs = [
        Document.load(p, doc_id=f"{Path(directory).name}/{p.stem}") for p in paths
    ]
    for doc in docs:
        if not doc.lines:
            raise DataError(f"document {doc.id} is empty after normalization")
    return docs

"""corpusforge command-line interface.

Exit codes: 0 ok, 1 usage, 2 data/config error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from corpusforge import subword as sw
from corpusforge.align import (
    AlignConfig,
    SentencePair,
    align_documents,
    align_sentences,
    bead_to_pair,
    clean_pairs,
)
from corpusforge.datasplit import split_corpus
from corpusforge.errors import CorpusForgeError, DataError, UsageError
from corpusforge.greenreport import EnergyProfile, make_report
from corpusforge.hpo import CommandEvaluator, HyperparamSpace, coordinate_lockin_search, random_search
from corpusforge.humaneval import SessionStore, build_eval_set
from corpusforge.metrics import MetricOptions, evaluate_all
from corpusforge.pipeline import PACKAGED_DATA, PipelineConfig, run_pipeline
from corpusforge.server import build_session_report
from corpusforge.textprep import (
    AbbreviationList,
    Document,
    detect_file_language,
    detect_language,
    load_profiles,
    normalize_text,
    read_text_utf8,
    save_profile,
    split_sentences,
    train_profile,
)


class Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _read_lines(path: str) -> list[str]:
    return [line for line in read_text_utf8(path).split("\n") if line != ""]


def _read_pairs_tsv(path: str) -> list[SentencePair]:
    pairs = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 2 tab-separated fields")
        pairs.append(SentencePair(src=parts[0], tgt=parts[1]))
    return pairs


def _profiles(arg: str | None):
    return load_profiles(arg or PACKAGED_DATA / "profiles")


def _print_json(doc) -> None:
    print(json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# subcommand implementations


def cmd_normalize(args) -> int:
    text = read_text_utf8(args.input)
    normalized = "\n".join(normalize_text(line) for line in text.split("\n"))
    Path(args.output).write_text(normalized, encoding="utf-8")
    return 0


def cmd_detect(args) -> int:
    profiles = _profiles(args.profiles)
    if args.string:
        lang, conf = detect_language(args.file, profiles)
        print(f"{lang}\t{conf:.4f}")
    else:
        doc = Document.load(args.file)
        lang = detect_file_language(doc, profiles)
        print(lang)
    return 0


def cmd_split_sents(args) -> int:
    doc = Document.load(args.file, lang=args.lang)
    abbrevs = None
    if args.abbrev:
        abbrevs = AbbreviationList.load(args.abbrev, lang=args.lang)
    else:
        packaged = PACKAGED_DATA / "abbrev" / f"{args.lang}.txt"
        if packaged.exists():
            abbrevs = AbbreviationList.load(packaged, lang=args.lang)
    sentences = split_sentences(doc, abbrevs)
    out = "\n".join(sentences)
    if args.output:
        Path(args.output).write_text(out + ("\n" if out else ""), encoding="utf-8")
    else:
        print(out)
    return 0


def cmd_train_profile(args) -> int:
    profile = train_profile(read_text_utf8(args.input), args.lang)
    save_profile(profile, args.output)
    return 0


def _docs_from_dir(directory: str, lang: str, profiles) -> list[Document]:
    paths = sorted(Path(directory).glob("*.txt"))
    if not paths:
        raise DataError(f"no .txt documents in {directory}")
    docs = []
    for path in paths:
        doc = Document.load(path)
        doc.lang = detect_file_language(doc, profiles)
        if doc.lang != lang:
            raise DataError(f"document {doc.id} detected as {doc.lang}, expected {lang}")
        docs.append(doc)
    return docs


def cmd_align_docs(args) -> int:
    profiles = _profiles(args.profiles)
    cfg = AlignConfig(doc_score_threshold=args.threshold)
    src_docs = _docs_from_dir(args.src_dir, args.src_lang, profiles)
    tgt_docs = _docs_from_dir(args.tgt_dir, args.tgt_lang, profiles)
    mappings, unmatched = align_documents(src_docs, tgt_docs, cfg)
    _print_json({
        "mappings": [
            {"src": m.src_id, "tgt": m.tgt_id, "score": m.score, "iteration": m.iteration}
            for m in mappings
        ],
        "unmatched": unmatched,
    })
    return 0


def cmd_align_sents(args) -> int:
    src = _read_lines(args.src)
    tgt = _read_lines(args.tgt)
    beads = align_sentences(src, tgt, AlignConfig())
    lines = []
    for bead in beads:
        pair = bead_to_pair(bead, src, tgt)
        lines.append(f"{pair.src}\t{pair.tgt}\t{bead.category}\t{bead.cost:.6f}\n")
    if args.output:
        Path(args.output).write_text("".join(lines), encoding="utf-8")
    else:
        sys.stdout.write("".join(lines))
    return 0


def cmd_clean(args) -> int:
    pairs = _read_pairs_tsv(args.pairs)
    profiles = _profiles(args.profiles)
    kept, removed = clean_pairs(pairs, args.src_lang, args.tgt_lang,
                                AlignConfig(), profiles)
    with open(args.output, "w", encoding="utf-8") as fh:
        for pair in kept:
            fh.write(f"{pair.src}\t{pair.tgt}\n")
    with open(args.removed, "w", encoding="utf-8") as fh:
        for pair, reason in removed:
            fh.write(json.dumps({"src": pair.src, "tgt": pair.tgt, "reason": reason},
                                ensure_ascii=False, sort_keys=True) + "\n")
    print(f"kept {len(kept)}, removed {len(removed)}")
    return 0


def cmd_build_corpus(args) -> int:
    cfg = PipelineConfig.load(args.config)
    if args.out_dir:
        cfg.out_dir = args.out_dir
    if args.run_label:
        cfg.run_label = args.run_label
    report = run_pipeline(cfg)
    _print_json(report)
    return 0


def cmd_split_data(args) -> int:
    pairs = _read_pairs_tsv(args.pairs)
    ratios = tuple(float(x) for x in args.ratios.split(","))
    if len(ratios) != 3:
        raise UsageError("--ratios needs three comma-separated values")
    split = split_corpus(pairs, ratios, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in (("train", split.train), ("valid", split.valid),
                       ("test", split.test)):
        (out / f"{name}.src").write_text(
            "".join(p.src + "\n" for p in part), encoding="utf-8")
        (out / f"{name}.tgt").write_text(
            "".join(p.tgt + "\n" for p in part), encoding="utf-8")
    print(f"train {len(split.train)}, valid {len(split.valid)}, test {len(split.test)}")
    return 0


def cmd_train_subword(args) -> int:
    if args.src_corpus and args.tgt_corpus:
        text = sw.build_shared_training_text(
            _read_lines(args.src_corpus), _read_lines(args.tgt_corpus))
    elif args.input:
        text = read_text_utf8(args.input)
    else:
        raise UsageError("need --input or both --src-corpus and --tgt-corpus")
    if args.kind == "bpe":
        model = sw.train_bpe(text, args.vocab_size)
    else:
        model = sw.train_unigram(text, args.vocab_size, args.seed_multiplier)
    sw.save_model(model, args.output)
    print(f"{args.kind} model with {len(model.vocab)} pieces -> {args.output}")
    return 0


def cmd_apply_subword(args) -> int:
    model = sw.load_model(args.model)
    with open(args.output, "w", encoding="utf-8") as fh:
        for line in _read_lines(args.input):
            fh.write(" ".join(sw.encode(model, line)) + "\n")
    return 0


def cmd_detok(args) -> int:
    model = sw.load_model(args.model)
    with open(args.output, "w", encoding="utf-8") as fh:
        for line in _read_lines(args.input):
            fh.write(sw.decode(model, line.split(" ")) + "\n")
    return 0


def cmd_evaluate(args) -> int:
    hyps = _read_lines(args.hyp)
    refs = _read_lines(args.ref)
    opts = MetricOptions(
        lowercase=args.lc,
        sentence_level=args.sentence,
        chrf_beta=args.chrf_beta,
        smoothing="add_k" if args.smooth else "none",
    )
    report = evaluate_all(hyps, refs, opts)
    _print_json(report.to_dict())
    return 0


def cmd_eval_set(args) -> int:
    corpus = []
    for lineno, line in enumerate(_read_lines(args.corpus), start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{args.corpus}:{lineno}: expected source<TAB>reference")
        corpus.append((parts[0], parts[1]))
    systems = {}
    for spec in args.system:
        name, _, path = spec.partition("=")
        if not path:
            raise UsageError(f"--system must be name=path, got {spec!r}")
        systems[name] = _read_lines(path)
    session = build_eval_set(corpus, systems, args.n, args.seed,
                             session_id=args.session_id)
    SessionStore(args.store).create(session)
    print(f"session {session.session_id}: {len(session.items)} items,"
          f" {len(session.systems)} systems")
    return 0


def cmd_mqm_report(args) -> int:
    report = build_session_report(SessionStore(args.store), args.session)
    _print_json({"error_counts": report["error_counts"], "mqm": report["mqm"]})
    return 0


def cmd_kappa(args) -> int:
    report = build_session_report(SessionStore(args.store), args.session)
    _print_json({"kappa": report["kappa"],
                 **({"kappa_note": report["kappa_note"]}
                    if "kappa_note" in report else {})})
    return 0


def cmd_sqm_report(args) -> int:
    report = build_session_report(SessionStore(args.store), args.session)
    _print_json({"sqm": report["sqm"]})
    return 0


def cmd_green_report(args) -> int:
    profile = EnergyProfile(
        device_max_power_w=args.power,
        utilization=args.util,
        runtime_h=args.hours,
        grid_intensity_gco2_per_kwh=args.grid,
        carbon_neutral=args.carbon_neutral,
    )
    report = make_report(profile, label=args.label)
    _print_json(report.to_dict())
    return 0


def cmd_hpo(args) -> int:
    space = HyperparamSpace.load(args.space)
    evaluator = CommandEvaluator(args.cmd)
    if args.mode == "random":
        best, trials = random_search(space, evaluator, args.trials, args.seed,
                                     log_path=args.log, jobs=args.jobs)
        _print_json({"best": {"config": best.config, "score": best.score},
                     "trials": len(trials)})
    else:
        best_cfg, trials = coordinate_lockin_search(
            space, evaluator, args.seed, log_path=args.log, jobs=args.jobs)
        scores = [t.score for t in trials if t.status == "ok"]
        _print_json({"best": {"config": best_cfg,
                              "score": max(scores) if scores else None},
                     "trials": len(trials)})
    return 0


def cmd_serve(args) -> int:
    from corpusforge.server import serve_api

    serve_api(args.port, args.data_root, host=args.host, ui_dir=args.ui_dir)
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def build_parser() -> Parser:
    parser = Parser(prog="corpusforge",
                    description="parallel corpus construction and MT evaluation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="normalize a text file")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("detect", help="detect the language of a file or string")
    p.add_argument("file")
    p.add_argument("--profiles", default=None)
    p.add_argument("--string", action="store_true",
                   help="treat the argument as literal text")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("split-sents", help="split a document into sentences")
    p.add_argument("file")
    p.add_argument("--lang", required=True)
    p.add_argument("--abbrev", default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_split_sents)

    p = sub.add_parser("train-profile", help="train a language profile")
    p.add_argument("--input", required=True)
    p.add_argument("--lang", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train_profile)

    p = sub.add_parser("align-docs", help="pair documents across languages")
    p.add_argument("--src-dir", required=True)
    p.add_argument("--tgt-dir", required=True)
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--profiles", default=None)
    p.add_argument("--threshold", type=float, default=0.2)
    p.set_defaults(func=cmd_align_docs)

    p = sub.add_parser("align-sents", help="align two sentence files")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_align_sents)

    p = sub.add_parser("clean", help="clean a TSV pair file")
    p.add_argument("--pairs", required=True)
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--profiles", default=None)
    p.add_argument("--output", required=True)
    p.add_argument("--removed", required=True)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("build-corpus", help="run the full pipeline from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--run-label", default=None)
    p.set_defaults(func=cmd_build_corpus)

    p = sub.add_parser("split-data", help="split a TSV pair file")
    p.add_argument("--pairs", required=True)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split_data)

    p = sub.add_parser("train-subword", help="train a subword model")
    p.add_argument("--kind", choices=("bpe", "unigram"), required=True)
    p.add_argument("--vocab-size", type=int, default=16000)
    p.add_argument("--seed-multiplier", type=int, default=4)
    p.add_argument("--input", default=None)
    p.add_argument("--src-corpus", default=None)
    p.add_argument("--tgt-corpus", default=None)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train_subword)

    p = sub.add_parser("apply-subword", help="encode text with a subword model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_apply_subword)

    p = sub.add_parser("detok", help="decode subword pieces back to text")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_detok)

    p = sub.add_parser("evaluate", help="score hypotheses against references")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--lc", action="store_true", help="lowercase before scoring")
    p.add_argument("--sentence", action="store_true", help="per-sentence scores")
    p.add_argument("--chrf-beta", type=int, choices=(1, 3), default=3)
    p.add_argument("--smooth", action="store_true", help="add-k smoothing for BLEU")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("eval-set", help="build a blinded annotation session")
    p.add_argument("--corpus", required=True, help="TSV source<TAB>reference")
    p.add_argument("--system", action="append", required=True,
                   help="name=path, repeatable")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--store", required=True)
    p.add_argument("--session-id", default="session")
    p.set_defaults(func=cmd_eval_set)

    p = sub.add_parser("mqm-report", help="error counts and weighted penalties")
    p.add_argument("--store", required=True)
    p.add_argument("--session", required=True)
    p.set_defaults(func=cmd_mqm_report)

    p = sub.add_parser("kappa", help="inter-annotator agreement per error type")
    p.add_argument("--store", required=True)
    p.add_argument("--session", required=True)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("sqm-report", help="SQM means and distributions")
    p.add_argument("--store", required=True)
    p.add_argument("--session", required=True)
    p.set_defaults(func=cmd_sqm_report)

    p = sub.add_parser("green-report", help="energy and emissions for a run")
    p.add_argument("--power", type=float, required=True, help="device max power, W")
    p.add_argument("--util", type=float, default=0.8)
    p.add_argument("--hours", type=float, required=True)
    p.add_argument("--grid", type=float, default=0.0, help="gCO2 per kWh")
    p.add_argument("--carbon-neutral", action="store_true")
    p.add_argument("--label", default="")
    p.set_defaults(func=cmd_green_report)

    p = sub.add_parser("hpo", help="hyperparameter search over an evaluator command")
    p.add_argument("mode", choices=("random", "lockin"))
    p.add_argument("--space", required=True)
    p.add_argument("--cmd", required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--log", default=None)
    p.set_defaults(func=cmd_hpo)

    p = sub.add_parser("serve", help="run the HTTP gateway")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-root", default=None)
    p.add_argument("--ui-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except CorpusForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

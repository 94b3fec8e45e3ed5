import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpusforge.pipeline import PACKAGED_DATA
from corpusforge.textprep import load_profiles


def _seed_vocab(lang: str) -> list[str]:
    text = (PACKAGED_DATA / "seed" / f"{lang}.txt").read_text(encoding="utf-8")
    vocab = sorted({w.strip(".,;:!?") for w in text.split()})
    return [w for w in vocab if w]


@pytest.fixture(scope="session")
def profiles():
    return load_profiles(PACKAGED_DATA / "profiles")


def make_bilingual_corpus(n_lines: int, seed: int = 1234) -> tuple[list[str], list[str]]:
    """Deterministic parallel-ish corpus from the packaged seed vocabularies:
    line i of each side has a correlated word count, so lengths track."""
    rng = random.Random(seed)
    en_vocab = _seed_vocab("en")
    ga_vocab = _seed_vocab("ga")
    en_lines = []
    ga_lines = []
    for _ in range(n_lines):
        n_words = rng.randint(5, 12)
        en = " ".join(rng.choice(en_vocab) for _ in range(n_words)) + "."
        ga = " ".join(rng.choice(ga_vocab) for _ in range(n_words + rng.randint(-1, 1))) + "."
        en_lines.append(en[0].upper() + en[1:])
        ga_lines.append(ga[0].upper() + ga[1:])
    return en_lines, ga_lines


@pytest.fixture(scope="session")
def bilingual_corpus():
    return make_bilingual_corpus(1000)


# Priors for the pipeline fixture: orphan-heavy PDF-style extractions, where
# singleton beads are common and merges are rare. With the stock priors an
# orphan sentence is always cheaper to merge into a neighbour than to leave
# unmatched, so an empty-side pair could never be planted.
FIXTURE_PRIORS = {
    "1-1": 0.89,
    "1-0": 0.045,
    "0-1": 0.045,
    "2-1": 1e-4,
    "1-2": 1e-4,
    "2-2": 1e-4,
}


def build_pipeline_fixture(root: Path, seed: int = 77) -> dict:
    """Two mirrored docs per language with planted cleaning defects.

    Returns the planted-defect counts so tests can check the removal log.
    """
    rng = random.Random(seed)
    en_vocab = _seed_vocab("en")
    ga_vocab = _seed_vocab("ga")

    def en_sentence(k):
        words = [rng.choice(en_vocab) for _ in range(k)]
        s = " ".join(words) + "."
        return s[0].upper() + s[1:]

    def ga_sentence(k):
        words = [rng.choice(ga_vocab) for _ in range(k)]
        s = " ".join(words) + "."
        return s[0].upper() + s[1:]

    src_dir = root / "en"
    tgt_dir = root / "ga"
    src_dir.mkdir(parents=True)
    tgt_dir.mkdir(parents=True)

    planted = {"empty": 0, "no-alphabetic": 0, "wrong-language": 0}

    # doc a: clean mirrored content, shares year tokens for doc alignment
    n = 14
    src_a = [f"Annual report {1990 + i}. " + en_sentence(8) for i in range(n)]
    tgt_a = [f"Tuarascáil bhliantúil {1990 + i}. " + ga_sentence(8) for i in range(n)]
    # planted defect: one orphan source sentence with no target counterpart,
    # which aligns as a 1-0 bead and surfaces as an empty-target pair
    src_a.insert(7, en_sentence(6))
    planted["empty"] += 1

    # doc b: carries the other two defects
    src_b = [f"Strategy {2000 + i}. " + en_sentence(7) for i in range(12)]
    tgt_b = [f"Straitéis {2000 + i}. " + ga_sentence(7) for i in range(12)]
    # a digits-only segment on both sides; the leading "1234." line-start
    # pattern isolates it as its own sentence
    src_b[4] = "1234. 5678!"
    tgt_b[4] = "9876. 5432!"
    planted["no-alphabetic"] += 1
    untranslated = en_sentence(10)
    assert len(untranslated) >= 40
    src_b[9] = untranslated
    tgt_b[9] = untranslated  # left untranslated on the Irish side
    planted["wrong-language"] += 1

    (src_dir / "doc_a.txt").write_text("\n".join(src_a) + "\n", encoding="utf-8")
    (tgt_dir / "doc_a.txt").write_text("\n".join(tgt_a) + "\n", encoding="utf-8")
    (src_dir / "doc_b.txt").write_text("\n".join(src_b) + "\n", encoding="utf-8")
    (tgt_dir / "doc_b.txt").write_text("\n".join(tgt_b) + "\n", encoding="utf-8")
    return planted

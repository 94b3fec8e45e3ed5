"""MQM/SQM human-evaluation backbone.

Covers the core error taxonomy (accuracy/fluency sub-categories plus the
whole-sentence non-translation tag) with severity weights 1/10/25, blinded
session construction, per-category aggregation, weighted penalties, SQM
summaries and Cohen's kappa with explicit handling of the degenerate
single-category case (report observed agreement instead).
"""

from __future__ import annotations

import json
import random
import string
from dataclasses import dataclass, field
from pathlib import Path

from corpusforge.errors import DataError

TOP_NON_TRANSLATION = "non-translation"
TOP_ACCURACY = "accuracy"
TOP_FLUENCY = "fluency"

ACCURACY_SUBS = ("addition", "omission", "mistranslation", "untranslated-text")
FLUENCY_SUBS = (
    "punctuation",
    "spelling",
    "grammar",
    "register",
    "inconsistency",
    "character-encoding",
)
SUB_NONE = "none"

# Aggregation/report keys, in taxonomy order.
ERROR_TYPES = (TOP_NON_TRANSLATION,) + ACCURACY_SUBS + FLUENCY_SUBS

SEVERITY_WEIGHTS = {"minor": 1, "major": 10, "non-translation": 25}

KAPPA_BANDS = (
    (0.0, "no agreement"),
    (0.2, "none to slight"),
    (0.4, "fair"),
    (0.6, "moderate"),
    (0.8, "substantial"),
    (1.0, "almost perfect"),
)


def kappa_band(kappa: float) -> str:
    """Qualitative agreement band; boundary values fall into the upper band
    (0.40 reads as moderate). Rounding to 9 decimals keeps float dust from
    flipping a boundary value."""
    kappa = round(kappa, 9)
    if kappa <= 0.0:
        return "no agreement"
    for upper, name in KAPPA_BANDS[1:-1]:
        if kappa < upper:
            return name
    return "almost perfect"


@dataclass(frozen=True)
class MqmCategory:
    top: str
    sub: str = SUB_NONE

    def __post_init__(self) -> None:
        if self.top == TOP_NON_TRANSLATION:
            if self.sub != SUB_NONE:
                raise DataError("non-translation takes no sub-category")
        elif self.top == TOP_ACCURACY:
            if self.sub not in ACCURACY_SUBS:
                raise DataError(f"unknown accuracy sub-category {self.sub!r}")
        elif self.top == TOP_FLUENCY:
            if self.sub not in FLUENCY_SUBS:
                raise DataError(f"unknown fluency sub-category {self.sub!r}")
        else:
            raise DataError(f"unknown top-level category {self.top!r}")

    @property
    def error_type(self) -> str:
        return self.top if self.top == TOP_NON_TRANSLATION else self.sub

    @classmethod
    def parse(cls, top: str, sub: str | None) -> "MqmCategory":
        return cls(top=top, sub=sub if sub else SUB_NONE)


@dataclass(frozen=True)
class Severity:
    level: str

    def __post_init__(self) -> None:
        if self.level not in SEVERITY_WEIGHTS:
            raise DataError(f"unknown severity {self.level!r}")

    @property
    def weight(self) -> int:
        return SEVERITY_WEIGHTS[self.level]


@dataclass(frozen=True)
class MqmAnnotation:
    segment_id: str
    system_id: str
    annotator_id: str
    category: MqmCategory
    severity: Severity
    span: tuple[int, int] | None = None
    note: str = ""

    def __post_init__(self) -> None:
        is_nt_sev = self.severity.level == "non-translation"
        is_nt_cat = self.category.top == TOP_NON_TRANSLATION
        if is_nt_sev != is_nt_cat:
            raise DataError(
                "non-translation severity pairs only with the non-translation category"
            )
        if self.span is not None:
            start, end = self.span
            if start < 0 or end < start:
                raise DataError(f"bad span {self.span}")

    def check_span(self, segment_text: str) -> None:
        if self.span is not None and self.span[1] > len(segment_text):
            raise DataError(
                f"span {self.span} exceeds segment length {len(segment_text)}"
            )


@dataclass(frozen=True)
class SqmRating:
    segment_id: str
    system_id: str
    annotator_id: str
    level: int

    def __post_init__(self) -> None:
        if not isinstance(self.level, int) or not 0 <= self.level <= 6:
            raise DataError(f"SQM level must be an integer 0..6, got {self.level!r}")


# ---------------------------------------------------------------------------
# Blinded evaluation sessions


@dataclass
class SessionItem:
    segment_id: str
    source: str
    reference: str
    outputs: list[tuple[str, str]]  # (blind label, text), randomized order
    blind_map: dict[str, str]  # blind label -> true system id (server-side)


@dataclass
class EvalSession:
    session_id: str
    seed: int
    systems: list[str]
    items: list[SessionItem]

    def item(self, segment_id: str) -> SessionItem:
        for item in self.items:
            if item.segment_id == segment_id:
                return item
        raise DataError(f"unknown segment {segment_id!r}")

    def resolve(self, segment_id: str, blind_label: str) -> str:
        item = self.item(segment_id)
        try:
            return item.blind_map[blind_label]
        except KeyError:
            raise DataError(
                f"unknown blind label {blind_label!r} for segment {segment_id}"
            ) from None

    def cells(self) -> list[tuple[str, str]]:
        """Every (segment_id, system_id) judged in this session."""
        return [
            (item.segment_id, system)
            for item in self.items
            for system in self.systems
        ]

    def client_payload(self) -> dict:
        """Serialized view for annotators: blind labels only, no true ids."""
        return {
            "session_id": self.session_id,
            "n_items": len(self.items),
            "n_systems": len(self.systems),
            "items": [
                {
                    "segment_id": item.segment_id,
                    "source": item.source,
                    "reference": item.reference,
                    "outputs": [
                        {"label": label, "text": text} for label, text in item.outputs
                    ],
                }
                for item in self.items
            ],
        }

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "seed": self.seed,
            "systems": self.systems,
            "items": [
                {
                    "segment_id": it.segment_id,
                    "source": it.source,
                    "reference": it.reference,
                    "outputs": [[label, text] for label, text in it.outputs],
                    "blind_map": it.blind_map,
                }
                for it in self.items
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalSession":
        return cls(
            session_id=doc["session_id"],
            seed=doc["seed"],
            systems=list(doc["systems"]),
            items=[
                SessionItem(
                    segment_id=it["segment_id"],
                    source=it["source"],
                    reference=it["reference"],
                    outputs=[(label, text) for label, text in it["outputs"]],
                    blind_map=dict(it["blind_map"]),
                )
                for it in doc["items"]
            ],
        )


def build_eval_set(
    corpus: list[tuple[str, str]],
    system_outputs: dict[str, list[str]],
    n: int,
    seed: int,
    session_id: str = "session",
) -> EvalSession:
    """Sample n segments without replacement and blind the system outputs
    with per-item independently shuffled labels A, B, ..."""
    if not system_outputs:
        raise DataError("need at least one system")
    if n > len(corpus):
        raise DataError(f"cannot sample {n} segments from a corpus of {len(corpus)}")
    for system, outputs in system_outputs.items():
        if len(outputs) != len(corpus):
            raise DataError(
                f"system {system}: {len(outputs)} outputs for {len(corpus)} segments"
            )
    systems = sorted(system_outputs)
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(len(corpus)), n))
    items = []
    for idx in chosen:
        source, reference = corpus[idx]
        order = list(systems)
        rng.shuffle(order)
        labels = list(string.ascii_uppercase[: len(order)])
        items.append(
            SessionItem(
                segment_id=f"seg{idx:04d}",
                source=source,
                reference=reference,
                outputs=[
                    (label, system_outputs[system][idx])
                    for label, system in zip(labels, order)
                ],
                blind_map=dict(zip(labels, order)),
            )
        )
    return EvalSession(session_id=session_id, seed=seed, systems=systems, items=items)


# ---------------------------------------------------------------------------
# Aggregation and scoring


def aggregate_errors(annotations: list[MqmAnnotation]) -> dict:
    """Error counts per system and error type, summed over annotators."""
    systems = sorted({a.system_id for a in annotations})
    table = {
        system: {error_type: 0 for error_type in ERROR_TYPES} for system in systems
    }
    for ann in annotations:
        table[ann.system_id][ann.category.error_type] += 1
    totals = {system: sum(row.values()) for system, row in table.items()}
    return {
        "by_system": table,
        "totals": totals,
        "grand_total": sum(totals.values()),
    }


def mqm_penalty(
    annotations: list[MqmAnnotation],
    system_id: str,
    sources: dict[str, str] | None = None,
) -> dict:
    """Weighted penalty for one system: sum of severity weights, with a
    per-segment breakdown; adds penalty per 100 source words when source
    texts are supplied."""
    per_segment: dict[str, int] = {}
    total = 0
    for ann in annotations:
        if ann.system_id != system_id:
            continue
        weight = ann.severity.weight
        per_segment[ann.segment_id] = per_segment.get(ann.segment_id, 0) + weight
        total += weight
    result = {
        "system": system_id,
        "penalty": total,
        "per_segment": dict(sorted(per_segment.items())),
    }
    if sources:
        words = sum(len(text.split()) for text in sources.values())
        result["source_words"] = words
        result["penalty_per_100_words"] = 100.0 * total / words if words else 0.0
    return result


@dataclass
class KappaResult:
    po: float
    pe: float
    kappa: float | None
    band: str | None
    counts: dict

    @property
    def degenerate(self) -> bool:
        return self.kappa is None

    def to_dict(self) -> dict:
        doc = {"po": self.po, "pe": self.pe, "counts": self.counts}
        if self.kappa is None:
            doc["degenerate"] = True
        else:
            doc["kappa"] = self.kappa
            doc["band"] = self.band
        return doc


def cohen_kappa(labels_a: list, labels_b: list) -> KappaResult:
    """kappa = (po - pe) / (1 - pe); when pe = 1 (one shared category) the
    observed agreement po is reported instead."""
    if len(labels_a) != len(labels_b):
        raise DataError(
            f"label sequences differ in length: {len(labels_a)} vs {len(labels_b)}"
        )
    if not labels_a:
        raise DataError("cannot compute agreement on empty label sequences")
    n = len(labels_a)
    po = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    cats = sorted({*labels_a, *labels_b}, key=str)
    counts = {
        str(c): {
            "a": sum(x == c for x in labels_a),
            "b": sum(x == c for x in labels_b),
        }
        for c in cats
    }
    pe = sum(
        (counts[str(c)]["a"] / n) * (counts[str(c)]["b"] / n) for c in cats
    )
    if abs(1.0 - pe) < 1e-12:
        return KappaResult(po=po, pe=1.0, kappa=None, band=None, counts=counts)
    kappa = (po - pe) / (1.0 - pe)
    return KappaResult(po=po, pe=pe, kappa=kappa, band=kappa_band(kappa), counts=counts)


def kappa_per_error_type(
    annotations_a: list[MqmAnnotation],
    annotations_b: list[MqmAnnotation],
    session: EvalSession,
    coverage_a: set[tuple[str, str]] | None = None,
    coverage_b: set[tuple[str, str]] | None = None,
) -> dict[str, KappaResult]:
    """Sentence-level agreement per error type: each (segment, system) cell
    becomes a binary presence label per annotator, then kappa applies.

    Coverage sets (cells each annotator actually judged) default to full
    coverage; when given, gaps raise an error listing the missing cells.
    """
    cells = session.cells()
    for name, coverage in (("a", coverage_a), ("b", coverage_b)):
        if coverage is not None:
            missing = [cell for cell in cells if cell not in coverage]
            if missing:
                raise DataError(
                    f"annotator {name} did not cover: "
                    + ", ".join(f"{seg}/{system}" for seg, system in missing)
                )

    def presence(annotations: list[MqmAnnotation], error_type: str) -> list[int]:
        marked = {
            (ann.segment_id, ann.system_id)
            for ann in annotations
            if ann.category.error_type == error_type
        }
        return [1 if cell in marked else 0 for cell in cells]

    report = {}
    for error_type in ERROR_TYPES:
        report[error_type] = cohen_kappa(
            presence(annotations_a, error_type), presence(annotations_b, error_type)
        )
    return report


def sqm_summary(ratings: list[SqmRating]) -> dict:
    """Mean SQM per system: per annotator, pooled over all ratings, and the
    mean of per-annotator means (both poolings reported), plus a histogram
    over levels 0-6."""
    if not ratings:
        raise DataError("no SQM ratings to summarize")
    systems = sorted({r.system_id for r in ratings})
    out = {}
    for system in systems:
        rows = [r for r in ratings if r.system_id == system]
        annotators = sorted({r.annotator_id for r in rows})
        per_annotator = {}
        for annotator in annotators:
            levels = [r.level for r in rows if r.annotator_id == annotator]
            per_annotator[annotator] = sum(levels) / len(levels)
        pooled = sum(r.level for r in rows) / len(rows)
        histogram = {level: 0 for level in range(7)}
        for r in rows:
            histogram[r.level] += 1
        out[system] = {
            "per_annotator": per_annotator,
            "pooled_mean": pooled,
            "mean_of_annotator_means": sum(per_annotator.values()) / len(per_annotator),
            "histogram": histogram,
            "n_ratings": len(rows),
        }
    return out


# ---------------------------------------------------------------------------
# Append-only session store (directory of JSONL files)


class SessionStore:
    """One directory per store; per session: session.json (server-side,
    holds the blind map) and annotations.jsonl (append-only records)."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _session_dir(self, session_id: str) -> Path:
        if not session_id or any(ch in session_id for ch in "/\\."):
            raise DataError(f"bad session id {session_id!r}")
        return self.root / session_id

    def create(self, session: EvalSession) -> None:
        directory = self._session_dir(session.session_id)
        if directory.exists():
            raise DataError(f"session {session.session_id} already exists")
        directory.mkdir(parents=True)
        with open(directory / "session.json", "w", encoding="utf-8") as fh:
            json.dump(session.to_dict(), fh, ensure_ascii=False, indent=2)

    def load(self, session_id: str) -> EvalSession:
        path = self._session_dir(session_id) / "session.json"
        if not path.exists():
            raise DataError(f"unknown session {session_id!r}")
        with open(path, encoding="utf-8") as fh:
            return EvalSession.from_dict(json.load(fh))

    def list_sessions(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if p.is_dir())

    def append_record(self, record: dict) -> None:
        session = self.load(record.get("session", ""))
        validate_record(record, session)
        path = self._session_dir(session.session_id) / "annotations.jsonl"
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")

    def records(self, session_id: str) -> list[dict]:
        path = self._session_dir(session_id) / "annotations.jsonl"
        if not path.exists():
            self.load(session_id)  # raise on unknown session
            return []
        out = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    def resolved(self, session_id: str) -> tuple[list[MqmAnnotation], list[SqmRating]]:
        """Records with blind labels resolved to true system ids."""
        session = self.load(session_id)
        mqm: list[MqmAnnotation] = []
        sqm: list[SqmRating] = []
        for lineno, record in enumerate(self.records(session_id), start=1):
            try:
                system = session.resolve(record["segment_id"], record["blind_label"])
                if record["kind"] == "mqm":
                    mqm.append(
                        MqmAnnotation(
                            segment_id=record["segment_id"],
                            system_id=system,
                            annotator_id=record["annotator"],
                            category=MqmCategory.parse(
                                record["category"], record.get("sub_category")
                            ),
                            severity=Severity(record["severity"]),
                            span=tuple(record["span"]) if record.get("span") else None,
                            note=record.get("note", ""),
                        )
                    )
                else:
                    sqm.append(
                        SqmRating(
                            segment_id=record["segment_id"],
                            system_id=system,
                            annotator_id=record["annotator"],
                            level=record["level"],
                        )
                    )
            except (DataError, KeyError) as exc:
                raise DataError(
                    f"session {session_id} annotations.jsonl line {lineno}:"
                    f" {exc} (record: {json.dumps(record, ensure_ascii=False)[:200]})"
                ) from exc
        return mqm, sqm

    def coverage(self, session_id: str) -> dict[str, set[tuple[str, str]]]:
        """Cells proven covered per annotator (an SQM rating marks a cell
        as judged)."""
        session = self.load(session_id)
        out: dict[str, set[tuple[str, str]]] = {}
        for record in self.records(session_id):
            if record["kind"] != "sqm":
                continue
            system = session.resolve(record["segment_id"], record["blind_label"])
            out.setdefault(record["annotator"], set()).add(
                (record["segment_id"], system)
            )
        return out


def validate_record(record: dict, session: EvalSession) -> None:
    """Validate one JSONL annotation record against its session."""
    for key in ("session", "segment_id", "blind_label", "annotator", "kind"):
        if key not in record:
            raise DataError(f"annotation record missing field {key!r}")
    if record["session"] != session.session_id:
        raise DataError("record session does not match store session")
    item = session.item(record["segment_id"])
    labels = {label for label, _ in item.outputs}
    if record["blind_label"] not in labels:
        raise DataError(
            f"unknown blind label {record['blind_label']!r} for segment"
            f" {record['segment_id']}"
        )
    kind = record["kind"]
    if kind == "mqm":
        category = MqmCategory.parse(
            record.get("category", ""), record.get("sub_category")
        )
        severity = Severity(record.get("severity", ""))
        ann = MqmAnnotation(
            segment_id=record["segment_id"],
            system_id="pending",
            annotator_id=record["annotator"],
            category=category,
            severity=severity,
            span=tuple(record["span"]) if record.get("span") else None,
            note=record.get("note", ""),
        )
        output_text = dict(item.outputs)[record["blind_label"]]
        ann.check_span(output_text)
    elif kind == "sqm":
        level = record.get("level")
        if not isinstance(level, int) or not 0 <= level <= 6:
            raise DataError(f"SQM level must be an integer 0..6, got {level!r}")
    else:
        raise DataError(f"unknown annotation kind {kind!r}")


def next_item(
    session: EvalSession, records: list[dict], annotator: str
) -> tuple[dict | None, dict]:
    """First item the annotator has not fully rated (one SQM per output),
    plus progress counts."""
    done_labels: dict[str, set[str]] = {}
    for record in records:
        if record["kind"] == "sqm" and record["annotator"] == annotator:
            done_labels.setdefault(record["segment_id"], set()).add(
                record["blind_label"]
            )
    done = 0
    pending = None
    for item in session.items:
        labels = {label for label, _ in item.outputs}
        if labels <= done_labels.get(item.segment_id, set()):
            done += 1
        elif pending is None:
            pending = item
    progress = {"done": done, "total": len(session.items)}
    if pending is None:
        return None, progress
    payload = {
        "segment_id": pending.segment_id,
        "source": pending.source,
        "reference": pending.reference,
        "outputs": [{"label": label, "text": text} for label, text in pending.outputs],
    }
    return payload, progress

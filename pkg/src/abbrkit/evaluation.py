"""Identification and span-level NER scoring.

Identification is scored per token position.  NER is scored on exact span
matches (label, start, end) extracted from IOB tags, with per-class
precision/recall/F1 and their unweighted macro averages; the macro F1 is
the mean of the per-class F1 values, not the F1 of the macro P and R.

All internal math runs in full precision; percentages are rounded
half-away-from-zero to two decimals only when a report is emitted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import NamedTuple, Sequence

from .corpus import Document, Sentence
from .identifiers import IdentificationResult


class MisalignedStreams(ValueError):
    """Prediction and gold flag streams have different lengths."""


class UnalignedCorpora(ValueError):
    def __init__(self, missing_keys):
        self.missing_keys = sorted(missing_keys)
        shown = ", ".join(f"{d}:{i}" for d, i in self.missing_keys[:5])
        super().__init__(f"unmatched sentence keys: {shown}"
                         + (" ..." if len(self.missing_keys) > 5 else ""))


class MissingGoldExpansion(ValueError):
    def __init__(self, position):
        self.position = position
        super().__init__(f"abbreviation without gold expansion at {position}")


def round2(value: float) -> float:
    """Round half away from zero to 2 decimals (bankers' rounding is wrong here)."""
    return float(Decimal(repr(float(value))).quantize(Decimal("0.01"),
                                                      rounding=ROUND_HALF_UP))


def fmt2(value: float) -> str:
    return f"{round2(value):.2f}"


def f1_from_percent(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "PRF":
        precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
        recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
        return cls(precision=precision, recall=recall,
                   f1=f1_from_percent(precision, recall), tp=tp, fp=fp, fn=fn)


class MacroAverage(NamedTuple):
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class NerReport:
    per_class: dict[str, PRF]

    @property
    def macro(self) -> MacroAverage | None:
        if not self.per_class:
            return None
        values = list(self.per_class.values())
        n = len(values)
        return MacroAverage(
            precision=sum(v.precision for v in values) / n,
            recall=sum(v.recall for v in values) / n,
            f1=sum(v.f1 for v in values) / n,
        )


def score_identification(pred: IdentificationResult,
                         gold: Sequence[bool]) -> PRF:
    """Token-position-level precision/recall/F1 of abbreviation flags."""
    if len(pred) != len(gold):
        raise MisalignedStreams(
            f"prediction has {len(pred)} tokens, gold has {len(gold)}")
    tp = fp = fn = 0
    for p, g in zip(pred.decisions, gold):
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
    return PRF.from_counts(tp, fp, fn)


# ---------------------------------------------------------------------------
# IOB spans
# ---------------------------------------------------------------------------

def spans_from_tags(tags: Sequence[str]) -> set[tuple[str, int, int]]:
    """Extract (label, start, end-exclusive) spans from an IOB tag sequence.

    A dangling I-X (no compatible open span) opens a new span; tags are
    repaired, never rejected.
    """
    spans: set[tuple[str, int, int]] = set()
    open_label = None
    open_start = 0
    for i, tag in enumerate(tags):
        if tag == "O" or not tag:
            if open_label is not None:
                spans.add((open_label, open_start, i))
                open_label = None
            continue
        if "-" in tag:
            prefix, _, label = tag.partition("-")
        else:
            prefix, label = "B", tag
        if prefix == "I" and open_label == label:
            continue
        if open_label is not None:
            spans.add((open_label, open_start, i))
        open_label = label
        open_start = i
    if open_label is not None:
        spans.add((open_label, open_start, len(tags)))
    return spans


def spans_to_iob(spans: set[tuple[str, int, int]], length: int) -> list[str]:
    """Serialize non-overlapping spans back to IOB tags."""
    tags = ["O"] * length
    for label, start, end in sorted(spans):
        for i in range(start, end):
            tags[i] = ("B-" if i == start else "I-") + label
    return tags


def extract_spans(sentence: Sentence) -> set[tuple[str, int, int]]:
    return spans_from_tags([t.entity_tag for t in sentence.tokens])


def score_ner(pred_docs: Sequence[Document],
              gold_docs: Sequence[Document]) -> NerReport:
    """Exact-match span scoring per class, aligned by (doc_id, sent_index)."""
    pred_map = {s.key(): s for d in pred_docs for s in d.sentences}
    gold_map = {s.key(): s for d in gold_docs for s in d.sentences}
    if set(pred_map) != set(gold_map):
        raise UnalignedCorpora(set(pred_map) ^ set(gold_map))
    counts: dict[str, list[int]] = {}  # label -> [tp, fp, fn]
    for key in gold_map:
        pred_spans = extract_spans(pred_map[key])
        gold_spans = extract_spans(gold_map[key])
        for span in pred_spans & gold_spans:
            counts.setdefault(span[0], [0, 0, 0])[0] += 1
        for span in pred_spans - gold_spans:
            counts.setdefault(span[0], [0, 0, 0])[1] += 1
        for span in gold_spans - pred_spans:
            counts.setdefault(span[0], [0, 0, 0])[2] += 1
    per_class = {label: PRF.from_counts(*counts[label])
                 for label in sorted(counts)}
    return NerReport(per_class=per_class)


def substitute_gold_expansions(doc: Document) -> Document:
    """Replace every abbreviation surface with its gold expansion.

    Everything else (tags, spacing, neighbouring tokens) stays untouched;
    the result is flagged as the expanded stream.
    """
    new_sentences = []
    for sent in doc.sentences:
        new_tokens = []
        for idx, tok in enumerate(sent.tokens):
            if tok.is_abbr:
                if tok.gold_expansion is None:
                    raise MissingGoldExpansion((doc.doc_id, sent.sent_index, idx))
                tok = replace(tok, surface=tok.gold_expansion)
            new_tokens.append(tok)
        new_sentences.append(replace(sent, tokens=tuple(new_tokens)))
    return replace(doc, sentences=tuple(new_sentences), stream="expanded")


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def _prf_row(prf: PRF) -> dict:
    return {"precision": fmt2(prf.precision), "recall": fmt2(prf.recall),
            "f1": fmt2(prf.f1), "tp": prf.tp, "fp": prf.fp, "fn": prf.fn}


def emit_report(report: PRF | NerReport, fmt: str = "tsv") -> bytes:
    """Serialize a report deterministically as TSV, JSON or a markdown table."""
    if isinstance(report, PRF):
        rows = [("overall", report)]
        macro = None
    else:
        rows = list(report.per_class.items())
        macro = report.macro

    if fmt == "json":
        payload: dict = {"per_class": {label: _prf_row(prf) for label, prf in rows}}
        if not isinstance(report, PRF):
            payload["macro"] = (None if macro is None else
                                {"precision": fmt2(macro.precision),
                                 "recall": fmt2(macro.recall),
                                 "f1": fmt2(macro.f1)})
        return (json.dumps(payload, sort_keys=True, indent=2,
                           ensure_ascii=False) + "\n").encode("utf-8")

    if fmt == "tsv":
        lines = ["label\tprecision\trecall\tf1\ttp\tfp\tfn"]
        for label, prf in rows:
            lines.append(f"{label}\t{fmt2(prf.precision)}\t{fmt2(prf.recall)}"
                         f"\t{fmt2(prf.f1)}\t{prf.tp}\t{prf.fp}\t{prf.fn}")
        if not isinstance(report, PRF):
            if macro is None:
                lines.append("macro_avg\t-\t-\t-\t\t\t")
            else:
                lines.append(f"macro_avg\t{fmt2(macro.precision)}"
                             f"\t{fmt2(macro.recall)}\t{fmt2(macro.f1)}\t\t\t")
        return ("\n".join(lines) + "\n").encode("utf-8")

    if fmt == "markdown":
        lines = ["| Label | P | R | F1 |", "| --- | --- | --- | --- |"]
        for label, prf in rows:
            lines.append(f"| {label} | {fmt2(prf.precision)} "
                         f"| {fmt2(prf.recall)} | {fmt2(prf.f1)} |")
        if not isinstance(report, PRF):
            if macro is None:
                lines.append("| macro_avg | - | - | - |")
            else:
                lines.append(f"| macro_avg | {fmt2(macro.precision)} "
                             f"| {fmt2(macro.recall)} | {fmt2(macro.f1)} |")
        return ("\n".join(lines) + "\n").encode("utf-8")

    raise ValueError(f"unknown report format {fmt!r}")

"""Dirty-token stream: whitespace-delimited chunks with punctuation attached.

Every identifier consumes this stream.  A chunk's ``clean`` form keeps only
letters, digits and full stops; a trailing full stop on the clean form is
what makes a chunk an abbreviation candidate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import Document, Sentence


class NotStopTerminated(ValueError):
    """Raised by strip_stop on input that does not end with a full stop."""


_CHUNK_RE = re.compile(r"\S+")


@dataclass(frozen=True)
class DirtyToken:
    raw: str
    clean: str
    starts_at: int  # byte offset into the source text
    ends_with_stop: bool
    sentence_ref: tuple[str, int, int] | None = None  # (doc_id, sent_index, position)


def clean_form(raw: str) -> str:
    """Drop every character that is not a letter, digit or full stop."""
    return "".join(c for c in raw if c.isalpha() or c.isdigit() or c == ".")


def strip_stop(clean: str) -> str:
    """Remove exactly the final full stop; interior stops are preserved."""
    if not clean.endswith("."):
        raise NotStopTerminated(f"{clean!r} does not end with a full stop")
    return clean[:-1]


def dirty_tokenize(text: str, sentence_ref_base: tuple[str, int] | None = None
                   ) -> list[DirtyToken]:
    """Split on Unicode whitespace into dirty tokens with byte offsets."""
    tokens: list[DirtyToken] = []
    byte_pos = 0
    prev_end = 0
    for position, match in enumerate(_CHUNK_RE.finditer(text)):
        byte_pos += len(text[prev_end:match.start()].encode("utf-8"))
        raw = match.group()
        clean = clean_form(raw)
        ref = None
        if sentence_ref_base is not None:
            ref = (*sentence_ref_base, position)
        tokens.append(DirtyToken(
            raw=raw,
            clean=clean,
            starts_at=byte_pos,
            ends_with_stop=clean.endswith("."),
            sentence_ref=ref,
        ))
        byte_pos += len(raw.encode("utf-8"))
        prev_end = match.end()
    return tokens


# ---------------------------------------------------------------------------
# document-level streams and gold alignment
# ---------------------------------------------------------------------------

def _token_spans(sentence: Sentence) -> tuple[str, list[tuple[int, int]]]:
    """Sentence text plus the [start, end) char span of each gold token."""
    spans = []
    pos = 0
    parts = []
    for tok in sentence.tokens:
        spans.append((pos, pos + len(tok.surface)))
        parts.append(tok.surface + tok.trailing)
        pos += len(tok.surface) + len(tok.trailing)
    return "".join(parts).rstrip(), spans


def sentence_alignment(sentence: Sentence
                       ) -> tuple[list[DirtyToken], list[tuple[int, int]]]:
    """Dirty chunks of a sentence plus each chunk's covered gold-token range.

    The range is an inclusive (first, last) pair of indices into
    ``sentence.tokens``; a chunk like ``Trstu.`` covers both the word and
    its peeled stop.
    """
    text, spans = _token_spans(sentence)
    chunks = dirty_tokenize(text, sentence_ref_base=sentence.key())
    ranges: list[tuple[int, int]] = []
    for match in _CHUNK_RE.finditer(text):
        cs, ce = match.start(), match.end()
        covered = [i for i, (ts, te) in enumerate(spans) if ts < ce and te > cs]
        if not covered:  # pragma: no cover - chunks always cover some token
            raise ValueError("dirty chunk does not cover any gold token")
        ranges.append((covered[0], covered[-1]))
    return chunks, ranges


def sentence_dirty_tokens(sentence: Sentence) -> list[DirtyToken]:
    return sentence_alignment(sentence)[0]


def document_dirty_tokens(doc: Document) -> list[DirtyToken]:
    """The document's dirty-token stream, sentence by sentence."""
    stream: list[DirtyToken] = []
    for sent in doc.sentences:
        stream.extend(sentence_dirty_tokens(sent))
    return stream


def gold_labeled_tokens(doc: Document) -> list[tuple[DirtyToken, bool]]:
    """Dirty tokens paired with gold abbreviation labels.

    A chunk counts as a gold abbreviation when it covers at least one token
    flagged is_abbr.
    """
    labeled: list[tuple[DirtyToken, bool]] = []
    for sent in doc.sentences:
        chunks, ranges = sentence_alignment(sent)
        for chunk, (first, last) in zip(chunks, ranges):
            flag = any(sent.tokens[i].is_abbr for i in range(first, last + 1))
            labeled.append((chunk, flag))
    return labeled

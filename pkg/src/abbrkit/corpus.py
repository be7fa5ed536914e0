"""Corpus readers, writers, splits and statistics.

Two input encodings are supported:

* plain text with abbreviation markup: ``[[l.]]((leta))`` marks the
  abbreviation ``l.`` with its in-context expansion ``leta``; everything
  else is ordinary text, one sentence per line,
* CoNLL-U, ten tab-separated columns, with abbreviation and named-entity
  annotations carried as IOB tags in the last column (``B-PER|B-ABBR``).

Parsing keeps the exact inter-token whitespace so that a parsed markup
document serializes back byte-for-byte.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


class MalformedMarkup(ValueError):
    """Raised on unbalanced or mis-ordered markup brackets.

    ``offset`` is the byte offset (UTF-8) of the first violation.
    """

    def __init__(self, offset: int, message: str = "malformed markup"):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class MalformedConllu(ValueError):
    def __init__(self, line_no: int, message: str = "malformed CoNLL-U line"):
        super().__init__(f"{message} (line {line_no})")
        self.line_no = line_no


class UnknownIobTag(ValueError):
    def __init__(self, line_no: int, tag: str):
        super().__init__(f"unparseable IOB annotation {tag!r} (line {line_no})")
        self.line_no = line_no
        self.tag = tag


class EmptyCorpus(ValueError):
    """Raised when an operation that needs data receives an empty corpus."""


@dataclass(frozen=True)
class Token:
    """A single gold token.

    ``trailing`` is the exact whitespace that followed the token in the
    source text ("" when the next token is glued on); it is what makes
    detokenization and markup round-trips exact.  ``conllu_opaque`` holds
    the UPOS..DEPS columns of a CoNLL-U source verbatim; they are never
    interpreted.
    """

    surface: str
    is_abbr: bool = False
    gold_expansion: str | None = None
    entity_tag: str = "O"
    lemma: str | None = None
    trailing: str = " "
    abbr_iob: str | None = None
    misc_extra: tuple[str, ...] = ()
    conllu_opaque: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    sent_index: int
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("a sentence must contain at least one token")
        if self.sent_index < 0:
            raise ValueError("sent_index must be nonnegative")

    @property
    def text(self) -> str:
        """Detokenized sentence text, trailing whitespace stripped."""
        return "".join(t.surface + t.trailing for t in self.tokens).rstrip()

    def key(self) -> tuple[str, int]:
        return (self.doc_id, self.sent_index)


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[Sentence, ...] = ()
    leading: str = ""
    stream: str = "abbreviated"

    @property
    def raw_text(self) -> str:
        """The plain text stream (no markup brackets)."""
        parts = [self.leading]
        for sent in self.sentences:
            for tok in sent.tokens:
                parts.append(tok.surface + tok.trailing)
        return "".join(parts)


@dataclass(frozen=True)
class SplitSpec:
    """Train/dev/test fractions plus the seed that fixes the shuffle.

    Fractions are kept as exact rationals so that size allocation is
    deterministic; zero fractions are allowed (degenerate splits).
    """

    train_fraction: Fraction
    dev_fraction: Fraction
    test_fraction: Fraction
    seed: int = 0
    unit: str = "sentence"

    def __init__(self, train_fraction, dev_fraction, test_fraction,
                 seed: int = 0, unit: str = "sentence"):
        fractions = [_as_fraction(f) for f in
                     (train_fraction, dev_fraction, test_fraction)]
        for f in fractions:
            if f < 0 or f > 1:
                raise ValueError(f"fraction {f} outside [0, 1]")
        if abs(sum(fractions) - 1) > Fraction(1, 10**9):
            raise ValueError(f"fractions sum to {float(sum(fractions))}, not 1")
        if unit not in ("sentence", "document"):
            raise ValueError(f"unknown split unit {unit!r}")
        object.__setattr__(self, "train_fraction", fractions[0])
        object.__setattr__(self, "dev_fraction", fractions[1])
        object.__setattr__(self, "test_fraction", fractions[2])
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "unit", unit)

    @property
    def fractions(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.train_fraction, self.dev_fraction, self.test_fraction)


@dataclass(frozen=True)
class CorpusStats:
    split: str
    n_sentences: int
    n_abbr_instances: int
    n_unique_abbr: int
    n_unseen_vs_train: int | None


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        # str() gives the shortest round-trip repr, so 0.7 -> 7/10 exactly
        return Fraction(str(value))
    return Fraction(value)


# ---------------------------------------------------------------------------
# markup format
# ---------------------------------------------------------------------------

def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def _is_word_char(ch: str) -> bool:
    return ch.isalpha() or ch.isdigit()


def _split_plain_chunk(chunk: str) -> list[str]:
    """Separate leading/trailing punctuation from a whitespace-delimited chunk.

    Interior punctuation (``n.pr``, ``socialno-politični``) stays attached;
    each peeled edge character becomes its own token.
    """
    left: list[str] = []
    right: list[str] = []
    core = chunk
    while core and not _is_word_char(core[0]):
        left.append(core[0])
        core = core[1:]
    while core and not _is_word_char(core[-1]):
        right.append(core[-1])
        core = core[:-1]
    right.reverse()
    parts = left
    if core:
        parts = left + [core]
    return parts + right


def _lex_markup(text: str):
    """Split markup text into (surface, expansion-or-None, trailing) items.

    The expansion is None for plain chunks.  Raises MalformedMarkup on any
    stray or unterminated bracket digraph.
    """
    items = []
    n = len(text)
    i = 0
    while i < n and text[i].isspace():
        i += 1
    leading = text[:i]
    while i < n:
        two = text[i:i + 2]
        if two == "[[":
            close = text.find("]]", i + 2)
            if close < 0:
                raise MalformedMarkup(_byte_offset(text, i), "unterminated '[['")
            surface = text[i + 2:close]
            if not surface:
                raise MalformedMarkup(_byte_offset(text, i + 2), "empty abbreviation")
            if text[close + 2:close + 4] != "((":
                raise MalformedMarkup(_byte_offset(text, close + 2),
                                      "']]' not followed by '(('")
            end = text.find("))", close + 4)
            if end < 0:
                raise MalformedMarkup(_byte_offset(text, close + 2), "unterminated '(('")
            expansion = text[close + 4:end]
            if not expansion:
                raise MalformedMarkup(_byte_offset(text, close + 4), "empty expansion")
            i = end + 2
            item = (surface, expansion)
        elif two in ("]]", "((", "))"):
            raise MalformedMarkup(_byte_offset(text, i), f"stray {two!r}")
        else:
            start = i
            while i < n and not text[i].isspace():
                if text[i:i + 2] in ("[[", "]]", "((", "))"):
                    break
                i += 1
            item = (text[start:i], None)
        ws_start = i
        while i < n and text[i].isspace():
            i += 1
        items.append((item[0], item[1], text[ws_start:i]))
    return leading, items


def parse_markup_text(text: str, doc_id: str = "doc") -> Document:
    """Parse ``[[...]](( ...))`` marked-up plain text into a Document.

    Sentences are newline-separated.  Unmarked chunks are split into a core
    plus peeled edge punctuation; a marked abbreviation is always a single
    token and keeps its trailing full stop.
    """
    leading, items = _lex_markup(text)

    tokens: list[Token] = []  # current sentence
    sentences: list[Sentence] = []

    def flush():
        if tokens:
            sentences.append(Sentence(doc_id=doc_id, sent_index=len(sentences),
                                      tokens=tuple(tokens)))
            tokens.clear()

    prev_trailing = leading
    for surface, expansion, trailing in items:
        if "\n" in prev_trailing:
            flush()
        if expansion is not None:
            tokens.append(Token(surface=surface, is_abbr=True,
                                gold_expansion=expansion, trailing=trailing))
        else:
            parts = _split_plain_chunk(surface)
            for part in parts[:-1]:
                tokens.append(Token(surface=part, trailing=""))
            tokens.append(Token(surface=parts[-1], trailing=trailing))
        prev_trailing = trailing
    flush()
    return Document(doc_id=doc_id, sentences=tuple(sentences), leading=leading)


def serialize_markup_text(doc: Document) -> str:
    """Inverse of parse_markup_text; byte-exact on parsed input."""
    parts = [doc.leading]
    for sent in doc.sentences:
        for tok in sent.tokens:
            if tok.is_abbr and tok.gold_expansion is not None:
                parts.append(f"[[{tok.surface}]](({tok.gold_expansion}))")
            else:
                parts.append(tok.surface)
            parts.append(tok.trailing)
    return "".join(parts)


# ---------------------------------------------------------------------------
# CoNLL-U
# ---------------------------------------------------------------------------

_IOB_RE = re.compile(r"^([BI])-(.+)$")
ABBR_LABEL = "ABBR"


def _parse_misc(misc: str, line_no: int):
    """Split the last CoNLL-U column into (entity_tag, abbr_iob, extras, space_after)."""
    entity = "O"
    abbr_iob = None
    extras: list[str] = []
    space_after = True
    if misc == "_":
        return entity, abbr_iob, (), space_after
    seen_entity = False
    for part in misc.split("|"):
        if "=" in part:
            key, value = part.split("=", 1)
            if key == "SpaceAfter" and value == "No":
                space_after = False
            else:
                extras.append(part)
            continue
        if part == "O":
            continue
        m = _IOB_RE.match(part)
        if m is None:
            raise UnknownIobTag(line_no, part)
        if m.group(2) == ABBR_LABEL:
            abbr_iob = part
        else:
            if seen_entity:
                raise UnknownIobTag(line_no, misc)
            entity = part
            seen_entity = True
    return entity, abbr_iob, tuple(extras), space_after


def _iter_conllu_sentences(text: str):
    """Yield (comments, token_rows, first_line_no) per blank-line block."""
    comments: list[str] = []
    rows: list[tuple[int, list[str]]] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            if comments or rows:
                yield comments, rows
                comments, rows = [], []
            continue
        if line.startswith("#"):
            comments.append(line)
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise MalformedConllu(line_no, f"expected 10 columns, got {len(cols)}")
        rows.append((line_no, cols))
    if comments or rows:
        yield comments, rows


def _sentence_from_rows(comments, rows, doc_id, sent_index) -> Sentence:
    tokens: list[Token] = []
    for line_no, cols in rows:
        token_id = cols[0]
        if "-" in token_id or "." in token_id:
            continue  # multiword ranges and empty nodes carry no surface token
        entity, abbr_iob, extras, space_after = _parse_misc(cols[9], line_no)
        tokens.append(Token(
            surface=cols[1],
            is_abbr=abbr_iob is not None,
            entity_tag=entity,
            lemma=None if cols[2] == "_" else cols[2],
            trailing=" " if space_after else "",
            abbr_iob=abbr_iob,
            misc_extra=extras,
            conllu_opaque=tuple(cols[3:9]),
        ))
    if not tokens:
        first_line = rows[0][0] if rows else 0
        raise MalformedConllu(first_line, "sentence block without token lines")
    tokens[-1] = replace(tokens[-1], trailing="\n")
    return Sentence(doc_id=doc_id, sent_index=sent_index,
                    tokens=tuple(tokens), comments=tuple(comments))


def parse_conllu(text: str, stream: str = "abbreviated", doc_id: str = "doc") -> Document:
    """Parse one CoNLL-U text into a single Document.

    ``stream`` records which text stream the file carries ("abbreviated" or
    "expanded"); both parse identically.  Abbreviation flags and entity tags
    come from IOB fields in the last column; ``key=value`` fields there are
    preserved as opaque extras (SpaceAfter=No informs spacing).
    """
    if stream not in ("abbreviated", "expanded"):
        raise ValueError(f"unknown stream {stream!r}")
    sentences = []
    for comments, rows in _iter_conllu_sentences(text):
        sentences.append(_sentence_from_rows(comments, rows, doc_id, len(sentences)))
    return Document(doc_id=doc_id, sentences=tuple(sentences), stream=stream)


_NEWDOC_RE = re.compile(r"^#\s*newdoc(?:\s+id\s*=\s*(.*))?\s*$")


def parse_conllu_corpus(text: str, stream: str = "abbreviated") -> tuple[Document, ...]:
    """Parse a CoNLL-U file into one Document per ``# newdoc`` block.

    Files without newdoc comments yield a single document.
    """
    if stream not in ("abbreviated", "expanded"):
        raise ValueError(f"unknown stream {stream!r}")
    docs: list[Document] = []
    current: list[Sentence] = []
    current_id: str | None = None

    def flush():
        nonlocal current
        if current or current_id is not None:
            doc_id = current_id if current_id is not None else f"doc{len(docs)}"
            renum = [replace(s, doc_id=doc_id, sent_index=i)
                     for i, s in enumerate(current)]
            docs.append(Document(doc_id=doc_id, sentences=tuple(renum), stream=stream))
            current = []

    for comments, rows in _iter_conllu_sentences(text):
        newdoc_id = None
        for comment in comments:
            m = _NEWDOC_RE.match(comment)
            if m:
                newdoc_id = (m.group(1) or "").strip() \
                    or f"doc{len(docs) + (1 if current else 0)}"
        if newdoc_id is not None and (current or current_id is not None):
            flush()
        if newdoc_id is not None:
            current_id = newdoc_id
        sent = _sentence_from_rows(comments, rows, current_id or "doc0", len(current))
        current.append(sent)
    flush()
    if not docs:
        return ()
    return tuple(docs)


def serialize_conllu(doc: Document) -> str:
    """Write a Document back to CoNLL-U.

    Token ids are renumbered 1..n; the last column is rebuilt canonically
    (entity tag, then abbreviation tag, then preserved extras, then
    SpaceAfter=No).  ``# sent_id`` / ``# text`` comments survive verbatim.
    """
    out: list[str] = []
    for sent in doc.sentences:
        out.extend(sent.comments)
        for idx, tok in enumerate(sent.tokens, start=1):
            opaque = tok.conllu_opaque or ("_",) * 6
            fields = []
            if tok.entity_tag != "O":
                fields.append(tok.entity_tag)
            if tok.is_abbr:
                fields.append(tok.abbr_iob or f"B-{ABBR_LABEL}")
            if not fields:
                fields.append("O")
            fields.extend(tok.misc_extra)
            is_last = idx == len(sent.tokens)
            if tok.trailing == "" and not is_last:
                fields.append("SpaceAfter=No")
            out.append("\t".join([str(idx), tok.surface, tok.lemma or "_",
                                  *opaque, "|".join(fields)]))
        out.append("")
    return "\n".join(out) + ("\n" if out else "")


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

def allocate_largest_remainder(n: int, fractions: Sequence[Fraction]) -> list[int]:
    """Apportion n items over fractions; sizes sum to n exactly.

    Ties on the fractional remainder go to the split with the smaller base
    allocation (then to the earlier split), so 655 sentences at 70/10/20
    come out as 458/66/131.
    """
    quotas = [f * n for f in fractions]
    base = [int(q) for q in quotas]
    leftover = n - sum(base)
    order = sorted(range(len(fractions)),
                   key=lambda i: (-(quotas[i] - base[i]), base[i], i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def split_corpus(docs: Sequence[Document], spec: SplitSpec):
    """Deterministically partition a corpus into (train, dev, test) sentences.

    The partition is exhaustive and disjoint; re-running with the same seed
    reproduces it exactly.
    """
    if not docs or not any(d.sentences for d in docs):
        raise EmptyCorpus("cannot split an empty corpus")
    rng = random.Random(spec.seed)
    if spec.unit == "document":
        units: list = list(docs)
    else:
        units = [s for d in docs for s in d.sentences]
    rng.shuffle(units)
    sizes = allocate_largest_remainder(len(units), spec.fractions)
    bounds = [sizes[0], sizes[0] + sizes[1]]
    groups = (units[:bounds[0]], units[bounds[0]:bounds[1]], units[bounds[1]:])
    if spec.unit == "document":
        return tuple([s for d in g for s in d.sentences] for g in groups)
    return tuple(list(g) for g in groups)


# ---------------------------------------------------------------------------
# statistics
# ---------------------------------------------------------------------------

def abbr_type_counts(sentences: Iterable[Sentence], casefold: bool = False) -> Counter:
    """Count abbreviation instances per type (exact surface, stop included)."""
    counts: Counter = Counter()
    for sent in sentences:
        for tok in sent.tokens:
            if tok.is_abbr:
                key = tok.surface.casefold() if casefold else tok.surface
                counts[key] += 1
    return counts


def compute_stats(splits: Mapping[str, Sequence[Sentence]],
                  casefold: bool = False,
                  total_row: bool = True) -> list[CorpusStats]:
    """Per-split sentence/abbreviation statistics plus a combined total row.

    Unseen counts are relative to the "train" split when one is given
    (always 0 for train itself, None when no reference exists).
    """
    train_types = None
    if "train" in splits:
        train_types = set(abbr_type_counts(splits["train"], casefold))
    rows = []
    for name, sentences in splits.items():
        counts = abbr_type_counts(sentences, casefold)
        if train_types is None:
            unseen = None
        elif name == "train":
            unseen = 0
        else:
            unseen = len(set(counts) - train_types)
        rows.append(CorpusStats(
            split=name,
            n_sentences=len(list(sentences)),
            n_abbr_instances=sum(counts.values()),
            n_unique_abbr=len(counts),
            n_unseen_vs_train=unseen,
        ))
    if total_row:
        all_sentences = [s for sentences in splits.values() for s in sentences]
        counts = abbr_type_counts(all_sentences, casefold)
        rows.append(CorpusStats(
            split="total",
            n_sentences=len(all_sentences),
            n_abbr_instances=sum(counts.values()),
            n_unique_abbr=len(counts),
            n_unseen_vs_train=None,
        ))
    return rows


def stats_tsv(rows: Sequence[CorpusStats]) -> str:
    lines = ["split\tsentences\tabbr_instances\tunique_types\tunseen_types"]
    for row in rows:
        unseen = "" if row.n_unseen_vs_train is None else str(row.n_unseen_vs_train)
        lines.append(f"{row.split}\t{row.n_sentences}\t{row.n_abbr_instances}"
                     f"\t{row.n_unique_abbr}\t{unseen}")
    return "\n".join(lines) + "\n"

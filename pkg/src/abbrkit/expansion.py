"""In-context abbreviation expansion via mask-and-fill.

A provider predicts ranked candidates for a masked slot in a sentence; a
candidate is accepted only when one of the top-k (default 5) starts with
the same letter as the masked abbreviation, otherwise the abbreviation is
kept.  Providers: an interpolated bidirectional n-gram model trained on the
expanded text stream, or an HTTP bridge speaking ``POST /fill-mask``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Protocol, Sequence

import requests

from .corpus import Document, Sentence, Token
from .identifiers import IdentificationResult, MisalignedResults
from .tokenization import sentence_alignment


class ProviderUnavailable(ConnectionError):
    """The fill-mask endpoint cannot be reached."""


class ProviderProtocolError(ValueError):
    """The fill-mask endpoint answered outside the wire protocol."""


class EmptyVocabulary(ValueError):
    """The native provider has no training data to predict from."""


@dataclass(frozen=True)
class FillCandidate:
    token: str
    score: float


@dataclass(frozen=True)
class ExpansionPolicy:
    top_k: int = 5
    match_rule: str = "first_letter_case_insensitive"  # or "first_letter_exact"
    on_no_match: str = "keep_original"

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")
        if self.match_rule not in ("first_letter_case_insensitive",
                                   "first_letter_exact"):
            raise ValueError(f"unknown match_rule {self.match_rule!r}")
        if self.on_no_match != "keep_original":
            raise ValueError(f"unknown on_no_match {self.on_no_match!r}")


class FillMaskProvider(Protocol):
    def fill(self, tokens: Sequence[str], mask_index: int,
             top_k: int) -> list[FillCandidate]: ...


def fill_mask(provider: FillMaskProvider, sentence_tokens: Sequence[str],
              mask_index: int, top_k: int) -> list[FillCandidate]:
    """Query a provider and normalize the result.

    Guarantees at most top_k candidates, deduplicated by token, sorted by
    descending score with lexicographic tie-breaks.
    """
    if not 0 <= mask_index < len(sentence_tokens):
        raise ValueError(f"mask_index {mask_index} outside 0..{len(sentence_tokens) - 1}")
    raw = provider.fill(sentence_tokens, mask_index, top_k)
    best: dict[str, float] = {}
    for cand in raw:
        if cand.token not in best or cand.score > best[cand.token]:
            best[cand.token] = cand.score
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    return [FillCandidate(token=t, score=s) for t, s in ranked[:top_k]]


def _first_letter(text: str) -> str | None:
    for ch in text:
        if ch.isalpha():
            return ch
    return None


def choose_expansion(abbreviation: str, candidates: Sequence[FillCandidate],
                     policy: ExpansionPolicy) -> tuple[str, int] | None:
    """Minimal-rank candidate whose first letter matches the abbreviation's.

    Returns (token, rank) with 0-based rank, or None when nothing matches
    (the abbreviation is then kept).
    """
    target = _first_letter(abbreviation)
    if target is None:
        return None
    fold = policy.match_rule == "first_letter_case_insensitive"
    if fold:
        target = target.casefold()
    for rank, cand in enumerate(candidates[:policy.top_k]):
        letter = _first_letter(cand.token)
        if letter is None:
            continue
        if (letter.casefold() if fold else letter) == target:
            return cand.token, rank
    return None


def expand_candidate(sentence: Sentence, position: int,
                     policy: ExpansionPolicy,
                     provider: FillMaskProvider) -> str | None:
    """Expansion for the dirty token at ``position``, or None to keep it."""
    words = [chunk.raw for chunk in sentence_alignment(sentence)[0]]
    candidates = fill_mask(provider, words, position, policy.top_k)
    choice = choose_expansion(words[position], candidates, policy)
    return None if choice is None else choice[0]


# ---------------------------------------------------------------------------
# native provider: interpolated bidirectional context counts
# ---------------------------------------------------------------------------

DEFAULT_WEIGHTS = (0.2, 0.3, 0.3, 0.1, 0.1)  # left2, left1, right1, right2, prior


@dataclass(frozen=True)
class NgramContextModel:
    """Add-one smoothed context tables over the expanded training stream.

    For a fixed context the candidate scores form a proper distribution
    over the vocabulary (each component normalizes, and the interpolation
    weights of the available components are renormalized to sum to 1).
    """

    vocabulary: tuple[str, ...]
    unigram: Counter = field(default_factory=Counter)
    left1: dict = field(default_factory=dict)   # prev word -> Counter
    left2: dict = field(default_factory=dict)   # (prev2, prev1) -> Counter
    right1: dict = field(default_factory=dict)  # next word -> Counter
    right2: dict = field(default_factory=dict)  # (next1, next2) -> Counter
    weights: tuple[float, ...] = DEFAULT_WEIGHTS

    def fill(self, tokens: Sequence[str], mask_index: int,
             top_k: int) -> list[FillCandidate]:
        if not self.vocabulary:
            raise EmptyVocabulary("native provider was trained on no data")
        if not 0 <= mask_index < len(tokens):
            raise ValueError(f"mask_index {mask_index} out of range")
        components = self._components(tokens, mask_index)
        total_weight = sum(w for w, _, _ in components)
        vocab_size = len(self.vocabulary)
        scored = []
        for word in self.vocabulary:
            p = 0.0
            for weight, counter, denom in components:
                p += (weight / total_weight) * (counter.get(word, 0) + 1) / (denom + vocab_size)
            scored.append((word, p))
        scored.sort(key=lambda kv: (-kv[1], kv[0]))
        return [FillCandidate(token=w, score=s) for w, s in scored[:top_k]]

    def _components(self, tokens: Sequence[str], i: int):
        """(weight, count table, table total) per context available at i."""
        w_left2, w_left1, w_right1, w_right2, w_prior = self.weights
        components = []
        if i >= 2:
            key = (tokens[i - 2], tokens[i - 1])
            counter = self.left2.get(key, Counter())
            components.append((w_left2, counter, sum(counter.values())))
        if i >= 1:
            counter = self.left1.get(tokens[i - 1], Counter())
            components.append((w_left1, counter, sum(counter.values())))
        if i + 1 < len(tokens):
            counter = self.right1.get(tokens[i + 1], Counter())
            components.append((w_right1, counter, sum(counter.values())))
        if i + 2 < len(tokens):
            key = (tokens[i + 1], tokens[i + 2])
            counter = self.right2.get(key, Counter())
            components.append((w_right2, counter, sum(counter.values())))
        components.append((w_prior, self.unigram, sum(self.unigram.values())))
        return components


def train_ngram_model(sentences: Iterable[Sequence[str]],
                      extra_vocab: Iterable[str] = (),
                      weights: tuple[float, ...] = DEFAULT_WEIGHTS
                      ) -> NgramContextModel:
    """Count context tables from tokenized sentences of the expanded stream."""
    unigram: Counter = Counter()
    left1: dict = {}
    left2: dict = {}
    right1: dict = {}
    right2: dict = {}
    vocab: set[str] = set(extra_vocab)
    for sent in sentences:
        words = list(sent)
        vocab.update(words)
        for i, word in enumerate(words):
            unigram[word] += 1
            if i >= 1:
                left1.setdefault(words[i - 1], Counter())[word] += 1
            if i >= 2:
                left2.setdefault((words[i - 2], words[i - 1]), Counter())[word] += 1
            if i + 1 < len(words):
                right1.setdefault(words[i + 1], Counter())[word] += 1
            if i + 2 < len(words):
                right2.setdefault((words[i + 1], words[i + 2]), Counter())[word] += 1
    return NgramContextModel(vocabulary=tuple(sorted(vocab)), unigram=unigram,
                             left1=left1, left2=left2, right1=right1,
                             right2=right2, weights=weights)


def ngram_sentences_from_documents(docs: Iterable[Document]) -> list[list[str]]:
    """Whitespace-chunk sentences, the same unit the providers see at fill time."""
    out = []
    for doc in docs:
        for sent in doc.sentences:
            out.append(sent.text.split())
    return out


# ---------------------------------------------------------------------------
# HTTP provider
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HttpFillMaskProvider:
    endpoint: str
    timeout: float = 30.0

    def fill(self, tokens: Sequence[str], mask_index: int,
             top_k: int) -> list[FillCandidate]:
        url = self.endpoint.rstrip("/") + "/fill-mask"
        body = {"tokens": list(tokens), "mask_index": mask_index, "top_k": top_k}
        try:
            response = requests.post(url, json=body, timeout=self.timeout)
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise ProviderUnavailable(f"cannot reach {url}: {exc}") from exc
        if response.status_code != 200:
            raise ProviderProtocolError(f"{url} answered HTTP {response.status_code}")
        try:
            payload = response.json()
        except ValueError as exc:
            raise ProviderProtocolError(f"{url} returned non-JSON body") from exc
        candidates = payload.get("candidates") if isinstance(payload, dict) else None
        if not isinstance(candidates, list):
            raise ProviderProtocolError(f"missing candidates list in {payload!r}")
        out = []
        for item in candidates:
            if (not isinstance(item, dict) or not isinstance(item.get("token"), str)
                    or not isinstance(item.get("score"), (int, float))):
                raise ProviderProtocolError(f"bad candidate entry {item!r}")
            out.append(FillCandidate(token=item["token"], score=float(item["score"])))
        return out


# ---------------------------------------------------------------------------
# document expansion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpansionRecord:
    doc_id: str
    sent_index: int
    position: int
    surface: str
    action: str  # "kept" or "expanded"
    expansion: str | None = None
    rank: int | None = None


@dataclass(frozen=True)
class ExpansionLog:
    records: tuple[ExpansionRecord, ...]

    @property
    def n_expanded(self) -> int:
        return sum(1 for r in self.records if r.action == "expanded")

    @property
    def n_kept(self) -> int:
        return sum(1 for r in self.records if r.action == "kept")

    def to_tsv(self) -> str:
        lines = ["doc_id\tsent_index\tposition\tsurface\taction\texpansion\trank"]
        for r in self.records:
            expansion = r.expansion if r.expansion is not None else ""
            rank = str(r.rank) if r.rank is not None else ""
            lines.append(f"{r.doc_id}\t{r.sent_index}\t{r.position}\t{r.surface}"
                         f"\t{r.action}\t{expansion}\t{rank}")
        return "\n".join(lines) + "\n"


def expand_document(doc: Document, flags: IdentificationResult,
                    policy: ExpansionPolicy, provider: FillMaskProvider,
                    cascade: bool = False) -> tuple[Document, ExpansionLog]:
    """Mask-and-fill every flagged dirty token of a document.

    Each flagged token is masked against the original sentence (no
    cascading) unless ``cascade`` asks for sequential left-to-right
    substitution.  Unflagged tokens are never touched.  Provider errors
    propagate before any partial result is built.
    """
    sentence_data = []
    total_chunks = 0
    for sent in doc.sentences:
        chunks, ranges = sentence_alignment(sent)
        sentence_data.append((sent, chunks, ranges))
        total_chunks += len(chunks)
    if len(flags) != total_chunks:
        raise MisalignedResults(
            f"flags cover {len(flags)} tokens, document has {total_chunks}")

    records: list[ExpansionRecord] = []
    new_sentences: list[Sentence] = []
    offset = 0
    for sent, chunks, ranges in sentence_data:
        original_words = [c.raw for c in chunks]
        context_words = list(original_words)
        proposed: dict[int, tuple[str, int]] = {}
        for position, chunk in enumerate(chunks):
            if not flags.decisions[offset + position]:
                continue
            words = context_words if cascade else original_words
            candidates = fill_mask(provider, words, position, policy.top_k)
            choice = choose_expansion(chunk.raw, candidates, policy)
            if choice is not None and choice[0] != chunk.raw:
                proposed[position] = choice
                if cascade:
                    context_words[position] = choice[0]

        # a proposal only applies when its token range was not already
        # consumed (two chunks can cover one gold token if a marked-up
        # surface contains whitespace)
        applied: set[int] = set()
        new_tokens: list[Token] = []
        next_token = 0
        for position, (first, last) in enumerate(ranges):
            if position in proposed and first >= next_token:
                span = sent.tokens[first:last + 1]
                new_tokens.append(Token(
                    surface=proposed[position][0],
                    entity_tag=span[0].entity_tag,
                    trailing=span[-1].trailing,
                ))
                applied.add(position)
            else:
                new_tokens.extend(sent.tokens[max(first, next_token):last + 1])
            next_token = max(next_token, last + 1)
        new_sentences.append(replace(sent, tokens=tuple(new_tokens)))

        for position, chunk in enumerate(chunks):
            if not flags.decisions[offset + position]:
                continue
            if position in applied:
                expansion, rank = proposed[position]
                records.append(ExpansionRecord(
                    doc_id=sent.doc_id, sent_index=sent.sent_index,
                    position=position, surface=chunk.raw, action="expanded",
                    expansion=expansion, rank=rank))
            else:
                records.append(ExpansionRecord(
                    doc_id=sent.doc_id, sent_index=sent.sent_index,
                    position=position, surface=chunk.raw, action="kept"))
        offset += len(chunks)
    new_doc = Document(doc_id=doc.doc_id, sentences=tuple(new_sentences),
                       leading=doc.leading, stream="expanded")
    return new_doc, ExpansionLog(records=tuple(records))

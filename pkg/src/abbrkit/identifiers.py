"""Dictionary and corpus-frequency abbreviation identifiers.

The corpus identifier counts, for every token type, how often it occurs in
abbreviation position (directly before a free-standing full stop, or with
one attached) versus anywhere else, and flags a type whenever

    p = count_abbr_position / (count_abbr_position + count_elsewhere)

reaches the decision threshold (0.8 by default).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import EmptyCorpus
from .tokenization import DirtyToken, clean_form


class NotACandidate(KeyError):
    """Type missing from one of the two count lists in strict mode."""


class UndefinedProbability(ZeroDivisionError):
    """Both counts are zero, so the ratio is undefined."""


class MisalignedResults(ValueError):
    """Identification results over different token streams cannot be merged."""


DEFAULT_THRESHOLD = 0.8


@dataclass(frozen=True)
class DictionaryResource:
    """A word list; tokens whose stop-stripped form is absent are flagged."""

    entries: frozenset[str]
    name: str = "dict"
    case_mode: str = "exact"  # "exact" or "lower" (exact plus lowercase fallback)

    def __post_init__(self):
        if self.case_mode not in ("exact", "lower"):
            raise ValueError(f"unknown case_mode {self.case_mode!r}")

    def contains(self, word: str) -> bool:
        if word in self.entries:
            return True
        return self.case_mode == "lower" and word.lower() in self.entries


def load_dictionary(text: str, name: str = "dict",
                    case_mode: str = "exact") -> DictionaryResource:
    """One entry per line; blank lines and ``#`` comments are ignored."""
    entries = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        entries.add(line)
    if case_mode == "lower":
        entries |= {e.lower() for e in entries}
    return DictionaryResource(entries=frozenset(entries), name=name,
                              case_mode=case_mode)


@dataclass(frozen=True)
class IdentificationResult:
    decisions: tuple[bool, ...]
    method_tag: str

    def __len__(self) -> int:
        return len(self.decisions)


def dict_identify(tokens: Sequence[DirtyToken],
                  dictionary: DictionaryResource) -> IdentificationResult:
    """Flag stop-terminated tokens whose stripped form is not a known word.

    Tokens that do not end with a full stop are skipped (never flagged), and
    so are tokens that are nothing but the stop itself.
    """
    decisions = []
    for tok in tokens:
        if not tok.ends_with_stop:
            decisions.append(False)
            continue
        stripped = tok.clean[:-1]
        if not stripped:
            decisions.append(False)
            continue
        decisions.append(not dictionary.contains(stripped))
    return IdentificationResult(tuple(decisions), f"dict:{dictionary.name}")


# ---------------------------------------------------------------------------
# corpus bigram identifier
# ---------------------------------------------------------------------------

def bigram_key(surface: str, fold_case: bool = False) -> str:
    """Clean a surface and strip its trailing stop so both lists share keys."""
    key = clean_form(surface)
    if key.endswith("."):
        key = key[:-1]
    if fold_case:
        key = key.casefold()
    return key


@dataclass(frozen=True)
class BigramModel:
    """Per-type counts in abbreviation position (a) and elsewhere (b)."""

    counts_a: dict[str, int]
    counts_b: dict[str, int]
    threshold: float = DEFAULT_THRESHOLD
    require_both: bool = True
    fold_case: bool = False

    def key_for(self, surface: str) -> str:
        return bigram_key(surface, self.fold_case)


def bigram_corpus_tokens(text: str) -> list[tuple[str, bool]]:
    """The identifier's own training tokenizer.

    Whitespace split, then trailing punctuation peeled into separate tokens
    (each character its own token), and each surface paired with a flag
    telling whether the next token is a free-standing full stop.
    """
    surfaces: list[str] = []
    for chunk in text.split():
        trailing: list[str] = []
        while chunk and not (chunk[-1].isalpha() or chunk[-1].isdigit()):
            trailing.append(chunk[-1])
            chunk = chunk[:-1]
        if chunk:
            surfaces.append(chunk)
        surfaces.extend(reversed(trailing))
    return [(surface, i + 1 < len(surfaces) and surfaces[i + 1] == ".")
            for i, surface in enumerate(surfaces)]


def train_bigram(corpus_tokens: Iterable[tuple[str, bool]],
                 threshold: float = DEFAULT_THRESHOLD,
                 require_both: bool = True,
                 fold_case: bool = False) -> BigramModel:
    """Count each (surface, follows_stop) pair into the a/b lists.

    A token lands in the abbreviation-position list when it is followed by a
    free-standing full stop or carries one attached; otherwise it counts as
    an ordinary occurrence.  Keys are cleaned and stop-stripped so both
    lists share a key space; purely punctuational tokens are not counted.
    """
    counts_a: dict[str, int] = {}
    counts_b: dict[str, int] = {}
    saw_any = False
    for surface, follows_stop in corpus_tokens:
        saw_any = True
        key = bigram_key(surface, fold_case)
        if not key:
            continue
        if follows_stop or clean_form(surface).endswith("."):
            counts_a[key] = counts_a.get(key, 0) + 1
        else:
            counts_b[key] = counts_b.get(key, 0) + 1
    if not saw_any:
        raise EmptyCorpus("bigram training needs a non-empty corpus")
    return BigramModel(counts_a, counts_b, threshold=threshold,
                       require_both=require_both, fold_case=fold_case)


def bigram_probability(model: BigramModel, token_type: str) -> float:
    """freq_a / (freq_a + freq_b) for a (already keyed) token type."""
    a = model.counts_a.get(token_type, 0)
    b = model.counts_b.get(token_type, 0)
    if model.require_both:
        if token_type not in model.counts_a or token_type not in model.counts_b:
            raise NotACandidate(token_type)
    elif a + b == 0:
        raise UndefinedProbability(token_type)
    return a / (a + b)


def bigram_identify(tokens: Sequence[DirtyToken],
                    model: BigramModel) -> IdentificationResult:
    """Flag tokens whose type reaches the threshold; non-candidates are skipped.

    The decision depends only on the token's type, not on whether this
    particular occurrence carries a stop.
    """
    decisions = []
    for tok in tokens:
        key = model.key_for(tok.raw)
        if not key:
            decisions.append(False)
            continue
        try:
            p = bigram_probability(model, key)
        except (NotACandidate, UndefinedProbability):
            decisions.append(False)
            continue
        decisions.append(p >= model.threshold)
    return IdentificationResult(tuple(decisions), "bigram")


def union_identify(results: Sequence[IdentificationResult]) -> IdentificationResult:
    """Per-token logical OR over aligned identification results."""
    if not results:
        raise MisalignedResults("need at least one result")
    length = len(results[0])
    for r in results[1:]:
        if len(r) != length:
            raise MisalignedResults(
                f"result lengths differ: {length} vs {len(r)}")
    merged = tuple(any(r.decisions[i] for r in results) for i in range(length))
    tag = "+".join(r.method_tag for r in results)
    return IdentificationResult(merged, tag)


# ---------------------------------------------------------------------------
# model persistence
# ---------------------------------------------------------------------------

def save_bigram_model(model: BigramModel) -> str:
    """TSV rows ``type  count_a  count_b`` sorted by type, with a header line."""
    header = f"#threshold={model.threshold} require_both={str(model.require_both).lower()}"
    if model.fold_case:
        header += " fold_case=true"
    lines = [header]
    for key in sorted(set(model.counts_a) | set(model.counts_b)):
        lines.append(f"{key}\t{model.counts_a.get(key, 0)}\t{model.counts_b.get(key, 0)}")
    return "\n".join(lines) + "\n"


def load_bigram_model(text: str) -> BigramModel:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("bigram model file must start with a '#' header line")
    threshold = DEFAULT_THRESHOLD
    require_both = True
    fold_case = False
    for item in lines[0].lstrip("#").split():
        key, _, value = item.partition("=")
        if key == "threshold":
            threshold = float(value)
        elif key == "require_both":
            require_both = value == "true"
        elif key == "fold_case":
            fold_case = value == "true"
    counts_a: dict[str, int] = {}
    counts_b: dict[str, int] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ValueError(f"bad bigram model row at line {line_no}")
        key, a, b = cols[0], int(cols[1]), int(cols[2])
        if a:
            counts_a[key] = a
        if b:
            counts_b[key] = b
    return BigramModel(counts_a, counts_b, threshold=threshold,
                       require_both=require_both, fold_case=fold_case)

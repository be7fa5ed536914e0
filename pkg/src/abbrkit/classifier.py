"""Trainable per-token abbreviation classifier.

Each dirty token is classified independently of its neighbours: the native
scorer is an L2-regularized logistic regression over boundary-marked
character n-grams plus a handful of shape features, trained by seeded SGD
with per-epoch model selection on the development set.  A remote scorer
speaking the ``POST /classify-token`` protocol is interchangeable with it.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

import numpy as np
import requests

from .evaluation import PRF, score_identification
from .identifiers import IdentificationResult
from .tokenization import DirtyToken


class DegenerateTraining(ValueError):
    """Training data is missing one of the two classes."""


class BridgeUnavailable(ConnectionError):
    """The remote scorer endpoint cannot be reached."""


class BridgeProtocolError(ValueError):
    """The remote scorer answered outside the wire protocol."""


BOUNDARY_START = "^"
BOUNDARY_END = "$"
DECISION_THRESHOLD = 0.5  # ties resolve to the negative class


@dataclass(frozen=True)
class TokenFeatures:
    char_ngrams: Counter
    length: int
    has_upper: bool
    all_upper: bool
    has_digit: bool
    ends_with_stop: bool
    has_interior_stop: bool


def extract_features(token: DirtyToken) -> TokenFeatures:
    """Context-free features of a single dirty token."""
    padded = BOUNDARY_START + token.raw + BOUNDARY_END
    ngrams: Counter = Counter()
    for n in (1, 2, 3):
        for i in range(len(padded) - n + 1):
            ngrams[padded[i:i + n]] += 1
    letters = [c for c in token.raw if c.isalpha()]
    interior = token.clean[:-1] if token.ends_with_stop else token.clean
    return TokenFeatures(
        char_ngrams=ngrams,
        length=len(token.raw),
        has_upper=any(c.isupper() for c in token.raw),
        all_upper=bool(letters) and all(c.isupper() for c in letters),
        has_digit=any(c.isdigit() for c in token.raw),
        ends_with_stop=token.ends_with_stop,
        has_interior_stop="." in interior,
    )


def feature_values(features: TokenFeatures) -> dict[str, float]:
    """Flatten TokenFeatures into a sparse name -> value map."""
    values: dict[str, float] = {f"ng:{g}": float(c)
                                for g, c in features.char_ngrams.items()}
    values["len"] = float(features.length)
    for name in ("has_upper", "all_upper", "has_digit",
                 "ends_with_stop", "has_interior_stop"):
        if getattr(features, name):
            values[name] = 1.0
    return values


@dataclass(frozen=True)
class Hyperparams:
    epochs: int = 5
    learning_rate: float = 0.1
    l2: float = 1e-4
    seed: int = 0


@dataclass(frozen=True)
class ScorerModel:
    weights: np.ndarray
    bias: float
    vocab: dict[str, int]
    hyperparams: Hyperparams

    def score(self, token: DirtyToken) -> float:
        return score_token(self, token)


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _vectorize(vocab: dict[str, int], token: DirtyToken):
    idx = []
    val = []
    for name, value in feature_values(extract_features(token)).items():
        j = vocab.get(name)
        if j is not None:
            idx.append(j)
            val.append(value)
    return np.array(idx, dtype=np.int64), np.array(val, dtype=np.float64)


def score_token(model: ScorerModel, token: DirtyToken) -> float:
    """Sigmoid of the linear score; always strictly inside (0, 1)."""
    idx, val = _vectorize(model.vocab, token)
    z = float(model.weights[idx] @ val) + model.bias if len(idx) else model.bias
    return _sigmoid(z)


def loss_and_gradient(weights: np.ndarray, bias: float,
                      matrix: np.ndarray, labels: np.ndarray, l2: float):
    """Mean logistic loss with L2 penalty, and its analytic gradient.

    Dense full-batch form, used for gradient checks and the monotonicity
    property; training itself runs sparse SGD.
    """
    z = matrix @ weights + bias
    p = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                 np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
    eps = 1e-12
    loss = -np.mean(labels * np.log(p + eps) + (1 - labels) * np.log(1 - p + eps))
    loss += 0.5 * l2 * float(weights @ weights)
    diff = p - labels
    grad_w = matrix.T @ diff / len(labels) + l2 * weights
    grad_b = float(np.mean(diff))
    return float(loss), grad_w, grad_b


@dataclass(frozen=True)
class SeedRun:
    seed: int
    epoch_dev: tuple[PRF, ...]
    selected_epoch: int  # 1-based; maximizes dev F1, earliest on ties
    dev: PRF
    test: PRF | None = None


@dataclass(frozen=True)
class TrainReport:
    runs: tuple[SeedRun, ...]

    @property
    def seeds(self) -> tuple[int, ...]:
        return tuple(r.seed for r in self.runs)

    @property
    def selected_epoch(self) -> int:
        return self.runs[0].selected_epoch

    @property
    def epoch_dev(self) -> tuple[PRF, ...]:
        return self.runs[0].epoch_dev

    def _summary(self, metrics: Sequence[PRF]) -> dict[str, dict[str, float]]:
        arrays = {name: np.array([getattr(m, name) for m in metrics])
                  for name in ("precision", "recall", "f1")}
        return {
            "mean": {k: float(v.mean()) for k, v in arrays.items()},
            "std": {k: float(v.std()) for k, v in arrays.items()},  # population
        }

    @property
    def dev_summary(self) -> dict[str, dict[str, float]]:
        return self._summary([r.dev for r in self.runs])

    @property
    def test_summary(self) -> dict[str, dict[str, float]] | None:
        if any(r.test is None for r in self.runs):
            return None
        return self._summary([r.test for r in self.runs])

    def to_json(self) -> str:
        def prf_dict(m: PRF | None):
            if m is None:
                return None
            return {"precision": m.precision, "recall": m.recall, "f1": m.f1,
                    "tp": m.tp, "fp": m.fp, "fn": m.fn}

        payload = {
            "seeds": list(self.seeds),
            "runs": [{
                "seed": r.seed,
                "selected_epoch": r.selected_epoch,
                "epoch_dev": [prf_dict(m) for m in r.epoch_dev],
                "dev": prf_dict(r.dev),
                "test": prf_dict(r.test),
            } for r in self.runs],
            "dev": self.dev_summary,
            "test": self.test_summary,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


LabeledTokens = Sequence[tuple[DirtyToken, bool]]


def evaluate_scorer(model: ScorerModel, data: LabeledTokens,
                    threshold: float = DECISION_THRESHOLD) -> PRF:
    pred = IdentificationResult(
        tuple(score_token(model, tok) > threshold for tok, _ in data),
        "classifier")
    return score_identification(pred, [label for _, label in data])


def build_vocab(train: LabeledTokens) -> dict[str, int]:
    names: set[str] = set()
    for tok, _ in train:
        names.update(feature_values(extract_features(tok)))
    return {name: i for i, name in enumerate(sorted(names))}


def train_scorer(train: LabeledTokens, dev: LabeledTokens,
                 hyperparams: Hyperparams = Hyperparams()
                 ) -> tuple[ScorerModel, TrainReport]:
    """Seeded SGD over the training tokens with per-epoch dev selection.

    The returned model is the snapshot from the epoch with the best dev F1.
    The same seed always reproduces bit-identical weights.
    """
    if not train:
        raise DegenerateTraining("training data is empty")
    labels = np.array([1.0 if y else 0.0 for _, y in train])
    if labels.min() == labels.max():
        raise DegenerateTraining("training data must contain both classes")
    vocab = build_vocab(train)
    rows = [_vectorize(vocab, tok) for tok, _ in train]

    hp = hyperparams
    rng = np.random.default_rng(hp.seed)
    weights = rng.normal(0.0, 0.01, size=len(vocab))
    bias = 0.0

    best = None  # (f1, epoch, weights, bias)
    epoch_dev: list[PRF] = []
    for epoch in range(1, hp.epochs + 1):
        for i in rng.permutation(len(rows)):
            idx, val = rows[i]
            z = float(weights[idx] @ val) + bias
            g = _sigmoid(z) - float(labels[i])
            # lazy L2: regularize only the touched coordinates
            weights[idx] -= hp.learning_rate * (g * val + hp.l2 * weights[idx])
            bias -= hp.learning_rate * g
        snapshot = ScorerModel(weights=weights.copy(), bias=bias,
                               vocab=vocab, hyperparams=hp)
        dev_prf = evaluate_scorer(snapshot, dev)
        epoch_dev.append(dev_prf)
        if best is None or dev_prf.f1 > best[0]:
            best = (dev_prf.f1, epoch, weights.copy(), bias)

    model = ScorerModel(weights=best[2], bias=best[3], vocab=vocab, hyperparams=hp)
    run = SeedRun(seed=hp.seed, epoch_dev=tuple(epoch_dev),
                  selected_epoch=best[1], dev=epoch_dev[best[1] - 1])
    return model, TrainReport(runs=(run,))


def multi_seed_protocol(seeds: Sequence[int], train: LabeledTokens,
                        dev: LabeledTokens, test: LabeledTokens,
                        hyperparams: Hyperparams = Hyperparams()) -> TrainReport:
    """Train once per seed and report mean/std of the selected models.

    Any seed's training error aborts the whole protocol.
    """
    if not seeds:
        raise ValueError("need at least one seed")
    runs = []
    for seed in seeds:
        model, report = train_scorer(train, dev, replace(hyperparams, seed=seed))
        run = report.runs[0]
        runs.append(replace(run, test=evaluate_scorer(model, test)))
    return TrainReport(runs=tuple(runs))


# ---------------------------------------------------------------------------
# scorer interface
# ---------------------------------------------------------------------------

class TokenScorer(Protocol):
    def score(self, token: DirtyToken) -> float: ...


def scorer_identify(tokens: Sequence[DirtyToken], scorer: TokenScorer,
                    threshold: float = DECISION_THRESHOLD,
                    method_tag: str = "classifier") -> IdentificationResult:
    """Turn any scorer into per-token decisions (score must exceed threshold)."""
    return IdentificationResult(
        tuple(scorer.score(tok) > threshold for tok in tokens), method_tag)


def remote_score(endpoint: str, token: DirtyToken, timeout: float = 10.0) -> float:
    """Ask a bridge service for p_abbr of one token."""
    url = endpoint.rstrip("/") + "/classify-token"
    try:
        response = requests.post(url, json={"token": token.raw}, timeout=timeout)
    except (requests.ConnectionError, requests.Timeout) as exc:
        raise BridgeUnavailable(f"cannot reach {url}: {exc}") from exc
    if response.status_code != 200:
        raise BridgeProtocolError(f"{url} answered HTTP {response.status_code}")
    try:
        payload = response.json()
    except ValueError as exc:
        raise BridgeProtocolError(f"{url} returned non-JSON body") from exc
    p = payload.get("p_abbr") if isinstance(payload, dict) else None
    if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0 <= p <= 1:
        raise BridgeProtocolError(f"missing or out-of-range p_abbr in {payload!r}")
    return float(p)


@dataclass(frozen=True)
class RemoteScorer:
    endpoint: str
    timeout: float = 10.0

    def score(self, token: DirtyToken) -> float:
        return remote_score(self.endpoint, token, timeout=self.timeout)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

MODEL_FORMAT = "abbrkit-scorer/1"


def save_scorer_model(model: ScorerModel) -> str:
    """Text format: a JSON header line, the bias, then feature/weight rows."""
    hp = model.hyperparams
    header = json.dumps({"format": MODEL_FORMAT, "epochs": hp.epochs,
                         "learning_rate": hp.learning_rate, "l2": hp.l2,
                         "seed": hp.seed}, sort_keys=True)
    lines = [header, f"__bias__\t{float(model.bias)!r}"]
    for name in sorted(model.vocab):
        lines.append(f"{name}\t{float(model.weights[model.vocab[name]])!r}")
    return "\n".join(lines) + "\n"


def load_scorer_model(text: str) -> ScorerModel:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty scorer model file")
    header = json.loads(lines[0])
    if header.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported scorer model format {header.get('format')!r}")
    hp = Hyperparams(epochs=header["epochs"], learning_rate=header["learning_rate"],
                     l2=header["l2"], seed=header["seed"])
    bias = 0.0
    names: list[str] = []
    values: list[float] = []
    for line in lines[1:]:
        if not line.strip():
            continue
        name, _, value = line.partition("\t")
        if name == "__bias__":
            bias = float(value)
        else:
            names.append(name)
            values.append(float(value))
    vocab = {name: i for i, name in enumerate(names)}
    return ScorerModel(weights=np.array(values, dtype=np.float64), bias=bias,
                       vocab=vocab, hyperparams=hp)

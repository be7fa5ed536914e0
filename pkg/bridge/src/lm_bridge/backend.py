"""Masked-LM inference backend.

The fill endpoint substitutes a single mask at the word position and
returns whole-word candidates only: with subword vocabularies (Ġ/▁ space
markers or ## continuations) pieces that would continue the previous word
are filtered out.
"""

from __future__ import annotations

import threading

import torch

from .config import BridgeConfig


class BackendNotReady(RuntimeError):
    pass


class MaskedLMBackend:
    """Loads a tokenizer, a masked LM and a classification head once."""

    def __init__(self, config: BridgeConfig):
        self.config = config
        self._ready = threading.Event()
        self._lock = threading.Lock()
        self.tokenizer = None
        self.mlm = None
        self.classifier = None
        self._space_marker = None

    @property
    def ready(self) -> bool:
        return self._ready.is_set()

    @property
    def model_id(self) -> str:
        return self.config.model

    def load(self) -> None:
        from transformers import (
            AutoModelForMaskedLM,
            AutoModelForSequenceClassification,
            AutoTokenizer,
        )

        with self._lock:
            if self.ready:
                return
            # the classification head of a plain MLM checkpoint is freshly
            # initialized; seeding keeps it identical across restarts
            torch.manual_seed(self.config.seed)
            self.tokenizer = AutoTokenizer.from_pretrained(self.config.model)
            self.mlm = AutoModelForMaskedLM.from_pretrained(self.config.model)
            self.mlm.to(self.config.device).eval()
            self.classifier = AutoModelForSequenceClassification.from_pretrained(
                self.config.model, num_labels=2)
            self.classifier.to(self.config.device).eval()
            self._space_marker = self._detect_space_marker()
            self._ready.set()

    def load_in_background(self) -> None:
        threading.Thread(target=self.load, daemon=True).start()

    def _detect_space_marker(self) -> str | None:
        vocab = self.tokenizer.get_vocab()
        for marker in ("Ġ", "▁"):  # Ġ (byte BPE) and ▁ (sentencepiece)
            if any(tok.startswith(marker) for tok in vocab):
                return marker
        return None

    def _require_ready(self):
        if not self.ready:
            raise BackendNotReady("model is still loading")

    def _whole_word(self, piece: str) -> str | None:
        """The candidate's surface form, or None for subword continuations."""
        if piece in self.tokenizer.all_special_tokens:
            return None
        if piece.startswith("##"):
            return None
        if self._space_marker is not None:
            if not piece.startswith(self._space_marker):
                return None
            piece = piece[len(self._space_marker):]
        word = piece.strip()
        return word or None

    @torch.no_grad()
    def fill_mask(self, tokens: list[str], mask_index: int,
                  top_k: int) -> list[dict]:
        self._require_ready()
        words = list(tokens)
        words[mask_index] = self.tokenizer.mask_token
        encoded = self.tokenizer(" ".join(words), return_tensors="pt")
        input_ids = encoded["input_ids"].to(self.config.device)
        mask_positions = (input_ids[0] == self.tokenizer.mask_token_id).nonzero()
        if len(mask_positions) == 0:
            raise ValueError("mask token was lost during tokenization")
        position = int(mask_positions[0, 0])
        logits = self.mlm(**{k: v.to(self.config.device)
                             for k, v in encoded.items()}).logits[0, position]
        probs = torch.softmax(logits, dim=-1)
        ranked = torch.argsort(probs, descending=True)
        candidates = []
        seen = set()
        for token_id in ranked.tolist():
            piece = self.tokenizer.convert_ids_to_tokens(token_id)
            word = self._whole_word(piece)
            if word is None or word in seen:
                continue
            seen.add(word)
            candidates.append({"token": word, "score": float(probs[token_id])})
            if len(candidates) >= top_k:
                break
        return candidates

    @torch.no_grad()
    def classify(self, token: str) -> float:
        self._require_ready()
        encoded = self.tokenizer(token, return_tensors="pt")
        logits = self.classifier(**{k: v.to(self.config.device)
                                    for k, v in encoded.items()}).logits
        return float(torch.softmax(logits, dim=-1)[0, 1])

"""Offline fine-tuning of the classification head on labeled tokens.

Input: TSV with either two columns (token, label 0/1) or the identifier
flag-file layout (doc_id, sent_index, position, raw, flag); a header line
is detected and skipped.  Output: a checkpoint directory the bridge can
serve directly.  Plain AdamW over cross-entropy, no scheduler; these are
pragmatic defaults, not a reference recipe.
"""

from __future__ import annotations

import random
from pathlib import Path

import torch


def read_labeled_tokens(path: str | Path) -> list[tuple[str, int]]:
    rows = []
    for line_no, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if line_no == 1 and cols[-1] in ("flag", "label"):
            continue
        if len(cols) == 2:
            token, label = cols
        elif len(cols) == 5:
            token, label = cols[3], cols[4]
        else:
            raise ValueError(f"{path}:{line_no}: expected 2 or 5 columns")
        if label not in ("0", "1"):
            raise ValueError(f"{path}:{line_no}: label must be 0 or 1")
        rows.append((token, int(label)))
    if not rows:
        raise ValueError(f"{path}: no labeled tokens")
    return rows


def finetune(model_id: str, train_path: str, out_dir: str, epochs: int = 5,
             learning_rate: float = 2e-5, batch_size: int = 16,
             seed: int = 0, device: str = "cpu") -> Path:
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    data = read_labeled_tokens(train_path)
    torch.manual_seed(seed)
    rng = random.Random(seed)

    tokenizer = AutoTokenizer.from_pretrained(model_id)
    model = AutoModelForSequenceClassification.from_pretrained(
        model_id, num_labels=2)
    model.to(device).train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=learning_rate)

    for _ in range(epochs):
        rng.shuffle(data)
        for start in range(0, len(data), batch_size):
            batch = data[start:start + batch_size]
            encoded = tokenizer([t for t, _ in batch], return_tensors="pt",
                                padding=True, truncation=True)
            labels = torch.tensor([y for _, y in batch], device=device)
            encoded = {k: v.to(device) for k, v in encoded.items()}
            loss = model(**encoded, labels=labels).loss
            loss.backward()
            optimizer.step()
            optimizer.zero_grad()

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model.eval()
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return out

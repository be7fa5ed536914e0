import pytest
import torch
from tokenizers import Tokenizer
from tokenizers.models import WordLevel
from tokenizers.pre_tokenizers import WhitespaceSplit

from lm_bridge.backend import MaskedLMBackend
from lm_bridge.config import BridgeConfig

WORDS = ["rojen", "leta", "1881", "v", "Trstu", ".", "l.", "umrl", "1950",
         "je", "bil", "profesor", "glej", "in"]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small word-level masked LM checkpoint built offline."""
    from transformers import (
        PreTrainedTokenizerFast,
        RobertaConfig,
        RobertaForMaskedLM,
    )

    specials = ["<s>", "</s>", "<pad>", "<unk>", "<mask>"]
    vocab = {tok: i for i, tok in enumerate(specials + WORDS)}
    tokenizer = Tokenizer(WordLevel(vocab, unk_token="<unk>"))
    tokenizer.pre_tokenizer = WhitespaceSplit()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer, bos_token="<s>", eos_token="</s>",
        pad_token="<pad>", unk_token="<unk>", mask_token="<mask>")

    torch.manual_seed(7)
    config = RobertaConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=1,
        num_attention_heads=2, intermediate_size=64,
        max_position_embeddings=64, pad_token_id=vocab["<pad>"],
        bos_token_id=vocab["<s>"], eos_token_id=vocab["</s>"])
    model = RobertaForMaskedLM(config)

    out = tmp_path_factory.mktemp("tiny-mlm")
    fast.save_pretrained(out)
    model.save_pretrained(out)
    return str(out)


@pytest.fixture(scope="session")
def loaded_backend(tiny_model_dir):
    backend = MaskedLMBackend(BridgeConfig(model=tiny_model_dir, top_k_max=8))
    backend.load()
    return backend

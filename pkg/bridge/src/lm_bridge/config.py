from dataclasses import dataclass


@dataclass(frozen=True)
class BridgeConfig:
    """Service configuration.

    ``model`` is a HuggingFace model identifier or a local checkpoint
    directory.  ``top_k_max`` must allow at least the five candidates the
    expansion policy inspects.
    """

    model: str
    host: str = "127.0.0.1"
    port: int = 8800
    top_k_max: int = 50
    device: str = "cpu"
    seed: int = 0

    def __post_init__(self):
        if self.top_k_max < 5:
            raise ValueError("top_k_max must be at least 5")
        if not self.model:
            raise ValueError("a model identifier is required")

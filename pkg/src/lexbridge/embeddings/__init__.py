from .formats import FORMATS, load_embeddings, save_embeddings
from .sgns import SgnsConfig, noise_distribution, pair_objective, train_sgns
from .space import EmbeddingSpace, normalize

__all__ = [
    "EmbeddingSpace", "FORMATS", "SgnsConfig", "load_embeddings", "noise_distribution",
    "normalize", "pair_objective", "save_embeddings", "train_sgns",
]

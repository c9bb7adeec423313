from .cleaning import BiasRule, BiasRuleSet, CleanArticle, reflect_clean, strip_bias
from .cluster import KMeansResult, kmeans, select_representative
from .pipeline import preprocess
from .vectorize import DocVector, cosine, tokenize, vectorize

__all__ = [
    "BiasRule", "BiasRuleSet", "CleanArticle", "reflect_clean", "strip_bias",
    "KMeansResult", "kmeans", "select_representative", "preprocess",
    "DocVector", "cosine", "tokenize", "vectorize",
]

"""Offensive-tweet classification toolkit.

Pieces: dataset loading and splitting (:mod:`offlang.data`), tweet
tokenization/normalization and hashtag segmentation (:mod:`offlang.preprocess`,
:mod:`offlang.segmentation`), word vectors and sequence encoding
(:mod:`offlang.embeddings`), a small numpy neural core (:mod:`offlang.nn`),
the three classifier architectures and their averaging ensemble
(:mod:`offlang.models`), the targeted-offense rule engine
(:mod:`offlang.heuristics`), and the evaluation harness
(:mod:`offlang.evaluation`). The ``offlang`` command wires them together.
"""

__version__ = "0.1.0"

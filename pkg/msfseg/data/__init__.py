"""
Data package for msfseg - synthetic corpus generation, transforms and corpus I/O
"""

from .synth import generate, derive_seeds
from .transforms import (distance_transform, boundary_distance, seed_oracle, lift_to_edges,
                         dtws_altitudes, smooth_image)
from .corpus import Sample, CorpusStore, make_sample, stream_corpus, generate_corpus

__all__ = ['generate', 'derive_seeds', 'distance_transform', 'boundary_distance', 'seed_oracle',
           'lift_to_edges', 'dtws_altitudes', 'smooth_image', 'Sample', 'CorpusStore',
           'make_sample', 'stream_corpus', 'generate_corpus']

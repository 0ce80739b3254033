"""
Engine package for msfseg - grid graphs, seeded watershed growth and the structured loss
"""

from .grid import (GridGraph, Image, Segmentation, SeedSet, cut_set, cut_mask, boundary_mask,
                   relabel_sequential)
from .msf import AltitudeProvider, FixedAltitude, GrowthRecord, grow, segmentation_of, path_to_seed
from .oracles import topographic_distance_oracle, msf_oracle
from .structured_loss import (ErrorAnalysis, find_incorrect_nodes, find_root_edges, weights_binary,
                              weights_discounted, structured_loss, perceptron_loss, analyze)

__all__ = ['GridGraph', 'Image', 'Segmentation', 'SeedSet', 'cut_set', 'cut_mask', 'boundary_mask',
           'relabel_sequential', 'AltitudeProvider', 'FixedAltitude', 'GrowthRecord', 'grow',
           'segmentation_of', 'path_to_seed', 'topographic_distance_oracle', 'msf_oracle',
           'ErrorAnalysis', 'find_incorrect_nodes', 'find_root_edges', 'weights_binary',
           'weights_discounted', 'structured_loss', 'perceptron_loss', 'analyze']

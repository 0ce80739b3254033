"""
msfseg - learned seeded watershed segmentation with structured training
"""

__version__ = "1.0.0"

from .engine import *
from .utils import Config, RunConfig

__all__ = ['Config', 'RunConfig', 'GridGraph', 'Image', 'Segmentation', 'SeedSet', 'grow',
           'segmentation_of', 'analyze']

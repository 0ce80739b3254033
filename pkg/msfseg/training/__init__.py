"""
Training package for msfseg - structured learning of altitude models
"""

from .trainer import EpochStats, TraceRow, StructuredTrainer, epoch_step, fit, evaluate, check_seeds

__all__ = ['EpochStats', 'TraceRow', 'StructuredTrainer', 'epoch_step', 'fit', 'evaluate',
           'check_seeds']

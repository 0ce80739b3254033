"""
Utils package for msfseg
"""

from .config import (Config, StageTypes, ModelKinds, WeightModes, SegmentMethods,
                     TrainConfig, SynthConfig, GenerateConfig, ModelConfig, GConfig, EvalConfig,
                     RunConfig)
from .errors import (MSFSegError, ContractViolation, InconsistentStateError, ConfigError,
                     ArrayFormatError, TrainingDivergedError)

__all__ = ['Config', 'StageTypes', 'ModelKinds', 'WeightModes', 'SegmentMethods',
           'TrainConfig', 'SynthConfig', 'GenerateConfig', 'ModelConfig', 'GConfig', 'EvalConfig', 'RunConfig',
           'MSFSegError', 'ContractViolation', 'InconsistentStateError', 'ConfigError',
           'ArrayFormatError', 'TrainingDivergedError']

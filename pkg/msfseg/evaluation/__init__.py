"""
Evaluation package for msfseg - metrics, baseline methods and comparison reports
"""

from .metrics import ScoreReport, ScoreAggregate, contingency, arand, voi, score, summarize, tolerance_mask
from .baselines import (BaselineSettings, baseline_altitudes, segment_baseline, segment_learned,
                        select_baseline_settings)
from .report import format_mean_std, score_frame, write_scores, read_scores, write_report

__all__ = ['ScoreReport', 'ScoreAggregate', 'contingency', 'arand', 'voi', 'score', 'summarize', 'tolerance_mask',
           'BaselineSettings', 'baseline_altitudes', 'segment_baseline', 'segment_learned',
           'select_baseline_settings', 'format_mean_std', 'score_frame', 'write_scores',
           'read_scores', 'write_report']

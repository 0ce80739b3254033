"""
Pipeline package for msfseg
"""

from .orchestrator import ExperimentOrchestrator

__all__ = ['ExperimentOrchestrator']

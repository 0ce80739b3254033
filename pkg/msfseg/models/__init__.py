"""
Models package for msfseg - learnable altitude providers and the boundary model g
"""

from .params import ModelParams, init_params, save_model, load_model
from .features import extract_patch, project_relative
from .boundary import predict_g, predict_g_map, train_g, augment
from .altitude import (StaticAltitudeModel, DynamicAltitudeModel, predict_static, predict_dynamic,
                       make_provider, grad_structured, structured_objective)
from .gradcheck import finite_diff_check, epsilon_sweep, structured_objective_fn

__all__ = ['ModelParams', 'init_params', 'save_model', 'load_model', 'extract_patch',
           'project_relative', 'predict_g', 'predict_g_map', 'train_g', 'augment',
           'StaticAltitudeModel', 'DynamicAltitudeModel', 'predict_static', 'predict_dynamic',
           'make_provider', 'grad_structured', 'structured_objective', 'finite_diff_check',
           'epsilon_sweep', 'structured_objective_fn']

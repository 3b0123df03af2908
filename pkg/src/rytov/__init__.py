"""Phaseless RF tomographic imaging toolkit.

Forward simulation of per-link Wi-Fi-band power measurements over a 2D
domain, linearized phaseless inversion with gradient-penalty regularization,
randomized training-corpus generation, and evaluation metrics.

Field convention everywhere: e^{+j omega t}, outgoing Green's function
(-j/4) H0^(2)(k0 rho); stored permittivities use eps_R + j*eps_I with
eps_I >= 0 meaning absorption.
"""

__version__ = "0.1.0"

from .geometry import (DoIGrid, PhysicsConfig, SensorLayout, SystemConfig,
                       default_config, load_config, make_layout)
from .greens import greens_2d, incident_field
from .mie import mie_cylinder_oracle
from .forward import (FieldGrid, MeasurementSet, PermittivityMap, add_noise,
                      background_subtract, solve_total_field, synthesize_power)
from .inverse import (ContrastPair, PrecomputedInverse, RegularizerConfig,
                      XraModelMatrix, assemble_xra, precompute_pi,
                      reconstruct, tikhonov_solve)
from .scenes import SceneSpec, Shape, rasterize, sample_scene
from .corpus import CorpusConfig, generate_corpus
from .metrics import MetricsReport, evaluate_pair, psnr

__all__ = [
    "DoIGrid", "PhysicsConfig", "SensorLayout", "SystemConfig",
    "default_config", "load_config", "make_layout",
    "greens_2d", "incident_field", "mie_cylinder_oracle",
    "FieldGrid", "MeasurementSet", "PermittivityMap", "add_noise",
    "background_subtract", "solve_total_field", "synthesize_power",
    "ContrastPair", "PrecomputedInverse", "RegularizerConfig",
    "XraModelMatrix", "assemble_xra", "precompute_pi", "reconstruct",
    "tikhonov_solve",
    "SceneSpec", "Shape", "rasterize", "sample_scene",
    "CorpusConfig", "generate_corpus",
    "MetricsReport", "evaluate_pair", "psnr",
]

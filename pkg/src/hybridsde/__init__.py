"""Hybrid multi-step estimation for ergodic diffusions observed with noise."""
from .asymptotics import (
    InformationEstimate, noise_matrix_W1, plug_in_information, sigma_index, sigma_inverse, vech,
)
from .bayes import McmcConfig, PosteriorSummary, initial_alpha, initial_beta, posterior_mean
from .contrasts import (
    H1_full, H1_tempered, H2_full, H2_tempered, W1, W2, ContrastValue, EffectiveDiffusion,
    contrast_derivatives,
)
from .errors import (
    ConfigError, DegeneratePosteriorError, InsufficientBlocksError, ModelEvaluationError,
    NonPDError, SimulationExplosionError, StageError,
)
from .harness import ExperimentConfig, ExperimentReport, load_experiment_config, ml_from_init, run_experiment
from .model import REGISTRY, ModelSpec, ParamSpace, derivative, eval_A, eval_b, get_model
from .multistep import HybridResult, NewtonTrace, hybrid_estimate, newton_refine_alpha, newton_refine_beta
from .preprocess import (
    LocalMeanSeries, NoiseVariance, NoisyObservations, estimate_noise_variance, local_means,
    read_observations, write_observations,
)
from .schedule import BlockSchedule, TuningConfig, compute_J1, compute_J2, make_schedule
from .simulate import SimulationConfig, batch_simulate, simulate_path

__version__ = "0.1.0"

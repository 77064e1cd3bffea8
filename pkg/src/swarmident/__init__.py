"""Metric-free identification of swarm-robot behaviors.

Candidate behavior models are coevolved against recurrent-network
classifiers inside a deterministic 2D swarm simulator; a least-squares
baseline engine and the analysis tools used to compare both are included.
"""

from ._kernels import backend_name
from .analysis import (dispersion, largest_cluster_fraction, mann_whitney,
                       mann_whitney_u, model_error, post_evaluate_classifier,
                       post_evaluate_classifiers, sensor_occupancy)
from .baseline import (BernoulliMixture, expected_sq_error, metric_error,
                       mixture_bruteforce, mixture_optimum, run_metric_es)
from .behaviors import (AGGREGATION_TRUTH, CLUSTERING_TRUTH,
                        ReactiveController, RecurrentController,
                        SectorReactiveController, random_reactive,
                        reactive_output, recurrent_output)
from .classifier import (ElmanNet, Judgment, SpeedSample, classifier_net,
                         judge)
from .coevolution import evaluate_generation, run_coevolution
from .config import ExperimentConfig, WorldConfig, load_config, load_preset
from .evolution import Individual, Population, es_step, init_population
from .sim import (WorldState, extract_speeds, initialize_world, run_trial,
                  sense_line_of_sight, sense_sector, step_trial)

__version__ = "0.1.0"

__all__ = [
    "AGGREGATION_TRUTH", "CLUSTERING_TRUTH", "BernoulliMixture", "ElmanNet",
    "ExperimentConfig", "Individual", "Judgment", "Population",
    "ReactiveController", "RecurrentController", "SectorReactiveController",
    "SpeedSample", "WorldConfig", "WorldState", "backend_name",
    "classifier_net", "dispersion", "es_step", "evaluate_generation",
    "expected_sq_error", "extract_speeds", "init_population",
    "initialize_world", "judge", "largest_cluster_fraction", "load_config",
    "load_preset", "mann_whitney", "mann_whitney_u", "metric_error",
    "mixture_bruteforce", "mixture_optimum", "model_error",
    "post_evaluate_classifier", "post_evaluate_classifiers", "random_reactive", "reactive_output",
    "recurrent_output", "run_coevolution", "run_metric_es", "run_trial",
    "sense_line_of_sight", "sense_sector", "sensor_occupancy", "step_trial",
]

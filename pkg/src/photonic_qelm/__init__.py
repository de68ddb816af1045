"""Photonic quantum extreme learning machine on a polarization/OAM quantum walk.

Input polarization qubits are scrambled by a two-step coined walk into the
orbital-angular-momentum register, post-selected on a polarization, measured
in the OAM basis, and a linear readout trained on known states recovers
Pauli expectation values.
"""
__version__ = "0.1.0"

from .estimator import EstimatorWeights, TrainingSet, ideal_weights, mse, predict, train  # noqa: E402
from .harness import ExperimentConfig, SweepResults, optimize_config, random_config, run_sweep  # noqa: E402
from .optics import CoinParams, OAMSpace, QPlateParams, coin_operator, qplate_operator  # noqa: E402
from .quantum import (  # noqa: E402
    DensityMatrix,
    Observable,
    PolarizationState,
    PrepParams,
    density,
    expectation,
    haar_random_state,
    input_state,
    pauli,
)
from .reservoir import (  # noqa: E402
    EffectivePOVM,
    WalkConfig,
    WalkStep,
    build_walk,
    effective_povm,
    frame_rank,
    two_step_walk,
    probabilities,
    reservoir_map,
)
from .sampling import CountVector, FeatureMode, FeatureVector, SamplingMode, features, sample_counts  # noqa: E402

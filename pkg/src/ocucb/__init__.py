"""Anytime optimally-confident UCB for subgaussian bandits, with simulation and verification tooling."""

__version__ = "0.1.0"

from .env import BanditInstance, NoiseKind, RngState, optimal_mean, sample_reward
from .policies import (
    IndexParams,
    PolicyKind,
    PolicyState,
    klucb_plus_index,
    moss_index,
    observe,
    ocucb_B,
    ocucb_denominator,
    ocucb_index,
    select_arm,
    ucb1_index,
)
from .sim import ExperimentConfig, PolicySpec, run_episode, run_experiment

__all__ = [
    "BanditInstance",
    "ExperimentConfig",
    "IndexParams",
    "NoiseKind",
    "PolicyKind",
    "PolicySpec",
    "PolicyState",
    "RngState",
    "klucb_plus_index",
    "moss_index",
    "observe",
    "ocucb_B",
    "ocucb_denominator",
    "ocucb_index",
    "optimal_mean",
    "run_episode",
    "run_experiment",
    "sample_reward",
    "select_arm",
    "ucb1_index",
]

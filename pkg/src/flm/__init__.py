"""Fourier Learning Machines: cosine networks with learnable frequencies.

Core pieces are re-exported here; the experiment runner lives in ``flm.cli``.
"""
from .lexi import SignMatrix, index_set, sign_factor, sign_matrix
from .model import EvalBundle, FlmModel, SubNetwork, init_model, lattice_frequencies, load, save
from .optim import AdamConfig, AdamState, DivergenceError, TrainConfig, TrainReport, adam_step, train, train_two_phase
from .xlate import SeparableBlock, eval_separable, to_separable_2d, to_separable_md

__version__ = "0.1.0"

__all__ = [
    "SignMatrix", "index_set", "sign_factor", "sign_matrix",
    "EvalBundle", "FlmModel", "SubNetwork", "init_model", "lattice_frequencies", "load", "save",
    "AdamConfig", "AdamState", "DivergenceError", "TrainConfig", "TrainReport", "adam_step",
    "train", "train_two_phase",
    "SeparableBlock", "eval_separable", "to_separable_2d", "to_separable_md",
]

"""
Useful constants for :mod:`mgtc`.
"""

__VERSION__ = "0.1.0"

# Reserved vocabulary entries, always at these indices
PAD_TOKEN = "<pad>"
OOV_TOKEN = "<unk>"
PAD_INDEX = 0
OOV_INDEX = 1

# Default hyperparameters
DEFAULT_HYPERPARAMS = {
    "embed_dim": 100,
    "hid": 64,
    "window_sizes": (1, 2, 3),
    "filters_per_size": 32,
    "mlp_layers": 2,
    "mlp_hidden": 64,
    "lambda1": 0.5,
    "lambda2": 0.5,
    "batch": 32,
    "lr": 1e-4,
    "iterations": 1000,
    "seed": 0,
    "summary": "final",
    "word_repr": "embedding",
    "use_gate": True,
}

# Adam defaults
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# Floor inside log() for cross-entropy
LOG_FLOOR = 1e-12

# Forget gate bias at initialization
FORGET_BIAS = 1.0

# Checkpoint format
CHECKPOINT_MAGIC = b"MGTC"
CHECKPOINT_VERSION = 1

# Fraction of training documents held out for best-model selection
DEV_FRACTION = 0.1

# Number of coordinates sampled per parameter by the gradient checker
GRADCHECK_COORDS = 32

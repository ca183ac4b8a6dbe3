"""
Minimal dense-tensor numerical core: tape gradients for a fixed set of \
        operations, named parameters, Adam and checkpoints.
"""
from mgtc.nn.checkpoint import load_checkpoint, save_checkpoint
from mgtc.nn.optim import AdamState, adam_step
from mgtc.nn.params import Binding, Parameter, ParamStore
from mgtc.nn.tensor import Tape, Tensor, constant

__all__ = ["AdamState", "Binding", "Parameter", "ParamStore", "Tape",
           "Tensor", "adam_step", "constant", "load_checkpoint",
           "save_checkpoint"]

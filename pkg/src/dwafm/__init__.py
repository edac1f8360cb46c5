"""DWAFM: dynamic weighted graph embedding + attention + frequency-domain MLPs."""

from .config import RunConfig
from .model import DwafmModel, make_model
from .tensor import ComplexTensor, Parameter, Tensor

__all__ = [
    "ComplexTensor",
    "DwafmModel",
    "Parameter",
    "RunConfig",
    "Tensor",
    "make_model",
]

__version__ = "0.1.0"

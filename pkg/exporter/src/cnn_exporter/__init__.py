"""Export multiscale CNN activations to FMAP tensor files."""

from .export import (
    SelectedLayer,
    export_feature_stack,
    list_supported_layers,
    supported_models,
)
from .fmap_writer import write_fmap

__version__ = "0.1.0"

__all__ = [
    "SelectedLayer",
    "export_feature_stack",
    "list_supported_layers",
    "supported_models",
    "write_fmap",
]

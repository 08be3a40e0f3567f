"""Optically detected magnetic resonance simulator for molecular triplet spins."""

from ._core import (
    __version__,
    cw_contrast,
    format_sequence,
    preset_names,
    run_preset,
    sensitivity,
    sequence_errors,
    transitions,
)

__all__ = [
    "__version__",
    "cw_contrast",
    "format_sequence",
    "preset_names",
    "run_preset",
    "sensitivity",
    "sequence_errors",
    "transitions",
]

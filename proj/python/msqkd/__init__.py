"""Mediated semi-quantum key distribution: key-rate bounds, thresholds and simulation."""

from ._core import (
    DomainError,
    NoKeyError,
    communication_cost,
    key_rate,
    qubit_efficiency,
    simulate,
    sweep,
    threshold,
)

__all__ = [
    "DomainError",
    "NoKeyError",
    "communication_cost",
    "key_rate",
    "qubit_efficiency",
    "simulate",
    "sweep",
    "threshold",
]

"""Interaction map systems: multitype contact processes and relatives."""

from ._core import (
    CapacityError,
    CftpBatchError,
    DomainError,
    Model,
    NoCoalescence,
    PreconditionError,
    builtin_defaults,
    builtin_names,
    check_map,
    reference_map,
    reference_map_names,
    run_cli,
)

__all__ = [
    "CapacityError",
    "CftpBatchError",
    "DomainError",
    "Model",
    "NoCoalescence",
    "PreconditionError",
    "builtin_defaults",
    "builtin_names",
    "check_map",
    "reference_map",
    "reference_map_names",
    "run_cli",
]

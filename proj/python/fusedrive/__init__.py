"""Python bindings for the fusedrive core library."""

from ._fusedrive import (
    ConfigError,
    ControlCommand,
    InvalidInput,
    IoError,
    PidController,
    control_arbitration,
    decode_depth_value,
    denormalize,
    driving_score,
    encode_depth_value,
    global_to_local,
    infraction_penalty,
    local_to_global,
    mgn_update,
    pid_control,
    simulate_expert,
    synthetic_sample,
)

__all__ = [
    "ConfigError",
    "ControlCommand",
    "InvalidInput",
    "IoError",
    "PidController",
    "control_arbitration",
    "decode_depth_value",
    "denormalize",
    "driving_score",
    "encode_depth_value",
    "global_to_local",
    "infraction_penalty",
    "local_to_global",
    "mgn_update",
    "pid_control",
    "simulate_expert",
    "synthetic_sample",
]

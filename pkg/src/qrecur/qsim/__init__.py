"""Minimal quantum-circuit simulator with dense and compressed backends."""
from .blocks import (
    build_block,
    controlled_modmul_block,
    map_step_block,
    matrix_step_block,
    translate_block,
    xor_copy_gates,
)
from .circuit import Circuit, ControlledBlock, GateStats, QFTBlock, gate_count
from .gates import (
    BasisPermutation,
    ControlledPhase,
    FlipX,
    Hadamard,
    MultiControlledX,
    MultiControlledZ,
    PhaseZ,
    Swap,
)
from .layout import Register, RegisterLayout
from .netlist import NetlistError, dumps, loads, read_netlist, write_netlist
from .state import (
    MeasurementRecord,
    PureState,
    ResourceError,
    alloc_state,
    apply,
    choose_backend,
    diffusion_ops,
    grover_diffusion,
    hadamard_register,
    iqft,
    measure,
    phase_flip_on_pattern,
    qft,
)

__all__ = [
    "alloc_state",
    "apply",
    "BasisPermutation",
    "build_block",
    "choose_backend",
    "Circuit",
    "controlled_modmul_block",
    "ControlledBlock",
    "ControlledPhase",
    "diffusion_ops",
    "dumps",
    "FlipX",
    "gate_count",
    "GateStats",
    "grover_diffusion",
    "Hadamard",
    "hadamard_register",
    "iqft",
    "loads",
    "map_step_block",
    "matrix_step_block",
    "measure",
    "MeasurementRecord",
    "MultiControlledX",
    "MultiControlledZ",
    "NetlistError",
    "phase_flip_on_pattern",
    "PhaseZ",
    "PureState",
    "qft",
    "QFTBlock",
    "read_netlist",
    "Register",
    "RegisterLayout",
    "ResourceError",
    "Swap",
    "translate_block",
    "write_netlist",
    "xor_copy_gates",
]

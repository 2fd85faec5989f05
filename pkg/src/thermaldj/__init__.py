"""Ensemble quantum computation from thermal equilibrium.

An exact density-operator simulator for the thermal-state Deutsch-Jozsa
algorithm, together with the machinery around it: symbolic product-operator
algebra, controlled phase oracles, effective-Hamiltonian decomposition, a
pulse-sequence compiler against a J-coupling topology, and multiplet
spectrum prediction for the readout.
"""

from .config import ConfigError, SpinSystemConfig, load_spin_system, parse_spin_system
from .dj import (
    DjDecision,
    DjOutcome,
    closed_form_expectation,
    outer_product_expansion,
    rho2_product_operators,
    run_dj,
)
from .heff import (
    DiagonalHamiltonian,
    anf_hamiltonian,
    decompose_diagonal,
    drop_identity,
    effective_hamiltonian,
    export_terms,
)
from .oracle import (
    BooleanOracle,
    FunctionClass,
    FunctionParseError,
    anf,
    classify,
    controlled_u,
    parse_function,
    u_f,
)
from .pulse import (
    Barrier,
    CompilationError,
    Delay,
    PulseProgram,
    Rotation,
    VerificationReport,
    compile_bilinear,
    compile_hamiltonian,
    compile_linear,
    compile_relayed_bilinear,
    compile_trilinear,
    serialize_program,
    simulate_program,
    snap_to_grid,
    streamline,
    verify,
)
from .spectrum import (
    Line,
    Multiplet,
    cnot,
    integrated_signal,
    multiplet_of,
    render_spectrum,
)
from .spin_algebra import (
    OperatorSum,
    ProductOperatorTerm,
    SpinAlgebraError,
    SpinSystem,
    conjugate,
    exp_commuting_zsum,
    expectation,
    matrix_to_terms,
    rotation_matrix,
    term_to_matrix,
)
from .thermal import ThermalParams, prepare_rho0, prepare_rho1, thermal_state

__version__ = "0.1.0"

__all__ = [
    "Barrier",
    "BooleanOracle",
    "CompilationError",
    "ConfigError",
    "Delay",
    "DiagonalHamiltonian",
    "DjDecision",
    "DjOutcome",
    "FunctionClass",
    "FunctionParseError",
    "Line",
    "Multiplet",
    "OperatorSum",
    "ProductOperatorTerm",
    "PulseProgram",
    "Rotation",
    "SpinAlgebraError",
    "SpinSystem",
    "SpinSystemConfig",
    "ThermalParams",
    "VerificationReport",
    "anf",
    "anf_hamiltonian",
    "classify",
    "closed_form_expectation",
    "cnot",
    "compile_bilinear",
    "compile_hamiltonian",
    "compile_linear",
    "compile_relayed_bilinear",
    "compile_trilinear",
    "conjugate",
    "controlled_u",
    "decompose_diagonal",
    "drop_identity",
    "effective_hamiltonian",
    "exp_commuting_zsum",
    "expectation",
    "export_terms",
    "integrated_signal",
    "load_spin_system",
    "matrix_to_terms",
    "multiplet_of",
    "outer_product_expansion",
    "parse_function",
    "parse_spin_system",
    "prepare_rho0",
    "prepare_rho1",
    "render_spectrum",
    "rho2_product_operators",
    "rotation_matrix",
    "run_dj",
    "serialize_program",
    "simulate_program",
    "snap_to_grid",
    "streamline",
    "term_to_matrix",
    "thermal_state",
    "u_f",
    "verify",
]

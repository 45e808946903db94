"""Gate-model compilation, pulse-level simulation and quantum kernel
estimation for neutral-atom registers."""

from .compiler import (
    CONSERVATIVE_TWO_PI_AMPLITUDE,
    Channel,
    CompilerConfig,
    Gate,
    GateCircuit,
    GateOp,
    PulseSequence,
    compile_circuit,
    invert,
)
from .dataset import Dataset, GroundTruth, Sample, generate, region_grid, truth_value
from .device import (
    CHADOQ2,
    Device,
    LatticeKind,
    LatticePattern,
    Register,
    blockade_radius,
    connectivity_graph,
    generate_lattice,
    get_device,
    max_rabi_for_radius,
    triangle_register,
    validate_register,
)
from .errors import CompileError, GenerationError, NumericalError, ValidationError
from .evolution import COMPILED
from .qke import (
    FeatureMapSpec,
    KernelEstimator,
    KernelMatrix,
    estimate_entry,
    estimate_matrix,
    executions_bound,
    feature_map,
    qke_circuit,
)
from .simulator import (
    BackendKind,
    BackendMode,
    PulseSimulator,
    QuantumState,
    ShotResult,
    evolve_pulse,
    ideal_gate_unitary,
    run_ideal,
    sample,
    zero_probability,
)
from .svm import SvmModel, accuracy, predict, rbf_kernel, train
from .waveform import BlackmanWaveform, Pulse, area, duration_for_angle, sample_envelope

__version__ = "0.1.0"

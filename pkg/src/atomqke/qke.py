"""Feature-map circuits and kernel-matrix estimation.

The kernel of two samples is the all-zero outcome probability of the
concatenated circuit: map x1 forward, then the adjoint of x2's map, and
measure.  Entries are estimated either exactly (statevector probability)
or from a finite number of shots; shot streams are seeded per entry with
a stable hash so results do not depend on evaluation order or parallelism.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import compiler as gates
from .compiler import CompilerConfig, GateCircuit, compile_circuit, invert
from .device import CHADOQ2, Device, Register, triangle_register
from .errors import ValidationError
from .simulator import (
    BackendKind,
    BackendMode,
    PulseSimulator,
    QuantumState,
    run_ideal,
    sample,
    zero_probability,
)

PAIR_PHASE_QISKIT_ZZ = "qiskit-zz"


@dataclass(frozen=True)
class FeatureMapSpec:
    """Shape of the data-embedding circuit.

    The default pair-phase convention applies P(2 x_i) per qubit and
    P(2 (pi - x_i)(pi - x_j)) on each entangled pair, the standard
    ZZ-feature-map parameterization.
    """

    n_features: int = 3
    repetitions: int = 2
    pair_phase_convention: str = PAIR_PHASE_QISKIT_ZZ

    def __post_init__(self):
        if self.n_features < 1:
            raise ValidationError("n_features must be >= 1")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")
        if self.pair_phase_convention != PAIR_PHASE_QISKIT_ZZ:
            raise ValidationError(
                f"unknown pair phase convention {self.pair_phase_convention!r}"
            )


def feature_map(x, spec: FeatureMapSpec = FeatureMapSpec()) -> GateCircuit:
    """Data-embedding circuit: per repetition an H layer, single-qubit
    phases P(2 x_i), and CX-conjugated pair phases on every qubit pair."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n_features,):
        raise ValidationError(f"expected {spec.n_features} features, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("features must be finite")
    n = spec.n_features
    ops = []
    for _ in range(spec.repetitions):
        ops.extend(gates.h(q) for q in range(n))
        ops.extend(gates.p(2.0 * x[q], q) for q in range(n))
        for i, j in itertools.combinations(range(n), 2):
            ops.append(gates.cx(i, j))
            ops.append(gates.p(2.0 * (math.pi - x[i]) * (math.pi - x[j]), j))
            ops.append(gates.cx(i, j))
    return GateCircuit(n, tuple(ops))


def qke_circuit(x1, x2, spec: FeatureMapSpec = FeatureMapSpec()) -> GateCircuit:
    """Map x1 forward then undo x2's map; the all-zero probability of the
    result is the kernel value K(x1, x2)."""
    return feature_map(x1, spec) + invert(feature_map(x2, spec))


@dataclass(frozen=True)
class KernelMatrix:
    """A (possibly estimated) Gram matrix with its provenance."""

    values: np.ndarray
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.row_ids), len(self.col_ids)):
            raise ValidationError("kernel shape does not match its identifiers")
        if values.size and (values.min() < -1e-9 or values.max() > 1 + 1e-9):
            raise ValidationError("kernel entries must lie in [0, 1]")
        object.__setattr__(self, "values", values)


ESTIMATOR_FREQUENCY = "frequency"
ESTIMATOR_SQUARED = "squared"


def entry_seed(seed: int, i: int, j: int) -> int:
    """Stable per-entry sampling seed: evaluation order never matters."""
    digest = hashlib.sha256(f"{seed}:{i}:{j}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def executions_bound(delta: float, m: int, c: float = 1.0) -> int:
    """Shot-budget bound ceil(c * delta^-2 * m^4) for estimating an m x m
    training kernel to operator-norm error delta.  Advisory only: the
    asymptotic statement carries no explicit constant, so c defaults to 1.
    """
    if not delta > 0:
        raise ValidationError("delta must be positive")
    if m < 1:
        raise ValidationError("m must be >= 1")
    return math.ceil(c * delta**-2.0 * m**4)


class KernelEstimator:
    """Evaluates kernel entries on a chosen backend.

    shots=None selects exact probability mode.  The estimator mode is the
    raw all-zero frequency by default; the "squared" mode squares it for
    reproduction studies.
    """

    def __init__(
        self,
        spec: FeatureMapSpec = FeatureMapSpec(),
        mode: BackendMode = BackendMode.ideal(),
        register: Register | None = None,
        device: Device = CHADOQ2,
        compiler_config: CompilerConfig = CompilerConfig(),
        estimator: str = ESTIMATOR_FREQUENCY,
    ):
        if estimator not in (ESTIMATOR_FREQUENCY, ESTIMATOR_SQUARED):
            raise ValidationError(f"unknown estimator mode {estimator!r}")
        self.spec = spec
        self.mode = mode
        self.device = device
        self.register = register if register is not None else triangle_register()
        self.compiler_config = compiler_config
        self.estimator = estimator
        self._pulse_sim = None
        if mode.kind is not BackendKind.IDEAL_GATE:
            self._pulse_sim = PulseSimulator(self.register, device, mode)

    def _final_state(self, x_forward, x_adjoint) -> QuantumState:
        circuit = qke_circuit(x_forward, x_adjoint, self.spec)
        if self.mode.kind is BackendKind.IDEAL_GATE:
            return run_ideal(circuit)
        seq = compile_circuit(
            circuit, self.register, self.device, self.compiler_config
        )
        return self._pulse_sim.evolve(seq)

    def entry(self, x_forward, x_adjoint, shots: int | None, seed: int = 0) -> float:
        """One kernel value: all-zero statistics of the concatenated map.

        Leakage into the Rydberg level counts as a non-zero outcome, which
        can only bias estimates downward.
        """
        state = self._final_state(x_forward, x_adjoint)
        if shots is None:
            value = zero_probability(state)
        else:
            result = sample(state, shots, seed)
            value = result.zero_frequency(self.spec.n_features)
        if self.estimator == ESTIMATOR_SQUARED:
            value = value**2
        return float(value)

    def matrix(
        self,
        rows: np.ndarray,
        cols: np.ndarray,
        shots: int | None,
        seed: int = 0,
        symmetric: bool = False,
        row_prefix: str = "r",
        col_prefix: str = "c",
        jobs: int = 1,
    ) -> KernelMatrix:
        """Estimate a full kernel block.

        Entry (i, j) runs the map of cols[j] forward and rows[i] in
        reverse.  With symmetric=True (rows and cols must be the same
        samples) only the upper triangle is estimated and mirrored; with
        symmetric=False all entries are estimated independently, which is
        the literal m^2-sequence protocol.
        """
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        cols = np.atleast_2d(np.asarray(cols, dtype=float))
        if symmetric and (
            rows.shape != cols.shape or not np.array_equal(rows, cols)
        ):
            raise ValidationError("symmetric mode requires rows == cols")
        values = np.zeros((len(rows), len(cols)))
        tasks = [
            (i, j)
            for i in range(len(rows))
            for j in range(len(cols))
            if not (symmetric and j < i)
        ]
        if jobs > 1:
            results = _parallel_entries(self, rows, cols, shots, seed, tasks, jobs)
        else:
            results = {
                (i, j): self.entry(cols[j], rows[i], shots, entry_seed(seed, i, j))
                for i, j in tasks
            }
        for (i, j), value in results.items():
            values[i, j] = value
            if symmetric and i != j:
                values[j, i] = value
        metadata = {
            "shots": shots,
            "backend": self.mode.kind.value,
            "seed": seed,
            "symmetric": bool(symmetric),
            "estimator": self.estimator,
        }
        return KernelMatrix(
            values=values,
            row_ids=tuple(f"{row_prefix}{i}" for i in range(len(rows))),
            col_ids=tuple(f"{col_prefix}{j}" for j in range(len(cols))),
            metadata=metadata,
        )


# Process-pool plumbing: workers rebuild the estimator once from a spec
# tuple, then stream through their share of the (i, j) tasks.
_WORKER_ESTIMATOR: KernelEstimator | None = None
_WORKER_DATA: tuple | None = None


def _worker_init(spec, mode, register, device, compiler_config, estimator,
                 rows, cols, shots, seed):
    global _WORKER_ESTIMATOR, _WORKER_DATA
    _WORKER_ESTIMATOR = KernelEstimator(
        spec=spec, mode=mode, register=register, device=device,
        compiler_config=compiler_config, estimator=estimator,
    )
    _WORKER_DATA = (rows, cols, shots, seed)


def _worker_entry(task):
    i, j = task
    rows, cols, shots, seed = _WORKER_DATA
    value = _WORKER_ESTIMATOR.entry(cols[j], rows[i], shots, entry_seed(seed, i, j))
    return (i, j), value


def _parallel_entries(estimator, rows, cols, shots, seed, tasks, jobs):
    init_args = (
        estimator.spec, estimator.mode, estimator.register, estimator.device,
        estimator.compiler_config, estimator.estimator, rows, cols, shots, seed,
    )
    with ProcessPoolExecutor(
        max_workers=jobs, initializer=_worker_init, initargs=init_args
    ) as pool:
        chunk = max(1, len(tasks) // (jobs * 8))
        return dict(pool.map(_worker_entry, tasks, chunksize=chunk))


def estimate_entry(
    x1,
    x2,
    shots: int | None,
    mode: BackendMode = BackendMode.ideal(),
    seed: int = 0,
    **kwargs,
) -> float:
    """Convenience wrapper around KernelEstimator for a single pair."""
    return KernelEstimator(mode=mode, **kwargs).entry(x1, x2, shots, seed)


def estimate_matrix(
    rows,
    cols,
    shots: int | None,
    mode: BackendMode = BackendMode.ideal(),
    seed: int = 0,
    symmetric: bool = False,
    jobs: int = 1,
    **kwargs,
) -> KernelMatrix:
    """Convenience wrapper around KernelEstimator.matrix."""
    estimator = KernelEstimator(mode=mode, **kwargs)
    return estimator.matrix(
        rows, cols, shots, seed=seed, symmetric=symmetric, jobs=jobs
    )

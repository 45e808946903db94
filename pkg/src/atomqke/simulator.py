"""Execution backends: ideal statevector, van der Waals pulse dynamics,
and the hard-blockade pulse oracle, plus measurement sampling.

Pulse backends work on three atomic levels per atom: ground g (digital 0),
hyperfine h (digital 1) and Rydberg r.  Raman pulses drive g<->h of their
target, Rydberg pulses g<->r.  A resonant pulse of area theta and
effective phase phi rotates the driven two-level subspace by
R(theta, phi) = [[cos(t2), -i sin(t2) e^{i phi}], [-i sin(t2) e^{-i phi}, cos(t2)]]
with t2 = theta/2, which is the exact time-ordered solution for any
envelope shape because the drive commutes with itself at all times.

The van der Waals backend adds sum_{j<i} (C6/hbar)/R_ij^6 |rr><rr| between
every pair.  That term commutes with Raman drives (they never touch r),
so Raman pulses and idle gaps reduce to exact diagonal phases; only
Rydberg pulses need the stepped integrator (piecewise-constant
Hamiltonian, one exact matrix exponential per step, midpoint-sampled
envelope).  The hard-blockade backend instead zeroes drive matrix
elements that would create two Rydberg excitations within the blockade
radius, which makes every pulse an exact conditional rotation.

Basis order: atom 0 is the most significant digit, so index 0 is always
the all-ground state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .compiler import Channel, GateCircuit, Gate, GateOp, PulseSequence
from .device import Device, Register
from .errors import NumericalError, ValidationError
from .evolution import evolve_stepped_blocked
from .waveform import TWO_PI, Pulse, midpoint_areas

LEVEL_G, LEVEL_H, LEVEL_R = 0, 1, 2

_NORM_TOL = 1e-9


@dataclass
class QuantumState:
    """Complex amplitudes over per-atom level sets, atom 0 most significant."""

    n_atoms: int
    levels: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.levels not in (2, 3):
            raise ValidationError("levels must be 2 or 3")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        expected = self.levels**self.n_atoms
        if amps.shape != (expected,):
            raise ValidationError(
                f"amplitude vector must have length {expected}, got {amps.shape}"
            )
        self.amplitudes = amps

    @classmethod
    def zero(cls, n_atoms: int, levels: int = 2) -> "QuantumState":
        amps = np.zeros(levels**n_atoms, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_atoms, levels, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def require_normalized(self):
        if abs(self.norm() ** 2 - 1.0) > _NORM_TOL:
            raise ValidationError(f"state norm^2 = {self.norm()**2} is not 1")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def digital_distribution(self) -> tuple[dict[str, float], float]:
        """Probability of each digital bitstring plus total leakage into r."""
        probs = self.probabilities()
        dist: dict[str, float] = {}
        leakage = 0.0
        for index, prob in enumerate(probs):
            digits = _digits(index, self.levels, self.n_atoms)
            if any(d == LEVEL_R for d in digits):
                leakage += float(prob)
            else:
                key = "".join(str(d) for d in digits)
                dist[key] = dist.get(key, 0.0) + float(prob)
        return dist, leakage

    def to_json(self) -> list[list[float]]:
        return [[float(a.real), float(a.imag)] for a in self.amplitudes]


def _digits(index: int, base: int, width: int) -> tuple[int, ...]:
    out = []
    for _ in range(width):
        out.append(index % base)
        index //= base
    return tuple(reversed(out))


def zero_probability(state: QuantumState) -> float:
    """P(every atom measured 0).  Index 0 is the all-ground state and r
    never counts as 0, so this is simply |amplitude_0|^2."""
    return float(abs(state.amplitudes[0]) ** 2)


class BackendKind(Enum):
    IDEAL_GATE = "ideal"
    PULSE_VDW = "vdw"
    PULSE_HARD_BLOCKADE = "hard-blockade"


@dataclass(frozen=True)
class BackendMode:
    """Which engine runs a circuit and with what integration granularity.

    step: integrator step [ns] for the van der Waals backend; it must
    divide every pulse duration (clock quantization guarantees that for
    integer steps).
    blockade_radius: pair distance [um] within which the hard-blockade
    backend forbids double Rydberg excitation.
    """

    kind: BackendKind
    step: float = 1.0
    blockade_radius: float = 10.0

    @classmethod
    def ideal(cls) -> "BackendMode":
        return cls(BackendKind.IDEAL_GATE)

    @classmethod
    def vdw(cls, step: float = 1.0) -> "BackendMode":
        return cls(BackendKind.PULSE_VDW, step=step)

    @classmethod
    def hard_blockade(cls, blockade_radius: float = 10.0) -> "BackendMode":
        return cls(BackendKind.PULSE_HARD_BLOCKADE, blockade_radius=blockade_radius)


def _rz(phi: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * phi), 0.0], [0.0, np.exp(0.5j * phi)]], dtype=complex
    )


def _rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """Equatorial-axis rotation Rz(-phi) Rx(theta) Rz(phi) of a resonant
    pulse with area theta and effective phase phi."""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [
            [c, -1j * s * np.exp(1j * phi)],
            [-1j * s * np.exp(-1j * phi), c],
        ],
        dtype=complex,
    )


_H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_X_MATRIX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_CX_MATRIX = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ],
    dtype=complex,
)


def ideal_gate_unitary(op: GateOp) -> np.ndarray:
    """Reference matrix of a gate: 2x2, or 4x4 for CX in |control target> order."""
    if op.gate is Gate.H:
        return _H_MATRIX.copy()
    if op.gate is Gate.X:
        return _X_MATRIX.copy()
    if op.gate is Gate.RZ:
        return _rz(op.params[0])
    if op.gate is Gate.RX:
        return _rx(op.params[0])
    if op.gate is Gate.P:
        return np.array(
            [[1.0, 0.0], [0.0, np.exp(1j * op.params[0])]], dtype=complex
        )
    if op.gate is Gate.UZXZ:
        gamma, theta, phi = op.params
        return _rz(gamma) @ _rx(theta) @ _rz(phi)
    if op.gate is Gate.CX:
        return _CX_MATRIX.copy()
    raise ValidationError(f"no reference unitary for {op.gate}")  # pragma: no cover


def _apply_single(state: np.ndarray, u: np.ndarray, atom: int, n: int, levels: int):
    tensor = state.reshape((levels,) * n)
    moved = np.moveaxis(tensor, atom, -1)
    moved = moved @ u.T
    return np.moveaxis(moved, -1, atom).reshape(-1)


def run_ideal(circuit: GateCircuit, initial: QuantumState | None = None) -> QuantumState:
    """Gate-level statevector reference on 2-level atoms."""
    n = circuit.n_qubits
    if initial is None:
        initial = QuantumState.zero(n, levels=2)
    if initial.levels != 2 or initial.n_atoms != n:
        raise ValidationError("run_ideal needs a 2-level state of matching width")
    initial.require_normalized()
    state = initial.amplitudes.copy()
    for op in circuit.ops:
        u = ideal_gate_unitary(op)
        if op.gate is Gate.CX:
            control, target = op.qubits
            tensor = state.reshape((2,) * n)
            moved = np.moveaxis(tensor, (control, target), (0, 1)).reshape(4, -1)
            moved = u @ moved
            moved = moved.reshape((2, 2) + (2,) * (n - 2))
            state = np.moveaxis(moved, (0, 1), (control, target)).reshape(-1)
        else:
            state = _apply_single(state, u, op.qubits[0], n, 2)
    return QuantumState(n, 2, state)


def _embed_drive(phi: float, atom: int, n: int, hi_level: int) -> np.ndarray:
    """Dense drive structure matrix (1/2) e^{i phi}|g><l| + h.c. on one atom."""
    local = np.zeros((3, 3), dtype=complex)
    local[LEVEL_G, hi_level] = 0.5 * np.exp(1j * phi)
    local[hi_level, LEVEL_G] = 0.5 * np.exp(-1j * phi)
    out = np.array([[1.0]], dtype=complex)
    for k in range(n):
        out = np.kron(out, local if k == atom else np.eye(3, dtype=complex))
    return out


class PulseSimulator:
    """Pulse-level evolution of one register under one backend mode.

    Reusable across sequences: full-pulse propagators of the stepped van
    der Waals path are cached per (atom, amplitude, duration, phase), so
    repeated pulses (every CX block of a kernel-estimation run) cost one
    matrix product after the first encounter.
    """

    def __init__(self, register: Register, device: Device, mode: BackendMode):
        if mode.kind is BackendKind.IDEAL_GATE:
            raise ValidationError("PulseSimulator handles pulse backends only")
        self.register = register
        self.device = device
        self.mode = mode
        self.n = len(register)
        self.dim = 3**self.n
        self._digits = np.array(
            [_digits(i, 3, self.n) for i in range(self.dim)], dtype=np.int8
        )
        self._is_r = self._digits == LEVEL_R
        vdw = np.zeros(self.dim)
        for (i, j), dist in register.pair_distances().items():
            coeff = device.c6_over_hbar / dist**6
            vdw += coeff * (self._is_r[:, i] & self._is_r[:, j])
        self._vdw_diag = vdw  # rad/us per basis state
        self._blocked_masks = [self._blocked_mask(a) for a in range(self.n)]
        # Interaction seen per (spectator configuration, level of atom a),
        # in the same blocked layout the stepped kernel uses.
        self._vdw_by_level = [
            np.moveaxis(vdw.reshape((3,) * self.n), a, -1).reshape(-1, 3).copy()
            for a in range(self.n)
        ]
        self._propagators: dict[tuple, np.ndarray] = {}

    def _blocked_mask(self, atom: int) -> np.ndarray:
        """Over configurations of the *other* atoms (3^{n-1}, atom order
        preserved): True where some atom within the blockade radius is in r."""
        others = [k for k in range(self.n) if k != atom]
        n_other = len(others)
        mask = np.zeros(3**n_other, dtype=bool)
        for cfg in range(3**n_other):
            digits = _digits(cfg, 3, n_other)
            for pos, k in enumerate(others):
                if digits[pos] == LEVEL_R:
                    if self.register.distance(atom, k) <= self.mode.blockade_radius:
                        mask[cfg] = True
                        break
        return mask

    def _interaction_phase(self, duration_ns: float) -> np.ndarray:
        return np.exp(-1j * self._vdw_diag * duration_ns * 1e-3)

    def _apply_two_level(
        self, state: np.ndarray, u: np.ndarray, atom: int, hi_level: int,
        blocked: np.ndarray | None,
    ) -> np.ndarray:
        tensor = np.moveaxis(state.reshape((3,) * self.n), atom, -1)
        flat = tensor.reshape(-1, 3).copy()
        rows = slice(None) if blocked is None else ~blocked
        g = flat[rows, LEVEL_G].copy()
        e = flat[rows, hi_level].copy()
        flat[rows, LEVEL_G] = u[0, 0] * g + u[0, 1] * e
        flat[rows, hi_level] = u[1, 0] * g + u[1, 1] * e
        tensor = flat.reshape(tensor.shape)
        return np.moveaxis(tensor, -1, atom).reshape(-1)

    def _vdw_pulse_propagator(self, atom: int, waveform, phi: float) -> np.ndarray:
        """Per-spectator-configuration 3x3 propagator blocks of one stepped
        Rydberg pulse, cached across sequences."""
        key = (
            atom,
            round(waveform.amplitude, 12),
            waveform.duration,
            round(phi % TWO_PI, 12),
            self.mode.step,
        )
        cached = self._propagators.get(key)
        if cached is None:
            areas = midpoint_areas(waveform, self.mode.step)
            w_levels = self._vdw_by_level[atom] * (self.mode.step * 1e-3)
            identity = np.broadcast_to(
                np.eye(3, dtype=np.complex128), (w_levels.shape[0], 3, 3)
            )
            cached = evolve_stepped_blocked(
                w_levels[:, LEVEL_G],
                w_levels[:, LEVEL_R],
                w_levels[:, LEVEL_H],
                areas,
                phi,
                identity,
            )
            self._propagators[key] = cached
        return cached

    def _apply_blocked(self, state: np.ndarray, blocks: np.ndarray, atom: int):
        tensor = np.moveaxis(state.reshape((3,) * self.n), atom, -1)
        shape = tensor.shape
        evolved = np.einsum("bij,bj->bi", blocks, tensor.reshape(-1, 3))
        return np.moveaxis(evolved.reshape(shape), -1, atom).reshape(-1)

    def evolve(
        self, seq: PulseSequence, initial: QuantumState | None = None
    ) -> QuantumState:
        if initial is None:
            initial = QuantumState.zero(self.n, levels=3)
        if initial.levels != 3 or initial.n_atoms != self.n:
            raise ValidationError("pulse backends need a 3-level state of matching width")
        initial.require_normalized()
        vdw = self.mode.kind is BackendKind.PULSE_VDW
        state = initial.amplitudes.copy()
        acc: dict[tuple[int, str], float] = {}
        now = 0
        for event in seq.events:
            if not isinstance(event.item, Pulse):
                key = (event.target, event.channel.basis)
                acc[key] = acc.get(key, 0.0) + event.item.angle
                continue
            pulse = event.item
            if pulse.waveform.amplitude > self.device.omega_max_local * (1 + 1e-9):
                raise ValidationError(
                    "pulse amplitude exceeds the channel maximum Rabi frequency"
                )
            if vdw and event.start > now:
                state = state * self._interaction_phase(event.start - now)
            now = event.end
            key = (event.target, event.channel.basis)
            phi = pulse.phase + acc.get(key, 0.0)
            theta = pulse.waveform.area
            if event.channel is Channel.RAMAN_LOCAL:
                u = rotation_matrix(theta, phi)
                state = self._apply_two_level(state, u, event.target, LEVEL_H, None)
                if vdw:
                    state = state * self._interaction_phase(pulse.duration)
            elif vdw:
                blocks = self._vdw_pulse_propagator(event.target, pulse.waveform, phi)
                state = self._apply_blocked(state, blocks, event.target)
            else:
                u = rotation_matrix(theta, phi)
                state = self._apply_two_level(
                    state, u, event.target, LEVEL_R,
                    self._blocked_masks[event.target],
                )
            if pulse.post_phase_shift:
                acc[key] = acc.get(key, 0.0) + pulse.post_phase_shift
            norm_sq = float(np.vdot(state, state).real)
            if abs(norm_sq - 1.0) > _NORM_TOL:
                raise NumericalError(
                    f"norm drifted to {norm_sq} after pulse at t={event.start} ns"
                )
        return QuantumState(self.n, 3, state)


def evolve_pulse(
    seq: PulseSequence,
    mode: BackendMode,
    initial: QuantumState | None = None,
    simulator: PulseSimulator | None = None,
) -> QuantumState:
    """Integrate a pulse sequence on one of the pulse backends.

    Pass a prebuilt ``simulator`` to reuse its propagator cache across
    sequences on the same register/device/mode.
    """
    if simulator is None:
        simulator = PulseSimulator(seq.register, seq.device, mode)
    return simulator.evolve(seq, initial)


def _tri_index(bits) -> int:
    """Base-3 index of a digital configuration (remaining atoms ground)."""
    tri = 0
    for bit in bits:
        tri = tri * 3 + bit
    return tri


def _digital_block(state: QuantumState, n_qubits: int) -> np.ndarray:
    """The 2^n_qubits amplitudes where no atom is in r (extra atoms ground)."""
    pad = [0] * (state.n_atoms - n_qubits)
    block = np.empty(2**n_qubits, dtype=np.complex128)
    for index in range(2**n_qubits):
        bits = [(index >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]
        block[index] = state.amplitudes[_tri_index(bits + pad)]
    return block


def _digital_frame(seq: PulseSequence, n_qubits: int) -> np.ndarray:
    """Tensor of per-qubit virtual-Z rotations accumulated by a sequence."""
    frame = np.array([[1.0]], dtype=complex)
    phases = seq.final_phases()
    for q in range(n_qubits):
        frame = np.kron(frame, _rz(phases.get((q, "digital"), 0.0)))
    return frame


def compiled_unitary(seq: PulseSequence, mode: BackendMode, n_qubits: int) -> np.ndarray:
    """Digital-block unitary realized by a compiled sequence, expressed in
    the sequence's final phase frame.

    Physically each emitted rotation leaves a trailing virtual Rz undone;
    the sequence's accumulated digital-basis phase per qubit defines the
    frame in which the intended gate product lives, so that frame rotation
    is applied before returning.  Z-basis statistics are identical either
    way; this matters only for comparing matrices.
    """
    simulator = PulseSimulator(seq.register, seq.device, mode)
    n_atoms = len(seq.register)
    dim = 2**n_qubits
    columns = []
    for basis_index in range(dim):
        bits = [(basis_index >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]
        amps = np.zeros(3**n_atoms, dtype=np.complex128)
        amps[_tri_index(bits + [0] * (n_atoms - n_qubits))] = 1.0
        final = simulator.evolve(seq, QuantumState(n_atoms, 3, amps))
        columns.append(_digital_block(final, n_qubits))
    return _digital_frame(seq, n_qubits) @ np.stack(columns, axis=1)


def unitary_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance between unitaries minimized over global phase."""
    overlap = np.trace(b.conj().T @ a)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.linalg.norm(a - phase * b))


def logical_digital_state(
    seq: PulseSequence, mode: BackendMode, initial: QuantumState | None = None
) -> np.ndarray:
    """Digital-block amplitudes of a pulse evolution, in the final phase frame.

    Useful for comparing against gate-level states: the digital 2^n block
    is extracted (its norm is 1 minus any Rydberg leakage) and each qubit's
    accumulated virtual Z is applied.  Z-basis probabilities are unchanged
    by the frame; amplitudes are what gain meaning here.
    """
    final = evolve_pulse(seq, mode, initial)
    block = _digital_block(final, final.n_atoms)
    return _digital_frame(seq, final.n_atoms) @ block


@dataclass
class ShotResult:
    """Measurement counts in the digital basis plus Rydberg leakage."""

    counts: dict[str, int]
    leakage_count: int = 0

    @property
    def shots(self) -> int:
        return sum(self.counts.values()) + self.leakage_count

    def frequency(self, bitstring: str) -> float:
        return self.counts.get(bitstring, 0) / self.shots

    def zero_frequency(self, n_atoms: int) -> float:
        return self.frequency("0" * n_atoms)

    def to_json(self) -> dict:
        return {"counts": dict(self.counts), "leakage": self.leakage_count}


def sample(state: QuantumState, shots: int, seed: int) -> ShotResult:
    """Multinomial draw from the measurement distribution.

    Outcomes with any atom in r are tallied as leakage, not as bitstrings.
    Deterministic for a fixed seed.
    """
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    probs = state.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, probs)
    counts: dict[str, int] = {}
    leakage = 0
    for index in np.nonzero(draws)[0]:
        digits = _digits(int(index), state.levels, state.n_atoms)
        n = int(draws[index])
        if any(d == LEVEL_R for d in digits):
            leakage += n
        else:
            key = "".join(str(d) for d in digits)
            counts[key] = counts.get(key, 0) + n
    return ShotResult(counts=counts, leakage_count=leakage)

"""Gate IR and its lowering to timed, per-channel pulse sequences.

Single-qubit rotations follow the Z-X-Z form U(gamma, theta, phi) =
Rz(gamma) Rx(theta) Rz(phi).  A resonant pulse of area theta and phase phi
physically realizes Rz(-phi) Rx(theta) Rz(phi); the missing Rz(gamma+phi)
is deferred as a *virtual* phase shift on the target's frame, so each
pulse record carries post_phase_shift = gamma + phi and subsequent pulses
on that (qubit, basis) pick the accumulated shift up in their effective
phase.  Rz and the feature map's phase gate therefore cost no time at all.

CX lowering uses the blockade sequence: pi pulse on the control's
ground-Rydberg transition, Hadamard on the target (digital channel), 2*pi
pulse on the *target's* ground-Rydberg transition, Hadamard, closing pi
pulse on the control.  Under blockade the inner block acts as CZ with
global phase -1, and the Hadamard conjugation turns it into CX.

Scheduling is strictly sequential across channels (each event starts no
earlier than the previous one ends) and inserts the device's minimum
retarget gap whenever a local channel switches its addressed atom.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum

from .device import Device, Register, max_rabi_for_radius, validate_register
from .errors import CompileError, ValidationError
from .waveform import TWO_PI, BlackmanWaveform, Pulse

# Peak Rabi frequency used for the CX 2*pi pulse by default [rad/us]: the
# conservative value for atoms held well inside a ~10 um blockade radius.
CONSERVATIVE_TWO_PI_AMPLITUDE = 5.42


class Gate(Enum):
    H = "H"
    X = "X"
    RZ = "RZ"
    RX = "RX"
    P = "P"
    UZXZ = "UZXZ"
    CX = "CX"


_GATE_ARITY = {
    Gate.H: (1, 0),
    Gate.X: (1, 0),
    Gate.RZ: (1, 1),
    Gate.RX: (1, 1),
    Gate.P: (1, 1),
    Gate.UZXZ: (1, 3),
    Gate.CX: (2, 0),
}


@dataclass(frozen=True)
class GateOp:
    gate: Gate
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self):
        n_qubits, n_params = _GATE_ARITY[self.gate]
        if len(self.qubits) != n_qubits:
            raise ValidationError(f"{self.gate.value} takes {n_qubits} qubit(s)")
        if len(self.params) != n_params:
            raise ValidationError(f"{self.gate.value} takes {n_params} parameter(s)")
        if self.gate is Gate.CX and self.qubits[0] == self.qubits[1]:
            raise ValidationError("CX control and target must differ")
        if any(not math.isfinite(p) for p in self.params):
            raise ValidationError(f"{self.gate.value} has non-finite parameter")


def h(q: int) -> GateOp:
    return GateOp(Gate.H, (q,))


def x(q: int) -> GateOp:
    return GateOp(Gate.X, (q,))


def rz(phi: float, q: int) -> GateOp:
    return GateOp(Gate.RZ, (q,), (phi,))


def rx(theta: float, q: int) -> GateOp:
    return GateOp(Gate.RX, (q,), (theta,))


def p(lam: float, q: int) -> GateOp:
    return GateOp(Gate.P, (q,), (lam,))


def uzxz(gamma: float, theta: float, phi: float, q: int) -> GateOp:
    return GateOp(Gate.UZXZ, (q,), (gamma, theta, phi))


def cx(control: int, target: int) -> GateOp:
    return GateOp(Gate.CX, (control, target))


@dataclass(frozen=True)
class GateCircuit:
    n_qubits: int
    ops: tuple[GateOp, ...]

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for op in self.ops:
            if any(not 0 <= q < self.n_qubits for q in op.qubits):
                raise ValidationError(
                    f"{op.gate.value} references qubit outside 0..{self.n_qubits - 1}"
                )

    def __add__(self, other: "GateCircuit") -> "GateCircuit":
        if other.n_qubits != self.n_qubits:
            raise ValidationError("cannot concatenate circuits of different widths")
        return GateCircuit(self.n_qubits, self.ops + other.ops)

    def to_json(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "ops": [
                {
                    "gate": op.gate.value,
                    "qubits": list(op.qubits),
                    "params": list(op.params),
                }
                for op in self.ops
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GateCircuit":
        ops = tuple(
            GateOp(
                Gate(entry["gate"]),
                tuple(int(q) for q in entry["qubits"]),
                tuple(float(v) for v in entry.get("params", ())),
            )
            for entry in data["ops"]
        )
        return cls(int(data["n_qubits"]), ops)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "GateCircuit":
        return cls.from_json(json.loads(text))


_INVERSE_RULES = {
    Gate.H: lambda op: op,
    Gate.X: lambda op: op,
    Gate.CX: lambda op: op,
    Gate.RZ: lambda op: replace(op, params=(-op.params[0],)),
    Gate.P: lambda op: replace(op, params=(-op.params[0],)),
    Gate.RX: lambda op: replace(op, params=(-op.params[0],)),
    Gate.UZXZ: lambda op: replace(
        op, params=(-op.params[2], -op.params[1], -op.params[0])
    ),
}


def invert(circuit: GateCircuit) -> GateCircuit:
    """The adjoint circuit: reversed op order with per-gate inverses."""
    ops = tuple(_INVERSE_RULES[op.gate](op) for op in reversed(circuit.ops))
    return GateCircuit(circuit.n_qubits, ops)


class Channel(Enum):
    RAMAN_LOCAL = "raman_local"
    RYDBERG_LOCAL = "rydberg_local"

    @property
    def basis(self) -> str:
        """Phase-reference basis the channel drives: digital (g<->h) for
        Raman, ground-rydberg (g<->r) for Rydberg."""
        return "digital" if self is Channel.RAMAN_LOCAL else "ground-rydberg"


@dataclass(frozen=True)
class PhaseShift:
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", self.angle % TWO_PI)


@dataclass(frozen=True)
class TimelineEvent:
    channel: Channel
    target: int
    start: int  # ns
    item: Pulse | PhaseShift

    @property
    def duration(self) -> int:
        return self.item.duration if isinstance(self.item, Pulse) else 0

    @property
    def end(self) -> int:
        return self.start + self.duration


class PulseSequence:
    """A timed pulse program under construction or replay.

    Owns the scheduling state (global cursor, per-channel last pulse) and
    the per-(qubit, basis) phase accumulators.  Single-writer while being
    built; immutable snapshots come from to_json.
    """

    def __init__(self, register: Register, device: Device):
        self.register = register
        self.device = device
        self.events: list[TimelineEvent] = []
        self._cursor = 0
        self._channel_last_end: dict[Channel, int] = {}
        self._channel_last_target: dict[Channel, int | None] = {}
        self._phase: dict[tuple[int, str], float] = {}

    @property
    def duration(self) -> int:
        """Total duration [ns]: end of the last timed event."""
        return self._cursor

    def phase_accumulator(self, qubit: int, basis: str) -> float:
        return self._phase.get((qubit, basis), 0.0) % TWO_PI

    def _check_target(self, qubit: int):
        if not 0 <= qubit < len(self.register):
            raise ValidationError(
                f"qubit {qubit} outside register of {len(self.register)} atoms"
            )

    def append_pulse(self, channel: Channel, target: int, pulse: Pulse) -> None:
        self._check_target(target)
        if pulse.waveform.amplitude > self.device.omega_max_local * (1 + 1e-9):
            raise CompileError(
                f"pulse amplitude {pulse.waveform.amplitude:.4g} exceeds channel "
                f"limit {self.device.omega_max_local}"
            )
        if abs(pulse.detuning) > self.device.detuning_max:
            raise CompileError("pulse detuning exceeds channel limit")
        start = self._cursor
        last_target = self._channel_last_target.get(channel)
        if last_target is not None and last_target != target:
            start = max(
                start, self._channel_last_end[channel] + self.device.retarget_min
            )
        self.events.append(TimelineEvent(channel, target, start, pulse))
        self._cursor = start + pulse.duration
        self._channel_last_end[channel] = self._cursor
        self._channel_last_target[channel] = target
        if pulse.post_phase_shift:
            key = (target, channel.basis)
            self._phase[key] = self._phase.get(key, 0.0) + pulse.post_phase_shift

    def append_phase_shift(self, channel: Channel, target: int, angle: float) -> None:
        """Zero-duration frame rotation; never moves the cursor."""
        self._check_target(target)
        shift = PhaseShift(angle)
        self.events.append(TimelineEvent(channel, target, self._cursor, shift))
        key = (target, channel.basis)
        self._phase[key] = self._phase.get(key, 0.0) + shift.angle

    def final_phases(self) -> dict[tuple[int, str], float]:
        """Accumulated frame shifts at the end of the sequence."""
        return {key: value % TWO_PI for key, value in self._phase.items()}

    def to_json(self) -> dict:
        timeline = []
        for event in self.events:
            record = {
                "channel": event.channel.value,
                "target": event.target,
                "start_ns": event.start,
            }
            if isinstance(event.item, Pulse):
                record.update(event.item.to_json())
            else:
                record.update({"kind": "phase_shift", "angle": event.item.angle})
            timeline.append(record)
        return {"register": self.register.to_json(), "timeline": timeline}

    @classmethod
    def from_json(cls, data: dict, device: Device) -> "PulseSequence":
        """Rebuild a sequence by replaying its events through the scheduler.

        Timelines emitted by this package round-trip exactly; foreign
        timelines get renormalized to the scheduling rules.
        """
        seq = cls(Register.from_json(data["register"]), device)
        for record in data["timeline"]:
            channel = Channel(record["channel"])
            target = int(record["target"])
            if record.get("kind") == "phase_shift":
                seq.append_phase_shift(channel, target, float(record["angle"]))
            else:
                seq.append_pulse(channel, target, Pulse.from_json(record))
        return seq

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def lint_sequence(seq: PulseSequence) -> list[str]:
    """Check a finished timeline: per-channel non-overlap and retarget gaps.

    Returns human-readable problems; compile() runs this on every output
    and an empty list is the expected state.
    """
    problems = []
    last: dict[Channel, TimelineEvent] = {}
    for event in seq.events:
        if not isinstance(event.item, Pulse):
            continue
        prev = last.get(event.channel)
        if prev is not None:
            if event.start < prev.end:
                problems.append(
                    f"{event.channel.value} pulses overlap at t={event.start} ns"
                )
            if prev.target != event.target:
                gap = event.start - prev.end
                if gap < seq.device.retarget_min:
                    problems.append(
                        f"{event.channel.value} retarget "
                        f"{prev.target}->{event.target} gap {gap} ns "
                        f"< {seq.device.retarget_min} ns"
                    )
        last[event.channel] = event
    return problems


def emit_uzxz(
    seq: PulseSequence,
    gamma: float,
    theta: float,
    phi: float,
    qubit: int,
    channel: Channel = Channel.RAMAN_LOCAL,
    max_amplitude: float | None = None,
) -> PulseSequence:
    """Lower U(gamma, theta, phi) to one pulse plus a virtual frame shift.

    Angles are reduced mod 2*pi; theta = 0 degenerates to a pure phase
    shift of gamma + phi (no pulse, no time).
    """
    gamma %= TWO_PI
    theta %= TWO_PI
    phi %= TWO_PI
    if max_amplitude is None:
        max_amplitude = seq.device.omega_max_local
    if max_amplitude > seq.device.omega_max_local * (1 + 1e-9):
        raise CompileError(
            f"requested amplitude {max_amplitude} exceeds channel limit "
            f"{seq.device.omega_max_local}"
        )
    if theta != 0.0:
        waveform = BlackmanWaveform.from_area(
            theta, max_amplitude, seq.device.clock_period
        )
        pulse = Pulse(
            waveform=waveform,
            phase=phi,
            post_phase_shift=(gamma + phi) % TWO_PI,
        )
        seq.append_pulse(channel, qubit, pulse)
    else:
        seq.append_phase_shift(channel, qubit, gamma + phi)
    return seq


def emit_rx(seq, theta, qubit, channel=Channel.RAMAN_LOCAL, max_amplitude=None):
    return emit_uzxz(seq, 0.0, theta, 0.0, qubit, channel, max_amplitude)


def emit_rz(seq, phi, qubit, channel=Channel.RAMAN_LOCAL):
    seq.append_phase_shift(channel, qubit, phi)
    return seq


def emit_x(seq, qubit, channel=Channel.RAMAN_LOCAL, max_amplitude=None):
    return emit_rx(seq, math.pi, qubit, channel, max_amplitude)


def emit_h(seq, qubit, channel=Channel.RAMAN_LOCAL, max_amplitude=None):
    half = math.pi / 2.0
    return emit_uzxz(seq, half, half, half, qubit, channel, max_amplitude)


def emit_cx(
    seq: PulseSequence,
    control: int,
    target: int,
    a_raman: float | None = None,
    a_ryd_pi: float | None = None,
    a_ryd_2pi: float = CONSERVATIVE_TWO_PI_AMPLITUDE,
    enforce_blockade: bool = True,
) -> PulseSequence:
    """Lower CX to the pi / H / 2pi / H / pi blockade sequence.

    The blockade constraint is enforced for the 2*pi pulse only: the pair
    distance must not exceed the blockade radius its amplitude allows.
    """
    if control == target:
        raise CompileError("CX control and target must differ")
    if a_raman is None:
        a_raman = seq.device.omega_max_local
    if a_ryd_pi is None:
        a_ryd_pi = seq.device.omega_max_local
    if enforce_blockade:
        distance = seq.register.distance(control, target)
        limit = max_rabi_for_radius(distance, seq.device)
        if a_ryd_2pi > limit:
            raise CompileError(
                f"blockade constraint unsatisfiable for pair "
                f"({seq.register.names[control]}, {seq.register.names[target]}): "
                f"2pi amplitude {a_ryd_2pi:.4g} rad/us exceeds "
                f"{limit:.4g} rad/us allowed at {distance:.3f} um"
            )
    clock = seq.device.clock_period
    pi_pulse = Pulse(BlackmanWaveform.from_area(math.pi, a_ryd_pi, clock))
    two_pi_pulse = Pulse(BlackmanWaveform.from_area(TWO_PI, a_ryd_2pi, clock))
    seq.append_pulse(Channel.RYDBERG_LOCAL, control, pi_pulse)
    emit_h(seq, target, Channel.RAMAN_LOCAL, a_raman)
    seq.append_pulse(Channel.RYDBERG_LOCAL, target, two_pi_pulse)
    emit_h(seq, target, Channel.RAMAN_LOCAL, a_raman)
    seq.append_pulse(Channel.RYDBERG_LOCAL, control, pi_pulse)
    return seq


@dataclass(frozen=True)
class CompilerConfig:
    """Amplitude choices for lowering.  ``None`` means the channel maximum.

    two_pi_amplitude defaults to the conservative blockade value rather
    than the wide-open channel maximum; pass
    max_rabi_for_radius(radius, device) to derive it from a target
    blockade radius instead.
    """

    raman_amplitude: float | None = None
    rydberg_pi_amplitude: float | None = None
    two_pi_amplitude: float = CONSERVATIVE_TWO_PI_AMPLITUDE
    enforce_blockade: bool = True


def compile_circuit(
    circuit: GateCircuit,
    register: Register,
    device: Device,
    config: CompilerConfig = CompilerConfig(),
) -> PulseSequence:
    """Lower a gate circuit to a scheduled pulse sequence.

    The register must validate against the device and hold at least
    n_qubits atoms (qubit i addresses atom i).  Output is deterministic
    for identical inputs.
    """
    violations = validate_register(register, device)
    if violations:
        raise CompileError(
            "register invalid for device: " + "; ".join(str(v) for v in violations)
        )
    if circuit.n_qubits > len(register):
        raise CompileError(
            f"circuit needs {circuit.n_qubits} qubits but register has "
            f"{len(register)} atoms"
        )
    seq = PulseSequence(register, device)
    for op in circuit.ops:
        if op.gate is Gate.H:
            emit_h(seq, op.qubits[0], Channel.RAMAN_LOCAL, config.raman_amplitude)
        elif op.gate is Gate.X:
            emit_x(seq, op.qubits[0], Channel.RAMAN_LOCAL, config.raman_amplitude)
        elif op.gate is Gate.RX:
            emit_rx(
                seq, op.params[0], op.qubits[0], Channel.RAMAN_LOCAL,
                config.raman_amplitude,
            )
        elif op.gate in (Gate.RZ, Gate.P):
            # The phase gate differs from Rz only by global phase.
            emit_rz(seq, op.params[0], op.qubits[0])
        elif op.gate is Gate.UZXZ:
            emit_uzxz(
                seq, op.params[0], op.params[1], op.params[2], op.qubits[0],
                Channel.RAMAN_LOCAL, config.raman_amplitude,
            )
        elif op.gate is Gate.CX:
            emit_cx(
                seq, op.qubits[0], op.qubits[1],
                a_raman=config.raman_amplitude,
                a_ryd_pi=config.rydberg_pi_amplitude,
                a_ryd_2pi=config.two_pi_amplitude,
                enforce_blockade=config.enforce_blockade,
            )
        else:  # pragma: no cover - the enum is closed
            raise CompileError(f"cannot lower gate {op.gate}")
    problems = lint_sequence(seq)
    if problems:  # pragma: no cover - scheduler guarantees this
        raise CompileError("scheduler produced an invalid timeline: " + "; ".join(problems))
    return seq

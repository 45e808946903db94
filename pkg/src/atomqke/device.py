"""Device models, register geometry, lattice generation and blockade math.

Units follow one convention everywhere: lengths in micrometers, times in
nanoseconds, angular frequencies in rad/us.  The van der Waals coefficient
is stored as C6/hbar in rad/us * um^6; the builtin Chadoq2 preset converts
the published 5008 GHz um^6 figure with 1 GHz = 1e3 rad/us (the
angular-frequency reading, which is the only one that keeps the
interaction term commensurate with Rabi frequencies quoted in rad/us).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ValidationError

# rad/us per GHz under the angular-frequency reading.  Swap for 2e3*pi to
# get the cycles-per-second reading; see max_rabi_for_radius docstring.
ANGULAR_FREQ_PER_GHZ = 1.0e3


@dataclass(frozen=True)
class Device:
    """Physical constants and channel limits of a neutral-atom machine.

    omega_max_local: peak Rabi frequency of the local channels [rad/us]
    detuning_max: channel detuning limit [rad/us]
    retarget_min: minimum idle time when a local channel switches atom [ns]
    c6_over_hbar: van der Waals coefficient [rad/us * um^6]
    """

    name: str
    omega_max_local: float
    detuning_max: float
    retarget_min: int
    c6_over_hbar: float
    max_atoms: int
    min_pair_distance: float
    max_radius_from_origin: float
    dimensions_allowed: int
    clock_period: int = 1

    def __post_init__(self):
        positive = {
            "omega_max_local": self.omega_max_local,
            "detuning_max": self.detuning_max,
            "retarget_min": self.retarget_min,
            "c6_over_hbar": self.c6_over_hbar,
            "max_atoms": self.max_atoms,
            "min_pair_distance": self.min_pair_distance,
            "max_radius_from_origin": self.max_radius_from_origin,
            "clock_period": self.clock_period,
        }
        for key, value in positive.items():
            if not value > 0:
                raise ValidationError(f"device {key} must be positive, got {value}")
        if self.dimensions_allowed not in (2, 3):
            raise ValidationError("dimensions_allowed must be 2 or 3")


CHADOQ2 = Device(
    name="Chadoq2",
    omega_max_local=62.83,
    detuning_max=125.7,
    retarget_min=220,
    c6_over_hbar=5008.0 * ANGULAR_FREQ_PER_GHZ,
    max_atoms=100,
    min_pair_distance=4.0,
    max_radius_from_origin=50.0,
    dimensions_allowed=2,
    clock_period=1,
)

DEVICES = {CHADOQ2.name: CHADOQ2}


def get_device(name: str) -> Device:
    try:
        return DEVICES[name]
    except KeyError:
        raise ValidationError(
            f"unknown device {name!r}; available: {sorted(DEVICES)}"
        ) from None


@dataclass(frozen=True)
class Register:
    """Named atoms at fixed positions [um]."""

    names: tuple[str, ...]
    positions: np.ndarray  # shape (n, 3), read-only

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] != len(self.names):
            raise ValidationError("positions must be an (n_atoms, 3) array")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @classmethod
    def from_coordinates(cls, atoms) -> "Register":
        """Build from an iterable of (name, position) pairs."""
        names, positions = [], []
        for name, pos in atoms:
            pos = list(pos)
            if len(pos) == 2:
                pos.append(0.0)
            names.append(str(name))
            positions.append(pos)
        return cls(tuple(names), np.array(positions, dtype=float).reshape(-1, 3))

    def __len__(self):
        return len(self.names)

    def distance(self, i: int, j: int) -> float:
        return float(np.linalg.norm(self.positions[i] - self.positions[j]))

    def pair_distances(self) -> dict[tuple[int, int], float]:
        n = len(self)
        return {
            (i, j): self.distance(i, j) for i in range(n) for j in range(i + 1, n)
        }

    def to_json(self) -> dict:
        return {
            "atoms": [
                {"name": name, "pos": [float(c) for c in pos]}
                for name, pos in zip(self.names, self.positions)
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "Register":
        return cls.from_coordinates((a["name"], a["pos"]) for a in data["atoms"])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "Register":
        return cls.from_json(json.loads(text))


def triangle_register(spacing: float = 4.0) -> Register:
    """The 3-atom planar register used throughout: an isoceles triangle
    with base ``spacing`` and apex at (spacing/2, spacing)."""
    d = spacing / 4.0
    return Register.from_coordinates(
        [
            ("q0", (0.0, 0.0, 0.0)),
            ("q1", (4.0 * d, 0.0, 0.0)),
            ("q2", (2.0 * d, 4.0 * d, 0.0)),
        ]
    )


@dataclass(frozen=True)
class Violation:
    """One constraint breach found while validating a register."""

    kind: str
    message: str
    atoms: tuple[str, ...] = ()

    def __str__(self):
        return f"{self.kind}: {self.message}"


def validate_register(register: Register, device: Device) -> list[Violation]:
    """Check a register against a device; returns every violation found.

    An empty list means the register is placeable.  Violations are data,
    not exceptions: callers decide whether to raise.
    """
    violations = []
    seen = set()
    for name in register.names:
        if name in seen:
            violations.append(
                Violation("duplicate_name", f"atom name {name!r} repeats", (name,))
            )
        seen.add(name)
    if len(register) > device.max_atoms:
        violations.append(
            Violation(
                "max_atoms",
                f"{len(register)} atoms exceed device limit {device.max_atoms}",
            )
        )
    radii = np.linalg.norm(register.positions, axis=1)
    for name, radius in zip(register.names, radii):
        if radius > device.max_radius_from_origin + 1e-12:
            violations.append(
                Violation(
                    "max_radius_from_origin",
                    f"atom {name} at {radius:.3f} um from origin exceeds "
                    f"{device.max_radius_from_origin} um",
                    (name,),
                )
            )
    if device.dimensions_allowed == 2:
        for name, pos in zip(register.names, register.positions):
            if pos[2] != 0.0:
                violations.append(
                    Violation(
                        "planar",
                        f"atom {name} has nonzero z = {pos[2]} on a planar device",
                        (name,),
                    )
                )
    for (i, j), dist in sorted(register.pair_distances().items()):
        if dist < device.min_pair_distance - 1e-12:
            violations.append(
                Violation(
                    "min_pair_distance",
                    f"atoms {register.names[i]},{register.names[j]} at "
                    f"{dist:.3f} um are closer than {device.min_pair_distance} um",
                    (register.names[i], register.names[j]),
                )
            )
    return violations


def blockade_radius(omega_max: float, device: Device) -> float:
    """Distance [um] below which two atoms driven at ``omega_max`` blockade.

    R_b = (C6/hbar / omega_max)^(1/6).  Note the builtin preset's
    coefficient makes R_b(5.42 rad/us) = 9.87 um, slightly under the
    round 10 um usually quoted as the conservative radius for that
    amplitude; the inverse at exactly 10 um gives 5.008 rad/us.
    """
    if not omega_max > 0:
        raise ValidationError(f"omega_max must be positive, got {omega_max}")
    return (device.c6_over_hbar / omega_max) ** (1.0 / 6.0)


def max_rabi_for_radius(radius: float, device: Device) -> float:
    """Largest Rabi frequency [rad/us] keeping the blockade radius >= radius.

    Exact inverse of blockade_radius: C6/hbar / R^6.
    """
    if not radius > 0:
        raise ValidationError(f"radius must be positive, got {radius}")
    return device.c6_over_hbar / radius**6


class LatticeKind(Enum):
    FACE_CENTERS_6 = "face-centers-6"
    CUBE_26 = "cube-26"
    TRIANGLE_3 = "triangle-3"


@dataclass(frozen=True)
class LatticePattern:
    """A repeating arrangement of atoms with spacing ``spacing`` [um].

    FACE_CENTERS_6 and CUBE_26 both emit a cubic grid; they differ in the
    neighbor shell they are designed around (6 neighbors at d versus all
    26 within d*sqrt(3)), which `neighbor_radius` exposes.  TRIANGLE_3 is
    the fixed 3-atom planar register scaled by spacing/4.
    """

    kind: LatticeKind
    spacing: float
    extent: tuple[int, int, int] = (1, 1, 1)

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValidationError("lattice spacing must be positive")
        if len(self.extent) != 3 or any(e < 1 for e in self.extent):
            raise ValidationError("extent must be three counts >= 1")

    def neighbor_radius(self) -> float:
        if self.kind is LatticeKind.CUBE_26:
            return self.spacing * math.sqrt(3.0) + 1e-9
        return self.spacing + 1e-9


def generate_lattice(pattern: LatticePattern, max_atoms: int = 1000) -> Register:
    """Emit the register realizing a pattern.

    Grid lattices are centered on the origin.  Registers larger than
    ``max_atoms`` raise: they would be impractical to simulate or place.
    """
    if pattern.kind is LatticeKind.TRIANGLE_3:
        return triangle_register(spacing=pattern.spacing)
    nx, ny, nz = pattern.extent
    count = nx * ny * nz
    if count > max_atoms:
        raise ValidationError(
            f"extent {pattern.extent} yields {count} atoms, above the cap {max_atoms}"
        )
    d = pattern.spacing
    center = np.array([(nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0]) * d
    atoms = []
    index = 0
    for ix in range(nx):
        for iy in range(ny):
            for iz in range(nz):
                pos = np.array([ix, iy, iz]) * d - center
                atoms.append((f"q{index}", pos))
                index += 1
    return Register.from_coordinates(atoms)


def interior_atoms(pattern: LatticePattern, register: Register) -> list[int]:
    """Indices of atoms whose full neighbor shell fits inside the extent.

    Boundary atoms are exempt from neighbor-count assertions.
    """
    if pattern.kind is LatticeKind.TRIANGLE_3:
        return []
    shell = 1  # both grid patterns draw neighbors from the adjacent layer
    nx, ny, nz = pattern.extent
    d = pattern.spacing
    center = np.array([(nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0]) * d
    out = []
    for idx, pos in enumerate(register.positions):
        grid = np.rint((pos + center) / d).astype(int)
        if all(
            shell <= g <= n - 1 - shell for g, n in zip(grid, (nx, ny, nz))
        ):
            out.append(idx)
    return out


def connectivity_graph(
    register: Register, interaction_radius: float
) -> dict[str, tuple[str, ...]]:
    """Adjacency by atom name: an edge wherever the pair distance is
    within ``interaction_radius``.  Symmetric, no self-edges."""
    if not interaction_radius > 0:
        raise ValidationError("interaction_radius must be positive")
    adjacency: dict[str, list[str]] = {name: [] for name in register.names}
    for (i, j), dist in register.pair_distances().items():
        if dist <= interaction_radius:
            adjacency[register.names[i]].append(register.names[j])
            adjacency[register.names[j]].append(register.names[i])
    return {name: tuple(sorted(neigh)) for name, neigh in adjacency.items()}

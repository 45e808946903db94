"""Synthetic separable dataset generation and ground-truth region grids.

Labels come from a hidden Haar-random SU(8) rotation of the parity
observable Z x Z x Z evaluated on the feature-mapped sample: +1 where the
expectation clears a gap, -1 where it clears the opposite gap, and draws
inside the gap are rejected.  The construction guarantees the data is
separable by exactly the feature map the kernel pipeline uses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError, ValidationError
from .qke import FeatureMapSpec, feature_map
from .simulator import run_ideal
from .waveform import TWO_PI


def random_su(dim: int = 8, seed: int = 0) -> np.ndarray:
    """Haar-distributed special unitary via QR of a complex Gaussian.

    The R-diagonal phases are divided out (Mezzadri's correction) and the
    determinant is normalized to exactly 1.
    """
    rng = np.random.default_rng(seed)
    ginibre = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(ginibre / np.sqrt(2.0))
    diag = np.diagonal(r)
    q = q * (diag / np.abs(diag))
    det = np.linalg.det(q)
    return q * det ** (-1.0 / dim)


def parity_diagonal(n_qubits: int = 3) -> np.ndarray:
    """Diagonal of Z x ... x Z: (-1)^popcount per computational basis state."""
    bits = np.arange(2**n_qubits)
    pop = np.array([bin(b).count("1") for b in bits])
    return np.where(pop % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class GroundTruth:
    """Hidden labeling rule: unitary V, parity observable, separation gap."""

    v: np.ndarray
    gap: float

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex)
        dim = v.shape[0]
        if v.shape != (dim, dim):
            raise ValidationError("V must be square")
        if np.linalg.norm(v.conj().T @ v - np.eye(dim)) > 1e-10:
            raise ValidationError("V must be unitary")
        if self.gap < 0:
            raise ValidationError("gap must be >= 0")
        object.__setattr__(self, "v", v)


def observable_value(psi: np.ndarray, v: np.ndarray) -> float:
    """<psi| V^dag (Z...Z) V |psi>, a real number in [-1, 1]."""
    rotated = v @ psi
    parity = parity_diagonal(int(round(np.log2(len(psi)))))
    return float(np.sum(parity * np.abs(rotated) ** 2))


def truth_value(x, gt: GroundTruth, spec: FeatureMapSpec = FeatureMapSpec()) -> float:
    """Ground-truth expectation for a sample: feature-map it and evaluate
    the rotated parity observable."""
    psi = run_ideal(feature_map(x, spec)).amplitudes
    return observable_value(psi, gt.v)


@dataclass(frozen=True)
class Sample:
    x: np.ndarray
    y: int

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if self.y not in (-1, 1):
            raise ValidationError("labels are +1 or -1")
        if np.any(x <= 0) or np.any(x > TWO_PI + 1e-12):
            raise ValidationError("sample coordinates must lie in (0, 2*pi]")
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class Dataset:
    train: tuple[Sample, ...]
    test: tuple[Sample, ...]
    metadata: dict = field(default_factory=dict)

    def features(self, split: str) -> np.ndarray:
        samples = self.train if split == "train" else self.test
        return np.array([s.x for s in samples])

    def labels(self, split: str) -> np.ndarray:
        samples = self.train if split == "train" else self.test
        return np.array([s.y for s in samples], dtype=int)


def generate(
    seed: int,
    n_train_per_class: int = 20,
    n_test_per_class: int = 10,
    gap: float = 0.1,
    spec: FeatureMapSpec = FeatureMapSpec(),
    max_attempts: int = 10**6,
) -> Dataset:
    """Rejection-sample a class-balanced train/test split.

    Draws x uniformly on (0, 2*pi]^f, labels it +1 if the ground-truth
    value is >= gap and -1 if <= -gap, rejects the gap interior, and fills
    the train quotas before the test quotas per class.  Deterministic per
    seed.
    """
    if not gap < 1:
        raise ValidationError("gap must be < 1")
    root = np.random.SeedSequence(seed)
    v_seed, draw_seed = root.spawn(2)
    gt = GroundTruth(v=random_su(2**spec.n_features, v_seed), gap=gap)
    rng = np.random.default_rng(draw_seed)

    quotas = {
        ("train", 1): n_train_per_class,
        ("train", -1): n_train_per_class,
        ("test", 1): n_test_per_class,
        ("test", -1): n_test_per_class,
    }
    buckets: dict[tuple[str, int], list[Sample]] = {key: [] for key in quotas}
    attempts = 0
    accepted = 0
    while any(len(buckets[key]) < quotas[key] for key in quotas):
        if attempts >= max_attempts:
            raise GenerationError(
                f"dataset quota unreachable after {attempts} draws "
                f"({accepted} accepted, acceptance rate "
                f"{accepted / max(attempts, 1):.4f}); gap={gap} may be too wide",
                attempts=attempts,
                accepted=accepted,
            )
        attempts += 1
        x = TWO_PI - rng.uniform(0.0, TWO_PI, size=spec.n_features)
        value = truth_value(x, gt, spec)
        if value >= gap:
            label = 1
        elif value <= -gap:
            label = -1
        else:
            continue
        accepted += 1
        for split in ("train", "test"):
            key = (split, label)
            if len(buckets[key]) < quotas[key]:
                buckets[key].append(Sample(x=x, y=label))
                break

    metadata = {
        "seed": seed,
        "gap": gap,
        "n_features": spec.n_features,
        "repetitions": spec.repetitions,
        "n_train": 2 * n_train_per_class,
        "n_test": 2 * n_test_per_class,
        "attempts": attempts,
        "acceptance_rate": accepted / attempts,
    }
    train = buckets[("train", 1)] + buckets[("train", -1)]
    test = buckets[("test", 1)] + buckets[("test", -1)]
    return Dataset(train=tuple(train), test=tuple(test), metadata=metadata)


def ground_truth_for_seed(seed: int, gap: float, spec: FeatureMapSpec) -> GroundTruth:
    """The same hidden unitary `generate` would use for this seed."""
    v_seed, _ = np.random.SeedSequence(seed).spawn(2)
    return GroundTruth(v=random_su(2**spec.n_features, v_seed), gap=gap)


FACES = (
    "x0=0", "x0=2pi",
    "x1=0", "x1=2pi",
    "x2=0", "x2=2pi",
)


def region_grid(
    gt: GroundTruth,
    spec: FeatureMapSpec = FeatureMapSpec(),
    resolution: int = 20,
    gap: float | None = None,
) -> dict[str, np.ndarray]:
    """Label the six frontier faces of the (0, 2*pi]^3 cube.

    Each face is a resolution x resolution grid of {+1, -1, 0} where 0
    marks the separation gap; cells are evaluated at their centers.
    """
    if spec.n_features != 3:
        raise ValidationError("region grids are defined for 3 features")
    if resolution < 1:
        raise ValidationError("resolution must be >= 1")
    if gap is None:
        gap = gt.gap
    centers = (np.arange(resolution) + 0.5) * (TWO_PI / resolution)
    faces: dict[str, np.ndarray] = {}
    for axis in range(3):
        for side_value, side_name in ((0.0, "0"), (TWO_PI, "2pi")):
            grid = np.zeros((resolution, resolution), dtype=int)
            for a, u in enumerate(centers):
                for b, w in enumerate(centers):
                    x = np.empty(3)
                    x[axis] = side_value
                    x[(axis + 1) % 3] = u
                    x[(axis + 2) % 3] = w
                    value = truth_value(x, gt, spec)
                    grid[a, b] = 1 if value >= gap else (-1 if value <= -gap else 0)
            faces[f"x{axis}={side_name}"] = grid
    return faces

"""Command-line pipeline driver.

Subcommands: gen-data, compile, kernel, train-eval, plot, lattice.
Configuration is a flat key = value text file; every key can be overridden
by a flag of the same name.  Exit codes: 0 success, 2 validation error,
3 numerical/convergence error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import files
from .compiler import (
    CONSERVATIVE_TWO_PI_AMPLITUDE,
    CompilerConfig,
    GateCircuit,
    compile_circuit,
)
from .dataset import generate, ground_truth_for_seed, region_grid
from .device import (
    LatticeKind,
    LatticePattern,
    Register,
    generate_lattice,
    get_device,
    triangle_register,
    validate_register,
)
from .errors import NumericalError, ValidationError
from .qke import FeatureMapSpec, KernelEstimator, qke_circuit
from .simulator import BackendKind, BackendMode
from .svm import accuracy, gamma_scale, predict, rbf_kernel, train
from .waveform import Pulse


@dataclass
class PipelineConfig:
    """Every pipeline knob, file-loadable and flag-overridable."""

    device: str = "Chadoq2"
    register: str = "triangle"  # preset name or register JSON path
    features: int = 3
    repetitions: int = 2
    shots: str = "1000"  # integer or "exact"
    backend: str = "hard-blockade"  # ideal | vdw | hard-blockade
    estimator: str = "frequency"  # frequency | squared
    symmetric: bool = True
    dataset_seed: int = 7
    sampling_seed: int = 1234
    gap: float = 0.1
    train_per_class: int = 20
    test_per_class: int = 10
    max_attempts: int = 10**6
    svm_c: float = 1.0
    jobs: int = 0  # parallel kernel workers; 0 means all available cores
    step: float = 1.0
    blockade_radius: float = 10.0
    two_pi_amplitude: float = CONSERVATIVE_TWO_PI_AMPLITUDE
    out_dir: str = "out"

    def shots_value(self) -> int | None:
        text = str(self.shots).strip().lower()
        if text == "exact":
            return None
        try:
            value = int(text)
        except ValueError:
            raise ValidationError(f"shots must be an integer or 'exact', got {text!r}")
        if value < 1:
            raise ValidationError("shots must be >= 1")
        return value

    def backend_mode(self) -> BackendMode:
        try:
            kind = BackendKind(self.backend)
        except ValueError:
            raise ValidationError(
                f"unknown backend {self.backend!r}; choose from "
                f"{[k.value for k in BackendKind]}"
            )
        return BackendMode(kind, step=self.step, blockade_radius=self.blockade_radius)

    def feature_map_spec(self) -> FeatureMapSpec:
        return FeatureMapSpec(n_features=self.features, repetitions=self.repetitions)

    def compiler_config(self) -> CompilerConfig:
        return CompilerConfig(two_pi_amplitude=self.two_pi_amplitude)

    def resolve_register(self) -> Register:
        if self.register == "triangle":
            return triangle_register()
        path = Path(self.register)
        if not path.exists():
            raise ValidationError(f"register file {path} does not exist")
        return Register.loads(path.read_text())

    def resolved_jobs(self) -> int:
        import os

        return self.jobs if self.jobs > 0 else (os.cpu_count() or 1)

    def snapshot(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, kind, raw: str):
    raw = raw.strip()
    if kind is bool:
        low = raw.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise ValidationError(f"config key {name} expects a boolean, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise ValidationError(f"config key {name} expects {kind.__name__}, got {raw!r}")


def parse_config_file(path: Path) -> dict:
    """Flat key = value lines; # and ; start comments; keys use - or _."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].split(";", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        key, raw = stripped.split("=", 1)
        values[key.strip().replace("-", "_")] = raw.strip()
    return values


def load_config(config_path: str | None, overrides: dict) -> PipelineConfig:
    known = {f.name: f.type for f in fields(PipelineConfig)}
    types = {
        name: (type(getattr(PipelineConfig(), name))) for name in known
    }
    merged = {}
    if config_path:
        for key, raw in parse_config_file(Path(config_path)).items():
            if key not in known:
                raise ValidationError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, types[key], raw)
    for key, value in overrides.items():
        if value is None:
            continue
        merged[key] = _coerce(key, types[key], str(value))
    return PipelineConfig(**merged)


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value config file")
    for f in fields(PipelineConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper())


def _config_from_args(args) -> PipelineConfig:
    overrides = {
        f.name: getattr(args, f.name)
        for f in fields(PipelineConfig)
        if hasattr(args, f.name)
    }
    return load_config(args.config, overrides)


def _region_face_filename(face: str) -> str:
    return "region_" + face.replace("=", "_") + ".csv"


def cmd_gen_data(args) -> int:
    cfg = _config_from_args(args)
    out = Path(cfg.out_dir)
    spec = cfg.feature_map_spec()
    ds = generate(
        seed=cfg.dataset_seed,
        n_train_per_class=cfg.train_per_class,
        n_test_per_class=cfg.test_per_class,
        gap=cfg.gap,
        spec=spec,
        max_attempts=cfg.max_attempts,
    )
    files.write_dataset_csv(out / "train.csv", ds.train)
    files.write_dataset_csv(out / "test.csv", ds.test)
    files.write_json(out / "dataset.json", ds.metadata)
    print(
        f"wrote {len(ds.train)} train / {len(ds.test)} test samples to {out}"
        f" (acceptance rate {ds.metadata['acceptance_rate']:.3f})"
    )
    if args.region_resolution:
        gt = ground_truth_for_seed(cfg.dataset_seed, cfg.gap, spec)
        faces = region_grid(gt, spec, resolution=args.region_resolution)
        for face, grid in faces.items():
            files.write_region_csv(out / _region_face_filename(face), grid)
        print(f"wrote {len(faces)} region-grid faces at resolution "
              f"{args.region_resolution}")
    return 0


def cmd_compile(args) -> int:
    cfg = _config_from_args(args)
    register = cfg.resolve_register()
    device = get_device(cfg.device)
    if args.circuit:
        circuit = GateCircuit.loads(Path(args.circuit).read_text())
    else:
        spec = cfg.feature_map_spec()
        x_probe = np.full(spec.n_features, 1.0)
        circuit = qke_circuit(x_probe, x_probe, spec)
    seq = compile_circuit(circuit, register, device, cfg.compiler_config())
    out = Path(args.out or (Path(cfg.out_dir) / "sequence.json"))
    files.atomic_write_text(out, seq.dumps() + "\n")
    n_pulses = sum(1 for e in seq.events if isinstance(e.item, Pulse))
    report = {
        "duration_ns": seq.duration,
        "duration_us": seq.duration * 1e-3,
        "n_events": len(seq.events),
        "n_pulses": n_pulses,
        "n_phase_shifts": len(seq.events) - n_pulses,
    }
    files.write_json(out.with_name(out.stem + "_report.json"), report)
    print(f"compiled {len(circuit.ops)} ops -> {n_pulses} pulses, "
          f"duration {report['duration_us']:.3f} us -> {out}")
    return 0


def _estimator_for(cfg: PipelineConfig) -> KernelEstimator:
    return KernelEstimator(
        spec=cfg.feature_map_spec(),
        mode=cfg.backend_mode(),
        register=cfg.resolve_register(),
        device=get_device(cfg.device),
        compiler_config=cfg.compiler_config(),
        estimator=cfg.estimator,
    )


def cmd_kernel(args) -> int:
    cfg = _config_from_args(args)
    out = Path(cfg.out_dir)
    data_dir = Path(args.data_dir or cfg.out_dir)
    ds = files.dataset_from_files(data_dir / "train.csv", data_dir / "test.csv")
    x_train = ds.features("train")
    x_test = ds.features("test")
    estimator = _estimator_for(cfg)
    shots = cfg.shots_value()
    jobs = cfg.resolved_jobs()

    timings = {}
    start = time.perf_counter()
    k_train = estimator.matrix(
        x_train, x_train, shots, seed=cfg.sampling_seed,
        symmetric=cfg.symmetric, row_prefix="m", col_prefix="m", jobs=jobs,
    )
    timings["train_kernel_s"] = round(time.perf_counter() - start, 3)
    start = time.perf_counter()
    k_test = estimator.matrix(
        x_test, x_train, shots, seed=cfg.sampling_seed + 1,
        symmetric=False, row_prefix="s", col_prefix="m", jobs=jobs,
    )
    timings["test_kernel_s"] = round(time.perf_counter() - start, 3)

    artifacts = []
    for name, kernel in (("kernel_train", k_train), ("kernel_test", k_test)):
        files.write_kernel_csv(out / f"{name}.csv", kernel)
        files.write_kernel_sidecar(out / f"{name}.json", kernel)
        artifacts.extend([out / f"{name}.csv", out / f"{name}.json"])

    duration_stats = None
    if cfg.backend_mode().kind is not BackendKind.IDEAL_GATE:
        probe = qke_circuit(x_train[0], x_train[0], cfg.feature_map_spec())
        seq = compile_circuit(
            probe, cfg.resolve_register(), get_device(cfg.device),
            cfg.compiler_config(),
        )
        # Data enters only through zero-duration phase gates, so every
        # sequence in the run shares this duration.
        duration_stats = {
            "min_us": seq.duration * 1e-3,
            "mean_us": seq.duration * 1e-3,
            "max_us": seq.duration * 1e-3,
        }
    manifest = {
        "config": cfg.snapshot(),
        "artifacts": [
            {"path": str(p.relative_to(out)), "sha256": files.sha256_of_file(p)}
            for p in artifacts
        ],
        "timings": timings,
        "sequence_duration": duration_stats,
    }
    files.write_json(out / "manifest.json", manifest)
    print(
        f"kernel matrices {k_train.values.shape} and {k_test.values.shape} "
        f"written to {out} in {timings['train_kernel_s'] + timings['test_kernel_s']:.1f}s"
    )
    return 0


def cmd_train_eval(args) -> int:
    cfg = _config_from_args(args)
    out = Path(cfg.out_dir)
    data_dir = Path(args.data_dir or cfg.out_dir)
    kernel_dir = Path(args.kernel_dir or cfg.out_dir)
    ds = files.dataset_from_files(data_dir / "train.csv", data_dir / "test.csv")
    y_train = ds.labels("train")
    y_test = ds.labels("test")
    k_train = files.read_kernel_csv(
        kernel_dir / "kernel_train.csv", kernel_dir / "kernel_train.json"
    )
    k_test = files.read_kernel_csv(
        kernel_dir / "kernel_test.csv", kernel_dir / "kernel_test.json"
    )

    model = train(k_train.values, y_train, c=cfg.svm_c)
    quantum_pred = predict(model, k_test.values)
    quantum_acc = accuracy(quantum_pred, y_test)

    x_train = ds.features("train")
    x_test = ds.features("test")
    gamma = gamma_scale(x_train)
    rbf_model = train(rbf_kernel(x_train, x_train, gamma), y_train, c=cfg.svm_c)
    rbf_pred = predict(rbf_model, rbf_kernel(x_test, x_train, gamma))
    rbf_acc = accuracy(rbf_pred, y_test)

    files.atomic_write_text(out / "model.json", model.dumps() + "\n")
    report = {
        "quantum": {
            "accuracy": quantum_acc,
            "predictions": [int(v) for v in quantum_pred],
            "truth": [int(v) for v in y_test],
        },
        "rbf": {
            "accuracy": rbf_acc,
            "predictions": [int(v) for v in rbf_pred],
            "truth": [int(v) for v in y_test],
        },
        "difference": quantum_acc - rbf_acc,
        "hinge_objective": {
            "objective": model.hinge_report.objective,
            "regularizer": model.hinge_report.regularizer,
            "mean_hinge_loss": model.hinge_report.mean_hinge_loss,
            "lambda": model.hinge_report.lam,
        },
        "n_support_vectors": len(model.support),
    }
    files.write_json(out / "accuracy_report.json", report)
    print(
        f"quantum accuracy {quantum_acc:.3f} vs rbf {rbf_acc:.3f} "
        f"(difference {quantum_acc - rbf_acc:+.3f}), "
        f"{len(model.support)}/{len(y_train)} support vectors"
    )
    return 0


def cmd_plot(args) -> int:
    cfg = _config_from_args(args)
    out_dir = Path(cfg.out_dir)
    wrote = []
    if args.kernel:
        kernel = files.read_kernel_csv(Path(args.kernel))
        target = Path(args.out) if args.out else out_dir / (
            Path(args.kernel).stem + ".pgm"
        )
        files.write_pgm(target, files.kernel_to_pixels(kernel.values))
        wrote.append(target)
    if args.region_dir:
        region_paths = sorted(Path(args.region_dir).glob("region_*.csv"))
        if not region_paths:
            raise ValidationError(f"no region_*.csv files under {args.region_dir}")
        for path in region_paths:
            grid = files.read_region_csv(path)
            target = out_dir / (path.stem + ".pgm")
            files.write_pgm(target, files.region_to_pixels(grid))
            wrote.append(target)
    if not wrote:
        raise ValidationError("plot needs --kernel and/or --region-dir")
    for path in wrote:
        print(f"wrote {path}")
    return 0


def cmd_lattice(args) -> int:
    cfg = _config_from_args(args)
    kind = {
        "face-centers-6": LatticeKind.FACE_CENTERS_6,
        "cube-26": LatticeKind.CUBE_26,
        "triangle-3": LatticeKind.TRIANGLE_3,
    }.get(args.kind)
    if kind is None:
        raise ValidationError(f"unknown lattice kind {args.kind!r}")
    extent = tuple(args.extent)
    pattern = LatticePattern(kind=kind, spacing=args.spacing, extent=extent)
    register = generate_lattice(pattern)
    out = Path(args.out or (Path(cfg.out_dir) / "register.json"))
    files.atomic_write_text(out, register.dumps() + "\n")
    print(f"wrote {len(register)}-atom {args.kind} register to {out}")
    if args.validate:
        device = get_device(cfg.device)
        violations = validate_register(register, device)
        if violations:
            for violation in violations:
                print(f"violation {violation}")
            return 2
        print(f"register valid for {device.name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="atomqke",
        description="neutral-atom quantum kernel estimation pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate the labeled dataset")
    _add_config_flags(p)
    p.add_argument("--region-resolution", type=int, default=0,
                   help="also emit ground-truth region grids per cube face")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("compile", help="lower a circuit to a pulse sequence")
    _add_config_flags(p)
    p.add_argument("--circuit", help="circuit JSON (default: one QKE probe circuit)")
    p.add_argument("--out", help="sequence output path")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("kernel", help="estimate train/test kernel matrices")
    _add_config_flags(p)
    p.add_argument("--data-dir", help="directory with train.csv/test.csv")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("train-eval", help="train the SVM and score both kernels")
    _add_config_flags(p)
    p.add_argument("--data-dir", help="directory with train.csv/test.csv")
    p.add_argument("--kernel-dir", help="directory with kernel_*.csv")
    p.set_defaults(func=cmd_train_eval)

    p = sub.add_parser("plot", help="render kernels or region grids to PGM")
    _add_config_flags(p)
    p.add_argument("--kernel", help="kernel CSV to render as a heatmap")
    p.add_argument("--region-dir", help="directory with region_*.csv files")
    p.add_argument("--out", help="output path for --kernel")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("lattice", help="emit a lattice-pattern register")
    _add_config_flags(p)
    p.add_argument("--kind", required=True,
                   help="face-centers-6 | cube-26 | triangle-3")
    p.add_argument("--spacing", type=float, default=4.0, help="lattice spacing [um]")
    p.add_argument("--extent", type=int, nargs=3, default=[1, 1, 1],
                   metavar=("NX", "NY", "NZ"))
    p.add_argument("--out", help="register output path")
    p.add_argument("--validate", action="store_true",
                   help="check the register against the configured device")
    p.set_defaults(func=cmd_lattice)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    # malformed or missing inputs all count as validation failures
    except (ValidationError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

import math

import numpy as np
import pytest

from atomqke import (
    ValidationError,
    estimate_entry,
    executions_bound,
    feature_map,
    qke_circuit,
    run_ideal,
    zero_probability,
)
from atomqke.compiler import Gate
from atomqke.qke import (
    ESTIMATOR_SQUARED,
    FeatureMapSpec,
    KernelEstimator,
    KernelMatrix,
    entry_seed,
)
from atomqke.simulator import BackendMode
from atomqke.waveform import TWO_PI


def random_samples(n, seed=0):
    rng = np.random.default_rng(seed)
    return TWO_PI - rng.uniform(0, TWO_PI, size=(n, 3))


class TestFeatureMap:
    def test_single_repetition_op_count(self):
        circuit = feature_map([1.0, 2.0, 3.0], FeatureMapSpec(repetitions=1))
        assert len(circuit.ops) == 15  # 3 H + 3 P + 3 * (CX, P, CX)
        kinds = [op.gate for op in circuit.ops]
        assert kinds[:3] == [Gate.H] * 3
        assert kinds.count(Gate.CX) == 6
        assert kinds.count(Gate.P) == 6

    def test_default_two_repetitions(self):
        circuit = feature_map([1.0, 2.0, 3.0])
        assert len(circuit.ops) == 30

    def test_pair_phase_values(self):
        x = np.array([0.5, 1.5, 2.5])
        circuit = feature_map(x, FeatureMapSpec(repetitions=1))
        phases = [op.params[0] for op in circuit.ops if op.gate is Gate.P]
        single = [2 * xi for xi in x]
        pairs = [
            2 * (math.pi - x[i]) * (math.pi - x[j])
            for i, j in ((0, 1), (0, 2), (1, 2))
        ]
        assert phases == pytest.approx(single + pairs)

    def test_deterministic(self):
        x = [0.1, 0.2, 0.3]
        assert feature_map(x) == feature_map(x)

    def test_statevector_is_normalized_and_spread(self):
        state = run_ideal(feature_map([1.0, 3.0, 5.0]))
        assert state.norm() == pytest.approx(1.0)
        assert np.all(np.abs(state.amplitudes) > 1e-6)

    def test_rejects_wrong_arity(self):
        with pytest.raises(ValidationError):
            feature_map([1.0, 2.0])
        with pytest.raises(ValidationError):
            feature_map([1.0, np.inf, 2.0])


class TestQkeCircuit:
    def test_identical_samples_return_to_zero(self):
        x = np.array([0.7, 2.1, 4.9])
        state = run_ideal(qke_circuit(x, x))
        assert zero_probability(state) == pytest.approx(1.0, abs=1e-12)

    def test_op_count(self):
        spec = FeatureMapSpec(repetitions=2)
        circuit = qke_circuit([1, 2, 3], [4, 5, 6], spec)
        assert len(circuit.ops) == 2 * spec.repetitions * 15

    @pytest.mark.parametrize("seed", range(5))
    def test_exchange_symmetry(self, seed):
        x1, x2 = random_samples(2, seed)
        forward = zero_probability(run_ideal(qke_circuit(x1, x2)))
        backward = zero_probability(run_ideal(qke_circuit(x2, x1)))
        assert abs(forward - backward) <= 1e-9


class TestEstimateEntry:
    def test_exact_diagonal_ideal(self):
        x = random_samples(1)[0]
        assert estimate_entry(x, x, None) == pytest.approx(1.0, abs=1e-6)

    def test_exact_diagonal_hard_blockade(self):
        x = random_samples(1)[0]
        value = estimate_entry(x, x, None, mode=BackendMode.hard_blockade())
        assert value == pytest.approx(1.0, abs=1e-6)

    def test_sampled_diagonal_stays_high(self):
        x = random_samples(1, seed=3)[0]
        value = estimate_entry(
            x, x, 1000, mode=BackendMode.hard_blockade(), seed=11
        )
        assert value >= 0.99

    def test_sampling_converges_to_exact(self):
        x1, x2 = random_samples(2, seed=5)
        exact = estimate_entry(x1, x2, None)
        sampled = estimate_entry(x1, x2, 10**5, seed=8)
        # 3 sigma of a binomial at 1e5 shots is under 0.005
        assert abs(sampled - exact) <= 0.01

    def test_squared_estimator_mode(self):
        x1, x2 = random_samples(2, seed=9)
        est = KernelEstimator(estimator=ESTIMATOR_SQUARED)
        plain = KernelEstimator()
        assert est.entry(x1, x2, None) == pytest.approx(
            plain.entry(x1, x2, None) ** 2
        )


class TestEstimateMatrix:
    def test_shapes(self):
        rows = random_samples(4, seed=1)
        cols = random_samples(3, seed=2)
        kernel = KernelEstimator().matrix(rows, cols, None)
        assert kernel.values.shape == (4, 3)
        assert len(kernel.row_ids) == 4 and len(kernel.col_ids) == 3

    def test_exact_training_matrix_properties(self):
        xs = random_samples(8, seed=4)
        kernel = KernelEstimator().matrix(xs, xs, None, symmetric=True)
        values = kernel.values
        assert np.allclose(np.diag(values), 1.0, atol=1e-6)
        assert np.max(np.abs(values - values.T)) <= 1e-9
        assert np.linalg.eigvalsh(values).min() >= -1e-8

    def test_symmetric_requires_same_samples(self):
        with pytest.raises(ValidationError):
            KernelEstimator().matrix(
                random_samples(2, 1), random_samples(2, 2), None, symmetric=True
            )

    def test_bit_identical_reruns(self):
        xs = random_samples(3, seed=6)
        est = KernelEstimator(mode=BackendMode.hard_blockade())
        a = est.matrix(xs, xs, 200, seed=31, symmetric=True)
        b = est.matrix(xs, xs, 200, seed=31, symmetric=True)
        assert np.array_equal(a.values, b.values)

    def test_parallel_equals_serial(self):
        xs = random_samples(3, seed=7)
        est = KernelEstimator(mode=BackendMode.hard_blockade())
        serial = est.matrix(xs, xs, 100, seed=13, symmetric=False, jobs=1)
        parallel = est.matrix(xs, xs, 100, seed=13, symmetric=False, jobs=2)
        assert np.array_equal(serial.values, parallel.values)

    def test_asymmetric_protocol_estimates_both_triangles(self):
        xs = random_samples(3, seed=8)
        est = KernelEstimator(mode=BackendMode.hard_blockade())
        kernel = est.matrix(xs, xs, 400, seed=17, symmetric=False)
        # independent shot streams above and below the diagonal
        off = kernel.values[np.triu_indices(3, 1)] - kernel.values.T[np.triu_indices(3, 1)]
        assert np.any(off != 0.0)

    def test_backend_consistency_exact(self):
        xs = random_samples(5, seed=10)
        ideal = KernelEstimator(mode=BackendMode.ideal()).matrix(
            xs, xs, None, symmetric=True
        )
        hard = KernelEstimator(mode=BackendMode.hard_blockade()).matrix(
            xs, xs, None, symmetric=True
        )
        assert np.max(np.abs(ideal.values - hard.values)) <= 1e-3

    def test_estimator_consistency_at_many_shots(self):
        # fixed-seed regression: 1e4 shots keep every entry within 0.05
        # of the exact value
        xs = random_samples(4, seed=12)
        est = KernelEstimator(mode=BackendMode.hard_blockade())
        exact = est.matrix(xs, xs, None, symmetric=True).values
        sampled = est.matrix(xs, xs, 10**4, seed=55, symmetric=True).values
        assert np.max(np.abs(sampled - exact)) <= 0.05

    def test_metadata_recorded(self):
        xs = random_samples(2, seed=11)
        kernel = KernelEstimator(mode=BackendMode.hard_blockade()).matrix(
            xs, xs, 50, seed=99, symmetric=True
        )
        assert kernel.metadata == {
            "shots": 50,
            "backend": "hard-blockade",
            "seed": 99,
            "symmetric": True,
            "estimator": "frequency",
        }

    def test_entries_validated(self):
        with pytest.raises(ValidationError):
            KernelMatrix(
                values=np.array([[1.5]]), row_ids=("r0",), col_ids=("c0",)
            )


class TestSeedsAndBounds:
    def test_entry_seed_stable(self):
        assert entry_seed(0, 0, 0) == 16774267956234540618
        assert entry_seed(42, 3, 5) == 7426224533891514585
        assert entry_seed(0, 0, 1) != entry_seed(0, 1, 0)

    def test_executions_bound_examples(self):
        assert executions_bound(1.0, 1) == 1
        assert executions_bound(0.05, 10) == 4 * executions_bound(0.1, 10)
        assert executions_bound(0.1, 40) == 256_000_000

    def test_executions_bound_domain(self):
        with pytest.raises(ValidationError):
            executions_bound(0.0, 1)
        with pytest.raises(ValidationError):
            executions_bound(0.1, 0)

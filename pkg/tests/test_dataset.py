import numpy as np
import pytest

from atomqke import (
    CHADOQ2,
    GenerationError,
    ValidationError,
    compile_circuit,
    feature_map,
    triangle_register,
)
from atomqke.dataset import (
    GroundTruth,
    Sample,
    generate,
    ground_truth_for_seed,
    observable_value,
    parity_diagonal,
    random_su,
    region_grid,
    truth_value,
)
from atomqke.qke import FeatureMapSpec
from atomqke.simulator import BackendMode
from atomqke.waveform import TWO_PI


class TestRandomSu:
    def test_unitarity(self):
        v = random_su(8, seed=1)
        assert np.linalg.norm(v.conj().T @ v - np.eye(8)) <= 1e-10

    def test_special(self):
        v = random_su(8, seed=2)
        assert abs(np.linalg.det(v) - 1.0) <= 1e-10

    def test_column_norms(self):
        v = random_su(8, seed=3)
        assert np.allclose(np.linalg.norm(v, axis=0), 1.0, atol=1e-10)

    def test_deterministic(self):
        assert np.array_equal(random_su(8, seed=4), random_su(8, seed=4))
        assert not np.array_equal(random_su(8, seed=4), random_su(8, seed=5))


class TestTruthValue:
    def test_parity_diagonal(self):
        par = parity_diagonal(3)
        assert par[0] == 1.0  # |000>
        assert par[0b111] == -1.0
        assert par[0b101] == 1.0

    def test_all_zero_state_with_identity(self):
        psi = np.zeros(8, dtype=complex)
        psi[0] = 1.0
        assert observable_value(psi, np.eye(8)) == pytest.approx(1.0)

    def test_range(self):
        gt = GroundTruth(v=random_su(8, seed=6), gap=0.1)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            x = TWO_PI - rng.uniform(0, TWO_PI, 3)
            assert -1.0 <= truth_value(x, gt) <= 1.0

    def test_invariant_under_global_phase_of_v(self):
        v = random_su(8, seed=7)
        gt1 = GroundTruth(v=v, gap=0.1)
        gt2 = GroundTruth(v=np.exp(0.37j) * v, gap=0.1)
        x = np.array([1.0, 2.0, 3.0])
        assert truth_value(x, gt1) == pytest.approx(truth_value(x, gt2), abs=1e-12)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValidationError):
            GroundTruth(v=np.ones((8, 8)), gap=0.1)

    @pytest.mark.parametrize("seed", range(20))
    def test_agrees_with_hard_blockade_evaluation(self, seed):
        # label rule evaluated through the pulse backend instead of the
        # ideal statevector: the frame-corrected digital amplitudes feed
        # the same observable
        from atomqke.simulator import logical_digital_state

        spec = FeatureMapSpec()
        gt = GroundTruth(v=random_su(8, seed=40 + seed), gap=0.1)
        rng = np.random.default_rng(seed)
        x = TWO_PI - rng.uniform(0, TWO_PI, 3)
        seq = compile_circuit(feature_map(x, spec), triangle_register(), CHADOQ2)
        digital = logical_digital_state(seq, BackendMode.hard_blockade())
        pulse_value = observable_value(digital, gt.v)
        assert pulse_value == pytest.approx(truth_value(x, gt, spec), abs=2e-3)


class TestGenerate:
    def test_default_sizes_and_balance(self):
        ds = generate(seed=11)
        assert len(ds.train) == 40 and len(ds.test) == 20
        assert sum(s.y == 1 for s in ds.train) == 20
        assert sum(s.y == 1 for s in ds.test) == 10

    def test_coordinates_in_domain(self):
        ds = generate(seed=12, n_train_per_class=5, n_test_per_class=2)
        for sample in ds.train + ds.test:
            assert np.all(sample.x > 0) and np.all(sample.x <= TWO_PI)

    def test_samples_respect_the_gap(self):
        gap = 0.1
        ds = generate(seed=13, n_train_per_class=5, n_test_per_class=2, gap=gap)
        gt = ground_truth_for_seed(13, gap, FeatureMapSpec())
        for sample in ds.train + ds.test:
            value = truth_value(sample.x, gt)
            assert abs(value) >= gap
            assert sample.y == (1 if value >= gap else -1)

    def test_deterministic(self):
        a = generate(seed=14, n_train_per_class=4, n_test_per_class=2)
        b = generate(seed=14, n_train_per_class=4, n_test_per_class=2)
        assert all(
            np.array_equal(sa.x, sb.x) and sa.y == sb.y
            for sa, sb in zip(a.train + a.test, b.train + b.test)
        )

    def test_zero_gap_accepts_everything(self):
        ds = generate(seed=15, n_train_per_class=5, n_test_per_class=2, gap=0.0)
        assert ds.metadata["acceptance_rate"] >= 0.999

    def test_unreachable_quota_reports_rates(self):
        with pytest.raises(GenerationError) as err:
            generate(seed=16, gap=0.999, max_attempts=200)
        assert err.value.attempts == 200
        assert "acceptance rate" in str(err.value)

    def test_sample_validation(self):
        with pytest.raises(ValidationError):
            Sample(x=np.array([0.0, 1.0, 1.0]), y=1)  # 0 excluded from domain
        with pytest.raises(ValidationError):
            Sample(x=np.array([1.0, 1.0, 1.0]), y=2)


class TestRegionGrid:
    def test_face_count_and_shape(self):
        gt = ground_truth_for_seed(17, 0.1, FeatureMapSpec())
        faces = region_grid(gt, resolution=5)
        assert len(faces) == 6
        assert set(faces) == {
            "x0=0", "x0=2pi", "x1=0", "x1=2pi", "x2=0", "x2=2pi"
        }
        assert all(grid.shape == (5, 5) for grid in faces.values())

    def test_labels_match_reevaluation(self):
        spec = FeatureMapSpec()
        gt = ground_truth_for_seed(18, 0.1, spec)
        faces = region_grid(gt, spec, resolution=4)
        centers = (np.arange(4) + 0.5) * (TWO_PI / 4)
        grid = faces["x1=2pi"]
        for a in range(4):
            for b in range(4):
                x = np.empty(3)
                x[1] = TWO_PI
                x[2] = centers[a]
                x[0] = centers[b]
                value = truth_value(x, gt, spec)
                want = 1 if value >= 0.1 else (-1 if value <= -0.1 else 0)
                assert grid[a, b] == want

    def test_wide_gap_blanks_the_grid(self):
        gt = ground_truth_for_seed(19, 0.99, FeatureMapSpec())
        faces = region_grid(gt, resolution=4, gap=0.99)
        cells = np.concatenate([grid.ravel() for grid in faces.values()])
        assert np.mean(cells == 0) >= 0.9

    def test_default_resolution(self):
        gt = ground_truth_for_seed(20, 0.1, FeatureMapSpec())
        faces = region_grid(gt)
        assert all(grid.shape == (20, 20) for grid in faces.values())
        assert sum(grid.size for grid in faces.values()) == 6 * 400

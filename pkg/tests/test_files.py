import numpy as np
import pytest

from atomqke import ValidationError
from atomqke.dataset import Sample
from atomqke.files import (
    kernel_to_pixels,
    read_dataset_csv,
    read_kernel_csv,
    read_region_csv,
    region_to_pixels,
    sha256_of_file,
    write_dataset_csv,
    write_kernel_csv,
    write_kernel_sidecar,
    write_pgm,
    write_region_csv,
)
from atomqke.qke import KernelMatrix


class TestDatasetCsv:
    def test_round_trip_keeps_signed_labels(self, tmp_path):
        samples = [
            Sample(x=np.array([0.5, 1.5, 2.5]), y=1),
            Sample(x=np.array([3.5, 4.5, 5.5]), y=-1),
        ]
        path = tmp_path / "train.csv"
        write_dataset_csv(path, samples)
        text = path.read_text().splitlines()
        assert text[0] == "x0,x1,x2,y"
        assert text[1].endswith(",1")
        assert text[2].endswith(",-1")
        back = read_dataset_csv(path)
        assert [s.y for s in back] == [1, -1]
        assert np.allclose([s.x for s in back], [s.x for s in samples])


class TestKernelCsv:
    def make_kernel(self):
        return KernelMatrix(
            values=np.array([[1.0, 0.25], [0.25, 1.0]]),
            row_ids=("m0", "m1"),
            col_ids=("m0", "m1"),
            metadata={"shots": None, "backend": "ideal", "seed": 0,
                      "symmetric": True, "estimator": "frequency"},
        )

    def test_round_trip_with_sidecar(self, tmp_path):
        kernel = self.make_kernel()
        csv_path = tmp_path / "k.csv"
        side_path = tmp_path / "k.json"
        write_kernel_csv(csv_path, kernel)
        write_kernel_sidecar(side_path, kernel)
        assert csv_path.read_text().splitlines()[0] == "m0,m1"
        back = read_kernel_csv(csv_path, side_path)
        assert np.array_equal(back.values, kernel.values)
        assert back.row_ids == kernel.row_ids
        assert back.metadata["backend"] == "ideal"

    def test_rerun_bitwise_identical(self, tmp_path):
        kernel = self.make_kernel()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_kernel_csv(a, kernel)
        write_kernel_csv(b, kernel)
        assert sha256_of_file(a) == sha256_of_file(b)


class TestPgm:
    def test_unit_diagonal_heatmap(self, tmp_path):
        values = np.eye(3)
        pixels = kernel_to_pixels(values)
        assert np.array_equal(np.diag(pixels), [255, 255, 255])
        assert pixels.sum() == 3 * 255
        path = tmp_path / "k.pgm"
        write_pgm(path, pixels)
        lines = path.read_text().splitlines()
        assert lines[0] == "P2"
        assert lines[1] == "3 3"
        assert lines[2] == "255"
        assert lines[3].split() == ["255", "0", "0"]

    def test_all_zero_is_black(self, tmp_path):
        pixels = kernel_to_pixels(np.zeros((4, 4)))
        assert pixels.max() == 0

    def test_shape_matches_matrix(self, tmp_path):
        pixels = kernel_to_pixels(np.full((40, 40), 0.5))
        path = tmp_path / "big.pgm"
        write_pgm(path, pixels)
        assert path.read_text().splitlines()[1] == "40 40"

    def test_region_mapping(self):
        grid = np.array([[1, -1], [0, 1]])
        pixels = region_to_pixels(grid)
        assert np.array_equal(pixels, [[255, 0], [128, 255]])

    def test_out_of_range_kernel_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            kernel_to_pixels(np.array([[1.5]]))

    def test_failed_write_leaves_no_file(self, tmp_path):
        target = tmp_path / "never.pgm"
        with pytest.raises(ValidationError):
            write_pgm(target, np.array([[300]]))
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []


class TestRegionCsv:
    def test_round_trip(self, tmp_path):
        grid = np.array([[1, 0, -1], [-1, 1, 0]])
        path = tmp_path / "region_x0_0.csv"
        write_region_csv(path, grid)
        assert np.array_equal(read_region_csv(path), grid)

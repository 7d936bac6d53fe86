"""File-based Sobol' generator against the scipy implementation."""

import numpy as np
import pytest
from scipy.stats import qmc

from latkern.experiments import bundled_direction_file
from latkern.sobol import DirectionFileError, DirectionNumbers, sobol_points


@pytest.fixture(scope="module")
def table():
    return DirectionNumbers.from_file(bundled_direction_file())


class TestGenerator:
    def test_first_point_one_dimension(self, table):
        assert sobol_points(1, 1, table)[0, 0] == 0.5

    @pytest.mark.parametrize("dim", [1, 2, 3, 5, 8])
    def test_matches_scipy_exactly(self, table, dim):
        mine = sobol_points(64, dim, table)
        ref = qmc.Sobol(d=dim, scramble=False).random(128)[1:65]
        assert np.array_equal(mine, ref)

    def test_unit_cube_range(self, table):
        pts = sobol_points(500, 12, table)
        assert np.all(pts >= 0.0) and np.all(pts < 1.0)

    def test_deterministic(self, table):
        assert np.array_equal(sobol_points(32, 6, table), sobol_points(32, 6, table))

    def test_bundled_table_covers_high_dimensions(self, table):
        assert table.max_dim >= 1100
        pts = sobol_points(4, 1000, table)
        assert pts.shape == (4, 1000)

    def test_dimension_beyond_table(self, table):
        with pytest.raises(DirectionFileError, match=str(table.max_dim)):
            sobol_points(8, table.max_dim + 1, table)


class TestDirectionFile:
    def test_small_custom_file(self, tmp_path):
        path = tmp_path / "dirs.txt"
        path.write_text("d s a m_i\n2 1 0 1\n3 2 1 1 3\n")
        table = DirectionNumbers.from_file(path)
        pts = sobol_points(3, 3, table)
        expected = np.array([
            [0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25],
            [0.25, 0.75, 0.75],
        ])
        assert np.array_equal(pts, expected)

    def test_non_integer_token(self, tmp_path):
        path = tmp_path / "dirs.txt"
        path.write_text("2 1 0 x\n")
        with pytest.raises(DirectionFileError, match="line 1"):
            DirectionNumbers.from_file(path)

    def test_degree_count_mismatch(self, tmp_path):
        path = tmp_path / "dirs.txt"
        path.write_text("2 2 0 1\n")
        with pytest.raises(DirectionFileError, match="degree"):
            DirectionNumbers.from_file(path)

    def test_short_row(self, tmp_path):
        path = tmp_path / "dirs.txt"
        path.write_text("2 1\n")
        with pytest.raises(DirectionFileError):
            DirectionNumbers.from_file(path)

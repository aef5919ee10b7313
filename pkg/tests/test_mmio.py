"""Matrix Market reading and writing."""

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from daepsa.errors import MatrixMarketError
from daepsa.mmio import read_matrix, write_matrix


def write(tmp_path, text, name="m.mtx"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestRead:
    def test_identity_array(self, tmp_path):
        p = write(tmp_path, "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n")
        assert np.array_equal(read_matrix(p), np.eye(2))

    def test_array_is_column_major(self, tmp_path):
        p = write(tmp_path, "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n")
        assert np.array_equal(read_matrix(p), [[1, 3], [2, 4]])

    def test_duplicates_summed(self, tmp_path):
        p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 2\n1 1 3\n")
        assert read_matrix(p)[0, 0] == 5.0

    def test_symmetric_expanded(self, tmp_path):
        p = write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 1\n2 1 7\n")
        assert np.array_equal(read_matrix(p), [[1, 7], [7, 0]])

    def test_skew_symmetric(self, tmp_path):
        p = write(tmp_path, "%%MatrixMarket matrix array real skew-symmetric\n2 2\n3\n")
        assert np.array_equal(read_matrix(p), [[0, -3], [3, 0]])

    def test_hermitian(self, tmp_path):
        p = write(tmp_path, "%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 2 0\n2 1 1 1\n")
        M = read_matrix(p)
        assert np.array_equal(M, [[2, 1 - 1j], [1 + 1j, 0]])

    def test_integer_field(self, tmp_path):
        p = write(tmp_path, "%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 4\n")
        assert read_matrix(p)[0, 0] == 4.0

    def test_sparse_output(self, tmp_path):
        p = write(tmp_path, "%%MatrixMarket matrix coordinate real general\n3 3 1\n2 3 1.5\n")
        M = read_matrix(p, sparse=True)
        assert sp.issparse(M) and M.shape == (3, 3) and M[1, 2] == 1.5


class TestErrors:
    @pytest.mark.parametrize("text,line", [
        ("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n", 1),
        ("%%MatrixMarket vector array real general\n2\n1\n1\n", 1),
        ("not a header\n", 1),
        ("%%MatrixMarket matrix array real general\n2 2\n1\nx\n1\n1\n", 4),
        ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n", 3),
        ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n", 3),
        ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1\n", 3),
        ("%%MatrixMarket matrix array real general\n2 x\n", 2),
    ])
    def test_line_numbers(self, tmp_path, text, line):
        with pytest.raises(MatrixMarketError) as exc:
            read_matrix(write(tmp_path, text))
        assert exc.value.line == line
        assert str(exc.value).startswith(f"line {line}")

    def test_missing_file(self, tmp_path):
        with pytest.raises(MatrixMarketError):
            read_matrix(tmp_path / "none.mtx")

    def test_non_finite(self, tmp_path):
        with pytest.raises(MatrixMarketError):
            read_matrix(write(tmp_path, "%%MatrixMarket matrix array real general\n1 1\nnan\n"))


class TestRoundTrip:
    @given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)),
                  elements=st.floats(-1e6, 1e6, allow_nan=False)),
           st.sampled_from(["array", "coordinate"]))
    @settings(max_examples=40, deadline=None)
    def test_real(self, tmp_path_factory, M, fmt):
        p = tmp_path_factory.mktemp("rt") / "m.mtx"
        write_matrix(p, M, fmt)
        assert np.abs(read_matrix(p) - M).max() <= 1e-15 * max(1, np.abs(M).max())

    def test_complex(self, tmp_path):
        rng = np.random.default_rng(0)
        M = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        write_matrix(tmp_path / "c.mtx", M)
        assert np.array_equal(read_matrix(tmp_path / "c.mtx"), M)

    def test_sparse(self, tmp_path):
        S = sp.random(6, 6, density=0.3, random_state=1, format="csr")
        write_matrix(tmp_path / "s.mtx", S, comment="two\nlines")
        assert np.array_equal(read_matrix(tmp_path / "s.mtx"), S.toarray())

    def test_deterministic_bytes(self, tmp_path):
        M = np.array([[0.1, 1 / 3], [2e-300, -7.0]])
        write_matrix(tmp_path / "a.mtx", M)
        write_matrix(tmp_path / "b.mtx", M)
        assert (tmp_path / "a.mtx").read_bytes() == (tmp_path / "b.mtx").read_bytes()

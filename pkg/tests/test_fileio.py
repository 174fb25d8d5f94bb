"""CSV round-trip tests for graphs and signal matrices."""

import numpy as np
import numpy.testing as npt
import pytest

from rgfi.fileio import (
    load_dense,
    load_edgelist,
    load_graph,
    load_signals,
    save_dense,
    save_edgelist,
    save_signals,
)
from rgfi.graphs import Gso, GsoFamily, generate_er


class TestEdgelist:
    def test_round_trip_exact(self, tmp_path):
        g = generate_er(14, 0.3, seed=0)
        path = tmp_path / "g.csv"
        save_edgelist(g, path)
        back = load_edgelist(path)
        npt.assert_array_equal(back.matrix, g.matrix)
        assert back.symmetric

    def test_round_trip_weighted_directed(self, tmp_path):
        rng = np.random.default_rng(1)
        a = rng.random((6, 6)) * (rng.random((6, 6)) < 0.5)
        np.fill_diagonal(a, 0.0)
        g = Gso(a, symmetric=False)
        path = tmp_path / "g.csv"
        save_edgelist(g, path)
        back = load_edgelist(path)
        npt.assert_array_equal(back.matrix, g.matrix)  # 17 digits round-trips float64
        assert not back.symmetric

    def test_isolated_trailing_node_needs_n(self, tmp_path):
        a = np.zeros((4, 4))
        a[0, 1] = a[1, 0] = 1.0  # nodes 2, 3 isolated
        path = tmp_path / "g.csv"
        save_edgelist(Gso(a), path)
        assert load_edgelist(path).n == 2  # inferred from max index
        assert load_edgelist(path, n=4).n == 4

    def test_rejects_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n0,1,1.0\n")
        with pytest.raises(ValueError, match="edge-list"):
            load_edgelist(path)

    def test_empty_without_n_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("src,dst,weight\n")
        with pytest.raises(ValueError, match="empty"):
            load_edgelist(path)


class TestDense:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(2)
        m = rng.standard_normal((5, 7))
        path = tmp_path / "m.csv"
        save_dense(m, path)
        npt.assert_array_equal(load_dense(path), m)

    def test_accepts_gso(self, tmp_path):
        g = generate_er(8, 0.4, seed=3)
        path = tmp_path / "g.csv"
        save_dense(g, path)
        npt.assert_array_equal(load_dense(path), g.matrix)

    def test_single_row_keeps_2d(self, tmp_path):
        path = tmp_path / "row.csv"
        save_dense(np.array([[1.0, 2.0, 3.0]]), path)
        assert load_dense(path).shape == (1, 3)


class TestGraphSniffing:
    def test_loads_either_format(self, tmp_path):
        g = generate_er(10, 0.3, seed=4)
        p1 = tmp_path / "edges.csv"
        p2 = tmp_path / "dense.csv"
        save_edgelist(g, p1)
        save_dense(g, p2)
        npt.assert_array_equal(load_graph(p1, n=10).matrix, g.matrix)
        npt.assert_array_equal(load_graph(p2).matrix, g.matrix)

    def test_family_passthrough(self, tmp_path):
        lap = np.array([[1.0, -1.0], [-1.0, 1.0]])
        path = tmp_path / "lap.csv"
        save_dense(lap, path)
        g = load_graph(path, family=GsoFamily.COMBINATORIAL_LAPLACIAN)
        assert g.family is GsoFamily.COMBINATORIAL_LAPLACIAN


class TestSignals:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((9, 4))
        path = tmp_path / "x.csv"
        save_signals(x, path)
        assert path.read_text().splitlines()[0] == "s0,s1,s2,s3"
        npt.assert_array_equal(load_signals(path), x)

    def test_headerless_accepted(self, tmp_path):
        path = tmp_path / "x.csv"
        np.savetxt(path, np.eye(3), delimiter=",")
        npt.assert_array_equal(load_signals(path), np.eye(3))

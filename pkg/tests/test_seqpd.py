import numpy as np
import pytest

from netlmi.blockmat import BlockMatrix, is_network_matrix
from netlmi.seqpd import (
    comm_count, enforce_equality, residual, sequential_pd_test,
)
from netlmi.system import derive_topology, random_network
from netlmi.topology import Topology


def random_spd(rng, dims, shift=1.0):
    n = sum(dims)
    M = rng.normal(size=(n, n))
    return BlockMatrix(M @ M.T + shift * np.eye(n), dims, dims)


def random_sym(rng, dims):
    n = sum(dims)
    M = rng.normal(size=(n, n))
    return BlockMatrix(0.5 * (M + M.T), dims, dims)


def random_network_sym(rng, N, block=2, p_edge=0.35, shift=None):
    """Symmetric block matrix with a random sparsity pattern + its topology."""
    dims = (block,) * N
    ins = [set() for _ in range(N)]
    for i in range(N):
        for j in range(i + 1, N):
            if rng.random() < p_edge:
                ins[i].add(j)
                ins[j].add(i)
    topo = Topology(N, tuple(frozenset(s) for s in ins))
    grid = [[None] * N for _ in range(N)]
    for i in range(N):
        grid[i][i] = rng.normal(size=(block, block))
        for j in ins[i]:
            if j > i:
                grid[i][j] = rng.normal(size=(block, block))
    m = BlockMatrix.from_blocks(grid, dims, dims)
    data = 0.5 * (m.data + m.data.T)
    if shift is not None:
        data = data + shift * np.eye(sum(dims))
    return BlockMatrix(data, dims, dims), topo


class TestSequentialPdTest:
    def test_identity(self):
        W = BlockMatrix.identity((2, 3, 1))
        res = sequential_pd_test(W)
        assert res.pd and res.failing_index is None
        for i in range(3):
            np.testing.assert_array_equal(res.tilde(i, i), np.eye(W.row_dims[i]))
            for j in range(i):
                np.testing.assert_array_equal(res.tilde(i, j),
                                              np.zeros((W.row_dims[i], W.row_dims[j])))

    def test_scalar_pd(self):
        W = BlockMatrix(np.array([[2.0, 1.0], [1.0, 2.0]]), (1, 1), (1, 1))
        res = sequential_pd_test(W)
        assert res.pd
        assert res.tilde(0, 0) == pytest.approx(2.0)
        assert res.tilde(1, 1) == pytest.approx(1.5)

    def test_scalar_indefinite(self):
        W = BlockMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]), (1, 1), (1, 1))
        res = sequential_pd_test(W)
        assert not res.pd
        assert res.failing_index == 1
        assert res.tilde(1, 1) == pytest.approx(-3.0)

    def test_asymmetric_rejected(self):
        W = BlockMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]), (1, 1), (1, 1))
        with pytest.raises(ValueError):
            sequential_pd_test(W)

    def test_oracle_equivalence_bulk(self):
        rng = np.random.default_rng(11)
        for _ in range(120):
            N = int(rng.integers(1, 8))
            dims = tuple(int(d) for d in rng.integers(1, 4, size=N))
            W = random_sym(rng, dims)
            shift = rng.uniform(-2.0, 4.0)
            W = BlockMatrix(W.data + shift * np.eye(sum(dims)), dims, dims)
            eigs = np.linalg.eigvalsh(W.data)
            if abs(eigs.min()) < 1e-6:
                continue
            res = sequential_pd_test(W)
            assert res.pd == (eigs.min() > 0), f"mismatch at eig {eigs.min()}"

    def test_cholesky_identity(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            N = int(rng.integers(2, 6))
            dims = tuple(int(d) for d in rng.integers(1, 4, size=N))
            W = random_spd(rng, dims)
            res = sequential_pd_test(W)
            L = np.linalg.cholesky(W.data)
            off = np.cumsum((0,) + dims)
            for i in range(N):
                Lii = L[off[i]:off[i + 1], off[i]:off[i + 1]]
                ref = Lii @ Lii.T
                got = res.tilde(i, i)
                assert np.max(np.abs(got - ref)) <= 1e-8 * max(1.0, np.max(np.abs(ref)))

    def test_compositionality_bitwise(self):
        rng = np.random.default_rng(13)
        dims = (2, 1, 3, 2, 1)
        W = random_spd(rng, dims)
        res_full = sequential_pd_test(W)
        W_lead = residual(W, 4)
        res_lead = sequential_pd_test(W_lead)
        for i in range(4):
            for j in range(i + 1):
                assert np.array_equal(res_full.tilde(i, j), res_lead.tilde(i, j))

    def test_compute_all(self):
        W = BlockMatrix(np.diag([1.0, -1.0, 2.0]), (1, 1, 1), (1, 1, 1))
        res = sequential_pd_test(W, compute_all=True)
        assert not res.pd and res.failing_index == 1
        assert len(res.rows) == 3


class TestSkipping:
    def test_zero_block_claim(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            W, topo = random_network_sym(rng, 8, shift=8.0)
            res = sequential_pd_test(W, topo=topo)
            for i in range(8):
                lo = topo.min_closed_coupled(i)
                for j in range(lo):
                    assert np.max(np.abs(res.tilde(i, j))) <= 1e-10

    def test_skipping_soundness(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            W, topo = random_network_sym(rng, 8, shift=8.0)
            a = sequential_pd_test(W, topo=topo, skip_redundant=False)
            b = sequential_pd_test(W, topo=topo, skip_redundant=True)
            assert a.pd == b.pd
            for i in range(8):
                for j in range(i + 1):
                    assert np.max(np.abs(a.tilde(i, j) - b.tilde(i, j))) <= 1e-10

    def test_message_reduction(self):
        rng = np.random.default_rng(16)
        reduced = 0
        trials = 40
        for _ in range(trials):
            W, topo = random_network_sym(rng, 8, p_edge=0.3, shift=8.0)
            off = sequential_pd_test(W, topo=topo, skip_redundant=False)
            on = sequential_pd_test(W, topo=topo, skip_redundant=True)
            assert len(on.log) <= len(off.log)
            if len(on.log) < len(off.log):
                reduced += 1
        assert reduced >= 0.9 * trials

    def test_skip_requires_network_matrix(self):
        rng = np.random.default_rng(17)
        dims = (1, 1, 1)
        topo = Topology(3, (frozenset({1}), frozenset({0}), frozenset()))
        W = random_spd(rng, dims)  # dense: (0,2) nonzero
        with pytest.raises(ValueError):
            sequential_pd_test(W, topo=topo, skip_redundant=True)

    def test_chain_messages_include_non_neighbors(self):
        # natural order on a chain still ships tilde blocks from non-neighbors
        rng = np.random.default_rng(18)
        N = 5
        ins = [set() for _ in range(N)]
        for i in range(N - 1):
            ins[i].add(i + 1)
            ins[i + 1].add(i)
        topo = Topology(N, tuple(frozenset(s) for s in ins))
        dims = (1,) * N
        grid = [[None] * N for _ in range(N)]
        for i in range(N):
            grid[i][i] = np.array([[4.0]])
            if i + 1 < N:
                grid[i][i + 1] = np.array([[1.0]])
        W = BlockMatrix.from_blocks(grid, dims, dims)
        W = BlockMatrix(0.5 * (W.data + W.data.T) + 2 * np.eye(N), dims, dims)
        res = sequential_pd_test(W, topo=topo, skip_redundant=True)
        senders = {(m.sender, m.receiver) for m in res.log}
        assert (0, 2) in senders  # subsystem 3 hears from non-neighbor 1


class TestResidual:
    def test_identity_reduction(self):
        W = BlockMatrix.identity((2, 1, 3))
        r = residual(W, 1)
        np.testing.assert_array_equal(r.data, np.eye(5))

    def test_pd_preserved(self):
        rng = np.random.default_rng(19)
        for _ in range(25):
            W = random_spd(rng, tuple(int(d) for d in rng.integers(1, 4, size=5)))
            for i in range(5):
                r = residual(W, i)
                assert np.min(np.linalg.eigvalsh(r.data)) > 0

    def test_iterated_removal(self):
        rng = np.random.default_rng(20)
        W = random_spd(rng, (2, 2, 2, 2))
        r = residual(residual(W, 3), 0)
        assert np.min(np.linalg.eigvalsh(r.data)) > 0

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            residual(BlockMatrix.identity((1, 1)), 2)


class TestEnforceEquality:
    def test_identity_factors(self):
        rng = np.random.default_rng(21)
        dims = (2, 1, 2)
        C = random_sym(rng, dims)
        I = BlockMatrix.identity(dims)
        X = enforce_equality(I, I, C)
        np.testing.assert_allclose(X.data, -C.data, atol=1e-12)

    def test_scalar(self):
        A = BlockMatrix(np.array([[2.0]]), (1,), (1,))
        B = BlockMatrix(np.array([[4.0]]), (1,), (1,))
        C = BlockMatrix(np.array([[8.0]]), (1,), (1,))
        X = enforce_equality(A, B, C)
        assert X.data[0, 0] == pytest.approx(-1.0)

    def test_gain_recovery_form(self):
        # K = L inv(M) arises from A := I, B := M, C := -L
        rng = np.random.default_rng(22)
        dims = (2, 2)
        M = BlockMatrix.block_diag([random_spd(rng, (2,)).data for _ in range(2)])
        L = BlockMatrix(rng.normal(size=(4, 4)), dims, dims)
        K = enforce_equality(BlockMatrix.identity(dims), M,
                             BlockMatrix(-L.data, dims, dims))
        np.testing.assert_allclose(K.data, L.data @ np.linalg.inv(M.data), atol=1e-10)

    def test_blockdiag_structure(self):
        rng = np.random.default_rng(23)
        dims = (2, 2)
        A = BlockMatrix.block_diag([random_spd(rng, (2,)).data for _ in range(2)])
        B = BlockMatrix.block_diag([random_spd(rng, (2,)).data for _ in range(2)])
        C = BlockMatrix.block_diag([rng.normal(size=(2, 2)) for _ in range(2)])
        X = enforce_equality(A, B, C, structure="blockdiag")
        assert X.is_block_diagonal()
        with pytest.raises(ValueError):
            full = BlockMatrix(rng.normal(size=(4, 4)), dims, dims)
            enforce_equality(A, B, full, structure="blockdiag")

    def test_singular_block_rejected(self):
        dims = (1, 1)
        A = BlockMatrix(np.diag([1.0, 0.0]), dims, dims)
        I = BlockMatrix.identity(dims)
        with pytest.raises(ValueError):
            enforce_equality(A, I, I)

    def test_non_blockdiag_a_rejected(self):
        dims = (1, 1)
        full = BlockMatrix(np.ones((2, 2)), dims, dims)
        I = BlockMatrix.identity(dims)
        with pytest.raises(ValueError):
            enforce_equality(full, I, I)


class TestCommCount:
    def test_single_subsystem_empty(self):
        W = BlockMatrix.identity((3,))
        res = sequential_pd_test(W)
        assert len(res.log) == 0
        assert comm_count(res) == {}

    def test_counts_aggregate(self):
        rng = np.random.default_rng(24)
        W = random_spd(rng, (1, 1, 1))
        res = sequential_pd_test(W)
        counts = comm_count(res)
        # receiver 1 hears from 0; receiver 2 hears from 0 and 1
        assert counts[(0, 1)] >= 1
        assert counts[(0, 2)] >= 1
        assert counts[(1, 2)] >= 1

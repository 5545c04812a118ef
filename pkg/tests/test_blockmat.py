import numpy as np
import pytest

from netlmi.blockmat import (
    BewLayout, BlockMatrix, axpy, bew, bew_layout_from_grid, flatten_grid,
    is_network_matrix, mul_blockdiag, mul_blockdiag_right,
)
from netlmi.topology import Topology


def random_sym(rng, dims):
    n = sum(dims)
    M = rng.normal(size=(n, n))
    return BlockMatrix(M + M.T, dims, dims)


def chain_topology(N):
    ins = [set() for _ in range(N)]
    for i in range(N - 1):
        ins[i].add(i + 1)
        ins[i + 1].add(i)
    return Topology(N, tuple(frozenset(s) for s in ins))


class TestBlockMatrix:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            BlockMatrix(np.zeros((3, 3)), (2, 2), (2, 2))

    def test_block_views(self):
        m = BlockMatrix(np.arange(12.0).reshape(3, 4), (1, 2), (3, 1))
        assert m.block(0, 0).shape == (1, 3)
        assert m.block(1, 1).shape == (2, 1)
        np.testing.assert_array_equal(m.block(1, 0), [[4, 5, 6], [8, 9, 10]])

    def test_from_blocks_roundtrip(self):
        rng = np.random.default_rng(0)
        dims = (2, 1, 3)
        full = random_sym(rng, dims)
        grid = [[full.block(i, j) for j in range(3)] for i in range(3)]
        again = BlockMatrix.from_blocks(grid, dims, dims)
        assert again == full

    def test_immutable(self):
        m = BlockMatrix.identity((2, 2))
        with pytest.raises(ValueError):
            m.data[0, 0] = 5.0

    def test_permute_involution(self):
        rng = np.random.default_rng(1)
        m = random_sym(rng, (1, 2, 2))
        perm = (2, 0, 1)
        inv = (1, 2, 0)
        assert m.permute(perm).permute(inv) == m

    def test_permute_spectrum(self):
        rng = np.random.default_rng(2)
        m = random_sym(rng, (2, 3, 1))
        p = m.permute((1, 2, 0))
        np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(p.data)),
                                   np.sort(np.linalg.eigvalsh(m.data)), atol=1e-10)

    def test_delete_block(self):
        m = BlockMatrix.identity((1, 2, 3))
        r = m.delete_block(1)
        assert r.row_dims == (1, 3)
        np.testing.assert_array_equal(r.data, np.eye(4))

    def test_delete_commutes(self):
        rng = np.random.default_rng(3)
        m = random_sym(rng, (1, 2, 1, 2))
        # removing block 1 then (what was) block 3 == removing 3 then 1
        a = m.delete_block(1).delete_block(2)
        b = m.delete_block(3).delete_block(1)
        assert a == b


class TestClosureOps:
    def test_axpy_and_transpose_preserve_pattern(self):
        topo = chain_topology(3)
        dims = (2, 2, 2)
        rng = np.random.default_rng(4)
        grid = [[rng.normal(size=(2, 2)) if abs(i - j) <= 1 else None
                 for j in range(3)] for i in range(3)]
        theta = BlockMatrix.from_blocks(grid, dims, dims)
        assert is_network_matrix(theta, topo)
        assert is_network_matrix(theta.T, topo)
        assert is_network_matrix(axpy(2.0, theta, -1.0, theta.T), topo)

    def test_blockdiag_product_preserves_pattern(self):
        topo = chain_topology(3)
        dims = (2, 2, 2)
        rng = np.random.default_rng(5)
        grid = [[rng.normal(size=(2, 2)) if abs(i - j) <= 1 else None
                 for j in range(3)] for i in range(3)]
        theta = BlockMatrix.from_blocks(grid, dims, dims)
        phi = BlockMatrix.block_diag([rng.normal(size=(2, 2)) for _ in range(3)])
        assert is_network_matrix(mul_blockdiag(phi, theta), topo)
        assert is_network_matrix(mul_blockdiag_right(theta, phi), topo)
        # exact sparsity: products vanish exactly where theta does
        prod = mul_blockdiag(phi, theta)
        assert prod.block_is_zero(0, 2) and prod.block_is_zero(2, 0)

    def test_general_product_fills_in(self):
        # chain 1-2-3: the product of two tridiagonal network matrices
        # acquires a (1,3) block, so it is not a network matrix
        topo = chain_topology(3)
        dims = (1, 1, 1)
        tri = BlockMatrix(np.array([[1.0, 1, 0], [1, 1, 1], [0, 1, 1]]), dims, dims)
        prod = BlockMatrix(tri.data @ tri.data, dims, dims)
        assert is_network_matrix(tri, topo)
        assert not is_network_matrix(prod, topo)

    def test_mul_requires_blockdiag(self):
        dims = (1, 1)
        full = BlockMatrix(np.ones((2, 2)), dims, dims)
        with pytest.raises(ValueError):
            mul_blockdiag(full, full)


class TestIsNetworkMatrix:
    def test_block_diagonal_always_passes(self):
        topo = Topology(3, (frozenset(), frozenset(), frozenset()))
        m = BlockMatrix.block_diag([np.eye(2), np.eye(1), np.eye(3)])
        assert is_network_matrix(m, topo)

    def test_chain_violation(self):
        topo = chain_topology(3)
        dims = (1, 1, 1)
        m = BlockMatrix(np.array([[1.0, 0, 2], [0, 1, 0], [2, 0, 1]]), dims, dims)
        assert not is_network_matrix(m, topo)

    def test_block_count_mismatch(self):
        topo = chain_topology(3)
        with pytest.raises(ValueError):
            is_network_matrix(BlockMatrix.identity((1, 1)), topo)


class TestBew:
    def test_single_constituent_is_identity(self):
        rng = np.random.default_rng(6)
        m = random_sym(rng, (2, 3))
        out = bew([[m]])
        np.testing.assert_array_equal(out.data, m.data)

    def test_single_subsystem_is_identity(self):
        rng = np.random.default_rng(7)
        a = random_sym(rng, (3,))
        b = BlockMatrix(rng.normal(size=(3, 2)), (3,), (2,))
        d = random_sym(rng, (2,))
        grid = [[a, b], [b.T, d]]
        out = bew(grid)
        np.testing.assert_array_equal(out.data, flatten_grid(grid).data)

    def test_spectrum_preserved(self):
        rng = np.random.default_rng(8)
        dims = (2, 1, 2)
        for _ in range(10):
            a = random_sym(rng, dims)
            b = BlockMatrix(rng.normal(size=(5, 5)), dims, dims)
            d = random_sym(rng, dims)
            grid = [[a, b], [b.T, d]]
            flat = flatten_grid(grid)
            regrouped = bew(grid)
            np.testing.assert_allclose(
                np.sort(np.linalg.eigvalsh(regrouped.data)),
                np.sort(np.linalg.eigvalsh(flat.data)), atol=1e-9)

    def test_grouping_layout(self):
        # two constituents with different inner dims: states (2,1), inputs (1,2)
        rng = np.random.default_rng(9)
        sdims, idims = (2, 1), (1, 2)
        a = random_sym(rng, sdims)
        b = BlockMatrix(rng.normal(size=(3, 3)), sdims, idims)
        d = random_sym(rng, idims)
        grid = [[a, b], [b.T, d]]
        out = bew(grid)
        assert out.row_dims == (3, 3)
        # subsystem 1 block collects a11, b11, d11
        blk = out.block(0, 0)
        np.testing.assert_array_equal(blk[:2, :2], a.block(0, 0))
        np.testing.assert_array_equal(blk[:2, 2:], b.block(0, 0))
        np.testing.assert_array_equal(blk[2:, 2:], d.block(0, 0))

    def test_network_structure_preserved(self):
        topo = chain_topology(3)
        rng = np.random.default_rng(10)
        dims = (2, 2, 2)
        grid_pattern = [[rng.normal(size=(2, 2)) if abs(i - j) <= 1 else None
                         for j in range(3)] for i in range(3)]
        theta = BlockMatrix.from_blocks(grid_pattern, dims, dims)
        diag = BlockMatrix.block_diag([np.eye(2)] * 3)
        w = bew([[diag, theta], [theta.T, diag]])
        assert is_network_matrix(w, topo)

    def test_inconsistent_dims_rejected(self):
        a = BlockMatrix.identity((2, 2))
        b = BlockMatrix.identity((2, 1))
        with pytest.raises(ValueError):
            bew([[a, a], [a, b]])

    def test_layout_permutation_is_involution(self):
        layout = BewLayout(((2, 1), (1, 2)), ((2, 1), (1, 2)))
        idx = layout.row_permutation()
        # applying the grouping twice restores the flat order
        twice = idx[idx]
        np.testing.assert_array_equal(twice, np.arange(len(idx)))

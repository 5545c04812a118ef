"""Dense matrices with an explicit two-level block structure.

A :class:`BlockMatrix` is a plain dense array plus block row/column
dimension vectors, so that entry ``(i, j)`` of the block grid can be
addressed directly.  All network-level objects (system parameters, LMI
left-hand sides, certificates) are carried in this form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_TOL = 1e-12


def _offsets(dims):
    out = np.zeros(len(dims) + 1, dtype=int)
    np.cumsum(dims, out=out[1:])
    return out


class BlockMatrix:
    """A dense matrix partitioned into blocks of given row/column sizes.

    The underlying array is stored read-only; all operations return new
    instances, so values are safe to share.
    """

    __slots__ = ("row_dims", "col_dims", "data", "_roff", "_coff")

    def __init__(self, data, row_dims, col_dims):
        data = np.asarray(data, dtype=float)
        row_dims = tuple(int(d) for d in row_dims)
        col_dims = tuple(int(d) for d in col_dims)
        if any(d < 0 for d in row_dims) or any(d < 0 for d in col_dims):
            raise ValueError("block dimensions must be nonnegative")
        if data.shape != (sum(row_dims), sum(col_dims)):
            raise ValueError(
                f"data shape {data.shape} does not match block dims "
                f"({sum(row_dims)}, {sum(col_dims)})"
            )
        data = data.copy()
        data.flags.writeable = False
        self.data = data
        self.row_dims = row_dims
        self.col_dims = col_dims
        self._roff = _offsets(row_dims)
        self._coff = _offsets(col_dims)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zeros(cls, row_dims, col_dims):
        return cls(np.zeros((sum(row_dims), sum(col_dims))), row_dims, col_dims)

    @classmethod
    def from_blocks(cls, grid, row_dims, col_dims):
        """Assemble from an n x m grid of array blocks (None means zero)."""
        data = np.zeros((sum(row_dims), sum(col_dims)))
        roff = _offsets(row_dims)
        coff = _offsets(col_dims)
        for i, row in enumerate(grid):
            for j, blk in enumerate(row):
                if blk is None:
                    continue
                blk = np.atleast_2d(np.asarray(blk, dtype=float))
                if blk.shape != (row_dims[i], col_dims[j]):
                    raise ValueError(
                        f"block ({i},{j}) has shape {blk.shape}, expected "
                        f"({row_dims[i]}, {col_dims[j]})"
                    )
                data[roff[i]:roff[i + 1], coff[j]:coff[j + 1]] = blk
        return cls(data, row_dims, col_dims)

    @classmethod
    def block_diag(cls, blocks):
        blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
        rdims = [b.shape[0] for b in blocks]
        cdims = [b.shape[1] for b in blocks]
        grid = [[blocks[i] if i == j else None for j in range(len(blocks))]
                for i in range(len(blocks))]
        return cls.from_blocks(grid, rdims, cdims)

    @classmethod
    def identity(cls, dims):
        return cls(np.eye(sum(dims)), dims, dims)

    # -- basic queries --------------------------------------------------------

    @property
    def n_block_rows(self):
        return len(self.row_dims)

    @property
    def n_block_cols(self):
        return len(self.col_dims)

    @property
    def shape(self):
        return self.data.shape

    def block(self, i, j):
        """Read-only view of block (i, j), zero-based."""
        return self.data[self._roff[i]:self._roff[i + 1],
                         self._coff[j]:self._coff[j + 1]]

    def block_is_zero(self, i, j, tol=ZERO_TOL):
        b = self.block(i, j)
        return b.size == 0 or np.max(np.abs(b)) <= tol

    def is_square_blocks(self):
        return self.row_dims == self.col_dims

    def is_block_diagonal(self, tol=ZERO_TOL):
        if self.n_block_rows != self.n_block_cols:
            return False
        n = self.n_block_rows
        return all(self.block_is_zero(i, j, tol)
                   for i in range(n) for j in range(n) if i != j)

    def norm_inf(self):
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def __eq__(self, other):
        if not isinstance(other, BlockMatrix):
            return NotImplemented
        return (self.row_dims == other.row_dims
                and self.col_dims == other.col_dims
                and np.array_equal(self.data, other.data))

    def __hash__(self):  # immutable value type
        return hash((self.row_dims, self.col_dims, self.data.tobytes()))

    def __repr__(self):
        return (f"BlockMatrix(rows={self.row_dims}, cols={self.col_dims}, "
                f"|.|={self.norm_inf():.3g})")

    # -- structure-preserving operations --------------------------------------

    def transpose(self):
        return BlockMatrix(self.data.T, self.col_dims, self.row_dims)

    @property
    def T(self):
        return self.transpose()

    def permute(self, perm):
        """Apply a simultaneous block row/column permutation.

        ``perm[i]`` is the new (zero-based) index of original block ``i``;
        the result equals ``P @ self @ P.T`` for the induced permutation
        matrix ``P``.
        """
        perm = list(perm)
        n = self.n_block_rows
        if sorted(perm) != list(range(n)) or not self.is_square_blocks():
            raise ValueError("perm must be a permutation of square block indices")
        inv = [0] * n
        for old, new in enumerate(perm):
            inv[new] = old
        idx = np.concatenate([
            np.arange(self._roff[inv[k]], self._roff[inv[k] + 1]) for k in range(n)
        ]) if n else np.zeros(0, dtype=int)
        dims = tuple(self.row_dims[inv[k]] for k in range(n))
        return BlockMatrix(self.data[np.ix_(idx, idx)], dims, dims)

    def delete_block(self, i):
        """Remove block row and column ``i`` (square block structure)."""
        if not self.is_square_blocks():
            raise ValueError("delete_block requires square block structure")
        n = self.n_block_rows
        if not 0 <= i < n:
            raise IndexError(f"block index {i} out of range for {n} blocks")
        keep = np.concatenate([
            np.arange(self._roff[k], self._roff[k + 1]) for k in range(n) if k != i
        ]) if n > 1 else np.zeros(0, dtype=int)
        dims = tuple(d for k, d in enumerate(self.row_dims) if k != i)
        return BlockMatrix(self.data[np.ix_(keep, keep)], dims, dims)


# -- closure operations (results stay network matrices when inputs are) -------

def axpy(alpha, theta: BlockMatrix, beta, phi: BlockMatrix) -> BlockMatrix:
    """alpha*theta + beta*phi, blockwise conformable."""
    if theta.row_dims != phi.row_dims or theta.col_dims != phi.col_dims:
        raise ValueError("axpy operands have mismatched block structure")
    return BlockMatrix(alpha * theta.data + beta * phi.data,
                       theta.row_dims, theta.col_dims)


def mul_blockdiag(phi: BlockMatrix, theta: BlockMatrix) -> BlockMatrix:
    """phi @ theta with phi block diagonal (preserves theta's block pattern)."""
    if not phi.is_block_diagonal():
        raise ValueError("left factor must be block diagonal")
    if phi.col_dims != theta.row_dims:
        raise ValueError("non-conformable block structures")
    return BlockMatrix(phi.data @ theta.data, phi.row_dims, theta.col_dims)


def mul_blockdiag_right(theta: BlockMatrix, phi: BlockMatrix) -> BlockMatrix:
    """theta @ phi with phi block diagonal."""
    if not phi.is_block_diagonal():
        raise ValueError("right factor must be block diagonal")
    if theta.col_dims != phi.row_dims:
        raise ValueError("non-conformable block structures")
    return BlockMatrix(theta.data @ phi.data, theta.row_dims, phi.col_dims)


def is_network_matrix(theta: BlockMatrix, topo, zero_tol=ZERO_TOL) -> bool:
    """Numeric sparsity test: blocks (i, j) and (j, i) vanish for non-coupled
    pairs of the topology.  Only the zero-pattern condition is checkable;
    whether a block carries information local to its pair is a modeling
    obligation on the caller.
    """
    if theta.n_block_rows != theta.n_block_cols:
        raise ValueError("network matrices have a square block grid")
    if theta.n_block_rows != topo.N:
        raise ValueError(
            f"block count {theta.n_block_rows} does not match topology N={topo.N}")
    for i in range(topo.N):
        coupled = topo.coupled(i)
        for j in range(topo.N):
            if j == i or j in coupled:
                continue
            if not theta.block_is_zero(i, j, zero_tol):
                return False
            if not theta.block_is_zero(j, i, zero_tol):
                return False
    return True


# -- block element-wise (BEW) restructuring -----------------------------------

@dataclass(frozen=True)
class BewLayout:
    """Index bookkeeping for regrouping an m x m grid of n x n block matrices
    by subsystem pair.

    ``row_dims[k][i]`` is the height of subsystem i's block in constituent
    row k; column dims likewise.  The regrouping is a congruence by a
    permutation matrix, hence spectrum-preserving; when the dimension grid
    is symmetric (``row_dims[k][i] == row_dims[i][k]``) that permutation is
    an involution.
    """

    row_dims: tuple  # m-tuple of n-tuples
    col_dims: tuple

    @property
    def outer(self):
        return len(self.row_dims)

    @property
    def inner(self):
        return len(self.row_dims[0]) if self.row_dims else 0

    def __post_init__(self):
        ns = {len(d) for d in self.row_dims} | {len(d) for d in self.col_dims}
        if len(ns) > 1:
            raise ValueError("all constituents must share the subsystem count")

    def row_permutation(self):
        """Forward index map: position p of the flat stacking -> position in
        the regrouped ordering.  Returned as an index array ``idx`` with
        ``regrouped = flat[idx]``."""
        return _bew_indices(self.row_dims)

    def col_permutation(self):
        return _bew_indices(self.col_dims)

    def grouped_row_dims(self):
        n = self.inner
        return tuple(sum(self.row_dims[k][i] for k in range(self.outer))
                     for i in range(n))

    def grouped_col_dims(self):
        n = self.inner
        return tuple(sum(self.col_dims[k][i] for k in range(self.outer))
                     for i in range(n))


def _bew_indices(dims_per_constituent):
    m = len(dims_per_constituent)
    n = len(dims_per_constituent[0]) if m else 0
    offs = []
    pos = 0
    for k in range(m):
        row = []
        for i in range(n):
            row.append(pos)
            pos += dims_per_constituent[k][i]
        offs.append(row)
    idx = []
    for i in range(n):
        for k in range(m):
            start = offs[k][i]
            idx.extend(range(start, start + dims_per_constituent[k][i]))
    return np.array(idx, dtype=int)


def bew_layout_from_grid(grid) -> BewLayout:
    """Derive the layout from an m x m grid of BlockMatrix constituents."""
    m = len(grid)
    row_dims = tuple(grid[k][0].row_dims for k in range(m))
    col_dims = tuple(grid[0][l].col_dims for l in range(m))
    for k in range(m):
        for l in range(m):
            g = grid[k][l]
            if g.row_dims != row_dims[k] or g.col_dims != col_dims[l]:
                raise ValueError(f"constituent ({k},{l}) has inconsistent block dims")
    return BewLayout(row_dims, col_dims)


def flatten_grid(grid) -> BlockMatrix:
    """Stack an m x m grid of BlockMatrix constituents without regrouping."""
    layout = bew_layout_from_grid(grid)
    rows = [np.hstack([g.data for g in row]) for row in grid]
    data = np.vstack(rows)
    rdims = tuple(sum(d) for d in layout.row_dims)
    cdims = tuple(sum(d) for d in layout.col_dims)
    return BlockMatrix(data, rdims, cdims)


def bew(grid, layout: BewLayout | None = None) -> BlockMatrix:
    """Regroup a grid of block matrices by subsystem pair.

    The (i, j) block of the result collects the (i, j) blocks of every
    constituent, so the result is a network matrix whenever all
    constituents are.  Equivalent to a symmetric permutation of the flat
    stacking, hence spectrum-preserving.
    """
    if layout is None:
        layout = bew_layout_from_grid(grid)
    flat = flatten_grid(grid)
    ridx = layout.row_permutation()
    cidx = layout.col_permutation()
    data = flat.data[np.ix_(ridx, cidx)]
    return BlockMatrix(data, layout.grouped_row_dims(), layout.grouped_col_dims())

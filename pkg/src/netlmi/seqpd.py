"""Sequential, per-subsystem positive-definiteness testing and equality
enforcement.

The core recursion factors a symmetric block matrix W row by row:

    Wt[i][j] = W[i][j] - sum_k Wt[i][k] inv(Wt[k][k]) Wt[j][k]^T,  k < j,

and W > 0 holds iff every diagonal factor Wt[i][i] is positive definite.
Each row only needs the rows computed before it, so the test runs as a
sweep over subsystems with explicit inter-subsystem messages.  On network
matrices, correction terms with k below a topology-dependent skip index
vanish and the matching transmissions are dropped.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .blockmat import BlockMatrix, is_network_matrix
from .topology import Topology

PD_TOL = 1e-9
SYM_TOL = 1e-9
COND_MAX = 1e12
EQ_TOL = 1e-9


@dataclass(frozen=True)
class Message:
    """One inter-subsystem transmission of the sequential protocol."""

    sender: int
    receiver: int
    payload: str  # "tilde:j:k" or "raw:i:j" (1-based labels)
    cost: float   # number of scalar entries transmitted

    def line(self):
        return f"{self.sender + 1} -> {self.receiver + 1}  {self.payload}  {self.cost:g}"


class MessageLog:
    """Ordered record of transmissions, grouped by receiving subsystem."""

    def __init__(self, entries=None):
        self.entries = list(entries) if entries else []

    def append(self, msg: Message):
        self.entries.append(msg)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def to_text(self):
        return "\n".join(m.line() for m in self.entries)

    def pair_counts(self) -> Counter:
        return Counter((m.sender, m.receiver) for m in self.entries)


@dataclass
class TildeRow:
    """Row i of the sequential factorization: blocks j = 0..i."""

    owner: int
    blocks: dict  # j -> ndarray, includes the diagonal block at j == owner

    def diagonal(self):
        return self.blocks[self.owner]


@dataclass
class PdResult:
    pd: bool
    failing_index: int | None
    rows: list  # TildeRow per subsystem (may stop early unless compute_all)
    log: MessageLog
    min_eigs: list = field(default_factory=list)

    def tilde(self, i, j):
        return self.rows[i].blocks[j]


def _skip_start(topo, i, j):
    """First correction index for pair (i, j); 0 when no topology is used."""
    if topo is None:
        return 0
    return topo.skip_index(i, j)


def extend_tilde_rows(rows, inverses, w_row, i, topo=None, skip_redundant=False):
    """Compute tilde row i from prior rows and the raw blocks of row i.

    ``rows[k]`` maps j -> tilde block for finished subsystems k < i;
    ``w_row[j]`` holds W[i][j] for j <= i.  Shared by the numeric test and
    the synthesis sweep so both produce identical factorizations.
    """
    row = {}
    for j in range(i + 1):
        start = _skip_start(topo, i, j) if skip_redundant else 0
        acc = np.array(w_row[j], dtype=float, copy=True)
        for k in range(start, j):
            wik = row[k]
            wjk = rows[j][k] if j < i else row[k]
            if wik.size and wjk.size:
                acc -= wik @ inverses[k] @ wjk.T
        row[j] = acc
    return row


def protocol_messages(log: MessageLog, i, topo, row_dims, skip_redundant,
                      raw_dims=None):
    """Append the transmissions subsystem i receives, following the protocol
    accounting: from each earlier subsystem j, the tilde blocks from the
    skip index up to j (the diagonal block is always sent), plus the raw
    block of pair (i, j) when j is an out-neighbor of i (always, when no
    topology is available)."""
    for j in range(i):
        start = _skip_start(topo, i, j) if skip_redundant else 0
        for k in range(start, j):
            size = row_dims[j] * row_dims[k]
            log.append(Message(j, i, f"tilde:{j + 1}:{k + 1}", float(size)))
        log.append(Message(j, i, f"tilde:{j + 1}:{j + 1}",
                           float(row_dims[j] * row_dims[j])))
        needs_raw = True if topo is None else (j in topo.out_neighbors(i))
        if needs_raw:
            rd = raw_dims if raw_dims is not None else row_dims
            log.append(Message(j, i, f"raw:{i + 1}:{j + 1}",
                               float(rd[i] * rd[j])))


def sequential_pd_test(W: BlockMatrix, topo: Topology | None = None,
                       skip_redundant=False, compute_all=False,
                       pd_tol=PD_TOL) -> PdResult:
    """Decentralized positive-definiteness test of a symmetric block matrix.

    Iterates subsystems in block order, forming each tilde row from the
    rows before it and declaring positive definiteness iff every diagonal
    factor has minimum eigenvalue above ``pd_tol``.  With ``skip_redundant``
    and a topology, redundant correction terms and their transmissions are
    omitted (valid for network matrices).  ``compute_all`` keeps factoring
    past the first failure while the diagonal factors stay invertible.
    """
    if not W.is_square_blocks():
        raise ValueError("W must have square block structure")
    scale = W.norm_inf()
    if np.max(np.abs(W.data - W.data.T)) > SYM_TOL * max(scale, 1.0):
        raise ValueError("W is not symmetric")
    if skip_redundant:
        if topo is None:
            raise ValueError("skip_redundant requires a topology")
        if not is_network_matrix(W, topo):
            raise ValueError("skip_redundant requires W to be a network matrix")

    N = W.n_block_rows
    dims = W.row_dims
    rows = []
    inverses = []
    log = MessageLog()
    min_eigs = []
    pd = True
    failing = None

    for i in range(N):
        protocol_messages(log, i, topo, dims, skip_redundant)
        w_row = {j: np.asarray(W.block(i, j)) for j in range(i + 1)}
        row = extend_tilde_rows(rows, inverses, w_row, i, topo, skip_redundant)
        rows.append(row)
        diag = row[i]
        eig_min = float(np.min(np.linalg.eigvalsh(diag))) if diag.size else np.inf
        min_eigs.append(eig_min)
        if eig_min <= pd_tol and pd:
            pd = False
            failing = i
        if not pd and not compute_all:
            break
        # the recursion needs this inverse to continue
        cond = np.linalg.cond(diag) if diag.size else 1.0
        if not np.isfinite(cond) or cond > COND_MAX:
            if pd:
                pd = False
                failing = i
            break
        inverses.append(np.linalg.inv(diag) if diag.size else diag)

    tilde = [TildeRow(owner=i, blocks=row) for i, row in enumerate(rows)]
    return PdResult(pd=pd, failing_index=failing, rows=tilde, log=log,
                    min_eigs=min_eigs)


def residual(W: BlockMatrix, i: int) -> BlockMatrix:
    """W with block row/column i removed; positive definiteness survives."""
    return W.delete_block(i)


def comm_count(result: PdResult) -> Counter:
    """Block-transmission counts aggregated by (sender, receiver)."""
    return result.log.pair_counts()


def enforce_equality(A: BlockMatrix, B: BlockMatrix, C: BlockMatrix,
                     structure="general", cond_max=COND_MAX,
                     eq_tol=EQ_TOL) -> BlockMatrix:
    """Solve A X B + C = 0 blockwise for block-diagonal A and B.

    Visits subsystems in index order, at each step filling the new row,
    column and diagonal blocks: X[i][j] = -inv(A[i][i]) C[i][j] inv(B[j][j]).
    With ``structure='blockdiag'``, C (and hence X) must be block diagonal.
    """
    if not A.is_block_diagonal():
        raise ValueError("A must be block diagonal")
    if not B.is_block_diagonal():
        raise ValueError("B must be block diagonal")
    if A.col_dims != C.row_dims or B.row_dims != C.col_dims:
        raise ValueError("C has block structure inconsistent with A and B")
    if structure not in ("general", "blockdiag"):
        raise ValueError(f"unknown structure {structure!r}")
    if structure == "blockdiag" and not C.is_block_diagonal():
        raise ValueError("structure 'blockdiag' requires C block diagonal")

    N = A.n_block_rows
    if C.n_block_rows != N or C.n_block_cols != N:
        raise ValueError("C must be square in block count")
    a_inv, b_inv = [], []
    for i in range(N):
        for mat, invs, name in ((A, a_inv, "A"), (B, b_inv, "B")):
            blk = np.asarray(mat.block(i, i))
            if blk.size and np.linalg.cond(blk) > cond_max:
                raise ValueError(f"diagonal block {name}[{i + 1}][{i + 1}] is singular")
            invs.append(np.linalg.inv(blk) if blk.size else blk)

    grid = [[None] * N for _ in range(N)]
    for i in range(N):
        for j in list(range(i)) + [i]:
            # row entry (i, j) and, for j < i, the mirrored column entry
            grid[i][j] = -a_inv[i] @ np.asarray(C.block(i, j)) @ b_inv[j]
            if j < i:
                grid[j][i] = -a_inv[j] @ np.asarray(C.block(j, i)) @ b_inv[i]

    X = BlockMatrix.from_blocks(grid, A.col_dims, B.row_dims)
    res = A.data @ X.data @ B.data + C.data
    scale = max(C.norm_inf(),
                A.norm_inf() * X.norm_inf() * max(B.norm_inf(), 1e-300))
    if np.max(np.abs(res)) > eq_tol * max(scale, 1e-300):
        raise ArithmeticError("equality residual exceeds tolerance")
    return X

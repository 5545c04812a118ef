"""Quadratic supply-rate specifications.

A spec is the triple (Q, S, R) defining the supply [out; in]^T [[Q, S],
[S^T, R]] [out; in]; presets cover the standard passivity, gain and sector
variants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..blockmat import BlockMatrix


@dataclass(frozen=True)
class QsrSpec:
    Q: BlockMatrix  # out x out
    S: BlockMatrix  # out x in
    R: BlockMatrix  # in x in

    def __post_init__(self):
        if self.Q.row_dims != self.Q.col_dims:
            raise ValueError("Q must be square")
        if self.R.row_dims != self.R.col_dims:
            raise ValueError("R must be square")
        if (self.S.row_dims != self.Q.row_dims
                or self.S.col_dims != self.R.row_dims):
            raise ValueError("S dimensions must bridge Q and R")
        if np.max(np.abs(self.R.data - self.R.data.T)) > 1e-12:
            raise ValueError("R must be symmetric")
        if np.max(np.abs(self.Q.data - self.Q.data.T)) > 1e-12:
            raise ValueError("Q must be symmetric")

    @property
    def out_dims(self):
        return self.Q.row_dims

    @property
    def in_dims(self):
        return self.R.row_dims

    def q_negdef(self, margin=0.0):
        return (np.min(np.linalg.eigvalsh(-self.Q.data)) > margin
                if self.Q.data.size else True)

    def neg_q_inverse(self):
        """-Q^{-1}, the constant corner block of the dissipativity LMIs."""
        if not self.q_negdef():
            raise ValueError("supply spec requires -Q > 0 for this operation")
        return -np.linalg.inv(self.Q.data)

    def supply_matrix(self):
        top = np.hstack([self.Q.data, self.S.data])
        bot = np.hstack([self.S.data.T, self.R.data])
        return np.vstack([top, bot])

    def validate_decentral(self, block_diag_s=False):
        problems = []
        if not self.Q.is_block_diagonal():
            problems.append("Q must be block diagonal")
        if not self.q_negdef():
            problems.append("-Q must be positive definite")
        if block_diag_s and not self.S.is_block_diagonal():
            problems.append("S must be block diagonal")
        return problems


def _scaled_eye_blocks(dims, scale):
    return BlockMatrix.block_diag([scale * np.eye(d) for d in dims])


def _rect_eye_blocks(rdims, cdims, scale):
    return BlockMatrix.block_diag([scale * np.eye(r, c)
                                   for r, c in zip(rdims, cdims)])


def qsr_preset(kind, out_dims, in_dims, **params) -> QsrSpec:
    """Build the (Q, S, R) triple for a named dissipativity property.

    Supported kinds: passive, strict_input (nu), strict_output (rho),
    strict (rho, nu), l2 (gain), conic (c, r), sector (a, b).
    Dimension vectors are per subsystem, so presets are block diagonal.
    """
    out_dims = tuple(int(d) for d in out_dims)
    in_dims = tuple(int(d) for d in in_dims)

    def need(*names):
        missing = [nm for nm in names if nm not in params]
        if missing:
            raise ValueError(f"preset '{kind}' needs parameters {missing}")
        return [float(params[nm]) for nm in names]

    if kind == "passive":
        q, s, r = 0.0, 0.5, 0.0
    elif kind == "strict_input":
        (nu,) = need("nu")
        if nu <= 0:
            raise ValueError("nu must be positive")
        q, s, r = 0.0, 0.5, -nu
    elif kind == "strict_output":
        (rho,) = need("rho")
        if rho <= 0:
            raise ValueError("rho must be positive")
        q, s, r = -rho, 0.5, 0.0
    elif kind == "strict":
        rho, nu = need("rho", "nu")
        if rho <= 0 or nu <= 0:
            raise ValueError("rho and nu must be positive")
        q, s, r = -rho, 0.5, -nu
    elif kind == "l2":
        (gain,) = need("gain")
        if gain <= 0:
            raise ValueError("gain must be positive")
        q, s, r = -1.0 / gain, 0.0, -gain
    elif kind == "conic":
        c, radius = need("c", "r")
        if radius <= 0:
            raise ValueError("r must be positive")
        q, s, r = -1.0, c, radius ** 2 - c ** 2
    elif kind == "sector":
        a, b = need("a", "b")
        q, s, r = -1.0, a + b, -a * b
    else:
        raise ValueError(f"unknown preset kind {kind!r}")

    return QsrSpec(
        Q=_scaled_eye_blocks(out_dims, q),
        S=_rect_eye_blocks(out_dims, in_dims, s),
        R=_scaled_eye_blocks(in_dims, r),
    )

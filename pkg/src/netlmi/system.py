"""Networked LTI systems: coupled subsystems with block parameter matrices.

A system carries nine block matrices

    A (n x n)  B (n x p)  E (n x q)     state equation
    C (m x n)  D (m x p)  F (m x q)     output equation
    G (l x n)  H (l x p)  J (l x q)     performance equation

partitioned by per-subsystem dimension vectors.  Continuous-time systems
read xdot = Ax + Bu + Ew; discrete-time systems read x(t+1) = Ax + Bu + Ew.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .blockmat import BlockMatrix, ZERO_TOL
from .topology import IndexingScheme, Topology

PARAM_NAMES = ("A", "B", "C", "D", "E", "F", "G", "H", "J")

# Matrices whose nonzero blocks define the interconnection graph.  The
# performance matrices G, H, J must conform to the derived topology but do
# not create neighbors.
COUPLING_NAMES = ("A", "B", "C", "D", "E", "F")


@dataclass(frozen=True)
class NetworkedSystem:
    domain: str  # "ct" or "dt"
    state_dims: tuple
    input_dims: tuple
    noise_dims: tuple
    output_dims: tuple
    perf_dims: tuple
    A: BlockMatrix
    B: BlockMatrix
    C: BlockMatrix
    D: BlockMatrix
    E: BlockMatrix
    F: BlockMatrix
    G: BlockMatrix
    H: BlockMatrix
    J: BlockMatrix

    def __post_init__(self):
        if self.domain not in ("ct", "dt"):
            raise ValueError(f"domain must be 'ct' or 'dt', got {self.domain!r}")
        dims = {
            "state_dims": self.state_dims, "input_dims": self.input_dims,
            "noise_dims": self.noise_dims, "output_dims": self.output_dims,
            "perf_dims": self.perf_dims,
        }
        for name, d in dims.items():
            object.__setattr__(self, name, tuple(int(x) for x in d))
        N = len(self.state_dims)
        if any(len(d) != N for d in dims.values()):
            raise ValueError("all dimension vectors must have the same length")
        n, p, q = self.state_dims, self.input_dims, self.noise_dims
        m, l = self.output_dims, self.perf_dims
        expected = {
            "A": (n, n), "B": (n, p), "E": (n, q),
            "C": (m, n), "D": (m, p), "F": (m, q),
            "G": (l, n), "H": (l, p), "J": (l, q),
        }
        for name, (rd, cd) in expected.items():
            mat = getattr(self, name)
            if mat.row_dims != rd or mat.col_dims != cd:
                raise ValueError(
                    f"matrix {name} has block dims ({mat.row_dims}, {mat.col_dims}), "
                    f"expected ({rd}, {cd})")

    @property
    def N(self):
        return len(self.state_dims)

    @cached_property
    def topology(self) -> Topology:
        return derive_topology(self)

    def param(self, name) -> BlockMatrix:
        if name not in PARAM_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def dense(self):
        """Dense global matrices as a dict of ndarrays."""
        return {name: self.param(name).data for name in PARAM_NAMES}

    def validate_network_structure(self, zero_tol=ZERO_TOL):
        """Every parameter matrix must vanish on non-coupled pairs."""
        from .blockmat import is_network_matrix
        topo = derive_topology(self, zero_tol)
        bad = [name for name in PARAM_NAMES
               if not is_network_matrix(self.param(name), topo, zero_tol)]
        if bad:
            raise ValueError(f"parameter matrices violate the derived topology: {bad}")
        return topo

    def __eq__(self, other):
        if not isinstance(other, NetworkedSystem):
            return NotImplemented
        return (self.domain == other.domain
                and self.state_dims == other.state_dims
                and self.input_dims == other.input_dims
                and self.noise_dims == other.noise_dims
                and self.output_dims == other.output_dims
                and self.perf_dims == other.perf_dims
                and all(self.param(k) == other.param(k) for k in PARAM_NAMES))


def system_from_blocks(domain, dims, blocks) -> NetworkedSystem:
    """Build a system from sparse per-pair blocks.

    ``dims`` maps 'n','p','q','m','l' to per-subsystem dimension lists;
    ``blocks`` maps (name, i, j) to an array (unlisted blocks are zero).
    """
    n, p, q = dims["n"], dims["p"], dims["q"]
    m, l = dims["m"], dims["l"]
    N = len(n)
    shape = {
        "A": (n, n), "B": (n, p), "E": (n, q),
        "C": (m, n), "D": (m, p), "F": (m, q),
        "G": (l, n), "H": (l, p), "J": (l, q),
    }
    grids = {name: [[None] * N for _ in range(N)] for name in PARAM_NAMES}
    for (name, i, j), val in blocks.items():
        grids[name][i][j] = np.asarray(val, dtype=float)
    mats = {name: BlockMatrix.from_blocks(grids[name], *shape[name])
            for name in PARAM_NAMES}
    return NetworkedSystem(
        domain=domain, state_dims=tuple(n), input_dims=tuple(p),
        noise_dims=tuple(q), output_dims=tuple(m), perf_dims=tuple(l), **mats)


def derive_topology(system: NetworkedSystem, zero_tol=ZERO_TOL) -> Topology:
    """In-neighbor sets from the nonzero pattern of the coupling matrices.

    j is an in-neighbor of i iff any of the A, B, C, D, E, F blocks at
    (i, j) has an entry above ``zero_tol``.
    """
    N = system.N
    ins = []
    for i in range(N):
        s = set()
        for j in range(N):
            if j == i:
                continue
            if any(not system.param(nm).block_is_zero(i, j, zero_tol)
                   for nm in COUPLING_NAMES):
                s.add(j)
        ins.append(frozenset(s))
    return Topology(N, tuple(ins))


def reindex(system: NetworkedSystem, scheme: IndexingScheme) -> NetworkedSystem:
    """Relabel subsystems: simultaneous block row/column permutation of every
    parameter matrix.  The spectrum of A (and every other square parameter)
    is preserved."""
    if scheme.N != system.N:
        raise ValueError(f"scheme is for {scheme.N} subsystems, system has {system.N}")
    perm = scheme.perm
    inv = scheme.inverse().perm

    def permute_dims(dims):
        return tuple(dims[inv[k]] for k in range(system.N))

    def permute_mat(mat: BlockMatrix, rdims_old, cdims_old):
        rdims = permute_dims(rdims_old)
        cdims = permute_dims(cdims_old)
        grid = [[np.asarray(mat.block(inv[i], inv[j]))
                 for j in range(system.N)] for i in range(system.N)]
        return BlockMatrix.from_blocks(grid, rdims, cdims)

    n, p, q = system.state_dims, system.input_dims, system.noise_dims
    m, l = system.output_dims, system.perf_dims
    return NetworkedSystem(
        domain=system.domain,
        state_dims=permute_dims(n), input_dims=permute_dims(p),
        noise_dims=permute_dims(q), output_dims=permute_dims(m),
        perf_dims=permute_dims(l),
        A=permute_mat(system.A, n, n), B=permute_mat(system.B, n, p),
        C=permute_mat(system.C, m, n), D=permute_mat(system.D, m, p),
        E=permute_mat(system.E, n, q), F=permute_mat(system.F, m, q),
        G=permute_mat(system.G, l, n), H=permute_mat(system.H, l, p),
        J=permute_mat(system.J, l, q),
    )


def _random_self_dynamics(rng, n, domain):
    """Random self-coupling block with eigenvalues spread across the
    stability boundary so that unstable open loops occur."""
    if n == 0:
        return np.zeros((0, 0))
    blocks = []
    left = n
    while left > 0:
        if left >= 2 and rng.random() < 0.5:
            if domain == "ct":
                a = rng.uniform(-3.0, 3.0)
                b = rng.uniform(0.2, 3.0)
            else:
                r = rng.uniform(0.2, 1.25)
                th = rng.uniform(0.1, np.pi - 0.1)
                a, b = r * np.cos(th), r * np.sin(th)
            blocks.append(np.array([[a, b], [-b, a]]))
            left -= 2
        else:
            lam = rng.uniform(-3.0, 3.0) if domain == "ct" else rng.uniform(-1.25, 1.25)
            blocks.append(np.array([[lam]]))
            left -= 1
    core = np.zeros((n, n))
    pos = 0
    for b in blocks:
        k = b.shape[0]
        core[pos:pos + k, pos:pos + k] = b
        pos += k
    # conjugate by a random rotation to mix the modes
    qmat, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return qmat @ core @ qmat.T


def random_network(N, state_dims=2, input_dims=1, noise_dims=1, output_dims=1,
                   perf_dims=1, radius=0.6, seed=0, p_bidir=0.5,
                   domain="ct", coupling_scale=0.25, noise_scale=0.02
                   ) -> NetworkedSystem:
    """A random geometric networked system.

    N points are placed uniformly in the unit square; pairs within
    ``radius`` are interconnected, each such pair becoming bidirectional
    with probability ``p_bidir`` and otherwise a single random direction.
    Coupling enters through the A and E matrices; B, C, D, F, G, H, J are
    block diagonal (D is zero).  Deterministic given the seed.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not 0 < radius <= np.sqrt(2) + 1e-12:
        raise ValueError("radius must lie in (0, sqrt(2)]")

    def expand(d):
        return tuple([int(d)] * N) if np.isscalar(d) else tuple(int(x) for x in d)

    n, p, q = expand(state_dims), expand(input_dims), expand(noise_dims)
    m, l = expand(output_dims), expand(perf_dims)

    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(N, 2))
    ins = [set() for _ in range(N)]
    for i in range(N):
        for j in range(i + 1, N):
            if np.linalg.norm(pts[i] - pts[j]) > radius:
                continue
            if rng.random() < p_bidir:
                ins[i].add(j)
                ins[j].add(i)
            elif rng.random() < 0.5:
                ins[i].add(j)  # j feeds i
            else:
                ins[j].add(i)

    blocks = {}
    for i in range(N):
        blocks[("A", i, i)] = _random_self_dynamics(rng, n[i], domain)
        blocks[("B", i, i)] = rng.normal(0.0, 1.0, size=(n[i], p[i]))
        blocks[("E", i, i)] = rng.normal(0.0, noise_scale, size=(n[i], q[i]))
        blocks[("C", i, i)] = rng.normal(0.0, 1.0, size=(m[i], n[i]))
        blocks[("F", i, i)] = rng.normal(0.0, noise_scale, size=(m[i], q[i]))
        blocks[("G", i, i)] = np.ones((l[i], n[i]))
        blocks[("H", i, i)] = np.ones((l[i], p[i]))
        blocks[("J", i, i)] = np.ones((l[i], q[i]))
    for i in range(N):
        for j in sorted(ins[i]):
            blocks[("A", i, j)] = rng.normal(0.0, coupling_scale, size=(n[i], n[j]))
            blocks[("E", i, j)] = rng.normal(0.0, noise_scale, size=(n[i], q[j]))

    dims = {"n": n, "p": p, "q": q, "m": m, "l": l}
    return system_from_blocks(domain, dims, blocks)

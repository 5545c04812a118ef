"""Interconnection graphs of networked systems and subsystem index orderings.

Subsystems are indexed 0..N-1 throughout the code base; user-facing text
(CLI, reports) uses 1-based labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Topology:
    """Directed interconnection structure.

    ``in_neighbors[i]`` holds the subsystems whose signals enter subsystem
    i's dynamics; out-neighbors and the combined/closed sets are derived.
    Self-loops are implicit (never stored).
    """

    N: int
    in_neighbors: tuple  # tuple of frozensets

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("need at least one subsystem")
        if len(self.in_neighbors) != self.N:
            raise ValueError("in_neighbors length must equal N")
        sets = tuple(frozenset(int(j) for j in s) for s in self.in_neighbors)
        object.__setattr__(self, "in_neighbors", sets)
        for i, s in enumerate(sets):
            if i in s:
                raise ValueError(f"self-loop stored for subsystem {i}")
            for j in s:
                if not 0 <= j < self.N:
                    raise ValueError(f"neighbor index {j} out of range")

    @classmethod
    def from_edges(cls, N, edges):
        """Build from directed edges (j, i) meaning j feeds into i."""
        ins = [set() for _ in range(N)]
        for j, i in edges:
            if i != j:
                ins[i].add(j)
        return cls(N, tuple(frozenset(s) for s in ins))

    def out_neighbors(self, i):
        return frozenset(j for j in range(self.N) if i in self.in_neighbors[j])

    def coupled(self, i):
        """C_i: union of in- and out-neighbors."""
        return self.in_neighbors[i] | self.out_neighbors(i)

    def closed_in(self, i):
        return self.in_neighbors[i] | {i}

    def closed_coupled(self, i):
        return self.coupled(i) | {i}

    def min_closed_coupled(self, i):
        return min(self.closed_coupled(i))

    def skip_index(self, i, j):
        """First correction index that can contribute for pair (i, j): terms
        below it vanish for any network matrix, so their transmission is
        redundant."""
        return max(self.min_closed_coupled(i), self.min_closed_coupled(j))

    def permute(self, scheme: "IndexingScheme") -> "Topology":
        """Topology after relabeling subsystems by the scheme."""
        perm = scheme.perm
        ins = [frozenset() for _ in range(self.N)]
        for old in range(self.N):
            ins[perm[old]] = frozenset(perm[j] for j in self.in_neighbors[old])
        return Topology(self.N, tuple(ins))

    def __str__(self):
        parts = []
        for i in range(self.N):
            ins = ",".join(str(j + 1) for j in sorted(self.in_neighbors[i]))
            parts.append(f"{i + 1}<-{{{ins}}}")
        return " ".join(parts)


@dataclass(frozen=True)
class IndexingScheme:
    """A bijection old index -> new index fixing the protocol execution order."""

    perm: tuple

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        object.__setattr__(self, "perm", perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"not a permutation: {perm}")

    @classmethod
    def identity(cls, N):
        return cls(tuple(range(N)))

    @property
    def N(self):
        return len(self.perm)

    def inverse(self):
        inv = [0] * self.N
        for old, new in enumerate(self.perm):
            inv[new] = old
        return IndexingScheme(tuple(inv))

    def order(self):
        """Original subsystem labels in execution order (new index 0,1,...)."""
        return tuple(self.inverse().perm)

    def compose(self, other: "IndexingScheme") -> "IndexingScheme":
        """Apply ``self`` after ``other``."""
        return IndexingScheme(tuple(self.perm[other.perm[i]] for i in range(self.N)))

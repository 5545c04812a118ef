"""Task descriptions and synthesized-design containers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..blockmat import BlockMatrix
from ..seqpd import MessageLog
from ..topology import IndexingScheme
from .forms import PROPERTIES, TASKS, get_form


@dataclass(frozen=True)
class TaskSpec:
    task: str
    prop: str
    mode: str = "centralized"  # centralized | decentralized
    indexing: IndexingScheme | None = None

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.prop not in PROPERTIES:
            raise ValueError(f"unknown property {self.prop!r}")
        if self.mode not in ("centralized", "decentralized"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def form(self, domain):
        form = get_form(self.task, self.prop, domain)
        if self.mode == "decentralized" and not form.decentral:
            raise ValueError(
                f"({self.task}, {self.prop}, {domain}) has no decentralized "
                "routine; only stability and dissipativity sweeps are defined")
        return form


@dataclass
class SubsystemReport:
    index: int
    status: str
    objective: float | None = None
    min_eigs: dict = field(default_factory=dict)


class InfeasibleError(RuntimeError):
    """Raised when a synthesis or analysis program has no solution."""

    def __init__(self, message, subsystem=None, constraint=None):
        super().__init__(message)
        self.subsystem = subsystem
        self.constraint = constraint


@dataclass
class Design:
    kind: str            # analysis | fsf | observer | dof
    domain: str
    prop: str
    mode: str
    gains: dict = field(default_factory=dict)         # name -> BlockMatrix
    certificates: dict = field(default_factory=dict)  # name -> BlockMatrix
    gamma: float | None = None
    objective: float | None = None
    indexing: IndexingScheme | None = None
    log: MessageLog | None = None
    per_subsystem: list = field(default_factory=list)
    protocol_rows: list | None = None  # tilde rows per grid, run coordinates

    def gain(self, name) -> BlockMatrix:
        return self.gains[name]

    def certificate(self, name) -> BlockMatrix:
        return self.certificates[name]


def closed_loop(system, design: Design):
    """Closed-loop (A, B, C, D) realization checked by analysis and driven
    by the simulator.

    fsf:      x' = (A+BK)x + Ew,        y = (C+DK)x + Fw
    observer: e' = (A-LC)e + (E-LF)w,   z = Ge + Jw   (error system)
    dof:      [x; zeta] with the output-feedback loop closed, w -> z
    """
    d = system.dense()
    A, B, C, D = d["A"], d["B"], d["C"], d["D"]
    E, F, G, H, J = d["E"], d["F"], d["G"], d["H"], d["J"]
    if design.kind == "analysis":
        return A, B, C, D
    if design.kind == "fsf":
        K = design.gains["K"].data
        return A + B @ K, E, C + D @ K, F
    if design.kind == "observer":
        L = design.gains["L"].data
        return A - L @ C, E - L @ F, G, J
    if design.kind == "dof":
        Ac = design.gains["Ac"].data
        Bc = design.gains["Bc"].data
        Cc = design.gains["Cc"].data
        Dc = design.gains["Dc"].data
        Abar = np.block([[A + B @ Dc @ C, B @ Cc], [Bc @ C, Ac]])
        Bbar = np.vstack([E + B @ Dc @ F, Bc @ F])
        Cbar = np.hstack([G + H @ Dc @ C, H @ Cc])
        Dbar = J + H @ Dc @ F
        return Abar, Bbar, Cbar, Dbar
    raise ValueError(f"unknown design kind {design.kind!r}")

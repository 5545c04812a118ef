"""Decentralized analysis and synthesis: a strictly sequential sweep over
subsystems.

At each step the subsystem solves a local LMI built from its own variable
blocks, the values fixed by earlier subsystems, and the tilde rows those
subsystems transmitted; the lifted Schur-form constraint makes the current
diagonal factor's positive definiteness affine.  Earlier results are never
re-optimized, which is what makes the process compositional.
"""

from __future__ import annotations

import cvxpy as cp
import numpy as np

from ..blockmat import _bew_indices
from ..lmi import LmiProblem, local_schur_constraint, prior_factors, solve
from ..seqpd import MessageLog, extend_tilde_rows, protocol_messages
from ..system import reindex
from ..topology import IndexingScheme
from .central import MARGIN_CAP, PD_BOUND, PD_FLOOR, recover_design, selection_term
from .forms import FormContext, assemble, variable_decls
from .types import Design, InfeasibleError, SubsystemReport, TaskSpec


def _grouped_dims(sub, dim_keys):
    """Per-subsystem total dimension of one grid row after regrouping."""
    n = len(next(iter(sub.values())))
    return tuple(sum(sub[k][i] for k in dim_keys) for i in range(n))


class _Sweep:
    def __init__(self, system, spec: TaskSpec, qsr, tol):
        self.spec = spec
        self.form = spec.form(system.domain)
        self.qsr = qsr
        self.tol = tol

        violations = self.form.preliminary_violations(system, qsr)
        violations += self.form.diagonality_violations(system, qsr)
        if violations:
            raise ValueError(
                f"decentralized ({self.form.task}, {self.form.prop}, "
                f"{system.domain}) preconditions violated: "
                + "; ".join(violations))

        self.indexing = spec.indexing or IndexingScheme.identity(system.N)
        self.original = system
        self.system = (reindex(system, self.indexing)
                       if self.indexing.perm != tuple(range(system.N))
                       else system)
        self.topo = self.system.topology
        self.N = system.N
        self.ctx = FormContext(self.system, qsr if self.form.needs_qsr else None)
        self.sub = self.ctx.sub

        # regrouping bookkeeping per grid
        self.grid_dims = []   # per grid: per-subsystem grouped dims
        self.grid_perm = []   # per grid: index permutation into grouped order
        for gspec in self.form.grids:
            dims_rows = tuple(self.sub[k] for k in gspec.dim_keys)
            self.grid_dims.append(_grouped_dims(self.sub, gspec.dim_keys))
            self.grid_perm.append(_bew_indices(dims_rows))

        self.fixed = {}            # (name, i, j) -> ndarray
        self.rows = [[] for _ in self.form.grids]      # tilde rows per grid
        self.inverses = [[] for _ in self.form.grids]  # diagonal inverses
        self.log = MessageLog()
        self.reports = []

    # -- variable handling -------------------------------------------------

    def _pattern_blocks(self, i):
        """Step-i blocks of a patterned variable: row, column and diagonal."""
        out = [(i, i)]
        for j in range(i):
            if j in self.topo.closed_in(i):
                out.append((i, j))
            if i in self.topo.closed_in(j):
                out.append((j, i))
        return out

    def _declare(self, prob, i):
        local = {}
        sub = self.sub
        for name, kind, rkey, ckey in variable_decls(self.form):
            rdims, cdims = sub[rkey], sub[ckey]
            if kind in ("pd", "aux_pd"):
                var = prob.add_variable(f"{name}_{i + 1}", (rdims[i], rdims[i]),
                                        symmetric=True)
                prob.add_psd(f"{name}_{i + 1}>0", var, eps=PD_FLOOR)
                prob.add_psd(f"{name}_{i + 1}<bound",
                             PD_BOUND * np.eye(rdims[i]) - var, eps=0.0)
                local[(name, i, i)] = var
            else:
                for (r, c) in self._pattern_blocks(i):
                    if rdims[r] == 0 or cdims[c] == 0:
                        continue
                    var = prob.add_variable(f"{name}_{r + 1}_{c + 1}",
                                            (rdims[r], cdims[c]))
                    local[(name, r, c)] = var
        return local

    def _globals(self, i, local):
        """Assemble global matrices mixing fixed values, step-i variables and
        zeros for subsystems that have not executed yet."""
        sub = self.sub
        v = {}
        for name, kind, rkey, ckey in variable_decls(self.form):
            rdims, cdims = sub[rkey], sub[ckey]
            grid = [[np.zeros((rdims[r], cdims[c])) for c in range(self.N)]
                    for r in range(self.N)]
            any_expr = False
            for (nm, r, c), val in self.fixed.items():
                if nm == name:
                    grid[r][c] = val
            for (nm, r, c), var in local.items():
                if nm == name:
                    grid[r][c] = var
                    any_expr = True
            v[name] = cp.bmat(grid) if any_expr else np.block(grid)
        return v

    # -- sweep ---------------------------------------------------------------

    def _grid_blocks(self, g, v, i):
        """W_ii and the row [W_i0 .. W_i,i-1] of grid g's regrouped form."""
        gspec = self.form.grids[g]
        flat = assemble(gspec.build(self.ctx, v))
        idx = self.grid_perm[g]
        if isinstance(flat, np.ndarray):
            W = flat[np.ix_(idx, idx)]
        else:
            Pm = np.eye(flat.shape[0])[idx, :]
            W = Pm @ flat @ Pm.T
        dims = self.grid_dims[g]
        offs = np.concatenate(([0], np.cumsum(dims)))
        sl = [slice(offs[k], offs[k + 1]) for k in range(self.N)]
        w_ii = W[sl[i], sl[i]]
        w_row = [W[sl[i], sl[j]] for j in range(i)]
        return w_ii, w_row

    def _local_problem(self, i, fixed_margin=None):
        prob = LmiProblem(name=f"subsystem-{i + 1}")
        local = self._declare(prob, i)
        v = self._globals(i, local)
        if fixed_margin is None:
            t = prob.add_variable("margin", ())
            prob.add_scalar(t <= MARGIN_CAP)
            prob.add_scalar(t >= -1e6)
            shift = t
        else:
            shift = fixed_margin
        required = 0.0
        for g, gspec in enumerate(self.form.grids):
            w_ii, w_row = self._grid_blocks(g, v, i)
            required = max(required, prob.strict_eps(w_ii))
            dim = self.grid_dims[g][i]
            shifted = w_ii - shift * np.eye(dim)
            acal, dcal = prior_factors(self.rows[g], self.grid_dims[g])
            if i == 0 or not w_row:
                lifted = shifted
            else:
                w_i = (cp.hstack(w_row) if any(not isinstance(b, np.ndarray)
                                               for b in w_row)
                       else np.hstack(w_row))
                lifted = local_schur_constraint(shifted, w_i, acal, dcal)
            prob.add_psd(f"{gspec.name}[{i + 1}]", lifted, eps=0.0)
        if fixed_margin is None:
            prob.set_objective(-t)
        else:
            gains = [var for (nm, r, c), var in local.items()
                     if nm not in ("M", "P", "X", "Y")]
            pds = [var for (nm, r, c), var in local.items()
                   if nm in ("M", "P", "X", "Y")]
            prob.set_objective(selection_term(self.form, gains, pds))
        return prob, local, required

    def run(self) -> Design:
        for i in range(self.N):
            protocol_messages(self.log, i, self.topo,
                              self.grid_dims[self.form.message_grid],
                              skip_redundant=True)
            # verdict: maximize the local margin
            prob, local, required = self._local_problem(i)
            rep = solve(prob, tol=self.tol)
            if rep.status != "feasible":
                raise InfeasibleError(
                    f"local problem at subsystem {i + 1} returned "
                    f"{rep.status}", subsystem=i, constraint=rep.note)
            margin = float(rep.assignment["margin"])
            if margin < required:
                raise InfeasibleError(
                    f"local problem at subsystem {i + 1} is infeasible: "
                    f"margin {margin:.3e} below {required:.3e}",
                    subsystem=i, constraint="margin")
            # selection: smallest parameters at half the achievable margin
            prob2, local2, _ = self._local_problem(i, fixed_margin=0.5 * margin)
            rep2 = solve(prob2, tol=self.tol)
            if rep2.status == "feasible":
                rep, local = rep2, local2
            for (name, r, c), var in local.items():
                self.fixed[(name, r, c)] = np.atleast_2d(
                    np.asarray(rep.assignment[var.name()]))
            min_eigs = self._extend_rows(i)
            self.reports.append(SubsystemReport(
                index=i, status="feasible", objective=margin,
                min_eigs=min_eigs))
        return self._finish()

    def _extend_rows(self, i):
        v_num = self._globals(i, {})
        min_eigs = {}
        for g, gspec in enumerate(self.form.grids):
            w_ii, w_row = self._grid_blocks(g, v_num, i)
            w_all = {j: w_row[j] for j in range(i)}
            w_all[i] = w_ii
            row = extend_tilde_rows(self.rows[g], self.inverses[g], w_all, i,
                                    topo=self.topo, skip_redundant=True)
            diag = row[i]
            eig = float(np.min(np.linalg.eigvalsh(0.5 * (diag + diag.T))))
            min_eigs[gspec.name] = eig
            if eig <= 0:
                raise InfeasibleError(
                    f"numeric breakdown: diagonal factor of grid "
                    f"{gspec.name} lost definiteness at subsystem {i + 1}",
                    subsystem=i, constraint=gspec.name)
            self.rows[g].append(row)
            self.inverses[g].append(np.linalg.inv(diag))
        return min_eigs

    def _finish(self) -> Design:
        # translate solved blocks back to the original subsystem labels
        block_values = {}
        inv = self.indexing.inverse().perm
        for (name, r, c), val in self.fixed.items():
            block_values[(name, inv[r], inv[c])] = val
        design = recover_design(self.original, self.form, self.spec,
                                block_values, {}, gamma=None, objective=None)
        design.mode = "decentralized"
        design.indexing = self.indexing
        design.log = self.log
        design.per_subsystem = self.reports
        design.protocol_rows = self.rows
        return design


def synthesize_decentralized(system, spec: TaskSpec, qsr=None,
                             indexing: IndexingScheme | None = None,
                             tol=1e-7) -> Design:
    """Run the sequential sweep in the given subsystem order and realize the
    design (analysis tasks return a certificates-only design).  Raises
    :class:`InfeasibleError` carrying the failing subsystem index."""
    if indexing is not None and spec.indexing is None:
        spec = TaskSpec(spec.task, spec.prop, mode="decentralized",
                        indexing=indexing)
    elif spec.mode != "decentralized":
        spec = TaskSpec(spec.task, spec.prop, mode="decentralized",
                        indexing=spec.indexing)
    sweep = _Sweep(system, spec, qsr, tol)
    return sweep.run()

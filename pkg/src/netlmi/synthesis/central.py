"""Centralized analysis and synthesis: one global LMI program per task.

Synthesis variables keep the distributed structure (block-diagonal
Lyapunov-type variables, in-neighbor-patterned gain variables), so the
designs realize local controller/observer forms; analysis certificates
are unstructured, preserving the necessary-and-sufficient character of
the underlying conditions.
"""

from __future__ import annotations

import numpy as np

from ..blockmat import BlockMatrix
from ..lmi import LmiProblem, cov_recover, dof_from_aux, solve
from ..seqpd import enforce_equality
from .forms import FormContext, assemble, variable_decls
from .types import Design, InfeasibleError, SubsystemReport, TaskSpec

import cvxpy as cp

PD_BOUND = 1000.0  # scale normalization for feasibility-type programs
PD_FLOOR = 1e-3    # keeps inverted certificates well conditioned


def _gain_pattern(topo):
    """(i, j) support of every local design parameter: closed in-neighbors."""
    return [(i, j) for i in range(topo.N) for j in sorted(topo.closed_in(i))]


def _declare_variables(prob: LmiProblem, system, form, spec: TaskSpec):
    """Declare structured variables; returns (global exprs, per-block vars)."""
    topo = system.topology
    N = system.N
    sub = {"n": system.state_dims, "p": system.input_dims,
           "q": system.noise_dims, "m": system.output_dims,
           "l": system.perf_dims}
    v = {}
    blocks = {}
    bound_scale = not form.needs_gamma and form.task != "analyze"
    for name, kind, rkey, ckey in variable_decls(form):
        rdims, cdims = sub[rkey], sub[ckey]
        if kind == "pd" and form.task == "analyze":
            var = prob.add_variable(name, (sum(rdims), sum(rdims)), symmetric=True)
            prob.add_psd(f"{name}>0", var)
            if not form.needs_gamma:
                prob.add_scalar(cp.trace(var) <= PD_BOUND * sum(rdims))
            v[name] = var
        elif kind == "aux_pd":
            var = prob.add_variable(name, (sum(rdims), sum(rdims)), symmetric=True)
            prob.add_psd(f"{name}>0", var)
            v[name] = var
        elif kind == "pd":
            grid = [[np.zeros((rdims[i], rdims[j])) for j in range(N)]
                    for i in range(N)]
            for i in range(N):
                var = prob.add_variable(f"{name}_{i + 1}", (rdims[i], rdims[i]),
                                        symmetric=True)
                prob.add_psd(f"{name}_{i + 1}>0", var, eps=PD_FLOOR)
                if bound_scale:
                    prob.add_psd(f"{name}_{i + 1}<bound",
                                 PD_BOUND * np.eye(rdims[i]) - var, eps=0.0)
                grid[i][i] = var
                blocks[(name, i, i)] = var
            v[name] = cp.bmat(grid)
        elif kind == "pattern":
            grid = [[np.zeros((rdims[i], cdims[j])) for j in range(N)]
                    for i in range(N)]
            for i, j in _gain_pattern(topo):
                if rdims[i] == 0 or cdims[j] == 0:
                    continue
                var = prob.add_variable(f"{name}_{i + 1}_{j + 1}",
                                        (rdims[i], cdims[j]))
                grid[i][j] = var
                blocks[(name, i, j)] = var
            v[name] = cp.bmat(grid)
        else:
            raise ValueError(kind)
    return v, blocks


MARGIN_CAP = 1.0


def selection_term(form, gain_vars, pd_vars):
    """Deterministic tie-breaking among feasible points: small certificate
    trace for analysis, small gain parameters for synthesis."""
    if form.task == "analyze":
        return cp.sum([cp.trace(var) for var in pd_vars]) if pd_vars else 0.0
    if gain_vars:
        return cp.sum([cp.norm(var, "fro") for var in gain_vars])
    return 0.0


def _add_objective(prob: LmiProblem, form, v, blocks, fixed_margin):
    """Returns the feasibility-margin variable, or None for gamma tasks and
    for selection-phase solves (which carry a fixed margin)."""
    if form.needs_gamma:
        g = prob.add_variable("gamma", ())
        prob.add_scalar(g >= 1e-9)
        v["g"] = g
        if form.trace_mode is not None:
            prob.add_trace_lt(v["Qa"], g)
        prob.set_objective(g)
        return None
    if fixed_margin is not None:
        gain_vars = [var for (name, i, j), var in blocks.items()
                     if name not in ("M", "P", "X", "Y")]
        pd_vars = [var for (name, i, j), var in blocks.items()
                   if name in ("M", "P", "X", "Y")]
        if form.task == "analyze":
            pd_vars = [v["P"]]
        prob.set_objective(selection_term(form, gain_vars, pd_vars))
        return None
    t = prob.add_variable("margin", ())
    prob.add_scalar(t <= MARGIN_CAP)
    prob.add_scalar(t >= -1e6)
    prob.set_objective(-t)
    return t


def build_global_lmi(system, spec: TaskSpec, qsr=None) -> LmiProblem:
    """The single global program whose feasibility/optimum realizes the
    requested task on the networked system."""
    prob, _ = _build_problem(system, spec, qsr)
    return prob


def _build_problem(system, spec: TaskSpec, qsr=None, fixed_margin=None):
    form = spec.form(system.domain)
    violations = form.preliminary_violations(system, qsr)
    if violations:
        raise ValueError(
            f"preliminary conditions violated for ({form.task}, {form.prop}, "
            f"{form.domain}): " + "; ".join(violations))
    ctx = FormContext(system, qsr if form.needs_qsr else None)
    prob = LmiProblem(name=f"{form.task}-{form.prop}-{form.domain}")
    v, blocks = _declare_variables(prob, system, form, spec)
    margin = _add_objective(prob, form, v, blocks, fixed_margin)
    required_margin = 0.0
    for gspec in form.grids:
        expr = assemble(gspec.build(ctx, v))
        if form.needs_gamma:
            prob.add_psd(gspec.name, expr)
        else:
            required_margin = max(required_margin, prob.strict_eps(expr))
            shift = fixed_margin if fixed_margin is not None else margin
            shifted = expr - shift * np.eye(expr.shape[0])
            prob.add_psd(gspec.name, shifted, eps=0.0)
    for name, builder in form.equalities:
        prob.add_equality(name, builder(ctx, v))
    return prob, (form, ctx, v, blocks, required_margin)


def _block_matrix_from(values, name, rdims, cdims, N):
    grid = [[values.get((name, i, j)) for j in range(N)] for i in range(N)]
    return BlockMatrix.from_blocks(grid, rdims, cdims)


def recover_design(system, form, spec, block_values, full_values,
                   gamma=None, objective=None) -> Design:
    """Turn solved variable blocks into realized gains and certificates."""
    N = system.N
    n, p, q = system.state_dims, system.input_dims, system.noise_dims
    m, l = system.output_dims, system.perf_dims
    design = Design(kind="analysis" if form.task == "analyze" else form.task,
                    domain=system.domain, prop=form.prop, mode=spec.mode,
                    gamma=gamma, objective=objective, indexing=spec.indexing)

    def bm(name, rdims, cdims):
        return _block_matrix_from(block_values, name, rdims, cdims, N)

    if form.task == "analyze":
        if any(key[0] == "P" for key in block_values):
            design.certificates["P"] = bm("P", n, n)
        for name, val in full_values.items():
            if isinstance(val, np.ndarray) and val.ndim == 2:
                design.certificates[name] = val
        return design

    if form.task == "fsf":
        M = bm("M", n, n)
        L = bm("L", p, n)
        K = enforce_equality(BlockMatrix.identity(p), M,
                             BlockMatrix(-L.data, p, n))
        design.gains["K"] = K
        design.certificates["M"] = M
        return design

    if form.task == "observer":
        P = bm("P", n, n)
        K = bm("K", n, m)
        L = enforce_equality(P, BlockMatrix.identity(m),
                             BlockMatrix(-K.data, n, m))
        d = system.dense()
        Ahat = BlockMatrix(d["A"] - L.data @ d["C"], n, n)
        Bhat = BlockMatrix(d["B"] - L.data @ d["D"], n, p)
        design.gains["L"] = L
        design.gains["Ahat"] = Ahat
        design.gains["Bhat"] = Bhat
        design.certificates["P"] = P
        return design

    if form.task == "dof":
        X = bm("X", n, n)
        Y = bm("Y", n, n)
        An, Bn = bm("An", n, n), bm("Bn", n, m)
        Cn, Dn = bm("Cn", p, n), bm("Dn", p, m)
        Mblocks, Nblocks = [], []
        for i in range(N):
            Mi, Ni = cov_recover(np.asarray(X.block(i, i)),
                                 np.asarray(Y.block(i, i)))
            Mblocks.append(Mi)
            Nblocks.append(Ni)
        Mfac = BlockMatrix.block_diag(Mblocks)
        Nfac = BlockMatrix.block_diag(Nblocks)
        d = system.dense()
        Ac, Bc, Cc, Dc = dof_from_aux(
            An.data, Bn.data, Cn.data, Dn.data,
            X.data, Y.data, Mfac.data, Nfac.data,
            d["A"], d["B"], d["C"])
        design.gains["Ac"] = BlockMatrix(Ac, n, n)
        design.gains["Bc"] = BlockMatrix(Bc, n, m)
        design.gains["Cc"] = BlockMatrix(Cc, p, n)
        design.gains["Dc"] = BlockMatrix(Dc, p, m)
        for nm, val in (("X", X), ("Y", Y), ("Mfac", Mfac), ("Nfac", Nfac),
                        ("An", An), ("Bn", Bn), ("Cn", Cn), ("Dn", Dn)):
            design.certificates[nm] = val
        return design

    raise ValueError(form.task)


def solve_two_phase(build, tol):
    """Feasibility verdict by margin maximization, then point selection at
    half the achieved margin.  ``build(fixed_margin)`` constructs the
    program.  Returns (report, margin) of the selection phase."""
    prob, info = build(None)
    required_margin = info[-1]
    rep = solve(prob, tol=tol)
    if rep.status != "feasible":
        return rep, None, info
    margin_val = float(rep.assignment["margin"])
    if margin_val < required_margin:
        rep.status = "infeasible"
        rep.note = (f"best margin {margin_val:.3e} below required "
                    f"{required_margin:.3e}")
        return rep, margin_val, info
    target = 0.5 * margin_val
    prob2, info2 = build(target)
    rep2 = solve(prob2, tol=tol)
    if rep2.status == "feasible":
        return rep2, margin_val, info2
    # selection failed numerically: fall back to the verdict point
    return rep, margin_val, info


def synthesize_centralized(system, spec: TaskSpec, qsr=None,
                           tol=1e-7) -> Design:
    """Solve the global program and realize the design (analysis tasks
    return a certificates-only design)."""
    form = spec.form(system.domain)
    if form.needs_gamma:
        prob, info = _build_problem(system, spec, qsr)
        rep = solve(prob, tol=tol)
        if rep.status != "feasible":
            raise InfeasibleError(
                f"centralized ({form.task}, {form.prop}, {form.domain}) "
                f"returned {rep.status}", constraint=rep.note)
    else:
        rep, margin_val, info = solve_two_phase(
            lambda fm: _build_problem(system, spec, qsr, fixed_margin=fm), tol)
        if rep.status != "feasible":
            raise InfeasibleError(
                f"centralized ({form.task}, {form.prop}, {form.domain}) "
                f"returned {rep.status}: {rep.note}", constraint=rep.note)
    form, ctx, v, blocks, required_margin = info

    gamma = None
    objective = rep.objective
    if form.needs_gamma:
        gval = float(rep.assignment["gamma"])
        gamma = float(np.sqrt(max(gval, 0.0))) if form.trace_mode == "sq" else gval

    block_values = {}
    for name, kind, rkey, ckey in variable_decls(form):
        if kind == "pd" and form.task != "analyze":
            for i in range(system.N):
                block_values[(name, i, i)] = rep.assignment[f"{name}_{i + 1}"]
        elif kind == "pattern":
            for i, j in _gain_pattern(system.topology):
                key = f"{name}_{i + 1}_{j + 1}"
                if key in rep.assignment:
                    block_values[(name, i, j)] = rep.assignment[key]
    design = recover_design(system, form, spec, block_values, rep.assignment,
                            gamma=gamma, objective=objective)
    design.per_subsystem = [SubsystemReport(index=0, status="feasible",
                                            objective=objective)]
    return design

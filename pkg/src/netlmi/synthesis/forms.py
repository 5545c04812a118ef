"""LMI forms for every supported (task, property, domain) combination.

Each form states its feasibility/minimization program as one or more
symmetric grids of global matrix expressions.  Centralized solving
flattens a grid into a single constraint; the decentralized sweep
regroups the same grid by subsystem pair and enforces it row by row, so
both routes share a single source of truth.

Grid builders work uniformly on numeric arrays and on solver expressions:
entries combine constant system matrices with whatever the variable map
supplies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

TASKS = ("analyze", "fsf", "observer", "dof")
PROPERTIES = ("stability", "qsr", "h2", "hinf", "stabilizability", "detectability")


def hs(x):
    return x + x.T


def is_expr(x):
    return isinstance(x, cp.expressions.expression.Expression)


def assemble(grid):
    """Stack a grid of blocks; dispatches between numeric and solver paths."""
    if any(is_expr(b) for row in grid for b in row):
        return cp.bmat(grid)
    return np.block([[np.asarray(b) for b in row] for row in grid])


class FormContext:
    """Global system matrices, dimensions and supply-rate constants."""

    def __init__(self, system, qsr=None):
        d = system.dense()
        self.A, self.B, self.C = d["A"], d["B"], d["C"]
        self.D, self.E, self.F = d["D"], d["E"], d["F"]
        self.G, self.H, self.J = d["G"], d["H"], d["J"]
        self.sub = {
            "n": system.state_dims, "p": system.input_dims,
            "q": system.noise_dims, "m": system.output_dims,
            "l": system.perf_dims,
        }
        self.dims = {k: sum(v) for k, v in self.sub.items()}
        if qsr is not None:
            self.S = qsr.S.data
            self.R = qsr.R.data
            self.nQi = qsr.neg_q_inverse()
        else:
            self.S = self.R = self.nQi = None

    def I(self, key):
        return np.eye(self.dims[key])

    def Z(self, rkey, ckey):
        return np.zeros((self.dims[rkey], self.dims[ckey]))

    def gI(self, g, key):
        return g * np.eye(self.dims[key])


@dataclass(frozen=True)
class GridSpec:
    name: str
    dim_keys: tuple  # constituent row/col dimension keys, outer grid is square
    build: object    # callable (ctx, v) -> list of rows


@dataclass(frozen=True)
class Form:
    task: str
    prop: str
    domain: str
    grids: tuple
    needs_qsr: bool = False
    needs_gamma: bool = False
    trace_mode: str | None = None  # 'lin': tr(Qa) < g ; 'sq': tr(Qa) < g^2
    qa_dim: str | None = None
    zero_required: tuple = ()      # system matrices that must vanish
    diag_required: tuple = ()      # block-diagonality needed to decentralize
    qsr_s_diag: bool = False
    message_grid: int = 0
    equalities: tuple = ()
    decentral: bool = True

    @property
    def key(self):
        return (self.task, self.prop, self.domain)

    def preliminary_violations(self, system, qsr):
        out = []
        for name in self.zero_required:
            if system.param(name).norm_inf() > 1e-12:
                out.append(f"requires {name} = 0")
        if self.needs_qsr:
            if qsr is None:
                out.append("requires a supply-rate spec")
            else:
                if not qsr.q_negdef():
                    out.append("requires -Q > 0")
        return out

    def diagonality_violations(self, system, qsr):
        out = [f"{name} must be block diagonal"
               for name in self.diag_required
               if not system.param(name).is_block_diagonal()]
        if self.needs_qsr and qsr is not None:
            out.extend(qsr.validate_decentral(block_diag_s=self.qsr_s_diag))
        return out


FORMS: dict = {}


def _register(form: Form):
    if form.key in FORMS:
        raise ValueError(f"duplicate form {form.key}")
    FORMS[form.key] = form


def get_form(task, prop, domain) -> Form:
    try:
        return FORMS[(task, prop, domain)]
    except KeyError:
        raise ValueError(
            f"unsupported combination task={task!r}, property={prop!r}, "
            f"domain={domain!r}") from None


# ---------------------------------------------------------------------------
# continuous time
# ---------------------------------------------------------------------------

def _ct_stab_analysis(c, v):
    P = v["P"]
    return [[-(c.A.T @ P) - P @ c.A]]


def _ct_qsr_analysis(c, v):
    P = v["P"]
    b12 = -(P @ c.B) + c.C.T @ c.S
    return [
        [-(c.A.T @ P) - P @ c.A, b12, c.C.T],
        [b12.T, c.D.T @ c.S + c.S.T @ c.D + c.R, c.D.T],
        [c.C, c.D, c.nQi],
    ]


def _ct_h2_analysis_main(c, v):
    P = v["P"]
    b12 = -(P @ c.B)
    return [
        [-(c.A.T @ P) - P @ c.A, b12],
        [b12.T, c.gI(v["g"], "p")],
    ]


def _ct_h2_analysis_aux(c, v):
    return [[v["P"], c.C.T], [c.C, v["Qa"]]]


def _ct_hinf_analysis(c, v):
    P, g = v["P"], v["g"]
    b12 = -(P @ c.B)
    return [
        [-(c.A.T @ P) - P @ c.A, b12, -c.C.T],
        [b12.T, c.gI(g, "p"), -c.D.T],
        [-c.C, -c.D, c.gI(g, "m")],
    ]


def _ct_stabilizability(c, v):
    P = v["P"]
    return [[-(c.A @ P) - P @ c.A.T + c.B @ c.B.T]]


def _ct_detectability(c, v):
    P = v["P"]
    return [[-(c.A.T @ P) - P @ c.A + c.C.T @ c.C]]


def _ct_fsf_stab(c, v):
    M, L = v["M"], v["L"]
    return [[-hs(c.A @ M + c.B @ L)]]


def _ct_fsf_qsr(c, v):
    M, L = v["M"], v["L"]
    b12 = -c.E + M @ (c.C.T @ c.S)
    return [
        [-hs(c.A @ M + c.B @ L), b12, M @ c.C.T],
        [b12.T, hs(c.F.T @ c.S) + c.R, c.F.T],
        [c.C @ M, c.F, c.nQi],
    ]


def _ct_fsf_h2_main(c, v):
    M, L, g = v["M"], v["L"], v["g"]
    b12 = -(M @ c.C.T) - L.T @ c.D.T
    return [
        [-hs(c.A @ M + c.B @ L), b12],
        [b12.T, c.gI(g, "m")],
    ]


def _ct_fsf_h2_aux(c, v):
    return [[v["M"], c.E], [c.E.T, v["Qa"]]]


def _ct_fsf_hinf(c, v):
    M, L, g = v["M"], v["L"], v["g"]
    b13 = -(M @ c.C.T) - L.T @ c.D.T
    return [
        [-hs(c.A @ M + c.B @ L), -c.E, b13],
        [-c.E.T, c.gI(g, "q"), -c.F.T],
        [b13.T, -c.F, c.gI(g, "m")],
    ]


def _ct_obs_stab(c, v):
    P, K = v["P"], v["K"]
    return [[-hs(P @ c.A - K @ c.C)]]


def _ct_obs_qsr(c, v):
    P, K = v["P"], v["K"]
    b12 = -(P @ c.E) + K @ c.F + c.G.T @ c.S
    return [
        [-hs(P @ c.A - K @ c.C), b12, c.G.T],
        [b12.T, hs(c.J.T @ c.S) + c.R, c.J.T],
        [c.G, c.J, c.nQi],
    ]


def _ct_obs_h2_main(c, v):
    P, K, g = v["P"], v["K"], v["g"]
    b12 = -(P @ c.E) + K @ c.F
    return [
        [-hs(P @ c.A - K @ c.C), b12],
        [b12.T, c.gI(g, "q")],
    ]


def _ct_obs_h2_aux(c, v):
    return [[v["P"], c.G.T], [c.G, v["Qa"]]]


def _ct_obs_hinf(c, v):
    P, K, g = v["P"], v["K"], v["g"]
    b12 = -(P @ c.E) + K @ c.F
    return [
        [-hs(P @ c.A - K @ c.C), b12, -c.G.T],
        [b12.T, c.gI(g, "q"), -c.J.T],
        [-c.G, -c.J, c.gI(g, "l")],
    ]


def _xy_coupling(c, v):
    return [[v["Y"], c.I("n")], [c.I("n"), v["X"]]]


def _ct_dof_stab_main(c, v):
    X, Y = v["X"], v["Y"]
    An, Bn, Cn, Dn = v["An"], v["Bn"], v["Cn"], v["Dn"]
    b12 = -c.A - c.B @ Dn @ c.C - An.T
    return [
        [-hs(c.A @ Y + c.B @ Cn), b12],
        [b12.T, -hs(X @ c.A + Bn @ c.C)],
    ]


def _ct_dof_qsr_main(c, v):
    X, Y = v["X"], v["Y"]
    An, Bn, Cn, Dn = v["An"], v["Bn"], v["Cn"], v["Dn"]
    zg = Y @ c.G.T + Cn.T @ c.H.T          # n x l
    zg2 = c.G.T + c.C.T @ Dn.T @ c.H.T     # n x l
    zj = c.J.T + c.F.T @ Dn.T @ c.H.T      # q x l
    b12 = -c.A - c.B @ Dn @ c.C - An.T
    b13 = -c.E - c.B @ Dn @ c.F + zg @ c.S
    b23 = -(X @ c.E) - Bn @ c.F + zg2 @ c.S
    return [
        [-hs(c.A @ Y + c.B @ Cn), b12, b13, zg],
        [b12.T, -hs(X @ c.A + Bn @ c.C), b23, zg2],
        [b13.T, b23.T, hs(zj @ c.S) + c.R, zj],
        [zg.T, zg2.T, zj.T, c.nQi],
    ]


def _ct_dof_h2_main(c, v):
    X, Y = v["X"], v["Y"]
    An, Bn, Cn, Dn = v["An"], v["Bn"], v["Cn"], v["Dn"]
    b12 = -c.A - c.B @ Dn @ c.C - An.T
    b13 = -c.E - c.B @ Dn @ c.F
    b23 = -(X @ c.E) - Bn @ c.F
    return [
        [-hs(c.A @ Y + c.B @ Cn), b12, b13],
        [b12.T, -hs(X @ c.A + Bn @ c.C), b23],
        [b13.T, b23.T, c.I("q")],
    ]


def _ct_dof_h2_aux(c, v):
    X, Y = v["X"], v["Y"]
    Cn, Dn = v["Cn"], v["Dn"]
    zg = Y @ c.G.T + Cn.T @ c.H.T
    zg2 = c.G.T + c.C.T @ Dn.T @ c.H.T
    return [
        [Y, c.I("n"), zg],
        [c.I("n"), X, zg2],
        [zg.T, zg2.T, v["Qa"]],
    ]


def _ct_dof_h2_equality(c, v):
    return c.J + c.H @ v["Dn"] @ c.F


def _ct_dof_hinf_main(c, v):
    X, Y, g = v["X"], v["Y"], v["g"]
    An, Bn, Cn, Dn = v["An"], v["Bn"], v["Cn"], v["Dn"]
    zg = Y @ c.G.T + Cn.T @ c.H.T
    zg2 = c.G.T + c.C.T @ Dn.T @ c.H.T
    zj = c.J.T + c.F.T @ Dn.T @ c.H.T
    b12 = -c.A - c.B @ Dn @ c.C - An.T
    b13 = -c.E - c.B @ Dn @ c.F
    b23 = -(X @ c.E) - Bn @ c.F
    return [
        [-hs(c.A @ Y + c.B @ Cn), b12, b13, -zg],
        [b12.T, -hs(X @ c.A + Bn @ c.C), b23, -zg2],
        [b13.T, b23.T, c.gI(g, "q"), -zj],
        [-zg.T, -zg2.T, -zj.T, c.gI(g, "l")],
    ]


# ---------------------------------------------------------------------------
# discrete time
# ---------------------------------------------------------------------------

def _dt_stab_analysis(c, v):
    P = v["P"]
    return [[P, c.A.T @ P], [P @ c.A, P]]


def _dt_qsr_analysis(c, v):
    P = v["P"]
    return [
        [P, c.C.T @ c.S, c.A.T @ P, c.C.T],
        [c.S.T @ c.C, hs(c.D.T @ c.S) + c.R, c.B.T @ P, c.D.T],
        [P @ c.A, P @ c.B, P, c.Z("n", "m")],
        [c.C, c.D, c.Z("m", "n"), c.nQi],
    ]


def _dt_h2_analysis_main(c, v):
    P = v["P"]
    return [
        [P, c.A @ P, c.C.T],
        [P @ c.A.T, P, c.Z("n", "m")],
        [c.C, c.Z("m", "n"), c.I("m")],
    ]


def _dt_h2_analysis_aux(c, v):
    P = v["P"]
    return [
        [v["Qa"], c.B.T @ P, c.D.T],
        [P @ c.B, P, c.Z("n", "m")],
        [c.D, c.Z("m", "n"), c.I("m")],
    ]


def _dt_hinf_analysis(c, v):
    P, g = v["P"], v["g"]
    return [
        [P, P @ c.A, P @ c.B, c.Z("n", "m")],
        [c.A.T @ P, P, c.Z("n", "p"), c.C.T],
        [c.B.T @ P, c.Z("p", "n"), c.gI(g, "p"), c.D.T],
        [c.Z("m", "n"), c.C, c.D, c.gI(g, "m")],
    ]


def _dt_stabilizability(c, v):
    P = v["P"]
    return [[P, P @ c.A.T], [c.A @ P, P + c.B @ c.B.T]]


def _dt_detectability(c, v):
    P = v["P"]
    return [[P, P @ c.A], [c.A.T @ P, P + c.C.T @ c.C]]


def _dt_fsf_stab(c, v):
    M, L = v["M"], v["L"]
    b12 = M @ c.A.T + L.T @ c.B.T
    return [[M, b12], [b12.T, M]]


def _dt_fsf_qsr(c, v):
    M, L = v["M"], v["L"]
    b13 = M @ c.A.T + L.T @ c.B.T
    return [
        [M, M @ (c.C.T @ c.S), b13, M @ c.C.T],
        [(M @ (c.C.T @ c.S)).T, hs(c.F.T @ c.S) + c.R, c.E.T, c.F.T],
        [b13.T, c.E, M, c.Z("n", "m")],
        [c.C @ M, c.F, c.Z("m", "n"), c.nQi],
    ]


def _dt_fsf_h2_main(c, v):
    M, L = v["M"], v["L"]
    b12 = c.A @ M + c.B @ L
    return [
        [M, b12, c.E],
        [b12.T, M, c.Z("n", "q")],
        [c.E.T, c.Z("q", "n"), c.I("q")],
    ]


def _dt_fsf_h2_aux(c, v):
    M, L = v["M"], v["L"]
    b12 = c.C @ M + c.D @ L
    return [
        [v["Qa"], b12, c.F],
        [b12.T, M, c.Z("n", "q")],
        [c.F.T, c.Z("q", "n"), c.I("q")],
    ]


def _dt_fsf_hinf(c, v):
    M, L, g = v["M"], v["L"], v["g"]
    b12 = c.A @ M + c.B @ L
    b24 = M @ c.C.T + L.T @ c.D.T
    return [
        [M, b12, c.E, c.Z("n", "m")],
        [b12.T, M, c.Z("n", "q"), b24],
        [c.E.T, c.Z("q", "n"), c.gI(g, "q"), c.F.T],
        [c.Z("m", "n"), b24.T, c.F, c.gI(g, "m")],
    ]


def _dt_obs_stab(c, v):
    P, K = v["P"], v["K"]
    b12 = c.A.T @ P - c.C.T @ K.T
    return [[P, b12], [b12.T, P]]


def _dt_obs_qsr(c, v):
    P, K = v["P"], v["K"]
    b13 = c.A.T @ P - c.C.T @ K.T
    b23 = c.E.T @ P - c.F.T @ K.T
    return [
        [P, c.G.T @ c.S, b13, c.G.T],
        [c.S.T @ c.G, hs(c.J.T @ c.S) + c.R, b23, c.J.T],
        [b13.T, b23.T, P, c.Z("n", "l")],
        [c.G, c.J, c.Z("l", "n"), c.nQi],
    ]


def _dt_obs_h2_main(c, v):
    P, K = v["P"], v["K"]
    b12 = P @ c.A - K @ c.C
    b13 = P @ c.E - K @ c.F
    return [
        [P, b12, b13],
        [b12.T, P, c.Z("n", "q")],
        [b13.T, c.Z("q", "n"), c.I("q")],
    ]


def _dt_obs_h2_aux(c, v):
    P = v["P"]
    return [
        [v["Qa"], c.G @ P, c.J],
        [P @ c.G.T, P, c.Z("n", "q")],
        [c.J.T, c.Z("q", "n"), c.I("q")],
    ]


def _dt_obs_hinf(c, v):
    P, K, g = v["P"], v["K"], v["g"]
    b12 = P @ c.A - K @ c.C
    b13 = P @ c.E - K @ c.F
    return [
        [P, b12, b13, c.Z("n", "l")],
        [b12.T, P, c.Z("n", "q"), c.G.T],
        [b13.T, c.Z("q", "n"), c.gI(g, "q"), c.J.T],
        [c.Z("l", "n"), c.G, c.J, c.gI(g, "l")],
    ]


def _dt_dof_stab_main(c, v):
    X, Y = v["X"], v["Y"]
    An, Bn, Cn, Dn = v["An"], v["Bn"], v["Cn"], v["Dn"]
    b13 = Y @ c.A.T + Cn.T @ c.B.T
    b23 = c.A.T + c.C.T @ Dn.T @ c.B.T
    b24 = c.A.T @ X + c.C.T @ Bn.T
    return [
        [Y, c.I("n"), b13, An.T],
        [c.I("n"), X, b23, b24],
        [b13.T, b23.T, Y, c.I("n")],
        [An, b24.T, c.I("n"), X],
    ]


def _dt_dof_qsr_main(c, v):
    X, Y = v["X"], v["Y"]
    An, Bn, Cn, Dn = v["An"], v["Bn"], v["Cn"], v["Dn"]
    zg = Y @ c.G.T + Cn.T @ c.H.T
    zg2 = c.G.T + c.C.T @ Dn.T @ c.H.T
    zj = c.J.T + c.F.T @ Dn.T @ c.H.T
    b14 = Y @ c.A.T + Cn.T @ c.B.T
    b24 = c.A.T + c.C.T @ Dn.T @ c.B.T
    b25 = c.A.T @ X + c.C.T @ Bn.T
    b34 = c.E.T + c.F.T @ Dn.T @ c.B.T
    b35 = c.E.T @ X + c.F.T @ Bn.T
    return [
        [Y, c.I("n"), zg @ c.S, b14, An.T, zg],
        [c.I("n"), X, zg2 @ c.S, b24, b25, zg2],
        [(zg @ c.S).T, (zg2 @ c.S).T, hs(zj @ c.S) + c.R, b34, b35, zj],
        [b14.T, b24.T, b34.T, Y, c.I("n"), c.Z("n", "l")],
        [An, b25.T, b35.T, c.I("n"), X, c.Z("n", "l")],
        [zg.T, zg2.T, zj.T, c.Z("l", "n"), c.Z("l", "n"), c.nQi],
    ]


def _dt_dof_h2_main(c, v):
    X, Y = v["X"], v["Y"]
    An, Bn, Cn, Dn = v["An"], v["Bn"], v["Cn"], v["Dn"]
    zg = Y @ c.G.T + Cn.T @ c.H.T
    zg2 = c.G.T + c.C.T @ Dn.T @ c.H.T
    b13 = Y @ c.A.T + Cn.T @ c.B.T
    b23 = c.A.T + c.C.T @ Dn.T @ c.B.T
    b24 = c.A.T @ X + c.C.T @ Bn.T
    return [
        [Y, c.I("n"), b13, An.T, zg],
        [c.I("n"), X, b23, b24, zg2],
        [b13.T, b23.T, Y, c.I("n"), c.Z("n", "l")],
        [An, b24.T, c.I("n"), X, c.Z("n", "l")],
        [zg.T, zg2.T, c.Z("l", "n"), c.Z("l", "n"), c.I("l")],
    ]


def _dt_dof_h2_aux(c, v):
    X, Y = v["X"], v["Y"]
    Bn, Dn = v["Bn"], v["Dn"]
    b12 = c.E.T + c.F.T @ Dn.T @ c.B.T
    b13 = c.E.T @ X + c.F.T @ Bn.T
    b14 = c.J.T + c.F.T @ Dn.T @ c.H.T
    return [
        [v["Qa"], b12, b13, b14],
        [b12.T, Y, c.I("n"), c.Z("n", "l")],
        [b13.T, c.I("n"), X, c.Z("n", "l")],
        [b14.T, c.Z("l", "n"), c.Z("l", "n"), c.I("l")],
    ]


def _dt_dof_hinf_main(c, v):
    X, Y, g = v["X"], v["Y"], v["g"]
    An, Bn, Cn, Dn = v["An"], v["Bn"], v["Cn"], v["Dn"]
    zg = Y @ c.G.T + Cn.T @ c.H.T
    zg2 = c.G.T + c.C.T @ Dn.T @ c.H.T
    zj = c.J.T + c.F.T @ Dn.T @ c.H.T
    b13 = c.A @ Y + c.B @ Cn
    b14 = c.A + c.B @ Dn @ c.C
    b15 = c.E + c.B @ Dn @ c.F
    b24 = X @ c.A + Bn @ c.C
    b25 = X @ c.E + Bn @ c.F
    return [
        [Y, c.I("n"), b13, b14, b15, c.Z("n", "l")],
        [c.I("n"), X, An, b24, b25, c.Z("n", "l")],
        [b13.T, An.T, Y, c.I("n"), c.Z("n", "q"), zg],
        [b14.T, b24.T, c.I("n"), X, c.Z("n", "q"), zg2],
        [b15.T, b25.T, c.Z("q", "n"), c.Z("q", "n"), c.gI(g, "q"), zj],
        [c.Z("l", "n"), c.Z("l", "n"), zg.T, zg2.T, zj.T, c.gI(g, "l")],
    ]


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _build_registry():
    ct, dt = "ct", "dt"

    # -- analysis ----------------------------------------------------------
    _register(Form("analyze", "stability", ct,
                   grids=(GridSpec("lyapunov", ("n",), _ct_stab_analysis),)))
    _register(Form("analyze", "qsr", ct, needs_qsr=True,
                   diag_required=("C", "D"),
                   grids=(GridSpec("dissipativity", ("n", "p", "m"),
                                   _ct_qsr_analysis),)))
    _register(Form("analyze", "h2", ct, needs_gamma=True, trace_mode="lin",
                   qa_dim="m", zero_required=("D",), decentral=False,
                   grids=(GridSpec("gain", ("n", "p"), _ct_h2_analysis_main),
                          GridSpec("gramian", ("n", "m"), _ct_h2_analysis_aux))))
    _register(Form("analyze", "hinf", ct, needs_gamma=True, decentral=False,
                   grids=(GridSpec("gain", ("n", "p", "m"), _ct_hinf_analysis),)))
    _register(Form("analyze", "stabilizability", ct, diag_required=("B",),
                   grids=(GridSpec("stabilizability", ("n",), _ct_stabilizability),)))
    _register(Form("analyze", "detectability", ct, diag_required=("C",),
                   grids=(GridSpec("detectability", ("n",), _ct_detectability),)))

    _register(Form("analyze", "stability", dt,
                   grids=(GridSpec("lyapunov", ("n", "n"), _dt_stab_analysis),)))
    _register(Form("analyze", "qsr", dt, needs_qsr=True,
                   diag_required=("C", "D"),
                   grids=(GridSpec("dissipativity", ("n", "p", "n", "m"),
                                   _dt_qsr_analysis),)))
    _register(Form("analyze", "h2", dt, needs_gamma=True, trace_mode="sq",
                   qa_dim="p", decentral=False,
                   grids=(GridSpec("gain", ("n", "n", "m"), _dt_h2_analysis_main),
                          GridSpec("gramian", ("p", "n", "m"), _dt_h2_analysis_aux))))
    _register(Form("analyze", "hinf", dt, needs_gamma=True, decentral=False,
                   grids=(GridSpec("gain", ("n", "n", "p", "m"),
                                   _dt_hinf_analysis),)))
    _register(Form("analyze", "stabilizability", dt, diag_required=("B",),
                   grids=(GridSpec("stabilizability", ("n", "n"),
                                   _dt_stabilizability),)))
    _register(Form("analyze", "detectability", dt, diag_required=("C",),
                   grids=(GridSpec("detectability", ("n", "n"),
                                   _dt_detectability),)))

    # -- full-state feedback ------------------------------------------------
    _register(Form("fsf", "stability", ct, zero_required=("D",),
                   diag_required=("B",),
                   grids=(GridSpec("closedloop", ("n",), _ct_fsf_stab),)))
    _register(Form("fsf", "qsr", ct, needs_qsr=True, zero_required=("D",),
                   diag_required=("B", "C", "F"),
                   grids=(GridSpec("dissipativity", ("n", "q", "m"),
                                   _ct_fsf_qsr),)))
    _register(Form("fsf", "h2", ct, needs_gamma=True, trace_mode="lin",
                   qa_dim="q", zero_required=("F",), decentral=False,
                   grids=(GridSpec("gain", ("n", "m"), _ct_fsf_h2_main),
                          GridSpec("gramian", ("n", "q"), _ct_fsf_h2_aux))))
    _register(Form("fsf", "hinf", ct, needs_gamma=True, decentral=False,
                   grids=(GridSpec("gain", ("n", "q", "m"), _ct_fsf_hinf),)))

    _register(Form("fsf", "stability", dt, zero_required=("D",),
                   diag_required=("B",),
                   grids=(GridSpec("closedloop", ("n", "n"), _dt_fsf_stab),)))
    _register(Form("fsf", "qsr", dt, needs_qsr=True, zero_required=("D",),
                   diag_required=("B", "C", "F"),
                   grids=(GridSpec("dissipativity", ("n", "q", "n", "m"),
                                   _dt_fsf_qsr),)))
    _register(Form("fsf", "h2", dt, needs_gamma=True, trace_mode="sq",
                   qa_dim="m", decentral=False,
                   grids=(GridSpec("gain", ("n", "n", "q"), _dt_fsf_h2_main),
                          GridSpec("gramian", ("m", "n", "q"), _dt_fsf_h2_aux))))
    _register(Form("fsf", "hinf", dt, needs_gamma=True, decentral=False,
                   grids=(GridSpec("gain", ("n", "n", "q", "m"), _dt_fsf_hinf),)))

    # -- observers -----------------------------------------------------------
    _register(Form("observer", "stability", ct, diag_required=("C", "D"),
                   grids=(GridSpec("error", ("n",), _ct_obs_stab),)))
    _register(Form("observer", "qsr", ct, needs_qsr=True,
                   diag_required=("C", "D", "F", "G", "J"),
                   grids=(GridSpec("dissipativity", ("n", "q", "l"),
                                   _ct_obs_qsr),)))
    _register(Form("observer", "h2", ct, needs_gamma=True, trace_mode="lin",
                   qa_dim="l", zero_required=("J",), decentral=False,
                   grids=(GridSpec("gain", ("n", "q"), _ct_obs_h2_main),
                          GridSpec("gramian", ("n", "l"), _ct_obs_h2_aux))))
    _register(Form("observer", "hinf", ct, needs_gamma=True, decentral=False,
                   grids=(GridSpec("gain", ("n", "q", "l"), _ct_obs_hinf),)))

    _register(Form("observer", "stability", dt, diag_required=("C", "D"),
                   grids=(GridSpec("error", ("n", "n"), _dt_obs_stab),)))
    _register(Form("observer", "qsr", dt, needs_qsr=True,
                   diag_required=("C", "D", "F", "G", "J"),
                   grids=(GridSpec("dissipativity", ("n", "q", "n", "l"),
                                   _dt_obs_qsr),)))
    _register(Form("observer", "h2", dt, needs_gamma=True, trace_mode="sq",
                   qa_dim="l", decentral=False,
                   grids=(GridSpec("gain", ("n", "n", "q"), _dt_obs_h2_main),
                          GridSpec("gramian", ("l", "n", "q"), _dt_obs_h2_aux))))
    _register(Form("observer", "hinf", dt, needs_gamma=True, decentral=False,
                   grids=(GridSpec("gain", ("n", "n", "q", "l"), _dt_obs_hinf),)))

    # -- dynamic output feedback ---------------------------------------------
    _register(Form("dof", "stability", ct, zero_required=("D",),
                   diag_required=("B", "C"), message_grid=1,
                   grids=(GridSpec("coupling", ("n", "n"), _xy_coupling),
                          GridSpec("closedloop", ("n", "n"), _ct_dof_stab_main))))
    _register(Form("dof", "qsr", ct, needs_qsr=True, zero_required=("D",),
                   diag_required=("B", "C", "F", "H"), qsr_s_diag=True,
                   message_grid=1,
                   grids=(GridSpec("coupling", ("n", "n"), _xy_coupling),
                          GridSpec("dissipativity", ("n", "n", "q", "l"),
                                   _ct_dof_qsr_main))))
    _register(Form("dof", "h2", ct, needs_gamma=True, trace_mode="lin",
                   qa_dim="l", zero_required=("D",), decentral=False,
                   equalities=(("feedthrough", _ct_dof_h2_equality),),
                   grids=(GridSpec("gain", ("n", "n", "q"), _ct_dof_h2_main),
                          GridSpec("gramian", ("n", "n", "l"), _ct_dof_h2_aux))))
    _register(Form("dof", "hinf", ct, needs_gamma=True, zero_required=("D",),
                   decentral=False, message_grid=1,
                   grids=(GridSpec("coupling", ("n", "n"), _xy_coupling),
                          GridSpec("gain", ("n", "n", "q", "l"),
                                   _ct_dof_hinf_main))))

    _register(Form("dof", "stability", dt, zero_required=("D",),
                   diag_required=("B", "C"), message_grid=1,
                   grids=(GridSpec("coupling", ("n", "n"), _xy_coupling),
                          GridSpec("closedloop", ("n", "n", "n", "n"),
                                   _dt_dof_stab_main))))
    _register(Form("dof", "qsr", dt, needs_qsr=True, zero_required=("D",),
                   diag_required=("B", "C", "F", "H"), qsr_s_diag=True,
                   message_grid=1,
                   grids=(GridSpec("coupling", ("n", "n"), _xy_coupling),
                          GridSpec("dissipativity", ("n", "n", "q", "n", "n", "l"),
                                   _dt_dof_qsr_main))))
    _register(Form("dof", "h2", dt, needs_gamma=True, trace_mode="sq",
                   qa_dim="q", zero_required=("D",), decentral=False,
                   grids=(GridSpec("gain", ("n", "n", "n", "n", "l"),
                                   _dt_dof_h2_main),
                          GridSpec("gramian", ("q", "n", "n", "l"),
                                   _dt_dof_h2_aux))))
    _register(Form("dof", "hinf", dt, needs_gamma=True, zero_required=("D",),
                   decentral=False,
                   grids=(GridSpec("gain", ("n", "n", "n", "n", "q", "l"),
                                   _dt_dof_hinf_main),)))


_build_registry()


# -- variable declarations per task ----------------------------------------

def variable_decls(form: Form):
    """(name, kind, row_key, col_key) for the form's matrix variables.

    kind 'pd' variables are symmetric positive definite (block diagonal in
    every synthesis task); 'pattern' variables carry the in-neighbor
    sparsity of the local controller/observer structure.
    """
    decls = []
    if form.task == "analyze":
        decls.append(("P", "pd", "n", "n"))
    elif form.task == "fsf":
        decls.append(("M", "pd", "n", "n"))
        decls.append(("L", "pattern", "p", "n"))
    elif form.task == "observer":
        decls.append(("P", "pd", "n", "n"))
        decls.append(("K", "pattern", "n", "m"))
    elif form.task == "dof":
        decls.append(("X", "pd", "n", "n"))
        decls.append(("Y", "pd", "n", "n"))
        decls.append(("An", "pattern", "n", "n"))
        decls.append(("Bn", "pattern", "n", "m"))
        decls.append(("Cn", "pattern", "p", "n"))
        decls.append(("Dn", "pattern", "p", "m"))
    if form.qa_dim is not None:
        decls.append(("Qa", "aux_pd", form.qa_dim, form.qa_dim))
    return decls

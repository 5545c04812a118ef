"""Solver-facing LMI problem abstraction plus the matrix identities used to
linearize synthesis problems (Schur reduction, congruence, the local
Schur-form constraint of the sequential protocol, and the change of
variables for dynamic output feedback).

Strict inequalities W > 0 are realized as W >= eps*I with
eps = 1e-6 * (1 + ||constant part||_inf); conic solvers handle non-strict
cones only.  Every feasible report is re-checked by an independent
eigenvalue evaluation of each constraint at the returned assignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np
import scipy.linalg

STRICT_EPS_BASE = 1e-6
COND_MAX = 1e12


def sym(expr):
    return 0.5 * (expr + expr.T)


def hs(expr):
    """Symmetric part doubled: expr + expr^T."""
    return expr + expr.T


@dataclass
class LmiVariable:
    name: str
    shape: tuple
    symmetric: bool = False
    fixed: np.ndarray | None = None
    var: object = None  # cvxpy Variable when not fixed

    @property
    def expr(self):
        return self.fixed if self.fixed is not None else self.var

    def value(self):
        return self.fixed if self.fixed is not None else self.var.value


@dataclass
class SolveReport:
    status: str  # feasible | infeasible | inaccurate | unbounded
    assignment: dict = field(default_factory=dict)
    objective: float | None = None
    max_psd_residual: float = 0.0
    max_eq_residual: float = 0.0
    solver: str = ""
    note: str = ""

    @property
    def feasible(self):
        return self.status == "feasible"


class LmiProblem:
    """Affine positive-definiteness constraints, linear equalities and an
    optional linear objective over block-structured matrix variables."""

    def __init__(self, name=""):
        self.name = name
        self.variables: dict[str, LmiVariable] = {}
        self.psd_constraints = []   # (name, expr, eps)
        self.equalities = []        # (name, expr)
        self.scalar_constraints = []  # raw cvxpy constraints (traces, bounds)
        self.objective_expr = None

    # -- variables -------------------------------------------------------

    def add_variable(self, name, shape, symmetric=False):
        if name in self.variables:
            raise ValueError(f"duplicate variable {name}")
        if np.isscalar(shape) or shape == ():
            var = cp.Variable(name=name)
            shape = ()
        elif symmetric:
            var = cp.Variable(shape, name=name, symmetric=True)
        else:
            var = cp.Variable(shape, name=name)
        lv = LmiVariable(name=name, shape=shape, symmetric=symmetric, var=var)
        self.variables[name] = lv
        return var

    def add_constant(self, name, value):
        """A fixed-value variable: earlier subsystems' results entering a
        sequential run as constants."""
        value = np.asarray(value, dtype=float)
        lv = LmiVariable(name=name, shape=value.shape, fixed=value)
        self.variables[name] = lv
        return value

    # -- constraints -----------------------------------------------------

    def strict_eps(self, expr):
        c = _constant_part(expr, self._cvxpy_vars())
        scale = float(np.max(np.abs(c))) if c.size else 0.0
        return STRICT_EPS_BASE * (1.0 + scale)

    def add_psd(self, name, expr, eps=None):
        """Require expr > 0 (strict, via the eps shift).  Pass eps=0.0 for a
        plain semidefinite requirement."""
        if expr.shape[0] != expr.shape[1]:
            raise ValueError(f"PSD constraint {name} is not square: {expr.shape}")
        if eps is None:
            eps = self.strict_eps(expr)
        self.psd_constraints.append((name, expr, float(eps)))

    def add_equality(self, name, expr):
        self.equalities.append((name, expr))

    def add_scalar(self, constraint):
        self.scalar_constraints.append(constraint)

    def add_trace_lt(self, expr, bound):
        """tr(expr) < bound, realized non-strictly."""
        self.scalar_constraints.append(cp.trace(expr) <= bound)

    def set_objective(self, expr):
        self.objective_expr = expr

    # -- internals ---------------------------------------------------------

    def _cvxpy_vars(self):
        return [v.var for v in self.variables.values() if v.fixed is None]

    def build(self):
        cons = []
        for _, expr, eps in self.psd_constraints:
            n = expr.shape[0]
            cons.append(sym(expr) - eps * np.eye(n) >> 0)
        for _, expr in self.equalities:
            cons.append(expr == 0)
        cons.extend(self.scalar_constraints)
        objective = (cp.Minimize(self.objective_expr)
                     if self.objective_expr is not None else cp.Minimize(0))
        return cp.Problem(objective, cons)


def _constant_part(expr, variables):
    """Evaluate an affine expression with every variable set to zero."""
    if isinstance(expr, np.ndarray):
        return expr
    saved = [(v, v.value) for v in variables]
    try:
        for v, _ in saved:
            v.value = np.zeros(v.shape)
        val = expr.value
    finally:
        for v, old in saved:
            v.value = old
    return np.atleast_2d(np.asarray(val)) if val is not None else np.zeros((1, 1))


_STATUS_MAP = {
    cp.OPTIMAL: "feasible",
    cp.INFEASIBLE: "infeasible",
    cp.UNBOUNDED: "unbounded",
    # reduced-accuracy solutions are accepted only if the independent
    # residual re-check below passes
    cp.OPTIMAL_INACCURATE: "feasible",
    cp.INFEASIBLE_INACCURATE: "infeasible",
    cp.UNBOUNDED_INACCURATE: "inaccurate",
}


def _checked_report(problem: LmiProblem, prob, used, tol) -> SolveReport:
    """Independent eigenvalue re-check of a claimed-feasible solution."""
    assignment = {}
    for name, lv in problem.variables.items():
        val = lv.value()
        assignment[name] = np.asarray(val, dtype=float) if val is not None else None

    max_psd = 0.0
    margin_ok = True
    for name, expr, eps in problem.psd_constraints:
        val = expr.value if not isinstance(expr, np.ndarray) else expr
        if val is None:
            return SolveReport(status="inaccurate", solver=used,
                               note=f"constraint {name} has no value")
        val = 0.5 * (np.asarray(val) + np.asarray(val).T)
        mineig = float(np.min(np.linalg.eigvalsh(val)))
        max_psd = max(max_psd, -mineig)
        # at least half the strictness margin must survive; guards against
        # the solver hiding an eps-violation behind a blown-up scale
        if mineig < 0.5 * eps - tol:
            margin_ok = False
    max_eq = 0.0
    for name, expr in problem.equalities:
        val = expr.value if not isinstance(expr, np.ndarray) else expr
        max_eq = max(max_eq, float(np.max(np.abs(val))) if val is not None else np.inf)

    objective = None
    if problem.objective_expr is not None:
        objective = float(prob.value)

    if max_psd > tol or max_eq > 1e3 * tol or not margin_ok:
        return SolveReport(status="inaccurate", assignment=assignment,
                           objective=objective, max_psd_residual=max_psd,
                           max_eq_residual=max_eq, solver=used,
                           note="independent residual check failed")
    return SolveReport(status="feasible", assignment=assignment,
                       objective=objective, max_psd_residual=max_psd,
                       max_eq_residual=max_eq, solver=used)


def solve(problem: LmiProblem, tol=1e-7, solver="CLARABEL") -> SolveReport:
    """Solve and independently re-verify an LMI problem.

    Feasibility is only reported when the eigenvalue re-check of every
    constraint at the returned assignment passes within ``tol``; solver
    breakdowns surface as status 'inaccurate', never as silent success.
    Reduced-accuracy solver verdicts are accepted only when that re-check
    passes.
    """
    prob = problem.build()
    solvers = [solver] + (["SCS"] if solver != "SCS" else ["CLARABEL"])
    best = None
    for s in solvers:
        try:
            kwargs = {"eps": 1e-9, "max_iters": 50_000} if s == "SCS" else {}
            prob.solve(solver=s, **kwargs)
        except Exception as exc:  # solver layer: breakdowns become 'inaccurate'
            best = best or SolveReport(status="inaccurate", note=f"{s}: {exc}")
            continue
        status = _STATUS_MAP.get(prob.status, "inaccurate")
        if status in ("infeasible", "unbounded"):
            return SolveReport(status=status, solver=s,
                               note=f"solver status {prob.status}")
        if status == "feasible":
            rep = _checked_report(problem, prob, s, tol)
            if rep.status == "feasible":
                return rep
            best = rep
        else:
            best = best or SolveReport(status="inaccurate", solver=s,
                                       note=f"solver status {prob.status}")
    return best or SolveReport(status="inaccurate", note="all solvers failed")


# -- matrix identities ---------------------------------------------------


def schur_reduce(theta, phi, gamma, pivot="theta"):
    """Reduce the 2x2 symmetric block [[theta, phi], [phi^T, gamma]] by the
    chosen invertible pivot; returns (pivot_value, complement).  The full
    matrix is positive definite iff both returned matrices are."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    gamma = np.atleast_2d(np.asarray(gamma, dtype=float))
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if pivot == "theta":
        if theta.size and np.linalg.cond(theta) > COND_MAX:
            raise ValueError("singular pivot block")
        comp = gamma - phi.T @ np.linalg.solve(theta, phi)
        return theta, comp
    if pivot == "gamma":
        if gamma.size and np.linalg.cond(gamma) > COND_MAX:
            raise ValueError("singular pivot block")
        comp = theta - phi @ np.linalg.solve(gamma, phi.T)
        return gamma, comp
    raise ValueError(f"unknown pivot {pivot!r}")


def congruence(W, P):
    """P^T W P for full-rank P; preserves definiteness."""
    P = np.asarray(P, dtype=float)
    if P.shape[0] != P.shape[1] and np.linalg.matrix_rank(P) < min(P.shape):
        raise ValueError("P must have full rank")
    if P.shape[0] == P.shape[1] and np.linalg.cond(P) > COND_MAX:
        raise ValueError("P is rank deficient")
    W = np.asarray(W, dtype=float)
    return P.T @ W @ P


def prior_factors(tilde_rows, dims):
    """Stack previously computed tilde rows into the lower-triangular message
    matrix and the diagonal of inverses used by the sequential constraint.

    ``tilde_rows[k]`` maps j -> block for j <= k.  Returns (Acal, Dcal) with
    Acal lower block triangular and Dcal = diag of inverse diagonal factors.
    """
    i = len(tilde_rows)
    if i == 0:
        return np.zeros((0, 0)), np.zeros((0, 0))
    total = sum(dims[:i])
    A = np.zeros((total, total))
    D = np.zeros((total, total))
    offs = np.concatenate(([0], np.cumsum(dims[:i])))
    for k in range(i):
        for j in range(k + 1):
            blk = tilde_rows[k].get(j)
            if blk is not None and blk.size:
                A[offs[k]:offs[k + 1], offs[j]:offs[j + 1]] = blk
        diag = tilde_rows[k][k]
        if diag.size:
            D[offs[k]:offs[k + 1], offs[k]:offs[k + 1]] = np.linalg.inv(diag)
    return A, D


def local_schur_constraint(w_ii_expr, w_i_expr, a_prior, d_prior):
    """The affine expression whose positive definiteness is equivalent to the
    current diagonal factor being positive definite:

        [[W_ii, W_i], [W_i^T, A D A^T]] > 0   <=>   W_ii - W_i (A D A^T)^-1 W_i^T > 0,

    valid because the prior factors make A D A^T constant and positive
    definite.  With no priors it degenerates to W_ii itself.
    """
    a_prior = np.asarray(a_prior, dtype=float)
    d_prior = np.asarray(d_prior, dtype=float)
    if a_prior.size == 0:
        return w_ii_expr
    corner = a_prior @ d_prior @ a_prior.T
    corner = 0.5 * (corner + corner.T)
    if np.min(np.linalg.eigvalsh(corner)) <= 0:
        raise ValueError("prior diagonal factors are not positive definite")
    if isinstance(w_ii_expr, np.ndarray) and isinstance(w_i_expr, np.ndarray):
        top = np.hstack([w_ii_expr, w_i_expr])
        bot = np.hstack([w_i_expr.T, corner])
        return np.vstack([top, bot])
    return cp.bmat([[w_ii_expr, w_i_expr], [w_i_expr.T, corner]])


# -- change of variables for dynamic output feedback ----------------------


def cov_recover(X, Y):
    """Full-rank factors with X Y + M N^T = I, via the LU factorization of
    I - X Y (M takes the permuted lower factor, N^T the upper factor)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Z = np.eye(X.shape[0]) - X @ Y
    if Z.size and np.linalg.cond(Z) > COND_MAX:
        raise ValueError(
            "I - XY is numerically singular; perturb the solution slightly "
            "before recovering the controller factors")
    P, L, U = scipy.linalg.lu(Z)
    M = P @ L
    N = U.T
    if np.max(np.abs(X @ Y + M @ N.T - np.eye(X.shape[0]))) > 1e-10:
        raise ArithmeticError("factor recovery residual too large")
    return M, N


def dof_from_aux(An, Bn, Cn, Dn, X, Y, M, N, A, B, C):
    """Map the linearizing parameters to the realized controller matrices."""
    Minv = np.linalg.inv(M)
    NTinv = np.linalg.inv(N.T)
    Dc = np.asarray(Dn, dtype=float)
    Cc = (Cn - Dc @ C @ Y) @ NTinv
    Bc = Minv @ (Bn - X @ B @ Dc)
    Ac = Minv @ (An - Bn @ C @ Y - X @ B @ Cn - X @ (A - B @ Dc @ C) @ Y) @ NTinv
    return Ac, Bc, Cc, Dc


def aux_from_dof(Ac, Bc, Cc, Dc, X, Y, M, N, A, B, C):
    """Inverse of :func:`dof_from_aux`."""
    Dn = np.asarray(Dc, dtype=float)
    Cn = Dn @ C @ Y + Cc @ N.T
    Bn = X @ B @ Dn + M @ Bc
    An = M @ Ac @ N.T + M @ Bc @ C @ Y + X @ B @ Cc @ N.T + X @ (A + B @ Dn @ C) @ Y
    return An, Bn, Cn, Dn

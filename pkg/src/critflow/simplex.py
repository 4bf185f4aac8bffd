"""Dense two-phase revised simplex for small/medium LPs.

Handles general variable bounds without extra rows (bounded-variable
simplex: nonbasic variables sit at either bound, and the ratio test also
permits bound flips). Pricing is Dantzig's rule; after a run of degenerate
pivots the solver permanently falls back to Bland's rule, which cannot
cycle. Everything is deterministic: ties break toward the smallest
variable index.

The problem form is

    minimize    c @ x
    subject to  A x (<= | >= | =) b   row-wise
                lower <= x <= upper   (upper may be +inf)

Desk-scale only: the basis inverse is kept as a dense matrix, refreshed
periodically to bound drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REDUCED_COST_TOL = 1e-9
PIVOT_TOL = 1e-9
DEGENERATE_STEP_TOL = 1e-9
FEASIBILITY_TOL = 1e-7
BLAND_AFTER_DEGENERATE = 1000
REFRESH_EVERY = 500


class LpError(Exception):
    pass


class LpInfeasibleError(LpError):
    pass


class LpUnboundedError(LpError):
    pass


class LpIterationLimitError(LpError):
    def __init__(self, message, basis=None, x=None):
        super().__init__(message)
        self.basis = basis  # last basis, for post-mortem
        self.x = x


@dataclass
class LpProblem:
    c: np.ndarray                 # (n,) objective, minimized
    a: np.ndarray                 # (m, n)
    rel: list[str]                # per row: '<=', '>=', '='
    b: np.ndarray                 # (m,)
    lower: np.ndarray = None      # default zeros
    upper: np.ndarray = None      # default +inf
    var_names: list[str] = None   # optional, for text dumps

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.a = np.atleast_2d(np.asarray(self.a, dtype=float))
        self.b = np.asarray(self.b, dtype=float)
        n = self.c.shape[0]
        m = self.b.shape[0]
        if self.a.shape != (m, n):
            raise ValueError(f"A shape {self.a.shape} != ({m},{n})")
        if len(self.rel) != m:
            raise ValueError("one relation per row required")
        for r in self.rel:
            if r not in ("<=", ">=", "="):
                raise ValueError(f"bad relation {r!r}")
        self.lower = (np.zeros(n) if self.lower is None
                      else np.asarray(self.lower, dtype=float))
        self.upper = (np.full(n, np.inf) if self.upper is None
                      else np.asarray(self.upper, dtype=float))
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def n_vars(self):
        return self.c.shape[0]

    @property
    def n_rows(self):
        return self.b.shape[0]


@dataclass
class LpSolution:
    x: np.ndarray
    objective: float
    iterations: int = 0


def solve_lp(problem, max_iters=None, tol=REDUCED_COST_TOL):
    """Solve to an optimal basic feasible solution.

    Raises LpInfeasibleError / LpUnboundedError / LpIterationLimitError.
    """
    n, m = problem.n_vars, problem.n_rows
    lower, upper = problem.lower, problem.upper

    # shift lower bounds to 0: x = lower + y, 0 <= y <= u
    finite_lo = np.where(np.isfinite(lower), lower, 0.0)
    if np.any(~np.isfinite(lower)):
        raise ValueError("free (lower=-inf) variables are not supported")
    b1 = problem.b - problem.a @ finite_lo
    u_struct = upper - finite_lo

    # append slack/surplus columns
    cols = [problem.a]
    u_extra = []
    slack_of_row = {}
    for i, r in enumerate(problem.rel):
        if r == "=":
            continue
        col = np.zeros((m, 1))
        col[i, 0] = 1.0 if r == "<=" else -1.0
        slack_of_row[i] = n + len(u_extra)
        cols.append(col)
        u_extra.append(np.inf)
    a2 = np.hstack(cols)
    u = np.concatenate([u_struct, np.array(u_extra)])
    n_real = a2.shape[1]

    # artificial columns where no slack can start feasible
    art_cols = []
    basis = np.empty(m, dtype=int)
    for i in range(m):
        r = problem.rel[i]
        si = slack_of_row.get(i)
        if si is not None and ((r == "<=" and b1[i] >= 0) or (r == ">=" and b1[i] <= 0)):
            basis[i] = si
        else:
            col = np.zeros((m, 1))
            col[i, 0] = 1.0 if b1[i] >= 0 else -1.0
            basis[i] = n_real + len(art_cols)
            art_cols.append(col)
    n_art = len(art_cols)
    if n_art:
        a2 = np.hstack([a2] + art_cols)
        u = np.concatenate([u, np.full(n_art, np.inf)])
    n_total = a2.shape[1]

    if max_iters is None:
        max_iters = max(5000, 60 * (m + n_total))

    state = _SimplexState(a2=a2, b=b1, u=u, basis=basis, n_total=n_total, m=m)
    state.refresh()

    feas_tol = FEASIBILITY_TOL * (1.0 + float(np.max(np.abs(b1), initial=0.0)))
    if n_art:
        c1 = np.zeros(n_total)
        c1[n_real:] = 1.0
        _run(state, c1, allowed_up_to=n_total, max_iters=max_iters, tol=tol,
             phase=1)
        if state.objective(c1) > feas_tol:
            raise LpInfeasibleError(
                f"infeasible (phase-1 residual {state.objective(c1):.3e})")
        _drive_out_artificials(state, n_real)
        state.u[n_real:] = 0.0  # artificials are fixed at zero from here on

    c2 = np.concatenate([problem.c, np.zeros(n_total - n)])
    _run(state, c2, allowed_up_to=n_real, max_iters=max_iters, tol=tol, phase=2)

    y = state.values()
    x = finite_lo + y[:n]
    x = np.clip(x, lower, upper)  # shave solver-tolerance dust off the bounds
    resid = problem.a @ x - problem.b
    for i, r in enumerate(problem.rel):
        ok = (abs(resid[i]) <= feas_tol if r == "=" else
              resid[i] <= feas_tol if r == "<=" else resid[i] >= -feas_tol)
        if not ok:
            raise LpError(f"solution violates row {i} by {resid[i]:.3e}")
    return LpSolution(x=x, objective=float(problem.c @ x),
                      iterations=state.iterations)


@dataclass
class _SimplexState:
    a2: np.ndarray
    b: np.ndarray
    u: np.ndarray
    basis: np.ndarray
    n_total: int
    m: int
    binv: np.ndarray = None
    xb: np.ndarray = None
    at_upper: np.ndarray = None
    in_basis: np.ndarray = None
    iterations: int = 0
    pivots_since_refresh: int = 0
    bland: bool = False
    degenerate_run: int = 0

    def refresh(self):
        """(Re)compute the basis inverse and basic values from scratch."""
        if self.at_upper is None:
            self.at_upper = np.zeros(self.n_total, dtype=bool)
        self.in_basis = np.zeros(self.n_total, dtype=bool)
        self.in_basis[self.basis] = True
        self.binv = np.linalg.inv(self.a2[:, self.basis])
        self.xb = self.binv @ self._rhs_effective()
        self.pivots_since_refresh = 0

    def _rhs_effective(self):
        nb_up = self.at_upper & ~self.in_basis
        if np.any(nb_up):
            return self.b - self.a2[:, nb_up] @ self.u[nb_up]
        return self.b.copy()

    def values(self):
        y = np.zeros(self.n_total)
        nb_up = self.at_upper & ~self.in_basis
        y[nb_up] = self.u[nb_up]
        y[self.basis] = self.xb
        return y

    def objective(self, c):
        return float(c @ self.values())


def _run(state, c, allowed_up_to, max_iters, tol, phase):
    """Pivot until optimal for cost vector c. Mutates state in place."""
    a2, u = state.a2, state.u
    while True:
        if state.iterations >= max_iters:
            raise LpIterationLimitError(
                f"iteration limit {max_iters} exceeded in phase {phase}",
                basis=state.basis.copy(), x=state.values())
        dual = c[state.basis] @ state.binv
        d = c - dual @ a2
        movable = ~state.in_basis & (u > 0)
        movable[allowed_up_to:] = False
        cand = movable & ((~state.at_upper & (d < -tol)) | (state.at_upper & (d > tol)))
        if not np.any(cand):
            return
        idxs = np.flatnonzero(cand)
        if state.bland:
            j = int(idxs[0])
        else:
            j = int(idxs[np.argmax(np.abs(d[idxs]))])
        sigma = -1.0 if state.at_upper[j] else 1.0
        alpha = state.binv @ a2[:, j]
        delta = sigma * alpha  # basic values move by -t * delta

        # ratio test: keep basics in [0, u_B], entering within [0, u_j]
        t_best = u[j] if np.isfinite(u[j]) else np.inf
        leave_row = -1
        leave_to_upper = False
        ub = u[state.basis]
        for i in range(state.m):
            di = delta[i]
            if di > PIVOT_TOL:
                t_i = state.xb[i] / di
                hit_upper = False
            elif di < -PIVOT_TOL and np.isfinite(ub[i]):
                t_i = (ub[i] - state.xb[i]) / (-di)
                hit_upper = True
            else:
                continue
            if t_i < -1e-12:
                t_i = 0.0
            if (t_i < t_best - PIVOT_TOL
                    or (t_i < t_best + PIVOT_TOL and leave_row >= 0
                        and state.basis[i] < state.basis[leave_row])):
                t_best = t_i
                leave_row = i
                leave_to_upper = hit_upper
        if not np.isfinite(t_best):
            raise LpUnboundedError(f"unbounded in phase {phase}")

        t = max(t_best, 0.0)
        state.iterations += 1
        if t <= DEGENERATE_STEP_TOL:
            state.degenerate_run += 1
            if state.degenerate_run >= BLAND_AFTER_DEGENERATE:
                state.bland = True
        else:
            state.degenerate_run = 0

        if leave_row < 0:
            # entering variable flips to its opposite bound; basis unchanged
            state.xb -= t * delta
            state.at_upper[j] = ~state.at_upper[j]
            continue

        state.xb -= t * delta
        enter_val = (u[j] - t) if state.at_upper[j] else t
        leaving = state.basis[leave_row]
        state.in_basis[leaving] = False
        state.at_upper[leaving] = leave_to_upper
        state.basis[leave_row] = j
        state.in_basis[j] = True
        state.xb[leave_row] = enter_val

        piv = alpha[leave_row]
        new_row = state.binv[leave_row] / piv
        state.binv -= np.outer(alpha, new_row)
        state.binv[leave_row] = new_row
        state.pivots_since_refresh += 1
        if state.pivots_since_refresh >= REFRESH_EVERY:
            state.refresh()


def _drive_out_artificials(state, n_real):
    """Pivot basic artificials (value 0) out where a real column can replace
    them; rows with no real pivot are redundant and keep a fixed artificial.
    The pivots do not move any variable, so the final refresh restores
    exact basic values for the unchanged solution."""
    changed = False
    for row in range(state.m):
        if state.basis[row] < n_real:
            continue
        alpha_row = state.binv[row] @ state.a2[:, :n_real]
        alpha_row[state.in_basis[:n_real]] = 0.0
        cands = np.flatnonzero(np.abs(alpha_row) > 1e-7)
        if cands.size == 0:
            continue
        j = int(cands[0])
        alpha = state.binv @ state.a2[:, j]
        leaving = state.basis[row]
        state.in_basis[leaving] = False
        state.at_upper[leaving] = False
        state.basis[row] = j
        state.in_basis[j] = True
        state.at_upper[j] = False
        piv = alpha[row]
        new_row = state.binv[row] / piv
        state.binv -= np.outer(alpha, new_row)
        state.binv[row] = new_row
        changed = True
    if changed:
        state.refresh()


def lp_to_text(problem, name="lp"):
    """Render in LP interchange text format (readable by external solvers)."""
    names = problem.var_names or [f"x{i}" for i in range(problem.n_vars)]

    def term(coef, var, lead):
        if coef == 0:
            return ""
        sign = "-" if coef < 0 else ("" if lead else "+")
        mag = abs(coef)
        return f" {sign} {mag!r} {var}" if not lead else f" {sign}{mag!r} {var}"

    lines = [f"\\ {name}", "Minimize", " obj:"]
    parts, lead = [], True
    for j, cj in enumerate(problem.c):
        t = term(float(cj), names[j], lead)
        if t:
            parts.append(t)
            lead = False
    lines[-1] += "".join(parts) if parts else " 0 " + names[0]
    lines.append("Subject To")
    rel_map = {"<=": "<=", ">=": ">=", "=": "="}
    for i in range(problem.n_rows):
        row, lead = [], True
        for j in np.flatnonzero(problem.a[i]):
            row.append(term(float(problem.a[i, j]), names[j], lead))
            lead = False
        body = "".join(row) if row else " 0 " + names[0]
        lines.append(f" c{i}:{body} {rel_map[problem.rel[i]]} {float(problem.b[i])!r}")
    lines.append("Bounds")
    for j, nm in enumerate(names):
        lo, hi = float(problem.lower[j]), float(problem.upper[j])
        if np.isinf(hi):
            if lo != 0.0:
                lines.append(f" {nm} >= {lo!r}")
        else:
            lines.append(f" {lo!r} <= {nm} <= {hi!r}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def dump_lp(problem, path, name="lp"):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(lp_to_text(problem, name=name))

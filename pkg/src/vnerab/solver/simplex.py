"""Bounded-variable primal simplex (revised form).

Every row gets a slack column so that rows read ``A x + s = b`` with the
row sense carried by the slack bounds. Rows whose slack cannot absorb the
initial residual get an artificial column and a phase-1 objective. The basis
is kept as a sparse LU factorization followed by a file of eta columns, and
refactored from scratch at a fixed interval.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

OPTIMAL, INFEASIBLE, UNBOUNDED, NUMERICAL = "optimal", "infeasible", "unbounded", "numerical"

_PIVOT_TOL = 1e-7
_STRICT_PIVOT_TOL = 1e-5
_REFACTOR_EVERY = 40
_DEGENERATE_BUDGET = 5000  # Dantzig stalls rarely; Bland is a last resort
_ZERO_STEP = 1e-11


@dataclass
class LpSolution:
    status: str
    objective: float = math.nan
    x: np.ndarray | None = None
    iterations: int = 0
    seconds: float = 0.0


@dataclass
class LpParams:
    tol: float = 1e-7
    max_iterations: int | None = None


class StandardForm:
    """Arrays of a :class:`~vnerab.model.MilpModel` prepared for repeated LP solves."""

    def __init__(self, model):
        self.model = model
        self.A = model.matrix.tocsc()
        self.AT = self.A.T.tocsr()
        self.m, self.n = self.A.shape
        self.b = model.rhs.copy()
        # internal problem is a minimization
        self.c = -model.cost if model.sense == "max" else model.cost.copy()
        self.sign = -1.0 if model.sense == "max" else 1.0
        m = self.m
        self.slack_lb = np.zeros(m)
        self.slack_ub = np.zeros(m)
        for k, s in enumerate(model.senses):
            if s == "<=":
                self.slack_ub[k] = np.inf
            elif s == ">=":
                self.slack_lb[k] = -np.inf
            elif s != "=":
                raise ValueError(f"unknown row sense {s!r}")
        self.lower = model.lower.copy()
        self.upper = model.upper.copy()
        self.scale = 1.0 + (float(np.max(np.abs(self.b))) if m else 0.0)

    def column(self, j: int, sigma: np.ndarray) -> np.ndarray:
        m, n = self.m, self.n
        out = np.zeros(m)
        if j < n:
            lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
            out[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        elif j < n + m:
            out[j - n] = 1.0
        else:
            out[j - n - m] = sigma[j - n - m]
        return out


def solve_lp(model_or_form, params: LpParams | None = None, lower=None, upper=None) -> LpSolution:
    """Solve the continuous relaxation, optionally under overridden column bounds."""
    params = params or LpParams()
    form = model_or_form if isinstance(model_or_form, StandardForm) else StandardForm(model_or_form)
    lo = form.lower if lower is None else np.asarray(lower, dtype=float)
    hi = form.upper if upper is None else np.asarray(upper, dtype=float)
    t0 = time.perf_counter()
    first = _Simplex(form, lo, hi, params)
    sol = first.run()
    if sol.status == NUMERICAL:
        retry = _Simplex(form, lo, hi, params)
        retry.pivot_tol = _STRICT_PIVOT_TOL
        sol = retry.run()
        sol.iterations += first.iterations
    sol.seconds = time.perf_counter() - t0
    return sol


class _Simplex:
    def __init__(self, form: StandardForm, lo, hi, params: LpParams):
        self.f = form
        self.tol = params.tol
        m, n = form.m, form.n
        self.max_iter = params.max_iterations or (50 * (m + n) + 1000)
        N = n + 2 * m
        self.N = N
        self.lb = np.empty(N)
        self.ub = np.empty(N)
        self.lb[:n], self.ub[:n] = lo, hi
        self.lb[n:n + m], self.ub[n:n + m] = form.slack_lb, form.slack_ub
        self.lb[n + m:] = 0.0
        self.ub[n + m:] = 0.0
        self.iterations = 0
        self.pivot_tol = _PIVOT_TOL

    # -- setup -------------------------------------------------------------
    def _start(self) -> bool:
        f, m, n = self.f, self.f.m, self.f.n
        lb, ub = self.lb, self.ub
        if np.any(lb[:n] > ub[:n] + self.tol):
            return False
        x = np.zeros(self.N)
        state = np.zeros(self.N, dtype=np.int8)  # 0 at lower, 1 at upper, 2 free at zero
        fin_lo, fin_hi = np.isfinite(lb[:n]), np.isfinite(ub[:n])
        x[:n] = np.where(fin_lo, lb[:n], np.where(fin_hi, ub[:n], 0.0))
        state[:n] = np.where(fin_lo, 0, np.where(fin_hi, 1, 2))
        resid = f.b - f.A @ x[:n]
        s = np.clip(resid, lb[n:n + m], ub[n:n + m])
        gap = resid - s
        need = np.abs(gap) > self.tol
        self.sigma = np.where(gap < 0, -1.0, 1.0)
        x[n:n + m] = s
        # nonbasic slacks sit on whichever bound clipped them
        state[n:n + m] = np.where(s >= ub[n:n + m], 1, 0)
        art = n + m + np.arange(m)
        x[art] = np.where(need, np.abs(gap), 0.0)
        self.ub[art] = np.where(need, np.inf, 0.0)
        self.basis = np.where(need, art, n + np.arange(m))
        self.is_basic = np.zeros(self.N, dtype=bool)
        self.is_basic[self.basis] = True
        self.full = sp.hstack([f.A, sp.identity(m), sp.diags(self.sigma)], format="csc")
        self.lu = None
        self.etas: list = []
        self.x, self.state = x, state
        self.phase_one = bool(need.any())
        self.movable = self.ub - self.lb > self.tol
        self.cost = np.zeros(self.N)
        if self.phase_one:
            self.cost[art[need]] = 1.0
        else:
            self.cost[:n] = f.c
        return True

    # -- linear algebra ----------------------------------------------------
    def _refactor(self) -> bool:
        f, m, n = self.f, self.f.m, self.f.n
        if m == 0:
            return True
        try:
            self.lu = splu(self.full[:, self.basis].tocsc())
        except RuntimeError:  # exactly singular
            return False
        self.etas = []
        x = self.x.copy()
        x[self.basis] = 0.0
        resid = f.b - f.A @ x[:n] - x[n:n + m] - self.sigma * x[n + m:]
        xb = self._ftran(resid)
        if not np.all(np.isfinite(xb)):
            return False
        self.x[self.basis] = xb
        return True

    def _ftran(self, a: np.ndarray) -> np.ndarray:
        """B^-1 a."""
        v = self.lu.solve(a) if self.lu is not None else a.copy()
        for r, idx, vals, piv in self.etas:
            vr = v[r] / piv
            if vr != 0.0:
                v[idx] -= vals * vr
            v[r] = vr
        return v

    def _btran(self, c: np.ndarray) -> np.ndarray:
        """B^-T c."""
        w = c.copy()
        for r, idx, vals, piv in reversed(self.etas):
            w[r] = (w[r] - vals @ w[idx]) / piv
        return self.lu.solve(w, trans="T") if self.lu is not None else w

    def _reduced_costs(self) -> np.ndarray:
        f, m, n = self.f, self.f.m, self.f.n
        y = self._btran(self.cost[self.basis])
        d = self.cost.copy()
        d[:n] -= f.AT @ y
        d[n:n + m] -= y
        d[n + m:] -= self.sigma * y
        d[self.basis] = 0.0
        return d

    def _entering(self, d, bland):
        tol = self.tol
        st = self.state
        score = np.where(st != 1, -d, 0.0)  # gain from increasing
        np.maximum(score, np.where(st != 0, d, 0.0), out=score)  # or from decreasing
        score[~self.movable] = 0.0
        if bland:
            cand = np.flatnonzero(score > tol)
            if cand.size == 0:
                return -1, 0
            q = int(cand[0])
        else:
            q = int(np.argmax(score))
            if score[q] <= tol:
                return -1, 0
        return q, (1 if (st[q] != 1 and d[q] < -tol) else -1)

    def _ratio(self, delta, bland):
        """Leaving row for x_B -= theta * delta; returns (row, theta) or (-1, inf)."""
        basis = self.basis
        ptol = self.pivot_tol * max(1.0, float(np.max(np.abs(delta))))
        rows = np.flatnonzero(np.abs(delta) > ptol)
        if rows.size == 0:
            return -1, math.inf
        dl = delta[rows]
        cols = basis[rows]
        xb = self.x[cols]
        # room to the bound each basic variable moves toward
        room = np.where(dl > 0, xb - self.lb[cols], self.ub[cols] - xb)
        adl = np.abs(dl)
        finite = np.isfinite(room)
        if not finite.any():
            return -1, math.inf
        rows, room, adl = rows[finite], room[finite], adl[finite]
        ratio = np.maximum(room, 0.0) / adl
        if bland:
            tmin = ratio.min()
            ties = np.flatnonzero(ratio <= tmin + 1e-12)
            k = ties[np.argmin(basis[rows[ties]])]
            return int(rows[k]), float(tmin)
        # Harris two-pass: relaxed bound first, then the largest pivot within it
        cap = ((room + self.tol) / adl).min()
        cand = np.flatnonzero(ratio <= cap)
        if cand.size == 0:
            cand = np.array([int(np.argmin(ratio))])
        k = cand[np.argmax(adl[cand])]
        return int(rows[k]), float(ratio[k])

    # -- main loop -----------------------------------------------------------
    def run(self) -> LpSolution:
        f, m, n = self.f, self.f.m, self.f.n
        if not self._start():
            return LpSolution(INFEASIBLE)
        if not self._refactor():
            return LpSolution(NUMERICAL)
        since_refactor = 0
        degenerate = 0
        bland = False
        d = self._reduced_costs()
        while True:
            if self.iterations >= self.max_iter:
                return LpSolution(NUMERICAL, iterations=self.iterations)
            q, sgn = self._entering(d, bland)
            if q < 0:
                if since_refactor:
                    if not self._refactor():
                        return LpSolution(NUMERICAL, iterations=self.iterations)
                    since_refactor = 0
                    d = self._reduced_costs()
                    continue
                if self.phase_one:
                    art = n + m + np.arange(m)
                    infeas = float(np.sum(self.x[art]))
                    if infeas > self.tol * f.scale * 10:
                        return LpSolution(INFEASIBLE, iterations=self.iterations)
                    self.phase_one = False
                    self.ub[art] = 0.0
                    self.movable[art] = False
                    self.cost[:] = 0.0
                    self.cost[:n] = f.c
                    degenerate, bland = 0, False
                    d = self._reduced_costs()
                    continue
                return self._finish()

            alpha = self._ftran(f.column(q, self.sigma))
            delta = sgn * alpha
            r, theta = self._ratio(delta, bland)
            flip = self.ub[q] - self.lb[q]
            if r < 0 and not math.isfinite(flip):
                if self.phase_one:
                    return LpSolution(NUMERICAL, iterations=self.iterations)
                return LpSolution(UNBOUNDED, iterations=self.iterations)
            self.iterations += 1
            if flip <= theta:
                self.x[self.basis] -= flip * delta
                self.state[q] = 1 - self.state[q]
                self.x[q] = self.ub[q] if self.state[q] == 1 else self.lb[q]
                degenerate, bland = 0, False
                continue

            if theta > 0:
                self.x[self.basis] -= theta * delta
                self.x[q] += sgn * theta
            p = int(self.basis[r])
            if delta[r] > 0:
                self.x[p], self.state[p] = self.lb[p], 0
            else:
                self.x[p], self.state[p] = self.ub[p], 1
            nz = np.flatnonzero(alpha)
            idx = nz[nz != r]
            self.etas.append((r, idx, alpha[idx], float(alpha[r])))
            self.basis[r] = q
            self.is_basic[p] = False
            self.is_basic[q] = True
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                if not self._refactor():
                    return LpSolution(NUMERICAL, iterations=self.iterations)
                since_refactor = 0
            d = self._reduced_costs()
            if theta <= _ZERO_STEP:
                degenerate += 1
                if degenerate > _DEGENERATE_BUDGET:
                    bland = True
            else:
                degenerate, bland = 0, False

    def _finish(self) -> LpSolution:
        f, n = self.f, self.f.n
        x = self.x[:n].copy()
        lo, hi = self.lb[:n], self.ub[:n]
        slack = 10 * self.tol * f.scale
        if np.any(x < lo - slack) or np.any(x > hi + slack):
            return LpSolution(NUMERICAL, iterations=self.iterations)
        x = np.clip(x, lo, hi)
        if f.m:
            s = f.b - f.A @ x
            viol = np.maximum(np.maximum(f.slack_lb - s, s - f.slack_ub), 0.0)
            if np.any(viol > slack):
                return LpSolution(NUMERICAL, iterations=self.iterations)
        obj = float(f.model.cost @ x)
        return LpSolution(OPTIMAL, obj, x, self.iterations)

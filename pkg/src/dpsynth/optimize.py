"""Min-max density fitting on a reduced domain.

Solves
    minimize t  s.t.  |(A h)_j - b_j| <= t for all j,  h >= 0,  sum(h) = 1
with a dense primal simplex on the standard form (one slack pair per
statistic). Any point mass on the reduced domain is feasible, so the solve
starts from that vertex and needs no phase-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, FiniteDensity, QueryFamily

PIVOT_TOL = 1e-9
OPTIMALITY_GAP = 1e-7
WEIGHT_CLAMP = 1e-12
# Consecutive degenerate pivots tolerated before switching to Bland's rule.
DEGENERACY_TRIP = 40


@dataclass(frozen=True)
class FitProblem:
    """Dense fitting instance: values[j][i] = f_j(z_i) on merged support points."""

    values: np.ndarray
    targets: np.ndarray
    support: Dataset

    def __post_init__(self):
        a = np.array(self.values, dtype=float, copy=True)
        b = np.array(self.targets, dtype=float, copy=True)
        if a.ndim != 2:
            raise ValueError("values must be a 2-D array")
        if b.ndim != 1 or len(b) != a.shape[0]:
            raise ValueError("need one target per function row")
        if a.shape[1] != len(self.support):
            raise ValueError("need one column per support point")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("problem must have at least one function and one point")
        if not np.isfinite(a).all() or not np.isfinite(b).all():
            raise ValueError("values and targets must be finite")
        if (np.abs(a) > 1.0 + PIVOT_TOL).any():
            raise ValueError("function values must lie in [-1, 1]")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "values", a)
        object.__setattr__(self, "targets", b)


@dataclass(frozen=True)
class FitSolution:
    density: FiniteDensity
    objective: float
    iterations: int
    status: str  # "optimal" or "iteration-limit"


def build_lp(
    queries: QueryFamily, reduced_domain: Dataset, noisy_targets
) -> FitProblem:
    """Assemble the fitting instance; duplicate domain points share one variable."""
    if len(reduced_domain) == 0:
        raise ValueError("empty reduced domain")
    targets = np.asarray(noisy_targets, dtype=float)
    if targets.ndim != 1 or len(targets) != len(queries):
        raise ValueError("need exactly one target per family function")
    queries.check_schema(reduced_domain.schema)
    uniq, first_idx = np.unique(reduced_domain.rows, axis=0, return_index=True)
    support_rows = uniq[np.argsort(first_idx)]
    support = Dataset(reduced_domain.schema, support_rows)
    return FitProblem(
        values=queries.values_matrix(support.rows),
        targets=targets,
        support=support,
    )


def solve_min_max(
    problem: FitProblem,
    tolerance: float = OPTIMALITY_GAP,
    max_iterations: int | None = None,
) -> FitSolution:
    """Global minimizer of the worst absolute residual over densities.

    Deterministic: identical problems give bit-identical solutions. Entering
    columns take the most negative reduced cost (lowest index on ties) until a
    run of degenerate pivots trips Bland's rule. On hitting the iteration
    limit the current (still feasible) iterate is returned with status
    "iteration-limit".
    """
    a = problem.values
    b = problem.targets
    nf, m = a.shape
    n_rows = 2 * nf + 1
    n_cols = m + 1 + 2 * nf  # h variables, t, upper slacks, lower slacks
    t_col = m
    if max_iterations is None:
        max_iterations = 5000 + 10 * n_rows

    cons = np.zeros((n_rows, n_cols))
    rhs = np.zeros(n_rows)
    cons[:nf, :m] = a
    cons[:nf, t_col] = -1.0
    cons[:nf, m + 1 : m + 1 + nf] = np.eye(nf)
    rhs[:nf] = b
    cons[nf : 2 * nf, :m] = -a
    cons[nf : 2 * nf, t_col] = -1.0
    cons[nf : 2 * nf, m + 1 + nf :] = np.eye(nf)
    rhs[nf : 2 * nf] = -b
    cons[2 * nf, :m] = 1.0
    rhs[2 * nf] = 1.0

    # Feasible starting vertex: all mass on the first support point. The slack
    # of the row with the largest residual leaves the basis (t replaces it).
    resid = a[:, 0] - b
    j_star = int(np.argmax(np.abs(resid)))
    basis = [0, t_col]
    for j in range(nf):
        if not (j == j_star and resid[j_star] >= 0):
            basis.append(m + 1 + j)
    for j in range(nf):
        if not (j == j_star and resid[j_star] < 0):
            basis.append(m + 1 + nf + j)
    basis = np.array(basis, dtype=np.int64)

    tab = np.zeros((n_rows + 1, n_cols + 1))
    tab[:n_rows, :n_cols] = np.linalg.solve(cons[:, basis], cons)
    tab[:n_rows, -1] = np.linalg.solve(cons[:, basis], rhs)
    np.maximum(tab[:n_rows, -1], 0.0, out=tab[:n_rows, -1])

    cost = np.zeros(n_cols)
    cost[t_col] = 1.0
    cb = cost[basis]
    tab[-1, :n_cols] = cost - cb @ tab[:n_rows, :n_cols]
    tab[-1, -1] = -(cb @ tab[:n_rows, -1])

    iterations = 0
    degenerate_run = 0
    bland = False
    status = "optimal"
    while True:
        reduced = tab[-1, :n_cols]
        if bland:
            candidates = np.flatnonzero(reduced < -PIVOT_TOL)
            if candidates.size == 0:
                break
            q = int(candidates[0])
        else:
            q = int(np.argmin(reduced))
            if reduced[q] >= -PIVOT_TOL:
                break
        if iterations >= max_iterations:
            status = "iteration-limit"
            break
        col = tab[:n_rows, q]
        pos = col > PIVOT_TOL
        if not pos.any():
            raise RuntimeError("fit problem is unbounded; inputs are malformed")
        ratios = np.full(n_rows, np.inf)
        ratios[pos] = np.maximum(tab[:n_rows, -1][pos], 0.0) / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios == best)
        leave = int(ties[np.argmin(basis[ties])])
        if best <= 1e-12:
            degenerate_run += 1
            if degenerate_run > DEGENERACY_TRIP:
                bland = True
        else:
            degenerate_run = 0
        pivot = tab[leave, q]
        tab[leave] /= pivot
        factors = tab[:, q].copy()
        factors[leave] = 0.0
        tab -= np.outer(factors, tab[leave])
        basis[leave] = q
        iterations += 1

    x = np.zeros(n_cols)
    x[basis] = tab[:n_rows, -1]
    weights = x[:m].copy()
    if (weights < -1e-9).any():
        raise RuntimeError("solver produced negative weights beyond tolerance")
    np.clip(weights, 0.0, None, out=weights)
    weights /= weights.sum()
    objective = max(float(x[t_col]), 0.0)
    # Residual certificate against the original data; every simplex iterate is
    # feasible, so this only catches accumulated numerical drift.
    worst = float(np.max(np.abs(a @ weights - b)))
    if worst > objective + tolerance:
        raise RuntimeError(
            f"residual certificate failed: {worst:.3e} > {objective:.3e} + {tolerance:.1e}"
        )
    return FitSolution(
        density=FiniteDensity(problem.support, weights),
        objective=objective,
        iterations=iterations,
        status=status,
    )

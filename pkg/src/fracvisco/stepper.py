"""dG(0) time stepping for the viscoelastic equation of motion.

Piecewise-constant trial/test functions in time reduce each step to one SPD
solve for the velocity plus an explicit displacement update:

    [M + k_n (k_n - omega_nn) K] U2_n
        = M U2_{n-1} - (k_n - omega_nn) K U1_{n-1} + K H_n + k_n (Fbar_n + Gbar_n)
    U1_n = U1_{n-1} + k_n U2_n

with the memory term H_n = sum_{j<n} omega_nj U1_j.  M here is the
rho-weighted mass, so the density never appears explicitly.  The history sum
is recomputed every step (the weights depend on n): total cost is O(N^2)
history work plus N solves, with the factorization reused across steps that
share k_n and omega_nn (all of them, on uniform grids).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fem import AssembledSystem
from .solvers import SolverError, make_spd_solver
from .weights import TimeGrid, WeightTable

__all__ = ["SolutionHistory", "time_average_load", "advance", "run"]


@dataclass
class SolutionHistory:
    """Per-step displacement/velocity coefficients with probe bookkeeping.

    U1[n], U2[n] are full-size nodal vectors at t_n (constrained entries
    exactly zero); row 0 holds the initial data.
    """

    U1: np.ndarray
    U2: np.ndarray
    grid: TimeGrid
    probes: list = field(default_factory=list)  # vertex indices

    @property
    def times(self):
        return self.grid.nodes

    def probe_trace(self, vertex):
        """(N+1, 4) array with columns u1_x, u1_y, u2_x, u2_y at a vertex."""
        i = 2 * vertex
        return np.column_stack([self.U1[:, i], self.U1[:, i + 1],
                                self.U2[:, i], self.U2[:, i + 1]])


def time_average_load(sys: AssembledSystem, grid: TimeGrid, n):
    """Interval averages (Fbar_n, Gbar_n) by the midpoint rule (1-based n).

    Exact for loads constant in time; second order otherwise.
    """
    tm = grid.nodes[n - 1] + 0.5 * grid.steps[n - 1]
    return sys.volume_load(tm), sys.traction_vector(tm)


def advance(u1_prev_f, u2_prev_f, sys, table, n, hist_f, load_f, solver):
    """One dG(0) step on free dofs; returns (u1_f, u2_f) at step n."""
    k = table.grid.steps[n - 1]
    co = k - table.omega[n - 1, n - 1]
    rhs = (sys.Mff @ u2_prev_f - co * (sys.Kff @ u1_prev_f)
           + sys.Kff @ hist_f + k * load_f)
    u2 = solver.solve(rhs)
    return u1_prev_f + k * u2, u2


def run(sys: AssembledSystem, grid: TimeGrid, table: WeightTable, u0, v0,
        probes=(), solver="direct", rtol=1e-10):
    """Integrate the full history from initial data (u0, v0).

    u0 and v0 must satisfy the Dirichlet constraints.  ``probes`` is a list
    of vertex indices recorded in the returned history (the full coefficient
    history is kept regardless).
    """
    n_steps = grid.n_steps
    if table.n_steps < n_steps:
        raise ValueError(
            f"weight table covers {table.n_steps} steps, grid has {n_steps}")
    if not np.array_equal(table.grid.nodes[:n_steps + 1], grid.nodes):
        raise ValueError("weight table was built on a different grid")
    u0 = np.asarray(u0, dtype=np.float64)
    v0 = np.asarray(v0, dtype=np.float64)
    for name, vec in (("u0", u0), ("v0", v0)):
        if np.any(vec[sys.constrained_dofs] != 0.0):
            raise ValueError(f"{name} violates the Dirichlet constraints")
    nf = sys.free_dofs.size
    u1f = np.empty((n_steps + 1, nf))
    u2f = np.empty((n_steps + 1, nf))
    u1f[0] = sys.restrict(u0)
    u2f[0] = sys.restrict(v0)
    k = grid.steps
    solvers = {}
    for n in range(1, n_steps + 1):
        co = k[n - 1] - table.omega[n - 1, n - 1]
        key = (k[n - 1], co)
        if key not in solvers:
            mat = sys.Mff + (k[n - 1] * co) * sys.Kff
            solvers[key] = make_spd_solver(mat, method=solver, rtol=rtol)
        if n > 1:
            hist = table.omega[n - 1, :n - 1] @ u1f[1:n]
        else:
            hist = np.zeros(nf)
        fbar, gbar = time_average_load(sys, grid, n)
        load = sys.restrict(fbar + gbar)
        try:
            u1f[n], u2f[n] = advance(u1f[n - 1], u2f[n - 1], sys, table, n,
                                     hist, load, solvers[key])
        except SolverError as err:
            raise SolverError(f"step {n} failed: {err}",
                              residual=err.residual) from err
    return SolutionHistory(U1=sys.expand(u1f), U2=sys.expand(u2f),
                           grid=grid, probes=list(probes))

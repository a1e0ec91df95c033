"""Discrete energy bookkeeping for dG(0) histories.

For a run with loads f = g = 0 the scheme satisfies an exact balance: the
final stored energy plus three nonnegative dissipation sums equals the
initial energy,

    eta_N a(U1_N, U1_N) + |U2_N|_M^2
      + sum_n k_n { -d_n eta_n a(U1_{n-1}, U1_{n-1}) + k_n eta_n a(d_n U1_n, d_n U1_n) }
      + sum_{n>=2} sum_{j<n} omega_nj { d_n a(W_nj, W_nj) + k_n a(d_n W_nj, d_n W_nj) }
      + sum_{n=0}^{N-1} |U2_{n+1} - U2_n|_M^2
      = a(u0, u0) + |v0|_M^2         (+ load work, when loads are present)

with W_nj = U1_n - U1_j, d_n the backward difference, a(.,.) the stiffness
inner product and |.|_M^2 the rho-weighted mass inner product.  The balance
holds to solver-residual accuracy because eta_n is derived from the weight
row sums; it is asserted by tests only in the homogeneous case, with the
load work 2 sum_n k_n (Fbar_n + Gbar_n, U2_n) reported otherwise.

The memory double sum is also evaluated in a second, reordered form
(summation by parts in n) as an internal algebra check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fem import AssembledSystem
from .stepper import SolutionHistory, time_average_load
from .weights import WeightTable

__all__ = ["EnergyLedger", "energy_ledger", "long_time_limit", "TailReport"]


@dataclass
class EnergyLedger:
    """Every named term of the discrete energy balance, plus totals."""

    final_elastic: float        # eta_N a(U1_N, U1_N)
    final_kinetic: float        # |U2_N|_M^2
    eta_dissipation: float
    history_dissipation: float
    history_dissipation_alt: float  # reordered double sum, algebra check
    jump_dissipation: float
    initial_energy: float       # a(u0, u0) + |v0|_M^2
    load_work: float

    @property
    def lhs_total(self):
        return (self.final_elastic + self.final_kinetic + self.eta_dissipation
                + self.history_dissipation + self.jump_dissipation)

    @property
    def rhs_total(self):
        return self.initial_energy + self.load_work

    @property
    def residual_rel(self):
        scale = max(abs(self.rhs_total), abs(self.lhs_total), 1e-300)
        return abs(self.lhs_total - self.rhs_total) / scale

    def rows(self):
        return [
            ("final_elastic", self.final_elastic),
            ("final_kinetic", self.final_kinetic),
            ("eta_dissipation", self.eta_dissipation),
            ("history_dissipation", self.history_dissipation),
            ("history_dissipation_alt", self.history_dissipation_alt),
            ("jump_dissipation", self.jump_dissipation),
            ("lhs_total", self.lhs_total),
            ("initial_energy", self.initial_energy),
            ("load_work", self.load_work),
            ("rhs_total", self.rhs_total),
            ("residual_rel", self.residual_rel),
        ]

    def csv(self):
        lines = ["term,value"]
        lines += [f"{name},{value!r}" for name, value in self.rows()]
        return "\n".join(lines) + "\n"


def energy_ledger(history: SolutionHistory, sys: AssembledSystem,
                  table: WeightTable, u0=None, v0=None, with_loads=True):
    """Evaluate the balance terms on a computed history.

    The history must come from the same weight table (same grid and kernel);
    a grid mismatch raises.  u0/v0 default to the stored initial row.
    """
    grid = history.grid
    n = grid.n_steps
    if table.n_steps < n or not np.array_equal(
            table.grid.nodes[:n + 1], grid.nodes):
        raise ValueError("history grid does not match the weight table")
    k = grid.steps
    eta = table.eta_bar
    omega = table.omega
    u0 = history.U1[0] if u0 is None else np.asarray(u0)
    v0 = history.U2[0] if v0 is None else np.asarray(v0)

    u1f = sys.restrict(history.U1)            # (N+1, nf)
    u2f = sys.restrict(history.U2)
    ku = (sys.Kff @ u1f.T).T                  # K U1_n for all n
    gram = u1f @ ku.T                          # a(U1_i, U1_j)
    diag = np.diag(gram)

    final_elastic = eta[n] * diag[n]
    mu2 = (sys.Mff @ u2f.T).T
    final_kinetic = float(u2f[n] @ mu2[n])

    deta = np.diff(eta) / k
    du_sq = np.array([
        (diag[i] - 2.0 * gram[i, i - 1] + diag[i - 1]) / k[i - 1] ** 2
        for i in range(1, n + 1)])
    eta_diss = float(np.sum(k * (-deta) * diag[:-1])
                     + np.sum(k ** 2 * eta[1:] * du_sq))

    # |W_nj|^2 = a(U1_n - U1_j, U1_n - U1_j) from the Gram matrix
    wsq = diag[:, None] + diag[None, :] - 2.0 * gram

    hist_diss = 0.0
    for row in range(2, n + 1):
        j = np.arange(1, row)
        om = omega[row - 1, :row - 1]
        dw = (wsq[row, j] - wsq[row - 1, j]) / k[row - 1]
        hist_diss += float(om @ (dw + k[row - 1] * du_sq[row - 1]))

    # reordered form: sum_j k_j beta_Nj |W_Nj|^2
    #                 - sum_j k_j sum_{n=j+1}^N k_n |W_{n-1,j}|^2 d_n beta_nj
    bmat = table.beta_cell_averages()[:n, :n]
    alt = 0.0
    for j in range(1, n):
        alt += k[j - 1] * bmat[n - 1, j - 1] * wsq[n, j]
        rows = np.arange(j + 1, n + 1)
        dbeta = (bmat[rows - 1, j - 1] - bmat[rows - 2, j - 1]) / k[rows - 1]
        alt -= k[j - 1] * float(np.sum(k[rows - 1] * wsq[rows - 1, j] * dbeta))
    ksq_term = 0.0
    for row in range(2, n + 1):
        ksq_term += float(omega[row - 1, :row - 1].sum()
                          * k[row - 1] * du_sq[row - 1])
    hist_diss_alt = alt + ksq_term

    jumps = np.diff(u2f, axis=0)
    jump_diss = float(np.einsum("ni,ni->", jumps, (sys.Mff @ jumps.T).T))

    ku0 = sys.K @ u0
    mv0 = sys.M @ v0
    initial = float(u0 @ ku0 + v0 @ mv0)

    load_work = 0.0
    if with_loads and (sys.volume is not None or sys.traction is not None):
        for step in range(1, n + 1):
            fbar, gbar = time_average_load(sys, grid, step)
            load_work += 2.0 * k[step - 1] * float(
                sys.restrict(fbar + gbar) @ u2f[step])

    return EnergyLedger(final_elastic=float(final_elastic),
                        final_kinetic=float(final_kinetic),
                        eta_dissipation=float(eta_diss),
                        history_dissipation=float(hist_diss),
                        history_dissipation_alt=float(hist_diss_alt),
                        jump_dissipation=float(jump_diss),
                        initial_energy=float(initial),
                        load_work=float(load_work))


@dataclass
class TailReport:
    tail_mean: float
    reference: float
    rel_gap: float
    settled: bool
    halves_gap: float

    @property
    def ok(self):
        return self.settled


def long_time_limit(history: SolutionHistory, vertex, component=1,
                    reference=None, settle_tol=0.05):
    """Mean of a probe trace over the final quarter of the run.

    Returns the tail mean and its relative gap to ``reference`` (typically
    the relaxed static solve).  If the first and second halves of the tail
    window disagree by more than ``settle_tol`` (relative), the run is
    flagged unsettled and a warning is emitted.
    """
    t = history.times
    vals = history.U1[:, 2 * vertex + component]
    t_cut = t[-1] * 0.75
    sel = t >= t_cut
    if np.count_nonzero(sel) < 4:
        raise ValueError("tail window has too few samples")
    tail_t = t[sel]
    tail_v = vals[sel]
    tail_mean = float(np.trapezoid(tail_v, tail_t) / (tail_t[-1] - tail_t[0]))
    mid = tail_t[0] + 0.5 * (tail_t[-1] - tail_t[0])
    first = tail_t <= mid
    m1 = float(np.trapezoid(tail_v[first], tail_t[first])
               / max(tail_t[first][-1] - tail_t[first][0], 1e-300))
    second = tail_t >= mid
    m2 = float(np.trapezoid(tail_v[second], tail_t[second])
               / max(tail_t[second][-1] - tail_t[second][0], 1e-300))
    scale = max(abs(tail_mean), 1e-300)
    halves_gap = abs(m1 - m2) / scale
    settled = halves_gap <= settle_tol
    if not settled:
        warnings.warn(
            f"tail not settled: halves differ by {halves_gap:.1%} "
            "(run longer)", stacklevel=2)
    if reference is None:
        rel_gap = float("nan")
    elif reference == 0.0:
        rel_gap = abs(tail_mean)
    else:
        rel_gap = abs(tail_mean - reference) / abs(reference)
    return TailReport(tail_mean=tail_mean, reference=float(reference)
                      if reference is not None else float("nan"),
                      rel_gap=float(rel_gap), settled=settled,
                      halves_gap=float(halves_gap))

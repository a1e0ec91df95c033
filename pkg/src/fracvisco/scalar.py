"""Single-mode model rho*u'' + kappa*u - kappa*int beta(t-s) u(s) ds = f(t).

Two deliberately different discretizations live here:

* ``scalar_dg0`` is the same piecewise-constant-in-time scheme as the finite
  element stepper, written as an independent plain loop (no shared stepping
  code) so the two can cross-check each other on a one-unknown system.

* ``scalar_reference`` is a second-order scheme from a different family:
  Crank-Nicolson for the motion, product integration for the memory term
  (the kernel integrated exactly against the piecewise-linear interpolant of
  u, using the closed-form primitives B and C for the moments), on a grid
  with a quadratically graded startup section that resolves the weak kernel
  singularity.  A Richardson pair at 2x and 4x the step confirms its error
  estimate; ``convergence_study`` measures observed orders of the dG(0)
  scheme against it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._kernels import cn_sweep
from .mlf import KernelParams, beta_double_primitive, beta_primitive
from .weights import TimeGrid, WeightTable, build_weights

__all__ = [
    "ScalarModel",
    "ScalarTrace",
    "ReferenceTrace",
    "scalar_dg0",
    "scalar_reference",
    "convergence_study",
    "self_convergence_study",
]


@dataclass(frozen=True)
class ScalarModel:
    rho: float
    kappa: float
    kernel: KernelParams
    forcing: object = None      # f(t) -> float, or None for f = 0
    u0: float = 0.0
    v0: float = 0.0

    def __post_init__(self):
        if not (self.rho > 0.0 and self.kappa > 0.0):
            raise ValueError("rho and kappa must be positive")

    def f(self, t):
        if self.forcing is None:
            return np.zeros_like(np.asarray(t, dtype=np.float64))
        return np.asarray(self.forcing(t), dtype=np.float64)


@dataclass
class ScalarTrace:
    times: np.ndarray
    u1: np.ndarray
    u2: np.ndarray


@dataclass
class ReferenceTrace:
    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    k_ref: float
    est_error: float
    richardson_order: float
    richardson_ok: bool = True

    def at_final(self):
        return float(self.u[-1])


def scalar_dg0(model: ScalarModel, grid: TimeGrid, table: WeightTable = None):
    """dG(0) trajectory of the scalar model; one scalar solve per step."""
    if table is None:
        table = build_weights(grid, model.kernel)
    n_steps = grid.n_steps
    k = grid.steps
    u1 = np.empty(n_steps + 1)
    u2 = np.empty(n_steps + 1)
    u1[0], u2[0] = model.u0, model.v0
    rho, kappa = model.rho, model.kappa
    omega = table.omega
    for n in range(1, n_steps + 1):
        kn = k[n - 1]
        co = kn - omega[n - 1, n - 1]
        hist = float(omega[n - 1, :n - 1] @ u1[1:n]) if n > 1 else 0.0
        fbar = float(model.f(grid.nodes[n - 1] + 0.5 * kn))
        denom = rho + kn * co * kappa
        u2[n] = (rho * u2[n - 1] - co * kappa * u1[n - 1]
                 + kappa * hist + kn * fbar) / denom
        u1[n] = u1[n - 1] + kn * u2[n]
    return ScalarTrace(times=grid.nodes.copy(), u1=u1, u2=u2)


def _graded_nodes(t_g, m_g):
    i = np.arange(m_g + 1, dtype=np.float64)
    return t_g * (i / m_g) ** 2


def _pl_weights(p, target, s_lo, s_hi):
    """Product weights of (u_lo, u_hi) for one interval [s_lo, s_hi] seen
    from time ``target``: the kernel integrated exactly against the linear
    interpolant, via the primitives B and C."""
    a = target - s_hi
    b = target - s_lo
    h = s_hi - s_lo
    ba, bb = beta_primitive(p, a), beta_primitive(p, b)
    ca, cb = beta_double_primitive(p, a), beta_double_primitive(p, b)
    w_lo = (h * bb - (cb - ca)) / h
    w_hi = ((cb - ca) - h * ba) / h
    return w_lo, w_hi


def _cn_step(u, v, ivals, fvals, m, h, hist, q1, rho, kappa):
    # one Crank-Nicolson step with the implicit memory weight q1 on u_{m+1}
    fm = fvals[m] - kappa * u[m] + kappa * ivals[m]
    ut = u[m] + 0.5 * h * v[m]
    denom = rho + 0.25 * h * h * kappa * (1.0 - q1)
    v[m + 1] = (rho * v[m] + 0.5 * h * (fm + fvals[m + 1] + kappa * hist)
                + 0.5 * h * kappa * (q1 - 1.0) * ut) / denom
    u[m + 1] = ut + 0.5 * h * v[m + 1]
    ivals[m + 1] = hist + q1 * u[m + 1]


def _reference_sweep(model, t_final, k_ref, m_g, startup_steps, impl=None):
    p = model.kernel
    rho, kappa = model.rho, model.kappa
    t_g = startup_steps * k_ref
    if t_g >= 0.5 * t_final:
        t_g = 0.5 * t_final
    m_u = int(round((t_final - t_g) / k_ref))
    graded = _graded_nodes(t_g, m_g)
    nodes = np.concatenate([graded, t_g + k_ref * np.arange(1, m_u + 1)])
    M = nodes.size - 1
    u = np.zeros(M + 1)
    v = np.zeros(M + 1)
    ivals = np.zeros(M + 1)
    u[0], v[0] = model.u0, model.v0
    fvals = model.f(nodes)

    if p.gamma == 0.0:
        # pure elastic limit: all memory weights vanish
        pg = np.zeros(M + 1)
        qg = np.zeros(M + 1)
        agr = np.zeros(M + 1)
        for m in range(m_g):
            h = nodes[m + 1] - nodes[m]
            _cn_step(u, v, ivals, fvals, m, h, 0.0, 0.0, rho, kappa)
        cn_sweep(u, v, ivals, fvals, agr, pg, qg, k_ref, rho, kappa, m_g,
                 impl=impl)
        return nodes, u, v

    # graded startup: direct double loop, per-pair product weights
    for m in range(m_g):
        target = nodes[m + 1]
        h = nodes[m + 1] - nodes[m]
        hist = 0.0
        for i in range(m + 1):
            w_lo, w_hi = _pl_weights(p, target, nodes[i], nodes[i + 1])
            hist += u[i] * w_lo
            if i < m:
                hist += u[i + 1] * w_hi
            else:
                q1 = w_hi
        _cn_step(u, v, ivals, fvals, m, h, hist, q1, rho, kappa)

    # uniform continuation: lag-indexed weights plus the frozen graded part
    d = np.arange(M - m_g + 1, dtype=np.float64)
    bu = beta_primitive(p, d * k_ref)
    cu = beta_double_primitive(p, d * k_ref)
    pw = np.zeros(M - m_g + 1)
    qw = np.zeros(M - m_g + 1)
    pw[1:] = (k_ref * bu[1:] - (cu[1:] - cu[:-1])) / k_ref
    qw[1:] = ((cu[1:] - cu[:-1]) - k_ref * bu[:-1]) / k_ref

    agr = np.zeros(M + 1)
    if m_g > 0:
        targets = nodes[m_g + 1:]
        lag_hi = targets[None, :] - graded[:-1, None]   # (m_g, M - m_g)
        lag_lo = targets[None, :] - graded[1:, None]
        bb = beta_primitive(p, lag_hi)
        ba = beta_primitive(p, lag_lo)
        cb = beta_double_primitive(p, lag_hi)
        ca = beta_double_primitive(p, lag_lo)
        h_i = np.diff(graded)[:, None]
        w_lo = (h_i * bb - (cb - ca)) / h_i
        w_hi = ((cb - ca) - h_i * ba) / h_i
        agr[m_g + 1:] = u[:m_g] @ w_lo + u[1:m_g + 1] @ w_hi
    cn_sweep(u, v, ivals, fvals, agr, pw, qw, k_ref, rho, kappa, m_g,
             impl=impl)
    return nodes, u, v


def scalar_reference(model: ScalarModel, t_final, k_ref, m_g=64,
                     startup_steps=32, impl=None):
    """High-accuracy reference trajectory with a Richardson error estimate.

    Runs the product-integration/Crank-Nicolson scheme at steps k_ref, 2k_ref
    and 4k_ref; the pairwise final-value differences give an error estimate
    and an observed order.  An estimate above 1e-6, or an order far from 2,
    is flagged (richardson_ok False) and warned about, never silently hidden.
    """
    if not t_final > 0.0:
        raise ValueError("t_final must be positive")
    nodes, u, v = _reference_sweep(model, t_final, k_ref, m_g, startup_steps,
                                   impl=impl)
    _, u2, _ = _reference_sweep(model, t_final, 2.0 * k_ref, m_g,
                                startup_steps // 2, impl=impl)
    _, u4, _ = _reference_sweep(model, t_final, 4.0 * k_ref, m_g,
                                max(startup_steps // 4, 1), impl=impl)
    d12 = abs(u[-1] - u2[-1])
    d24 = abs(u2[-1] - u4[-1])
    est = d12 / 3.0
    order = np.log2(d24 / d12) if (d12 > 0.0 and d24 > 0.0) else np.nan
    scale = max(abs(u[-1]), 1.0)
    ok = bool(est <= 1e-6 * scale and (np.isnan(order) or 1.5 < order < 2.6))
    if not ok:
        warnings.warn(
            f"reference self-check: est_error={est:.2e}, order={order:.2f}",
            stacklevel=2)
    return ReferenceTrace(times=nodes, u=u, v=v, k_ref=k_ref,
                          est_error=float(est),
                          richardson_order=float(order), richardson_ok=ok)


@dataclass
class ConvergenceRow:
    k: float
    error: float
    order: float  # NaN on the first row or for vanishing errors


@dataclass
class ConvergenceStudy:
    rows: list
    reference_value: float
    degenerate: bool = False    # all errors zero (e.g. zero data)

    def orders(self):
        return [r.order for r in self.rows]

    def csv(self):
        lines = ["k,error,order"]
        for r in self.rows:
            lines.append(f"{r.k!r},{r.error!r},{r.order!r}")
        return "\n".join(lines) + "\n"


def convergence_study(model: ScalarModel, k_list, t_final,
                      reference: ReferenceTrace = None, ref_factor=32):
    """Observed dG(0) temporal orders against the product-integration reference.

    k_list must be decreasing; the reference step is k_min/ref_factor unless
    a precomputed reference is supplied.
    """
    k_list = list(k_list)
    if any(k2 >= k1 for k1, k2 in zip(k_list, k_list[1:])):
        raise ValueError("k_list must be strictly decreasing")
    if reference is None:
        reference = scalar_reference(model, t_final, min(k_list) / ref_factor)
    u_ref = reference.at_final()
    errors = []
    for k in k_list:
        grid = TimeGrid.uniform(t_final, int(round(t_final / k)))
        trace = scalar_dg0(model, grid)
        errors.append(abs(trace.u1[-1] - u_ref))
    rows = [ConvergenceRow(k=k_list[0], error=errors[0], order=float("nan"))]
    for i in range(1, len(k_list)):
        if errors[i] > 0.0 and errors[i - 1] > 0.0:
            order = float(np.log(errors[i - 1] / errors[i])
                          / np.log(k_list[i - 1] / k_list[i]))
        else:
            order = float("nan")
        rows.append(ConvergenceRow(k=k_list[i], error=errors[i], order=order))
    degenerate = all(e == 0.0 for e in errors)
    return ConvergenceStudy(rows=rows, reference_value=u_ref,
                            degenerate=degenerate)


def self_convergence_study(model: ScalarModel, k_list, t_final, k_fine):
    """Orders measured against a fine dG(0) run (same scheme, smaller step)."""
    if k_fine >= min(k_list):
        raise ValueError("k_fine must be below every entry of k_list")
    grid_f = TimeGrid.uniform(t_final, int(round(t_final / k_fine)))
    fine = scalar_dg0(model, grid_f)
    u_ref = float(fine.u1[-1])
    errors = []
    for k in k_list:
        grid = TimeGrid.uniform(t_final, int(round(t_final / k)))
        errors.append(abs(scalar_dg0(model, grid).u1[-1] - u_ref))
    rows = [ConvergenceRow(k=k_list[0], error=errors[0], order=float("nan"))]
    for i in range(1, len(k_list)):
        if errors[i] > 0.0 and errors[i - 1] > 0.0:
            order = float(np.log(errors[i - 1] / errors[i])
                          / np.log(k_list[i - 1] / k_list[i]))
        else:
            order = float("nan")
        rows.append(ConvergenceRow(k=k_list[i], error=errors[i], order=order))
    return ConvergenceStudy(rows=rows, reference_value=u_ref,
                            degenerate=all(e == 0.0 for e in errors))

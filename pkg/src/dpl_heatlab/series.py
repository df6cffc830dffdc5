"""Eigenfunction-series temperature solver.

The temperature deviation from ambient expands over sin(kx x) sin(ky y)
eigenfunctions; each mode amplitude is a convolution of the source factor

    f(tau) = sin(kx xs(tau)) sin(ky ys(tau))
             + tau_q * (vx kx cos(kx xs) sin(ky ys) + vy ky sin(kx xs) cos(ky ys))

with that mode's relaxation kernel.  The grid field is then

    T(x, y, t) = T0 + sum prefactor * gain_mn * P_mn(t) sin(kx x) sin(ky y)

with prefactor 4 alpha theta / (L H tau_q k) on the lagged branch and
4 alpha theta / (L H k) on the diffusive (tau_q = 0) branch.

Coefficients for a whole mode table are computed by one adaptive pass per
time segment (segments split at trajectory quarter-periods), processed
backward from tau = t so that modes whose remaining kernel mass is below
their error budget drop out early.  Modes are handled in fixed chunks in
ascending-k2 order, so results do not depend on the worker-thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from .errors import NegativeElapsed
from .model import CUSTOM, GridSpec, PlateScenario, TemperatureField
from .modes import (
    CRITICAL,
    DIFFUSIVE,
    OSCILLATORY,
    OVERDAMPED,
    ModeEntry,
    ModeTable,
    build_mode_table,
    kernel_matrix,
    kernel_tail_mass,
)
from .quadrature import QuadratureSpec, integrate_columns, integrate_scalar
from .trajectory import position, velocity, velocity_bounds

MODE_CHUNK = 1024


def default_truncation(s: PlateScenario) -> tuple[int, int]:
    """Series length heuristic: slow diffusion needs the longer sum."""
    return (80, 80) if s.alpha < 1e-3 else (40, 40)


def prefactor(s: PlateScenario, classical: bool | None = None) -> float:
    """Scalar multiplying gain * P_mn in the temperature series.

    ``classical`` pins the branch to the one the mode table chose (the
    table may demote an unresolvably small tau_q to the zero-lag branch);
    None falls back to tau_q == 0.
    """
    if classical is None:
        classical = s.tau_q == 0.0
    if classical:
        return 4.0 * s.alpha * s.theta / (s.L * s.H * s.k)
    return 4.0 * s.alpha * s.theta / (s.L * s.H * s.tau_q * s.k)


def resolve_threads(threads=None) -> int:
    """Worker count: explicit arg, else DPL_HEATLAB_THREADS, else auto."""
    if threads is None:
        env = os.environ.get("DPL_HEATLAB_THREADS", "").strip()
        threads = int(env) if env else 0
    threads = int(threads)
    if threads < 0:
        raise ValueError(f"thread count must be >= 0, got {threads}")
    if threads == 0:
        return os.cpu_count() or 1
    return threads


class PointSourceFactors:
    """Vectorized source factor f(tau) for the Dirac point source."""

    def __init__(self, s: PlateScenario, kx: np.ndarray, ky: np.ndarray):
        self.traj = s.trajectory
        self.tau_q = s.tau_q
        self.kx = kx
        self.ky = ky

    def __call__(self, taus: np.ndarray) -> np.ndarray:
        x, y = position(self.traj, taus)
        argx = np.outer(x, self.kx)
        argy = np.outer(y, self.ky)
        sinx, siny = np.sin(argx), np.sin(argy)
        f = sinx * siny
        if self.tau_q != 0.0:
            vx, vy = velocity(self.traj, taus)
            f = f + self.tau_q * (
                (vx[:, None] * self.kx[None, :]) * np.cos(argx) * siny
                + (vy[:, None] * self.ky[None, :]) * sinx * np.cos(argy))
        return f

    def bound(self) -> np.ndarray:
        """Per-mode upper bound on |f| over all tau."""
        vx_max, vy_max = velocity_bounds(self.traj)
        return 1.0 + self.tau_q * (self.kx * vx_max + self.ky * vy_max)


def source_factor(entry: ModeEntry, s: PlateScenario, tau):
    """The bracketed source factor of one mode at time tau (no kernel)."""
    factors = PointSourceFactors(s, np.array([entry.kx]), np.array([entry.ky]))
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    vals = factors(taus)[:, 0]
    if np.ndim(tau) == 0:
        return float(vals[0])
    return vals.reshape(np.shape(tau))


def _segment_boundaries(s: PlateScenario, t: float) -> np.ndarray:
    """Panel seeds for [0, t]: quarter-periods, or spline knots for custom."""
    pts = [0.0, t]
    traj = s.trajectory
    if traj.kind == CUSTOM:
        pts.extend(tk for tk in traj.samples[0] if 0.0 < tk < t)
    elif traj.w != 0.0:
        quarter = 0.5 * math.pi / abs(traj.w)
        count = int(math.floor(t / quarter))
        pts.extend(j * quarter for j in range(1, count + 1) if j * quarter < t)
    return np.unique(np.asarray(pts, dtype=float))


def mode_coefficient(entry: ModeEntry, s: PlateScenario, t: float,
                     quad: QuadratureSpec | None = None) -> float:
    """Direct adaptive quadrature of one mode's convolution integral."""
    if t < 0.0:
        raise NegativeElapsed(f"coefficient requested at negative time {t!r}")
    if t == 0.0:
        return 0.0
    quad = quad or QuadratureSpec()
    regime = np.array([entry.regime], dtype=np.int8)
    damping = np.array([entry.damping])
    splitting = np.array([entry.splitting])
    slow = np.array([entry.slow])
    factors = PointSourceFactors(s, np.array([entry.kx]), np.array([entry.ky]))

    def f(taus):
        delta = np.maximum(t - taus, 0.0)
        return factors(taus)[:, 0] * kernel_matrix(
            regime, damping, splitting, slow, delta)[:, 0]

    bounds = _segment_boundaries(s, t)
    return integrate_scalar(f, 0.0, t, quad, breakpoints=bounds[1:-1])


def _coefficients_chunk(s, table: ModeTable, sel: slice, t: float,
                        quad: QuadratureSpec, bounds: np.ndarray,
                        factors_factory) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients for one contiguous chunk of the mode table."""
    kx = table.kx[sel]
    ky = table.ky[sel]
    regime = table.regime[sel]
    damping = table.damping[sel]
    splitting = table.splitting[sel]
    slow = table.slow[sel]
    factors = factors_factory(s, kx, ky)
    fbound = factors.bound()

    nmodes = kx.size
    nseg = bounds.size - 1
    acc = np.zeros(nmodes)
    err = np.zeros(nmodes)
    active = np.ones(nmodes, dtype=bool)
    seg_spec = replace(quad, rel_tol=0.0)

    for j in range(nseg - 1, -1, -1):
        if not active.any():
            break
        a_seg, b_seg = bounds[j], bounds[j + 1]
        idx = np.flatnonzero(active)
        reg_a, dmp_a = regime[idx], damping[idx]
        spl_a, slo_a = splitting[idx], slow[idx]

        def f(taus, _idx=idx, _reg=reg_a, _dmp=dmp_a, _spl=spl_a, _slo=slo_a):
            delta = np.maximum(t - taus, 0.0)
            return factors(taus)[:, _idx] * kernel_matrix(
                _reg, _dmp, _spl, _slo, delta)

        tol = np.maximum(quad.abs_tol, quad.rel_tol * np.abs(acc[idx])) / nseg
        totals, errors = integrate_columns(f, a_seg, b_seg, seg_spec, abs_tol=tol)
        acc[idx] += totals
        err[idx] += errors

        if j > 0:
            remaining = kernel_tail_mass(reg_a, dmp_a, spl_a, slo_a,
                                         t - a_seg) * fbound[idx]
            budget = 0.5 * np.maximum(quad.abs_tol,
                                      quad.rel_tol * np.abs(acc[idx]))
            done = remaining <= budget
            if done.any():
                active[idx[done]] = False
                err[idx[done]] += remaining[done]
    return acc, err


def mode_coefficients(s: PlateScenario, table: ModeTable, t: float,
                      quad: QuadratureSpec | None = None, *,
                      threads=None, factors_factory=None) -> np.ndarray:
    """Convolution coefficients P_mn(t) for every mode of the table.

    Returns an array aligned with the table's (ascending-k2) mode order.
    The computation is partitioned into fixed chunks of the table, so the
    numeric result is identical for any worker count.
    """
    if t < 0.0:
        raise NegativeElapsed(f"coefficients requested at negative time {t!r}")
    nmodes = table.nmodes
    if t == 0.0:
        return np.zeros(nmodes)
    quad = quad or QuadratureSpec()
    factory = factors_factory or PointSourceFactors
    bounds = _segment_boundaries(s, t)
    chunks = [slice(i, min(i + MODE_CHUNK, nmodes))
              for i in range(0, nmodes, MODE_CHUNK)]

    out = np.empty(nmodes)
    workers = min(resolve_threads(threads), len(chunks))
    if workers <= 1:
        results = [_coefficients_chunk(s, table, sel, t, quad, bounds, factory)
                   for sel in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda sel: _coefficients_chunk(s, table, sel, t, quad,
                                                bounds, factory),
                chunks))
    for sel, (acc, _err) in zip(chunks, results):
        out[sel] = acc
    return out


# --- field assembly --------------------------------------------------------


def _sin_table(coords: np.ndarray, rates: np.ndarray, limit: float) -> np.ndarray:
    """sin(coord * rate) with rows on the plate edge zeroed exactly.

    Every series term vanishes on the boundary analytically; zeroing the
    basis rows keeps that exact in floating point instead of leaving
    sin(m pi) roundoff.
    """
    tab = np.sin(np.outer(coords, rates))
    edge = (coords <= 0.0) | (coords >= limit)
    tab[edge, :] = 0.0
    return tab


def amplitudes(s: PlateScenario, table: ModeTable,
               coeffs: np.ndarray) -> np.ndarray:
    """Per-mode series amplitudes prefactor * gain * P_mn."""
    return prefactor(s, classical=table.classical) * table.gain * coeffs


def _kahan_sum_modes(amps, sinx, siny, mask=None):
    """sum_p amps[p] * outer(sinx[:, p], siny[:, p]) in table order.

    Compensated accumulation, one mode at a time, in the ascending-k2
    order the table already has.
    """
    total = np.zeros((sinx.shape[0], siny.shape[0]))
    comp = np.zeros_like(total)
    index = range(amps.size) if mask is None else np.flatnonzero(mask)
    for p in index:
        term = amps[p] * np.outer(sinx[:, p], siny[:, p])
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def assemble_field(s: PlateScenario, table: ModeTable, coeffs: np.ndarray,
                   grid: GridSpec, t: float,
                   mode_mask=None) -> TemperatureField:
    """Sum the series on a grid; optional mask restricts the truncation."""
    xs, ys = grid.axes(s.L, s.H)
    sinx = _sin_table(xs, table.kx, s.L)
    siny = _sin_table(ys, table.ky, s.H)
    amps = amplitudes(s, table, coeffs)
    values = _kahan_sum_modes(amps, sinx, siny, mode_mask) + s.T0
    return TemperatureField(grid=grid, t=float(t), values=values)


def assemble_at_points(s: PlateScenario, table: ModeTable, coeffs: np.ndarray,
                       xs, ys, mode_mask=None) -> np.ndarray:
    """Series values at paired sample points (xs[i], ys[i])."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    sinx = _sin_table(xs, table.kx, s.L)
    siny = _sin_table(ys, table.ky, s.H)
    amps = amplitudes(s, table, coeffs)
    index = range(amps.size) if mode_mask is None else np.flatnonzero(mode_mask)
    total = np.zeros(xs.size)
    comp = np.zeros_like(total)
    for p in index:
        term = amps[p] * (sinx[:, p] * siny[:, p])
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total + s.T0


def temperature(s: PlateScenario, grid: GridSpec, t: float,
                M: int | None = None, N: int | None = None,
                quad: QuadratureSpec | None = None, *,
                threads=None) -> TemperatureField:
    """Temperature field on the grid at time t via the truncated series."""
    if t < 0.0:
        raise NegativeElapsed(f"temperature requested at negative time {t!r}")
    if M is None or N is None:
        dm, dn = default_truncation(s)
        M = M or dm
        N = N or dn
    if t == 0.0:
        values = np.full((grid.nx, grid.ny), float(s.T0))
        return TemperatureField(grid=grid, t=0.0, values=values)
    table = build_mode_table(s, M, N)
    coeffs = mode_coefficients(s, table, t, quad, threads=threads)
    return assemble_field(s, table, coeffs, grid, t)


def temperature_at_points(s: PlateScenario, xs, ys, t: float,
                          M: int | None = None, N: int | None = None,
                          quad: QuadratureSpec | None = None, *,
                          threads=None) -> np.ndarray:
    """Series temperatures at arbitrary paired points at time t."""
    if t < 0.0:
        raise NegativeElapsed(f"temperature requested at negative time {t!r}")
    if M is None or N is None:
        dm, dn = default_truncation(s)
        M = M or dm
        N = N or dn
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if t == 0.0:
        return np.full(xs.size, float(s.T0))
    table = build_mode_table(s, M, N)
    coeffs = mode_coefficients(s, table, t, quad, threads=threads)
    return assemble_at_points(s, table, coeffs, xs, ys)


def temperature_at_point(s: PlateScenario, x: float, y: float, t: float,
                         M: int | None = None, N: int | None = None,
                         quad: QuadratureSpec | None = None, *,
                         threads=None) -> float:
    """Single-sample convenience wrapper around the series sum."""
    return float(temperature_at_points(s, [x], [y], t, M, N, quad,
                                       threads=threads)[0])


def switch_on_transient(s: PlateScenario, table: ModeTable, t: float,
                        xs, ys) -> np.ndarray:
    """Start-up correction separating equal-lag and diffusive solutions.

    For tau_q = tau_T = tau the diffusive-branch solution satisfies the
    lagged equation exactly but with initial rate c * f(0) instead of 0;
    the two fields therefore differ by the homogeneous relaxation
    sum c * f_mn(0) * K_mn(t) * sin(kx x) sin(ky y), with c the diffusive
    prefactor and K the lagged kernel.  Returns that correction at the
    given points: diffusive field = lagged field + correction.
    """
    if not (s.tau_q == s.tau_T and s.tau_q > 0.0):
        raise ValueError("start-up correction applies to equal positive lags")
    x0, y0 = position(s.trajectory, 0.0)
    f0 = np.sin(table.kx * x0) * np.sin(table.ky * y0)
    kern = kernel_matrix(table.regime, table.damping, table.splitting,
                         table.slow, np.array([t]))[0]
    pseudo = f0 * kern  # plays the role of P_mn for the correction
    c = 4.0 * s.alpha * s.theta / (s.L * s.H * s.k)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    sinx = _sin_table(xs, table.kx, s.L)
    siny = _sin_table(ys, table.ky, s.H)
    total = np.zeros(xs.size)
    comp = np.zeros_like(total)
    for p in range(pseudo.size):
        term = (c * pseudo[p]) * (sinx[:, p] * siny[:, p])
        y = term - comp
        tt = total + y
        comp = (tt - total) - y
        total = tt
    return total


# --- incremental evaluation ------------------------------------------------


class CoefficientHistory:
    """Incremental P_mn evaluation by exponential-state recurrences.

    Each mode's kernel is a combination of exponentials in elapsed time,
    so the convolution state advances from t to t + h by damping the
    stored state and adding a local integral over [t, t + h]:

      overdamped   E_s, E_f with rates slow and damping + splitting;
                   P = (E_s - E_f) / (2 splitting)
      oscillatory  complex state with rate damping - i |splitting|;
                   P = Im / |splitting|
      critical     E0 (plain) and E1 (ramp-weighted); E1 gains h * E0
                   on each shift; P = E1
      diffusive    single E with the decay rate; P = E

    Local integrals reuse the adaptive engine, so a long time series costs
    one short quadrature per step instead of one full-history integral per
    query.  States start at the quiescent initial condition, P_mn(0) = 0.
    """

    def __init__(self, s: PlateScenario, table: ModeTable,
                 quad: QuadratureSpec | None = None, *, factors_factory=None):
        self.s = s
        self.table = table
        self.quad = quad or QuadratureSpec()
        factory = factors_factory or PointSourceFactors
        self.factors = factory(s, table.kx, table.ky)
        self.t = 0.0
        n = table.nmodes
        self._e_slow = np.zeros(n)   # overdamped slow / critical E0 / diffusive E
        self._e_fast = np.zeros(n)   # overdamped fast / critical E1
        self._e_cos = np.zeros(n)    # oscillatory real part
        self._e_sin = np.zeros(n)    # oscillatory imag part

    def _local_integrals(self, t_new: float):
        """Segment integrals with kernels anchored at t_new, per state."""
        table = self.table
        reg = table.regime
        over = reg == OVERDAMPED
        crit = reg == CRITICAL
        osc = reg == OSCILLATORY
        diff = reg == DIFFUSIVE
        rate_slow = np.where(over, table.slow, table.damping)  # crit/diff reuse
        rate_fast = table.damping + table.splitting

        def f(taus):
            delta = np.maximum(t_new - taus, 0.0)[:, None]
            base = self.factors(taus)
            cols = [base * np.exp(-rate_slow[None, :] * delta)]
            cols.append(np.where(over[None, :],
                                 base * np.exp(-rate_fast[None, :] * delta),
                                 np.where(crit[None, :], cols[0] * delta, 0.0)))
            phase = table.splitting[None, :] * delta
            cols.append(np.where(osc[None, :], cols[0] * np.cos(phase), 0.0))
            cols.append(np.where(osc[None, :], cols[0] * np.sin(phase), 0.0))
            return np.concatenate(cols, axis=1)

        bounds = _segment_boundaries(self.s, t_new)
        inner = bounds[(bounds > self.t) & (bounds < t_new)]
        seg_spec = replace(self.quad, rel_tol=0.0)
        totals, _ = integrate_columns(f, self.t, t_new, seg_spec,
                                      abs_tol=self.quad.abs_tol,
                                      breakpoints=inner)
        n = table.nmodes
        return totals[:n], totals[n:2 * n], totals[2 * n:3 * n], totals[3 * n:]

    def advance(self, t_new: float) -> None:
        """Move the state from the current time to t_new > t."""
        if t_new < self.t:
            raise NegativeElapsed(
                f"cannot step backward from {self.t!r} to {t_new!r}")
        if t_new == self.t:
            return
        h = t_new - self.t
        table = self.table
        loc_slow, loc_mix, loc_cos, loc_sin = self._local_integrals(t_new)

        reg = table.regime
        over = reg == OVERDAMPED
        crit = reg == CRITICAL
        osc = reg == OSCILLATORY
        diff = reg == DIFFUSIVE

        decay_slow = np.exp(-np.where(over, table.slow, table.damping) * h)
        decay_fast = np.exp(-(table.damping + table.splitting) * h)

        e_slow_new = decay_slow * self._e_slow
        e_fast_new = np.where(
            over, decay_fast * self._e_fast,
            # critical: ramp state picks up h * E0 when the anchor shifts
            decay_slow * (self._e_fast + h * self._e_slow))
        e_slow_new[over | crit | diff] += loc_slow[over | crit | diff]
        e_fast_new[over | crit] += loc_mix[over | crit]

        if osc.any():
            rot_c = np.cos(table.splitting * h) * decay_slow
            rot_s = np.sin(table.splitting * h) * decay_slow
            e_cos_new = rot_c * self._e_cos - rot_s * self._e_sin + loc_cos
            e_sin_new = rot_s * self._e_cos + rot_c * self._e_sin + loc_sin
            self._e_cos = np.where(osc, e_cos_new, 0.0)
            self._e_sin = np.where(osc, e_sin_new, 0.0)

        self._e_slow = e_slow_new
        self._e_fast = e_fast_new
        self.t = t_new

    def values(self) -> np.ndarray:
        """Current P_mn array, aligned with the table's mode order."""
        table = self.table
        reg = table.regime
        out = np.zeros(table.nmodes)
        over = reg == OVERDAMPED
        out[over] = ((self._e_slow[over] - self._e_fast[over])
                     / (2.0 * table.splitting[over]))
        crit = reg == CRITICAL
        out[crit] = self._e_fast[crit]
        osc = reg == OSCILLATORY
        out[osc] = self._e_sin[osc] / table.splitting[osc]
        diff = reg == DIFFUSIVE
        out[diff] = self._e_slow[diff]
        return out

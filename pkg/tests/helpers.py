"""Independent brute-force oracles shared across the test modules.

Everything here is deliberately dumb: fixed-grid composite Simpson rules
and direct formula evaluation, with no code shared with the adaptive
quadrature or the kernel recurrences under test.
"""

import numpy as np

from dpl_heatlab.modes import kernel_matrix


def simpson(values, h):
    """Composite Simpson sum over an odd-length uniformly spaced sample."""
    n = values.shape[0]
    assert n % 2 == 1 and n >= 3
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return h / 3.0 * np.dot(w, values)


def source_track(scenario, taus):
    """Source position and velocity along an analytic trajectory."""
    traj = scenario.trajectory
    ph = traj.w * taus
    x = traj.cx + traj.A * np.cos(ph)
    y = traj.cy + traj.B * np.sin(ph)
    vx = -traj.A * traj.w * np.sin(ph)
    vy = traj.B * traj.w * np.cos(ph)
    return x, y, vx, vy


def simpson_mode_coefficient(scenario, m, n, t, panels=250_000):
    """Brute-force convolution coefficient on a fixed Simpson grid.

    Only the kernel evaluation is borrowed from the package; the time
    integral itself, the eigenfunction factor and the lagged-source term
    are written out longhand.
    """
    from dpl_heatlab.modes import build_mode_table

    table = build_mode_table(scenario, m, n)
    e = table.entry(m, n)
    taus = np.linspace(0.0, t, 2 * panels + 1)
    x, y, vx, vy = source_track(scenario, taus)
    f = np.sin(e.kx * x) * np.sin(e.ky * y)
    if scenario.tau_q:
        f = f + scenario.tau_q * (
            vx * e.kx * np.cos(e.kx * x) * np.sin(e.ky * y)
            + vy * e.ky * np.sin(e.kx * x) * np.cos(e.ky * y))
    kern = kernel_matrix(np.array([e.regime]), np.array([e.damping]),
                         np.array([e.splitting]), np.array([e.slow]),
                         t - taus)[:, 0]
    return simpson(f * kern, t / (2 * panels))


def tiny_scenario(**overrides):
    """Small, fast-to-solve scenario for plumbing-level tests."""
    import dpl_heatlab as dh

    fields = dict(L=1.0, H=1.0, theta=100.0, k=2.0, alpha=1.29e-2,
                  tau_q=1.0, tau_T=1.0,
                  trajectory=dh.Trajectory(kind="circle", A=0.25, B=0.25,
                                           w=0.2 * np.pi))
    fields.update(overrides)
    return dh.PlateScenario(**fields)

"""Shared oracle helpers for the test suite."""

import numpy as np

from invosc import evaluate, integrate_adaptive


def density_moments(ev, params, packet, window=12.0):
    """Quadrature norm, mean, and central variance of |psi|^2."""
    width = packet.sigma * abs(ev.gamma_factor)
    lo, hi = ev.xi - window * width, ev.xi + window * width

    def dens(x):
        return abs(evaluate(ev, params, packet, x)) ** 2

    norm = integrate_adaptive(dens, lo, hi, abs_tol=1e-14, rel_tol=1e-12).value
    mean = integrate_adaptive(lambda x: x * dens(x), lo, hi,
                              abs_tol=1e-14, rel_tol=1e-12).value / norm
    var = integrate_adaptive(lambda x: (x - mean) ** 2 * dens(x), lo, hi,
                             abs_tol=1e-14, rel_tol=1e-12).value / norm
    return float(norm), float(mean), float(var)


def rk4_path(f, y0, t_final, dt):
    """Fixed-step RK4 for y' = f(t, y) with y a numpy vector.

    Returns (times, states) sampled at every step.
    """
    n = int(round(t_final / dt))
    ts = np.linspace(0.0, n * dt, n + 1)
    ys = np.empty((n + 1, len(y0)))
    y = np.asarray(y0, dtype=float)
    ys[0] = y
    for i in range(1, n + 1):
        t = ts[i - 1]
        k1 = f(t, y)
        k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = f(t + dt, y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[i] = y
    return ts, ys

"""Shared numerical machinery.

Adaptive Gauss-Kronrod quadrature (finite intervals and the half line),
a Cardano cubic solver with Newton refinement, the modified Bessel
function K_{1/4} through its cosh-integral representation, a split-step
Fourier solver for the time-dependent Schrodinger equation on a periodic
grid, and a fixed-step RK4 integrator for the memory-kernel (generalized
Langevin) equation of motion.

Everything here is deterministic and allocation-per-call; no module
state is mutated.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .core import GaussianPacket, SystemParams, evaluate_initial, force_at

# 15-point Kronrod abscissae on [-1, 1] (positive half, descending) with the
# embedded 7-point Gauss rule.  Values from the QUADPACK dqk15 tables.
_XGK = (
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
)
_WGK = (
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
)
_WG = (
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
)


class QuadratureError(RuntimeError):
    """Raised when adaptive refinement cannot reach the requested tolerance.

    Carries the best available estimate in the ``best`` attribute.
    """

    def __init__(self, message: str, best: "QuadratureResult | None" = None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class QuadratureResult:
    value: complex | float
    error_estimate: float
    evaluations: int


def _gk15_panel(f, lo: float, hi: float):
    """One Gauss-Kronrod 15(7) panel: returns (value, error, is_complex)."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    fc = f(mid)
    is_complex = isinstance(fc, complex) or np.iscomplexobj(fc)
    acc_k = _WGK[7] * complex(fc)
    acc_g = _WG[3] * complex(fc)
    for i in range(7):
        dx = half * _XGK[i]
        f1 = f(mid - dx)
        f2 = f(mid + dx)
        if not is_complex:
            is_complex = isinstance(f1, complex) or np.iscomplexobj(f1)
        pair = complex(f1) + complex(f2)
        acc_k += _WGK[i] * pair
        if i % 2 == 1:
            acc_g += _WG[(i - 1) // 2] * pair
    value = acc_k * half
    err = abs((acc_k - acc_g) * half)
    return value, err, is_complex


def integrate_adaptive(f, lo: float, hi: float, abs_tol: float = 1e-12,
                       rel_tol: float = 1e-10, max_depth: int = 60) -> QuadratureResult:
    """Adaptively integrate ``f`` on [lo, hi] by Gauss-Kronrod bisection.

    The worst panel (largest embedded-rule error estimate) is bisected
    until the summed estimate satisfies ``max(abs_tol, rel_tol * |I|)``.
    Real and complex integrands are both accepted.

    Raises QuadratureError, carrying the best estimate, if the recursion
    depth limit is exceeded before the tolerance is met.
    """
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise ValueError(f"bad integration interval [{lo}, {hi}]")
    value, err, is_complex = _gk15_panel(f, lo, hi)
    evals = 15
    # heap entries: (-err, tiebreak, lo, hi, value, err, depth)
    counter = 0
    heap = [(-err, counter, lo, hi, value, err, 0)]
    total_val = value
    total_err = err
    while total_err > max(abs_tol, rel_tol * abs(total_val)):
        neg_err, _, a, b, v, e, depth = heapq.heappop(heap)
        if e == 0.0:
            heapq.heappush(heap, (neg_err, counter, a, b, v, e, depth))
            break
        if depth >= max_depth or len(heap) > 100_000:
            best = QuadratureResult(total_val if is_complex else total_val.real,
                                    total_err, evals)
            raise QuadratureError(
                f"quadrature subdivision limit exceeded on [{lo}, {hi}]", best)
        m = 0.5 * (a + b)
        v1, e1, c1 = _gk15_panel(f, a, m)
        v2, e2, c2 = _gk15_panel(f, m, b)
        is_complex = is_complex or c1 or c2
        evals += 30
        total_val += v1 + v2 - v
        total_err += e1 + e2 - e
        counter += 1
        heapq.heappush(heap, (-e1, counter, a, m, v1, e1, depth + 1))
        counter += 1
        heapq.heappush(heap, (-e2, counter, m, b, v2, e2, depth + 1))
    out = total_val if is_complex else total_val.real
    return QuadratureResult(out, total_err, evals)


def integrate_halfline(f, abs_tol: float, first_length: float = 1.0,
                       max_doublings: int = 60) -> QuadratureResult:
    """Integrate ``f`` on [0, inf) over dyadically doubling intervals.

    Each interval is handled by ``integrate_adaptive``; the sweep stops
    once two consecutive intervals each contribute less than ``abs_tol``
    in magnitude (two, to survive oscillatory integrands whose single
    interval contribution may cancel accidentally).
    """
    if abs_tol <= 0:
        raise ValueError("abs_tol must be positive")
    total = 0.0 + 0.0j
    err = 0.0
    evals = 0
    is_complex = False
    lo = 0.0
    hi = first_length
    small_run = 0
    for _ in range(max_doublings):
        res = integrate_adaptive(f, lo, hi, abs_tol=abs_tol / 16.0, rel_tol=1e-13)
        is_complex = is_complex or isinstance(res.value, complex)
        total += res.value
        err += res.error_estimate
        evals += res.evaluations
        small_run = small_run + 1 if abs(res.value) < abs_tol else 0
        if small_run >= 2:
            out = total if is_complex else total.real
            return QuadratureResult(out, err, evals)
        lo, hi = hi, hi + 2.0 * (hi - lo)
    best = QuadratureResult(total if is_complex else total.real, err, evals)
    raise QuadratureError("half-line integral did not converge within the "
                          "doubling budget", best)


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def solve_cubic(a2: float, a1: float, a0: float) -> tuple[complex, complex, complex]:
    """Roots of the monic cubic r^3 + a2 r^2 + a1 r + a0.

    Cardano's method in the depressed form y^3 + 3p y + 2q = 0 with
    q = a2^3/27 - a2 a1/6 + a0/2,  p = (3 a1 - a2^2)/9,  D = q^2 + p^3:
    D > 0 gives one real and one conjugate pair, D < 0 three real roots
    (trigonometric branch), D = 0 a repeated root.  Each root is then
    polished by Newton iterations on the original cubic, and complex
    roots are forced into an exact conjugate pair.

    Roots are returned sorted by descending real part, then ascending
    imaginary part.
    """
    q = a2**3 / 27.0 - a2 * a1 / 6.0 + a0 / 2.0
    p = (3.0 * a1 - a2 * a2) / 9.0
    disc = q * q + p**3
    shift = a2 / 3.0
    if disc > 0.0:
        root = math.sqrt(disc)
        u = _cbrt(-q + root)
        v = _cbrt(-q - root)
        y1 = u + v
        re = -0.5 * y1
        im = 0.5 * math.sqrt(3.0) * (u - v)
        ys = [complex(y1, 0.0), complex(re, im), complex(re, -im)]
    elif disc < 0.0:
        # D < 0 forces p < 0, so the trigonometric form is well defined.
        mp = math.sqrt(-p)
        phi = math.acos(max(-1.0, min(1.0, -q / mp**3)))
        ys = [complex(2.0 * mp * math.cos((phi + 2.0 * math.pi * k) / 3.0), 0.0)
              for k in range(3)]
    else:
        c = _cbrt(-q)
        ys = [complex(2.0 * c, 0.0), complex(-c, 0.0), complex(-c, 0.0)]
    roots = [y - shift for y in ys]

    scale = max(1.0, abs(a2), abs(a1), abs(a0))

    def _poly(s: complex) -> complex:
        return ((s + a2) * s + a1) * s + a0

    polished = []
    for r in roots:
        best, best_res = r, abs(_poly(r))
        cur = r
        for _ in range(12):
            fp = (3.0 * cur + 2.0 * a2) * cur + a1
            if fp == 0:
                break
            nxt = cur - _poly(cur) / fp
            res = abs(_poly(nxt))
            if res < best_res:
                best, best_res = nxt, res
            if res <= 1e-15 * scale:
                break
            if nxt == cur:
                break
            cur = nxt
        polished.append(best)

    # Snap near-real roots, then enforce exact conjugacy of a complex pair.
    snapped = [complex(r.real, 0.0) if abs(r.imag) <= 1e-9 * (1.0 + abs(r))
               else r for r in polished]
    cplx = [r for r in snapped if r.imag != 0.0]
    if len(cplx) == 2:
        w = 0.5 * (cplx[0] + cplx[1].conjugate())
        real_part = [r for r in snapped if r.imag == 0.0]
        snapped = real_part + [complex(w.real, abs(w.imag)),
                               complex(w.real, -abs(w.imag))]
    elif len(cplx) == 1:
        snapped = [complex(r.real, 0.0) for r in snapped]
    return tuple(sorted(snapped, key=lambda s: (-s.real, s.imag)))


def bessel_k_quarter(z: float) -> float:
    """Modified Bessel function of the second kind of order 1/4.

    Uses the representation K_nu(z) = \\int_0^inf exp(-z cosh u) cosh(nu u) du,
    truncated where the exponent argument has decayed past 750, and
    evaluated by adaptive quadrature to a 1e-11 relative tolerance.
    """
    if not (z > 0.0) or not math.isfinite(z):
        raise ValueError("bessel_k_quarter requires z > 0")
    u_max = math.acosh(max(765.0 / z, 2.0))

    def integrand(u: float) -> float:
        ex = -z * math.cosh(u)
        if ex < -745.0:
            return 0.0
        return math.exp(ex) * math.cosh(0.25 * u)

    res = integrate_adaptive(integrand, 0.0, u_max, abs_tol=0.0, rel_tol=1e-11)
    return float(res.value)


# ---------------------------------------------------------------------------
# Grid Schrodinger oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridState:
    """Wavefunction samples on a uniform periodic grid.

    ``psi[i]`` is the amplitude at ``x_min + i * dx``; the right endpoint
    ``x_max`` is excluded (periodic convention of the discrete Fourier
    transform).  Treated as an immutable value: evolution returns a new
    instance.
    """

    x_min: float
    x_max: float
    n: int
    dx: float
    psi: np.ndarray
    t: float

    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)


def grid_from_packet(packet: GaussianPacket, params: SystemParams,
                     x_min: float, x_max: float, n: int) -> GridState:
    """Sample a Gaussian packet on the grid and normalize discretely."""
    if n <= 0 or n & (n - 1) != 0:
        raise ValueError("grid size n must be a power of two")
    if not x_min < x_max:
        raise ValueError("x_min must be below x_max")
    dx = (x_max - x_min) / n
    x = x_min + dx * np.arange(n)
    psi = evaluate_initial(packet, params, x).astype(complex)
    psi = psi / math.sqrt(float(np.sum(np.abs(psi) ** 2) * dx))
    return GridState(x_min=x_min, x_max=x_max, n=n, dx=dx, psi=psi, t=0.0)


def _absorber_mask(n: int, width: int) -> np.ndarray:
    mask = np.ones(n)
    ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(width) / width))
    mask[:width] = ramp
    mask[n - width:] = ramp[::-1]
    return mask


def _evolve_grid(grid: GridState, potential, t_final: float, dt: float,
                 absorber_points: int | None, hbar: float) -> GridState:
    """Strang-split evolution with an arbitrary potential(x_array, t) callable."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if not t_final > grid.t:
        raise ValueError("t_final must exceed the current grid time")
    x = grid.x()
    k = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.dx)
    psi = grid.psi.copy()
    mask = _absorber_mask(grid.n, absorber_points) if absorber_points else None
    edge = 5

    t = grid.t
    remaining = t_final - t
    n_full = int(math.floor(remaining / dt + 1e-12))
    steps = [dt] * n_full
    leftover = remaining - n_full * dt
    if leftover > 1e-12 * dt:
        steps.append(leftover)
    for h in steps:
        v = potential(x, t + 0.5 * h)
        half = np.exp(-0.5j * v * h / hbar)
        kin = np.exp(-0.5j * hbar * k**2 * h)
        psi = half * np.fft.ifft(kin * np.fft.fft(half * psi))
        if mask is not None:
            psi = psi * mask
        else:
            edge_prob = float((np.sum(np.abs(psi[:edge]) ** 2)
                               + np.sum(np.abs(psi[-edge:]) ** 2)) * grid.dx)
            if edge_prob > 1e-6:
                raise RuntimeError("domain too small: probability reached the "
                                   "grid boundary (add an absorber or widen the box)")
        t += h
    return GridState(x_min=grid.x_min, x_max=grid.x_max, n=grid.n,
                     dx=grid.dx, psi=psi, t=t_final)


def schrodinger_grid_evolve(params: SystemParams, grid: GridState, force,
                            t_final: float, dt: float,
                            absorber_points: int | None = None) -> GridState:
    """Split-step Fourier evolution under the inverted-oscillator potential.

    The potential is -omega^2 x^2 / 2 - F(t) x with the force sampled at
    step midpoints; kinetic steps are exact unitary spectral phases on
    the periodic grid.  Without an absorbing mask, probability reaching
    within five points of the boundary above 1e-6 raises an error.
    """
    om2 = params.omega**2

    def potential(x: np.ndarray, t: float) -> np.ndarray:
        return -0.5 * om2 * x**2 - force_at(force, t) * x

    return _evolve_grid(grid, potential, t_final, dt, absorber_points, params.hbar)


def free_grid_evolve(params: SystemParams, grid: GridState, t_final: float,
                     dt: float) -> GridState:
    """Kinetic-only evolution (zero potential); exact for any dt on the grid."""
    return _evolve_grid(grid, lambda x, t: np.zeros_like(x), t_final, dt, None,
                        params.hbar)


# ---------------------------------------------------------------------------
# Memory-kernel ODE oracle
# ---------------------------------------------------------------------------

def langevin_ode_oracle(params: SystemParams, bath, t_final: float,
                        dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Impulse response of the damped inverted oscillator by direct RK4.

    Integrates the extended system x' = v, v' = omega^2 x - w,
    w' = -omega_d w + gamma omega_d v, which reproduces the exponential
    memory integral exactly when w(0) = 0, from x(0) = 0, v(0) = 1.
    Returns (times, x samples) including t = 0.
    """
    if dt <= 0.0 or t_final <= 0.0:
        raise ValueError("t_final and dt must be positive")
    om2 = params.omega**2
    gd = bath.gamma * bath.omega_d
    wd = bath.omega_d

    def deriv(x, v, w):
        return v, om2 * x - w, -wd * w + gd * v

    n = int(round(t_final / dt))
    ts = np.empty(n + 1)
    xs = np.empty(n + 1)
    x, v, w = 0.0, 1.0, 0.0
    ts[0], xs[0] = 0.0, 0.0
    for i in range(1, n + 1):
        k1 = deriv(x, v, w)
        k2 = deriv(x + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1], w + 0.5 * dt * k1[2])
        k3 = deriv(x + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1], w + 0.5 * dt * k2[2])
        k4 = deriv(x + dt * k3[0], v + dt * k3[1], w + dt * k3[2])
        x += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        v += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        w += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if abs(x) > 1e200:
            raise RuntimeError("RK4 trajectory overflow; use a smaller dt")
        ts[i] = i * dt
        xs[i] = x
    return ts, xs

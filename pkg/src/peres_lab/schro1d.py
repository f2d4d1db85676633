"""One-dimensional quaternionic scattering in units hbar = 2m = 1.

The Hamiltonian ``i(-d^2/dx^2 + V_alpha) + j V2 + k V3`` acting on
``psi = psi_a + j psi_b`` with right eigenvalue ``i E`` couples an open
alpha channel (wave number ``p = sqrt(E)``) to a closed beta channel that
decays as ``exp(-sqrt(E) |x|)`` away from the potential.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .potentials import PiecewisePotential, SampledPotential
from .propagation import (StabilizedSolution, coupling_matrices, exact_steps,
                          growth_rate, rk4_steps)

COND_LIMIT = 1e12
SIGNAL_FLOOR = 1e-12
MAX_CELL_GROWTH = 2.0


class IllConditionedError(RuntimeError):
    def __init__(self, message: str, condition: float, **diagnostics):
        super().__init__(f"{message} (condition number {condition:.3e})")
        self.condition = condition
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class ScatteringAmplitudes1D:
    r: complex
    t: complex
    c_beta_left: complex
    c_beta_right: complex
    E: float
    p: float
    condition: float = 1.0

    @property
    def flux_residual(self) -> float:
        return abs(abs(self.r) ** 2 + abs(self.t) ** 2 - 1.0)


@dataclass(frozen=True, eq=False)
class WaveProfile1D:
    x: np.ndarray
    psi_alpha: np.ndarray
    psi_beta: np.ndarray
    dpsi_alpha: np.ndarray
    dpsi_beta: np.ndarray
    support: tuple[float, float] | None
    amplitudes: ScatteringAmplitudes1D

    def ode_residual(self, pot) -> float:
        """Max relative mismatch of the coupled equations on interior points.

        Second derivatives come from central differences of the stored first
        derivatives, so points next to potential discontinuities are skipped.
        """
        x = self.x
        E = self.amplitudes.E
        va, vb = pot.at(x)
        d2a = np.gradient(self.dpsi_alpha, x)
        d2b = np.gradient(self.dpsi_beta, x)
        ra = d2a - ((va - E) * self.psi_alpha + 1j * vb.conj() * self.psi_beta)
        rb = d2b - ((va + E) * self.psi_beta + 1j * vb * self.psi_alpha)
        keep = np.ones(x.size, bool)
        keep[[0, -1]] = False
        for b in pot.breakpoints():
            keep[np.abs(x - b) <= 2.0 * np.max(np.diff(x))] = False
        scale = np.max(np.abs(self.psi_alpha)) * (1.0 + E + np.max(np.abs(va)) + np.max(np.abs(vb)))
        return float(np.max(np.abs(np.concatenate([ra[keep], rb[keep]])), initial=0.0) / scale)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "re_psi_alpha", "im_psi_alpha", "re_psi_beta", "im_psi_beta"])
            for row in zip(self.x, self.psi_alpha, self.psi_beta):
                w.writerow([f"{row[0]:.17g}", f"{row[1].real:.17g}", f"{row[1].imag:.17g}",
                            f"{row[2].real:.17g}", f"{row[2].imag:.17g}"])


class DecayFit(NamedTuple):
    kappa_fit: float
    r_squared: float
    intercept: float

    def is_exponential(self, threshold: float = 0.9999) -> bool:
        return self.r_squared > threshold


class CompositeResult(NamedTuple):
    t_AB: complex
    t_BA: complex
    delta: float
    phase_diff: float


def _mesh(pot, x_lo: float, x_hi: float, E: float, step: float, extra=()):
    pts = {x_lo, x_hi}
    pts.update(b for b in pot.breakpoints() if x_lo < b < x_hi)
    pts.update(float(e) for e in extra if x_lo < e < x_hi)
    pts = np.array(sorted(pts))
    if pot.piecewise:
        # exact cells; subdivide intervals so per-cell growth stays bounded
        nodes = [pts[:1]]
        for a, b in zip(pts[:-1], pts[1:]):
            va, vb = pot.at(np.array([0.5 * (a + b)]))
            g = growth_rate(coupling_matrices(va, vb, E))
            n = max(1, math.ceil((b - a) * g / MAX_CELL_GROWTH))
            nodes.append(np.linspace(a, b, n + 1)[1:])
        return np.concatenate(nodes)
    nodes = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, math.ceil((b - a) / step - 1e-9))
        nodes.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(nodes)


def _step_matrices(pot, x, E):
    left, right = x[:-1], x[1:]
    h = right - left
    (va0, vam, va1), (vb0, vbm, vb1) = pot.step_values(left, right)
    if pot.piecewise:
        return exact_steps(coupling_matrices(vam, vbm, E), h)
    return rk4_steps(coupling_matrices(va0, vb0, E), coupling_matrices(vam, vbm, E),
                     coupling_matrices(va1, vb1, E), h)


def _solve(pot, E: float, x_lo: float | None = None, x_hi: float | None = None,
           step: float = 2e-3, extra=()):
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E}")
    sup = pot.support
    lo, hi = sup if sup is not None else (0.0, 0.0)
    x_lo = lo if x_lo is None else min(x_lo, lo)
    x_hi = hi if x_hi is None else max(x_hi, hi)
    p = math.sqrt(E)
    kappa = p
    x = _mesh(pot, x_lo, x_hi, E, step, extra)
    T = _step_matrices(pot, x, E) if x.size > 1 else np.zeros((0, 4, 4), complex)

    e_in, e_out = np.exp(1j * p * x_lo), np.exp(-1j * p * x_lo)
    Y0 = np.array([[e_in, e_out, 0.0],
                   [1j * p * e_in, -1j * p * e_out, 0.0],
                   [0.0, 0.0, 1.0],
                   [0.0, 0.0, kappa]], dtype=complex)
    sol = StabilizedSolution(T, Y0)

    # right edge: outgoing alpha wave, decaying beta wave
    G = np.array([[-1j * p, 1.0, 0.0, 0.0], [0.0, 0.0, kappa, 1.0]]) / math.sqrt(1.0 + E)
    M = G @ sol.Q_end
    _, s, Vh = np.linalg.svd(M)
    cond = float(s[0] / s[1]) if s[1] > 0 else math.inf
    if cond > COND_LIMIT:
        raise IllConditionedError("right-edge matching is singular", cond, E=E, singular_values=s)
    Y, a0 = sol.states(Vh[-1].conj())
    a_norm = float(np.linalg.norm(a0))
    if abs(a0[0]) < 1e-12 * a_norm:
        raise IllConditionedError("no incoming-wave component in the solution",
                                  a_norm / max(abs(a0[0]), 1e-300), E=E)
    Y = Y / a0[0]
    if pot.is_complex:
        # decoupled beta channel with decaying tails on both sides is identically zero
        Y[:, 2:] = 0.0
        a0[2] = 0.0
    amp = ScatteringAmplitudes1D(
        r=complex(a0[1] / a0[0]),
        t=complex(Y[-1, 0] * np.exp(-1j * p * x_hi)),
        c_beta_left=complex(a0[2] / a0[0] * math.exp(-kappa * x_lo)),
        c_beta_right=complex(Y[-1, 2] * math.exp(kappa * x_hi)),
        E=float(E), p=p, condition=cond,
    )
    return amp, x, Y


def solve_scattering_1d(pot, E: float, *, step: float = 2e-3) -> ScatteringAmplitudes1D:
    """Reflection/transmission and closed-channel coefficients at energy ``E``.

    Incident ``exp(ipx)`` from the left; ``r`` and ``t`` multiply
    ``exp(-ipx)`` and ``exp(ipx)``; ``c_beta_left``/``c_beta_right`` multiply
    ``exp(+kappa x)``/``exp(-kappa x)``. ``step`` only matters for sampled
    potentials.
    """
    return _solve(pot, E, step=step)[0]


def wave_profile_1d(pot, E: float, grid, *, step: float = 2e-3) -> WaveProfile1D:
    """Wavefunction on ``grid``, integrated through the free regions as well."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be 1-D and strictly increasing")
    sup = pot.support
    if sup is not None and (grid[0] > sup[0] or grid[-1] < sup[1]):
        raise ValueError(f"grid [{grid[0]}, {grid[-1]}] does not cover the support {sup}")
    amp, x, Y = _solve(pot, E, grid[0], grid[-1], step=step, extra=grid)
    idx = np.searchsorted(x, grid)
    idx = np.clip(idx, 0, x.size - 1)
    # mesh always contains the grid points (up to round-off in linspace)
    near = np.abs(x[idx] - grid) > 1e-12 * (1.0 + np.abs(grid))
    idx[near & (idx > 0)] -= 1
    if np.any(np.abs(x[idx] - grid) > 1e-9 * (1.0 + np.abs(grid))):
        raise RuntimeError("internal mesh does not contain the requested grid")
    Yg = Y[idx]
    return WaveProfile1D(grid, Yg[:, 0], Yg[:, 2], Yg[:, 1], Yg[:, 3], sup, amp)


def beta_decay_rate(profile: WaveProfile1D, window: tuple[float, float]) -> DecayFit:
    """Least-squares decay constant of ``|psi_beta|`` over a potential-free window."""
    x_lo, x_hi = window
    if not x_hi > x_lo:
        raise ValueError(f"empty window {window}")
    sup = profile.support
    if sup is not None and x_lo < sup[1] and x_hi > sup[0]:
        raise ValueError(f"window {window} overlaps the potential support {sup}")
    m = (profile.x >= x_lo) & (profile.x <= x_hi)
    if m.sum() < 3:
        raise ValueError("fewer than 3 profile points in the window")
    amp = np.abs(profile.psi_beta[m])
    if np.any(amp < SIGNAL_FLOOR):
        raise ValueError(f"|psi_beta| drops below {SIGNAL_FLOOR:g} in the window")
    xs, ys = profile.x[m], np.log(amp)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    sst = np.sum((ys - ys.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / sst if sst > 0 else 0.0
    # decay is towards +x on the right of the support, towards -x on the left
    right_side = sup is None or x_lo >= sup[1]
    kappa = -slope if right_side else slope
    return DecayFit(float(kappa), float(r2), float(intercept))


def _place(pot, x0: float):
    sup = pot.support
    if sup is None:
        return pot, 0.0
    return pot.shifted(x0 - sup[0]), sup[1] - sup[0]


def _join(first, second, d: float):
    a, wa = _place(first, 0.0)
    b, _ = _place(second, wa + d)
    if isinstance(a, SampledPotential) or isinstance(b, SampledPotential):
        raise TypeError("two-barrier composition needs piecewise potentials")
    return PiecewisePotential([*a.segments, *b.segments])


def composite_noncommutativity(potA, potB, d: float, E: float) -> CompositeResult:
    """Transmission through A-gap-B versus B-gap-A; ``delta = |t_AB - t_BA|``."""
    if d < 0:
        raise ValueError(f"gap must be non-negative, got {d}")
    t_ab = solve_scattering_1d(_join(potA, potB, d), E).t
    t_ba = solve_scattering_1d(_join(potB, potA, d), E).t
    dphi = float(np.angle(t_ab / t_ba)) if t_ab != 0 and t_ba != 0 else 0.0
    return CompositeResult(t_ab, t_ba, float(abs(t_ab - t_ba)), dphi)


def separation_scan(potA, potB, ds, E: float) -> np.ndarray:
    return np.array([composite_noncommutativity(potA, potB, float(d), E).delta for d in ds])


def fit_log_linear(xs, ys) -> DecayFit:
    """Fit ``log ys`` against ``xs``; returns minus the slope as ``kappa_fit``."""
    xs = np.asarray(xs, dtype=float)
    ly = np.log(np.asarray(ys, dtype=float))
    slope, intercept = np.polyfit(xs, ly, 1)
    resid = ly - (slope * xs + intercept)
    sst = np.sum((ly - ly.mean()) ** 2)
    return DecayFit(float(-slope), float(1.0 - np.sum(resid ** 2) / sst), float(intercept))

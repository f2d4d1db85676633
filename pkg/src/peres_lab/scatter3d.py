"""Radial partial waves for a central quaternionic potential.

Scalar stand-in for photon multipole channels: each ``ell`` has one open
alpha channel with S-matrix element ``S_ell = exp(2 i delta_ell)`` and a closed
beta channel matched to the decaying modified spherical Bessel solution.
Units hbar = 2m = 1, ``p = kappa = sqrt(E)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .potentials import PiecewisePotential, SampledPotential, Segment
from .propagation import StabilizedSolution, coupling_matrices, rk4_steps

R0 = 1e-6
H_MAX = 2e-3
TRUNCATION_TOL = 1e-10
LEAKAGE_LIMIT = 1e-8


class MatchingError(RuntimeError):
    pass


class TruncationError(RuntimeError):
    def __init__(self, L_max: int, needed: int | None, last_delta: float):
        hint = f"; smallest adequate L_max is {needed}" if needed is not None else ""
        super().__init__(f"|delta_{L_max}| = {last_delta:.3e} exceeds {TRUNCATION_TOL:g}{hint}")
        self.L_max = L_max
        self.needed = needed


class RadialPotential(PiecewisePotential):
    """Piecewise-constant shells on ``r >= 0``."""

    def __init__(self, shells=()):
        super().__init__(shells)
        if self.segments and self.segments[0].x_left < 0:
            raise ValueError("shells must lie in r >= 0")

    @classmethod
    def square_well(cls, radius: float, V_alpha: float, V2: float = 0.0, V3: float = 0.0):
        return cls([Segment(0.0, radius, V_alpha, V2, V3)])

    @property
    def R_support(self) -> float:
        sup = self.support
        return 0.0 if sup is None else sup[1]


class SampledRadialPotential(SampledPotential):
    @property
    def R_support(self) -> float:
        sup = self.support
        return 0.0 if sup is None else sup[1]


def riccati(ell: int, x):
    """Riccati-Bessel ``x j_l(x)``, ``x y_l(x)`` and their x-derivatives."""
    j, y = special.spherical_jn(ell, x), special.spherical_yn(ell, x)
    dj, dy = special.spherical_jn(ell, x, True), special.spherical_yn(ell, x, True)
    return x * j, x * y, j + x * dj, y + x * dy


def riccati_k(ell: int, x):
    """Decaying (``x k_l``) and growing (``x i_l``) modified Riccati-Bessel pairs."""
    k, dk = special.spherical_kn(ell, x), special.spherical_kn(ell, x, True)
    i, di = special.spherical_in(ell, x), special.spherical_in(ell, x, True)
    return x * k, k + x * dk, x * i, i + x * di


@dataclass(frozen=True)
class PartialWaveResult:
    ell: int
    delta_ell: float
    S_ell: complex
    c_beta: complex
    delta_raw: float = 0.0

    @property
    def unitarity_residual(self) -> float:
        return abs(abs(self.S_ell) - 1.0)


@dataclass(frozen=True)
class AmplitudeSummary:
    E: float
    p: float
    f_forward: complex
    sigma_total: float
    L_max_used: int
    deltas: tuple = ()

    @property
    def optical_theorem_residual(self) -> float:
        return abs(self.f_forward.imag - self.p * self.sigma_total / (4.0 * math.pi))


@dataclass(frozen=True, eq=False)
class RadialSolution:
    r: np.ndarray
    u_alpha: np.ndarray
    u_beta: np.ndarray
    du_alpha: np.ndarray
    du_beta: np.ndarray
    result: PartialWaveResult


def radial_mesh(pot, ell: int, r_end: float, extra=(), h_max: float = H_MAX):
    """Geometric steps off the origin, uniform ``<= h_max`` steps further out."""
    eta = 0.1 / (ell + 1)
    r_geo = h_max / eta
    pts = {R0, r_end}
    pts.update(b for b in pot.breakpoints() if R0 < b < r_end)
    pts.update(float(e) for e in extra if R0 < e < r_end)
    pts = sorted(pts)
    nodes = [R0]
    for a, b in zip(pts[:-1], pts[1:]):
        r = a
        if r < r_geo:
            stop = min(b, r_geo)
            while r * (1.0 + eta) < stop:
                r *= 1.0 + eta
                nodes.append(r)
        n = max(1, math.ceil((b - r) / h_max - 1e-9))
        nodes.extend(np.linspace(r, b, n + 1)[1:])
    return np.array(nodes)


def _steps(pot, r, E, ell):
    left, right = r[:-1], r[1:]
    mid = 0.5 * (left + right)
    L = ell * (ell + 1)
    (va0, vam, va1), (vb0, vbm, vb1) = pot.step_values(left, right)
    return rk4_steps(coupling_matrices(va0, vb0, E, L / left ** 2),
                     coupling_matrices(vam, vbm, E, L / mid ** 2),
                     coupling_matrices(va1, vb1, E, L / right ** 2),
                     right - left)


def _tan_delta(ell, p, r, ua, dua):
    jh, nh, djh, dnh = riccati(ell, p * r)
    num = p * djh * ua - jh * dua
    den = p * dnh * ua - nh * dua
    return num, den


def _solve_radial(pot, E: float, ell: int, r_end: float | None = None, extra=(),
                  h_max: float = H_MAX) -> RadialSolution:
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E}")
    if ell < 0:
        raise ValueError(f"ell must be >= 0, got {ell}")
    p = kappa = math.sqrt(E)
    R = max(pot.R_support, 10 * R0)
    r_end = R if r_end is None else max(r_end, R)
    r = radial_mesh(pot, ell, r_end, extra=(R, *extra), h_max=h_max)
    T = _steps(pot, r, E, ell)
    # regular solutions u ~ r^(ell+1) in each channel, common factor r0^ell removed
    norm = math.hypot(R0, ell + 1)
    Y0 = np.array([[R0, 0.0], [ell + 1, 0.0], [0.0, R0], [0.0, ell + 1]], complex) / norm
    sol = StabilizedSolution(T, Y0)

    kh, dkh, _, _ = riccati_k(ell, kappa * r[-1])
    g = np.array([0.0, 0.0, -kappa * dkh / kh, 1.0])
    g /= np.linalg.norm(g)
    m = g @ sol.Q_end
    if np.linalg.norm(m) < 1e-13:
        raise MatchingError("closed-channel condition is degenerate at the matching radius")
    c_end = np.array([m[1], -m[0]]) / np.linalg.norm(m)
    Y, _ = sol.states(c_end)
    ua, dua, ub, dub = Y.T

    # S from the open-channel log-derivative (Hankel matching)
    jh, nh, djh, dnh = riccati(ell, p * r[-1])
    hp, hm = -nh + 1j * jh, -nh - 1j * jh
    dhp, dhm = -dnh + 1j * djh, -dnh - 1j * djh
    S = (p * dhm * ua[-1] - hm * dua[-1]) / (p * dhp * ua[-1] - hp * dua[-1])

    # continuous branch: follow the variable-phase angle along the mesh
    with np.errstate(all="ignore"):
        num, den = _tan_delta(ell, p, r, ua, dua)
        raw = np.arctan((num / den).real)
    ok = np.isfinite(raw) & (np.abs(nh) < np.inf)
    ok &= np.abs(special.spherical_yn(ell, p * r) * p * r) < 1e150
    inside = ok & (r <= R * (1 + 1e-12))
    path = np.unwrap(raw[inside], period=math.pi) if inside.any() else np.array([0.0])
    delta_raw = float(raw[-1])
    delta = float(path[-1])

    # u is normalized so the open channel reads ~ sin(pr - l pi/2 + delta) at large r
    amp = ua[-1] / (jh * math.cos(delta_raw) - nh * math.sin(delta_raw)) \
        if abs(jh * math.cos(delta_raw) - nh * math.sin(delta_raw)) > 1e-8 else \
        dua[-1] / (p * (djh * math.cos(delta_raw) - dnh * math.sin(delta_raw)))
    Y = Y / amp
    ua, dua, ub, dub = Y.T
    c_beta = complex(ub[r <= R * (1 + 1e-12)][-1])
    res = PartialWaveResult(ell, delta, complex(S), c_beta, delta_raw)
    return RadialSolution(r, ua, ub, dua, dub, res)


def phase_shift(pot, E: float, ell: int, *, h_max: float = H_MAX) -> PartialWaveResult:
    """Phase shift and S-matrix element for one partial wave.

    ``delta_ell`` is continued from zero at the origin (Levinson-consistent);
    ``delta_raw`` is the principal value in (-pi/2, pi/2]. ``c_beta`` is the
    closed-channel amplitude at the support edge, with the open channel
    normalized to unit amplitude.
    """
    if pot.support is None:
        if not E > 0:
            raise ValueError(f"energy must be positive, got {E}")
        return PartialWaveResult(ell, 0.0, 1.0 + 0j, 0j, 0.0)
    return _solve_radial(pot, E, ell, h_max=h_max).result


def _smallest_adequate(pot, E, start, cap):
    for ell in range(start, cap + 1):
        if abs(phase_shift(pot, E, ell).delta_raw) < TRUNCATION_TOL:
            return ell
    return None


def forward_amplitude(pot, E: float, L_max: int | None = None) -> AmplitudeSummary:
    """Forward amplitude and total cross section from the partial-wave sums.

    ``f(0) = sum (2l+1)(S_l - 1) / (2ip)`` uses the matched S-matrix elements,
    while ``sigma`` uses the phase shifts, so the optical theorem is a genuine
    cross-check. ``L_max=None`` picks the smallest adequate truncation.
    """
    p = math.sqrt(E) if E > 0 else 0.0
    if L_max is None:
        L_max = _smallest_adequate(pot, E, 0, 200)
        if L_max is None:
            raise TruncationError(200, None, float("nan"))
    results = [phase_shift(pot, E, ell) for ell in range(L_max + 1)]
    last = abs(results[-1].delta_raw)
    if last >= TRUNCATION_TOL:
        raise TruncationError(L_max, _smallest_adequate(pot, E, L_max + 1, L_max + 200), last)
    f = sum((2 * w.ell + 1) * (w.S_ell - 1.0) for w in results) / (2j * p)
    sigma = 4.0 * math.pi / p ** 2 * sum((2 * w.ell + 1) * math.sin(w.delta_ell) ** 2
                                          for w in results)
    return AmplitudeSummary(float(E), p, complex(f), float(sigma), L_max,
                            tuple(w.delta_ell for w in results))


def quaternionic_residual(pot, E: float, ell: int, r_probe: float, *,
                          method: str = "analytic") -> float:
    """``|u_beta(r_probe)|`` relative to the largest interior ``|u_beta|``.

    ``method="analytic"`` continues the closed channel with the modified
    Riccati-Bessel function; ``"integrate"`` carries the ODE out to
    ``r_probe`` and checks that no growing component leaked in.
    """
    R = pot.R_support
    if r_probe <= R:
        raise ValueError(f"probe radius {r_probe} must exceed the support radius {R}")
    kappa = math.sqrt(E)
    if method == "analytic":
        sol = _solve_radial(pot, E, ell)
        inside = sol.r <= R * (1 + 1e-12)
        peak = np.abs(sol.u_beta[inside]).max()
        if peak == 0.0:
            return 0.0
        kR, _, _, _ = riccati_k(ell, kappa * R)
        kp, _, _, _ = riccati_k(ell, kappa * r_probe)
        return float(abs(sol.u_beta[inside][-1] * kp / kR) / peak)
    if method != "integrate":
        raise ValueError(f"unknown method {method!r}")
    sol = _solve_radial(pot, E, ell, r_end=r_probe)
    inside = sol.r <= R * (1 + 1e-12)
    peak = np.abs(sol.u_beta[inside]).max()
    if peak == 0.0:
        return 0.0
    iR = np.flatnonzero(inside)[-1]
    kh, dkh, ih, dih = riccati_k(ell, kappa * sol.r[iR])
    # split u_beta at R into decaying and growing pieces
    A = np.array([[kh, ih], [kappa * dkh, kappa * dih]])
    dec, grow = np.linalg.solve(A, [sol.u_beta[iR], sol.du_beta[iR]])
    leak = abs(grow * ih) / max(abs(dec * kh), 1e-300)
    if leak > LEAKAGE_LIMIT * math.exp(2 * kappa * (r_probe - R)) and leak > LEAKAGE_LIMIT:
        raise MatchingError(f"growing closed-channel component leaked in ({leak:.3e})")
    return float(abs(sol.u_beta[-1]) / peak)


def write_phase_table(path, rows) -> None:
    """CSV of ``(E, ell, delta_ell, re_S, im_S)`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["E", "ell", "delta_ell", "re_S", "im_S"])
        for E, res in rows:
            w.writerow([f"{E:.17g}", res.ell, f"{res.delta_ell:.17g}",
                        f"{res.S_ell.real:.17g}", f"{res.S_ell.imag:.17g}"])

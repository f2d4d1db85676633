"""Stabilized propagation of the coupled alpha/beta channel pair.

State vector ``y = (psi_a, psi_a', psi_b, psi_b')`` obeys ``y' = C(x) y`` with

    psi_a'' = (V_alpha - E + L) psi_a + i conj(V_beta) psi_b
    psi_b'' = (V_alpha + E + L) psi_b + i V_beta psi_a

where ``L`` is an optional centrifugal term. A basis of the admissible solution
subspace is carried across the mesh and re-orthonormalized after every step,
so the closed-channel growth never swamps the other directions.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from . import _kernels


def coupling_matrices(va, vb, E, cent=0.0):
    """Stack of ``4x4`` companion matrices for arrays of potential values."""
    va = np.asarray(va, dtype=float)
    vb = np.asarray(vb, dtype=complex)
    cent = np.broadcast_to(np.asarray(cent, dtype=float), va.shape)
    C = np.zeros(va.shape + (4, 4), dtype=complex)
    C[..., 0, 1] = 1.0
    C[..., 2, 3] = 1.0
    C[..., 1, 0] = va - E + cent
    C[..., 1, 2] = 1j * vb.conj()
    C[..., 3, 2] = va + E + cent
    C[..., 3, 0] = 1j * vb
    return C


def rk4_steps(C0, Cm, C1, h):
    """Classical RK4 one-step matrices for the linear system ``y' = C y``."""
    h = np.asarray(h, dtype=float)[:, None, None]
    eye = np.eye(4)
    K1 = C0
    K2 = Cm @ (eye + 0.5 * h * K1)
    K3 = Cm @ (eye + 0.5 * h * K2)
    K4 = C1 @ (eye + h * K3)
    return eye + h / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4)


def exact_steps(C, h):
    """Exact cell propagators ``expm(C h)`` for piecewise-constant coefficients."""
    h = np.asarray(h, dtype=float)[:, None, None]
    return scipy.linalg.expm(C * h)


def growth_rate(C) -> float:
    """Largest real part among the eigenvalues of a companion matrix stack."""
    if C.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(C).real).max())


class StabilizedSolution:
    """Orthonormal subspace carried across a mesh plus its triangular factors."""

    def __init__(self, steps, Y0):
        Y0 = np.asarray(Y0, dtype=complex)
        self.Q0, self.R0 = np.linalg.qr(Y0)
        steps = np.ascontiguousarray(steps, dtype=complex).reshape(-1, 4, 4)
        self.Q, self.R = _kernels.propagate(steps, np.ascontiguousarray(self.Q0))

    @property
    def Q_end(self) -> np.ndarray:
        return self.Q[-1]

    def states(self, c_end):
        """Node states for the end coefficients ``c_end`` and the initial coefficients."""
        C = _kernels.back_substitute(self.R, np.ascontiguousarray(c_end, dtype=complex))
        Y = np.einsum("kdm,km->kd", self.Q, C)
        a0 = scipy.linalg.solve_triangular(self.R0, C[0])
        return Y, a0

"""Pure numpy versions of the propagation kernels."""
import numpy as np


def propagate(T, Y0):
    """Carry an orthonormal basis through the step matrices ``T[k]``.

    Returns ``Q`` with ``Q[0] = Y0`` and ``R`` with ``T[k] @ Q[k] = Q[k+1] @ R[k]``,
    ``R[k]`` upper triangular with a non-negative diagonal.
    """
    T = np.asarray(T, dtype=complex)
    n, d, _ = T.shape
    m = Y0.shape[1]
    Q = np.empty((n + 1, d, m), dtype=complex)
    R = np.zeros((n, m, m), dtype=complex)
    Q[0] = Y0
    for k in range(n):
        Z = T[k] @ Q[k]
        for col in range(m):
            z = Z[:, col]
            for _ in range(2):
                if col:
                    basis = Q[k + 1, :, :col]
                    proj = basis.conj().T @ z
                    R[k, :col, col] += proj
                    z = z - basis @ proj
            nrm = np.linalg.norm(z)
            R[k, col, col] = nrm
            Q[k + 1, :, col] = z / nrm if nrm > 0.0 else 0.0
    return Q, R


def back_substitute(R, c_end):
    """Coefficients ``C[k]`` with ``C[k+1] = R[k] @ C[k]`` and ``C[n] = c_end``."""
    n, m, _ = R.shape
    C = np.empty((n + 1, m), dtype=complex)
    C[n] = c_end
    for k in range(n - 1, -1, -1):
        c = C[k + 1].copy()
        for a in range(m - 1, -1, -1):
            c[a] = (c[a] - R[k, a, a + 1:] @ c[a + 1:]) / R[k, a, a]
        C[k] = c
    return C

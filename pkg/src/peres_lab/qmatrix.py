"""Quaternionic matrices stored as complex pairs ``M = A + jB``.

All sign conventions follow from left-acting ``j``: on a column vector
``psi = psi_a + j psi_b`` the matrix acts as

    alpha part:  A psi_a - conj(B) psi_b
    beta part:   B psi_a + conj(A) psi_b

so the complex embedding is ``[[A, -conj(B)], [B, conj(A)]]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .quaternion import Quaternion

DEGENERACY_RTOL = 1e-8


class StructureError(ValueError):
    """A complex matrix does not have the quaternionic block structure."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class NotAntiHermitianError(ValueError):
    def __init__(self, residual: float):
        super().__init__(f"matrix is not anti-self-adjoint (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class QuatMatrix:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        B = np.atleast_2d(np.asarray(self.B, dtype=complex))
        if A.shape != B.shape:
            raise ValueError(f"A and B shapes differ: {A.shape} vs {B.shape}")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    # constructors
    @classmethod
    def zeros(cls, n: int, m: int | None = None) -> "QuatMatrix":
        m = n if m is None else m
        return cls(np.zeros((n, m), complex), np.zeros((n, m), complex))

    @classmethod
    def identity(cls, n: int) -> "QuatMatrix":
        return cls(np.eye(n, dtype=complex), np.zeros((n, n), complex))

    @classmethod
    def scalar(cls, q: Quaternion, n: int = 1) -> "QuatMatrix":
        p = q.to_pair()
        return cls(p.alpha * np.eye(n), p.beta * np.eye(n))

    @classmethod
    def from_components(cls, w, x, y, z) -> "QuatMatrix":
        """Build from four real matrices ``w + x i + y j + z k``."""
        w, x, y, z = (np.asarray(c, dtype=float) for c in (w, x, y, z))
        return cls(w + 1j * x, y - 1j * z)

    @classmethod
    def diag(cls, entries) -> "QuatMatrix":
        pairs = [q.to_pair() for q in entries]
        return cls(np.diag([p.alpha for p in pairs]), np.diag([p.beta for p in pairs]))

    @classmethod
    def random(cls, n: int, m: int | None = None, rng=None) -> "QuatMatrix":
        rng = np.random.default_rng(rng)
        m = n if m is None else m
        c = rng.standard_normal((4, n, m))
        return cls.from_components(*c)

    @classmethod
    def random_antihermitian(cls, n: int, rng=None) -> "QuatMatrix":
        X = cls.random(n, rng=rng)
        return X - X.adjoint()

    @classmethod
    def random_unitary(cls, n: int, rng=None) -> "QuatMatrix":
        return expm_quat(cls.random_antihermitian(n, rng=rng))

    # basic algebra
    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def is_square(self) -> bool:
        return self.A.shape[0] == self.A.shape[1]

    def __matmul__(self, other: "QuatMatrix") -> "QuatMatrix":
        A1, B1, A2, B2 = self.A, self.B, other.A, other.B
        return QuatMatrix(A1 @ A2 - B1.conj() @ B2, B1 @ A2 + A1.conj() @ B2)

    def __add__(self, other: "QuatMatrix") -> "QuatMatrix":
        return QuatMatrix(self.A + other.A, self.B + other.B)

    def __sub__(self, other: "QuatMatrix") -> "QuatMatrix":
        return QuatMatrix(self.A - other.A, self.B - other.B)

    def __neg__(self) -> "QuatMatrix":
        return QuatMatrix(-self.A, -self.B)

    def scale(self, s: float) -> "QuatMatrix":
        return QuatMatrix(s * self.A, s * self.B)

    def left_mul(self, q: Quaternion) -> "QuatMatrix":
        return QuatMatrix.scalar(q, self.shape[0]) @ self

    def right_mul(self, q: Quaternion) -> "QuatMatrix":
        return self @ QuatMatrix.scalar(q, self.shape[1])

    def adjoint(self) -> "QuatMatrix":
        return QuatMatrix(self.A.conj().T, -self.B.T)

    def norm(self) -> float:
        """Frobenius norm, sqrt of the sum of |q_mn|^2."""
        return float(np.sqrt(np.sum(np.abs(self.A) ** 2) + np.sum(np.abs(self.B) ** 2)))

    def complex_part(self) -> "QuatMatrix":
        return QuatMatrix(self.A, np.zeros_like(self.B))

    def jk_part(self) -> "QuatMatrix":
        return QuatMatrix(np.zeros_like(self.A), self.B)

    def entry(self, m: int, n: int) -> Quaternion:
        a, b = self.A[m, n], self.B[m, n]
        return Quaternion(a.real, a.imag, b.real, -b.imag)

    def column(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        return self.A[:, n], self.B[:, n]

    def block(self, rows, cols) -> "QuatMatrix":
        return QuatMatrix(self.A[np.ix_(rows, cols)], self.B[np.ix_(rows, cols)])

    # serialization
    def to_json(self) -> dict:
        def enc(M):
            return [[[float(v.real), float(v.imag)] for v in row] for row in M]
        return {"A": enc(self.A), "B": enc(self.B)}

    @classmethod
    def from_json(cls, data: dict) -> "QuatMatrix":
        def dec(rows):
            return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
        return cls(dec(data["A"]), dec(data["B"]))

    def __repr__(self) -> str:
        return f"QuatMatrix(shape={self.shape})"


def commutator(X: QuatMatrix, Y: QuatMatrix) -> QuatMatrix:
    return X @ Y - Y @ X


def embed_complex(M: QuatMatrix) -> np.ndarray:
    """Complex 2N x 2N image of a square quaternionic matrix."""
    if not M.is_square():
        raise ValueError(f"embed_complex needs a square matrix, got {M.shape}")
    return np.block([[M.A, -M.B.conj()], [M.B, M.A.conj()]])


def extract_quaternionic(C: np.ndarray, tol: float = 1e-8) -> QuatMatrix:
    """Inverse of :func:`embed_complex`; raises if the block structure is violated."""
    C = np.asarray(C, dtype=complex)
    n2 = C.shape[0]
    if C.shape != (n2, n2) or n2 % 2:
        raise ValueError(f"expected an even square matrix, got {C.shape}")
    n = n2 // 2
    A, B = C[:n, :n], C[n:, :n]
    resid = max(np.abs(C[:n, n:] + B.conj()).max(initial=0.0),
                np.abs(C[n:, n:] - A.conj()).max(initial=0.0))
    scale = 1.0 + np.abs(C).max(initial=0.0)
    if resid > tol * scale:
        raise StructureError("complex matrix lacks quaternionic structure", resid)
    return QuatMatrix(A, B)


def expm_quat(M: QuatMatrix) -> QuatMatrix:
    if not M.is_square():
        raise ValueError(f"expm_quat needs a square matrix, got {M.shape}")
    return extract_quaternionic(scipy.linalg.expm(embed_complex(M)))


def is_antihermitian(M: QuatMatrix, tol: float = 1e-12) -> tuple[bool, float]:
    """Return ``(||M + M^dagger|| <= tol, residual)``."""
    if not M.is_square():
        raise ValueError(f"square matrix required, got {M.shape}")
    resid = (M + M.adjoint()).norm()
    return resid <= tol, resid


def unitarity_residual(U: QuatMatrix) -> float:
    return (U.adjoint() @ U - QuatMatrix.identity(U.shape[1])).norm()


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    Q: QuatMatrix
    energies: np.ndarray

    def reconstruct(self) -> QuatMatrix:
        D = QuatMatrix(np.diag(1j * self.energies), np.zeros((len(self.energies),) * 2))
        return self.Q @ D @ self.Q.adjoint()

    def blocks(self, rtol: float = DEGENERACY_RTOL) -> list[np.ndarray]:
        return energy_blocks(self.energies, rtol)


def energy_blocks(energies, rtol: float = DEGENERACY_RTOL) -> list[np.ndarray]:
    """Group sorted energies into degenerate blocks of indices."""
    energies = np.asarray(energies, dtype=float)
    if energies.size == 0:
        return []
    tol = rtol * (1.0 + np.abs(energies).max())
    groups, current = [], [0]
    for n in range(1, energies.size):
        if abs(energies[n] - energies[current[0]]) <= tol:
            current.append(n)
        else:
            groups.append(np.array(current))
            current = [n]
    groups.append(np.array(current))
    return groups


def _j_partner(v: np.ndarray) -> np.ndarray:
    # embedding of (psi . j): (-conj(psi_b), conj(psi_a))
    n = v.size // 2
    return np.concatenate([-v[n:].conj(), v[:n].conj()])


def _fix_gauge(v: np.ndarray) -> np.ndarray:
    n = v.size // 2
    mags = np.abs(v[:n]) ** 2 + np.abs(v[n:]) ** 2
    m = int(np.argmax(mags))
    ref = v[m] if abs(v[m]) > 1e-12 * np.sqrt(mags[m]) else v[n + m]
    return v * (abs(ref) / ref)


def diagonalize_antihermitian(H: QuatMatrix, tol: float = 1e-10) -> SpectralDecomposition:
    """Eigenbasis with right eigenvalues ``i E_n``, ``E_n >= 0``, sorted ascending.

    Works on the Hermitian matrix ``-i embed(H)`` whose spectrum is ``{+E_n, -E_n}``.
    Eigenvectors are taken from the top of the spectrum and orthogonalized against
    the previously chosen columns and their j-partners, which also resolves the
    doubly degenerate zero-energy subspace.
    """
    if not H.is_square():
        raise ValueError(f"square matrix required, got {H.shape}")
    n = H.shape[0]
    ok, resid = is_antihermitian(H, tol * (1.0 + H.norm()))
    if not ok:
        raise NotAntiHermitianError(resid)
    Kh = -1j * embed_complex(H)
    Kh = 0.5 * (Kh + Kh.conj().T)
    evals, evecs = np.linalg.eigh(Kh)
    order = np.argsort(-evals, kind="stable")
    chosen: list[np.ndarray] = []
    energies: list[float] = []
    for idx in order:
        if len(chosen) == n:
            break
        v = evecs[:, idx].copy()
        for _ in range(2):
            for u in chosen:
                for w in (u, _j_partner(u)):
                    v -= w * np.vdot(w, v)
        nv = np.linalg.norm(v)
        if nv < 0.5:
            continue
        v /= nv
        chosen.append(v)
        energies.append(max(float(evals[idx]), 0.0))
    if len(chosen) != n:
        raise RuntimeError("failed to assemble a quaternionic eigenbasis")
    perm = np.argsort(energies, kind="stable")
    cols = [_fix_gauge(chosen[p]) for p in perm]
    V = np.stack(cols, axis=1)
    return SpectralDecomposition(QuatMatrix(V[:n], V[n:]), np.array(energies)[perm])


def _nonzero(E: float, scale: float) -> bool:
    return abs(E) > DEGENERACY_RTOL * (1.0 + scale)


def commutant_project(H0: QuatMatrix, X: QuatMatrix) -> QuatMatrix:
    """Project ``X`` onto the matrices commuting with ``H0``.

    In the eigenbasis of ``H0`` blocks coupling distinct energies are dropped
    and nonzero-energy diagonal blocks keep only their complex part. The
    zero-energy block is kept whole.
    """
    if X.shape != H0.shape:
        raise ValueError(f"shape mismatch {X.shape} vs {H0.shape}")
    dec = diagonalize_antihermitian(H0)
    Q = dec.Q
    Xe = Q.adjoint() @ X @ Q
    A = np.zeros_like(Xe.A)
    B = np.zeros_like(Xe.B)
    scale = float(np.abs(dec.energies).max(initial=0.0))
    for blk in dec.blocks():
        ix = np.ix_(blk, blk)
        A[ix] = Xe.A[ix]
        if not _nonzero(dec.energies[blk[0]], scale):
            B[ix] = Xe.B[ix]
    return Q @ QuatMatrix(A, B) @ Q.adjoint()


@dataclass
class BlockReport:
    energy: float
    size: int
    jk_residual: float
    passed: bool
    exempt: bool


@dataclass
class ComplexityReport:
    commutator_residual: float
    off_shell_norms: dict = field(default_factory=dict)
    blocks: list = field(default_factory=list)
    passed: bool = False
    tol: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def max_offshell(self) -> float:
        return max(self.off_shell_norms.values(), default=0.0)

    @property
    def max_jk_residual(self) -> float:
        return max((b.jk_residual for b in self.blocks if not b.exempt), default=0.0)

    def to_dict(self) -> dict:
        return {
            "commutator_residual": self.commutator_residual,
            "max_offshell": self.max_offshell,
            "off_shell": [{"E": list(k), "norm": v} for k, v in self.off_shell_norms.items()],
            "blocks": [vars(b) for b in self.blocks],
            "passed": self.passed,
            "tol": self.tol,
            "warnings": list(self.warnings),
        }


def smatrix_complexity_check(H0: QuatMatrix, S: QuatMatrix, tol: float = 1e-10) -> ComplexityReport:
    """Check that ``S`` commutes with ``H0`` and is complex on each nonzero-energy shell."""
    warnings = []
    ok, resid = is_antihermitian(H0, 1e-10 * (1.0 + H0.norm()))
    if not ok:
        warnings.append(f"H0 not anti-self-adjoint (residual {resid:.3e})")
        H0 = (H0 - H0.adjoint()).scale(0.5)
    u_resid = unitarity_residual(S)
    if u_resid > 1e-8:
        warnings.append(f"S not quaternion-unitary (residual {u_resid:.3e})")

    comm = commutator(H0, S).norm()
    dec = diagonalize_antihermitian(H0)
    Se = dec.Q.adjoint() @ S @ dec.Q
    blocks = dec.blocks()
    scale = float(np.abs(dec.energies).max(initial=0.0))

    off = {}
    for a, ba in enumerate(blocks):
        for b, bb in enumerate(blocks):
            if a != b:
                key = (float(dec.energies[ba[0]]), float(dec.energies[bb[0]]))
                off[key] = Se.block(ba, bb).norm()

    reports = []
    for blk in blocks:
        E = float(dec.energies[blk[0]])
        jk = float(np.linalg.norm(Se.B[np.ix_(blk, blk)]))
        exempt = not _nonzero(E, scale)
        reports.append(BlockReport(E, len(blk), jk, exempt or jk <= tol, exempt))

    passed = (comm <= tol and max(off.values(), default=0.0) <= tol
              and all(r.passed for r in reports))
    return ComplexityReport(comm, off, reports, passed, tol, warnings)

"""Quaternion scalars and their two-complex-component (symplectic) form.

A quaternion ``w + x i + y j + z k`` is written as ``alpha + j beta`` with
``alpha = w + x i`` and ``beta = y - z i``; both halves live in the complex
subalgebra spanned by 1 and i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_complex(cls, c: complex) -> "Quaternion":
        c = complex(c)
        return cls(c.real, c.imag, 0.0, 0.0)

    def __mul__(self, other):
        if not isinstance(other, Quaternion):
            other = Quaternion(float(other))
        return quat_mul(self, other)

    def __rmul__(self, other):
        return quat_mul(Quaternion(float(other)), self)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def scale(self, s: float) -> "Quaternion":
        return Quaternion(s * self.w, s * self.x, s * self.y, s * self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> "Quaternion":
        n2 = self.norm2()
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        return self.conj().scale(1.0 / n2)

    @property
    def vector(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def vector_norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def is_complex(self, tol: float = 0.0) -> bool:
        """True when the j and k components vanish (to ``tol``)."""
        return abs(self.y) <= tol and abs(self.z) <= tol

    def to_pair(self) -> "SymplecticPair":
        return SymplecticPair(complex(self.w, self.x), complex(self.y, -self.z))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    def exp(self) -> "Quaternion":
        """Quaternionic Euler formula ``e^w (cos|v| + v/|v| sin|v|)``."""
        ew = math.exp(self.w)
        theta = self.vector_norm()
        if theta == 0.0:
            return Quaternion(ew)
        s = ew * math.sin(theta) / theta
        return Quaternion(ew * math.cos(theta), s * self.x, s * self.y, s * self.z)

    def sqrt(self) -> "Quaternion":
        """Principal square root; the branch cut is the negative real axis."""
        vn = self.vector_norm()
        if vn == 0.0 and self.w < 0.0:
            raise ValueError("square root of a negative real quaternion is not unique")
        # same formula as the principal complex sqrt in the plane of (1, v/|v|)
        r = self.norm()
        re = math.sqrt(0.5 * (r + self.w))
        if vn == 0.0:
            return Quaternion(re)
        im = math.sqrt(max(0.5 * (r - self.w), 0.0))
        s = im / vn
        return Quaternion(re, s * self.x, s * self.y, s * self.z)

    def __repr__(self) -> str:
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


ONE = Quaternion(1.0)
I = Quaternion(0.0, 1.0)
J = Quaternion(0.0, 0.0, 1.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product with i^2 = j^2 = k^2 = -1, ij = k, jk = i, ki = j."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


@dataclass(frozen=True)
class SymplecticPair:
    """``q = alpha + j beta`` with complex ``alpha`` and ``beta``."""

    alpha: complex = 0j
    beta: complex = 0j

    def to_quaternion(self) -> Quaternion:
        a, b = complex(self.alpha), complex(self.beta)
        return Quaternion(a.real, a.imag, b.real, -b.imag)

    def __mul__(self, other: "SymplecticPair") -> "SymplecticPair":
        # j z = conj(z) j for complex z gives
        # (a + jb)(c + jd) = (ac - conj(b) d) + j(bc + conj(a) d)
        a, b = self.alpha, self.beta
        c, d = other.alpha, other.beta
        return SymplecticPair(a * c - b.conjugate() * d, b * c + a.conjugate() * d)

    def conj(self) -> "SymplecticPair":
        return SymplecticPair(complex(self.alpha).conjugate(), -self.beta)

    def norm2(self) -> float:
        return abs(self.alpha) ** 2 + abs(self.beta) ** 2

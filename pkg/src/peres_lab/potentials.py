"""Quaternionic potentials ``V = i V_alpha + j V2 + k V3`` on a line or half-line.

Two forms are supported: piecewise-constant segments (exact propagation per
cell) and smooth sampled profiles (cubic-spline interpolated, RK4 propagation).
``V_beta = V2 - i V3`` is the complex coefficient of ``j``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

ZERO_TOL = 1e-14


@dataclass(frozen=True)
class Segment:
    x_left: float
    x_right: float
    V_alpha: float = 0.0
    V2: float = 0.0
    V3: float = 0.0

    @property
    def V_beta(self) -> complex:
        return complex(self.V2, -self.V3)

    @property
    def width(self) -> float:
        return self.x_right - self.x_left

    def is_zero(self) -> bool:
        return max(abs(self.V_alpha), abs(self.V2), abs(self.V3)) < ZERO_TOL

    def to_dict(self) -> dict:
        return {"x_left": self.x_left, "x_right": self.x_right,
                "V_alpha": self.V_alpha, "V2": self.V2, "V3": self.V3}


class PiecewisePotential:
    """Ordered, non-overlapping constant segments; zero elsewhere."""

    piecewise = True

    def __init__(self, segments=()):
        segs = []
        for s in segments:
            if not isinstance(s, Segment):
                s = Segment(**s) if isinstance(s, dict) else Segment(*s)
            s = Segment(*(float(v) for v in (s.x_left, s.x_right, s.V_alpha, s.V2, s.V3)))
            if not all(math.isfinite(v) for v in (s.x_left, s.x_right, s.V_alpha, s.V2, s.V3)):
                raise ValueError(f"non-finite segment {s}")
            if s.x_right <= s.x_left:
                raise ValueError(f"segment has non-positive width: {s}")
            segs.append(s)
        for a, b in zip(segs, segs[1:]):
            if b.x_left < a.x_right:
                raise ValueError(f"segments overlap or are unordered: {a} / {b}")
        self.segments: tuple[Segment, ...] = tuple(segs)

    @property
    def support(self) -> tuple[float, float] | None:
        live = [s for s in self.segments if not s.is_zero()]
        if not live:
            return None
        return live[0].x_left, live[-1].x_right

    @property
    def is_complex(self) -> bool:
        return all(s.V2 == 0.0 and s.V3 == 0.0 for s in self.segments)

    def breakpoints(self) -> list[float]:
        pts = set()
        for s in self.segments:
            pts.update((s.x_left, s.x_right))
        return sorted(pts)

    def at(self, x) -> tuple[np.ndarray, np.ndarray]:
        """``(V_alpha, V_beta)`` at ``x``; right-continuous at segment edges."""
        x = np.asarray(x, dtype=float)
        va = np.zeros(x.shape)
        vb = np.zeros(x.shape, dtype=complex)
        for s in self.segments:
            m = (x >= s.x_left) & (x < s.x_right)
            va[m] = s.V_alpha
            vb[m] = s.V_beta
        return va, vb

    def step_values(self, left, right):
        """Potential at (left, mid, right) of each step; constant within a step."""
        va, vb = self.at(0.5 * (np.asarray(left) + np.asarray(right)))
        return (va, va, va), (vb, vb, vb)

    def shifted(self, dx: float) -> "PiecewisePotential":
        return type(self)([Segment(s.x_left + dx, s.x_right + dx, s.V_alpha, s.V2, s.V3)
                           for s in self.segments])

    def to_json(self) -> list[dict]:
        return [s.to_dict() for s in self.segments]

    @classmethod
    def from_json(cls, data):
        if isinstance(data, dict):
            data = data.get("segments", data.get("shells"))
        return cls([Segment(**rec) for rec in data])

    @classmethod
    def load(cls, path):
        return cls.from_json(json.loads(Path(path).read_text()))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({list(self.segments)!r})"


class SampledPotential:
    """Smooth potential given on a sample grid, zero outside its end points."""

    piecewise = False

    def __init__(self, x, V_alpha, V2=None, V3=None):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size < 4 or np.any(np.diff(x) <= 0):
            raise ValueError("sample grid must be 1-D, strictly increasing, >= 4 points")
        zeros = np.zeros_like(x)
        self.x = x
        self.V_alpha = np.asarray(V_alpha, dtype=float)
        self.V2 = zeros if V2 is None else np.asarray(V2, dtype=float)
        self.V3 = zeros if V3 is None else np.asarray(V3, dtype=float)
        for arr in (self.V_alpha, self.V2, self.V3):
            if arr.shape != x.shape or not np.all(np.isfinite(arr)):
                raise ValueError("potential samples must be finite and match the grid")
        self._splines = [CubicSpline(x, v) for v in (self.V_alpha, self.V2, self.V3)]

    @classmethod
    def from_functions(cls, x, V_alpha, V2=None, V3=None):
        x = np.asarray(x, dtype=float)
        zero = lambda t: np.zeros_like(t)  # noqa: E731
        return cls(x, V_alpha(x), (V2 or zero)(x), (V3 or zero)(x))

    @property
    def support(self) -> tuple[float, float] | None:
        live = np.flatnonzero(np.maximum.reduce([np.abs(self.V_alpha), np.abs(self.V2),
                                                 np.abs(self.V3)]) >= ZERO_TOL)
        if live.size == 0:
            return None
        lo = self.x[max(live[0] - 1, 0)]
        hi = self.x[min(live[-1] + 1, self.x.size - 1)]
        return float(lo), float(hi)

    @property
    def is_complex(self) -> bool:
        return not (np.any(self.V2) or np.any(self.V3))

    def breakpoints(self) -> list[float]:
        return [float(self.x[0]), float(self.x[-1])]

    def at(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.x[0]) & (x <= self.x[-1])
        va, v2, v3 = (np.where(inside, s(x), 0.0) for s in self._splines)
        return va, v2 - 1j * v3

    def step_values(self, left, right):
        left, right = np.asarray(left), np.asarray(right)
        mid = 0.5 * (left + right)
        out = [self.at(p) for p in (left, mid, right)]
        return tuple(o[0] for o in out), tuple(o[1] for o in out)

    def shifted(self, dx: float) -> "SampledPotential":
        return type(self)(self.x + dx, self.V_alpha, self.V2, self.V3)


def load_potential(data, cls=PiecewisePotential):
    """Segment list, ``{"segments": [...]}``, or ``{"x": ..., "V_alpha": ...}`` samples."""
    if isinstance(data, (str, Path)):
        data = json.loads(Path(data).read_text())
    if isinstance(data, dict) and "x" in data:
        return SampledPotential(data["x"], data["V_alpha"], data.get("V2"), data.get("V3"))
    return cls.from_json(data)

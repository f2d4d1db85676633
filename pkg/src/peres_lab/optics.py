"""Refractive index from forward amplitudes and slab phase composition.

The energy of the scatterer solve is tied to the optical frequency by
``E = (omega / c)**2`` so that the scattering wave number equals the light
wave number ``q``.
"""
from __future__ import annotations

import cmath
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .quaternion import Quaternion
from .scatter3d import RadialPotential, forward_amplitude

WAVELENGTH_NM = 790.0
EXPERIMENT_BOUND_DEG = 0.03
DILUTE_LIMIT = 0.1
UNIT_TOL = 1e-12


class BranchError(ValueError):
    pass


@dataclass(frozen=True)
class RefractiveIndex:
    n0: float
    n1: float = 0.0
    n2: float = 0.0
    n3: float = 0.0

    @classmethod
    def from_quaternion(cls, q: Quaternion) -> "RefractiveIndex":
        return cls(q.w, q.x, q.y, q.z)

    def as_quaternion(self) -> Quaternion:
        return Quaternion(self.n0, self.n1, self.n2, self.n3)

    @property
    def is_complex(self) -> bool:
        return self.n2 == 0.0 and self.n3 == 0.0

    def to_list(self) -> list[float]:
        return [self.n0, self.n1, self.n2, self.n3]


@dataclass(frozen=True)
class QuatPhase:
    q: Quaternion

    def __post_init__(self):
        if abs(self.q.norm() - 1.0) > UNIT_TOL:
            raise ValueError(f"phase is not a unit quaternion (|q| = {self.q.norm()!r})")

    def __mul__(self, other: "QuatPhase") -> "QuatPhase":
        return QuatPhase(self.q * other.q)


def _as_quaternion(f) -> Quaternion:
    return f if isinstance(f, Quaternion) else Quaternion.from_complex(f)


def _coupling(omega: float, N: float, c: float) -> float:
    if omega <= 0 or c <= 0 or N < 0:
        raise ValueError("need omega > 0, c > 0, N >= 0")
    return 2.0 * math.pi * c * c * N / (omega * omega)


def rayleigh_index(f, omega: float, N: float, c: float = 1.0) -> RefractiveIndex:
    """Dilute-medium index ``n = 1 + (2 pi c^2 / omega^2) N f``.

    A complex ``f`` yields ``n2 = n3 = 0``; passing a :class:`Quaternion`
    amplitude carries hypothetical j, k parts through unchanged.
    """
    g = _coupling(omega, N, c)
    fq = _as_quaternion(f)
    if g * fq.norm() > DILUTE_LIMIT:
        warnings.warn(f"dilute approximation strained: |n - 1| = {g * fq.norm():.3g}",
                      stacklevel=2)
    if isinstance(f, Quaternion):
        return RefractiveIndex(1.0 + g * fq.w, g * fq.x, g * fq.y, g * fq.z)
    f = complex(f)
    return RefractiveIndex(1.0 + g * f.real, g * f.imag)


def serber_index(f, omega: float, N: float, c: float = 1.0) -> RefractiveIndex:
    """Self-consistent index, principal root of ``n^2 = 1 + (4 pi c^2 / omega^2) N f``."""
    g = 2.0 * _coupling(omega, N, c)
    z = Quaternion(1.0) + _as_quaternion(f).scale(g)
    if z.w < 0 and z.vector_norm() <= 1e-8 * z.norm():
        raise BranchError("n^2 lies on the negative real axis; outside the modeled regime")
    if isinstance(f, Quaternion):
        return RefractiveIndex.from_quaternion(z.sqrt())
    n = cmath.sqrt(complex(z.w, z.x))
    return RefractiveIndex(n.real, n.imag)


def slab_phase(n: RefractiveIndex, q: float, w: float) -> tuple[QuatPhase, float]:
    """Split ``exp(i n q w)`` into a unit phase and the attenuation ``exp(-n1 q w)``."""
    if q <= 0 or w <= 0:
        raise ValueError("need q > 0 and w > 0")
    s = q * w
    # i n = -n1 + n0 i - n3 j + n2 k
    phase = Quaternion(0.0, n.n0 * s, -n.n3 * s, n.n2 * s).exp()
    return QuatPhase(phase), math.exp(-n.n1 * s)


def commutator_angle(ab: Quaternion, ba: Quaternion) -> float:
    """Rotation angle in degrees of ``(ab)(ba)^-1``."""
    c = ab * ba.inverse()
    return math.degrees(2.0 * math.atan2(c.vector_norm(), abs(c.w)))


def compose_and_commutator(alpha: QuatPhase, beta: QuatPhase):
    """Both orderings of two phases and the angle separating them (degrees)."""
    ab, ba = alpha * beta, beta * alpha
    return ab, ba, commutator_angle(ab.q, ba.q)


@dataclass
class SlabSpec:
    N: float
    w: float
    omega: float
    scatterer: RadialPotential = field(default_factory=RadialPotential)
    c: float = 1.0
    inject: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.N < 0 or self.w <= 0 or self.omega <= 0 or self.c <= 0:
            raise ValueError("slab needs N >= 0 and positive w, omega, c")
        self.inject = tuple(float(v) for v in self.inject)

    @property
    def q(self) -> float:
        return self.omega / self.c

    @property
    def energy(self) -> float:
        return self.q ** 2

    @classmethod
    def from_dict(cls, d: dict) -> "SlabSpec":
        d = dict(d)
        if "wavelength" in d:
            d.setdefault("omega", 2.0 * math.pi * float(d.get("c", 1.0)) / float(d.pop("wavelength")))
        scat = d.pop("scatterer", [])
        d["scatterer"] = RadialPotential.from_json(scat) if scat else RadialPotential()
        if "inject" in d:
            inj = d["inject"]
            d["inject"] = (inj.get("n2", 0.0), inj.get("n3", 0.0)) if isinstance(inj, dict) else inj
        return cls(**d)

    def to_dict(self) -> dict:
        out = {"N": self.N, "w": self.w, "omega": self.omega, "c": self.c,
               "scatterer": self.scatterer.to_json()}
        if any(self.inject):
            out["inject"] = {"n2": self.inject[0], "n3": self.inject[1]}
        return out


def _qlist(q: Quaternion) -> list[float]:
    return [q.w, q.x, q.y, q.z]


def slab_index(slab: SlabSpec, relation: str = "rayleigh"):
    """Forward amplitude and index for one slab (before any injection)."""
    if slab.N == 0 or slab.scatterer.support is None:
        f = 0j
    else:
        f = forward_amplitude(slab.scatterer, slab.energy).f_forward
    rel = {"rayleigh": rayleigh_index, "serber": serber_index}.get(relation)
    if rel is None:
        raise ValueError(f"unknown index relation {relation!r}")
    return f, rel(f, slab.omega, slab.N, slab.c)


def peres_pipeline(slabA: SlabSpec, slabB: SlabSpec, relation: str = "rayleigh",
                   bound_deg: float = EXPERIMENT_BOUND_DEG) -> dict:
    """Amplitudes -> indices -> slab phases -> commutator angle for two slabs."""
    report: dict = {"relation": relation, "slabs": {}}
    phases = {}
    for name, slab in (("A", slabA), ("B", slabB)):
        f, n = slab_index(slab, relation)
        from_scattering = n.is_complex
        if any(slab.inject):
            n = RefractiveIndex(n.n0, n.n1, n.n2 + slab.inject[0], n.n3 + slab.inject[1])
        phase, att = slab_phase(n, slab.q, slab.w)
        phases[name] = phase
        report["slabs"][name] = {
            "f": [f.real, f.imag],
            "n": n.to_list(),
            "index_from_scattering_is_complex": from_scattering,
            "injected": any(slab.inject),
            "q": slab.q,
            "qw": slab.q * slab.w,
            "phase": _qlist(phase.q),
            "attenuation": att,
        }
    ab, ba, delta = compose_and_commutator(phases["A"], phases["B"])
    report.update({
        "phase_AB": _qlist(ab.q),
        "phase_BA": _qlist(ba.q),
        "delta_deg": delta,
        "bound_deg": bound_deg,
        "below_bound": delta < bound_deg,
    })
    return report


def load_slabs(path) -> tuple[SlabSpec, SlabSpec]:
    data = json.loads(Path(path).read_text())
    return SlabSpec.from_dict(data["A"]), SlabSpec.from_dict(data["B"])


def preset_path(name: str = "photon_790nm") -> Path:
    return Path(__file__).with_name("presets") / f"{name}.json"


def load_preset(name: str = "photon_790nm") -> dict:
    return json.loads(preset_path(name).read_text())

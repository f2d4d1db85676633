import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peres_lab.optics import (BranchError, QuatPhase, RefractiveIndex, SlabSpec,
                              compose_and_commutator, load_preset, peres_pipeline,
                              rayleigh_index, serber_index, slab_phase, slab_index)
from peres_lab.quaternion import I, J, K, ONE, Quaternion
from peres_lab.scatter3d import RadialPotential


def qclose(a, b, tol=1e-12):
    return max(abs(u - v) for u, v in zip(a.as_tuple(), b.as_tuple())) <= tol


units = st.tuples(*[st.floats(-1, 1)] * 4).filter(lambda t: sum(x * x for x in t) > 1e-2).map(
    lambda t: QuatPhase(Quaternion(*t).scale(1.0 / Quaternion(*t).norm())))


def test_vacuum_index():
    assert rayleigh_index(0j, 1.0, 1.0) == RefractiveIndex(1.0)
    assert serber_index(0j, 1.0, 1.0) == RefractiveIndex(1.0)


def test_rayleigh_substitution():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        n = rayleigh_index(1.0 / (2 * math.pi), 1.0, 1.0)
    assert n.n0 == pytest.approx(2.0) and n.n1 == 0 and n.is_complex


def test_rayleigh_warns_outside_dilute_regime():
    with pytest.warns(UserWarning):
        rayleigh_index(1.0, 1.0, 1.0)


def test_attractive_well_raises_index():
    slab = SlabSpec(N=1e-9, w=1.0, omega=1e-3, scatterer=RadialPotential.square_well(1.0, -1.0))
    f, n = slab_index(slab)
    assert f.real > 0 and n.n0 > 1
    assert n.n2 == 0 and n.n3 == 0


def test_serber_matches_rayleigh_to_second_order():
    phase = complex(0.6, 0.8)
    for x in np.linspace(1e-4, 0.1, 20):
        # N chosen so that 2 pi N |f| / omega^2 = x
        N = x / (2 * math.pi)
        r = rayleigh_index(phase, 1.0, N)
        s = serber_index(phase, 1.0, N)
        diff = abs(complex(s.n0 - r.n0, s.n1 - r.n1))
        assert diff <= x * x
        assert s.n2 == 0 and s.n3 == 0


def test_serber_quaternion_amplitude_passes_through():
    n = serber_index(Quaternion(0.1, 0.0, 0.2, 0.0), 1.0, 0.01)
    assert n.n2 != 0


def test_serber_branch_error():
    with pytest.raises(BranchError):
        serber_index(-1.0, 1.0, 1.0)


def test_slab_phase_examples():
    ph, att = slab_phase(RefractiveIndex(1.0), 1.0, math.pi / 2)
    assert qclose(ph.q, I, 1e-15) and att == 1.0
    ph, _ = slab_phase(RefractiveIndex(0.0, 0.0, 1.0, 0.0), 1.0, math.pi / 2)
    assert qclose(ph.q, K, 1e-15)
    _, att = slab_phase(RefractiveIndex(1.0, 0.1), 1.0, 1.0)
    assert att == pytest.approx(math.exp(-0.1), rel=1e-15)


def test_slab_phase_n3_gives_minus_j():
    ph, _ = slab_phase(RefractiveIndex(0.0, 0.0, 0.0, 1.0), 1.0, math.pi / 2)
    assert qclose(ph.q, -J, 1e-15)


@settings(max_examples=50)
@given(st.tuples(*[st.floats(-2, 2)] * 3), st.floats(0.1, 10), st.floats(0.1, 10))
def test_same_medium_composition(n, w1, w2):
    idx = RefractiveIndex(n[0], 0.0, n[1], n[2])
    whole, _ = slab_phase(idx, 1.0, w1 + w2)
    a, _ = slab_phase(idx, 1.0, w1)
    b, _ = slab_phase(idx, 1.0, w2)
    assert qclose(whole.q, (b * a).q, 1e-12)


def test_nonunit_phase_rejected():
    with pytest.raises(ValueError):
        QuatPhase(Quaternion(1.0, 1.0))


def test_complex_phases_commute_exactly():
    a = QuatPhase(I.scale(0.7).exp())
    b = QuatPhase(I.scale(-2.1).exp())
    assert compose_and_commutator(a, b)[2] == 0.0


def test_perpendicular_quarter_turns():
    # scalar part of (ab)(ba)^-1 is 1 - 2 sin^2(pi/4) sin^2(pi/4) = 1/2
    a = QuatPhase(J.scale(math.pi / 4).exp())
    b = QuatPhase(I.scale(math.pi / 4).exp())
    ab, ba, delta = compose_and_commutator(a, b)
    assert delta > 0
    assert delta == pytest.approx(120.0, abs=1e-10)
    assert (ab.q * ba.q.inverse()).z != 0


@given(units)
def test_self_commutes(a):
    assert compose_and_commutator(a, a)[2] < 1e-12


@given(units, units)
def test_swap_invariance(a, b):
    ab1, ba1, d1 = compose_and_commutator(a, b)
    _, _, d2 = compose_and_commutator(b, a)
    assert d1 == pytest.approx(d2, abs=1e-9)
    c1 = ab1.q * ba1.q.inverse()
    c2 = ba1.q * ab1.q.inverse()
    assert c1.w == pytest.approx(c2.w, abs=1e-12)
    assert np.allclose(c1.as_tuple()[1:], [-v for v in c2.as_tuple()[1:]], atol=1e-12)


WELLS = [RadialPotential.square_well(1.0, -1.0), RadialPotential.square_well(0.5, 3.0),
         RadialPotential.square_well(1.0, -1.0, 0.3, -0.2)]


@pytest.mark.parametrize("relation", ["rayleigh", "serber"])
@pytest.mark.parametrize("ia,ib", [(0, 1), (1, 2), (2, 0)])
def test_elastic_slabs_commute(relation, ia, ib):
    A = SlabSpec(N=1e-3, w=50.0, omega=0.8, scatterer=WELLS[ia])
    B = SlabSpec(N=2e-3, w=30.0, omega=0.8, scatterer=WELLS[ib])
    rep = peres_pipeline(A, B, relation)
    assert rep["delta_deg"] < 1e-10 and rep["below_bound"]
    for s in rep["slabs"].values():
        assert s["n"][2] == 0 and s["n"][3] == 0


def test_injected_index_is_visible():
    A = SlabSpec(N=1e-3, w=1e4, omega=1.0, scatterer=WELLS[0], inject=(1e-4, 0.0))
    B = SlabSpec(N=1e-3, w=1e4, omega=1.0, scatterer=WELLS[1])
    rep = peres_pipeline(A, B)
    assert rep["slabs"]["A"]["qw"] == pytest.approx(1e4)
    assert rep["delta_deg"] > 0
    assert rep["slabs"]["A"]["index_from_scattering_is_complex"]


def test_vacuum_slabs():
    A = SlabSpec(N=0.0, w=3.0, omega=1.0)
    B = SlabSpec(N=0.0, w=5.0, omega=1.0)
    rep = peres_pipeline(A, B)
    assert rep["delta_deg"] == 0.0
    assert rep["slabs"]["A"]["n"] == [1.0, 0.0, 0.0, 0.0]


def test_preset_loads():
    data = load_preset()
    A, B = SlabSpec.from_dict(data["A"]), SlabSpec.from_dict(data["B"])
    assert A.q == pytest.approx(2 * math.pi / 790.0)
    assert peres_pipeline(A, B)["delta_deg"] < 1e-10


def test_slab_round_trip():
    A = SlabSpec(N=1e-3, w=2.0, omega=0.5, scatterer=WELLS[2], inject=(1e-4, 0.0))
    again = SlabSpec.from_dict(A.to_dict())
    assert again.to_dict() == A.to_dict()


def test_invalid_slab():
    with pytest.raises(ValueError):
        SlabSpec(N=-1.0, w=1.0, omega=1.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusecho import PrimitiveDirection, RegimeError, RegimeSpec, TrigPotential
from torusecho.lattice import project_I_lambda
from torusecho.microlocal import Observable, Profile
from torusecho.oracles import (
    DIRAC,
    PUSHFORWARD,
    UNIFORM,
    LimitEntry,
    LimitMeasureSpec,
    bessel_j0_series,
    classify_limit,
    cosine_echo_quadrature,
    predict_echo,
    predict_strong,
    predict_theorem,
    predict_two_microlocal,
)
from torusecho.states import CoherentSpec, PlaneWaveFamily, SuperpositionSpec

# mpmath (30 digits) reference values
J0_SQ = {0.5: 0.88072557910260853, 1.0: 0.58552749951366402, 2.0: 0.050127080984469569}
COHERENT_CRITICAL_T1 = 0.81041311553135777  # x0=(1/4,0), xi0 || (0,1), gaussian w=1, eps=hbar^1.5
STRONG_TILTED_T1 = 0.9975175719962289  # eps=hbar, plane waves along (1,1), V=cos(2 pi x1)

COS1 = TrigPotential.cosine((1, 0))
COS2 = TrigPotential.cosine((0, 1))
D10, D01 = PrimitiveDirection(1, 0), PrimitiveDirection(0, 1)
MAIN = RegimeSpec(1.0, 1.5)


def test_bessel_oracles_agree():
    for t, ref in J0_SQ.items():
        assert bessel_j0_series(t) ** 2 == pytest.approx(ref, abs=1e-15)
        assert cosine_echo_quadrature(t) == pytest.approx(ref, abs=1e-15)


def test_classify_rational_plane_waves():
    spec = classify_limit(PlaneWaveFamily(base_dir=D01, m_of_hbar=0), MAIN)
    assert spec.closed_form and len(spec.entries) == 1
    e = spec.entries[0]
    assert (e.dir, e.weight, e.kind, e.eta0) == (D10, 1.0, UNIFORM, 0.0)
    assert spec.residual_mass == 0.0


def test_classify_omega_sign_follows_h_lambda():
    # k = n (0,1) + m (-1,0): H_Lambda(k) = -m for Lambda = Z(1,0)
    spec = classify_limit(PlaneWaveFamily(base_dir=D01, omega=0.7), MAIN)
    assert spec.entries[0].eta0 == pytest.approx(-0.7)
    spec = classify_limit(PlaneWaveFamily(base_dir=PrimitiveDirection(1, 1), omega=0.5), MAIN)
    e = spec.entries[0]
    assert e.dir == PrimitiveDirection(1, -1) and e.eta0 == pytest.approx(-0.5 * math.sqrt(2))


def test_classify_irrational_is_empty():
    spec = classify_limit(PlaneWaveFamily.fibonacci(600), MAIN)
    assert spec.closed_form and spec.entries == () and spec.residual_mass == 1.0


def test_classify_coherent_cases():
    cs = CoherentSpec((0.1, 0.2), (0.0, 0.5))
    e = classify_limit(cs, RegimeSpec(1, 1.25)).entries[0]
    assert (e.dir, e.weight, e.kind, e.x0, e.eta0) == (D10, 1.0, DIRAC, (0.1, 0.2), 0.0)
    e = classify_limit(cs, RegimeSpec(2.0, 1.5)).entries[0]
    assert e.kind == PUSHFORWARD and e.scale == pytest.approx(math.pi)
    assert classify_limit(cs, RegimeSpec(1, 1.75)).entries == ()
    assert classify_limit(CoherentSpec((0, 0), (1.0, math.sqrt(2))), RegimeSpec(1, 1.25)).entries == ()


def test_classify_superposition_and_failures():
    a, b = CoherentSpec((0, 0), (0, 1)), CoherentSpec((0.5, 0.5), (1, 0))
    spec = classify_limit(SuperpositionSpec((a, b), (1, 1j)), RegimeSpec(1, 1.25))
    assert [e.weight for e in spec.entries] == [0.5, 0.5]
    assert [e.dir for e in spec.entries] == [D10, D01]
    assert not classify_limit("tophat", MAIN).closed_form
    assert not classify_limit(a, RegimeSpec(1, 0.5)).closed_form
    assert not classify_limit(PlaneWaveFamily(base_dir=D01, m_of_hbar=lambda h: 3), MAIN).closed_form
    with pytest.raises(RegimeError):
        predict_theorem(classify_limit("tophat", MAIN), COS1, 1.0)


def test_weights_validated():
    e = LimitEntry(D10, 0.7, DIRAC)
    with pytest.raises(ValueError):
        LimitMeasureSpec(entries=(e, e))
    with pytest.raises(ValueError):
        LimitEntry(D10, -0.1, DIRAC)


def test_empty_spec_is_pure_phase():
    V = COS1 + 0.4
    val = predict_theorem(LimitMeasureSpec(), V, 1.3)
    assert val == pytest.approx(np.exp(1j * 1.3 * 0.4), abs=1e-15)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_uniform_entry_gives_bessel(t):
    spec = LimitMeasureSpec(entries=(LimitEntry(D10, 1.0, UNIFORM),))
    assert predict_echo(spec, COS1, t) == pytest.approx(J0_SQ[t], abs=1e-12)


def test_cos_squared_law():
    spec = LimitMeasureSpec(entries=(LimitEntry(D10, 0.5, DIRAC, x0=(0.0, 0.0)), LimitEntry(D01, 0.5, DIRAC, x0=(0.5, 0.5))))
    for t in np.linspace(0, 2 * math.pi, 17):
        assert predict_echo(spec, COS1 + COS2, t) == pytest.approx(math.cos(t) ** 2, abs=1e-14)


def test_pushforward_against_frozen_quadrature():
    spec = classify_limit(CoherentSpec((0.25, 0.0), (0.0, 0.5)), MAIN)
    assert predict_echo(spec, COS1, 1.0) == pytest.approx(COHERENT_CRITICAL_T1, abs=1e-10)


kinds = st.sampled_from([UNIFORM, DIRAC, PUSHFORWARD])


@settings(max_examples=25)
@given(kinds, st.floats(-2, 2), st.floats(0, 1), st.floats(0, 1), st.floats(0, 3), st.floats(-2, 2))
def test_theorem_invariants(kind, eta0, a, b, t, c):
    prof = CoherentSpec((a, b), (0.0, 1.0))
    e = LimitEntry(D10, 0.6, kind, eta0=eta0, x0=(a, b), profile=prof)
    spec = LimitMeasureSpec(entries=(e,))
    V = COS1 + TrigPotential.cosine((2, 0), 0.3) + COS2
    assert abs(predict_theorem(spec, V, 0.0)) == pytest.approx(1.0, abs=1e-12)
    assert predict_echo(spec, V + c, t) == pytest.approx(predict_echo(spec, V, t), abs=1e-12)
    if kind == UNIFORM:
        assert predict_echo(spec, V.translated((a, b)), t) == pytest.approx(predict_echo(spec, V, t), abs=1e-9)
    if kind == PUSHFORWARD:
        IV = project_I_lambda(V, D10)
        lhs = predict_theorem(spec, IV, t) * np.exp(-1j * t * IV.mean())
        rhs = predict_theorem(spec, V, t) * np.exp(-1j * t * V.mean())
        assert lhs == rhs


def test_strong_branches():
    fam = PlaneWaveFamily(base_dir=D01)
    for alpha in (1.0, 0.5):
        r = RegimeSpec(1.0, alpha)
        assert predict_strong(fam, COS1, 1.0, r) == pytest.approx(J0_SQ[1.0], abs=1e-12)
        assert predict_strong(fam, COS1, 0.0, r) == 1.0
    assert predict_strong(fam, TrigPotential.constant(3.0), 2.0, RegimeSpec(1, 1)) == pytest.approx(1.0, abs=1e-14)
    tilted = PlaneWaveFamily(base_dir=PrimitiveDirection(1, 1))
    assert predict_strong(tilted, COS1, 1.0, RegimeSpec(1, 1)) == pytest.approx(STRONG_TILTED_T1, abs=1e-12)
    # no transport when eps >> hbar: the flow drops out
    assert predict_strong(tilted, COS1, 1.0, RegimeSpec(1, 0.5)) == pytest.approx(J0_SQ[1.0], abs=1e-12)
    with pytest.raises(RegimeError):
        predict_strong(fam, COS1, 1.0, MAIN)


def test_strong_coherent_pointwise():
    cs = CoherentSpec((0.25, 0.0), (0.0, 0.5))
    assert predict_strong(cs, COS1, 1.7, RegimeSpec(1, 0.5)) == pytest.approx(1.0, abs=1e-15)


def test_two_microlocal_limits():
    a = Observable({(0, 0): Profile("gaussian", 1.0, 0.2, 1.0), (1, 0): Profile("constant", 0.5j), (0, 1): Profile("constant", 9.0)})
    plane = classify_limit(PlaneWaveFamily(base_dir=D01), MAIN)
    assert predict_two_microlocal(plane, D10, a) == pytest.approx(math.exp(-0.02), abs=1e-15)
    assert predict_two_microlocal(plane, D01, a) == 0
    two = classify_limit(SuperpositionSpec((PlaneWaveFamily(base_dir=D01), PlaneWaveFamily(base_dir=D10)), (1, 1)), MAIN)
    assert predict_two_microlocal(two, D10, a) == pytest.approx(0.5 * math.exp(-0.02), abs=1e-15)
    coh = classify_limit(CoherentSpec((0.3, 0.1), (0.0, 1.0)), RegimeSpec(1, 1.25))
    want = math.exp(-0.02) + 0.5j * np.exp(2j * math.pi * 0.3)
    assert predict_two_microlocal(coh, D10, a) == pytest.approx(want, abs=1e-15)

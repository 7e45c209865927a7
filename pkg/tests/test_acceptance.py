"""Acceptance criteria 1-8, each at its stated ladder and tolerance.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion. The full run takes about 6 minutes.
"""
import functools
import math

import numpy as np
import pytest

import test_lattice
import test_microlocal
import test_propagator
from torusecho import RegimeSpec, TrigPotential
from torusecho.harness import PASS, judge_shrinking, load_scenario, run_scenario
from torusecho.oracles import cosine_echo_quadrature
from torusecho.propagator import echo, peres_quadratic
from torusecho.states import CoherentSpec, coherent_state, plane_wave

MICRO_SCENARIOS = ["two_microlocal_plane", "two_microlocal_two_plane", "two_microlocal_coherent"]


@functools.lru_cache(maxsize=None)
def run(name):
    return run_scenario(load_scenario(name))


def series(rep, quantity, **label):
    out = [s for s in rep.series if s.quantity == quantity and all(s.label.get(k) == v for k, v in label.items())]
    assert out, f"{rep.scenario}: no {quantity} series with {label}"
    return out


def row_at(s, hbar):
    return next(r for r in s.rows if math.isclose(r[0], hbar, rel_tol=1e-12))


def non_increasing(xs):
    return all(b <= a for a, b in zip(xs, xs[1:]))


def fmt(xs):
    return "[" + ", ".join(f"{x:.3g}" for x in xs) + "]"


@pytest.mark.criterion(1)
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_rational_plane_wave(t, record_property):
    (s,) = series(run("plane_wave_rational"), "echo", t=t)
    hbars, gaps = [r[0] for r in s.rows], s.gaps()
    assert hbars == [2.0**-j for j in range(5, 10)]
    assert s.rows[-1][2] == pytest.approx(cosine_echo_quadrature(t), abs=1e-12)
    record_property("detail", f"gaps j=5..9 {fmt(gaps)}")
    assert gaps[-1] < 0.05
    assert non_increasing(gaps[-3:])


@pytest.mark.criterion(2)
def test_irrational_plane_wave(record_property):
    (s,) = series(run("plane_wave_irrational"), "echo", t=1.0)
    sims = [r[1] for r in s.rows]
    record_property("detail", f"|k|={fmt([1 / r[0] for r in s.rows])} 1-echo={fmt([1 - e for e in sims])}")
    assert 1 / s.rows[-1][0] == pytest.approx(math.hypot(233, 377))
    assert sims[-1] >= 0.95
    assert all(b > a for a, b in zip(sims, sims[1:]))


@pytest.mark.criterion(3)
def test_two_coherent_states(record_property):
    rep = run("coherent_superposition")
    parts = []
    for t in (math.pi / 4, math.pi / 2, math.pi):
        (s,) = series(rep, "echo", t=t)
        h, sim, th, gap = row_at(s, 2.0**-8)
        assert th == pytest.approx(math.cos(t) ** 2, abs=1e-12)
        parts.append((t, sim, gap))
    record_property("detail", "; ".join(f"t={t:.4g} sim={sim:.4f} gap={g:.3g}" for t, sim, g in parts))
    assert all(g < 0.1 for _, _, g in parts)


@pytest.mark.criterion(4)
def test_coherent_critical(record_property):
    rep = run("coherent_critical")
    assert rep.manifest["limit_measure"]["entries"][0]["kind"] == "dirac_x_pushforward"
    (s,) = series(rep, "echo", t=1.0)
    gaps = s.gaps()
    record_property("detail", f"gaps hbar=2^-5..2^-8 {fmt(gaps)}")
    assert [r[0] for r in s.rows] == [2.0**-j for j in range(5, 9)]
    assert gaps[-1] < 0.1
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


@pytest.mark.criterion(5)
@pytest.mark.parametrize("name", ["strong_eps_hbar", "strong_eps_sqrt_hbar"])
def test_strong_perturbations(name, record_property):
    (s,) = series(run(name), "echo", t=1.0)
    h, sim, th, gap = s.rows[-1]
    record_property("detail", f"hbar={h:.4g} sim={sim:.6f} theory={th:.6f} gap={gap:.3g}")
    assert h == 2.0**-9
    assert gap < 0.05


@pytest.mark.criterion(6)
@pytest.mark.parametrize("t", [0.025, 0.05, 0.1])
def test_peres_short_time(t, record_property):
    sc = load_scenario("plane_wave_rational")
    psi = plane_wave((0, 256), 32, center=(0, 256))
    smp = echo(psi, sc.potential, sc.regime, t, dt_control=1e-9)
    quad = peres_quadratic(psi, sc.potential, sc.regime, t * sc.regime.tau_c(psi.hbar))
    record_property("detail", f"E_sim={smp.echo:.10f} E_quad={quad:.10f}")
    assert abs(smp.echo - quad) <= 0.1 * (1 - smp.echo)


@pytest.mark.criterion(7)
@pytest.mark.parametrize(
    "check",
    [
        test_propagator.test_unitarity_and_echo_bound,
        test_microlocal.test_multiplier_identity_on_single_modes,
        test_microlocal.test_two_microlocal_plane_wave_closed_form,
        test_lattice.test_project_matches_line_average,
        test_microlocal.test_operator_norm_bound,
        test_microlocal.test_convention_gap_bound_shrinks_along_ladder,
    ],
    ids=lambda f: f.__name__[5:],
)
def test_property_suite(check):
    check()


@pytest.mark.criterion(7)
def test_zero_perturbation_echo_is_one():
    V = TrigPotential.cosine((1, 0))
    for spec in (CoherentSpec((0.3, 0.1), (0.0, 0.5)), CoherentSpec((0.0, 0.5), (0.7, -0.2), profile="bump")):
        psi = coherent_state(spec, 2.0**-6)
        for t in (0.5, 1.0, 3.0):
            assert abs(echo(psi, V * 0.0, RegimeSpec(1.0, 1.5), t).echo - 1) <= 1e-12
    for t in (0.5, 1.0):
        assert abs(echo(plane_wave((3, 5), 32, center=(3, 5)), TrigPotential.zero(), RegimeSpec(1.0, 1.0), t).echo - 1) <= 1e-12


@pytest.mark.criterion(7)
@pytest.mark.parametrize("name", MICRO_SCENARIOS)
def test_convention_gap_bound_shrinks_on_bundled_ladders(name, record_property):
    bounds = series(run(name), "convention_gap_bound")
    record_property("detail", "; ".join(f"{s.label['observable']} {fmt(s.gaps())}" for s in bounds))
    assert all(judge_shrinking(s.gaps()) == PASS for s in bounds)


@pytest.mark.criterion(8)
@pytest.mark.parametrize("name", MICRO_SCENARIOS)
def test_two_microlocal_convergence(name, record_property):
    rep = run(name)
    ss = series(rep, "two_microlocal")
    assert len({s.label["observable"] for s in ss}) == 3
    record_property(
        "detail", "; ".join(f"{s.label['observable']}/{s.label['convention']} final={s.gaps()[-1]:.3g}" for s in ss)
    )
    for s in ss:
        assert s.gaps()[-1] < 0.05
        assert np.all(np.isfinite(s.gaps()))
    assert rep.verdict == PASS

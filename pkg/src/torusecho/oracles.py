"""Closed-form semiclassical limits of the echo and of two-microlocal pairings.

Limit measures are described symbolically (``LimitMeasureSpec``); the
predictions integrate the phase ``Theta`` against them with fixed, recorded
quadratures that must pass a resolution-doubling check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConvergenceError, RegimeError
from .lattice import PrimitiveDirection, h_lambda, rational_direction
from .microlocal import Observable
from .potentials import RegimeSpec, TrigPotential, phase_integral
from .states import CoherentSpec, PlaneWaveFamily, SuperpositionSpec

TWO_PI = 2.0 * math.pi

X_GRID = 128
XI_NODES = 128
XI_NODES_CAP = 2048
X_GRID_CAP = 2048
DOUBLING_TOL = 1e-6
BOX_SIGMAS = 10.0

UNIFORM = "uniform_x_dirac_eta"
DIRAC = "dirac_x_dirac_eta"
PUSHFORWARD = "dirac_x_pushforward"

QUADRATURE = {
    "x_grid": [X_GRID, X_GRID_CAP],
    "xi_nodes": [XI_NODES, XI_NODES_CAP],
    "box_sigmas": BOX_SIGMAS,
    "doubling_tol": DOUBLING_TOL,
}


@dataclass(frozen=True)
class LimitEntry:
    """One component ``F0_Lambda`` of the limit measure.

    ``uniform_x_dirac_eta``: ``dx (x) delta_{eta0}``.
    ``dirac_x_dirac_eta``: ``delta_{x0} (x) delta_{eta0}``.
    ``dirac_x_pushforward``: ``delta_{x0}`` times the image of ``|phi_hat(z)|^2 dz``
    under ``z -> scale * H_Lambda(z)``.
    """

    dir: PrimitiveDirection
    weight: float
    kind: str
    eta0: float = 0.0
    x0: tuple[float, float] = (0.0, 0.0)
    profile: CoherentSpec | None = None
    scale: float = TWO_PI

    def __post_init__(self):
        if self.kind not in (UNIFORM, DIRAC, PUSHFORWARD):
            raise ValueError(f"unknown limit kind {self.kind!r}")
        if self.weight < 0:
            raise ValueError("weights must be nonnegative")
        if self.kind == PUSHFORWARD and self.profile is None:
            raise ValueError("pushforward entries need a profile")

    def to_dict(self) -> dict:
        d = {"dir": str(self.dir), "weight": self.weight, "kind": self.kind}
        if self.kind == PUSHFORWARD:
            d.update(x0=list(self.x0), profile=self.profile.profile, width=self.profile.width, scale=self.scale)
        else:
            d["eta0"] = self.eta0
            if self.kind == DIRAC:
                d["x0"] = list(self.x0)
        return d


@dataclass(frozen=True)
class LimitMeasureSpec:
    entries: tuple = ()
    first_term: complex = 1.0
    closed_form: bool = True
    reason: str = ""
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if sum(e.weight for e in self.entries) > 1 + 1e-12:
            raise ValueError("limit weights exceed total mass 1")

    @property
    def residual_mass(self) -> float:
        return 1.0 - sum(e.weight for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "closed_form": self.closed_form,
            "reason": self.reason,
            "entries": [e.to_dict() for e in self.entries],
            "residual_mass": self.residual_mass,
            "first_term": [complex(self.first_term).real, complex(self.first_term).imag],
            "notes": list(self.notes),
        }


def no_closed_form(reason: str) -> LimitMeasureSpec:
    return LimitMeasureSpec(closed_form=False, reason=reason)


def _scaled(spec: LimitMeasureSpec, w: float) -> list:
    return [LimitEntry(e.dir, e.weight * w, e.kind, e.eta0, e.x0, e.profile, e.scale) for e in spec.entries]


def _plane_family_limit(fam: PlaneWaveFamily, regime: RegimeSpec) -> LimitMeasureSpec:
    if fam.ks is not None:
        if fam.limit_direction is None:
            return no_closed_form("explicit lattice sequence without a limit direction")
        d = rational_direction(fam.limit_direction)
        if d is None:
            return LimitMeasureSpec(notes=("irrational limit direction: no two-microlocal mass",))
        if not all(d.contains(k) for k in fam.ks):
            return no_closed_form("sequence approaches a rational direction off its line")
        base, omega = d, 0.0
    else:
        base = fam.base_dir
        if fam.omega is not None:
            omega = float(fam.omega)
        elif callable(fam.m_of_hbar):
            return no_closed_form("m(hbar) law given without its limit omega")
        else:
            # bounded m: 2 pi m hbar^2 / eps -> 0 whenever eps >> hbar^2
            omega = 0.0
    lam = PrimitiveDirection.of(*base.perp)
    # H_Lambda(k) = sign * m * L with the canonical generator of Lambda
    sign = 1.0 if lam.vector == base.perp else -1.0
    entry = LimitEntry(lam, 1.0, UNIFORM, eta0=sign * omega * base.length)
    return LimitMeasureSpec(
        entries=(entry,),
        notes=("x-marginal of the plane-wave limit taken uniform",),
    )


def _coherent_limit(cs: CoherentSpec, regime: RegimeSpec) -> LimitMeasureSpec:
    a = regime.alpha
    d = rational_direction(cs.xi0)
    if d is None or a > 1.5 + 1e-12:
        return LimitMeasureSpec()
    lam = d.orthogonal
    if abs(a - 1.5) <= 1e-12:
        return LimitMeasureSpec(entries=(LimitEntry(lam, 1.0, PUSHFORWARD, x0=cs.x0, profile=cs, scale=TWO_PI / regime.c),))
    return LimitMeasureSpec(entries=(LimitEntry(lam, 1.0, DIRAC, eta0=0.0, x0=cs.x0),))


def classify_limit(data, regime: RegimeSpec) -> LimitMeasureSpec:
    """Symbolic limit ``sum_Lambda F0_Lambda`` for a recognized initial-data family."""
    if not regime.is_main:
        return no_closed_form(f"alpha={regime.alpha} is outside 1 < alpha < 2")
    if isinstance(data, PlaneWaveFamily):
        return _plane_family_limit(data, regime)
    if isinstance(data, CoherentSpec):
        return _coherent_limit(data, regime)
    if isinstance(data, SuperpositionSpec):
        entries, notes = [], []
        for part, w in zip(data.parts, data.mass_fractions()):
            sub = classify_limit(part, regime)
            if not sub.closed_form:
                return sub
            entries += _scaled(sub, w)
            notes += list(sub.notes)
        notes.append("cross terms between parts neglected")
        return LimitMeasureSpec(entries=tuple(entries), notes=tuple(dict.fromkeys(notes)))
    return no_closed_form(f"unrecognized initial data {type(data).__name__}")


def _torus_grid(n: int) -> np.ndarray:
    g = np.arange(n) / n
    return np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1)


def _doubled(f, n: int, what: str, cap: int):
    """Refine by doubling from ``n`` until two successive values agree."""
    prev = f(n)
    while 2 * n <= cap:
        n *= 2
        cur = f(n)
        if abs(cur - prev) <= DOUBLING_TOL:
            return cur
        prev = cur
    raise ConvergenceError(f"{what}: no agreement within {DOUBLING_TOL:g} up to resolution {cap}")


def _gl_box(n: int, half: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return x * half, w * half


def _pushforward_average(profile: CoherentSpec, dir: PrimitiveDirection, scale: float, g, nodes: int) -> complex:
    """``int g(scale H_Lambda(z)) |phi_hat(z)|^2 dz / int |phi_hat|^2`` on a 10-sigma box."""
    x, w = _gl_box(nodes, BOX_SIGMAS * profile.sigma())
    z = np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1)
    dens = np.abs(profile.phi_hat(z)) ** 2 * np.outer(w, w)
    vals = g(scale * h_lambda(dir, z))
    return complex(np.sum(vals * dens) / np.sum(dens))


def _entry_integral(e: LimitEntry, V: TrigPotential, t: float) -> complex:
    if e.kind == UNIFORM:
        def f(n):
            return complex(np.mean(np.exp(1j * phase_integral(V, e.dir, _torus_grid(n), e.eta0, t))))
        return _doubled(f, X_GRID, "uniform-x quadrature", X_GRID_CAP)
    if e.kind == DIRAC:
        return complex(np.exp(1j * phase_integral(V, e.dir, np.asarray(e.x0), e.eta0, t)))
    x0 = np.asarray(e.x0)

    def g(eta):
        return np.exp(1j * phase_integral(V, e.dir, x0, eta, t))

    return _doubled(
        lambda n: _pushforward_average(e.profile, e.dir, e.scale, g, n), XI_NODES, "pushforward quadrature", XI_NODES_CAP
    )


def predict_theorem(spec: LimitMeasureSpec, V: TrigPotential, t: float) -> complex:
    """Limit overlap ``e^{it<V>} (<F0,1> - sum w) + sum_Lambda int e^{i Theta} dF0_Lambda``."""
    if not spec.closed_form:
        raise RegimeError(f"no closed-form limit: {spec.reason}")
    weights = sum(e.weight for e in spec.entries)
    val = np.exp(1j * t * V.mean()) * (complex(spec.first_term) - weights)
    for e in spec.entries:
        val += e.weight * _entry_integral(e, V, t)
    return complex(val)


def predict_echo(spec: LimitMeasureSpec, V: TrigPotential, t: float) -> float:
    return abs(predict_theorem(spec, V, t)) ** 2


# ---------------------------------------------------------------------------
# strong perturbations


def _flow_phase(V: TrigPotential, x: np.ndarray, xi, tau: float) -> np.ndarray:
    """``int_0^tau V(x + s xi) ds``, mode by mode."""
    acc = 0j
    for (l1, l2), v in V.coeffs.items():
        base = v * np.exp(1j * TWO_PI * (l1 * x[..., 0] + l2 * x[..., 1]))
        w = TWO_PI * (l1 * xi[0] + l2 * xi[1])
        if abs(w * tau) < 1e-6:
            acc = acc + base * tau * (1 + 0.5j * w * tau - (w * tau) ** 2 / 6)
        else:
            acc = acc + base * (np.exp(1j * w * tau) - 1) / (1j * w)
    return np.real(acc)


def _strong_phase(V, x, xi, t, regime):
    if abs(regime.alpha - 1.0) <= 1e-12:
        c = regime.c
        return c * _flow_phase(V, x, xi, t / c)
    return t * V(x)


def _strong_points(data):
    """``(weight, kind, x0, xi0)`` atoms of the limit Wigner measure."""
    if isinstance(data, PlaneWaveFamily):
        if data.ks is not None:
            if data.limit_direction is None:
                raise RegimeError("plane-wave sequence needs a limit direction")
            v = np.asarray(data.limit_direction, dtype=float)
        else:
            v = np.asarray(data.base_dir.vector, dtype=float)
        return [(1.0, "uniform", None, TWO_PI * v / np.hypot(*v))]
    if isinstance(data, CoherentSpec):
        return [(1.0, "point", np.asarray(data.x0), TWO_PI * np.asarray(data.xi0))]
    if isinstance(data, SuperpositionSpec):
        out = []
        for part, w in zip(data.parts, data.mass_fractions()):
            out += [(w * a, k, x, xi) for a, k, x, xi in _strong_points(part)]
        return out
    raise RegimeError(f"no strong-regime limit for {type(data).__name__}")


def predict_strong_overlap(data, V: TrigPotential, t: float, regime: RegimeSpec) -> complex:
    if regime.alpha > 1.0:
        raise RegimeError(f"strong-perturbation limits need alpha <= 1, got {regime.alpha}")
    if t == 0:
        return 1.0 + 0j
    val = 0j
    for w, kind, x0, xi in _strong_points(data):
        if kind == "uniform":
            def f(n, xi=xi):
                return complex(np.mean(np.exp(1j * _strong_phase(V, _torus_grid(n), xi, t, regime))))
            val += w * _doubled(f, X_GRID, "strong-regime x quadrature", X_GRID_CAP)
        else:
            val += w * complex(np.exp(1j * _strong_phase(V, x0, xi, t, regime)))
    return complex(val)


def predict_strong(data, V: TrigPotential, t: float, regime: RegimeSpec) -> float:
    """Limit echo for ``eps = c hbar`` (flow-averaged phase) or ``hbar << eps <= 1`` (phase ``tV``)."""
    return abs(predict_strong_overlap(data, V, t, regime)) ** 2


# ---------------------------------------------------------------------------
# two-microlocal limits


def predict_two_microlocal(spec: LimitMeasureSpec, dir: PrimitiveDirection, a: Observable) -> complex:
    """``<F0_Lambda, a>`` for the entries of ``spec`` living on ``dir``."""
    if not spec.closed_form:
        raise RegimeError(f"no closed-form limit: {spec.reason}")
    af = a.filtered(lambda l: dir.contains(l))
    val = 0j
    for e in spec.entries:
        if e.dir != dir:
            continue
        if e.kind == UNIFORM:
            p = af.modes.get((0, 0))
            val += 0 if p is None else e.weight * complex(p(e.eta0))
            continue
        for l, p in af.modes.items():
            ph = np.exp(1j * TWO_PI * (l[0] * e.x0[0] + l[1] * e.x0[1]))
            if e.kind == DIRAC:
                val += e.weight * ph * complex(p(e.eta0))
            else:
                val += e.weight * ph * _doubled(
                    lambda n, p=p: _pushforward_average(e.profile, e.dir, e.scale, p, n),
                    XI_NODES,
                    "pushforward quadrature",
                    XI_NODES_CAP,
                )
    return complex(val)


# ---------------------------------------------------------------------------
# Bessel references


def bessel_j0_series(t: float, terms: int = 60) -> float:
    """``J0(t) = sum_m (-1)^m (t/2)^{2m} / (m!)^2``."""
    s, term = 0.0, 1.0
    q = -(t * t) / 4.0
    for m in range(terms):
        if m:
            term *= q / (m * m)
        s += term
    return s


def cosine_echo_quadrature(t: float, n: int = 256) -> float:
    """``|int_0^1 e^{i t cos 2 pi x} dx|^2`` by the periodic trapezoid rule."""
    x = np.arange(n) / n
    return abs(np.mean(np.exp(1j * t * np.cos(TWO_PI * x)))) ** 2

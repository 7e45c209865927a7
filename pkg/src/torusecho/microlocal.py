"""Torus quantization of x-trigonometric symbols and two-microlocal pairings.

Symbols are finite sums ``a(x, xi, eta) = sum_l e^{2 pi i l.x} p_l(eta) chi(|xi|)``
where each ``p_l`` belongs to a small family of profiles whose sup-norm and
Lipschitz constant are known in closed form. Quantization follows
``Op(a) e_n = a(x, 2 pi hbar n) e_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exceptions import ConfigError, TruncationError
from .lattice import PrimitiveDirection, h_lambda
from .potentials import RegimeSpec, TrigPotential
from .propagator import DEFAULT_DT_CONTROL, adaptive_pairing, free_evolve
from .states import FourierState

TWO_PI = 2.0 * math.pi
CONVENTIONS = ("input", "output")
OVERFLOW_TOL = 1e-12
BOUND_SLACK = 1e-12


@dataclass(frozen=True)
class Profile:
    """A bounded function of one real variable.

    ``gaussian``: ``amp exp(-(s - center)^2 / (2 width^2))``.
    ``cosine``: ``amp cos^2(pi (s - center) / (2 width))`` on ``|s - center| < width``, else 0.
    ``constant``: ``amp``.
    """

    kind: str = "constant"
    amp: complex = 1.0
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "cosine", "constant"):
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if self.kind != "constant" and not self.width > 0:
            raise ConfigError("profile width must be positive")
        object.__setattr__(self, "amp", complex(self.amp))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            return np.full(s.shape, self.amp, dtype=complex)
        u = (s - self.center) / self.width
        if self.kind == "gaussian":
            return self.amp * np.exp(-0.5 * u * u)
        return self.amp * np.where(np.abs(u) < 1, np.cos(0.5 * math.pi * u) ** 2, 0.0)

    @property
    def sup(self) -> float:
        return abs(self.amp)

    @property
    def lipschitz(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "gaussian":
            return abs(self.amp) / (self.width * math.sqrt(math.e))
        # derivative of cos^2(pi u / 2) peaks at pi/2 per unit u
        return abs(self.amp) * math.pi / (2.0 * self.width)

    def conj(self) -> "Profile":
        return Profile(self.kind, self.amp.conjugate(), self.center, self.width)

    def to_config(self) -> dict:
        d = {"profile": self.kind, "re": self.amp.real, "im": self.amp.imag}
        if self.kind != "constant":
            d.update(center=self.center, width=self.width)
        return d

    @classmethod
    def from_config(cls, d: dict) -> "Profile":
        try:
            return cls(
                kind=d.get("profile", "constant"),
                amp=complex(float(d.get("re", 1.0)), float(d.get("im", 0.0))),
                center=float(d.get("center", 0.0)),
                width=float(d.get("width", 1.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad profile entry {d!r}: {exc}") from exc


@dataclass(frozen=True)
class Observable:
    """Symbol with finite x-Fourier support.

    ``modes[l]`` is the eta-profile of the ``e^{2 pi i l.x}`` component.
    ``xi_cutoff`` multiplies every component by ``chi(|xi|)``. A nonzero
    ``flow_shift`` s composes with the geodesic flow, ``a(x + s xi, xi, eta)``,
    which multiplies component ``l`` by ``e^{2 pi i s l.xi}``.
    """

    modes: dict
    xi_cutoff: Profile | None = None
    flow_shift: float = 0.0
    name: str = ""

    def __post_init__(self):
        clean = {}
        for l, p in self.modes.items():
            key = (int(l[0]), int(l[1]))
            if not isinstance(p, Profile):
                raise ConfigError(f"mode {key} needs a Profile")
            clean[key] = p
        object.__setattr__(self, "modes", dict(sorted(clean.items())))

    @classmethod
    def constant(cls, value: complex = 1.0) -> "Observable":
        return cls({(0, 0): Profile("constant", value)}, name="one")

    @classmethod
    def from_config(cls, d: dict) -> "Observable":
        modes = {}
        for entry in d.get("modes", []):
            if "l" not in entry or len(entry["l"]) != 2:
                raise ConfigError(f"observable mode needs l=[int,int]: {entry!r}")
            modes[(int(entry["l"][0]), int(entry["l"][1]))] = Profile.from_config(entry)
        cut = d.get("xi_cutoff")
        return cls(
            modes,
            xi_cutoff=Profile.from_config(cut) if cut else None,
            flow_shift=float(d.get("flow_shift", 0.0)),
            name=str(d.get("name", "")),
        )

    def to_config(self) -> dict:
        d = {"name": self.name, "modes": [{"l": list(l), **p.to_config()} for l, p in self.modes.items()]}
        if self.xi_cutoff is not None:
            d["xi_cutoff"] = self.xi_cutoff.to_config()
        if self.flow_shift:
            d["flow_shift"] = self.flow_shift
        return d

    def filtered(self, keep: Callable) -> "Observable":
        kept = {l: p for l, p in self.modes.items() if bool(keep(l))}
        return Observable(kept, self.xi_cutoff, self.flow_shift, self.name)

    def shifted_by_flow(self, s: float) -> "Observable":
        return Observable(self.modes, self.xi_cutoff, self.flow_shift + s, self.name)

    @property
    def support_radius(self) -> float:
        return max((math.hypot(*l) for l in self.modes), default=0.0)

    def is_hermitian(self, tol: float = 0.0) -> bool:
        """Real-valuedness: ``p_{-l} = conj(p_l)`` profile by profile."""
        for (l1, l2), p in self.modes.items():
            q = self.modes.get((-l1, -l2))
            if q is None:
                return False
            c = p.conj()
            if (q.kind, q.center, q.width) != (c.kind, c.center, c.width) or abs(q.amp - c.amp) > tol:
                return False
        return True

    def sup_bound(self) -> float:
        """``sum_l sup|p_l| * sup|chi|``: operator-norm bound for every quantization used here."""
        chi = 1.0 if self.xi_cutoff is None else self.xi_cutoff.sup
        return chi * sum(p.sup for p in self.modes.values())

    def __call__(self, x, xi, eta):
        """Pointwise symbol value (broadcasting)."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        xs = x + self.flow_shift * xi
        out = 0j
        for (l1, l2), p in self.modes.items():
            out = out + p(eta) * np.exp(1j * TWO_PI * (l1 * xs[..., 0] + l2 * xs[..., 1]))
        if self.xi_cutoff is not None:
            out = out * self.xi_cutoff(np.hypot(xi[..., 0], xi[..., 1]))
        return out


def _shift_into(dst: np.ndarray, src: np.ndarray, l) -> float:
    """Add ``src`` translated by ``l`` into ``dst``; return squared norm pushed outside."""
    n = src.shape[0]
    l1, l2 = int(l[0]), int(l[1])
    if abs(l1) >= n or abs(l2) >= n:
        return float(np.sum(np.abs(src) ** 2))
    s1 = slice(max(0, -l1), n - max(0, l1))
    s2 = slice(max(0, -l2), n - max(0, l2))
    d1 = slice(max(0, l1), n - max(0, -l1))
    d2 = slice(max(0, l2), n - max(0, -l2))
    dst[d1, d2] += src[s1, s2]
    return float(np.sum(np.abs(src) ** 2) - np.sum(np.abs(src[s1, s2]) ** 2))


def _xi(psi: FourierState):
    k1, k2 = psi.modes()
    return TWO_PI * psi.hbar * k1, TWO_PI * psi.hbar * k2


def _apply(a: Observable, psi: FourierState, eta: np.ndarray, convention: str, check: bool) -> np.ndarray:
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    x1, x2 = _xi(psi)
    base = psi.coeffs
    if a.xi_cutoff is not None:
        base = base * a.xi_cutoff(np.hypot(x1, x2))
    out = np.zeros_like(psi.coeffs)
    lost = 0.0
    for l, p in a.modes.items():
        src = base
        if a.flow_shift:
            src = src * np.exp(1j * TWO_PI * a.flow_shift * (l[0] * x1 + l[1] * x2))
        if convention == "input":
            lost += _shift_into(out, p(eta) * src, l)
        else:
            tmp = np.zeros_like(out)
            lost += _shift_into(tmp, src, l)
            out += p(eta) * tmp
    if check and lost > OVERFLOW_TOL * max(psi.norm() ** 2, 1e-300):
        raise TruncationError(
            f"Op(a) pushes {lost:.3e} of squared norm out of the window",
            required_window=psi.window + 2 * int(math.ceil(a.support_radius)) + 2,
        )
    return out


def op_apply(a: Observable, psi: FourierState, eta_map: Callable | None = None, convention: str = "input") -> FourierState:
    """Apply ``Op_hbar(a)`` to ``psi``.

    The eta-profiles are evaluated at ``eta_map(xi)`` (default ``|xi|``) with
    ``xi = 2 pi hbar k`` taken at the input mode or the output mode.
    """
    x1, x2 = _xi(psi)
    xi = np.stack([x1, x2], axis=-1)
    eta = np.hypot(x1, x2) if eta_map is None else np.asarray(eta_map(xi), dtype=float)
    return psi.with_coeffs(_apply(a, psi, eta, convention, check=True))


@dataclass(frozen=True)
class TwoMicrolocalSample:
    dir: PrimitiveDirection
    hbar: float
    value: complex
    convention: str = "input"
    epsilon: float = float("nan")
    bound: float = float("inf")
    diagnostics: dict = field(default_factory=dict, compare=False)


def eta_scale(hbar: float, regime: RegimeSpec) -> float:
    """``2 pi hbar^2 / eps``: the factor turning ``H_Lambda(n)`` into eta."""
    return TWO_PI * hbar * hbar / regime.epsilon(hbar)


def two_microlocal(
    psi1: FourierState,
    psi2: FourierState,
    dir: PrimitiveDirection,
    a: Observable,
    regime: RegimeSpec,
    convention: str = "input",
) -> TwoMicrolocalSample:
    """Finite-hbar pairing ``<psi1, Op(I_Lambda a)(x, hbar H_Lambda(xi)/eps) psi2>``.

    Only components ``l`` on the lattice line survive. The eta-argument
    ``2 pi (hbar^2/eps) H_Lambda(.)`` is taken at the input mode ``n`` or the
    output mode ``m`` according to ``convention``.
    """
    if a.xi_cutoff is not None or a.flow_shift:
        raise ConfigError("two-microlocal observables depend on (x, eta) only")
    if psi1.hbar != psi2.hbar:
        raise ValueError("states must share hbar")
    if psi1.window != psi2.window:
        raise ValueError("states must share the window size")
    if not psi2.same_layout(psi1):
        psi2 = psi2.relayout(psi1.window, psi1.center)
    af = a.filtered(lambda l: dir.contains(l))
    k1, k2 = psi1.modes()
    eta = eta_scale(psi1.hbar, regime) * h_lambda(dir, np.stack([k1, k2], axis=-1).astype(float))
    # modes leaving the window pair with zero coefficients of psi1
    out = _apply(af, psi2, eta, convention, check=False)
    value = complex(np.vdot(psi1.coeffs, out))
    bound = psi1.norm() * psi2.norm() * af.sup_bound()
    if abs(value) > bound * (1 + BOUND_SLACK) + BOUND_SLACK:
        raise AssertionError(f"operator-norm bound violated: |{value}| > {bound}")
    return TwoMicrolocalSample(dir, psi1.hbar, value, convention, regime.epsilon(psi1.hbar), bound)


def convention_gap_bound(psi1: FourierState, psi2: FourierState, dir: PrimitiveDirection, a: Observable, regime: RegimeSpec) -> float:
    """Upper bound on ``|value(input) - value(output)|``.

    The two eta-arguments differ by ``2 pi (hbar^2/eps) H_Lambda(l)`` with
    ``|H_Lambda(l)| <= |l|``.
    """
    af = a.filtered(lambda l: dir.contains(l))
    lip = sum(p.lipschitz * math.hypot(*l) for l, p in af.modes.items())
    return eta_scale(psi1.hbar, regime) * lip * psi1.norm() * psi2.norm()


def fidelity_functional(
    psi1: FourierState,
    psi2: FourierState,
    V: TrigPotential,
    regime: RegimeSpec,
    t_rescaled: float,
    a: Observable,
    dt_control: float = DEFAULT_DT_CONTROL,
    eta_map: Callable | None = None,
    convention: str = "input",
) -> complex:
    """``<u1_pert(t tau_c), Op(a) u2_free(t tau_c)>`` with adaptive time step."""
    if psi1.hbar != psi2.hbar:
        raise ValueError("states must share hbar")
    h = psi1.hbar
    T = t_rescaled * regime.tau_c(h)
    target = op_apply(a, free_evolve(psi2, T), eta_map=eta_map, convention=convention)
    val, _, _ = adaptive_pairing(psi1, V, regime.epsilon(h), T, lambda u: u.inner(target), dt_control)
    return complex(val)

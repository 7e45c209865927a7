"""Normalized initial data on the torus stored as truncated Fourier series.

A ``FourierState`` holds the coefficients on an ``N x N`` box of modes
``k = center + m`` with ``m`` in ``[-N/2, N/2)^2``. Centering the box on the
occupied frequencies keeps the transforms small even when ``|k| ~ 1/hbar``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft

from .exceptions import TruncationError
from .lattice import PrimitiveDirection

TWO_PI = 2.0 * math.pi

NORM_TOL = 1e-9
# boundary shell used by the construction invariant (fraction of N, Euclidean)
SHELL_FRACTION = 0.45
SHELL_TOL = 1e-10


def fft_size(n: int) -> int:
    """Smallest even 5-smooth size ``>= n`` (cheap FFT lengths)."""
    n = max(int(math.ceil(n)), 4)
    while True:
        if n % 2 == 0:
            m = n
            for f in (2, 3, 5):
                while m % f == 0:
                    m //= f
            if m == 1:
                return n
        n += 1


@dataclass(frozen=True, eq=False)
class FourierState:
    """Wavefunction coefficients on a centered box of lattice modes."""

    hbar: float
    coeffs: np.ndarray
    center: tuple[int, int] = (0, 0)
    prenorm: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % 2:
            raise ValueError("coefficients must be an even square array")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", (int(self.center[0]), int(self.center[1])))

    @property
    def window(self) -> int:
        return self.coeffs.shape[0]

    def offsets(self) -> np.ndarray:
        return np.arange(self.window) - self.window // 2

    def modes(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer mode arrays ``(k1, k2)`` of shape ``(N, N)``."""
        m = self.offsets()
        return np.meshgrid(self.center[0] + m, self.center[1] + m, indexing="ij")

    def index_of(self, k) -> tuple[int, int] | None:
        h = self.window // 2
        i = int(k[0]) - self.center[0] + h
        j = int(k[1]) - self.center[1] + h
        if 0 <= i < self.window and 0 <= j < self.window:
            return i, j
        return None

    def coefficient(self, k) -> complex:
        idx = self.index_of(k)
        return 0j if idx is None else complex(self.coeffs[idx])

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.coeffs, self.coeffs).real))

    def same_layout(self, other: "FourierState") -> bool:
        return self.window == other.window and self.center == other.center

    def inner(self, other: "FourierState") -> complex:
        """``<self, other> = sum conj(self_k) other_k``."""
        if not self.same_layout(other):
            other = other.relayout(self.window, self.center)
        return complex(np.vdot(self.coeffs, other.coeffs))

    def with_coeffs(self, coeffs, **kw) -> "FourierState":
        return replace(self, coeffs=coeffs, **kw)

    def normalized(self) -> "FourierState":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero state")
        return self.with_coeffs(self.coeffs / nrm, prenorm=nrm)

    def relayout(self, window: int, center=(0, 0)) -> "FourierState":
        """Copy coefficients onto another box; refuses to drop any mass."""
        out = np.zeros((window, window), dtype=complex)
        k1, k2 = self.modes()
        h = window // 2
        i = k1 - int(center[0]) + h
        j = k2 - int(center[1]) + h
        ok = (i >= 0) & (i < window) & (j >= 0) & (j < window)
        lost = float(np.sum(np.abs(self.coeffs[~ok]) ** 2))
        if lost > 0:
            raise TruncationError(f"relayout would drop {lost:.3e} of squared norm")
        out[i[ok], j[ok]] = self.coeffs[ok]
        return FourierState(self.hbar, out, center=tuple(center), prenorm=self.prenorm, meta=dict(self.meta))

    def shell_mass(self, fraction: float = SHELL_FRACTION, metric: str = "euclidean") -> float:
        """Squared norm carried by the outer part of the box.

        ``euclidean``: modes with ``|m| >= fraction * N``; ``box``: modes with
        ``max(|m1|, |m2|) >= fraction * N`` (``m`` relative to the center).
        """
        m = self.offsets()
        m1, m2 = np.meshgrid(m, m, indexing="ij")
        if metric == "euclidean":
            mask = np.hypot(m1, m2) >= fraction * self.window
        else:
            mask = np.maximum(np.abs(m1), np.abs(m2)) >= fraction * self.window
        return float(np.sum(np.abs(self.coeffs[mask]) ** 2))

    def position_values(self, grid: int | None = None) -> np.ndarray:
        """``psi`` on the ``grid x grid`` lattice ``x = (i, j)/grid``.

        ``grid`` must be at least the window size.
        """
        n = self.window
        g = n if grid is None else int(grid)
        if g < n:
            raise ValueError("position grid must be at least as fine as the window")
        buf = np.zeros((g, g), dtype=complex)
        m = self.offsets()
        buf[np.ix_(m % g, m % g)] = self.coeffs
        vals = sfft.ifft2(buf) * (g * g)
        x = np.arange(g) / g
        phase = np.exp(1j * TWO_PI * np.add.outer(self.center[0] * x, self.center[1] * x))
        return vals * phase


def check_construction(state: FourierState) -> FourierState:
    """Enforce the unit-norm and boundary-shell invariants."""
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise ValueError(f"state norm {state.norm()} deviates from 1")
    shell = state.shell_mass()
    if shell >= SHELL_TOL:
        raise TruncationError(
            f"boundary-shell mass {shell:.3e} exceeds {SHELL_TOL:g}; enlarge the window",
            required_window=fft_size(2 * state.window),
        )
    return state


# ---------------------------------------------------------------------------
# plane waves


def plane_wave(k, window: int, center=(0, 0)) -> FourierState:
    """``e_k(x) = exp(2 pi i k.x)`` with ``hbar = 1/|k|``."""
    k = (int(k[0]), int(k[1]))
    nrm = math.hypot(*k)
    if nrm < 1:
        raise ValueError("plane wave needs |k| >= 1")
    coeffs = np.zeros((window, window), dtype=complex)
    idx = FourierState(1.0 / nrm, np.zeros((window, window)), center=center).index_of(k)
    if idx is None:
        raise TruncationError(f"mode {k} lies outside the window", required_window=fft_size(2 * (abs(k[0]) + abs(k[1])) + 2))
    coeffs[idx] = 1.0
    return FourierState(1.0 / nrm, coeffs, center=center, meta={"k": list(k)})


@dataclass(frozen=True)
class PlaneWaveFamily:
    """A sequence of plane waves indexed by ``hbar``.

    Either ``k = n(hbar) v + m(hbar) v_perp`` along ``base_dir`` (with
    ``n(hbar) = round(1/(hbar L))`` and ``m`` from ``m_of_hbar``), or an
    explicit list of lattice vectors ``ks``. ``limit_direction`` records the
    limiting unit direction for explicit sequences (``None`` when the
    sequence is along a single rational line).
    """

    base_dir: PrimitiveDirection | None = None
    m_of_hbar: Callable[[float], int] | int = 0
    ks: Sequence[tuple[int, int]] | None = None
    limit_direction: tuple[float, float] | None = None
    omega: float | None = None

    def k_for(self, hbar: float, epsilon: float | None = None) -> tuple[int, int]:
        if self.ks is not None:
            return min(self.ks, key=lambda k: abs(math.hypot(*k) - 1.0 / hbar))
        if self.base_dir is None:
            raise ValueError("family needs base_dir or ks")
        L = self.base_dir.length
        n = int(round(1.0 / (hbar * L)))
        if self.omega is not None:
            if epsilon is None:
                raise ValueError("omega-parametrized family needs epsilon")
            m = int(round(self.omega * epsilon / (TWO_PI * hbar * hbar)))
        elif callable(self.m_of_hbar):
            m = int(self.m_of_hbar(hbar))
        else:
            m = int(self.m_of_hbar)
        v, w = self.base_dir.vector, self.base_dir.perp
        return (n * v[0] + m * w[0], n * v[1] + m * w[1])

    @classmethod
    def fibonacci(cls, max_norm: float) -> "PlaneWaveFamily":
        """``k = (F_j, F_{j+1})`` up to ``|k| <= max_norm``; golden-ratio limit."""
        ks = []
        a, b = 1, 1
        while math.hypot(a, b) <= max_norm:
            ks.append((a, b))
            a, b = b, a + b
        phi = (1 + math.sqrt(5)) / 2
        return cls(ks=tuple(ks), limit_direction=(1.0, phi))


# ---------------------------------------------------------------------------
# coherent states

_BUMP_NODES = 1000


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 0.5
    out[inside] = np.exp(-1.0 / (1.0 - (2.0 * s[inside]) ** 2))
    return out


@lru_cache(maxsize=None)
def _bump_rule():
    # Gauss-Legendre on (-1/2, 1/2); the bump is analytic inside, flat at the ends
    x, w = np.polynomial.legendre.leggauss(_BUMP_NODES)
    s, ws = x / 2.0, w / 2.0
    b = _bump(s)
    norm1d = math.sqrt(float(np.sum(ws * b * b)))
    return s, ws * b / norm1d


def bump_hat_1d(xi) -> np.ndarray:
    """Fourier transform of the unit-L2 one-dimensional bump on ``(-1/2, 1/2)``."""
    s, wb = _bump_rule()
    xi = np.asarray(xi, dtype=float)
    flat = xi.reshape(-1)
    out = np.empty(flat.shape)
    step = 4096
    for i in range(0, flat.size, step):
        out[i : i + step] = np.cos(TWO_PI * np.outer(flat[i : i + step], s)) @ wb
    return out.reshape(xi.shape)


@dataclass(frozen=True)
class CoherentSpec:
    """Centre ``(x0, xi0)`` and profile of a periodized wave packet.

    ``profile`` is ``"gaussian"`` (``phi(x) = exp(-|x|^2/(2 w^2)) / (sqrt(pi) w)``)
    or ``"bump"`` (a smooth product bump supported in ``(-w/2, w/2)^2``).
    """

    x0: tuple[float, float]
    xi0: tuple[float, float]
    profile: str = "gaussian"
    width: float = 1.0

    def __post_init__(self):
        if self.xi0[0] == 0 and self.xi0[1] == 0:
            raise ValueError("xi0 must be nonzero")
        if self.profile not in ("gaussian", "bump"):
            raise ValueError(f"unknown profile {self.profile!r}")
        if not self.width > 0:
            raise ValueError("width must be positive")
        object.__setattr__(self, "x0", (float(self.x0[0]), float(self.x0[1])))
        object.__setattr__(self, "xi0", (float(self.xi0[0]), float(self.xi0[1])))

    def phi(self, y) -> np.ndarray:
        """The unscaled profile on R^2 (trailing dimension 2)."""
        y = np.asarray(y, dtype=float)
        w = self.width
        if self.profile == "gaussian":
            r2 = y[..., 0] ** 2 + y[..., 1] ** 2
            return np.exp(-r2 / (2 * w * w)) / (math.sqrt(math.pi) * w)
        c = 1.0 / _bump_l2()
        return c * c * _bump(y[..., 0] / w) * _bump(y[..., 1] / w) / w

    def phi_hat(self, xi) -> np.ndarray:
        """Fourier transform ``int phi(y) exp(-2 pi i y.xi) dy`` (real, even)."""
        xi = np.asarray(xi, dtype=float)
        w = self.width
        if self.profile == "gaussian":
            r2 = xi[..., 0] ** 2 + xi[..., 1] ** 2
            return 2.0 * math.sqrt(math.pi) * w * np.exp(-2.0 * math.pi**2 * w * w * r2)
        return w * bump_hat_1d(w * xi[..., 0]) * bump_hat_1d(w * xi[..., 1])

    def phi_hat_1d(self, s) -> np.ndarray:
        """One factor of the product ``phi_hat(xi) = f(xi_1) f(xi_2)``."""
        s = np.asarray(s, dtype=float)
        w = self.width
        if self.profile == "gaussian":
            return math.sqrt(2.0 * math.sqrt(math.pi) * w) * np.exp(-2.0 * math.pi**2 * w * w * s * s)
        return math.sqrt(w) * bump_hat_1d(w * s)

    def capture_radius(self) -> float:
        """Radius (profile units) outside which ``|phi_hat|^2`` carries < 1e-12."""
        return (1.2 if self.profile == "gaussian" else 60.0) / self.width

    def sigma(self) -> float:
        """Per-coordinate standard deviation of ``|phi_hat|^2``."""
        if self.profile == "gaussian":
            return 1.0 / (math.sqrt(8.0) * math.pi * self.width)
        xs = np.linspace(-40, 40, 8001)
        d = bump_hat_1d(xs) ** 2
        return math.sqrt(float(np.sum(d * xs * xs) / np.sum(d))) / self.width


@lru_cache(maxsize=None)
def _bump_l2() -> float:
    x, w = np.polynomial.legendre.leggauss(_BUMP_NODES)
    return math.sqrt(float(np.sum(w / 2.0 * _bump(x / 2.0) ** 2)))


def coherent_required_window(spec: CoherentSpec, hbar: float, center=None) -> int:
    """Window size capturing the packet around ``center`` (default: its peak)."""
    peak = np.asarray(spec.xi0) / hbar
    if center is None:
        center = np.rint(peak)
    off = float(np.hypot(*(peak - np.asarray(center, dtype=float))))
    half = off + spec.capture_radius() / math.sqrt(hbar)
    return fft_size(2 * half / (2 * SHELL_FRACTION) + 2)


def coherent_state(spec: CoherentSpec, hbar: float, window: int | None = None, center=None) -> FourierState:
    """Periodized coherent state ``sum_l phi_hbar(x + l)`` from its Fourier series.

    ``psi_hat(k) = hbar^(1/2) exp(-2 pi i (k - xi0/hbar).x0) phi_hat(hbar^(1/2) (k - xi0/hbar))``,
    renormalized to unit norm; the norm before renormalization is kept in
    ``prenorm``.
    """
    peak = np.asarray(spec.xi0) / hbar
    if center is None:
        center = (int(np.rint(peak[0])), int(np.rint(peak[1])))
    need = coherent_required_window(spec, hbar, center)
    if window is None:
        window = need
    if window < need:
        raise TruncationError(f"window {window} too small for the packet; need {need}", required_window=need)
    m = np.arange(window) - window // 2
    d1 = center[0] + m - peak[0]
    d2 = center[1] + m - peak[1]
    sq = math.sqrt(hbar)
    # the profile is a product, so the coefficients are an outer product
    f1 = spec.phi_hat_1d(sq * d1) * np.exp(-1j * TWO_PI * d1 * spec.x0[0])
    f2 = spec.phi_hat_1d(sq * d2) * np.exp(-1j * TWO_PI * d2 * spec.x0[1])
    raw = FourierState(hbar, sq * np.outer(f1, f2), center=center)
    st = raw.normalized()
    st = replace(st, meta={"kind": "coherent", "x0": list(spec.x0), "xi0": list(spec.xi0), "profile": spec.profile, "width": spec.width})
    return check_construction(st)


def superpose(states: Sequence[FourierState], weights: Sequence[complex]) -> FourierState:
    """Normalized ``sum_j w_j psi_j``; ``prenorm`` reports the norm before scaling."""
    if len(states) != len(weights) or not states:
        raise ValueError("need one weight per state")
    h = states[0].hbar
    for s in states[1:]:
        if abs(s.hbar - h) > 1e-15 * h:
            raise ValueError("superposed states must share hbar")
        if s.window != states[0].window:
            raise ValueError("superposed states must share the window size")
    base = states[0]
    acc = np.zeros_like(base.coeffs)
    for s, w in zip(states, weights):
        if s.center != base.center:
            s = s.relayout(base.window, base.center)
        acc = acc + complex(w) * s.coeffs
    out = FourierState(h, acc, center=base.center).normalized()
    return replace(out, meta={"kind": "superposition", "parts": [dict(s.meta) for s in states]})


def frequency_localization(psi: FourierState, delta: float, R: float) -> tuple[float, float]:
    """Mass of ``psi_hat`` on ``{hbar^2 (2 pi |k|)^2 <= delta}`` and on ``{>= R}``."""
    k1, k2 = psi.modes()
    lam = (psi.hbar * TWO_PI) ** 2 * (k1.astype(float) ** 2 + k2.astype(float) ** 2)
    w = np.abs(psi.coeffs) ** 2
    return float(np.sum(w[lam <= delta])), float(np.sum(w[lam >= R]))


@dataclass(frozen=True)
class SuperpositionSpec:
    """Weighted combination of initial-data families (plane-wave or coherent)."""

    parts: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.parts) != len(self.weights) or not self.parts:
            raise ValueError("need one weight per part")
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "weights", tuple(complex(w) for w in self.weights))

    def mass_fractions(self) -> list[float]:
        """``|w_j|^2 / sum |w|^2``: asymptotic share of each (asymptotically orthogonal) part."""
        m = [abs(w) ** 2 for w in self.weights]
        tot = sum(m)
        return [x / tot for x in m]

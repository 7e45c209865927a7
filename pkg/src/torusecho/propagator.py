"""Free and perturbed Schrodinger propagation on the torus, and the echo.

Both equations are ``i hbar d_t u = -hbar^2 Lap u / 2 (+ eps V u)``. The free
flow is diagonal in the Fourier basis and applied exactly; the perturbed flow
uses Strang splitting with exact kinetic steps.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import fft as sfft

from .exceptions import ConvergenceError, TruncationError
from .potentials import RegimeSpec, TrigPotential, moments
from .states import FourierState, fft_size

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# aliasing guard: squared norm allowed in the outer 10% of the window
ALIAS_FRACTION = 0.4
ALIAS_TOL = 1e-10
MAX_HALVINGS = 12
DEFAULT_DT_CONTROL = 1e-4


def _kinetic_exponent(psi: FourierState) -> np.ndarray:
    """``hbar (2 pi |k|)^2 / 2`` on the window (angular frequency of each mode)."""
    k1, k2 = psi.modes()
    ksq = k1.astype(np.int64) ** 2 + k2.astype(np.int64) ** 2
    return 0.5 * psi.hbar * TWO_PI**2 * ksq.astype(float)


def free_evolve(psi: FourierState, t_physical: float) -> FourierState:
    """Exact free evolution: mode ``k`` picks up ``exp(-i t hbar (2 pi |k|)^2 / 2)``."""
    if t_physical == 0:
        return psi
    return psi.with_coeffs(psi.coeffs * np.exp(-1j * t_physical * _kinetic_exponent(psi)))


@dataclass
class SplitStepResult:
    state: FourierState
    n_steps: int
    dt: float
    norm_drift: float


def _split_step(psi: FourierState, V: TrigPotential, epsilon: float, t: float, n_steps: int) -> SplitStepResult:
    n = psi.window
    dt = t / n_steps
    kin = np.exp(-1j * dt * sfft.ifftshift(_kinetic_exponent(psi)))
    vgrid = V.on_grid(n)
    half = np.exp(-0.5j * epsilon * dt * vgrid / psi.hbar)
    full = half * half
    # position values of exp(-2 pi i c.x) psi on the n x n grid
    u = sfft.ifft2(sfft.ifftshift(psi.coeffs)) * half
    for step in range(n_steps):
        u = sfft.ifft2(kin * sfft.fft2(u))
        u *= full if step < n_steps - 1 else half
    out = psi.with_coeffs(sfft.fftshift(sfft.fft2(u)))
    drift = abs(out.norm() - psi.norm())
    return SplitStepResult(out, n_steps, dt, drift)


def _check_alias(psi: FourierState):
    shell = psi.shell_mass(ALIAS_FRACTION, metric="box")
    if shell > ALIAS_TOL:
        raise TruncationError(
            f"{shell:.3e} of squared norm reached the outer 10% of the window {psi.window}",
            required_window=fft_size(2 * psi.window),
        )


def perturbed_evolve(psi: FourierState, V: TrigPotential, epsilon: float, t_physical: float, dt: float) -> FourierState:
    """Strang-split evolution with potential ``epsilon * V`` up to ``t_physical``.

    ``dt`` must divide ``t_physical`` (to relative rounding 1e-9).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_physical == 0:
        return psi
    if V.radius >= psi.window // 2:
        raise TruncationError("potential modes do not fit the window", required_window=fft_size(4 * V.radius + 4))
    ratio = abs(t_physical) / dt
    n_steps = int(round(ratio))
    if n_steps < 1 or abs(ratio - n_steps) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"dt={dt} does not divide t={t_physical}")
    _check_alias(psi)
    res = _split_step(psi, V, epsilon, t_physical, n_steps)
    _check_alias(res.state)
    return res.state


@dataclass(frozen=True)
class EchoSample:
    """One echo evaluation at rescaled time ``t_rescaled`` (units of ``tau_c``)."""

    hbar: float
    epsilon: float
    t_rescaled: float
    overlap: complex
    dt_used: float = float("nan")
    dt_coarse: float = float("nan")
    n_steps: int = 0
    norm_drift: float = 0.0
    window: int = 0
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def echo(self) -> float:
        return abs(self.overlap) ** 2


def _occupied_frequency(psi: FourierState, V: TrigPotential, epsilon: float) -> float:
    """Largest angular frequency the splitting has to resolve.

    Kinetic gaps between occupied modes and their ``V``-neighbours, and the
    potential phase rate ``eps max|V| / hbar``.
    """
    k1, k2 = psi.modes()
    w = np.abs(psi.coeffs) ** 2
    occ = w > 1e-16 * w.max()
    a1, a2 = k1[occ].astype(float), k2[occ].astype(float)
    gap = 0.0
    for l1, l2 in V.coeffs:
        if (l1, l2) == (0, 0):
            continue
        d = 0.5 * psi.hbar * TWO_PI**2 * np.abs(2 * (a1 * l1 + a2 * l2) + l1 * l1 + l2 * l2)
        gap = max(gap, float(d.max()))
    # the mean of V only adds a global phase
    pot = epsilon * (V.sup_bound() - abs(V.mean())) / psi.hbar
    return max(gap, pot)


def initial_steps(psi: FourierState, V: TrigPotential, epsilon: float, t_physical: float) -> int:
    """Starting step count: one radian of the fastest relevant phase per step."""
    freq = _occupied_frequency(psi, V, epsilon)
    return max(2, int(math.ceil(abs(t_physical) * freq)))


def adaptive_pairing(
    psi: FourierState,
    V: TrigPotential,
    epsilon: float,
    t_physical: float,
    pairing: Callable[[FourierState], complex],
    dt_control: float = DEFAULT_DT_CONTROL,
    n0: int | None = None,
):
    """Evaluate ``pairing(u_eps(t))`` halving ``dt`` until it stabilizes.

    Stops at the first halving whose result differs from the previous one by
    less than ``dt_control`` (complex modulus of the difference). Returns
    ``(value, fine, coarse)`` where ``fine``/``coarse`` are ``SplitStepResult``.
    """
    if t_physical == 0:
        r = SplitStepResult(psi, 0, 0.0, 0.0)
        return pairing(psi), r, r
    if V.radius >= psi.window // 2:
        raise TruncationError("potential modes do not fit the window", required_window=fft_size(4 * V.radius + 4))
    _check_alias(psi)
    n = n0 or initial_steps(psi, V, epsilon, t_physical)
    prev = _split_step(psi, V, epsilon, t_physical, n)
    prev_val = pairing(prev.state)
    history = [(prev.dt, prev_val)]
    for _ in range(MAX_HALVINGS):
        n *= 2
        cur = _split_step(psi, V, epsilon, t_physical, n)
        val = pairing(cur.state)
        history.append((cur.dt, val))
        if abs(val - prev_val) < dt_control:
            _check_alias(cur.state)
            log.debug("dt converged: coarse=%g fine=%g change=%.3e", prev.dt, cur.dt, abs(val - prev_val))
            return val, cur, prev
        prev, prev_val = cur, val
    raise ConvergenceError(
        f"no dt convergence after {MAX_HALVINGS} halvings",
        diagnostics={"history": [(d, complex(v)) for d, v in history]},
    )


def echo(
    psi: FourierState,
    V: TrigPotential,
    regime: RegimeSpec,
    t_rescaled: float,
    dt_control: float = DEFAULT_DT_CONTROL,
) -> EchoSample:
    """Overlap ``<u_eps(t tau_c), u(t tau_c)>`` of perturbed and free evolutions."""
    h = psi.hbar
    eps = regime.epsilon(h)
    T = t_rescaled * regime.tau_c(h)
    if t_rescaled == 0:
        return EchoSample(h, eps, 0.0, complex(psi.inner(psi)), window=psi.window)
    free = free_evolve(psi, T)
    val, fine, coarse = adaptive_pairing(psi, V, eps, T, lambda u: u.inner(free), dt_control)
    return EchoSample(
        hbar=h,
        epsilon=eps,
        t_rescaled=float(t_rescaled),
        overlap=complex(val),
        dt_used=fine.dt,
        dt_coarse=coarse.dt,
        n_steps=fine.n_steps,
        norm_drift=fine.norm_drift,
        window=psi.window,
    )


def peres_quadratic(psi: FourierState, V: TrigPotential, regime: RegimeSpec, t_physical: float) -> float:
    """Short-time quadratic model ``1 - (eps t / hbar)^2 Var_psi(V)``."""
    mean, second = moments(V, psi)
    var = second - mean * mean
    eps = regime.epsilon(psi.hbar)
    return 1.0 - (eps * t_physical / psi.hbar) ** 2 * var

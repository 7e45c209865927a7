"""Real trigonometric potentials, perturbation regimes and phase integrals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .exceptions import ConfigError, TruncationError
from .lattice import PrimitiveDirection

TWO_PI = 2.0 * math.pi

# below this |2 pi eta j L t| the closed form switches to its Taylor series
SERIES_SWITCH = 1e-6


def _as_key(k) -> tuple[int, int]:
    k1, k2 = k
    if int(k1) != k1 or int(k2) != k2:
        raise ValueError(f"Fourier index {k!r} is not an integer pair")
    return (int(k1), int(k2))


@dataclass(frozen=True)
class TrigPotential:
    """A real potential ``V(x) = sum_k c_k exp(2 pi i k.x)`` with finite support.

    ``coeffs`` maps integer pairs to complex amplitudes and must satisfy
    ``c_{-k} = conj(c_k)``.
    """

    coeffs: Mapping[tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.coeffs).items():
            v = complex(v)
            if v != 0:
                clean[_as_key(k)] = v
        for (k1, k2), v in clean.items():
            partner = clean.get((-k1, -k2), 0j)
            if abs(partner - v.conjugate()) > 1e-12 * max(1.0, abs(v)):
                raise ValueError(f"coefficients at {(k1, k2)} and {(-k1, -k2)} are not conjugate")
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls) -> "TrigPotential":
        return cls({})

    @classmethod
    def constant(cls, value: float) -> "TrigPotential":
        return cls({(0, 0): float(value)})

    @classmethod
    def cosine(cls, k, amplitude: float = 1.0) -> "TrigPotential":
        """``amplitude * cos(2 pi k.x)``."""
        k1, k2 = _as_key(k)
        if (k1, k2) == (0, 0):
            return cls.constant(amplitude)
        return cls({(k1, k2): amplitude / 2, (-k1, -k2): amplitude / 2})

    @classmethod
    def from_config(cls, entries) -> "TrigPotential":
        """Build from a list of ``{k: [int, int], re: float, im: float}``.

        Missing partners ``-k`` are filled in by conjugation; inconsistent
        partners are rejected.
        """
        coeffs: dict[tuple[int, int], complex] = {}
        for entry in entries:
            try:
                k = _as_key(entry["k"])
                v = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"bad potential entry {entry!r}") from exc
            if k in coeffs:
                raise ConfigError(f"duplicate potential mode {k}")
            coeffs[k] = v
        for (k1, k2), v in list(coeffs.items()):
            mk = (-k1, -k2)
            if mk not in coeffs:
                coeffs[mk] = v.conjugate()
            elif abs(coeffs[mk] - v.conjugate()) > 1e-12 * max(1.0, abs(v)):
                raise ConfigError(f"potential modes {(k1, k2)} and {mk} violate Hermitian symmetry")
        if (0, 0) in coeffs and abs(coeffs[(0, 0)].imag) > 1e-12:
            raise ConfigError("mean of the potential must be real")
        return cls(coeffs)

    def to_config(self) -> list[dict]:
        return [{"k": list(k), "re": v.real, "im": v.imag} for k, v in self.coeffs.items()]

    # -- structure ----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = TrigPotential.constant(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0j) + v
        return TrigPotential(out)

    __radd__ = __add__

    def __mul__(self, s: float):
        return TrigPotential({k: v * float(s) for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def filtered(self, keep: Callable) -> "TrigPotential":
        return TrigPotential({k: v for k, v in self.coeffs.items() if keep(k)})

    def translated(self, shift) -> "TrigPotential":
        """``x -> V(x + shift)``."""
        s = np.asarray(shift, dtype=float)
        return TrigPotential(
            {k: v * np.exp(1j * TWO_PI * (k[0] * s[0] + k[1] * s[1])) for k, v in self.coeffs.items()}
        )

    @property
    def support(self) -> list[tuple[int, int]]:
        return list(self.coeffs)

    @property
    def radius(self) -> int:
        """Largest ``max(|k1|, |k2|)`` over the support (0 for constants)."""
        return max((max(abs(a), abs(b)) for a, b in self.coeffs), default=0)

    def mean(self) -> float:
        return self.coeffs.get((0, 0), 0j).real

    def sup_bound(self) -> float:
        """``sum |c_k|``, an upper bound for ``max |V|``."""
        return float(sum(abs(v) for v in self.coeffs.values()))

    # -- evaluation ---------------------------------------------------------
    def __call__(self, x) -> np.ndarray | float:
        return evaluate(self, x)

    def on_grid(self, n: int) -> np.ndarray:
        """Values on the ``n x n`` grid ``x = (i/n, j/n)``, indexed ``[i, j]``."""
        x = np.arange(n) / n
        out = np.zeros((n, n))
        for (k1, k2), v in self.coeffs.items():
            e1 = np.exp(1j * TWO_PI * k1 * x)
            e2 = np.exp(1j * TWO_PI * k2 * x)
            out += (v * np.outer(e1, e2)).real
        return out


def evaluate(V: TrigPotential, x) -> np.ndarray | float:
    """Evaluate ``V`` at point(s) ``x`` (trailing dimension 2)."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros(x.shape[:-1], dtype=complex)
    for (k1, k2), v in V.coeffs.items():
        acc = acc + v * np.exp(1j * TWO_PI * (k1 * x[..., 0] + k2 * x[..., 1]))
    if acc.size and np.max(np.abs(acc.imag)) > 1e-9 * max(1.0, V.sup_bound()):
        raise ArithmeticError("potential evaluation produced a non-real value")
    val = acc.real
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class RegimeSpec:
    """Perturbation size ``eps(hbar) = c * hbar**alpha``."""

    c: float = 1.0
    alpha: float = 1.5

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("regime constant c must be positive")

    def epsilon(self, hbar: float) -> float:
        return self.c * hbar**self.alpha

    def tau_c(self, hbar: float) -> float:
        """Critical time scale ``hbar / eps``."""
        return hbar / self.epsilon(hbar)

    @property
    def is_main(self) -> bool:
        """``hbar^2 << eps << hbar``."""
        return 1.0 < self.alpha < 2.0

    def is_strong(self, hbar: float | None = None) -> bool:
        if self.alpha > 1.0:
            return False
        return hbar is None or self.epsilon(hbar) <= 1.0

    def to_dict(self) -> dict:
        return {"c": self.c, "alpha": self.alpha}


def moments(V: TrigPotential, psi, tol: float = 1e-12) -> tuple[float, float]:
    """``(<psi, V psi>, <psi, V^2 psi>)`` by exact Fourier convolution.

    Raises ``TruncationError`` when ``V psi`` carries more than ``tol`` of
    squared norm outside the state's window.
    """
    c = psi.coeffs
    n = c.shape[0]
    r = V.radius
    if r >= n // 2:
        raise TruncationError(f"potential radius {r} does not fit a window of {n}", required_window=4 * r)
    padded = np.zeros((n + 2 * r, n + 2 * r), dtype=complex)
    for (k1, k2), v in V.coeffs.items():
        padded[r + k1 : r + k1 + n, r + k2 : r + k2 + n] += v * c
    inside = padded[r : r + n, r : r + n]
    total = float(np.vdot(padded, padded).real)
    spill = total - float(np.vdot(inside, inside).real)
    if spill > tol * max(1.0, total):
        raise TruncationError(
            f"V psi leaks {spill:.3e} of squared norm outside the window of {n}",
            required_window=2 * n,
        )
    first = complex(np.vdot(c, inside))
    return first.real, total


def phase_integral(V: TrigPotential, direction: PrimitiveDirection, x, eta, t) -> np.ndarray | float:
    """``int_0^t I(V)(x + s eta v/L) ds`` in closed form.

    Only modes ``k = j v`` of ``V`` contribute. Broadcasts over ``x`` (trailing
    dimension 2), ``eta`` and ``t``.
    """
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    t = np.asarray(t, dtype=float)
    L = direction.length
    p, q = direction.vector
    acc = 0j
    for (k1, k2), v in V.coeffs.items():
        if not direction.contains((k1, k2)):
            continue
        j = (k1 * p + k2 * q) // (p * p + q * q)
        base = v * np.exp(1j * TWO_PI * (k1 * x[..., 0] + k2 * x[..., 1]))
        if j == 0:
            acc = acc + base * t
            continue
        z = TWO_PI * eta * j * L * t
        small = np.abs(z) < SERIES_SWITCH
        zs = np.where(small, 1.0, z)
        closed = t * (np.exp(1j * zs) - 1.0) / (1j * zs)
        series = t * (1.0 + 1j * z / 2 - z * z / 6)
        acc = acc + base * np.where(small, series, closed)
    acc = np.asarray(acc)
    val = acc.real
    return float(val) if val.ndim == 0 else val

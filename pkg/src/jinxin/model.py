"""Parameters, grids and the three state representations of the diffusive Jin-Xin system.

The scaled system is

    u_t + v_x = 0,
    eps^2 v_t + lam^2 u_x = f(u) - v,        f(u) = a u + h(u),

with h a polynomial starting at degree two.  Besides (u, v) the module
handles the kinetic (BGK) pair (f1, f2) and the conservative-dissipative
pair (w1, w2).  All fields live on a periodic grid and every derivative is
spectral.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ParameterDomainError(ValueError):
    """Raised when model parameters leave the admissible domain."""


@dataclass(frozen=True)
class ModelParams:
    """Scaling constants and nonlinearity.

    Attributes
    ----------
    epsilon : float
        Relaxation / diffusive scaling parameter, ``epsilon > 0``.
    lam : float
        Characteristic speed ``lambda > 0``.
    a : float
        Slope of the linear flux, ``a = f'(0)``.
    h : tuple of float
        Polynomial coefficients of the nonlinear flux part,
        ``h(u) = h[0] u**2 + h[1] u**3 + ...``.  The empty tuple is the
        linear model.  Default is Burgers, ``h(u) = u**2 / 2``.
    """

    epsilon: float
    lam: float = 1.0
    a: float = 0.0
    h: tuple[float, ...] = (0.5,)

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(float(c) for c in self.h))
        if not self.epsilon > 0:
            raise ParameterDomainError(f"epsilon must be positive, got {self.epsilon}")
        if not self.lam > 0:
            raise ParameterDomainError(f"lambda must be positive, got {self.lam}")
        if not self.lam**2 - self.a**2 * self.epsilon**2 > 0:
            raise ParameterDomainError(
                "lambda^2 - a^2 epsilon^2 must be positive "
                f"(lambda={self.lam}, a={self.a}, epsilon={self.epsilon})"
            )

    @property
    def h_name(self) -> str:
        if not any(self.h):
            return "zero"
        if len(self.h) == 1:
            return "quadratic"
        return "polynomial"

    @property
    def sound(self) -> float:
        """``sqrt(lambda^2 - a^2 epsilon^2)``, the reduced wave speed."""
        return float(np.sqrt(self.lam**2 - self.a**2 * self.epsilon**2))

    @property
    def diffusivity(self) -> float:
        """Effective diffusivity ``lambda^2 - a^2 epsilon^2`` of the slow branch."""
        return self.lam**2 - self.a**2 * self.epsilon**2

    def replace(self, **changes) -> "ModelParams":
        values = dict(epsilon=self.epsilon, lam=self.lam, a=self.a, h=self.h)
        values.update(changes)
        return ModelParams(**values)

    def h_eval(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        # Horner on h(u) / u^2
        for c in reversed(self.h):
            out = out * u + c
        return out * u * u

    def dh_eval(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        for k, c in enumerate(self.h):
            out = out + (k + 2) * c * u ** (k + 1)
        return out


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L/2, L/2)`` with ``n`` nodes."""

    n: int
    length: float

    def __post_init__(self):
        n = int(self.n)
        if n < 8 or n & (n - 1):
            raise ParameterDomainError(f"grid size must be a power of two >= 8, got {self.n}")
        if not self.length > 0:
            raise ParameterDomainError(f"domain length must be positive, got {self.length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        """Physical frequencies ``2 pi k / L`` in numpy FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def rxi(self) -> np.ndarray:
        """Non-negative frequencies matching ``numpy.fft.rfft`` output."""
        return 2 * np.pi * np.fft.rfftfreq(self.n, d=self.dx)

    def rfft(self, u):
        return np.fft.rfft(u, axis=-1)

    def irfft(self, uh):
        return np.fft.irfft(uh, n=self.n, axis=-1)

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask over ``rxi``: keeps integer wavenumbers ``|k| < n/3``."""
        k = np.arange(self.n // 2 + 1)
        return k < self.n / 3

    def derivative(self, u, order: int = 1) -> np.ndarray:
        """Spectral derivative of a real periodic field."""
        uh = self.rfft(u)
        mult = (1j * self.rxi) ** order
        if order % 2:
            mult[-1] = 0.0  # odd derivatives of the Nyquist mode are not real
        return self.irfft(mult * uh)

    def integrate(self, u) -> float:
        return float(np.sum(u, axis=-1) * self.dx)


@dataclass(frozen=True)
class SpectralField:
    """Full complex Fourier coefficients of a field on ``grid``.

    Coefficients follow ``numpy.fft.fft`` ordering; ``xi`` gives the matching
    physical frequency of each entry.
    """

    values: np.ndarray
    grid: Grid

    @classmethod
    def from_real(cls, u, grid: Grid) -> "SpectralField":
        return cls(np.fft.fft(np.asarray(u, dtype=float)), grid)

    def to_real(self) -> np.ndarray:
        return np.fft.ifft(self.values).real

    @property
    def xi(self) -> np.ndarray:
        return self.grid.xi

    def is_conjugate_symmetric(self, rtol: float = 1e-12) -> bool:
        v = self.values
        mirrored = np.conj(np.roll(v[::-1], 1))  # entry k -> conj(entry -k)
        scale = max(np.max(np.abs(v)), 1e-300)
        return bool(np.max(np.abs(v - mirrored)) <= rtol * scale)


@dataclass(frozen=True)
class StateUV:
    """Original variables: conserved density ``u`` and flux-like ``v``."""

    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class StateBGK:
    """Kinetic pair moving right (``f1``) and left (``f2``) at speed ``lam/eps``."""

    f1: np.ndarray
    f2: np.ndarray


@dataclass(frozen=True)
class StateCD:
    """Conservative (``w1 = u``) and dissipative (``w2``) variables."""

    w1: np.ndarray
    w2: np.ndarray

    def stack(self) -> np.ndarray:
        return np.stack([np.asarray(self.w1, float), np.asarray(self.w2, float)])

    @classmethod
    def from_stack(cls, w) -> "StateCD":
        return cls(np.array(w[0], dtype=float), np.array(w[1], dtype=float))


def f_eval(u, p: ModelParams) -> np.ndarray:
    """Flux ``f(u) = a u + h(u)``."""
    u = np.asarray(u, dtype=float)
    return p.a * u + p.h_eval(u)


def maxwellians(u, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    u = np.asarray(u, dtype=float)
    half_flux = p.epsilon * f_eval(u, p) / (2 * p.lam)
    return 0.5 * u + half_flux, 0.5 * u - half_flux


def uv_to_bgk(s: StateUV, p: ModelParams) -> StateBGK:
    u = np.asarray(s.u, dtype=float)
    scaled_v = p.epsilon * np.asarray(s.v, dtype=float) / p.lam
    return StateBGK(0.5 * (u + scaled_v), 0.5 * (u - scaled_v))


def bgk_to_uv(s: StateBGK, p: ModelParams) -> StateUV:
    f1 = np.asarray(s.f1, dtype=float)
    f2 = np.asarray(s.f2, dtype=float)
    return StateUV(f1 + f2, (p.lam / p.epsilon) * (f1 - f2))


def uv_to_cd(s: StateUV, p: ModelParams) -> StateCD:
    u = np.asarray(s.u, dtype=float)
    v = np.asarray(s.v, dtype=float)
    return StateCD(u.copy(), p.epsilon * (v - p.a * u) / p.sound)


def cd_to_uv(s: StateCD, p: ModelParams) -> StateUV:
    w1 = np.asarray(s.w1, dtype=float)
    w2 = np.asarray(s.w2, dtype=float)
    return StateUV(w1.copy(), p.a * w1 + p.sound * w2 / p.epsilon)


def symmetrizer(p: ModelParams) -> np.ndarray:
    """Constant right symmetrizer of the ``(u, eps^2 v)`` form of the system."""
    e2 = p.epsilon**2
    return np.array([[1.0, p.a * e2], [p.a * e2, p.lam**2 * e2]])


def gaussian(grid: Grid, amplitude: float = 0.05, sigma: float = 1.0, center: float = 0.0):
    """Default initial density ``amplitude * exp(-(x - center)^2 / (2 sigma^2))``."""
    return amplitude * np.exp(-((grid.x - center) ** 2) / (2 * sigma**2))


def well_prepared_data(u0, p: ModelParams, g: Grid) -> StateUV:
    """Initial data ``(u0, f(u0) - lam^2 u0_x)`` sitting O(eps) off equilibrium."""
    u0 = np.asarray(u0, dtype=float)
    return StateUV(u0.copy(), f_eval(u0, p) - p.lam**2 * g.derivative(u0))

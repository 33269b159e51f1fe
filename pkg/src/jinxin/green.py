"""Fourier symbol of the linear conservative-dissipative system and its Green kernel.

For the linearised C-D system ``w_t + A w_x = -B w`` the Fourier transform of
the Green function is ``exp(E(i xi) t)`` with the complex-symmetric symbol

    E(i xi) = [[-a i xi,           -i xi s / eps      ],
               [-i xi s / eps,      a i xi - 1/eps^2  ]],   s = sqrt(lam^2 - a^2 eps^2).

Everything here is a pure per-frequency computation and broadcasts over
arrays of ``xi`` (and ``t`` where it appears).  Matrices are returned with the
2x2 block in the two trailing axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams

_EYE = np.eye(2)


@dataclass(frozen=True)
class SymbolMatrix:
    """2x2 complex matrix (or stack of them) attached to the frequency ``xi``."""

    entries: np.ndarray
    xi: np.ndarray | float

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[..., i, j]

    def __matmul__(self, other: "SymbolMatrix") -> "SymbolMatrix":
        return SymbolMatrix(self.entries @ other.entries, self.xi)


@dataclass(frozen=True)
class EigenData:
    lam1: np.ndarray  # slow branch, lam1(0) = 0
    lam2: np.ndarray  # fast branch, lam2(0) = -1/eps^2
    discriminant: np.ndarray  # 1 - 4 eps^2 (i a xi + lam^2 xi^2)


@dataclass(frozen=True)
class ProjectorSet:
    """Projector data near ``z = 0`` and ``z = infinity``.

    ``p_tilde``, ``l_tilde``, ``r_tilde``, ``f_reduced`` and ``f_minus`` belong
    to the low-frequency expansion at the point ``z`` and are ``None`` for the
    set returned by :func:`projectors_infinity`.  ``r1_inf`` and ``r2_inf`` are
    the orthonormal eigenvectors of the transport matrix for the speeds
    ``+lam/eps`` and ``-lam/eps``.
    """

    r1_inf: np.ndarray
    r2_inf: np.ndarray
    inf_speeds: tuple[float, float]
    inf_damping: tuple[float, float]
    z: complex | None = None
    p_tilde: np.ndarray | None = None
    l_tilde: np.ndarray | None = None
    r_tilde: np.ndarray | None = None
    f_reduced: complex | None = None
    f_minus: complex | None = None

    def eig_expansion_inf(self, z):
        """Affine large-``z`` eigenvalue branches ``-c_j z - d_j`` of ``E(z)``."""
        z = np.asarray(z)
        return tuple(-c * z - d for c, d in zip(self.inf_speeds, self.inf_damping))


@dataclass(frozen=True)
class KernelSplit:
    """``gamma_hat = k_hat + khyp_hat + r_hat`` at the frequencies ``xi`` and time ``t``."""

    xi: np.ndarray | float
    t: float
    gamma_hat: np.ndarray
    k_hat: np.ndarray
    khyp_hat: np.ndarray
    r_hat: np.ndarray


def _xi_array(xi):
    return np.asarray(xi, dtype=float)


def symbol_entries(xi, p: ModelParams) -> np.ndarray:
    """Raw ``E(i xi)`` entries with shape ``xi.shape + (2, 2)``."""
    xi = _xi_array(xi)
    eps, s, a = p.epsilon, p.sound, p.a
    E = np.empty(xi.shape + (2, 2), dtype=complex)
    off = -1j * xi * s / eps
    E[..., 0, 0] = -1j * a * xi
    E[..., 0, 1] = off
    E[..., 1, 0] = off
    E[..., 1, 1] = 1j * a * xi - 1.0 / eps**2
    return E


def symbol_E(xi, p: ModelParams) -> SymbolMatrix:
    return SymbolMatrix(symbol_entries(xi, p), xi)


def eigenvalues_E(xi, p: ModelParams) -> EigenData:
    """Eigenvalues of ``E(i xi)``.

    The slow root uses the rationalised form ``-2 q / (1 + sqrt(1 - 4 eps^2 q))``
    with ``q = i a xi + lam^2 xi^2``; the principal square root has
    non-negative real part, so the denominator never drops below one in
    modulus and the root stays accurate when ``eps^2 |q|`` is tiny.
    """
    xi = _xi_array(xi)
    eps2 = p.epsilon**2
    q = 1j * p.a * xi + p.lam**2 * xi**2
    disc = 1.0 - 4.0 * eps2 * q
    root = np.sqrt(disc + 0j)
    lam1 = -2.0 * q / (1.0 + root)
    lam2 = -1.0 / eps2 - lam1
    return EigenData(lam1, lam2, disc)


def _exp_coefficients(xi, t, p: ModelParams):
    """Scalars ``c, s`` with ``exp(E t) = c I + s (E - mean_eig I)``.

    Writing ``E = m I + N`` with ``m = -1/(2 eps^2)`` and ``N`` traceless,
    ``N^2 = d^2 I`` where ``d = sqrt(disc)/(2 eps^2)`` is half the eigenvalue
    gap, so ``exp(E t) = e^{m t} (cosh(d t) I + sinh(d t)/d N)``.  This is the
    closed form of the propagator and it stays finite at the double
    eigenvalue ``d = 0``.  When ``|Re(d t)| > 1`` the two exponentials are
    formed separately instead, which avoids overflow of cosh/sinh and has no
    cancellation because the two terms differ in size by at least ``e^2``.
    """
    xi = _xi_array(xi)
    t = np.asarray(t, dtype=float)
    eps2 = p.epsilon**2
    ev = eigenvalues_E(xi, p)
    m = -0.5 / eps2
    d = np.sqrt(ev.discriminant + 0j) / (2 * eps2)
    dt = d * t
    xi_b, dt_b = np.broadcast_arrays(xi, dt)
    c = np.empty(dt_b.shape, dtype=complex)
    s = np.empty(dt_b.shape, dtype=complex)

    near = np.abs(dt_b.real) <= 1.0
    t_b = np.broadcast_to(t, dt_b.shape)
    if np.any(near):
        z = dt_b[near]
        em = np.exp(m * t_b[near])
        # series below 1e-4: exact to double precision, and sinh(z)/z breaks
        # down for subnormal z
        tiny = np.abs(z) < 1e-4
        safe = np.where(tiny, 1.0, z)
        z2 = z * z
        sinhc = np.where(tiny, 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0), np.sinh(safe) / safe)
        c[near] = em * np.cosh(z)
        s[near] = em * t_b[near] * sinhc
    far = ~near
    if np.any(far):
        l1 = np.broadcast_to(ev.lam1 * np.ones_like(t), dt_b.shape)[far]
        l2 = np.broadcast_to(ev.lam2 * np.ones_like(t), dt_b.shape)[far]
        tf = t_b[far]
        e1 = np.exp(l1 * tf)
        e2 = np.exp(l2 * tf)
        c[far] = 0.5 * (e1 + e2)
        s[far] = (e1 - e2) / (l1 - l2)
    return c, s, m


def matexp_entries(xi, t, p: ModelParams) -> np.ndarray:
    """``exp(E(i xi) t)`` as an array of shape ``broadcast(xi, t).shape + (2, 2)``."""
    xi = _xi_array(xi)
    c, s, m = _exp_coefficients(xi, t, p)
    E = symbol_entries(np.broadcast_to(xi, c.shape), p)
    N = E - m * _EYE
    return c[..., None, None] * _EYE + s[..., None, None] * N


def matexp_E(xi, t, p: ModelParams) -> SymbolMatrix:
    if np.any(np.asarray(t) < 0):
        raise ValueError("matexp_E needs t >= 0")
    return SymbolMatrix(matexp_entries(xi, t, p), xi)


def _outer(r):
    return np.outer(r, r)


def projectors_infinity(p: ModelParams) -> ProjectorSet:
    """High-frequency data: orthonormal eigenvectors of the transport matrix."""
    lam, aeps = p.lam, p.a * p.epsilon
    s = p.sound
    norm = 1.0 / np.sqrt(2 * lam)
    r1 = norm * np.array([s / np.sqrt(lam - aeps), np.sqrt(lam - aeps)])
    r2 = norm * np.array([-s / np.sqrt(lam + aeps), np.sqrt(lam + aeps)])
    eps2 = p.epsilon**2
    speeds = (lam / p.epsilon, -lam / p.epsilon)
    damping = ((lam - aeps) / (2 * lam * eps2), (lam + aeps) / (2 * lam * eps2))
    return ProjectorSet(r1_inf=r1, r2_inf=r2, inf_speeds=speeds, inf_damping=damping)


def projectors_zero(z, p: ModelParams) -> ProjectorSet:
    """Second-order projector data near ``z = 0`` (``z = i xi`` on the imaginary axis)."""
    z = complex(z)
    inf = projectors_infinity(p)
    off = -p.epsilon * z * p.sound
    r_tilde = np.array([1.0, off], dtype=complex)
    l_tilde = np.array([1.0, off], dtype=complex)
    return ProjectorSet(
        r1_inf=inf.r1_inf,
        r2_inf=inf.r2_inf,
        inf_speeds=inf.inf_speeds,
        inf_damping=inf.inf_damping,
        z=z,
        p_tilde=np.outer(r_tilde, l_tilde),
        l_tilde=l_tilde,
        r_tilde=r_tilde,
        f_reduced=-p.a * z + p.diffusivity * z**2,
        f_minus=-1.0 / p.epsilon**2 + p.a * z,
    )


def p_tilde_entries(xi, p: ModelParams) -> np.ndarray:
    xi = _xi_array(xi)
    off = -p.epsilon * 1j * xi * p.sound
    P = np.empty(xi.shape + (2, 2), dtype=complex)
    P[..., 0, 0] = 1.0
    P[..., 0, 1] = off
    P[..., 1, 0] = off
    P[..., 1, 1] = off * off
    return P


def parabolic_kernel_hat(xi, t, p: ModelParams) -> SymbolMatrix:
    """Advected heat kernel ``exp(F(i xi) t)`` times the rank-one projector ``P~(i xi)``.

    ``F(i xi) = -a i xi - (lam^2 - a^2 eps^2) xi^2``; entry (1, 1) is the
    Fourier transform of the Gaussian moving at speed ``a``.
    """
    xi = _xi_array(xi)
    t = np.asarray(t, dtype=float)
    g = np.exp((-1j * p.a * xi - p.diffusivity * xi**2) * t)
    return SymbolMatrix(g[..., None, None] * p_tilde_entries(xi, p), xi)


def heat_kernel(x, t, p: ModelParams) -> np.ndarray:
    """Real-space advected heat kernel with diffusivity ``lam^2 - a^2 eps^2``."""
    D = p.diffusivity
    return np.exp(-((x - p.a * t) ** 2) / (4 * D * t)) / (2 * np.sqrt(D * np.pi * t))


def hyperbolic_kernel_hat(xi, t, p: ModelParams) -> SymbolMatrix:
    """Two damped transport waves at speeds ``+-lam/eps`` on the projectors ``R_j R_j^T``."""
    xi = _xi_array(xi)
    t = np.asarray(t, dtype=float)
    inf = projectors_infinity(p)
    P1, P2 = _outer(inf.r1_inf), _outer(inf.r2_inf)
    (c1, c2), (d1, d2) = inf.inf_speeds, inf.inf_damping
    e1 = np.exp(-1j * c1 * xi * t - d1 * t)
    e2 = np.exp(-1j * c2 * xi * t - d2 * t)
    return SymbolMatrix(e1[..., None, None] * P1 + e2[..., None, None] * P2, xi)


def hyperbolic_log_modulus(t, p: ModelParams) -> tuple[float, float]:
    """Log-moduli of the two wave factors; finite even where the factors underflow."""
    d1, d2 = projectors_infinity(p).inf_damping
    return -d1 * t, -d2 * t


def kernel_split(xi, t, p: ModelParams) -> KernelSplit:
    if np.any(np.asarray(t) < 0):
        raise ValueError("kernel_split needs t >= 0")
    gamma = matexp_entries(xi, t, p)
    k = parabolic_kernel_hat(xi, t, p).entries
    khyp = hyperbolic_kernel_hat(xi, t, p).entries
    return KernelSplit(xi, t, gamma, k, khyp, gamma - k - khyp)

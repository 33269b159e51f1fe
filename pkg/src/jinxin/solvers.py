"""Time integrators for the Jin-Xin system, its BGK form and the parabolic limit.

All solvers are pseudo-spectral on the periodic grid and advance the stiff
linear part exactly: the C-D solver multiplies every Fourier mode by the
closed-form 2x2 propagator, the BGK solver by the scalar transport-relaxation
factors, and the parabolic solver by the advection-diffusion factor.  The
remaining forcing is integrated with the second-order exponential
Runge-Kutta scheme of Cox and Matthews (ETD2RK),

    a     = e^{L h} w + h phi1(L h) N(w)
    w_new = a + h phi2(L h) (N(a) - N(w)),

which treats the forcing as linear in time over the step.  The 1/eps^2
scale never limits the step size.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .green import matexp_entries, symbol_entries
from .model import Grid, ModelParams, StateBGK, StateCD, f_eval

log = logging.getLogger(__name__)

BLOWUP_FACTOR = 1e6


class SolverError(RuntimeError):
    """Numerical failure of a time integration (NaN or blow-up)."""


class BlowUpError(SolverError):
    pass


class SubcharacteristicError(BlowUpError):
    """``eps |f'(u)| >= lam`` somewhere: the relaxation system is outside its dissipative regime."""


@dataclass(frozen=True)
class SolverConfig:
    """Step size, horizon and output times.

    ``record`` lists the times at which states are stored; when empty only
    ``0`` and ``t_final`` are kept.  The integrator lands on every recorded
    time exactly by shortening the step that would overshoot it.
    """

    dt: float
    t_final: float
    dealias: bool = True
    record: tuple[float, ...] = ()

    def __post_init__(self):
        rec = tuple(float(t) for t in self.record) or (0.0, float(self.t_final))
        object.__setattr__(self, "record", rec)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_final > 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if self.dt > self.t_final:
            raise ValueError("dt must not exceed t_final")
        if any(b < a for a, b in zip(rec, rec[1:])):
            raise ValueError("record times must be sorted")
        if rec[0] < 0 or rec[-1] > self.t_final * (1 + 1e-12):
            raise ValueError("record times must lie in [0, t_final]")


@dataclass(frozen=True)
class Trajectory:
    """States sampled at ``times``; ``states`` has shape ``(n_times, n_components, n)``.

    ``kind`` is ``"cd"`` (components w1, w2), ``"bgk"`` (f1, f2) or
    ``"parabolic"`` (single component).
    """

    times: np.ndarray
    states: np.ndarray
    params: ModelParams
    grid: Grid
    kind: str = "cd"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("one state per recorded time required")

    def component(self, i: int = 0) -> np.ndarray:
        return self.states[:, i, :]

    def state(self, k: int) -> StateCD:
        if self.kind != "cd":
            raise ValueError(f"state() is for C-D trajectories, this one is {self.kind!r}")
        return StateCD.from_stack(self.states[k])

    def index_of(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"time {t} was not recorded")
        return k

    def mass(self) -> np.ndarray:
        """Spatial integral of the conserved density at every recorded time."""
        if self.kind == "bgk":
            rho = self.states[:, 0, :] + self.states[:, 1, :]
        else:
            rho = self.states[:, 0, :]
        return rho.sum(axis=-1) * self.grid.dx


def default_dt(p: ModelParams, g: Grid) -> float:
    """Accuracy-driven step: half a cell crossing at the kinetic speed ``lam/eps``."""
    return min(0.1, 0.5 * g.dx * p.epsilon / p.lam)


def _nyquist_free(uh):
    uh = np.array(uh, dtype=complex)
    uh[..., -1] = 0.0
    return uh


def _check_finite(what: str, arr, t: float):
    if not np.all(np.isfinite(arr)):
        raise SolverError(f"{what}: non-finite values at t={t:.6g}")


def linear_propagate(w0: StateCD, t: float, p: ModelParams, g: Grid) -> StateCD:
    """Exact solution of the linear C-D system at time ``t``, mode by mode."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return StateCD(np.array(w0.w1, float), np.array(w0.w2, float))
    wh = _nyquist_free(g.rfft(w0.stack()))
    G = matexp_entries(g.rxi, t, p)
    out = g.irfft(np.einsum("kij,jk->ik", G, wh))
    _check_finite("linear_propagate", out, t)
    return StateCD.from_stack(out)


def scalar_phi(z, order: int = 2):
    """``phi_1 .. phi_order`` of a complex array, ``phi_k(z) = sum_j z^j / (j + k)!``.

    Closed forms ``phi_k = (phi_{k-1} - 1/(k-1)!) / z`` are used for
    ``|z| >= 1``; below that the series, 30 terms, avoids the cancellation.
    """
    z = np.asarray(z, dtype=complex)
    out = [np.empty_like(z) for _ in range(order)]
    small = np.abs(z) < 1.0
    zb = z[~small]
    prev = np.exp(zb)
    fact = 1.0
    for k in range(1, order + 1):
        prev = (prev - 1.0 / fact) / zb
        out[k - 1][~small] = prev
        fact *= k
    zs = z[small]
    for k in range(1, order + 1):
        acc = np.zeros_like(zs)
        # Horner on sum_j z^j / (j + k)!
        for j in range(29, -1, -1):
            acc = acc * zs + 1.0 / math.factorial(j + k)
        out[k - 1][small] = acc
    return tuple(out)


def matrix_phi(M: np.ndarray):
    """``phi1(M), phi2(M)`` for a stack of 2x2 matrices.

    Read off the exponential of the block matrix
    ``[[M, I, 0], [0, 0, I], [0, 0, 0]]``, whose first block row is
    ``[e^M, phi1(M), phi2(M)]``.
    """
    k = M.shape[0]
    Z = np.zeros((k, 6, 6), dtype=complex)
    Z[:, :2, :2] = M
    Z[:, 0, 2] = Z[:, 1, 3] = 1.0
    Z[:, 2, 4] = Z[:, 3, 5] = 1.0
    X = scipy.linalg.expm(Z)
    return X[:, :2, 2:4], X[:, :2, 4:6]


class _Stepper:
    """Shared record-and-step loop; subclasses supply coefficients and forcing."""

    n_comp = 2
    kind = "cd"

    def __init__(self, p: ModelParams, g: Grid, cfg: SolverConfig):
        self.p, self.g, self.cfg = p, g, cfg
        self.mask = g.dealias_mask() if cfg.dealias else np.ones(g.n // 2 + 1, bool)
        self.mask = self.mask.copy()
        self.mask[-1] = False
        self._cache: dict[float, tuple] = {}

    def coefficients(self, h: float):
        key = float(h)
        if key not in self._cache:
            if len(self._cache) > 64:
                self._cache.clear()
            self._cache[key] = self.build(h)
        return self._cache[key]

    def build(self, h):  # pragma: no cover - abstract
        raise NotImplementedError

    def step(self, wh, h):  # pragma: no cover - abstract
        raise NotImplementedError

    def physical(self, wh):
        return self.g.irfft(wh)

    def density(self, wh):
        return None

    def monitor(self, wh, t):
        """Pointwise subcharacteristic check ``eps |f'(u)| < lam`` along the solution."""
        uh = self.density(wh)
        if uh is None:
            return
        p = self.p
        u = self.g.irfft(uh)
        speed = p.epsilon * float(np.max(np.abs(p.a + p.dh_eval(u))))
        if speed >= p.lam:
            raise SubcharacteristicError(
                f"{self.kind} solver: eps |f'(u)| = {speed:.4g} >= lam = {p.lam:.4g} at t={t:.6g}; "
                "the data are too large for the relaxation regime (blow-up regime)"
            )

    def run(self, wh0) -> Trajectory:
        cfg = self.cfg
        wh = _nyquist_free(wh0)
        scale = np.max(np.abs(wh))
        limit = BLOWUP_FACTOR * scale if scale > 0 else np.inf
        t = 0.0
        times, states = [], []
        n_steps = 0
        self.monitor(wh, 0.0)
        for target in cfg.record:
            span = target - t
            n_full = int(np.floor(span / cfg.dt + 1e-9))
            rest = span - n_full * cfg.dt
            sizes = [cfg.dt] * n_full + ([rest] if rest > 1e-9 * cfg.dt else [])
            for k, h in enumerate(sizes):
                wh = self.step(wh, h)
                n_steps += 1
                if n_steps % 25 == 0 or k == len(sizes) - 1:
                    peak = np.max(np.abs(wh))
                    if not np.isfinite(peak):
                        raise SolverError(
                            f"{self.kind} solver: NaN/inf near t={t + (k + 1) * cfg.dt:.6g}"
                        )
                    if peak > limit:
                        raise BlowUpError(
                            f"{self.kind} solver: blow-up near t={t + (k + 1) * cfg.dt:.6g}, "
                            f"spectral peak {peak:.3e} exceeds {BLOWUP_FACTOR:.0e} x "
                            f"initial {scale:.3e}"
                        )
                    self.monitor(wh, t + (k + 1) * cfg.dt)
            t = target
            times.append(target)
            states.append(self.physical(wh))
        log.debug("%s solver finished %d steps", self.kind, n_steps)
        return Trajectory(
            np.array(times), np.array(states), self.p, self.g, self.kind, {"steps": n_steps}
        )


class _CDStepper(_Stepper):
    def __init__(self, p, g, cfg):
        super().__init__(p, g, cfg)
        self.nl_scale = 1.0 / (p.epsilon * p.sound)
        self.linear = not any(p.h)

    def build(self, h):
        xi = self.g.rxi
        G = matexp_entries(xi, h, self.p)
        if self.linear:
            return G, None, None
        phi1, phi2 = matrix_phi(symbol_entries(xi, self.p) * h)
        # only the w2 column is ever hit by the forcing
        return G, h * phi1[:, :, 1].T, h * phi2[:, :, 1].T

    def density(self, wh):
        return wh[0]

    def forcing(self, wh):
        w1 = self.g.irfft(wh[0] * self.mask)
        return self.g.rfft(self.p.h_eval(w1)) * self.mask * self.nl_scale

    def step(self, wh, h):
        G, c1, c2 = self.coefficients(h)
        lin = np.einsum("kij,jk->ik", G, wh)
        if self.linear:
            return lin
        n0 = self.forcing(wh)
        a = lin + c1 * n0
        return a + c2 * (self.forcing(a) - n0)


def nonlinear_jinxin_solve(
    w0: StateCD, cfg: SolverConfig, p: ModelParams, g: Grid
) -> Trajectory:
    """Integrate the nonlinear C-D system from ``w0``.

    The linear propagator is exact; ``h(w1) / (eps s)`` forces the
    dissipative component through the Duhamel integral, approximated by
    ETD2RK.  With ``h = 0`` the result coincides with :func:`linear_propagate`.
    """
    return _CDStepper(p, g, cfg).run(g.rfft(w0.stack()))


class _BGKStepper(_Stepper):
    """Fourth-order exponential Runge-Kutta (Cox-Matthews ETDRK4) on the kinetic pair.

    The Maxwellian coupling is of size 1/eps^2 and is integrated explicitly,
    so the higher order is what keeps the step error of the kinetic
    formulation at the level of the C-D solver.
    """

    kind = "bgk"

    def __init__(self, p, g, cfg):
        super().__init__(p, g, cfg)
        speed = p.lam / p.epsilon
        xi = g.rxi
        self.L = np.stack([-1j * speed * xi, 1j * speed * xi]) - 1.0 / p.epsilon**2

    def build(self, h):
        z = self.L * h
        half1, = scalar_phi(z / 2, order=1)
        phi1, phi2, phi3 = scalar_phi(z, order=3)
        return (
            np.exp(z / 2),
            np.exp(z),
            0.5 * h * half1,
            h * (phi1 - 3 * phi2 + 4 * phi3),
            h * (phi2 - 2 * phi3),
            h * (4 * phi3 - phi2),
        )

    def density(self, fh):
        return fh[0] + fh[1]

    def forcing(self, fh):
        p = self.p
        uh = fh[0] + fh[1]
        flux = p.a * uh
        if any(p.h):
            u = self.g.irfft(uh * self.mask)
            flux = flux + self.g.rfft(p.h_eval(u)) * self.mask
        half = 0.5 * uh
        skew = p.epsilon * flux / (2 * p.lam)
        return np.stack([half + skew, half - skew]) / p.epsilon**2

    def step(self, fh, h):
        e_half, e_full, q, b1, b2, b3 = self.coefficients(h)
        n0 = self.forcing(fh)
        a = e_half * fh + q * n0
        na = self.forcing(a)
        b = e_half * fh + q * na
        nb = self.forcing(b)
        c = e_half * a + q * (2 * nb - n0)
        nc = self.forcing(c)
        return e_full * fh + b1 * n0 + 2 * b2 * (na + nb) + b3 * nc


def bgk_solve(s0: StateBGK, cfg: SolverConfig, p: ModelParams, g: Grid) -> Trajectory:
    """Integrate the kinetic pair ``(f1, f2)``.

    Transport at speeds ``+-lam/eps`` and the ``-f/eps^2`` relaxation are one
    scalar exponential per mode and component; the Maxwellians are the
    forcing, held linear in time over each step.
    """
    fh = g.rfft(np.stack([np.asarray(s0.f1, float), np.asarray(s0.f2, float)]))
    return _BGKStepper(p, g, cfg).run(fh)


class _ParabolicStepper(_Stepper):
    n_comp = 1
    kind = "parabolic"

    def __init__(self, p, g, cfg, corrected):
        super().__init__(p, g, cfg)
        D = p.diffusivity if corrected else p.lam**2
        xi = g.rxi
        self.L = -1j * p.a * xi - D * xi**2
        self.dx_mult = 1j * xi

    def build(self, h):
        z = self.L * h
        phi1, phi2 = scalar_phi(z)
        return np.exp(z), h * phi1, h * phi2

    def forcing(self, uh):
        u = self.g.irfft(uh[0] * self.mask)
        return (-self.dx_mult * self.g.rfft(self.p.h_eval(u)) * self.mask)[None, :]

    def step(self, uh, h):
        ez, c1, c2 = self.coefficients(h)
        if not any(self.p.h):
            return ez * uh
        n0 = self.forcing(uh)
        a = ez * uh + c1 * n0
        return a + c2 * (self.forcing(a) - n0)


def parabolic_solve(
    u0, cfg: SolverConfig, p: ModelParams, g: Grid, corrected: bool = False
) -> Trajectory:
    """Solve ``w_t + a w_x + h(w)_x = D w_xx`` with ``D = lam^2``.

    ``corrected=True`` uses ``D = lam^2 - a^2 eps^2`` instead, the exact
    low-frequency diffusivity of the relaxation system.
    """
    uh = g.rfft(np.asarray(u0, float))[None, :]
    return _ParabolicStepper(p, g, cfg, corrected).run(uh)


def time_derivative(traj: Trajectory, component: int, at=None):
    """Three-point (non-uniform) centred time derivative of one component.

    Returns ``(times, derivative)`` at the interior recorded times, or only at
    the recorded times listed in ``at``.
    """
    if len(traj.times) < 3:
        raise ValueError("time differencing needs at least three recorded states")
    idx = np.arange(1, len(traj.times) - 1)
    if at is not None:
        idx = np.array([traj.index_of(t) for t in at])
        if np.any(idx < 1) or np.any(idx > len(traj.times) - 2):
            raise ValueError("derivative requested at an endpoint of the trajectory")
    tm, t0, tp = traj.times[idx - 1], traj.times[idx], traj.times[idx + 1]
    h1 = (t0 - tm)[:, None]
    h2 = (tp - t0)[:, None]
    y = traj.states[:, component, :]
    d = (
        -h2 / (h1 * (h1 + h2)) * y[idx - 1]
        + (h2 - h1) / (h1 * h2) * y[idx]
        + h1 / (h2 * (h1 + h2)) * y[idx + 1]
    )
    return t0, d


def compute_S(traj: Trajectory, p: ModelParams, at=None):
    """Chapman-Enskog residual ``S = eps s (d_t w2 - a d_x w2)`` along a C-D trajectory.

    ``d_t`` comes from differencing the recorded states, ``d_x`` is
    spectral.  Returns ``(times, S)`` with ``S`` of shape ``(len(times), n)``.
    """
    if traj.kind != "cd":
        raise ValueError("compute_S needs a C-D trajectory")
    times, dtw2 = time_derivative(traj, 1, at)
    idx = [traj.index_of(t) for t in times]
    dxw2 = traj.grid.derivative(traj.states[idx, 1, :])
    return times, p.epsilon * p.sound * (dtw2 - p.a * dxw2)

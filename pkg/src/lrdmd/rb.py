"""Rayleigh-Benard convection on the unit cell, pseudo-spectral + RK4.

The coupled system for buoyancy b and temperature tau,

    d_t b   + v . grad b   - sigma Lap b - sigma nu d_s1 tau = 0
    d_t tau + v . grad tau -       Lap tau -  d_s1 Lap^-1 b  = 0
    v = grad_perp Lap^-1 b,

is discretised on an n1 x n2 grid of the cell [0,1)^2.  The s1 direction is
periodic.  The s2 direction carries half-sine data (sin(pi s2), sin(2 pi s2),
...), which is handled by odd extension to a period-2 domain so every field
is an exact Fourier mode of the extended grid; the odd subspace is invariant
under the dynamics, so the restriction back to [0,1) is lossless.  All
derivatives and Lap^-1 are spectral (zero mode of Lap^-1 gauged to zero);
advection products are formed pointwise and 2/3-dealiased.  Time stepping is
plain explicit RK4; the default dt=1e-4 keeps |Lap|_max * dt inside the RK4
stability interval for the default grid with sigma, nu of order one.

State layout: x = (b; tau), each field raveled row-major over (i1, i2), so
n = 2 * n1 * n2 (1024 for the default 16 x 32 grid).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, SimulationBlowup

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RBConfig:
    """Physical and numerical parameters of the convection run."""

    sigma: float = 1.0  # Prandtl number
    nu: float = 0.0  # Rayleigh number
    grid: tuple[int, int] = (16, 32)
    dt: float = 1e-4
    sample_stride: int = 100
    seed: int = 0

    @property
    def n(self) -> int:
        return 2 * self.grid[0] * self.grid[1]


@dataclass(frozen=True)
class InitCondition:
    """Lorenz-style initial condition parameters.

    b(s, 1)   = kappa_b  sin(a_b s1) sin(pi s2)
    tau(s, 1) = kappa_t1 cos(a_t s1) sin(pi s2) - kappa_t2 sin(2 pi s2)

    The s1 wavenumbers must be integer multiples of 2 pi so the fields are
    periodic over the unit cell.
    """

    a_b: float = TWO_PI
    a_tau: float = TWO_PI
    kappa_b: float = 0.0
    kappa_tau1: float = 0.0
    kappa_tau2: float = 0.0

    def __post_init__(self):
        vals = (self.a_b, self.a_tau, self.kappa_b, self.kappa_tau1, self.kappa_tau2)
        if not all(np.isfinite(v) for v in vals):
            raise InvalidInput("initial-condition parameters must be finite")
        for name, a in (("a_b", self.a_b), ("a_tau", self.a_tau)):
            if abs(a / TWO_PI - round(a / TWO_PI)) > 1e-9:
                raise InvalidInput(f"{name}={a} is not an integer multiple of 2*pi (non-periodic in s1)")


def taylor_decay_rate(sigma: float, a_b: float) -> float:
    """Exact decay rate of the single buoyancy mode sin(a_b s1) sin(pi s2).

    The mode is a Laplacian eigenfunction with eigenvalue -(a_b^2 + pi^2) and
    its self-advection vanishes identically, so under nu = 0 the buoyancy
    decays at sigma * (a_b^2 + pi^2) for any amplitude.
    """
    return sigma * (a_b**2 + np.pi**2)


def degenerate_kappa_b(sigma: float, a_b: float) -> float:
    """Buoyancy amplitude of the linear (Taylor-vortex) regime, 1/(sigma (pi a_b)^2)."""
    return 1.0 / (sigma * (np.pi * a_b) ** 2)


class _Spectral:
    """Precomputed wavenumber grids and masks for one (n1, n2) cell grid."""

    def __init__(self, grid: tuple[int, int]):
        n1, n2 = grid
        if n1 < 4 or n2 < 4:
            raise InvalidInput(f"grid too small: {grid}")
        self.n1, self.n2 = n1, n2
        n2d = 2 * n2  # doubled (odd-extended) s2 direction
        f1 = np.fft.fftfreq(n1) * n1  # integer cycle counts
        f2 = np.fft.fftfreq(n2d) * n2d
        k1 = TWO_PI * f1  # cell length 1 in s1
        k2 = np.pi * f2  # cell length 2 in s2
        self.K1 = k1[:, None] * np.ones((1, n2d))
        self.K2 = np.ones((n1, 1)) * k2[None, :]
        self.lap = -(self.K1**2 + self.K2**2)
        inv = np.zeros_like(self.lap)
        nz = self.lap != 0.0
        inv[nz] = 1.0 / self.lap[nz]
        self.inv_lap = inv
        self.dealias = (np.abs(f1)[:, None] < n1 / 3.0) & (np.abs(f2)[None, :] < n2d / 3.0)

    def extend_odd(self, f: np.ndarray) -> np.ndarray:
        n2 = self.n2
        ext = np.zeros((self.n1, 2 * n2))
        ext[:, :n2] = f
        ext[:, n2 + 1 :] = -f[:, :0:-1]
        return ext

    def restrict(self, fe: np.ndarray) -> np.ndarray:
        return fe[:, : self.n2].copy()

    def mesh_extended(self) -> tuple[np.ndarray, np.ndarray]:
        s1 = np.arange(self.n1) / self.n1
        s2 = np.arange(2 * self.n2) / self.n2
        return s1[:, None] * np.ones((1, 2 * self.n2)), np.ones((self.n1, 1)) * s2[None, :]

    def mesh_cell(self) -> tuple[np.ndarray, np.ndarray]:
        s1 = np.arange(self.n1) / self.n1
        s2 = np.arange(self.n2) / self.n2
        return s1[:, None] * np.ones((1, self.n2)), np.ones((self.n1, 1)) * s2[None, :]


def _lorenz_fields(ic: InitCondition, S1: np.ndarray, S2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    b = ic.kappa_b * np.sin(ic.a_b * S1) * np.sin(np.pi * S2)
    tau = ic.kappa_tau1 * np.cos(ic.a_tau * S1) * np.sin(np.pi * S2) - ic.kappa_tau2 * np.sin(TWO_PI * S2)
    return b, tau


def lorenz_init(ic: InitCondition, grid: tuple[int, int] = (16, 32)) -> np.ndarray:
    """Stacked (b; tau) state vector of the Lorenz-style initial condition."""
    sp = _Spectral(grid)
    S1, S2 = sp.mesh_cell()
    b, tau = _lorenz_fields(ic, S1, S2)
    return np.concatenate([b.ravel(), tau.ravel()])


def split_state(x: np.ndarray, grid: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of the (b; tau) stacking."""
    n1, n2 = grid
    nf = n1 * n2
    if x.shape != (2 * nf,):
        raise InvalidInput(f"state of length {2 * nf} expected, got shape {x.shape}")
    return x[:nf].reshape(n1, n2), x[nf:].reshape(n1, n2)


def _grad(sp: _Spectral, Fh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = np.fft.ifft2(1j * sp.K1 * Fh).real
    gy = np.fft.ifft2(1j * sp.K2 * Fh).real
    return gx, gy


def _velocity(sp: _Spectral, Bh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    psi_h = sp.inv_lap * Bh
    v1 = np.fft.ifft2(1j * sp.K2 * psi_h).real
    v2 = -np.fft.ifft2(1j * sp.K1 * psi_h).real
    return v1, v2


def _rhs_full(sp: _Spectral, Bh: np.ndarray, Th: np.ndarray, sigma: float, nu: float):
    v1, v2 = _velocity(sp, Bh)
    bx, by = _grad(sp, Bh)
    tx, ty = _grad(sp, Th)
    adv_b = np.fft.fft2(v1 * bx + v2 * by) * sp.dealias
    adv_t = np.fft.fft2(v1 * tx + v2 * ty) * sp.dealias
    dBh = -adv_b + sigma * sp.lap * Bh + sigma * nu * (1j * sp.K1) * Th
    dTh = -adv_t + sp.lap * Th + (1j * sp.K1) * (sp.inv_lap * Bh)
    return dBh, dTh


def _rhs_tau(sp: _Spectral, Th: np.ndarray, Bh: np.ndarray):
    # tau equation alone, buoyancy prescribed (linear regime).
    v1, v2 = _velocity(sp, Bh)
    tx, ty = _grad(sp, Th)
    adv_t = np.fft.fft2(v1 * tx + v2 * ty) * sp.dealias
    return -adv_t + sp.lap * Th + (1j * sp.K1) * (sp.inv_lap * Bh)


def _sample(sp: _Spectral, Bh: np.ndarray, Th: np.ndarray) -> np.ndarray:
    b = sp.restrict(np.fft.ifft2(Bh).real)
    tau = sp.restrict(np.fft.ifft2(Th).real)
    return np.concatenate([b.ravel(), tau.ravel()])


def _check_finite(x: np.ndarray, step: int) -> None:
    if not np.all(np.isfinite(x)):
        raise SimulationBlowup(step)


def simulate_fields(
    cfg: RBConfig,
    b0: np.ndarray,
    tau0: np.ndarray,
    n_samples: int,
) -> np.ndarray:
    """Integrate the full nonlinear system from cell-grid fields b0, tau0.

    Returns an (n_samples, n) array of states; the first row is the initial
    state, consecutive rows are ``sample_stride`` RK4 steps apart.  Raises
    ``SimulationBlowup`` (with the step index) if the state leaves the
    finite range.
    """
    if n_samples < 1:
        raise InvalidInput(f"n_samples must be >= 1, got {n_samples}")
    sp = _Spectral(cfg.grid)
    Bh = np.fft.fft2(sp.extend_odd(np.asarray(b0, dtype=float)))
    Th = np.fft.fft2(sp.extend_odd(np.asarray(tau0, dtype=float)))
    out = np.empty((n_samples, cfg.n))
    out[0] = _sample(sp, Bh, Th)
    _check_finite(out[0], 0)
    dt = cfg.dt
    step = 0
    for s in range(1, n_samples):
        for _ in range(cfg.sample_stride):
            k1b, k1t = _rhs_full(sp, Bh, Th, cfg.sigma, cfg.nu)
            k2b, k2t = _rhs_full(sp, Bh + 0.5 * dt * k1b, Th + 0.5 * dt * k1t, cfg.sigma, cfg.nu)
            k3b, k3t = _rhs_full(sp, Bh + 0.5 * dt * k2b, Th + 0.5 * dt * k2t, cfg.sigma, cfg.nu)
            k4b, k4t = _rhs_full(sp, Bh + dt * k3b, Th + dt * k3t, cfg.sigma, cfg.nu)
            Bh = Bh + (dt / 6.0) * (k1b + 2 * k2b + 2 * k3b + k4b)
            Th = Th + (dt / 6.0) * (k1t + 2 * k2t + 2 * k3t + k4t)
            step += 1
        out[s] = _sample(sp, Bh, Th)
        _check_finite(out[s], step)
    return out


def simulate_rb(cfg: RBConfig, ic: InitCondition, n_samples: int) -> np.ndarray:
    """Nonlinear convection run from a Lorenz-style initial condition."""
    sp = _Spectral(cfg.grid)
    S1, S2 = sp.mesh_cell()
    b0, tau0 = _lorenz_fields(ic, S1, S2)
    return simulate_fields(cfg, b0, tau0, n_samples)


def analytic_buoyancy(
    cfg: RBConfig, ic: InitCondition, t_phys: float, extended: bool = False
) -> np.ndarray:
    """Taylor-vortex buoyancy field at physical time ``t_phys``.

    Exact solution of the buoyancy equation for nu = 0: the initial mode
    decays at ``taylor_decay_rate`` (its nonlinear self-advection vanishes
    identically), so b(s, t) = kappa_b exp(-rate t) sin(a_b s1) sin(pi s2).
    """
    sp = _Spectral(cfg.grid)
    S1, S2 = sp.mesh_extended() if extended else sp.mesh_cell()
    rate = taylor_decay_rate(cfg.sigma, ic.a_b)
    return ic.kappa_b * np.exp(-rate * t_phys) * np.sin(ic.a_b * S1) * np.sin(np.pi * S2)


def simulate_linear_fields(
    cfg: RBConfig,
    ic: InitCondition,
    tau0: np.ndarray,
    n_samples: int,
) -> np.ndarray:
    """Integrate the linear (Taylor-vortex) regime: analytic b, stepped tau.

    Buoyancy is evaluated, not stepped; the tau equation is advanced by RK4
    with the velocity derived from the analytic buoyancy at each stage time.
    """
    if n_samples < 1:
        raise InvalidInput(f"n_samples must be >= 1, got {n_samples}")
    sp = _Spectral(cfg.grid)
    S1, S2 = sp.mesh_extended()
    mode = np.sin(ic.a_b * S1) * np.sin(np.pi * S2)
    Bh0 = np.fft.fft2(ic.kappa_b * mode)
    rate = taylor_decay_rate(cfg.sigma, ic.a_b)
    Th = np.fft.fft2(sp.extend_odd(np.asarray(tau0, dtype=float)))
    out = np.empty((n_samples, cfg.n))
    out[0] = _sample(sp, Bh0, Th)
    dt = cfg.dt
    step = 0
    t = 0.0
    for s in range(1, n_samples):
        for _ in range(cfg.sample_stride):
            B_t = Bh0 * np.exp(-rate * t)
            B_half = Bh0 * np.exp(-rate * (t + 0.5 * dt))
            B_full = Bh0 * np.exp(-rate * (t + dt))
            k1 = _rhs_tau(sp, Th, B_t)
            k2 = _rhs_tau(sp, Th + 0.5 * dt * k1, B_half)
            k3 = _rhs_tau(sp, Th + 0.5 * dt * k2, B_half)
            k4 = _rhs_tau(sp, Th + dt * k3, B_full)
            Th = Th + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            step += 1
            t += dt
        out[s] = _sample(sp, Bh0 * np.exp(-rate * t), Th)
        _check_finite(out[s], step)
    return out


def simulate_rb_linear(cfg: RBConfig, ic: InitCondition, n_samples: int) -> np.ndarray:
    """Linear-regime run from a Lorenz-style initial condition."""
    sp = _Spectral(cfg.grid)
    S1, S2 = sp.mesh_cell()
    _, tau0 = _lorenz_fields(ic, S1, S2)
    return simulate_linear_fields(cfg, ic, tau0, n_samples)

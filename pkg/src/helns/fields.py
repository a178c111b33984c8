"""Closed-form fields and seeded helical perturbations.

Everything here is analytic: the Lamb-Oseen vortex pair (velocity and
vorticity), the self-similar shear flow whose nonlinearity vanishes
identically, the 2D heat kernel, closed-form norms of the Oseen family used
as oracles, and the seeded generator of divergence-free helical
perturbations.

Time enters all Oseen-family formulas through ``1 + t``: the profiles are the
diffusing Gaussian started one time unit before t = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec
from .spectral import SpectralOps

__all__ = [
    "OseenParams",
    "PerturbationSpec",
    "oseen_utheta_profile",
    "oseen_wz_profile",
    "oseen_velocity",
    "oseen_vorticity",
    "oseen_velocity_xy",
    "oseen_gradient_xy",
    "oseen_vorticity_xy",
    "shear_flow",
    "shear_f",
    "shear_g",
    "heat_kernel_2d",
    "oseen_l2_difference_sq",
    "oseen_grad_l2_sq",
    "oseen_grad_l2_difference_sq",
    "random_helical_perturbation",
]


@dataclass(frozen=True)
class OseenParams:
    """Circulation Reynolds number of the analytic background vortex.

    The background velocity is ``a * u_LO(t)`` where ``u_LO`` carries the
    built-in time offset: every formula depends on ``1 + t``.  No smallness
    is assumed on ``a``.
    """

    a: float = 1.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.a):
            raise ValueError("circulation Reynolds number must be finite")


@dataclass(frozen=True)
class PerturbationSpec:
    """Seeded helical perturbation: modes, envelope width and H1 amplitude."""

    seed: int = 0
    amplitude: float = 0.1
    modes: tuple[int, ...] = (0, 1, 2)
    sigma: float = 2.0

    def __post_init__(self) -> None:
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if self.sigma <= 0:
            raise ValueError("envelope width must be positive")


# --- radial profiles -------------------------------------------------------


def oseen_utheta_profile(r: np.ndarray, t: float) -> np.ndarray:
    """Azimuthal Oseen velocity u_theta(r) = (1/(2 pi r)) (1 - e^{-r^2/(4(1+t))}).

    The removable singularity at r = 0 evaluates to 0.
    """
    r = np.asarray(r, dtype=float)
    s = 1.0 + t
    rsafe = np.where(r > 0, r, 1.0)
    out = (1.0 - np.exp(-(rsafe**2) / (4.0 * s))) / (2.0 * np.pi * rsafe)
    return np.where(r > 0, out, 0.0)


def oseen_wz_profile(r: np.ndarray, t: float) -> np.ndarray:
    """Vertical Oseen vorticity w_z(r) = e^{-r^2/(4(1+t))} / (4 pi (1+t))."""
    r = np.asarray(r, dtype=float)
    s = 1.0 + t
    return np.exp(-(r**2) / (4.0 * s)) / (4.0 * np.pi * s)


def _oseen_F(r2: np.ndarray, s: float) -> np.ndarray:
    """u_theta / r as a smooth function of r^2 (F(0) = 1/(8 pi s))."""
    q = r2 / (4.0 * s)
    small = q < 1e-6
    qs = np.where(small, q, 1.0)
    series = (1.0 - qs / 2.0 + qs**2 / 6.0) / (8.0 * np.pi * s)
    r2safe = np.where(small, 1.0, r2)
    direct = (1.0 - np.exp(-q)) / (2.0 * np.pi * r2safe)
    return np.where(small, series, direct)


def _oseen_G(r2: np.ndarray, s: float) -> np.ndarray:
    """(dF/dr)/r as a smooth function of r^2 (G(0) = -1/(32 pi s^2))."""
    q = r2 / (4.0 * s)
    small = q < 1e-3
    qs = np.where(small, q, 1.0)
    series = -(1.0 - (2.0 / 3.0) * qs + qs**2 / 4.0) / (32.0 * np.pi * s**2)
    r4safe = np.where(small, 1.0, r2**2)
    E = np.exp(-q)
    direct = (2.0 * q * E - 2.0 * (1.0 - E)) / (2.0 * np.pi * r4safe)
    return np.where(small, series, direct)


# --- grid fields ----------------------------------------------------------


def oseen_velocity_xy(grid: GridSpec, t: float) -> np.ndarray:
    """Horizontal components of u_LO on the cross-section, shape (2, nx, ny).

    The Oseen velocity is z-independent with zero vertical component;
    broadcasting the (nx, ny) slices over z reproduces the full 3D field.
    """
    r2 = grid.xc**2 + grid.yc**2
    F = _oseen_F(r2, 1.0 + t)
    return np.stack([-grid.yc * F, grid.xc * F])


def oseen_velocity(grid: GridSpec, t: float) -> np.ndarray:
    """Full Oseen velocity field sampled on the grid, shape (3, nx, ny, nz)."""
    uxy = oseen_velocity_xy(grid, t)
    out = np.zeros((3, grid.nx, grid.ny, grid.nz))
    out[0] = uxy[0][..., None]
    out[1] = uxy[1][..., None]
    return out


def oseen_gradient_xy(grid: GridSpec, t: float) -> np.ndarray:
    """Gradients d_j u_i of the horizontal Oseen components, shape (2, 2, nx, ny).

    Index order: ``out[i, j]`` is d u_i / d x_j.  All z-derivatives vanish.
    """
    xc, yc = grid.xc, grid.yc
    r2 = xc**2 + yc**2
    s = 1.0 + t
    F = _oseen_F(r2, s)
    G = _oseen_G(r2, s)
    dux_dx = -xc * yc * G
    dux_dy = -F - yc**2 * G
    duy_dx = F + xc**2 * G
    duy_dy = xc * yc * G
    return np.stack(
        [np.stack([dux_dx, dux_dy]), np.stack([duy_dx, duy_dy])]
    )


def oseen_vorticity_xy(grid: GridSpec, t: float) -> np.ndarray:
    """Vertical Oseen vorticity slice w_z(r), shape (nx, ny)."""
    return oseen_wz_profile(grid.r2d, t)


def oseen_vorticity(grid: GridSpec, t: float) -> np.ndarray:
    """Full Oseen vorticity field on the grid, shape (3, nx, ny, nz)."""
    out = np.zeros((3, grid.nx, grid.ny, grid.nz))
    out[2] = oseen_vorticity_xy(grid, t)[..., None]
    return out


def shear_f(r: np.ndarray, t: float) -> np.ndarray:
    """Shear-flow vertical velocity profile f(t, r)."""
    s = 1.0 + t
    return np.exp(-(np.asarray(r, dtype=float) ** 2) / (4.0 * s)) / (4.0 * np.pi * s)


def shear_g(r: np.ndarray, t: float) -> np.ndarray:
    """Shear-flow azimuthal vorticity profile g(t, r) = -df/dr."""
    s = 1.0 + t
    r = np.asarray(r, dtype=float)
    return r * np.exp(-(r**2) / (4.0 * s)) / (8.0 * np.pi * s**2)


def shear_flow(grid: GridSpec, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact shear-flow solution (velocity, vorticity) on the grid.

    u = f(t, r) e_z and omega = g(t, r) e_theta with g = -df/dr; the
    nonlinearity (u . grad) u + grad p vanishes identically, so each profile
    simply obeys the radial heat equation.
    """
    xc, yc = grid.xc, grid.yc
    s = 1.0 + t
    r2 = xc**2 + yc**2
    E = np.exp(-r2 / (4.0 * s))
    f = E / (4.0 * np.pi * s)
    g_over_r = E / (8.0 * np.pi * s**2)
    u = np.zeros((3, grid.nx, grid.ny, grid.nz))
    w = np.zeros((3, grid.nx, grid.ny, grid.nz))
    u[2] = f[..., None]
    w[0] = (-yc * g_over_r)[..., None]
    w[1] = (xc * g_over_r)[..., None]
    return u, w


def heat_kernel_2d(t: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """2D heat kernel G_t(x) = (4 pi t)^{-1} exp(-|x|^2 / (4t))."""
    if t <= 0:
        raise ValueError("heat kernel requires t > 0")
    return np.exp(-(np.asarray(x) ** 2 + np.asarray(y) ** 2) / (4.0 * t)) / (
        4.0 * np.pi * t
    )


# --- closed-form Oseen norms (oracles) -------------------------------------


def oseen_l2_difference_sq(t1: float, t2: float, pitch: float) -> float:
    """Squared L2(box) norm of u_LO(t2) - u_LO(t1).

    Evaluates to (L/2) ln((1+rho)^2 / (4 rho)) with rho = (1+t2)/(1+t1).
    """
    rho = (1.0 + t2) / (1.0 + t1)
    return 0.5 * pitch * float(np.log((1.0 + rho) ** 2 / (4.0 * rho)))


def oseen_grad_l2_sq(t: float, pitch: float) -> float:
    """Squared L2(box) norm of grad u_LO(t): L / (4 (1+t))."""
    return pitch / (4.0 * (1.0 + t))


def oseen_grad_l2_difference_sq(t1: float, t2: float, pitch: float) -> float:
    """Squared L2(box) norm of grad(u_LO(t2) - u_LO(t1)).

    Evaluates to (L/4) (s2-s1)^2 / (s1 s2 (s1+s2)) with s_i = 1 + t_i.
    """
    s1, s2 = 1.0 + t1, 1.0 + t2
    return 0.25 * pitch * (s2 - s1) ** 2 / (s1 * s2 * (s1 + s2))


# --- seeded helical perturbations -------------------------------------------


def random_helical_perturbation(
    spec: PerturbationSpec, grid: GridSpec, ops: SpectralOps | None = None
) -> np.ndarray:
    """Seeded, divergence-free, helical velocity field with target H1 norm.

    Each requested azimuthal mode n contributes helical scalars of the form
    ``e^{i n (theta - z/L)} (r/sigma)^{|n|} exp(-r^2/(2 sigma^2))`` with
    seeded complex coefficients.  A helical stream field is assembled from
    them: its vertical component uses that envelope directly and its
    horizontal pair carries one extra factor of ``(x + i y)/sigma`` so that
    every Cartesian component is smooth at the axis (the bare ``r^{|n|}``
    envelope is not differentiable there for the horizontal pair).  The
    velocity is the spectral curl of the stream field — divergence-free by
    construction and localized, so the Leray projection applied afterwards
    is an identity safeguard rather than a correction (projecting a
    non-solenoidal draw would introduce periodic-image potentials that break
    helical symmetry at measurable levels).  The result is rescaled to the
    requested H1 amplitude.

    Returns spectral coefficients of shape (3, nx, ny, nz//2+1).
    """
    if ops is None:
        ops = SpectralOps(grid)
    if spec.sigma > grid.Lx / 16.0:
        raise ValueError(
            f"envelope sigma={spec.sigma} too wide for box Lx={grid.Lx} "
            "(requires sigma <= Lx/16)"
        )
    for n in spec.modes:
        if n < 0:
            raise ValueError("helical mode numbers must be >= 0")
    if spec.amplitude == 0.0:
        return np.zeros((3,) + grid.spectral_shape, dtype=complex)

    rng = np.random.default_rng(np.random.PCG64(spec.seed))
    xc = grid.xc[..., None]
    yc = grid.yc[..., None]
    z = grid.z.reshape(1, 1, -1)
    L = grid.pitch
    zeta = (xc + 1j * yc) / spec.sigma
    envelope = np.exp(-(xc**2 + yc**2) / (2.0 * spec.sigma**2))

    # D-invariant scalar built from the requested modes (D = helical derivative)
    S = np.zeros(grid.shape, dtype=complex)
    Z = np.zeros(grid.shape, dtype=complex)
    for n in spec.modes:
        c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        helix = zeta**n * np.exp(-1j * n * z / L)
        S = S + c[0] * helix
        Z = Z + c[1] * helix
        if n > 0:
            d = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            anti = np.conj(zeta) ** n * np.exp(1j * n * z / L)
            S = S + d[0] * anti
            Z = Z + d[1] * anti
    w_horiz = zeta * S * envelope
    psi = np.stack([w_horiz.real, w_horiz.imag, (Z * envelope).real])

    U = ops.leray(ops.curl(ops.fwd(psi)))
    h1 = np.sqrt(ops.l2_norm_sq(U) + ops.grad_norm_sq(U))
    if h1 == 0.0:
        raise ValueError("degenerate perturbation draw: zero field before rescaling")
    return U * (spec.amplitude / h1)
